//! Permutations, enumerated groups, and functions on them.

pub mod calculus;
pub mod function;
pub mod perm;
pub mod sampling;
pub mod space;

pub use calculus::{
    convolve_group, convolve_group_omega, convolve_subsets, entropy, inner_product, integral,
    l2_norm, l2_norm_sq, pushforward, pushforwards, xlogx,
};
pub use function::{GroupFunction, GroupSubset, OmegaFunction, UniformFunction};
pub use perm::Permutation;
pub use sampling::{random_permutation, random_subset, PermixRng};
pub use space::{factorial, EnumerationCap, GroupSpace, ParityFilter, HARD_MAX_N};
