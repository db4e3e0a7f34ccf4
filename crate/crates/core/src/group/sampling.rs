//! Seeded randomness. Every random object is reproducible from a `u64` seed;
//! chunked Monte Carlo derives one ChaCha stream per chunk so the output does
//! not depend on how chunks are scheduled across threads.

use bitvec::vec::BitVec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::function::{GroupFunction, GroupSubset, OmegaFunction};
use super::perm::Permutation;
use super::space::{GroupSpace, ParityFilter};
use crate::error::{PermixError, Result};

pub type PermixRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> PermixRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream number `chunk` under `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> PermixRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Each element is included independently with probability `density`.
pub fn random_subset(space: &GroupSpace, density: f64, seed: u64) -> Result<GroupSubset> {
    let mut rng = rng_from_seed(seed);
    random_subset_with(space, density, &mut rng)
}

pub fn random_subset_with(
    space: &GroupSpace,
    density: f64,
    rng: &mut impl Rng,
) -> Result<GroupSubset> {
    if !(0.0..=1.0).contains(&density) {
        return Err(PermixError::Domain(format!(
            "density {density} outside [0, 1]"
        )));
    }
    let membership: BitVec = (0..space.order())
        .map(|_| rng.random_bool(density))
        .collect();
    GroupSubset::from_membership(space, membership)
}

pub fn random_permutation(space: &GroupSpace, seed: u64) -> Permutation {
    let mut rng = rng_from_seed(seed);
    uniform_permutation(space.n(), space.parity(), &mut rng)
}

/// Uniform element of S_n, or of A_n by rejection on parity.
pub fn uniform_permutation(n: usize, parity: ParityFilter, rng: &mut impl Rng) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    loop {
        images.shuffle(rng);
        let p = Permutation::from_vec_unchecked(images.clone());
        if parity.admits(&p) {
            return p;
        }
    }
}

/// Completes a partial injection uniformly at random.
///
/// `partial[i] = Some(v)` fixes `π(i) = v`; the unassigned points receive the
/// unused values as a uniformly random bijection. With `ParityFilter::Even` an
/// odd completion is repaired by swapping the images of two unassigned points,
/// which is a bijection between the odd and even completions, so the result is
/// uniform among even completions. That needs at least two unassigned points.
pub fn extend_uniformly(
    partial: &[Option<usize>],
    parity: ParityFilter,
    rng: &mut impl Rng,
) -> Result<Permutation> {
    let n = partial.len();
    let mut used = vec![false; n];
    for v in partial.iter().flatten() {
        if *v >= n || used[*v] {
            return Err(PermixError::InvalidPermutation(format!(
                "partial assignment is not injective at value {v}"
            )));
        }
        used[*v] = true;
    }
    let free_points: Vec<usize> = (0..n).filter(|&i| partial[i].is_none()).collect();
    let mut free_values: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
    free_values.shuffle(rng);
    let mut images: Vec<usize> = partial.iter().map(|v| v.unwrap_or(usize::MAX)).collect();
    for (&i, &v) in free_points.iter().zip(&free_values) {
        images[i] = v;
    }
    let mut p = Permutation::from_vec_unchecked(images);
    if parity == ParityFilter::Even && !p.is_even() {
        if free_points.len() < 2 {
            return Err(PermixError::Precondition(
                "parity repair needs two unassigned points".into(),
            ));
        }
        p.swap_images(free_points[0], free_points[1]);
    }
    Ok(p)
}

/// Values i.i.d. uniform on `[0, 1)`.
pub fn random_group_function(space: &GroupSpace, rng: &mut impl Rng) -> GroupFunction {
    let values = (0..space.order()).map(|_| rng.random::<f64>()).collect();
    GroupFunction::new(space, values).expect("length matches")
}

/// Values i.i.d. uniform on `[-1, 1)`, then shifted to have integral zero.
pub fn random_mean_zero_function(space: &GroupSpace, rng: &mut impl Rng) -> GroupFunction {
    let values = (0..space.order())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    GroupFunction::new(space, values)
        .expect("length matches")
        .centered()
}

pub fn random_omega_function(n: usize, rng: &mut impl Rng) -> OmegaFunction {
    OmegaFunction::new((0..n).map(|_| rng.random::<f64>()).collect()).expect("n > 0")
}
