//! Exact rational arithmetic for small groups (n ≤ 6), used as ground truth
//! for the floating-point paths.

use num_rational::Ratio;
use serde::Serialize;

use crate::constructions::count_solutions;
use crate::error::{PermixError, Result};
use crate::group::{GroupSpace, GroupSubset};

pub type Rational = Ratio<i128>;

pub const RATIONAL_MODE_MAX_N: usize = 6;

pub fn check_rational_mode(space: &GroupSpace) -> Result<()> {
    if space.n() > RATIONAL_MODE_MAX_N {
        return Err(PermixError::SizeCap {
            n: space.n(),
            cap: RATIONAL_MODE_MAX_N,
            group: "exact rational mode",
        });
    }
    Ok(())
}

/// The three-term split of `⟨1_X * 1_Y, 1_Z⟩` in exact arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDecomposition {
    pub solutions: u64,
    pub total: Rational,
    pub main_term: Rational,
    pub sigma_term: Rational,
    pub remainder: Rational,
}

#[derive(Serialize)]
struct ExactDecompositionStrings {
    solutions: u64,
    total: String,
    main_term: String,
    sigma_term: String,
    remainder: String,
}

impl Serialize for ExactDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExactDecompositionStrings {
            solutions: self.solutions,
            total: self.total.to_string(),
            main_term: self.main_term.to_string(),
            sigma_term: self.sigma_term.to_string(),
            remainder: self.remainder.to_string(),
        }
        .serialize(s)
    }
}

/// `C[ω][i] = #{π ∈ X : π(i) = ω}`.
fn position_counts(x: &GroupSubset) -> Vec<i128> {
    let space = x.space();
    let n = space.n();
    let mut c = vec![0i128; n * n];
    for r in x.ranks() {
        for i in 0..n {
            c[space.image_of(r, i) * n + i] += 1;
        }
    }
    c
}

pub fn decompose_subsets_exact(
    x: &GroupSubset,
    y: &GroupSubset,
    z: &GroupSubset,
) -> Result<ExactDecomposition> {
    let space = x.space();
    check_rational_mode(space)?;
    let solutions = count_solutions(x, y, z)?;
    let order = space.order() as i128;
    let n = space.n();
    let (cx, cy, cz) = (position_counts(x), position_counts(y), position_counts(z));
    // ⟨C_X C_Y, C_Z⟩ as an integer; the coefficients are C / |G|
    let mut pairing: i128 = 0;
    for w in 0..n {
        for i in 0..n {
            let prod: i128 = (0..n).map(|k| cx[w * n + k] * cy[k * n + i]).sum();
            pairing += prod * cz[w * n + i];
        }
    }
    let (a, b, c) = (
        x.cardinality() as i128,
        y.cardinality() as i128,
        z.cardinality() as i128,
    );
    let cube = order * order * order;
    let total = Rational::new(solutions as i128, order * order);
    let main_term = Rational::new(a * b * c, cube);
    let sigma_term = Rational::new((n as i128 - 1) * (pairing - a * b * c), cube);
    let remainder = total - main_term - sigma_term;
    Ok(ExactDecomposition {
        solutions,
        total,
        main_term,
        sigma_term,
        remainder,
    })
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
