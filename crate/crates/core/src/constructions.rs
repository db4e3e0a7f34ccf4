//! Two explicit families with poor product mixing.
//!
//! * Kedlaya sets: `{π : π(b) ∈ T, π(T) ⊆ Tᶜ}` for a basepoint `b ∉ T`. Every
//!   product of two members sends `b` into `Tᶜ`, so the set is product-free.
//! * Surplus sets: `X_T = {g : g(T) ∩ T ≠ ∅}`, which have noticeably more
//!   solutions to `xy = z` than their density predicts when `|T|` is small.
//!
//! Both families expose a membership predicate usable at any degree and a
//! constructive uniform sampler (fix the constrained images first, then
//! extend uniformly).

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive};
use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PermixError, Result};
use crate::group::sampling::{extend_uniformly, uniform_permutation};
use crate::group::{GroupSpace, GroupSubset, ParityFilter, Permutation};

fn validate_points(n: usize, points: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &p in points {
        if p >= n {
            return Err(PermixError::IndexOutOfRange { index: p, n });
        }
        if mask[p] {
            return Err(PermixError::Domain(format!("point {p} listed twice")));
        }
        mask[p] = true;
    }
    Ok(mask)
}

/// Attempts before a rejection-based sampler reports failure.
const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KedlayaParams {
    n: usize,
    basepoint: usize,
    set: Vec<usize>,
    mask: Vec<bool>,
}

impl KedlayaParams {
    /// `basepoint` and `set` are 0-based points of Ω.
    pub fn new(n: usize, basepoint: usize, mut set: Vec<usize>) -> Result<Self> {
        let mask = validate_points(n, &set)?;
        if basepoint >= n {
            return Err(PermixError::IndexOutOfRange {
                index: basepoint,
                n,
            });
        }
        if mask[basepoint] {
            return Err(PermixError::Domain(format!(
                "basepoint {} lies in T",
                basepoint + 1
            )));
        }
        let t = set.len();
        if t == 0 || 2 * t + 1 > n {
            return Err(PermixError::Domain(format!(
                "need 1 ≤ t and 2t + 1 ≤ n, got t = {t}, n = {n}"
            )));
        }
        set.sort_unstable();
        Ok(Self {
            n,
            basepoint,
            set,
            mask,
        })
    }

    /// Basepoint `0` and `T = {1, .., t}`.
    pub fn canonical(n: usize, t: usize) -> Result<Self> {
        Self::new(n, 0, (1..=t).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.set.len()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn set(&self) -> &[usize] {
        &self.set
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        p.n() == self.n
            && self.mask[p.apply(self.basepoint)]
            && self.set.iter().all(|&i| !self.mask[p.apply(i)])
    }

    /// Uniform member of the set within S_n or A_n.
    pub fn sample(&self, parity: ParityFilter, rng: &mut impl Rng) -> Result<Permutation> {
        for _ in 0..MAX_REJECTIONS {
            let mut partial = vec![None; self.n];
            partial[self.basepoint] = Some(*self.set.choose(rng).expect("t ≥ 1"));
            let complement: Vec<usize> = (0..self.n).filter(|&v| !self.mask[v]).collect();
            let mut picks = index::sample(rng, complement.len(), self.t()).into_vec();
            picks.shuffle(rng);
            for (&i, &k) in self.set.iter().zip(&picks) {
                partial[i] = Some(complement[k]);
            }
            match extend_uniformly(&partial, parity, rng) {
                Ok(p) => return Ok(p),
                // a single free point cannot repair parity; redraw everything
                Err(PermixError::Precondition(_)) => {
                    let p = extend_uniformly(&partial, ParityFilter::All, rng)?;
                    if parity.admits(&p) {
                        return Ok(p);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Err(PermixError::RejectionRate {
            min_rate: 1.0 / MAX_REJECTIONS as f64,
        })
    }

    /// Exact density, when it is known in closed form: always in S_n, and in
    /// A_n when at least two points are unconstrained (so the parity swap is
    /// a bijection between the odd and even members).
    pub fn exact_density(&self, parity: ParityFilter) -> Option<f64> {
        let s_n = kedlaya_density_formula(self.n, self.t()).ok()?.value;
        match parity {
            ParityFilter::All => Some(s_n),
            ParityFilter::Even if self.n - self.t() > 2 => Some(s_n),
            ParityFilter::Even => None,
        }
    }
}

pub fn kedlaya_set(space: &GroupSpace, params: &KedlayaParams) -> Result<GroupSubset> {
    if space.n() != params.n {
        return Err(PermixError::DomainMismatch(format!(
            "parameters for n = {} used on {}",
            params.n,
            space.name()
        )));
    }
    Ok(GroupSubset::from_predicate(space, |p| params.contains(p)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KedlayaDensity {
    /// `t · C(n-t, t) · t! · (n-t-1)! / n!`
    #[serde(serialize_with = "serialize_ratio")]
    pub binomial_form: BigRational,
    /// `t (n-t)! (n-t-1)! / (n! (n-2t)!)`
    #[serde(serialize_with = "serialize_ratio")]
    pub closed_form: BigRational,
    pub value: f64,
}

fn serialize_ratio<S: serde::Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn big_factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn big_binomial(n: usize, k: usize) -> BigInt {
    big_factorial(n) / (big_factorial(k) * big_factorial(n - k))
}

/// The S_n density of a Kedlaya set with `|T| = t`, in two algebraic forms.
pub fn kedlaya_density_formula(n: usize, t: usize) -> Result<KedlayaDensity> {
    if t == 0 || 2 * t + 1 > n {
        return Err(PermixError::Domain(format!(
            "need 1 ≤ t and 2t + 1 ≤ n, got t = {t}, n = {n}"
        )));
    }
    let tb = BigInt::from(t);
    let binomial_form = BigRational::new(
        tb.clone() * big_binomial(n - t, t) * big_factorial(t) * big_factorial(n - t - 1),
        big_factorial(n),
    );
    let closed_form = BigRational::new(
        tb * big_factorial(n - t) * big_factorial(n - t - 1),
        big_factorial(n) * big_factorial(n - 2 * t),
    );
    let value = binomial_form.to_f64().expect("density is finite");
    Ok(KedlayaDensity {
        binomial_form,
        closed_form,
        value,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurplusParams {
    n: usize,
    set: Vec<usize>,
    mask: Vec<bool>,
}

impl SurplusParams {
    pub fn new(n: usize, mut set: Vec<usize>) -> Result<Self> {
        let mask = validate_points(n, &set)?;
        if set.is_empty() {
            return Err(PermixError::Domain("T must be nonempty".into()));
        }
        set.sort_unstable();
        Ok(Self { n, set, mask })
    }

    /// `T = {0, .., t-1}`.
    pub fn canonical(n: usize, t: usize) -> Result<Self> {
        Self::new(n, (0..t).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.set.len()
    }

    pub fn set(&self) -> &[usize] {
        &self.set
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        p.n() == self.n && self.set.iter().any(|&i| self.mask[p.apply(i)])
    }

    /// Uniform member of `X_T` within S_n or A_n: draw the images of `T` as a
    /// uniform injection conditioned to meet `T`, then extend.
    pub fn sample(&self, parity: ParityFilter, rng: &mut impl Rng) -> Result<Permutation> {
        let t = self.t();
        if parity == ParityFilter::Even && self.n - t < 2 {
            // parity repair impossible; reject on whole permutations
            for _ in 0..MAX_REJECTIONS {
                let p = uniform_permutation(self.n, parity, rng);
                if self.contains(&p) {
                    return Ok(p);
                }
            }
            return Err(PermixError::RejectionRate {
                min_rate: 1.0 / MAX_REJECTIONS as f64,
            });
        }
        for _ in 0..MAX_REJECTIONS {
            let mut images = index::sample(rng, self.n, t).into_vec();
            images.shuffle(rng);
            if images.iter().any(|&v| self.mask[v]) {
                let mut partial = vec![None; self.n];
                for (&i, &v) in self.set.iter().zip(&images) {
                    partial[i] = Some(v);
                }
                return extend_uniformly(&partial, parity, rng);
            }
        }
        Err(PermixError::RejectionRate {
            min_rate: 1.0 / MAX_REJECTIONS as f64,
        })
    }

    /// `1 - C(n-t, t) / C(n, t)`: the images of `T` form a uniform t-subset in
    /// S_n, and in A_n whenever `t ≤ n - 2`.
    pub fn exact_density(&self, parity: ParityFilter) -> Option<f64> {
        let (n, t) = (self.n, self.t());
        if parity == ParityFilter::Even && n - t < 2 {
            return None;
        }
        if 2 * t > n {
            return Some(1.0);
        }
        let miss = BigRational::new(big_binomial(n - t, t), big_binomial(n, t));
        Some(1.0 - miss.to_f64()?)
    }
}

pub fn surplus_set(space: &GroupSpace, params: &SurplusParams) -> Result<GroupSubset> {
    if space.n() != params.n {
        return Err(PermixError::DomainMismatch(format!(
            "parameters for n = {} used on {}",
            params.n,
            space.name()
        )));
    }
    let x = GroupSubset::from_predicate(space, |p| params.contains(p));
    debug_assert!(x.is_inverse_closed());
    Ok(x)
}

pub(crate) fn common_space<'a>(sets: &[&'a GroupSubset]) -> Result<&'a GroupSpace> {
    let space = sets[0].space();
    for s in &sets[1..] {
        if s.space() != space {
            return Err(PermixError::DomainMismatch(format!(
                "{} vs {}",
                space.name(),
                s.space().name()
            )));
        }
    }
    Ok(space)
}

/// `#{(x, y) ∈ X × Y : xy ∈ Z}`, exactly.
pub fn count_solutions(x: &GroupSubset, y: &GroupSubset, z: &GroupSubset) -> Result<u64> {
    let space = common_space(&[x, y, z])?;
    let ys = y.ranks();
    Ok(x.ranks()
        .par_iter()
        .map(|&a| {
            ys.iter()
                .filter(|&&b| z.contains_rank(space.product_rank(a, b)))
                .count() as u64
        })
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurplusRatio {
    pub n: usize,
    pub t: usize,
    pub group: String,
    pub cardinality: usize,
    /// `α = |X_T| / |G|`
    pub density: f64,
    /// `N_T`, the number of solutions to `xy = z` inside `X_T`
    pub solutions: u64,
    /// `N_T / (α³ |G|²)`
    pub excess: f64,
    /// The excess as an exact fraction `N_T |G| / |X_T|³`.
    pub excess_fraction: String,
}

pub fn surplus_ratio(space: &GroupSpace, params: &SurplusParams) -> Result<SurplusRatio> {
    let x = surplus_set(space, params)?;
    if x.is_empty() {
        return Err(PermixError::Domain("X_T is empty (α = 0)".into()));
    }
    let solutions = count_solutions(&x, &x, &x)?;
    let card = x.cardinality() as u128;
    let exact = Ratio::new(
        solutions as u128 * space.order() as u128,
        card * card * card,
    );
    Ok(SurplusRatio {
        n: space.n(),
        t: params.t(),
        group: space.name(),
        cardinality: x.cardinality(),
        density: x.density(),
        solutions,
        excess: exact.to_f64().expect("finite"),
        excess_fraction: exact.to_string(),
    })
}

/// Exact excess for `T = {0, .., t-1}` and each requested `t`.
pub fn surplus_excess_table(space: &GroupSpace, ts: &[usize]) -> Result<Vec<SurplusRatio>> {
    ts.iter()
        .map(|&t| surplus_ratio(space, &SurplusParams::canonical(space.n(), t)?))
        .collect()
}
