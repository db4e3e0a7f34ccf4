//! Product-mixing measurements for subsets of S_n and A_n.

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{common_space, count_solutions, KedlayaParams, SurplusParams};
use crate::error::{PermixError, Result};
use crate::fourier::min_nontrivial_dimension;
use crate::group::sampling::{chunk_rng, uniform_permutation, PermixRng};
use crate::group::{GroupSubset, ParityFilter, Permutation};
use rand::Rng;

/// Upper limit on the number of pair evaluations an exact computation may do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComputeBudget(pub u128);

impl Default for ComputeBudget {
    fn default() -> Self {
        ComputeBudget(2_000_000_000)
    }
}

impl ComputeBudget {
    fn check(&self, required: u128) -> Result<()> {
        if required > self.0 {
            return Err(PermixError::Budget {
                required,
                budget: self.0,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub group: String,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `⟨1_X * 1_Y, 1_Z⟩`
    pub total: f64,
    /// `αβγ`
    pub main: f64,
    pub deviation: f64,
    /// Minimal nontrivial representation dimension used for the bound.
    pub m: Option<usize>,
    /// `m^{-1/2} (αβγ)^{1/2}`
    pub gowers_bound: Option<f64>,
    /// `min(αβ, αγ, βγ) · n / (log n)^7`
    pub threshold_margin: f64,
    pub method: Method,
    pub stderr: f64,
    pub solutions: Option<u64>,
    pub samples: Option<u64>,
    pub hits: Option<u64>,
}

impl MixingReport {
    /// Whether `|total - αβγ| < m^{-1/2}(αβγ)^{1/2}` holds. With an empty set
    /// both sides vanish and the bound counts as satisfied.
    pub fn gowers_holds(&self) -> Option<bool> {
        let bound = self.gowers_bound?;
        Some(self.deviation.abs() < bound || (self.main == 0.0 && self.total == 0.0))
    }
}

pub fn threshold_margin(alpha: f64, beta: f64, gamma: f64, n: usize) -> f64 {
    let pair_min = (alpha * beta).min(alpha * gamma).min(beta * gamma);
    pair_min * n as f64 / (n as f64).ln().powi(7)
}

fn gowers_bound(m: Option<usize>, main: f64) -> Option<f64> {
    m.map(|m| (main / m as f64).sqrt())
}

/// Exact triple count. `m` is the minimal dimension of a nontrivial
/// representation of the group (see [`min_nontrivial_dimension`]).
pub fn mixing_exact(
    x: &GroupSubset,
    y: &GroupSubset,
    z: &GroupSubset,
    m: Option<usize>,
    budget: ComputeBudget,
) -> Result<MixingReport> {
    let space = common_space(&[x, y, z])?;
    budget.check(x.cardinality() as u128 * y.cardinality() as u128)?;
    let m = m.or_else(|| min_nontrivial_dimension(space));
    let solutions = count_solutions(x, y, z)?;
    let order = space.order() as f64;
    let (alpha, beta, gamma) = (x.density(), y.density(), z.density());
    let total = solutions as f64 / (order * order);
    let main = alpha * beta * gamma;
    Ok(MixingReport {
        group: space.name(),
        n: space.n(),
        alpha,
        beta,
        gamma,
        total,
        main,
        deviation: total - main,
        m,
        gowers_bound: gowers_bound(m, main),
        threshold_margin: threshold_margin(alpha, beta, gamma, space.n()),
        method: Method::Exact,
        stderr: 0.0,
        solutions: Some(solutions),
        samples: None,
        hits: None,
    })
}

/// A set of permutations described by a membership predicate, usable without
/// enumerating the group.
pub trait PermutationFamily: Sync {
    fn degree(&self) -> usize;

    fn contains(&self, p: &Permutation) -> bool;

    /// A uniform member of the family within S_n or A_n.
    fn sample(&self, parity: ParityFilter, rng: &mut PermixRng) -> Result<Permutation> {
        rejection_sample(self, parity, rng)
    }

    fn exact_density(&self, _parity: ParityFilter) -> Option<f64> {
        None
    }
}

/// Smallest acceptance rate the rejection sampler tolerates.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

pub fn rejection_sample<F: PermutationFamily + ?Sized>(
    family: &F,
    parity: ParityFilter,
    rng: &mut PermixRng,
) -> Result<Permutation> {
    let attempts = (1.0 / MIN_ACCEPTANCE) as usize;
    for _ in 0..attempts {
        let p = uniform_permutation(family.degree(), parity, rng);
        if family.contains(&p) {
            return Ok(p);
        }
    }
    Err(PermixError::RejectionRate {
        min_rate: MIN_ACCEPTANCE,
    })
}

/// Every permutation of the given degree.
#[derive(Clone, Copy, Debug)]
pub struct Everything(pub usize);

impl PermutationFamily for Everything {
    fn degree(&self) -> usize {
        self.0
    }

    fn contains(&self, p: &Permutation) -> bool {
        p.n() == self.0
    }

    fn sample(&self, parity: ParityFilter, rng: &mut PermixRng) -> Result<Permutation> {
        Ok(uniform_permutation(self.0, parity, rng))
    }

    fn exact_density(&self, _parity: ParityFilter) -> Option<f64> {
        Some(1.0)
    }
}

impl PermutationFamily for KedlayaParams {
    fn degree(&self) -> usize {
        self.n()
    }

    fn contains(&self, p: &Permutation) -> bool {
        KedlayaParams::contains(self, p)
    }

    fn sample(&self, parity: ParityFilter, rng: &mut PermixRng) -> Result<Permutation> {
        KedlayaParams::sample(self, parity, rng)
    }

    fn exact_density(&self, parity: ParityFilter) -> Option<f64> {
        KedlayaParams::exact_density(self, parity)
    }
}

impl PermutationFamily for SurplusParams {
    fn degree(&self) -> usize {
        self.n()
    }

    fn contains(&self, p: &Permutation) -> bool {
        SurplusParams::contains(self, p)
    }

    fn sample(&self, parity: ParityFilter, rng: &mut PermixRng) -> Result<Permutation> {
        SurplusParams::sample(self, parity, rng)
    }

    fn exact_density(&self, parity: ParityFilter) -> Option<f64> {
        SurplusParams::exact_density(self, parity)
    }
}

/// An enumerated subset viewed as a family; only meaningful for the parity
/// of its own space.
pub struct SubsetFamily<'a> {
    subset: &'a GroupSubset,
    ranks: Vec<usize>,
}

impl<'a> SubsetFamily<'a> {
    pub fn new(subset: &'a GroupSubset) -> Self {
        Self {
            subset,
            ranks: subset.ranks(),
        }
    }
}

impl PermutationFamily for SubsetFamily<'_> {
    fn degree(&self) -> usize {
        self.subset.space().n()
    }

    fn contains(&self, p: &Permutation) -> bool {
        self.subset.contains(p)
    }

    fn sample(&self, _parity: ParityFilter, rng: &mut PermixRng) -> Result<Permutation> {
        if self.ranks.is_empty() {
            return Err(PermixError::RejectionRate {
                min_rate: MIN_ACCEPTANCE,
            });
        }
        let r = self.ranks[rng.random_range(0..self.ranks.len())];
        Ok(self.subset.space().element(r))
    }

    fn exact_density(&self, _parity: ParityFilter) -> Option<f64> {
        Some(self.subset.density())
    }
}

/// Samples per independently seeded chunk.
pub const MC_CHUNK: u64 = 4096;

/// Stream offset for density estimation, disjoint from the sample chunks.
const DENSITY_STREAM_BASE: u64 = 1 << 40;

fn density_of<F: PermutationFamily + ?Sized>(
    family: &F,
    parity: ParityFilter,
    samples: u64,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let density = match family.exact_density(parity) {
        Some(d) => d,
        None => {
            let chunks = samples.div_ceil(MC_CHUNK);
            let hits: u64 = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chunk_rng(seed, DENSITY_STREAM_BASE + stream * (1 << 32) + c);
                    let len = MC_CHUNK.min(samples - c * MC_CHUNK);
                    (0..len)
                        .filter(|_| {
                            family.contains(&uniform_permutation(family.degree(), parity, &mut rng))
                        })
                        .count() as u64
                })
                .sum();
            hits as f64 / samples as f64
        }
    };
    if density < MIN_ACCEPTANCE {
        return Err(PermixError::RejectionRate {
            min_rate: MIN_ACCEPTANCE,
        });
    }
    Ok(density)
}

/// Monte Carlo estimate of `⟨1_X * 1_Y, 1_Z⟩` for families given by
/// predicates.
///
/// Draws `x ∈ X` and `y ∈ Y` uniformly and records whether `xy ∈ Z`; the hit
/// rate `p̂` estimates `P(xy ∈ Z | x ∈ X, y ∈ Y)`, so `total = αβp̂`. Densities
/// are exact when the family knows them and are otherwise estimated from
/// `samples` uniform draws. The standard error is the binomial one for `p̂`,
/// scaled by `αβ`. Output depends only on `seed`, never on the thread count.
pub fn mixing_monte_carlo(
    x: &dyn PermutationFamily,
    y: &dyn PermutationFamily,
    z: &dyn PermutationFamily,
    parity: ParityFilter,
    samples: u64,
    seed: u64,
    m: Option<usize>,
) -> Result<MixingReport> {
    let n = x.degree();
    if y.degree() != n || z.degree() != n {
        return Err(PermixError::DomainMismatch(format!(
            "families of degrees {}, {}, {}",
            n,
            y.degree(),
            z.degree()
        )));
    }
    if samples == 0 {
        return Err(PermixError::Domain("need at least one sample".into()));
    }
    let alpha = density_of(x, parity, samples, seed, 0)?;
    let beta = density_of(y, parity, samples, seed, 1)?;
    let gamma = density_of(z, parity, samples, seed, 2)?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let per_chunk: Vec<Result<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut hits = 0;
            for _ in 0..len {
                let a = x.sample(parity, &mut rng)?;
                let b = y.sample(parity, &mut rng)?;
                if z.contains(&a.compose(&b)) {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let mut hits = 0;
    for h in per_chunk {
        hits += h?;
    }
    let p = hits as f64 / samples as f64;
    let total = alpha * beta * p;
    let main = alpha * beta * gamma;
    let group = match parity {
        ParityFilter::All => format!("S_{n}"),
        ParityFilter::Even => format!("A_{n}"),
    };
    let m = m.or(match parity {
        ParityFilter::Even if n >= 7 => Some(n - 1),
        _ => None,
    });
    Ok(MixingReport {
        group,
        n,
        alpha,
        beta,
        gamma,
        total,
        main,
        deviation: total - main,
        m,
        gowers_bound: gowers_bound(m, main),
        threshold_margin: threshold_margin(alpha, beta, gamma, n),
        method: Method::MonteCarlo,
        stderr: alpha * beta * (p * (1.0 - p) / samples as f64).sqrt(),
        solutions: None,
        samples: Some(samples),
        hits: Some(hits),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductFreeCheck {
    pub product_free: bool,
    /// `(x, y, xy)` with all three in the set, when one exists.
    pub witness: Option<(Permutation, Permutation, Permutation)>,
}

/// Searches `X × X` for a solution of `xy ∈ X`; the witness returned is the
/// first in rank order.
pub fn product_free_check(x: &GroupSubset, budget: ComputeBudget) -> Result<ProductFreeCheck> {
    let card = x.cardinality() as u128;
    budget.check(card * card)?;
    let space = x.space();
    let ranks = x.ranks();
    let found = ranks.par_iter().find_map_first(|&a| {
        ranks
            .iter()
            .find(|&&b| x.contains_rank(space.product_rank(a, b)))
            .map(|&b| (a, b))
    });
    Ok(match found {
        None => ProductFreeCheck {
            product_free: true,
            witness: None,
        },
        Some((a, b)) => ProductFreeCheck {
            product_free: false,
            witness: Some((
                space.element(a),
                space.element(b),
                space.element(space.product_rank(a, b)),
            )),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionMargin {
    pub name: &'static str,
    /// The ratio `αβγ / (error term)` with every implicit constant set to 1.
    pub margin: f64,
    pub log_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionMargins {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub conditions: Vec<ConditionMargin>,
    /// `min(αβ, αγ, βγ) · n / (log n)^7`
    pub summary: f64,
    pub summary_log: f64,
}

/// The five sufficient conditions for one-sided mixing, each reported as the
/// ratio of `αβγ` to the corresponding error term. The ratios are computed in
/// log space; `αβγ n^98` overflows for moderate `n`.
pub fn main_theorem_conditions(
    alpha: f64,
    beta: f64,
    gamma: f64,
    n: usize,
) -> Result<ConditionMargins> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(PermixError::Domain(format!("{name} = {v} outside (0, 1]")));
        }
    }
    if n < 3 {
        return Err(PermixError::Domain(format!("n = {n} below 3")));
    }
    let (la, lb, lg) = (alpha.ln(), beta.ln(), gamma.ln());
    let ln_n = (n as f64).ln();
    let ln_log = ln_n.ln();
    let logs = [
        ("fourier_tail", 0.5 * (la + lb + lg) + ln_n),
        ("variance_term", 0.5 * (lb + lg) + 0.5 * ln_n - ln_log),
        (
            "entropy_term_beta",
            0.5 * (la + lg) + 0.5 * ln_n - 3.5 * ln_log,
        ),
        (
            "entropy_term_gamma",
            0.5 * (la + lb) + 0.5 * ln_n - 3.5 * ln_log,
        ),
        ("polynomial_floor", la + lb + lg + 98.0 * ln_n),
    ];
    let conditions = logs
        .iter()
        .map(|&(name, l)| ConditionMargin {
            name,
            margin: l.exp(),
            log_margin: l,
        })
        .collect();
    let summary_log = (la + lb).min(la + lg).min(lb + lg) + ln_n - 7.0 * ln_log;
    Ok(ConditionMargins {
        n,
        alpha,
        beta,
        gamma,
        conditions,
        summary: summary_log.exp(),
        summary_log,
    })
}
