//! Hoeffding's statistic `X = Σ_i a_{iπ(i)}` for a uniform permutation `π`:
//! exact distributions, Bernstein-type tail bounds, the exponential-moment
//! inequality, and the dyadic level-set experiments built on top of them.

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PermixError, Result};
use crate::group::sampling::{chunk_rng, uniform_permutation};
use crate::group::space::Images;
use crate::group::{
    convolve_group_omega, entropy, integral, l2_norm, GroupFunction, GroupSpace, OmegaFunction,
    ParityFilter, Permutation, UniformFunction,
};
use crate::mixing::MC_CHUNK;

/// Default constant in the Bernstein bound; see [`bernstein_bound`].
pub const DEFAULT_BERNSTEIN_C: f64 = 1.0 / 16.0;

/// Default magnitude below which dyadic pieces are dropped.
pub const DEFAULT_DYADIC_FLOOR: f64 = 1e-15;

/// Tolerance for "row sums are zero", relative to `max(1, M)`.
const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// An `n × n` real matrix `(a_ij)` defining Hoeffding's statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationInstance {
    n: usize,
    /// Row-major entries.
    a: Vec<f64>,
    /// Constant subtracted by [`ConcentrationInstance::center`]: the original
    /// statistic equals the current one plus `shift`.
    shift: f64,
    centered: bool,
}

impl ConcentrationInstance {
    pub fn new(n: usize, a: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(PermixError::Domain("matrix must be at least 1 × 1".into()));
        }
        if a.len() != n * n {
            return Err(PermixError::DomainMismatch(format!(
                "{} entries for a {n} × {n} matrix",
                a.len()
            )));
        }
        if let Some(v) = a.iter().find(|v| !v.is_finite()) {
            return Err(PermixError::ValueRange(format!("non-finite entry {v}")));
        }
        Ok(Self {
            n,
            a,
            shift: 0.0,
            centered: false,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(PermixError::DomainMismatch(format!(
                "row of length {} in a matrix with {n} rows",
                r.len()
            )));
        }
        Self::new(n, rows.concat())
    }

    /// Entries i.i.d. uniform on `[-1, 1)`.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let a = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self::new(n, a).expect("valid shape")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.a
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// `M = max |a_ij|`
    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `v = (1/n) Σ a_ij²`
    pub fn variance_proxy(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>() / self.n as f64
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.a.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn rows_sum_to_zero(&self) -> bool {
        let tol = ROW_SUM_TOLERANCE * self.max_abs().max(1.0) * self.n as f64;
        self.row_sums().iter().all(|s| s.abs() <= tol)
    }

    /// Subtracts each row mean. The statistic moves by the constant
    /// `Σ_i mean_i`, which is recorded in `shift`; `M` at most doubles and `v`
    /// does not increase.
    pub fn center(&self) -> Self {
        let n = self.n;
        let mut a = self.a.clone();
        let mut shift = self.shift;
        for row in a.chunks_mut(n) {
            let mean = row.iter().sum::<f64>() / n as f64;
            row.iter_mut().for_each(|v| *v -= mean);
            shift += mean;
        }
        Self {
            n,
            a,
            shift,
            centered: true,
        }
    }

    pub fn statistic(&self, p: &Permutation) -> f64 {
        self.statistic_images(p.images().iter().copied())
    }

    #[inline]
    fn statistic_images(&self, images: impl Iterator<Item = usize>) -> f64 {
        images
            .enumerate()
            .map(|(i, j)| self.a[i * self.n + j])
            .sum()
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(PermixError::DomainMismatch(format!(
                "{0} × {0} matrix on permutations of degree {n}",
                self.n
            )));
        }
        Ok(())
    }
}

/// One value of `X` and the number of permutations attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub value: f64,
    pub count: u64,
}

/// The exact law of `X` under the uniform measure on a group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoeffdingDistribution {
    pub group: String,
    pub order: u64,
    /// Sorted by value. Values closer than `1e-12 · max(1, max|X|)` are merged,
    /// since floating-point sums of equal reals may differ in the last bits.
    pub atoms: Vec<Atom>,
}

impl HoeffdingDistribution {
    pub fn probability(&self, k: usize) -> f64 {
        self.atoms[k].count as f64 / self.order as f64
    }

    /// Masses as exact fractions of the group order.
    pub fn rational_masses(&self) -> Vec<Ratio<i128>> {
        self.atoms
            .iter()
            .map(|a| Ratio::new(a.count as i128, self.order as i128))
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x)
    }

    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.count as f64 * f(a.value))
            .sum::<f64>()
            / self.order as f64
    }

    /// `E exp(λX)`
    pub fn exp_moment(&self, lambda: f64) -> f64 {
        self.expectation(|x| (lambda * x).exp())
    }

    /// `P(|X| > t)`
    pub fn tail(&self, t: f64) -> f64 {
        let hits: u64 = self
            .atoms
            .iter()
            .filter(|a| a.value.abs() > t)
            .map(|a| a.count)
            .sum();
        hits as f64 / self.order as f64
    }

    /// The distinct positive values `u` of `|X|` with `P(|X| ≥ u)`.
    pub fn abs_tail_points(&self) -> Vec<(f64, f64)> {
        let mut abs: Vec<(f64, u64)> = self
            .atoms
            .iter()
            .map(|a| (a.value.abs(), a.count))
            .collect();
        abs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut cum = 0u64;
        let mut i = 0;
        while i < abs.len() {
            let u = abs[i].0;
            while i < abs.len() && abs[i].0 == u {
                cum += abs[i].1;
                i += 1;
            }
            if u > 0.0 {
                out.push((u, cum as f64 / self.order as f64));
            }
        }
        out.reverse();
        out
    }
}

/// Exact distribution of `X` over a uniform element of `space`.
pub fn hoeffding_exact_distribution(
    inst: &ConcentrationInstance,
    space: &GroupSpace,
) -> Result<HoeffdingDistribution> {
    inst.check_degree(space.n())?;
    let n = space.n();
    let mut values: Vec<f64> = (0..space.order())
        .into_par_iter()
        .map_init(
            || [0u8; crate::group::HARD_MAX_N] as Images,
            |buf, r| {
                space.load(r, buf);
                inst.statistic_images(buf[..n].iter().map(|&b| b as usize))
            },
        )
        .collect();
    values.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut atoms: Vec<Atom> = Vec::new();
    for v in values {
        match atoms.last_mut() {
            Some(last) if v - last.value <= tol => last.count += 1,
            _ => atoms.push(Atom { value: v, count: 1 }),
        }
    }
    Ok(HoeffdingDistribution {
        group: space.name(),
        order: space.order() as u64,
        atoms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: f64,
    pub p_hat: f64,
    pub stderr: f64,
}

/// Monte Carlo estimates of `P(|X| > t)` for each threshold, from `samples`
/// uniform permutations of the given parity.
pub fn hoeffding_monte_carlo_tail(
    inst: &ConcentrationInstance,
    parity: ParityFilter,
    thresholds: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    if samples == 0 {
        return Err(PermixError::Domain("need at least one sample".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let zero = vec![0u64; thresholds.len()];
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut counts = vec![0u64; thresholds.len()];
            for _ in 0..MC_CHUNK.min(samples - c * MC_CHUNK) {
                let x = inst
                    .statistic(&uniform_permutation(inst.n, parity, &mut rng))
                    .abs();
                for (k, &t) in thresholds.iter().enumerate() {
                    if x > t {
                        counts[k] += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || zero.clone(),
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(thresholds
        .iter()
        .zip(counts)
        .map(|(&t, c)| {
            let p = c as f64 / samples as f64;
            TailEstimate {
                t,
                p_hat: p,
                stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            }
        })
        .collect())
}

/// `2 exp(-c t² / (v + M t))`.
///
/// With rows summing to zero the exponential-moment argument yields
/// `c = 1/8`; a matrix whose entries only sum to zero must be row-centered
/// first, which can double `M`, whence the default `c = 1/16`.
pub fn bernstein_bound(inst: &ConcentrationInstance, t: f64, c: f64) -> Result<f64> {
    if t.is_nan() || c.is_nan() || t <= 0.0 || c <= 0.0 {
        return Err(PermixError::Domain(format!(
            "need t > 0 and c > 0, got t = {t}, c = {c}"
        )));
    }
    let denom = inst.variance_proxy() + inst.max_abs() * t;
    Ok(2.0 * (-c * t * t / denom).exp())
}

/// The largest `c` for which `2 exp(-c t²/(v + M t)) ≥ P(|X| > t)` for every
/// `t > 0`, or `None` when `X ≡ 0` (any `c` works).
///
/// The tail is a step function that is left-continuous in the sense relevant
/// here: its supremum just below an atom `u` of `|X|` is `P(|X| ≥ u)`, so the
/// binding constraints are `c ≤ (v + M u)/u² · log(2 / P(|X| ≥ u))`.
pub fn fitted_bernstein_constant(
    inst: &ConcentrationInstance,
    dist: &HoeffdingDistribution,
) -> Option<f64> {
    let (v, m) = (inst.variance_proxy(), inst.max_abs());
    dist.abs_tail_points()
        .into_iter()
        .map(|(u, p)| (v + m * u) / (u * u) * (2.0 / p).ln())
        .min_by(|a, b| a.total_cmp(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpMomentPair {
    pub lambda: f64,
    /// `E exp(λX)`
    pub exact: f64,
    /// `exp(2λ²v / (1 - 2λM))`
    pub bound: f64,
}

impl ExpMomentPair {
    pub fn holds(&self, slack: f64) -> bool {
        self.exact <= self.bound * (1.0 + slack)
    }
}

pub fn exp_moment_bound(inst: &ConcentrationInstance, lambda: f64) -> Result<f64> {
    let m = inst.max_abs();
    if lambda.is_nan() || lambda <= 0.0 || 2.0 * lambda * m >= 1.0 {
        return Err(PermixError::Domain(format!(
            "need 0 < 2λM < 1, got λ = {lambda}, M = {m}"
        )));
    }
    if !inst.rows_sum_to_zero() {
        return Err(PermixError::Precondition(
            "rows must sum to zero; center the matrix first".into(),
        ));
    }
    Ok((2.0 * lambda * lambda * inst.variance_proxy() / (1.0 - 2.0 * lambda * m)).exp())
}

pub fn exp_moment_pair(
    inst: &ConcentrationInstance,
    lambda: f64,
    space: &GroupSpace,
) -> Result<ExpMomentPair> {
    let dist = hoeffding_exact_distribution(inst, space)?;
    exp_moment_pair_from(inst, &dist, lambda)
}

/// As [`exp_moment_pair`], reusing a computed distribution.
pub fn exp_moment_pair_from(
    inst: &ConcentrationInstance,
    dist: &HoeffdingDistribution,
    lambda: f64,
) -> Result<ExpMomentPair> {
    let bound = exp_moment_bound(inst, lambda)?;
    Ok(ExpMomentPair {
        lambda,
        exact: dist.exp_moment(lambda),
        bound,
    })
}

/// `λ_k = k / (2M (points + 1))` for `k = 1..=points`, spread over `(0, 1/(2M))`.
pub fn lambda_grid(inst: &ConcentrationInstance, points: usize) -> Vec<f64> {
    let m = inst.max_abs().max(f64::MIN_POSITIVE);
    (1..=points)
        .map(|k| k as f64 / (2.0 * m * (points + 1) as f64))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CllStep {
    pub lambda: f64,
    /// `E exp(λX)`
    pub lhs: f64,
    /// `Π_i ((1/n) Σ_j exp(2λ a_ij))^{1/2}`
    pub rhs: f64,
}

impl CllStep {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + slack)
    }
}

pub fn cll_step_rhs(inst: &ConcentrationInstance, lambda: f64) -> f64 {
    let n = inst.n as f64;
    let log: f64 = inst
        .a
        .chunks(inst.n)
        .map(|row| 0.5 * (row.iter().map(|&a| (2.0 * lambda * a).exp()).sum::<f64>() / n).ln())
        .sum();
    log.exp()
}

pub fn cll_exp_moment_step(
    inst: &ConcentrationInstance,
    lambda: f64,
    space: &GroupSpace,
) -> Result<CllStep> {
    let dist = hoeffding_exact_distribution(inst, space)?;
    Ok(cll_exp_moment_step_from(inst, &dist, lambda))
}

pub fn cll_exp_moment_step_from(
    inst: &ConcentrationInstance,
    dist: &HoeffdingDistribution,
    lambda: f64,
) -> CllStep {
    CllStep {
        lambda,
        lhs: dist.exp_moment(lambda),
        rhs: cll_step_rhs(inst, lambda),
    }
}

/// The part of `g - ∫g` with the sign of `s` and magnitude in `(|s|/2, |s|]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicPiece {
    /// `±2^{-k}`
    pub s: f64,
    pub k: u32,
    pub values: OmegaFunction,
    /// Density of the support.
    pub delta: f64,
}

fn dyadic_band(magnitude: f64) -> u32 {
    // 2^{-k-1} < magnitude ≤ 2^{-k}; the float guess is corrected exactly
    let mut k = (-magnitude.log2()).floor().max(0.0) as i32;
    while k > 0 && magnitude > 2f64.powi(-k) {
        k -= 1;
    }
    while magnitude <= 2f64.powi(-k - 1) {
        k += 1;
    }
    k as u32
}

/// Splits `g - ∫g` into dyadic sign/magnitude bands. Entries with
/// `|g - ∫g| ≤ floor` are dropped; pieces come positive before negative, and
/// by decreasing scale within each sign.
pub fn dyadic_decompose(g: &OmegaFunction, floor: f64) -> Result<Vec<DyadicPiece>> {
    if let Some(v) = g.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(PermixError::ValueRange(format!(
            "g takes the value {v} outside [0, 1]"
        )));
    }
    let n = g.n();
    let centered = g.centered();
    let mut bands: std::collections::BTreeMap<(bool, u32), Vec<usize>> = Default::default();
    for (i, &d) in centered.values().iter().enumerate() {
        if d.abs() <= floor {
            continue;
        }
        bands
            .entry((d < 0.0, dyadic_band(d.abs())))
            .or_default()
            .push(i);
    }
    Ok(bands
        .into_iter()
        .map(|((negative, k), support)| {
            let mut values = vec![0.0; n];
            for &i in &support {
                values[i] = centered.values()[i];
            }
            let mag = 2f64.powi(-(k as i32));
            DyadicPiece {
                s: if negative { -mag } else { mag },
                k,
                values: OmegaFunction::new(values).expect("n > 0"),
                delta: support.len() as f64 / n as f64,
            }
        })
        .collect())
}

/// Largest `|Σ pieces - (g - ∫g)|` over entries kept by the floor, and over
/// all entries (the dropped ones contribute at most `floor` each).
pub fn dyadic_reconstruction_error(g: &OmegaFunction, pieces: &[DyadicPiece]) -> f64 {
    let centered = g.centered();
    let mut sum = vec![0.0; g.n()];
    for p in pieces {
        for (s, v) in sum.iter_mut().zip(p.values.values()) {
            *s += v;
        }
    }
    sum.iter()
        .zip(centered.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Two functions on `Ω` each equal to 0 off a support `H_i` and in `[1/2, 1]`
/// on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetPair {
    h1: OmegaFunction,
    h2: OmegaFunction,
    delta1: f64,
    delta2: f64,
}

impl LevelSetPair {
    pub fn new(h1: OmegaFunction, h2: OmegaFunction) -> Result<Self> {
        if h1.n() != h2.n() {
            return Err(PermixError::DomainMismatch(format!(
                "level sets on Ω of sizes {} and {}",
                h1.n(),
                h2.n()
            )));
        }
        let density = |h: &OmegaFunction| -> Result<f64> {
            let mut support = 0;
            for &v in h.values() {
                if v == 0.0 {
                    continue;
                }
                if !(0.5..=1.0).contains(&v) {
                    return Err(PermixError::ValueRange(format!(
                        "level-set value {v} is neither 0 nor in [1/2, 1]"
                    )));
                }
                support += 1;
            }
            Ok(support as f64 / h.n() as f64)
        };
        let (delta1, delta2) = (density(&h1)?, density(&h2)?);
        Ok(Self {
            h1,
            h2,
            delta1,
            delta2,
        })
    }

    pub fn h1(&self) -> &OmegaFunction {
        &self.h1
    }

    pub fn h2(&self) -> &OmegaFunction {
        &self.h2
    }

    pub fn deltas(&self) -> (f64, f64) {
        (self.delta1, self.delta2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `δ₁δ₂ ≥ 1/n`: Gaussian-type concentration.
    High,
    /// `δ₁δ₂ < 1/n`: Poisson-type behaviour.
    Low,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetReport {
    pub n: usize,
    pub alpha: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// `⟨f * h₁, h₂⟩ - α ∫h₁ ∫h₂`
    pub observed: f64,
    pub stderr: f64,
    pub regime: Regime,
    /// `α δ₁^{1/2} δ₂^{1/2} log n / n^{1/2}`, constant 1.
    pub high_bound: Option<f64>,
    /// `(α log n / n, δ₁δ₂, α δ₁δ₂)`, constant 1.
    pub low_bounds: Option<(f64, f64, f64)>,
    /// `‖h₁‖₂ ‖h₂‖₂`, a bound on `|observed|` for `0 ≤ f ≤ 1`.
    pub cauchy_schwarz_cap: f64,
}

fn check_unit_interval(values: &[f64], what: &str) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(PermixError::ValueRange(format!(
            "{what} takes the value {v} outside [0, 1]"
        )));
    }
    Ok(())
}

fn levelset_report(
    n: usize,
    alpha: f64,
    pair: &LevelSetPair,
    observed: f64,
    stderr: f64,
) -> LevelSetReport {
    let (d1, d2) = pair.deltas();
    let nf = n as f64;
    let ln_n = nf.ln();
    let regime = if d1 * d2 >= 1.0 / nf {
        Regime::High
    } else {
        Regime::Low
    };
    LevelSetReport {
        n,
        alpha,
        delta1: d1,
        delta2: d2,
        observed,
        stderr,
        regime,
        high_bound: (regime == Regime::High).then(|| alpha * (d1 * d2).sqrt() * ln_n / nf.sqrt()),
        low_bounds: (regime == Regime::Low).then(|| (alpha * ln_n / nf, d1 * d2, alpha * d1 * d2)),
        cauchy_schwarz_cap: l2_norm(pair.h1()) * l2_norm(pair.h2()),
    }
}

/// Exact level-set deficit for an enumerated `f: G → [0, 1]`.
pub fn levelset_deficit(f: &GroupFunction, pair: &LevelSetPair) -> Result<LevelSetReport> {
    check_unit_interval(f.values(), "f")?;
    let n = f.space().n();
    let alpha = integral(f);
    let conv = convolve_group_omega(f, pair.h1())?;
    let pairing = crate::group::inner_product(&conv, pair.h2())?;
    let observed = pairing - alpha * integral(pair.h1()) * integral(pair.h2());
    Ok(levelset_report(n, alpha, pair, observed, 0.0))
}

/// Monte Carlo level-set deficit for `f` given pointwise. Uniform
/// permutations are accepted with probability `f(π)`, so accepted draws follow
/// `f/α`; the estimator is `(1/N) Σ_accepted ⟨π * h₁, h₂⟩ - α̂ ∫h₁ ∫h₂`
/// with `α̂` the acceptance rate.
pub fn levelset_deficit_monte_carlo(
    f: &(dyn Fn(&Permutation) -> f64 + Sync),
    parity: ParityFilter,
    pair: &LevelSetPair,
    samples: u64,
    seed: u64,
) -> Result<LevelSetReport> {
    if samples == 0 {
        return Err(PermixError::Domain("need at least one sample".into()));
    }
    let n = pair.h1().n();
    let (h1, h2) = (pair.h1().values(), pair.h2().values());
    let m12 = integral(pair.h1()) * integral(pair.h2());
    let chunks = samples.div_ceil(MC_CHUNK);
    let per_chunk: Vec<Result<(u64, f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let (mut accepted, mut sum, mut sum_sq) = (0u64, 0.0, 0.0);
            for _ in 0..MC_CHUNK.min(samples - c * MC_CHUNK) {
                let p = uniform_permutation(n, parity, &mut rng);
                let fp = f(&p);
                if !(0.0..=1.0).contains(&fp) {
                    return Err(PermixError::ValueRange(format!(
                        "f takes the value {fp} outside [0, 1]"
                    )));
                }
                // ⟨π * h₁, h₂⟩ = (1/n) Σ_i h₁(i) h₂(π(i)); the centered form
                // makes each accepted draw an unbiased term of the estimator
                if rng.random::<f64>() < fp {
                    accepted += 1;
                    let ip = (0..n).map(|i| h1[i] * h2[p.apply(i)]).sum::<f64>() / n as f64;
                    let term = ip - m12;
                    sum += term;
                    sum_sq += term * term;
                }
            }
            Ok((accepted, sum, sum_sq))
        })
        .collect();
    let (mut accepted, mut sum, mut sum_sq) = (0u64, 0.0, 0.0);
    for r in per_chunk {
        let (a, s, q) = r?;
        accepted += a;
        sum += s;
        sum_sq += q;
    }
    let nf = samples as f64;
    let alpha = accepted as f64 / nf;
    let observed = sum / nf;
    let var = (sum_sq / nf - observed * observed).max(0.0);
    Ok(levelset_report(n, alpha, pair, observed, (var / nf).sqrt()))
}

/// One row of the rearrangement-deficit table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeficitRow {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `-(⟨f * g₁, g₂⟩ - αβγ)`
    pub deficit: f64,
    /// `α ‖g₁ - β‖₂ ‖g₂ - γ‖₂ log n / n^{1/2}`
    pub term1: f64,
    /// `(αβγ)^{1/2} (β^{1/2} + γ^{1/2}) S(g₁)^{1/2} S(g₂)^{1/2} (log n)^{5/2} / n^{1/2}`
    pub term2: f64,
    /// `deficit / (term1 + term2)`; `None` when both terms vanish.
    pub ratio: Option<f64>,
}

/// Entropy with the zero function assigned entropy 0.
fn entropy_or_zero(g: &OmegaFunction) -> Result<f64> {
    match entropy(g) {
        Err(PermixError::ZeroMass) => Ok(0.0),
        other => other,
    }
}

/// Evaluates both sides of the rearrangement deficit bound with all implicit
/// constants set to 1. The bound's additive `O(n^{-99})` term is omitted.
pub fn rearrangement_deficit_report(
    f: &GroupFunction,
    g1: &OmegaFunction,
    g2: &OmegaFunction,
) -> Result<DeficitRow> {
    check_unit_interval(f.values(), "f")?;
    check_unit_interval(g1.values(), "g1")?;
    check_unit_interval(g2.values(), "g2")?;
    let n = f.space().n();
    let (alpha, beta, gamma) = (integral(f), integral(g1), integral(g2));
    let pairing = crate::group::inner_product(&convolve_group_omega(f, g1)?, g2)?;
    let deficit = -(pairing - alpha * beta * gamma);
    let nf = n as f64;
    let ln_n = nf.ln();
    let term1 = alpha * l2_norm(&g1.centered()) * l2_norm(&g2.centered()) * ln_n / nf.sqrt();
    let term2 = (alpha * beta * gamma).sqrt()
        * (beta.sqrt() + gamma.sqrt())
        * (entropy_or_zero(g1)? * entropy_or_zero(g2)?).sqrt()
        * ln_n.powf(2.5)
        / nf.sqrt();
    let denom = term1 + term2;
    Ok(DeficitRow {
        n,
        alpha,
        beta,
        gamma,
        deficit,
        term1,
        term2,
        ratio: (denom > 0.0).then(|| deficit / denom),
    })
}
