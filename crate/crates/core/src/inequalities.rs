//! Permanent inequalities of Brascamp–Lieb type on the symmetric group,
//! entropy subadditivity, and the extremal two-level entropy computations.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{PermixError, Result};
use crate::group::{
    entropy, factorial, l2_norm, pushforwards, xlogx, GroupFunction, OmegaFunction, UniformFunction,
};

/// Largest matrix the permanent routines accept.
pub const PERMANENT_MAX_N: usize = 20;

/// Largest matrix the brute-force oracle accepts.
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Scalars the permanent can be computed over exactly (integers, rationals)
/// or approximately (floats).
pub trait Scalar:
    Clone
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

fn check_square<T>(n: usize, entries: &[T], cap: usize) -> Result<()> {
    if entries.len() != n * n {
        return Err(PermixError::DomainMismatch(format!(
            "{} entries for a {n} × {n} matrix",
            entries.len()
        )));
    }
    if n > cap {
        return Err(PermixError::SizeCap {
            n,
            cap,
            group: "permanents",
        });
    }
    Ok(())
}

/// Permanent of a row-major `n × n` matrix by Ryser's inclusion–exclusion
/// formula, visiting column subsets in Gray-code order so each step updates
/// the row sums by one column: `O(2^n n)` operations.
pub fn permanent<T: Scalar>(n: usize, entries: &[T]) -> Result<T> {
    check_square(n, entries, PERMANENT_MAX_N)?;
    if n == 0 {
        return Ok(T::one());
    }
    // perm(A) = (-1)^n Σ_S (-1)^{|S|} Π_i Σ_{j ∈ S} a_ij
    let mut row_sums = vec![T::zero(); n];
    let mut in_set = vec![false; n];
    let mut total = T::zero();
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        in_set[j] = !in_set[j];
        if in_set[j] {
            size += 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = s.clone() + entries[i * n + j].clone();
            }
        } else {
            size -= 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = s.clone() - entries[i * n + j].clone();
            }
        }
        let prod = row_sums.iter().fold(T::one(), |p, s| p * s.clone());
        total = if size.is_multiple_of(2) {
            total + prod
        } else {
            total - prod
        };
    }
    Ok(if n.is_multiple_of(2) { total } else { -total })
}

/// Permanent as a sum over all `n!` permutations; the reference oracle.
pub fn permanent_brute_force<T: Scalar>(n: usize, entries: &[T]) -> Result<T> {
    check_square(n, entries, BRUTE_FORCE_MAX_N)?;
    fn go<T: Scalar>(n: usize, a: &[T], row: usize, used: u32, acc: T) -> T {
        if row == n {
            return acc;
        }
        let mut sum = T::zero();
        for j in 0..n {
            if used & (1 << j) == 0 {
                sum = sum
                    + go(
                        n,
                        a,
                        row + 1,
                        used | (1 << j),
                        acc.clone() * a[row * n + j].clone(),
                    );
            }
        }
        sum
    }
    Ok(go(n, entries, 0, 0, T::one()))
}

/// A real square matrix with its Euclidean column norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermanentInstance {
    pub n: usize,
    pub entries: Vec<f64>,
    pub column_norms: Vec<f64>,
}

impl PermanentInstance {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        check_square(n, &entries, PERMANENT_MAX_N)?;
        let column_norms = (0..n)
            .map(|c| {
                (0..n)
                    .map(|r| entries[r * n + c].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ok(Self {
            n,
            entries,
            column_norms,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    /// `lhs ≤ rhs` up to a relative slack.
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack * self.rhs.abs().max(f64::MIN_POSITIVE)
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `|perm M| ≤ (n! / n^{n/2}) Π_i |v_i|` with `v_i` the columns and `|·|`
/// the unnormalized Euclidean norm.
pub fn hadamard_permanent_check(m: &PermanentInstance) -> Result<InequalityCheck> {
    let n = m.n;
    let lhs = permanent(n, &m.entries)?.abs();
    let log_bound = ln_factorial(n) - 0.5 * n as f64 * (n as f64).ln()
        + m.column_norms.iter().map(|v| v.ln()).sum::<f64>();
    Ok(InequalityCheck {
        lhs,
        rhs: log_bound.exp(),
    })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `∫_{S_n} Π_i f_i(π(i)) ≤ Π_i ‖f_i‖₂` for nonnegative `f_i` on `Ω`, with
/// the norms taken in the uniform probability measure. The left side is
/// `perm(A) / n!` where `A[j][i] = f_i(j)`; the measure normalization accounts
/// for the `n^{n/2}` factor that separates this from the Euclidean form.
pub fn cll_check(fs: &[OmegaFunction]) -> Result<InequalityCheck> {
    let n = fs.len();
    if n == 0 {
        return Err(PermixError::Domain("need at least one function".into()));
    }
    let mut a = vec![0.0; n * n];
    for (i, f) in fs.iter().enumerate() {
        if f.n() != n {
            return Err(PermixError::DomainMismatch(format!(
                "{n} functions on Ω of size {}",
                f.n()
            )));
        }
        for (j, &v) in f.values().iter().enumerate() {
            if v < 0.0 {
                return Err(PermixError::NegativeValue { index: j, value: v });
            }
            a[j * n + i] = v;
        }
    }
    let lhs = (permanent(n, &a)?.ln() - ln_factorial(n)).exp();
    let rhs = fs.iter().map(l2_norm).product();
    Ok(InequalityCheck { lhs, rhs })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubadditivityCheck {
    /// `S(f)`
    pub lhs: f64,
    /// `(1/2) Σ_i S(p_i f)`
    pub rhs: f64,
}

impl SubadditivityCheck {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// `S(f) ≥ (1/2) Σ_i S(p_i f)`.
pub fn subadditivity_check(f: &GroupFunction) -> Result<SubadditivityCheck> {
    let lhs = entropy(f)?;
    let mut rhs = 0.0;
    for p in pushforwards(f) {
        rhs += entropy(&p)?;
    }
    Ok(SubadditivityCheck {
        lhs,
        rhs: 0.5 * rhs,
    })
}

/// `log n! - (n/2) log n`, the margin for a point mass on `S_n`.
pub fn point_mass_margin(n: usize) -> f64 {
    ln_factorial(n) - 0.5 * n as f64 * (n as f64).ln()
}

/// `(1 + y) log(1 + y)`, accurate for small `y`.
fn one_plus_log(y: f64) -> f64 {
    if y == -1.0 {
        0.0
    } else {
        (1.0 + y) * y.ln_1p()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(PermixError::Domain(format!("δ = {delta} outside (0, 1/2]")));
    }
    Ok(())
}

/// Entropy of the extremal `g` with `∫g = β` and `g ≤ β - t` on density `δ`:
/// `g = β - t` there and `β + δt/(1-δ)` elsewhere.
pub fn extremal_entropy_low(beta: f64, t: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(t > 0.0 && t <= beta) {
        return Err(PermixError::Domain(format!(
            "need 0 < t ≤ β, got t = {t}, β = {beta}"
        )));
    }
    let x = t / beta;
    let y = delta / (1.0 - delta) * x;
    Ok(delta * one_plus_log(-x) + (1.0 - delta) * one_plus_log(y))
}

/// `δ t² / β²`, the lower bound the low-side entropy lemma asserts up to a
/// constant.
pub fn entropy_low_lower_bound(beta: f64, t: f64, delta: f64) -> f64 {
    delta * t * t / (beta * beta)
}

/// Entropy of the extremal `g` with `∫g = β` and `g ≥ β + t` on density `δ`:
/// `g = β + t` there and `β - δt/(1-δ)` elsewhere.
pub fn extremal_entropy_high(beta: f64, t: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(t > 0.0 && beta > 0.0) || (beta + t) * delta > beta {
        return Err(PermixError::Domain(format!(
            "need t > 0 and (β + t)δ ≤ β, got β = {beta}, t = {t}, δ = {delta}"
        )));
    }
    let x = t / beta;
    let y = delta / (1.0 - delta) * x;
    Ok(delta * one_plus_log(x) + (1.0 - delta) * one_plus_log(-y))
}

/// `(min(δt/β, δt²/β²), δt²/β)`: the high-side lemma's bound and its weaker
/// consequence.
pub fn entropy_high_lower_bounds(beta: f64, t: f64, delta: f64) -> (f64, f64) {
    let x = t / beta;
    ((delta * x).min(delta * x * x), delta * t * t / beta)
}

fn two_level(n: usize, delta: f64, special: f64, other: f64) -> Result<OmegaFunction> {
    let k = delta * n as f64;
    if (k - k.round()).abs() > 1e-9 || k.round() < 1.0 {
        return Err(PermixError::Precondition(format!(
            "δn = {k} is not a positive integer"
        )));
    }
    let k = k.round() as usize;
    OmegaFunction::new(
        (0..n)
            .map(|i| if i < k { special } else { other })
            .collect(),
    )
}

/// The low-side extremal function on `Ω` of size `n`; needs `δn` integral.
pub fn two_level_low(n: usize, beta: f64, t: f64, delta: f64) -> Result<OmegaFunction> {
    extremal_entropy_low(beta, t, delta)?;
    two_level(n, delta, beta - t, beta + delta / (1.0 - delta) * t)
}

/// The high-side extremal function on `Ω` of size `n`; needs `δn` integral.
pub fn two_level_high(n: usize, beta: f64, t: f64, delta: f64) -> Result<OmegaFunction> {
    extremal_entropy_high(beta, t, delta)?;
    two_level(n, delta, beta + t, beta - delta / (1.0 - delta) * t)
}

/// Direct `∫ (g/β) log(g/β)` for a two-level function, without the
/// clamping [`entropy`] applies.
pub fn direct_entropy(g: &OmegaFunction) -> Result<f64> {
    let beta = crate::group::integral(g);
    if beta <= 0.0 {
        return Err(PermixError::ZeroMass);
    }
    Ok(g.values().iter().map(|&v| xlogx(v / beta)).sum::<f64>() / g.n() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyLemmaRow {
    pub beta: f64,
    pub t: f64,
    pub delta: f64,
    pub extremal: f64,
    pub lower_bound: f64,
    /// `extremal / lower_bound`, an empirical value for the implicit constant.
    pub ratio: f64,
}

pub fn entropy_low_row(beta: f64, t: f64, delta: f64) -> Result<EntropyLemmaRow> {
    let extremal = extremal_entropy_low(beta, t, delta)?;
    let lower_bound = entropy_low_lower_bound(beta, t, delta);
    Ok(EntropyLemmaRow {
        beta,
        t,
        delta,
        extremal,
        lower_bound,
        ratio: extremal / lower_bound,
    })
}

pub fn entropy_high_row(beta: f64, t: f64, delta: f64) -> Result<EntropyLemmaRow> {
    let extremal = extremal_entropy_high(beta, t, delta)?;
    let lower_bound = entropy_high_lower_bounds(beta, t, delta).0;
    Ok(EntropyLemmaRow {
        beta,
        t,
        delta,
        extremal,
        lower_bound,
        ratio: extremal / lower_bound,
    })
}

/// `n!` as f64, exact for the sizes the permanent handles.
pub fn factorial_f64(n: usize) -> f64 {
    if n <= crate::group::HARD_MAX_N {
        factorial(n) as f64
    } else {
        ln_factorial(n).exp()
    }
}
