//! The Fourier coefficient at the standard representation σ, without any
//! general representation theory.
//!
//! The permutation representation `π ↦ P_π` (with `P_π[ω][i] = 1[π(i) = ω]`)
//! splits as trivial ⊕ σ, the trivial block being the projection `J/n`. We
//! work with the n×n coefficient `F = ∫ f(π) P_π`; its σ-part is
//! `F - (∫f) J/n`, and Hilbert–Schmidt pairings of σ-parts reduce to
//! `⟨F, G⟩_HS - (∫f)(∫g)`. Since the convolution is normalized by the uniform
//! measure, the coefficient of `f * g` is the matrix product `F G`.
//!
//! `decompose_triple` obtains everything outside the trivial and σ components
//! of `⟨f * g, h⟩` by subtraction; `direct_remainder` computes the same
//! quantity independently through the σ-isotypic projection.

use serde::Serialize;

use crate::error::{PermixError, Result};
use crate::group::{
    convolve_group, convolve_group_omega, inner_product, integral, l2_norm_sq, pushforwards,
    GroupFunction, GroupSpace, ParityFilter, Permutation, UniformFunction,
};

/// `|∫f|` below this, relative to `max(1, sup|f|)`, counts as zero.
pub const MEAN_ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaCoefficient {
    n: usize,
    /// Row-major, `matrix[ω * n + i] = ∫ f(π) 1[π(i) = ω]`.
    matrix: Vec<f64>,
    mean: f64,
}

impl SigmaCoefficient {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn get(&self, omega: usize, i: usize) -> f64 {
        self.matrix[omega * self.n + i]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|w| self.get(w, i)).sum())
            .collect()
    }

    /// The coefficient of `f * g` given those of `f` and `g`.
    pub fn product(&self, other: &SigmaCoefficient) -> Result<SigmaCoefficient> {
        check_size(self, other)?;
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for w in 0..n {
            for k in 0..n {
                let a = self.matrix[w * n + k];
                if a == 0.0 {
                    continue;
                }
                for i in 0..n {
                    out[w * n + i] += a * other.matrix[k * n + i];
                }
            }
        }
        Ok(SigmaCoefficient {
            n,
            matrix: out,
            mean: self.mean * other.mean,
        })
    }

    /// `‖f̂(σ)‖²_HS`.
    pub fn sigma_norm_sq(&self) -> f64 {
        sigma_hs_product(self, self).expect("same size")
    }
}

fn check_size(a: &SigmaCoefficient, b: &SigmaCoefficient) -> Result<()> {
    if a.n != b.n {
        return Err(PermixError::DomainMismatch(format!(
            "σ-coefficients of sizes {} and {}",
            a.n, b.n
        )));
    }
    Ok(())
}

pub fn sigma_coefficient(f: &GroupFunction) -> SigmaCoefficient {
    let space = f.space();
    let n = space.n();
    let mut matrix = vec![0.0; n * n];
    for r in 0..space.order() {
        let w = f.value(r);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            matrix[space.image_of(r, i) * n + i] += w;
        }
    }
    let order = space.order() as f64;
    matrix.iter_mut().for_each(|v| *v /= order);
    SigmaCoefficient {
        n,
        matrix,
        mean: integral(f),
    }
}

/// `⟨f̂(σ), ĝ(σ)⟩_HS = Σ F[ω][i] G[ω][i] - (∫f)(∫g)`.
pub fn sigma_hs_product(f: &SigmaCoefficient, g: &SigmaCoefficient) -> Result<f64> {
    check_size(f, g)?;
    let full: f64 = f.matrix.iter().zip(&g.matrix).map(|(a, b)| a * b).sum();
    Ok(full - f.mean * g.mean)
}

/// Character of σ: `tr σ(π) = fix(π) - 1`.
pub fn standard_character(p: &Permutation) -> f64 {
    p.fixed_points() as f64 - 1.0
}

/// The three-term split of `⟨f * g, h⟩` into trivial, σ, and everything else.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// `∫f ∫g ∫h`
    pub main_term: f64,
    /// `(n-1) ⟨f̂(σ)ĝ(σ), ĥ(σ)⟩_HS`
    pub sigma_term: f64,
    /// `total - main_term - sigma_term`
    pub remainder: f64,
    /// `⟨f * g, h⟩`, by direct convolution
    pub total: f64,
}

fn check_spaces(fs: &[&GroupFunction]) -> Result<()> {
    let first = fs[0].space();
    for f in &fs[1..] {
        if f.space() != first {
            return Err(PermixError::DomainMismatch(format!(
                "{} vs {}",
                first.name(),
                f.space().name()
            )));
        }
    }
    Ok(())
}

pub fn decompose_triple(
    f: &GroupFunction,
    g: &GroupFunction,
    h: &GroupFunction,
) -> Result<DecompositionReport> {
    check_spaces(&[f, g, h])?;
    let n = f.space().n() as f64;
    let total = inner_product(&convolve_group(f, g)?, h)?;
    let (cf, cg, ch) = (
        sigma_coefficient(f),
        sigma_coefficient(g),
        sigma_coefficient(h),
    );
    let main_term = cf.mean * cg.mean * ch.mean;
    let sigma_term = (n - 1.0) * sigma_hs_product(&cf.product(&cg)?, &ch)?;
    Ok(DecompositionReport {
        main_term,
        sigma_term,
        remainder: total - main_term - sigma_term,
        total,
    })
}

fn is_mean_zero(f: &GroupFunction) -> bool {
    let sup = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    integral(f).abs() <= MEAN_ZERO_TOLERANCE * sup
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondTermCheck {
    /// `(n-1) ⟨f̂(σ)ĝ(σ), ĥ(σ)⟩_HS` from σ-coefficients
    pub lhs: f64,
    /// `((n-1)/n) Σ_i ⟨f * p_i g, p_i h⟩` from pushforwards
    pub rhs: f64,
}

/// Evaluates both sides of the pushforward expression for the σ-term. The
/// two agree whenever at least one of `∫f, ∫g, ∫h` vanishes.
pub fn secondterm_identity_check(
    f: &GroupFunction,
    g: &GroupFunction,
    h: &GroupFunction,
) -> Result<SecondTermCheck> {
    check_spaces(&[f, g, h])?;
    if ![f, g, h].iter().any(|u| is_mean_zero(u)) {
        return Err(PermixError::Precondition(
            "at least one of ∫f, ∫g, ∫h must be zero".into(),
        ));
    }
    let n = f.space().n() as f64;
    let (cf, cg, ch) = (
        sigma_coefficient(f),
        sigma_coefficient(g),
        sigma_coefficient(h),
    );
    let lhs = (n - 1.0) * sigma_hs_product(&cf.product(&cg)?, &ch)?;
    let mut sum = 0.0;
    for (pg, ph) in pushforwards(g).iter().zip(&pushforwards(h)) {
        sum += inner_product(&convolve_group_omega(f, pg)?, ph)?;
    }
    Ok(SecondTermCheck {
        lhs,
        rhs: (n - 1.0) / n * sum,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParsevalRemnant {
    /// `‖f‖²₂`
    pub norm_sq: f64,
    /// `(n-1) ‖f̂(σ)‖²_HS`
    pub sigma_energy: f64,
    /// `((n-1)/n) Σ_i ‖p_i f‖²₂`
    pub pushforward_energy: f64,
}

impl ParsevalRemnant {
    /// `‖f‖² - (n-1)‖f̂(σ)‖²`, nonnegative up to rounding.
    pub fn defect(&self) -> f64 {
        self.norm_sq - self.sigma_energy
    }
}

/// The σ-piece of Parseval's identity for a mean-zero `f`.
pub fn parseval_remnant(f: &GroupFunction) -> Result<ParsevalRemnant> {
    if !is_mean_zero(f) {
        return Err(PermixError::Precondition("∫f must be zero".into()));
    }
    let n = f.space().n() as f64;
    let sigma_energy = (n - 1.0) * sigma_coefficient(f).sigma_norm_sq();
    let push: f64 = pushforwards(f).iter().map(l2_norm_sq).sum();
    Ok(ParsevalRemnant {
        norm_sq: l2_norm_sq(f),
        sigma_energy,
        pushforward_energy: (n - 1.0) / n * push,
    })
}

fn sigma_is_irreducible(space: &GroupSpace) -> bool {
    match space.parity() {
        ParityFilter::All => space.n() >= 2,
        ParityFilter::Even => space.n() >= 4,
    }
}

/// The σ-isotypic component of `f`, obtained by convolving with the central
/// idempotent `(n-1) χ_σ`. Requires σ to stay irreducible on the group, which
/// rules out A_1, A_2, A_3, and S_1.
pub fn sigma_projection(f: &GroupFunction) -> Result<GroupFunction> {
    let space = f.space();
    if !sigma_is_irreducible(space) {
        return Err(PermixError::Precondition(format!(
            "σ is reducible on {}",
            space.name()
        )));
    }
    let d = (space.n() - 1) as f64;
    let idempotent = GroupFunction::from_fn(space, |p| d * standard_character(p));
    convolve_group(&idempotent, f)
}

/// `⟨f' * g, h⟩` with `f' = f - ∫f - (σ-component of f)`: the part of
/// `⟨f * g, h⟩` outside the trivial and σ components, computed without
/// subtraction from the total.
pub fn direct_remainder(f: &GroupFunction, g: &GroupFunction, h: &GroupFunction) -> Result<f64> {
    check_spaces(&[f, g, h])?;
    let mean = integral(f);
    let rest = f.add(&sigma_projection(f)?.scale(-1.0))?.map(|v| v - mean);
    inner_product(&convolve_group(&rest, g)?, h)
}

/// Minimal dimension of a nontrivial irreducible representation, known only
/// for alternating groups. Returns `None` for trivial groups and for S_n,
/// where callers must supply the value themselves.
pub fn min_nontrivial_dimension(space: &GroupSpace) -> Option<usize> {
    match (space.parity(), space.n()) {
        (ParityFilter::All, _) => None,
        (ParityFilter::Even, 0..=2) => None,
        (ParityFilter::Even, 3 | 4) => Some(1),
        (ParityFilter::Even, 5) => Some(3),
        (ParityFilter::Even, 6) => Some(5),
        (ParityFilter::Even, n) => Some(n - 1),
    }
}
