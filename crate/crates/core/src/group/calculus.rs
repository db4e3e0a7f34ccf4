//! Uniform-measure calculus: integrals, inner products, convolutions,
//! pushforwards and entropy.
//!
//! Convolutions and pushforwards carry the normalization of the uniform
//! probability measure:
//!
//! * `(f * g)(x) = ∫ f(y) g(y⁻¹x)` for functions on the group,
//! * `(f * u)(ω) = ∫ f(π) u(π⁻¹(ω))` for `u` on Ω,
//! * `p_i f(ω) = n ∫ f(π) 1[π(i) = ω]`, so that `∫ p_i f = ∫ f`.
//!
//! Every parallel kernel computes each output entry with a fixed sequential
//! summation order, so results do not depend on the thread count.

use rayon::prelude::*;

use super::function::{GroupFunction, GroupSubset, OmegaFunction, UniformFunction};
use super::space::GroupSpace;
use crate::error::{PermixError, Result};

pub fn integral<F: UniformFunction + ?Sized>(f: &F) -> f64 {
    let v = f.values();
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn inner_product<F: UniformFunction>(f: &F, g: &F) -> Result<f64> {
    check_domain(f, g)?;
    let (a, b) = (f.values(), g.values());
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64)
}

pub fn l2_norm_sq<F: UniformFunction + ?Sized>(f: &F) -> f64 {
    let v = f.values();
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

pub fn l2_norm<F: UniformFunction + ?Sized>(f: &F) -> f64 {
    l2_norm_sq(f).sqrt()
}

fn check_domain<F: UniformFunction>(f: &F, g: &F) -> Result<()> {
    if !f.same_domain(g) {
        return Err(PermixError::DomainMismatch(format!(
            "{} vs {}",
            f.domain(),
            g.domain()
        )));
    }
    Ok(())
}

/// `(f * g)(x) = ∫ f(y) g(y⁻¹x)`.
///
/// When both inputs are indicators only the supports are visited and the
/// result is assembled from exact integer counts.
pub fn convolve_group(f: &GroupFunction, g: &GroupFunction) -> Result<GroupFunction> {
    check_domain(f, g)?;
    let space = f.space();
    if f.is_indicator() && g.is_indicator() {
        let counts = support_product_counts(space, &support(f), &support(g));
        let order = space.order() as f64;
        return GroupFunction::new(space, counts.iter().map(|&c| c as f64 / order).collect());
    }
    let order = space.order();
    let inverse: Vec<usize> = (0..order).map(|y| space.inverse_rank(y)).collect();
    let nonzero: Vec<usize> = (0..order).filter(|&y| f.value(y) != 0.0).collect();
    let values = (0..order)
        .into_par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for &y in &nonzero {
                acc += f.value(y) * g.value(space.product_rank(inverse[y], x));
            }
            acc / order as f64
        })
        .collect();
    GroupFunction::new(space, values)
}

/// Convolution of two indicator functions given as subsets.
pub fn convolve_subsets(x: &GroupSubset, y: &GroupSubset) -> Result<GroupFunction> {
    if x.space() != y.space() {
        return Err(PermixError::DomainMismatch(format!(
            "{} vs {}",
            x.space().name(),
            y.space().name()
        )));
    }
    let space = x.space();
    let counts = support_product_counts(space, &x.ranks(), &y.ranks());
    let order = space.order() as f64;
    GroupFunction::new(space, counts.iter().map(|&c| c as f64 / order).collect())
}

fn support(f: &GroupFunction) -> Vec<usize> {
    (0..f.space().order())
        .filter(|&r| f.value(r) != 0.0)
        .collect()
}

/// `counts[z] = #{(a, b) ∈ A × B : ab = z}`.
pub(crate) fn support_product_counts(space: &GroupSpace, a: &[usize], b: &[usize]) -> Vec<u64> {
    let order = space.order();
    a.par_chunks(64)
        .fold(
            || vec![0u64; order],
            |mut acc, chunk| {
                for &x in chunk {
                    for &y in b {
                        acc[space.product_rank(x, y)] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; order],
            |mut l, r| {
                for (a, b) in l.iter_mut().zip(r) {
                    *a += b;
                }
                l
            },
        )
}

/// `(f * u)(ω) = ∫ f(π) u(π⁻¹(ω))`.
pub fn convolve_group_omega(f: &GroupFunction, u: &OmegaFunction) -> Result<OmegaFunction> {
    let space = f.space();
    let n = space.n();
    if u.n() != n {
        return Err(PermixError::DomainMismatch(format!(
            "{} convolved with Ω-function of size {}",
            space.name(),
            u.n()
        )));
    }
    let mut out = vec![0.0; n];
    let uv = u.values();
    for r in 0..space.order() {
        let w = f.value(r);
        if w == 0.0 {
            continue;
        }
        for (i, &ui) in uv.iter().enumerate() {
            out[space.image_of(r, i)] += w * ui;
        }
    }
    let order = space.order() as f64;
    OmegaFunction::new(out.into_iter().map(|v| v / order).collect())
}

/// The pushforward `p_i f` of `f` under `π ↦ π(i)`, the adjoint of
/// composition with that map.
pub fn pushforward(f: &GroupFunction, i: usize) -> Result<OmegaFunction> {
    let space = f.space();
    let n = space.n();
    if i >= n {
        return Err(PermixError::IndexOutOfRange { index: i, n });
    }
    let mut out = vec![0.0; n];
    for r in 0..space.order() {
        out[space.image_of(r, i)] += f.value(r);
    }
    let scale = n as f64 / space.order() as f64;
    OmegaFunction::new(out.into_iter().map(|v| v * scale).collect())
}

/// All `n` pushforwards `p_0 f, .., p_{n-1} f` in one pass over the group.
pub fn pushforwards(f: &GroupFunction) -> Vec<OmegaFunction> {
    let space = f.space();
    let n = space.n();
    let mut out = vec![vec![0.0; n]; n];
    for r in 0..space.order() {
        let w = f.value(r);
        if w == 0.0 {
            continue;
        }
        for (i, row) in out.iter_mut().enumerate() {
            row[space.image_of(r, i)] += w;
        }
    }
    let scale = n as f64 / space.order() as f64;
    out.into_iter()
        .map(|row| OmegaFunction::new(row.into_iter().map(|v| v * scale).collect()).unwrap())
        .collect()
}

/// `x log x` with the continuous extension `0 log 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Relative entropy `S(f) = ∫ (f/α) log(f/α)` with `α = ∫f`, i.e. the
/// Kullback–Leibler divergence of the normalized density `f/α` from uniform.
pub fn entropy<F: UniformFunction + ?Sized>(f: &F) -> Result<f64> {
    let values = f.values();
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(PermixError::NegativeValue { index, value });
    }
    let alpha = values.iter().sum::<f64>() / values.len() as f64;
    if alpha <= 0.0 {
        return Err(PermixError::ZeroMass);
    }
    let s = values.iter().map(|&v| xlogx(v / alpha)).sum::<f64>() / values.len() as f64;
    // rounding can push the divergence of a constant slightly below zero
    Ok(s.max(0.0))
}
