use bitvec::vec::BitVec;
use rayon::prelude::*;
use serde::Serialize;

use super::perm::Permutation;
use super::space::GroupSpace;
use crate::error::{PermixError, Result};

/// A real function on a uniformly weighted finite domain.
pub trait UniformFunction {
    fn values(&self) -> &[f64];

    /// Human-readable description of the domain, for mismatch errors.
    fn domain(&self) -> String;

    fn same_domain(&self, other: &Self) -> bool;
}

/// A dense real function on an enumerated group, indexed by rank.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    space: GroupSpace,
    values: Vec<f64>,
}

impl GroupFunction {
    pub fn new(space: &GroupSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.order() {
            return Err(PermixError::DomainMismatch(format!(
                "{} values supplied for {} of order {}",
                values.len(),
                space.name(),
                space.order()
            )));
        }
        Ok(Self {
            space: space.clone(),
            values,
        })
    }

    pub fn constant(space: &GroupSpace, c: f64) -> Self {
        Self {
            space: space.clone(),
            values: vec![c; space.order()],
        }
    }

    pub fn zeros(space: &GroupSpace) -> Self {
        Self::constant(space, 0.0)
    }

    pub fn from_fn(space: &GroupSpace, f: impl Fn(&Permutation) -> f64 + Sync) -> Self {
        let values = (0..space.order())
            .into_par_iter()
            .map(|r| f(&space.element(r)))
            .collect();
        Self {
            space: space.clone(),
            values,
        }
    }

    pub fn point_mass(space: &GroupSpace, rank: usize) -> Self {
        let mut f = Self::zeros(space);
        f.values[rank] = 1.0;
        f
    }

    /// `π ↦ u(π(i))`, a function that factors through evaluation at `i`.
    pub fn lift(space: &GroupSpace, u: &OmegaFunction, i: usize) -> Result<Self> {
        if u.n() != space.n() {
            return Err(PermixError::DomainMismatch(format!(
                "Ω-function of size {} lifted to {}",
                u.n(),
                space.name()
            )));
        }
        if i >= space.n() {
            return Err(PermixError::IndexOutOfRange {
                index: i,
                n: space.n(),
            });
        }
        let values = (0..space.order())
            .map(|r| u.values()[space.image_of(r, i)])
            .collect();
        Ok(Self {
            space: space.clone(),
            values,
        })
    }

    pub fn space(&self) -> &GroupSpace {
        &self.space
    }

    pub fn value(&self, rank: usize) -> f64 {
        self.values[rank]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `f - ∫f`.
    pub fn centered(&self) -> Self {
        let mean = super::calculus::integral(self);
        self.map(|v| v - mean)
    }

    pub fn is_indicator(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(PermixError::DomainMismatch(format!(
                "{} vs {}",
                self.space.name(),
                other.space.name()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }
}

impl UniformFunction for GroupFunction {
    fn values(&self) -> &[f64] {
        &self.values
    }

    fn domain(&self) -> String {
        self.space.name()
    }

    fn same_domain(&self, other: &Self) -> bool {
        self.space == other.space
    }
}

/// A real function on Ω = {0, .., n-1} with the uniform measure. Serializes
/// as its value array.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OmegaFunction {
    values: Vec<f64>,
}

impl OmegaFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(PermixError::Domain("Ω must be nonempty".into()));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        assert!(n > 0, "Ω must be nonempty");
        Self { values: vec![c; n] }
    }

    pub fn indicator(n: usize, points: &[usize]) -> Result<Self> {
        let mut values = vec![0.0; n];
        for &p in points {
            if p >= n {
                return Err(PermixError::IndexOutOfRange { index: p, n });
            }
            values[p] = 1.0;
        }
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn centered(&self) -> Self {
        let mean = super::calculus::integral(self);
        self.map(|v| v - mean)
    }

    /// `ω ↦ u(π⁻¹(ω))`, the rearrangement of `u` by `π`.
    pub fn rearranged(&self, p: &Permutation) -> Result<Self> {
        if p.n() != self.n() {
            return Err(PermixError::DomainMismatch(format!(
                "permutation of degree {} applied to Ω of size {}",
                p.n(),
                self.n()
            )));
        }
        let mut values = vec![0.0; self.n()];
        for (i, &v) in self.values.iter().enumerate() {
            values[p.apply(i)] = v;
        }
        Ok(Self { values })
    }
}

impl UniformFunction for OmegaFunction {
    fn values(&self) -> &[f64] {
        &self.values
    }

    fn domain(&self) -> String {
        format!("Ω of size {}", self.n())
    }

    fn same_domain(&self, other: &Self) -> bool {
        self.n() == other.n()
    }
}

/// A subset of an enumerated group, stored as a membership bitset over ranks.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSubset {
    space: GroupSpace,
    membership: BitVec,
    cardinality: usize,
}

impl GroupSubset {
    pub fn from_membership(space: &GroupSpace, membership: BitVec) -> Result<Self> {
        if membership.len() != space.order() {
            return Err(PermixError::DomainMismatch(format!(
                "bitset of length {} for {} of order {}",
                membership.len(),
                space.name(),
                space.order()
            )));
        }
        let cardinality = membership.count_ones();
        Ok(Self {
            space: space.clone(),
            membership,
            cardinality,
        })
    }

    pub fn from_predicate(space: &GroupSpace, pred: impl Fn(&Permutation) -> bool + Sync) -> Self {
        let flags: Vec<bool> = (0..space.order())
            .into_par_iter()
            .map(|r| pred(&space.element(r)))
            .collect();
        let membership: BitVec = flags.into_iter().collect();
        Self::from_membership(space, membership).expect("length matches by construction")
    }

    pub fn from_ranks(space: &GroupSpace, ranks: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut membership = BitVec::repeat(false, space.order());
        for r in ranks {
            if r >= space.order() {
                return Err(PermixError::IndexOutOfRange {
                    index: r,
                    n: space.order(),
                });
            }
            membership.set(r, true);
        }
        Self::from_membership(space, membership)
    }

    pub fn from_elements<'a>(
        space: &GroupSpace,
        elements: impl IntoIterator<Item = &'a Permutation>,
    ) -> Result<Self> {
        let mut ranks = Vec::new();
        for p in elements {
            ranks.push(space.rank(p).ok_or_else(|| {
                PermixError::DomainMismatch(format!("{p} is not an element of {}", space.name()))
            })?);
        }
        Self::from_ranks(space, ranks)
    }

    pub fn full(space: &GroupSpace) -> Self {
        Self::from_membership(space, BitVec::repeat(true, space.order())).unwrap()
    }

    pub fn empty(space: &GroupSpace) -> Self {
        Self::from_membership(space, BitVec::repeat(false, space.order())).unwrap()
    }

    pub fn space(&self) -> &GroupSpace {
        &self.space
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn density(&self) -> f64 {
        self.cardinality as f64 / self.space.order() as f64
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality == 0
    }

    #[inline]
    pub fn contains_rank(&self, rank: usize) -> bool {
        self.membership[rank]
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.space.rank(p).is_some_and(|r| self.membership[r])
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.membership.iter_ones().collect()
    }

    pub fn indicator(&self) -> GroupFunction {
        let values = self
            .membership
            .iter()
            .map(|b| if *b { 1.0 } else { 0.0 })
            .collect();
        GroupFunction {
            space: self.space.clone(),
            values,
        }
    }

    pub fn is_inverse_closed(&self) -> bool {
        self.membership
            .iter_ones()
            .all(|r| self.membership[self.space.inverse_rank(r)])
    }

    /// `{g x g⁻¹ : x ∈ X}` contained in `X` for the given `g`.
    pub fn is_closed_under_conjugation_by(&self, g: &Permutation) -> bool {
        let g_inv = g.inverse();
        self.membership.iter_ones().all(|r| {
            let x = self.space.element(r);
            self.contains(&g.compose(&x).compose(&g_inv))
        })
    }
}
