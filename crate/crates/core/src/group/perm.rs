use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{PermixError, Result};

/// A permutation of `{0, .., n-1}` stored in one-line notation: `images[i] = π(i)`.
///
/// Products act on the left, so `x.compose(&y)` is the map `i ↦ x(y(i))`.
/// Display and serialization use 1-based points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for (i, &v) in images.iter().enumerate() {
            if v >= n {
                return Err(PermixError::InvalidPermutation(format!(
                    "image {v} of point {i} is outside 0..{n}"
                )));
            }
            if seen[v] {
                return Err(PermixError::InvalidPermutation(format!(
                    "value {v} repeated"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { images })
    }

    /// Builds a permutation from 1-based images, as printed by the CLI.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(PermixError::InvalidPermutation("1-based image 0".into()));
        }
        Self::new(images.iter().map(|v| v - 1).collect())
    }

    pub(crate) fn from_vec_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Self::new(images.clone()).is_ok());
        Self { images }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation of `n` points from disjoint cycles (0-based).
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                if a >= n {
                    return Err(PermixError::IndexOutOfRange { index: a, n });
                }
                if touched[a] {
                    return Err(PermixError::InvalidPermutation(format!(
                        "point {a} appears in more than one cycle"
                    )));
                }
                touched[a] = true;
                images[a] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::new(images)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// The product `self · other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(
            self.n(),
            other.n(),
            "composing permutations of different degree"
        );
        Self {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Self { images: inv }
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, v)| i == *v)
            .count()
    }

    /// Parity via cycle decomposition: the sign is `(-1)^(n - #cycles)`.
    pub fn is_even(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j];
            }
        }
        (n - cycles).is_multiple_of(2)
    }

    pub fn sign(&self) -> i8 {
        if self.is_even() {
            1
        } else {
            -1
        }
    }

    /// Swaps the images of two points, flipping the parity.
    pub fn swap_images(&mut self, a: usize, b: usize) {
        self.images.swap(a, b);
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.images.iter().map(|v| v + 1).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.images.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "]")
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![]).is_ok());
    }

    #[test]
    fn composition_acts_on_the_left() {
        let x = Permutation::from_cycles(3, &[&[0, 1]]).unwrap();
        let y = Permutation::from_cycles(3, &[&[1, 2]]).unwrap();
        let xy = x.compose(&y);
        // y sends 1 to 2, x fixes 2
        assert_eq!(xy.apply(1), 2);
        assert_eq!(xy.apply(2), 0);
        assert_eq!(xy.apply(0), 1);
    }

    #[test]
    fn parity_and_fixed_points() {
        let c3 = Permutation::from_cycles(5, &[&[0, 1, 2]]).unwrap();
        assert!(c3.is_even());
        assert_eq!(c3.fixed_points(), 2);
        let t = Permutation::from_cycles(4, &[&[0, 3]]).unwrap();
        assert!(!t.is_even());
        assert_eq!(Permutation::identity(6).sign(), 1);
        let c4 = Permutation::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap();
        assert_eq!(c4.sign(), -1);
    }

    #[test]
    fn inverse_round_trip() {
        let p = Permutation::new(vec![3, 0, 4, 1, 2]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(5));
        assert_eq!(p.to_one_based(), vec![4, 1, 5, 2, 3]);
        assert_eq!(Permutation::from_one_based(&[4, 1, 5, 2, 3]).unwrap(), p);
        assert_eq!(p.to_string(), "[4 1 5 2 3]");
    }
}
