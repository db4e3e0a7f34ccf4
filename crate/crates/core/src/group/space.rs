use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::perm::Permutation;
use crate::error::{PermixError, Result};

/// Largest degree any enumerated space may have, whatever the configured cap.
pub const HARD_MAX_N: usize = 12;

/// Enumerated spaces store their elements as a flat byte table when it fits here.
const TABLE_LIMIT_BYTES: usize = 64 << 20;

pub(crate) type Images = [u8; HARD_MAX_N];

const FACTORIALS: [usize; HARD_MAX_N + 1] = {
    let mut f = [1usize; HARD_MAX_N + 1];
    let mut i = 1;
    while i <= HARD_MAX_N {
        f[i] = f[i - 1] * i;
        i += 1;
    }
    f
};

pub fn factorial(n: usize) -> usize {
    FACTORIALS[n]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityFilter {
    /// The symmetric group S_n.
    All,
    /// The alternating group A_n.
    Even,
}

impl ParityFilter {
    pub fn group_name(self) -> &'static str {
        match self {
            ParityFilter::All => "S_n",
            ParityFilter::Even => "A_n",
        }
    }

    pub fn admits(self, p: &Permutation) -> bool {
        self == ParityFilter::All || p.is_even()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCap {
    pub symmetric: usize,
    pub alternating: usize,
}

impl Default for EnumerationCap {
    fn default() -> Self {
        Self {
            symmetric: 10,
            alternating: 11,
        }
    }
}

impl EnumerationCap {
    pub fn for_parity(&self, parity: ParityFilter) -> usize {
        match parity {
            ParityFilter::All => self.symmetric,
            ParityFilter::Even => self.alternating,
        }
        .min(HARD_MAX_N)
    }
}

/// S_n or A_n, enumerated in lexicographic order of the image array.
///
/// A_n is the even subsequence of the S_n order. Lexicographic ranks `2k` and
/// `2k + 1` differ by a transposition of the last two entries, so exactly one of
/// them is even and the A_n rank of an even permutation is its S_n rank halved.
#[derive(Clone)]
pub struct GroupSpace {
    n: usize,
    parity: ParityFilter,
    order: usize,
    table: Option<Arc<[u8]>>,
}

impl fmt::Debug for GroupSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupSpace")
            .field("n", &self.n)
            .field("parity", &self.parity)
            .field("order", &self.order)
            .finish()
    }
}

impl PartialEq for GroupSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.parity == other.parity
    }
}

impl Eq for GroupSpace {}

impl GroupSpace {
    pub fn enumerate(n: usize, parity: ParityFilter) -> Result<Self> {
        Self::enumerate_with_cap(n, parity, EnumerationCap::default())
    }

    pub fn enumerate_with_cap(n: usize, parity: ParityFilter, cap: EnumerationCap) -> Result<Self> {
        let limit = cap.for_parity(parity);
        if n == 0 {
            return Err(PermixError::Domain("n must be at least 1".into()));
        }
        if n > limit {
            return Err(PermixError::SizeCap {
                n,
                cap: limit,
                group: parity.group_name(),
            });
        }
        let order = match parity {
            ParityFilter::All => factorial(n),
            ParityFilter::Even => (factorial(n) / 2).max(1),
        };
        let mut space = Self {
            n,
            parity,
            order,
            table: None,
        };
        if order * n <= TABLE_LIMIT_BYTES {
            space.table = Some(space.build_table());
        }
        Ok(space)
    }

    pub fn symmetric(n: usize) -> Result<Self> {
        Self::enumerate(n, ParityFilter::All)
    }

    pub fn alternating(n: usize) -> Result<Self> {
        Self::enumerate(n, ParityFilter::Even)
    }

    fn build_table(&self) -> Arc<[u8]> {
        let n = self.n;
        let mut table = Vec::with_capacity(self.order * n);
        let mut current: Vec<u8> = (0..n as u8).collect();
        let mut even = true;
        loop {
            if self.parity == ParityFilter::All || even {
                table.extend_from_slice(&current);
            }
            match next_permutation(&mut current) {
                Some(transpositions) => even ^= transpositions % 2 == 1,
                None => break,
            }
        }
        debug_assert_eq!(table.len(), self.order * n);
        table.into()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> ParityFilter {
        self.parity
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn name(&self) -> String {
        match self.parity {
            ParityFilter::All => format!("S_{}", self.n),
            ParityFilter::Even => format!("A_{}", self.n),
        }
    }

    /// Copies the images of the element at `rank` into `buf[..n]`.
    #[inline]
    pub(crate) fn load(&self, rank: usize, buf: &mut Images) {
        let n = self.n;
        match &self.table {
            Some(t) => buf[..n].copy_from_slice(&t[rank * n..(rank + 1) * n]),
            None => match self.parity {
                ParityFilter::All => unrank_into(rank, n, buf),
                ParityFilter::Even => {
                    unrank_into(2 * rank, n, buf);
                    if !images_even(&buf[..n]) {
                        buf.swap(n - 2, n - 1);
                    }
                }
            },
        }
    }

    /// Rank of an image array that is known to lie in the space.
    #[inline]
    pub(crate) fn rank_images(&self, images: &[u8]) -> usize {
        let r = lex_rank(images);
        match self.parity {
            ParityFilter::All => r,
            ParityFilter::Even => r / 2,
        }
    }

    pub fn element(&self, rank: usize) -> Permutation {
        assert!(
            rank < self.order,
            "rank {rank} out of range for {}",
            self.name()
        );
        let mut buf = [0u8; HARD_MAX_N];
        self.load(rank, &mut buf);
        Permutation::from_vec_unchecked(buf[..self.n].iter().map(|&v| v as usize).collect())
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        p.n() == self.n && self.parity.admits(p)
    }

    /// Rank of `p`, or `None` when `p` is not an element of the space.
    pub fn rank(&self, p: &Permutation) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut buf = [0u8; HARD_MAX_N];
        for (b, &v) in buf.iter_mut().zip(p.images()) {
            *b = v as u8;
        }
        Some(self.rank_images(&buf[..self.n]))
    }

    /// Rank of the product `element(a) · element(b)`.
    #[inline]
    pub fn product_rank(&self, a: usize, b: usize) -> usize {
        let mut ia = [0u8; HARD_MAX_N];
        let mut ib = [0u8; HARD_MAX_N];
        self.load(a, &mut ia);
        self.load(b, &mut ib);
        let mut out = [0u8; HARD_MAX_N];
        for i in 0..self.n {
            out[i] = ia[ib[i] as usize];
        }
        self.rank_images(&out[..self.n])
    }

    pub fn inverse_rank(&self, a: usize) -> usize {
        let mut ia = [0u8; HARD_MAX_N];
        self.load(a, &mut ia);
        let mut out = [0u8; HARD_MAX_N];
        for i in 0..self.n {
            out[ia[i] as usize] = i as u8;
        }
        self.rank_images(&out[..self.n])
    }

    /// `element(rank)(point)` without allocating.
    #[inline]
    pub fn image_of(&self, rank: usize, point: usize) -> usize {
        match &self.table {
            Some(t) => t[rank * self.n + point] as usize,
            None => {
                let mut buf = [0u8; HARD_MAX_N];
                self.load(rank, &mut buf);
                buf[point] as usize
            }
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Permutation> + '_ {
        (0..self.order).map(move |r| self.element(r))
    }

    pub fn identity_rank(&self) -> usize {
        0
    }
}

/// Lexicographic rank of a permutation of `0..images.len()` (Lehmer code).
pub(crate) fn lex_rank(images: &[u8]) -> usize {
    let n = images.len();
    let mut used: u32 = 0;
    let mut rank = 0;
    for (i, &v) in images.iter().enumerate() {
        let smaller_used = (used & ((1u32 << v) - 1)).count_ones() as usize;
        rank += (v as usize - smaller_used) * FACTORIALS[n - 1 - i];
        used |= 1 << v;
    }
    rank
}

pub(crate) fn unrank_into(mut rank: usize, n: usize, out: &mut Images) {
    let mut available: u32 = (1u32 << n) - 1;
    for i in 0..n {
        let f = FACTORIALS[n - 1 - i];
        let mut digit = rank / f;
        rank %= f;
        // select the digit-th set bit of `available`
        let mut bits = available;
        loop {
            let low = bits.trailing_zeros();
            if digit == 0 {
                out[i] = low as u8;
                available &= !(1 << low);
                break;
            }
            digit -= 1;
            bits &= bits - 1;
        }
    }
}

fn images_even(images: &[u8]) -> bool {
    let n = images.len();
    let mut seen: u32 = 0;
    let mut cycles = 0;
    for start in 0..n {
        if seen & (1 << start) != 0 {
            continue;
        }
        cycles += 1;
        let mut j = start;
        while seen & (1 << j) == 0 {
            seen |= 1 << j;
            j = images[j] as usize;
        }
    }
    (n - cycles).is_multiple_of(2)
}

/// Advances to the lexicographic successor, returning the number of
/// transpositions applied, or `None` after the last permutation.
fn next_permutation(a: &mut [u8]) -> Option<usize> {
    let n = a.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    Some(1 + (n - i) / 2)
}
