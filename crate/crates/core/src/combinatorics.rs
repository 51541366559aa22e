//! Binomial coefficients (exact and log-domain) and k-subsets of `[0, n)`
//! in colexicographic order.
//!
//! Colex order compares two subsets by their largest differing element, so
//! the subsets of `[0, m)` always form a prefix of the subsets of `[0, n)`
//! for `m <= n`. Ranks therefore do not depend on the ground-set size.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::Error;

/// A set of distinct elements of `[0, n)`, stored in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct KSubset(Vec<usize>);

impl KSubset {
    /// Builds a subset of `[0, n)`, rejecting unsorted, repeated or
    /// out-of-range elements.
    pub fn new(elements: Vec<usize>, n: usize) -> Result<Self, Error> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("subset elements must be strictly increasing"));
        }
        if elements.last().is_some_and(|&x| x >= n) {
            return Err(Error::Domain("subset element outside the ground set"));
        }
        Ok(Self(elements))
    }

    pub(crate) fn from_sorted(elements: Vec<usize>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Self(elements)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn intersects(&self, other: &KSubset) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// `self ∪ {x}`.
    pub fn with(&self, x: usize) -> KSubset {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&x) {
            v.insert(pos, x);
        }
        Self(v)
    }

    /// `self ∖ {x}`.
    pub fn without(&self, x: usize) -> KSubset {
        Self(self.0.iter().copied().filter(|&y| y != x).collect())
    }

    pub fn union(&self, other: &KSubset) -> KSubset {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn difference(&self, other: &KSubset) -> KSubset {
        Self(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    /// All `k`-subsets of this set, in colex order of their positions
    /// (which coincides with colex order of the elements).
    pub fn subsets(&self, k: usize) -> impl Iterator<Item = KSubset> + '_ {
        KSubsets::new(self.0.len(), k).map(move |pos| Self(pos.0.iter().map(|&p| self.0[p]).collect()))
    }
}

/// Renders the subset with 1-based labels, comma separated.
impl fmt::Display for KSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", x + 1)?;
        }
        Ok(())
    }
}

/// `C(n, k)` exactly; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `C(n, k)` when it fits in a `u64`.
pub fn binomial_u64(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc = C(n-k+i-1, i-1) here, so the division is exact.
        acc = acc.checked_mul((n - k + i) as u128)? / i as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

pub fn binomial_usize(n: usize, k: usize) -> Option<usize> {
    binomial_u64(n as u64, k as u64).and_then(|v| usize::try_from(v).ok())
}

/// Natural log of `C(n, k)`.
///
/// Short products are summed term by term; otherwise log-gamma is used.
pub fn log_binomial(n: u64, k: u64) -> Result<f64, Error> {
    if k > n {
        return Err(Error::Domain("log_binomial requires k <= n"));
    }
    let k = k.min(n - k);
    if k <= 64 {
        let base = (n - k) as f64;
        let mut acc = 0.0;
        for i in 1..=k {
            let i = i as f64;
            acc += libm::log1p(base / i);
        }
        return Ok(acc);
    }
    Ok(ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
}

/// `ln(m!)`.
pub fn ln_factorial(m: u64) -> f64 {
    libm::lgamma(m as f64 + 1.0)
}

/// Natural log of an arbitrary-precision integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log(x.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

/// Colex rank of `s` among the `|s|`-subsets of `[0, n)`.
pub fn ksubset_rank(s: &KSubset, n: usize) -> Result<usize, Error> {
    if s.0.last().is_some_and(|&x| x >= n) {
        return Err(Error::Domain("subset element outside the ground set"));
    }
    s.0.iter().enumerate().try_fold(0usize, |acc, (i, &x)| {
        binomial_usize(x, i + 1)
            .and_then(|c| acc.checked_add(c))
            .ok_or(Error::Overflow("subset rank"))
    })
}

/// Inverse of [`ksubset_rank`].
pub fn ksubset_unrank(rank: usize, n: usize, k: usize) -> Result<KSubset, Error> {
    let total = binomial_usize(n, k).ok_or(Error::Overflow("subset count"))?;
    if rank >= total {
        return Err(Error::OutOfRange {
            what: "subset rank",
            index: rank,
            bound: total,
        });
    }
    let mut rest = rank;
    let mut elements = alloc::vec![0; k];
    let mut upper = n;
    for i in (1..=k).rev() {
        // Largest c < upper with C(c, i) <= rest.
        let mut c = upper - 1;
        loop {
            // Cannot overflow: C(c, i) <= C(n, k) restricted to c < upper.
            let v = binomial_usize(c, i).ok_or(Error::Overflow("subset rank"))?;
            if v <= rest {
                rest -= v;
                break;
            }
            c -= 1;
        }
        elements[i - 1] = c;
        upper = c;
    }
    Ok(KSubset(elements))
}

/// Iterator over all `k`-subsets of `[0, n)` in colex order.
#[derive(Clone, Debug)]
pub struct KSubsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Self { n, current }
    }
}

impl Iterator for KSubsets {
    type Item = KSubset;

    fn next(&mut self) -> Option<KSubset> {
        let cur = self.current.as_mut()?;
        let out = KSubset(cur.clone());
        let k = cur.len();
        // Bump the lowest element that has room, reset everything below it.
        let mut i = 0;
        loop {
            if i == k {
                self.current = None;
                break;
            }
            let limit = if i + 1 < k { cur[i + 1] } else { self.n };
            if cur[i] + 1 < limit {
                cur[i] += 1;
                for (slot, v) in cur[..i].iter_mut().zip(0..) {
                    *slot = v;
                }
                break;
            }
            i += 1;
        }
        Some(out)
    }
}

/// All `k`-subsets of `[0, n)` in colex order; empty when `k > n`.
pub fn enumerate_ksubsets(n: usize, k: usize) -> KSubsets {
    KSubsets::new(n, k)
}
