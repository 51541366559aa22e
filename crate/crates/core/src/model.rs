//! The symmetric-scheme contract.
//!
//! A symmetric scheme caches the same subfile slots of every file, so a
//! placement is fully described by one slot set per user. Everything here
//! is independent of which construction produced the placement.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::combinatorics::{binomial, enumerate_ksubsets};
use crate::{Error, Rational};

/// Above this many users the counting identities are evaluated slot by
/// slot rather than by enumerating user subsets.
pub const ENUMERATION_USER_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    users: usize,
    files: usize,
    cache_ratio: Ratio<u64>,
    subpacketization: usize,
    multiplicity: usize,
    cached_per_user: usize,
    replication: usize,
}

impl SchemeParams {
    /// Validates the integrality conditions: `t = K·M/N` and `Z = F·M/N`
    /// must both be whole numbers.
    pub fn new(
        users: usize,
        files: usize,
        cache_ratio: Ratio<u64>,
        subpacketization: usize,
        replication: usize,
    ) -> Result<Self, Error> {
        if users == 0 {
            return Err(Error::infeasible("K must be positive"));
        }
        if files == 0 {
            return Err(Error::infeasible("N must be positive"));
        }
        if subpacketization == 0 {
            return Err(Error::infeasible("F must be positive"));
        }
        if replication == 0 {
            return Err(Error::infeasible("h must be positive"));
        }
        if cache_ratio > Ratio::one() {
            return Err(Error::infeasible("M/N must lie in [0, 1]"));
        }
        let t = Ratio::from_integer(users as u64) * cache_ratio;
        if !t.is_integer() {
            return Err(Error::infeasible("t = K·M/N not integral"));
        }
        let z = Ratio::from_integer(subpacketization as u64) * cache_ratio;
        if !z.is_integer() {
            return Err(Error::infeasible("Z = F·M/N not integral"));
        }
        Ok(Self {
            users,
            files,
            cache_ratio,
            subpacketization,
            multiplicity: t.to_integer() as usize,
            cached_per_user: z.to_integer() as usize,
            replication,
        })
    }

    /// K
    pub fn users(&self) -> usize {
        self.users
    }

    /// N
    pub fn files(&self) -> usize {
        self.files
    }

    /// M/N in lowest terms.
    pub fn cache_ratio(&self) -> Ratio<u64> {
        self.cache_ratio
    }

    /// F
    pub fn subpacketization(&self) -> usize {
        self.subpacketization
    }

    /// t: how many users cache each slot.
    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// Z: how many slots each user caches.
    pub fn cached_per_user(&self) -> usize {
        self.cached_per_user
    }

    /// h: the replication multiplier of the optimal scheme, 1 otherwise.
    pub fn replication(&self) -> usize {
        self.replication
    }
}

/// The cached slot set of every user, each sorted and over `[0, F)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacementProfile {
    subpacketization: usize,
    users: Vec<Vec<usize>>,
}

impl PlacementProfile {
    /// Sorts and deduplicates each set. Slots `>= F` are kept and reported
    /// by [`validate_symmetric`].
    pub fn new(subpacketization: usize, mut users: Vec<Vec<usize>>) -> Self {
        for set in &mut users {
            set.sort_unstable();
            set.dedup();
        }
        Self {
            subpacketization,
            users,
        }
    }

    pub fn subpacketization(&self) -> usize {
        self.subpacketization
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn cached_slots(&self, user: usize) -> &[usize] {
        &self.users[user]
    }

    pub fn caches(&self, user: usize, slot: usize) -> bool {
        self.users[user].binary_search(&slot).is_ok()
    }

    /// How many users cache each slot.
    pub fn slot_multiplicities(&self) -> Vec<usize> {
        let mut counts = vec![0; self.subpacketization];
        for set in &self.users {
            for &s in set {
                if let Some(c) = counts.get_mut(s) {
                    *c += 1;
                }
            }
        }
        counts
    }

    fn bitsets(&self) -> Vec<Vec<u64>> {
        let words = self.subpacketization.div_ceil(64);
        self.users
            .iter()
            .map(|set| {
                let mut w = vec![0u64; words];
                for &s in set.iter().filter(|&&s| s < self.subpacketization) {
                    w[s / 64] |= 1 << (s % 64);
                }
                w
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    UserCount,
    CacheSize,
    SlotMultiplicity,
    SlotOutOfRange,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::UserCount => "user_count",
            Self::CacheSize => "cache_size",
            Self::SlotMultiplicity => "slot_multiplicity",
            Self::SlotOutOfRange => "slot_out_of_range",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub user: Option<usize>,
    pub slot: Option<usize>,
    pub expected: usize,
    pub got: usize,
}

/// `kind user=<i> slot=<j> expected=<x> got=<y>`; users are 1-based,
/// slots are dense 0-based indices, `-` marks a field that does not apply.
impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.as_str())?;
        match self.user {
            Some(u) => write!(f, " user={}", u + 1)?,
            None => f.write_str(" user=-")?,
        }
        match self.slot {
            Some(s) => write!(f, " slot={s}")?,
            None => f.write_str(" slot=-")?,
        }
        write!(f, " expected={} got={}", self.expected, self.got)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One violation per line; empty when valid.
impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks `|U_i| = Z` for every user and that every slot is cached by
/// exactly `t` users.
pub fn validate_symmetric(params: &SchemeParams, placement: &PlacementProfile) -> ValidationReport {
    let mut violations = Vec::new();
    let f = params.subpacketization();
    if placement.user_count() != params.users() {
        violations.push(Violation {
            kind: ViolationKind::UserCount,
            user: None,
            slot: None,
            expected: params.users(),
            got: placement.user_count(),
        });
    }
    if placement.subpacketization() != f {
        violations.push(Violation {
            kind: ViolationKind::SlotOutOfRange,
            user: None,
            slot: None,
            expected: f,
            got: placement.subpacketization(),
        });
    }
    for (user, set) in placement.users.iter().enumerate() {
        for &slot in set.iter().filter(|&&s| s >= f) {
            violations.push(Violation {
                kind: ViolationKind::SlotOutOfRange,
                user: Some(user),
                slot: Some(slot),
                expected: f,
                got: slot,
            });
        }
        let in_range = set.iter().filter(|&&s| s < f).count();
        if in_range != params.cached_per_user() {
            violations.push(Violation {
                kind: ViolationKind::CacheSize,
                user: Some(user),
                slot: None,
                expected: params.cached_per_user(),
                got: in_range,
            });
        }
    }
    let mut counts = vec![0usize; f];
    for set in &placement.users {
        for &s in set.iter().filter(|&&s| s < f) {
            counts[s] += 1;
        }
    }
    for (slot, &c) in counts.iter().enumerate() {
        if c != params.multiplicity() {
            violations.push(Violation {
                kind: ViolationKind::SlotMultiplicity,
                user: None,
                slot: Some(slot),
                expected: params.multiplicity(),
                got: c,
            });
        }
    }
    ValidationReport { violations }
}

/// How the left-hand side of a counting identity is evaluated. Both routes
/// are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityMethod {
    /// Enumerate every `k`-subset of users and measure the set operation.
    EnumerateUsers,
    /// Count, for each slot, the `k`-subsets of users it contributes to.
    PerSlot,
}

impl IdentityMethod {
    pub fn for_users(users: usize) -> Self {
        if users <= ENUMERATION_USER_LIMIT {
            Self::EnumerateUsers
        } else {
            Self::PerSlot
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: BigUint,
    pub rhs: BigUint,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// `Σ |U_{d_1} ∪ … ∪ U_{d_k}|` over all `k`-subsets of users against
/// `F·(C(K,k) − C(K−t,k))`.
pub fn union_count_identity(
    params: &SchemeParams,
    placement: &PlacementProfile,
    k: usize,
) -> Result<IdentityCheck, Error> {
    union_count_identity_with(params, placement, k, IdentityMethod::for_users(placement.user_count()))
}

pub fn union_count_identity_with(
    params: &SchemeParams,
    placement: &PlacementProfile,
    k: usize,
    method: IdentityMethod,
) -> Result<IdentityCheck, Error> {
    let users = placement.user_count();
    if k == 0 || k > users {
        return Err(Error::Domain("union identity needs 1 <= k <= K"));
    }
    let lhs = match method {
        IdentityMethod::EnumerateUsers => sum_over_user_subsets(placement, k, |acc, w| *acc |= w)?,
        IdentityMethod::PerSlot => {
            let all = binomial(users as u64, k as u64);
            placement
                .slot_multiplicities()
                .into_iter()
                .map(|m| &all - binomial((users - m) as u64, k as u64))
                .sum()
        }
    };
    let f = BigUint::from(params.subpacketization());
    let k64 = k as u64;
    let rhs =
        f * (binomial(params.users() as u64, k64) - binomial((params.users() - params.multiplicity()) as u64, k64));
    Ok(IdentityCheck { lhs, rhs })
}

/// `Σ |U_{d_1} ∩ … ∩ U_{d_k}|` over all `k`-subsets of users against
/// `C(t,k)·F`.
pub fn intersection_count_identity(
    params: &SchemeParams,
    placement: &PlacementProfile,
    k: usize,
) -> Result<IdentityCheck, Error> {
    intersection_count_identity_with(params, placement, k, IdentityMethod::for_users(placement.user_count()))
}

pub fn intersection_count_identity_with(
    params: &SchemeParams,
    placement: &PlacementProfile,
    k: usize,
    method: IdentityMethod,
) -> Result<IdentityCheck, Error> {
    if k == 0 || k > params.multiplicity() || k > placement.user_count() {
        return Err(Error::Domain("intersection identity needs 1 <= k <= t"));
    }
    let lhs = match method {
        IdentityMethod::EnumerateUsers => sum_over_user_subsets(placement, k, |acc, w| *acc &= w)?,
        IdentityMethod::PerSlot => placement
            .slot_multiplicities()
            .into_iter()
            .map(|m| binomial(m as u64, k as u64))
            .sum(),
    };
    let rhs = binomial(params.multiplicity() as u64, k as u64) * BigUint::from(params.subpacketization());
    Ok(IdentityCheck { lhs, rhs })
}

fn sum_over_user_subsets(
    placement: &PlacementProfile,
    k: usize,
    combine: impl Fn(&mut u64, u64),
) -> Result<BigUint, Error> {
    let users = placement.user_count();
    if users > ENUMERATION_USER_LIMIT {
        return Err(Error::Usage(format!(
            "subset enumeration refused for K = {users} > {ENUMERATION_USER_LIMIT}"
        )));
    }
    let sets = placement.bitsets();
    let mut total: u128 = 0;
    let mut acc = Vec::new();
    for subset in enumerate_ksubsets(users, k) {
        let (first, rest) = subset.elements().split_first().expect("k >= 1");
        acc.clear();
        acc.extend_from_slice(&sets[*first]);
        for &u in rest {
            for (a, &w) in acc.iter_mut().zip(&sets[u]) {
                combine(a, w);
            }
        }
        total += acc.iter().map(|w| w.count_ones() as u128).sum::<u128>();
    }
    Ok(BigUint::from(total))
}

/// `F ≡ 0 (mod C(K, t))`.
pub fn divisibility_check(params: &SchemeParams) -> bool {
    let base = optimal_subpacketization(params);
    (BigUint::from(params.subpacketization()) % base).is_zero()
}

/// `F* = C(K, t)`.
pub fn optimal_subpacketization(params: &SchemeParams) -> BigUint {
    binomial(params.users() as u64, params.multiplicity() as u64)
}

/// `R* = (K−t)/(1+t) − C(K−min(K,N), t+1)/C(K,t)` for the given params.
pub fn optimal_rate(params: &SchemeParams) -> Rational {
    optimal_rate_for(
        params.users() as u64,
        params.files() as u64,
        params.multiplicity() as u64,
    )
}

/// [`optimal_rate`] from `(K, N, t)` directly.
pub fn optimal_rate_for(users: u64, files: u64, t: u64) -> Rational {
    assert!(t <= users, "t must not exceed K");
    let first = Rational::new(BigInt::from(users - t), BigInt::from(1 + t));
    let spare = users - users.min(files);
    let second = Rational::new(BigInt::from(binomial(spare, t + 1)), BigInt::from(binomial(users, t)));
    first - second
}

/// The files requested by each user.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DemandVector {
    files: Vec<usize>,
}

impl DemandVector {
    pub fn new(files: Vec<usize>, file_count: usize) -> Result<Self, Error> {
        if files.is_empty() {
            return Err(Error::Usage("demand must name at least one user".into()));
        }
        if let Some((user, &f)) = files.iter().enumerate().find(|&(_, &f)| f >= file_count) {
            return Err(Error::Usage(format!(
                "file index {f} >= N = {file_count} requested by user {}",
                user + 1
            )));
        }
        Ok(Self { files })
    }

    /// Users request files `0, 1, …, min(K,N)−1` and then wrap around, so
    /// the demand has `min(K, N)` distinct files.
    pub fn distinct(users: usize, file_count: usize) -> Self {
        let span = users.min(file_count).max(1);
        Self {
            files: (0..users).map(|u| u % span).collect(),
        }
    }

    /// Every user requests file 0.
    pub fn uniform(users: usize) -> Self {
        Self { files: vec![0; users] }
    }

    pub fn files(&self) -> &[usize] {
        &self.files
    }

    pub fn file_of(&self, user: usize) -> usize {
        self.files[user]
    }

    pub fn user_count(&self) -> usize {
        self.files.len()
    }

    /// e: the number of distinct requested files.
    pub fn distinct_count(&self) -> usize {
        let mut seen: Vec<usize> = self.files.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Comma-separated 0-based file indices.
impl fmt::Display for DemandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.files.iter().map(|x| format!("{x}")).collect();
        f.write_str(&s.join(","))
    }
}
