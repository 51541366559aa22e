//! The grouping scheme: users are `a`-subsets of `[n]`, subfile slots are
//! `b`-subsets, and user `A` caches slot `B` iff `A ∩ B ≠ ∅`.
//!
//! For every `(a+b)`-subset `C` the server sends
//! `Y_C = ⊕_{A' ⊆ C, |A'| = a} W_{d_{A'}, C∖A'}`. A user `A` missing slot
//! `B` reads `Y_{A∪B}`; every other term has `(C∖A') ∩ A ≠ ∅` and so is in
//! its cache. Users and slots are indexed by the colex rank of their label.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::One;

use crate::combinatorics::{KSubset, binomial, binomial_usize, enumerate_ksubsets, ksubset_rank};
use crate::model::{DemandVector, PlacementProfile, SchemeParams, optimal_rate_for};
use crate::simulator::{CachingScheme, FileStore, SubfileRef, Transmission, TransmissionLabel, UserCache, xor_into};
use crate::{Error, Rational};

/// `(n, a, b)` with `a + b <= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupingParams {
    pub ground: usize,
    pub user_label: usize,
    pub slot_label: usize,
}

impl GroupingParams {
    pub fn new(ground: usize, user_label: usize, slot_label: usize) -> Result<Self, Error> {
        if user_label + slot_label > ground {
            return Err(Error::infeasible(format!(
                "a + b = {} exceeds n = {ground}",
                user_label + slot_label
            )));
        }
        Ok(Self {
            ground,
            user_label,
            slot_label,
        })
    }

    fn c(&self, n: usize, k: usize) -> BigInt {
        BigInt::from(binomial(n as u64, k as u64))
    }

    /// `C(n, a+b) / C(n, b)`
    pub fn rate(&self) -> Rational {
        let (n, a, b) = (self.ground, self.user_label, self.slot_label);
        Rational::new(self.c(n, a + b), self.c(n, b))
    }

    /// `t = C(n, a) − C(n−b, a)`
    pub fn multiplicity(&self) -> BigInt {
        let (n, a, b) = (self.ground, self.user_label, self.slot_label);
        self.c(n, a) - self.c(n - b, a)
    }

    /// `(C(n,b) − C(n−a,b)) / C(n,b)`
    pub fn cache_ratio(&self) -> Rational {
        let (n, a, b) = (self.ground, self.user_label, self.slot_label);
        Rational::new(self.c(n, b) - self.c(n - a, b), self.c(n, b))
    }
}

#[derive(Clone, Debug)]
pub struct GroupingScheme {
    layout: GroupingParams,
    params: SchemeParams,
    placement: PlacementProfile,
    users: Vec<KSubset>,
    slots: Vec<KSubset>,
}

/// Builds the placement for ground set `[n]`, user labels of size `a` and
/// slot labels of size `b`, serving `files` files.
pub fn grouping_placement(
    ground: usize,
    user_label: usize,
    slot_label: usize,
    files: usize,
) -> Result<GroupingScheme, Error> {
    let layout = GroupingParams::new(ground, user_label, slot_label)?;
    let k = binomial_usize(ground, user_label).ok_or_else(|| Error::infeasible("K = C(n, a) too large"))?;
    let f = binomial_usize(ground, slot_label).ok_or_else(|| Error::infeasible("F = C(n, b) too large"))?;
    let cached = f - binomial_usize(ground - user_label, slot_label).expect("smaller than F");
    let params = SchemeParams::new(k, files, Ratio::new(cached as u64, f as u64), f, 1)?;
    let users: Vec<KSubset> = enumerate_ksubsets(ground, user_label).collect();
    let slots: Vec<KSubset> = enumerate_ksubsets(ground, slot_label).collect();
    let sets = users
        .iter()
        .map(|a| {
            slots
                .iter()
                .enumerate()
                .filter(|(_, b)| a.intersects(b))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    Ok(GroupingScheme {
        layout,
        params,
        placement: PlacementProfile::new(f, sets),
        users,
        slots,
    })
}

impl GroupingScheme {
    pub fn layout(&self) -> GroupingParams {
        self.layout
    }

    pub fn user_label(&self, user: usize) -> &KSubset {
        &self.users[user]
    }

    pub fn slot_label(&self, slot: usize) -> &KSubset {
        &self.slots[slot]
    }

    fn user_index(&self, label: &KSubset) -> usize {
        ksubset_rank(label, self.layout.ground).expect("label within [n]")
    }

    fn slot_index(&self, label: &KSubset) -> usize {
        ksubset_rank(label, self.layout.ground).expect("label within [n]")
    }
}

/// One message per `(a+b)`-subset `C` of `[n]`, colex order.
pub fn grouping_delivery(scheme: &GroupingScheme, store: &FileStore, demand: &DemandVector) -> Vec<Transmission> {
    let GroupingParams {
        ground,
        user_label,
        slot_label,
    } = scheme.layout;
    enumerate_ksubsets(ground, user_label + slot_label)
        .map(|c| {
            let terms = c
                .subsets(user_label)
                .map(|a| SubfileRef {
                    file: demand.file_of(scheme.user_index(&a)),
                    slot: scheme.slot_index(&c.difference(&a)),
                })
                .collect();
            Transmission::encode(TransmissionLabel::Elements(c), terms, store)
        })
        .collect()
}

/// Reconstructs every block of the file requested by `user`.
pub fn grouping_decode(
    scheme: &GroupingScheme,
    user: usize,
    cache: &UserCache,
    log: &[Transmission],
    demand: &DemandVector,
) -> Result<Vec<Vec<u8>>, Error> {
    let GroupingParams {
        ground,
        user_label,
        slot_label,
    } = scheme.layout;
    let mut by_rank: Vec<Option<&[u8]>> =
        vec![None; binomial_usize(ground, user_label + slot_label).ok_or(Error::Overflow("message count"))?];
    for tx in log {
        match &tx.label {
            TransmissionLabel::Elements(c) if c.len() == user_label + slot_label => {
                by_rank[ksubset_rank(c, ground)?] = Some(&tx.payload);
            }
            other => {
                return Err(Error::Consistency(format!("unexpected message label {other:?}")));
            }
        }
    }
    let a = &scheme.users[user];
    let wanted = demand.file_of(user);
    let mut blocks = Vec::with_capacity(scheme.slots.len());
    for (slot, b) in scheme.slots.iter().enumerate() {
        if a.intersects(b) {
            blocks.push(cache.require(wanted, slot)?.to_vec());
            continue;
        }
        let c = a.union(b);
        let mut block = by_rank[ksubset_rank(&c, ground)?]
            .ok_or_else(|| Error::Consistency(format!("message C={c} missing from the log")))?
            .to_vec();
        for other in c.subsets(user_label).filter(|x| x != a) {
            let file = demand.file_of(scheme.user_index(&other));
            xor_into(
                &mut block,
                cache.require(file, scheme.slot_index(&c.difference(&other)))?,
            );
        }
        blocks.push(block);
    }
    Ok(blocks)
}

impl CachingScheme for GroupingScheme {
    fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn placement(&self) -> &PlacementProfile {
        &self.placement
    }

    fn deliver(&self, store: &FileStore, demand: &DemandVector) -> Vec<Transmission> {
        grouping_delivery(self, store, demand)
    }

    fn decode(
        &self,
        user: usize,
        cache: &UserCache,
        log: &[Transmission],
        demand: &DemandVector,
    ) -> Result<Vec<Vec<u8>>, Error> {
        grouping_decode(self, user, cache, log, demand)
    }
}

/// The grouping scheme's rate against the optimum at the same `(K, t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateComparison {
    /// `C(n,a+b)/C(n,b)`
    pub rate: Rational,
    /// `(K−t)/(1+t)`
    pub base_rate: Rational,
    /// The optimum with `N >= K` files, where it equals `base_rate`.
    pub optimal_rate: Rational,
    /// The optimum with a single file, the smallest it gets over `N`.
    pub optimal_rate_single_file: Rational,
    /// `rate / base_rate` by division.
    pub ratio_direct: Rational,
    /// `(C(n,a) − C(n−b,a) + 1) / C(a+b,a)`
    pub ratio_closed_form: Rational,
    /// `1/K + M/N`
    pub shrink_factor: Rational,
}

impl RateComparison {
    pub fn paths_agree(&self) -> bool {
        self.ratio_direct == self.ratio_closed_form
    }

    pub fn meets_optimum(&self) -> bool {
        self.rate >= self.optimal_rate
    }

    /// `R*(N=1) >= R0·(1/K + M/N)`
    pub fn optimum_lower_bound_holds(&self) -> bool {
        self.optimal_rate_single_file >= &self.base_rate * &self.shrink_factor
    }
}

pub fn grouping_rate_vs_optimal(ground: usize, user_label: usize, slot_label: usize) -> Result<RateComparison, Error> {
    let p = GroupingParams::new(ground, user_label, slot_label)?;
    let (n, a, b) = (ground, user_label, slot_label);
    let users = p.c(n, a);
    let t = p.multiplicity();
    let rate = p.rate();
    let base_rate = Rational::new(users.clone() - &t, BigInt::one() + &t);
    let to_u64 = |x: &BigInt| u64::try_from(x).map_err(|_| Error::Overflow("user count"));
    let (k64, t64) = (to_u64(&users)?, to_u64(&t)?);
    let optimal_rate = optimal_rate_for(k64, k64, t64);
    let optimal_rate_single_file = optimal_rate_for(k64, 1, t64);
    // C(n−b, a) >= 1 whenever a + b <= n, so R0 > 0.
    let ratio_direct = &rate / &base_rate;
    let ratio_closed_form = Rational::new(&t + BigInt::one(), p.c(a + b, a));
    let shrink_factor = Rational::new(BigInt::one(), users.clone()) + p.cache_ratio();
    Ok(RateComparison {
        rate,
        base_rate,
        optimal_rate,
        optimal_rate_single_file,
        ratio_direct,
        ratio_closed_form,
        shrink_factor,
    })
}

/// `C(a+b, a) + C(n−b, a) <= C(n, a) + 1`
pub fn verify_lower1(ground: usize, user_label: usize, slot_label: usize) -> Result<bool, Error> {
    let p = GroupingParams::new(ground, user_label, slot_label)?;
    let (n, a, b) = (ground, user_label, slot_label);
    Ok(p.c(a + b, a) + p.c(n - b, a) <= p.c(n, a) + BigInt::one())
}
