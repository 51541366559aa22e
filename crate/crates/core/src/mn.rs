//! The rate-optimal symmetric scheme with subpacketization `F = h·C(K, t)`.
//!
//! Slots are labelled `(j, S)` with `j ∈ [0, h)` and `S` a `t`-subset of
//! users; user `u` caches `(j, S)` iff `u ∈ S`. For each replica `j` and
//! each `(t+1)`-subset `A` of users the message
//! `Y_{j,A} = ⊕_{i ∈ A} W_{d_i, j, A∖{i}}` lets every member of `A` recover
//! one missing subfile. Only the messages whose `A` meets a leader set (one
//! user per distinct requested file) are broadcast; every other message is
//! the XOR of broadcast ones, which is how users rebuild it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::Error;
use crate::combinatorics::{KSubset, binomial_usize, enumerate_ksubsets, ksubset_rank};
use crate::model::{DemandVector, PlacementProfile, SchemeParams};
use crate::simulator::{CachingScheme, FileStore, SubfileRef, Transmission, TransmissionLabel, UserCache, xor_into};

#[derive(Clone, Debug)]
pub struct MnScheme {
    params: SchemeParams,
    placement: PlacementProfile,
    /// The `t`-subsets of users in colex order.
    labels: Vec<KSubset>,
    /// `C(K, t+1)`, the message count per replica.
    messages_per_replica: usize,
}

/// Builds the placement for `K` users, `N` files, multiplicity `t` and
/// replication `h`.
pub fn mn_placement(users: usize, files: usize, t: usize, replication: usize) -> Result<MnScheme, Error> {
    if users == 0 {
        return Err(Error::infeasible("K must be positive"));
    }
    if t > users {
        return Err(Error::infeasible(format!("t = {t} exceeds K = {users}")));
    }
    if replication == 0 {
        return Err(Error::infeasible("h must be positive"));
    }
    let per_replica = binomial_usize(users, t).ok_or_else(|| Error::infeasible("C(K, t) too large"))?;
    let subpacketization = per_replica
        .checked_mul(replication)
        .ok_or_else(|| Error::infeasible("F = h·C(K, t) too large"))?;
    let messages_per_replica = binomial_usize(users, t + 1).ok_or_else(|| Error::infeasible("C(K, t+1) too large"))?;
    let params = SchemeParams::new(
        users,
        files,
        Ratio::new(t as u64, users as u64),
        subpacketization,
        replication,
    )?;
    let labels: Vec<KSubset> = enumerate_ksubsets(users, t).collect();
    let mut sets = vec![Vec::new(); users];
    for j in 0..replication {
        for (rank, s) in labels.iter().enumerate() {
            for &u in s.elements() {
                sets[u].push(j * per_replica + rank);
            }
        }
    }
    Ok(MnScheme {
        params,
        placement: PlacementProfile::new(subpacketization, sets),
        labels,
        messages_per_replica,
    })
}

impl MnScheme {
    pub fn multiplicity(&self) -> usize {
        self.params.multiplicity()
    }

    pub fn replication(&self) -> usize {
        self.params.replication()
    }

    /// Slot index of `(j, S)`: `j·C(K,t) + rank(S)`.
    pub fn slot(&self, replica: usize, label: &KSubset) -> Result<usize, Error> {
        if label.len() != self.multiplicity() {
            return Err(Error::Domain("slot label must have t users"));
        }
        Ok(replica * self.labels.len() + ksubset_rank(label, self.params.users())?)
    }

    /// `(j, S)` of a slot index.
    pub fn slot_label(&self, slot: usize) -> (usize, &KSubset) {
        let per = self.labels.len();
        (slot / per, &self.labels[slot % per])
    }

    fn message_index(&self, replica: usize, users: &KSubset) -> Result<usize, Error> {
        Ok(replica * self.messages_per_replica + ksubset_rank(users, self.params.users())?)
    }
}

/// One requesting user per distinct file of a demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeaderSet {
    users: Vec<usize>,
}

impl LeaderSet {
    /// Leaders in increasing user order.
    pub fn users(&self) -> &[usize] {
        &self.users
    }

    /// e
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn as_subset(&self) -> KSubset {
        KSubset::from_sorted(self.users.clone())
    }

    pub fn meets(&self, set: &KSubset) -> bool {
        set.elements().iter().any(|u| self.users.binary_search(u).is_ok())
    }
}

/// For each distinct file, the lowest-index user requesting it.
pub fn choose_leaders(demand: &DemandVector) -> LeaderSet {
    let mut seen: Vec<usize> = Vec::new();
    let mut users = Vec::new();
    for (u, &f) in demand.files().iter().enumerate() {
        if !seen.contains(&f) {
            seen.push(f);
            users.push(u);
        }
    }
    LeaderSet { users }
}

/// Broadcasts `Y_{j,A}` for every `(t+1)`-subset `A` meeting the leaders,
/// `j`-major then colex in `A`.
pub fn mn_delivery(
    scheme: &MnScheme,
    store: &FileStore,
    demand: &DemandVector,
    leaders: &LeaderSet,
) -> Vec<Transmission> {
    let users = scheme.params.users();
    let t = scheme.multiplicity();
    let mut log = Vec::new();
    for j in 0..scheme.replication() {
        for a in enumerate_ksubsets(users, t + 1).filter(|a| leaders.meets(a)) {
            let terms = a
                .elements()
                .iter()
                .map(|&i| SubfileRef {
                    file: demand.file_of(i),
                    slot: scheme.slot(j, &a.without(i)).expect("label has t users"),
                })
                .collect();
            let label = TransmissionLabel::Replica { replica: j, users: a };
            log.push(Transmission::encode(label, terms, store));
        }
    }
    log
}

/// Broadcast messages looked up by `(j, A)`.
pub struct SentIndex<'a> {
    scheme: &'a MnScheme,
    block_len: usize,
    slots: Vec<Option<&'a [u8]>>,
}

impl<'a> SentIndex<'a> {
    pub fn new(scheme: &'a MnScheme, log: &'a [Transmission], block_len: usize) -> Result<Self, Error> {
        let mut slots = vec![None; scheme.replication() * scheme.messages_per_replica];
        for tx in log {
            let TransmissionLabel::Replica { replica, users } = &tx.label else {
                return Err(Error::Consistency("log holds a message without a (j, A) label".into()));
            };
            if *replica >= scheme.replication() || users.len() != scheme.multiplicity() + 1 {
                return Err(Error::Consistency(format!(
                    "unexpected message label j={replica} A={users}"
                )));
            }
            slots[scheme.message_index(*replica, users)?] = Some(tx.payload.as_slice());
        }
        Ok(Self {
            scheme,
            block_len,
            slots,
        })
    }

    pub fn get(&self, replica: usize, users: &KSubset) -> Option<&'a [u8]> {
        self.slots[self.scheme.message_index(replica, users).ok()?]
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }
}

/// Rebuilds the unsent `Y_{j,B}` (`B` disjoint from the leaders) as the XOR
/// of `Y_{j, C∖V}` over every `V ≠ U` that picks one requester of each
/// distinct file from `C = B ∪ U`.
pub fn mn_recover_unsent(
    replica: usize,
    b: &KSubset,
    sent: &SentIndex<'_>,
    demand: &DemandVector,
    leaders: &LeaderSet,
) -> Result<alloc::vec::Vec<u8>, Error> {
    if leaders.meets(b) {
        return Err(Error::Domain(
            "recovery is only defined for sets disjoint from the leaders",
        ));
    }
    let leader_set = leaders.as_subset();
    let c = b.union(&leader_set);
    // Candidates for each distinct file, in leader order.
    let groups: Vec<Vec<usize>> = leaders
        .users()
        .iter()
        .map(|&l| {
            let f = demand.file_of(l);
            c.elements()
                .iter()
                .copied()
                .filter(|&u| demand.file_of(u) == f)
                .collect()
        })
        .collect();
    let mut out = vec![0u8; sent.block_len()];
    let mut choice = vec![0usize; groups.len()];
    loop {
        let mut v: Vec<usize> = choice.iter().zip(&groups).map(|(&i, g)| g[i]).collect();
        v.sort_unstable();
        let v = KSubset::from_sorted(v);
        if v != leader_set {
            let rest = c.difference(&v);
            let payload = sent.get(replica, &rest).ok_or_else(|| {
                Error::Consistency(format!("message j={replica} A={rest} needed for recovery was not sent"))
            })?;
            xor_into(&mut out, payload);
        }
        // Advance the mixed-radix counter over the groups.
        let mut pos = 0;
        loop {
            if pos == groups.len() {
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < groups[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Reconstructs every block of the file `user` requested.
pub fn mn_decode(
    scheme: &MnScheme,
    user: usize,
    cache: &UserCache,
    log: &[Transmission],
    demand: &DemandVector,
    leaders: &LeaderSet,
) -> Result<Vec<Vec<u8>>, Error> {
    let sent = SentIndex::new(scheme, log, cache.block_len())?;
    let wanted = demand.file_of(user);
    let mut recovered: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
    let mut blocks = Vec::with_capacity(scheme.params.subpacketization());
    for slot in 0..scheme.params.subpacketization() {
        let (j, s) = scheme.slot_label(slot);
        if s.contains(user) {
            blocks.push(cache.require(wanted, slot)?.to_vec());
            continue;
        }
        let b = s.with(user);
        let mut block = if leaders.meets(&b) {
            sent.get(j, &b)
                .ok_or_else(|| Error::Consistency(format!("message j={j} A={b} missing from the log")))?
                .to_vec()
        } else {
            let key = scheme.message_index(j, &b)?;
            if let Some(y) = recovered.get(&key) {
                y.clone()
            } else {
                let y = mn_recover_unsent(j, &b, &sent, demand, leaders)?;
                recovered.insert(key, y.clone());
                y
            }
        };
        for &i in b.elements().iter().filter(|&&i| i != user) {
            let other = scheme.slot(j, &b.without(i))?;
            xor_into(&mut block, cache.require(demand.file_of(i), other)?);
        }
        blocks.push(block);
    }
    Ok(blocks)
}

impl CachingScheme for MnScheme {
    fn params(&self) -> &SchemeParams {
        &self.params
    }

    fn placement(&self) -> &PlacementProfile {
        &self.placement
    }

    fn deliver(&self, store: &FileStore, demand: &DemandVector) -> Vec<Transmission> {
        mn_delivery(self, store, demand, &choose_leaders(demand))
    }

    fn decode(
        &self,
        user: usize,
        cache: &UserCache,
        log: &[Transmission],
        demand: &DemandVector,
    ) -> Result<Vec<Vec<u8>>, Error> {
        mn_decode(self, user, cache, log, demand, &choose_leaders(demand))
    }
}
