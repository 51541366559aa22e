//! Runs a scheme end to end over real bytes.
//!
//! Files are split into equal blocks, each user's cache is materialized from
//! the placement, the server's broadcast log is produced from the demand,
//! and every user decodes from nothing but its own cache and the log. The
//! decoded file is compared byte for byte with the original.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::combinatorics::KSubset;
use crate::model::{DemandVector, PlacementProfile, SchemeParams};
use crate::rng::SplitMix64;
use crate::{Error, Rational};

/// Exhaustive sweeps refuse demand spaces larger than this by default.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 50_000;

/// N files, each cut into F zero-padded blocks of a common length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileStore {
    subpacketization: usize,
    block_len: usize,
    lengths: Vec<usize>,
    data: Vec<u8>,
}

impl FileStore {
    /// Every input is zero-padded to `F·L` bytes with
    /// `L = max(1, max_i ceil(len_i / F))` and cut into `F` blocks.
    pub fn pack<B: AsRef<[u8]>>(inputs: &[B], subpacketization: usize) -> Result<Self, Error> {
        if inputs.is_empty() {
            return Err(Error::Usage("pack needs at least one input file".into()));
        }
        if subpacketization == 0 {
            return Err(Error::Usage("pack needs F >= 1".into()));
        }
        let block_len = inputs
            .iter()
            .map(|x| x.as_ref().len().div_ceil(subpacketization))
            .max()
            .unwrap_or(0)
            .max(1);
        let stride = block_len * subpacketization;
        let mut data = vec![0u8; stride * inputs.len()];
        let mut lengths = Vec::with_capacity(inputs.len());
        for (chunk, input) in data.chunks_mut(stride).zip(inputs) {
            let bytes = input.as_ref();
            chunk[..bytes.len()].copy_from_slice(bytes);
            lengths.push(bytes.len());
        }
        Ok(Self {
            subpacketization,
            block_len,
            lengths,
            data,
        })
    }

    /// `files` files of `payload_bytes` bytes drawn from SplitMix64(seed).
    pub fn random(files: usize, subpacketization: usize, payload_bytes: usize, seed: u64) -> Result<Self, Error> {
        let mut rng = SplitMix64::new(seed);
        let inputs: Vec<Vec<u8>> = (0..files)
            .map(|_| {
                let mut v = vec![0u8; payload_bytes];
                rng.fill_bytes(&mut v);
                v
            })
            .collect();
        Self::pack(&inputs, subpacketization)
    }

    pub fn file_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn subpacketization(&self) -> usize {
        self.subpacketization
    }

    /// L
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn original_len(&self, file: usize) -> usize {
        self.lengths[file]
    }

    pub fn block(&self, file: usize, slot: usize) -> &[u8] {
        let start = (file * self.subpacketization + slot) * self.block_len;
        &self.data[start..start + self.block_len]
    }

    /// The original, unpadded bytes of a file.
    pub fn file(&self, file: usize) -> &[u8] {
        let start = file * self.subpacketization * self.block_len;
        &self.data[start..start + self.lengths[file]]
    }

    pub fn unpack(&self) -> Vec<Vec<u8>> {
        (0..self.file_count()).map(|i| self.file(i).to_vec()).collect()
    }

    /// Concatenates decoded blocks and strips the padding of `file`.
    pub fn assemble(&self, file: usize, blocks: &[Vec<u8>]) -> Vec<u8> {
        let mut out: Vec<u8> = blocks.concat();
        out.truncate(self.lengths[file]);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubfileRef {
    pub file: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TransmissionLabel {
    /// `(j, A)`: replica index and a set of users.
    Replica { replica: usize, users: KSubset },
    /// `C`: a set of ground elements.
    Elements(KSubset),
}

/// One broadcast message: the XOR of the referenced subfiles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub label: TransmissionLabel,
    pub terms: Vec<SubfileRef>,
    pub payload: Vec<u8>,
}

impl Transmission {
    pub fn encode(label: TransmissionLabel, terms: Vec<SubfileRef>, store: &FileStore) -> Self {
        let mut payload = vec![0u8; store.block_len()];
        for t in &terms {
            xor_into(&mut payload, store.block(t.file, t.slot));
        }
        Self { label, terms, payload }
    }
}

pub fn xor_into(dst: &mut [u8], src: &[u8]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// The subfiles one user holds: its cached slots of every file.
#[derive(Clone, Debug)]
pub struct UserCache {
    user: usize,
    files: usize,
    block_len: usize,
    slots: Vec<usize>,
    data: Vec<u8>,
}

impl UserCache {
    pub fn materialize(placement: &PlacementProfile, user: usize, store: &FileStore) -> Self {
        let slots = placement.cached_slots(user).to_vec();
        let files = store.file_count();
        let mut data = Vec::with_capacity(slots.len() * files * store.block_len());
        for &slot in &slots {
            for file in 0..files {
                data.extend_from_slice(store.block(file, slot));
            }
        }
        Self {
            user,
            files,
            block_len: store.block_len(),
            slots,
            data,
        }
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn get(&self, file: usize, slot: usize) -> Option<&[u8]> {
        if file >= self.files {
            return None;
        }
        let pos = self.slots.binary_search(&slot).ok()?;
        let start = (pos * self.files + file) * self.block_len;
        Some(&self.data[start..start + self.block_len])
    }

    pub(crate) fn require(&self, file: usize, slot: usize) -> Result<&[u8], Error> {
        self.get(file, slot).ok_or_else(|| {
            Error::Consistency(format!(
                "user {} needs uncached subfile (file {file}, slot {slot})",
                self.user + 1
            ))
        })
    }
}

/// A scheme that can be simulated: a fixed placement plus a delivery and
/// decoding procedure.
pub trait CachingScheme {
    fn params(&self) -> &SchemeParams;

    fn placement(&self) -> &PlacementProfile;

    /// The server's broadcast log for `demand`.
    fn deliver(&self, store: &FileStore, demand: &DemandVector) -> Vec<Transmission>;

    /// All `F` blocks of the file `user` requested, in slot order, using only
    /// `cache` and `log`.
    fn decode(
        &self,
        user: usize,
        cache: &UserCache,
        log: &[Transmission],
        demand: &DemandVector,
    ) -> Result<Vec<Vec<u8>>, Error>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UserOutcome {
    Decoded,
    /// First slot whose decoded block differs from the original.
    Mismatch {
        slot: usize,
    },
    Failed(Error),
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub demand: DemandVector,
    pub transmissions_sent: usize,
    pub subpacketization: usize,
    /// transmissions / F
    pub rate_measured: Rational,
    pub outcomes: Vec<UserOutcome>,
    pub log: Vec<Transmission>,
}

impl SimulationResult {
    pub fn all_decoded(&self) -> bool {
        self.outcomes.iter().all(|o| *o == UserOutcome::Decoded)
    }

    pub fn decoded_count(&self) -> usize {
        self.outcomes.iter().filter(|o| **o == UserOutcome::Decoded).count()
    }

    /// First user that failed, with its outcome.
    pub fn first_failure(&self) -> Option<(usize, &UserOutcome)> {
        self.outcomes
            .iter()
            .enumerate()
            .find(|(_, o)| **o != UserOutcome::Decoded)
    }
}

/// A scheme bound to a file store, with every user's cache materialized.
pub struct Simulation<'a, S: CachingScheme + ?Sized> {
    scheme: &'a S,
    store: &'a FileStore,
    caches: Vec<UserCache>,
}

impl<'a, S: CachingScheme + ?Sized> Simulation<'a, S> {
    pub fn new(scheme: &'a S, store: &'a FileStore) -> Result<Self, Error> {
        let params = scheme.params();
        if store.subpacketization() != params.subpacketization() {
            return Err(Error::Usage(format!(
                "store is split into {} subfiles, scheme needs F = {}",
                store.subpacketization(),
                params.subpacketization()
            )));
        }
        if store.file_count() != params.files() {
            return Err(Error::Usage(format!(
                "store holds {} files, scheme has N = {}",
                store.file_count(),
                params.files()
            )));
        }
        let caches = (0..params.users())
            .map(|u| UserCache::materialize(scheme.placement(), u, store))
            .collect();
        Ok(Self { scheme, store, caches })
    }

    pub fn caches(&self) -> &[UserCache] {
        &self.caches
    }

    pub fn run(&self, demand: &DemandVector) -> Result<SimulationResult, Error> {
        let params = self.scheme.params();
        if demand.user_count() != params.users() {
            return Err(Error::Usage(format!(
                "demand names {} users, scheme has K = {}",
                demand.user_count(),
                params.users()
            )));
        }
        if let Some(&f) = demand.files().iter().find(|&&f| f >= params.files()) {
            return Err(Error::Usage(format!("file index {f} >= N = {}", params.files())));
        }
        let log = self.scheme.deliver(self.store, demand);
        let outcomes = self
            .caches
            .iter()
            .enumerate()
            .map(|(u, cache)| self.check_user(u, cache, &log, demand))
            .collect();
        let sent = log.len();
        Ok(SimulationResult {
            demand: demand.clone(),
            transmissions_sent: sent,
            subpacketization: params.subpacketization(),
            rate_measured: Rational::new(BigInt::from(sent), BigInt::from(params.subpacketization())),
            outcomes,
            log,
        })
    }

    fn check_user(&self, user: usize, cache: &UserCache, log: &[Transmission], demand: &DemandVector) -> UserOutcome {
        let file = demand.file_of(user);
        match self.scheme.decode(user, cache, log, demand) {
            Err(e) => UserOutcome::Failed(e),
            Ok(blocks) => {
                if blocks.len() != self.store.subpacketization() {
                    return UserOutcome::Failed(Error::Consistency(format!(
                        "decoder returned {} blocks, expected {}",
                        blocks.len(),
                        self.store.subpacketization()
                    )));
                }
                if let Some(slot) = (0..blocks.len()).find(|&s| blocks[s] != self.store.block(file, s)) {
                    return UserOutcome::Mismatch { slot };
                }
                if self.store.assemble(file, &blocks) != self.store.file(file) {
                    return UserOutcome::Mismatch { slot: 0 };
                }
                UserOutcome::Decoded
            }
        }
    }
}

/// Places, delivers and decodes one demand.
pub fn run<S: CachingScheme + ?Sized>(
    scheme: &S,
    store: &FileStore,
    demand: &DemandVector,
) -> Result<SimulationResult, Error> {
    Simulation::new(scheme, store)?.run(demand)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemandMode {
    /// Every vector in `[N]^K`, refused when `N^K > cap`.
    Exhaustive { cap: u64 },
    /// `count` vectors drawn from SplitMix64(seed), user by user.
    Random { count: usize, seed: u64 },
}

impl DemandMode {
    pub fn exhaustive() -> Self {
        Self::Exhaustive {
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    /// Exhaustive when `N^K <= cap`, else `count` seeded random demands.
    pub fn auto(users: usize, files: usize, cap: u64, count: usize, seed: u64) -> Self {
        match demand_space(users, files) {
            Some(size) if size <= cap => Self::Exhaustive { cap },
            _ => Self::Random { count, seed },
        }
    }
}

fn demand_space(users: usize, files: usize) -> Option<u64> {
    u32::try_from(users).ok().and_then(|k| (files as u64).checked_pow(k))
}

/// The demand vectors a mode covers, in a fixed order.
pub fn demands(users: usize, files: usize, mode: DemandMode) -> Result<Vec<DemandVector>, Error> {
    match mode {
        DemandMode::Exhaustive { cap } => {
            let size = demand_space(users, files).filter(|&s| s <= cap).ok_or_else(|| {
                Error::Usage(format!(
                    "exhaustive sweep over N^K = {files}^{users} demands exceeds cap {cap}; use random mode"
                ))
            })?;
            let mut out = Vec::with_capacity(size as usize);
            let mut cur = vec![0usize; users];
            for _ in 0..size {
                out.push(DemandVector::new(cur.clone(), files)?);
                // Odometer with the last user as the fastest digit.
                for digit in cur.iter_mut().rev() {
                    *digit += 1;
                    if *digit < files {
                        break;
                    }
                    *digit = 0;
                }
            }
            Ok(out)
        }
        DemandMode::Random { count, seed } => {
            let mut rng = SplitMix64::new(seed);
            (0..count)
                .map(|_| {
                    let v = (0..users).map(|_| rng.below(files as u64) as usize).collect();
                    DemandVector::new(v, files)
                })
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandRow {
    pub demand: DemandVector,
    pub transmissions_sent: usize,
    pub rate: Rational,
    pub decoded: bool,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub rows: Vec<DemandRow>,
    pub worst_rate: Rational,
    /// The first demand reaching `worst_rate` with the most distinct files.
    pub worst_demand: DemandVector,
}

impl SweepReport {
    pub fn all_decoded(&self) -> bool {
        self.rows.iter().all(|r| r.decoded)
    }
}

/// Simulates every demand of `mode` and reports the worst measured rate.
pub fn sweep_demands<S: CachingScheme + ?Sized>(
    scheme: &S,
    store: &FileStore,
    mode: DemandMode,
) -> Result<SweepReport, Error> {
    let params = scheme.params();
    let sim = Simulation::new(scheme, store)?;
    let mut rows = Vec::new();
    let mut worst: Option<(Rational, DemandVector)> = None;
    for demand in demands(params.users(), params.files(), mode)? {
        let result = sim.run(&demand)?;
        let better = |(r, d): &(Rational, DemandVector)| {
            result.rate_measured > *r || (result.rate_measured == *r && demand.distinct_count() > d.distinct_count())
        };
        if worst.as_ref().is_none_or(better) {
            worst = Some((result.rate_measured.clone(), demand.clone()));
        }
        rows.push(DemandRow {
            decoded: result.all_decoded(),
            transmissions_sent: result.transmissions_sent,
            rate: result.rate_measured,
            demand,
        });
    }
    let (worst_rate, worst_demand) = worst.ok_or_else(|| Error::Usage("sweep covers no demands".into()))?;
    Ok(SweepReport {
        rows,
        worst_rate,
        worst_demand,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_six_bytes_into_three() {
        let s = FileStore::pack(&[[1u8, 2, 3, 4, 5, 6]], 3).unwrap();
        assert_eq!(s.block_len(), 2);
        assert_eq!(s.block(0, 1), &[3, 4]);
        assert_eq!(s.file(0), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn pack_pads_to_common_block_length() {
        let a = vec![1u8; 5];
        let b = vec![2u8; 7];
        let s = FileStore::pack(&[a.clone(), b.clone()], 3).unwrap();
        assert_eq!(s.block_len(), 3);
        assert_eq!(s.block(0, 1), &[1, 1, 0]);
        assert_eq!(s.block(0, 2), &[0, 0, 0]);
        assert_eq!(s.block(1, 2), &[2, 0, 0]);
        assert_eq!(s.unpack(), vec![a, b]);
    }

    #[test]
    fn pack_errors_and_empty_files() {
        let none: [&[u8]; 0] = [];
        assert!(FileStore::pack(&none, 3).is_err());
        assert!(FileStore::pack(&[[1u8]], 0).is_err());
        let s = FileStore::pack(&[[0u8; 0]], 4).unwrap();
        assert_eq!(s.block_len(), 1);
        assert!(s.file(0).is_empty());
    }

    #[test]
    fn exhaustive_demands_in_odometer_order() {
        let all = demands(2, 3, DemandMode::exhaustive()).unwrap();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0].files(), &[0, 0]);
        assert_eq!(all[1].files(), &[0, 1]);
        assert_eq!(all[8].files(), &[2, 2]);
        let err = demands(7, 6, DemandMode::exhaustive()).unwrap_err();
        assert!(matches!(err, Error::Usage(ref m) if m.contains("random mode")));
    }

    #[test]
    fn random_demands_are_seeded() {
        let mode = DemandMode::Random { count: 5, seed: 42 };
        let a = demands(4, 3, mode).unwrap();
        assert_eq!(a, demands(4, 3, mode).unwrap());
        assert_ne!(a, demands(4, 3, DemandMode::Random { count: 5, seed: 43 }).unwrap());
        assert!(matches!(
            DemandMode::auto(7, 6, 50_000, 500, 1),
            DemandMode::Random { .. }
        ));
        assert!(matches!(
            DemandMode::auto(6, 6, 50_000, 500, 1),
            DemandMode::Exhaustive { .. }
        ));
    }
}
