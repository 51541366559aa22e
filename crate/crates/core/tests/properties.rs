use num_bigint::BigUint;
use num_traits::One;
use proptest::prelude::*;

use symcache_core::combinatorics::{
    KSubset, binomial, enumerate_ksubsets, ksubset_rank, ksubset_unrank, ln_biguint, log_binomial,
};
use symcache_core::simulator::FileStore;

proptest! {
    #[test]
    fn pascal_identity(n in 1u64..=30, k in 1u64..=30) {
        prop_assume!(k <= n);
        prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
    }

    #[test]
    fn log_binomial_tracks_exact(n in 0u64..=200, k in 0u64..=200) {
        prop_assume!(k <= n);
        let exact = ln_biguint(&binomial(n, k));
        let got = log_binomial(n, k).unwrap();
        prop_assert!((got - exact).abs() < 1e-9, "C({n},{k}) {got} vs {exact}");
    }

    #[test]
    fn rank_unrank_roundtrip(n in 0usize..=24, k in 0usize..=24, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let total = binomial(n as u64, k as u64);
        let total: usize = total.try_into().unwrap();
        let r = (seed % total as u64) as usize;
        let s = ksubset_unrank(r, n, k).unwrap();
        prop_assert_eq!(s.len(), k);
        prop_assert!(s.elements().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(s.elements().iter().all(|&x| x < n));
        prop_assert_eq!(ksubset_rank(&s, n).unwrap(), r);
    }

    #[test]
    fn pack_roundtrip(files in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..100), 1..6), f in 1usize..12) {
        let store = FileStore::pack(&files, f).unwrap();
        prop_assert_eq!(store.unpack(), files.clone());
        let longest = files.iter().map(Vec::len).max().unwrap();
        prop_assert_eq!(store.block_len(), longest.div_ceil(f).max(1));
        for (i, file) in files.iter().enumerate() {
            let blocks: Vec<Vec<u8>> = (0..f).map(|s| store.block(i, s).to_vec()).collect();
            prop_assert_eq!(&store.assemble(i, &blocks), file);
        }
    }
}

#[test]
fn enumeration_matches_unrank_and_count() {
    for n in 0..=9 {
        for k in 0..=n {
            let all: Vec<KSubset> = enumerate_ksubsets(n, k).collect();
            assert_eq!(BigUint::from(all.len()), binomial(n as u64, k as u64));
            for (r, s) in all.iter().enumerate() {
                assert_eq!(&ksubset_unrank(r, n, k).unwrap(), s);
            }
            let mut sorted = all.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), all.len());
        }
    }
    assert_eq!(binomial(0, 0), BigUint::one());
}
