use num_bigint::{BigInt, BigUint};
use num_traits::One;

use symcache_core::Rational;
use symcache_core::analysis::{approx_bin_check, ceil_ln_pow, evaluate_row, params_from_epsilon};
use symcache_core::combinatorics::{binomial, ln_biguint};
use symcache_core::grouping::{grouping_placement, grouping_rate_vs_optimal};
use symcache_core::mn::mn_placement;
use symcache_core::model::{
    DemandVector, IdentityMethod, PlacementProfile, SchemeParams, divisibility_check, intersection_count_identity,
    intersection_count_identity_with, optimal_rate, union_count_identity, union_count_identity_with,
    validate_symmetric,
};
use symcache_core::simulator::{CachingScheme, DemandMode, FileStore, Simulation, UserCache, sweep_demands};

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Brute-force union and intersection sums straight from the slot sets.
fn brute_sums(placement: &PlacementProfile, k: usize) -> (usize, usize) {
    let users = placement.user_count();
    let f = placement.subpacketization();
    let (mut union, mut inter) = (0, 0);
    for mask in 0u32..(1 << users) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let members: Vec<usize> = (0..users).filter(|u| mask >> u & 1 == 1).collect();
        for slot in 0..f {
            let hits = members.iter().filter(|&&u| placement.caches(u, slot)).count();
            union += usize::from(hits > 0);
            inter += usize::from(hits == k);
        }
    }
    (union, inter)
}

fn check_identities(params: &SchemeParams, placement: &PlacementProfile) {
    assert!(validate_symmetric(params, placement).is_valid());
    let users = params.users();
    for k in 1..=users {
        let u = union_count_identity(params, placement, k).unwrap();
        assert!(u.holds(), "union k={k}: {u:?}");
        let per_slot = union_count_identity_with(params, placement, k, IdentityMethod::PerSlot).unwrap();
        assert_eq!(per_slot, u);
        if users <= 12 {
            assert_eq!(u.lhs, BigUint::from(brute_sums(placement, k).0));
        }
    }
    for k in 1..=params.multiplicity() {
        let i = intersection_count_identity(params, placement, k).unwrap();
        assert!(i.holds(), "intersection k={k}: {i:?}");
        let per_slot = intersection_count_identity_with(params, placement, k, IdentityMethod::PerSlot).unwrap();
        assert_eq!(per_slot, i);
        if users <= 12 {
            assert_eq!(i.lhs, BigUint::from(brute_sums(placement, k).1));
        }
    }
}

#[test]
fn identity_examples() {
    let s = mn_placement(4, 4, 2, 1).unwrap();
    let u = union_count_identity(s.params(), s.placement(), 2).unwrap();
    assert_eq!(u.rhs, BigUint::from(30u8));
    assert!(u.holds());
    let i = intersection_count_identity(s.params(), s.placement(), 2).unwrap();
    assert_eq!(i.lhs, BigUint::from(6u8));
    let u1 = union_count_identity(s.params(), s.placement(), 1).unwrap();
    assert_eq!(u1.lhs, BigUint::from(4 * 3u8));

    let g = grouping_placement(4, 1, 2, 4).unwrap();
    assert!(union_count_identity(g.params(), g.placement(), 3).unwrap().holds());
    let i = intersection_count_identity(g.params(), g.placement(), 2).unwrap();
    assert_eq!(i.lhs, BigUint::from(6u8));
    assert!(i.holds());
}

#[test]
fn identities_on_all_small_placements() {
    for k in 1..=8 {
        for t in 0..=k {
            for h in 1..=2 {
                let s = mn_placement(k, 2, t, h).unwrap();
                check_identities(s.params(), s.placement());
                assert!(divisibility_check(s.params()));
            }
        }
    }
    for n in 1..=8 {
        for a in 0..=n {
            for b in 0..=n - a {
                let g = grouping_placement(n, a, b, 1).unwrap();
                check_identities(g.params(), g.placement());
                let t = binomial(n as u64, a as u64) - binomial((n - b) as u64, a as u64);
                assert_eq!(BigUint::from(g.params().multiplicity()), t);
            }
        }
    }
}

#[test]
fn enumeration_refused_above_limit() {
    let g = grouping_placement(7, 3, 1, 1).unwrap();
    assert_eq!(g.params().users(), 35);
    assert!(union_count_identity_with(g.params(), g.placement(), 2, IdentityMethod::EnumerateUsers).is_err());
    assert!(union_count_identity(g.params(), g.placement(), 2).unwrap().holds());
}

#[test]
fn mn_sweeps_match_the_optimum() {
    for k in 1..=4 {
        for n in 1..=3 {
            for t in 0..=k {
                for h in 1..=2 {
                    let s = mn_placement(k, n, t, h).unwrap();
                    let store =
                        FileStore::random(n, s.params().subpacketization(), 24, (k * 100 + n * 10 + t) as u64).unwrap();
                    let report = sweep_demands(&s, &store, DemandMode::exhaustive()).unwrap();
                    assert!(report.all_decoded(), "K={k} N={n} t={t} h={h}");
                    assert_eq!(report.worst_rate, optimal_rate(s.params()), "K={k} N={n} t={t} h={h}");
                    for row in &report.rows {
                        let e = row.demand.distinct_count() as u64;
                        let (k64, t64) = (k as u64, t as u64);
                        let expected = BigUint::from(h) * (binomial(k64, t64 + 1) - binomial(k64 - e, t64 + 1));
                        assert_eq!(BigUint::from(row.transmissions_sent), expected);
                    }
                    assert_eq!(report.worst_demand.distinct_count(), k.min(n));
                }
            }
        }
    }
}

#[test]
fn sweep_examples() {
    let s = mn_placement(3, 3, 1, 1).unwrap();
    let store = FileStore::random(3, 3, 64, 1).unwrap();
    let r = sweep_demands(&s, &store, DemandMode::exhaustive()).unwrap();
    assert_eq!(r.rows.len(), 27);
    assert_eq!(r.worst_rate, rat(1, 1));
    assert_eq!(r.worst_demand.files(), &[0, 1, 2]);

    let s = mn_placement(3, 1, 1, 1).unwrap();
    let store = FileStore::random(1, 3, 64, 1).unwrap();
    let r = sweep_demands(&s, &store, DemandMode::exhaustive()).unwrap();
    assert_eq!(r.worst_rate, rat(2, 3));

    let g = grouping_placement(5, 1, 2, 5).unwrap();
    let store = FileStore::random(5, 10, 16, 1).unwrap();
    let r = sweep_demands(&g, &store, DemandMode::Random { count: 50, seed: 3 }).unwrap();
    assert!(r.all_decoded());
    assert!(r.rows.iter().all(|row| row.rate == rat(10, 10)));
}

#[test]
fn grouping_decodes_everywhere_small() {
    for n in 1..=5 {
        for a in 0..=n {
            for b in 0..=n - a {
                let g = grouping_placement(n, a, b, binomial(n as u64, a as u64).try_into().unwrap()).unwrap();
                let k = g.params().users();
                let store = FileStore::random(k, g.params().subpacketization(), 16, n as u64).unwrap();
                let mode = DemandMode::auto(k, k, 5_000, 40, 9);
                let r = sweep_demands(&g, &store, mode).unwrap();
                assert!(r.all_decoded(), "n={n} a={a} b={b}");
                assert_eq!(
                    r.worst_rate,
                    Rational::new(
                        BigInt::from(binomial(n as u64, (a + b) as u64)),
                        BigInt::from(binomial(n as u64, b as u64))
                    )
                );
            }
        }
    }
}

#[test]
fn end_to_end_runs() {
    let g = grouping_placement(4, 1, 2, 4).unwrap();
    let store = FileStore::random(4, 6, 64, 11).unwrap();
    let r = symcache_core::simulator::run(&g, &store, &DemandVector::distinct(4, 4)).unwrap();
    assert!(r.all_decoded());
    assert_eq!(r.transmissions_sent, 4);
    assert_eq!(r.rate_measured, rat(2, 3));
    assert_eq!(
        r.rate_measured.clone() * Rational::from_integer(6.into()),
        Rational::from_integer(4.into())
    );
}

#[test]
fn decoding_ignores_log_order() {
    let s = mn_placement(5, 3, 2, 2).unwrap();
    let store = FileStore::random(3, s.params().subpacketization(), 32, 5).unwrap();
    let d = DemandVector::new(vec![2, 0, 2, 1, 0], 3).unwrap();
    let mut log = s.deliver(&store, &d);
    log.reverse();
    for u in 0..5 {
        let cache = UserCache::materialize(s.placement(), u, &store);
        let blocks = s.decode(u, &cache, &log, &d).unwrap();
        assert_eq!(store.assemble(d.file_of(u), &blocks), store.file(d.file_of(u)));
    }
}

#[test]
fn mismatched_store_is_rejected() {
    let s = mn_placement(3, 3, 1, 1).unwrap();
    let store = FileStore::random(3, 4, 8, 0).unwrap();
    assert!(Simulation::new(&s, &store).is_err());
    let store = FileStore::random(2, 3, 8, 0).unwrap();
    assert!(Simulation::new(&s, &store).is_err());
    let store = FileStore::random(3, 3, 8, 0).unwrap();
    let sim = Simulation::new(&s, &store).unwrap();
    assert!(sim.run(&DemandVector::new(vec![0, 1], 3).unwrap()).is_err());
}

#[test]
fn grouping_rates_never_beat_the_optimum() {
    for n in 1..=10 {
        for a in 0..=n {
            for b in 0..=n - a {
                let c = grouping_rate_vs_optimal(n, a, b).unwrap();
                assert!(c.paths_agree(), "n={n} a={a} b={b}");
                assert!(c.meets_optimum(), "n={n} a={a} b={b}");
                assert!(c.optimum_lower_bound_holds(), "n={n} a={a} b={b}");
                assert!(c.optimal_rate_single_file <= c.optimal_rate);
            }
        }
    }
}

/// `C(K, m)` for a big `K` by the multiplicative formula.
fn big_binomial(k: &BigUint, m: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..m {
        acc = acc * (k - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

#[test]
fn analysis_rows_agree_with_exact_integers() {
    for n in 2..=40u64 {
        let p = params_from_epsilon(1.0, n).unwrap();
        if !p.is_feasible() {
            continue;
        }
        let row = evaluate_row(&p).unwrap();
        let (a, b) = (p.user_label, p.slot_label as u64);
        let k = binomial(n, a);
        let m = binomial(n - b, a);
        let m64: u64 = (&m).try_into().unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        assert!(rel(row.log_users, ln_biguint(&k)) < 1e-6 || ln_biguint(&k) == 0.0);
        assert!(rel(row.log_subpacketization, ln_biguint(&binomial(n, b))) < 1e-6);
        let fstar = big_binomial(&k, m64);
        assert!(
            rel(row.log_optimal_subpacketization, ln_biguint(&fstar)) < 1e-6,
            "n={n}"
        );
        let t = BigInt::from(k.clone()) - BigInt::from(m.clone());
        let closed = Rational::new(t + 1, BigInt::from(binomial(a + b, a)));
        assert_eq!(row.ratio_exact.as_ref(), Some(&closed));
        let c = grouping_rate_vs_optimal(n as usize, a as usize, b as usize).unwrap();
        assert_eq!(c.ratio_direct, closed);
    }
}

#[test]
fn approx_sandwich_holds() {
    let rows = approx_bin_check(|n| ceil_ln_pow(n, 1), |n| n, (2..=20_000).chain([100_000, 1_000_000]));
    for r in &rows {
        assert!(r.within_bound(1e-9), "{r:?}");
        assert!(r.within_sandwich(), "{r:?}");
    }
    let rows = approx_bin_check(|n| ceil_ln_pow(n, 2), |n| n, [1_000_000]);
    assert!(rows[0].within_sandwich());
}
