use std::fs;

use symcache::cli::run;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn symcache(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("symcache").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn assert_error_line(r: &Run, code: i32, reason_code: &str) {
    assert_eq!(r.code, code, "stdout: {} stderr: {}", r.out, r.err);
    assert_eq!(r.err.lines().count(), 1, "{}", r.err);
    assert!(
        r.err.starts_with(&format!("error code={reason_code} reason=")),
        "{}",
        r.err
    );
}

#[test]
fn simulate_mn_distinct() {
    let r = symcache(&[
        "simulate", "--scheme", "mn", "--K", "3", "--N", "3", "--t", "1", "--demand", "distinct",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(
        r.out
            .contains("result scheme=mn K=3 N=3 t=1 h=1 demand=0,1,2 sent=3 F=3 rate=1 decoded=3/3 verified=true")
    );
}

#[test]
fn simulate_grouping_distinct() {
    let r = symcache(&[
        "simulate", "--scheme", "grouping", "--n", "4", "--a", "1", "--b", "2", "--demand", "distinct",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(
        r.out.contains("sent=4 F=6 rate=2/3 decoded=4/4 verified=true"),
        "{}",
        r.out
    );
}

#[test]
fn full_cache_sends_nothing() {
    let r = symcache(&["simulate", "--scheme", "mn", "--K", "3", "--t", "3", "--format", "csv"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(
        r.out.lines().nth(1).unwrap(),
        "mn,K=3 N=3 t=3 h=1,\"0,1,2\",0,1,0,3,3,true"
    );
}

#[test]
fn demand_out_of_range_is_a_usage_error() {
    let r = symcache(&[
        "simulate", "--scheme", "mn", "--K", "3", "--N", "3", "--t", "2", "--demand", "0,0,5",
    ]);
    assert_error_line(&r, 2, "usage");
    assert!(r.err.contains("file index 5"));
}

#[test]
fn non_integral_t_names_the_constraint() {
    let r = symcache(&["simulate", "--scheme", "mn", "--K", "4", "--N", "3", "--M", "1"]);
    assert_error_line(&r, 2, "infeasible");
    assert!(r.err.contains("t = K·M/N not integral"));
    let ok = symcache(&["simulate", "--scheme", "mn", "--K", "4", "--N", "2", "--M", "1"]);
    assert_eq!(ok.code, 0, "{}", ok.err);
    assert!(ok.out.contains("t=2"));
}

#[test]
fn mixing_scheme_flags_is_rejected() {
    let r = symcache(&[
        "simulate", "--scheme", "grouping", "--n", "4", "--a", "1", "--b", "2", "--t", "1",
    ]);
    assert_error_line(&r, 2, "usage");
    let r = symcache(&["simulate", "--scheme", "mn", "--K", "4", "--t", "1", "--a", "1"]);
    assert_error_line(&r, 2, "usage");
    let r = symcache(&["simulate", "--scheme", "grouping", "--n", "4", "--a", "3", "--b", "2"]);
    assert_error_line(&r, 2, "infeasible");
}

#[test]
fn verify_mn_reaches_the_optimum() {
    let r = symcache(&["verify", "--scheme", "mn", "--K", "4", "--N", "4", "--t", "2"]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert!(r.out.contains("rate_vs_optimum pass worst=2/3"), "{}", r.out);
    assert!(r.out.ends_with("verdict pass\n"));
}

#[test]
fn verify_grouping_reports_the_gap() {
    let r = symcache(&["verify", "--scheme", "grouping", "--n", "4", "--a", "1", "--b", "2"]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert!(r.out.contains("gap=0"), "{}", r.out);
    let r = symcache(&[
        "verify", "--scheme", "grouping", "--n", "6", "--a", "2", "--b", "2", "--format", "csv",
    ]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert!(r.out.contains("rate_vs_optimum,pass"), "{}", r.out);
    assert!(r.out.contains("decode,pass,\"500/500 demands (random)\""), "{}", r.out);
}

#[test]
fn verify_with_t_above_k_is_a_usage_error() {
    let r = symcache(&["verify", "--scheme", "mn", "--K", "5", "--t", "7"]);
    assert_error_line(&r, 2, "infeasible");
}

#[test]
fn exhaustive_over_cap_advises_random_mode() {
    let r = symcache(&[
        "sweep",
        "--scheme",
        "mn",
        "--K",
        "8",
        "--N",
        "8",
        "--t",
        "1",
        "--mode",
        "exhaustive",
    ]);
    assert_error_line(&r, 2, "usage");
    assert!(r.err.contains("random mode"));
}

#[test]
fn sweep_reports_the_worst_demand() {
    let r = symcache(&[
        "sweep", "--scheme", "mn", "--K", "3", "--N", "3", "--t", "1", "--format", "csv",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.lines().count(), 1 + 27 + 1);
    assert!(r.out.ends_with("# worst_rate=1 worst_demand=0,1,2\n"), "{}", r.out);
    let r = symcache(&["sweep", "--scheme", "mn", "--K", "3", "--N", "1", "--t", "1"]);
    assert!(r.out.contains("worst rate 2/3"), "{}", r.out);
}

#[test]
fn analyze_passes_on_the_large_range() {
    let r = symcache(&["analyze", "--epsilon", "1", "--n", "1e3,1e4,1e5,1e6"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(
        lines[0],
        "n,a,b,c,log_K,log_F,log_Fstar,ratio,claim2_exp,claim3_stat,degenerate"
    );
    assert!(lines[2].starts_with("10000,85,9913,2,"));
    assert_eq!(*lines.last().unwrap(), "# verdict=pass");
    let ranged = symcache(&["analyze", "--epsilon", "1", "--n-range", "1e3:1e6:10"]);
    assert_eq!(ranged.out, r.out);
}

#[test]
fn analyze_rejects_bad_input() {
    assert_error_line(&symcache(&["analyze", "--epsilon", "-1", "--n", "1e3"]), 2, "usage");
    let r = symcache(&["analyze", "--epsilon", "1", "--n", "8,9,10"]);
    assert_error_line(&r, 1, "insufficient_range");
    assert_eq!(r.out.lines().filter(|l| l.ends_with(",true")).count(), 3);
    assert!(r.out.contains("# verdicts withheld"));
    assert_error_line(&symcache(&["analyze", "--epsilon", "1", "--n", "100,10"]), 2, "domain");
    assert_error_line(&symcache(&["analyze", "--epsilon", "1"]), 2, "usage");
}

#[test]
fn config_file_drives_the_run_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scheme.txt");
    fs::write(
        &cfg,
        "# four users\nscheme=mn\nK=4\nN=4\nt=1\npayload_bytes=16\nseed=5\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let r = symcache(&["simulate", "--config", path]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("K=4 N=4 t=1 h=1"));
    let r = symcache(&["simulate", "--config", path, "--t", "2"]);
    assert!(r.out.contains("K=4 N=4 t=2 h=1"), "{}", r.out);
    fs::write(&cfg, "scheme=mn\nK=four\n").unwrap();
    assert_error_line(&symcache(&["simulate", "--config", path]), 2, "usage");
    let missing = dir.path().join("missing.txt");
    assert_error_line(&symcache(&["simulate", "--config", missing.to_str().unwrap()]), 2, "io");
}

#[test]
fn transcript_file_matches_stdout_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("log.txt");
    let args = [
        "simulate", "--scheme", "mn", "--K", "4", "--N", "2", "--t", "1", "--h", "2", "--demand", "0,1,1,0",
    ];
    let mut with_file = args.to_vec();
    with_file.extend(["--transcript", t.to_str().unwrap()]);
    assert_eq!(symcache(&with_file).code, 0);
    let mut to_stdout = args.to_vec();
    to_stdout.extend(["--format", "transcript"]);
    let r = symcache(&to_stdout);
    let file = fs::read_to_string(&t).unwrap();
    assert_eq!(file, r.out);
    let lines: Vec<&str> = file.lines().collect();
    assert_eq!(lines[0], "scheme=mn K=4 N=2 t=1 h=2 demand=0,1,1,0");
    // e = 2, so h·(C(4,2) − C(2,2)) = 10 messages.
    assert_eq!(lines.len(), 1 + 10);
    assert!(lines[1].starts_with("Y j=0 A=1,2 payload="));
    assert!(lines.iter().skip(1).all(|l| l.starts_with("Y j=")));
}

#[test]
fn real_files_roundtrip_through_simulate_and_pack() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    fs::write(&a, b"hello").unwrap();
    fs::write(&b, b"caching").unwrap();
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let r = symcache(&[
        "simulate", "--scheme", "mn", "--K", "3", "--t", "1", "--input", a, "--input", b, "--demand", "1,0,1",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("K=3 N=2"));
    let r = symcache(&["pack", "--F", "3", a, b]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "pack files=2 F=3 L=3");
    assert_eq!(lines[1], "file 0 len=5 name=a.bin");
    assert_eq!(lines[3], "block file=0 slot=0 payload=68656c");
    assert_eq!(lines[4], "block file=0 slot=1 payload=6c6f00");
    assert_eq!(lines[5], "block file=0 slot=2 payload=000000");
    let r = symcache(&[
        "simulate", "--scheme", "mn", "--K", "3", "--N", "3", "--t", "1", "--input", a,
    ]);
    assert_error_line(&r, 2, "usage");
}

#[test]
fn help_and_parse_errors() {
    let r = symcache(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("simulate"));
    assert_error_line(&symcache(&["frobnicate"]), 2, "usage");
    assert_error_line(&symcache(&["simulate", "--K", "x"]), 2, "usage");
    assert_error_line(&symcache(&["pack", "--F", "2"]), 2, "usage");
}

#[test]
fn random_demand_depends_on_the_seed() {
    let base = [
        "simulate", "--scheme", "mn", "--K", "6", "--N", "5", "--t", "2", "--demand", "random",
    ];
    let demand = |seed: &str| {
        let mut args = base.to_vec();
        args.extend(["--seed", seed]);
        let r = symcache(&args);
        assert_eq!(r.code, 0, "{}", r.err);
        r.out.lines().nth(1).unwrap().to_string()
    };
    assert_eq!(demand("1"), demand("1"));
    assert_ne!(demand("1"), demand("2"));
}
