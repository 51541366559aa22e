use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use symcache_core::analysis::{params_from_epsilon, trend_rows, trend_verdicts};
use symcache_core::combinatorics::binomial;
use symcache_core::grouping::{grouping_rate_vs_optimal, verify_lower1};
use symcache_core::model::{
    DemandVector, IdentityMethod, divisibility_check, intersection_count_identity, optimal_rate, union_count_identity,
    validate_symmetric,
};
use symcache_core::simulator::{
    DEFAULT_EXHAUSTIVE_CAP, DemandMode, FileStore, UserOutcome, demands, run as run_simulation, sweep_demands,
};

use crate::config::{SchemeConfig, SchemeKind};
use crate::error::CliError;
use crate::instance::Instance;
use crate::render::{self, CheckLine};

pub const DEFAULT_PAYLOAD_BYTES: usize = 64;
pub const DEFAULT_SAMPLES: usize = 500;

#[derive(Parser, Debug)]
#[command(
    name = "symcache",
    version,
    about = "Simulate and verify symmetric uncoded caching schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one delivery and decode every user.
    Simulate(SimulateArgs),
    /// Run the full property battery on one instance.
    Verify(VerifyArgs),
    /// Measure the rate over a set of demands.
    Sweep(SweepArgs),
    /// Emit the asymptotic trend table as CSV.
    Analyze(AnalyzeArgs),
    /// Split files into subfiles and list the blocks.
    Pack(PackArgs),
}

#[derive(Args, Debug)]
struct SchemeArgs {
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<SchemeKind>,
    /// Number of users (mn).
    #[arg(long = "K")]
    users: Option<usize>,
    /// Number of files; defaults to K.
    #[arg(long = "N")]
    files: Option<usize>,
    /// Caching multiplicity t = KM/N (mn).
    #[arg(long = "t")]
    multiplicity: Option<usize>,
    /// Cache size M in files, as an integer or p/q (mn; alternative to --t).
    #[arg(long = "M", value_parser = parse_ratio)]
    memory: Option<Ratio<u64>>,
    /// Replication factor, F = h·C(K,t) (mn).
    #[arg(long = "h")]
    replication: Option<usize>,
    /// Ground set size (grouping).
    #[arg(long = "n")]
    ground: Option<usize>,
    /// User label size (grouping).
    #[arg(long = "a")]
    user_label: Option<usize>,
    /// Slot label size (grouping).
    #[arg(long = "b")]
    slot_label: Option<usize>,
    /// Scheme description file (key=value lines); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "payload-bytes")]
    payload_bytes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Csv,
    Transcript,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepMode {
    Auto,
    Exhaustive,
    Random,
}

#[derive(Args, Debug)]
struct SweepOpts {
    /// auto is exhaustive when N^K fits under --cap, random otherwise.
    #[arg(long, value_enum, default_value_t = SweepMode::Auto)]
    mode: SweepMode,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Comma-separated 0-based file indices, or distinct, uniform, random.
    #[arg(long, default_value = "distinct")]
    demand: String,
    /// Use these files as the library instead of random payloads.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    /// Also write the transmission log here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    sweep: SweepOpts,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    sweep: SweepOpts,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    /// Comma-separated n values; 1e3 style is accepted.
    #[arg(long = "n", conflicts_with = "range")]
    n_values: Option<String>,
    /// Geometric range start:stop:factor, e.g. 1e3:1e6:10.
    #[arg(long = "n-range")]
    range: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PackArgs {
    /// Subpacketization level.
    #[arg(long = "F")]
    subpacketization: usize,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    SchemeKind::parse(s).map_err(|e| e.to_string())
}

fn parse_ratio(s: &str) -> Result<Ratio<u64>, String> {
    let bad = || format!("`{s}` is not a non-negative integer or fraction p/q");
    match s.split_once('/') {
        Some((p, q)) => {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(p, q))
        }
        None => s.trim().parse().map(Ratio::from_integer).map_err(|_| bad()),
    }
}

/// `1000`, `1e3` or `25e4`.
pub fn parse_count(s: &str) -> Result<u64, CliError> {
    let s = s.trim();
    let bad = || CliError::usage(format!("`{s}` is not a positive integer"));
    match s.split_once(['e', 'E']) {
        Some((mantissa, exp)) => {
            let m: u64 = mantissa.parse().map_err(|_| bad())?;
            let e: u32 = exp.parse().map_err(|_| bad())?;
            10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or_else(bad)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

fn parse_n_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',').map(parse_count).collect()
}

fn parse_n_range(s: &str) -> Result<Vec<u64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, factor] = parts[..] else {
        return Err(CliError::usage("--n-range expects start:stop:factor"));
    };
    let (start, stop, factor) = (parse_count(start)?, parse_count(stop)?, parse_count(factor)?);
    if start == 0 || factor < 2 {
        return Err(CliError::usage("--n-range needs start >= 1 and factor >= 2"));
    }
    let mut out = Vec::new();
    let mut n = start;
    while n <= stop {
        out.push(n);
        match n.checked_mul(factor) {
            Some(next) => n = next,
            None => break,
        }
    }
    Ok(out)
}

impl SchemeArgs {
    fn resolve(&self) -> Result<SchemeConfig, CliError> {
        let base = match &self.config {
            Some(path) => SchemeConfig::load(path)?,
            None => SchemeConfig::default(),
        };
        Ok(base.overlay(SchemeConfig {
            scheme: self.scheme,
            users: self.users,
            files: self.files,
            multiplicity: self.multiplicity,
            replication: self.replication,
            ground: self.ground,
            user_label: self.user_label,
            slot_label: self.slot_label,
            payload_bytes: self.payload_bytes,
            seed: self.seed,
        }))
    }
}

struct Resolved {
    instance: Instance,
    payload_bytes: usize,
    seed: u64,
}

fn resolve(cfg: SchemeConfig, memory: Option<Ratio<u64>>) -> Result<Resolved, CliError> {
    let payload_bytes = cfg.payload_bytes.unwrap_or(DEFAULT_PAYLOAD_BYTES);
    if payload_bytes == 0 {
        return Err(CliError::usage("payload_bytes must be positive"));
    }
    Ok(Resolved {
        instance: Instance::build(&cfg, memory)?,
        payload_bytes,
        seed: cfg.seed.unwrap_or(0),
    })
}

fn random_store(r: &Resolved) -> Result<FileStore, CliError> {
    Ok(FileStore::random(
        r.instance.files(),
        r.instance.subpacketization(),
        r.payload_bytes,
        r.seed,
    )?)
}

fn parse_demand(spec: &str, users: usize, files: usize, seed: u64) -> Result<DemandVector, CliError> {
    match spec {
        "distinct" => Ok(DemandVector::distinct(users, files)),
        "uniform" => Ok(DemandVector::uniform(users)),
        "random" => Ok(demands(users, files, DemandMode::Random { count: 1, seed })?.remove(0)),
        list => {
            let v = list
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::usage(format!("bad demand entry `{x}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if v.len() != users {
                return Err(CliError::usage(format!(
                    "demand names {} users but K = {users}",
                    v.len()
                )));
            }
            Ok(DemandVector::new(v, files)?)
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(out: &mut dyn Write, target: Option<&Path>, text: &str) -> Result<(), CliError> {
    match target {
        Some(path) => write_file(path, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn sweep_mode(opts: &SweepOpts, users: usize, files: usize, seed: u64) -> DemandMode {
    match opts.mode {
        SweepMode::Auto => DemandMode::auto(users, files, opts.cap, opts.samples, seed),
        SweepMode::Exhaustive => DemandMode::Exhaustive { cap: opts.cap },
        SweepMode::Random => DemandMode::Random {
            count: opts.samples,
            seed,
        },
    }
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = args.scheme.resolve()?;
    let inputs = args
        .inputs
        .iter()
        .map(|p| read_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    if !inputs.is_empty() {
        match cfg.files {
            Some(n) if n != inputs.len() => {
                return Err(CliError::usage(format!(
                    "N = {n} but {} input files given",
                    inputs.len()
                )));
            }
            _ => cfg.files = Some(inputs.len()),
        }
    }
    let r = resolve(cfg, args.scheme.memory)?;
    let store = if inputs.is_empty() {
        random_store(&r)?
    } else {
        FileStore::pack(&inputs, r.instance.subpacketization())?
    };
    let demand = parse_demand(&args.demand, r.instance.users(), r.instance.files(), r.seed)?;
    let result = run_simulation(r.instance.scheme(), &store, &demand)?;

    if let Some(path) = &args.transcript {
        write_file(path, &render::transcript(&r.instance, &demand, &result.log))?;
    }
    let text = match args.format {
        Format::Human => render::result_summary(&r.instance, &result),
        Format::Csv => render::result_csv(&r.instance, &result),
        Format::Transcript => render::transcript(&r.instance, &demand, &result.log),
    };
    emit(out, args.out.as_deref(), &text)?;
    match result.first_failure() {
        None => Ok(()),
        Some((user, UserOutcome::Mismatch { slot })) => {
            Err(CliError::Check(format!("user {} diverges at slot {slot}", user + 1)))
        }
        Some((user, outcome)) => Err(CliError::Check(format!(
            "user {} did not decode: {outcome:?}",
            user + 1
        ))),
    }
}

fn verify_checks(r: &Resolved, opts: &SweepOpts) -> Result<Vec<CheckLine>, CliError> {
    let scheme = r.instance.scheme();
    let params = scheme.params();
    let placement = scheme.placement();
    let (users, t) = (params.users(), params.multiplicity());
    let mut checks = Vec::new();

    let report = validate_symmetric(params, placement);
    checks.push(CheckLine {
        name: "symmetry",
        passed: report.is_valid(),
        detail: match report.violations.first() {
            None => format!("t={t} Z={}", params.cached_per_user()),
            Some(v) => format!("{} violations, first: {v}", report.violations.len()),
        },
    });

    let method = match IdentityMethod::for_users(users) {
        IdentityMethod::EnumerateUsers => "enumerate",
        IdentityMethod::PerSlot => "per_slot",
    };
    let mut failed = None;
    for k in 1..=users {
        let c = union_count_identity(params, placement, k)?;
        if !c.holds() {
            failed = Some(format!("k={k} lhs={} rhs={}", c.lhs, c.rhs));
            break;
        }
    }
    checks.push(CheckLine {
        name: "union_identity",
        passed: failed.is_none(),
        detail: failed.unwrap_or_else(|| format!("k=1..{users} method={method}")),
    });

    let mut failed = None;
    for k in 1..=t {
        let c = intersection_count_identity(params, placement, k)?;
        if !c.holds() {
            failed = Some(format!("k={k} lhs={} rhs={}", c.lhs, c.rhs));
            break;
        }
    }
    checks.push(CheckLine {
        name: "intersection_identity",
        passed: failed.is_none(),
        detail: failed.unwrap_or_else(|| format!("k=1..{t} method={method}")),
    });

    let store = random_store(r)?;
    let mode = sweep_mode(opts, users, params.files(), r.seed);
    let sweep = sweep_demands(scheme, &store, mode)?;
    let optimum = optimal_rate(params);
    let divisible = divisibility_check(params);
    let at_optimum = sweep.worst_rate == optimum;
    let f = params.subpacketization();

    checks.push(CheckLine {
        name: "divisibility",
        // Reaching R* forces C(K,t) | F; the optimal scheme must always reach it.
        passed: match r.instance.kind() {
            SchemeKind::Mn => divisible,
            SchemeKind::Grouping => !at_optimum || divisible,
        },
        detail: format!(
            "F={f} C(K,t)={} divisible={divisible}",
            binomial(users as u64, t as u64)
        ),
    });

    let decoded = sweep.rows.iter().filter(|row| row.decoded).count();
    let sweep_kind = match mode {
        DemandMode::Exhaustive { .. } => "exhaustive",
        DemandMode::Random { .. } => "random",
    };
    checks.push(CheckLine {
        name: "decode",
        passed: sweep.all_decoded(),
        detail: format!("{decoded}/{} demands ({sweep_kind})", sweep.rows.len()),
    });

    let gap = sweep.worst_rate.clone() - optimum.clone();
    let rate_ok = match r.instance.kind() {
        SchemeKind::Mn => at_optimum,
        SchemeKind::Grouping => sweep.worst_rate >= optimum,
    };
    checks.push(CheckLine {
        name: "rate_vs_optimum",
        passed: rate_ok,
        detail: format!(
            "worst={} at demand {} optimum={optimum} gap={gap}",
            sweep.worst_rate, sweep.worst_demand
        ),
    });

    if let Instance::Grouping(g) = &r.instance {
        let l = g.layout();
        let expected = l.rate();
        checks.push(CheckLine {
            name: "rate_formula",
            passed: sweep.rows.iter().all(|row| row.rate == expected),
            detail: format!("C(n,a+b)/C(n,b)={expected}"),
        });
        let cmp = grouping_rate_vs_optimal(l.ground, l.user_label, l.slot_label)?;
        checks.push(CheckLine {
            name: "ratio_paths",
            passed: cmp.paths_agree() && cmp.meets_optimum() && cmp.optimum_lower_bound_holds(),
            detail: format!("R/R0={} R*(N=K)={}", cmp.ratio_direct, cmp.optimal_rate),
        });
        checks.push(CheckLine {
            name: "label_inequality",
            passed: verify_lower1(l.ground, l.user_label, l.slot_label)?,
            detail: "C(a+b,a) + C(n-b,a) <= C(n,a) + 1".into(),
        });
    }
    Ok(checks)
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let r = resolve(args.scheme.resolve()?, args.scheme.memory)?;
    let checks = verify_checks(&r, &args.sweep)?;
    let text = match args.format {
        Format::Csv => render::check_csv(&checks),
        Format::Human => render::check_report(&r.instance, &checks),
        Format::Transcript => return Err(CliError::usage("verify has no transcript format")),
    };
    emit(out, args.out.as_deref(), &text)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("failed checks: {}", failed.join(","))))
    }
}

fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let r = resolve(args.scheme.resolve()?, args.scheme.memory)?;
    let store = random_store(&r)?;
    let mode = sweep_mode(&args.sweep, r.instance.users(), r.instance.files(), r.seed);
    let report = sweep_demands(r.instance.scheme(), &store, mode)?;
    let text = match args.format {
        Format::Csv => render::sweep_csv(&report),
        Format::Human => render::sweep_human(&r.instance, &report),
        Format::Transcript => return Err(CliError::usage("sweep has no transcript format")),
    };
    emit(out, args.out.as_deref(), &text)?;
    if report.all_decoded() {
        Ok(())
    } else {
        Err(CliError::Check("some demands failed to decode".into()))
    }
}

fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.epsilon.is_nan() || args.epsilon <= 0.0 {
        return Err(CliError::usage(format!(
            "epsilon must be positive, got {}",
            args.epsilon
        )));
    }
    let ns = match (&args.n_values, &args.range) {
        (Some(list), None) => parse_n_list(list)?,
        (None, Some(range)) => parse_n_range(range)?,
        _ => return Err(CliError::usage("analyze needs --n or --n-range")),
    };
    let rows = trend_rows(args.epsilon, &ns)?;
    let mut text = String::from(render::ANALYSIS_HEADER);
    text.push('\n');
    for row in &rows {
        text.push_str(&render::analysis_row(row));
        text.push('\n');
    }
    for &n in &ns {
        if !params_from_epsilon(args.epsilon, n)?.is_feasible() {
            text.push_str(&format!("# skipped n={n}: b = n - a - c < 0\n"));
        }
    }
    let verdicts = trend_verdicts(args.epsilon, &rows);
    match &verdicts {
        Ok(v) => text.push_str(&render::verdict_lines(v)),
        Err(e) => text.push_str(&format!("# verdicts withheld: {e}\n")),
    }
    emit(out, args.out.as_deref(), &text)?;
    match verdicts {
        Ok(v) if v.all_pass() => Ok(()),
        Ok(_) => Err(CliError::Check("trend verdicts failed".into())),
        Err(e) => Err(e.into()),
    }
}

fn pack(args: &PackArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let data = args
        .inputs
        .iter()
        .map(|p| read_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    let store = FileStore::pack(&data, args.subpacketization)?;
    let names: Vec<String> = args
        .inputs
        .iter()
        .map(|p| {
            p.file_name()
                .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
        })
        .collect();
    emit(out, args.out.as_deref(), &render::pack_listing(&names, &store))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Failures print one `error code=.. reason=..` line
/// to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let reason = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "error code=usage reason={reason}");
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Pack(a) => pack(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.exit_status()
        }
    }
}
