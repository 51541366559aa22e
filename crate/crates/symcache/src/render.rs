//! Text formats: transcripts, result records, sweep tables, the analysis CSV
//! and pack listings. Everything here is a pure function of its input so
//! identical runs give identical bytes.

use std::fmt::Write as _;

use symcache_core::analysis::{AnalysisRow, TrendVerdicts};
use symcache_core::model::DemandVector;
use symcache_core::simulator::{
    FileStore, SimulationResult, SweepReport, Transmission, TransmissionLabel, UserOutcome,
};

use crate::instance::Instance;

/// Header line plus one `Y ...` line per transmission, newline terminated.
pub fn transcript(instance: &Instance, demand: &DemandVector, log: &[Transmission]) -> String {
    let mut out = instance.transcript_header(demand);
    out.push('\n');
    for tx in log {
        match &tx.label {
            TransmissionLabel::Replica { replica, users } => {
                let _ = write!(out, "Y j={replica} A={users}");
            }
            TransmissionLabel::Elements(c) => {
                let _ = write!(out, "Y C={c}");
            }
        }
        let _ = writeln!(out, " payload={}", hex::encode(&tx.payload));
    }
    out
}

/// `result scheme=mn K=3 N=3 t=1 h=1 demand=0,1,2 sent=3 F=3 rate=1 decoded=3/3 verified=true`
pub fn result_record(instance: &Instance, result: &SimulationResult) -> String {
    format!(
        "result scheme={} {} demand={} sent={} F={} rate={} decoded={}/{} verified={}",
        instance.kind().as_str(),
        instance.describe(),
        result.demand,
        result.transmissions_sent,
        result.subpacketization,
        result.rate_measured,
        result.decoded_count(),
        result.outcomes.len(),
        result.all_decoded()
    )
}

fn outcome_text(outcome: &UserOutcome) -> String {
    match outcome {
        UserOutcome::Decoded => "decoded".into(),
        UserOutcome::Mismatch { slot } => format!("mismatch at slot {slot}"),
        UserOutcome::Failed(e) => format!("failed: {e}"),
    }
}

pub fn result_summary(instance: &Instance, result: &SimulationResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scheme {} ({})", instance.kind().as_str(), instance.describe());
    let _ = writeln!(out, "demand {}", result.demand);
    let _ = writeln!(
        out,
        "{} transmissions over F={} subfiles, rate {}",
        result.transmissions_sent, result.subpacketization, result.rate_measured
    );
    let _ = writeln!(
        out,
        "{}/{} users decoded{}",
        result.decoded_count(),
        result.outcomes.len(),
        if result.all_decoded() { ", bytes verified" } else { "" }
    );
    for (user, o) in result.outcomes.iter().enumerate() {
        if *o != UserOutcome::Decoded {
            let _ = writeln!(out, "  user {}: {}", user + 1, outcome_text(o));
        }
    }
    out.push_str(&result_record(instance, result));
    out.push('\n');
    out
}

pub fn result_csv(instance: &Instance, result: &SimulationResult) -> String {
    format!(
        "scheme,params,demand,sent,F,rate,decoded,users,verified\n{},{},\"{}\",{},{},{},{},{},{}\n",
        instance.kind().as_str(),
        instance.describe(),
        result.demand,
        result.transmissions_sent,
        result.subpacketization,
        result.rate_measured,
        result.decoded_count(),
        result.outcomes.len(),
        result.all_decoded()
    )
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from("demand,sent,rate,decoded\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "\"{}\",{},{},{}",
            row.demand, row.transmissions_sent, row.rate, row.decoded
        );
    }
    let _ = writeln!(
        out,
        "# worst_rate={} worst_demand={}",
        report.worst_rate, report.worst_demand
    );
    out
}

pub fn sweep_human(instance: &Instance, report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scheme {} ({})", instance.kind().as_str(), instance.describe());
    let decoded = report.rows.iter().filter(|r| r.decoded).count();
    let _ = writeln!(out, "{} demands swept, {decoded} fully decoded", report.rows.len());
    let _ = writeln!(
        out,
        "worst rate {} at demand {}",
        report.worst_rate, report.worst_demand
    );
    for row in report.rows.iter().filter(|r| !r.decoded) {
        let _ = writeln!(out, "  decode failure at demand {}", row.demand);
    }
    out
}

pub const ANALYSIS_HEADER: &str = "n,a,b,c,log_K,log_F,log_Fstar,ratio,claim2_exp,claim3_stat,degenerate";

pub fn analysis_row(row: &AnalysisRow) -> String {
    let p = &row.params;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        p.ground,
        p.user_label,
        p.slot_label,
        p.exponent,
        row.log_users,
        row.log_subpacketization,
        row.log_optimal_subpacketization,
        row.ratio,
        row.claim2_exponent,
        row.claim3_statistic,
        row.degenerate
    )
}

fn verdict(ok: bool) -> &'static str {
    if ok { "pass" } else { "fail" }
}

pub fn verdict_lines(v: &TrendVerdicts) -> String {
    format!(
        "# ratio_non_increasing={}\n# claim2_exponent_bounded={}\n# claim2_gap_negative={}\n# claim3_increasing={}\n# verdict={}\n",
        verdict(v.ratio_non_increasing),
        verdict(v.claim2_exponent_bounded),
        verdict(v.claim2_gap_negative),
        verdict(v.claim3_increasing),
        verdict(v.all_pass())
    )
}

/// `pack files=2 F=3 L=3`, one `file` line per input, then every block.
pub fn pack_listing(names: &[String], store: &FileStore) -> String {
    let mut out = format!(
        "pack files={} F={} L={}\n",
        store.file_count(),
        store.subpacketization(),
        store.block_len()
    );
    for (i, name) in names.iter().enumerate() {
        let _ = writeln!(out, "file {i} len={} name={name}", store.original_len(i));
    }
    for i in 0..store.file_count() {
        for slot in 0..store.subpacketization() {
            let _ = writeln!(
                out,
                "block file={i} slot={slot} payload={}",
                hex::encode(store.block(i, slot))
            );
        }
    }
    out
}

/// One verification check: `<name> pass|fail <detail>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn check_report(instance: &Instance, checks: &[CheckLine]) -> String {
    let mut out = format!("verify scheme={} {}\n", instance.kind().as_str(), instance.describe());
    for c in checks {
        let _ = writeln!(out, "{} {} {}", c.name, verdict(c.passed), c.detail);
    }
    let _ = writeln!(out, "verdict {}", verdict(checks.iter().all(|c| c.passed)));
    out
}

pub fn check_csv(checks: &[CheckLine]) -> String {
    let mut out = String::from("check,status,detail\n");
    for c in checks {
        let _ = writeln!(out, "{},{},\"{}\"", c.name, verdict(c.passed), c.detail);
    }
    out
}
