//! Large-`n` behaviour of the grouping scheme.
//!
//! For a target `ε > 0` the parameters are `c = ⌈1 + 1/ε⌉`,
//! `a = ⌈(ln n)^c⌉` and `b = n − a − c`. At these sizes `K`, `F` and `F*`
//! are astronomically large, so rows are evaluated in the log domain
//! (natural log throughout); the rate ratio is also kept exactly while the
//! integers involved stay manageable.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::combinatorics::{binomial, binomial_u64, ln_biguint, ln_factorial, log_binomial};
use crate::{Error, Rational};

/// Trend verdicts need at least this many non-degenerate rows.
pub const MIN_TREND_ROWS: usize = 4;

/// Relative slack for the monotonicity verdicts.
pub const TREND_SLACK: f64 = 1e-12;

/// `δ` in the floor `exp(−f²/g·(1+δ))` of the binomial approximation.
pub const SANDWICH_DELTA: f64 = 0.1;

/// The exact rate ratio is computed only while `a` stays below this.
pub const EXACT_RATIO_LABEL_LIMIT: u64 = 5_000;

/// `⌈(ln n)^p⌉`
pub fn ceil_ln_pow(n: u64, p: u32) -> u64 {
    libm::ceil(libm::pow(libm::log(n as f64), p as f64)) as u64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticParams {
    pub epsilon: f64,
    /// c
    pub exponent: u32,
    /// n
    pub ground: u64,
    /// a
    pub user_label: u64,
    /// b; negative when the row is infeasible.
    pub slot_label: i64,
}

impl AsymptoticParams {
    pub fn is_feasible(&self) -> bool {
        self.slot_label >= 0
    }
}

pub fn params_from_epsilon(epsilon: f64, n: u64) -> Result<AsymptoticParams, Error> {
    if epsilon.is_nan() || epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::Domain("epsilon must be a positive number"));
    }
    if n < 2 {
        return Err(Error::Domain("n must be at least 2"));
    }
    let exponent = libm::ceil(1.0 + 1.0 / epsilon);
    if exponent > 64.0 {
        return Err(Error::Domain("epsilon too small: c = ⌈1 + 1/ε⌉ exceeds 64"));
    }
    let exponent = exponent as u32;
    let user_label = ceil_ln_pow(n, exponent);
    let slot_label = n as i64 - user_label as i64 - exponent as i64;
    Ok(AsymptoticParams {
        epsilon,
        exponent,
        ground: n,
        user_label,
        slot_label,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRow {
    pub params: AsymptoticParams,
    /// ln K, K = C(n, a)
    pub log_users: f64,
    /// ln F, F = C(n, b)
    pub log_subpacketization: f64,
    /// ln F*, F* = C(K, C(n−b, a))
    pub log_optimal_subpacketization: f64,
    /// R/R0 = (C(n,a) − C(n−b,a) + 1) / C(a+b, a)
    pub ratio: f64,
    pub ratio_exact: Option<Rational>,
    /// ln F / ln K
    pub claim2_exponent: f64,
    /// ln F − ((n−b)/a)·ln K; negative when F < K^{(n−b)/a}.
    pub claim2_gap: f64,
    /// ln F* / (ln F)^c
    pub claim3_statistic: f64,
    /// Set when `2(n−b) >= n`: the large-`n` regime where `a <= n−b < n/2`
    /// has not been entered.
    pub degenerate: bool,
}

impl AnalysisRow {
    pub fn ground(&self) -> u64 {
        self.params.ground
    }
}

/// `ln C(K, m)` for a possibly huge `K` given exactly (and by its log),
/// with `m <= K` machine-sized.
///
/// Uses `m·ln K − ln m! + Σ_{i<m} ln(1 − i/K)`, which avoids the
/// cancellation of `lgamma(K+1) − lgamma(K−m+1)` when `K` is large.
fn log_binomial_huge(k: &num_bigint::BigUint, log_k: f64, m: u64) -> f64 {
    let exact_k = k.to_u64().filter(|&v| v < 1 << 53);
    if let Some(k64) = exact_k
        && (m <= 64 || m > 1 << 20)
    {
        return log_binomial(k64, m).unwrap_or(f64::NAN);
    }
    let head = m as f64 * log_k - ln_factorial(m);
    let inv_k = match exact_k {
        Some(v) => 1.0 / v as f64,
        None => libm::exp(-log_k),
    };
    let correction = if m <= 1 << 20 {
        (1..m).map(|i| libm::log1p(-(i as f64) * inv_k)).sum::<f64>()
    } else {
        // K exceeds 2^53 while m > 2^20: second-order expansion in m/K.
        let mf = m as f64;
        -(mf * (mf - 1.0) / 2.0) * inv_k - (mf - 1.0) * mf * (2.0 * mf - 1.0) / 12.0 * inv_k * inv_k
    };
    head + correction
}

/// Evaluates one parameter row.
pub fn evaluate_row(p: &AsymptoticParams) -> Result<AnalysisRow, Error> {
    if !p.is_feasible() {
        return Err(Error::infeasible("b = n − a − c is negative"));
    }
    let n = p.ground;
    let a = p.user_label;
    let b = p.slot_label as u64;
    let c = p.exponent as u64;
    let inner = binomial_u64(n - b, a).ok_or(Error::Overflow("inner binomial C(n−b, a)"))?;
    let log_users = log_binomial(n, a)?;
    let log_subpacketization = log_binomial(n, b)?;
    let users = binomial(n, a);
    let log_optimal_subpacketization = log_binomial_huge(&users, log_users, inner);

    let (ratio, ratio_exact) = if a <= EXACT_RATIO_LABEL_LIMIT {
        let num = BigInt::from(users) - BigInt::from(inner) + BigInt::from(1u8);
        let den = BigInt::from(binomial(a + b, a));
        let exact = Rational::new(num, den);
        let approx = exact.to_f64().unwrap_or_else(|| {
            libm::exp(ln_biguint(exact.numer().magnitude()) - ln_biguint(exact.denom().magnitude()))
        });
        (approx, Some(exact))
    } else {
        // The numerator is K up to a relative error of m/K.
        (libm::exp(log_users - log_binomial(a + b, a)?), None)
    };

    let claim2_exponent = log_subpacketization / log_users;
    let claim2_gap = log_subpacketization - ((n - b) as f64 / a as f64) * log_users;
    let claim3_statistic = log_optimal_subpacketization / libm::pow(log_subpacketization, c as f64);
    let degenerate = 2 * (n - b) >= n || inner == 0;
    Ok(AnalysisRow {
        params: *p,
        log_users,
        log_subpacketization,
        log_optimal_subpacketization,
        ratio,
        ratio_exact,
        claim2_exponent,
        claim2_gap,
        claim3_statistic,
        degenerate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrendVerdicts {
    /// R/R0 never increases over the tail and stays at or above 1.
    pub ratio_non_increasing: bool,
    /// ln F / ln K <= 1 + ε over the tail.
    pub claim2_exponent_bounded: bool,
    /// ln F − ((n−b)/a)·ln K < 0 at the largest n.
    pub claim2_gap_negative: bool,
    /// ln F* / (ln F)^c strictly increases over the tail.
    pub claim3_increasing: bool,
}

impl TrendVerdicts {
    pub fn all_pass(&self) -> bool {
        self.ratio_non_increasing && self.claim2_exponent_bounded && self.claim2_gap_negative && self.claim3_increasing
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendTable {
    pub rows: Vec<AnalysisRow>,
    pub verdicts: TrendVerdicts,
}

/// Rows for every feasible `n`, in input order; infeasible `n` are skipped.
pub fn trend_rows(epsilon: f64, n_values: &[u64]) -> Result<Vec<AnalysisRow>, Error> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("n values must be strictly increasing"));
    }
    let mut rows = Vec::new();
    for &n in n_values {
        let p = params_from_epsilon(epsilon, n)?;
        if p.is_feasible() {
            rows.push(evaluate_row(&p)?);
        }
    }
    Ok(rows)
}

/// Verdicts over the tail half of the non-degenerate rows.
pub fn trend_verdicts(epsilon: f64, rows: &[AnalysisRow]) -> Result<TrendVerdicts, Error> {
    let usable: Vec<&AnalysisRow> = rows.iter().filter(|r| !r.degenerate).collect();
    if usable.len() < MIN_TREND_ROWS {
        return Err(Error::InsufficientRange {
            feasible: usable.len(),
            needed: MIN_TREND_ROWS,
        });
    }
    let tail = &usable[usable.len() / 2..];
    let slack = |x: f64| TREND_SLACK * x.abs().max(1.0);
    let ratio_non_increasing = tail.windows(2).all(|w| w[1].ratio <= w[0].ratio + slack(w[0].ratio))
        && tail.iter().all(|r| r.ratio >= 1.0 - slack(1.0));
    let claim2_exponent_bounded = tail
        .iter()
        .all(|r| r.claim2_exponent <= 1.0 + epsilon + slack(1.0 + epsilon));
    let claim2_gap_negative = tail.last().is_some_and(|r| r.claim2_gap < 0.0);
    let claim3_increasing = tail
        .windows(2)
        .all(|w| w[1].claim3_statistic > w[0].claim3_statistic + slack(w[0].claim3_statistic));
    Ok(TrendVerdicts {
        ratio_non_increasing,
        claim2_exponent_bounded,
        claim2_gap_negative,
        claim3_increasing,
    })
}

pub fn trend_table(epsilon: f64, n_values: &[u64]) -> Result<TrendTable, Error> {
    let rows = trend_rows(epsilon, n_values)?;
    let verdicts = trend_verdicts(epsilon, &rows)?;
    Ok(TrendTable { rows, verdicts })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxRow {
    pub n: u64,
    pub f: u64,
    pub g: u64,
    /// C(g,f)·f!/g^f
    pub product: f64,
    /// (1 − f/g)^f
    pub lower_bound: f64,
    /// exp(−f²/g·(1+δ))
    pub sandwich_floor: f64,
}

impl ApproxRow {
    /// `(1 − f/g)^f − slack <= product <= 1`
    pub fn within_bound(&self, slack: f64) -> bool {
        self.product >= self.lower_bound - slack && self.product <= 1.0
    }

    pub fn within_sandwich(&self) -> bool {
        self.product > self.sandwich_floor && self.product <= 1.0
    }
}

/// Evaluates `C(g(n), f(n))·f(n)!/g(n)^{f(n)}` for each `n` as the product
/// `Π_{i<f} (1 − i/g)`, summed in the log domain.
pub fn approx_bin_check(
    f: impl Fn(u64) -> u64,
    g: impl Fn(u64) -> u64,
    n_values: impl IntoIterator<Item = u64>,
) -> Vec<ApproxRow> {
    n_values
        .into_iter()
        .map(|n| {
            let (fv, gv) = (f(n), g(n));
            let gf = gv as f64;
            let log_product: f64 = (0..fv).map(|i| libm::log1p(-(i as f64) / gf)).sum();
            let ratio = fv as f64 / gf;
            ApproxRow {
                n,
                f: fv,
                g: gv,
                product: libm::exp(log_product),
                lower_bound: libm::pow(1.0 - ratio, fv as f64),
                sandwich_floor: libm::exp(-(fv as f64) * ratio * (1.0 + SANDWICH_DELTA)),
            }
        })
        .collect()
}
