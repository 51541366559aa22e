use num_rational::Ratio;
use symcache_core::Error as CoreError;
use symcache_core::grouping::{GroupingScheme, grouping_placement};
use symcache_core::mn::{MnScheme, mn_placement};
use symcache_core::model::DemandVector;
use symcache_core::simulator::CachingScheme;

use crate::config::{SchemeConfig, SchemeKind};
use crate::error::CliError;

/// A constructed scheme ready to simulate.
#[derive(Debug)]
pub enum Instance {
    Mn(MnScheme),
    Grouping(GroupingScheme),
}

fn required(value: Option<usize>, flag: &str, scheme: &str) -> Result<usize, CliError> {
    value.ok_or_else(|| CliError::usage(format!("scheme {scheme} requires --{flag}")))
}

fn reject(value: Option<usize>, flag: &str, scheme: &str) -> Result<(), CliError> {
    match value {
        Some(_) => Err(CliError::usage(format!("--{flag} does not apply to scheme {scheme}"))),
        None => Ok(()),
    }
}

/// `t = K·M/N`, which must be a whole number.
fn multiplicity_from_memory(users: usize, files: usize, memory: Ratio<u64>) -> Result<usize, CliError> {
    let t = memory * Ratio::from_integer(users as u64) / Ratio::from_integer(files as u64);
    if !t.is_integer() {
        return Err(CoreError::Infeasible("t = K·M/N not integral".into()).into());
    }
    Ok(t.to_integer() as usize)
}

impl Instance {
    /// `memory` is the optional cache size `M` in files, an alternative to `t`.
    pub fn build(cfg: &SchemeConfig, memory: Option<Ratio<u64>>) -> Result<Self, CliError> {
        let kind = cfg
            .scheme
            .ok_or_else(|| CliError::usage("no scheme selected (use --scheme mn|grouping)"))?;
        let name = kind.as_str();
        match kind {
            SchemeKind::Mn => {
                reject(cfg.ground, "n", name)?;
                reject(cfg.user_label, "a", name)?;
                reject(cfg.slot_label, "b", name)?;
                let users = required(cfg.users, "K", name)?;
                let files = cfg.files.unwrap_or(users);
                if files == 0 {
                    return Err(CliError::usage("N must be positive"));
                }
                let t = match (cfg.multiplicity, memory) {
                    (Some(t), None) => t,
                    (None, Some(m)) => multiplicity_from_memory(users, files, m)?,
                    (Some(t), Some(m)) => {
                        if multiplicity_from_memory(users, files, m)? != t {
                            return Err(CliError::usage("--t and --M disagree"));
                        }
                        t
                    }
                    (None, None) => return Err(CliError::usage("scheme mn requires --t or --M")),
                };
                let h = cfg.replication.unwrap_or(1);
                Ok(Self::Mn(mn_placement(users, files, t, h)?))
            }
            SchemeKind::Grouping => {
                reject(cfg.users, "K", name)?;
                reject(cfg.multiplicity, "t", name)?;
                reject(cfg.replication, "h", name)?;
                if memory.is_some() {
                    return Err(CliError::usage(format!("--M does not apply to scheme {name}")));
                }
                let n = required(cfg.ground, "n", name)?;
                let a = required(cfg.user_label, "a", name)?;
                let b = required(cfg.slot_label, "b", name)?;
                if a + b > n {
                    return Err(CoreError::Infeasible(format!("a + b = {} exceeds n = {n}", a + b)).into());
                }
                let users = symcache_core::combinatorics::binomial_usize(n, a)
                    .ok_or_else(|| CliError::usage("K = C(n, a) too large"))?;
                let files = cfg.files.unwrap_or(users);
                if files == 0 {
                    return Err(CliError::usage("N must be positive"));
                }
                Ok(Self::Grouping(grouping_placement(n, a, b, files)?))
            }
        }
    }

    pub fn scheme(&self) -> &dyn CachingScheme {
        match self {
            Self::Mn(s) => s,
            Self::Grouping(s) => s,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            Self::Mn(_) => SchemeKind::Mn,
            Self::Grouping(_) => SchemeKind::Grouping,
        }
    }

    pub fn users(&self) -> usize {
        self.scheme().params().users()
    }

    pub fn files(&self) -> usize {
        self.scheme().params().files()
    }

    pub fn subpacketization(&self) -> usize {
        self.scheme().params().subpacketization()
    }

    /// `K=4 N=4 t=2 h=1` or `n=4 a=1 b=2 N=4`.
    pub fn describe(&self) -> String {
        match self {
            Self::Mn(s) => format!(
                "K={} N={} t={} h={}",
                s.params().users(),
                s.params().files(),
                s.multiplicity(),
                s.replication()
            ),
            Self::Grouping(s) => {
                let l = s.layout();
                format!(
                    "n={} a={} b={} N={}",
                    l.ground,
                    l.user_label,
                    l.slot_label,
                    s.params().files()
                )
            }
        }
    }

    pub fn transcript_header(&self, demand: &DemandVector) -> String {
        format!("scheme={} {} demand={demand}", self.kind().as_str(), self.describe())
    }
}
