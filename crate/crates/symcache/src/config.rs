//! Scheme description files: UTF-8, one `key=value` per line.
//!
//! ```text
//! # optimal scheme, four users
//! scheme=mn
//! K=4
//! N=4
//! t=2
//! payload_bytes=128
//! seed=7
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::path::Path;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Mn,
    Grouping,
}

impl SchemeKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "mn" => Ok(Self::Mn),
            "grouping" => Ok(Self::Grouping),
            other => Err(CliError::usage(format!(
                "unknown scheme `{other}` (expected mn or grouping)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mn => "mn",
            Self::Grouping => "grouping",
        }
    }
}

/// Every field a scheme description may set. Unset fields are `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SchemeConfig {
    pub scheme: Option<SchemeKind>,
    pub users: Option<usize>,
    pub files: Option<usize>,
    pub multiplicity: Option<usize>,
    pub replication: Option<usize>,
    pub ground: Option<usize>,
    pub user_label: Option<usize>,
    pub slot_label: Option<usize>,
    pub payload_bytes: Option<usize>,
    pub seed: Option<u64>,
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("`{key}` expects a non-negative integer, got `{value}`")))
}

impl SchemeConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "scheme" => cfg.scheme = Some(SchemeKind::parse(value)?),
                "K" => cfg.users = Some(number(key, value)?),
                "N" => cfg.files = Some(number(key, value)?),
                "t" => cfg.multiplicity = Some(number(key, value)?),
                "h" => cfg.replication = Some(number(key, value)?),
                "n" => cfg.ground = Some(number(key, value)?),
                "a" => cfg.user_label = Some(number(key, value)?),
                "b" => cfg.slot_label = Some(number(key, value)?),
                "payload_bytes" => cfg.payload_bytes = Some(number(key, value)?),
                "seed" => cfg.seed = Some(number(key, value)?),
                other => {
                    return Err(CliError::usage(format!(
                        "config line {}: unknown key `{other}`",
                        lineno + 1
                    )));
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: SchemeConfig) -> SchemeConfig {
        SchemeConfig {
            scheme: other.scheme.or(self.scheme),
            users: other.users.or(self.users),
            files: other.files.or(self.files),
            multiplicity: other.multiplicity.or(self.multiplicity),
            replication: other.replication.or(self.replication),
            ground: other.ground.or(self.ground),
            user_label: other.user_label.or(self.user_label),
            slot_label: other.slot_label.or(self.slot_label),
            payload_bytes: other.payload_bytes.or(self.payload_bytes),
            seed: other.seed.or(self.seed),
        }
    }

    /// Renders back to the file format, unset keys omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push_str(&format!("{k}={v}\n"));
            }
        };
        put("scheme", self.scheme.map(|s| s.as_str().to_string()));
        put("K", self.users.map(|v| v.to_string()));
        put("N", self.files.map(|v| v.to_string()));
        put("t", self.multiplicity.map(|v| v.to_string()));
        put("h", self.replication.map(|v| v.to_string()));
        put("n", self.ground.map(|v| v.to_string()));
        put("a", self.user_label.map(|v| v.to_string()));
        put("b", self.slot_label.map(|v| v.to_string()));
        put("payload_bytes", self.payload_bytes.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        out
    }
}
