//! Experiment configuration: a flat `key = value` file plus overrides.
//!
//! Blank lines and `#` comments are ignored. Later assignments win, so CLI
//! flags are applied with [`ExperimentConfig::set`] after the file is read.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::auction::BidGrid;
use crate::error::{Error, Result};
use crate::gsp::GspConfig;
use crate::policy::{DspProbeIndex, PolicyKind, PolicySpec, Setting};

/// Default valuation for advertiser-side runs.
pub const DEFAULT_VALUE: f64 = 9.5;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ICREGRET_OUT_DIR";

/// Which market the test bidder joins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketKind {
    Gsp,
    SecondPrice,
}

impl fmt::Display for MarketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gsp => "gsp",
            Self::SecondPrice => "second_price",
        })
    }
}

/// Policy family named in the config; epsilon is kept separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyName {
    KnownValue,
    Dsp,
    Switching,
    RandomBids,
    EpsilonGreedy,
}

impl PolicyName {
    pub const ALL: [PolicyName; 5] =
        [Self::KnownValue, Self::Dsp, Self::Switching, Self::RandomBids, Self::EpsilonGreedy];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::KnownValue => "regret-ucb-known-v",
            Self::Dsp => "regret-ucb-dsp",
            Self::Switching => "regret-ucb-switching",
            Self::RandomBids => "random-bids",
            Self::EpsilonGreedy => "epsilon-greedy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|p| p.as_str()).collect();
                Error::InvalidConfig(format!("unknown policy '{s}'; expected one of {}", names.join(", ")))
            })
    }

    /// Needs a known valuation (`Some(true)`), must not have one
    /// (`Some(false)`), or works either way.
    pub fn needs_value(&self) -> Option<bool> {
        match self {
            Self::KnownValue => Some(true),
            Self::Dsp | Self::Switching => Some(false),
            Self::RandomBids | Self::EpsilonGreedy => None,
        }
    }

    pub fn kind(&self, epsilon: f64) -> PolicyKind {
        match self {
            Self::KnownValue => PolicyKind::RegretUcbKnownValue,
            Self::Dsp => PolicyKind::RegretUcbDsp,
            Self::Switching => PolicyKind::RegretUcbSwitching,
            Self::RandomBids => PolicyKind::RandomBids,
            Self::EpsilonGreedy => PolicyKind::EpsilonGreedy(epsilon),
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub market: MarketKind,
    /// Competitor and CTR model; its `seed` is overwritten per repetition.
    pub gsp: GspConfig,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub policies: Vec<PolicyName>,
    pub epsilon: f64,
    /// Known valuation. `None` selects the unknown-value problem unless a
    /// known-value policy is requested, in which case [`DEFAULT_VALUE`] is used.
    pub value: Option<f64>,
    pub m: usize,
    pub n: usize,
    pub horizon: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub oracle_samples: usize,
    pub oracle_seed: u64,
    pub dsp_probe_index: DspProbeIndex,
    pub update_anchor: bool,
    pub out_dir: PathBuf,
    /// File stem of the results CSV.
    pub name: String,
    /// Record wall-clock milliseconds; off keeps CSVs byte-identical.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| "results".into());
        Self {
            market: MarketKind::Gsp,
            gsp: GspConfig::default(),
            grid_min: 0.01,
            grid_max: 10.0,
            grid_step: 0.01,
            policies: vec![PolicyName::KnownValue],
            epsilon: 0.1,
            value: None,
            m: 15,
            n: 1024,
            horizon: 2000,
            reps: 10,
            base_seed: 0,
            oracle_samples: 1_000_000,
            oracle_seed: 0x5eed,
            dsp_probe_index: DspProbeIndex::Regret,
            update_anchor: false,
            out_dir,
            name: "run".into(),
            timing: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("{key}: expected true or false, got '{value}'"))),
    }
}

impl ExperimentConfig {
    /// Applies one assignment. `v = none` clears the valuation.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "environment" => {
                self.market = match value {
                    "gsp" => MarketKind::Gsp,
                    "second_price" | "second-price" => MarketKind::SecondPrice,
                    _ => return Err(Error::InvalidConfig(format!("environment: expected gsp or second_price, got '{value}'"))),
                }
            }
            "slots" => self.gsp.num_slots = parse_num(key, value)?,
            "competitors" => self.gsp.num_competitors = parse_num(key, value)?,
            "competitor_low" => self.gsp.competitor_low = parse_num(key, value)?,
            "competitor_high" => self.gsp.competitor_high = parse_num(key, value)?,
            "ctr_alpha" => self.gsp.ctr_alpha = parse_num(key, value)?,
            "ctr_beta" => self.gsp.ctr_beta = parse_num(key, value)?,
            "grid_min" => self.grid_min = parse_num(key, value)?,
            "grid_max" => self.grid_max = parse_num(key, value)?,
            "grid_step" => self.grid_step = parse_num(key, value)?,
            "policy" => {
                self.policies = value
                    .split(',')
                    .map(|p| PolicyName::parse(p.trim()))
                    .collect::<Result<_>>()?
            }
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "v" => {
                self.value = match value {
                    "none" | "" => None,
                    _ => Some(parse_num(key, value)?),
                }
            }
            "m" => self.m = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "T" => self.horizon = parse_num(key, value)?,
            "reps" => self.reps = parse_num(key, value)?,
            "seed" => self.base_seed = parse_num(key, value)?,
            "oracle_samples" => self.oracle_samples = parse_num(key, value)?,
            "oracle_seed" => self.oracle_seed = parse_num(key, value)?,
            "dsp_probe_index" => {
                self.dsp_probe_index = match value {
                    "regret" => DspProbeIndex::Regret,
                    "utility" => DspProbeIndex::Utility,
                    _ => return Err(Error::InvalidConfig(format!("dsp_probe_index: expected regret or utility, got '{value}'"))),
                }
            }
            "update_anchor" => self.update_anchor = parse_bool(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "name" => self.name = value.to_string(),
            "timing" => self.timing = parse_bool(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every assignment of a `key = value` document on top of `self`.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected 'key = value', got '{raw}'", lineno + 1))
            })?;
            self.set(key.trim(), value)
                .map_err(|e| Error::InvalidConfig(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }

    /// Serializes back to the file format; `from_kv_str` round-trips it.
    pub fn to_kv_string(&self) -> String {
        let policies: Vec<&str> = self.policies.iter().map(|p| p.as_str()).collect();
        let probe = match self.dsp_probe_index {
            DspProbeIndex::Regret => "regret",
            DspProbeIndex::Utility => "utility",
        };
        let g = &self.gsp;
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("environment", self.market.to_string());
        put("slots", g.num_slots.to_string());
        put("competitors", g.num_competitors.to_string());
        put("competitor_low", g.competitor_low.to_string());
        put("competitor_high", g.competitor_high.to_string());
        put("ctr_alpha", g.ctr_alpha.to_string());
        put("ctr_beta", g.ctr_beta.to_string());
        put("grid_min", self.grid_min.to_string());
        put("grid_max", self.grid_max.to_string());
        put("grid_step", self.grid_step.to_string());
        put("policy", policies.join(","));
        put("epsilon", self.epsilon.to_string());
        put("v", self.value.map_or("none".into(), |v| v.to_string()));
        put("m", self.m.to_string());
        put("n", self.n.to_string());
        put("T", self.horizon.to_string());
        put("reps", self.reps.to_string());
        put("seed", self.base_seed.to_string());
        put("oracle_samples", self.oracle_samples.to_string());
        put("oracle_seed", self.oracle_seed.to_string());
        put("dsp_probe_index", probe.into());
        put("update_anchor", self.update_anchor.to_string());
        put("out", self.out_dir.display().to_string());
        put("name", self.name.clone());
        put("timing", self.timing.to_string());
        out
    }

    pub fn grid(&self) -> Result<BidGrid> {
        BidGrid::uniform(self.grid_min, self.grid_max, self.grid_step)
    }

    /// Valuation after defaulting: [`DEFAULT_VALUE`] when a known-value
    /// policy runs without one.
    pub fn effective_value(&self) -> Option<f64> {
        let wants = self.policies.iter().any(|p| p.needs_value() == Some(true));
        self.value.or(if wants { Some(DEFAULT_VALUE) } else { None })
    }

    /// Grid setting shared by all policies of this config.
    pub fn setting(&self, grid: &BidGrid) -> Result<Setting> {
        match self.effective_value() {
            Some(v) => Ok(Setting::Advertiser(grid.index_of(v).map_err(|_| {
                Error::InvalidConfig(format!("v = {v} is not a grid level (grid {}..{} step {})", self.grid_min, self.grid_max, self.grid_step))
            })?)),
            None => Ok(Setting::Dsp),
        }
    }

    /// Learner configurations, one per listed policy.
    pub fn policy_specs(&self, grid: &BidGrid) -> Result<Vec<PolicySpec>> {
        let setting = self.setting(grid)?;
        self.policies
            .iter()
            .map(|p| {
                let mut spec = PolicySpec::new(p.kind(self.epsilon), setting)?;
                spec.dsp_probe_index = self.dsp_probe_index;
                spec.update_anchor = self.update_anchor;
                Ok(spec)
            })
            .collect()
    }

    /// Checks every invariant and reports the first violation in words.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        self.gsp.validate()?;
        let grid = self.grid()?;
        if self.policies.is_empty() {
            return bad("policy: at least one policy is required".into());
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].contains(p) {
                return bad(format!("policy: '{}' is listed twice", p.as_str()));
            }
        }
        let has_value = self.effective_value().is_some();
        for p in &self.policies {
            if p.needs_value() == Some(!has_value) {
                return bad(if has_value {
                    format!("policy '{}' audits unknown valuations; remove v (or set v = none)", p.as_str())
                } else {
                    format!("policy '{}' needs a known valuation v", p.as_str())
                });
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon = {} must lie in [0, 1]", self.epsilon));
        }
        if self.m == 0 || self.m >= grid.len() {
            return bad(format!("m = {} must satisfy 1 <= m < |B| = {}", self.m, grid.len()));
        }
        if self.n == 0 || self.n % (self.m + 1) != 0 {
            return bad(format!(
                "n = {} must be a positive multiple of m + 1 = {} (e.g. n = {})",
                self.n,
                self.m + 1,
                (self.n / (self.m + 1)).max(1) * (self.m + 1)
            ));
        }
        if self.horizon == 0 {
            return bad("T must be at least 1".into());
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.oracle_samples == 0 {
            return bad("oracle_samples must be at least 1".into());
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name '{}' must be a plain file stem", self.name));
        }
        self.setting(&grid)?;
        Ok(())
    }

    /// Path of the results CSV.
    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}.csv", self.name))
    }
}
