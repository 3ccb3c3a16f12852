//! Raw count records, the interchange format between the simulator (or a
//! real-data importer) and the estimators.
//!
//! On disk a dataset is line-delimited JSON, one record per line:
//!
//! ```text
//! {"schema":"v1","config":"CALIBRATE","index":0,"trials":1000,"counts":{"I":3,"S":9,"SI":1},"seed":42}
//! ```
//!
//! `index` is the ensemble index for per-ensemble configurations and `-1`
//! otherwise.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "v1";

/// Coupling configuration of the write/signal/read/idler deflectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AodConfig {
    /// Individual write/signal and read/idler on ensemble `i`.
    Calibrate(usize),
    /// Collective herald, idler collected from ensemble `i` only.
    Population(usize),
    /// Collective herald, idler modes combined with equal weight.
    Fidelity,
    /// [`AodConfig::Fidelity`] with the combined idler split 50/50.
    ThreePhoton,
}

impl AodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AodConfig::Calibrate(_) => "CALIBRATE",
            AodConfig::Population(_) => "POPULATION",
            AodConfig::Fidelity => "FIDELITY",
            AodConfig::ThreePhoton => "THREE_PHOTON",
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            AodConfig::Calibrate(i) | AodConfig::Population(i) => Some(*i),
            _ => None,
        }
    }

    /// Event labels recorded for this configuration.
    pub fn labels(&self) -> &'static [&'static str] {
        match self {
            AodConfig::Calibrate(_) => &["S", "I", "SI"],
            AodConfig::Population(_) | AodConfig::Fidelity => &["H", "HI"],
            AodConfig::ThreePhoton => &["D1", "D12", "D13", "D123"],
        }
    }

    fn from_parts(name: &str, index: i64) -> Result<Self> {
        let idx = || {
            usize::try_from(index)
                .map_err(|_| Error::InvalidData(format!("{name} record needs an index >= 0")))
        };
        match name {
            "CALIBRATE" => Ok(AodConfig::Calibrate(idx()?)),
            "POPULATION" => Ok(AodConfig::Population(idx()?)),
            "FIDELITY" => Ok(AodConfig::Fidelity),
            "THREE_PHOTON" => Ok(AodConfig::ThreePhoton),
            other => Err(Error::InvalidData(format!("unknown configuration {other:?}"))),
        }
    }
}

impl fmt::Display for AodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index() {
            Some(i) => write!(f, "{}[{i}]", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub config: AodConfig,
    pub trials: u64,
    pub counts: BTreeMap<String, u64>,
    pub seed: u64,
}

impl CountRecord {
    pub fn count(&self, label: &str) -> Result<u64> {
        self.counts
            .get(label)
            .copied()
            .ok_or_else(|| Error::InvalidData(format!("{} record lacks label {label}", self.config)))
    }

    /// Checks labels and that no count exceeds the trial number.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidData(format!("{} record has zero trials", self.config)));
        }
        let expected = self.config.labels();
        for label in expected {
            self.count(label)?;
        }
        if let Some(extra) = self.counts.keys().find(|k| !expected.contains(&k.as_str())) {
            return Err(Error::InvalidData(format!(
                "{} record has unexpected label {extra}",
                self.config
            )));
        }
        if let Some((label, c)) = self.counts.iter().find(|(_, c)| **c > self.trials) {
            return Err(Error::InvalidData(format!(
                "{} record: count {label} = {c} exceeds trials {}",
                self.config, self.trials
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountsDataset {
    pub records: Vec<CountRecord>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    schema: String,
    config: String,
    index: i64,
    trials: u64,
    counts: BTreeMap<String, u64>,
    seed: u64,
}

impl CountsDataset {
    pub fn find(&self, config: AodConfig) -> Option<&CountRecord> {
        self.records.iter().find(|r| r.config == config)
    }

    /// Number of ensembles, taken as one past the largest per-ensemble index.
    pub fn n_modes(&self) -> usize {
        self.records
            .iter()
            .filter_map(|r| r.config.index())
            .map(|i| i + 1)
            .max()
            .unwrap_or(0)
    }

    /// Configurations an inference run over `n` ensembles needs but that are
    /// absent here.
    pub fn missing_configs(&self, n: usize) -> Vec<AodConfig> {
        required_configs(n).into_iter().filter(|c| self.find(*c).is_none()).collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let line = RecordLine {
                schema: SCHEMA_VERSION.to_string(),
                config: r.config.name().to_string(),
                index: r.config.index().map_or(-1, |i| i as i64),
                trials: r.trials,
                counts: r.counts.clone(),
                seed: r.seed,
            };
            out.push_str(&serde_json::to_string(&line).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: no + 1, message };
            let raw: RecordLine =
                serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
            if raw.schema != SCHEMA_VERSION {
                return Err(parse_err(format!("unsupported schema {:?}", raw.schema)));
            }
            let config = AodConfig::from_parts(&raw.config, raw.index)
                .map_err(|e| parse_err(e.to_string()))?;
            let record =
                CountRecord { config, trials: raw.trials, counts: raw.counts, seed: raw.seed };
            record.validate().map_err(|e| parse_err(e.to_string()))?;
            records.push(record);
        }
        Ok(Self { records })
    }
}

/// Every configuration the estimator chain consumes for `n` ensembles.
pub fn required_configs(n: usize) -> Vec<AodConfig> {
    let mut v: Vec<AodConfig> = (0..n).map(AodConfig::Calibrate).collect();
    v.extend((0..n).map(AodConfig::Population));
    v.push(AodConfig::Fidelity);
    v.push(AodConfig::ThreePhoton);
    v
}
