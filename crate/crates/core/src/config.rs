//! Flat `key = value` files: run configurations, ground-truth sidecars,
//! inference reports and certificates all use this format.
//!
//! Blank lines and `#` comments are ignored. Keys are unique. Lists are
//! comma separated.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dataset::{AodConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::excitation::ModeWeights;
use crate::simulator::{full_plan, ExperimentModel};

/// Ordered key-value pairs with line numbers kept for diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse { line: no + 1, message: format!("expected `key = value`, got {line:?}") });
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse { line: no + 1, message: format!("invalid key {key:?}") });
            }
            if kv.get(key).is_some() {
                return Err(Error::Parse { line: no + 1, message: format!("duplicate key {key}") });
            }
            kv.entries.push((key.to_string(), value.trim().to_string(), no + 1));
        }
        Ok(kv)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.iter().find(|e| e.0 == key).map_or(0, |e| e.2)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.0.as_str())
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string(), 0));
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| Error::Parse {
                    line: self.line(key),
                    message: format!("{key} = {v:?}: {e}"),
                })
            })
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?.ok_or_else(|| Error::Parse { line: 0, message: format!("missing key {key}") })
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        v.split(',')
            .map(|x| {
                x.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: self.line(key),
                    message: format!("{key}: {x:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v, _) in &self.entries {
            writeln!(out, "{k} = {v}").expect("write to string");
        }
        out
    }
}

pub fn join_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMode {
    /// Binomially sampled counts.
    Sampled,
    /// Counts equal to probabilities times a very large trial number.
    Analytic,
}

/// Settings of the analysis commands. A full run configuration carries
/// them too, so one file can drive simulation and certification.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    pub seed: Option<u64>,
    /// Feasibility slack used when validating external witness parameters.
    pub slack: f64,
    pub samples: usize,
    pub reoptimize_per_resample: bool,
    /// Confidence a depth needs before it is certified.
    pub min_confidence: f64,
    pub out: Option<PathBuf>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            seed: None,
            slack: 1e-3,
            samples: crate::bootstrap::DEFAULT_SAMPLES,
            reoptimize_per_resample: false,
            min_confidence: 0.0,
            out: None,
        }
    }
}

impl AnalysisSettings {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(&KeyValues::parse(text)?)
    }

    /// Reads the analysis keys of a run configuration and ignores the model
    /// and plan keys.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        check_header(kv)?;
        let d = Self::default();
        Ok(Self {
            seed: kv.parsed("seed")?,
            slack: kv.parsed("slack")?.unwrap_or(d.slack),
            samples: kv.parsed("samples")?.unwrap_or(d.samples),
            reoptimize_per_resample: kv.parsed("reoptimize_per_resample")?.unwrap_or(false),
            min_confidence: kv.parsed("min_confidence")?.unwrap_or(d.min_confidence),
            out: kv.get("out").map(PathBuf::from),
        })
    }
}

/// Everything `wdepth simulate` needs, read from a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ExperimentModel,
    pub plan: Vec<(AodConfig, u64)>,
    pub mode: SimulationMode,
    pub analysis: AnalysisSettings,
}

const KNOWN_KEYS: &[&str] = &[
    "schema_version",
    "seed",
    "n_modes",
    "lambda",
    "eta",
    "signal_efficiency",
    "signal_dark",
    "idler_dark",
    "memory_loss",
    "excite_weights",
    "excite_phases",
    "target_fidelity",
    "disorder_seed",
    "phase_disorder",
    "weight_disorder",
    "mode",
    "trials",
    "trials_calibrate",
    "trials_population",
    "trials_fidelity",
    "trials_three_photon",
    "slack",
    "samples",
    "reoptimize_per_resample",
    "min_confidence",
    "out",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(&KeyValues::parse(text)?)
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let analysis = AnalysisSettings::from_kv(kv)?;
        let seed = analysis.seed.ok_or_else(|| Error::Parse { line: 0, message: "missing key seed".into() })?;
        let n: usize = kv.required("n_modes")?;
        let lambda: f64 = kv.required("lambda")?;

        let mut model = ExperimentModel::paper_like(n, lambda)?;
        if let Some(eta) = kv.list("eta")? {
            model.eta = match eta.len() {
                1 => vec![eta[0]; n],
                len if len == n => eta,
                len => return Err(Error::InvalidArgument(format!("{len} efficiencies for {n} modes"))),
            };
        }
        let scalar = |key: &str, default: f64| -> Result<f64> { Ok(kv.parsed(key)?.unwrap_or(default)) };
        model.signal_efficiency = scalar("signal_efficiency", model.signal_efficiency)?;
        model.signal_dark = scalar("signal_dark", model.signal_dark)?;
        model.idler_dark = scalar("idler_dark", model.idler_dark)?;
        model.memory_loss = scalar("memory_loss", model.memory_loss)?;

        let weights = kv.list("excite_weights")?;
        let phases = kv.list("excite_phases")?;
        if weights.is_some() || phases.is_some() {
            let w = weights.unwrap_or_else(|| vec![1.0; n]);
            let p = phases.unwrap_or_else(|| vec![0.0; n]);
            model.excite_weights = ModeWeights::from_unnormalized(&w, p)?;
        }
        model.validate()?;

        let disorder_seed: u64 = kv.parsed("disorder_seed")?.unwrap_or(0);
        let phase_disorder: Option<f64> = kv.parsed("phase_disorder")?;
        let weight_disorder: Option<f64> = kv.parsed("weight_disorder")?;
        let target: Option<f64> = kv.parsed("target_fidelity")?;
        let disorder_given = phase_disorder.is_some() || weight_disorder.is_some();
        let weights_given = kv.get("excite_weights").is_some() || kv.get("excite_phases").is_some();
        if [weights_given, disorder_given, target.is_some()].iter().filter(|b| **b).count() > 1 {
            return Err(Error::InvalidArgument(
                "give explicit excitation weights, disorder amplitudes or target_fidelity, not several".into(),
            ));
        }
        if let Some(f) = target {
            model = model.tuned_to_fidelity(f, disorder_seed)?;
        } else if disorder_given {
            model = model.with_disorder(
                phase_disorder.unwrap_or(0.0),
                weight_disorder.unwrap_or(0.0),
                disorder_seed,
            )?;
        }

        let trials: u64 = kv.parsed("trials")?.unwrap_or(model.trials);
        model.trials = trials;
        let mut plan = full_plan(n, trials);
        for (key, name) in [
            ("trials_calibrate", "CALIBRATE"),
            ("trials_population", "POPULATION"),
            ("trials_fidelity", "FIDELITY"),
            ("trials_three_photon", "THREE_PHOTON"),
        ] {
            if let Some(t) = kv.parsed::<u64>(key)? {
                for entry in plan.iter_mut().filter(|(c, _)| c.name() == name) {
                    entry.1 = t;
                }
            }
        }
        model.validate()?;

        let mode = match kv.get("mode").unwrap_or("sampled") {
            "sampled" => SimulationMode::Sampled,
            "analytic" => SimulationMode::Analytic,
            other => {
                return Err(Error::Parse {
                    line: kv.line("mode"),
                    message: format!("mode {other:?} is neither sampled nor analytic"),
                })
            }
        };

        Ok(Self { seed, model, plan, mode, analysis })
    }
}

fn check_header(kv: &KeyValues) -> Result<()> {
    if let Some(k) = kv.keys().find(|k| !KNOWN_KEYS.contains(k)) {
        return Err(Error::Parse { line: kv.line(k), message: format!("unknown key {k}") });
    }
    let schema: String = kv.required("schema_version")?;
    if schema != SCHEMA_VERSION {
        return Err(Error::Parse {
            line: kv.line("schema_version"),
            message: format!("schema_version {schema} unsupported, expected {SCHEMA_VERSION}"),
        });
    }
    Ok(())
}
