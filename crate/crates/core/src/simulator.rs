//! Forward model of the multiplexed heralded-excitation experiment.
//!
//! A write pulse creates Poissonian excitation pairs in one collective mode
//! `a_e` of the ensemble array. A signal click heralds the spin-wave state;
//! dark heralds leave the memory empty. The idler read-out is described to
//! first order in the detection efficiency: a click probability is the mean
//! number of detected photons, which keeps every estimator identity exact.
//!
//! Counts are drawn binomially from the event probabilities, or in analytic
//! mode set to `round(p * ANALYTIC_TRIALS)` so that frequencies reproduce
//! the probabilities to double precision.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dataset::{required_configs, AodConfig, CountRecord, CountsDataset};
use crate::error::{Error, Result};
use crate::excitation::{
    inner_product, make_double_excitation, make_w_state, make_weighted_w, ModeWeights, C64,
};
use crate::inference::{PopulationEstimate, Populations};

/// Trials per record in analytic mode.
pub const ANALYTIC_TRIALS: u64 = 1_000_000_000_000_000_000;

/// Largest pair-excitation number still treated as weak pumping.
pub const MAX_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentModel {
    pub n_modes: usize,
    /// Mean pair number per write pulse.
    pub lambda: f64,
    /// Amplitudes of the excited collective mode on each ensemble.
    pub excite_weights: ModeWeights,
    /// Retrieval-to-click efficiency of each ensemble.
    pub eta: Vec<f64>,
    pub signal_efficiency: f64,
    pub signal_dark: f64,
    pub idler_dark: f64,
    /// Probability that a stored excitation decays before read-out.
    pub memory_loss: f64,
    /// Default trials per configuration.
    pub trials: u64,
}

impl ExperimentModel {
    /// Loss budget of the reference experiment: 16% signal chain, 4%
    /// retrieval-to-click efficiency per ensemble, a 5.8 us read-out delay
    /// against a 28 us Gaussian memory lifetime. The dark-herald rate is an
    /// order-of-magnitude choice.
    pub fn paper_like(n_modes: usize, lambda: f64) -> Result<Self> {
        let model = Self {
            n_modes,
            lambda,
            excite_weights: ModeWeights::uniform(n_modes)?,
            eta: vec![0.04; n_modes],
            signal_efficiency: 0.16,
            signal_dark: 5e-5,
            idler_dark: 0.0,
            memory_loss: 1.0 - (-(5.8f64 / 28.0).powi(2)).exp(),
            trials: 10_000_000,
        };
        model.validate()?;
        Ok(model)
    }

    /// Uniform excitation, no darks and no memory loss.
    pub fn ideal(n_modes: usize, lambda: f64, eta: f64) -> Result<Self> {
        let model = Self {
            n_modes,
            lambda,
            excite_weights: ModeWeights::uniform(n_modes)?,
            eta: vec![eta; n_modes],
            signal_efficiency: 0.16,
            signal_dark: 0.0,
            idler_dark: 0.0,
            memory_loss: 0.0,
            trials: 10_000_000,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_modes < 2 {
            return bad(format!("n_modes = {} must be at least 2", self.n_modes));
        }
        if self.excite_weights.n_modes() != self.n_modes || self.eta.len() != self.n_modes {
            return bad(format!(
                "{} excitation weights and {} efficiencies for {} modes",
                self.excite_weights.n_modes(),
                self.eta.len(),
                self.n_modes
            ));
        }
        if !(0.0..MAX_LAMBDA).contains(&self.lambda) {
            return bad(format!("lambda = {} outside [0, {MAX_LAMBDA})", self.lambda));
        }
        let probs = [
            ("signal_efficiency", self.signal_efficiency),
            ("signal_dark", self.signal_dark),
            ("idler_dark", self.idler_dark),
            ("memory_loss", self.memory_loss),
        ];
        for (name, v) in probs.into_iter().chain(self.eta.iter().map(|e| ("eta", *e))) {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.herald_probability() <= 0.0 {
            return bad("model never heralds: lambda * signal_efficiency and signal_dark are zero".into());
        }
        Ok(())
    }

    /// Probability that a write pulse creates a pair whose signal is detected.
    fn genuine_herald(&self) -> f64 {
        self.signal_efficiency * -(-self.lambda).exp_m1()
    }

    /// Signal click probability per trial, genuine or dark.
    pub fn herald_probability(&self) -> f64 {
        let g = self.genuine_herald();
        g + self.signal_dark - g * self.signal_dark
    }

    /// Transfer amplitudes of the equal-weight combined idler mode.
    pub fn combined_detection(&self) -> Vec<C64> {
        let n = self.n_modes as f64;
        self.eta.iter().map(|e| C64::new((e / n).sqrt(), 0.0)).collect()
    }

    /// Combined idler mode restricted to `modes`, each with equal weight.
    pub fn subset_detection(&self, modes: &[usize]) -> Result<Vec<C64>> {
        if modes.is_empty() || modes.iter().any(|m| *m >= self.n_modes) {
            return Err(Error::InvalidArgument(format!("invalid detection subset {modes:?}")));
        }
        let m = modes.len() as f64;
        let mut d = vec![C64::new(0.0, 0.0); self.n_modes];
        for &i in modes {
            d[i] = C64::new((self.eta[i] / m).sqrt(), 0.0);
        }
        Ok(d)
    }

    /// Transfer probability of one `a_e` excitation into detection mode `d`.
    fn transfer(&self, detection: &[C64]) -> f64 {
        let amps = self.excite_weights.amplitudes();
        detection.iter().zip(&amps).map(|(d, c)| d * c).sum::<C64>().norm_sqr()
    }

    /// Spin-wave model with weight and phase disorder drawn from `seed`:
    /// phases `phase_amp * u_i` (mean removed), weights `1 + weight_amp * v_i`
    /// with `u, v` uniform on `[-1, 1]`.
    pub fn with_disorder(&self, phase_amp: f64, weight_amp: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&weight_amp) || !(phase_amp >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "disorder amplitudes ({phase_amp}, {weight_amp}) out of range"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..self.n_modes).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let v: Vec<f64> = (0..self.n_modes).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        let phases = u.iter().map(|x| phase_amp * (x - mean)).collect();
        let raw: Vec<f64> = v.iter().map(|x| 1.0 + weight_amp * x).collect();
        let excite_weights = ModeWeights::from_unnormalized(&raw, phases)?;
        Ok(Self { excite_weights, ..self.clone() })
    }

    /// Scales a fixed disorder pattern until the ground-truth fidelity
    /// reaches `target`. Weight disorder is a third of the phase disorder.
    pub fn tuned_to_fidelity(&self, target: f64, seed: u64) -> Result<Self> {
        let fid = |s: f64| -> Result<f64> {
            Ok(ground_truth(&self.with_disorder(s, s / 3.0, seed)?).fidelity)
        };
        let (mut lo, mut hi) = (0.0, 2.0);
        if !(fid(lo)? >= target && fid(hi)? <= target) {
            return Err(Error::InvalidArgument(format!(
                "fidelity {target} not reachable by disorder (range {:.4}..{:.4})",
                fid(hi)?,
                fid(lo)?
            )));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fid(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.with_disorder(lo, lo / 3.0, seed)
    }
}

/// Exact conditional populations of the heralded spin-wave state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub fidelity: f64,
    /// Photonic populations an ideal estimator would report.
    pub p0p: f64,
    pub p1p: f64,
    pub p2p: f64,
    pub fidelity_p: f64,
    /// Herald-conditioned population above two excitations, dropped from
    /// the truncated state.
    pub higher_order_mass: f64,
    pub herald_probability: f64,
    /// Fraction of heralds caused by a real scattered photon.
    pub genuine_fraction: f64,
    /// `|<W_N|e>|^2` for the excited mode `e`.
    pub mode_overlap: f64,
}

impl GroundTruth {
    pub fn populations(&self) -> Populations {
        Populations { p0: self.p0, p1: self.p1, p2: self.p2, fidelity: self.fidelity }
    }

    pub fn estimate(&self) -> PopulationEstimate {
        PopulationEstimate {
            p0: self.p0,
            p1: self.p1,
            p2: self.p2,
            fidelity: self.fidelity,
            p0p: self.p0p,
            p1p: self.p1p,
            p2p: self.p2p,
            fidelity_p: self.fidelity_p,
            alpha3: if self.p1 > 0.0 { 2.0 * self.p2 / (self.p1 * self.p1) } else { 0.0 },
            lambda_poisson: 0.0,
            corrected: false,
        }
    }
}

pub fn ground_truth(model: &ExperimentModel) -> GroundTruth {
    let lambda = model.lambda;
    let herald = model.herald_probability();
    let r = if herald > 0.0 { model.genuine_herald() / herald } else { 0.0 };

    // zero-truncated Poisson restricted to one and two excitations
    let w1 = 1.0 / (1.0 + lambda / 2.0);
    let w2 = 1.0 - w1;
    let mass_le2 = if lambda > 0.0 {
        (lambda + lambda * lambda / 2.0) / lambda.exp_m1()
    } else {
        1.0
    };

    let mu = model.memory_loss;
    let s = 1.0 - mu;
    let p2 = r * w2 * s * s;
    let p1 = r * (w1 * s + 2.0 * w2 * s * mu);
    let p0 = 1.0 - p1 - p2;

    let w = make_w_state(model.n_modes, &vec![0.0; model.n_modes]).expect("n_modes validated");
    let e = make_weighted_w(&model.excite_weights);
    let mode_overlap = inner_product(&w, &e).expect("same mode count").norm_sqr();

    let alpha = if p1 > 0.0 { 2.0 * p2 / (p1 * p1) } else { 0.0 };
    let p1p = (p1 + 2.0 * p2) * model.eta.iter().zip(model.excite_weights.weights()).map(|(e, w)| e * w).sum::<f64>();
    let p2p = alpha * p1p * p1p / 2.0;

    GroundTruth {
        p0,
        p1,
        p2,
        fidelity: p1 * mode_overlap,
        p0p: 1.0 - p1p - p2p,
        p1p,
        p2p,
        fidelity_p: (p1 + 2.0 * p2) * model.transfer(&model.combined_detection()),
        higher_order_mass: r * (1.0 - mass_le2),
        herald_probability: herald,
        genuine_fraction: r,
        mode_overlap,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventProbabilities {
    /// Signal, idler and coincidence probabilities per trial.
    Calibrate { index: usize, p_s: f64, p_i: f64, p_si: f64 },
    /// Herald probability per trial and idler probability given a herald.
    Population { index: usize, herald: f64, q: f64 },
    Fidelity { herald: f64, q_f: f64 },
    /// Per-trial herald, herald-idler and triple coincidence probabilities.
    ThreePhoton { q1: f64, q12: f64, q13: f64, q123: f64 },
}

impl EventProbabilities {
    pub fn config(&self) -> AodConfig {
        match self {
            EventProbabilities::Calibrate { index, .. } => AodConfig::Calibrate(*index),
            EventProbabilities::Population { index, .. } => AodConfig::Population(*index),
            EventProbabilities::Fidelity { .. } => AodConfig::Fidelity,
            EventProbabilities::ThreePhoton { .. } => AodConfig::ThreePhoton,
        }
    }
}

pub fn event_probabilities(model: &ExperimentModel, config: AodConfig) -> Result<EventProbabilities> {
    model.validate()?;
    if let Some(i) = config.index() {
        if i >= model.n_modes {
            return Err(Error::InvalidArgument(format!("{config} on a {}-mode model", model.n_modes)));
        }
    }
    let truth = ground_truth(model);
    let herald = truth.herald_probability;
    let dark = model.idler_dark;
    Ok(match config {
        AodConfig::Calibrate(i) => calibration(model, i),
        AodConfig::Population(i) => {
            let rho1 = make_weighted_w(&model.excite_weights);
            let rho2 = make_double_excitation(&model.excite_weights);
            let single = rho1.amp1()[i].norm_sqr();
            let double_same = rho2.amp2(i, i).norm_sqr();
            let double_split: f64 = (0..model.n_modes)
                .filter(|j| *j != i)
                .map(|j| rho2.amp2(i.min(j), i.max(j)).norm_sqr())
                .sum();
            let eta = model.eta[i];
            let q = eta * truth.p1 * single
                + 2.0 * eta * truth.p2 * double_same
                + eta * truth.p2 * double_split
                + dark;
            EventProbabilities::Population { index: i, herald, q: q.min(1.0) }
        }
        AodConfig::Fidelity => {
            let tau = model.transfer(&model.combined_detection());
            let q_f = (truth.p1 + 2.0 * truth.p2) * tau + dark;
            EventProbabilities::Fidelity { herald, q_f: q_f.min(1.0) }
        }
        AodConfig::ThreePhoton => three_photon_probabilities(model, &model.combined_detection())?,
    })
}

fn calibration(model: &ExperimentModel, i: usize) -> EventProbabilities {
    let eta = model.eta[i];
    let p_s = model.herald_probability();
    // idlers not tied to the herald: darks and pairs whose signal was lost
    let background = model.idler_dark
        + eta * -(-model.lambda).exp_m1() * (1.0 - model.signal_efficiency);
    let p_i = (background + eta * p_s / (1.0 - p_s)).min(1.0);
    let p_si = (eta * p_s + p_s * p_i).min(p_s);
    EventProbabilities::Calibrate { index: i, p_s, p_i, p_si }
}

/// THREE_PHOTON probabilities when the combined idler mode has transfer
/// amplitudes `detection` from the ensembles. The mode is split 50/50 onto
/// two detectors.
pub fn three_photon_probabilities(model: &ExperimentModel, detection: &[C64]) -> Result<EventProbabilities> {
    if detection.len() != model.n_modes {
        return Err(Error::InvalidArgument(format!(
            "{} detection amplitudes for {} modes",
            detection.len(),
            model.n_modes
        )));
    }
    let truth = ground_truth(model);
    let tau = model.transfer(detection);
    if tau > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("detection transfer {tau} exceeds 1")));
    }
    let p1 = truth.p1 * tau;
    let p2 = truth.p2 * tau * tau;
    let d = model.idler_dark;
    let single = (p1 / 2.0 + d).min(1.0);
    let double = (p2 / 2.0 + d * p1 + d * d).min(single);
    let q1 = truth.herald_probability;
    Ok(EventProbabilities::ThreePhoton { q1, q12: q1 * single, q13: q1 * single, q123: q1 * double })
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("probability in (0, 1)").sample(rng)
}

/// Draws one category count per cell of a multinomial, in order.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, cells: &[f64]) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(cells.len());
    for &p in cells {
        let k = if mass > 0.0 { binomial(rng, left, (p / mass).clamp(0.0, 1.0)) } else { 0 };
        out.push(k);
        left -= k;
        mass -= p;
    }
    out
}

fn record(config: AodConfig, trials: u64, seed: u64, counts: &[(&str, u64)]) -> CountRecord {
    let counts: BTreeMap<String, u64> = counts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    CountRecord { config, trials, counts, seed }
}

/// Samples counts for one configuration. Joint events are drawn as joint
/// categories, so coincidences never exceed their marginals.
pub fn sample_counts(probs: &EventProbabilities, trials: u64, seed: u64) -> Result<CountRecord> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = probs.config();
    Ok(match *probs {
        EventProbabilities::Calibrate { p_s, p_i, p_si, .. } => {
            let c = multinomial(&mut rng, trials, &[p_si, p_s - p_si, p_i - p_si]);
            record(config, trials, seed, &[("S", c[0] + c[1]), ("I", c[0] + c[2]), ("SI", c[0])])
        }
        EventProbabilities::Population { herald, q, .. } | EventProbabilities::Fidelity { herald, q_f: q } => {
            let h = binomial(&mut rng, trials, herald);
            let hi = binomial(&mut rng, h, q);
            record(config, trials, seed, &[("H", h), ("HI", hi)])
        }
        EventProbabilities::ThreePhoton { q1, q12, q13, q123 } => {
            let h = binomial(&mut rng, trials, q1);
            let (both, b2, b3) = if q1 > 0.0 { (q123 / q1, q12 / q1, q13 / q1) } else { (0.0, 0.0, 0.0) };
            let c = multinomial(&mut rng, h, &[both, b2 - both, b3 - both]);
            record(
                config,
                trials,
                seed,
                &[("D1", h), ("D12", c[0] + c[1]), ("D13", c[0] + c[2]), ("D123", c[0])],
            )
        }
    })
}

/// Counts equal to probabilities times `trials`, rounded.
pub fn exact_counts(probs: &EventProbabilities, trials: u64) -> CountRecord {
    let t = trials as f64;
    let n = |p: f64| (p * t).round() as u64;
    let config = probs.config();
    match *probs {
        EventProbabilities::Calibrate { p_s, p_i, p_si, .. } => {
            record(config, trials, 0, &[("S", n(p_s)), ("I", n(p_i)), ("SI", n(p_si))])
        }
        EventProbabilities::Population { herald, q, .. } | EventProbabilities::Fidelity { herald, q_f: q } => {
            record(config, trials, 0, &[("H", n(herald)), ("HI", n(herald * q))])
        }
        EventProbabilities::ThreePhoton { q1, q12, q13, q123 } => record(
            config,
            trials,
            0,
            &[("D1", n(q1)), ("D12", n(q12)), ("D13", n(q13)), ("D123", n(q123))],
        ),
    }
}

/// Every configuration the estimators need, each with `trials` trials.
pub fn full_plan(n_modes: usize, trials: u64) -> Vec<(AodConfig, u64)> {
    required_configs(n_modes).into_iter().map(|c| (c, trials)).collect()
}

/// Seed of record `index` in a campaign seeded with `seed`.
pub fn sub_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

fn check_plan(model: &ExperimentModel, plan: &[(AodConfig, u64)], strict: bool) -> Result<()> {
    for (config, trials) in plan {
        if config.index().is_some_and(|i| i >= model.n_modes) {
            return Err(Error::InvalidPlan(format!("{config} on a {}-mode model", model.n_modes)));
        }
        if *trials == 0 {
            return Err(Error::InvalidPlan(format!("{config} has zero trials")));
        }
    }
    if strict {
        let missing: Vec<String> = required_configs(model.n_modes)
            .into_iter()
            .filter(|c| !plan.iter().any(|(p, _)| p == c))
            .map(|c| c.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::InvalidPlan(format!("plan lacks {}", missing.join(", "))));
        }
    }
    Ok(())
}

/// Runs every plan entry with its own sub-seed.
pub fn run_campaign(
    model: &ExperimentModel,
    plan: &[(AodConfig, u64)],
    seed: u64,
    strict: bool,
) -> Result<CountsDataset> {
    check_plan(model, plan, strict)?;
    let mut records = Vec::with_capacity(plan.len());
    for (i, (config, trials)) in plan.iter().enumerate() {
        let probs = event_probabilities(model, *config)?;
        records.push(sample_counts(&probs, *trials, sub_seed(seed, i))?);
    }
    Ok(CountsDataset { records })
}

/// Dataset whose frequencies equal the model probabilities.
pub fn analytic_dataset(model: &ExperimentModel) -> Result<CountsDataset> {
    let mut records = Vec::new();
    for config in required_configs(model.n_modes) {
        records.push(exact_counts(&event_probabilities(model, config)?, ANALYTIC_TRIALS));
    }
    Ok(CountsDataset { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{pipeline_from_frequencies, Frequencies};
    use approx::assert_abs_diff_eq;

    fn frequencies(model: &ExperimentModel) -> Frequencies {
        let n = model.n_modes;
        let mut calibration = Vec::new();
        let mut population = Vec::new();
        for i in 0..n {
            match event_probabilities(model, AodConfig::Calibrate(i)).unwrap() {
                EventProbabilities::Calibrate { p_s, p_i, p_si, .. } => calibration.push((p_s, p_i, p_si)),
                _ => unreachable!(),
            }
            match event_probabilities(model, AodConfig::Population(i)).unwrap() {
                EventProbabilities::Population { q, .. } => population.push(q),
                _ => unreachable!(),
            }
        }
        let q_f = match event_probabilities(model, AodConfig::Fidelity).unwrap() {
            EventProbabilities::Fidelity { q_f, .. } => q_f,
            _ => unreachable!(),
        };
        let three_photon = match event_probabilities(model, AodConfig::ThreePhoton).unwrap() {
            EventProbabilities::ThreePhoton { q1, q12, q13, q123 } => (q1, q12, q13, q123),
            _ => unreachable!(),
        };
        Frequencies { calibration, population, q_f, three_photon }
    }

    #[test]
    fn ideal_limit_is_w_state() {
        let t = ground_truth(&ExperimentModel::ideal(9, 1e-6, 0.04).unwrap());
        assert_abs_diff_eq!(t.p1, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(t.fidelity, 1.0, epsilon = 1e-6);
        assert!(t.p0.abs() < 1e-12 && t.p2 < 1e-6);
    }

    #[test]
    fn double_to_single_ratio() {
        let t = ground_truth(&ExperimentModel::ideal(9, 0.0311, 0.04).unwrap());
        assert_abs_diff_eq!(t.p2 / t.p1, 0.01555, epsilon = 1e-15);
        assert_abs_diff_eq!(t.p0 + t.p1 + t.p2, 1.0, epsilon = 1e-15);
        // Poisson tail beyond two excitations
        let l: f64 = 0.0311;
        let tail = 1.0 - (l + l * l / 2.0) / l.exp_m1();
        assert_abs_diff_eq!(t.higher_order_mass, tail, epsilon = 1e-15);
    }

    #[test]
    fn single_phase_error() {
        let delta: f64 = 0.7;
        let mut phases = vec![0.0; 9];
        phases[4] = delta;
        let mut m = ExperimentModel::ideal(9, 1e-9, 0.04).unwrap();
        m.excite_weights = ModeWeights::new(vec![1.0 / 9.0; 9], phases).unwrap();
        let t = ground_truth(&m);
        let expected = ((8.0 + delta.cos()).powi(2) + delta.sin().powi(2)) / 81.0;
        assert_abs_diff_eq!(t.fidelity, expected * t.p1, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_from_darks_and_loss() {
        let mut m = ExperimentModel::ideal(4, 0.02, 0.04).unwrap();
        m.signal_dark = 1e-3;
        let r = m.genuine_herald() / m.herald_probability();
        let t = ground_truth(&m);
        assert_abs_diff_eq!(t.genuine_fraction, r, epsilon = 1e-15);
        assert_abs_diff_eq!(t.p0, 1.0 - r, epsilon = 1e-12);
        m.memory_loss = 0.1;
        let t2 = ground_truth(&m);
        assert!(t2.p0 > t.p0 && t2.p1 < t.p1);
    }

    #[test]
    fn calibration_identity() {
        for m in [ExperimentModel::ideal(3, 0.02, 0.04).unwrap(), ExperimentModel::paper_like(9, 0.0589).unwrap()] {
            for i in 0..m.n_modes {
                let EventProbabilities::Calibrate { p_s, p_i, p_si, .. } =
                    event_probabilities(&m, AodConfig::Calibrate(i)).unwrap()
                else {
                    panic!()
                };
                assert_abs_diff_eq!(p_si - p_s * p_i, m.eta[i] * p_s, epsilon = 1e-18);
                assert_abs_diff_eq!(p_si / p_s - p_i, 0.04, epsilon = 1e-9);
                assert!(p_si <= p_s && p_si <= p_i);
            }
        }
    }

    #[test]
    fn calibration_valid_at_full_signal_efficiency() {
        let mut m = ExperimentModel::ideal(2, 0.3, 0.5).unwrap();
        m.signal_efficiency = 1.0;
        let EventProbabilities::Calibrate { p_s, p_i, p_si, .. } =
            event_probabilities(&m, AodConfig::Calibrate(0)).unwrap()
        else {
            panic!()
        };
        assert!(p_i - p_si >= 0.0 && 1.0 - p_s - p_i + p_si >= 0.0);
    }

    #[test]
    fn population_uniform_low_lambda() {
        let m = ExperimentModel::ideal(9, 1e-9, 0.04).unwrap();
        for i in 0..9 {
            let EventProbabilities::Population { q, .. } =
                event_probabilities(&m, AodConfig::Population(i)).unwrap()
            else {
                panic!()
            };
            assert_abs_diff_eq!(q, 0.04 / 9.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn uniform_eta_fidelity_click() {
        let m = ExperimentModel::ideal(5, 1e-3, 0.04).unwrap().with_disorder(0.4, 0.2, 3).unwrap();
        let t = ground_truth(&m);
        let EventProbabilities::Fidelity { q_f, .. } = event_probabilities(&m, AodConfig::Fidelity).unwrap() else {
            panic!()
        };
        // q_f = eta (p1 + 2 p2) |<W|e>|^2, which is eta F once p2 is divided out
        assert_abs_diff_eq!(q_f * t.p1 / (t.p1 + 2.0 * t.p2), 0.04 * t.fidelity, epsilon = 1e-15);
        assert!(ExperimentModel::ideal(5, 0.0, 0.04).is_err());
    }

    #[test]
    fn three_photon_ratio_and_basis_independence() {
        let m = ExperimentModel::paper_like(6, 0.0634).unwrap().with_disorder(0.5, 0.3, 9).unwrap();
        let t = ground_truth(&m);
        let alpha = |d: &[C64]| {
            let EventProbabilities::ThreePhoton { q1, q12, q13, q123 } = three_photon_probabilities(&m, d).unwrap() else {
                panic!()
            };
            q1 * q123 / (q12 * q13)
        };
        let reference = 2.0 * t.p2 / (t.p1 * t.p1);
        assert_abs_diff_eq!(alpha(&m.combined_detection()), reference, epsilon = 1e-9);
        assert_abs_diff_eq!(alpha(&m.subset_detection(&[0, 1, 2]).unwrap()), reference, epsilon = 1e-9);
        assert_abs_diff_eq!(alpha(&m.subset_detection(&[1, 4]).unwrap()), reference, epsilon = 1e-9);
        let skew: Vec<C64> = (0..6).map(|i| C64::from_polar(0.1 + 0.02 * i as f64, 0.3 * i as f64)).collect();
        assert_abs_diff_eq!(alpha(&skew), reference, epsilon = 1e-9);
    }

    #[test]
    fn analytic_pipeline_is_exact() {
        let m = ExperimentModel::paper_like(9, 0.0311).unwrap().with_disorder(0.3, 0.1, 1).unwrap();
        let mut m = m;
        m.eta = (0..9).map(|i| 0.03 + 0.002 * i as f64).collect();
        let t = ground_truth(&m);
        let out = pipeline_from_frequencies(&frequencies(&m)).unwrap();
        let e = out.estimate;
        assert_abs_diff_eq!(e.p1, t.p1, epsilon = 1e-12);
        assert_abs_diff_eq!(e.p2, t.p2, epsilon = 1e-12);
        assert_abs_diff_eq!(e.p0, t.p0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.s_sum, t.p1 + 2.0 * t.p2, epsilon = 1e-12);
        for (a, b) in out.calibration.eta.iter().zip(&m.eta) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(e.p1p, t.p1p, epsilon = 1e-15);
        assert_abs_diff_eq!(e.fidelity_p, t.fidelity_p, epsilon = 1e-15);
    }

    #[test]
    fn analytic_dataset_round_trip() {
        let m = ExperimentModel::paper_like(9, 0.0311).unwrap();
        let ds = analytic_dataset(&m).unwrap();
        assert_eq!(ds.records.len(), 20);
        let t = ground_truth(&m);
        let out = crate::inference::full_pipeline(&ds).unwrap();
        assert_abs_diff_eq!(out.estimate.p1, t.p1, epsilon = 1e-9);
        assert_abs_diff_eq!(out.estimate.p2, t.p2, epsilon = 1e-9);
        assert_abs_diff_eq!(out.estimate.fidelity, t.fidelity, epsilon = 1e-9);
    }

    #[test]
    fn sampling_edge_probabilities() {
        let zero = EventProbabilities::Fidelity { herald: 0.0, q_f: 0.5 };
        assert_eq!(sample_counts(&zero, 1000, 1).unwrap().counts["H"], 0);
        let one = EventProbabilities::Fidelity { herald: 1.0, q_f: 1.0 };
        let r = sample_counts(&one, 100, 1).unwrap();
        assert_eq!((r.counts["H"], r.counts["HI"]), (100, 100));
        assert!(sample_counts(&one, 0, 1).is_err());
    }

    #[test]
    fn sampling_binomial_band() {
        let p = EventProbabilities::Fidelity { herald: 0.04, q_f: 0.0 };
        let band = 5.0 * (0.04f64 * 1e6 * 0.96).sqrt();
        for seed in 0..20 {
            let h = sample_counts(&p, 1_000_000, seed).unwrap().counts["H"] as f64;
            assert!((h - 40_000.0).abs() <= band, "seed {seed}: {h}");
        }
    }

    #[test]
    fn sampled_coincidences_respect_marginals() {
        let m = ExperimentModel::paper_like(4, 0.0634).unwrap();
        let ds = run_campaign(&m, &full_plan(4, 200_000), 3, true).unwrap();
        for r in &ds.records {
            r.validate().unwrap();
            match r.config {
                AodConfig::Calibrate(_) => assert!(r.counts["SI"] <= r.counts["S"].min(r.counts["I"])),
                AodConfig::ThreePhoton => {
                    assert!(r.counts["D123"] <= r.counts["D12"].min(r.counts["D13"]));
                    assert!(r.counts["D12"] <= r.counts["D1"]);
                }
                _ => assert!(r.counts["HI"] <= r.counts["H"]),
            }
        }
    }

    #[test]
    fn campaign_is_deterministic() {
        let m = ExperimentModel::paper_like(9, 0.0311).unwrap();
        let plan = full_plan(9, 1_000_000);
        let a = run_campaign(&m, &plan, 7, true).unwrap();
        let b = run_campaign(&m, &plan, 7, true).unwrap();
        assert_eq!(a.records.len(), 20);
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        let c = run_campaign(&m, &plan, 8, true).unwrap();
        assert_ne!(a.to_jsonl(), c.to_jsonl());
        let seeds: std::collections::BTreeSet<u64> = a.records.iter().map(|r| r.seed).collect();
        assert_eq!(seeds.len(), 20);
    }

    #[test]
    fn strict_plan_needs_every_config() {
        let m = ExperimentModel::paper_like(3, 0.0311).unwrap();
        let mut plan = full_plan(3, 1000);
        plan.retain(|(c, _)| *c != AodConfig::Fidelity);
        assert!(matches!(run_campaign(&m, &plan, 1, true), Err(Error::InvalidPlan(_))));
        assert_eq!(run_campaign(&m, &plan, 1, false).unwrap().records.len(), 7);
        let bad = vec![(AodConfig::Population(3), 10)];
        assert!(matches!(run_campaign(&m, &bad, 1, false), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn tuning_hits_target() {
        let m = ExperimentModel::paper_like(9, 0.0311).unwrap().tuned_to_fidelity(0.92, 11).unwrap();
        assert_abs_diff_eq!(ground_truth(&m).fidelity, 0.92, epsilon = 1e-9);
        assert!(ExperimentModel::paper_like(9, 0.0311).unwrap().tuned_to_fidelity(0.999, 11).is_err());
    }

    #[test]
    fn model_validation() {
        let mut m = ExperimentModel::paper_like(4, 0.03).unwrap();
        m.lambda = 0.6;
        assert!(m.validate().is_err());
        let mut m = ExperimentModel::paper_like(4, 0.03).unwrap();
        m.eta[2] = 1.2;
        assert!(m.validate().is_err());
        let mut m = ExperimentModel::paper_like(4, 0.03).unwrap();
        m.eta.pop();
        assert!(m.validate().is_err());
    }
}
