//! Monte Carlo error propagation: every count is redrawn from a Poisson
//! distribution with its observed value as mean, the estimator chain is
//! rerun, and the spread of the outputs gives confidence levels and 68%
//! intervals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::dataset::CountsDataset;
use crate::error::{Error, Result};
use crate::inference::{full_pipeline, PopulationEstimate, Populations};
use crate::simulator::sub_seed;
use crate::witness::{optimize_params, witness_value, WitnessParams};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const MIN_SAMPLES: usize = 100;
/// Largest tolerated fraction of resamples the pipeline rejects.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

/// Which population set a witness is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Efficiency-corrected spin-wave populations.
    SpinWave,
    /// Directly detected idler populations.
    Photonic,
}

impl Basis {
    pub fn select(&self, est: &PopulationEstimate) -> Populations {
        match self {
            Basis::SpinWave => est.spin_wave(),
            Basis::Photonic => est.photonic(),
        }
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: u64) -> u64 {
    if mean == 0 {
        return 0;
    }
    Poisson::new(mean as f64).expect("positive mean").sample(rng) as u64
}

/// Redraws every count as `Poisson(count)`; trials are kept.
pub fn resample(dataset: &CountsDataset, seed: u64) -> CountsDataset {
    let mut out = dataset.clone();
    for (i, record) in out.records.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i));
        for count in record.counts.values_mut() {
            *count = poisson(&mut rng, *count);
        }
    }
    out
}

/// One resample pushed through the estimator chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSample {
    pub estimate: PopulationEstimate,
    pub corrected: PopulationEstimate,
}

/// Estimator outputs on `n_samples` resamples, in sample order.
#[derive(Debug, Clone, PartialEq)]
pub struct Resamples {
    pub samples: Vec<PipelineSample>,
    pub failed: usize,
    pub requested: usize,
    pub seed: u64,
}

/// Runs the estimator chain on independent resamples. Resamples the chain
/// rejects are counted and dropped.
pub fn bootstrap_estimates(dataset: &CountsDataset, n_samples: usize, seed: u64) -> Result<Resamples> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "n_samples = {n_samples} below the minimum of {MIN_SAMPLES}"
        )));
    }
    let mut samples = Vec::with_capacity(n_samples);
    let mut failed = 0;
    for s in 0..n_samples {
        match full_pipeline(&resample(dataset, sub_seed(seed, s))) {
            Ok(out) => samples.push(PipelineSample { estimate: out.estimate, corrected: out.corrected }),
            Err(Error::IncompleteDataset(missing)) => return Err(Error::IncompleteDataset(missing)),
            Err(_) => failed += 1,
        }
    }
    if failed as f64 > MAX_FAILED_FRACTION * n_samples as f64 {
        return Err(Error::UnstableStatistics { failed, total: n_samples });
    }
    Ok(Resamples { samples, failed, requested: n_samples, seed })
}

impl Resamples {
    /// Witness value on every sample, before or after the higher-order
    /// renormalization.
    pub fn witness_values(&self, params: &WitnessParams, basis: Basis, corrected: bool) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| {
                let est = if corrected { &s.corrected } else { &s.estimate };
                witness_value(params, &basis.select(est))
            })
            .collect()
    }

    /// Fraction of samples on which the witness is negative.
    pub fn confidence(&self, params: &WitnessParams, basis: Basis) -> f64 {
        negative_fraction(&self.witness_values(params, basis, false))
    }

    pub fn into_result(self, params: WitnessParams, basis: Basis) -> BootstrapResult {
        let values = self.witness_values(&params, basis, false);
        let samples = self.samples.iter().map(|s| s.estimate).zip(values).collect();
        BootstrapResult::new(samples, basis, self.failed, self.seed)
    }
}

pub fn negative_fraction(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|v| **v < 0.0).count() as f64 / values.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// Estimate and witness value per successful resample.
    pub samples: Vec<(PopulationEstimate, f64)>,
    pub basis: Basis,
    pub confidence_negative: f64,
    pub n_samples: usize,
    pub failed: usize,
    pub seed: u64,
}

impl BootstrapResult {
    pub fn new(samples: Vec<(PopulationEstimate, f64)>, basis: Basis, failed: usize, seed: u64) -> Self {
        let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
        Self {
            confidence_negative: negative_fraction(&values),
            n_samples: samples.len(),
            samples,
            basis,
            failed,
            seed,
        }
    }

    pub fn witness_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }
}

/// Bootstrap distribution of a fixed witness.
pub fn bootstrap_pipeline(
    dataset: &CountsDataset,
    params: &WitnessParams,
    n_samples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    Ok(bootstrap_estimates(dataset, n_samples, seed)?.into_result(*params, Basis::SpinWave))
}

/// Bootstrap distribution when the witness is re-optimized on every
/// resample at depth `k`.
pub fn bootstrap_reoptimized(
    resamples: &Resamples,
    k: usize,
    n: usize,
    basis: Basis,
) -> Result<BootstrapResult> {
    let mut samples = Vec::with_capacity(resamples.samples.len());
    for s in &resamples.samples {
        let pops = basis.select(&s.estimate);
        let opt = optimize_params(&pops, k, n)?;
        samples.push((s.estimate, opt.value));
    }
    Ok(BootstrapResult::new(samples, basis, resamples.failed, resamples.seed))
}

/// Percentile by linear interpolation between closest ranks of `sorted`
/// (`h = (n - 1) q`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 16th and 84th percentiles.
pub fn interval68(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    (percentile(&v, 0.16), percentile(&v, 0.84))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub name: &'static str,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceReport {
    pub confidence_negative: f64,
    pub n_samples: usize,
    pub failed: usize,
    pub intervals: Vec<Interval>,
}

impl ConfidenceReport {
    pub fn interval(&self, name: &str) -> Option<&Interval> {
        self.intervals.iter().find(|i| i.name == name)
    }
}

pub fn confidence_and_intervals(result: &BootstrapResult) -> Result<ConfidenceReport> {
    if result.n_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{} samples, at least {MIN_SAMPLES} needed",
            result.n_samples
        )));
    }
    type Column = (&'static str, fn(&PopulationEstimate) -> f64);
    let columns: [Column; 8] = [
        ("p0", |e| e.p0),
        ("p1", |e| e.p1),
        ("p2", |e| e.p2),
        ("F", |e| e.fidelity),
        ("p0p", |e| e.p0p),
        ("p1p", |e| e.p1p),
        ("p2p", |e| e.p2p),
        ("Fp", |e| e.fidelity_p),
    ];
    let mut intervals = Vec::with_capacity(columns.len() + 1);
    let mut push = |name: &'static str, mut values: Vec<f64>| {
        values.sort_by(f64::total_cmp);
        intervals.push(Interval {
            name,
            median: percentile(&values, 0.5),
            lo: percentile(&values, 0.16),
            hi: percentile(&values, 0.84),
        });
    };
    for (name, get) in columns {
        push(name, result.samples.iter().map(|s| get(&s.0)).collect());
    }
    push("W", result.witness_values());
    Ok(ConfidenceReport {
        confidence_negative: result.confidence_negative,
        n_samples: result.n_samples,
        failed: result.failed,
        intervals,
    })
}

/// One witness value per line, in sample order.
pub fn witness_dump(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for v in values {
        out.push_str(&format!("{v:e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{analytic_dataset, full_plan, run_campaign, ExperimentModel};
    use approx::assert_abs_diff_eq;
    use rand_distr::Normal;

    fn est(p1: f64) -> PopulationEstimate {
        PopulationEstimate {
            p0: 1.0 - p1,
            p1,
            p2: 0.0,
            fidelity: p1,
            p0p: 0.0,
            p1p: 0.0,
            p2p: 0.0,
            fidelity_p: 0.0,
            alpha3: 0.0,
            lambda_poisson: 0.0,
            corrected: false,
        }
    }

    fn synthetic(values: &[f64]) -> BootstrapResult {
        BootstrapResult::new(values.iter().map(|v| (est(0.9), *v)).collect(), Basis::SpinWave, 0, 0)
    }

    #[test]
    fn resample_zero_stays_zero() {
        let m = ExperimentModel::paper_like(3, 0.03).unwrap();
        let mut ds = run_campaign(&m, &full_plan(3, 10_000), 1, true).unwrap();
        ds.records[0].counts.insert("SI".into(), 0);
        for seed in 0..10 {
            assert_eq!(resample(&ds, seed).records[0].counts["SI"], 0);
        }
    }

    #[test]
    fn resample_concentration_and_determinism() {
        let m = ExperimentModel::paper_like(3, 0.03).unwrap();
        let mut ds = run_campaign(&m, &full_plan(3, 10_000_000), 1, true).unwrap();
        ds.records[0].counts.insert("S".into(), 1_000_000);
        for seed in 0..20 {
            let c = resample(&ds, seed).records[0].counts["S"] as f64;
            assert!((c - 1e6).abs() <= 5e3, "seed {seed}: {c}");
        }
        assert_eq!(resample(&ds, 4), resample(&ds, 4));
        assert_ne!(resample(&ds, 4), resample(&ds, 5));
        assert_eq!(resample(&ds, 4).records[3].trials, ds.records[3].trials);
    }

    #[test]
    fn percentile_matches_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let normal = Normal::new(0.0, 1.0).unwrap();
        for n in [1usize, 2, 7, 100, 1001] {
            let values: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            for q in [0.0, 0.16, 0.5, 0.84, 1.0] {
                // oracle: order statistics picked by selection, not sorting
                let h = (n - 1) as f64 * q;
                let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
                let mut a = values.clone();
                let x_lo = *a.select_nth_unstable_by(lo, f64::total_cmp).1;
                let x_hi = *a.select_nth_unstable_by(hi, f64::total_cmp).1;
                let expected = x_lo + (h - lo as f64) * (x_hi - x_lo);
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                assert_eq!(percentile(&sorted, q), expected);
            }
        }
    }

    #[test]
    fn symmetric_and_constant_samples() {
        let values: Vec<f64> = (0..201).map(|i| (i as f64 - 100.0) / 100.0).collect();
        let (lo, hi) = interval68(&values);
        assert_abs_diff_eq!(lo, -0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 0.68, epsilon = 1e-12);
        let r = confidence_and_intervals(&synthetic(&vec![-0.3; 150])).unwrap();
        let w = r.interval("W").unwrap();
        assert_eq!((w.lo, w.hi), (-0.3, -0.3));
        assert_eq!(r.confidence_negative, 1.0);
        assert!(confidence_and_intervals(&synthetic(&[-1.0; 50])).is_err());
    }

    #[test]
    fn gaussian_confidence() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let normal = Normal::new(-0.08, 0.02).unwrap();
        let values: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let r = confidence_and_intervals(&synthetic(&values)).unwrap();
        // Phi(4) = 0.9999683
        assert_abs_diff_eq!(r.confidence_negative, 0.9999683, epsilon = 5e-4);
        let w = r.interval("W").unwrap();
        assert_abs_diff_eq!(w.hi - w.lo, 2.0 * 0.02 * 0.994458, epsilon = 2e-3);
    }

    #[test]
    fn analytic_dataset_concentrates() {
        let m = ExperimentModel::paper_like(4, 0.03).unwrap();
        let ds = analytic_dataset(&m).unwrap();
        let p = WitnessParams::new(0.369, 0.889, 0.268, 4, 4).unwrap();
        let r = bootstrap_pipeline(&ds, &p, 100, 1).unwrap();
        let rep = confidence_and_intervals(&r).unwrap();
        let p1 = rep.interval("p1").unwrap();
        assert!(p1.hi - p1.lo < 1e-6);
        assert_eq!(r.failed, 0);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let m = ExperimentModel::paper_like(4, 0.03).unwrap();
        let ds = run_campaign(&m, &full_plan(4, 2_000_000), 5, true).unwrap();
        let p = WitnessParams::new(0.369, 0.889, 0.268, 4, 4).unwrap();
        let a = bootstrap_pipeline(&ds, &p, 200, 9).unwrap();
        let b = bootstrap_pipeline(&ds, &p, 200, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(witness_dump(&a.witness_values()), witness_dump(&b.witness_values()));
        assert_eq!(a.witness_values().len(), 200 - a.failed);
    }

    #[test]
    fn sample_floor_and_instability() {
        let m = ExperimentModel::paper_like(4, 0.03).unwrap();
        let ds = run_campaign(&m, &full_plan(4, 100_000), 5, true).unwrap();
        assert!(bootstrap_estimates(&ds, 99, 1).is_err());
        // a handful of heralds: most resamples have no fidelity coincidences
        // or no three-photon doubles, and p1 estimates scatter wildly
        let tiny = run_campaign(&m, &full_plan(4, 300), 5, true).unwrap();
        match bootstrap_estimates(&tiny, 100, 1) {
            Err(Error::UnstableStatistics { failed, total }) => assert!(failed > 10 && total == 100),
            other => panic!("expected unstable statistics, got {other:?}"),
        }
    }

    #[test]
    fn dump_has_one_line_per_sample() {
        let text = witness_dump(&[-0.5, 0.25, 1e-7]);
        assert_eq!(text.lines().collect::<Vec<_>>(), vec!["-5e-1", "2.5e-1", "1e-7"]);
    }
}
