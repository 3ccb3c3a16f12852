//! Estimators turning photon-counting frequencies into excitation
//! populations and a W-state fidelity.
//!
//! The chain runs in a fixed order: retrieval efficiencies from the
//! per-ensemble calibration, the normalized three-photon correlation,
//! photonic populations, spin-wave populations, the fidelity lower bound,
//! and finally the renormalization for excitation numbers above two.

use crate::dataset::{AodConfig, CountsDataset};
use crate::error::{Error, Result};

/// Floor applied to non-positive retrieval efficiencies.
pub const ETA_FLOOR: f64 = 1e-6;

/// `(p0, p1, p2, F)`, the four numbers a witness is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationEstimate {
    /// Spin-wave populations, corrected for retrieval efficiency.
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub fidelity: f64,
    /// Photonic (idler) populations, uncorrected.
    pub p0p: f64,
    pub p1p: f64,
    pub p2p: f64,
    pub fidelity_p: f64,
    /// Normalized three-photon correlation.
    pub alpha3: f64,
    /// Poisson parameter `2 p2 / p1`; zero until the higher-order
    /// correction has been applied.
    pub lambda_poisson: f64,
    pub corrected: bool,
}

impl PopulationEstimate {
    pub fn spin_wave(&self) -> Populations {
        Populations { p0: self.p0, p1: self.p1, p2: self.p2, fidelity: self.fidelity }
    }

    pub fn photonic(&self) -> Populations {
        Populations { p0: self.p0p, p1: self.p1p, p2: self.p2p, fidelity: self.fidelity_p }
    }
}

/// Calibrated efficiencies and the derived detection-mode quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    pub eta: Vec<f64>,
    /// Total transfer efficiency `sum_i eta_i / N`.
    pub total_transfer: f64,
    /// `|<W'_N|W_N>|^2` for the efficiency-weighted detection mode.
    pub overlap_sq: f64,
}

impl CalibrationTable {
    pub fn from_eta(eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() {
            return Err(Error::InvalidCalibration("no retrieval efficiencies".into()));
        }
        if let Some(e) = eta.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(Error::InvalidCalibration(format!("retrieval efficiency {e} outside (0, 1]")));
        }
        let n = eta.len() as f64;
        let sum: f64 = eta.iter().sum();
        let total_transfer = sum / n;
        let root_sum: f64 = eta.iter().map(|e| (e / sum / n).sqrt()).sum();
        Ok(Self { eta, total_transfer, overlap_sq: (root_sum * root_sum).min(1.0) })
    }

    pub fn n_modes(&self) -> usize {
        self.eta.len()
    }
}

/// Result of a single-ensemble efficiency calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retrieval {
    pub eta: f64,
    /// Set when random coincidences explain all counts and `eta` was
    /// clamped to [`ETA_FLOOR`].
    pub degenerate: bool,
}

/// `eta = P_SI / P_S - P_I`: coincidences minus the accidental rate.
pub fn retrieval_efficiency(p_s: f64, p_i: f64, p_si: f64) -> Result<Retrieval> {
    if !(p_s > 0.0) {
        return Err(Error::NoHerald);
    }
    let eta = p_si / p_s - p_i;
    if eta <= 0.0 {
        return Ok(Retrieval { eta: ETA_FLOOR, degenerate: true });
    }
    Ok(Retrieval { eta: eta.max(ETA_FLOOR), degenerate: false })
}

/// `q1 q123 / (q12 q13)`; detection efficiencies cancel.
pub fn three_photon_alpha(q1: f64, q12: f64, q13: f64, q123: f64) -> Result<f64> {
    if !(q12 > 0.0 && q13 > 0.0) {
        return Err(Error::InsufficientCoincidences(format!(
            "two-fold coincidences q12 = {q12}, q13 = {q13}"
        )));
    }
    Ok(q1 * q123 / (q12 * q13))
}

/// Photonic populations: `p1' = sum q_i`, `p2' = alpha p1'^2 / 2`.
pub fn photonic_populations(q: &[f64], alpha3: f64) -> Result<(f64, f64, f64)> {
    if q.is_empty() {
        return Err(Error::InvalidArgument("empty population list".into()));
    }
    if let Some(v) = q.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidData(format!("negative detection probability {v}")));
    }
    let p1 = q.iter().sum::<f64>();
    if p1 > 1.0 {
        return Err(Error::InvalidData(format!("photonic p1 = {p1} exceeds 1")));
    }
    let p2 = alpha3 * p1 * p1 / 2.0;
    Ok((1.0 - p1 - p2, p1, p2))
}

/// Spin-wave populations from `S = sum_i q_i / eta_i = p1 + 2 p2` and
/// `p2 = alpha p1^2 / 2`.
pub fn spinwave_populations(q: &[f64], cal: &CalibrationTable, alpha3: f64) -> Result<(f64, f64, f64)> {
    if q.len() != cal.n_modes() {
        return Err(Error::InvalidArgument(format!(
            "{} detection probabilities for {} ensembles",
            q.len(),
            cal.n_modes()
        )));
    }
    let s: f64 = q.iter().zip(&cal.eta).map(|(q, e)| q / e).sum();
    spinwave_from_sum(s, alpha3)
}

/// Solves `alpha p1^2 + p1 - s = 0` for the non-negative root.
pub fn spinwave_from_sum(s: f64, alpha3: f64) -> Result<(f64, f64, f64)> {
    if !(s >= 0.0) || !(alpha3 >= 0.0) {
        return Err(Error::InvalidData(format!("S = {s}, alpha = {alpha3}")));
    }
    if s > 1.0 + alpha3 {
        return Err(Error::InvalidData(format!(
            "S = {s} exceeds the largest value 1 + alpha = {} a normalized state allows",
            1.0 + alpha3
        )));
    }
    // 2s / (1 + sqrt(1 + 4 alpha s)) is the positive root without cancellation
    let p1 = 2.0 * s / (1.0 + (1.0 + 4.0 * alpha3 * s).sqrt());
    let p2 = alpha3 * p1 * p1 / 2.0;
    let p0 = 1.0 - p1 - p2;
    if p0 < -1e-6 {
        return Err(Error::InvalidData(format!("negative vacuum population {p0}")));
    }
    Ok((p0.max(0.0), p1, p2))
}

/// Largest `S = p1 + 2 p2` with `p2 = alpha p1^2 / 2` and `p0 >= 0`.
pub fn max_normalized_sum(alpha3: f64) -> f64 {
    // p1 + alpha p1^2 / 2 = 1 at the boundary
    let p1 = if alpha3 > 0.0 { 2.0 / (1.0 + (1.0 + 2.0 * alpha3).sqrt()) } else { 1.0 };
    p1 + alpha3 * p1 * p1
}

/// `F >= p1 q_f |<W'|W>|^2 / (T (p1 + 2 p2))`.
pub fn fidelity_lower_bound(q_f: f64, cal: &CalibrationTable, p1: f64, p2: f64) -> Result<f64> {
    if !(cal.total_transfer > 0.0) {
        return Err(Error::InvalidCalibration("total transfer efficiency is zero".into()));
    }
    if !(p1 > 0.0) {
        return Err(Error::InvalidData(format!("single-excitation population p1 = {p1}")));
    }
    if !(q_f >= 0.0) {
        return Err(Error::InvalidData(format!("fidelity click probability {q_f}")));
    }
    Ok(p1 * q_f * cal.overlap_sq / (cal.total_transfer * (p1 + 2.0 * p2)))
}

/// Renormalizes `p0, p1, p2, F` by `1 / (1 + p_{>2})` with
/// `p_{>2} <= p3 / (1 - lambda)`, `p3 = p1 lambda^2 / 6`, `lambda = 2 p2 / p1`.
pub fn higher_order_correction(est: &PopulationEstimate) -> Result<PopulationEstimate> {
    if est.corrected {
        return Err(Error::InvalidArgument("estimate is already corrected".into()));
    }
    if !(est.p1 > 0.0) {
        return Err(Error::InvalidData(format!("p1 = {} must be positive", est.p1)));
    }
    let lambda = 2.0 * est.p2 / est.p1;
    if lambda >= 1.0 {
        return Err(Error::ModelViolation(format!(
            "Poisson parameter {lambda} >= 1 breaks the weak-pumping assumption"
        )));
    }
    let factor = 1.0 / (1.0 + higher_order_mass(est.p1, lambda));
    Ok(PopulationEstimate {
        p0: est.p0 * factor,
        p1: est.p1 * factor,
        p2: est.p2 * factor,
        fidelity: est.fidelity * factor,
        lambda_poisson: lambda,
        corrected: true,
        ..*est
    })
}

/// Upper bound on the population above two excitations.
pub fn higher_order_mass(p1: f64, lambda: f64) -> f64 {
    let p3 = p1 * lambda * lambda / 6.0;
    p3 / (1.0 - lambda)
}

/// Probabilities extracted from raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequencies {
    /// `(P_S, P_I, P_SI)` per ensemble.
    pub calibration: Vec<(f64, f64, f64)>,
    /// Herald-conditioned idler click probability per ensemble.
    pub population: Vec<f64>,
    /// Herald-conditioned click probability in the combined idler mode.
    pub q_f: f64,
    /// `(q1, q12, q13, q123)` per trial.
    pub three_photon: (f64, f64, f64, f64),
}

fn ratio(num: u64, den: u64, what: &str) -> Result<f64> {
    if den == 0 {
        return Err(Error::NoHerald).map_err(|e: Error| {
            Error::InvalidData(format!("{what}: {e}"))
        });
    }
    Ok(num as f64 / den as f64)
}

impl Frequencies {
    pub fn from_dataset(dataset: &CountsDataset) -> Result<Self> {
        let n = dataset.n_modes();
        if n == 0 {
            return Err(Error::IncompleteDataset(vec!["per-ensemble records".into()]));
        }
        let missing = dataset.missing_configs(n);
        if !missing.is_empty() {
            return Err(Error::IncompleteDataset(missing.iter().map(|c| c.to_string()).collect()));
        }
        let get = |c: AodConfig| dataset.find(c).expect("presence checked above");

        let mut calibration = Vec::with_capacity(n);
        let mut population = Vec::with_capacity(n);
        for i in 0..n {
            let r = get(AodConfig::Calibrate(i));
            let t = r.trials as f64;
            calibration.push((
                r.count("S")? as f64 / t,
                r.count("I")? as f64 / t,
                r.count("SI")? as f64 / t,
            ));
            let r = get(AodConfig::Population(i));
            population.push(ratio(r.count("HI")?, r.count("H")?, &r.config.to_string())?);
        }
        let r = get(AodConfig::Fidelity);
        let q_f = ratio(r.count("HI")?, r.count("H")?, "FIDELITY")?;
        let r = get(AodConfig::ThreePhoton);
        let t = r.trials as f64;
        let three_photon = (
            r.count("D1")? as f64 / t,
            r.count("D12")? as f64 / t,
            r.count("D13")? as f64 / t,
            r.count("D123")? as f64 / t,
        );
        Ok(Self { calibration, population, q_f, three_photon })
    }
}

/// Every intermediate quantity of one pass through the estimator chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub calibration: CalibrationTable,
    /// `sum_i q_i / eta_i`.
    pub s_sum: f64,
    /// Estimate before the higher-order renormalization.
    pub estimate: PopulationEstimate,
    pub corrected: PopulationEstimate,
    pub warnings: Vec<String>,
}

pub fn full_pipeline(dataset: &CountsDataset) -> Result<PipelineOutput> {
    pipeline_from_frequencies(&Frequencies::from_dataset(dataset)?)
}

pub fn pipeline_from_frequencies(freq: &Frequencies) -> Result<PipelineOutput> {
    let mut warnings = Vec::new();

    let mut eta = Vec::with_capacity(freq.calibration.len());
    for (i, &(ps, pi, psi)) in freq.calibration.iter().enumerate() {
        let r = retrieval_efficiency(ps, pi, psi)?;
        if r.degenerate {
            warnings.push(format!("ensemble {i}: degenerate calibration, eta clamped to {ETA_FLOOR}"));
        }
        eta.push(r.eta);
    }
    let calibration = CalibrationTable::from_eta(eta)?;

    let (q1, q12, q13, q123) = freq.three_photon;
    let alpha3 = match three_photon_alpha(q1, q12, q13, q123) {
        Ok(a) => a,
        Err(Error::InsufficientCoincidences(msg)) => {
            warnings.push(format!("no two-fold coincidences ({msg}); double excitations set to zero"));
            0.0
        }
        Err(e) => return Err(e),
    };

    let (p0p, p1p, p2p) = photonic_populations(&freq.population, alpha3)?;
    if p0p < 0.0 {
        return Err(Error::InvalidData(format!("negative photonic vacuum population {p0p}")));
    }
    let raw_sum: f64 = freq.population.iter().zip(&calibration.eta).map(|(q, e)| q / e).sum();
    let s_max = max_normalized_sum(alpha3);
    let s_sum = if raw_sum > s_max {
        warnings.push(format!("S = {raw_sum} above the normalized maximum {s_max}; clamped"));
        s_max
    } else {
        raw_sum
    };
    let (p0, p1, p2) = spinwave_from_sum(s_sum, alpha3)?;

    let mut fidelity = fidelity_lower_bound(freq.q_f, &calibration, p1, p2)?;
    if fidelity > p1 {
        warnings.push(format!("fidelity bound {fidelity} exceeds p1 = {p1}; capped"));
        fidelity = p1;
    }
    let mut fidelity_p = freq.q_f;
    if fidelity_p > p1p {
        warnings.push(format!("photonic fidelity {fidelity_p} exceeds p1' = {p1p}; capped"));
        fidelity_p = p1p;
    }

    let estimate = PopulationEstimate {
        p0,
        p1,
        p2,
        fidelity,
        p0p,
        p1p,
        p2p,
        fidelity_p,
        alpha3,
        lambda_poisson: 0.0,
        corrected: false,
    };
    let corrected = higher_order_correction(&estimate)?;
    Ok(PipelineOutput { calibration, s_sum, estimate, corrected, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn retrieval_examples() {
        let r = retrieval_efficiency(0.01, 0.0004, 0.000404).unwrap();
        assert_abs_diff_eq!(r.eta, 0.04, epsilon = 1e-12);
        assert!(!r.degenerate);
        assert_abs_diff_eq!(retrieval_efficiency(0.5, 0.0, 0.5).unwrap().eta, 1.0);
        let r = retrieval_efficiency(0.01, 0.001, 1e-5).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.eta, ETA_FLOOR);
        assert_eq!(retrieval_efficiency(0.0, 0.1, 0.0), Err(Error::NoHerald));
    }

    #[test]
    fn alpha_examples() {
        assert_abs_diff_eq!(three_photon_alpha(0.1, 0.002, 0.002, 0.00008).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(three_photon_alpha(0.1, 0.002, 0.002, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            three_photon_alpha(0.05, 0.0005, 0.0005, 0.00001).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            three_photon_alpha(0.1, 0.0, 0.002, 0.0),
            Err(Error::InsufficientCoincidences(_))
        ));
    }

    #[test]
    fn photonic_examples() {
        let (p0, p1, p2) = photonic_populations(&[0.005, 0.005, 0.01], 2.0).unwrap();
        assert_abs_diff_eq!(p1, 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(p2, 4e-4, epsilon = 1e-15);
        assert_abs_diff_eq!(p0, 0.9796, epsilon = 1e-15);
        assert_eq!(photonic_populations(&[0.0; 4], 1.0).unwrap(), (1.0, 0.0, 0.0));
        assert!(photonic_populations(&[0.6, 0.6], 0.0).is_err());
        assert!(photonic_populations(&[], 0.0).is_err());
    }

    #[test]
    fn photonic_double_matches_triple_ratio() {
        // p1' = 2 q12 / q1 and p2' = 2 q123 / q1 for a consistent dataset
        let (q1, p1, p2) = (0.01, 0.03, 4e-5);
        let (q12, q123) = (q1 * p1 / 2.0, q1 * p2 / 2.0);
        let alpha = three_photon_alpha(q1, q12, q12, q123).unwrap();
        let (_, p1p, p2p) = photonic_populations(&[p1 / 3.0; 3], alpha).unwrap();
        assert_abs_diff_eq!(p1p, 2.0 * q12 / q1, epsilon = 1e-15);
        assert_abs_diff_eq!(p2p, 2.0 * q123 / q1, epsilon = 1e-15);
    }

    #[test]
    fn spinwave_examples() {
        assert_eq!(spinwave_from_sum(0.5, 0.0).unwrap(), (0.5, 0.5, 0.0));
        let (p0, p1, p2) = spinwave_from_sum(0.5156, 0.0622).unwrap();
        assert_abs_diff_eq!(p1, 0.50004, epsilon = 1e-5);
        assert_abs_diff_eq!(p2, 0.0077763, epsilon = 1e-6);
        assert_abs_diff_eq!(p0, 0.49219, epsilon = 5e-5);
        assert_abs_diff_eq!(p0 + p1 + p2, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p1 + 2.0 * p2, 0.5156, epsilon = 1e-15);
        assert!(spinwave_from_sum(2.5, 1.0).is_err());
    }

    #[test]
    fn normalized_sum_boundary() {
        for alpha in [0.0, 0.03, 0.5, 2.0] {
            let (p0, _, _) = spinwave_from_sum(max_normalized_sum(alpha), alpha).unwrap();
            assert_abs_diff_eq!(p0, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn pipeline_clamps_noisy_sum() {
        let freq = Frequencies {
            calibration: vec![(0.01, 0.001, 0.01 * 0.041); 2],
            population: vec![0.03, 0.03],
            q_f: 0.03,
            three_photon: (0.01, 1e-4, 1e-4, 0.0),
        };
        let out = pipeline_from_frequencies(&freq).unwrap();
        assert_abs_diff_eq!(out.estimate.p1, 1.0, epsilon = 1e-12);
        assert!(out.warnings.iter().any(|w| w.contains("clamped")));
    }

    #[test]
    fn spinwave_uses_efficiencies() {
        let cal = CalibrationTable::from_eta(vec![0.04, 0.02]).unwrap();
        let (_, p1, _) = spinwave_populations(&[0.004, 0.002], &cal, 0.0).unwrap();
        assert_abs_diff_eq!(p1, 0.2, epsilon = 1e-15);
        assert!(spinwave_populations(&[0.004], &cal, 0.0).is_err());
    }

    #[test]
    fn spinwave_poisson_ratio() {
        // a Poisson(lambda) ensemble with p2/p1 = lambda/2 and
        // alpha = 2 p2 / p1^2
        let lambda = 0.0311;
        let p1 = 0.95;
        let p2 = p1 * lambda / 2.0;
        let (_, e1, e2) = spinwave_from_sum(p1 + 2.0 * p2, 2.0 * p2 / (p1 * p1)).unwrap();
        assert_abs_diff_eq!(e2 / e1, 0.01555, epsilon = 1e-12);
    }

    #[test]
    fn calibration_table_two_modes() {
        let cal = CalibrationTable::from_eta(vec![0.04, 0.0324]).unwrap();
        assert_abs_diff_eq!(cal.total_transfer, 0.0362, epsilon = 1e-15);
        let t = [0.04 / 0.0724, 0.0324 / 0.0724];
        assert_abs_diff_eq!(t[0], 0.5525, epsilon = 1e-4);
        assert_abs_diff_eq!(cal.overlap_sq, 0.99723, epsilon = 1e-5);
        let bound = fidelity_lower_bound(0.03, &cal, 0.9, 0.01).unwrap();
        assert_abs_diff_eq!(bound, 0.9 * 0.03 * cal.overlap_sq / (0.0362 * 0.92), epsilon = 1e-15);
        assert!(CalibrationTable::from_eta(vec![0.0, 0.1]).is_err());
    }

    #[test]
    fn fidelity_bound_uniform_case() {
        let cal = CalibrationTable::from_eta(vec![0.05; 6]).unwrap();
        assert_abs_diff_eq!(cal.overlap_sq, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            fidelity_lower_bound(0.04, &cal, 0.9, 0.0).unwrap(),
            0.04 / 0.05,
            epsilon = 1e-14
        );
        assert_eq!(fidelity_lower_bound(0.0, &cal, 0.9, 0.0).unwrap(), 0.0);
        let zero = CalibrationTable { eta: vec![0.1], total_transfer: 0.0, overlap_sq: 1.0 };
        assert!(matches!(
            fidelity_lower_bound(0.1, &zero, 0.9, 0.0),
            Err(Error::InvalidCalibration(_))
        ));
    }

    #[test]
    fn fidelity_bound_monotonicity() {
        let cal = CalibrationTable::from_eta(vec![0.03, 0.05, 0.04]).unwrap();
        let mut last = -1.0;
        for i in 0..20 {
            let b = fidelity_lower_bound(i as f64 * 0.002, &cal, 0.9, 0.01).unwrap();
            assert!(b >= last);
            last = b;
        }
        let mut last = f64::INFINITY;
        for i in 0..20 {
            let b = fidelity_lower_bound(0.03, &cal, 0.9, i as f64 * 0.005).unwrap();
            assert!(b <= last);
            last = b;
        }
    }

    fn estimate(p0: f64, p1: f64, p2: f64, f: f64) -> PopulationEstimate {
        PopulationEstimate {
            p0,
            p1,
            p2,
            fidelity: f,
            p0p: 0.0,
            p1p: 0.0,
            p2p: 0.0,
            fidelity_p: 0.0,
            alpha3: 0.0,
            lambda_poisson: 0.0,
            corrected: false,
        }
    }

    #[test]
    fn correction_examples() {
        let p1 = 0.9;
        let c = higher_order_correction(&estimate(0.086, p1, p1 * 0.01555, 0.85)).unwrap();
        assert_abs_diff_eq!(c.lambda_poisson, 0.0311, epsilon = 1e-12);
        assert!(c.corrected);

        let same = higher_order_correction(&estimate(0.1, 0.9, 0.0, 0.8)).unwrap();
        assert_eq!((same.p0, same.p1, same.p2, same.fidelity), (0.1, 0.9, 0.0, 0.8));

        let lambda = 0.0634;
        let c = higher_order_correction(&estimate(0.07, 0.9, 0.9 * lambda / 2.0, 0.8)).unwrap();
        let p3 = 0.9 * lambda * lambda / 6.0;
        assert_abs_diff_eq!(p3, 6.029e-4, epsilon = 1e-7);
        let factor = 1.0 / (1.0 + p3 / (1.0 - lambda));
        assert_abs_diff_eq!(factor, 0.999356, epsilon = 1e-6);
        assert_abs_diff_eq!(c.p1, 0.9 * factor, epsilon = 1e-15);
        assert_abs_diff_eq!(c.fidelity, 0.8 * factor, epsilon = 1e-15);
        assert!(c.p0 + c.p1 + c.p2 <= 1.0);
    }

    #[test]
    fn correction_errors() {
        assert!(matches!(
            higher_order_correction(&estimate(0.0, 0.5, 0.3, 0.4)),
            Err(Error::ModelViolation(_))
        ));
        let mut done = estimate(0.1, 0.9, 0.0, 0.8);
        done.corrected = true;
        assert!(higher_order_correction(&done).is_err());
    }

    #[test]
    fn correction_is_small_for_weak_pumping() {
        for i in 0..=70 {
            let lambda = i as f64 * 0.001;
            let p1 = 0.93;
            let c = higher_order_correction(&estimate(0.05, p1, p1 * lambda / 2.0, 0.9)).unwrap();
            assert!((c.p1 - p1).abs() / p1 < 1e-3);
        }
    }
}
