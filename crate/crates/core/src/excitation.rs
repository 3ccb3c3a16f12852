//! N-mode bosonic states truncated at two total excitations.
//!
//! The double-excitation sector is stored densely as an upper-triangular
//! array over unordered mode pairs `(i, j)` with `i <= j`; `(i, i)` is the
//! doubly occupied Fock state `|2_i>`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const NORM_TOL: f64 = 1e-12;

/// Number of unordered pairs `(i, j)` with `i <= j` over `n` modes.
fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// A pure state with at most two excitations spread over `n_modes` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    n_modes: usize,
    amp0: C64,
    amp1: Vec<C64>,
    amp2: Vec<C64>,
}

impl TruncatedState {
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be positive".into()));
        }
        Ok(Self {
            n_modes,
            amp0: C64::new(1.0, 0.0),
            amp1: vec![C64::new(0.0, 0.0); n_modes],
            amp2: vec![C64::new(0.0, 0.0); pair_count(n_modes)],
        })
    }

    fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            amp0: C64::new(0.0, 0.0),
            amp1: vec![C64::new(0.0, 0.0); n_modes],
            amp2: vec![C64::new(0.0, 0.0); pair_count(n_modes)],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn amp0(&self) -> C64 {
        self.amp0
    }

    pub fn amp1(&self) -> &[C64] {
        &self.amp1
    }

    /// Amplitude of the two-excitation basis state with excitations in modes
    /// `i` and `j` (order irrelevant; `i == j` is a doubly occupied mode).
    pub fn amp2(&self, i: usize, j: usize) -> C64 {
        self.amp2[self.pair_index(i, j)]
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        assert!(j < self.n_modes, "mode index {j} out of range");
        // rows 0..i hold n, n-1, ..., n-i+1 entries
        i * self.n_modes - i * i.saturating_sub(1) / 2 + (j - i)
    }

    /// Iterates over `((i, j), amplitude)` for all pairs with `i <= j`.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
        let n = self.n_modes;
        (0..n)
            .flat_map(move |i| (i..n).map(move |j| (i, j)))
            .zip(self.amp2.iter().copied())
    }

    pub fn norm_sqr(&self) -> f64 {
        let (w0, w1, w2) = sector_populations(self);
        w0 + w1 + w2
    }

    /// Multiplies every single-mode amplitude `a_i^dagger` by `e^{i phi_i}`,
    /// so one-excitation terms pick up `phi_i` and two-excitation terms
    /// `phi_i + phi_j`.
    pub fn with_mode_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.n_modes {
            return Err(Error::InvalidArgument(format!(
                "expected {} phases, got {}",
                self.n_modes,
                phases.len()
            )));
        }
        let mut out = self.clone();
        for (a, &p) in out.amp1.iter_mut().zip(phases) {
            *a *= C64::from_polar(1.0, p);
        }
        let n = self.n_modes;
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                out.amp2[k] *= C64::from_polar(1.0, phases[i] + phases[j]);
                k += 1;
            }
        }
        Ok(out)
    }
}

/// Non-negative mode weights `t'_i` summing to one, with per-mode phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeWeights {
    weights: Vec<f64>,
    phases: Vec<f64>,
}

impl ModeWeights {
    pub fn new(weights: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("weights must be non-empty".into()));
        }
        if weights.len() != phases.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights but {} phases",
                weights.len(),
                phases.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("negative or non-finite weight {w}")));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite phase".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { weights, phases })
    }

    /// Normalizes arbitrary non-negative weights to unit sum.
    pub fn from_unnormalized(raw: &[f64], phases: Vec<f64>) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidArgument("weights must have a positive sum".into()));
        }
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let fixed: f64 = weights.iter().sum();
        // absorb the last ulp of rounding so the unit-sum check holds
        let mut weights = weights;
        if let Some(last) = weights.last_mut() {
            *last += 1.0 - fixed;
            *last = last.max(0.0);
        }
        Self::new(weights, phases)
    }

    pub fn uniform(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be positive".into()));
        }
        Self::from_unnormalized(&vec![1.0; n_modes], vec![0.0; n_modes])
    }

    pub fn n_modes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Complex single-mode amplitudes `sqrt(t'_i) e^{i phi_i}`.
    pub fn amplitudes(&self) -> Vec<C64> {
        self.weights
            .iter()
            .zip(&self.phases)
            .map(|(&w, &p)| C64::from_polar(w.sqrt(), p))
            .collect()
    }
}

/// `|W_N> = sum_i e^{i phi_i} |i> / sqrt(N)`.
pub fn make_w_state(n_modes: usize, phases: &[f64]) -> Result<TruncatedState> {
    if n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be positive".into()));
    }
    if phases.len() != n_modes {
        return Err(Error::InvalidArgument(format!(
            "expected {n_modes} phases, got {}",
            phases.len()
        )));
    }
    let mut s = TruncatedState::zero(n_modes);
    let amp = 1.0 / (n_modes as f64).sqrt();
    for (a, &p) in s.amp1.iter_mut().zip(phases) {
        *a = C64::from_polar(amp, p);
    }
    Ok(s)
}

/// Single excitation in the collective mode defined by `weights`.
pub fn make_weighted_w(weights: &ModeWeights) -> TruncatedState {
    let mut s = TruncatedState::zero(weights.n_modes());
    s.amp1 = weights.amplitudes();
    s
}

/// Two excitations in the collective mode `a_e` defined by `weights`:
/// `(a_e^dagger)^2 |0> / sqrt(2)`.
pub fn make_double_excitation(weights: &ModeWeights) -> TruncatedState {
    let n = weights.n_modes();
    let c = weights.amplitudes();
    let mut s = TruncatedState::zero(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            s.amp2[k] = if i == j {
                c[i] * c[i]
            } else {
                std::f64::consts::SQRT_2 * c[i] * c[j]
            };
            k += 1;
        }
    }
    s
}

/// Product of `(cos t1 |g> + sin t1 |W_l>)` on the first `l` modes and
/// `(cos t2 |g'> + sin t2 |W_{N-l}>)` on the remaining ones.
pub fn make_biseparable(
    n_modes: usize,
    l: usize,
    theta1: f64,
    theta2: f64,
) -> Result<TruncatedState> {
    if n_modes < 2 || l < 1 || l > n_modes - 1 {
        return Err(Error::InvalidArgument(format!(
            "block size l = {l} outside [1, {}]",
            n_modes.saturating_sub(1)
        )));
    }
    let (a0, a1) = (theta1.cos(), theta1.sin());
    let (b0, b1) = (theta2.cos(), theta2.sin());
    let left = 1.0 / (l as f64).sqrt();
    let right = 1.0 / ((n_modes - l) as f64).sqrt();

    let mut s = TruncatedState::zero(n_modes);
    s.amp0 = C64::new(a0 * b0, 0.0);
    for (i, a) in s.amp1.iter_mut().enumerate() {
        *a = if i < l {
            C64::new(a1 * b0 * left, 0.0)
        } else {
            C64::new(a0 * b1 * right, 0.0)
        };
    }
    let cross = a1 * b1 * left * right;
    let mut k = 0;
    for i in 0..n_modes {
        for j in i..n_modes {
            if i < l && j >= l {
                s.amp2[k] = C64::new(cross, 0.0);
            }
            k += 1;
        }
    }
    Ok(s)
}

/// Squared norms of the zero-, one- and two-excitation sectors.
pub fn sector_populations(state: &TruncatedState) -> (f64, f64, f64) {
    let w0 = state.amp0.norm_sqr();
    let w1 = state.amp1.iter().map(|a| a.norm_sqr()).sum();
    let w2 = state.amp2.iter().map(|a| a.norm_sqr()).sum();
    (w0, w1, w2)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &TruncatedState, b: &TruncatedState) -> Result<C64> {
    if a.n_modes != b.n_modes {
        return Err(Error::InvalidArgument(format!(
            "mode count mismatch: {} vs {}",
            a.n_modes, b.n_modes
        )));
    }
    let mut acc = a.amp0.conj() * b.amp0;
    acc += a
        .amp1
        .iter()
        .zip(&b.amp1)
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>();
    acc += a
        .amp2
        .iter()
        .zip(&b.amp2)
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>();
    Ok(acc)
}
