//! Projector witness `W_k = alpha P0 + beta P1 + gamma P2 - |W_N><W_N|`.
//!
//! Non-negativity on every state of entanglement depth below `k` reduces to
//! non-negativity on the two-block family produced by
//! [`crate::excitation::make_biseparable`]. With `c_i = cos 2 theta_i` and
//! `s_i = sin 2 theta_i` the witness expectation on that family is
//!
//! ```text
//! 4 f = alpha (1 + c1)(1 + c2) + 2 beta (1 - c1 c2) + gamma (1 - c1)(1 - c2)
//!     - (1 + c1)(1 - c2) + (2l/N)(c1 - c2) - (2 sqrt(l (N - l)) / N) s1 s2
//! ```
//!
//! [`min_f`] minimizes it by fixed-point iteration from a grid of starts,
//! edge scans and a coarse grid. The parameter search in
//! [`optimize_params`] instead uses an exact per-block profile (the inner
//! minimum over `theta1` is a cosine of known amplitude, leaving a 1-D
//! problem whose stationarity condition is a quadratic).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::inference::Populations;

/// Smallest depth the two-block reduction is valid for: `max(2, ceil(2n/3))`,
/// raised where needed so that some block split exists.
pub fn min_depth(n: usize) -> usize {
    (2 * n).div_ceil(3).max((n + 2).div_ceil(2)).max(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Claimed entanglement depth.
    pub k: usize,
    /// Number of parties.
    pub n: usize,
}

impl WitnessParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, k: usize, n: usize) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n = {n} must be at least 2")));
        }
        if k > n || k < min_depth(n) {
            return Err(Error::InvalidArgument(format!(
                "depth k = {k} outside [{}, {n}]",
                min_depth(n)
            )));
        }
        Ok(Self { alpha, beta, gamma, k, n })
    }

    /// Admissible block sizes. A state of depth below `k` splits into blocks
    /// of at most `k - 1` parties, so `max(1, n - k + 1) <= l <= k - 1`.
    pub fn l_range(&self) -> std::ops::RangeInclusive<usize> {
        (self.n + 1 - self.k).max(1)..=(self.k - 1).min(self.n - 1)
    }

    fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisepPoint {
    pub l: usize,
    pub theta1: f64,
    pub theta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinMethod {
    InteriorStationary,
    Boundary,
    GridFallback,
}

impl MinMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            MinMethod::InteriorStationary => "interior-stationary",
            MinMethod::Boundary => "boundary",
            MinMethod::GridFallback => "grid-fallback",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinResult {
    pub f_min: f64,
    pub argmin: BisepPoint,
    pub method: MinMethod,
}

/// Block-size dependent constants of the objective.
#[derive(Debug, Clone, Copy)]
struct Block {
    alpha: f64,
    beta: f64,
    gamma: f64,
    /// `2l/N`
    ratio: f64,
    /// `2 sqrt(l (N - l)) / N`
    coupling: f64,
}

impl Block {
    fn new(p: &WitnessParams, l: usize) -> Self {
        let n = p.n as f64;
        let l = l as f64;
        Self {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            ratio: 2.0 * l / n,
            coupling: 2.0 * (l * (n - l)).sqrt() / n,
        }
    }

    #[inline]
    fn eval(&self, c1: f64, s1: f64, c2: f64, s2: f64) -> f64 {
        0.25 * (self.alpha * (1.0 + c1) * (1.0 + c2)
            + 2.0 * self.beta * (1.0 - c1 * c2)
            + self.gamma * (1.0 - c1) * (1.0 - c2)
            - (1.0 + c1) * (1.0 - c2)
            + self.ratio * (c1 - c2)
            - self.coupling * s1 * s2)
    }

    fn eval_angles(&self, theta1: f64, theta2: f64) -> f64 {
        let (s1, c1) = (2.0 * theta1).sin_cos();
        let (s2, c2) = (2.0 * theta2).sin_cos();
        self.eval(c1, s1, c2, s2)
    }

    /// Coefficient of `c1` in `4f` as a function of `c2`.
    #[inline]
    fn c1_coefficient(&self, c2: f64) -> f64 {
        self.alpha * (1.0 + c2) - 2.0 * self.beta * c2 - self.gamma * (1.0 - c2) - (1.0 - c2)
            + self.ratio
    }

    /// Coefficient of `c2` in `4f` as a function of `c1`.
    #[inline]
    fn c2_coefficient(&self, c1: f64) -> f64 {
        self.alpha * (1.0 + c1) - 2.0 * self.beta * c1 - self.gamma * (1.0 - c1) + (1.0 + c1)
            - self.ratio
    }

    fn gradient(&self, theta1: f64, theta2: f64) -> (f64, f64) {
        let (s1, c1) = (2.0 * theta1).sin_cos();
        let (s2, c2) = (2.0 * theta2).sin_cos();
        let d1 = -0.5 * (s1 * self.c1_coefficient(c2) + self.coupling * c1 * s2);
        let d2 = -0.5 * (s2 * self.c2_coefficient(c1) + self.coupling * s1 * c2);
        (d1, d2)
    }

    /// Exact minimum over both angles.
    ///
    /// For fixed `c2` the `theta1` dependence is `A c1 - K s2 s1`, minimized
    /// at value `-sqrt(A^2 + K^2 s2^2)` with `s1 >= 0`, so
    /// `4 g(c) = B(c) - sqrt(Q(c))` on `c in [-1, 1]` where `A`, `B` are
    /// linear and `Q = A^2 + K^2 (1 - c^2)` is quadratic. Squaring the
    /// stationarity condition `B' = Q' / (2 sqrt Q)` gives a quadratic in `c`
    /// whose real roots, with the endpoints, contain the minimizer.
    fn profile_min(&self) -> (f64, f64) {
        let (a, b, g, r, k) = (self.alpha, self.beta, self.gamma, self.ratio, self.coupling);
        let a0 = a - g - 1.0 + r;
        let a1 = a - 2.0 * b + g + 1.0;
        let b0 = a + 2.0 * b + g - 1.0;
        let b1 = a - g + 1.0 - r;
        let q0 = a0 * a0 + k * k;
        let q1 = 2.0 * a0 * a1;
        let q2 = a1 * a1 - k * k;
        let profile = |c: f64| {
            let q = (q0 + q1 * c + q2 * c * c).max(0.0);
            0.25 * (b0 + b1 * c - q.sqrt())
        };

        let mut best = (profile(1.0), 1.0);
        let mut consider = |c: f64| {
            if (-1.0..=1.0).contains(&c) {
                let v = profile(c);
                if v < best.0 {
                    best = (v, c);
                }
            }
        };
        consider(-1.0);

        let bb = b1 * b1;
        let e2 = 4.0 * q2 * (bb - q2);
        let e1 = 4.0 * q1 * (bb - q2);
        let e0 = 4.0 * bb * q0 - q1 * q1;
        let scale = e2.abs().max(e1.abs()).max(e0.abs());
        if scale == 0.0 {
            // profile is affine or constant; endpoints suffice
        } else if e2.abs() > 1e-12 * scale {
            let disc = e1 * e1 - 4.0 * e2 * e0;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let qq = -0.5 * (e1 + e1.signum() * sq);
                if qq != 0.0 {
                    consider(qq / e2);
                    consider(e0 / qq);
                } else {
                    consider(0.0);
                }
            } else if disc > -1e-12 * scale * scale {
                consider(-e1 / (2.0 * e2));
            }
        } else if e1.abs() > 1e-12 * scale {
            consider(-e0 / e1);
        } else {
            // degenerate stationarity polynomial: sample densely
            for i in 1..2048 {
                consider(-1.0 + 2.0 * i as f64 / 2048.0);
            }
        }
        best
    }
}

fn check_point(params: &WitnessParams, point: &BisepPoint) -> Result<()> {
    if !params.l_range().contains(&point.l) {
        return Err(Error::InvalidArgument(format!(
            "block size l = {} outside admissible range {:?}",
            point.l,
            params.l_range()
        )));
    }
    Ok(())
}

/// Witness expectation on the two-block state at `point`.
pub fn f_value(params: &WitnessParams, point: &BisepPoint) -> Result<f64> {
    check_point(params, point)?;
    Ok(Block::new(params, point.l).eval_angles(point.theta1, point.theta2))
}

/// Partial derivatives of [`f_value`] with respect to both angles.
pub fn f_gradient(params: &WitnessParams, point: &BisepPoint) -> Result<(f64, f64)> {
    check_point(params, point)?;
    Ok(Block::new(params, point.l).gradient(point.theta1, point.theta2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationary {
    pub theta1: f64,
    pub theta2: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solves the two stationarity conditions by alternating substitution,
/// `tan 2 theta1 = K s2 / (-A(c2))` then `tan 2 theta2 = K s1 / (-B(c1))`.
///
/// Each substitution is the exact minimizer over one angle, so the sweep
/// never increases `f`. Convergence requires both a step below `tol` and an
/// analytic gradient below `10 tol`; a vanishing denominator aborts with
/// `converged = false`.
pub fn stationary_iterate(
    params: &WitnessParams,
    l: usize,
    start: (f64, f64),
    max_iter: usize,
    tol: f64,
) -> Result<Stationary> {
    check_point(params, &BisepPoint { l, theta1: start.0, theta2: start.1 })?;
    let open = 0.0..FRAC_PI_2;
    if !(open.contains(&start.0) && start.0 > 0.0 && open.contains(&start.1) && start.1 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "start {start:?} must lie in the open square (0, pi/2)^2"
        )));
    }
    Ok(iterate_block(&Block::new(params, l), start, max_iter, tol))
}

fn iterate_block(block: &Block, start: (f64, f64), max_iter: usize, tol: f64) -> Stationary {
    const DENOM_EPS: f64 = 1e-14;
    let (mut t1, mut t2) = start;
    for it in 1..=max_iter {
        let (s2, c2) = (2.0 * t2).sin_cos();
        let den1 = -block.c1_coefficient(c2);
        if den1.abs() < DENOM_EPS {
            return Stationary { theta1: t1, theta2: t2, converged: false, iterations: it };
        }
        let n1 = 0.5 * (block.coupling * s2).abs().atan2(den1);

        let (s1, c1) = (2.0 * n1).sin_cos();
        let den2 = -block.c2_coefficient(c1);
        if den2.abs() < DENOM_EPS {
            return Stationary { theta1: n1, theta2: t2, converged: false, iterations: it };
        }
        let n2 = 0.5 * (block.coupling * s1).abs().atan2(den2);

        let step = (n1 - t1).abs().max((n2 - t2).abs());
        t1 = n1;
        t2 = n2;
        if step < tol {
            let (g1, g2) = block.gradient(t1, t2);
            if g1.abs() < 10.0 * tol && g2.abs() < 10.0 * tol {
                return Stationary { theta1: t1, theta2: t2, converged: true, iterations: it };
            }
        }
    }
    Stationary { theta1: t1, theta2: t2, converged: false, iterations: max_iter }
}

/// Search settings for [`min_f_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSettings {
    /// Starts per axis for the fixed-point iteration.
    pub starts_per_axis: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Step of the 1-D scans along the square's edges, in radians.
    pub edge_step: f64,
    /// Points per axis of the fallback grid (endpoints included).
    pub grid_points: usize,
}

impl Default for MinSettings {
    fn default() -> Self {
        Self { starts_per_axis: 5, max_iter: 500, tol: 1e-10, edge_step: 1e-4, grid_points: 400 }
    }
}

struct Best {
    inner: Option<MinResult>,
}

impl Best {
    fn offer(&mut self, f: f64, l: usize, theta1: f64, theta2: f64, method: MinMethod) {
        let candidate = MinResult { f_min: f, argmin: BisepPoint { l, theta1, theta2 }, method };
        let better = match &self.inner {
            None => true,
            Some(cur) => {
                f < cur.f_min
                    || (f == cur.f_min
                        && (l, theta1, theta2)
                            .partial_cmp(&(cur.argmin.l, cur.argmin.theta1, cur.argmin.theta2))
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            self.inner = Some(candidate);
        }
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect()
}

/// Global minimum of the witness over all admissible two-block states.
pub fn min_f(params: &WitnessParams) -> MinResult {
    min_f_with(params, &MinSettings::default())
}

pub fn min_f_with(params: &WitnessParams, settings: &MinSettings) -> MinResult {
    let mut best = Best { inner: None };

    let edge_points = (FRAC_PI_2 / settings.edge_step).ceil() as usize + 1;
    let edge = trig_table(&linspace(0.0, FRAC_PI_2, edge_points));
    let grid = trig_table(&linspace(0.0, FRAC_PI_2, settings.grid_points.max(2)));
    let m = settings.starts_per_axis;
    let starts: Vec<f64> = (1..=m).map(|i| FRAC_PI_2 * i as f64 / (m + 1) as f64).collect();

    for l in params.l_range() {
        let block = Block::new(params, l);

        for &a in &starts {
            for &b in &starts {
                let st = iterate_block(&block, (a, b), settings.max_iter, settings.tol);
                if st.converged {
                    let f = block.eval_angles(st.theta1, st.theta2);
                    best.offer(f, l, st.theta1, st.theta2, MinMethod::InteriorStationary);
                }
            }
        }

        // edges: theta1 in {0, pi/2} or theta2 in {0, pi/2}; the endpoints
        // of each scan are the exact corners
        for &(t, s, c) in &edge {
            for (fixed, fs, fc) in [(0.0, 0.0, 1.0), (FRAC_PI_2, 0.0, -1.0)] {
                best.offer(block.eval(fc, fs, c, s), l, fixed, t, MinMethod::Boundary);
                best.offer(block.eval(c, s, fc, fs), l, t, fixed, MinMethod::Boundary);
            }
        }

        for &(t1, s1, c1) in &grid {
            for &(t2, s2, c2) in &grid {
                best.offer(block.eval(c1, s1, c2, s2), l, t1, t2, MinMethod::GridFallback);
            }
        }
    }
    best.inner.expect("admissible block range is never empty")
}

fn trig_table(angles: &[f64]) -> Vec<(f64, f64, f64)> {
    angles
        .iter()
        .map(|&t| {
            let (s, c) = (2.0 * t).sin_cos();
            (t, s, c)
        })
        .collect()
}

/// `true` iff the witness is non-negative (up to `slack`) on every state of
/// depth below `k`.
pub fn is_feasible(params: &WitnessParams, slack: f64) -> bool {
    min_f(params).f_min >= -slack
}

/// Exact minimum of the witness objective over all admissible blocks,
/// computed from the closed-form per-block profile.
pub fn exact_min_f(params: &WitnessParams) -> f64 {
    params
        .l_range()
        .map(|l| Block::new(params, l).profile_min().0)
        .fold(f64::INFINITY, f64::min)
}

fn exactly_feasible(params: &WitnessParams, tol: f64) -> bool {
    // f(l, t1, t2) = f(N - l, t2, t1), so half the block range suffices
    let range = params.l_range();
    let (lo, hi) = (*range.start(), *range.end());
    let half = hi.min(params.n / 2).max(lo);
    (lo..=half).all(|l| Block::new(params, l).profile_min().0 >= -tol)
}

/// `alpha p0 + beta p1 + gamma p2 - F`.
pub fn witness_value(params: &WitnessParams, est: &Populations) -> f64 {
    params.alpha * est.p0 + params.beta * est.p1 + params.gamma * est.p2 - est.fidelity
}

/// Grid settings of the coefficient search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSettings {
    pub beta_step: f64,
    pub alpha_log_min: f64,
    pub alpha_log_points: usize,
    pub alpha_lin_step: f64,
    pub gamma_max: f64,
    pub gamma_tol: f64,
    /// Resolution gain of the single local refinement around the best cell.
    pub refine_factor: usize,
    /// Slack for the final feasibility check with [`min_f`].
    pub final_slack: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            beta_step: 0.005,
            alpha_log_min: 1e-5,
            alpha_log_points: 40,
            alpha_lin_step: 0.01,
            gamma_max: 100.0,
            gamma_tol: 1e-6,
            refine_factor: 10,
            final_slack: 1e-9,
        }
    }
}

impl SearchSettings {
    fn alpha_grid(&self) -> Vec<f64> {
        let mut grid = vec![0.0];
        let lmin = self.alpha_log_min.ln();
        let m = self.alpha_log_points;
        for i in 0..m {
            let t = if m > 1 { i as f64 / (m - 1) as f64 } else { 1.0 };
            grid.push((lmin * (1.0 - t)).exp());
        }
        let steps = (1.0 / self.alpha_lin_step).round() as usize;
        for i in 0..=steps {
            grid.push(i as f64 / steps as f64);
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        grid
    }

    fn beta_grid(&self) -> Vec<f64> {
        let steps = (1.0 / self.beta_step).round() as usize;
        (0..=steps).map(|i| i as f64 / steps as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedWitness {
    pub params: WitnessParams,
    /// Witness value on the estimate the parameters were optimized for.
    pub value: f64,
    /// `false` when no feasible coefficients give a negative value.
    pub certifiable: bool,
}

/// Smallest `gamma` in `[0, gamma_max]` making `(alpha, beta, gamma)` a valid
/// witness, located by bisection (feasibility is monotone in `gamma`).
fn minimal_gamma(base: &WitnessParams, settings: &SearchSettings) -> Option<f64> {
    const TOL: f64 = 1e-13;
    if !exactly_feasible(&base.with_gamma(settings.gamma_max), TOL) {
        return None;
    }
    if exactly_feasible(&base.with_gamma(0.0), TOL) {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0, settings.gamma_max);
    while hi - lo > settings.gamma_tol {
        let mid = 0.5 * (lo + hi);
        if exactly_feasible(&base.with_gamma(mid), TOL) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn evaluate_cell(
    alpha: f64,
    beta: f64,
    k: usize,
    n: usize,
    est: &Populations,
    settings: &SearchSettings,
) -> Option<(f64, WitnessParams)> {
    let base = WitnessParams { alpha, beta, gamma: 0.0, k, n };
    let gamma = minimal_gamma(&base, settings)?;
    let params = base.with_gamma(gamma);
    Some((witness_value(&params, est), params))
}

/// Chooses feasible `(alpha, beta, gamma)` minimizing the witness value on
/// `est` for depth `k` among `n` parties.
///
/// Outer grid over `(alpha, beta)`, minimal feasible `gamma` by bisection,
/// then one refinement pass at `refine_factor` times the resolution around
/// the best cell. The result is checked with [`min_f`]; if that check is
/// short by more than `final_slack`, `gamma` is raised until it passes.
pub fn optimize_params(est: &Populations, k: usize, n: usize) -> Result<OptimizedWitness> {
    optimize_params_with(est, k, n, &SearchSettings::default())
}

pub fn optimize_params_with(
    est: &Populations,
    k: usize,
    n: usize,
    settings: &SearchSettings,
) -> Result<OptimizedWitness> {
    WitnessParams::new(0.0, 0.0, 0.0, k, n)?;
    for (name, v) in [("p0", est.p0), ("p1", est.p1), ("p2", est.p2), ("F", est.fidelity)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")));
        }
    }

    let alphas = settings.alpha_grid();
    let betas = settings.beta_grid();
    let mut best: Option<(f64, WitnessParams, usize, usize)> = None;
    for (bi, &beta) in betas.iter().enumerate() {
        for (ai, &alpha) in alphas.iter().enumerate() {
            if let Some((v, p)) = evaluate_cell(alpha, beta, k, n, est, settings) {
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, p, ai, bi));
                }
            }
        }
    }
    let (mut value, mut params, ai, bi) = best.ok_or_else(|| {
        Error::InvalidArgument(format!("no feasible witness coefficients on the grid (k={k}, n={n})"))
    })?;

    let fine = settings.refine_factor.max(1);
    let lo_a = alphas[ai.saturating_sub(1)];
    let hi_a = alphas[(ai + 1).min(alphas.len() - 1)];
    let mut fine_alphas = linspace(lo_a, alphas[ai], fine + 1);
    fine_alphas.extend(linspace(alphas[ai], hi_a, fine + 1).into_iter().skip(1));
    let b0 = betas[bi];
    let fine_betas: Vec<f64> = (0..=2 * fine)
        .map(|i| b0 + settings.beta_step * (i as f64 - fine as f64) / fine as f64)
        .filter(|b| (0.0..=1.0).contains(b))
        .collect();
    for &beta in &fine_betas {
        for &alpha in &fine_alphas {
            if let Some((v, p)) = evaluate_cell(alpha, beta, k, n, est, settings) {
                if v < value {
                    value = v;
                    params = p;
                }
            }
        }
    }

    let mut bump = settings.gamma_tol;
    while !is_feasible(&params, settings.final_slack) {
        params.gamma += bump;
        bump *= 2.0;
        if params.gamma > 2.0 * settings.gamma_max {
            return Err(Error::InvalidArgument("failed to certify optimized witness feasibility".into()));
        }
    }
    let value = witness_value(&params, est);
    Ok(OptimizedWitness { params, value, certifiable: value < 0.0 })
}

/// One row of the depth scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthScanEntry {
    pub k: usize,
    pub optimized: OptimizedWitness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthCertificate {
    pub n: usize,
    /// Certified depth, `None` if no `k >= min_depth(n)` could be certified.
    pub k: Option<usize>,
    pub params: Option<WitnessParams>,
    pub witness_value: Option<f64>,
    /// Confidence that the witness is negative at the certified depth.
    pub confidence: Option<f64>,
    /// Every depth tried, from `n` downward.
    pub scan: Vec<DepthScanEntry>,
}

impl DepthCertificate {
    pub fn certified(&self) -> bool {
        self.k.is_some()
    }
}

/// Scans `k` from `n` down to [`min_depth`] and certifies the first depth
/// whose optimized witness value is negative.
pub fn certify_depth<F>(est: &Populations, n: usize, confidence_fn: F) -> Result<DepthCertificate>
where
    F: FnMut(&WitnessParams) -> Result<f64>,
{
    certify_depth_with(est, n, &SearchSettings::default(), 0.0, confidence_fn)
}

/// As [`certify_depth`], additionally requiring the confidence returned by
/// `confidence_fn` to reach `min_confidence` before a depth is accepted.
pub fn certify_depth_with<F>(
    est: &Populations,
    n: usize,
    settings: &SearchSettings,
    min_confidence: f64,
    mut confidence_fn: F,
) -> Result<DepthCertificate>
where
    F: FnMut(&WitnessParams) -> Result<f64>,
{
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} must be at least 2")));
    }
    let mut cert = DepthCertificate {
        n,
        k: None,
        params: None,
        witness_value: None,
        confidence: None,
        scan: Vec::new(),
    };
    for k in (min_depth(n)..=n).rev() {
        let opt = optimize_params_with(est, k, n, settings)?;
        cert.scan.push(DepthScanEntry { k, optimized: opt });
        if !opt.certifiable {
            continue;
        }
        let confidence = confidence_fn(&opt.params)?;
        if confidence >= min_confidence {
            cert.k = Some(k);
            cert.params = Some(opt.params);
            cert.witness_value = Some(opt.value);
            cert.confidence = Some(confidence);
            break;
        }
    }
    Ok(cert)
}
