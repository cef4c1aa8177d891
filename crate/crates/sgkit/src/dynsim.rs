//! Fixed-step simulation of interconnections between a contracting
//! subsystem `x` and a wandering subsystem `z`, plus the trajectory
//! diagnostics used to confront simulations with the analytical
//! certificates: set distances, sandwich verification of the wandering
//! bound, level-crossing (hitting-time) extraction, and steady-state
//! characteristic estimation.
//!
//! The integrator is a classical fourth-order Runge–Kutta scheme with a
//! fixed step. Escape through the blow-up bound is a first-class outcome
//! (`RunStatus::Escaped`), not an error: systems with unstable invariant
//! sets legitimately produce diverging trajectories.

use std::fmt;
use std::sync::Arc;

use crate::gains::WanderingBound;
use crate::{Error, Result};

/// Default norm bound beyond which a trajectory is classified as escaped.
pub const DEFAULT_BLOWUP_BOUND: f64 = 1e9;
/// Default set-distance tolerance for the converged verdict.
pub const DEFAULT_CONV_TOL: f64 = 1e-2;
/// Per-step tolerance for the monotonicity pre-check of hitting-time
/// extraction.
pub const MONOTONICITY_TOL: f64 = 1e-9;
/// Hard cap on extracted hitting levels (guards degenerate certificates
/// that reach exactly zero).
pub const MAX_HITTING_LEVELS: usize = 10_000;

/// Invariant set `A` against which state distances are measured.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InvariantSet {
    /// The origin of the `x`-subspace, in any dimension.
    OriginPoint,
    /// A single point.
    Point {
        /// Coordinates of the point.
        center: Vec<f64>,
    },
    /// A closed Euclidean ball; distances inside the ball are zero, so a
    /// ball also encodes a thresholded (dead-zone) norm around its center.
    Ball {
        /// Center of the ball.
        center: Vec<f64>,
        /// Radius, `≥ 0`.
        radius: f64,
    },
}

impl InvariantSet {
    /// Dimension the set constrains, if fixed.
    pub fn dim(&self) -> Option<usize> {
        match self {
            InvariantSet::OriginPoint => None,
            InvariantSet::Point { center } | InvariantSet::Ball { center, .. } => {
                Some(center.len())
            }
        }
    }

    /// Validates internal consistency (finite coordinates, radius `≥ 0`).
    pub fn validate(&self) -> Result<()> {
        match self {
            InvariantSet::OriginPoint => Ok(()),
            InvariantSet::Point { center } => {
                if center.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("invariant set has non-finite center".into()));
                }
                Ok(())
            }
            InvariantSet::Ball { center, radius } => {
                if center.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("invariant set has non-finite center".into()));
                }
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::Config(format!(
                        "ball radius must be finite and non-negative; got {radius}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Euclidean distance from `x` to the invariant set `a`.
pub fn set_distance(x: &[f64], a: &InvariantSet) -> Result<f64> {
    if let Some(d) = a.dim() {
        if d != x.len() {
            return Err(Error::Domain(format!(
                "state dimension {} does not match invariant-set dimension {d}",
                x.len()
            )));
        }
    }
    Ok(set_distance_unchecked(x, a))
}

fn set_distance_unchecked(x: &[f64], a: &InvariantSet) -> f64 {
    match a {
        InvariantSet::OriginPoint => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        InvariantSet::Point { center } => x
            .iter()
            .zip(center)
            .map(|(v, c)| (v - c) * (v - c))
            .sum::<f64>()
            .sqrt(),
        InvariantSet::Ball { center, radius } => {
            let d = x
                .iter()
                .zip(center)
                .map(|(v, c)| (v - c) * (v - c))
                .sum::<f64>()
                .sqrt();
            (d - radius).max(0.0)
        }
    }
}

/// Thresholded set distance `max(‖x‖_A − delta, 0)` (a dead zone of width
/// `delta` around the set).
pub fn thresholded_distance(x: &[f64], a: &InvariantSet, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "threshold must be finite and non-negative; got {delta}"
        )));
    }
    Ok((set_distance(x, a)? - delta).max(0.0))
}

type FieldFn = Arc<dyn Fn(&[f64], &[f64], f64, &mut [f64]) + Send + Sync>;
type CertFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Interconnection of a contracting subsystem `x` with a wandering
/// subsystem `z`:
/// `ẋ = f_x(x, z, t)`, `ż = f_z(x, z, t)`, with a scalar certificate
/// `h(z)` and an invariant set `A` in the `x`-subspace.
#[derive(Clone)]
pub struct InterconnectionModel {
    /// Right-hand side of the contracting subsystem.
    pub f_x: FieldFn,
    /// Right-hand side of the wandering subsystem.
    pub f_z: FieldFn,
    /// Monotone certificate evaluated on the wandering state.
    pub h: CertFn,
    /// Invariant set of the contracting subsystem.
    pub set_a: InvariantSet,
    /// State dimensions `(dim x, dim z)`.
    pub dims: (usize, usize),
}

impl fmt::Debug for InterconnectionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InterconnectionModel")
            .field("dims", &self.dims)
            .field("set_a", &self.set_a)
            .finish()
    }
}

impl InterconnectionModel {
    /// Builds a model from closures; `dims = (n, m)` fixes the state split.
    pub fn new(
        n: usize,
        m: usize,
        f_x: impl Fn(&[f64], &[f64], f64, &mut [f64]) + Send + Sync + 'static,
        f_z: impl Fn(&[f64], &[f64], f64, &mut [f64]) + Send + Sync + 'static,
        h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        set_a: InvariantSet,
    ) -> Self {
        Self {
            f_x: Arc::new(f_x),
            f_z: Arc::new(f_z),
            h: Arc::new(h),
            set_a,
            dims: (n, m),
        }
    }
}

/// Terminal status of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum RunStatus {
    /// The full horizon was integrated.
    Completed,
    /// The state norm crossed the blow-up bound; the trajectory is kept up
    /// to and including the offending sample.
    Escaped {
        /// Time at which the bound was crossed.
        t_escape: f64,
    },
}

/// Qualitative outcome of a run with respect to the invariant set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Completed with final set distance below tolerance.
    Converged,
    /// Crossed the blow-up bound.
    Escaped,
    /// Completed but still away from the set.
    Undecided,
}

/// A fixed-step trajectory sampled at every integration step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Step size used by the integrator.
    pub dt: f64,
    /// Dimension of the contracting state.
    pub n: usize,
    /// Dimension of the wandering state.
    pub m: usize,
    /// Sample times `t0 + k·dt`, strictly increasing.
    pub times: Vec<f64>,
    states: Vec<f64>,
    /// Set distance `‖x(t_k)‖_A` per sample.
    pub dist: Vec<f64>,
    /// Certificate `h(z(t_k))` per sample.
    pub h: Vec<f64>,
    /// Terminal status of the run.
    pub status: RunStatus,
}

impl Trajectory {
    /// Number of stored samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when no samples are stored.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Full state `(x ⊕ z)` at sample `k`.
    pub fn state(&self, k: usize) -> &[f64] {
        let w = self.n + self.m;
        &self.states[k * w..(k + 1) * w]
    }

    /// Contracting state at sample `k`.
    pub fn x(&self, k: usize) -> &[f64] {
        &self.state(k)[..self.n]
    }

    /// Wandering state at sample `k`.
    pub fn z(&self, k: usize) -> &[f64] {
        &self.state(k)[self.n..]
    }

    /// Last stored sample.
    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Last sample time.
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Set distance at the last sample.
    pub fn final_dist(&self) -> f64 {
        *self.dist.last().expect("trajectory is never empty")
    }

    /// Qualitative outcome with set-distance tolerance `tol`.
    pub fn verdict(&self, tol: f64) -> Verdict {
        match self.status {
            RunStatus::Escaped { .. } => Verdict::Escaped,
            RunStatus::Completed => {
                if self.final_dist() < tol {
                    Verdict::Converged
                } else {
                    Verdict::Undecided
                }
            }
        }
    }
}

/// Options for [`integrate_with`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    /// Euclidean norm bound classifying the run as escaped.
    pub blowup_bound: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            blowup_bound: DEFAULT_BLOWUP_BOUND,
        }
    }
}

/// Integrates the interconnection with classical RK4 at fixed step `dt`
/// from `t0` to `t_end` (truncated to whole steps), recording every step.
///
/// Escape through the blow-up bound terminates the run early with a partial
/// trajectory and `RunStatus::Escaped`; a non-finite right-hand side is an
/// integration error.
pub fn integrate(
    model: &InterconnectionModel,
    x0: &[f64],
    z0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_with(model, x0, z0, t0, t_end, dt, &IntegrateOptions::default())
}

/// [`integrate`] with explicit options.
pub fn integrate_with(
    model: &InterconnectionModel,
    x0: &[f64],
    z0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let (n, m) = model.dims;
    if x0.len() != n || z0.len() != m {
        return Err(Error::Config(format!(
            "initial condition dimensions ({}, {}) do not match model dims ({n}, {m})",
            x0.len(),
            z0.len()
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("step size must be positive; got {dt}")));
    }
    if !(t_end > t0) {
        return Err(Error::Domain(format!(
            "horizon must satisfy t_end > t0; got [{t0}, {t_end}]"
        )));
    }
    if x0.iter().chain(z0.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Config("initial condition has non-finite entries".into()));
    }
    model.set_a.validate()?;
    if let Some(d) = model.set_a.dim() {
        if d != n {
            return Err(Error::Config(format!(
                "invariant set dimension {d} does not match x dimension {n}"
            )));
        }
    }
    if !(opts.blowup_bound > 0.0) {
        return Err(Error::Domain(format!(
            "blow-up bound must be positive; got {}",
            opts.blowup_bound
        )));
    }

    let w = n + m;
    let n_steps = ((t_end - t0) / dt + 1e-9).floor() as usize;
    if n_steps == 0 {
        return Err(Error::Domain(format!(
            "horizon [{t0}, {t_end}] is shorter than one step of {dt}"
        )));
    }

    let mut y = Vec::with_capacity(w);
    y.extend_from_slice(x0);
    y.extend_from_slice(z0);

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity((n_steps + 1) * w);
    let mut dist = Vec::with_capacity(n_steps + 1);
    let mut h = Vec::with_capacity(n_steps + 1);

    let mut k1 = vec![0.0; w];
    let mut k2 = vec![0.0; w];
    let mut k3 = vec![0.0; w];
    let mut k4 = vec![0.0; w];
    let mut ytmp = vec![0.0; w];

    let eval = |y: &[f64], t: f64, out: &mut [f64]| -> Result<()> {
        let (x, z) = y.split_at(n);
        let (ox, oz) = out.split_at_mut(n);
        (model.f_x)(x, z, t, ox);
        (model.f_z)(x, z, t, oz);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                t,
                message: "right-hand side returned a non-finite value".into(),
            });
        }
        Ok(())
    };

    let record = |y: &[f64],
                  t: f64,
                  times: &mut Vec<f64>,
                  states: &mut Vec<f64>,
                  dist: &mut Vec<f64>,
                  h: &mut Vec<f64>| {
        times.push(t);
        states.extend_from_slice(y);
        dist.push(set_distance_unchecked(&y[..n], &model.set_a));
        h.push((model.h)(&y[n..]));
    };

    let norm = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().sqrt();

    record(&y, t0, &mut times, &mut states, &mut dist, &mut h);
    let mut status = RunStatus::Completed;
    if norm(&y) > opts.blowup_bound {
        status = RunStatus::Escaped { t_escape: t0 };
    } else {
        for k in 0..n_steps {
            let t = t0 + k as f64 * dt;
            eval(&y, t, &mut k1)?;
            for i in 0..w {
                ytmp[i] = y[i] + 0.5 * dt * k1[i];
            }
            eval(&ytmp, t + 0.5 * dt, &mut k2)?;
            for i in 0..w {
                ytmp[i] = y[i] + 0.5 * dt * k2[i];
            }
            eval(&ytmp, t + 0.5 * dt, &mut k3)?;
            for i in 0..w {
                ytmp[i] = y[i] + dt * k3[i];
            }
            eval(&ytmp, t + dt, &mut k4)?;
            for i in 0..w {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let t_next = t0 + (k + 1) as f64 * dt;
            record(&y, t_next, &mut times, &mut states, &mut dist, &mut h);
            if norm(&y) > opts.blowup_bound {
                status = RunStatus::Escaped { t_escape: t_next };
                break;
            }
        }
    }

    Ok(Trajectory {
        dt,
        n,
        m,
        times,
        states,
        dist,
        h,
        status,
    })
}

/// Result of confronting a trajectory with the integral sandwich
/// `∫γ₁(‖x‖_A) ≤ h(z(t₀)) − h(z(t)) ≤ ∫γ₀(‖x‖_A)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SandwichReport {
    /// True when the sandwich holds within `tol` at every sample.
    pub pass: bool,
    /// Largest violation of either inequality (0 when none).
    pub worst_violation: f64,
    /// Sample time of the worst violation.
    pub worst_time: f64,
    /// Tolerance used, `C·dt²`.
    pub tol: f64,
    /// Final value of the lower integral `∫γ₁`.
    pub lower_total: f64,
    /// Final value of the upper integral `∫γ₀`.
    pub upper_total: f64,
    /// Final certificate drop `h(z(t₀)) − h(z(t_end))`.
    pub drop_total: f64,
}

/// Verifies the integral sandwich along a simulated trajectory using
/// trapezoidal quadrature, with tolerance `C·dt²` where
/// `C = max(1, t_span)`.
pub fn verify_wandering_bound(traj: &Trajectory, wb: &WanderingBound) -> Result<SandwichReport> {
    let span = traj.final_time() - traj.times[0];
    verify_wandering_bound_with(traj, wb, span.max(1.0))
}

/// [`verify_wandering_bound`] with an explicit quadrature constant `C`.
pub fn verify_wandering_bound_with(
    traj: &Trajectory,
    wb: &WanderingBound,
    c_tol: f64,
) -> Result<SandwichReport> {
    if traj.len() < 2 {
        return Err(Error::Diagnostic(
            "sandwich verification needs at least two samples".into(),
        ));
    }
    if !(c_tol > 0.0) || !c_tol.is_finite() {
        return Err(Error::Domain(format!(
            "quadrature constant must be positive; got {c_tol}"
        )));
    }
    let tol = c_tol * traj.dt * traj.dt;
    let h0 = traj.h[0];
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    let mut prev_g1 = wb.gamma1.eval(traj.dist[0])?;
    let mut prev_g0 = wb.gamma0.eval(traj.dist[0])?;
    let mut worst_violation = 0.0f64;
    let mut worst_time = traj.times[0];
    for k in 1..traj.len() {
        let g1 = wb.gamma1.eval(traj.dist[k])?;
        let g0 = wb.gamma0.eval(traj.dist[k])?;
        let half_dt = 0.5 * (traj.times[k] - traj.times[k - 1]);
        lower += half_dt * (prev_g1 + g1);
        upper += half_dt * (prev_g0 + g0);
        prev_g1 = g1;
        prev_g0 = g0;
        let drop = h0 - traj.h[k];
        let violation = (lower - drop).max(drop - upper);
        if violation > worst_violation {
            worst_violation = violation;
            worst_time = traj.times[k];
        }
    }
    Ok(SandwichReport {
        pass: worst_violation <= tol,
        worst_violation,
        worst_time,
        tol,
        lower_total: lower,
        upper_total: upper,
        drop_total: h0 - traj.h[traj.len() - 1],
    })
}

/// One extracted level crossing of the certificate.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct HittingTime {
    /// Index `i` of the threshold `σ_i`.
    pub level_index: usize,
    /// Absolute level `σ_i·h(z₀)`.
    pub level: f64,
    /// First time the certificate reaches the level (linear interpolation
    /// between samples).
    pub time: f64,
}

/// Extracts the hitting times of the levels `σ_i·h_z0` from a trajectory's
/// certificate series. See [`hitting_times_series`].
pub fn hitting_times(
    traj: &Trajectory,
    sigma: &dyn Fn(usize) -> f64,
    h_z0: f64,
) -> Result<Vec<HittingTime>> {
    hitting_times_series(&traj.times, &traj.h, sigma, h_z0)
}

/// Extracts the first crossing time of each level `σ_i·h_z0` (with
/// `σ` strictly decreasing and `h_z0 > 0`) from a non-increasing sampled
/// series, interpolating linearly between samples.
///
/// The series must be non-increasing up to [`MONOTONICITY_TOL`] per step;
/// otherwise a diagnostic error is returned, because hitting times of a
/// non-monotone certificate are not meaningful. Levels the series never
/// reaches terminate the extraction.
pub fn hitting_times_series(
    times: &[f64],
    h: &[f64],
    sigma: &dyn Fn(usize) -> f64,
    h_z0: f64,
) -> Result<Vec<HittingTime>> {
    if times.len() != h.len() || times.len() < 2 {
        return Err(Error::Diagnostic(
            "hitting-time extraction needs matching series with at least two samples".into(),
        ));
    }
    if !(h_z0 > 0.0) || !h_z0.is_finite() {
        return Err(Error::Domain(format!(
            "hitting-time extraction requires h_z0 > 0; got {h_z0}"
        )));
    }
    for k in 1..h.len() {
        if h[k] > h[k - 1] + MONOTONICITY_TOL {
            return Err(Error::Diagnostic(format!(
                "certificate increased by {:.3e} at t = {}; hitting times are undefined \
                 for non-monotone certificates",
                h[k] - h[k - 1],
                times[k]
            )));
        }
    }
    let h_end = *h.last().expect("nonempty");
    let mut out = Vec::new();
    let mut scan = 0usize;
    let mut prev_sigma = f64::INFINITY;
    for i in 0..MAX_HITTING_LEVELS {
        let s = sigma(i);
        if !(s > 0.0) || !s.is_finite() || s >= prev_sigma {
            return Err(Error::Domain(format!(
                "threshold sequence must be positive and strictly decreasing; \
                 sigma({i}) = {s} after {prev_sigma}"
            )));
        }
        prev_sigma = s;
        let level = s * h_z0;
        if h_end > level {
            break; // this and all smaller levels are never reached
        }
        // The certificate is non-increasing, so crossing indices only move
        // forward; resume the scan where the previous level left off.
        while scan < h.len() && h[scan] > level {
            scan += 1;
        }
        if scan >= h.len() {
            break;
        }
        let time = if scan == 0 {
            times[0]
        } else {
            let (h_prev, h_cur) = (h[scan - 1], h[scan]);
            if h_prev - h_cur <= 0.0 {
                times[scan]
            } else {
                times[scan - 1] + (times[scan] - times[scan - 1]) * (h_prev - level) / (h_prev - h_cur)
            }
        };
        out.push(HittingTime {
            level_index: i,
            level,
            time,
        });
        // Stop once the data resolution is exhausted: crossings in the final
        // interval, or a certificate that has reached zero, pin every
        // remaining level to the same instant.
        if scan >= h.len() - 1 || h[scan] <= 0.0 {
            break;
        }
    }
    Ok(out)
}

/// Steady-state measurement for one constant input.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SteadyStateSample {
    /// Constant input magnitude applied.
    pub input: f64,
    /// Trailing-window mean of the set distance (the asymptotic-gain
    /// surrogate).
    pub limit_estimate: f64,
    /// Relative standard deviation over the trailing window.
    pub rel_std: f64,
    /// Windowed integral of the set distance over the penultimate window.
    pub window_integral_prev: f64,
    /// Windowed integral of the set distance over the final window.
    pub window_integral_last: f64,
    /// True when the pointwise settling criterion held.
    pub settled: bool,
    /// True when the window-integral stationarity criterion held.
    pub settled_on_average: bool,
    /// True when the run escaped before settling.
    pub escaped: bool,
}

/// Sampled steady-state characteristic of a system family.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CharacteristicEstimate {
    /// Per-input measurements in input order.
    pub samples: Vec<SteadyStateSample>,
    /// Inputs whose settled limit lies below `tol_zero` (the estimated
    /// zero set of the characteristic).
    pub zero_inputs: Vec<f64>,
    /// Zero-set tolerance used.
    pub tol_zero: f64,
}

/// Options for [`estimate_steady_state_characteristic`].
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateOptions {
    /// Integration step.
    pub dt: f64,
    /// Relative settling tolerance (pointwise and window-integral).
    pub tol_settle: f64,
    /// Threshold below which a settled limit counts as zero.
    pub tol_zero: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            tol_settle: 1e-4,
            tol_zero: 1e-3,
        }
    }
}

/// Estimates the steady-state characteristic of a family of systems
/// parameterized by a constant input: for each input, integrates the model
/// over `t_settle` plus two averaging windows of `t_avg`, and reports the
/// trailing-window mean of the set distance together with two settling
/// criteria (pointwise relative deviation and window-integral
/// stationarity).
///
/// Non-settling or escaping inputs are flagged in their sample, not treated
/// as errors.
pub fn estimate_steady_state_characteristic(
    factory: &(dyn Fn(f64) -> Result<(InterconnectionModel, Vec<f64>, Vec<f64>)> + Sync),
    inputs: &[f64],
    t_settle: f64,
    t_avg: f64,
    opts: &SteadyStateOptions,
) -> Result<CharacteristicEstimate> {
    if !(t_settle >= 0.0) || !(t_avg > 0.0) {
        return Err(Error::Domain(format!(
            "need t_settle >= 0 and t_avg > 0; got {t_settle}, {t_avg}"
        )));
    }
    let mut samples = Vec::with_capacity(inputs.len());
    let mut zero_inputs = Vec::new();
    for &input in inputs {
        let (model, x0, z0) = factory(input)?;
        let traj = integrate(&model, &x0, &z0, 0.0, t_settle + 2.0 * t_avg, opts.dt)?;
        if matches!(traj.status, RunStatus::Escaped { .. }) {
            samples.push(SteadyStateSample {
                input,
                limit_estimate: f64::INFINITY,
                rel_std: f64::INFINITY,
                window_integral_prev: f64::INFINITY,
                window_integral_last: f64::INFINITY,
                settled: false,
                settled_on_average: false,
                escaped: true,
            });
            continue;
        }
        let len = traj.len();
        let win = ((t_avg / opts.dt).round() as usize).max(2);
        let last = &traj.dist[len - win..];
        let prev = &traj.dist[len - 2 * win..len - win];
        let mean = last.iter().sum::<f64>() / last.len() as f64;
        let var = last.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / last.len() as f64;
        let rel_std = var.sqrt() / mean.max(f64::MIN_POSITIVE);
        let trapz = |w: &[f64]| -> f64 {
            let mut s = 0.0;
            for k in 1..w.len() {
                s += 0.5 * opts.dt * (w[k - 1] + w[k]);
            }
            s
        };
        let i_prev = trapz(prev);
        let i_last = trapz(last);
        let stationarity =
            (i_last - i_prev).abs() / i_last.abs().max(i_prev.abs()).max(f64::MIN_POSITIVE);
        let settled = rel_std < opts.tol_settle;
        let settled_on_average = stationarity < opts.tol_settle;
        if (settled || settled_on_average) && mean < opts.tol_zero {
            zero_inputs.push(input);
        }
        samples.push(SteadyStateSample {
            input,
            limit_estimate: mean,
            rel_std,
            window_integral_prev: i_prev,
            window_integral_last: i_last,
            settled,
            settled_on_average,
            escaped: false,
        });
    }
    Ok(CharacteristicEstimate {
        samples,
        zero_inputs,
        tol_zero: opts.tol_zero,
    })
}

/// Bundled example systems used across tests and the command-line tool.
pub mod fixtures {
    use super::{InterconnectionModel, InvariantSet};

    /// Planar saddle-node archetype with the unstable direction driven by
    /// the contracting state:
    /// `ẋ₁ = −x₁ + x₂`, `ẋ₂ = ε + γ·x₁²`, split as `x = x₁`, `z = x₂`,
    /// certificate `h(z) = −x₂`.
    ///
    /// At `ε = 0` the origin is a weak attractor: initial conditions with
    /// `x₂(0) < 0` converge while `x₂(0) > 0` escape in finite time.
    pub fn saddle_node_coupled(epsilon: f64, gamma: f64) -> InterconnectionModel {
        InterconnectionModel::new(
            1,
            1,
            |x, z, _t, out| out[0] = -x[0] + z[0],
            move |x, _z, _t, out| out[0] = epsilon + gamma * x[0] * x[0],
            |z| -z[0],
            InvariantSet::OriginPoint,
        )
    }

    /// Saddle-node archetype with self-driven unstable direction:
    /// `ẋ₁ = −x₁ + x₂`, `ẋ₂ = ε + γ·x₂²`; same split and certificate as
    /// [`saddle_node_coupled`].
    ///
    /// At `ε = 0` the plane `x₂ = 0` is invariant, so trajectories started
    /// on it decay along `x₁`.
    pub fn saddle_node_decoupled(epsilon: f64, gamma: f64) -> InterconnectionModel {
        InterconnectionModel::new(
            1,
            1,
            |x, z, _t, out| out[0] = -x[0] + z[0],
            move |_x, z, _t, out| out[0] = epsilon + gamma * z[0] * z[0],
            |z| -z[0],
            InvariantSet::OriginPoint,
        )
    }

    /// Two-dimensional cascade with a non-increasing certificate:
    /// `ẋ₁ = −λ₁·x₁ + c₁·x₂`, `ẋ₂ = −c₂·|x₁|`, split as `x = x₁`,
    /// `z = x₂`, certificate `h(z) = x₂`.
    ///
    /// The `x`-subsystem admits the exponential envelope
    /// `β_t(t) = e^{−λ₁ t}` with input gain `c = c₁/λ₁`, and the
    /// certificate satisfies the Lipschitz sandwich with rate `c₂`.
    pub fn cascade(lambda1: f64, c1: f64, c2: f64) -> InterconnectionModel {
        InterconnectionModel::new(
            1,
            1,
            move |x, z, _t, out| out[0] = -lambda1 * x[0] + c1 * z[0],
            move |x, _z, _t, out| out[0] = -c2 * x[0].abs(),
            |z| z[0],
            InvariantSet::OriginPoint,
        )
    }

    /// Scalar linear decay `ẋ = −k·x` with an empty wandering part; used
    /// for integrator-order measurements.
    pub fn linear_decay(k: f64) -> InterconnectionModel {
        InterconnectionModel::new(
            1,
            0,
            move |x, _z, _t, out| out[0] = -k * x[0],
            |_x, _z, _t, _out| {},
            |_z| 0.0,
            InvariantSet::OriginPoint,
        )
    }

    /// Driven scalar decay `ẋ = −k·x + u` with constant input; its
    /// steady-state characteristic is `|u|/k`.
    pub fn linear_decay_driven(k: f64, u: f64) -> InterconnectionModel {
        InterconnectionModel::new(
            1,
            0,
            move |x, _z, _t, out| out[0] = -k * x[0] + u,
            |_x, _z, _t, _out| {},
            |_z| 0.0,
            InvariantSet::OriginPoint,
        )
    }
}
