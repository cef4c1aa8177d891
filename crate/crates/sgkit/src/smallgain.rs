//! Constructive small-gain machinery: dwell-time schedules, closed-form
//! trapping-region tests for separable envelopes, the general recursive
//! condition checker, the optimized small-gain constant `G`, and the
//! admissible adaptation-gain bound for identifiers.
//!
//! The closed-form path and the general checker evaluate the *same*
//! membership inequality, so their verdicts agree bit-for-bit on schedules
//! generated by [`GeneralScheduleSpec::from_appendix`].

use std::sync::Arc;

use crate::gains::{beta_t_inverse, ContractionEnvelope, ScalarFn, WanderingBound};
use crate::{Error, Result};

/// Absolute slack granted to non-strict (`≤`) condition checks.
pub const CONDITION_SLACK: f64 = 1e-12;
/// Default number of indices probed by [`check_theorem_conditions`].
pub const DEFAULT_N_PROBE: usize = 200;
/// Partial-sum target certifying dwell-time divergence.
pub const DIVERGENCE_BOUND: f64 = 1e6;
/// Iteration cap for the dwell-time divergence probe.
pub const DIVERGENCE_MAX_TERMS: usize = 10_000_000;

/// Free parameters of the geometric dwell-time schedule: contraction budget
/// `d ∈ (0, 1)` and level ratio `κ > 1`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ScheduleParams {
    /// Per-stage contraction budget, `0 < d < 1`.
    pub d: f64,
    /// Ratio between consecutive level-set thresholds, `κ > 1`.
    pub kappa: f64,
}

impl ScheduleParams {
    /// Validates `d ∈ (0, 1)` and `κ > 1`.
    pub fn new(d: f64, kappa: f64) -> Result<Self> {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Domain(format!(
                "schedule parameter d must lie in (0, 1); got {d}"
            )));
        }
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!(
                "schedule parameter kappa must exceed 1; got {kappa}"
            )));
        }
        Ok(Self { d, kappa })
    }
}

/// Geometric dwell-time schedule derived from a contraction envelope.
///
/// Thresholds decay as `σ_i = κ^{−i}`, every stage shrinks the envelope by
/// `ξ* = d / (κ·β_t(0))`, and the constant dwell time `τ*` solves
/// `β_t(τ*) = ξ*·β_t(0)`. The induced uniform rate constant is
/// `Δ₀ = (κ − 1) / (κ·τ*)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Schedule {
    /// Contraction budget used to build the schedule.
    pub d: f64,
    /// Level ratio used to build the schedule.
    pub kappa: f64,
    /// Per-stage envelope shrink factor `ξ* = d / (κ·β_t(0))`.
    pub xi_star: f64,
    /// Constant dwell time `τ* = β_t⁻¹(d / κ)`.
    pub tau_star: f64,
    /// Uniform rate constant `Δ₀ = (κ − 1) / (κ·τ*)`.
    pub delta0: f64,
}

impl Schedule {
    /// Level threshold `σ_i = κ^{−i}`.
    pub fn sigma(&self, i: u32) -> f64 {
        self.kappa.powi(-(i as i32))
    }
}

/// Builds the geometric schedule for `env` and `params`.
///
/// Requires `β_t(0) ≥ 1` so that every shrink factor satisfies `ξ* ≤ 1`
/// and `d/κ` lies in the range of `β_t`.
pub fn build_schedule(env: &ContractionEnvelope, params: &ScheduleParams) -> Result<Schedule> {
    let bt0 = env.beta_t0()?;
    if !(bt0 >= 1.0) {
        return Err(Error::Domain(format!(
            "schedule construction requires beta_t(0) >= 1; got beta_t(0) = {bt0}"
        )));
    }
    let xi_star = params.d / (params.kappa * bt0);
    // xi_star * beta_t(0) = d / kappa < 1 <= beta_t(0), so the target is in
    // range of the time factor.
    let tau_star = beta_t_inverse(env, params.d / params.kappa)?;
    if !(tau_star > 0.0) || !tau_star.is_finite() {
        return Err(Error::Evaluation(format!(
            "dwell time tau* must be positive and finite; got {tau_star}"
        )));
    }
    let delta0 = (params.kappa - 1.0) / (params.kappa * tau_star);
    Ok(Schedule {
        d: params.d,
        kappa: params.kappa,
        xi_star,
        tau_star,
        delta0,
    })
}

/// Closed-form transient bounds for the geometric schedule:
/// `B₁ = β_t(0)·‖x₀‖` and `B₂ = β_t(0)·c·|h(z₀)|·(1 + κ/(1 − d))`.
pub fn compute_b1_b2(
    env: &ContractionEnvelope,
    params: &ScheduleParams,
    x0_norm: f64,
    h_z0: f64,
) -> Result<(f64, f64)> {
    if !(x0_norm >= 0.0) || !x0_norm.is_finite() {
        return Err(Error::Domain(format!(
            "x0_norm must be a finite non-negative number; got {x0_norm}"
        )));
    }
    if !h_z0.is_finite() {
        return Err(Error::Domain(format!("h_z0 must be finite; got {h_z0}")));
    }
    let bt0 = env.beta_t0()?;
    let b1 = bt0 * x0_norm;
    let b2 = bt0 * env.c * h_z0.abs() * (1.0 + params.kappa / (1.0 - params.d));
    if !b1.is_finite() || !b2.is_finite() {
        return Err(Error::Evaluation(format!(
            "transient bounds overflowed: B1 = {b1}, B2 = {b2}"
        )));
    }
    Ok((b1, b2))
}

/// Verdict of the closed-form trapping-region membership test.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TrappingVerdict {
    /// Whether the initial condition is certified to stay trapped.
    pub member: bool,
    /// `threshold − D_γ₀`: positive distance to the admissibility boundary.
    pub margin: f64,
    /// Largest admissible `D_γ₀` for this initial condition.
    pub threshold: f64,
    /// Explanation when the test is decided structurally rather than by the
    /// inequality (e.g. non-positive `h(z₀)`).
    pub reason: Option<String>,
}

/// Closed-form trapping test for separable envelopes with a Lipschitz
/// wandering bound: certifies
/// `D_γ₀·(B₁ + B₂ + c·|h(z₀)|) ≤ Δ₀·h(z₀)`.
///
/// Initial conditions with `h(z₀) ≤ 0` are rejected as non-members with an
/// explanatory reason: the certificate spends `h(z₀)` as a budget, so a
/// non-positive budget certifies nothing.
pub fn check_trapping_separable(
    env: &ContractionEnvelope,
    wb: &WanderingBound,
    params: &ScheduleParams,
    x0_norm: f64,
    h_z0: f64,
) -> Result<TrappingVerdict> {
    let d_gamma0 = wb.d_gamma0.ok_or_else(|| {
        Error::Config(
            "closed-form trapping test requires a Lipschitz wandering bound (d_gamma0 set)".into(),
        )
    })?;
    if !(d_gamma0 >= 0.0) || !d_gamma0.is_finite() {
        return Err(Error::Domain(format!(
            "d_gamma0 must be finite and non-negative; got {d_gamma0}"
        )));
    }
    if h_z0 <= 0.0 {
        return Ok(TrappingVerdict {
            member: false,
            margin: -d_gamma0,
            threshold: 0.0,
            reason: Some(format!(
                "h(z0) = {h_z0} is not positive, so no decrease budget is available"
            )),
        });
    }
    let schedule = build_schedule(env, params)?;
    let (b1, b2) = compute_b1_b2(env, params, x0_norm, h_z0)?;
    let denom = b1 + b2 + env.c * h_z0.abs();
    // Same literal inequality as the general checker's membership condition,
    // so both paths agree exactly on schedules they share.
    let member = d_gamma0 * denom <= schedule.delta0 * h_z0 + CONDITION_SLACK;
    let threshold = if denom > 0.0 {
        schedule.delta0 * h_z0 / denom
    } else {
        f64::INFINITY
    };
    Ok(TrappingVerdict {
        member,
        margin: threshold - d_gamma0,
        threshold,
        reason: None,
    })
}

/// Small-gain constant
/// `G = β_t⁻¹(d/κ) · κ/(κ−1) · (β_t(0)·(1 + κ/(1−d)) + 1)`.
///
/// For exponential envelopes the inverse evaluates in closed form to
/// `ln(D_β·κ/d)/λ`, which reduces to `ln(κ/d)/λ` in the common
/// normalized case `D_β = 1`.
pub fn small_gain_g(env: &ContractionEnvelope, params: &ScheduleParams) -> Result<f64> {
    let bt0 = env.beta_t0()?;
    if !(bt0 >= 1.0) {
        return Err(Error::Domain(format!(
            "small-gain constant requires beta_t(0) >= 1; got {bt0}"
        )));
    }
    let tau_star = beta_t_inverse(env, params.d / params.kappa)?;
    let g = tau_star * (params.kappa / (params.kappa - 1.0))
        * (bt0 * (1.0 + params.kappa / (1.0 - params.d)) + 1.0);
    if !g.is_finite() {
        return Err(Error::Evaluation(format!(
            "small-gain constant overflowed at d = {}, kappa = {}",
            params.d, params.kappa
        )));
    }
    Ok(g)
}

/// Result of minimizing the small-gain constant over `(d, κ)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GOptimum {
    /// Minimal value of `G` found.
    pub g_star: f64,
    /// Optimal contraction budget.
    pub d_opt: f64,
    /// Optimal level ratio.
    pub kappa_opt: f64,
}

/// Minimizes `G(d, κ)` for `env` by coarse grid search (128×128 points,
/// `d` linear in `[0.01, 0.99]`, `κ` log-spaced in `[1.01, 100]`) followed
/// by coordinate descent with golden-section line searches.
///
/// Parameter points where `G` is undefined (e.g. `d/κ` below the infimum
/// of a tabulated `β_t`) are skipped. The refined optimum is deterministic:
/// grid ties resolve to the first point in row-major order.
pub fn optimize_g(env: &ContractionEnvelope) -> Result<GOptimum> {
    const GRID: usize = 128;
    const MAX_SWEEPS: usize = 200;
    const D_LO: f64 = 1e-4;
    const D_HI: f64 = 1.0 - 1e-4;
    const K_LO: f64 = 1.0 + 1e-4;
    const K_HI: f64 = 1e3;

    let eval = |d: f64, kappa: f64| -> Option<f64> {
        let params = ScheduleParams::new(d, kappa).ok()?;
        small_gain_g(env, &params).ok().filter(|g| g.is_finite())
    };

    let mut best = f64::INFINITY;
    let (mut d_best, mut k_best) = (f64::NAN, f64::NAN);
    for i in 0..GRID {
        let d = 0.01 + (0.99 - 0.01) * i as f64 / (GRID - 1) as f64;
        for j in 0..GRID {
            let kappa =
                (1.01f64.ln() + (100.0f64.ln() - 1.01f64.ln()) * j as f64 / (GRID - 1) as f64)
                    .exp();
            if let Some(g) = eval(d, kappa) {
                if g < best {
                    best = g;
                    d_best = d;
                    k_best = kappa;
                }
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::Evaluation(
            "small-gain constant is undefined on the entire search grid".into(),
        ));
    }

    // Golden-section line search assuming unimodality along each coordinate.
    let golden = |f: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut b: f64| -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = f(x1).unwrap_or(f64::INFINITY);
        let mut f2 = f(x2).unwrap_or(f64::INFINITY);
        for _ in 0..120 {
            if (b - a).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()) {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = f(x1).unwrap_or(f64::INFINITY);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = f(x2).unwrap_or(f64::INFINITY);
            }
        }
        if f1 <= f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    };

    let mut iterations = 0usize;
    for _ in 0..MAX_SWEEPS {
        iterations += 1;
        let k_fix = k_best;
        let (d_new, _) = golden(&|d| eval(d, k_fix), D_LO, D_HI);
        let d_fix = d_new;
        // Search kappa in log coordinates for conditioning.
        let (u_new, _) = golden(&|u| eval(d_fix, u.exp()), K_LO.ln(), K_HI.ln());
        let k_new = u_new.exp();
        let g_new = eval(d_fix, k_new).unwrap_or(f64::INFINITY);
        let improved = best - g_new;
        if g_new < best {
            best = g_new;
            d_best = d_fix;
            k_best = k_new;
        }
        if improved.abs() <= 1e-10 * best.max(1.0) {
            return Ok(GOptimum {
                g_star: best,
                d_opt: d_best,
                kappa_opt: k_best,
            });
        }
    }
    Err(Error::OptimizerNonConvergence {
        iterations,
        best,
        d: d_best,
        kappa: k_best,
    })
}

/// Existence-style small-gain test: `D_γ₀ · c · G < 1`, **strict**, with no
/// numerical slack — a product equal to 1 fails.
pub fn check_small_gain_existence(d_gamma0: f64, c: f64, g: f64) -> Result<bool> {
    for (name, v) in [("d_gamma0", d_gamma0), ("c", c), ("g", g)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "{name} must be finite and non-negative; got {v}"
            )));
        }
    }
    Ok(d_gamma0 * c * g < 1.0)
}

/// Radius bound of the certified trapping region in the initial state.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TrappingX0Bound {
    /// Largest certified initial norm `‖x₀‖_A` (negative when empty).
    pub x0_max: f64,
    /// True when the certified region is empty for these parameters.
    pub empty: bool,
}

/// Largest initial norm certified by the closed-form trapping test:
/// solving the membership inequality for `‖x₀‖` gives
/// `x0_max = [Δ₀/D_γ₀ − c·(β_t(0)·(1 + κ/(1−d)) + 1)] · h(z₀) / β_t(0)`.
///
/// A negative result is not an error: it is returned with the
/// `empty`-region flag set.
pub fn trapping_x0_bound(
    env: &ContractionEnvelope,
    params: &ScheduleParams,
    d_gamma0: f64,
    c: f64,
    h_z0: f64,
) -> Result<TrappingX0Bound> {
    if !(d_gamma0 > 0.0) || !d_gamma0.is_finite() {
        return Err(Error::Domain(format!(
            "d_gamma0 must be positive; got {d_gamma0}"
        )));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("c must be non-negative; got {c}")));
    }
    if !(h_z0 > 0.0) || !h_z0.is_finite() {
        return Err(Error::Domain(format!(
            "trapping radius bound requires h(z0) > 0; got {h_z0}"
        )));
    }
    let schedule = build_schedule(env, params)?;
    let bt0 = env.beta_t0()?;
    let x0_max = (schedule.delta0 / d_gamma0
        - c * (bt0 * (1.0 + params.kappa / (1.0 - params.d)) + 1.0))
        * h_z0
        / bt0;
    Ok(TrappingX0Bound {
        x0_max,
        empty: x0_max < 0.0,
    })
}

/// Admissible adaptation gain for identifiers whose excitation Lipschitz
/// constant is `D_λ`:
/// `γ_max = Δ₀ / (D_λ · (β_t(0)·(1 + κ/(1−d)) + 1))`.
///
/// Equivalently `γ_max = 1 / (D_λ · G)` with `G` from [`small_gain_g`].
pub fn identifier_gain_bound(
    env: &ContractionEnvelope,
    params: &ScheduleParams,
    d_lambda: f64,
) -> Result<f64> {
    if !(d_lambda > 0.0) || !d_lambda.is_finite() {
        return Err(Error::Domain(format!(
            "d_lambda must be positive; got {d_lambda}"
        )));
    }
    let schedule = build_schedule(env, params)?;
    let bt0 = env.beta_t0()?;
    let bound =
        schedule.delta0 / (d_lambda * (bt0 * (1.0 + params.kappa / (1.0 - params.d)) + 1.0));
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::Evaluation(format!(
            "identifier gain bound degenerated to {bound}"
        )));
    }
    Ok(bound)
}

type SeqFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
type GainSeqFn = Arc<dyn Fn(usize) -> ScalarFn + Send + Sync>;
type B2Fn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Fully general schedule specification for the recursive trapping theorem.
///
/// Describes threshold, shrink, and dwell sequences together with the
/// stage-wise gain reshaping maps and closed-form envelopes `B₁`, `B₂` for
/// the recursion. Use [`GeneralScheduleSpec::from_appendix`] for the
/// canonical geometric construction.
#[derive(Clone)]
pub struct GeneralScheduleSpec {
    /// Threshold sequence `σ_i` (must start at 1 and decrease to 0).
    pub sigma: SeqFn,
    /// Shrink sequence `ξ_i`.
    pub xi: SeqFn,
    /// Dwell-time sequence `τ_i`.
    pub tau: SeqFn,
    /// Marks `τ` as constant, enabling the analytic divergence shortcut.
    pub tau_constant: bool,
    /// Stage maps `ρ_{φ,j}` entering the state recursion (index from 1).
    pub rho_phi: GainSeqFn,
    /// Stage maps `ρ_{υ,i}` entering the input recursion (index from 1).
    pub rho_upsilon: GainSeqFn,
    /// Closed-form envelope `B₁(‖x₀‖)` that must dominate the state
    /// recursion.
    pub b1: ScalarFn,
    /// Closed-form envelope `B₂(|h(z₀)|, c)` that must dominate the input
    /// recursion.
    pub b2: B2Fn,
}

impl GeneralScheduleSpec {
    /// Canonical geometric construction: `σ_i = κ^{−i}`, constant `ξ*` and
    /// `τ*`, identity reshaping maps, and the closed-form `B₁`, `B₂` of
    /// [`compute_b1_b2`].
    pub fn from_appendix(env: &ContractionEnvelope, params: &ScheduleParams) -> Result<Self> {
        let schedule = build_schedule(env, params)?;
        let bt0 = env.beta_t0()?;
        let kappa = params.kappa;
        let d = params.d;
        let (xi_star, tau_star) = (schedule.xi_star, schedule.tau_star);
        Ok(Self {
            sigma: Arc::new(move |i| kappa.powi(-(i as i32))),
            xi: Arc::new(move |_| xi_star),
            tau: Arc::new(move |_| tau_star),
            tau_constant: true,
            rho_phi: Arc::new(|_| ScalarFn::identity()),
            rho_upsilon: Arc::new(|_| ScalarFn::identity()),
            b1: ScalarFn::linear(bt0),
            b2: Arc::new(move |h_abs, c| bt0 * c * h_abs * (1.0 + kappa / (1.0 - d))),
        })
    }
}

/// One verified condition of the trapping theorem.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConditionCheck {
    /// Stable identifier of the condition.
    pub id: String,
    /// Whether the (probed) condition holds.
    pub pass: bool,
    /// Distance to the condition boundary (negative on failure).
    pub margin: f64,
    /// Human-readable explanation with the decisive numbers.
    pub detail: String,
}

/// Full report of [`check_theorem_conditions`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct TheoremReport {
    /// Individual condition verdicts in evaluation order.
    pub conditions: Vec<ConditionCheck>,
    /// Conjunction of all condition verdicts.
    pub all_pass: bool,
    /// Infimum of the observed per-stage rate ratios
    /// `(σ_i − σ_{i+1}) / (τ_i·γ₀₁(σ_i))`.
    pub delta0_observed: f64,
    /// Value of the `B₁` envelope at `‖x₀‖`.
    pub b1_value: f64,
    /// Value of the `B₂` envelope at `(|h(z₀)|, c)`.
    pub b2_value: f64,
    /// Number of stages actually probed (may be truncated by threshold
    /// underflow).
    pub probed_n: usize,
    /// Heuristic flag: the probed recursion ratios show no sign of settling
    /// toward their envelope, so the finite probe may be inconclusive.
    pub tail_warning: bool,
    /// Echo of the initial state norm.
    pub x0_norm: f64,
    /// Echo of the initial certificate value.
    pub h_z0: f64,
}

/// Evaluates `φ_n(s)` for the recursion
/// `φ_j = φ_{j−1} ∘ ρ_{φ,j}(ξ_{n−j}·β(·, 0))`, `φ_0 = β(·, 0)`,
/// unrolled outermost-first: `w ← ρ_{φ,n−k}(ξ_k·β(w, 0))` for
/// `k = 0, …, n−1`, then `φ_n(s) = β(w, 0)`.
fn eval_phi(
    env: &ContractionEnvelope,
    bt0: f64,
    xi: &[f64],
    rho_phi: &[ScalarFn],
    n: usize,
    s: f64,
) -> Result<f64> {
    let mut w = s;
    for k in 0..n {
        let beta0 = env.beta_x.eval(w)? * bt0;
        w = rho_phi[n - k - 1].eval(xi[k] * beta0)?;
        if !w.is_finite() {
            return Err(Error::Evaluation(format!(
                "state recursion produced non-finite value at stage {k} of phi_{n}"
            )));
        }
    }
    Ok(env.beta_x.eval(w)? * bt0)
}

/// Evaluates `υ_i(s)`: `υ_0 = β(·, 0)` and `υ_i = φ_{i−1} ∘ ρ_{υ,i}` for
/// `i ≥ 1`.
fn eval_upsilon(
    env: &ContractionEnvelope,
    bt0: f64,
    xi: &[f64],
    rho_phi: &[ScalarFn],
    rho_upsilon: &[ScalarFn],
    i: usize,
    s: f64,
) -> Result<f64> {
    if i == 0 {
        return Ok(env.beta_x.eval(s)? * bt0);
    }
    let u = rho_upsilon[i - 1].eval(s)?;
    eval_phi(env, bt0, xi, rho_phi, i - 1, u)
}

/// True when the last `window` values of `xs` are non-increasing up to
/// roundoff.
fn tail_non_increasing(xs: &[f64], window: usize) -> bool {
    if xs.len() < 3 {
        return true;
    }
    let tail = &xs[xs.len().saturating_sub(window)..];
    tail.windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0))
}

/// Checks every hypothesis of the non-uniform trapping theorem for an
/// arbitrary schedule specification, probing the recursive conditions up to
/// `n_probe` stages.
///
/// The probed surrogate is explicit in the report: boundedness of the state
/// and input recursions is verified stage-by-stage against the closed-form
/// envelopes `B₁`/`B₂`, the per-stage rate ratios yield the observed `Δ₀`,
/// the membership inequality is tested with [`CONDITION_SLACK`], and
/// dwell-time divergence uses either the constant-`τ` shortcut or partial
/// sums up to [`DIVERGENCE_BOUND`]. A tail heuristic warns when the probed
/// recursion ratios are still growing at an accelerating rate, i.e. when
/// neither the ratios nor their increments settle.
pub fn check_theorem_conditions(
    spec: &GeneralScheduleSpec,
    env: &ContractionEnvelope,
    wb: &WanderingBound,
    x0_norm: f64,
    h_z0: f64,
    n_probe: usize,
) -> Result<TheoremReport> {
    if !(x0_norm >= 0.0) || !x0_norm.is_finite() {
        return Err(Error::Domain(format!(
            "x0_norm must be finite and non-negative; got {x0_norm}"
        )));
    }
    if !h_z0.is_finite() {
        return Err(Error::Domain(format!("h_z0 must be finite; got {h_z0}")));
    }
    if n_probe < 12 {
        return Err(Error::Domain(format!(
            "n_probe must be at least 12 for the tail heuristic; got {n_probe}"
        )));
    }
    let bt0 = env.beta_t0()?;
    let c = env.c;

    // Materialize the sequences once, truncating at threshold underflow so
    // later ratio computations never divide by zero.
    let mut sigma = Vec::with_capacity(n_probe + 2);
    for i in 0..=(n_probe + 1) {
        let s = (spec.sigma)(i);
        if !s.is_finite() {
            return Err(Error::Evaluation(format!(
                "threshold sequence returned non-finite value at index {i}"
            )));
        }
        if s < f64::MIN_POSITIVE {
            break;
        }
        sigma.push(s);
    }
    if sigma.len() < 2 {
        return Err(Error::Evaluation(
            "threshold sequence underflowed immediately; nothing to probe".into(),
        ));
    }
    let probed_n = sigma.len() - 2; // recursion stages 0..=probed_n
    let truncated = probed_n < n_probe;
    let xi: Vec<f64> = (0..=probed_n).map(|i| (spec.xi)(i)).collect();
    let tau: Vec<f64> = (0..=probed_n).map(|i| (spec.tau)(i)).collect();
    let rho_phi: Vec<ScalarFn> = (1..=probed_n.max(1)).map(|j| (spec.rho_phi)(j)).collect();
    let rho_upsilon: Vec<ScalarFn> = (1..=probed_n.max(1))
        .map(|i| (spec.rho_upsilon)(i))
        .collect();
    for (i, (&x, &t)) in xi.iter().zip(tau.iter()).enumerate() {
        if !(x > 0.0) || !x.is_finite() || !(t > 0.0) || !t.is_finite() {
            return Err(Error::Evaluation(format!(
                "shrink/dwell sequences must be positive and finite; got xi_{i} = {x}, tau_{i} = {t}"
            )));
        }
    }

    let mut conditions = Vec::new();

    // Condition: thresholds form a partition of (0, 1] decaying to zero.
    {
        let start_ok = (sigma[0] - 1.0).abs() <= 1e-9;
        let strictly_decreasing = sigma.windows(2).all(|w| w[1] < w[0]);
        let tail_len = 10.min(sigma.len() - 1);
        let tail_ratio = (sigma[sigma.len() - 1] / sigma[sigma.len() - 1 - tail_len])
            .powf(1.0 / tail_len as f64);
        let decaying = tail_ratio < 1.0 - 1e-12;
        let pass = start_ok && strictly_decreasing && decaying;
        conditions.push(ConditionCheck {
            id: "sigma-partition".into(),
            pass,
            margin: 1.0 - tail_ratio,
            detail: format!(
                "sigma_0 = {}, strictly decreasing = {strictly_decreasing}, \
                 tail geometric ratio = {tail_ratio:.6}{}",
                sigma[0],
                if truncated {
                    format!(" (probe truncated at {probed_n} stages by underflow)")
                } else {
                    String::new()
                }
            ),
        });
    }

    // Condition: each dwell time realizes its shrink factor,
    // beta_t(tau_i) <= xi_i * beta_t(0).
    {
        let mut worst = f64::INFINITY;
        let mut worst_i = 0usize;
        for i in 0..=probed_n {
            let margin = xi[i] * bt0 - env.beta_t.eval(tau[i])?;
            if margin < worst {
                worst = margin;
                worst_i = i;
            }
        }
        conditions.push(ConditionCheck {
            id: "xi-contraction".into(),
            pass: worst >= -1e-10,
            margin: worst,
            detail: format!(
                "min over i of xi_i*beta_t(0) - beta_t(tau_i) = {worst:.3e} at i = {worst_i}"
            ),
        });
    }

    // Conditions: recursion ratios stay below their closed-form envelopes.
    let b1_value = spec.b1.eval(x0_norm)?;
    let b2_value = (spec.b2)(h_z0.abs(), c);
    let mut phi_ratios = Vec::with_capacity(probed_n + 1);
    let mut ups_ratios = Vec::with_capacity(probed_n + 1);
    for n in 0..=probed_n {
        let phi_n = eval_phi(env, bt0, &xi, &rho_phi, n, x0_norm)?;
        phi_ratios.push(phi_n / sigma[n]);
        let mut sum = 0.0;
        for i in 0..=n {
            sum += eval_upsilon(
                env,
                bt0,
                &xi,
                &rho_phi,
                &rho_upsilon,
                i,
                c * h_z0.abs() * sigma[n - i],
            )?;
        }
        if !sum.is_finite() {
            return Err(Error::Evaluation(format!(
                "input recursion overflowed at stage {n}"
            )));
        }
        ups_ratios.push(sum / sigma[n]);
    }
    let worst_phi = phi_ratios
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_ups = ups_ratios
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    conditions.push(ConditionCheck {
        id: "phi-bounded-b1".into(),
        pass: worst_phi <= b1_value + CONDITION_SLACK,
        margin: b1_value - worst_phi,
        detail: format!(
            "max over n <= {probed_n} of phi_n(x0)/sigma_n = {worst_phi:.6e}, B1 = {b1_value:.6e}"
        ),
    });
    conditions.push(ConditionCheck {
        id: "upsilon-bounded-b2".into(),
        pass: worst_ups <= b2_value + CONDITION_SLACK,
        margin: b2_value - worst_ups,
        detail: format!(
            "max over n <= {probed_n} of the input recursion ratio = {worst_ups:.6e}, \
             B2 = {b2_value:.6e}"
        ),
    });
    // The finite probe is trusted when the ratio tails are settling: either
    // the ratios themselves or their increments must be non-increasing.
    let tail_warning = {
        let settles = |xs: &[f64]| {
            let increments: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            tail_non_increasing(xs, 10) || tail_non_increasing(&increments, 10)
        };
        !(settles(&phi_ratios) && settles(&ups_ratios))
    };

    // Condition: per-stage rate ratios admit a positive uniform lower bound.
    let mut delta0_observed = f64::INFINITY;
    for i in 0..=probed_n {
        let g01 = wb.gamma01.eval(sigma[i])?;
        if !(g01 > 0.0) {
            return Err(Error::Evaluation(format!(
                "gamma01(sigma_{i}) = {g01} is not positive; rate ratios are undefined"
            )));
        }
        let ratio = (sigma[i] - sigma[i + 1]) / (tau[i] * g01);
        delta0_observed = delta0_observed.min(ratio);
    }
    conditions.push(ConditionCheck {
        id: "rate-lower-bound".into(),
        pass: delta0_observed > 0.0 && delta0_observed.is_finite(),
        margin: delta0_observed,
        detail: format!(
            "inf over i <= {probed_n} of (sigma_i - sigma_(i+1))/(tau_i*gamma01(sigma_i)) \
             = {delta0_observed:.6e}"
        ),
    });

    // Condition: the initial certificate budget covers the transient,
    // gamma02(B1 + B2 + c*|h(z0)|) <= h(z0)*Delta0.
    {
        let lhs = wb.gamma02.eval(b1_value + b2_value + c * h_z0.abs())?;
        let rhs = h_z0 * delta0_observed;
        // A non-positive budget certifies nothing except the degenerate
        // all-zero case, where both sides vanish.
        let budget_ok = h_z0 > 0.0 || (h_z0 == 0.0 && lhs <= CONDITION_SLACK);
        let pass = budget_ok && lhs <= rhs + CONDITION_SLACK;
        let detail = if budget_ok {
            format!("gamma02(B1 + B2 + c|h(z0)|) = {lhs:.6e} vs h(z0)*Delta0 = {rhs:.6e}")
        } else {
            format!(
                "h(z0) = {h_z0} provides no positive decrease budget \
                 (lhs = {lhs:.6e}); membership cannot be certified"
            )
        };
        conditions.push(ConditionCheck {
            id: "initial-membership".into(),
            pass,
            margin: rhs + CONDITION_SLACK - lhs,
            detail,
        });
    }

    // Condition: dwell times sum to infinity.
    {
        let (pass, margin, detail) = if spec.tau_constant {
            (
                tau[0] > 0.0,
                tau[0],
                format!("constant dwell time tau = {} > 0 diverges analytically", tau[0]),
            )
        } else {
            let mut sum = 0.0f64;
            let mut terms = 0usize;
            while sum <= DIVERGENCE_BOUND && terms < DIVERGENCE_MAX_TERMS {
                let t = (spec.tau)(terms);
                if !(t >= 0.0) || !t.is_finite() {
                    return Err(Error::Evaluation(format!(
                        "dwell sequence returned invalid value {t} at index {terms}"
                    )));
                }
                sum += t;
                terms += 1;
            }
            let pass = sum > DIVERGENCE_BOUND;
            (
                pass,
                sum,
                format!(
                    "partial sum of dwell times reached {sum:.3e} after {terms} terms \
                     (target {DIVERGENCE_BOUND:.1e})"
                ),
            )
        };
        conditions.push(ConditionCheck {
            id: "dwell-divergence".into(),
            pass,
            margin,
            detail,
        });
    }

    let all_pass = conditions.iter().all(|c| c.pass);
    Ok(TheoremReport {
        conditions,
        all_pass,
        delta0_observed,
        b1_value,
        b2_value,
        probed_n,
        tail_warning,
        x0_norm,
        h_z0,
    })
}
