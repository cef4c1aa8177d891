//! Adaptive parameter identifiers driven by Poisson-stable exploratory
//! dynamics, and the two end-to-end reference problems built on them.
//!
//! The identifier reparameterizes an autonomous exploratory system
//! `λ' = S(λ)` by the accumulated, dead-zone-gated estimation error: the
//! exploration advances only while the error is excited, and freezes —
//! exactly, not approximately — once the error enters the dead zone.
//! Because the exploratory orbit is Poisson stable and its image under the
//! output map `η` is dense in the parameter region, the frozen point can be
//! made arbitrarily close to the true parameters.
//!
//! Two exploratory systems are provided: a planar hyperbolic pair (monotone
//! sweep, exact multiplicative updates) and a pair of harmonic oscillators
//! with incommensurate frequencies (dense torus winding).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::dynsim::{integrate, InterconnectionModel, InvariantSet, RunStatus, Trajectory, Verdict};
use crate::gains::ContractionEnvelope;
use crate::smallgain::{identifier_gain_bound, ScheduleParams};
use crate::{Error, Result};

/// Admissible box for the first identified parameter of the neuron model.
pub const HR_BETA_BOX: (f64, f64) = (0.3, 0.7);
/// Admissible box for the second identified parameter of the neuron model.
pub const HR_D_BOX: (f64, f64) = (2.0, 3.0);
/// Sampled Lipschitz constant of the arcsin-based output map along the
/// oscillator orbit (conservative overestimate of the tangent constant).
pub const HR_D_ETA: f64 = 0.46;
/// Reference composite excitation Lipschitz constant for the scalar
/// example: input gain, parameter-to-disturbance slope, output-map slope,
/// and exploratory field norm are all 1 on its invariant region.
pub const EX1_D_LAMBDA: f64 = 1.0;
/// Relative tolerance for conserved quantities of exploratory systems.
pub const CONSERVATION_TOL: f64 = 1e-6;

/// Reference schedule parameters `(d, κ) = (0.5, 2)` used by the example
/// certificates.
pub fn reference_schedule() -> ScheduleParams {
    ScheduleParams::new(0.5, 2.0).expect("reference schedule parameters are valid")
}

/// Kind of exploratory dynamics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExoKind {
    /// Planar pair `λ₁' = λ₁`, `λ₂' = −λ₂` (in exploration time): a
    /// monotone sweep along a hyperbola.
    HyperbolicPair,
    /// Two harmonic oscillators `(λ₁, λ₂)` and `(λ₃, λ₄)` at frequencies
    /// `ω₁`, `ω₂`; with an irrational frequency ratio the joint phase is
    /// dense on the torus.
    TorusOscillators {
        /// Frequency of the first oscillator.
        omega1: f64,
        /// Frequency of the second oscillator.
        omega2: f64,
    },
}

/// Autonomous exploratory system `λ' = S(λ)` with conserved quantities and
/// a bound on `‖S‖` over the orbit.
#[derive(Debug, Clone)]
pub struct ExploratorySystem {
    /// Which dynamics generate the exploration.
    pub kind: ExoKind,
    /// Initial point of the orbit.
    pub lambda0: Vec<f64>,
    /// Upper bound of `‖S(λ)‖` on the orbit through `lambda0`.
    pub norm_bound: f64,
    invariants0: Vec<f64>,
}

impl ExploratorySystem {
    /// Hyperbolic pair started on the unit circle (`λ₁² + λ₂² = 1`) with
    /// `0 < λ₁(0) ≤ 1`.
    ///
    /// On such orbits `λ₁` is non-decreasing and `‖S(λ)‖ = ‖λ‖ ≤ 1` while
    /// `λ₁ ≤ 1`, so the orbit norm bound is 1.
    pub fn hyperbolic_pair(lambda0: [f64; 2]) -> Result<Self> {
        let r2 = lambda0[0] * lambda0[0] + lambda0[1] * lambda0[1];
        if (r2 - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "hyperbolic pair must start on the unit circle; |lambda0|^2 = {r2}"
            )));
        }
        if !(lambda0[0] > 0.0 && lambda0[0] <= 1.0) {
            return Err(Error::Config(format!(
                "hyperbolic pair needs 0 < lambda1(0) <= 1; got {}",
                lambda0[0]
            )));
        }
        let invariants0 = vec![lambda0[0] * lambda0[1]];
        Ok(Self {
            kind: ExoKind::HyperbolicPair,
            lambda0: lambda0.to_vec(),
            norm_bound: 1.0,
            invariants0,
        })
    }

    /// Torus oscillators with frequencies `ω₁`, `ω₂` started at `lambda0`.
    ///
    /// The conserved amplitudes are `Aᵢ² = λ_{2i−1}² + (λ_{2i}/ωᵢ)²`, and
    /// on the orbit `‖S(λ)‖ ≤ √(A₁²·max(ω₁², ω₁⁴) + A₂²·max(ω₂², ω₂⁴))`.
    pub fn torus(omega1: f64, omega2: f64, lambda0: [f64; 4]) -> Result<Self> {
        if !(omega1 > 0.0) || !(omega2 > 0.0) || !omega1.is_finite() || !omega2.is_finite() {
            return Err(Error::Config(format!(
                "oscillator frequencies must be positive; got {omega1}, {omega2}"
            )));
        }
        let a1sq = lambda0[0] * lambda0[0] + (lambda0[1] / omega1).powi(2);
        let a2sq = lambda0[2] * lambda0[2] + (lambda0[3] / omega2).powi(2);
        if !(a1sq > 0.0 && a2sq > 0.0) {
            return Err(Error::Config(
                "both oscillators need non-zero amplitude to explore".into(),
            ));
        }
        let norm_bound = (a1sq * omega1.powi(2).max(omega1.powi(4))
            + a2sq * omega2.powi(2).max(omega2.powi(4)))
        .sqrt();
        Ok(Self {
            kind: ExoKind::TorusOscillators { omega1, omega2 },
            lambda0: lambda0.to_vec(),
            norm_bound,
            invariants0: vec![a1sq, a2sq],
        })
    }

    /// State dimension (2 or 4).
    pub fn dim(&self) -> usize {
        match self.kind {
            ExoKind::HyperbolicPair => 2,
            ExoKind::TorusOscillators { .. } => 4,
        }
    }

    /// Exploratory vector field `S(λ)`.
    pub fn field(&self, l: &[f64], out: &mut [f64]) {
        match self.kind {
            ExoKind::HyperbolicPair => {
                out[0] = l[0];
                out[1] = -l[1];
            }
            ExoKind::TorusOscillators { omega1, omega2 } => {
                out[0] = l[1];
                out[1] = -omega1 * omega1 * l[0];
                out[2] = l[3];
                out[3] = -omega2 * omega2 * l[2];
            }
        }
    }

    /// Conserved quantities at `l` (product `λ₁λ₂`, or the two squared
    /// amplitudes).
    pub fn invariants(&self, l: &[f64]) -> Vec<f64> {
        match self.kind {
            ExoKind::HyperbolicPair => vec![l[0] * l[1]],
            ExoKind::TorusOscillators { omega1, omega2 } => vec![
                l[0] * l[0] + (l[1] / omega1).powi(2),
                l[2] * l[2] + (l[3] / omega2).powi(2),
            ],
        }
    }

    /// Largest relative drift of the conserved quantities at `l` with
    /// respect to their initial values.
    pub fn invariant_drift(&self, l: &[f64]) -> f64 {
        self.invariants(l)
            .iter()
            .zip(&self.invariants0)
            .map(|(v, v0)| (v - v0).abs() / v0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Advances `l` by exploration increment `s` along the flow of `S`.
    ///
    /// The hyperbolic pair uses the exact flow `(λ₁·eˢ, λ₂·e⁻ˢ)`, which
    /// conserves the product to roundoff; the oscillators take a single
    /// RK4 step (callers supply small, gated increments).
    pub fn advance(&self, l: &mut [f64], s: f64) {
        match self.kind {
            ExoKind::HyperbolicPair => {
                let e = s.exp();
                l[0] *= e;
                l[1] /= e;
            }
            ExoKind::TorusOscillators { .. } => {
                let mut k1 = [0.0; 4];
                let mut k2 = [0.0; 4];
                let mut k3 = [0.0; 4];
                let mut k4 = [0.0; 4];
                let mut tmp = [0.0; 4];
                self.field(l, &mut k1);
                for i in 0..4 {
                    tmp[i] = l[i] + 0.5 * s * k1[i];
                }
                self.field(&tmp, &mut k2);
                for i in 0..4 {
                    tmp[i] = l[i] + 0.5 * s * k2[i];
                }
                self.field(&tmp, &mut k3);
                for i in 0..4 {
                    tmp[i] = l[i] + s * k3[i];
                }
                self.field(&tmp, &mut k4);
                for i in 0..4 {
                    l[i] += s / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
    }
}

/// Output map `η` projecting exploratory states onto parameter estimates.
#[derive(Clone)]
pub struct EtaMap {
    eval_fn: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    name: String,
    /// Expected exploratory-state dimension.
    pub dim_in: usize,
    /// Number of produced parameter estimates.
    pub dim_out: usize,
    /// Lipschitz constant of `η` along the exploratory orbit.
    pub d_eta: f64,
    /// Admissible box of each produced estimate.
    pub target_box: Vec<(f64, f64)>,
}

impl std::fmt::Debug for EtaMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EtaMap")
            .field("name", &self.name)
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .field("d_eta", &self.d_eta)
            .field("target_box", &self.target_box)
            .finish()
    }
}

impl EtaMap {
    /// Wraps a closure as an output map.
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        dim_out: usize,
        d_eta: f64,
        target_box: Vec<(f64, f64)>,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if target_box.len() != dim_out {
            return Err(Error::Config(format!(
                "target box has {} intervals for {} outputs",
                target_box.len(),
                dim_out
            )));
        }
        if target_box.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Config("target box intervals must be non-empty".into()));
        }
        if !(d_eta > 0.0) || !d_eta.is_finite() {
            return Err(Error::Config(format!(
                "output-map Lipschitz constant must be positive; got {d_eta}"
            )));
        }
        Ok(Self {
            eval_fn: Arc::new(eval),
            name: name.into(),
            dim_in,
            dim_out,
            d_eta,
            target_box,
        })
    }

    /// Scalar projection `θ̂ = λ[index]` with box `[lo, hi]` and unit
    /// Lipschitz constant.
    pub fn scalar_projection(dim_in: usize, index: usize, lo: f64, hi: f64) -> Result<Self> {
        if index >= dim_in {
            return Err(Error::Config(format!(
                "projection index {index} out of range for dimension {dim_in}"
            )));
        }
        Self::new(
            format!("projection[{index}]"),
            dim_in,
            1,
            1.0,
            vec![(lo, hi)],
            move |l, out| out[0] = l[index],
        )
    }

    /// Arcsin-based map of the neuron-model identifier: triangle-wave
    /// coordinates of the oscillator phases, affinely mapped onto
    /// [`HR_BETA_BOX`] × [`HR_D_BOX`].
    ///
    /// Arguments of `asin` are clamped to `[−1, 1]` as a roundoff guard
    /// (integration noise can push `|λ|` past 1 by a few ulps); this is not
    /// range enforcement.
    pub fn hr_arcsin() -> Self {
        let (b_lo, b_hi) = HR_BETA_BOX;
        let (d_lo, d_hi) = HR_D_BOX;
        Self::new(
            "hr-arcsin",
            4,
            2,
            HR_D_ETA,
            vec![HR_BETA_BOX, HR_D_BOX],
            move |l, out| {
                let u = |v: f64| 0.5 * (2.0 * v.clamp(-1.0, 1.0).asin() / PI + 1.0);
                out[0] = b_lo + (b_hi - b_lo) * u(l[0]);
                out[1] = d_lo + (d_hi - d_lo) * u(l[2]);
            },
        )
        .expect("the built-in map is consistent")
    }

    /// Evaluates `η(λ)` into `out`.
    pub fn eval(&self, lambda: &[f64], out: &mut [f64]) -> Result<()> {
        if lambda.len() != self.dim_in || out.len() != self.dim_out {
            return Err(Error::Config(format!(
                "{}: dimension mismatch (lambda {}, out {})",
                self.name,
                lambda.len(),
                out.len()
            )));
        }
        (self.eval_fn)(lambda, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "{} produced a non-finite estimate",
                self.name
            )));
        }
        Ok(())
    }

    /// Evaluates `η(λ)` into a fresh vector.
    pub fn eval_vec(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim_out];
        self.eval(lambda, &mut out)?;
        Ok(out)
    }

    /// Checks that `η` maps the given exploratory states into the target
    /// box, reporting the worst boundary violation.
    pub fn check_range<'a>(
        &self,
        lambdas: impl IntoIterator<Item = &'a [f64]>,
    ) -> Result<RangeReport> {
        let mut worst = 0.0f64;
        let mut samples = 0usize;
        let mut out = vec![0.0; self.dim_out];
        for l in lambdas {
            self.eval(l, &mut out)?;
            for (v, (lo, hi)) in out.iter().zip(&self.target_box) {
                worst = worst.max(lo - v).max(v - hi);
            }
            samples += 1;
        }
        Ok(RangeReport {
            pass: worst <= 0.0,
            worst_violation: worst,
            samples,
        })
    }

    /// Estimates the Lipschitz quotient of `η` over the given state pairs
    /// and compares it against `d_eta`.
    pub fn check_lipschitz<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a [f64], &'a [f64])>,
    ) -> Result<LipschitzReport> {
        let mut max_quotient = 0.0f64;
        let mut count = 0usize;
        let mut oa = vec![0.0; self.dim_out];
        let mut ob = vec![0.0; self.dim_out];
        for (a, b) in pairs {
            self.eval(a, &mut oa)?;
            self.eval(b, &mut ob)?;
            let dl = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if dl == 0.0 {
                continue;
            }
            let de = oa
                .iter()
                .zip(&ob)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            max_quotient = max_quotient.max(de / dl);
            count += 1;
        }
        Ok(LipschitzReport {
            pass: max_quotient <= self.d_eta * (1.0 + 1e-9),
            max_quotient,
            pairs: count,
        })
    }
}

/// Result of [`EtaMap::check_range`].
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RangeReport {
    /// True when every sampled estimate stayed in the box.
    pub pass: bool,
    /// Largest distance outside the box (0 when inside everywhere).
    pub worst_violation: f64,
    /// Number of states sampled.
    pub samples: usize,
}

/// Result of [`EtaMap::check_lipschitz`].
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LipschitzReport {
    /// True when the sampled quotient stays below the declared constant.
    pub pass: bool,
    /// Largest sampled difference quotient.
    pub max_quotient: f64,
    /// Number of pairs with distinct states.
    pub pairs: usize,
}

/// Dead-zone budget of the identifier: modeling margin `Δ_f`, measurement
/// margin `Δ_ε`, and the strictly positive resolution margin `δ`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DeadzoneSpec {
    /// Margin absorbing model mismatch.
    pub delta_f: f64,
    /// Margin absorbing measurement error.
    pub delta_eps: f64,
    /// Resolution margin; must be strictly positive so the gate freezes.
    pub delta: f64,
}

impl DeadzoneSpec {
    /// Validates `Δ_f, Δ_ε ≥ 0` and `δ > 0`.
    pub fn new(delta_f: f64, delta_eps: f64, delta: f64) -> Result<Self> {
        if !(delta_f >= 0.0) || !(delta_eps >= 0.0) {
            return Err(Error::Domain(format!(
                "dead-zone margins must be non-negative; got delta_f = {delta_f}, \
                 delta_eps = {delta_eps}"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::Domain(format!(
                "resolution margin delta must be strictly positive; got {delta}"
            )));
        }
        Ok(Self {
            delta_f,
            delta_eps,
            delta,
        })
    }

    /// Total gating level `M = 2Δ_f + Δ_ε + δ`.
    pub fn m_level(&self) -> f64 {
        2.0 * self.delta_f + self.delta_eps + self.delta
    }
}

/// Running state of an adaptive identifier.
#[derive(Debug, Clone)]
pub struct IdentifierState {
    /// Current exploratory state.
    pub lambda: Vec<f64>,
    /// Current parameter estimates `η(λ)`.
    pub theta_hat: Vec<f64>,
    /// Adaptation gain.
    pub gamma: f64,
    /// Error-space gating level `M`.
    pub m_level: f64,
    /// State-space dead-zone radius `Δ(M)` actually applied to distances.
    pub delta_m: f64,
    /// Current time.
    pub t: f64,
}

impl IdentifierState {
    /// Initializes the identifier at `t0` from an exploratory system, an
    /// output map, a gain, and a dead-zone budget; `margin_map` converts
    /// the error-space level `M` into the state-space radius `Δ(M)` (for
    /// an exponential contraction with rate `ρ` this is `M/ρ`).
    ///
    /// A gain above the certificate of
    /// [`identifier_gain_bound`](crate::smallgain::identifier_gain_bound)
    /// is not rejected here — certification is reported by the callers —
    /// but the gain must be non-negative and finite.
    pub fn new(
        exo: &ExploratorySystem,
        eta: &EtaMap,
        gamma: f64,
        dz: &DeadzoneSpec,
        margin_map: impl Fn(f64) -> f64,
        t0: f64,
    ) -> Result<Self> {
        if eta.dim_in != exo.dim() {
            return Err(Error::Config(format!(
                "output map expects dimension {}, exploratory system has {}",
                eta.dim_in,
                exo.dim()
            )));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "adaptation gain must be non-negative; got {gamma}"
            )));
        }
        let m_level = dz.m_level();
        let delta_m = margin_map(m_level);
        if !(delta_m >= 0.0) || !delta_m.is_finite() {
            return Err(Error::Domain(format!(
                "margin map produced invalid dead-zone radius {delta_m}"
            )));
        }
        let theta_hat = eta.eval_vec(&exo.lambda0)?;
        Ok(Self {
            lambda: exo.lambda0.clone(),
            theta_hat,
            gamma,
            m_level,
            delta_m,
            t: t0,
        })
    }
}

/// Advances the identifier by one sample of the measured set distance.
///
/// The exploration increment is `γ·max(dist − Δ(M), 0)·dt`; inside the
/// dead zone the exploratory state and the estimates are returned exactly
/// unchanged (bitwise), which is what makes reached estimates permanent.
pub fn step_identifier(
    state: &IdentifierState,
    exo: &ExploratorySystem,
    eta: &EtaMap,
    dist: f64,
    dt: f64,
) -> Result<IdentifierState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("step size must be positive; got {dt}")));
    }
    if !(dist >= 0.0) || !dist.is_finite() {
        return Err(Error::Domain(format!(
            "measured distance must be finite and non-negative; got {dist}"
        )));
    }
    let mut next = state.clone();
    next.t += dt;
    let gated = (dist - state.delta_m).max(0.0);
    if gated == 0.0 || state.gamma == 0.0 {
        return Ok(next);
    }
    exo.advance(&mut next.lambda, state.gamma * gated * dt);
    if next.lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(
            "exploratory state became non-finite during the update".into(),
        ));
    }
    eta.eval(&next.lambda, &mut next.theta_hat)?;
    Ok(next)
}

/// Composite excitation Lipschitz constant
/// `D_λ = c · D_f · D_η · max‖S‖`.
pub fn compute_d_lambda(c: f64, d_f: f64, d_eta: f64, max_s: f64) -> Result<f64> {
    for (name, v) in [("c", c), ("d_f", d_f), ("d_eta", d_eta), ("max_s", max_s)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "{name} must be positive and finite; got {v}"
            )));
        }
    }
    Ok(c * d_f * d_eta * max_s)
}

/// Known coefficients of the neuron model (membrane equation).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct HRKnownParams {
    /// Cubic coefficient.
    pub a: f64,
    /// Quadratic coefficient.
    pub b: f64,
    /// Input gain.
    pub alpha: f64,
    /// Constant drive of the recovery equation.
    pub c: f64,
}

impl Default for HRKnownParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 3.0,
            alpha: 0.7,
            c: 0.5,
        }
    }
}

/// State of the reduced-order neuron observer: membrane estimate `x̂` and
/// recovery-variable filter `w`.
#[derive(Debug, Clone, Copy)]
pub struct HRObserverState {
    /// Membrane-potential estimate.
    pub x_hat: f64,
    /// Filter state reconstructing the recovery variable.
    pub w: f64,
    /// Output-injection gain.
    pub rho: f64,
    /// Known model coefficients.
    pub known: HRKnownParams,
    /// Current time.
    pub t: f64,
}

/// Advances the neuron observer one step with measured membrane potential
/// `x1`, input `u`, and current parameter estimates, holding the
/// measurements constant over the step (zero-order hold):
///
/// `ẇ = −β̂·w + (c − d̂·x₁²)`,
/// `x̂' = ρ(x₁ − x̂) − a·x₁³ + b·x₁² + α·u + w`.
///
/// Estimates outside the admissible boxes are configuration errors: the
/// filter pole `−β̂` must stay in the certified range.
pub fn hr_observer_step(
    state: &HRObserverState,
    x1: f64,
    u: f64,
    beta_hat: f64,
    d_hat: f64,
    dt: f64,
) -> Result<HRObserverState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("step size must be positive; got {dt}")));
    }
    if !x1.is_finite() || !u.is_finite() {
        return Err(Error::Domain(format!(
            "measurements must be finite; got x1 = {x1}, u = {u}"
        )));
    }
    if beta_hat < HR_BETA_BOX.0 || beta_hat > HR_BETA_BOX.1 {
        return Err(Error::Config(format!(
            "beta estimate {beta_hat} outside admissible box [{}, {}]",
            HR_BETA_BOX.0, HR_BETA_BOX.1
        )));
    }
    if d_hat < HR_D_BOX.0 || d_hat > HR_D_BOX.1 {
        return Err(Error::Config(format!(
            "d estimate {d_hat} outside admissible box [{}, {}]",
            HR_D_BOX.0, HR_D_BOX.1
        )));
    }
    let k = state.known;
    let deriv = |x_hat: f64, w: f64| -> (f64, f64) {
        (
            state.rho * (x1 - x_hat) - k.a * x1.powi(3) + k.b * x1 * x1 + k.alpha * u + w,
            -beta_hat * w + (k.c - d_hat * x1 * x1),
        )
    };
    let (x, w) = (state.x_hat, state.w);
    let (kx1, kw1) = deriv(x, w);
    let (kx2, kw2) = deriv(x + 0.5 * dt * kx1, w + 0.5 * dt * kw1);
    let (kx3, kw3) = deriv(x + 0.5 * dt * kx2, w + 0.5 * dt * kw2);
    let (kx4, kw4) = deriv(x + dt * kx3, w + dt * kw3);
    let x_next = x + dt / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    let w_next = w + dt / 6.0 * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
    if !x_next.is_finite() || !w_next.is_finite() {
        return Err(Error::Evaluation(
            "observer state became non-finite during the update".into(),
        ));
    }
    Ok(HRObserverState {
        x_hat: x_next,
        w: w_next,
        rho: state.rho,
        known: k,
        t: state.t + dt,
    })
}

/// Windowed-quadrature oracle for the recovery filter: evaluates
/// `w(t_k) = w₀·e^{−β̂·t_k} + ∫ e^{−β̂(t_k − s)}·(c − d̂·x₁²(s)) ds`
/// by trapezoidal quadrature over the window `[t_k − window, t_k]`
/// (kernel tail beyond the window is below the truncation level that
/// motivated it).
pub fn hr_filter_quadrature_at(
    times: &[f64],
    x1: &[f64],
    beta_hat: f64,
    d_hat: f64,
    c: f64,
    w0: f64,
    window: f64,
    k: usize,
) -> Result<f64> {
    if times.len() != x1.len() || k >= times.len() {
        return Err(Error::Domain(
            "quadrature oracle needs matching series and a valid index".into(),
        ));
    }
    let t_k = times[k];
    let t_lo = t_k - window;
    let mut acc = 0.0;
    let g = |j: usize| (c - d_hat * x1[j] * x1[j]) * (-beta_hat * (t_k - times[j])).exp();
    for j in 1..=k {
        if times[j] < t_lo {
            continue;
        }
        acc += 0.5 * (times[j] - times[j - 1]) * (g(j - 1) + g(j));
    }
    let ic = if t_k - times[0] <= window {
        w0 * (-beta_hat * (t_k - times[0])).exp()
    } else {
        0.0
    };
    Ok(ic + acc)
}

/// Configuration of the scalar identification example: a one-dimensional
/// contracting state driven by the mismatch of a sinusoidal nonlinearity,
/// with a hyperbolic-pair identifier sweeping the scalar parameter.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Example1Config {
    /// True parameter, inside `[−1, 1]`.
    pub theta: f64,
    /// Adaptation gain.
    pub gamma: f64,
    /// Linear decay rate of the contracting state.
    pub k: f64,
    /// Amplitude of the nonlinearity.
    pub a: f64,
    /// Initial contracting state.
    pub x0: f64,
    /// Initial exploratory state on the unit circle.
    pub lambda0: [f64; 2],
    /// Horizon.
    pub t_end: f64,
    /// Step size.
    pub dt: f64,
    /// Convergence tolerance on the final state.
    pub tol_x: f64,
    /// Convergence tolerance on the trailing estimate drift.
    pub tol_theta_drift: f64,
}

impl Default for Example1Config {
    fn default() -> Self {
        Self {
            theta: 0.3,
            gamma: 0.05,
            k: 1.0,
            a: 1.0,
            x0: 1.0,
            lambda0: [0.1, 0.99f64.sqrt()],
            t_end: 2000.0,
            dt: 1e-3,
            tol_x: 1e-2,
            tol_theta_drift: 1e-3,
        }
    }
}

/// Outcome of [`run_example1`].
#[derive(Debug, Clone)]
pub struct Example1Run {
    /// Joint trajectory: `x = [x]`, `z = [λ₁, λ₂, E]` with accumulated
    /// excitation `E` and certificate `h = −E`.
    pub trajectory: Trajectory,
    /// Estimate series `θ̂(t_k) = λ₁(t_k)`.
    pub theta_hat: Vec<f64>,
    /// Qualitative outcome.
    pub verdict: Verdict,
    /// Final contracting state.
    pub final_x: f64,
    /// Final estimate.
    pub final_theta_hat: f64,
    /// Peak-to-peak drift of the estimate over the trailing 10 % window.
    pub theta_drift: f64,
    /// Total accumulated excitation `E(t_end)`.
    pub excitation_total: f64,
    /// Excitation accumulated over the trailing 10 % window (Cauchy tail).
    pub excitation_tail: f64,
    /// Admissible gain certified for the reference schedule.
    pub gain_bound: f64,
    /// Whether the configured gain is within the certificate.
    pub certified: bool,
}

/// Runs the scalar identification example: simulates
/// `ẋ = −k·x + a·(sin(xθ + θ) − sin(xθ̂ + θ̂))` jointly with the
/// hyperbolic-pair identifier `θ̂ = λ₁`, `λ₁' = γ|x|·λ₁`,
/// `λ₂' = −γ|x|·λ₂`, and the excitation integral `E' = γ|x|`.
///
/// The exploration sweeps `θ̂` monotonically upward from `λ₁(0)`, so the
/// initial estimate must lie below the true parameter for an eventual
/// match; the default start `λ₁(0) = 0.1` covers the reference parameter
/// `θ = 0.3`.
pub fn run_example1(cfg: &Example1Config) -> Result<Example1Run> {
    if cfg.theta < -1.0 || cfg.theta > 1.0 || !cfg.theta.is_finite() {
        return Err(Error::Config(format!(
            "true parameter must lie in [-1, 1]; got {}",
            cfg.theta
        )));
    }
    if !(cfg.gamma >= 0.0) || !cfg.gamma.is_finite() {
        return Err(Error::Config(format!(
            "adaptation gain must be non-negative; got {}",
            cfg.gamma
        )));
    }
    if !(cfg.k > 0.0) {
        return Err(Error::Config(format!(
            "decay rate must be positive; got {}",
            cfg.k
        )));
    }
    // Constructing the exploratory system validates the unit-circle start.
    let _exo = ExploratorySystem::hyperbolic_pair(cfg.lambda0)?;

    let (theta, gamma, k, a) = (cfg.theta, cfg.gamma, cfg.k, cfg.a);
    let model = InterconnectionModel::new(
        1,
        3,
        move |x, z, _t, out| {
            let theta_hat = z[0];
            out[0] = -k * x[0] + a * ((x[0] * theta + theta).sin() - (x[0] * theta_hat + theta_hat).sin());
        },
        move |x, z, _t, out| {
            let excitation = gamma * x[0].abs();
            out[0] = excitation * z[0];
            out[1] = -excitation * z[1];
            out[2] = excitation;
        },
        |z| -z[2],
        InvariantSet::OriginPoint,
    );
    let z0 = vec![cfg.lambda0[0], cfg.lambda0[1], 0.0];
    let trajectory = integrate(&model, &[cfg.x0], &z0, 0.0, cfg.t_end, cfg.dt)?;

    let len = trajectory.len();
    let theta_hat: Vec<f64> = (0..len).map(|i| trajectory.z(i)[0]).collect();
    let tail_start = len - (len / 10).max(1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &theta_hat[tail_start..] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let theta_drift = hi - lo;
    let final_x = trajectory.final_state()[0];
    let excitation_total = trajectory.z(len - 1)[2];
    let excitation_tail = excitation_total - trajectory.z(tail_start)[2];

    let env = ContractionEnvelope::exponential(cfg.k, 1.0, 1.0 / cfg.k)?;
    let gain_bound = identifier_gain_bound(&env, &reference_schedule(), EX1_D_LAMBDA)?;

    let verdict = match trajectory.status {
        RunStatus::Escaped { .. } => Verdict::Escaped,
        RunStatus::Completed => {
            if final_x.abs() < cfg.tol_x && theta_drift < cfg.tol_theta_drift {
                Verdict::Converged
            } else {
                Verdict::Undecided
            }
        }
    };

    Ok(Example1Run {
        theta_hat,
        verdict,
        final_x,
        final_theta_hat: *trajectory
            .z(len - 1)
            .first()
            .expect("wandering state is non-empty"),
        theta_drift,
        excitation_total,
        excitation_tail,
        gain_bound,
        certified: cfg.gamma <= gain_bound,
        trajectory,
    })
}

/// Certificate budget `σ*` for the hitting-time analysis of the scalar
/// example: the least budget making the trapping inequality hold for the
/// given initial state, enlarged by 5 %, and never below the actually
/// accumulated excitation (again with 5 % headroom) so the shifted
/// certificate `σ* − E(t)` stays positive.
pub fn example1_certificate_budget(
    cfg: &Example1Config,
    excitation_total: f64,
    params: &ScheduleParams,
) -> Result<f64> {
    let env = ContractionEnvelope::exponential(cfg.k, 1.0, 1.0 / cfg.k)?;
    let bound = identifier_gain_bound(&env, params, EX1_D_LAMBDA)?;
    if cfg.gamma >= bound {
        return Err(Error::Domain(format!(
            "gain {} is not within the certificate {bound}; no finite budget exists",
            cfg.gamma
        )));
    }
    let bt0 = 1.0;
    let bracket = bt0 * (1.0 + params.kappa / (1.0 - params.d)) + 1.0 / cfg.k;
    let schedule = crate::smallgain::build_schedule(&env, params)?;
    let sigma_min =
        cfg.gamma * bt0 * cfg.x0.abs() / (schedule.delta0 - cfg.gamma * EX1_D_LAMBDA * bracket);
    Ok(1.05 * sigma_min.max(excitation_total))
}

/// Configuration of the neuron-model identification example: joint
/// state/parameter reconstruction for a two-dimensional neuron model with
/// measured membrane potential, torus-oscillator exploration, and a
/// dead-zone-gated estimation error.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Example2Config {
    /// True recovery decay rate (inside [`HR_BETA_BOX`]).
    pub beta_true: f64,
    /// True recovery quadratic gain (inside [`HR_D_BOX`]).
    pub d_true: f64,
    /// Known model coefficients.
    pub known: HRKnownParams,
    /// Output-injection gain of the observer.
    pub rho: f64,
    /// Adaptation gain.
    pub gamma: f64,
    /// Resolution margin of the dead zone (error-space units).
    pub delta: f64,
    /// Frequency of the second oscillator; the first runs at `π·omega2`,
    /// keeping the ratio irrational.
    pub omega2: f64,
    /// Amplitude of the rectangular input pulse.
    pub pulse_amplitude: f64,
    /// Pulse onset time.
    pub pulse_on: f64,
    /// Pulse release time.
    pub pulse_off: f64,
    /// Initial plant state `(x₁, x₂)`.
    pub x0: [f64; 2],
    /// Initial filter state.
    pub w0: f64,
    /// Initial membrane estimate (defaults to the measured `x₁(0)`).
    pub x_hat0: Option<f64>,
    /// Initial oscillator state.
    pub lambda0: [f64; 4],
    /// Horizon.
    pub t_end: f64,
    /// Step size.
    pub dt: f64,
    /// Convergence tolerance on the trailing gated residual.
    pub tol_residual: f64,
}

impl Default for Example2Config {
    fn default() -> Self {
        Self {
            beta_true: 0.5,
            d_true: 2.5,
            known: HRKnownParams::default(),
            rho: 10.0,
            gamma: 3e-4,
            delta: 1e-3,
            omega2: 200.0,
            pulse_amplitude: 0.7,
            pulse_on: 100.0,
            pulse_off: 300.0,
            x0: [0.0, 0.0],
            w0: 0.0,
            x_hat0: None,
            lambda0: [1.0, 0.0, 1.0, 0.0],
            t_end: 2500.0,
            dt: 5e-3,
            tol_residual: 1e-2,
        }
    }
}

/// Outcome of [`run_example2`].
#[derive(Debug, Clone)]
pub struct Example2Run {
    /// Joint trajectory: `x = [x̃]` (observation error) against the
    /// dead-zone ball, `z = [x₁, x₂, w, λ₁…λ₄, E]`.
    pub trajectory: Trajectory,
    /// Estimate series for the recovery decay rate.
    pub beta_hat: Vec<f64>,
    /// Estimate series for the recovery quadratic gain.
    pub d_hat: Vec<f64>,
    /// Final estimates.
    pub final_beta_hat: f64,
    /// Final estimate of the quadratic gain.
    pub final_d_hat: f64,
    /// Mean gated residual over the trailing 10 % window.
    pub trailing_residual: f64,
    /// Largest measured membrane potential (enters the certificates).
    pub x1_sup: f64,
    /// Dead-zone radius `δ/ρ` applied in state space.
    pub deadzone_radius: f64,
    /// Measured membrane series replayed from the fitted parameters:
    /// largest absolute deviation.
    pub replay_max_err: f64,
    /// Root-mean-square deviation of the replay.
    pub replay_rms_err: f64,
    /// Replayed membrane series (same sampling as the trajectory).
    pub replay_x1: Vec<f64>,
    /// Qualitative outcome.
    pub verdict: Verdict,
    /// Admissible gain certified for this run's excitation constants.
    pub gain_bound: f64,
    /// Whether the configured gain is within the certificate.
    pub certified: bool,
    /// Largest relative drift of the oscillator invariants over the run.
    pub invariant_drift: f64,
}

/// Worst-case Lipschitz constant of the parameterized disturbance of the
/// neuron observer over the admissible boxes:
/// `D_f = max( (d_max·‖x₁‖_∞ + c) / β_min², ‖x₁‖_∞ / β_min )`.
pub fn hr_disturbance_lipschitz(known: &HRKnownParams, x1_sup: f64) -> Result<f64> {
    if !(x1_sup >= 0.0) || !x1_sup.is_finite() {
        return Err(Error::Domain(format!(
            "x1_sup must be finite and non-negative; got {x1_sup}"
        )));
    }
    let (beta_min, _) = HR_BETA_BOX;
    let (_, d_max) = HR_D_BOX;
    let wrt_beta = (d_max * x1_sup + known.c) / (beta_min * beta_min);
    let wrt_d = x1_sup / beta_min;
    Ok(wrt_beta.max(wrt_d))
}

/// Runs the neuron-model identification example.
///
/// The plant, the reduced-order observer, the recovery filter
/// `ẇ = −β̂·w + (c − d̂·x₁²)`, the gated torus exploration, and the
/// excitation integral are integrated jointly; the observation error
/// `x̃ = x₁ − x̂` obeys `x̃' = −ρ·x̃ + (x₂ − w)` exactly, so it is used as
/// the state coordinate and `x̂` is reconstructed as `x₁ − x̃`.
pub fn run_example2(cfg: &Example2Config) -> Result<Example2Run> {
    if cfg.beta_true < HR_BETA_BOX.0 || cfg.beta_true > HR_BETA_BOX.1 {
        return Err(Error::Config(format!(
            "true beta {} outside admissible box [{}, {}]",
            cfg.beta_true, HR_BETA_BOX.0, HR_BETA_BOX.1
        )));
    }
    if cfg.d_true < HR_D_BOX.0 || cfg.d_true > HR_D_BOX.1 {
        return Err(Error::Config(format!(
            "true d {} outside admissible box [{}, {}]",
            cfg.d_true, HR_D_BOX.0, HR_D_BOX.1
        )));
    }
    if !(cfg.rho > 0.0) {
        return Err(Error::Config(format!(
            "injection gain must be positive; got {}",
            cfg.rho
        )));
    }
    if !(cfg.delta > 0.0) {
        return Err(Error::Config(format!(
            "resolution margin must be positive; got {}",
            cfg.delta
        )));
    }
    if !(cfg.gamma >= 0.0) || !cfg.gamma.is_finite() {
        return Err(Error::Config(format!(
            "adaptation gain must be non-negative; got {}",
            cfg.gamma
        )));
    }
    if !(cfg.pulse_on < cfg.pulse_off) {
        return Err(Error::Config(format!(
            "pulse window [{}, {}] is empty",
            cfg.pulse_on, cfg.pulse_off
        )));
    }
    let omega1 = PI * cfg.omega2;
    let exo = ExploratorySystem::torus(omega1, cfg.omega2, cfg.lambda0)?;
    let eta = EtaMap::hr_arcsin();
    let deadzone_radius = cfg.delta / cfg.rho;

    let known = cfg.known;
    let (beta_true, d_true) = (cfg.beta_true, cfg.d_true);
    let (gamma, rho) = (cfg.gamma, cfg.rho);
    let (amp, on, off) = (cfg.pulse_amplitude, cfg.pulse_on, cfg.pulse_off);
    let pulse = move |t: f64| if t >= on && t < off { amp } else { 0.0 };
    let exo_f = exo.clone();
    let eta_f = eta.clone();

    // z layout: [x1, x2, w, l1, l2, l3, l4, E]
    let model = InterconnectionModel::new(
        1,
        8,
        move |x, z, _t, out| out[0] = -rho * x[0] + (z[1] - z[2]),
        move |x, z, t, out| {
            let (x1, x2, w) = (z[0], z[1], z[2]);
            let u = pulse(t);
            out[0] = -known.a * x1.powi(3) + known.b * x1 * x1 + x2 + known.alpha * u;
            out[1] = known.c - beta_true * x2 - d_true * x1 * x1;
            let mut est = [0.0; 2];
            (eta_f.eval_fn)(&z[3..7], &mut est);
            let (beta_hat, d_hat) = (est[0], est[1]);
            out[2] = -beta_hat * w + (known.c - d_hat * x1 * x1);
            let gate = (x[0].abs() - deadzone_radius).max(0.0);
            let mut s = [0.0; 4];
            exo_f.field(&z[3..7], &mut s);
            for i in 0..4 {
                out[3 + i] = gamma * gate * s[i];
            }
            out[7] = gamma * gate;
        },
        |z| -z[7],
        InvariantSet::Ball {
            center: vec![0.0],
            radius: deadzone_radius,
        },
    );

    let x_hat0 = cfg.x_hat0.unwrap_or(cfg.x0[0]);
    let x_tilde0 = cfg.x0[0] - x_hat0;
    let z0 = vec![
        cfg.x0[0],
        cfg.x0[1],
        cfg.w0,
        cfg.lambda0[0],
        cfg.lambda0[1],
        cfg.lambda0[2],
        cfg.lambda0[3],
        0.0,
    ];
    let trajectory = integrate(&model, &[x_tilde0], &z0, 0.0, cfg.t_end, cfg.dt)?;

    let len = trajectory.len();
    let mut beta_hat = Vec::with_capacity(len);
    let mut d_hat = Vec::with_capacity(len);
    let mut est = [0.0; 2];
    let mut x1_sup = 0.0f64;
    let mut invariant_drift = 0.0f64;
    for i in 0..len {
        let z = trajectory.z(i);
        eta.eval(&z[3..7], &mut est)?;
        beta_hat.push(est[0]);
        d_hat.push(est[1]);
        x1_sup = x1_sup.max(z[0].abs());
        invariant_drift = invariant_drift.max(exo.invariant_drift(&z[3..7]));
    }
    let tail_start = len - (len / 10).max(1);
    let trailing_residual =
        trajectory.dist[tail_start..].iter().sum::<f64>() / (len - tail_start) as f64;

    // Replay the plant from the fitted parameters under the same input.
    let (beta_fit, d_fit) = (beta_hat[len - 1], d_hat[len - 1]);
    let replay_model = InterconnectionModel::new(
        2,
        0,
        move |x, _z, t, out| {
            let u = pulse(t);
            out[0] = -known.a * x[0].powi(3) + known.b * x[0] * x[0] + x[1] + known.alpha * u;
            out[1] = known.c - beta_fit * x[1] - d_fit * x[0] * x[0];
        },
        |_x, _z, _t, _out| {},
        |_z| 0.0,
        InvariantSet::OriginPoint,
    );
    let replay = integrate(
        &replay_model,
        &[cfg.x0[0], cfg.x0[1]],
        &[],
        0.0,
        cfg.t_end,
        cfg.dt,
    )?;
    let common = len.min(replay.len());
    let mut replay_x1 = Vec::with_capacity(common);
    let mut max_err = 0.0f64;
    let mut sq_err = 0.0f64;
    for i in 0..common {
        let r = replay.x(i)[0];
        replay_x1.push(r);
        let e = (r - trajectory.z(i)[0]).abs();
        max_err = max_err.max(e);
        sq_err += e * e;
    }
    let replay_rms_err = (sq_err / common as f64).sqrt();

    // Certificate for this run's excitation constants: the observation
    // error contracts at rate rho with unit overshoot and input gain 1/rho.
    let env = ContractionEnvelope::exponential(cfg.rho, 1.0, 1.0 / cfg.rho)?;
    let d_lambda = compute_d_lambda(
        1.0 / cfg.rho,
        hr_disturbance_lipschitz(&known, x1_sup)?,
        eta.d_eta,
        exo.norm_bound,
    )?;
    let gain_bound = identifier_gain_bound(&env, &reference_schedule(), d_lambda)?;

    let verdict = match trajectory.status {
        RunStatus::Escaped { .. } => Verdict::Escaped,
        RunStatus::Completed => {
            if trailing_residual < cfg.tol_residual {
                Verdict::Converged
            } else {
                Verdict::Undecided
            }
        }
    };

    Ok(Example2Run {
        beta_hat,
        d_hat,
        final_beta_hat: beta_fit,
        final_d_hat: d_fit,
        trailing_residual,
        x1_sup,
        deadzone_radius,
        replay_max_err: max_err,
        replay_rms_err,
        replay_x1,
        verdict,
        gain_bound,
        certified: cfg.gamma <= gain_bound,
        invariant_drift,
        trajectory,
    })
}
