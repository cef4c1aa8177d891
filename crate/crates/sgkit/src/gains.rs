//! Comparison-function algebra: class K / K-infinity certification, factored
//! contraction envelopes, and the factorization structure of the
//! wandering-output bound.
//!
//! Class membership and factorization inequalities are certified by dense
//! grid sampling rather than symbolic proof; every validator reports the
//! exact grid and tolerance it used so certificates are reproducible.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Default number of grid points used by the sampling validators.
pub const DEFAULT_GRID: usize = 512;
/// Default relative tolerance for [`beta_t_inverse`].
pub const DEFAULT_INV_TOL: f64 = 1e-12;
/// Upper end of the bisection bracket used when no closed-form inverse
/// exists.
pub const DEFAULT_T_MAX: f64 = 1e6;
/// Absolute slack granted to sampled factorization inequalities.
pub const FACTORIZATION_SLACK: f64 = 1e-12;
/// Absolute tolerance on `f(0)` for class-K membership.
pub const CLASS_K_ZERO_TOL: f64 = 1e-15;

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar comparison function `[0, ∞) → [0, ∞)`.
///
/// Wraps an evaluation closure together with an optional `domain_hint`
/// (the largest argument for which the definition is trusted); grid
/// validators use the hint as their default sampling range.
///
/// Evaluation is checked: negative or non-finite arguments are domain
/// errors and non-finite results are evaluation errors — values are never
/// silently clamped.
#[derive(Clone)]
pub struct ScalarFn {
    eval: EvalFn,
    name: String,
    /// Largest argument for which the definition is trusted, if bounded.
    pub domain_hint: Option<f64>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn")
            .field("name", &self.name)
            .field("domain_hint", &self.domain_hint)
            .finish()
    }
}

impl ScalarFn {
    /// Wraps an arbitrary closure as a comparison function.
    pub fn new(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            name: name.into(),
            domain_hint: None,
        }
    }

    /// The identity map `s ↦ s`.
    pub fn identity() -> Self {
        Self::new("identity", |s| s)
    }

    /// The linear map `s ↦ a·s`.
    pub fn linear(a: f64) -> Self {
        Self::new(format!("linear({a})"), move |s| a * s)
    }

    /// The power map `s ↦ s^p`.
    pub fn power(p: f64) -> Self {
        Self::new(format!("power({p})"), move |s| s.powf(p))
    }

    /// The exponential decay `t ↦ d·e^{−λt}` used as a contraction-rate
    /// factor.
    pub fn exp_decay(lambda: f64, d: f64) -> Self {
        Self::new(format!("exp_decay({lambda}, {d})"), move |t| d * (-lambda * t).exp())
    }

    /// A piecewise-linear interpolant through `points`.
    ///
    /// Breakpoint abscissae must be finite, non-negative, and strictly
    /// increasing, and at least two points are required. Outside the
    /// breakpoint range the first/last segment is extrapolated.
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config(
                "piecewise-linear table needs at least two breakpoints".into(),
            ));
        }
        for window in points.windows(2) {
            let (x0, x1) = (window[0].0, window[1].0);
            if !(x1 > x0) {
                return Err(Error::Config(format!(
                    "table breakpoints must be strictly increasing; got {x0} before {x1}"
                )));
            }
        }
        if points
            .iter()
            .any(|&(x, y)| !x.is_finite() || !y.is_finite() || x < 0.0)
        {
            return Err(Error::Config(
                "table breakpoints must be finite with non-negative abscissae".into(),
            ));
        }
        let hint = points.last().map(|&(x, _)| x);
        let mut f = Self::new("table", move |s| {
            // Locate the segment containing s (clamping to the end segments
            // for extrapolation) and interpolate linearly.
            let idx = match points.iter().position(|&(x, _)| x > s) {
                Some(0) => 0,
                Some(i) => i - 1,
                None => points.len() - 2,
            };
            let (xa, ya) = points[idx];
            let (xb, yb) = points[idx + 1];
            ya + (yb - ya) * (s - xa) / (xb - xa)
        });
        f.domain_hint = hint;
        Ok(f)
    }

    /// Returns the same function with a recorded trusted domain.
    pub fn with_domain_hint(mut self, upper: f64) -> Self {
        self.domain_hint = Some(upper);
        self
    }

    /// Descriptive name used in reports and error messages.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates the function at `s ≥ 0`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!(
                "{} is defined on [0, ∞); got argument {s}",
                self.name
            )));
        }
        let y = (self.eval)(s);
        if !y.is_finite() {
            return Err(Error::Evaluation(format!(
                "{} returned non-finite value {y} at s = {s}",
                self.name
            )));
        }
        Ok(y)
    }
}

/// Structural tag describing how much a contraction envelope factors.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeKind {
    /// No special structure beyond separability of the stored factors.
    General,
    /// Separable bound `β(s, t) ≤ β_x(s)·β_t(t)`.
    Separable,
    /// Exponential rate `β_t(t) = D_β·e^{−λt}` with gain `D_β ≥ 1`.
    Exponential {
        /// Decay rate `λ > 0`.
        lambda: f64,
        /// Overshoot gain `D_β ≥ 1`.
        d_beta: f64,
    },
}

/// Input-to-state contraction envelope of the stable subsystem:
/// `‖x(t)‖_A ≤ β_x(‖x(t₀)‖_A)·β_t(t − t₀) + c·‖u‖_∞`.
///
/// `β_x` must be class K-infinity, `β_t` strictly decreasing to zero, and
/// `c ≥ 0` is the asymptotic input gain.
#[derive(Clone, Debug)]
pub struct ContractionEnvelope {
    /// State-dependent factor `β_x` (class K-infinity).
    pub beta_x: ScalarFn,
    /// Time-dependent factor `β_t` (strictly decreasing to zero).
    pub beta_t: ScalarFn,
    /// Asymptotic gain of the coupling input.
    pub c: f64,
    /// Structural tag used to select closed-form shortcuts.
    pub kind: EnvelopeKind,
}

impl ContractionEnvelope {
    /// Exponential envelope `β(s, t) = D_β·s·e^{−λt}` with input gain `c`.
    pub fn exponential(lambda: f64, d_beta: f64, c: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "exponential envelope needs lambda > 0; got {lambda}"
            )));
        }
        if !(d_beta >= 1.0) || !d_beta.is_finite() {
            return Err(Error::Domain(format!(
                "exponential envelope needs D_beta >= 1; got {d_beta}"
            )));
        }
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("input gain c must be >= 0; got {c}")));
        }
        Ok(Self {
            beta_x: ScalarFn::identity(),
            beta_t: ScalarFn::exp_decay(lambda, d_beta),
            c,
            kind: EnvelopeKind::Exponential { lambda, d_beta },
        })
    }

    /// Separable envelope from explicit factors.
    pub fn separable(beta_x: ScalarFn, beta_t: ScalarFn, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("input gain c must be >= 0; got {c}")));
        }
        Ok(Self {
            beta_x,
            beta_t,
            c,
            kind: EnvelopeKind::Separable,
        })
    }

    /// Envelope with no structure assumed beyond the stored factors.
    pub fn general(beta_x: ScalarFn, beta_t: ScalarFn, c: f64) -> Result<Self> {
        let mut env = Self::separable(beta_x, beta_t, c)?;
        env.kind = EnvelopeKind::General;
        Ok(env)
    }

    /// Value of the time factor at zero, `β_t(0)`.
    pub fn beta_t0(&self) -> Result<f64> {
        self.beta_t.eval(0.0)
    }

    /// Evaluates the full envelope `β(s, t) = β_x(s)·β_t(t)`.
    pub fn beta(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.beta_x.eval(s)? * self.beta_t.eval(t)?)
    }
}

/// Inverts the time factor of a contraction envelope: finds `t ≥ 0` with
/// `β_t(t) = y`.
///
/// For exponential envelopes the closed form `t = ln(D_β / y) / λ` is used;
/// otherwise the solution is bracketed in `[0, T]` (with `T` grown
/// geometrically up to [`DEFAULT_T_MAX`]) and bisected to the requested
/// relative tolerance. `y` must satisfy `0 < y ≤ β_t(0)`.
pub fn beta_t_inverse(env: &ContractionEnvelope, y: f64) -> Result<f64> {
    beta_t_inverse_with(env, y, DEFAULT_INV_TOL, DEFAULT_T_MAX)
}

/// [`beta_t_inverse`] with explicit tolerance and bracket bound.
pub fn beta_t_inverse_with(
    env: &ContractionEnvelope,
    y: f64,
    tol_rel: f64,
    t_max: f64,
) -> Result<f64> {
    let b0 = env.beta_t0()?;
    if !(y > 0.0) || y > b0 * (1.0 + 1e-15) || !y.is_finite() {
        return Err(Error::Domain(format!(
            "beta_t_inverse needs 0 < y <= beta_t(0) = {b0}; got y = {y}"
        )));
    }
    if let EnvelopeKind::Exponential { lambda, d_beta } = env.kind {
        return Ok(((d_beta / y).ln() / lambda).max(0.0));
    }

    // Bracket the crossing; beta_t is assumed strictly decreasing, and any
    // increase between probe samples is reported as an invariant violation.
    let mut lo = 0.0f64;
    let mut f_lo = b0 - y;
    if f_lo <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0f64;
    let mut prev_sample = b0;
    loop {
        let bt = env.beta_t.eval(hi)?;
        if bt > prev_sample + 1e-12 {
            return Err(Error::Invariant(format!(
                "beta_t is not decreasing: beta_t({hi}) = {bt} exceeds earlier sample {prev_sample}"
            )));
        }
        prev_sample = bt;
        if bt - y < 0.0 {
            break;
        }
        lo = hi;
        f_lo = bt - y;
        hi *= 2.0;
        if hi > t_max {
            return Err(Error::Domain(format!(
                "beta_t never reaches y = {y} on [0, {t_max}]; y may be below the infimum of beta_t"
            )));
        }
    }
    let _ = f_lo;

    let tol = tol_rel * y.max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = env.beta_t.eval(mid)? - y;
        if f_mid.abs() <= tol || (hi - lo) <= f64::EPSILON * hi.max(1.0) {
            return Ok(mid);
        }
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One adjacent grid pair violating strict monotonicity.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MonotonicityViolation {
    /// Left abscissa of the offending pair.
    pub s0: f64,
    /// Right abscissa of the offending pair.
    pub s1: f64,
    /// Function value at `s0`.
    pub f0: f64,
    /// Function value at `s1`.
    pub f1: f64,
}

/// Grid certificate of class-K membership.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ClassKReport {
    /// Whether `|f(0)| ≤ 1e-15`.
    pub zero_at_zero: bool,
    /// Value observed at zero.
    pub f_at_zero: f64,
    /// Every adjacent grid pair on which strict increase fails.
    pub violations: Vec<MonotonicityViolation>,
    /// Upper end of the sampled range.
    pub upper: f64,
    /// Number of grid points sampled.
    pub grid: usize,
}

impl ClassKReport {
    /// True when the sampled evidence is consistent with class-K
    /// membership.
    pub fn passes(&self) -> bool {
        self.zero_at_zero && self.violations.is_empty()
    }
}

/// Certifies class-K membership of `f` on `[0, upper]` by sampling
/// `grid ≥ 2` equispaced points: requires `|f(0)| ≤ 1e-15` and strict
/// increase across every adjacent pair.
///
/// This is a sampled certificate, not a proof; the report records the grid
/// so failures are reproducible.
pub fn validate_class_k(f: &ScalarFn, grid: usize, upper: f64) -> Result<ClassKReport> {
    if grid < 2 {
        return Err(Error::Domain(format!(
            "class-K validation needs at least 2 grid points; got {grid}"
        )));
    }
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::Domain(format!(
            "class-K validation needs a positive finite upper bound; got {upper}"
        )));
    }
    let step = upper / (grid - 1) as f64;
    let mut violations = Vec::new();
    let mut prev_s = 0.0;
    let mut prev_f = f.eval(0.0)?;
    let f_at_zero = prev_f;
    for i in 1..grid {
        let s = step * i as f64;
        let fs = f.eval(s)?;
        if !(fs > prev_f) {
            violations.push(MonotonicityViolation {
                s0: prev_s,
                s1: s,
                f0: prev_f,
                f1: fs,
            });
        }
        prev_s = s;
        prev_f = fs;
    }
    Ok(ClassKReport {
        zero_at_zero: f_at_zero.abs() <= CLASS_K_ZERO_TOL,
        f_at_zero,
        violations,
        upper,
        grid,
    })
}

/// Integral bound structure of the wandering subsystem: along solutions,
/// `∫γ₁(u) ≤ h(z(t₀)) − h(z(t)) ≤ ∫γ₀(u)`, together with a factorization
/// `γ₀(a·b) ≤ γ₀₁(a)·γ₀₂(b)` used by the constructive schedules.
#[derive(Clone)]
pub struct WanderingBound {
    /// Monotonicity certificate `h` evaluated on the wandering state.
    pub h: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    /// Upper comparison function of the sandwich.
    pub gamma0: ScalarFn,
    /// Lower comparison function of the sandwich.
    pub gamma1: ScalarFn,
    /// First factor of the factorization of `γ₀`.
    pub gamma01: ScalarFn,
    /// Second factor of the factorization of `γ₀`.
    pub gamma02: ScalarFn,
    /// Lipschitz constant of `γ₀` when it is linear, `γ₀(s) = D_γ₀·s`.
    pub d_gamma0: Option<f64>,
}

impl fmt::Debug for WanderingBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WanderingBound")
            .field("gamma0", &self.gamma0)
            .field("gamma1", &self.gamma1)
            .field("gamma01", &self.gamma01)
            .field("gamma02", &self.gamma02)
            .field("d_gamma0", &self.d_gamma0)
            .finish()
    }
}

impl WanderingBound {
    /// General bound from explicit comparison functions.
    pub fn new(
        h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gamma0: ScalarFn,
        gamma1: ScalarFn,
        gamma01: ScalarFn,
        gamma02: ScalarFn,
        d_gamma0: Option<f64>,
    ) -> Self {
        Self {
            h: Arc::new(h),
            gamma0,
            gamma1,
            gamma01,
            gamma02,
            d_gamma0,
        }
    }

    /// Lipschitz bound `γ₀ = γ₁ = D_γ₀·id` with the canonical factorization
    /// `γ₀₁ = id`, `γ₀₂ = D_γ₀·id`.
    ///
    /// This is the structure induced by adaptive identifiers whose
    /// excitation integrand is `D_γ₀·‖x‖`.
    pub fn lipschitz(h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, d_gamma0: f64) -> Self {
        Self::new(
            h,
            ScalarFn::linear(d_gamma0),
            ScalarFn::linear(d_gamma0),
            ScalarFn::identity(),
            ScalarFn::linear(d_gamma0),
            Some(d_gamma0),
        )
    }
}

/// Grid certificate of the factorization `γ₀(a·b) ≤ γ₀₁(a)·γ₀₂(b)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FactorizationReport {
    /// True when every sampled pair satisfies the inequality with
    /// [`FACTORIZATION_SLACK`].
    pub pass: bool,
    /// Smallest sampled margin `γ₀₁(a)·γ₀₂(b) − γ₀(a·b)` (negative when
    /// the inequality fails).
    pub worst_margin: f64,
    /// Argument pair achieving the worst margin.
    pub worst_pair: (f64, f64),
    /// Number of sampled pairs violating the inequality.
    pub violations: usize,
    /// Upper end of the sampled square.
    pub upper: f64,
    /// Grid points per axis.
    pub grid: usize,
}

/// Checks the factorization inequality `γ₀(a·b) ≤ γ₀₁(a)·γ₀₂(b)` on an
/// equispaced grid over `[0, upper]²` with absolute slack
/// [`FACTORIZATION_SLACK`], reporting the worst margin observed.
pub fn check_factorization(
    wb: &WanderingBound,
    upper: f64,
    grid: usize,
) -> Result<FactorizationReport> {
    if grid < 2 {
        return Err(Error::Domain(format!(
            "factorization check needs at least 2 grid points; got {grid}"
        )));
    }
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::Domain(format!(
            "factorization check needs a positive finite upper bound; got {upper}"
        )));
    }
    let step = upper / (grid - 1) as f64;
    let mut worst_margin = f64::INFINITY;
    let mut worst_pair = (0.0, 0.0);
    let mut violations = 0usize;
    for i in 0..grid {
        let a = step * i as f64;
        let g01 = wb.gamma01.eval(a)?;
        for j in 0..grid {
            let b = step * j as f64;
            let lhs = wb.gamma0.eval(a * b)?;
            let rhs = g01 * wb.gamma02.eval(b)?;
            let margin = rhs - lhs;
            if margin < worst_margin {
                worst_margin = margin;
                worst_pair = (a, b);
            }
            if margin < -FACTORIZATION_SLACK {
                violations += 1;
            }
        }
    }
    Ok(FactorizationReport {
        pass: violations == 0,
        worst_margin,
        worst_pair,
        violations,
        upper,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_scalar_fns_evaluate() {
        assert_eq!(ScalarFn::identity().eval(2.5).unwrap(), 2.5);
        assert_eq!(ScalarFn::linear(3.0).eval(2.0).unwrap(), 6.0);
        assert_eq!(ScalarFn::power(2.0).eval(3.0).unwrap(), 9.0);
        assert_relative_eq!(
            ScalarFn::exp_decay(1.0, 2.0).eval(1.0).unwrap(),
            2.0 * (-1.0f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn eval_rejects_bad_arguments_and_values() {
        let f = ScalarFn::identity();
        assert!(matches!(f.eval(-1.0), Err(Error::Domain(_))));
        assert!(matches!(f.eval(f64::NAN), Err(Error::Domain(_))));
        let g = ScalarFn::new("bad", |s| (s - 1.0).ln());
        assert!(matches!(g.eval(0.5), Err(Error::Evaluation(_))));
    }

    #[test]
    fn table_interpolates_and_validates() {
        let t = ScalarFn::table(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert_relative_eq!(t.eval(0.5).unwrap(), 1.0);
        assert_relative_eq!(t.eval(1.5).unwrap(), 2.5);
        // Extrapolation continues the end segments.
        assert_relative_eq!(t.eval(3.0).unwrap(), 4.0);
        assert!(ScalarFn::table(vec![(0.0, 0.0)]).is_err());
        assert!(ScalarFn::table(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn exponential_inverse_closed_form() {
        let env = ContractionEnvelope::exponential(1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(
            beta_t_inverse(&env, 0.25).unwrap(),
            4.0f64.ln(),
            max_relative = 1e-14
        );
        let env2 = ContractionEnvelope::exponential(2.0, 1.0, 0.0).unwrap();
        assert_eq!(beta_t_inverse(&env2, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn bisection_inverse_matches_oracle() {
        // beta_t(t) = 1/(1+t); the solution of beta_t(t) = 0.1 is t = 9.
        let env = ContractionEnvelope::separable(
            ScalarFn::identity(),
            ScalarFn::new("recip", |t| 1.0 / (1.0 + t)),
            0.0,
        )
        .unwrap();
        let t = beta_t_inverse(&env, 0.1).unwrap();
        assert!((env.beta_t.eval(t).unwrap() - 0.1).abs() <= 1e-12);
        assert_relative_eq!(t, 9.0, max_relative = 1e-9);
    }

    #[test]
    fn inverse_rejects_out_of_range_targets() {
        let env = ContractionEnvelope::exponential(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(beta_t_inverse(&env, 0.0), Err(Error::Domain(_))));
        assert!(matches!(beta_t_inverse(&env, 1.5), Err(Error::Domain(_))));
        // A time factor bounded away from zero never reaches small targets.
        let flat = ContractionEnvelope::separable(
            ScalarFn::identity(),
            ScalarFn::new("floor", |t| 0.5 + 1.0 / (1.0 + t)),
            0.0,
        )
        .unwrap();
        assert!(matches!(beta_t_inverse(&flat, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_detects_non_monotone_time_factor() {
        let env = ContractionEnvelope::separable(
            ScalarFn::identity(),
            ScalarFn::new("vee", |t| {
                if t <= 1.0 {
                    1.0 - 0.5 * t
                } else {
                    0.5 + 0.1 * (t - 1.0)
                }
            }),
            0.0,
        )
        .unwrap();
        // The probe samples at 1, 2, 4, ... see an increase before any sign
        // change, which must surface as an invariant violation.
        match beta_t_inverse(&env, 1e-3) {
            Err(Error::Invariant(_)) => {}
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn class_k_accepts_identity_and_rejects_offset_or_flat() {
        assert!(validate_class_k(&ScalarFn::identity(), 64, 10.0)
            .unwrap()
            .passes());
        let offset = ScalarFn::new("offset", |s| s + 0.1);
        let r = validate_class_k(&offset, 64, 10.0).unwrap();
        assert!(!r.passes());
        assert!(!r.zero_at_zero);
        let flat = ScalarFn::new("saturating", |s| s.min(1.0));
        let r = validate_class_k(&flat, 128, 4.0).unwrap();
        assert!(!r.passes());
        assert!(!r.violations.is_empty());
        assert!(r.violations.iter().all(|v| v.s0 >= 1.0 - 1e-12));
    }

    #[test]
    fn class_k_validates_preconditions() {
        assert!(matches!(
            validate_class_k(&ScalarFn::identity(), 1, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            validate_class_k(&ScalarFn::identity(), 16, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn factorization_identity_case_is_tight() {
        // gamma0 = gamma01 = gamma02 = id: equality holds, margin 0 at the
        // worst pair.
        let wb = WanderingBound::new(
            |z| z[0],
            ScalarFn::identity(),
            ScalarFn::identity(),
            ScalarFn::identity(),
            ScalarFn::identity(),
            None,
        );
        let r = check_factorization(&wb, 10.0, 64).unwrap();
        assert!(r.pass);
        assert!(r.worst_margin.abs() <= 1e-9);
    }

    #[test]
    fn factorization_power_case_passes_and_exp_case_fails() {
        let squares = WanderingBound::new(
            |z| z[0],
            ScalarFn::power(2.0),
            ScalarFn::power(2.0),
            ScalarFn::power(2.0),
            ScalarFn::power(2.0),
            None,
        );
        assert!(check_factorization(&squares, 5.0, 64).unwrap().pass);

        // gamma0(s) = e^s − 1 does not factor through identities: at
        // a = b = 2, e^4 − 1 > 4.
        let exp = WanderingBound::new(
            |z| z[0],
            ScalarFn::new("expm1", |s| s.exp_m1()),
            ScalarFn::identity(),
            ScalarFn::identity(),
            ScalarFn::identity(),
            None,
        );
        let r = check_factorization(&exp, 2.0, 33).unwrap();
        assert!(!r.pass);
        assert!(r.worst_margin < 0.0);
        assert!(r.violations > 0);
    }

    #[test]
    fn lipschitz_bound_has_canonical_factorization() {
        let wb = WanderingBound::lipschitz(|z| z[0], 0.05);
        assert_eq!(wb.d_gamma0, Some(0.05));
        let r = check_factorization(&wb, 100.0, 64).unwrap();
        assert!(r.pass);
        assert_relative_eq!(wb.gamma01.eval(3.0).unwrap(), 3.0);
        assert_relative_eq!(wb.gamma02.eval(3.0).unwrap(), 0.15);
    }
}
