//! Property-based checks of the structural invariants: inverse identities,
//! comparison-function admissibility, schedule identities, optimizer
//! soundness, and monotonicity of the membership test.

use proptest::prelude::*;

use sgkit::gains::{
    beta_t_inverse, check_factorization, validate_class_k, ContractionEnvelope, ScalarFn,
    WanderingBound,
};
use sgkit::smallgain::{
    build_schedule, check_trapping_separable, optimize_g, small_gain_g, ScheduleParams,
};

proptest! {
    /// `β_t⁻¹(β_t(t)) = t` for exponential envelopes (closed-form branch).
    #[test]
    fn inverse_recovers_time_exponential(
        lambda in 0.1f64..5.0,
        d_beta in 1.0f64..10.0,
        t in 0.0f64..20.0,
    ) {
        let env = ContractionEnvelope::exponential(lambda, d_beta, 0.0).unwrap();
        let y = env.beta_t.eval(t).unwrap();
        let t_rec = beta_t_inverse(&env, y).unwrap();
        prop_assert!((t_rec - t).abs() <= 1e-9 * t.max(1.0));
    }

    /// The bracketing/bisection branch recovers the time for a non-exponential
    /// strictly decreasing rate function.
    #[test]
    fn inverse_recovers_time_algebraic(
        d_beta in 1.0f64..5.0,
        t in 0.0f64..50.0,
    ) {
        let env = ContractionEnvelope::separable(
            ScalarFn::identity(),
            ScalarFn::new("algebraic", move |s| d_beta / (1.0 + s)),
            0.0,
        ).unwrap();
        let y = d_beta / (1.0 + t);
        let t_rec = beta_t_inverse(&env, y).unwrap();
        prop_assert!((t_rec - t).abs() <= 1e-6 * t.max(1.0));
    }

    /// Power functions `a·s^p` are accepted as class K on any grid.
    #[test]
    fn class_k_accepts_powers(
        a in 0.1f64..10.0,
        p in 0.25f64..4.0,
        upper in 0.5f64..20.0,
    ) {
        let f = ScalarFn::new("power", move |s| a * s.powf(p));
        let report = validate_class_k(&f, 256, upper).unwrap();
        prop_assert!(report.passes());
    }

    /// Positive offsets break the zero-at-zero requirement.
    #[test]
    fn class_k_rejects_offsets(
        a in 0.1f64..10.0,
        offset in 1e-6f64..1.0,
    ) {
        let f = ScalarFn::new("offset", move |s| a * s + offset);
        let report = validate_class_k(&f, 256, 10.0).unwrap();
        prop_assert!(!report.passes());
        prop_assert!(!report.zero_at_zero);
    }

    /// Saturating functions violate strict monotonicity.
    #[test]
    fn class_k_rejects_saturation(cap in 0.1f64..0.9) {
        let f = ScalarFn::new("saturating", move |s| s.min(cap));
        let report = validate_class_k(&f, 256, 1.0).unwrap();
        prop_assert!(!report.passes());
        prop_assert!(!report.violations.is_empty());
    }

    /// The canonical Lipschitz factorization `γ₀(ab) ≤ γ₀₁(a)·γ₀₂(b)`
    /// holds on the checker's grid and pointwise at random arguments.
    #[test]
    fn lipschitz_factorization_holds(
        d_gamma0 in 0.01f64..10.0,
        a in 0.0f64..8.0,
        b in 0.0f64..8.0,
    ) {
        let wb = WanderingBound::lipschitz(|_z: &[f64]| 0.0, d_gamma0);
        let report = check_factorization(&wb, 8.0, 128).unwrap();
        prop_assert!(report.pass, "worst margin {}", report.worst_margin);
        let lhs = wb.gamma0.eval(a * b).unwrap();
        let rhs = wb.gamma01.eval(a).unwrap() * wb.gamma02.eval(b).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
    }

    /// The dwell time returned by the schedule satisfies its defining
    /// contraction identity `β_t(τ*) = ξ*·β_t(0)`.
    #[test]
    fn schedule_dwell_time_identity(
        lambda in 0.1f64..5.0,
        d_beta in 1.0f64..10.0,
        d in 0.05f64..0.95,
        kappa in 1.05f64..10.0,
    ) {
        let env = ContractionEnvelope::exponential(lambda, d_beta, 0.0).unwrap();
        let params = ScheduleParams::new(d, kappa).unwrap();
        let schedule = build_schedule(&env, &params).unwrap();
        let bt0 = env.beta_t0().unwrap();
        let lhs = env.beta_t.eval(schedule.tau_star).unwrap();
        let rhs = schedule.xi_star * bt0;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-12));
    }

    /// Geometric thresholds drain at the constant rate `Δ₀`:
    /// `(σ_i − σ_{i+1}) / (τ*·σ_i) = Δ₀` for every stage.
    #[test]
    fn schedule_rate_identity(
        lambda in 0.1f64..5.0,
        d in 0.05f64..0.95,
        kappa in 1.05f64..10.0,
        i in 0u32..60,
    ) {
        let env = ContractionEnvelope::exponential(lambda, 1.0, 0.0).unwrap();
        let params = ScheduleParams::new(d, kappa).unwrap();
        let schedule = build_schedule(&env, &params).unwrap();
        let ratio = (schedule.sigma(i) - schedule.sigma(i + 1))
            / (schedule.tau_star * schedule.sigma(i));
        prop_assert!((ratio - schedule.delta0).abs() <= 1e-12 * schedule.delta0);
    }

    /// The optimizer never reports a value above the constant at any probed
    /// parameter pair (soundness of the minimum).
    #[test]
    fn optimizer_is_sound(
        lambda in 0.2f64..4.0,
        d in 0.05f64..0.95,
        kappa in 1.05f64..20.0,
    ) {
        let env = ContractionEnvelope::exponential(lambda, 1.0, 0.0).unwrap();
        let opt = optimize_g(&env).unwrap();
        let params = ScheduleParams::new(d, kappa).unwrap();
        let probe = small_gain_g(&env, &params).unwrap();
        prop_assert!(opt.g_star <= probe + 1e-9 * probe.max(1.0));
    }

    /// Shrinking the wandering Lipschitz constant never turns a member into
    /// a non-member.
    #[test]
    fn membership_is_monotone_in_d_gamma0(
        lambda in 0.2f64..4.0,
        c in 0.01f64..0.5,
        x0_norm in 0.0f64..2.0,
        h_z0 in 0.1f64..3.0,
        d_hi in 0.001f64..2.0,
        shrink in 0.01f64..1.0,
    ) {
        let env = ContractionEnvelope::exponential(lambda, 1.0, c).unwrap();
        let params = ScheduleParams::new(0.5, 2.0).unwrap();
        let hi = WanderingBound::lipschitz(|_z: &[f64]| 0.0, d_hi);
        let lo = WanderingBound::lipschitz(|_z: &[f64]| 0.0, d_hi * shrink);
        let verdict_hi = check_trapping_separable(&env, &hi, &params, x0_norm, h_z0).unwrap();
        let verdict_lo = check_trapping_separable(&env, &lo, &params, x0_norm, h_z0).unwrap();
        prop_assert!(!verdict_hi.member || verdict_lo.member);
    }
}
