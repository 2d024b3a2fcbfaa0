//! Reference values for the standing-wave solver and profile assembly.
//!
//! Expected numbers were computed independently with 50-digit arithmetic
//! (mpmath): the half-period integral by tanh-sinh quadrature on the
//! σ-substituted form, `β`/`α` by bisecting that integral, and wave values
//! by inverting the arc-length map. They are frozen here as regression
//! anchors for the shooting solver.

// The reference literals keep every digit of the high-precision output,
// beyond what an f64 round-trip needs.
#![allow(clippy::excessive_precision)]

use layerdyn::potential::{wave_constants, Potential};
use layerdyn::profile::{
    alpha_beta, alpha_beta_asymptotic, build_profile, half_period, heteroclinic_value,
    kink_superposition, solve_mass_constraint, solve_standing_wave, AlphaMode, LayerVector,
};
use proptest::prelude::*;

/// Absolute tolerance for half-period arcs (quadrature budget 1e-13).
const ARC_ABS_TOL: f64 = 1e-12;
/// Relative tolerance for solved plateau offsets `β` and levels `α`.
const PLATEAU_REL_TOL: f64 = 1e-10;
/// Absolute tolerance for wave values inside the gap.
const VALUE_ABS_TOL: f64 = 5e-13;
/// Absolute tolerance for wave values on the extension past the zero,
/// where the slope reaches `sqrt(2 F(0)) / ε` and the arc-map inversion
/// tolerance is amplified accordingly.
const EXTENSION_ABS_TOL: f64 = 5e-12;

fn assert_close(got: f64, want: f64, tol: f64, label: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{label}: got {got:.17e}, want {want:.17e} (err {:.3e} > {tol:.1e})",
        (got - want).abs()
    );
}

fn assert_rel(got: f64, want: f64, tol: f64, label: &str) {
    let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
    assert!(
        rel <= tol,
        "{label}: got {got:.17e}, want {want:.17e} (rel err {rel:.3e} > {tol:.1e})"
    );
}

/// Same asymmetric double well as in `potential_constants.rs`.
fn asymmetric() -> Potential {
    Potential::polynomial(vec![
        0.25,
        0.0625,
        -0.5,
        -0.125,
        0.25,
        0.0625,
    ])
}

#[test]
fn quartic_half_period_at_moderate_plateau() {
    let p = Potential::quartic();
    let hp = half_period(0.9, &p, 0.05, 1.0).expect("arc quadrature");
    assert_close(hp, 0.13274042732036261, ARC_ABS_TOL, "half period at phi0 = 0.9");
}

#[test]
fn quartic_half_period_round_trip_at_solved_plateau() {
    // The plateau offset solved for a unit gap at ε = 0.05 must reproduce
    // the half gap; the two directions use the same integral, so this
    // checks the solve, not the quadrature.
    let p = Potential::quartic();
    let beta = 2.8854207738381508e-6;
    let hp = half_period(1.0 - beta, &p, 0.05, 1.0).expect("arc quadrature");
    assert_close(hp, 0.5, 1e-11, "half period at the unit-gap plateau");
}

#[test]
fn quartic_unit_gap_wave() {
    let p = Potential::quartic();
    let wave = solve_standing_wave(1.0, 0.05, 1.0, &p).expect("solve");
    assert_rel(wave.beta, 2.8854207738381508e-6, PLATEAU_REL_TOL, "beta");
    assert_rel(wave.alpha, 8.3256290191018387e-12, PLATEAU_REL_TOL, "alpha");
    assert_close(wave.phi0, 1.0 - wave.beta, 1e-16, "phi0 = 1 - beta");

    // Pointwise values: inside the gap, near the zero, and on the
    // extension past it.
    let phi = |x: f64| wave.value(x).expect("in range");
    assert_close(phi(0.0), wave.phi0, 1e-15, "center value");
    assert_close(phi(0.3), 0.99303734510152895, VALUE_ABS_TOL, "phi(0.3)");
    assert_close(phi(0.55), -0.60885936500330577, EXTENSION_ABS_TOL, "phi(0.55)");
    assert!(phi(0.5).abs() <= 1e-9, "wave vanishes at the half gap");
    assert_close(phi(-0.3), phi(0.3), 1e-15, "even symmetry");

    let (_, slope) = wave.value_and_slope(0.3).expect("in range");
    assert_close(slope, -0.19624801236510266, VALUE_ABS_TOL, "phi'(0.3)");

    // Slopes agree with a centered difference of values.
    for &x in &[0.2, 0.45, 0.52] {
        let (_, s) = wave.value_and_slope(x).expect("in range");
        let d = 1e-6;
        let fd = (phi(x + d) - phi(x - d)) / (2.0 * d);
        assert_close(s, fd, 1e-5, "slope vs finite difference");
    }
}

#[test]
fn quartic_unit_gap_plateau_family() {
    // β and α across the unit gap at decreasing ε; the frozen values trace
    // the exponential thinning of the plateau offset.
    let p = Potential::quartic();
    let cases = [
        (0.08, 5.8013571846747055e-4, 3.3636223116036804e-7),
        (0.06, 3.0468919794624224e-5, 9.2832678769043073e-10),
        (0.05, 2.8854207738381508e-6, 8.3256290191018387e-12),
        (0.04, 8.4090257030140887e-8, 7.0711707327785569e-15),
    ];
    for (eps, beta_want, alpha_want) in cases {
        let ab = alpha_beta(1.0, eps, 1.0, &p, AlphaMode::Exact).expect("solve");
        assert_rel(ab.beta, beta_want, 1e-9, &format!("beta at eps {eps}"));
        assert_rel(ab.alpha, alpha_want, 1e-9, &format!("alpha at eps {eps}"));
    }
}

#[test]
fn asymptotic_formulas_track_the_exact_solve() {
    // Relative error of β_asym = K e^{−A/2r} against the shooting solve,
    // frozen at four gap ratios; it must match and decrease with r.
    let p = Potential::quartic();
    let constants = wave_constants(&p).expect("quadrature");
    let cases = [
        (0.08, 2.9187667e-4),
        (0.06, 1.5241505e-5),
        (0.05, 1.4427883e-6),
        (0.04, 4.2045213e-8),
    ];
    let mut last = f64::INFINITY;
    for (r, rel_want) in cases {
        let exact = alpha_beta(1.0, r, 1.0, &p, AlphaMode::Exact).expect("solve");
        let asym = alpha_beta_asymptotic(1.0, r, 1.0, &constants);
        let rel = ((asym.beta - exact.beta) / exact.beta).abs();
        assert_rel(rel, rel_want, 0.05, &format!("beta deviation at r {r}"));
        assert!(rel < last, "deviation must shrink with r (r = {r})");
        last = rel;
    }

    let exact = alpha_beta(1.0, 0.08, 1.0, &p, AlphaMode::Exact).expect("solve");
    let asym = alpha_beta_asymptotic(1.0, 0.08, 1.0, &constants);
    let rel = ((asym.alpha - exact.alpha) / exact.alpha).abs();
    assert_rel(rel, 3.6186648e-6, 0.05, "alpha deviation at r 0.08");
}

#[test]
fn asymmetric_wave_solves_on_both_branches() {
    let p = asymmetric();
    let plus = solve_standing_wave(0.5, 0.05, 1.0, &p).expect("+ branch");
    let minus = solve_standing_wave(0.5, 0.05, -1.0, &p).expect("- branch");
    assert_rel(plus.beta, 1.7180758954769744e-3, PLATEAU_REL_TOL, "beta+");
    assert_rel(plus.alpha, 3.6821287929939649e-6, PLATEAU_REL_TOL, "alpha+");
    assert_rel(minus.beta, 7.1621464688998808e-3, PLATEAU_REL_TOL, "beta-");
    assert_rel(minus.alpha, 3.8288397294666721e-5, PLATEAU_REL_TOL, "alpha-");

    // Branch signs: the plus wave sits near +1, the minus wave near −1.
    assert!(plus.phi0 > 0.99 && minus.phi0 < -0.99);
    // The shallower well (smaller curvature) leaves a wider plateau gap.
    assert!(minus.beta > plus.beta);
}

#[test]
fn heteroclinic_layer_values() {
    // Quartic: the connecting orbit is tanh(x / (√2 ε)).
    let p = Potential::quartic();
    let got = heteroclinic_value(0.07, 0.05, &p);
    assert_close(
        got,
        (0.07f64 / (2.0_f64.sqrt() * 0.05)).tanh(),
        1e-9,
        "quartic heteroclinic",
    );

    let got = heteroclinic_value(0.07, 0.05, &asymmetric());
    assert_close(got, 0.77899545970228921, 1e-7, "asymmetric heteroclinic");
}

#[test]
fn layer_vector_ghosts_and_signs() {
    let h = LayerVector::new(vec![0.25, 0.5, 0.75]).expect("admissible");
    // Reflected ghosts: h₀ = −h₁ and h_{N+2} = 2 − h_{N+1}.
    assert_eq!(h.gaps(), vec![0.5, 0.25, 0.25, 0.5]);
    assert_eq!(h.min_gap(), 0.25);
    // Gap j carries the branch sign (−1)^j.
    assert_eq!(LayerVector::gap_sign(1), -1.0);
    assert_eq!(LayerVector::gap_sign(2), 1.0);

    assert!(LayerVector::new(vec![0.5, 0.25]).is_err(), "unsorted layers");
    assert!(LayerVector::new(vec![0.25, 1.25]).is_err(), "out of range");
    assert!(LayerVector::new(vec![]).is_err(), "empty");
}

#[test]
fn profile_mass_constraint_round_trip() {
    let p = Potential::quartic();
    let h_true = LayerVector::new(vec![0.3, 0.55, 0.8]).expect("admissible");
    let target = build_profile(&h_true, 0.03, &p, 512).expect("build").mass;
    let solved = solve_mass_constraint(&[0.3, 0.55], target, 0.03, &p, 512)
        .expect("mass solve");
    assert_close(
        solved.positions()[2],
        0.8,
        1e-6,
        "recovered last layer position",
    );
}

#[test]
fn kink_superposition_has_the_right_plateaus() {
    let p = Potential::quartic();
    let h = LayerVector::new(vec![0.35, 0.6]).expect("admissible");
    let u = kink_superposition(&h, 0.04, &p, 512);
    assert_eq!(u.len(), 513);
    // Gap parity: u ≈ −1 before the first layer, +1 between, −1 after.
    assert!((u[0] + 1.0).abs() < 0.05, "left plateau near -1, got {}", u[0]);
    let mid = (512.0 * 0.475) as usize;
    assert!((u[mid] - 1.0).abs() < 0.05, "middle plateau near +1");
    assert!((u[512] + 1.0).abs() < 0.05, "right plateau near -1");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The gap-length equation inverts: solving a random gap and feeding
    /// the plateau back through the half-period integral returns the half
    /// gap, and the wave vanishes at the gap end.
    #[test]
    fn solve_then_half_period_round_trips(ell in 0.4f64..1.2, branch in prop::bool::ANY) {
        let p = Potential::quartic();
        let sign = if branch { 1.0 } else { -1.0 };
        let wave = solve_standing_wave(ell, 0.05, sign, &p).expect("solve");
        let hp = half_period(wave.phi0, &p, 0.05, sign).expect("arc");
        prop_assert!((hp - 0.5 * ell).abs() <= 1e-9);
        let end = wave.value(0.5 * ell).expect("in range");
        prop_assert!(end.abs() <= 1e-8);
    }

    /// The half period grows with the plateau level: flatter waves need
    /// longer gaps.
    #[test]
    fn half_period_is_monotone_in_the_plateau(m in 0.3f64..0.95, bump in 0.01f64..0.04) {
        let p = Potential::quartic();
        let lo = half_period(m, &p, 0.05, 1.0).expect("arc");
        let hi = half_period((m + bump).min(0.999), &p, 0.05, 1.0).expect("arc");
        prop_assert!(hi > lo);
    }
}
