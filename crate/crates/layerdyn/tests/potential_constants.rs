//! Reference values for the potential-derived constants.
//!
//! The expected numbers were computed independently with 50-digit
//! arithmetic (mpmath) from the defining integrals and are frozen here;
//! the tests check that the production quadratures reproduce them well
//! inside the tolerances the rest of the crate relies on.

use layerdyn::potential::{
    damping_average, transition_energy, wave_constants, Damping, Potential,
};

/// Relative tolerance for quadrature-backed constants.
const QUAD_REL_TOL: f64 = 1e-10;
/// Relative tolerance for values with closed forms (well curvatures).
const EXACT_REL_TOL: f64 = 1e-12;

fn assert_rel(got: f64, want: f64, tol: f64, label: &str) {
    let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
    assert!(
        rel <= tol,
        "{label}: got {got:.17e}, want {want:.17e} (rel err {rel:.3e} > {tol:.1e})"
    );
}

/// `F(u) = (u² − 1)²/4 (1 + u/4)`: an asymmetric double well with unequal
/// curvatures, used to exercise every branch-dependent code path.
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
fn quartic_transition_energy_is_2_sqrt2_over_3() {
    let p = Potential::quartic();
    let c = transition_energy(&p).expect("quadrature");
    assert_rel(c, 2.0 * 2.0_f64.sqrt() / 3.0, QUAD_REL_TOL, "c_F quartic");
}

#[test]
fn quartic_wave_constants() {
    let p = Potential::quartic();
    let w = wave_constants(&p).expect("quadrature");
    let sqrt2 = 2.0_f64.sqrt();
    assert_rel(w.a_plus, sqrt2, EXACT_REL_TOL, "A+ quartic");
    assert_rel(w.a_minus, sqrt2, EXACT_REL_TOL, "A- quartic");
    assert_rel(w.k_plus, 4.0, QUAD_REL_TOL, "K+ quartic");
    assert_rel(w.k_minus, 4.0, QUAD_REL_TOL, "K- quartic");
}

#[test]
fn quartic_damping_averages() {
    let p = Potential::quartic();
    let one = damping_average(&p, &Damping::one()).expect("quadrature");
    assert_rel(one, 1.0, EXACT_REL_TOL, "gamma for g = 1");

    // g = 1 − τ f'(u) against the quartic kink weight integrates to
    // 1 − 2τ/5 exactly.
    let relax = Damping::relaxation(0.1, &p).expect("admissible");
    let gamma = damping_average(&p, &relax).expect("quadrature");
    assert_rel(gamma, 0.96, QUAD_REL_TOL, "gamma for relaxation damping");
}

#[test]
fn asymmetric_transition_energy() {
    let c = transition_energy(&asymmetric()).expect("quadrature");
    assert_rel(c, 0.94132334081911214, QUAD_REL_TOL, "c_F asymmetric");
}

#[test]
fn asymmetric_wave_constants() {
    let w = wave_constants(&asymmetric()).expect("quadrature");
    // Curvatures: F''(1) = 5/2, F''(−1) = 3/2.
    assert_rel(w.a_plus, 2.5_f64.sqrt(), EXACT_REL_TOL, "A+ asymmetric");
    assert_rel(w.a_minus, 1.5_f64.sqrt(), EXACT_REL_TOL, "A- asymmetric");
    assert_rel(w.k_plus, 4.6557050999978854, QUAD_REL_TOL, "K+ asymmetric");
    assert_rel(w.k_minus, 3.2617929116153766, QUAD_REL_TOL, "K- asymmetric");
}

#[test]
fn asymmetric_damping_average() {
    let p = asymmetric();
    let relax = Damping::relaxation(0.05, &p).expect("admissible");
    let gamma = damping_average(&p, &relax).expect("quadrature");
    assert_rel(
        gamma,
        0.97967711956786038,
        QUAD_REL_TOL,
        "gamma for asymmetric relaxation damping",
    );
}

#[test]
fn branch_signs_select_the_wells() {
    let w = wave_constants(&asymmetric()).expect("quadrature");
    assert_eq!(w.a(1.0), w.a_plus);
    assert_eq!(w.a(-1.0), w.a_minus);
    assert_eq!(w.k(1.0), w.k_plus);
    assert_eq!(w.k(-1.0), w.k_minus);
}
