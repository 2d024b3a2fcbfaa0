//! End-to-end behavior of JSON run configurations: mass-constrained starts
//! resolved against the actual profile builder, stability of the emitted
//! form, and the promise that emitted documents stay minimal.

use layerdyn::config::{emit_config, parse_config};
use layerdyn::profile::build_profile;

/// Absolute tolerance on the rebuilt trapezoid mass of a mass-constrained
/// start (the balancing-layer solve targets 1e-8; grid quadrature of the
/// assembled profile dominates).
const MASS_TOL: f64 = 1e-6;

/// A document that pins the first layer and the total mass must place the
/// balancing layer where the alternating phase bookkeeping says: with one
/// pinned layer at 0.3 and mass -0.2 the second layer solves 2 z - 1.6 =
/// -0.2, i.e. z = 0.7 up to exponentially small plateau corrections.
#[test]
fn mass_constrained_start_places_the_balancing_layer() {
    let config = parse_config(
        r#"{
            "model": "mac",
            "epsilon": 0.05,
            "xi": [0.3],
            "mass": -0.2,
            "t_end": 10.0
        }"#,
    )
    .expect("valid document");
    let potential = config.potential.build().expect("quartic default");
    let h0 = config.initial_layers(&potential).expect("balancing solve");

    assert_eq!(h0.positions()[0], 0.3, "pinned layer must be untouched");
    let z = h0.positions()[1];
    assert!(
        (z - 0.7).abs() < 0.01,
        "balancing layer at {z}, expected 0.7 up to plateau corrections"
    );

    let profile = build_profile(&h0, 0.05, &potential, config.n).expect("profile");
    assert!(
        (profile.mass - (-0.2)).abs() <= MASS_TOL,
        "rebuilt mass {} misses the target -0.2 by more than {MASS_TOL:.1e}",
        profile.mass
    );
}

/// Emitted documents are fixed points: parse(emit(parse(doc))) emits the
/// same bytes. Exercised on a document that touches every family of field
/// (model, specs, scalars, lists, velocity policy, path overrides).
#[test]
fn emitted_documents_are_fixed_points() {
    let document = r#"{
        "model": "hyp-mac",
        "potential": [0.25, 0.0, -0.5, 0.0, 0.25],
        "damping": { "constant": 1.5 },
        "epsilon": 0.05,
        "tau": 0.2,
        "layers": [0.3, 0.6],
        "hdot0": "zero",
        "n": 256,
        "t_end": 25.0,
        "record_dt": 0.1,
        "rtol": 1e-8,
        "rho": 0.5,
        "alpha_mode": "exact",
        "trajectory_path": "runs/traj.csv",
        "report_path": "runs/report.json"
    }"#;
    let config = parse_config(document).expect("valid document");
    let emitted = emit_config(&config);
    let reparsed = parse_config(&emitted).expect("emitted form parses");
    assert_eq!(reparsed, config, "value changed across emit/parse");
    assert_eq!(
        emit_config(&reparsed),
        emitted,
        "emitted form is not a fixed point"
    );
}

/// Sweep documents round-trip too (they use the list fields and the method
/// selector that simulation documents never touch).
#[test]
fn sweep_documents_round_trip() {
    let document = r#"{
        "epsilons": [0.05, 0.06, 0.07],
        "layers": [0.35, 0.6],
        "method": "pde",
        "n": 256,
        "t_end": 50.0,
        "record_dt": 0.02,
        "rho": 0.5
    }"#;
    let config = parse_config(document).expect("valid document");
    let emitted = emit_config(&config);
    assert_eq!(parse_config(&emitted).expect("reparse"), config);
}

/// Defaulted knobs must not clutter emitted documents; only what the user
/// set comes back out.
#[test]
fn emit_strips_defaulted_knobs() {
    let config = parse_config(
        r#"{
            "model": "ac",
            "epsilon": 0.06,
            "layers": [0.25, 0.75],
            "t_end": 5.0
        }"#,
    )
    .expect("valid document");
    let emitted = emit_config(&config);
    for absent in ["rtol", "rho", "\"n\"", "tau", "alpha_mode", "hdot0", "method"] {
        assert!(
            !emitted.contains(absent),
            "emitted document should omit default {absent}, got:\n{emitted}"
        );
    }
    for present in ["model", "epsilon", "layers", "t_end"] {
        assert!(
            emitted.contains(present),
            "emitted document lost {present}:\n{emitted}"
        );
    }
}
