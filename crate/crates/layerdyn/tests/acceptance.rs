//! Acceptance gate: every release-blocking property of the crate, one test
//! per criterion, each printing a single PASS/FAIL verdict line (visible
//! with `cargo test --test acceptance -- --nocapture`, or in the captured
//! output of a failure).

use std::time::Instant;

use layerdyn::experiments::{
    asymptotics_sweep, compare_pde_ode, metastability_sweep, tau_limit_study, CompareConfig,
    MetastabilityConfig, SweepMethod, TauStudyConfig,
};
use layerdyn::layer_ode::{
    integrate_layers, layer_rhs, leading_s, leading_s_inv, lengths_lpm, project_conservative,
    IntegrateOptions, LayerState, OdeModel, OdeParams,
};
use layerdyn::numerics::stencil::second_derivative_order8_reflect;
use layerdyn::numerics::trapezoid;
use layerdyn::pde::{run_simulation, track_layers, Grid, ModelKind, SimOptions};
use layerdyn::potential::{
    damping_average, transition_energy, wave_constants, Damping, ModelParams, Potential,
};
use layerdyn::profile::{build_profile, renormalized_energy, LayerVector};

fn verdict(criterion: u32, label: &str, pass: bool, detail: String, started: Instant) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {criterion} ({label}): {status} — {detail} [{:.2} s]",
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {criterion} ({label}): {detail}");
}

fn layers(h: &[f64]) -> LayerVector {
    LayerVector::new(h.to_vec()).unwrap()
}

#[test]
fn criterion_1_scalar_constants() {
    let started = Instant::now();
    let quartic = Potential::quartic();
    let c_f = transition_energy(&quartic).unwrap();
    let constants = wave_constants(&quartic).unwrap();
    let damping = Damping::relaxation(0.1, &quartic).unwrap();
    let gamma = damping_average(&quartic, &damping).unwrap();

    let c_f_exact = 2.0 * 2.0_f64.sqrt() / 3.0; // 0.9428090416
    let a_exact = 2.0_f64.sqrt(); // 1.41421356
    let errors = [
        (c_f - c_f_exact).abs(),
        (constants.a_plus - a_exact).abs(),
        (constants.a_minus - a_exact).abs(),
        (gamma - 0.96).abs(),
    ];
    let k_errors = [
        (constants.k_plus - 4.0).abs(),
        (constants.k_minus - 4.0).abs(),
    ];
    let pass = errors.iter().all(|e| *e <= 1e-9) && k_errors.iter().all(|e| *e <= 1e-7);
    verdict(
        1,
        "scalar constants",
        pass,
        format!(
            "c_F {c_f:.12} (err {:.1e}), A {:.12} (err {:.1e}), K {:.10} (err {:.1e}), \
             gamma {gamma:.12} (err {:.1e})",
            errors[0], constants.a_plus, errors[1], constants.k_plus, k_errors[0], errors[3]
        ),
        started,
    );
}

#[test]
fn criterion_2_interaction_asymptotics() {
    let started = Instant::now();
    let rows = asymptotics_sweep(&[0.08, 0.06, 0.05, 0.04], &Potential::quartic(), 1.0, 4)
        .expect("sweep (including its monotone-decrease check)");
    let beta_at = |r: f64| {
        rows.iter()
            .find(|row| (row.r - r).abs() < 1e-12)
            .unwrap()
            .beta_rel_error
    };
    let decreasing = rows.windows(2).all(|w| w[1].beta_rel_error < w[0].beta_rel_error);
    let pass = beta_at(0.06) <= 1e-2 && beta_at(0.05) <= 1e-3 && decreasing;
    verdict(
        2,
        "interaction asymptotics",
        pass,
        format!(
            "beta rel err {:.2e} at r=0.06 (<=1e-2), {:.2e} at r=0.05 (<=1e-3), \
             strictly decreasing over r in {{0.08,0.06,0.05,0.04}}: {decreasing}",
            beta_at(0.06),
            beta_at(0.05)
        ),
        started,
    );
}

#[test]
fn criterion_3_layered_profile() {
    let started = Instant::now();
    let epsilon = 0.02;
    let n = 1024;
    let positions = [0.25, 0.5, 0.75];
    let h = layers(&positions);
    let quartic = Potential::quartic();
    let profile = build_profile(&h, epsilon, &quartic, n).unwrap();
    let grid = Grid::new(n).unwrap();
    let dx = grid.dx();

    let zeros = track_layers(&profile.u, grid);
    let zero_error = positions
        .iter()
        .zip(zeros.iter())
        .map(|(want, got)| (want - got).abs())
        .fold(0.0_f64, f64::max);
    let zeros_ok = zeros.len() == positions.len() && zero_error <= dx;

    // Interior residual of eps^2 u'' + f(u) away from the layers.
    let mut d2 = vec![0.0; profile.u.len()];
    second_derivative_order8_reflect(&profile.u, dx, &mut d2);
    let mut residual = 0.0_f64;
    for (i, (&u, &uxx)) in profile.u.iter().zip(d2.iter()).enumerate() {
        let x = grid.node(i);
        if positions.iter().any(|&hj| (x - hj).abs() < epsilon) {
            continue;
        }
        residual = residual.max((epsilon * epsilon * uxx + quartic.reaction(u)).abs());
    }

    let rest = vec![0.0; profile.u.len()];
    let energy = renormalized_energy(&profile.u, &rest, epsilon, 0.0, &quartic);
    let c_f = transition_energy(&quartic).unwrap();
    let energy_error = (energy - 3.0 * c_f).abs();

    let pass = zeros_ok && residual <= 1e-6 && energy_error <= 1e-6;
    verdict(
        3,
        "layered profile",
        pass,
        format!(
            "zeros within {zero_error:.2e} of dx={dx:.2e}, interior residual {residual:.2e} \
             (<=1e-6), energy error {energy_error:.2e} vs 3 c_F (<=1e-6)"
        ),
        started,
    );
}

#[test]
fn criterion_4_leading_matrix_inverse() {
    let started = Instant::now();
    let epsilon = 0.05;
    let c_f = transition_energy(&Potential::quartic()).unwrap();
    let mut worst = 0.0_f64;
    for n in 1..=8 {
        let s = leading_s(n, epsilon, c_f);
        let s_inv = leading_s_inv(n, epsilon, c_f);
        for (i, s_row) in s.iter().enumerate() {
            for j in 0..n {
                let mut entry = 0.0;
                for (k, row) in s_inv.iter().enumerate() {
                    entry += s_row[k] * row[j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((entry - want).abs());
            }
        }
    }
    verdict(
        4,
        "leading matrix inverse",
        worst <= 1e-12,
        format!("worst |S S^-1 - I| entry {worst:.2e} over all sizes <= 8 (<=1e-12)"),
        started,
    );
}

#[test]
fn criterion_5_field_invariants() {
    let started = Instant::now();
    let quartic = Potential::quartic();
    let params = ModelParams {
        epsilon: 0.06,
        tau: 0.1,
        potential: quartic.clone(),
        damping: Damping::one(),
    };
    let n = 512;
    let grid = Grid::new(n).unwrap();
    let h = layers(&[0.35, 0.60]);
    let profile = build_profile(&h, params.epsilon, &quartic, n).unwrap();

    // Launch at rest with one record per internal step so the energy check
    // is genuinely per-step.
    let result = run_simulation(
        grid,
        ModelKind::HypMac,
        &params,
        &profile.u,
        None,
        &SimOptions {
            t_end: 50.0,
            record_dt: 0.005,
            dt: None,
        },
    )
    .unwrap();
    let diag = &result.diagnostics;
    let mass_drift = diag
        .mass
        .iter()
        .map(|m| (m - diag.mass[0]).abs())
        .fold(0.0_f64, f64::max);
    let energy_increase = diag
        .energy
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);

    // Nonzero-mean initial velocity: the mean relaxes exponentially, so the
    // mass follows m(t) = m(0) + tau <v0> (1 - exp(-t/tau)).
    let v0: Vec<f64> = (0..grid.nodes())
        .map(|i| 0.05 + 0.02 * (2.0 * std::f64::consts::PI * grid.node(i)).cos())
        .collect();
    let mean_v0 = trapezoid(&v0, grid.dx());
    let moving = run_simulation(
        grid,
        ModelKind::HypMac,
        &params,
        &profile.u,
        Some(&v0),
        &SimOptions {
            t_end: 50.0,
            record_dt: 0.1,
            dt: None,
        },
    )
    .unwrap();
    let m0 = moving.diagnostics.mass[0];
    let law_error = moving
        .diagnostics
        .t
        .iter()
        .zip(moving.diagnostics.mass.iter())
        .map(|(&t, &m)| {
            let predicted = m0 + params.tau * mean_v0 * (1.0 - (-t / params.tau).exp());
            (m - predicted).abs()
        })
        .fold(0.0_f64, f64::max);

    let pass = mass_drift <= 1e-8 && energy_increase <= 1e-10 && law_error <= 1e-6;
    verdict(
        5,
        "field invariants",
        pass,
        format!(
            "mass drift {mass_drift:.2e} (<=1e-8), worst per-step energy increase \
             {energy_increase:.2e} (<=1e-10), mass-law error {law_error:.2e} (<=1e-6)"
        ),
        started,
    );
}

#[test]
fn criterion_6_metastable_speed_scaling() {
    let started = Instant::now();
    let base = MetastabilityConfig {
        epsilons: vec![0.05, 0.06, 0.07, 0.08],
        h0: layers(&[0.35, 0.60]),
        potential: Potential::quartic(),
        method: SweepMethod::Ode,
        n: 512,
        t_end: 50.0,
        record_dt: 0.02,
        rtol: 1e-9,
        rho: 0.5,
        threads: 4,
    };
    let ode_fit = metastability_sweep(&base).unwrap();
    let pde_fit = metastability_sweep(&MetastabilityConfig {
        method: SweepMethod::Pde,
        ..base
    })
    .unwrap();
    let ode_dev = ode_fit.relative_deviation.abs();
    let pde_dev = pde_fit.relative_deviation.abs();
    let pass = ode_dev <= 0.05 && pde_dev <= 0.20;
    verdict(
        6,
        "metastable speed scaling",
        pass,
        format!(
            "slope vs -A*(min gap) {:.6}: ODE {:.6} (dev {:.1}%, <=5%), \
             PDE {:.6} (dev {:.1}%, <=20%)",
            ode_fit.predicted_slope,
            ode_fit.slope,
            100.0 * ode_dev,
            pde_fit.slope,
            100.0 * pde_dev
        ),
        started,
    );
}

#[test]
fn criterion_7_field_vs_layer_ode() {
    let started = Instant::now();
    let config = CompareConfig {
        model: ModelKind::Mac,
        params: ModelParams {
            epsilon: 0.06,
            tau: 0.0,
            potential: Potential::quartic(),
            damping: Damping::one(),
        },
        h0: layers(&[0.35, 0.60]),
        n: 512,
        t_end: 50.0,
        record_dt: 0.1,
        rtol: 1e-9,
        rho: 0.25,
    };
    let report = compare_pde_ode(&config).unwrap();
    let worst = report
        .per_layer_sup_error
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b));
    let window_full = (report.t.last().unwrap() - 50.0).abs() < 1e-12;

    // The equispaced symmetric pair must stay put in both methods.
    let symmetric = compare_pde_ode(&CompareConfig {
        h0: layers(&[0.25, 0.75]),
        ..config
    })
    .unwrap();
    let dx = 1.0 / 512.0;
    let drift = |trajectory: &[Vec<f64>], j: usize| {
        trajectory
            .iter()
            .map(|h| (h[j] - trajectory[0][j]).abs())
            .fold(0.0_f64, f64::max)
    };
    let pde_drift = drift(&symmetric.pde_h, 0).max(drift(&symmetric.pde_h, 1));
    let ode_drift = drift(&symmetric.ode_h, 0).max(drift(&symmetric.ode_h, 1));

    let pass = worst <= 0.02 && window_full && pde_drift <= dx && ode_drift <= dx;
    verdict(
        7,
        "field vs layer ODE",
        pass,
        format!(
            "per-layer sup error {worst:.2e} over the full [0, 50] window (<=0.02); \
             equispaced drift: field {pde_drift:.2e}, ODE {ode_drift:.2e} (<= dx {dx:.2e})"
        ),
        started,
    );
}

#[test]
fn criterion_8_rigid_motion_and_conservation() {
    let started = Instant::now();
    let quartic = Potential::quartic();
    let params = OdeParams::new(0.05, 0.0, quartic.clone(), &Damping::one()).unwrap();

    // Single conserving pair: both layers get the bitwise-identical speed.
    let mut rigid = true;
    for pair in [[0.35, 0.60], [0.2, 0.9], [0.17, 0.33]] {
        let state = LayerState {
            t: 0.0,
            h: pair.to_vec(),
            hdot: None,
        };
        let d = layer_rhs(&state, OdeModel::Mac, &params).unwrap();
        rigid &= d.dh[0].to_bits() == d.dh[1].to_bits();
    }

    // Phase lengths along a three-layer conserving trajectory.
    let trajectory = integrate_layers(
        OdeModel::Mac,
        &OdeParams::new(0.04, 0.0, quartic.clone(), &Damping::one()).unwrap(),
        &layers(&[0.2, 0.5, 0.75]),
        None,
        &IntegrateOptions {
            t_end: 30.0,
            record_dt: 0.1,
            rtol: 1e-9,
            rho: 0.25,
        },
    )
    .unwrap();
    let reference: Vec<(f64, f64)> = trajectory
        .h
        .iter()
        .map(|h| lengths_lpm(&layers(h)))
        .collect();
    let mac_drift = reference
        .iter()
        .map(|(p, m)| {
            (p - reference[0].0)
                .abs()
                .max((m - reference[0].1).abs())
        })
        .fold(0.0_f64, f64::max);

    // Inertial conserving flow launched with projected velocities.
    let mut inertial_params = OdeParams::new(0.05, 0.0, quartic, &Damping::one()).unwrap();
    inertial_params.tau = 0.1;
    let projected = project_conservative(&[0.002, -0.001]);
    let inertial = integrate_layers(
        OdeModel::HypMac,
        &inertial_params,
        &layers(&[0.3, 0.55]),
        Some(&projected),
        &IntegrateOptions {
            t_end: 20.0,
            record_dt: 0.1,
            rtol: 1e-9,
            rho: 0.25,
        },
    )
    .unwrap();
    let lengths: Vec<(f64, f64)> = inertial
        .h
        .iter()
        .map(|h| lengths_lpm(&layers(h)))
        .collect();
    let inertial_drift = lengths
        .iter()
        .map(|(p, m)| (p - lengths[0].0).abs().max((m - lengths[0].1).abs()))
        .fold(0.0_f64, f64::max);

    let pass = rigid && mac_drift <= 1e-8 && inertial_drift <= 1e-8;
    verdict(
        8,
        "rigid motion and conservation",
        pass,
        format!(
            "pair speeds bitwise equal: {rigid}; phase-length drift {mac_drift:.2e} \
             (first-order) and {inertial_drift:.2e} (inertial, projected start), both <=1e-8"
        ),
        started,
    );
}

#[test]
fn criterion_9_vanishing_inertia_limit() {
    let started = Instant::now();
    let rows = tau_limit_study(&TauStudyConfig {
        taus: vec![0.2, 0.1, 0.05],
        epsilon: 0.05,
        h0: layers(&[0.15, 0.6]),
        potential: Potential::quartic(),
        damping: Damping::one(),
        t_end: 50.0,
        record_dt: 0.1,
        rtol: 1e-10,
        rho: 0.25,
        threads: 3,
    })
    .unwrap();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let pass = ratios.len() == 2 && ratios.iter().all(|r| (0.35..=0.65).contains(r));
    verdict(
        9,
        "vanishing inertia limit",
        pass,
        format!(
            "distances {:?} halve with tau: ratios {ratios:?} in [0.35, 0.65]",
            rows.iter().map(|r| r.distance).collect::<Vec<_>>()
        ),
        started,
    );
}
