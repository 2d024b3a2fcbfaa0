//! Cross-validation drivers tying the three views of the slow dynamics
//! together: direct PDE simulation, the reduced layer ODEs, and the
//! closed-form asymptotics.
//!
//! Every experiment is deterministic. Sweeps fan their independent runs out
//! across threads with [`parallel_map`], which preserves input order, so
//! re-running a configuration reproduces its numbers bit-identically.

use thiserror::Error;

use crate::layer_ode::{
    integrate_layers, quasi_stationary_hdot, IntegrateOptions, OdeError, OdeModel, OdeParams,
    OdeStop, Trajectory,
};
use crate::numerics::quad::QuadratureFailure;
use crate::pde::{run_simulation, Grid, ModelKind, PdeError, SimOptions, StopReason};
use crate::potential::{ModelParams, Potential};
use crate::profile::{
    alpha_beta, alpha_beta_asymptotic, build_profile, kink_superposition, AlphaMode, LayerVector,
    ProfileError,
};

/// Largest ratio `r = ε/ℓ` the asymptotics sweep accepts; beyond it the
/// exponentially small remainders are no longer small and the exact-vs-
/// asymptotic comparison stops being meaningful.
pub const MAX_RATIO: f64 = 0.1;

/// Fraction of the realised time window over which sweep speeds are
/// measured. Early records dominate the maximum on attracting
/// configurations while the window still scales with the run, which keeps
/// the measured speed a fixed multiple of the initial one across `ε`.
const SPEED_WINDOW_FRACTION: f64 = 0.25;

/// A comparison window shorter than this fraction of the longer method's
/// reach means one method collided far earlier than the other and the
/// sup-norm error would be measured on a sliver; the comparison errors out
/// instead.
const WINDOW_MISMATCH_FRACTION: f64 = 0.25;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureFailure),
    #[error(
        "methods share only [0, {common:.3}] of their windows (PDE reached {pde:.3}, \
         ODE reached {ode:.3}); the comparison is not meaningful"
    )]
    WindowMismatch { common: f64, pde: f64, ode: f64 },
    #[error("a slope fit needs at least 3 samples, got {got}")]
    InsufficientSamples { got: usize },
    #[error("ratio r = {r} is not below the asymptotic range bound {MAX_RATIO}")]
    RatioOutOfRange { r: f64 },
    #[error("relative error did not decrease from r = {from} to r = {to}")]
    NotMonotone { from: f64, to: f64 },
    #[error("the relaxation-limit study requires g = 1 (unit damping)")]
    DampingNotOne,
    #[error("{detail}")]
    BadConfig { detail: String },
}

/// Run `f` over `items` on up to `threads` workers, preserving order.
///
/// Items are split into contiguous chunks, one worker per chunk writing to
/// the matching output range, so the reduction is deterministic.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if items.is_empty() {
        return Vec::new();
    }
    let workers = threads.max(1).min(items.len());
    let chunk = items.len().div_ceil(workers);
    let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (input, output) in items.chunks(chunk).zip(out.chunks_mut(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (item, slot) in input.iter().zip(output.iter_mut()) {
                    *slot = Some(f(item));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("worker filled slot")).collect()
}

fn ode_model_for(model: ModelKind) -> OdeModel {
    match model {
        ModelKind::Ac => OdeModel::Ac,
        ModelKind::Mac => OdeModel::Mac,
        ModelKind::HypAc => OdeModel::HypAc,
        ModelKind::HypMac => OdeModel::HypMac,
    }
}

/// Configuration shared by the PDE-vs-ODE comparison.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    pub h0: LayerVector,
    /// PDE grid cells.
    pub n: usize,
    pub t_end: f64,
    pub record_dt: f64,
    /// ODE integrator relative tolerance.
    pub rtol: f64,
    /// ODE collision parameter (threshold `ε/ρ`).
    pub rho: f64,
}

/// Outcome of [`compare_pde_ode`]: both trajectories on their common record
/// window and the per-layer sup-norm position error.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub epsilon: f64,
    pub tau: f64,
    pub layer_count: usize,
    pub n: usize,
    pub rtol: f64,
    /// Shared record stamps of the common window.
    pub t: Vec<f64>,
    pub pde_h: Vec<Vec<f64>>,
    pub ode_h: Vec<Vec<f64>>,
    pub per_layer_sup_error: Vec<f64>,
    pub pde_collision: Option<f64>,
    pub ode_collision: Option<f64>,
}

/// Simulate the PDE from the layered profile `u^h` (at rest) and integrate
/// the reduced ODE from the same layers, then report the per-layer sup-norm
/// gap between the tracked PDE interfaces and the ODE positions over their
/// common record window.
///
/// For hyperbolic models the ODE initial velocity is estimated from the
/// first two tracked PDE frames, since the PDE launch `u_t(0) = 0` pins the
/// layers only momentarily.
pub fn compare_pde_ode(config: &CompareConfig) -> Result<ComparisonReport, ExperimentError> {
    let grid = Grid::new(config.n)?;
    let profile = build_profile(
        &config.h0,
        config.params.epsilon,
        &config.params.potential,
        config.n,
    )?;
    let sim = run_simulation(
        grid,
        config.model,
        &config.params,
        &profile.u,
        None,
        &SimOptions {
            t_end: config.t_end,
            record_dt: config.record_dt,
            dt: None,
        },
    )?;
    let diag = &sim.diagnostics;
    let n_layers = config.h0.len();
    if diag.t.len() < 2 {
        let t = diag.t.last().copied().unwrap_or(0.0);
        return Err(ExperimentError::WindowMismatch {
            common: t,
            pde: t,
            ode: config.t_end,
        });
    }

    let mut ode_params = OdeParams::new(
        config.params.epsilon,
        config.params.tau,
        config.params.potential.clone(),
        &config.params.damping,
    )?;
    ode_params.alpha_mode = AlphaMode::Asymptotic;
    let ode_model = ode_model_for(config.model);
    let hdot0: Option<Vec<f64>> = if config.model.is_hyperbolic() {
        let dt = diag.t[1] - diag.t[0];
        Some(
            diag.layers[0]
                .iter()
                .zip(diag.layers[1].iter())
                .map(|(a, b)| (b - a) / dt)
                .collect(),
        )
    } else {
        None
    };
    let traj = integrate_layers(
        ode_model,
        &ode_params,
        &config.h0,
        hdot0.as_deref(),
        &IntegrateOptions {
            t_end: config.t_end,
            record_dt: config.record_dt,
            rtol: config.rtol,
            rho: config.rho,
        },
    )?;

    // Both methods record on the same stamp sequence; the common window is
    // the shared prefix where the stamps agree and the PDE still tracks the
    // full layer count.
    let mut common = 0;
    while common < diag.t.len()
        && common < traj.t.len()
        && diag.t[common] == traj.t[common]
        && diag.layers[common].len() == n_layers
    {
        common += 1;
    }
    let pde_reach = *diag.t.last().expect("nonempty diagnostics");
    let ode_reach = *traj.t.last().expect("nonempty trajectory");
    if common < 2 {
        return Err(ExperimentError::WindowMismatch {
            common: if common == 0 { 0.0 } else { diag.t[0] },
            pde: pde_reach,
            ode: ode_reach,
        });
    }
    let t_common = diag.t[common - 1];
    if t_common < WINDOW_MISMATCH_FRACTION * pde_reach.max(ode_reach) {
        return Err(ExperimentError::WindowMismatch {
            common: t_common,
            pde: pde_reach,
            ode: ode_reach,
        });
    }

    let mut per_layer = vec![0.0_f64; n_layers];
    for k in 0..common {
        for (j, worst) in per_layer.iter_mut().enumerate() {
            *worst = worst.max((diag.layers[k][j] - traj.h[k][j]).abs());
        }
    }
    Ok(ComparisonReport {
        epsilon: config.params.epsilon,
        tau: config.params.tau,
        layer_count: n_layers,
        n: config.n,
        rtol: config.rtol,
        t: diag.t[..common].to_vec(),
        pde_h: diag.layers[..common].to_vec(),
        ode_h: traj.h[..common].to_vec(),
        per_layer_sup_error: per_layer,
        pde_collision: match sim.stop {
            StopReason::Collision { t } => Some(t),
            StopReason::Completed => None,
        },
        ode_collision: match traj.stop {
            OdeStop::Collision { t } => Some(t),
            OdeStop::Completed => None,
        },
    })
}

/// Which machinery measures the layer speeds in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMethod {
    /// Integrate the reduced layer system (cheap, sharp exponentials).
    Ode,
    /// Simulate the full equation and track the zero crossings.
    Pde,
}

/// Configuration of the exponential-slowness sweep.
#[derive(Debug, Clone)]
pub struct MetastabilityConfig {
    pub epsilons: Vec<f64>,
    pub h0: LayerVector,
    pub potential: Potential,
    pub method: SweepMethod,
    /// PDE grid cells (PDE method only).
    pub n: usize,
    pub t_end: f64,
    pub record_dt: f64,
    pub rtol: f64,
    /// Collision parameter; the sweep default is 0.5 (threshold `2ε`) so
    /// that moderately tight gaps still count as admissible starts.
    pub rho: f64,
    pub threads: usize,
}

/// One sweep sample: the measured peak speed at one `ε`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeSample {
    pub epsilon: f64,
    pub inv_epsilon: f64,
    /// `ln(speed/ε)`: the `ε` prefactor of the layer velocities is divided
    /// out so the fitted slope isolates the exponential rate.
    pub log_speed: f64,
    pub speed: f64,
}

/// Least-squares fit of `ln(speed/ε)` against `1/ε`, with the prediction
/// `−A·ℓ` from the minimal gap `ℓ` for comparison.
#[derive(Debug, Clone)]
pub struct SlopeFit {
    pub samples: Vec<SlopeSample>,
    pub slope: f64,
    pub intercept: f64,
    /// `−A·ℓ` for the minimal initial gap `ℓ` (on that gap's branch).
    pub predicted_slope: f64,
    /// `(slope − predicted)/|predicted|`, signed.
    pub relative_deviation: f64,
    pub min_gap: f64,
}

/// Largest finite-difference layer speed over the leading fraction of the
/// realised record window.
fn peak_speed(t: &[f64], rows: &[Vec<f64>]) -> Option<f64> {
    let t_last = *t.last()?;
    let t_cut = t[0] + SPEED_WINDOW_FRACTION * (t_last - t[0]);
    let mut peak: Option<f64> = None;
    for k in 1..t.len() {
        if t[k] > t_cut && k > 1 {
            break;
        }
        if rows[k].len() != rows[k - 1].len() {
            continue;
        }
        let dt = t[k] - t[k - 1];
        for (a, b) in rows[k - 1].iter().zip(rows[k].iter()) {
            let speed = ((b - a) / dt).abs();
            if peak.is_none_or(|p| speed > p) {
                peak = Some(speed);
            }
        }
    }
    peak
}

fn measure_speed(
    config: &MetastabilityConfig,
    epsilon: f64,
) -> Result<f64, ExperimentError> {
    match config.method {
        SweepMethod::Ode => {
            let params = OdeParams::new(
                epsilon,
                0.0,
                config.potential.clone(),
                &crate::potential::Damping::one(),
            )?;
            let traj = integrate_layers(
                OdeModel::Ac,
                &params,
                &config.h0,
                None,
                &IntegrateOptions {
                    t_end: config.t_end,
                    record_dt: config.record_dt,
                    rtol: config.rtol,
                    rho: config.rho,
                },
            )?;
            peak_speed(&traj.t, &traj.h).ok_or_else(|| ExperimentError::BadConfig {
                detail: format!("no speed samples at epsilon = {epsilon}"),
            })
        }
        SweepMethod::Pde => {
            let grid = Grid::new(config.n)?;
            let u0 = kink_superposition(&config.h0, epsilon, &config.potential, config.n);
            let params = ModelParams {
                epsilon,
                tau: 0.0,
                potential: config.potential.clone(),
                damping: crate::potential::Damping::one(),
            };
            let sim = run_simulation(
                grid,
                ModelKind::Ac,
                &params,
                &u0,
                None,
                &SimOptions {
                    t_end: config.t_end,
                    record_dt: config.record_dt,
                    dt: None,
                },
            )?;
            peak_speed(&sim.diagnostics.t, &sim.diagnostics.layers).ok_or_else(|| {
                ExperimentError::BadConfig {
                    detail: format!("no speed samples at epsilon = {epsilon}"),
                }
            })
        }
    }
}

/// Measure the peak layer speed at every `ε` (in parallel), fit
/// `ln(speed/ε)` against `1/ε`, and compare the slope with the asymptotic
/// rate `−A·ℓ` of the minimal initial gap.
pub fn metastability_sweep(config: &MetastabilityConfig) -> Result<SlopeFit, ExperimentError> {
    if config.epsilons.len() < 3 {
        return Err(ExperimentError::InsufficientSamples {
            got: config.epsilons.len(),
        });
    }
    let mut epsilons = config.epsilons.clone();
    epsilons.sort_by(f64::total_cmp);
    let speeds = parallel_map(&epsilons, config.threads, |&eps| {
        measure_speed(config, eps)
    });
    let mut samples = Vec::with_capacity(epsilons.len());
    for (eps, speed) in epsilons.iter().zip(speeds) {
        let speed = speed?;
        samples.push(SlopeSample {
            epsilon: *eps,
            inv_epsilon: 1.0 / eps,
            log_speed: (speed / eps).ln(),
            speed,
        });
    }

    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.inv_epsilon).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.log_speed).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for s in &samples {
        cov += (s.inv_epsilon - mean_x) * (s.log_speed - mean_y);
        var += (s.inv_epsilon - mean_x).powi(2);
    }
    let slope = cov / var;
    let intercept = mean_y - slope * mean_x;

    let gaps = config.h0.gaps();
    let (j_min, &min_gap) = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("layer vector has gaps");
    let constants = crate::potential::wave_constants(&config.potential)?;
    let a = constants.a(LayerVector::gap_sign(j_min + 1));
    let predicted = -a * min_gap;
    Ok(SlopeFit {
        samples,
        slope,
        intercept,
        predicted_slope: predicted,
        relative_deviation: (slope - predicted) / predicted.abs(),
        min_gap,
    })
}

/// One row of the exact-vs-asymptotic interaction table.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticsRow {
    /// Ratio `r = ε/ℓ` (evaluated on the unit gap).
    pub r: f64,
    pub beta_exact: f64,
    pub beta_asymptotic: f64,
    pub beta_rel_error: f64,
    pub alpha_exact: f64,
    pub alpha_asymptotic: f64,
    pub alpha_rel_error: f64,
}

/// Exact-vs-asymptotic plateau offsets across a list of ratios, sorted by
/// decreasing `r`. The relative errors must shrink as `r` does; a violation
/// is reported as [`ExperimentError::NotMonotone`].
pub fn asymptotics_sweep(
    ratios: &[f64],
    potential: &Potential,
    sign: f64,
    threads: usize,
) -> Result<Vec<AsymptoticsRow>, ExperimentError> {
    if ratios.is_empty() {
        return Err(ExperimentError::BadConfig {
            detail: "asymptotics sweep needs at least one ratio".into(),
        });
    }
    for &r in ratios {
        if !(r > 0.0 && r < MAX_RATIO) {
            return Err(ExperimentError::RatioOutOfRange { r });
        }
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let constants = crate::potential::wave_constants(potential)?;
    let rows = parallel_map(&sorted, threads, |&r| -> Result<_, ExperimentError> {
        let exact = alpha_beta(1.0, r, sign, potential, AlphaMode::Exact)?;
        let asym = alpha_beta_asymptotic(1.0, r, sign, &constants);
        Ok(AsymptoticsRow {
            r,
            beta_exact: exact.beta,
            beta_asymptotic: asym.beta,
            beta_rel_error: ((asym.beta - exact.beta) / exact.beta).abs(),
            alpha_exact: exact.alpha,
            alpha_asymptotic: asym.alpha,
            alpha_rel_error: ((asym.alpha - exact.alpha) / exact.alpha).abs(),
        })
    });
    let rows: Vec<AsymptoticsRow> = rows.into_iter().collect::<Result<_, _>>()?;
    for pair in rows.windows(2) {
        if pair[1].beta_rel_error >= pair[0].beta_rel_error
            || pair[1].alpha_rel_error >= pair[0].alpha_rel_error
        {
            return Err(ExperimentError::NotMonotone {
                from: pair[0].r,
                to: pair[1].r,
            });
        }
    }
    Ok(rows)
}

/// Configuration of the vanishing-inertia study.
#[derive(Debug, Clone)]
pub struct TauStudyConfig {
    pub taus: Vec<f64>,
    pub epsilon: f64,
    pub h0: LayerVector,
    pub potential: Potential,
    /// Must be the unit damping; the study refuses anything else.
    pub damping: crate::potential::Damping,
    pub t_end: f64,
    pub record_dt: f64,
    pub rtol: f64,
    pub rho: f64,
    pub threads: usize,
}

/// One row of the relaxation-limit table.
#[derive(Debug, Clone, Copy)]
pub struct TauRow {
    pub tau: f64,
    /// Sup-norm distance of the inertial trajectory from the first-order
    /// one over the common records.
    pub distance: f64,
    /// `distance / previous row's distance` (rows are sorted by decreasing
    /// `τ`), when both exist.
    pub ratio: Option<f64>,
}

fn trajectory_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let mut distance = 0.0_f64;
    for ((ta, ha), (tb, hb)) in a.t.iter().zip(&a.h).zip(b.t.iter().zip(&b.h)) {
        if ta != tb {
            break;
        }
        for (x, y) in ha.iter().zip(hb.iter()) {
            distance = distance.max((x - y).abs());
        }
    }
    distance
}

/// Integrate the inertial conserving system at each `τ` (with the
/// quasi-stationary initial velocity) against the first-order trajectory
/// from the same layers, and tabulate the sup-norm distances. `τ = 0` rows
/// run the first-order system itself — the limit is a model switch, never a
/// division by `τ` — and therefore sit at distance exactly zero.
///
/// Requires unit damping, the regime in which the vanishing-inertia limit
/// has the clean first-order form.
pub fn tau_limit_study(config: &TauStudyConfig) -> Result<Vec<TauRow>, ExperimentError> {
    if !config.damping.is_one() {
        return Err(ExperimentError::DampingNotOne);
    }
    let params = OdeParams::new(
        config.epsilon,
        0.0,
        config.potential.clone(),
        &config.damping,
    )?;
    let opts = IntegrateOptions {
        t_end: config.t_end,
        record_dt: config.record_dt,
        rtol: config.rtol,
        rho: config.rho,
    };
    let reference = integrate_layers(OdeModel::Mac, &params, &config.h0, None, &opts)?;

    let mut taus = config.taus.clone();
    taus.sort_by(|a, b| b.total_cmp(a));
    let runs = parallel_map(&taus, config.threads, |&tau| -> Result<_, ExperimentError> {
        if tau <= 0.0 {
            let again = integrate_layers(OdeModel::Mac, &params, &config.h0, None, &opts)?;
            return Ok(trajectory_distance(&again, &reference));
        }
        let mut inertial_params = params.clone();
        inertial_params.tau = tau;
        let hdot0 = quasi_stationary_hdot(OdeModel::HypMac, &inertial_params, &config.h0)?;
        let traj = integrate_layers(
            OdeModel::HypMac,
            &inertial_params,
            &config.h0,
            Some(&hdot0),
            &opts,
        )?;
        Ok(trajectory_distance(&traj, &reference))
    });

    let mut rows: Vec<TauRow> = Vec::with_capacity(taus.len());
    for (tau, distance) in taus.iter().zip(runs) {
        let distance = distance?;
        let ratio = rows
            .last()
            .filter(|prev| prev.distance > 0.0 && *tau > 0.0)
            .map(|prev| distance / prev.distance);
        rows.push(TauRow {
            tau: *tau,
            distance,
            ratio,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Damping;

    fn layers(h: &[f64]) -> LayerVector {
        LayerVector::new(h.to_vec()).unwrap()
    }

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<usize> = (0..23).collect();
        let doubled = parallel_map(&items, 4, |&x| 2 * x);
        assert_eq!(doubled, items.iter().map(|x| 2 * x).collect::<Vec<_>>());
    }

    #[test]
    fn symmetric_pair_stays_put_in_both_methods() {
        let config = CompareConfig {
            model: ModelKind::Mac,
            params: ModelParams {
                epsilon: 0.05,
                tau: 0.0,
                potential: Potential::quartic(),
                damping: Damping::one(),
            },
            h0: layers(&[0.25, 0.75]),
            n: 128,
            t_end: 2.0,
            record_dt: 0.25,
            rtol: 1e-9,
            rho: 0.25,
        };
        let report = compare_pde_ode(&config).unwrap();
        assert_eq!(report.per_layer_sup_error.len(), 2);
        let dx = 1.0 / config.n as f64;
        for err in &report.per_layer_sup_error {
            assert!(*err <= dx, "error {err} exceeds dx {dx}");
        }
        assert!(report.pde_collision.is_none());
        assert!(report.ode_collision.is_none());
    }

    #[test]
    fn slope_fit_needs_three_samples() {
        let config = MetastabilityConfig {
            epsilons: vec![0.05, 0.06],
            h0: layers(&[0.35, 0.6]),
            potential: Potential::quartic(),
            method: SweepMethod::Ode,
            n: 128,
            t_end: 10.0,
            record_dt: 0.02,
            rtol: 1e-9,
            rho: 0.5,
            threads: 2,
        };
        assert!(matches!(
            metastability_sweep(&config),
            Err(ExperimentError::InsufficientSamples { got: 2 })
        ));
    }

    #[test]
    fn reduced_sweep_recovers_the_exponential_rate() {
        let config = MetastabilityConfig {
            epsilons: vec![0.05, 0.06, 0.07, 0.08],
            h0: layers(&[0.35, 0.6]),
            potential: Potential::quartic(),
            method: SweepMethod::Ode,
            n: 128,
            t_end: 50.0,
            record_dt: 0.02,
            rtol: 1e-9,
            rho: 0.5,
            threads: 4,
        };
        let fit = metastability_sweep(&config).unwrap();
        assert_eq!(fit.samples.len(), 4);
        assert!((fit.min_gap - 0.25).abs() < 1e-15);
        assert!(
            fit.relative_deviation.abs() < 0.05,
            "slope {} vs predicted {}",
            fit.slope,
            fit.predicted_slope
        );
        // Faster motion at larger epsilon.
        assert!(fit.samples[0].speed < fit.samples[3].speed);
    }

    #[test]
    fn asymptotics_errors_shrink_with_the_ratio() {
        let rows =
            asymptotics_sweep(&[0.08, 0.06], &Potential::quartic(), 1.0, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].r > rows[1].r);
        assert!(rows[1].beta_rel_error < rows[0].beta_rel_error);
        assert!(rows[1].alpha_rel_error < rows[0].alpha_rel_error);
        assert!(matches!(
            asymptotics_sweep(&[0.12], &Potential::quartic(), 1.0, 1),
            Err(ExperimentError::RatioOutOfRange { .. })
        ));
    }

    #[test]
    fn inertial_distance_shrinks_with_tau_and_vanishes_at_zero() {
        let config = TauStudyConfig {
            taus: vec![0.2, 0.1, 0.0],
            epsilon: 0.05,
            h0: layers(&[0.15, 0.6]),
            potential: Potential::quartic(),
            damping: Damping::one(),
            t_end: 10.0,
            record_dt: 0.5,
            rtol: 1e-10,
            rho: 0.25,
            threads: 3,
        };
        let rows = tau_limit_study(&config).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].distance > rows[1].distance);
        assert_eq!(rows[2].distance, 0.0);
        assert_eq!(rows[2].tau, 0.0);

        let mut damped = config.clone();
        damped.damping = Damping::constant(2.0).unwrap();
        assert!(matches!(
            tau_limit_study(&damped),
            Err(ExperimentError::DampingNotOne)
        ));
    }
}
