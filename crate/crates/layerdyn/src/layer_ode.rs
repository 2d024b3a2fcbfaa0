//! The reduced systems of ordinary differential equations for the layer
//! positions `h_1 < … < h_{N+1}`, their adaptive integration, and the
//! leading-order bookkeeping attached to them (interaction matrices and
//! phase lengths).
//!
//! Every right-hand side is built from the gap interaction strengths
//! `α^j = α(l_j)` of the `N + 2` gaps `l_j = h_j − h_{j−1}`, where the
//! boundary gaps are doubled by the Neumann reflection (`l_1 = 2 h_1`,
//! `l_{N+2} = 2 (1 − h_{N+1})`) and the branch alternates with the gap
//! parity, starting from the `u ≈ −1` phase left of the first layer.

use std::cell::RefCell;

use thiserror::Error;

use crate::numerics::quad::QuadratureFailure;
use crate::numerics::rk::{integrate_adaptive, AdaptiveOptions, Halt};
use crate::numerics::record_stamps;
use crate::potential::{
    damping_average, transition_energy, wave_constants, Damping, Potential, WaveConstants,
};
use crate::profile::{alpha_beta, alpha_beta_asymptotic, AlphaMode, LayerVector, ProfileError};

/// Default relative tolerance for [`integrate_layers`].
pub const DEFAULT_RTOL: f64 = 1e-9;

/// Default collision parameter: a gap reaching `ε/ρ = 4ε` stops the run.
pub const DEFAULT_RHO: f64 = 0.25;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureFailure),
    #[error("model {model:?} needs a positive relaxation time, got tau = {tau}")]
    NonpositiveTau { model: OdeModel, tau: f64 },
    #[error("model {model:?} moves exactly {expected} layers, got {got}")]
    WrongLayerCount {
        model: OdeModel,
        expected: usize,
        got: usize,
    },
    #[error("initial velocity has {got} entries for {expected} layers")]
    VelocityLength { got: usize, expected: usize },
    #[error("model {model:?} is first order and carries no velocities")]
    UnexpectedVelocity { model: OdeModel },
    #[error("adaptive step size underflow at t = {t:e}; the system is too stiff or singular")]
    StepFailure { t: f64 },
    #[error("integration options are invalid: {detail}")]
    BadOptions { detail: String },
}

/// Which reduced system drives the layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeModel {
    /// `h′_j = (ε/c_F)(α^{j+1} − α^j)`.
    Ac,
    /// The mass-conserving variant: the same differences corrected by the
    /// alternating mean `Σ`, which freezes the total phase lengths.
    Mac,
    /// `τ h″_j + γ h′_j = ` the [`OdeModel::Ac`] right-hand side.
    HypAc,
    /// `τ h″_j + γ h′_j = ` the [`OdeModel::Mac`] right-hand side.
    HypMac,
    /// The three-layer Cahn-Hilliard comparison system, implemented with
    /// the displayed coefficients (no `ε/c_F` prefactor):
    /// `h′₁ = (α³−α¹)/(4(h₂−h₁))`, `h′₃ = (α⁴−α²)/(4(h₃−h₂))`,
    /// `h′₂ = h′₁ + h′₃`.
    ChN3,
}

impl OdeModel {
    /// True for the second-order (inertial) systems, which carry `hdot`.
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, OdeModel::HypAc | OdeModel::HypMac)
    }

    /// The first-order system whose right-hand side forces this model.
    fn reduced(self) -> OdeModel {
        match self {
            OdeModel::HypAc => OdeModel::Ac,
            OdeModel::HypMac => OdeModel::Mac,
            other => other,
        }
    }
}

/// Scalar data every right-hand side needs, precomputed once: the constants
/// are quadratures over the potential and would be far too slow to rebuild
/// on each of the thousands of evaluations an adaptive integrator makes.
#[derive(Debug, Clone)]
pub struct OdeParams {
    pub epsilon: f64,
    /// Relaxation time (used by the hyperbolic models only).
    pub tau: f64,
    /// Weighted damping average `γ` (equals 1 for `g ≡ 1`).
    pub gamma: f64,
    /// Transition energy `c_F` of the potential.
    pub c_f: f64,
    /// Linearisation rates and wave prefactors `A±`, `K±`.
    pub constants: WaveConstants,
    pub potential: Potential,
    /// How `α(l)` is evaluated inside right-hand sides. Defaults to the
    /// asymptotic closed form (cheap and smooth); the exact standing-wave
    /// solve is available for validation.
    pub alpha_mode: AlphaMode,
}

impl OdeParams {
    pub fn new(
        epsilon: f64,
        tau: f64,
        potential: Potential,
        damping: &Damping,
    ) -> Result<OdeParams, OdeError> {
        let c_f = transition_energy(&potential)?;
        let constants = wave_constants(&potential)?;
        let gamma = damping_average(&potential, damping)?;
        Ok(OdeParams {
            epsilon,
            tau,
            gamma,
            c_f,
            constants,
            potential,
            alpha_mode: AlphaMode::Asymptotic,
        })
    }
}

/// Positions, optional velocities, and time of the layer system.
#[derive(Debug, Clone)]
pub struct LayerState {
    pub t: f64,
    pub h: Vec<f64>,
    /// Present exactly for the hyperbolic models.
    pub hdot: Option<Vec<f64>>,
}

/// One right-hand side evaluation.
#[derive(Debug, Clone)]
pub struct LayerDerivative {
    pub dh: Vec<f64>,
    pub dhdot: Option<Vec<f64>>,
}

/// Interaction strengths of the `N + 2` gaps of `h`, boundary reflections
/// included, each on the branch given by the gap parity.
pub fn alphas_for_gaps(h: &LayerVector, params: &OdeParams) -> Result<Vec<f64>, OdeError> {
    let mut alphas = vec![0.0; h.len() + 1];
    raw_gap_alphas(&h.gaps(), params, &mut alphas)?;
    Ok(alphas)
}

/// `alphas_for_gaps` on raw gap lengths (the integrator works on slices and
/// may probe transient configurations a `LayerVector` would reject).
fn raw_gap_alphas(
    gaps: &[f64],
    params: &OdeParams,
    out: &mut [f64],
) -> Result<(), ProfileError> {
    debug_assert_eq!(gaps.len(), out.len(), "one alpha per gap");
    for (i, (&l, slot)) in gaps.iter().zip(out.iter_mut()).enumerate() {
        let sign = LayerVector::gap_sign(i + 1);
        *slot = match params.alpha_mode {
            AlphaMode::Asymptotic => {
                alpha_beta_asymptotic(l, params.epsilon, sign, &params.constants).alpha
            }
            AlphaMode::Exact => {
                alpha_beta(l, params.epsilon, sign, &params.potential, AlphaMode::Exact)?.alpha
            }
        };
    }
    Ok(())
}

/// The alternating mean `Σ = (1/(N+1)) Σ_{i=1}^{N+1} (−1)^i (α^{i+1} − α^i)`
/// entering the mass-conserving right-hand side.
pub fn sigma_term(alphas: &[f64]) -> f64 {
    debug_assert!(alphas.len() >= 2);
    let n1 = alphas.len() - 1; // N + 1
    let mut sum = 0.0;
    let mut sign = -1.0;
    for i in 1..=n1 {
        sum += sign * (alphas[i] - alphas[i - 1]);
        sign = -sign;
    }
    sum / n1 as f64
}

/// Fill `dh` with the first-order velocity of `model` (which must not be
/// hyperbolic) given the positions and their gap strengths.
fn velocity_into(model: OdeModel, params: &OdeParams, h: &[f64], alphas: &[f64], dh: &mut [f64]) {
    let pref = params.epsilon / params.c_f;
    match model {
        OdeModel::Ac => {
            for j in 0..dh.len() {
                dh[j] = pref * (alphas[j + 1] - alphas[j]);
            }
        }
        OdeModel::Mac if dh.len() == 2 => {
            // The conservation constraint moves a single pair in lockstep:
            // algebraically h′₁ = h′₂ = (ε/2c_F)(α³ − α¹). Evaluating the
            // shared value once keeps the two components bitwise equal,
            // which the rigid-motion identity tests rely on.
            let common = 0.5 * pref * (alphas[2] - alphas[0]);
            dh[0] = common;
            dh[1] = common;
        }
        OdeModel::Mac => {
            let sigma = sigma_term(alphas);
            let mut sign = 1.0; // (−1)^{j+1} for j = 1
            for j in 0..dh.len() {
                dh[j] = pref * (alphas[j + 1] - alphas[j] + sign * sigma);
                sign = -sign;
            }
        }
        OdeModel::ChN3 => {
            let first = (alphas[2] - alphas[0]) / (4.0 * (h[1] - h[0]));
            let second = (alphas[3] - alphas[1]) / (4.0 * (h[2] - h[1]));
            dh[0] = first;
            dh[1] = first + second;
            dh[2] = second;
        }
        OdeModel::HypAc | OdeModel::HypMac => unreachable!("reduced() strips inertia"),
    }
}

fn check_model(model: OdeModel, params: &OdeParams, layers: usize) -> Result<(), OdeError> {
    if model == OdeModel::ChN3 && layers != 3 {
        return Err(OdeError::WrongLayerCount {
            model,
            expected: 3,
            got: layers,
        });
    }
    if model.is_hyperbolic() && params.tau <= 0.0 {
        return Err(OdeError::NonpositiveTau {
            model,
            tau: params.tau,
        });
    }
    Ok(())
}

/// Evaluate the right-hand side of `model` at `state`.
pub fn layer_rhs(
    state: &LayerState,
    model: OdeModel,
    params: &OdeParams,
) -> Result<LayerDerivative, OdeError> {
    let h = LayerVector::new(state.h.clone())?;
    check_model(model, params, h.len())?;
    let alphas = alphas_for_gaps(&h, params)?;
    let mut velocity = vec![0.0; h.len()];
    velocity_into(model.reduced(), params, h.positions(), &alphas, &mut velocity);
    if !model.is_hyperbolic() {
        if state.hdot.is_some() {
            return Err(OdeError::UnexpectedVelocity { model });
        }
        return Ok(LayerDerivative {
            dh: velocity,
            dhdot: None,
        });
    }
    let hdot = state
        .hdot
        .as_ref()
        .ok_or(OdeError::VelocityLength {
            got: 0,
            expected: h.len(),
        })?;
    if hdot.len() != h.len() {
        return Err(OdeError::VelocityLength {
            got: hdot.len(),
            expected: h.len(),
        });
    }
    // τ h″ + γ h′ = R(h), with R the reduced first-order right-hand side
    // times γ-free prefactors; `velocity` currently holds R/1, so
    // h″ = (R − γ h′)/τ.
    let dhdot: Vec<f64> = velocity
        .iter()
        .zip(hdot.iter())
        .map(|(r, v)| (r - params.gamma * v) / params.tau)
        .collect();
    Ok(LayerDerivative {
        dh: hdot.clone(),
        dhdot: Some(dhdot),
    })
}

/// Quasi-stationary initial velocity for a hyperbolic launch: the reduced
/// first-order velocity divided by `γ`, i.e. the speed the damped system
/// settles to when the inertial term is negligible.
pub fn quasi_stationary_hdot(
    model: OdeModel,
    params: &OdeParams,
    h: &LayerVector,
) -> Result<Vec<f64>, OdeError> {
    check_model(model, params, h.len())?;
    let alphas = alphas_for_gaps(h, params)?;
    let mut velocity = vec![0.0; h.len()];
    velocity_into(model.reduced(), params, h.positions(), &alphas, &mut velocity);
    for v in velocity.iter_mut() {
        *v /= params.gamma;
    }
    Ok(velocity)
}

/// Remove from `hdot` the component that changes the phase lengths, so that
/// `L′₊(0) = L′₋(0) = 0`.
///
/// Both lengths respond to layer motion through the alternating sum
/// `L′₊ = Σ_j (−1)^j h′_j` (the reflected boundary gaps contribute their
/// halved lengths at twice the rate, so every layer carries unit weight),
/// hence the conserving subspace is the orthogonal complement of the
/// alternating-sign vector.
pub fn project_conservative(hdot: &[f64]) -> Vec<f64> {
    let mut dot = 0.0;
    let mut sign = -1.0;
    for &v in hdot {
        dot += sign * v;
        sign = -sign;
    }
    let mean = dot / hdot.len() as f64;
    let mut out = Vec::with_capacity(hdot.len());
    let mut sign = -1.0;
    for &v in hdot {
        out.push(v - sign * mean);
        sign = -sign;
    }
    out
}

/// Total lengths `(L₊, L₋)` of the two phases: each gap contributes to the
/// phase of its parity, the reflected boundary gaps with half their doubled
/// length. The two always sum to 1.
pub fn lengths_lpm(h: &LayerVector) -> (f64, f64) {
    let gaps = h.gaps();
    let last = gaps.len() - 1;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (i, &l) in gaps.iter().enumerate() {
        let weight = if i == 0 || i == last { 0.5 } else { 1.0 };
        if (i + 1) % 2 == 0 {
            plus += weight * l;
        } else {
            minus += weight * l;
        }
    }
    (plus, minus)
}

/// Leading-order interaction matrix
/// `S_ij = (c_F/ε)(δ_ij + (−1)^{i+j})` for `n` layers.
pub fn leading_s(n: usize, epsilon: f64, c_f: f64) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    let scale = c_f / epsilon;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let alt = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    scale * (if i == j { 1.0 + alt } else { alt })
                })
                .collect()
        })
        .collect()
}

/// Closed-form inverse of [`leading_s`]:
/// `S⁻¹_ij = (ε/((n+1) c_F)) ((n+1) δ_ij − (−1)^{i+j})`.
pub fn leading_s_inv(n: usize, epsilon: f64, c_f: f64) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    let scale = epsilon / ((n + 1) as f64 * c_f);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let alt = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    scale * (if i == j { (n + 1) as f64 - alt } else { -alt })
                })
                .collect()
        })
        .collect()
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeStop {
    /// Reached `t_end`.
    Completed,
    /// A gap shrank to the collision threshold `ε/ρ`; the trajectory up to
    /// that moment is returned.
    Collision { t: f64 },
}

/// Recorded layer trajectory. Rows of `h` (and `hdot`, hyperbolic models
/// only) share indexing with `t`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub hdot: Option<Vec<Vec<f64>>>,
    pub stop: OdeStop,
}

/// Controls for [`integrate_layers`].
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub t_end: f64,
    /// Cadence at which the trajectory is recorded.
    pub record_dt: f64,
    /// Relative tolerance of the embedded Runge-Kutta 5(4) pair.
    pub rtol: f64,
    /// Collision parameter: the run stops when a gap reaches `ε/ρ`.
    pub rho: f64,
}

impl IntegrateOptions {
    /// Record 500 frames, tolerance [`DEFAULT_RTOL`], threshold
    /// [`DEFAULT_RHO`].
    pub fn new(t_end: f64) -> IntegrateOptions {
        IntegrateOptions {
            t_end,
            record_dt: t_end / 500.0,
            rtol: DEFAULT_RTOL,
            rho: DEFAULT_RHO,
        }
    }
}

/// Gap lengths of a raw position slice, reflections included; `None` when
/// the ordering is violated (transient integrator probes may do this).
fn raw_gaps(h: &[f64], gaps: &mut Vec<f64>) -> bool {
    gaps.clear();
    gaps.push(2.0 * h[0]);
    for w in h.windows(2) {
        gaps.push(w[1] - w[0]);
    }
    gaps.push(2.0 * (1.0 - h[h.len() - 1]));
    gaps.iter().all(|&l| l > 0.0)
}

/// Integrate the layer system from `h0` (and, for hyperbolic models, the
/// initial velocity `hdot0`, defaulting to the quasi-stationary one) up to
/// `opts.t_end`, recording every `opts.record_dt`.
///
/// The run halts gracefully with [`OdeStop::Collision`] when any gap
/// (boundary reflections included) reaches `ε/ρ`; the colliding
/// configuration itself is appended to the trajectory.
pub fn integrate_layers(
    model: OdeModel,
    params: &OdeParams,
    h0: &LayerVector,
    hdot0: Option<&[f64]>,
    opts: &IntegrateOptions,
) -> Result<Trajectory, OdeError> {
    check_model(model, params, h0.len())?;
    if !(opts.t_end > 0.0 && opts.record_dt > 0.0) {
        return Err(OdeError::BadOptions {
            detail: format!(
                "t_end and record_dt must be positive, got {} and {}",
                opts.t_end, opts.record_dt
            ),
        });
    }
    if !(opts.rtol > 0.0 && opts.rho > 0.0) {
        return Err(OdeError::BadOptions {
            detail: format!(
                "rtol and rho must be positive, got {} and {}",
                opts.rtol, opts.rho
            ),
        });
    }
    let n = h0.len();
    let hyper = model.is_hyperbolic();
    let mut y0 = h0.positions().to_vec();
    if hyper {
        match hdot0 {
            Some(v) if v.len() == n => y0.extend_from_slice(v),
            Some(v) => {
                return Err(OdeError::VelocityLength {
                    got: v.len(),
                    expected: n,
                });
            }
            None => y0.extend(quasi_stationary_hdot(model, params, h0)?),
        }
    } else if hdot0.is_some() {
        return Err(OdeError::UnexpectedVelocity { model });
    }

    let reduced = model.reduced();
    let collision_gap = params.epsilon / opts.rho;
    let stamps = record_stamps(opts.t_end, opts.record_dt);
    let rk_opts = AdaptiveOptions {
        rtol: opts.rtol,
        atol: 1e-14,
        dt0: (opts.record_dt / 8.0).min(1e-2),
        dt_max: f64::INFINITY,
    };

    // Alpha failures inside the infallible rhs callback poison the step
    // with NaN (forcing rejection) and park the error here.
    let alpha_failure: RefCell<Option<ProfileError>> = RefCell::new(None);
    let mut gaps = Vec::with_capacity(n + 1);
    let mut alphas = vec![0.0; n + 1];
    let mut velocity = vec![0.0; n];

    let mut t_rec = Vec::new();
    let mut h_rec: Vec<Vec<f64>> = Vec::new();
    let mut hdot_rec: Vec<Vec<f64>> = Vec::new();

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let h = &y[..n];
        if !raw_gaps(h, &mut gaps) {
            dy.fill(f64::NAN);
            return;
        }
        if let Err(err) = raw_gap_alphas(&gaps, params, &mut alphas) {
            alpha_failure.replace(Some(err));
            dy.fill(f64::NAN);
            return;
        }
        velocity_into(reduced, params, h, &alphas, &mut velocity);
        if hyper {
            let hdot = &y[n..];
            dy[..n].copy_from_slice(hdot);
            for j in 0..n {
                dy[n + j] = (velocity[j] - params.gamma * hdot[j]) / params.tau;
            }
        } else {
            dy.copy_from_slice(&velocity);
        }
    };

    let mut stop_gaps = Vec::with_capacity(n + 2);
    let stop_event = |_t: f64, y: &[f64]| {
        !raw_gaps(&y[..n], &mut stop_gaps)
            || stop_gaps.iter().any(|&l| l <= collision_gap)
    };
    let record = |t: f64, y: &[f64]| {
        t_rec.push(t);
        h_rec.push(y[..n].to_vec());
        if hyper {
            hdot_rec.push(y[n..].to_vec());
        }
    };

    let outcome = integrate_adaptive(rhs, 0.0, opts.t_end, &y0, &stamps, &rk_opts, record, stop_event);
    match outcome {
        Ok((y, halt)) => {
            let stop = match halt {
                Halt::Completed => OdeStop::Completed,
                Halt::Event { t } => {
                    // Append the colliding configuration if the cadence
                    // missed it.
                    if t_rec.last().is_none_or(|&last| t > last) {
                        t_rec.push(t);
                        h_rec.push(y[..n].to_vec());
                        if hyper {
                            hdot_rec.push(y[n..].to_vec());
                        }
                    }
                    OdeStop::Collision { t }
                }
            };
            Ok(Trajectory {
                t: t_rec,
                h: h_rec,
                hdot: hyper.then_some(hdot_rec),
                stop,
            })
        }
        Err(underflow) => match alpha_failure.into_inner() {
            Some(err) => Err(OdeError::Profile(err)),
            None => Err(OdeError::StepFailure { t: underflow.t }),
        },
    }
}
