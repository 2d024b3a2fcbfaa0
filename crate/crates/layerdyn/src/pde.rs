//! Method-of-lines simulation of the four layer-dynamics models on `[0, 1]`
//! with homogeneous Neumann boundary conditions.
//!
//! Space is discretised on `n + 1` uniform nodes with the standard 3-point
//! Laplacian; the Neumann condition enters through reflected ghost nodes
//! (`u_{-1} = u_1`, `u_{n+1} = u_{n-1}`), which makes the discrete Laplacian
//! exactly mean-free under the trapezoid rule. Time stepping is classical
//! RK4 with a fixed step chosen from the explicit stability limits.
//!
//! For the mass-conserving models the nonlocal term is implemented by
//! subtracting the trapezoid mean of the whole local right-hand side
//! `w = eps^2 u_xx + f(u)`, not just of `f(u)`; the two differ only by the
//! mean of the discrete Laplacian, which vanishes identically, and the
//! former keeps the discrete mass constant to round-off by construction.

use thiserror::Error;

use crate::numerics::{trapezoid, trapezoid_map};
use crate::potential::ModelParams;

/// Fields blowing past this magnitude abort the run as unstable.
pub const BLOWUP_LIMIT: f64 = 1e6;

/// Coarsest admissible grid: below this the tracked-layer diagnostics and
/// the interface widths `O(eps)` are unresolvable for any useful `eps`.
pub const MIN_CELLS: usize = 64;

/// Two tracked zero crossings closer than this many grid cells are treated
/// as an annihilation event and stop the run.
pub const COLLISION_CELLS: f64 = 2.0;

/// Safety factor on the parabolic (diffusive) step-size limit.
const PARABOLIC_SAFETY: f64 = 0.4;

/// Safety factor on the hyperbolic (wave/damping) step-size limit.
const HYPERBOLIC_SAFETY: f64 = 0.5;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("grid has {n} cells; at least {MIN_CELLS} are required")]
    GridTooCoarse { n: usize },
    #[error("field has {len} values but the grid has {expected} nodes")]
    FieldLength { len: usize, expected: usize },
    #[error("model {model:?} needs a positive relaxation time, got tau = {tau}")]
    NonpositiveTau { model: ModelKind, tau: f64 },
    #[error("model {model:?} is parabolic and does not carry a velocity field")]
    UnexpectedVelocity { model: ModelKind },
    #[error("field magnitude exceeded {BLOWUP_LIMIT:e} at t = {t}; the time step is unstable")]
    UnstableStep { t: f64 },
    #[error("simulation options are invalid: {detail}")]
    BadOptions { detail: String },
}

/// Which of the four models the right-hand side assembles.
///
/// The parabolic pair ignores `tau` and the velocity field entirely; the
/// hyperbolic pair requires `tau > 0` (the vanishing-inertia limit is the
/// corresponding parabolic model, reached by switching kind, never by
/// dividing by zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `u_t = eps^2 u_xx + f(u)`.
    Ac,
    /// `u_t = eps^2 u_xx + f(u) - <f(u)>` (conserves the mean of `u`).
    Mac,
    /// `tau u_tt + g(u) u_t = eps^2 u_xx + f(u)`.
    HypAc,
    /// `tau u_tt + g(u) u_t + <(1 - g(u)) u_t> = eps^2 u_xx + f(u) - <f(u)>`.
    HypMac,
}

impl ModelKind {
    /// True for the damped-wave (inertial) models, which carry a velocity.
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, ModelKind::HypAc | ModelKind::HypMac)
    }

    /// True for the models with the nonlocal mean-correction terms.
    pub fn conserves_mass(self) -> bool {
        matches!(self, ModelKind::Mac | ModelKind::HypMac)
    }
}

/// Uniform grid of `n + 1` nodes on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Grid, PdeError> {
        if n < MIN_CELLS {
            return Err(PdeError::GridTooCoarse { n });
        }
        Ok(Grid { n })
    }

    /// Number of cells.
    pub fn cells(self) -> usize {
        self.n
    }

    /// Number of nodes, `n + 1`.
    pub fn nodes(self) -> usize {
        self.n + 1
    }

    pub fn dx(self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinate of node `i`.
    pub fn node(self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
}

/// Discrete solution at one instant: nodal values of `u` and, for the
/// hyperbolic models, of `v = u_t`. Parabolic runs keep `v` identically
/// zero.
#[derive(Debug, Clone)]
pub struct PdeState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PdeState {
    /// State at `t = 0` with the given initial datum and optional velocity
    /// (defaults to rest).
    pub fn new(
        grid: Grid,
        model: ModelKind,
        u0: &[f64],
        v0: Option<&[f64]>,
    ) -> Result<PdeState, PdeError> {
        if u0.len() != grid.nodes() {
            return Err(PdeError::FieldLength {
                len: u0.len(),
                expected: grid.nodes(),
            });
        }
        let v = match v0 {
            None => vec![0.0; grid.nodes()],
            Some(v0) => {
                if !model.is_hyperbolic() {
                    return Err(PdeError::UnexpectedVelocity { model });
                }
                if v0.len() != grid.nodes() {
                    return Err(PdeError::FieldLength {
                        len: v0.len(),
                        expected: grid.nodes(),
                    });
                }
                v0.to_vec()
            }
        };
        Ok(PdeState {
            t: 0.0,
            u: u0.to_vec(),
            v,
        })
    }
}

/// Fill `w` with the local operator `eps^2 u_xx + f(u)` using reflected
/// Neumann ghosts.
fn local_operator(u: &[f64], params: &ModelParams, dx: f64, w: &mut [f64]) {
    let n = u.len() - 1;
    let diff = params.epsilon * params.epsilon / (dx * dx);
    w[0] = 2.0 * diff * (u[1] - u[0]) + params.potential.reaction(u[0]);
    for i in 1..n {
        w[i] = diff * (u[i - 1] - 2.0 * u[i] + u[i + 1]) + params.potential.reaction(u[i]);
    }
    w[n] = 2.0 * diff * (u[n - 1] - u[n]) + params.potential.reaction(u[n]);
}

/// Write the semidiscrete right-hand side for `model` into `(du, dv)`.
///
/// Parabolic models leave `dv` zeroed. The nonlocal models subtract
/// trapezoid means, so their `du` (respectively the forcing of `dv`) has
/// exactly zero discrete mean.
fn rhs_into(
    u: &[f64],
    v: &[f64],
    model: ModelKind,
    params: &ModelParams,
    dx: f64,
    du: &mut [f64],
    dv: &mut [f64],
) {
    local_operator(u, params, dx, du);
    match model {
        ModelKind::Ac => {}
        ModelKind::Mac => {
            let mean = trapezoid(du, dx);
            for value in du.iter_mut() {
                *value -= mean;
            }
        }
        ModelKind::HypAc => {
            let inv_tau = 1.0 / params.tau;
            for i in 0..u.len() {
                dv[i] = inv_tau * (du[i] - params.damping.value(u[i]) * v[i]);
            }
            du.copy_from_slice(v);
        }
        ModelKind::HypMac => {
            let inv_tau = 1.0 / params.tau;
            let mean_w = trapezoid(du, dx);
            // Materialise g(u) v in dv to take its mean, then overwrite.
            for i in 0..u.len() {
                dv[i] = params.damping.value(u[i]) * v[i];
            }
            let mean_gv = trapezoid(dv, dx);
            let mean_v = trapezoid(v, dx);
            // <(1 - g(u)) v> = <v> - <g(u) v>.
            let nonlocal = mean_v - mean_gv;
            for i in 0..u.len() {
                dv[i] = inv_tau * (du[i] - mean_w - dv[i] - nonlocal);
            }
            du.copy_from_slice(v);
        }
    }
}

/// Semidiscrete right-hand side `(du/dt, dv/dt)` at a state. For parabolic
/// models the second component is all zeros.
pub fn semidiscrete_rhs(
    state: &PdeState,
    grid: Grid,
    model: ModelKind,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>), PdeError> {
    check_model(grid, model, params, state)?;
    let mut du = vec![0.0; state.u.len()];
    let mut dv = vec![0.0; state.u.len()];
    rhs_into(&state.u, &state.v, model, params, grid.dx(), &mut du, &mut dv);
    Ok((du, dv))
}

fn check_model(
    grid: Grid,
    model: ModelKind,
    params: &ModelParams,
    state: &PdeState,
) -> Result<(), PdeError> {
    if state.u.len() != grid.nodes() || state.v.len() != grid.nodes() {
        return Err(PdeError::FieldLength {
            len: state.u.len().min(state.v.len()),
            expected: grid.nodes(),
        });
    }
    if model.is_hyperbolic() && params.tau <= 0.0 {
        return Err(PdeError::NonpositiveTau {
            model,
            tau: params.tau,
        });
    }
    Ok(())
}

/// Largest stable RK4 step for the explicit scheme.
///
/// Parabolic models face the diffusive limit `dx^2 / eps^2`, sharpened by
/// the reaction stiffness: `0.4 dx^2 / (eps^2 + dx^2 max|f'|)`. The damped
/// wave models face the CFL limit of the wave speed `eps / sqrt(tau)` and
/// the damping rate `g / tau`: `0.5 min(dx sqrt(tau)/eps, tau / max g)`.
pub fn stable_dt(grid: Grid, model: ModelKind, params: &ModelParams) -> Result<f64, PdeError> {
    let dx = grid.dx();
    if model.is_hyperbolic() {
        if params.tau <= 0.0 {
            return Err(PdeError::NonpositiveTau {
                model,
                tau: params.tau,
            });
        }
        let cfl = dx * params.tau.sqrt() / params.epsilon;
        let damping = params.tau / params.damping.max_on_grid();
        Ok(HYPERBOLIC_SAFETY * cfl.min(damping))
    } else {
        let stiffness = params.potential.max_reaction_slope_abs();
        Ok(PARABOLIC_SAFETY * dx * dx / (params.epsilon * params.epsilon + dx * dx * stiffness))
    }
}

/// Scratch buffers for one RK4 step, reused across the whole run.
struct Rk4Workspace {
    du: [Vec<f64>; 4],
    dv: [Vec<f64>; 4],
    u_stage: Vec<f64>,
    v_stage: Vec<f64>,
}

impl Rk4Workspace {
    fn new(nodes: usize) -> Rk4Workspace {
        Rk4Workspace {
            du: std::array::from_fn(|_| vec![0.0; nodes]),
            dv: std::array::from_fn(|_| vec![0.0; nodes]),
            u_stage: vec![0.0; nodes],
            v_stage: vec![0.0; nodes],
        }
    }

    /// One classical RK4 step of size `dt`, in place. The reflected ghosts
    /// are re-imposed inside every stage evaluation by `rhs_into`.
    // The negated comparisons in the blow-up check are deliberate: they
    // must also catch NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn advance(
        &mut self,
        state: &mut PdeState,
        grid: Grid,
        model: ModelKind,
        params: &ModelParams,
        dt: f64,
    ) -> Result<(), PdeError> {
        let dx = grid.dx();
        let nodes = state.u.len();
        let hyper = model.is_hyperbolic();
        rhs_into(
            &state.u,
            &state.v,
            model,
            params,
            dx,
            &mut self.du[0],
            &mut self.dv[0],
        );
        for (stage, weight) in [(1, 0.5 * dt), (2, 0.5 * dt), (3, dt)] {
            let prev = stage - 1;
            for i in 0..nodes {
                self.u_stage[i] = state.u[i] + weight * self.du[prev][i];
            }
            if hyper {
                for i in 0..nodes {
                    self.v_stage[i] = state.v[i] + weight * self.dv[prev][i];
                }
            }
            rhs_into(
                &self.u_stage,
                &self.v_stage,
                model,
                params,
                dx,
                &mut self.du[stage],
                &mut self.dv[stage],
            );
        }
        let sixth = dt / 6.0;
        // `!(x <= limit)` is also true for NaN, which f64::max would ignore.
        let mut unstable = false;
        for i in 0..nodes {
            state.u[i] += sixth
                * (self.du[0][i] + 2.0 * self.du[1][i] + 2.0 * self.du[2][i] + self.du[3][i]);
            unstable |= !(state.u[i].abs() <= BLOWUP_LIMIT);
        }
        if hyper {
            for i in 0..nodes {
                state.v[i] += sixth
                    * (self.dv[0][i] + 2.0 * self.dv[1][i] + 2.0 * self.dv[2][i] + self.dv[3][i]);
                unstable |= !(state.v[i].abs() <= BLOWUP_LIMIT);
            }
        }
        state.t += dt;
        if unstable {
            return Err(PdeError::UnstableStep { t: state.t });
        }
        Ok(())
    }
}

/// Advance one RK4 step of size `dt`.
pub fn step(
    state: &mut PdeState,
    grid: Grid,
    model: ModelKind,
    params: &ModelParams,
    dt: f64,
) -> Result<(), PdeError> {
    check_model(grid, model, params, state)?;
    Rk4Workspace::new(state.u.len()).advance(state, grid, model, params, dt)
}

/// Positions where the solution crosses zero, ascending.
///
/// A node holding an exact zero contributes its own coordinate; a sign
/// change between neighbouring nodes contributes the linear interpolant.
pub fn track_layers(u: &[f64], grid: Grid) -> Vec<f64> {
    let dx = grid.dx();
    let mut layers = Vec::new();
    for i in 0..u.len() {
        if u[i] == 0.0 {
            layers.push(grid.node(i));
        } else if i + 1 < u.len() && u[i] * u[i + 1] < 0.0 {
            layers.push(grid.node(i) + dx * u[i] / (u[i] - u[i + 1]));
        }
    }
    layers
}

/// Trapezoid-rule mass `integral of u` (the domain has unit length, so this
/// equals the mean).
pub fn mass_of(u: &[f64], grid: Grid) -> f64 {
    trapezoid(u, grid.dx())
}

/// Discrete energy
/// `tau/2 <v^2> + eps^2/2 integral(u_x^2) + integral(F(u))`,
/// with the gradient term on the staggered cell midpoints
/// (`sum (u_{i+1} - u_i)^2 / dx`), which is the form the reflected-ghost
/// Laplacian dissipates exactly in the semidiscrete flow. The kinetic term
/// is present only for the hyperbolic models.
pub fn energy_of(state: &PdeState, grid: Grid, model: ModelKind, params: &ModelParams) -> f64 {
    let dx = grid.dx();
    let mut gradient = 0.0;
    for i in 0..state.u.len() - 1 {
        let jump = state.u[i + 1] - state.u[i];
        gradient += jump * jump;
    }
    gradient /= dx;
    let mut energy = 0.5 * params.epsilon * params.epsilon * gradient
        + trapezoid_map(&state.u, dx, |u| params.potential.value(u));
    if model.is_hyperbolic() {
        energy += 0.5 * params.tau * trapezoid_map(&state.v, dx, |v| v * v);
    }
    energy
}

/// Instantaneous dissipation integrand `integral(u_t^2)`. For hyperbolic
/// models `u_t = v` is a state variable; for parabolic models it is the
/// right-hand side, which costs one extra operator evaluation.
fn dissipation_rate(
    state: &PdeState,
    grid: Grid,
    model: ModelKind,
    params: &ModelParams,
    scratch: &mut (Vec<f64>, Vec<f64>),
) -> f64 {
    if model.is_hyperbolic() {
        trapezoid_map(&state.v, grid.dx(), |v| v * v)
    } else {
        rhs_into(
            &state.u,
            &state.v,
            model,
            params,
            grid.dx(),
            &mut scratch.0,
            &mut scratch.1,
        );
        trapezoid_map(&scratch.0, grid.dx(), |w| w * w)
    }
}

/// Time series of the scalar diagnostics, sampled on the record cadence.
/// All vectors share indexing; `layers[k]` lists the tracked zero crossings
/// at `t[k]` (their number may change if interfaces nucleate or vanish).
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub t: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    /// Running integral of `integral(u_t^2) dt` (trapezoid in time over the
    /// internal steps).
    pub cum_dissipation: Vec<f64>,
    pub layers: Vec<Vec<f64>>,
    /// Largest finite-difference speed of any tracked layer since the
    /// previous record; zero on the first record, NaN when the layer count
    /// changed between records.
    pub max_speed: Vec<f64>,
}

/// Why a simulation stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// Reached `t_end`.
    Completed,
    /// Two tracked layers came within [`COLLISION_CELLS`] grid cells (or
    /// one vanished outright); the run ends gracefully with the
    /// diagnostics collected so far.
    Collision { t: f64 },
}

/// Everything a finished (or gracefully stopped) run produces.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub diagnostics: Diagnostics,
    pub state: PdeState,
    pub stop: StopReason,
}

/// Time-stepping controls for [`run_simulation`].
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub t_end: f64,
    /// Cadence at which diagnostics are recorded.
    pub record_dt: f64,
    /// Fixed RK4 step; `None` selects [`stable_dt`]. Records always land
    /// exactly on the cadence (the step is shrunk to divide each interval).
    pub dt: Option<f64>,
}

/// Integrate the chosen model from `u0` (and optional initial velocity
/// `v0`, hyperbolic models only) to `t_end`, recording diagnostics every
/// `record_dt`.
///
/// An initial velocity with nonzero mean is accepted, but the mean of `u`
/// then relaxes along `m(t) = m(0) + tau m'(0) (1 - exp(-t/tau))` instead
/// of staying constant; a warning is logged to stderr.
// The negated option checks are deliberate: they must also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn run_simulation(
    grid: Grid,
    model: ModelKind,
    params: &ModelParams,
    u0: &[f64],
    v0: Option<&[f64]>,
    opts: &SimOptions,
) -> Result<SimulationResult, PdeError> {
    if !(opts.t_end > 0.0) {
        return Err(PdeError::BadOptions {
            detail: format!("t_end must be positive, got {}", opts.t_end),
        });
    }
    if !(opts.record_dt > 0.0) {
        return Err(PdeError::BadOptions {
            detail: format!("record_dt must be positive, got {}", opts.record_dt),
        });
    }
    let mut state = PdeState::new(grid, model, u0, v0)?;
    check_model(grid, model, params, &state)?;
    if model.is_hyperbolic() && model.conserves_mass() {
        let mean_v0 = mass_of(&state.v, grid);
        if mean_v0.abs() > 1e-12 {
            eprintln!(
                "warning: initial velocity has mean {mean_v0:.3e}; the mass follows \
                 m(0) + tau m'(0) (1 - exp(-t/tau)) rather than staying constant"
            );
        }
    }
    let dt_cap = match opts.dt {
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => {
            return Err(PdeError::BadOptions {
                detail: format!("dt must be positive, got {dt}"),
            });
        }
        None => stable_dt(grid, model, params)?,
    };

    let stamps = crate::numerics::record_stamps(opts.t_end, opts.record_dt);

    let mut workspace = Rk4Workspace::new(grid.nodes());
    let mut scratch = (vec![0.0; grid.nodes()], vec![0.0; grid.nodes()]);
    let mut diag = Diagnostics::default();
    let mut cum = 0.0;
    let mut d_prev = dissipation_rate(&state, grid, model, params, &mut scratch);
    let collision_gap = COLLISION_CELLS * grid.dx();

    let mut prev_layers: Option<(f64, Vec<f64>)> = None;
    let record =
        |state: &PdeState, cum: f64, prev: &mut Option<(f64, Vec<f64>)>, diag: &mut Diagnostics| {
            let layers = track_layers(&state.u, grid);
            let max_speed = match prev {
                None => 0.0,
                Some((t_prev, h_prev)) if h_prev.len() == layers.len() => layers
                    .iter()
                    .zip(h_prev.iter())
                    .map(|(h, hp)| ((h - hp) / (state.t - *t_prev)).abs())
                    .fold(0.0, f64::max),
                Some(_) => f64::NAN,
            };
            diag.t.push(state.t);
            diag.mass.push(mass_of(&state.u, grid));
            diag.energy.push(energy_of(state, grid, model, params));
            diag.cum_dissipation.push(cum);
            diag.max_speed.push(max_speed);
            let collided = layers.windows(2).any(|w| w[1] - w[0] < collision_gap)
                || prev
                    .as_ref()
                    .is_some_and(|(_, h_prev)| layers.len() < h_prev.len());
            *prev = Some((state.t, layers.clone()));
            diag.layers.push(layers);
            collided
        };

    if record(&state, cum, &mut prev_layers, &mut diag) {
        let t = state.t;
        return Ok(SimulationResult {
            diagnostics: diag,
            state,
            stop: StopReason::Collision { t },
        });
    }

    for &stamp in &stamps {
        let span = stamp - state.t;
        let steps = (span / dt_cap).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            workspace.advance(&mut state, grid, model, params, dt)?;
            let d_new = dissipation_rate(&state, grid, model, params, &mut scratch);
            cum += 0.5 * dt * (d_prev + d_new);
            d_prev = d_new;
        }
        // Snap onto the stamp so record times compare equal across runs.
        state.t = stamp;
        if record(&state, cum, &mut prev_layers, &mut diag) {
            let t = state.t;
            return Ok(SimulationResult {
                diagnostics: diag,
                state,
                stop: StopReason::Collision { t },
            });
        }
    }

    Ok(SimulationResult {
        diagnostics: diag,
        state,
        stop: StopReason::Completed,
    })
}
