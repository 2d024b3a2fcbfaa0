//! Double-well potentials, damping functions, and the scalar constants that
//! control layer interaction strength.
//!
//! A potential `F` must be a balanced double well: `F(±1) = 0`, `F'(±1) = 0`,
//! `F''(±1) > 0`, and `F > 0` elsewhere. The reaction term of the evolution
//! equations is `f = -F'`. From `F` we derive
//!
//! * the transition energy `c_F = ∫_{-1}^{1} sqrt(2 F(s)) ds`, the energy
//!   carried by a single interface;
//! * the well curvatures `A_± = sqrt(F''(±1))` and tail prefactors `K_±`,
//!   which govern the exponentially small interaction between neighbouring
//!   interfaces;
//! * the weighted damping average `γ` for damped wave dynamics.

use std::sync::Arc;

use thiserror::Error;

use crate::numerics::quad::{integrate, QuadratureFailure};

/// Spacing of the dense validation grid on `[-1.5, 1.5]`.
const VALIDATION_STEP: f64 = 1e-3;
/// Half-width of the neighbourhoods of `±1` excluded from the positivity
/// check (the wells themselves sit at zero).
const WELL_EXCLUSION: f64 = 1e-6;
/// Tolerance for the well conditions `F(±1) = 0`, `F'(±1) = 0`.
const WELL_TOL: f64 = 1e-12;
/// Curvatures below this are treated as degenerate (the tail decay rate
/// `A = sqrt(F'')` would be meaningless at roundoff level).
const CURVATURE_FLOOR: f64 = 1e-12;
/// Absolute quadrature tolerance for the scalar constants.
const CONSTANT_QUAD_TOL: f64 = 1e-12;
/// Relative evaluation noise assumed for the constants' integrands; the
/// `sqrt(F)`-type integrands lose a few digits right at the wells.
const CONSTANT_QUAD_NOISE: f64 = 1e-12;
/// Distance from the wells at which tail integrals of custom (non-
/// polynomial) potentials are cut off: closer in, direct evaluation of `F`
/// is pure roundoff.
const CUSTOM_WELL_STANDOFF: f64 = 1e-5;
/// Evaluation noise of the custom tail integrand at the standoff.
const CUSTOM_TAIL_NOISE: f64 = 1e-6;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How a potential is supplied.
#[derive(Clone)]
enum PotentialKind {
    /// `F(u) = (u² - 1)² / 4`.
    Quartic,
    /// Polynomial with ascending coefficients; derivative coefficient lists
    /// are precomputed.
    Polynomial {
        coeffs: Vec<f64>,
        d1: Vec<f64>,
        d2: Vec<f64>,
    },
    /// Arbitrary evaluators for `F`, `F'`, `F''`.
    Custom {
        value: ScalarFn,
        deriv: ScalarFn,
        second: ScalarFn,
    },
}

/// A double-well potential `F` with first and second derivatives.
///
/// Construct with [`Potential::quartic`], [`Potential::polynomial`], or
/// [`Potential::custom`], then check the well assumptions with
/// [`validate_potential`].
#[derive(Clone)]
pub struct Potential {
    kind: PotentialKind,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            PotentialKind::Quartic => write!(f, "Potential::Quartic"),
            PotentialKind::Polynomial { coeffs, .. } => {
                write!(f, "Potential::Polynomial({coeffs:?})")
            }
            PotentialKind::Custom { .. } => write!(f, "Potential::Custom"),
        }
    }
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn poly_deriv(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

impl Potential {
    /// The canonical quartic double well `F(u) = (u² - 1)² / 4`.
    pub fn quartic() -> Potential {
        Potential {
            kind: PotentialKind::Quartic,
        }
    }

    /// Polynomial potential from ascending coefficients
    /// (`coeffs[k]` multiplies `u^k`).
    pub fn polynomial(coeffs: Vec<f64>) -> Potential {
        let d1 = poly_deriv(&coeffs);
        let d2 = poly_deriv(&d1);
        Potential {
            kind: PotentialKind::Polynomial { coeffs, d1, d2 },
        }
    }

    /// Potential from arbitrary evaluators for `F`, `F'`, and `F''`.
    pub fn custom(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Potential {
        Potential {
            kind: PotentialKind::Custom {
                value: Arc::new(value),
                deriv: Arc::new(deriv),
                second: Arc::new(second),
            },
        }
    }

    /// `F(u)`.
    pub fn value(&self, u: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quartic => {
                let w = u * u - 1.0;
                0.25 * w * w
            }
            PotentialKind::Polynomial { coeffs, .. } => horner(coeffs, u),
            PotentialKind::Custom { value, .. } => value(u),
        }
    }

    /// `F'(u)`.
    pub fn deriv(&self, u: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quartic => u * u * u - u,
            PotentialKind::Polynomial { d1, .. } => horner(d1, u),
            PotentialKind::Custom { deriv, .. } => deriv(u),
        }
    }

    /// `F''(u)`.
    pub fn second_deriv(&self, u: f64) -> f64 {
        match &self.kind {
            PotentialKind::Quartic => 3.0 * u * u - 1.0,
            PotentialKind::Polynomial { d2, .. } => horner(d2, u),
            PotentialKind::Custom { second, .. } => second(u),
        }
    }

    /// Reaction term `f(u) = -F'(u)`.
    pub fn reaction(&self, u: f64) -> f64 {
        match &self.kind {
            // Written so that f(-u) == -f(u) bitwise for the symmetric well.
            PotentialKind::Quartic => u - u * u * u,
            _ => -self.deriv(u),
        }
    }

    /// `f'(u) = -F''(u)`.
    pub fn reaction_slope(&self, u: f64) -> f64 {
        -self.second_deriv(u)
    }

    /// Largest `f'(u)` over the validation grid; sets the admissible range
    /// of the relaxation time for relaxation damping.
    pub fn max_reaction_slope(&self) -> f64 {
        validation_grid()
            .map(|u| self.reaction_slope(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|f'(u)|` over the validation grid (stiffness bound used by
    /// explicit time-step selection).
    pub fn max_reaction_slope_abs(&self) -> f64 {
        validation_grid()
            .map(|u| self.reaction_slope(u).abs())
            .fold(0.0, f64::max)
    }

    /// Taylor coefficients of `F` at `a` (`t[j] = F⁽ʲ⁾(a)/j!`, ascending),
    /// or `None` when `F` is not polynomial.
    ///
    /// Writing `F(a + δ) = Σ t_j δ^j` lets callers evaluate differences of
    /// `F` near a well without the catastrophic cancellation of subtracting
    /// two nearly equal values, which matters when resolving exponentially
    /// small plateau offsets.
    pub fn taylor_coefficients(&self, a: f64) -> Option<Vec<f64>> {
        let mut t: Vec<f64> = match &self.kind {
            PotentialKind::Quartic => vec![0.25, 0.0, -0.5, 0.0, 0.25],
            PotentialKind::Polynomial { coeffs, .. } => coeffs.clone(),
            PotentialKind::Custom { .. } => return None,
        };
        // Taylor shift by repeated synthetic division.
        let n = t.len();
        for j in 0..n {
            for i in (j..n.saturating_sub(1)).rev() {
                t[i] += a * t[i + 1];
            }
        }
        Some(t)
    }
}

/// Dense validation grid on `[-1.5, 1.5]`, hitting `±1` exactly.
fn validation_grid() -> impl Iterator<Item = f64> {
    (0..=3000).map(|k| k as f64 * VALIDATION_STEP - 1.5)
}

/// Ways a candidate potential can fail the balanced double-well assumptions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("well at u = {well} has value {value:e}; both wells must sit at F = 0")]
    WellDepthMismatch { well: f64, value: f64 },
    #[error("u = {well} is not a critical point: F'({well}) = {slope:e}")]
    NonCriticalWell { well: f64, slope: f64 },
    #[error("degenerate well at u = {well}: F''({well}) = {curvature:e} must be positive")]
    DegenerateWell { well: f64, curvature: f64 },
    #[error("potential is not positive away from the wells: F({u}) = {value:e}")]
    NegativePotential { u: f64, value: f64 },
}

/// Check the balanced double-well assumptions and hand the potential back.
///
/// Requires `F(±1) = 0` and `F'(±1) = 0` to `1e-12`, `F''(±1) > 0`, and
/// `F > 0` on a `1e-3`-spaced grid over `[-1.5, 1.5]` away from `1e-6`
/// neighbourhoods of the wells.
pub fn validate_potential(candidate: Potential) -> Result<Potential, PotentialError> {
    for well in [-1.0, 1.0] {
        let value = candidate.value(well);
        if value.abs() > WELL_TOL {
            return Err(PotentialError::WellDepthMismatch { well, value });
        }
        let slope = candidate.deriv(well);
        if slope.abs() > WELL_TOL {
            return Err(PotentialError::NonCriticalWell { well, slope });
        }
        let curvature = candidate.second_deriv(well);
        if curvature <= CURVATURE_FLOOR {
            return Err(PotentialError::DegenerateWell { well, curvature });
        }
    }
    for u in validation_grid() {
        if (u - 1.0).abs() < WELL_EXCLUSION || (u + 1.0).abs() < WELL_EXCLUSION {
            continue;
        }
        let value = candidate.value(u);
        if value <= 0.0 {
            return Err(PotentialError::NegativePotential { u, value });
        }
    }
    Ok(candidate)
}

/// Transition energy `c_F = ∫_{-1}^{1} sqrt(2 F(s)) ds`, the energy cost of
/// one interface. Quadrature absolute error below `1e-10`.
pub fn transition_energy(p: &Potential) -> Result<f64, QuadratureFailure> {
    integrate(
        |s| (2.0 * p.value(s)).max(0.0).sqrt(),
        -1.0,
        1.0,
        CONSTANT_QUAD_TOL,
        0.0,
        CONSTANT_QUAD_NOISE,
    )
}

/// Well curvatures and tail prefactors of the heteroclinic connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveConstants {
    /// `A_+ = sqrt(F''(+1))`: tail decay rate toward the `+1` well.
    pub a_plus: f64,
    /// `A_- = sqrt(F''(-1))`.
    pub a_minus: f64,
    /// `K_+`: tail prefactor toward `+1`, `1 - φ ~ K_+ e^{-A_+ x / ε}`.
    pub k_plus: f64,
    /// `K_-`.
    pub k_minus: f64,
}

impl WaveConstants {
    /// Decay rate of the branch approaching the well of sign `sign`.
    pub fn a(&self, sign: f64) -> f64 {
        if sign > 0.0 {
            self.a_plus
        } else {
            self.a_minus
        }
    }

    /// Prefactor of the branch approaching the well of sign `sign`.
    pub fn k(&self, sign: f64) -> f64 {
        if sign > 0.0 {
            self.k_plus
        } else {
            self.k_minus
        }
    }
}

/// Compute `A_± = sqrt(F''(±1))` and the tail prefactors
///
/// ```text
/// K_± = 2 exp{ ∫₀¹ ( A_± / sqrt(2 F(±t)) − 1/(1−t) ) dt }.
/// ```
///
/// The two terms of the integrand diverge at `t = 1` but their difference
/// extends analytically. For polynomial potentials the integrand is
/// rewritten through the well factorization `F(±(1−w)) = w² h(w)` as
/// `(A/sqrt(2 h(w)) − 1)/w`, which is evaluable to machine precision all
/// the way into the well; quadrature error stays below `1e-8`. For custom
/// evaluators the direct difference is integrated up to a small standoff
/// from the well, which limits the accuracy of `K_±` to roughly `1e-5`.
pub fn wave_constants(p: &Potential) -> Result<WaveConstants, QuadratureFailure> {
    let a_plus = p.second_deriv(1.0).sqrt();
    let a_minus = p.second_deriv(-1.0).sqrt();
    let tail = |a: f64, sign: f64| -> Result<f64, QuadratureFailure> {
        // h(w) = F(sign·(1−w)) / w², from the Taylor coefficients at the
        // well (the constant and linear terms vanish there).
        let shifted: Option<Vec<f64>> = p.taylor_coefficients(sign).map(|t| {
            t.iter()
                .enumerate()
                .skip(2)
                .map(|(j, &tj)| tj * (-sign).powi(j as i32))
                .collect()
        });
        let integral = match shifted {
            Some(h) if !h.is_empty() => integrate(
                |w| {
                    let hw: f64 = h.iter().rev().fold(0.0, |acc, &c| acc * w + c);
                    (a / (2.0 * hw).max(f64::MIN_POSITIVE).sqrt() - 1.0) / w
                },
                0.0,
                1.0,
                CONSTANT_QUAD_TOL,
                0.0,
                CONSTANT_QUAD_NOISE,
            )?,
            _ => integrate(
                |t| a / (2.0 * p.value(sign * t)).max(f64::MIN_POSITIVE).sqrt() - 1.0 / (1.0 - t),
                0.0,
                1.0 - CUSTOM_WELL_STANDOFF,
                CONSTANT_QUAD_TOL,
                0.0,
                CUSTOM_TAIL_NOISE,
            )?,
        };
        Ok(2.0 * integral.exp())
    };
    Ok(WaveConstants {
        a_plus,
        a_minus,
        k_plus: tail(a_plus, 1.0)?,
        k_minus: tail(a_minus, -1.0)?,
    })
}

/// Built-in damping families.
#[derive(Clone)]
pub enum DampingKind {
    /// `g ≡ 1` (classically damped wave dynamics).
    One,
    /// `g ≡ c` for a positive constant.
    Constant(f64),
    /// Relaxation damping `g(u) = 1 − τ f'(u)`, tied to the potential.
    Relaxation { tau: f64, potential: Potential },
    /// Arbitrary evaluator.
    Custom(ScalarFn),
}

/// A damping function `g(u)` together with its certified positive lower
/// bound `σ` on the validation grid.
#[derive(Clone)]
pub struct Damping {
    kind: DampingKind,
    /// Certified lower bound: `g(u) ≥ σ > 0` on the validation grid.
    pub sigma: f64,
}

impl std::fmt::Debug for Damping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            DampingKind::One => write!(f, "Damping::One"),
            DampingKind::Constant(c) => write!(f, "Damping::Constant({c})"),
            DampingKind::Relaxation { tau, .. } => write!(f, "Damping::Relaxation(tau = {tau})"),
            DampingKind::Custom(_) => write!(f, "Damping::Custom(sigma = {})", self.sigma),
        }
    }
}

/// Ways a damping candidate can fail the positivity assumption.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DampingError {
    #[error("damping is not strictly positive: g({u}) = {value:e}")]
    NotPositive { u: f64, value: f64 },
    #[error(
        "relaxation time {tau} too large: need tau < 1/max f' = {limit} \
         for positive damping"
    )]
    RelaxationTooStrong { tau: f64, limit: f64 },
}

impl Damping {
    /// Constant damping `g ≡ 1`.
    pub fn one() -> Damping {
        Damping {
            kind: DampingKind::One,
            sigma: 1.0,
        }
    }

    /// Constant damping `g ≡ c`, `c > 0`.
    pub fn constant(c: f64) -> Result<Damping, DampingError> {
        if c <= 0.0 {
            return Err(DampingError::NotPositive { u: 0.0, value: c });
        }
        Ok(Damping {
            kind: DampingKind::Constant(c),
            sigma: c,
        })
    }

    /// Relaxation damping `g(u) = 1 − τ f'(u)`; requires
    /// `0 < τ < 1 / max f'` so that `g` stays positive.
    pub fn relaxation(tau: f64, potential: &Potential) -> Result<Damping, DampingError> {
        let max_slope = potential.max_reaction_slope();
        if max_slope > 0.0 && tau >= 1.0 / max_slope {
            return Err(DampingError::RelaxationTooStrong {
                tau,
                limit: 1.0 / max_slope,
            });
        }
        let kind = DampingKind::Relaxation {
            tau,
            potential: potential.clone(),
        };
        let sigma = grid_min(&kind);
        debug_assert!(sigma > 0.0);
        Ok(Damping { kind, sigma })
    }

    /// Arbitrary damping evaluator; validated for strict positivity on the
    /// grid, with `σ` set to the grid minimum.
    pub fn custom(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Damping, DampingError> {
        let kind = DampingKind::Custom(Arc::new(g));
        for u in validation_grid() {
            let value = eval_kind(&kind, u);
            if value <= 0.0 {
                return Err(DampingError::NotPositive { u, value });
            }
        }
        let sigma = grid_min(&kind);
        Ok(Damping { kind, sigma })
    }

    /// `g(u)`.
    pub fn value(&self, u: f64) -> f64 {
        eval_kind(&self.kind, u)
    }

    /// Largest `g` over the validation grid (used by explicit time-step
    /// selection for the damped wave models).
    pub fn max_on_grid(&self) -> f64 {
        validation_grid()
            .map(|u| self.value(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when `g ≡ 1`.
    pub fn is_one(&self) -> bool {
        matches!(self.kind, DampingKind::One)
    }
}

fn eval_kind(kind: &DampingKind, u: f64) -> f64 {
    match kind {
        DampingKind::One => 1.0,
        DampingKind::Constant(c) => *c,
        DampingKind::Relaxation { tau, potential } => 1.0 - tau * potential.reaction_slope(u),
        DampingKind::Custom(g) => g(u),
    }
}

fn grid_min(kind: &DampingKind) -> f64 {
    validation_grid()
        .map(|u| eval_kind(kind, u))
        .fold(f64::INFINITY, f64::min)
}

/// Weighted damping average
///
/// ```text
/// γ = ∫_{-1}^{1} sqrt(F(s)) g(s) ds / ∫_{-1}^{1} sqrt(F(s)) ds,
/// ```
///
/// the effective friction felt by a travelling interface. Quadrature error
/// below `1e-10`.
pub fn damping_average(p: &Potential, d: &Damping) -> Result<f64, QuadratureFailure> {
    let weighted = integrate(
        |s| p.value(s).max(0.0).sqrt() * d.value(s),
        -1.0,
        1.0,
        CONSTANT_QUAD_TOL,
        0.0,
        CONSTANT_QUAD_NOISE,
    )?;
    let weight = integrate(
        |s| p.value(s).max(0.0).sqrt(),
        -1.0,
        1.0,
        CONSTANT_QUAD_TOL,
        0.0,
        CONSTANT_QUAD_NOISE,
    )?;
    Ok(weighted / weight)
}

/// The parameter bundle shared by every model: diffusion length `ε`,
/// relaxation time `τ`, potential, and damping.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Diffusion length, `0 < ε ≪ 1`.
    pub epsilon: f64,
    /// Relaxation time, `τ ≥ 0`; `τ = 0` only for the parabolic models.
    pub tau: f64,
    pub potential: Potential,
    pub damping: Damping,
}
