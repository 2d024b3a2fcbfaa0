//! Standing waves, metastable multi-layer profiles, and the exponentially
//! small gap quantities `α`, `β`.
//!
//! The building block is the sign-definite standing wave `φ(·, ℓ, ±1)`
//! solving the two-point boundary value problem
//!
//! ```text
//! ε² φ'' + f(φ) = 0   on (-ℓ/2, ℓ/2),    φ(±ℓ/2) = 0,
//! ```
//!
//! with `±φ > 0` inside. A multi-layer profile `u^h` on `[0, 1]` is built by
//! blending the standing waves of consecutive gaps near each layer position
//! `h_j`, with reflected ghost layers handling the Neumann walls. Each gap of
//! length `ℓ` carries two exponentially small scalars: `α = F(φ(0))`, the
//! potential level at the wave's extremum, and `β = 1 ∓ φ(0)`, the plateau's
//! deviation from the well. Both admit asymptotic formulas in `r = ε/ℓ`,
//!
//! ```text
//! α ≈ ½ K² A² e^{-A/r},    β ≈ K e^{-A/(2r)},
//! ```
//!
//! with `A`, `K` from [`wave_constants`]. This module computes both the
//! exact (shooting) and asymptotic versions, assembles profiles, and
//! provides the barrier function `Ψ`, profile mass, the mass-constraint
//! parametrization of the last layer, and the renormalized energy.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::quad::{integrate, QuadratureFailure};
use crate::numerics::root::brent;
use crate::numerics::stencil::gradient_order8_reflect;
use crate::numerics::{trapezoid, trapezoid_map};
use crate::potential::{wave_constants, Potential, WaveConstants};

/// Absolute tolerance for the arc-length quadratures defining the wave.
const WAVE_QUAD_TOL: f64 = 1e-13;
/// Absolute tolerance in `ln β` for the plateau-level solve.
const PLATEAU_LOG_TOL: f64 = 1e-13;
/// Absolute tolerance in `x` when inverting the arc-length map. The wave
/// slope is at most `sqrt(2 F(0)) / ε`, so the effect on evaluated values
/// stays within a small multiple of this divided by `ε`.
const INVERT_X_TOL: f64 = 5e-15;
/// Gaps must exceed this multiple of `ε` so the blend zones around
/// neighbouring layers stay disjoint.
const MIN_GAP_OVER_EPS: f64 = 2.0;
/// Mass target tolerance of the mass-constraint solve.
const MASS_TOL: f64 = 1e-8;

/// Failure modes of wave and profile construction.
#[derive(Debug, Clone, Error)]
pub enum ProfileError {
    /// An arc-length or constants quadrature did not converge (typically the
    /// potential violates the double-well shape along the requested branch).
    #[error("singular quadrature in wave construction: {0}")]
    SingularQuadrature(QuadratureFailure),
    /// No standing wave exists: the gap is at or below the minimal length.
    #[error(
        "no standing wave on a gap of length {ell} at epsilon = {epsilon}: \
         the gap is at or below the minimal supported length"
    )]
    NoSolution { ell: f64, epsilon: f64 },
    /// A root bracket could not be established or refined.
    #[error("bracketing failure: {detail}")]
    BracketFailure { detail: String },
    /// Layer positions violate ordering, range, or gap requirements.
    #[error("inadmissible layers: {detail}")]
    InadmissibleLayers { detail: String },
    /// The requested mass is not attained by any admissible last layer.
    #[error("no admissible last layer reaches mass {target}")]
    NoRoot { target: f64 },
}

impl From<QuadratureFailure> for ProfileError {
    fn from(e: QuadratureFailure) -> Self {
        ProfileError::SingularQuadrature(e)
    }
}

/// Whether gap quantities come from the shooting solve or the exponential
/// asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaMode {
    Exact,
    Asymptotic,
}

/// The exponentially small interaction quantities of one gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    /// Aspect ratio `r = ε/ℓ` of the gap.
    pub r: f64,
    /// Potential level at the wave extremum, `α = F(φ(0))`.
    pub alpha: f64,
    /// Plateau deviation from the well, `β = 1 ∓ φ(0)`.
    pub beta: f64,
    /// True when obtained from the shooting solve rather than asymptotics.
    pub exact: bool,
}

/// Branch-adjusted potential `G(q) = F(s·q)` with well-centered expansions
/// for cancellation-free level differences.
///
/// The wave integrands need `G(m − σ²) − G(m)` where both arguments sit
/// within `β = 1 − m` of the well — an exponentially small number. Direct
/// subtraction loses `log₁₀(1/β)` digits and the resulting noise stalls
/// adaptive quadrature. For polynomial potentials the Taylor expansion about
/// each well is exact, and in well-distance coordinates the difference
/// factors through `σ²` with no cancellation at all.
#[derive(Debug, Clone)]
struct WaveShape {
    potential: Potential,
    sign: f64,
    /// Coefficients `e_j` of `G(1 − w) = Σ_{j≥2} e_j wʲ`; the constant and
    /// linear terms vanish at the well. `None` for non-polynomial `F`.
    near_well: Option<Vec<f64>>,
    /// Coefficients of `G(−1 + w) = Σ_{j≥2} e_j wʲ` about the opposite well.
    far_well: Option<Vec<f64>>,
}

/// Evaluate `Σ_{j≥2} e_j wʲ` (Horner on the tail, scaled by `w²`).
fn eval_from_quadratic(e: &[f64], w: f64) -> f64 {
    let tail = e[2..].iter().rev().fold(0.0, |acc, &c| acc * w + c);
    w * w * tail
}

impl WaveShape {
    fn new(p: &Potential, sign: f64) -> WaveShape {
        let expand = |well: f64, scale: f64| {
            p.taylor_coefficients(well)
                .filter(|t| t.len() >= 3)
                .map(|t| {
                    let mut e: Vec<f64> = t
                        .iter()
                        .enumerate()
                        .map(|(j, &tj)| tj * scale.powi(j as i32))
                        .collect();
                    // The well conditions F = F' = 0 hold to validation
                    // tolerance; the wave math needs them exactly.
                    for c in e.iter_mut().take(2) {
                        *c = 0.0;
                    }
                    e
                })
        };
        WaveShape {
            potential: p.clone(),
            sign,
            near_well: expand(sign, -sign),
            far_well: expand(-sign, sign),
        }
    }

    /// `G(q) = F(s·q)` by direct evaluation.
    fn g(&self, q: f64) -> f64 {
        self.potential.value(self.sign * q)
    }

    /// `G(−1 + w)` through the opposite-well expansion when available.
    fn g_far(&self, w: f64) -> f64 {
        match &self.far_well {
            Some(e) => eval_from_quadratic(e, w),
            None => self.g(-1.0 + w),
        }
    }

    /// Whether the stable well expansions are available (polynomial `F`).
    fn stable(&self) -> bool {
        self.near_well.is_some() && self.far_well.is_some()
    }

    /// `α = G(1 − β)`, stable down to `β` at the underflow floor.
    fn alpha(&self, beta: f64) -> f64 {
        match &self.near_well {
            Some(e) => eval_from_quadratic(e, beta),
            None => self.g(1.0 - beta),
        }
    }

    /// Relative evaluation noise of [`Self::level_diff`], advertised to the
    /// quadrature. With expansions the difference is machine-clean; without,
    /// direct subtraction leaves absolute noise of order `ε_mach` against a
    /// difference that bottoms out near `α`.
    fn quad_noise(&self, alpha: f64) -> f64 {
        if self.stable() {
            0.0
        } else {
            (f64::EPSILON / alpha.max(f64::MIN_POSITIVE)).clamp(1e-12, 1e-3)
        }
    }

    /// Level difference `G(m − σ²) − G(m)` with `m = 1 − β`.
    ///
    /// `alpha` must equal `self.alpha(beta)`; it enters on the far side of
    /// zero, where the difference is taken against the opposite-well
    /// expansion instead.
    fn level_diff(&self, beta: f64, sigma_sq: f64, alpha: f64) -> f64 {
        let y = (1.0 - beta) - sigma_sq;
        if y >= 0.0 {
            match &self.near_well {
                Some(e) => {
                    // Σ e_j ((β+σ²)ʲ − βʲ) = σ² Σ e_j S_j with power sums
                    // S_j = Σ_{i<j} (β+σ²)ⁱ β^{j−1−i}; the σ² factor is
                    // exact and every S_j is positive, so no digits cancel.
                    let sy = beta + sigma_sq;
                    let mut acc = 0.0;
                    let mut beta_pow = beta; // β^{j−1}
                    let mut s = sy + beta; // S_2
                    for &ej in &e[2..] {
                        acc += ej * s;
                        beta_pow *= beta;
                        s = sy * s + beta_pow;
                    }
                    acc * sigma_sq
                }
                None => self.g(y) - self.g(1.0 - beta),
            }
        } else {
            self.g_far(1.0 + y) - alpha
        }
    }

    /// Worst-case relative rounding noise of [`Self::level_diff`] along
    /// the arc, reached at the zero crossing `σ² = m` where the power-sum
    /// terms are largest while their sum is smallest: the evaluation loses
    /// a factor `Σ |e_j| S_j / |Σ e_j S_j|` to cancellation, which grows
    /// like `1/m` for small-amplitude waves near the minimal gap (the rate
    /// degenerates together with `G'` at the crossing). Declaring it keeps
    /// the quadrature from refining past what the expansion can resolve;
    /// arcs within `O(ε_mach / m)` of the minimal gap degrade gracefully
    /// instead of stalling.
    fn arc_noise(&self, beta: f64) -> f64 {
        match &self.near_well {
            Some(e) => {
                let mut acc = 0.0;
                let mut mag = 0.0;
                let mut beta_pow = beta; // β^{j−1}
                let mut s = 1.0 + beta; // S_2(1, β)
                for &ej in &e[2..] {
                    acc += ej * s;
                    mag += ej.abs() * s;
                    beta_pow *= beta;
                    s += beta_pow;
                }
                (4.0 * f64::EPSILON * mag / acc.abs().max(f64::MIN_POSITIVE)).min(0.1)
            }
            None => 0.0,
        }
    }

    /// Rate of the far-side level difference past the conjugate point:
    /// `(G(−1 + w_ref + y) − G(−1 + w_ref)) / y` at offset `y ≥ 0`.
    ///
    /// With the opposite-well expansion the quotient is evaluated as
    /// `Σ e_j S_j` with power sums `S_j = Σ_{i<j} wⁱ w_ref^{j−1−i}`
    /// (`w = w_ref + y`), so the difference of nearby arguments never
    /// forms; a direct subtraction near the turning point would amplify
    /// roundoff by `α / (G − α)`.
    fn far_rate(&self, y: f64, w_ref: f64) -> f64 {
        match &self.far_well {
            Some(e) => {
                let w = w_ref + y;
                let mut acc = 0.0;
                let mut ref_pow = w_ref; // w_ref^{j−1}
                let mut s = w + w_ref; // S_2
                for &ej in &e[2..] {
                    acc += ej * s;
                    ref_pow *= w_ref;
                    s = w * s + ref_pow;
                }
                acc
            }
            None => {
                (self.g_far(w_ref + y) - self.g_far(w_ref)) / y.max(f64::MIN_POSITIVE)
            }
        }
    }
}

/// Arc length of the half wave with plateau offset `beta`, in physical `x`:
///
/// ```text
/// ℓ/2 = ε ∫₀^{√m} 2σ dσ / sqrt(2 (G(m − σ²) − G(m))),    m = 1 − β.
/// ```
fn arc_half_period(shape: &WaveShape, beta: f64, epsilon: f64) -> Result<f64, ProfileError> {
    let alpha = shape.alpha(beta);
    let m = 1.0 - beta;
    let arc = integrate(
        |s| {
            let d = shape.level_diff(beta, s * s, alpha);
            2.0 * s / (2.0 * d).sqrt()
        },
        0.0,
        m.sqrt(),
        WAVE_QUAD_TOL,
        1e-12,
        shape.quad_noise(alpha).max(shape.arc_noise(beta)),
    )?;
    Ok(epsilon * arc)
}

/// Half-length of the standing wave whose extremum is `phi0`.
///
/// Returns
///
/// ```text
/// ℓ/2 = ε ∫₀^{s·φ₀} dφ / sqrt(2 (F(s·φ) − F(φ₀)))
/// ```
///
/// computed with the substitution `φ = φ₀ − σ²` (branch-adjusted), which
/// makes the integrand analytic at the extremum endpoint; for polynomial
/// potentials the level difference under the root is evaluated through
/// well-centered expansions so that plateaus exponentially close to `±1`
/// do not suffer cancellation. Requires `s·φ₀ ∈ (0, 1)`.
pub fn half_period(
    phi0: f64,
    p: &Potential,
    epsilon: f64,
    sign: f64,
) -> Result<f64, ProfileError> {
    let m = sign * phi0;
    assert!(
        m > 0.0 && m < 1.0,
        "plateau out of range: sign*phi0 = {m} must lie in (0,1)"
    );
    let shape = WaveShape::new(p, sign);
    arc_half_period(&shape, 1.0 - m, epsilon)
}

/// A solved standing wave on a gap of length `ell`.
///
/// The evaluator covers `|x| ≤ ℓ/2` plus a short analytic extension past the
/// zeros (as far as the conjugate turning point), which profile blending
/// relies on.
#[derive(Debug, Clone)]
pub struct StandingWave {
    /// Gap length; the wave vanishes at `±ℓ/2`.
    pub ell: f64,
    pub epsilon: f64,
    /// Branch sign `s`: the wave satisfies `s·φ > 0` inside the gap.
    pub sign: f64,
    /// Extremum value `φ(0)`, with `s·φ₀ ∈ (0, 1)`.
    pub phi0: f64,
    /// `α = F(φ₀)`.
    pub alpha: f64,
    /// `β = 1 − s·φ₀`.
    pub beta: f64,
    /// `m = s·φ₀`.
    m: f64,
    /// Conjugate turning point in far-well distance: `G(−1 + w_min) = G(m)`.
    /// The extension's level differences are anchored here.
    w_min: f64,
    /// Lower end of the invertible extension in the substituted coordinate
    /// `p = sqrt(w − w_min)`: zero for polynomial wells, a small standoff
    /// for custom potentials whose level rate near the turning point is
    /// noise-limited.
    p_floor: f64,
    /// `p` at the zero crossing: `sqrt(1 − w_min)`.
    p_max: f64,
    /// `x` at the zero crossing `q = 0` (equals `ℓ/2` up to solver
    /// tolerance).
    x_zero: f64,
    /// `x` at the extension floor: the largest `|x|` the evaluator reaches.
    x_cap: f64,
    shape: WaveShape,
}

/// Illinois regula falsi on a bracket with known endpoint values; `f` must
/// increase from `f_lo ≤ 0` to `f_hi ≥ 0`. Converges when `|f| ≤ ftol` or
/// the bracket collapses. Carrying the endpoint values in avoids
/// re-evaluating the expensive arc integrals at the bracket ends.
fn illinois(
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
    ftol: f64,
    mut f: impl FnMut(f64) -> Result<f64, ProfileError>,
) -> Result<f64, ProfileError> {
    if f_lo >= 0.0 {
        return Ok(lo);
    }
    if f_hi <= 0.0 {
        return Ok(hi);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        // Secant step, falling back to bisection when it stalls at one end.
        let mut mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let fm = f(mid)?;
        if fm.abs() <= ftol || (hi - lo) < 1e-15 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
            f_lo = fm;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = fm;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(ProfileError::BracketFailure {
        detail: "arc-length inversion stalled".to_string(),
    })
}

impl StandingWave {
    /// Distance from the wave's center at which it passes the level
    /// `q = m − s²`, for `s ∈ [0, √m]` (center to zero crossing); monotone
    /// increasing in `s` and analytic at both ends.
    fn x_of_s(&self, s_var: f64) -> Result<f64, ProfileError> {
        if s_var == 0.0 {
            return Ok(0.0);
        }
        let arc = integrate(
            |s| {
                let d = self.shape.level_diff(self.beta, s * s, self.alpha);
                2.0 * s / (2.0 * d).sqrt()
            },
            0.0,
            s_var,
            WAVE_QUAD_TOL,
            1e-12,
            self.shape.quad_noise(self.alpha).max(self.shape.arc_noise(self.beta)),
        )?;
        Ok(self.epsilon * arc)
    }

    /// Distance from the center at which the extension past the zero
    /// reaches `p = sqrt(w − w_min) ∈ [p_floor, p_max]`, `w = 1 + q` being
    /// the far-well distance; decreasing in `p`. Substituting `p` makes the
    /// integration variable carry the distance to the turning point, so the
    /// integrand `2 / sqrt(2 (G(−1+w) − G(m)) / (w − w_min))` is smooth all
    /// the way down to `p = 0` and free of the square-root corner that
    /// direct `w` panels cannot resolve past the rounding of their nodes.
    fn x_of_p(&self, p_var: f64) -> Result<f64, ProfileError> {
        if p_var >= self.p_max {
            return Ok(self.x_zero);
        }
        let arc = integrate(
            |p| {
                let rate = self.shape.far_rate(p * p, self.w_min);
                2.0 / (2.0 * rate).sqrt()
            },
            p_var,
            self.p_max,
            WAVE_QUAD_TOL,
            1e-12,
            self.shape.quad_noise(self.alpha).max(self.shape.arc_noise(self.beta)),
        )?;
        Ok(self.x_zero + self.epsilon * arc)
    }

    /// Level coordinate of the wave at distance `x ≥ 0` from the center:
    /// returns `(q, G(q) − G(m))`.
    fn locate(&self, x: f64) -> Result<(f64, f64), ProfileError> {
        if x <= 0.0 {
            return Ok((self.m, 0.0));
        }
        if x > self.x_cap {
            return Err(ProfileError::BracketFailure {
                detail: format!(
                    "wave evaluation at |x| = {x:.6e} exceeds the invertible range {:.6e} \
                     (gap {} at epsilon {})",
                    self.x_cap, self.ell, self.epsilon
                ),
            });
        }
        if x <= self.x_zero {
            let s = illinois(0.0, -x, self.m.sqrt(), self.x_zero - x, INVERT_X_TOL, |s| {
                Ok(self.x_of_s(s)? - x)
            })?;
            let d = self.shape.level_diff(self.beta, s * s, self.alpha);
            Ok((self.m - s * s, d.max(0.0)))
        } else {
            let p = illinois(
                self.p_floor,
                x - self.x_cap,
                self.p_max,
                x - self.x_zero,
                INVERT_X_TOL,
                |p| Ok(x - self.x_of_p(p)?),
            )?;
            let d = p * p * self.shape.far_rate(p * p, self.w_min);
            Ok((-1.0 + (self.w_min + p * p), d.max(0.0)))
        }
    }

    /// Evaluate `φ(x)`; the wave is even about its center.
    pub fn value(&self, x: f64) -> Result<f64, ProfileError> {
        Ok(self.value_and_slope(x)?.0)
    }

    /// Evaluate `(φ(x), φ'(x))`.
    pub fn value_and_slope(&self, x: f64) -> Result<(f64, f64), ProfileError> {
        let (q, d) = self.locate(x.abs())?;
        let speed = (2.0 * d).sqrt() / self.epsilon;
        Ok((self.sign * q, -self.sign * x.signum() * speed))
    }
}

/// Upper limit for `β = 1 − m` on the given branch: for potentials with
/// `F'(0) ≠ 0` the branch-adjusted potential rises above `F(0)` before
/// descending to the well, and waves only exist for extrema beyond the
/// level-crossing `m*` where `F(s·m*) = F(0)`.
fn branch_beta_ceiling(p: &Potential, sign: f64) -> Result<f64, ProfileError> {
    let g0 = p.value(0.0);
    let scan = 4096;
    let mut rising = false;
    let mut prev = 0.0f64;
    for k in 1..=scan {
        let m = k as f64 / scan as f64;
        let d = p.value(sign * m) - g0;
        if d > 0.0 {
            rising = true;
        } else if rising {
            let m_star =
                brent(|q| p.value(sign * q) - g0, prev, m, 1e-14, 1e-14, 200).map_err(|e| {
                    ProfileError::BracketFailure {
                        detail: format!("level-crossing solve for the wave range: {e}"),
                    }
                })?;
            return Ok((1.0 - m_star) * (1.0 - 1e-9));
        }
        prev = m;
    }
    Ok(1.0 - 1e-12)
}

/// Solve the standing-wave boundary value problem on a gap of length `ell`.
///
/// Finds the extremum level `φ₀` with `half_period(φ₀) = ℓ/2` by bracketed
/// root finding in `ln β`, seeded by the asymptotic guess
/// `β ≈ K e^{-A ℓ / (2ε)}`. The returned wave carries `α`, `β`, and an
/// evaluator based on inverting the arc-length map of the first integral
/// `ε φ' = ± sqrt(2 (F(φ) − F(φ₀)))`.
pub fn solve_standing_wave(
    ell: f64,
    epsilon: f64,
    sign: f64,
    p: &Potential,
) -> Result<StandingWave, ProfileError> {
    assert!(ell > 0.0 && epsilon > 0.0, "need positive gap and epsilon");
    assert!(sign == 1.0 || sign == -1.0, "branch sign must be ±1");
    // Minimal gap from the linearization at 0: arcs shorter than
    // π ε / sqrt(f'(0)) cannot turn around.
    let slope0 = p.reaction_slope(0.0);
    if slope0 > 0.0 && ell <= PI * epsilon / slope0.sqrt() {
        return Err(ProfileError::NoSolution { ell, epsilon });
    }

    let constants = wave_constants(p)?;
    let a = constants.a(sign);
    let k = constants.k(sign);
    let shape = WaveShape::new(p, sign);
    let beta_ceiling = branch_beta_ceiling(p, sign)?;
    let beta_guess = (k * (-a * ell / (2.0 * epsilon)).exp()).min(0.5 * beta_ceiling);
    // With well expansions the plateau offset is tracked in its own scale
    // and can be far below the spacing of f64 around 1; direct evaluation
    // resolves the plateau only down to a few ulps of 1.
    let beta_floor = if shape.stable() {
        1e-280
    } else {
        4.0 * f64::EPSILON
    };

    // Residual of the gap-length equation in t = ln β; decreasing in t.
    let residual = |t: f64| -> Result<f64, ProfileError> {
        Ok(arc_half_period(&shape, t.exp(), epsilon)? - 0.5 * ell)
    };

    let floor_t = beta_floor.ln();
    let mut t_lo = (beta_guess / 50.0).ln().max(floor_t);
    let mut f_lo = residual(t_lo)?;
    while f_lo < 0.0 {
        if t_lo <= floor_t {
            return Err(ProfileError::BracketFailure {
                detail: format!(
                    "gap {ell} at epsilon {epsilon} needs a plateau closer to ±1 \
                     than f64 can represent"
                ),
            });
        }
        t_lo = (t_lo - 3.0 * std::f64::consts::LN_10).max(floor_t);
        f_lo = residual(t_lo)?;
    }
    let t_cap = beta_ceiling.ln();
    let mut t_hi = (beta_guess * 50.0).ln().min(t_cap);
    let mut f_hi = residual(t_hi)?;
    while f_hi > 0.0 {
        if t_hi >= t_cap {
            // Even the widest admissible arc is shorter than requested.
            return Err(ProfileError::NoSolution { ell, epsilon });
        }
        t_hi = (t_hi + 50f64.ln()).min(t_cap);
        f_hi = residual(t_hi)?;
    }

    // residual() can only fail via quadrature, which the expansion above
    // already exercised at both ends; inside brent we map failures to NaN,
    // which stalls the iteration and surfaces as BracketFailure.
    let t = brent(
        |t| residual(t).unwrap_or(f64::NAN),
        t_lo,
        t_hi,
        PLATEAU_LOG_TOL,
        0.0,
        200,
    )
    .map_err(|e| ProfileError::BracketFailure {
        detail: format!("plateau solve on gap {ell} at epsilon {epsilon}: {e}"),
    })?;

    let beta = t.exp();
    let m = 1.0 - beta;
    let alpha = shape.alpha(beta);

    // Conjugate turning point on the other side of zero: G(−1 + w_min) =
    // G(m), solved in the far-well distance w so the bracket endpoint at
    // the well is exact even for exponentially small α.
    let w_min = brent(|w| shape.g_far(w) - alpha, 0.0, 1.0 - 1e-12, 1e-14, 1e-14, 200).map_err(
        |e| ProfileError::BracketFailure {
            detail: format!("conjugate turning point solve: {e}"),
        },
    )?;
    // Polynomial wells extend exactly to the turning point; for custom
    // potentials the level rate there is a noise-limited 0/0, so stop a
    // fixed fraction of the level range short of it.
    let p_floor = if shape.stable() {
        0.0
    } else {
        (((1.0 + m) - w_min) * 1e-6).sqrt()
    };

    let mut wave = StandingWave {
        ell,
        epsilon,
        sign,
        phi0: sign * m,
        alpha,
        beta,
        m,
        w_min,
        p_floor,
        p_max: (1.0 - w_min).sqrt(),
        x_zero: 0.0,
        x_cap: 0.0,
        shape,
    };
    wave.x_zero = wave.x_of_s(m.sqrt())?;
    wave.x_cap = wave.x_of_p(p_floor)?;
    Ok(wave)
}

/// Plug-in asymptotic gap quantities from precomputed wave constants.
pub fn alpha_beta_asymptotic(ell: f64, epsilon: f64, sign: f64, constants: &WaveConstants) -> AlphaBeta {
    let r = epsilon / ell;
    let a = constants.a(sign);
    let k = constants.k(sign);
    AlphaBeta {
        r,
        alpha: 0.5 * k * k * a * a * (-a / r).exp(),
        beta: k * (-a / (2.0 * r)).exp(),
        exact: false,
    }
}

/// Gap quantities `α`, `β` for a gap of length `ell`, either from the
/// shooting solve (`Exact`) or from the exponential asymptotics
/// (`Asymptotic`).
pub fn alpha_beta(
    ell: f64,
    epsilon: f64,
    sign: f64,
    p: &Potential,
    mode: AlphaMode,
) -> Result<AlphaBeta, ProfileError> {
    match mode {
        AlphaMode::Exact => {
            let wave = solve_standing_wave(ell, epsilon, sign, p)?;
            Ok(AlphaBeta {
                r: epsilon / ell,
                alpha: wave.alpha,
                beta: wave.beta,
                exact: true,
            })
        }
        AlphaMode::Asymptotic => {
            let constants = wave_constants(p)?;
            Ok(alpha_beta_asymptotic(ell, epsilon, sign, &constants))
        }
    }
}

/// Strictly increasing layer positions in `(0, 1)` with reflected ghosts.
///
/// For `N+1` layers `h₁ < … < h_{N+1}` the ghosts are `h₀ = −h₁` and
/// `h_{N+2} = 2 − h_{N+1}`, giving `N+2` gaps `l_j = h_j − h_{j−1}`
/// (so `l₁ = 2h₁` and `l_{N+2} = 2(1 − h_{N+1})`).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerVector {
    positions: Vec<f64>,
}

impl LayerVector {
    pub fn new(positions: Vec<f64>) -> Result<LayerVector, ProfileError> {
        if positions.is_empty() {
            return Err(ProfileError::InadmissibleLayers {
                detail: "at least one layer is required".to_string(),
            });
        }
        for (i, &h) in positions.iter().enumerate() {
            if !h.is_finite() || h <= 0.0 || h >= 1.0 {
                return Err(ProfileError::InadmissibleLayers {
                    detail: format!("layer {} at {} is outside (0, 1)", i + 1, h),
                });
            }
            if i > 0 && h <= positions[i - 1] {
                return Err(ProfileError::InadmissibleLayers {
                    detail: format!(
                        "layers must be strictly increasing, got {} after {}",
                        h,
                        positions[i - 1]
                    ),
                });
            }
        }
        Ok(LayerVector { positions })
    }

    /// The layer positions `h₁.. h_{N+1}`.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Number of layers, `N + 1`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All `N+2` gaps including the reflected boundary gaps.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.positions.len();
        let mut gaps = Vec::with_capacity(n + 1);
        gaps.push(2.0 * self.positions[0]);
        for i in 1..n {
            gaps.push(self.positions[i] - self.positions[i - 1]);
        }
        gaps.push(2.0 * (1.0 - self.positions[n - 1]));
        gaps
    }

    /// Smallest gap (including the boundary gaps).
    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Whether every gap exceeds the collision threshold `ε/ρ`.
    pub fn is_admissible(&self, epsilon: f64, rho: f64) -> bool {
        self.min_gap() > epsilon / rho
    }

    /// Sign of the profile on gap `j` (1-based, `1..=N+2`): `(−1)^j`.
    pub fn gap_sign(j: usize) -> f64 {
        if j.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Quintic smoothstep: 0 below −1, 1 above +1, C² monotone in between.
fn smoothstep(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let t = 0.5 * (s + 1.0);
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// A multi-layer profile `u^h` sampled on a uniform grid over `[0, 1]`.
#[derive(Debug, Clone)]
pub struct MetastableProfile {
    pub layers: LayerVector,
    pub epsilon: f64,
    /// Number of grid cells; the field has `n + 1` samples.
    pub n: usize,
    /// Samples of `u^h` at `x_i = i/n`.
    pub u: Vec<f64>,
    /// Exact `α`/`β` of each of the `N+2` gaps.
    pub gap_data: Vec<AlphaBeta>,
    /// Trapezoid mass `∫ u^h`.
    pub mass: f64,
    /// Barrier value `Ψ(h) = Σ (α^{j+1} − α^j)²` from the exact alphas.
    pub psi: f64,
}

impl MetastableProfile {
    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Grid coordinate of sample `i`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }
}

/// Build the metastable profile `u^h` on `n+1` uniform grid nodes.
///
/// On each interval between consecutive gap midpoints the profile blends the
/// standing waves of the two gaps meeting at the layer in between:
/// `u = (1 − χ) φ^j(x − c_j) + χ φ^{j+1}(x − c_{j+1})` with
/// `χ = smoothstep((x − h_j)/ε)`. Boundary gaps use the reflected ghost
/// layers, which makes `u^h` exactly even about both walls.
pub fn build_profile(
    h: &LayerVector,
    epsilon: f64,
    p: &Potential,
    n: usize,
) -> Result<MetastableProfile, ProfileError> {
    assert!(n >= 2, "grid must have at least 2 cells");
    let gaps = h.gaps();
    if let Some((j, &l)) = gaps
        .iter()
        .enumerate()
        .find(|(_, &l)| l <= MIN_GAP_OVER_EPS * epsilon)
    {
        return Err(ProfileError::InadmissibleLayers {
            detail: format!(
                "gap {} has length {l}, below the blending floor {} * epsilon = {}",
                j + 1,
                MIN_GAP_OVER_EPS,
                MIN_GAP_OVER_EPS * epsilon
            ),
        });
    }

    // Standing wave of every gap (ghost gaps included), plus gap midpoints.
    let mut waves = Vec::with_capacity(gaps.len());
    let mut centers = Vec::with_capacity(gaps.len());
    let positions = h.positions();
    for (i, &l) in gaps.iter().enumerate() {
        let sign = LayerVector::gap_sign(i + 1);
        waves.push(solve_standing_wave(l, epsilon, sign, p)?);
        let center = if i == 0 {
            0.0
        } else if i == gaps.len() - 1 {
            1.0
        } else {
            0.5 * (positions[i - 1] + positions[i])
        };
        centers.push(center);
    }

    let dx = 1.0 / n as f64;
    let mut u = Vec::with_capacity(n + 1);
    // Interval index: node x lives between centers[j] and centers[j+1],
    // blending waves j and j+1 around layer positions[j].
    let mut j = 0usize;
    for i in 0..=n {
        let x = i as f64 * dx;
        while j + 2 < centers.len() && x > centers[j + 1] {
            j += 1;
        }
        let chi = smoothstep((x - positions[j]) / epsilon);
        let value = if chi <= 0.0 {
            waves[j].value(x - centers[j])?
        } else if chi >= 1.0 {
            waves[j + 1].value(x - centers[j + 1])?
        } else {
            (1.0 - chi) * waves[j].value(x - centers[j])?
                + chi * waves[j + 1].value(x - centers[j + 1])?
        };
        u.push(value);
    }

    let gap_data: Vec<AlphaBeta> = waves
        .iter()
        .map(|w| AlphaBeta {
            r: epsilon / w.ell,
            alpha: w.alpha,
            beta: w.beta,
            exact: true,
        })
        .collect();
    let psi = gap_data
        .windows(2)
        .map(|w| {
            let d = w[1].alpha - w[0].alpha;
            d * d
        })
        .sum();
    let mass = trapezoid(&u, dx);

    Ok(MetastableProfile {
        layers: h.clone(),
        epsilon,
        n,
        u,
        gap_data,
        mass,
        psi,
    })
}

/// Per-gap `α` values (length `N+2`), branch sign `(−1)^j` on gap `j`.
pub(crate) fn gap_alphas(
    h: &LayerVector,
    epsilon: f64,
    p: &Potential,
    mode: AlphaMode,
) -> Result<Vec<f64>, ProfileError> {
    let constants = match mode {
        AlphaMode::Asymptotic => Some(wave_constants(p)?),
        AlphaMode::Exact => None,
    };
    h.gaps()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let sign = LayerVector::gap_sign(i + 1);
            match &constants {
                Some(c) => Ok(alpha_beta_asymptotic(l, epsilon, sign, c).alpha),
                None => Ok(alpha_beta(l, epsilon, sign, p, AlphaMode::Exact)?.alpha),
            }
        })
        .collect()
}

/// Barrier function `Ψ(h) = Σ_{j=1}^{N+1} (α^{j+1} − α^j)²`, an
/// exponentially small measure of how far `u^h` is from equilibrium.
pub fn barrier_psi(
    h: &LayerVector,
    epsilon: f64,
    p: &Potential,
    mode: AlphaMode,
) -> Result<f64, ProfileError> {
    let alphas = gap_alphas(h, epsilon, p, mode)?;
    Ok(alphas
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            d * d
        })
        .sum())
}

/// Trapezoid mass of a built profile.
pub fn profile_mass(profile: &MetastableProfile) -> f64 {
    profile.mass
}

/// Solve for the last layer position so the profile reaches a target mass.
///
/// Given the first `N` layers `ξ`, finds `h_{N+1} = z(ξ) ∈ (ξ_N, 1)` such
/// that the built profile's mass equals `target` to `1e-8`; returns the full
/// layer vector.
pub fn solve_mass_constraint(
    xi: &[f64],
    target: f64,
    epsilon: f64,
    p: &Potential,
    n: usize,
) -> Result<LayerVector, ProfileError> {
    let slope0 = p.reaction_slope(0.0);
    let wave_floor = if slope0 > 0.0 {
        PI * epsilon / slope0.sqrt()
    } else {
        0.0
    };
    let gap_floor = 1.02 * wave_floor.max(MIN_GAP_OVER_EPS * epsilon);
    let base = xi.last().copied().unwrap_or(0.0);
    // Keep the interior gap to ξ_N and the reflected boundary gap
    // 2(1 − h_{N+1}) above the floor.
    let lo = if xi.is_empty() {
        0.5 * gap_floor
    } else {
        base + gap_floor
    };
    let hi = 1.0 - 0.5 * gap_floor;
    if lo >= hi {
        return Err(ProfileError::NoRoot { target });
    }

    let mass_at = |z: f64| -> Result<f64, ProfileError> {
        let mut positions = xi.to_vec();
        positions.push(z);
        let layers = LayerVector::new(positions)?;
        Ok(build_profile(&layers, epsilon, p, n)?.mass)
    };

    let f_lo = mass_at(lo)? - target;
    let f_hi = mass_at(hi)? - target;
    if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() != f_hi.signum() {
        let z = brent(
            |z| mass_at(z).map(|m| m - target).unwrap_or(f64::NAN),
            lo,
            hi,
            1e-12,
            0.0,
            200,
        )
        .map_err(|e| ProfileError::BracketFailure {
            detail: format!("mass-constraint solve: {e}"),
        })?;
        let mut positions = xi.to_vec();
        positions.push(z);
        let layers = LayerVector::new(positions)?;
        let mass = build_profile(&layers, epsilon, p, n)?.mass;
        if (mass - target).abs() > MASS_TOL {
            return Err(ProfileError::NoRoot { target });
        }
        Ok(layers)
    } else {
        Err(ProfileError::NoRoot { target })
    }
}

/// Renormalized energy of grid fields `(u, v)`:
///
/// ```text
/// E_ε = ∫₀¹ [ τ/(2ε) v² + (ε/2) u_x² + F(u)/ε ] dx,
/// ```
///
/// with the gradient from a high-order centered stencil (even reflection at
/// the walls) and trapezoid quadrature. A profile with `N+1` well-separated
/// layers carries `E_ε ≈ (N+1)·c_F`.
pub fn renormalized_energy(u: &[f64], v: &[f64], epsilon: f64, tau: f64, p: &Potential) -> f64 {
    assert_eq!(u.len(), v.len(), "fields must share the grid");
    let n = u.len() - 1;
    let dx = 1.0 / n as f64;
    let mut ux = vec![0.0; u.len()];
    gradient_order8_reflect(u, dx, &mut ux);
    let grad = trapezoid_map(&ux, dx, |g| g * g);
    let well = trapezoid_map(u, dx, |y| p.value(y));
    let kinetic = trapezoid_map(v, dx, |w| w * w);
    0.5 * epsilon * grad + well / epsilon + 0.5 * tau / epsilon * kinetic
}

/// Heteroclinic connection `H` of `ε² H'' + f(H) = 0` with `H(0) = 0`,
/// `H(±∞) = ±1`, evaluated by marching the first integral
/// `ε H' = sqrt(2 F(H))`. For the quartic potential this is
/// `tanh(x / (√2 ε))`.
pub fn heteroclinic_value(x: f64, epsilon: f64, p: &Potential) -> f64 {
    if is_quartic(p) {
        return (x / (std::f64::consts::SQRT_2 * epsilon)).tanh();
    }
    march_heteroclinic(&[x], epsilon, p)[0]
}

fn is_quartic(p: &Potential) -> bool {
    // The closed form is used only as a fast path; agreement with the march
    // is a test concern. Detect the builtin by its exact samples.
    (p.value(0.0) - 0.25).abs() < 1e-15
        && (p.value(0.5) - 0.140625).abs() < 1e-15
        && (p.value(1.25) - 0.25 * (1.25f64 * 1.25 - 1.0).powi(2)).abs() < 1e-15
        && p.deriv(0.0) == 0.0
}

/// March the heteroclinic to each requested offset (any order) with RK4 on
/// the first integral; offsets are grouped by sign and visited monotonically.
fn march_heteroclinic(offsets: &[f64], epsilon: f64, p: &Potential) -> Vec<f64> {
    let slope = |y: f64| (2.0 * p.value(y.clamp(-1.0, 1.0)).max(0.0)).sqrt() / epsilon;
    let mut order: Vec<usize> = (0..offsets.len()).collect();
    order.sort_by(|&a, &b| offsets[a].abs().total_cmp(&offsets[b].abs()));
    let mut out = vec![0.0; offsets.len()];
    // March separately over positive and negative offsets, reusing the
    // current state; H is odd only for even potentials, so both directions
    // integrate the ODE rather than mirroring.
    for dir in [1.0f64, -1.0] {
        let mut y = 0.0f64;
        let mut pos = 0.0f64;
        let step = epsilon / 128.0;
        for &idx in &order {
            let target = offsets[idx];
            if (dir > 0.0 && target < 0.0) || (dir < 0.0 && target >= 0.0) {
                continue;
            }
            let distance = (target - pos) * dir;
            let substeps = (distance / step).ceil().max(1.0) as usize;
            let h = dir * distance / substeps as f64;
            for _ in 0..substeps {
                let k1 = slope(y);
                let k2 = slope(y + 0.5 * h * k1);
                let k3 = slope(y + 0.5 * h * k2);
                let k4 = slope(y + h * k3);
                y = (y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(-1.0, 1.0);
            }
            pos = target;
            out[idx] = y;
        }
    }
    out
}

/// Smooth multi-kink initial datum: a product of heteroclinic connections,
/// one per layer, oriented so the field is near `(−1)^j` on gap `j`.
///
/// Unlike [`build_profile`] this exists for every `ε` (no minimal-gap
/// constraint) and is the natural rough initial condition for relaxation
/// experiments.
pub fn kink_superposition(h: &LayerVector, epsilon: f64, p: &Potential, n: usize) -> Vec<f64> {
    let positions = h.positions();
    let overall = if positions.len().is_multiple_of(2) { -1.0 } else { 1.0 };
    let dx = 1.0 / n as f64;
    if is_quartic(p) {
        return (0..=n)
            .map(|i| {
                let x = i as f64 * dx;
                overall
                    * positions
                        .iter()
                        .map(|&hj| ((x - hj) / (std::f64::consts::SQRT_2 * epsilon)).tanh())
                        .product::<f64>()
            })
            .collect();
    }
    let mut factors = vec![1.0; n + 1];
    for &hj in positions {
        let offsets: Vec<f64> = (0..=n).map(|i| i as f64 * dx - hj).collect();
        let values = march_heteroclinic(&offsets, epsilon, p);
        for (f, v) in factors.iter_mut().zip(values) {
            *f *= v;
        }
    }
    factors.iter_mut().for_each(|f| *f *= overall);
    factors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::validate_potential;

    #[test]
    fn smoothstep_is_monotone_and_clamped() {
        assert_eq!(smoothstep(-2.0), 0.0);
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(3.0), 1.0);
        assert!((smoothstep(0.0) - 0.5).abs() < 1e-15);
        let mut prev = -1.0;
        for k in 0..=100 {
            let v = smoothstep(-1.0 + 0.02 * k as f64);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn layer_vector_validates_ordering_and_range() {
        assert!(LayerVector::new(vec![0.3, 0.6]).is_ok());
        assert!(LayerVector::new(vec![0.6, 0.3]).is_err());
        assert!(LayerVector::new(vec![0.3, 0.3]).is_err());
        assert!(LayerVector::new(vec![-0.1, 0.5]).is_err());
        assert!(LayerVector::new(vec![0.5, 1.0]).is_err());
        assert!(LayerVector::new(vec![]).is_err());
    }

    #[test]
    fn gaps_include_reflected_boundaries() {
        let h = LayerVector::new(vec![0.3, 0.6]).unwrap();
        let gaps = h.gaps();
        assert_eq!(gaps.len(), 3);
        assert!((gaps[0] - 0.6).abs() < 1e-15);
        assert!((gaps[1] - 0.3).abs() < 1e-15);
        assert!((gaps[2] - 0.8).abs() < 1e-15);
        assert!((h.min_gap() - 0.3).abs() < 1e-15);
        assert!(h.is_admissible(0.05, 0.25));
        assert!(!h.is_admissible(0.08, 0.25));
    }

    #[test]
    fn gap_signs_alternate_starting_negative() {
        assert_eq!(LayerVector::gap_sign(1), -1.0);
        assert_eq!(LayerVector::gap_sign(2), 1.0);
        assert_eq!(LayerVector::gap_sign(3), -1.0);
    }

    #[test]
    fn quartic_heteroclinic_is_tanh() {
        let p = validate_potential(Potential::quartic()).unwrap();
        let v = heteroclinic_value(0.07, 0.05, &p);
        assert!((v - (0.07f64 / (2f64.sqrt() * 0.05)).tanh()).abs() < 1e-15);
    }

    #[test]
    fn heteroclinic_march_matches_quartic_closed_form() {
        // Force the generic march by wrapping the quartic in a custom
        // potential that the fast-path detector does not recognize
        // (scaled by 1.0 but with a perturbed detector sample far outside
        // the relevant range is brittle; instead compare via the
        // polynomial form, which is not the builtin).
        let p = validate_potential(Potential::polynomial(vec![0.25, 0.0, -0.5, 0.0, 0.25]))
            .unwrap();
        for &x in &[0.02, -0.045, 0.11] {
            let v = march_heteroclinic(&[x], 0.05, &p)[0];
            assert!(
                (v - (x / (2f64.sqrt() * 0.05)).tanh()).abs() < 1e-9,
                "march mismatch at {x}"
            );
        }
    }

    #[test]
    fn kink_superposition_has_right_plateaus() {
        let p = validate_potential(Potential::quartic()).unwrap();
        let h = LayerVector::new(vec![0.35, 0.60]).unwrap();
        let u = kink_superposition(&h, 0.03, &p, 256);
        assert_eq!(u.len(), 257);
        assert!((u[0] + 1.0).abs() < 1e-6); // gap 1: −1
        assert!((u[128] - 1.0).abs() < 0.05); // x=0.5 inside gap 2: +1 up to tail overlap
        assert!((u[256] + 1.0).abs() < 1e-6); // gap 3: −1
    }
}
