//! JSON run configuration: schema, defaults, and cross-field validation.
//!
//! A run is described by a single JSON object. Only `model`, `epsilon`,
//! layer data, and `t_end` are ever required, and only by the operations
//! that need them; everything else has a default:
//!
//! ```json
//! {
//!   "model": "mac",
//!   "epsilon": 0.06,
//!   "layers": [0.35, 0.60],
//!   "t_end": 50.0
//! }
//! ```
//!
//! Unknown keys are rejected, all cross-field invariants are checked at
//! parse time, and every error names the offending key. [`emit_config`] and
//! [`parse_config`] round-trip.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::SweepMethod;
use crate::layer_ode::OdeModel;
use crate::pde::ModelKind;
use crate::potential::{validate_potential, Damping, Potential};
use crate::profile::{solve_mass_constraint, AlphaMode, LayerVector};

/// Grid cells when the config does not say.
pub const DEFAULT_N: usize = 512;
/// ODE integrator relative tolerance when the config does not say.
pub const DEFAULT_RTOL: f64 = 1e-9;
/// Collision parameter (threshold `ε/ρ`) when the config does not say.
pub const DEFAULT_RHO: f64 = 0.25;
/// Records per run when no cadence is given: `record_dt = t_end / 500`.
pub const DEFAULT_RECORDS: f64 = 500.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// The document is not valid JSON for the schema (unknown key, wrong
    /// type, malformed syntax). The message names the offending key.
    #[error("config schema: {detail}")]
    Schema { detail: String },
    /// The document parses but violates a cross-field invariant.
    #[error("config key `{key}`: {reason}")]
    Consistency { key: &'static str, reason: String },
}

fn inconsistent(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Consistency {
        key,
        reason: reason.into(),
    }
}

/// Evolution model named in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Ac,
    Mac,
    HypAc,
    HypMac,
    /// Three-layer comparison system (layer ODEs only; no field equation).
    ChN3,
}

impl ModelName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Ac => "ac",
            ModelName::Mac => "mac",
            ModelName::HypAc => "hyp-ac",
            ModelName::HypMac => "hyp-mac",
            ModelName::ChN3 => "ch-n3",
        }
    }

    pub fn is_hyperbolic(self) -> bool {
        matches!(self, ModelName::HypAc | ModelName::HypMac)
    }
}

/// Potential specification: a named built-in or ascending polynomial
/// coefficients (`coeffs[k]` multiplies `u^k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Named(PotentialName),
    Polynomial(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialName {
    Quartic,
}

impl Default for PotentialSpec {
    fn default() -> PotentialSpec {
        PotentialSpec::Named(PotentialName::Quartic)
    }
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential, ConfigError> {
        match self {
            PotentialSpec::Named(PotentialName::Quartic) => Ok(Potential::quartic()),
            PotentialSpec::Polynomial(coeffs) => {
                validate_potential(Potential::polynomial(coeffs.clone()))
                    .map_err(|e| inconsistent("potential", e.to_string()))
            }
        }
    }
}

/// Damping specification: `"one"`, `{"constant": c}`, or
/// `{"relaxation": k}` for `g(u) = 1 − k·f′(u)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingSpec {
    #[default]
    One,
    Constant(f64),
    Relaxation(f64),
}

impl DampingSpec {
    pub fn build(&self, potential: &Potential) -> Result<Damping, ConfigError> {
        match self {
            DampingSpec::One => Ok(Damping::one()),
            DampingSpec::Constant(c) => {
                Damping::constant(*c).map_err(|e| inconsistent("damping", e.to_string()))
            }
            DampingSpec::Relaxation(k) => Damping::relaxation(*k, potential)
                .map_err(|e| inconsistent("damping", e.to_string())),
        }
    }
}

/// Initial layer-velocity policy for hyperbolic models: a name or explicit
/// per-layer values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VelocityPolicy {
    Named(VelocityName),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityName {
    /// Launch at rest (the field-simulation default).
    Zero,
    /// Slave the initial velocities to the reduced flow (layer ODEs only).
    QuasiStationary,
}

/// How `α(l)` is evaluated inside ODE right-hand sides and barrier values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaModeName {
    #[default]
    Asymptotic,
    Exact,
}

impl From<AlphaModeName> for AlphaMode {
    fn from(name: AlphaModeName) -> AlphaMode {
        match name {
            AlphaModeName::Asymptotic => AlphaMode::Asymptotic,
            AlphaModeName::Exact => AlphaMode::Exact,
        }
    }
}

/// Sweep speed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMethodName {
    Ode,
    Pde,
}

impl From<SweepMethodName> for SweepMethod {
    fn from(name: SweepMethodName) -> SweepMethod {
        match name {
            SweepMethodName::Ode => SweepMethod::Ode,
            SweepMethodName::Pde => SweepMethod::Pde,
        }
    }
}

fn default_n() -> usize {
    DEFAULT_N
}

fn default_rtol() -> f64 {
    DEFAULT_RTOL
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

/// A fully parsed run configuration.
///
/// Which fields are required depends on the operation: `constants` needs
/// only the potential and damping; simulations and layer integrations need
/// `model`, `epsilon`, layer data, and `t_end`; sweeps need their parameter
/// list (`epsilons`, `taus`, or `ratios`). The accessor methods perform
/// those per-operation checks and name the missing key.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelName>,
    pub potential: PotentialSpec,
    pub damping: DampingSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Relaxation time; required positive by the hyperbolic models.
    #[serde(skip_serializing_if = "is_zero")]
    pub tau: f64,
    /// Initial layer positions, strictly increasing in (0, 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<f64>>,
    /// First `N` layer positions; the last is solved from `mass`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    /// Target profile mass for the `xi` form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Initial layer velocities (hyperbolic layer ODEs only). Default:
    /// quasi-stationary for layer integrations; field simulations always
    /// launch at rest.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hdot0: Option<VelocityPolicy>,
    /// Grid cells for field simulations and profile construction.
    #[serde(default = "default_n", skip_serializing_if = "is_default_n")]
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Output cadence; defaults to `t_end / 500`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_dt: Option<f64>,
    /// ODE integrator relative tolerance.
    #[serde(default = "default_rtol", skip_serializing_if = "is_default_rtol")]
    pub rtol: f64,
    /// Collision parameter: runs stop when a gap reaches `epsilon / rho`.
    #[serde(default = "default_rho", skip_serializing_if = "is_default_rho")]
    pub rho: f64,
    #[serde(skip_serializing_if = "is_default_alpha")]
    pub alpha_mode: AlphaModeName,
    /// Epsilon list for the metastability sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Relaxation-time list for the vanishing-inertia study.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    /// Ratio list `r = ε/ℓ` for the asymptotics sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// Speed source for the metastability sweep (default `"ode"`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<SweepMethodName>,
    /// Gap branch sign for the asymptotics sweep (default `1`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<f64>,
    /// Output-path overrides, resolved relative to `--out-dir`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_path: Option<String>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn is_default_n(n: &usize) -> bool {
    *n == DEFAULT_N
}

fn is_default_rtol(x: &f64) -> bool {
    *x == DEFAULT_RTOL
}

fn is_default_rho(x: &f64) -> bool {
    *x == DEFAULT_RHO
}

fn is_default_alpha(mode: &AlphaModeName) -> bool {
    *mode == AlphaModeName::default()
}

/// Parse and validate a JSON config document.
pub fn parse_config(document: &str) -> Result<RunConfig, ConfigError> {
    let mut deserializer = serde_json::Deserializer::from_str(document);
    let config: RunConfig = serde_path_to_error::deserialize(&mut deserializer)
        .map_err(|e| ConfigError::Schema {
            detail: e.to_string(),
        })?;
    config.validate()?;
    Ok(config)
}

/// Serialize a config back to pretty JSON. `parse_config(emit_config(c))`
/// reproduces `c`.
pub fn emit_config(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

fn all_finite(key: &'static str, values: &[f64]) -> Result<(), ConfigError> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(inconsistent(key, format!("value {v} is not finite"))),
        None => Ok(()),
    }
}

fn finite_positive(key: &'static str, value: f64) -> Result<(), ConfigError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(inconsistent(key, format!("must be finite and positive, got {value}")));
    }
    Ok(())
}

impl RunConfig {
    /// Cross-field invariants, checked over whatever fields are present.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(eps) = self.epsilon {
            finite_positive("epsilon", eps)?;
        }
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(inconsistent(
                "tau",
                format!("must be finite and non-negative, got {}", self.tau),
            ));
        }
        if let Some(t_end) = self.t_end {
            finite_positive("t_end", t_end)?;
        }
        if let Some(dt) = self.record_dt {
            finite_positive("record_dt", dt)?;
        }
        finite_positive("rtol", self.rtol)?;
        finite_positive("rho", self.rho)?;
        if self.rho > 1.0 {
            return Err(inconsistent(
                "rho",
                format!("collision parameter must lie in (0, 1], got {}", self.rho),
            ));
        }
        if let Some(mass) = self.mass {
            if !mass.is_finite() {
                return Err(inconsistent("mass", format!("value {mass} is not finite")));
            }
        }
        if let Some(sign) = self.sign {
            if sign != 1.0 && sign != -1.0 {
                return Err(inconsistent("sign", format!("must be 1 or -1, got {sign}")));
            }
        }
        for (key, list) in [
            ("layers", &self.layers),
            ("xi", &self.xi),
            ("epsilons", &self.epsilons),
            ("taus", &self.taus),
            ("ratios", &self.ratios),
        ] {
            if let Some(values) = list {
                all_finite(key, values)?;
            }
        }
        if let Some(eps) = &self.epsilons {
            if eps.iter().any(|&e| e <= 0.0) {
                return Err(inconsistent("epsilons", "every epsilon must be positive"));
            }
        }
        if let Some(ratios) = &self.ratios {
            let bound = crate::experiments::MAX_RATIO;
            if let Some(&r) = ratios.iter().find(|&&r| !(r > 0.0 && r < bound)) {
                return Err(inconsistent(
                    "ratios",
                    format!("ratio {r} is outside the asymptotic range (0, {bound})"),
                ));
            }
        }
        if let Some(VelocityPolicy::Explicit(values)) = &self.hdot0 {
            all_finite("hdot0", values)?;
        }

        let model = self.model;
        if model.is_some_and(ModelName::is_hyperbolic) && self.tau == 0.0 {
            return Err(inconsistent(
                "tau",
                format!(
                    "model `{}` is hyperbolic and needs tau > 0",
                    model.unwrap().as_str()
                ),
            ));
        }
        if model == Some(ModelName::ChN3) {
            if let Some(layers) = &self.layers {
                if layers.len() != 3 {
                    return Err(inconsistent(
                        "layers",
                        format!("model `ch-n3` needs exactly 3 layers, got {}", layers.len()),
                    ));
                }
            }
            if let Some(xi) = &self.xi {
                if xi.len() != 2 {
                    return Err(inconsistent(
                        "xi",
                        format!(
                            "model `ch-n3` needs exactly 3 layers, so `xi` must list 2, got {}",
                            xi.len()
                        ),
                    ));
                }
            }
        }
        if model.is_some_and(|m| !m.is_hyperbolic()) {
            match &self.hdot0 {
                None | Some(VelocityPolicy::Named(VelocityName::Zero)) => {}
                Some(_) => {
                    return Err(inconsistent(
                        "hdot0",
                        "first-order models carry no layer velocities",
                    ));
                }
            }
        }

        if self.layers.is_some() && (self.xi.is_some() || self.mass.is_some()) {
            return Err(inconsistent(
                "layers",
                "give either `layers` or the pair `xi` + `mass`, not both",
            ));
        }
        if self.xi.is_some() != self.mass.is_some() {
            let key = if self.xi.is_some() { "mass" } else { "xi" };
            return Err(inconsistent(key, "`xi` and `mass` must be given together"));
        }

        if let Some(layers) = &self.layers {
            let vector = LayerVector::new(layers.clone())
                .map_err(|e| inconsistent("layers", e.to_string()))?;
            // Admissibility is judged at the largest epsilon in play.
            let largest = self
                .epsilon
                .into_iter()
                .chain(self.epsilons.iter().flatten().copied())
                .fold(None::<f64>, |acc, e| Some(acc.map_or(e, |a| a.max(e))));
            if let Some(eps) = largest {
                if !vector.is_admissible(eps, self.rho) {
                    return Err(inconsistent(
                        "layers",
                        format!(
                            "minimal gap {:.4} is below the collision threshold {:.4} \
                             (epsilon {} / rho {})",
                            vector.min_gap(),
                            eps / self.rho,
                            eps,
                            self.rho
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ModelName, ConfigError> {
        self.model
            .ok_or_else(|| inconsistent("model", "required by this operation"))
    }

    pub fn epsilon(&self) -> Result<f64, ConfigError> {
        self.epsilon
            .ok_or_else(|| inconsistent("epsilon", "required by this operation"))
    }

    pub fn t_end(&self) -> Result<f64, ConfigError> {
        self.t_end
            .ok_or_else(|| inconsistent("t_end", "required by this operation"))
    }

    /// Output cadence, defaulting to `t_end / 500`.
    pub fn record_dt(&self) -> Result<f64, ConfigError> {
        match self.record_dt {
            Some(dt) => Ok(dt),
            None => Ok(self.t_end()? / DEFAULT_RECORDS),
        }
    }

    /// The field-equation model, rejecting the ODE-only `ch-n3`.
    pub fn pde_model(&self) -> Result<ModelKind, ConfigError> {
        match self.model()? {
            ModelName::Ac => Ok(ModelKind::Ac),
            ModelName::Mac => Ok(ModelKind::Mac),
            ModelName::HypAc => Ok(ModelKind::HypAc),
            ModelName::HypMac => Ok(ModelKind::HypMac),
            ModelName::ChN3 => Err(inconsistent(
                "model",
                "`ch-n3` is a layer-ODE model with no field equation",
            )),
        }
    }

    pub fn ode_model(&self) -> Result<OdeModel, ConfigError> {
        Ok(match self.model()? {
            ModelName::Ac => OdeModel::Ac,
            ModelName::Mac => OdeModel::Mac,
            ModelName::HypAc => OdeModel::HypAc,
            ModelName::HypMac => OdeModel::HypMac,
            ModelName::ChN3 => OdeModel::ChN3,
        })
    }

    /// Initial layer positions: the `layers` list, or the mass-constrained
    /// solve from `xi` + `mass`.
    pub fn initial_layers(&self, potential: &Potential) -> Result<LayerVector, ConfigError> {
        if let Some(layers) = &self.layers {
            return LayerVector::new(layers.clone())
                .map_err(|e| inconsistent("layers", e.to_string()));
        }
        match (&self.xi, self.mass) {
            (Some(xi), Some(mass)) => {
                solve_mass_constraint(xi, mass, self.epsilon()?, potential, self.n)
                    .map_err(|e| inconsistent("mass", e.to_string()))
            }
            _ => Err(inconsistent(
                "layers",
                "give `layers` or the pair `xi` + `mass`",
            )),
        }
    }

    /// Initial layer velocities for the ODE integrator: `None` delegates to
    /// the quasi-stationary slaving. First-order models always get `None`.
    pub fn ode_hdot0(&self, layer_count: usize) -> Result<Option<Vec<f64>>, ConfigError> {
        let hyperbolic = self.model.is_some_and(ModelName::is_hyperbolic);
        if !hyperbolic {
            return Ok(None);
        }
        match &self.hdot0 {
            None | Some(VelocityPolicy::Named(VelocityName::QuasiStationary)) => Ok(None),
            Some(VelocityPolicy::Named(VelocityName::Zero)) => Ok(Some(vec![0.0; layer_count])),
            Some(VelocityPolicy::Explicit(values)) => {
                if values.len() != layer_count {
                    return Err(inconsistent(
                        "hdot0",
                        format!("{} velocities for {} layers", values.len(), layer_count),
                    ));
                }
                Ok(Some(values.clone()))
            }
        }
    }

    /// Field simulations launch at rest; any other request is an error.
    pub fn require_rest_start(&self) -> Result<(), ConfigError> {
        match &self.hdot0 {
            None | Some(VelocityPolicy::Named(VelocityName::Zero)) => Ok(()),
            Some(_) => Err(inconsistent(
                "hdot0",
                "field simulations launch at rest; only \"zero\" is accepted",
            )),
        }
    }
}
