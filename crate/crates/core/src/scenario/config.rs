//! Declarative experiment description, read from TOML.
//!
//! A config may name a `preset`; the preset is loaded first and every table
//! of the user file is merged over it key by key.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{GradientConfig, LsDrem, LsDremGains};
use crate::monotone::{
    alpha_min, AlphaBounds, ExtendedMapping, IdentityMap, MappingKind, MappingSpec, ParamBox,
};
use crate::par::Exec;
use crate::systems::{
    Class2Input, ClassIISystem, ClassISystem, Controller, Excitation, GradientStagePlan, Plant,
    ReferenceGenerator, RegressorBank, ShankModel, ShankParams, SignMode, SimOptions, Simulation,
    SyntheticClassI,
};

/// Largest admissible `dt·λ`.
pub const MAX_DT_LAMBDA: f64 = 0.1;

const CLASS1_SYNTHETIC: &str = include_str!("presets/class1_synthetic.toml");
const SHANK: &str = include_str!("presets/shank.toml");

pub fn preset_names() -> &'static [&'static str] {
    &["class1_synthetic", "shank"]
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    match name {
        "class1_synthetic" => Ok(CLASS1_SYNTHETIC),
        "shank" => Ok(SHANK),
        other => Err(Error::config(
            "preset",
            format!("unknown preset `{other}`, expected one of {:?}", preset_names()),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Class1Synthetic,
    Shank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truth {
    pub theta: Vec<f64>,
    #[serde(default = "default_h3_floor")]
    pub h3_floor: f64,
}

fn default_h3_floor() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShankSection {
    pub j: f64,
    pub b1: f64,
    pub b2: f64,
    pub k1: f64,
    pub k2: f64,
    pub mgl: f64,
    pub q0: f64,
    #[serde(default = "default_h3_floor")]
    pub h3_floor: f64,
    #[serde(default)]
    pub sign: SignMode,
}

impl ShankSection {
    pub fn params(&self) -> ShankParams {
        ShankParams {
            j: self.j,
            b1: self.b1,
            b2: self.b2,
            k1: self.k1,
            k2: self.k2,
            mgl: self.mgl,
            q0: self.q0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    /// Plant state (`x` for Class I, `[x, ẋ]` for Class II).
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Shank only: start at the unforced rest angle with the reference
    /// generator at the same point.
    #[serde(default)]
    pub start_at_rest: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Filters {
    pub lambda: f64,
    /// Start of the residual check window; defaults to `5/λ + 0.1` for
    /// Class I and `10/λ` for Class II.
    #[serde(default)]
    pub residual_from: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    pub gamma_w: f64,
    pub f0: f64,
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub switch_on: f64,
    /// Transient gate; defaults to `5/λ`.
    #[serde(default)]
    pub gate: Option<f64>,
    #[serde(default)]
    pub w0: Option<Vec<f64>>,
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSection {
    /// Class I only.
    #[serde(default)]
    pub sign_theta1: Option<f64>,
    /// Class I only; `None` selects `2α_m` over `bounds`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Rows of `T_G`; defaults to `(ρ_G/2)I`.
    #[serde(default)]
    pub t_g: Option<Vec<Vec<f64>>>,
    pub rho_g: f64,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientSection {
    pub gamma: f64,
    pub lambda: f64,
    #[serde(default)]
    pub k0: f64,
    pub freeze_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_record_dt")]
    pub record_dt: f64,
}

fn default_record_dt() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IeSection {
    pub threshold: f64,
}

impl Default for IeSection {
    fn default() -> Self {
        IeSection { threshold: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    /// Also write `Ŵ`-level regressor columns.
    #[serde(default)]
    pub verbose: bool,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
            verbose: false,
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelName,
    #[serde(default)]
    pub truth: Option<Truth>,
    #[serde(default)]
    pub shank: Option<ShankSection>,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub excitation: Option<Excitation>,
    #[serde(default)]
    pub controller: Option<Controller>,
    #[serde(default)]
    pub reference: Option<ReferenceGenerator>,
    pub filters: Filters,
    pub estimator: EstimatorSection,
    pub mapping: MappingSection,
    #[serde(default)]
    pub gradient: Option<GradientSection>,
    pub integrator: Integrator,
    #[serde(default)]
    pub ie: IeSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Recursively merges `over` into `base`; tables merge, everything else is
/// replaced.
pub fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn parse_value(src: &str) -> Result<toml::Value> {
    src.parse::<toml::Table>()
        .map(toml::Value::Table)
        .map_err(|e| Error::Toml(e.to_string()))
}

/// Sets a dotted path (`estimator.gamma_w`) to `value`, creating tables as
/// needed. The value is parsed as a TOML literal, falling back to a string.
pub fn set_path(root: &mut toml::Value, path: &str, value: &str) -> Result<()> {
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(path, "empty path segment"));
    }
    for (i, part) in parts.iter().enumerate() {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| Error::config(path, "path crosses a non-table value"))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        cur = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    Ok(())
}

impl ScenarioConfig {
    /// Resolves the preset (if any) and merges the source over it.
    pub fn merged_value(src: &str) -> Result<toml::Value> {
        let user = parse_value(src)?;
        let preset = user.get("preset").and_then(|v| v.as_str()).map(str::to_owned);
        let mut value = match preset {
            Some(p) => parse_value(preset_source(&p)?)?,
            None => toml::Value::Table(Default::default()),
        };
        merge(&mut value, user);
        Ok(value)
    }

    pub fn from_value(value: toml::Value) -> Result<Self> {
        let cfg: ScenarioConfig = value.try_into().map_err(|e: toml::de::Error| Error::Toml(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        Self::from_value(Self::merged_value(src)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&src)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml_str(&format!("preset = \"{name}\""))
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| match self.model {
            ModelName::Class1Synthetic => "class1_synthetic".into(),
            ModelName::Shank => "shank".into(),
        })
    }

    pub fn gate(&self) -> f64 {
        self.estimator.gate.unwrap_or(5.0 / self.filters.lambda)
    }

    pub fn residual_from(&self) -> f64 {
        self.filters.residual_from.unwrap_or(match self.model {
            ModelName::Class1Synthetic => 5.0 / self.filters.lambda + 0.1,
            ModelName::Shank => 10.0 / self.filters.lambda,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |field: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        };
        pos("integrator.dt", self.integrator.dt)?;
        pos("integrator.t_end", self.integrator.t_end)?;
        pos("filters.lambda", self.filters.lambda)?;
        pos("estimator.gamma_w", self.estimator.gamma_w)?;
        pos("estimator.f0", self.estimator.f0)?;
        pos("mapping.rho_g", self.mapping.rho_g)?;
        pos("ie.threshold", self.ie.threshold)?;
        if self.integrator.record_dt < 0.0 {
            return Err(Error::config("integrator.record_dt", "must be nonnegative"));
        }
        for (i, g) in self.estimator.gamma.iter().enumerate() {
            pos(&format!("estimator.gamma[{i}]"), *g)?;
        }
        let mut lambda_max = self.filters.lambda;
        if let Some(g) = &self.gradient {
            pos("gradient.gamma", g.gamma)?;
            pos("gradient.lambda", g.lambda)?;
            lambda_max = lambda_max.max(g.lambda);
            if !(g.freeze_at >= 0.0 && g.freeze_at < self.integrator.t_end) {
                return Err(Error::config("gradient.freeze_at", "must lie inside the horizon"));
            }
        }
        if self.integrator.dt * lambda_max > MAX_DT_LAMBDA {
            return Err(Error::config(
                "integrator.dt",
                format!(
                    "dt*lambda = {} exceeds {MAX_DT_LAMBDA}",
                    self.integrator.dt * lambda_max
                ),
            ));
        }
        if self.estimator.enabled && !(self.integrator.t_end > self.estimator.switch_on) {
            return Err(Error::config(
                "integrator.t_end",
                "horizon must exceed the estimator switch-on time",
            ));
        }
        if self.estimator.switch_on < 0.0 {
            return Err(Error::config("estimator.switch_on", "must be nonnegative"));
        }
        match self.model {
            ModelName::Class1Synthetic => {
                let truth = self
                    .truth
                    .as_ref()
                    .ok_or_else(|| Error::config("truth", "required for class1_synthetic"))?;
                if truth.theta.len() != 3 {
                    return Err(Error::config("truth.theta", "expected (theta1, theta2, theta3)"));
                }
                if self.excitation.is_none() {
                    return Err(Error::config("excitation", "required for class1_synthetic"));
                }
                if self.mapping.sign_theta1.is_none() {
                    return Err(Error::config("mapping.sign_theta1", "required for class I"));
                }
            }
            ModelName::Shank => {
                let sh = self
                    .shank
                    .as_ref()
                    .ok_or_else(|| Error::config("shank", "required for the shank model"))?;
                sh.params().validate()?;
                if self.controller.is_none() && self.excitation.is_none() {
                    return Err(Error::config(
                        "controller",
                        "shank needs a controller+reference or an open-loop excitation",
                    ));
                }
                if let Some(c) = &self.controller {
                    c.validate()?;
                    self.reference
                        .as_ref()
                        .ok_or_else(|| Error::config("reference", "required with a controller"))?
                        .validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn mapping_kind(&self) -> MappingKind {
        match self.model {
            ModelName::Class1Synthetic => MappingKind::ClassI,
            ModelName::Shank => MappingKind::ClassII,
        }
    }

    pub fn theta_true(&self) -> Vec<f64> {
        match self.model {
            ModelName::Class1Synthetic => self.truth.as_ref().map(|t| t.theta.clone()).unwrap_or_default(),
            ModelName::Shank => self.shank.as_ref().map(|s| s.params().theta()).unwrap_or_default(),
        }
    }

    pub fn mapping_spec(&self) -> Result<MappingSpec> {
        let (n, p) = match self.model {
            ModelName::Class1Synthetic => (1, 1),
            ModelName::Shank => (3, 3),
        };
        let t_g = match &self.mapping.t_g {
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != p) {
                    return Err(Error::config("mapping.t_g", format!("expected {n}x{p}")));
                }
                DMatrix::from_row_iterator(n, p, rows.iter().flatten().cloned())
            }
            None => DMatrix::identity(n, p) * (0.5 * self.mapping.rho_g),
        };
        MappingSpec::new(self.mapping_kind(), Arc::new(IdentityMap(n)), t_g, self.mapping.rho_g)
    }

    pub fn param_box(&self) -> Result<Option<ParamBox>> {
        match &self.mapping.bounds {
            Some(b) => Ok(Some(ParamBox::new(b.lo.clone(), b.hi.clone())?)),
            None => Ok(None),
        }
    }

    /// `α` as configured, or `2α_m` over the declared bounds.
    pub fn resolved_alpha(&self, spec: &MappingSpec) -> Result<Option<f64>> {
        if spec.kind != MappingKind::ClassI {
            return Ok(None);
        }
        if let Some(a) = self.mapping.alpha {
            if !(a > 0.0) {
                return Err(Error::config("mapping.alpha", "must be positive"));
            }
            return Ok(Some(a));
        }
        let b = self
            .param_box()?
            .ok_or_else(|| Error::config("mapping.bounds", "needed to select alpha automatically"))?;
        let ab = AlphaBounds::from_box(spec, &b, Exec::default())?;
        let am = alpha_min(spec, ab)?;
        Ok(Some(if am > 0.0 { 2.0 * am } else { 1.0 }))
    }

    pub fn extended_mapping(&self) -> Result<ExtendedMapping> {
        let spec = self.mapping_spec()?;
        Ok(match spec.kind {
            MappingKind::ClassI => {
                let alpha = self.resolved_alpha(&spec)?.unwrap_or(1.0);
                let sign = self
                    .mapping
                    .sign_theta1
                    .ok_or_else(|| Error::config("mapping.sign_theta1", "required for class I"))?;
                ExtendedMapping::class1(spec, alpha, sign)
            }
            MappingKind::ClassII => ExtendedMapping::class2(spec),
        })
    }

    fn plant(&self) -> Result<Plant> {
        match self.model {
            ModelName::Class1Synthetic => {
                let truth = self.truth.as_ref().expect("validated");
                let sys = ClassISystem::new(
                    Arc::new(SyntheticClassI),
                    Arc::new(IdentityMap(1)),
                    truth.theta.clone(),
                    truth.h3_floor,
                )?;
                let x0 = self.initial.x0.clone().unwrap_or_else(|| vec![1.0]);
                if x0.len() != 1 {
                    return Err(Error::config("initial.x0", "expected one entry"));
                }
                Ok(Plant::ClassI {
                    sys,
                    input: self.excitation.clone().expect("validated"),
                    x0,
                })
            }
            ModelName::Shank => {
                let sh = self.shank.as_ref().expect("validated");
                let p = sh.params();
                let sys = ClassIISystem::new(
                    Arc::new(ShankModel { q0: p.q0, sign: sh.sign }),
                    Arc::new(IdentityMap(3)),
                    p.theta(),
                    p.theta2(),
                    sh.h3_floor,
                )?;
                let x0: [f64; 2] = if self.initial.start_at_rest {
                    [p.rest_angle()?, 0.0]
                } else {
                    match self.initial.x0.as_deref() {
                        Some([a, b]) => [*a, *b],
                        Some(_) => return Err(Error::config("initial.x0", "expected [x, xdot]")),
                        None => [p.rest_angle()?, 0.0],
                    }
                };
                let scale = 1.0 / p.j;
                let input = match (&self.controller, &self.reference) {
                    (Some(c), Some(r)) => Class2Input::Tracking {
                        controller: *c,
                        reference: r.clone(),
                        x1_0: [x0[0], 0.0, 0.0],
                        scale,
                    },
                    _ => Class2Input::Open {
                        excitation: self.excitation.clone().expect("validated"),
                        scale,
                    },
                };
                Ok(Plant::ClassII { sys, input, x0 })
            }
        }
    }

    /// Builds the simulation. `with_estimator = false` drops the estimator
    /// (residual-only runs).
    pub fn build(&self, with_estimator: bool) -> Result<Simulation> {
        let plant = self.plant()?;
        let regressor = RegressorBank::for_plant(&plant, self.filters.lambda)?;
        let mapping = self.extended_mapping()?;
        let w_true = mapping.eval_w(plant.theta_true())?;
        let estimator = if with_estimator && self.estimator.enabled {
            let e = &self.estimator;
            let gains = LsDremGains {
                gamma_w: e.gamma_w,
                f0: e.f0,
                gamma: e.gamma.clone(),
            };
            let w0 = e.w0.clone().unwrap_or_else(|| vec![0.0; mapping.s()]);
            let theta0 = e.theta0.clone().unwrap_or_else(|| vec![0.0; mapping.ell()]);
            Some(LsDrem::new(Arc::new(mapping), gains, w0, theta0)?)
        } else {
            None
        };
        let gradient = match (&self.gradient, &estimator) {
            (Some(g), Some(_)) => Some(GradientStagePlan {
                cfg: GradientConfig {
                    gamma: g.gamma,
                    lambda: g.lambda,
                    k0: g.k0,
                    stall_eps: 1e-9,
                    stall_window: 1.0,
                },
                freeze_at: g.freeze_at,
            }),
            _ => None,
        };
        let sim = Simulation {
            plant,
            regressor,
            estimator,
            gradient,
            w_true: Some(DVector::from(w_true)),
            opts: SimOptions {
                dt: self.integrator.dt,
                t_end: self.integrator.t_end,
                record_dt: self.integrator.record_dt,
                switch_on: self.estimator.switch_on,
                gate: self.gate(),
                ie_threshold: self.ie.threshold,
                residual_from: self.residual_from(),
            },
        };
        sim.validate()?;
        Ok(sim)
    }
}
