//! Run configuration (TOML, or the `config` object of an emitted JSON report).

use crate::expr::{parse_expression, to_field, ExprError};
use confprop::{make_pair, Alpha, Family, KappaPair, ScalarField};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("in {field}: {source}")]
    Expr { field: String, source: ExprError },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Ivp,
    Bvp,
    Green,
    Cauchy,
    Riccati,
    Lyapunov,
    Disconjugacy,
    Roundabout,
    Flw,
    Audit,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Ivp => "ivp",
            Task::Bvp => "bvp",
            Task::Green => "green",
            Task::Cauchy => "cauchy",
            Task::Riccati => "riccati",
            Task::Lyapunov => "lyapunov",
            Task::Disconjugacy => "disconjugacy",
            Task::Roundabout => "roundabout",
            Task::Flw => "flw",
            Task::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaCfg {
    pub family: String,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

/// Either p, q, h (self-adjoint form) or a, b, c, g (general form).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
}

/// An interval end: a number or a constant expression such as "pi/sqrt(2)".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Value(f64),
    Expr(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IvpCfg {
    pub t0: f64,
    pub x0: f64,
    pub x1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvpKindCfg {
    General,
    Conjugate,
    Focal,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpCfg {
    pub kind: BvpKindCfg,
    #[serde(default)]
    pub xi: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub a_value: f64,
    #[serde(default)]
    pub b_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Phipsi,
    Cauchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenCfg {
    #[serde(default = "default_construction")]
    pub construction: Construction,
}

fn default_construction() -> Construction {
    Construction::Cauchy
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyCfg {
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionCfg {
    ReidV,
    ReidVi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisconjugacyCfg {
    pub criterion: CriterionCfg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlwCfg {
    pub a: f64,
    pub ladder: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// maximum ODE step and output spacing
    #[serde(default = "d_step")]
    pub step: f64,
    /// nodes per axis of sampled kernels
    #[serde(default = "d_grid")]
    pub grid: usize,
    #[serde(default = "d_abs")]
    pub abs_tol: f64,
    #[serde(default = "d_rel")]
    pub rel_tol: f64,
    #[serde(default = "d_depth")]
    pub max_depth: u32,
    /// pass/fail threshold for residual checks
    #[serde(default = "d_check")]
    pub check_tol: f64,
}

fn d_step() -> f64 {
    0.01
}
fn d_grid() -> usize {
    129
}
fn d_abs() -> f64 {
    1e-10
}
fn d_rel() -> f64 {
    1e-8
}
fn d_depth() -> u32 {
    40
}
fn d_check() -> f64 {
    1e-4
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { step: d_step(), grid: d_grid(), abs_tol: d_abs(), rel_tol: d_rel(), max_depth: d_depth(), check_tol: d_check() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "d_csv")]
    pub csv: String,
    #[serde(default = "d_json")]
    pub json: String,
}

fn d_csv() -> String {
    "trajectory.csv".into()
}
fn d_json() -> String {
    "report.json".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { csv: d_csv(), json: d_json() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: Task,
    pub kappa: KappaCfg,
    pub coefficients: Coefficients,
    pub interval: [Bound; 2],
    /// closed-form solution to compare against
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ivp: Option<IvpCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bvp: Option<BvpCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green: Option<GreenCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy: Option<CauchyCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disconjugacy: Option<DisconjugacyCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flw: Option<FlwCfg>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Load a TOML config, or the embedded config of a JSON report.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), source: e })?;
    let cfg = if path.extension().and_then(|e| e.to_str()) == Some("json") {
        #[derive(Deserialize)]
        struct Embedded {
            config: RunConfig,
        }
        serde_json::from_str::<Embedded>(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?.config
    } else {
        toml::from_str::<RunConfig>(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?
    };
    Ok(cfg)
}

fn field(text: &str, name: &str) -> Result<ScalarField, ConfigError> {
    let e = parse_expression(text).map_err(|source| ConfigError::Expr { field: name.into(), source })?;
    Ok(to_field(&e, text))
}

fn constant(b: &Bound, name: &str) -> Result<f64, ConfigError> {
    match b {
        Bound::Value(v) => Ok(*v),
        Bound::Expr(s) => {
            let e = parse_expression(s).map_err(|source| ConfigError::Expr { field: name.into(), source })?;
            if !e.is_constant() {
                return Err(ConfigError::Invalid(format!("{name} must not depend on t")));
            }
            Ok(e.eval(0.0))
        }
    }
}

/// Coefficients resolved against the pair.
pub enum Resolved {
    SelfAdjoint { p: ScalarField, q: ScalarField, h: ScalarField },
    General { a: ScalarField, b: ScalarField, c: ScalarField, g: ScalarField },
}

impl RunConfig {
    pub fn pair(&self) -> Result<KappaPair, ConfigError> {
        let family = match self.kappa.family.as_str() {
            "trig" => Family::Trig,
            "power" => Family::Power,
            "time_power" => Family::TimePower,
            other => return Err(ConfigError::Invalid(format!("unknown family `{other}`"))),
        };
        let alpha = Alpha::new(self.kappa.alpha).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        make_pair(family, alpha, self.kappa.omega).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn interval(&self) -> Result<(f64, f64), ConfigError> {
        let lo = constant(&self.interval[0], "interval[0]")?;
        let hi = constant(&self.interval[1], "interval[1]")?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ConfigError::Invalid(format!("interval [{lo}, {hi}] is empty or not finite")));
        }
        Ok((lo, hi))
    }

    pub fn coefficients(&self) -> Result<Resolved, ConfigError> {
        let c = &self.coefficients;
        let sa = c.p.is_some() || c.q.is_some() || c.h.is_some();
        let gen = c.a.is_some() || c.b.is_some() || c.c.is_some() || c.g.is_some();
        let get = |o: &Option<String>, name: &str, dflt: &str| field(o.as_deref().unwrap_or(dflt), name);
        match (sa, gen) {
            (true, true) => Err(ConfigError::Invalid("give either p, q, h or a, b, c, g, not both".into())),
            (_, false) => Ok(Resolved::SelfAdjoint {
                p: get(&c.p, "coefficients.p", "1")?,
                q: get(&c.q, "coefficients.q", "0")?,
                h: get(&c.h, "coefficients.h", "0")?,
            }),
            (false, true) => Ok(Resolved::General {
                a: get(&c.a, "coefficients.a", "1")?,
                b: get(&c.b, "coefficients.b", "0")?,
                c: get(&c.c, "coefficients.c", "0")?,
                g: get(&c.g, "coefficients.g", "0")?,
            }),
        }
    }

    pub fn expected(&self) -> Result<Option<ScalarField>, ConfigError> {
        self.expected.as_deref().map(|s| field(s, "expected")).transpose()
    }

    /// Structural checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let pair = self.pair()?;
        let (lo, hi) = self.interval()?;
        let (dlo, dhi) = pair.domain();
        if lo < dlo || hi > dhi || (lo == dlo && !dlo.is_finite()) {
            return Err(ConfigError::Invalid(format!("interval [{lo}, {hi}] is not inside the domain ({dlo}, {dhi})")));
        }
        let n = &self.numerics;
        if !(n.step > 0.0 && n.abs_tol > 0.0 && n.rel_tol > 0.0 && n.check_tol > 0.0 && n.max_depth > 0 && n.grid >= 5) {
            return Err(ConfigError::Invalid("numerics: step and tolerances must be positive, grid ≥ 5".into()));
        }
        let missing = |what: &str| ConfigError::Invalid(format!("task {} needs a [{what}] table", self.task.name()));
        match self.task {
            Task::Ivp | Task::Riccati if self.ivp.is_none() => return Err(missing("ivp")),
            Task::Bvp | Task::Green if self.bvp.is_none() => return Err(missing("bvp")),
            Task::Cauchy if self.cauchy.is_none() => return Err(missing("cauchy")),
            Task::Disconjugacy if self.disconjugacy.is_none() => return Err(missing("disconjugacy")),
            Task::Flw if self.flw.is_none() => return Err(missing("flw")),
            _ => {}
        }
        if let Some(ivp) = &self.ivp {
            if !(ivp.t0 >= lo && ivp.t0 <= hi) {
                return Err(ConfigError::Invalid(format!("ivp.t0 = {} lies outside the interval", ivp.t0)));
            }
        }
        if let Some(c) = &self.cauchy {
            if !(c.s >= lo && c.s <= hi) {
                return Err(ConfigError::Invalid(format!("cauchy.s = {} lies outside the interval", c.s)));
            }
        }
        if self.task == Task::Green {
            let b = self.bvp.as_ref().expect("checked above");
            if b.a_value != 0.0 || b.b_value != 0.0 {
                return Err(ConfigError::Invalid("green needs homogeneous boundary values".into()));
            }
        }
        if let Some(f) = &self.flw {
            if f.ladder.is_empty() || f.ladder.iter().any(|&t| !(t > f.a && t <= hi)) || f.a < lo {
                return Err(ConfigError::Invalid("flw: ladder must lie in (a, hi] and a inside the interval".into()));
            }
        }
        // probe every expression on the interval
        let probe: Vec<f64> = (0..=64).map(|i| lo + (hi - lo) * i as f64 / 64.0).collect();
        let mut fields: Vec<(&str, ScalarField)> = match self.coefficients()? {
            Resolved::SelfAdjoint { p, q, h } => vec![("p", p), ("q", q), ("h", h)],
            Resolved::General { a, b, c, g } => vec![("a", a), ("b", b), ("c", c), ("g", g)],
        };
        if let Some(e) = self.expected()? {
            fields.push(("expected", e));
        }
        for (name, f) in &fields {
            if let Some(t) = probe.iter().find(|&&t| !f.eval(t).is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} is not finite at t = {t}")));
            }
        }
        Ok(())
    }
}
