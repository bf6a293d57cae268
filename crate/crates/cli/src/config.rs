//! TOML experiment configuration.
//!
//! Complex numbers are written as `[re, im]`. A state section gives exactly
//! one of `amplitudes`, `density` / `povm`, `splitter` or (post-selection
//! only) `identity = true`.

use cheshire_core::hilbert::{make_postselection, make_preparation, BlochAxis, Mat2, PureState, SystemOperator};
use cheshire_core::sampler::SamplerConfig;
use cheshire_core::{Error as CoreError, Experiment, GaussianMeter};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type Complex = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `(L,+), (L,−), (R,+), (R,−)` along the configured axis.
    #[default]
    Eigen,
    /// `(L,H), (L,V), (R,H), (R,V)`.
    Lab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitterSpec {
    pub r: Complex,
    pub t: Complex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_left: Option<[[Complex; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_right: Option<[[Complex; 2]; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<Vec<Complex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<Vec<Vec<Complex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitter: Option<SplitterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeterSpec {
    pub epsilon: f64,
    /// Defaults to `epsilon` (pure pointer).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_tilde: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetersSpec {
    pub x: MeterSpec,
    pub y: MeterSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub n_trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Points per axis of the optional density CSV written by `analyze`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_grid: Option<usize>,
    /// Oracle grid spacing; must divide 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_spacing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preparation: StateSpec,
    pub postselection: StateSpec,
    #[serde(default)]
    pub axis: AxisSpec,
    pub meters: MetersSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

fn cx(v: Complex) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn field(path: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {err}"))
}

fn core_field(path: &str, err: CoreError) -> CliError {
    match err {
        CoreError::ZeroPostselection { value } => CliError::ZeroPostselection(value),
        other => field(path, other),
    }
}

fn matrix2(m: &Option<[[Complex; 2]; 2]>) -> Mat2 {
    match m {
        Some(rows) => Mat2::new(cx(rows[0][0]), cx(rows[0][1]), cx(rows[1][0]), cx(rows[1][1])),
        None => Mat2::identity(),
    }
}

fn matrix4(path: &str, rows: &[Vec<Complex>]) -> Result<SystemOperator, CliError> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(field(path, "expected a 4x4 matrix of [re, im] entries"));
    }
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[i][j] = cx(*v);
        }
    }
    Ok(SystemOperator::from_rows(out))
}

fn amplitudes(path: &str, amps: &[Complex], basis: Basis, axis: &BlochAxis) -> Result<PureState, CliError> {
    if amps.len() != 4 {
        return Err(field(path, format!("expected 4 entries, got {}", amps.len())));
    }
    let a = [cx(amps[0]), cx(amps[1]), cx(amps[2]), cx(amps[3])];
    match basis {
        Basis::Eigen => PureState::from_eigen_components(a, axis),
        Basis::Lab => PureState::new(a),
    }
    .map_err(|e| field(path, e))
}

enum Side {
    Pure(PureState),
    Mixed(SystemOperator),
}

impl Side {
    fn operator(&self) -> SystemOperator {
        match self {
            Side::Pure(s) => s.projector(),
            Side::Mixed(m) => m.clone(),
        }
    }
}

fn sources(desc: &StateSpec) -> Vec<&'static str> {
    let mut v = Vec::new();
    if desc.amplitudes.is_some() {
        v.push("amplitudes");
    }
    if desc.density.is_some() {
        v.push("density");
    }
    if desc.povm.is_some() {
        v.push("povm");
    }
    if desc.splitter.is_some() {
        v.push("splitter");
    }
    if desc.identity == Some(true) {
        v.push("identity");
    }
    v
}

fn build_side(section: &str, desc: &StateSpec, axis: &BlochAxis) -> Result<Side, CliError> {
    let is_prep = section == "preparation";
    let (matrix_key, allowed): (&str, &[&str]) = if is_prep {
        ("density", &["amplitudes", "density", "splitter"])
    } else {
        ("povm", &["amplitudes", "povm", "splitter", "identity"])
    };
    let given = sources(desc);
    if let Some(bad) = given.iter().find(|g| !allowed.contains(g)) {
        return Err(field(&format!("{section}.{bad}"), format!("not allowed here; use one of {}", allowed.join(", "))));
    }
    if given.len() != 1 {
        return Err(field(section, format!("exactly one of {} must be given", allowed.join(", "))));
    }
    if desc.basis.is_some() && desc.amplitudes.is_none() {
        return Err(field(&format!("{section}.basis"), "only meaningful together with amplitudes"));
    }
    if let Some(a) = &desc.amplitudes {
        return amplitudes(&format!("{section}.amplitudes"), a, desc.basis.unwrap_or_default(), axis).map(Side::Pure);
    }
    if let Some(m) = desc.density.as_ref().or(desc.povm.as_ref()) {
        return matrix4(&format!("{section}.{matrix_key}"), m).map(Side::Mixed);
    }
    if let Some(s) = &desc.splitter {
        let path = format!("{section}.splitter");
        let (va, vb) = (matrix2(&s.v_left), matrix2(&s.v_right));
        let state = if is_prep {
            make_preparation(cx(s.r), cx(s.t), &va, &vb)
        } else {
            make_postselection(cx(s.r), cx(s.t), &va, &vb)
        };
        return state.map(Side::Pure).map_err(|e| field(&path, e));
    }
    Ok(Side::Mixed(SystemOperator::identity()))
}

fn meter(path: &str, m: &MeterSpec) -> Result<GaussianMeter, CliError> {
    GaussianMeter::new(m.epsilon, m.epsilon_tilde.unwrap_or(m.epsilon)).map_err(|e| field(path, e))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().trim().to_string() + &location(text, &e)))
    }

    pub fn from_table(table: toml::Table) -> Result<Self, CliError> {
        Self::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn axis(&self) -> Result<BlochAxis, CliError> {
        BlochAxis::from_angles(self.axis.theta, self.axis.phi).map_err(|e| field("axis", e))
    }

    pub fn experiment(&self) -> Result<Experiment, CliError> {
        let axis = self.axis()?;
        let prep = build_side("preparation", &self.preparation, &axis)?;
        let post = build_side("postselection", &self.postselection, &axis)?;
        let mx = meter("meters.x", &self.meters.x)?;
        let my = meter("meters.y", &self.meters.y)?;
        let built = match (&prep, &post) {
            (Side::Pure(psi), Side::Pure(phi)) => Experiment::pure(psi, phi, axis, mx, my),
            _ => Experiment::new(prep.operator(), post.operator(), axis, mx, my),
        };
        built.map_err(|e| match e {
            CoreError::InvalidOperator { role: "density matrix", .. } => core_field("preparation", e),
            CoreError::InvalidOperator { role: "POVM element", .. } => core_field("postselection", e),
            other => core_field("experiment", other),
        })
    }

    pub fn sampler(&self) -> Result<SamplerConfig, CliError> {
        let s = self.sampler.as_ref().ok_or_else(|| field("sampler", "section is required for sampling"))?;
        let cfg = SamplerConfig::new(s.n_trials, s.seed).map_err(|e| field("sampler.n_trials", e))?;
        let (nx, ny) = (s.nu_x.unwrap_or(0.0), s.nu_y.unwrap_or(0.0));
        for (name, v) in [("sampler.nu_x", nx), ("sampler.nu_y", ny)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(field(name, format!("must be a non-negative number, got {v}")));
            }
        }
        Ok(if nx > 0.0 || ny > 0.0 { cfg.with_noise(nx, ny) } else { cfg })
    }

    pub fn noise(&self) -> (f64, f64) {
        self.sampler.map_or((0.0, 0.0), |s| (s.nu_x.unwrap_or(0.0), s.nu_y.unwrap_or(0.0)))
    }

    pub fn output(&self) -> OutputSpec {
        self.output.clone().unwrap_or_default()
    }
}

fn location(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

/// Replaces the value at a dotted path (`meters.x.epsilon`,
/// `postselection.amplitudes.2.0`) in a parsed TOML document. A missing
/// final table key is created.
pub fn set_path(doc: &mut toml::Table, path: &str, value: f64) -> Result<(), CliError> {
    let parts: Vec<&str> = path.split('.').collect();
    let mut root = toml::Value::Table(std::mem::take(doc));
    let result = set_in(&mut root, &parts, path, value);
    if let toml::Value::Table(t) = root {
        *doc = t;
    }
    result
}

fn set_in(root: &mut toml::Value, parts: &[&str], path: &str, value: f64) -> Result<(), CliError> {
    let mut cur = root;
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        cur = match cur {
            toml::Value::Table(t) => {
                if last {
                    t.entry(part.to_string()).or_insert(toml::Value::Float(value))
                } else {
                    t.get_mut(*part).ok_or_else(|| field(path, format!("no key `{part}`")))?
                }
            }
            toml::Value::Array(a) => {
                let i: usize = part.parse().map_err(|_| field(path, format!("`{part}` is not an array index")))?;
                a.get_mut(i).ok_or_else(|| field(path, format!("index {i} out of range")))?
            }
            _ => return Err(field(path, format!("`{part}` descends into a scalar"))),
        };
    }
    *cur = match cur {
        toml::Value::Integer(_) if value.fract() == 0.0 && value.abs() < 9.0e15 => toml::Value::Integer(value as i64),
        _ => toml::Value::Float(value),
    };
    Ok(())
}
