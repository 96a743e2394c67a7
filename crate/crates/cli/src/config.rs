//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use nelson_core::fock::MomentumGrid;
use nelson_core::nelson::{NelsonModel, NelsonParams, MOMENTUM_BOUND};
use nelson_core::wavefunctions::{Method, Truncation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default, rename = "task")]
    pub tasks: Vec<TaskConfig>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_p() -> [f64; 3] {
    NelsonParams::default().p
}
fn default_sigma() -> f64 {
    NelsonParams::default().sigma
}
fn default_kappa() -> f64 {
    NelsonParams::default().kappa
}
fn default_lambda() -> f64 {
    NelsonParams::default().lambda
}
fn default_eps0() -> f64 {
    NelsonParams::default().eps0
}
fn default_n_max() -> usize {
    4
}
fn default_true() -> bool {
    true
}
fn default_ceiling() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_p")]
    pub p: [f64; 3],
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub alpha_bar: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Keep `(P - P_f)^2 / 2`; off gives the exactly solvable model.
    #[serde(default = "default_true")]
    pub quadratic: bool,
    /// Largest admissible `|lambda|`.
    #[serde(default = "default_ceiling")]
    pub lambda_ceiling: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Geometric shells between sigma and kappa, six octahedral directions each.
    pub shells: Option<usize>,
    /// Mode file, one `kx ky kz w` per line; relative to the config file.
    pub file: Option<PathBuf>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            shells: Some(2),
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    GroundState {
        #[serde(default)]
        hessian: bool,
    },
    Wavefunctions {
        #[serde(default = "default_ns")]
        n: Vec<usize>,
        #[serde(default = "default_methods")]
        methods: Vec<MethodName>,
        #[serde(default)]
        truncation: TruncationName,
    },
    Verify {
        #[serde(default = "default_vectors")]
        vectors: usize,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    Sweep {
        lambdas: Vec<f64>,
        sigmas: Vec<f64>,
        #[serde(default = "default_sweep_n_max")]
        n_max: usize,
        #[serde(default = "default_spd")]
        shells_per_decade: f64,
    },
    RecurrenceDemo {
        n: usize,
        #[serde(default = "one")]
        a: i64,
        #[serde(default = "one")]
        b: i64,
    },
}

fn default_ns() -> Vec<usize> {
    vec![1, 2]
}
fn default_methods() -> Vec<MethodName> {
    vec![MethodName::Direct, MethodName::Froehlich, MethodName::Novel]
}
fn default_vectors() -> usize {
    20
}
fn default_seed() -> u64 {
    20
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_sweep_n_max() -> usize {
    3
}
fn default_spd() -> f64 {
    1.5
}
fn one() -> i64 {
    1
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::GroundState { .. } => "ground_state",
            TaskConfig::Wavefunctions { .. } => "wavefunctions",
            TaskConfig::Verify { .. } => "verify",
            TaskConfig::Sweep { .. } => "sweep",
            TaskConfig::RecurrenceDemo { .. } => "recurrence_demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Direct,
    Froehlich,
    Novel,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Direct => Method::Direct,
            MethodName::Froehlich => Method::Froehlich,
            MethodName::Novel => Method::Novel,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationName {
    #[default]
    Uniform,
    Graded,
}

impl From<TruncationName> for Truncation {
    fn from(t: TruncationName) -> Self {
        match t {
            TruncationName::Uniform => Truncation::Uniform,
            TruncationName::Graded => Truncation::Graded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Invalid configuration, located by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config at `{}`: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field path.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
            path: e.path().to_string(),
            message: e.inner().message().trim().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn params(&self) -> NelsonParams {
        let m = &self.model;
        NelsonParams {
            p: m.p,
            sigma: m.sigma,
            kappa: m.kappa,
            lambda: m.lambda,
            alpha_bar: m.alpha_bar,
            eps0: m.eps0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |path: &str, message: String| Err(ConfigError { path: path.into(), message });
        let m = &self.model;
        let pn = m.p.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(pn < MOMENTUM_BOUND) {
            return err("model.p", format!("|P| = {pn} outside S = {{|P| < 1/3}}"));
        }
        if let Err(e) = self.params().validate() {
            let path = match &e {
                nelson_core::Error::InvalidParameter { field, .. } => format!("model.{field}"),
                _ => "model".into(),
            };
            return err(&path, e.to_string());
        }
        if !(m.lambda.abs() <= m.lambda_ceiling) {
            return err("model.lambda", format!("|lambda| = {} exceeds the ceiling {}", m.lambda.abs(), m.lambda_ceiling));
        }
        if m.n_max == 0 {
            return err("model.n_max", "must be at least 1".into());
        }
        match (&m.grid.shells, &m.grid.file) {
            (Some(_), Some(_)) => return err("model.grid", "give either `shells` or `file`, not both".into()),
            (None, None) => return err("model.grid", "needs `shells` or `file`".into()),
            (Some(0), None) => return err("model.grid.shells", "must be at least 1".into()),
            _ => {}
        }
        for (i, t) in self.tasks.iter().enumerate() {
            let at = |f: &str| format!("task[{i}].{f}");
            match t {
                TaskConfig::Wavefunctions { n, .. } => {
                    if let Some(&bad) = n.iter().find(|&&k| k > m.n_max) {
                        return err(&at("n"), format!("{bad} exceeds model.n_max = {}", m.n_max));
                    }
                }
                TaskConfig::Sweep { lambdas, sigmas, .. } => {
                    if sigmas.is_empty() {
                        return err(&at("sigmas"), "empty".into());
                    }
                    if let Some(s) = sigmas.iter().find(|&&s| !(s > 0.0 && s <= m.kappa)) {
                        return err(&at("sigmas"), format!("{s} outside (0, kappa = {}]", m.kappa));
                    }
                    if let Some(l) = lambdas.iter().find(|l| !(l.abs() <= m.lambda_ceiling)) {
                        return err(&at("lambdas"), format!("|{l}| exceeds the ceiling {}", m.lambda_ceiling));
                    }
                }
                TaskConfig::Verify { tolerance, .. } if !(*tolerance > 0.0) => {
                    return err(&at("tolerance"), "must be positive".into());
                }
                TaskConfig::RecurrenceDemo { n, .. } if *n > 90 => {
                    return err(&at("n"), "at most 90 (integer overflow)".into());
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<(Self, String)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(f) = &cfg.model.grid.file {
            if f.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.model.grid.file = Some(base.join(f));
            }
        }
        Ok((cfg, text))
    }

    pub fn grid(&self) -> anyhow::Result<MomentumGrid> {
        let m = &self.model;
        Ok(match (&m.grid.shells, &m.grid.file) {
            (Some(s), None) => MomentumGrid::shells(m.sigma, m.kappa, *s)?,
            (None, Some(f)) => MomentumGrid::read_file(f)?,
            _ => bail!("model.grid: needs exactly one of `shells` or `file`"),
        })
    }

    pub fn model(&self) -> anyhow::Result<NelsonModel> {
        Ok(NelsonModel::build(self.params(), self.grid()?, self.model.n_max, self.model.quadratic)?)
    }
}
