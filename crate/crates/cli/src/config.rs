//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use accel_core::bench::ProblemSpec;
use accel_core::eacgm::{AlphaPolicy, EacgmConfig};
use accel_core::ogm::OgmConfig;
use accel_core::ogmm::MemoryConfig;
use accel_core::StoppingRule;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ogm,
    Item,
    Tmm,
    /// Generic smooth method with explicit `a1` and `gamma1`.
    Custom,
    Ogmm,
    Acgm,
    Eacgm,
}

impl Method {
    pub fn is_composite(self) -> bool {
        matches!(self, Method::Acgm | Method::Eacgm)
    }
}

/// Dampening as a number or one of `"worst_case"` / `"from_ll"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSetting {
    Value(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub method: Method,
    /// `A_1` for `tmm` and `custom`, and for the `ogmm` base method.
    #[serde(default)]
    pub a1: Option<f64>,
    #[serde(default)]
    pub gamma1: Option<f64>,
    /// Memory-less method the `ogmm` solver extends: `item` (default), `tmm`, `ogm` or `custom`.
    #[serde(default)]
    pub base: Option<Method>,
    #[serde(default)]
    pub memory: Option<MemoryConfig>,
    #[serde(default)]
    pub alpha: Option<AlphaSetting>,
    /// Absolute lower bound on the Lipschitz estimate.
    #[serde(default)]
    pub l_l: Option<f64>,
    /// Lower bound as a fraction of the oracle's smoothness constant.
    #[serde(default)]
    pub l_l_ratio: Option<f64>,
    #[serde(default)]
    pub l0: Option<f64>,
    #[serde(default)]
    pub r_u: Option<f64>,
    #[serde(default)]
    pub r_d: Option<f64>,
    #[serde(default)]
    pub a0: Option<f64>,
    #[serde(default)]
    pub gamma0: Option<f64>,
}

impl SolverSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            a1: None,
            gamma1: None,
            base: None,
            memory: None,
            alpha: None,
            l_l: None,
            l_l_ratio: None,
            l0: None,
            r_u: None,
            r_d: None,
            a0: None,
            gamma0: None,
        }
    }

    pub fn eacgm(alpha: f64) -> Self {
        Self { alpha: Some(AlphaSetting::Value(alpha)), ..Self::new(Method::Eacgm) }
    }

    /// Short label used in file names and tables.
    pub fn label(&self) -> String {
        match self.method {
            Method::Ogmm => {
                let base = self.base.unwrap_or(Method::Item);
                format!("{}-m", method_name(base))
            }
            Method::Eacgm => match &self.alpha {
                Some(AlphaSetting::Value(a)) => format!("eacgm-{a}"),
                Some(AlphaSetting::Named(n)) => format!("eacgm-{n}"),
                None => "eacgm-worst_case".into(),
            },
            m => method_name(m).into(),
        }
    }

    /// Smooth-method parameters; `ogmm` resolves to its base method.
    pub fn ogm_config(&self) -> Result<OgmConfig> {
        let method = match self.method {
            Method::Ogmm => self.base.unwrap_or(Method::Item),
            m => m,
        };
        let cfg = match method {
            Method::Ogm => OgmConfig::ogm(),
            Method::Item => OgmConfig::item(),
            Method::Tmm => OgmConfig::tmm(self.a1.unwrap_or(1.0)),
            Method::Custom => OgmConfig { a1: self.a1.unwrap_or(0.0), gamma1: self.gamma1.unwrap_or(1.0), ..OgmConfig::default() },
            other => return Err(CliError::Config(format!("{} cannot serve as the base of ogmm", method_name(other)))),
        };
        Ok(cfg)
    }

    pub fn memory_config(&self) -> MemoryConfig {
        self.memory.unwrap_or_default()
    }

    /// Composite-method parameters. `lipschitz_hint` scales `l_l_ratio`.
    pub fn eacgm_config(&self, lipschitz_hint: Option<f64>) -> Result<EacgmConfig> {
        let alpha_policy = match self.method {
            Method::Acgm => AlphaPolicy::Constant { alpha: 0.0 },
            _ => match &self.alpha {
                None => AlphaPolicy::WorstCase,
                Some(AlphaSetting::Value(a)) => AlphaPolicy::Constant { alpha: *a },
                Some(AlphaSetting::Named(n)) => match n.as_str() {
                    "worst_case" => AlphaPolicy::WorstCase,
                    "from_ll" => AlphaPolicy::FromLl,
                    other => return Err(CliError::Config(format!("unknown alpha setting {other:?}"))),
                },
            },
        };
        let l_l = match (self.l_l, self.l_l_ratio) {
            (Some(_), Some(_)) => return Err(CliError::Config("set at most one of l_l and l_l_ratio".into())),
            (Some(l), None) => l,
            (None, Some(r)) => {
                let hint = lipschitz_hint
                    .ok_or_else(|| CliError::Config("l_l_ratio needs an oracle with a known smoothness constant".into()))?;
                r * hint
            }
            (None, None) => 0.0,
        };
        let d = EacgmConfig::default();
        Ok(EacgmConfig {
            alpha_policy,
            l0: self.l0,
            l_l,
            r_u: self.r_u.unwrap_or(d.r_u),
            r_d: self.r_d.unwrap_or(d.r_d),
            a0: self.a0.unwrap_or(d.a0),
            gamma0: self.gamma0.unwrap_or(d.gamma0),
        })
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Ogm => "ogm",
        Method::Item => "item",
        Method::Tmm => "tmm",
        Method::Custom => "custom",
        Method::Ogmm => "ogmm",
        Method::Acgm => "acgm",
        Method::Eacgm => "eacgm",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_trace")]
    pub trace_csv: PathBuf,
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
    /// Also write a gnuplot script next to the trace.
    #[serde(default)]
    pub gnuplot: bool,
}

fn default_trace() -> PathBuf {
    "trace.csv".into()
}

fn default_summary() -> PathBuf {
    "summary.json".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Self { trace_csv: default_trace(), summary: default_summary(), gnuplot: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimumSource {
    /// Analytic optimum when the problem has one, otherwise a reference solve.
    #[default]
    Auto,
    None,
    Reference,
    /// JSON file `{"x": [...], "f": ...}`.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimumSpec {
    #[serde(default)]
    pub source: OptimumSource,
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Relative gradient-mapping reduction for reference solves.
    #[serde(default = "default_ref_tol")]
    pub tol: f64,
    #[serde(default = "default_ref_iter")]
    pub max_iter: usize,
}

fn default_ref_tol() -> f64 {
    1e-12
}

fn default_ref_iter() -> usize {
    200_000
}

impl Default for OptimumSpec {
    fn default() -> Self {
        Self { source: OptimumSource::Auto, path: None, tol: default_ref_tol(), max_iter: default_ref_iter() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub stop: StoppingRule,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub known_optimum: OptimumSpec,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub eps_rel: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.problem.seed = s;
        }
        if let Some(m) = o.max_iter {
            self.stop.max_iter = m;
        }
        if let Some(e) = o.eps_rel {
            self.stop.eps_rel = Some(e);
        }
        self.validate()
    }

    /// Checks that need no problem data, so they run before any oracle call.
    pub fn validate(&self) -> Result<()> {
        let composite = self.problem.kind.is_composite();
        if composite != self.solver.method.is_composite() {
            return Err(CliError::Config(format!(
                "solver {} does not apply to the {} problem {}",
                method_name(self.solver.method),
                if composite { "composite" } else { "smooth" },
                self.problem.kind.name()
            )));
        }
        if let Some(e) = self.stop.eps_rel {
            if !(e > 0.0 && e < 1.0) {
                return Err(CliError::Config(format!("eps_rel must lie in (0, 1), got {e}")));
            }
            if self.known_optimum.source == OptimumSource::None {
                return Err(CliError::Config("eps_rel needs a known optimum".into()));
            }
        }
        if self.known_optimum.source == OptimumSource::File && self.known_optimum.path.is_none() {
            return Err(CliError::Config("known_optimum.source = \"file\" needs a path".into()));
        }
        if self.known_optimum.source == OptimumSource::Reference && !composite {
            return Err(CliError::Config("reference solves apply to composite problems only".into()));
        }
        let s = &self.solver;
        let smooth_only = s.a1.is_some() || s.gamma1.is_some() || s.base.is_some() || s.memory.is_some();
        let composite_only = s.alpha.is_some()
            || s.l_l.is_some()
            || s.l_l_ratio.is_some()
            || s.l0.is_some()
            || s.r_u.is_some()
            || s.r_d.is_some()
            || s.a0.is_some()
            || s.gamma0.is_some();
        if s.method.is_composite() && smooth_only {
            return Err(CliError::Config("a1, gamma1, base and memory apply to smooth solvers only".into()));
        }
        if !s.method.is_composite() && composite_only {
            return Err(CliError::Config("alpha and line-search settings apply to composite solvers only".into()));
        }
        if s.method == Method::Acgm && s.alpha.is_some() {
            return Err(CliError::Config("acgm fixes alpha = 0; use eacgm to set it".into()));
        }
        if (s.base.is_some() || s.memory.is_some()) && s.method != Method::Ogmm {
            return Err(CliError::Config("base and memory apply to the ogmm solver only".into()));
        }
        if s.method == Method::Ogmm {
            s.ogm_config()?;
        } else if !s.method.is_composite() {
            // Presets fix the initial weights themselves.
            let allowed = match s.method {
                Method::Tmm => s.gamma1.is_none(),
                Method::Custom => true,
                _ => s.a1.is_none() && s.gamma1.is_none(),
            };
            if !allowed {
                return Err(CliError::Config(format!("{} does not take a1/gamma1 overrides", method_name(s.method))));
            }
        }
        if s.method.is_composite() {
            s.eacgm_config(Some(1.0))?.validate()?;
        }
        Ok(())
    }
}
