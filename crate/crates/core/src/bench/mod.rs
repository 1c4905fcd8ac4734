//! Seeded synthetic benchmark problems. Identical specs reproduce
//! bit-identical data and starting points.

pub mod composite;
pub mod matrix;
pub mod rng;
pub mod smooth;
pub mod special;

use serde::{Deserialize, Serialize};

use crate::eacgm::{Eacgm, EacgmConfig, WORST_CASE_ALPHA};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::oracle::{CompositeOracle, SmoothOracle};
use crate::trace::KnownOptimum;

pub use composite::{elastic_net_prox, ElasticNet, LogisticElasticNet};
pub use matrix::{largest_singular_value, Csr, Dense};
pub use rng::BenchRng;
pub use smooth::{DenseQuadratic, Quad, Spl};
pub use special::{logistic, logsumexp, shrinkage, softmax, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Spl,
    Quad,
    En,
    Enlr,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [ProblemKind::Spl, ProblemKind::Quad, ProblemKind::En, ProblemKind::Enlr];

    pub fn is_composite(self) -> bool {
        matches!(self, ProblemKind::En | ProblemKind::Enlr)
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Spl => "spl",
            ProblemKind::Quad => "quad",
            ProblemKind::En => "en",
            ProblemKind::Enlr => "enlr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

/// Problem description. Unset fields take the defaults of the kind at the
/// chosen scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default)]
    pub seed: u64,
    /// Number of rows of the data matrix (SPL, EN, ENLR).
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    /// SPL smoothing `s`.
    #[serde(default)]
    pub smoothing: Option<f64>,
    /// Sparsifying weight `λ` (EN, ENLR).
    #[serde(default)]
    pub lambda: Option<f64>,
    /// `μ` as a fraction of the smoothness constant.
    #[serde(default)]
    pub mu_ratio: Option<f64>,
    /// Fraction of nonzeros in the ENLR matrix.
    #[serde(default)]
    pub density: Option<f64>,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, scale: Scale, seed: u64) -> Self {
        Self { kind, scale, seed, m: None, n: None, smoothing: None, lambda: None, mu_ratio: None, density: None }
    }

    pub fn desk(kind: ProblemKind, seed: u64) -> Self {
        Self::new(kind, Scale::Desk, seed)
    }

    /// `(M, n)`; `M = n` for QUAD.
    pub fn dims(&self) -> (usize, usize) {
        let paper = self.scale == Scale::Paper;
        let (m, n) = match (self.kind, paper) {
            (ProblemKind::Spl, false) => (240, 40),
            (ProblemKind::Spl, true) => (2400, 400),
            (ProblemKind::Quad, false) => (100, 100),
            (ProblemKind::Quad, true) => (1000, 1000),
            (ProblemKind::En, false) => (250, 250),
            (ProblemKind::En, true) => (2500, 2500),
            (ProblemKind::Enlr, false) => (5000, 1000),
            (ProblemKind::Enlr, true) => (50_000, 10_000),
        };
        let n = self.n.unwrap_or(n);
        let m = match self.kind {
            ProblemKind::Quad => n,
            ProblemKind::En => self.m.unwrap_or(if self.n.is_some() { n } else { m }),
            _ => self.m.unwrap_or(m),
        };
        (m, n)
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = self.dims();
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("problem dimensions must be positive".into()));
        }
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
            }
            _ => Ok(()),
        };
        positive("smoothing", self.smoothing)?;
        positive("lambda", self.lambda)?;
        if let Some(r) = self.mu_ratio {
            if !(r.is_finite() && (0.0..1.0).contains(&r)) {
                return Err(Error::InvalidParameter(format!("mu_ratio must lie in [0, 1), got {r}")));
            }
        }
        if let Some(d) = self.density {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidParameter(format!("density must lie in (0, 1], got {d}")));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Problem> {
        self.validate()?;
        let (m, n) = self.dims();
        let mu_ratio = self.mu_ratio.unwrap_or(1e-4);
        let (oracle, x0) = match self.kind {
            ProblemKind::Spl => {
                let (o, x0) = Spl::generate(m, n, self.smoothing.unwrap_or(0.05), mu_ratio, self.seed);
                (BenchOracle::Spl(o), x0)
            }
            ProblemKind::Quad => {
                let (o, x0) = Quad::generate(n, mu_ratio);
                (BenchOracle::Quad(o), x0)
            }
            ProblemKind::En => {
                let (o, x0) = ElasticNet::generate(m, n, self.lambda.unwrap_or(4.0), mu_ratio, 5.0, self.seed);
                (BenchOracle::En(o), x0)
            }
            ProblemKind::Enlr => {
                let (o, x0) = LogisticElasticNet::generate(
                    m,
                    n,
                    self.density.unwrap_or(1e-3),
                    self.lambda.unwrap_or(1e-3),
                    mu_ratio,
                    0.5,
                    self.seed,
                );
                (BenchOracle::Enlr(o), x0)
            }
        };
        let known = match &oracle {
            BenchOracle::Spl(o) => {
                let z = vec![0.0; n];
                Some(KnownOptimum { f: o.value(&z), x: z })
            }
            BenchOracle::Quad(_) => Some(KnownOptimum { x: vec![0.0; n], f: 0.0 }),
            _ => None,
        };
        Ok(Problem { spec: self.clone(), oracle, x0, known })
    }
}

#[derive(Debug, Clone)]
pub enum BenchOracle {
    Spl(Spl),
    Quad(Quad),
    En(ElasticNet),
    Enlr(LogisticElasticNet),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub oracle: BenchOracle,
    pub x0: Vec<f64>,
    /// Analytic optimum, when one is available.
    pub known: Option<KnownOptimum>,
}

impl Problem {
    pub fn smooth(&self) -> Option<&dyn SmoothOracle> {
        match &self.oracle {
            BenchOracle::Spl(o) => Some(o),
            BenchOracle::Quad(o) => Some(o),
            _ => None,
        }
    }

    pub fn composite(&self) -> Option<&dyn CompositeOracle> {
        match &self.oracle {
            BenchOracle::En(o) => Some(o),
            BenchOracle::Enlr(o) => Some(o),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }
}

/// Approximates the minimizer of a composite problem by running the
/// enhanced method with the worst-case dampening until the composite
/// gradient mapping shrinks by `rel_tol` relative to its first value. The
/// iterate with the smallest mapping seen is returned.
pub fn reference_optimum<O: CompositeOracle + ?Sized>(
    oracle: &O,
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<KnownOptimum> {
    let metric = Metric::Identity;
    let config = EacgmConfig::with_alpha(WORST_CASE_ALPHA);
    let mut solver = Eacgm::new(oracle, &metric, &config, x0)?;
    let first = solver.step()?.grad_norm_sq.sqrt();
    let mut best = (first, solver.state().x.clone());
    for _ in 1..max_iter {
        let g = solver.step()?.grad_norm_sq.sqrt();
        if g < best.0 {
            best = (g, solver.state().x.clone());
        }
        if g <= rel_tol * first {
            break;
        }
    }
    let f = oracle.objective(&best.1);
    Ok(KnownOptimum { x: best.1, f })
}
