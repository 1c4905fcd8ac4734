//! The benchmark suite behind `bench`: every problem with its family of
//! solvers, run in parallel.

use std::fs;
use std::path::{Path, PathBuf};

use accel_core::bench::{Problem, ProblemKind, ProblemSpec, Scale};
use accel_core::{KnownOptimum, StoppingRule};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AlphaSetting, Method, OptimumSpec, SolverSpec};
use crate::error::{CliError, Result};
use crate::runner::{execute, resolve_optimum, write_outputs, RunSummary};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "ACCELOPT_THREADS";

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    pub stop: StoppingRule,
}

/// Smooth problems get ITEM and TMM with and without memory; composite
/// problems get ACGM and EACGM with three dampening choices.
pub fn suite(scale: Scale, seed: u64) -> Vec<SuiteCase> {
    let max_iter = match scale {
        Scale::Desk => 50_000,
        Scale::Paper => 200_000,
    };
    ProblemKind::ALL
        .iter()
        .map(|&kind| {
            let eps = if kind == ProblemKind::Enlr { 1e-4 } else { 1e-5 };
            let solvers = if kind.is_composite() {
                vec![
                    SolverSpec::new(Method::Acgm),
                    SolverSpec::eacgm(accel_core::eacgm::WORST_CASE_ALPHA),
                    SolverSpec {
                        alpha: Some(AlphaSetting::Named("from_ll".into())),
                        l_l_ratio: Some(0.1),
                        ..SolverSpec::new(Method::Eacgm)
                    },
                    SolverSpec::eacgm(1.0),
                ]
            } else {
                let memory = |base| SolverSpec { base: Some(base), ..SolverSpec::new(Method::Ogmm) };
                vec![
                    SolverSpec::new(Method::Item),
                    memory(Method::Item),
                    SolverSpec::new(Method::Tmm),
                    memory(Method::Tmm),
                ]
            };
            SuiteCase {
                problem: ProblemSpec::new(kind, scale, seed),
                solvers,
                stop: StoppingRule { max_iter, eps_rel: Some(eps), grad_tol: None },
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRun {
    pub problem: String,
    pub solver: String,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
    pub trace: Option<PathBuf>,
}

/// Reported ordering between solvers on one problem; never asserted.
#[derive(Debug, Clone, Serialize)]
pub struct Ordering {
    pub problem: String,
    pub claim: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub scale: String,
    pub seed: u64,
    pub runs: Vec<SuiteRun>,
    pub orderings: Vec<Ordering>,
}

impl SuiteReport {
    /// Every run finished and its asserted certificates passed.
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| r.summary.as_ref().is_some_and(|s| s.passed()))
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<6} {:<20} {:>8} {:>10} {:>10} {:>9}  certificates\n",
            "prob", "solver", "iters", "to_eps", "oracle", "time_s"
        );
        for r in &self.runs {
            match (&r.summary, &r.error) {
                (Some(s), _) => {
                    let to_eps = s.iterations_to_threshold.map_or("-".to_string(), |k| k.to_string());
                    let cert = match (s.certificates.all_passed(), s.certificates_asserted) {
                        (true, _) => "pass",
                        (false, true) => "FAIL",
                        (false, false) => "fail (reported only)",
                    };
                    out.push_str(&format!(
                        "{:<6} {:<20} {:>8} {:>10} {:>10} {:>9.3}  {cert}\n",
                        r.problem, r.solver, s.iterations, to_eps, s.oracle_calls, s.wall_time_s
                    ));
                }
                (None, e) => out.push_str(&format!("{:<6} {:<20} error: {}\n", r.problem, r.solver, e.as_deref().unwrap_or("?"))),
            }
        }
        for o in &self.orderings {
            out.push_str(&format!("{:<6} {}: {}\n", o.problem, o.claim, if o.holds { "holds" } else { "does not hold" }));
        }
        out
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs `cases`, writing one trace per run and `summary.json` under `out_dir`.
pub fn run_suite(cases: &[SuiteCase], out_dir: &Path, threads: Option<usize>) -> Result<SuiteReport> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let runs = pool.install(|| {
        let prepared: Vec<std::result::Result<(Problem, Option<KnownOptimum>), String>> =
            cases.par_iter().map(|c| prepare(&c.problem).map_err(|e| e.to_string())).collect();
        let jobs: Vec<(usize, &SolverSpec)> =
            cases.iter().enumerate().flat_map(|(i, c)| c.solvers.iter().map(move |s| (i, s))).collect();
        jobs.par_iter().map(|&(i, solver)| run_one(&cases[i], &prepared[i], solver, out_dir)).collect::<Vec<_>>()
    });
    let first = &cases.first().map(|c| c.problem.clone());
    let report = SuiteReport {
        scale: first.as_ref().map_or("desk".into(), |p| format!("{:?}", p.scale).to_lowercase()),
        seed: first.as_ref().map_or(0, |p| p.seed),
        orderings: orderings(&runs),
        runs,
    };
    let path = out_dir.join("summary.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}

fn prepare(spec: &ProblemSpec) -> Result<(Problem, Option<KnownOptimum>)> {
    let problem = spec.build()?;
    let known = resolve_optimum(&problem, &OptimumSpec::default())?;
    Ok((problem, known))
}

fn run_one(
    case: &SuiteCase,
    prepared: &std::result::Result<(Problem, Option<KnownOptimum>), String>,
    solver: &SolverSpec,
    out_dir: &Path,
) -> SuiteRun {
    let problem_name = case.problem.kind.name().to_string();
    let label = solver.label();
    let result = prepared.as_ref().map_err(Clone::clone).and_then(|(problem, known)| {
        let out = execute(problem, solver, &case.stop, known.as_ref()).map_err(|e| e.to_string())?;
        let trace = out_dir.join(format!("{problem_name}-{label}.csv"));
        let summary = out_dir.join(format!("{problem_name}-{label}.json"));
        write_outputs(&out, &trace, &summary, false).map_err(|e| e.to_string())?;
        Ok((out.summary, trace))
    });
    match result {
        Ok((summary, trace)) => SuiteRun { problem: problem_name, solver: label, summary: Some(summary), error: None, trace: Some(trace) },
        Err(e) => SuiteRun { problem: problem_name, solver: label, summary: None, error: Some(e), trace: None },
    }
}

fn iterations(runs: &[SuiteRun], problem: &str, solver: &str) -> Option<usize> {
    runs.iter()
        .find(|r| r.problem == problem && r.solver == solver)
        .and_then(|r| r.summary.as_ref())
        .and_then(|s| s.iterations_to_threshold.or(Some(usize::MAX)))
}

/// Memory never slows convergence, and larger dampening never slows it.
fn orderings(runs: &[SuiteRun]) -> Vec<Ordering> {
    let mut out = Vec::new();
    let mut problems: Vec<&str> = runs.iter().map(|r| r.problem.as_str()).collect();
    problems.dedup();
    for p in problems {
        for base in ["item", "tmm"] {
            let memory = format!("{base}-m");
            if let (Some(a), Some(b)) = (iterations(runs, p, &memory), iterations(runs, p, base)) {
                out.push(Ordering { problem: p.into(), claim: format!("{memory} needs no more iterations than {base}"), holds: a <= b });
            }
        }
        let mut by_alpha: Vec<(f64, &str, usize)> = runs
            .iter()
            .filter(|r| r.problem == p)
            .filter_map(|r| {
                let s = r.summary.as_ref()?;
                let alpha = *s.meta.get("alpha")?;
                Some((alpha, r.solver.as_str(), s.iterations_to_threshold.unwrap_or(usize::MAX)))
            })
            .collect();
        by_alpha.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in by_alpha.windows(2) {
            out.push(Ordering {
                problem: p.into(),
                claim: format!("{} (alpha {:.4}) needs no more iterations than {} (alpha {:.4})", w[1].1, w[1].0, w[0].1, w[0].0),
                holds: w[1].2 <= w[0].2,
            });
        }
    }
    out
}
