//! Runs one solver on one problem and writes its trace and summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use accel_core::bench::{reference_optimum, Problem};
use accel_core::certify::{certify, CertificateReport, Tolerances, TraceConstants};
use accel_core::eacgm::{alpha_max, eacgm_run, WORST_CASE_ALPHA, WORST_CASE_Q};
use accel_core::ogm::ogm_run;
use accel_core::ogmm::ogmm_run;
use accel_core::oracle::SmoothConstants;
use accel_core::{KnownOptimum, Metric, RunRecord, StoppingRule, TraceRow};
use serde::Serialize;

use crate::config::{ExperimentConfig, Method, OptimumSource, OptimumSpec, SolverSpec};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub scale: String,
    pub seed: u64,
    pub dim: usize,
    pub solver: String,
    pub iterations: usize,
    pub iterations_to_threshold: Option<usize>,
    pub eps_rel: Option<f64>,
    pub oracle_calls: u64,
    pub final_objective: f64,
    pub final_dist_sq: Option<f64>,
    pub wall_time_s: f64,
    pub meta: BTreeMap<String, f64>,
    /// Whether certificate failures count as a failed run.
    pub certificates_asserted: bool,
    pub certificates: CertificateReport,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        !self.certificates_asserted || self.certificates.all_passed()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub summary: RunSummary,
}

/// Resolves the reference optimum requested by `spec`.
/// Relative file paths resolve against the working directory.
pub fn resolve_optimum(problem: &Problem, spec: &OptimumSpec) -> Result<Option<KnownOptimum>> {
    match spec.source {
        OptimumSource::None => Ok(None),
        OptimumSource::File => {
            let path = spec.path.clone().expect("validated");
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let known: KnownOptimum = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if known.x.len() != problem.dim() {
                return Err(CliError::Config(format!(
                    "{}: optimum has dimension {}, problem has {}",
                    path.display(),
                    known.x.len(),
                    problem.dim()
                )));
            }
            Ok(Some(known))
        }
        OptimumSource::Auto if problem.known.is_some() => Ok(problem.known.clone()),
        OptimumSource::Auto | OptimumSource::Reference => match problem.composite() {
            Some(o) => Ok(Some(reference_optimum(o, &problem.x0, spec.tol, spec.max_iter)?)),
            None => Ok(problem.known.clone()),
        },
    }
}

/// Runs the configured solver; the compatibility check happens first.
pub fn solve(problem: &Problem, solver: &SolverSpec, stop: &StoppingRule, known: Option<&KnownOptimum>) -> Result<RunRecord> {
    let metric = Metric::Identity;
    if let Some(o) = problem.smooth() {
        let cfg = match solver.method {
            m if m.is_composite() => return Err(mismatch(problem, solver)),
            _ => solver.ogm_config()?,
        };
        let record = if solver.method == Method::Ogmm {
            ogmm_run(o, &metric, &cfg, &solver.memory_config(), &problem.x0, stop, known)?
        } else {
            ogm_run(o, &metric, &cfg, &problem.x0, stop, known)?
        };
        return Ok(record);
    }
    let o = problem.composite().expect("every problem is smooth or composite");
    if !solver.method.is_composite() {
        return Err(mismatch(problem, solver));
    }
    let cfg = solver.eacgm_config(o.lipschitz_hint())?;
    Ok(eacgm_run(o, &metric, &cfg, &problem.x0, stop, known)?)
}

fn mismatch(problem: &Problem, solver: &SolverSpec) -> CliError {
    CliError::Config(format!("solver {} does not apply to problem {}", solver.label(), problem.spec.kind.name()))
}

/// Whether the theory covers the chosen dampening, so that the certificates
/// must hold. Smooth solvers always qualify.
pub fn certificates_asserted(problem: &Problem, solver: &SolverSpec, alpha: Option<f64>) -> bool {
    let (Some(o), Some(alpha)) = (problem.composite(), alpha) else {
        return true;
    };
    if o.mu_f() + o.mu_psi() == 0.0 || alpha <= WORST_CASE_ALPHA {
        return true;
    }
    let l_l = solver.eacgm_config(o.lipschitz_hint()).map(|c| c.l_l).unwrap_or(0.0);
    if l_l + o.mu_psi() <= 0.0 {
        return false;
    }
    // α_max decreases up to its minimum near q = 0.4733, so past that point
    // only the worst-case value is safe for every q ≤ q_l.
    let q_l = ((o.mu_f() + o.mu_psi()) / (l_l + o.mu_psi())).min(1.0);
    if q_l > WORST_CASE_Q {
        return false;
    }
    alpha_max(q_l).is_ok_and(|a| alpha <= a)
}

pub fn trace_constants(problem: &Problem) -> Result<TraceConstants> {
    Ok(match (problem.smooth(), problem.composite()) {
        (Some(o), _) => TraceConstants::Smooth(SmoothConstants::of(o)?),
        (None, Some(o)) => TraceConstants::Composite { mu: o.mu_f() + o.mu_psi() },
        (None, None) => unreachable!("every problem is smooth or composite"),
    })
}

pub fn certify_record(problem: &Problem, record: &RunRecord, known: Option<&KnownOptimum>) -> Result<CertificateReport> {
    let c = trace_constants(problem)?;
    Ok(certify(&record.rows, &c, known.map(|k| k.f), &Tolerances::default())?)
}

/// Certifies trace rows read back from disk against the problem and optimum
/// the config describes. Also says whether failures should count.
pub fn certify_record_rows(config: &ExperimentConfig, rows: &[TraceRow]) -> Result<(CertificateReport, bool)> {
    config.validate()?;
    let problem = config.problem.build()?;
    let known = resolve_optimum(&problem, &config.known_optimum)?;
    let c = trace_constants(&problem)?;
    let report = certify(rows, &c, known.as_ref().map(|k| k.f), &Tolerances::default())?;
    let alpha = rows.iter().find_map(|r| r.alpha);
    Ok((report, certificates_asserted(&problem, &config.solver, alpha)))
}

/// Solves, certifies and summarizes without touching the filesystem.
pub fn execute(problem: &Problem, solver: &SolverSpec, stop: &StoppingRule, known: Option<&KnownOptimum>) -> Result<RunOutcome> {
    let start = Instant::now();
    let record = solve(problem, solver, stop, known)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let certificates = certify_record(problem, &record, known)?;
    let last = record.last();
    let summary = RunSummary {
        problem: problem.spec.kind.name().into(),
        scale: format!("{:?}", problem.spec.scale).to_lowercase(),
        seed: problem.spec.seed,
        dim: problem.dim(),
        solver: solver.label(),
        iterations: record.iterations,
        iterations_to_threshold: record.iterations_to_threshold,
        eps_rel: stop.eps_rel,
        oracle_calls: last.oracle_calls,
        final_objective: last.f_val,
        final_dist_sq: last.dist_sq,
        wall_time_s,
        meta: record.meta.clone(),
        certificates_asserted: certificates_asserted(problem, solver, record.meta.get("alpha").copied()),
        certificates,
    };
    Ok(RunOutcome { record, summary })
}

/// Output locations of a finished run.
#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub gnuplot: Option<PathBuf>,
}

pub fn write_outputs(out: &RunOutcome, trace: &Path, summary: &Path, gnuplot: bool) -> Result<WrittenFiles> {
    for p in [trace, summary] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    let file = fs::File::create(trace).map_err(|e| CliError::io(trace, e))?;
    out.record.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
        accel_core::Error::Csv(c) => CliError::io(trace, std::io::Error::other(c)),
        other => other.into(),
    })?;
    let json = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    fs::write(summary, json + "\n").map_err(|e| CliError::io(summary, e))?;
    let gp = if gnuplot {
        let path = trace.with_extension("gp");
        let name = trace.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        fs::write(&path, crate::plot::gnuplot_script(&name, &out.summary.solver)).map_err(|e| CliError::io(&path, e))?;
        Some(path)
    } else {
        None
    };
    Ok(WrittenFiles { trace: trace.to_path_buf(), summary: summary.to_path_buf(), gnuplot: gp })
}

/// Builds the problem, runs the solver and writes the outputs under `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<(RunOutcome, WrittenFiles)> {
    config.validate()?;
    let problem = config.problem.build()?;
    let known = resolve_optimum(&problem, &config.known_optimum)?;
    let outcome = execute(&problem, &config.solver, &config.stop, known.as_ref())?;
    let files = write_outputs(
        &outcome,
        &out_dir.join(&config.outputs.trace_csv),
        &out_dir.join(&config.outputs.summary),
        config.outputs.gnuplot,
    )?;
    Ok((outcome, files))
}
