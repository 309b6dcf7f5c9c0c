use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use janossy_core::ensemble::{ChainEnsemble, EnsembleOptions};
use janossy_core::janossy::{count_probability_complex, janossy_kernel_explicit, kth_extreme_distribution};
use janossy_core::kernels::correlation_kernel;
use janossy_core::measure_space::{SpaceKind, WindowFamily};
use janossy_core::oracle::{enumerate_density, OracleRecord};
use janossy_core::verify::{verify_suite, Suite, VerifyOptions};
use janossy_core::{Error, C64};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, PointSpec, Task};

const DEFAULT_OUT_DIR: &str = "janossy-out";
const DEFAULT_AGREEMENT: f64 = 1e-10;
const CONDITION_WARNING: f64 = 1e6;
/// One-point density at the ends of a quadrature interval, relative to its
/// maximum, above which the interval is reported as too narrow.
const BOUNDARY_DENSITY_WARNING: f64 = 1e-8;

pub struct RunArgs {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub budget: Option<u64>,
}

pub struct Summary {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Compute(Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(Error::Singular { .. }) => 3,
            Failure::Compute(Error::BudgetExceeded { .. }) => 4,
            Failure::Compute(_) => 2,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid config: {m}"),
            Failure::Compute(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

/// Everything a task produces before anything is written.
struct TaskOutput {
    results: Value,
    comparisons: Vec<OracleRecord>,
    files: Vec<(&'static str, String)>,
    lines: Vec<String>,
    warnings: Vec<String>,
    passed: bool,
}

impl TaskOutput {
    fn new(results: Value) -> Self {
        Self {
            results,
            comparisons: Vec::new(),
            files: Vec::new(),
            lines: Vec::new(),
            warnings: Vec::new(),
            passed: true,
        }
    }

    fn compare(&mut self, record: OracleRecord, agreement: f64) {
        if !(record.abs_err <= agreement) {
            self.passed = false;
            self.lines.push(format!(
                "FAIL {}: oracle {:?} vs closed form {:?} (abs error {:.3e})",
                record.quantity, record.oracle, record.closed_form, record.abs_err
            ));
        }
        self.comparisons.push(record);
    }
}

fn c(z: C64) -> Value {
    json!([z.re, z.im])
}

fn points_of(spec: &[PointSpec]) -> Vec<(usize, usize)> {
    spec.iter().map(|[l, x]| (*l, *x)).collect()
}

fn keyed_points(points: &[(usize, usize)]) -> Value {
    Value::Array(points.iter().map(|(l, x)| json!({"floor": l, "node": x})).collect())
}

fn label(points: &[(usize, usize)]) -> String {
    let inner: Vec<String> = points.iter().map(|(l, x)| format!("({l},{x})")).collect();
    format!("[{}]", inner.join(","))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    config.validate().map_err(Failure::Config)?;
    Ok(config)
}

fn window_family(config: &ExperimentConfig, ens: &ChainEnsemble) -> Result<WindowFamily, Failure> {
    if config.windows.is_empty() {
        return Ok(WindowFamily::empty(ens.space(), ens.floors()));
    }
    if config.windows.len() != ens.floors() {
        return Err(Failure::Config(format!(
            "{} windows for a model with {} floors",
            config.windows.len(),
            ens.floors()
        )));
    }
    WindowFamily::from_specs(ens.space(), &config.windows).map_err(|e| Failure::Config(e.to_string()))
}

fn ensemble_warnings(ens: &ChainEnsemble) -> Result<Vec<String>, Failure> {
    let mut warnings = Vec::new();
    if ens.gram_condition() > CONDITION_WARNING {
        warnings.push(format!("cond(A) = {:.3e} exceeds {CONDITION_WARNING:.0e}", ens.gram_condition()));
    }
    if let SpaceKind::Quadrature { interval, .. } = ens.space().kind() {
        let k = correlation_kernel(ens)?;
        let last = ens.nodes() - 1;
        for l in 0..ens.floors() {
            let rho: Vec<f64> = (0..ens.nodes()).map(|x| k.value(l, x, l, x).norm()).collect();
            let peak = rho.iter().copied().fold(0.0, f64::max);
            let edge = rho[0].max(rho[last]);
            if peak > 0.0 && edge > BOUNDARY_DENSITY_WARNING * peak {
                warnings.push(format!(
                    "floor {l}: one-point density at the ends of [{}, {}] is {:.1e} of its peak; the quadrature interval may be too narrow",
                    interval.0, interval.1,
                    edge / peak
                ));
            }
        }
    }
    Ok(warnings)
}

fn run_task(
    config: &ExperimentConfig,
    ens: Option<&ChainEnsemble>,
    options: EnsembleOptions,
    seed: Option<u64>,
) -> Result<TaskOutput, Failure> {
    let agreement = config.tolerances.agreement.unwrap_or(DEFAULT_AGREEMENT);
    let model = || ens.expect("validated: non-verify tasks carry a model");
    let mut out = match &config.task {
        Task::Correlations { points, oracle } => {
            let ens = model();
            let kernel = correlation_kernel(ens)?;
            let dist = if *oracle { Some(enumerate_density(ens)?) } else { None };
            let mut rows = Vec::new();
            let mut records = Vec::new();
            for spec in points {
                let pts = points_of(spec);
                let value = kernel.correlation_function(&pts)?;
                rows.push(json!({"points": keyed_points(&pts), "value": c(value)}));
                if let Some(d) = &dist {
                    records.push(OracleRecord::new(
                        seed.unwrap_or(0),
                        "model",
                        format!("rho{}", label(&pts)),
                        d.brute_correlation(&pts)?,
                        value,
                    ));
                }
            }
            let mut out = TaskOutput::new(json!({"correlations": rows}));
            for r in records {
                out.compare(r, agreement);
            }
            if config.output.kernel_csv {
                out.files.push(("kernel.csv", kernel.to_csv()));
            }
            out
        }
        Task::Janossy { points, counts, oracle } => {
            let ens = model();
            let wf = window_family(config, ens)?;
            let jk = janossy_kernel_explicit(ens, &wf)?;
            let dist = if *oracle { Some(enumerate_density(ens)?) } else { None };
            let mut densities = Vec::new();
            let mut records = Vec::new();
            for spec in points {
                let pts = points_of(spec);
                let value = jk.janossy_density(&pts)?;
                densities.push(json!({"points": keyed_points(&pts), "value": c(value)}));
                if let Some(d) = &dist {
                    records.push(OracleRecord::new(
                        seed.unwrap_or(0),
                        "model",
                        format!("J{}", label(&pts)),
                        d.brute_janossy(&wf, &pts)?,
                        value,
                    ));
                }
            }
            let mut probabilities = Vec::new();
            for k in counts {
                let value = count_probability_complex(ens, &wf, k)?;
                probabilities.push(json!({"counts": k, "probability": c(value)}));
                if let Some(d) = &dist {
                    records.push(OracleRecord::new(
                        seed.unwrap_or(0),
                        "model",
                        format!("Pr(counts={k:?})"),
                        d.brute_count_probability(&wf, k)?,
                        value,
                    ));
                }
            }
            let windows: Vec<Value> = wf.windows().iter().map(|w| json!(w.indices())).collect();
            let results = json!({
                "schema": "jk-janossy-1",
                "windows": windows,
                "constant": c(jk.constant()),
                "complement_condition": jk.complement_condition(),
                "densities": densities,
                "counts": probabilities,
            });
            let mut out = TaskOutput::new(results.clone());
            out.files.push(("janossy.json", pretty(&results)));
            for r in records {
                out.compare(r, agreement);
            }
            if config.output.kernel_csv {
                out.files.push(("kernel.csv", jk.kernel().to_csv()));
            }
            out
        }
        Task::Gap { oracle } => {
            let ens = model();
            let wf = window_family(config, ens)?;
            let zeros = vec![0; ens.floors()];
            let constant = count_probability_complex(ens, &wf, &zeros)?;
            let fredholm = correlation_kernel(ens)?.restrict(&wf)?.fredholm_det();
            let mut out = TaskOutput::new(json!({
                "windows": wf.describe(),
                "const": c(constant),
                "fredholm_det": c(fredholm),
            }));
            out.compare(
                OracleRecord::new(seed.unwrap_or(0), "model", "det(Id-K_I) vs const(I)", fredholm, constant),
                agreement,
            );
            if *oracle {
                let d = enumerate_density(ens)?;
                out.compare(
                    OracleRecord::new(
                        seed.unwrap_or(0),
                        "model",
                        "Pr(all windows empty)",
                        d.brute_count_probability(&wf, &zeros)?,
                        constant,
                    ),
                    agreement,
                );
            }
            out.lines.push(format!("const = {:e}", constant.re));
            out
        }
        Task::Extremes { floor, k, s_grid } => {
            let ens = model();
            let curve = kth_extreme_distribution(ens, *floor, *k, s_grid)?;
            let mut out = TaskOutput::new(json!({"extremes": curve}));
            out.files.push(("extremes.csv", curve.to_csv()));
            out
        }
        Task::Verify {
            suite,
            instances,
            seed: task_seed,
            force_full_windows,
        } => {
            let suite: Suite = suite.parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
            let seed = seed.or(*task_seed).unwrap_or(0);
            let opts = VerifyOptions {
                ensemble: options,
                tolerance: config.tolerances.agreement,
                force_full_windows: *force_full_windows,
            };
            let report = verify_suite(suite, *instances, seed, &opts)?;
            let mut out = TaskOutput::new(serde_json::to_value(&report).expect("report serializes"));
            out.lines = report.lines();
            out.lines.push(format!(
                "{} {suite}: {} instances, {} failing, {} expected errors, max error {:.3e} (tolerance {:.0e})",
                if report.passed { "PASS" } else { "FAIL" },
                report.instances,
                report.failures,
                report.expected_errors,
                report.max_error,
                report.tolerance
            ));
            out.passed = report.passed;
            out
        }
    };
    if let Some(ens) = ens {
        let mut w = ensemble_warnings(ens)?;
        w.append(&mut out.warnings);
        out.warnings = w;
    }
    Ok(out)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Writes `contents` next to its final name, then renames it into place.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, dir.join(name)).with_context(|| format!("renaming {} into place", tmp.display()))?;
    Ok(())
}

pub fn run(args: &RunArgs) -> Result<Summary, Failure> {
    let started = Instant::now();
    let config = load_config(&args.config)?;
    let seed = args.seed.or(config.seed);
    let options = EnsembleOptions {
        max_condition: config.tolerances.max_condition.unwrap_or(EnsembleOptions::default().max_condition),
        budget: args.budget.or(config.tolerances.budget).unwrap_or(EnsembleOptions::default().budget),
    };
    if options.budget == 0 {
        return Err(Failure::Config("budget must be positive".into()));
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let model = match (&config.model, seed) {
        (Some(m), Some(s)) => Some(m.with_seed(s)),
        (m, _) => m.clone(),
    };
    let ens = model.as_ref().map(|m| m.build(options)).transpose()?;
    let built = started.elapsed();
    let output = run_task(&config, ens.as_ref(), options, seed)?;
    let finished = started.elapsed();

    let ensemble = ens.as_ref().map(|e| {
        json!({
            "particles": e.particles(),
            "floors": e.floors(),
            "nodes": e.nodes(),
            "gram_condition": e.gram_condition(),
            "partition_function": c(e.partition_function()),
        })
    });
    let report = json!({
        "schema": "jk-report-1",
        "config": serde_json::to_value(&config).expect("config serializes"),
        "effective": {
            "seed": seed,
            "budget": options.budget,
            "max_condition": options.max_condition,
            "out": out_dir.display().to_string(),
        },
        "task": config.task.name(),
        "ensemble": ensemble,
        "results": output.results,
        "comparisons": output.comparisons,
        "warnings": output.warnings,
        "passed": output.passed,
    });
    let timings = json!({
        "threads": args.threads.unwrap_or_else(rayon::current_num_threads),
        "build_seconds": built.as_secs_f64(),
        "task_seconds": (finished - built).as_secs_f64(),
        "total_seconds": finished.as_secs_f64(),
    });

    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(Failure::Io)?;
    for (name, contents) in &output.files {
        write_atomic(&out_dir, name, contents).map_err(Failure::Io)?;
    }
    write_atomic(&out_dir, "report.json", &pretty(&report)).map_err(Failure::Io)?;
    write_atomic(&out_dir, "timings.json", &pretty(&timings)).map_err(Failure::Io)?;

    Ok(Summary {
        lines: output.lines,
        warnings: output.warnings,
        passed: output.passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Config("x".into()).exit_code(), 2);
        let singular = Error::Singular {
            matrix: "A".into(),
            condition: f64::INFINITY,
        };
        assert_eq!(Failure::from(singular).exit_code(), 3);
        let budget = Error::BudgetExceeded { required: 10, budget: 1 };
        assert_eq!(Failure::from(budget).exit_code(), 4);
        assert_eq!(Failure::from(Error::PointOutsideWindow { floor: 0, node: 1 }).exit_code(), 2);
    }

    #[test]
    fn failed_comparisons_flip_the_outcome() {
        let mut out = TaskOutput::new(Value::Null);
        out.compare(OracleRecord::new(0, "i", "q", C64::new(1.0, 0.0), C64::new(1.0, 0.0)), 1e-10);
        assert!(out.passed && out.lines.is_empty());
        out.compare(OracleRecord::new(0, "i", "q", C64::new(1.0, 0.0), C64::new(2.0, 0.0)), 1e-10);
        assert!(!out.passed);
        assert_eq!(out.lines.len(), 1);
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = std::env::temp_dir().join(format!("jk-atomic-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        write_atomic(&dir, "a.txt", "hello").unwrap();
        assert_eq!(fs::read_to_string(dir.join("a.txt")).unwrap(), "hello");
        assert!(!dir.join(".a.txt.tmp").exists());
        fs::remove_dir_all(&dir).unwrap();
    }
}
