//! Monte-Carlo orchestration over graphs, trials, and algorithms, plus the
//! CSV exports behind the comparison figures.
//!
//! Stream discipline: every `(graph, trial, algorithm)` work item owns an
//! independent random stream keyed by the master seed and its indices, so
//! runs are reproducible byte-for-byte and trials can execute in parallel.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ExperimentConfig, GraphSpec, TargetSpec};
use crate::diagnostics::{self, DiagnosticsError, Violation};
use crate::engine::{self, Algo, EngineError, RunSetup, Trace};
use crate::network::{geometric_random_graph, CollaborationModel, NetworkError};

const TAG_GRAPH: u64 = 1;
const TAG_TARGET: u64 = 2;
const TAG_ALGO_BASE: u64 = 16;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("run failed at graph {graph}, trial {trial}, algo {algo}: {source}")]
    RunFailed {
        graph: usize,
        trial: usize,
        algo: &'static str,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("diagnose requires `async` among the configured algorithms")]
    DiagnoseNeedsAsync,
    #[error("diagnostics failed at graph {graph}, trial {trial}: {violation}")]
    InvariantViolated {
        graph: usize,
        trial: usize,
        violation: Violation,
    },
}

fn run_failed(
    graph: usize,
    trial: usize,
    algo: &'static str,
    source: impl std::error::Error + Send + Sync + 'static,
) -> ExperimentError {
    ExperimentError::RunFailed {
        graph,
        trial,
        algo,
        source: Box::new(source),
    }
}

/// Independent stream keyed by `(master seed, graph, trial, tag)`.
fn stream(master: u64, graph: u64, trial: u64, tag: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&graph.to_le_bytes());
    seed[16..24].copy_from_slice(&trial.to_le_bytes());
    seed[24..32].copy_from_slice(&tag.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

fn algo_tag(algo: Algo) -> u64 {
    TAG_ALGO_BASE
        + match algo {
            Algo::Async => 0,
            Algo::Sync => 1,
            Algo::NoSharing => 2,
            Algo::Centralized => 3,
        }
}

/// Builds the collaboration model for graph index `g`.
fn model_for_graph(cfg: &ExperimentConfig, g: usize) -> Result<CollaborationModel, NetworkError> {
    match &cfg.graph {
        GraphSpec::Explicit { p } => CollaborationModel::new(
            cfg.q.clone(),
            p.clone(),
            cfg.alpha.clone(),
            cfg.eps.clone(),
        ),
        GraphSpec::Geometric { radius, .. } => {
            let mut rng = stream(cfg.seed, g as u64, 0, TAG_GRAPH);
            let graph = geometric_random_graph(cfg.m, *radius, &mut rng)?;
            // Configured selection probabilities override the generator's
            // uniform default.
            CollaborationModel::new(
                cfg.q.clone(),
                graph.p,
                cfg.alpha.clone(),
                cfg.eps.clone(),
            )
        }
    }
}

fn target_for_trial(cfg: &ExperimentConfig, g: usize, trial: usize) -> f64 {
    match cfg.x_star {
        TargetSpec::Fixed(v) => v,
        TargetSpec::Uniform => {
            let mut rng = stream(cfg.seed, g as u64, trial as u64, TAG_TARGET);
            rng.gen()
        }
    }
}

struct WorkItem {
    graph: usize,
    trial: usize,
    algo: Algo,
}

struct WorkOutput {
    algo: Algo,
    /// Per effective iteration 1..=H: mean over agents of squared median
    /// error, and max over agents of squared median error.
    sq_mean: Vec<f64>,
    sq_max: Vec<f64>,
    trace_rows: Option<String>,
    event_rows: Option<String>,
    diag_rows: Option<String>,
}

fn float(x: f64) -> String {
    format!("{x}")
}

fn format_trace_rows(trace: &Trace, global_trial: usize, graph: usize, out: &mut String) {
    for snap in &trace.snapshots {
        for (agent, a) in snap.agents.iter().enumerate() {
            write!(
                out,
                "{},{},{},{},{},{},{},{}",
                global_trial,
                graph,
                trace.algo.as_str(),
                snap.eff_iter,
                agent,
                float(a.median),
                float(a.mean),
                float(a.log_density_at_target),
            )
            .unwrap();
            for c in &a.cdf {
                write!(out, ",{}", float(*c)).unwrap();
            }
            out.push('\n');
        }
    }
}

fn format_event_rows(trace: &Trace, global_trial: usize, out: &mut String) {
    for ev in &trace.events {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            global_trial,
            ev.t,
            ev.i,
            ev.j,
            float(ev.x_hat),
            ev.z as u8,
            ev.y as u8,
        )
        .unwrap();
    }
}

fn format_diag_rows(rows: &[diagnostics::DiagRow], global_trial: usize, out: &mut String) {
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            global_trial,
            row.eff_iter,
            float(row.b),
            float(row.dynamic_range),
            float(row.lambda),
            float(row.martingale_residual),
            float(row.lemma5_gap),
            float(row.log_belief),
        )
        .unwrap();
    }
}

fn squared_errors(trace: &Trace, eff_iters: usize) -> (Vec<f64>, Vec<f64>) {
    let mut sq_mean = Vec::with_capacity(eff_iters);
    let mut sq_max = Vec::with_capacity(eff_iters);
    for snap in trace.snapshots.iter().skip(1) {
        let mut sum = 0.0;
        let mut max = 0.0f64;
        for a in &snap.agents {
            let e = a.median - trace.x_star;
            sum += e * e;
            max = max.max(e * e);
        }
        sq_mean.push(sum / snap.agents.len() as f64);
        sq_max.push(max);
    }
    (sq_mean, sq_max)
}

/// Artifacts written by a command.
#[derive(Debug)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, ExperimentError> {
    let path = dir.join(name);
    let io_err = |source| ExperimentError::Io {
        path: path.clone(),
        source,
    };
    let file = fs::File::create(&path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(content.as_bytes())
        .and_then(|_| w.flush())
        .map_err(io_err)?;
    Ok(path)
}

/// Runs every configured `(graph, trial, algorithm)` combination and writes
/// the enabled CSV families into the output directory:
///
/// - `aggregate.csv`: pooled average/worst-case RMSE per effective iteration
///   per algorithm.
/// - `traces.csv`: one row per (snapshot, agent).
/// - `events.csv`: the asynchronous interaction log.
/// - `diagnostics.csv`: the theory-check series for asynchronous trials.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, ExperimentError> {
    let fingerprint = cfg.fingerprint();
    let models: Vec<CollaborationModel> = (0..cfg.graphs)
        .map(|g| model_for_graph(cfg, g))
        .collect::<Result<_, _>>()?;

    let mut items = Vec::with_capacity(cfg.graphs * cfg.trials * cfg.algos.len());
    for graph in 0..cfg.graphs {
        for trial in 0..cfg.trials {
            for &algo in &cfg.algos {
                items.push(WorkItem { graph, trial, algo });
            }
        }
    }

    let want_diag = cfg.emit.diagnostics;
    let outputs: Vec<WorkOutput> = items
        .par_iter()
        .map(|item| -> Result<WorkOutput, ExperimentError> {
            let model = &models[item.graph];
            let x_star = target_for_trial(cfg, item.graph, item.trial);
            let b_grid = cfg.resolve_b_grid(x_star);
            let setup = RunSetup {
                model,
                x_star,
                b_grid: &b_grid,
                eff_iters: cfg.eff_iters,
                seed: cfg.seed,
                fingerprint,
                priors: None,
            };
            let mut rng = stream(
                cfg.seed,
                item.graph as u64,
                item.trial as u64,
                algo_tag(item.algo),
            );
            let global_trial = item.graph * cfg.trials + item.trial;
            let fail =
                |e: EngineError| run_failed(item.graph, item.trial, item.algo.as_str(), e);

            let (trace, diag_rows) = if item.algo == Algo::Async && want_diag {
                let out = diagnostics::run_with_diagnostics(&setup, &mut rng).map_err(
                    |e: DiagnosticsError| {
                        run_failed(item.graph, item.trial, item.algo.as_str(), e)
                    },
                )?;
                let mut rows = String::new();
                format_diag_rows(&out.rows, global_trial, &mut rows);
                (out.trace, Some(rows))
            } else {
                (engine::run(item.algo, &setup, &mut rng).map_err(fail)?, None)
            };

            let (sq_mean, sq_max) = squared_errors(&trace, cfg.eff_iters);
            let trace_rows = cfg.emit.traces.then(|| {
                let mut rows = String::new();
                format_trace_rows(&trace, global_trial, item.graph, &mut rows);
                rows
            });
            let event_rows = (cfg.emit.events && item.algo == Algo::Async).then(|| {
                let mut rows = String::new();
                format_event_rows(&trace, global_trial, &mut rows);
                rows
            });
            Ok(WorkOutput {
                algo: item.algo,
                sq_mean,
                sq_max,
                trace_rows,
                event_rows,
                diag_rows,
            })
        })
        .collect::<Result<_, _>>()?;

    fs::create_dir_all(&cfg.out_dir).map_err(|source| ExperimentError::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let mut files = Vec::new();

    if cfg.emit.aggregate {
        let runs_per_algo = (cfg.graphs * cfg.trials) as f64;
        let mut content = String::from("algo,eff_iter,rmse_avg,rmse_max\n");
        for &algo in &cfg.algos {
            let mut avg_acc = vec![0.0; cfg.eff_iters];
            let mut max_acc = vec![0.0; cfg.eff_iters];
            for out in outputs.iter().filter(|o| o.algo == algo) {
                for k in 0..cfg.eff_iters {
                    avg_acc[k] += out.sq_mean[k];
                    max_acc[k] += out.sq_max[k];
                }
            }
            for k in 0..cfg.eff_iters {
                writeln!(
                    content,
                    "{},{},{},{}",
                    algo.as_str(),
                    k + 1,
                    float((avg_acc[k] / runs_per_algo).sqrt()),
                    float((max_acc[k] / runs_per_algo).sqrt()),
                )
                .unwrap();
            }
        }
        files.push(write_file(&cfg.out_dir, "aggregate.csv", &content)?);
    }

    if cfg.emit.traces {
        let mut content = String::from("trial,graph,algo,eff_iter,agent,median_est,mean_est,logp_at_xstar");
        for k in 1..=cfg.grid_len() {
            write!(content, ",cdf_b{k}").unwrap();
        }
        content.push('\n');
        for out in &outputs {
            content.push_str(out.trace_rows.as_deref().unwrap_or(""));
        }
        files.push(write_file(&cfg.out_dir, "traces.csv", &content)?);
    }

    if cfg.emit.events {
        let mut content = String::from("trial,t,i,j,x_hat,z,y\n");
        for out in &outputs {
            content.push_str(out.event_rows.as_deref().unwrap_or(""));
        }
        files.push(write_file(&cfg.out_dir, "events.csv", &content)?);
    }

    if cfg.emit.diagnostics {
        let mut content = diag_header();
        for out in &outputs {
            content.push_str(out.diag_rows.as_deref().unwrap_or(""));
        }
        files.push(write_file(&cfg.out_dir, "diagnostics.csv", &content)?);
    }

    Ok(RunArtifacts {
        out_dir: cfg.out_dir.clone(),
        files,
    })
}

fn diag_header() -> String {
    String::from("trial,eff_iter,b,V_t,lambda_t,mart_residual,lemma5_gap,logp_drift\n")
}

/// Runs the asynchronous algorithm with the full diagnostics series for
/// every configured `(graph, trial)`, writes `diagnostics.csv`, and fails
/// with named coordinates if any hard invariant breaks.
pub fn diagnose(cfg: &ExperimentConfig) -> Result<RunArtifacts, ExperimentError> {
    if !cfg.algos.contains(&Algo::Async) {
        return Err(ExperimentError::DiagnoseNeedsAsync);
    }
    let fingerprint = cfg.fingerprint();
    let models: Vec<CollaborationModel> = (0..cfg.graphs)
        .map(|g| model_for_graph(cfg, g))
        .collect::<Result<_, _>>()?;

    let items: Vec<(usize, usize)> = (0..cfg.graphs)
        .flat_map(|g| (0..cfg.trials).map(move |t| (g, t)))
        .collect();
    let results: Vec<(String, Option<Violation>, usize, usize)> = items
        .par_iter()
        .map(|&(graph, trial)| {
            let x_star = target_for_trial(cfg, graph, trial);
            let b_grid = cfg.resolve_b_grid(x_star);
            let setup = RunSetup {
                model: &models[graph],
                x_star,
                b_grid: &b_grid,
                eff_iters: cfg.eff_iters,
                seed: cfg.seed,
                fingerprint,
                priors: None,
            };
            let mut rng = stream(cfg.seed, graph as u64, trial as u64, algo_tag(Algo::Async));
            let out = diagnostics::run_with_diagnostics(&setup, &mut rng)
                .map_err(|e| run_failed(graph, trial, "async", e))?;
            let mut rows = String::new();
            format_diag_rows(&out.rows, graph * cfg.trials + trial, &mut rows);
            Ok((rows, out.violation, graph, trial))
        })
        .collect::<Result<_, ExperimentError>>()?;

    fs::create_dir_all(&cfg.out_dir).map_err(|source| ExperimentError::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let mut content = diag_header();
    for (rows, _, _, _) in &results {
        content.push_str(rows);
    }
    let path = write_file(&cfg.out_dir, "diagnostics.csv", &content)?;

    for (_, violation, graph, trial) in results {
        if let Some(violation) = violation {
            return Err(ExperimentError::InvariantViolated {
                graph,
                trial,
                violation,
            });
        }
    }
    Ok(RunArtifacts {
        out_dir: cfg.out_dir.clone(),
        files: vec![path],
    })
}

/// Edge list (`i j` per line) followed by node coordinates (`i x y` per
/// line) of one connected geometric graph, matching the layout used by the
/// experiment runner for graph index 0 under the same seed.
pub fn gengraph_text(m: usize, radius: f64, seed: u64) -> Result<String, ExperimentError> {
    let mut rng = stream(seed, 0, 0, TAG_GRAPH);
    let graph = geometric_random_graph(m, radius, &mut rng)?;
    let mut out = String::new();
    for (i, j) in &graph.edges {
        writeln!(out, "{i} {j}").unwrap();
    }
    for (i, (x, y)) in graph.coords.iter().enumerate() {
        writeln!(out, "{i} {} {}", float(*x), float(*y)).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn streams_are_independent_per_tag() {
        let a: Vec<u64> = {
            let mut r = stream(1, 0, 0, TAG_GRAPH);
            (0..4).map(|_| r.gen()).collect()
        };
        let b: Vec<u64> = {
            let mut r = stream(1, 0, 0, TAG_TARGET);
            (0..4).map(|_| r.gen()).collect()
        };
        let c: Vec<u64> = {
            let mut r = stream(1, 0, 1, TAG_GRAPH);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn graph_is_shared_across_trials_and_algos() {
        let cfg = parse("m = 6\neps = 0.4\neff_iters = 2\nseed = 9\ntrials = 3\ngraphs = 2\n");
        let m0 = model_for_graph(&cfg, 0).unwrap();
        let m0_again = model_for_graph(&cfg, 0).unwrap();
        let m1 = model_for_graph(&cfg, 1).unwrap();
        assert_eq!(m0, m0_again);
        assert_ne!(m0, m1);
    }

    #[test]
    fn target_shared_across_algos_fixed_honored() {
        let cfg = parse("m = 2\neps = 0.4\neff_iters = 2\nseed = 5\nx_star = 0.31\n");
        assert_eq!(target_for_trial(&cfg, 0, 0), 0.31);
        let cfg = parse("m = 2\neps = 0.4\neff_iters = 2\nseed = 5\n");
        let a = target_for_trial(&cfg, 1, 7);
        let b = target_for_trial(&cfg, 1, 7);
        let c = target_for_trial(&cfg, 1, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn gengraph_text_parses_back() {
        let text = gengraph_text(8, 0.6, 3).unwrap();
        let mut edges = 0;
        let mut coords = 0;
        for line in text.lines() {
            let fields: Vec<&str> = line.split(' ').collect();
            match fields.len() {
                2 => {
                    edges += 1;
                    let i: usize = fields[0].parse().unwrap();
                    let j: usize = fields[1].parse().unwrap();
                    assert!(i < j && j < 8);
                }
                3 => {
                    coords += 1;
                    let x: f64 = fields[1].parse().unwrap();
                    let y: f64 = fields[2].parse().unwrap();
                    assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
                }
                n => panic!("unexpected field count {n}"),
            }
        }
        assert_eq!(coords, 8);
        assert!(edges >= 7, "a connected graph needs at least m-1 edges");
    }
}
