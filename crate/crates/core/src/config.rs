//! Experiment configuration: a flat key/value document (TOML syntax, one
//! level of nesting only for the explicit collaboration matrix), expanded
//! and validated into a fully-resolved [`ExperimentConfig`].

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;

use crate::engine::Algo;

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_RADIUS: f64 = 0.35;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_GRAPHS: usize = 10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("missing required key `{0}`")]
    MissingField(&'static str),
    #[error("invalid `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    fn expand(&self, m: usize, field: &'static str) -> Result<Vec<f64>, ConfigError> {
        match self {
            ScalarOrList::Scalar(v) => Ok(vec![*v; m]),
            ScalarOrList::List(vs) => {
                if vs.len() != m {
                    return Err(invalid(
                        field,
                        format!("list has {} entries for {} agents", vs.len(), m),
                    ));
                }
                Ok(vs.clone())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum KeywordOrValue {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum KeywordOrList {
    List(Vec<f64>),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(alias = "M")]
    m: Option<usize>,
    eps: Option<ScalarOrList>,
    alpha: Option<ScalarOrList>,
    q: Option<KeywordOrList>,
    graph: Option<String>,
    radius: Option<f64>,
    graphs: Option<usize>,
    p: Option<Vec<Vec<f64>>>,
    algos: Option<Vec<String>>,
    trials: Option<usize>,
    eff_iters: Option<usize>,
    x_star: Option<KeywordOrValue>,
    b_grid: Option<Vec<f64>>,
    seed: Option<u64>,
    out_dir: Option<String>,
    emit: Option<Vec<String>>,
}

/// Network topology source for a run.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Connected geometric random graphs over the unit square.
    Geometric { radius: f64, count: usize },
    /// A fixed collaboration matrix (row-stochastic, zero diagonal).
    Explicit { p: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    /// Drawn uniformly per trial.
    Uniform,
    Fixed(f64),
}

/// Which CSV families a run writes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitSet {
    pub aggregate: bool,
    pub traces: bool,
    pub events: bool,
    pub diagnostics: bool,
}

impl Default for EmitSet {
    fn default() -> Self {
        EmitSet {
            aggregate: true,
            traces: true,
            events: true,
            diagnostics: true,
        }
    }
}

/// Fully expanded and validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
    /// None means uniform selection probabilities.
    pub q: Vec<f64>,
    pub graph: GraphSpec,
    pub algos: Vec<Algo>,
    pub trials: usize,
    pub graphs: usize,
    pub eff_iters: usize,
    pub x_star: TargetSpec,
    /// Explicit snapshot grid; None selects the default grid of deciles
    /// plus the two points straddling the trial's target.
    pub b_grid: Option<Vec<f64>>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub emit: EmitSet,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;

        let m = raw.m.ok_or(ConfigError::MissingField("m"))?;
        if m == 0 {
            return Err(invalid("m", "agent count must be at least 1"));
        }
        let eff_iters = raw.eff_iters.ok_or(ConfigError::MissingField("eff_iters"))?;
        if eff_iters == 0 {
            return Err(invalid("eff_iters", "horizon must be at least 1"));
        }
        let seed = raw.seed.ok_or(ConfigError::MissingField("seed"))?;

        let eps = raw
            .eps
            .as_ref()
            .ok_or(ConfigError::MissingField("eps"))?
            .expand(m, "eps")?;
        for (i, e) in eps.iter().enumerate() {
            if !(*e > 0.0 && *e <= 0.5) {
                return Err(invalid(
                    "eps",
                    format!("eps[{i}] = {e}: crossover probability must lie in (0, 0.5]"),
                ));
            }
        }
        if eps.iter().all(|e| *e >= 0.5) {
            return Err(invalid(
                "eps",
                "every agent has eps = 0.5; at least one crossover probability \
                 must be strictly below 0.5 for the network to learn",
            ));
        }

        let alpha = match &raw.alpha {
            Some(a) => a.expand(m, "alpha")?,
            None => vec![DEFAULT_ALPHA; m],
        };
        for (i, a) in alpha.iter().enumerate() {
            if !(*a > 0.0 && *a <= 1.0) {
                return Err(invalid(
                    "alpha",
                    format!("alpha[{i}] = {a}: mixing weight must lie in (0, 1]"),
                ));
            }
        }

        let q = match &raw.q {
            None => vec![1.0 / m as f64; m],
            Some(KeywordOrList::Keyword(k)) if k == "uniform" => vec![1.0 / m as f64; m],
            Some(KeywordOrList::Keyword(k)) => {
                return Err(invalid("q", format!("unknown keyword `{k}`")));
            }
            Some(KeywordOrList::List(vs)) => {
                if vs.len() != m {
                    return Err(invalid(
                        "q",
                        format!("list has {} entries for {m} agents", vs.len()),
                    ));
                }
                if vs.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(invalid("q", "selection probabilities must be nonnegative"));
                }
                let sum: f64 = vs.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(invalid("q", format!("entries sum to {sum}, expected 1")));
                }
                vs.clone()
            }
        };

        let graph_kind = raw.graph.as_deref().unwrap_or("geometric");
        let graph = match graph_kind {
            "geometric" => {
                if raw.p.is_some() {
                    return Err(invalid("p", "explicit matrix given for a geometric graph"));
                }
                let radius = raw.radius.unwrap_or(DEFAULT_RADIUS);
                if !(radius > 0.0) {
                    return Err(invalid("radius", format!("radius {radius} must be positive")));
                }
                GraphSpec::Geometric {
                    radius,
                    count: raw.graphs.unwrap_or(DEFAULT_GRAPHS),
                }
            }
            "explicit" => {
                let p = raw.p.clone().ok_or(ConfigError::MissingField("p"))?;
                validate_p(&p, m)?;
                if raw.graphs.unwrap_or(1) != 1 {
                    return Err(invalid(
                        "graphs",
                        "an explicit topology admits exactly one graph",
                    ));
                }
                if raw.radius.is_some() {
                    return Err(invalid("radius", "radius is only used by geometric graphs"));
                }
                GraphSpec::Explicit { p }
            }
            other => {
                return Err(invalid(
                    "graph",
                    format!("unknown graph type `{other}` (expected `geometric` or `explicit`)"),
                ));
            }
        };
        let graphs = match &graph {
            GraphSpec::Geometric { count, .. } => *count,
            GraphSpec::Explicit { .. } => 1,
        };
        if graphs == 0 {
            return Err(invalid("graphs", "graph count must be at least 1"));
        }

        let algos = match &raw.algos {
            None => Algo::ALL.to_vec(),
            Some(names) => {
                if names.is_empty() {
                    return Err(invalid("algos", "at least one algorithm is required"));
                }
                let mut out = Vec::new();
                for name in names {
                    let algo = Algo::parse(name).ok_or_else(|| {
                        invalid(
                            "algos",
                            format!(
                                "unknown algorithm `{name}` (expected async, sync, none, central)"
                            ),
                        )
                    })?;
                    if !out.contains(&algo) {
                        out.push(algo);
                    }
                }
                out
            }
        };
        if m < 2 && algos.contains(&Algo::Async) {
            return Err(invalid("algos", "async requires at least 2 agents"));
        }

        let trials = raw.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(invalid("trials", "trial count must be at least 1"));
        }

        let x_star = match &raw.x_star {
            None => TargetSpec::Uniform,
            Some(KeywordOrValue::Keyword(k)) if k == "uniform" => TargetSpec::Uniform,
            Some(KeywordOrValue::Keyword(k)) => {
                return Err(invalid("x_star", format!("unknown keyword `{k}`")));
            }
            Some(KeywordOrValue::Value(v)) => {
                if !(0.0..=1.0).contains(v) {
                    return Err(invalid(
                        "x_star",
                        format!("target {v} outside the unit interval"),
                    ));
                }
                TargetSpec::Fixed(*v)
            }
        };

        let b_grid = match &raw.b_grid {
            None => None,
            Some(grid) => {
                if grid.is_empty() {
                    return Err(invalid("b_grid", "grid must not be empty"));
                }
                for b in grid {
                    if !(0.0..=1.0).contains(b) {
                        return Err(invalid(
                            "b_grid",
                            format!("grid point {b} outside the unit interval"),
                        ));
                    }
                }
                Some(grid.clone())
            }
        };

        let emit = match &raw.emit {
            None => EmitSet::default(),
            Some(names) => {
                let mut set = EmitSet {
                    aggregate: false,
                    traces: false,
                    events: false,
                    diagnostics: false,
                };
                for name in names {
                    match name.as_str() {
                        "aggregate" => set.aggregate = true,
                        "traces" => set.traces = true,
                        "events" => set.events = true,
                        "diagnostics" => set.diagnostics = true,
                        other => {
                            return Err(invalid(
                                "emit",
                                format!(
                                    "unknown output `{other}` (expected aggregate, traces, \
                                     events, diagnostics)"
                                ),
                            ));
                        }
                    }
                }
                set
            }
        };

        Ok(ExperimentConfig {
            m,
            eps,
            alpha,
            q,
            graph,
            algos,
            trials,
            graphs,
            eff_iters,
            x_star,
            b_grid,
            seed,
            out_dir: PathBuf::from(raw.out_dir.unwrap_or_else(|| "out".to_string())),
            emit,
        })
    }

    /// Snapshot grid for one trial: the configured grid, or the default
    /// deciles plus the two clamped points straddling the target.
    pub fn resolve_b_grid(&self, x_star: f64) -> Vec<f64> {
        match &self.b_grid {
            Some(grid) => grid.clone(),
            None => {
                let mut grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
                grid.push((x_star - 0.05).clamp(0.0, 1.0));
                grid.push((x_star + 0.05).clamp(0.0, 1.0));
                grid
            }
        }
    }

    /// Number of grid columns in trace CSV files (constant per config).
    pub fn grid_len(&self) -> usize {
        match &self.b_grid {
            Some(grid) => grid.len(),
            None => 11,
        }
    }

    /// FNV-1a hash of the expanded settings, recorded into traces.
    pub fn fingerprint(&self) -> u64 {
        let canon = format!("{self:?}");
        let mut h: u64 = 0xcbf29ce484222325;
        for byte in canon.as_bytes() {
            h ^= *byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

fn validate_p(p: &[Vec<f64>], m: usize) -> Result<(), ConfigError> {
    if p.len() != m {
        return Err(invalid(
            "p",
            format!("matrix has {} rows for {m} agents", p.len()),
        ));
    }
    for (r, row) in p.iter().enumerate() {
        if row.len() != m {
            return Err(invalid(
                "p",
                format!("row {r} has {} entries, expected {m}", row.len()),
            ));
        }
        if row[r] != 0.0 {
            return Err(invalid(
                "p",
                format!("diagonal entry p[{r}][{r}] = {} must be zero", row[r]),
            ));
        }
        if row.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(invalid("p", format!("row {r} has a negative entry")));
        }
        let sum: f64 = row.iter().sum();
        let expected = if m == 1 { 0.0 } else { 1.0 };
        if (sum - expected).abs() > 1e-9 {
            return Err(invalid(
                "p",
                format!("row {r} sums to {sum}, expected {expected} (row-stochastic)"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_applies_defaults() {
        let cfg = ExperimentConfig::parse("m = 20\neps = 0.45\neff_iters = 200\nseed = 1\n")
            .unwrap();
        assert_eq!(cfg.m, 20);
        assert_eq!(cfg.eps, vec![0.45; 20]);
        assert_eq!(cfg.alpha, vec![0.5; 20]);
        assert_eq!(cfg.q, vec![0.05; 20]);
        assert_eq!(
            cfg.graph,
            GraphSpec::Geometric {
                radius: 0.35,
                count: 10
            }
        );
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.graphs, 10);
        assert_eq!(cfg.algos, Algo::ALL.to_vec());
        assert_eq!(cfg.x_star, TargetSpec::Uniform);
        assert_eq!(cfg.out_dir, PathBuf::from("out"));
        assert_eq!(cfg.grid_len(), 11);
    }

    #[test]
    fn eps_out_of_range_names_the_field() {
        let err = ExperimentConfig::parse("m = 2\neps = 0.6\neff_iters = 10\nseed = 1\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("eps"), "{msg}");
        assert!(msg.contains("(0, 0.5]"), "{msg}");
    }

    #[test]
    fn all_unreliable_agents_rejected() {
        let err = ExperimentConfig::parse("m = 3\neps = 0.5\neff_iters = 10\nseed = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains("below 0.5"));
    }

    #[test]
    fn heterogeneous_eps_list_accepted() {
        let mut eps = vec![0.05; 3];
        eps.extend(vec![0.45; 17]);
        let text = format!(
            "m = 20\neps = {eps:?}\neff_iters = 100\nseed = 3\n",
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.eps.len(), 20);
        assert_eq!(cfg.eps.iter().filter(|e| **e == 0.05).count(), 3);
        // All agents are strictly informative here.
        assert!(cfg.eps.iter().all(|e| *e < 0.5));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::parse("m = 2\neps = 0.4\neff_iters = 5\nseed = 1\nbogus = 3\n")
            .unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn missing_mandatory_field_named() {
        let err = ExperimentConfig::parse("m = 2\neps = 0.4\nseed = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::MissingField("eff_iters")));
    }

    #[test]
    fn explicit_p_validated() {
        let good = "m = 2\neps = 0.4\neff_iters = 5\nseed = 1\ngraph = \"explicit\"\np = [[0.0, 1.0], [1.0, 0.0]]\n";
        let cfg = ExperimentConfig::parse(good).unwrap();
        assert_eq!(cfg.graphs, 1);

        let bad = "m = 2\neps = 0.4\neff_iters = 5\nseed = 1\ngraph = \"explicit\"\np = [[0.5, 0.5], [1.0, 0.0]]\n";
        let err = ExperimentConfig::parse(bad).unwrap_err();
        assert!(err.to_string().contains("diagonal"));

        let nonstoch = "m = 2\neps = 0.4\neff_iters = 5\nseed = 1\ngraph = \"explicit\"\np = [[0.0, 0.7], [1.0, 0.0]]\n";
        let err = ExperimentConfig::parse(nonstoch).unwrap_err();
        assert!(err.to_string().contains("row-stochastic"));
    }

    #[test]
    fn async_with_single_agent_rejected() {
        let err = ExperimentConfig::parse(
            "m = 1\neps = 0.01\neff_iters = 5\nseed = 1\nalgos = [\"async\"]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("async"));
    }

    #[test]
    fn single_agent_no_sharing_accepted() {
        let cfg = ExperimentConfig::parse(
            "m = 1\neps = 0.01\neff_iters = 20\nseed = 1\nalgos = [\"none\"]\ntrials = 1\ngraphs = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.algos, vec![Algo::NoSharing]);
        assert_eq!(cfg.m, 1);
    }

    #[test]
    fn default_grid_straddles_target() {
        let cfg = ExperimentConfig::parse("m = 2\neps = 0.4\neff_iters = 5\nseed = 1\n").unwrap();
        let grid = cfg.resolve_b_grid(0.62);
        assert_eq!(grid.len(), 11);
        assert!((grid[9] - 0.57).abs() < 1e-12);
        assert!((grid[10] - 0.67).abs() < 1e-12);
        let clamped = cfg.resolve_b_grid(0.01);
        assert_eq!(clamped[9], 0.0);
    }

    #[test]
    fn fingerprint_tracks_settings() {
        let a = ExperimentConfig::parse("m = 2\neps = 0.4\neff_iters = 5\nseed = 1\n").unwrap();
        let b = ExperimentConfig::parse("m = 2\neps = 0.4\neff_iters = 5\nseed = 2\n").unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
