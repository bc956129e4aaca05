//! Command implementations behind the `signet` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use signet_core::analysis::predict;
use signet_core::circuit::{equivalent_edge_table, CircuitError};
use signet_core::edgefn::EdgeFunction;
use signet_core::graph::{Graph, GraphError};
use signet_core::grid::Grid;
use signet_core::sim::{self, OutcomeClass, SimError, StopReason};
use thiserror::Error;

pub mod config;

pub use config::{load_config, parse_config, EqfunSpec, NetworkConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("enumeration cap exceeded: {0}")]
    Cap(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 1,
            Self::Parse(_) | Self::Validation(_) => 2,
            Self::Solver(_) => 3,
            Self::Cap(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Parse(_) => "parse",
            Self::Validation(_) => "validation",
            Self::Solver(_) => "solver",
            Self::Cap(_) => "cap",
        }
    }

    /// Single machine-readable line for stderr.
    pub fn error_line(&self) -> String {
        format!(
            "error kind={} code={} message={:?}",
            self.kind(),
            self.exit_code(),
            self.to_string()
        )
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::NoConvergence { .. } => CliError::Solver(e.to_string()),
            CircuitError::Graph(GraphError::CapExceeded { .. }) => CliError::Cap(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NonFiniteState { .. } => CliError::Solver(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Classify,
    Eqfun,
    Predict,
}

/// Grid overrides from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridArgs {
    pub half_width: Option<f64>,
    pub samples: Option<usize>,
}

impl GridArgs {
    fn grid(&self, fallback: (f64, usize)) -> Result<Grid, CliError> {
        let n = self.half_width.unwrap_or(fallback.0);
        let m = self.samples.unwrap_or(fallback.1);
        Grid::new(n, m).map_err(|e| CliError::Validation(e.to_string()))
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Runs `command` on the config at `config_path`, writing into `out_dir`.
/// Returns the files written.
pub fn run(
    command: Command,
    config_path: &Path,
    out_dir: &Path,
    grid: GridArgs,
) -> Result<Vec<PathBuf>, CliError> {
    let cfg = load_config(config_path)?;
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    match command {
        Command::Simulate => simulate(&cfg, out_dir),
        Command::Classify => classify(&cfg, out_dir, grid),
        Command::Eqfun => eqfun(&cfg, out_dir, grid),
        Command::Predict => predict_report(&cfg, out_dir, grid),
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_list(vs: &[f64]) -> String {
    vs.iter().map(|&v| fmt_f(v)).collect::<Vec<_>>().join(",")
}

fn fmt_nodes(ns: &[usize]) -> String {
    ns.iter()
        .map(|n| (n + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Simulates from `initial_state`; writes `trajectory.csv` and `outcome.txt`.
pub fn simulate(cfg: &NetworkConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let x0 = cfg
        .initial_state
        .as_ref()
        .ok_or_else(|| CliError::Validation("simulate needs `initial_state`".into()))?;
    let tr = sim::simulate(&cfg.network, x0, &cfg.sim)?;
    let outcome = sim::outcome(&cfg.network, &tr, &cfg.sim)?;

    let mut csv = Vec::new();
    tr.write_csv(&mut csv).expect("writing to memory");
    let csv = String::from_utf8(csv).expect("ascii output");

    let mut report = String::new();
    let r = &mut report;
    let _ = writeln!(r, "outcome: {}", outcome.class.label());
    let stop = match tr.stop {
        StopReason::EndTime => "end-time",
        StopReason::Steady => "steady",
        StopReason::Blowup => "blowup",
    };
    let _ = writeln!(r, "stop_reason: {stop}");
    let _ = writeln!(r, "final_time: {}", fmt_f(tr.final_time()));
    let _ = writeln!(r, "final_u_norm: {}", fmt_f(tr.final_u_norm));
    let _ = writeln!(r, "final_state: {}", fmt_list(tr.final_state()));
    match &outcome.class {
        OutcomeClass::Agreement { value } => {
            let _ = writeln!(r, "cluster_count: 1");
            let _ = writeln!(r, "agreement_value: {}", fmt_f(*value));
        }
        OutcomeClass::Clustering { clusters } => {
            let _ = writeln!(r, "cluster_count: {}", clusters.len());
            for (i, c) in clusters.iter().enumerate() {
                let _ = writeln!(r, "cluster_{}_nodes: {}", i + 1, fmt_nodes(&c.nodes));
                let _ = writeln!(r, "cluster_{}_value: {}", i + 1, fmt_f(c.value));
            }
        }
        OutcomeClass::Divergence | OutcomeClass::Undecided => {}
    }
    if let Some(z) = &outcome.steady_tension {
        let _ = writeln!(r, "steady_tension: {}", fmt_list(z));
    }

    Ok(vec![
        write_file(out_dir.join("trajectory.csv"), &csv)?,
        write_file(out_dir.join("outcome.txt"), &report)?,
    ])
}

/// Per-edge sign class, equilibria interval and monotonicity in
/// `classification.csv`.
pub fn classify(
    cfg: &NetworkConfig,
    out_dir: &Path,
    grid: GridArgs,
) -> Result<Vec<PathBuf>, CliError> {
    let grid = grid.grid((100.0, 2001))?;
    let mut csv = String::from(
        "edge,sign,margin,witness,eq_lower,eq_upper,monotone,strictly_increasing,unbounded,grid_n,grid_m\n",
    );
    for (k, f) in cfg.network.edge_functions().iter().enumerate() {
        let class = f.classify_sign(&grid);
        let mono = f.monotonicity(&grid);
        let (lo, hi) = match f.equilibria() {
            Ok(iv) => (fmt_f(iv.lower), fmt_f(iv.upper)),
            Err(_) => (String::new(), String::new()),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            k + 1,
            class.sign,
            fmt_f(class.margin),
            class.witness.map(fmt_f).unwrap_or_default(),
            lo,
            hi,
            mono.nondecreasing,
            mono.strictly_increasing,
            mono.unbounded,
            grid.half_width(),
            grid.samples()
        );
    }
    Ok(vec![write_file(out_dir.join("classification.csv"), &csv)?])
}

/// The two-terminal network named by the `eqfun` section.
pub fn eqfun_network(
    cfg: &NetworkConfig,
) -> Result<(Graph, Vec<EdgeFunction>, &EqfunSpec), CliError> {
    let spec = cfg
        .eqfun
        .as_ref()
        .ok_or_else(|| CliError::Validation("eqfun needs an `eqfun` section".into()))?;
    let g = cfg.network.graph();
    let keep: Vec<usize> = (0..g.edge_count())
        .filter(|k| !spec.exclude_edges.contains(k))
        .collect();
    let pairs: Vec<(usize, usize)> = keep
        .iter()
        .map(|&k| (g.edges()[k].tail, g.edges()[k].head))
        .collect();
    let sub =
        Graph::new(g.node_count(), &pairs).map_err(|e| CliError::Validation(e.to_string()))?;
    let fs = keep
        .iter()
        .map(|&k| cfg.network.edge_functions()[k].clone())
        .collect();
    Ok((sub, fs, spec))
}

/// Equivalent edge function samples in `eqfun.csv`.
pub fn eqfun(
    cfg: &NetworkConfig,
    out_dir: &Path,
    grid: GridArgs,
) -> Result<Vec<PathBuf>, CliError> {
    let (g, fs, spec) = eqfun_network(cfg)?;
    let n = grid.half_width.or(spec.half_width).unwrap_or(100.0);
    let m = grid.samples.or(spec.samples).unwrap_or(2001);
    let table = equivalent_edge_table(&g, &fs, spec.p, spec.q, n, m)?;
    if !table.degenerate.is_empty() {
        log::warn!(
            "{} samples have a singular cocontent Hessian; interior tensions may not be unique",
            table.degenerate.len()
        );
    }
    Ok(vec![write_file(
        out_dir.join("eqfun.csv"),
        &table.to_csv_string(),
    )?])
}

/// Prediction report in `prediction.txt`.
pub fn predict_report(
    cfg: &NetworkConfig,
    out_dir: &Path,
    grid: GridArgs,
) -> Result<Vec<PathBuf>, CliError> {
    let grid = grid.grid((100.0, 2001))?;
    let pred = predict(&cfg.network, &grid);
    let path = write_file(out_dir.join("prediction.txt"), &pred.report())?;
    if pred.cap_exceeded {
        return Err(CliError::Cap(format!(
            "cycle enumeration on {} nodes; report written to {}",
            cfg.network.node_count(),
            path.display()
        )));
    }
    Ok(vec![path])
}
