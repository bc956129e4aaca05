//! JSON network configuration. Node and edge ids in the file are 1-based;
//! everything handed to the core library is 0-based.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use signet_core::edgefn::{EdgeFunction, Extrapolation, SampledTable};
use signet_core::graph::Graph;
use signet_core::network::NetworkSystem;
use signet_core::nodes::NodeDynamics;
use signet_core::sim::SimConfig;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    description: Option<String>,
    nodes: RawNodes,
    edges: Vec<RawEdge>,
    #[serde(default)]
    sim: Option<RawSim>,
    #[serde(default)]
    initial_state: Option<Vec<f64>>,
    #[serde(default)]
    eqfun: Option<RawEqfun>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNodes {
    count: usize,
    #[serde(default)]
    dynamics: Vec<RawDynamics>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawDynamics {
    Identity { node: usize },
    SignPower { node: usize, c: f64, beta: f64 },
    Saturating { node: usize, c: f64, s: f64 },
}

impl RawDynamics {
    fn node(&self) -> usize {
        match *self {
            Self::Identity { node }
            | Self::SignPower { node, .. }
            | Self::Saturating { node, .. } => node,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: usize,
    tail: usize,
    head: usize,
    #[serde(rename = "fn")]
    function: RawFn,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawFn {
    Linear {
        w: f64,
    },
    DeadZone {
        w: f64,
        band: f64,
    },
    PowerSign {
        w: f64,
        alpha: f64,
    },
    Sinusoid {
        a: f64,
    },
    Negated {
        inner: Box<RawFn>,
    },
    Sum {
        terms: Vec<RawFn>,
    },
    Table {
        #[serde(default)]
        points: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        csv: Option<String>,
        #[serde(default)]
        clip: Option<[f64; 2]>,
        #[serde(default)]
        extrapolation: Option<RawExtrapolation>,
    },
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum RawExtrapolation {
    Hold,
    Linear,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    t_end: Option<f64>,
    record_every: Option<usize>,
    u_tol: Option<f64>,
    window: Option<f64>,
    blowup_threshold: Option<f64>,
    cluster_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEqfun {
    p: usize,
    q: usize,
    #[serde(default)]
    n: Option<f64>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    exclude_edges: Vec<usize>,
}

/// Terminal pair and sampling for the equivalent edge function (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct EqfunSpec {
    pub p: usize,
    pub q: usize,
    pub half_width: Option<f64>,
    pub samples: Option<usize>,
    /// Edges left out of the two-terminal network.
    pub exclude_edges: Vec<usize>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub description: Option<String>,
    pub network: NetworkSystem,
    pub sim: SimConfig,
    pub initial_state: Option<Vec<f64>>,
    pub eqfun: Option<EqfunSpec>,
}

/// Reads and validates a config file; table CSV paths resolve against the
/// file's directory.
pub fn load_config(path: &Path) -> Result<NetworkConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base)
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<NetworkConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| CliError::Parse(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    build(raw, base_dir)
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn node_index(what: &str, id: usize, count: usize) -> Result<usize, CliError> {
    if id == 0 || id > count {
        Err(invalid(format!(
            "{what}: node {id} out of range 1..={count}"
        )))
    } else {
        Ok(id - 1)
    }
}

fn build(raw: RawConfig, base_dir: &Path) -> Result<NetworkConfig, CliError> {
    let n = raw.nodes.count;
    if n == 0 {
        return Err(invalid("nodes.count must be at least 1"));
    }

    let mut nodes = vec![NodeDynamics::Identity; n];
    let mut seen = vec![false; n];
    for (i, d) in raw.nodes.dynamics.iter().enumerate() {
        let what = format!("nodes.dynamics[{i}]");
        let idx = node_index(&what, d.node(), n)?;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(invalid(format!("{what}: node {} listed twice", d.node())));
        }
        nodes[idx] = match *d {
            RawDynamics::Identity { .. } => Ok(NodeDynamics::Identity),
            RawDynamics::SignPower { c, beta, .. } => NodeDynamics::sign_power(c, beta),
            RawDynamics::Saturating { c, s, .. } => NodeDynamics::saturating(c, s),
        }
        .map_err(|e| invalid(format!("{what}: {e}")))?;
    }

    let m = raw.edges.len();
    let mut slots: Vec<Option<(usize, usize, EdgeFunction)>> = vec![None; m];
    for (i, e) in raw.edges.iter().enumerate() {
        let what = format!("edges[{i}]");
        if e.id == 0 || e.id > m {
            return Err(invalid(format!(
                "{what}: id {} out of range 1..={m} (ids must be dense)",
                e.id
            )));
        }
        if slots[e.id - 1].is_some() {
            return Err(invalid(format!("{what}: duplicate edge id {}", e.id)));
        }
        let tail = node_index(&format!("{what}.tail"), e.tail, n)?;
        let head = node_index(&format!("{what}.head"), e.head, n)?;
        if tail == head {
            return Err(invalid(format!("{what}: self-loop on node {}", e.tail)));
        }
        let f =
            build_fn(&e.function, base_dir).map_err(|msg| invalid(format!("{what}.fn: {msg}")))?;
        slots[e.id - 1] = Some((tail, head, f));
    }
    let (pairs, functions): (Vec<(usize, usize)>, Vec<EdgeFunction>) = slots
        .into_iter()
        .map(|s| {
            let (t, h, f) = s.expect("dense ids fill every slot");
            ((t, h), f)
        })
        .unzip();

    let graph = Graph::new(n, &pairs).map_err(|e| invalid(e.to_string()))?;
    let network =
        NetworkSystem::new(graph, nodes, functions).map_err(|e| invalid(e.to_string()))?;

    let mut sim = SimConfig::default();
    if let Some(s) = raw.sim {
        sim.dt = s.dt.unwrap_or(sim.dt);
        sim.t_end = s.t_end.unwrap_or(sim.t_end);
        sim.record_every = s.record_every.unwrap_or(sim.record_every);
        sim.u_tol = s.u_tol.unwrap_or(sim.u_tol);
        sim.window = s.window.unwrap_or(sim.window);
        sim.blowup_threshold = s.blowup_threshold.unwrap_or(sim.blowup_threshold);
        sim.cluster_tol = s.cluster_tol.unwrap_or(sim.cluster_tol);
    }
    sim.validate().map_err(|e| invalid(format!("sim: {e}")))?;

    if let Some(x0) = &raw.initial_state {
        if x0.len() != n {
            return Err(invalid(format!(
                "initial_state: expected {n} values, got {}",
                x0.len()
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial_state: values must be finite"));
        }
    }

    let eqfun = match raw.eqfun {
        None => None,
        Some(e) => {
            let p = node_index("eqfun.p", e.p, n)?;
            let q = node_index("eqfun.q", e.q, n)?;
            if p == q {
                return Err(invalid("eqfun: terminals p and q must differ"));
            }
            let mut exclude = Vec::with_capacity(e.exclude_edges.len());
            for id in e.exclude_edges {
                if id == 0 || id > m {
                    return Err(invalid(format!(
                        "eqfun.exclude_edges: edge {id} out of range 1..={m}"
                    )));
                }
                exclude.push(id - 1);
            }
            exclude.sort_unstable();
            exclude.dedup();
            Some(EqfunSpec {
                p,
                q,
                half_width: e.n,
                samples: e.samples,
                exclude_edges: exclude,
            })
        }
    };

    Ok(NetworkConfig {
        description: raw.description,
        network,
        sim,
        initial_state: raw.initial_state,
        eqfun,
    })
}

fn build_fn(raw: &RawFn, base_dir: &Path) -> Result<EdgeFunction, String> {
    let f = match raw {
        RawFn::Linear { w } => EdgeFunction::linear(*w),
        RawFn::DeadZone { w, band } => EdgeFunction::dead_zone(*w, *band),
        RawFn::PowerSign { w, alpha } => EdgeFunction::power_sign(*w, *alpha),
        RawFn::Sinusoid { a } => EdgeFunction::sinusoid(*a),
        RawFn::Negated { inner } => EdgeFunction::negated(build_fn(inner, base_dir)?),
        RawFn::Sum { terms } => EdgeFunction::sum(
            terms
                .iter()
                .map(|t| build_fn(t, base_dir))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        RawFn::Table {
            points,
            csv,
            clip,
            extrapolation,
        } => {
            let extrapolation = match extrapolation {
                Some(RawExtrapolation::Hold) => Extrapolation::Hold,
                Some(RawExtrapolation::Linear) | None => Extrapolation::Linear,
            };
            let pts: Vec<(f64, f64)> = match (points, csv) {
                (Some(p), None) => p.iter().map(|[z, m]| (*z, *m)).collect(),
                (None, Some(file)) => read_table_csv(&base_dir.join(file))?,
                _ => return Err("table needs exactly one of `points` or `csv`".into()),
            };
            let mut table =
                SampledTable::from_points(&pts, extrapolation).map_err(|e| e.to_string())?;
            if let Some([lo, hi]) = clip {
                if !(lo <= &0.0 && hi >= &0.0) {
                    return Err(format!("clip [{lo}, {hi}] must contain 0"));
                }
                table = table
                    .clipped(*lo, *hi, extrapolation)
                    .map_err(|e| e.to_string())?;
            }
            EdgeFunction::table(table)
        }
    };
    f.map_err(|e| e.to_string())
}

fn read_table_csv(path: &PathBuf) -> Result<Vec<(f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    signet_core::circuit::parse_two_column_csv(&text)
        .map_err(|e| format!("{}: {e}", path.display()))
}
