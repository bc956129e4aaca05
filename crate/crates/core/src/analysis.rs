//! Predicting agreement, clustering or convergence from edge signs and
//! equivalent edge functions, before simulating.

use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::circuit::{
    equivalent_edge_table, weighted_laplacian, CircuitError, EquivalentEdgeTable,
};
use crate::edgefn::{EdgeFnError, EdgeFunction, Sign, SignClass};
use crate::graph::{Graph, GraphError};
use crate::grid::Grid;
use crate::network::NetworkSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("edge {edge} is {sign}; the bound needs a positive network")]
    NotPositive { edge: usize, sign: Sign },
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("edge {0} is not linear")]
    NonLinearEdges(usize),
    #[error("edge {edge}: {source}")]
    EdgeFn { edge: usize, source: EdgeFnError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    AgreementGuaranteed,
    /// Outputs settle; several clusters are possible.
    ConvergenceGuaranteed,
    /// Outputs settle into one of the listed numbers of clusters.
    ClusterCountPrediction {
        counts: Vec<usize>,
    },
    NoGuarantee,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AgreementGuaranteed => f.write_str("agreement-guaranteed"),
            Self::ConvergenceGuaranteed => f.write_str("convergence-guaranteed"),
            Self::ClusterCountPrediction { counts } => {
                let list: Vec<String> = counts.iter().map(usize::to_string).collect();
                write!(f, "cluster-count {{{}}}", list.join(","))
            }
            Self::NoGuarantee => f.write_str("no-guarantee"),
        }
    }
}

/// Which hypothesis set produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Every edge strictly positive.
    StrictlyPositiveNetwork,
    /// Positive network whose strictly positive edges span all nodes.
    StrictlyPositiveSpanningSubgraph,
    /// Every edge positive.
    PositiveNetwork,
    /// One non-strict edge whose sum with the equivalent edge function of
    /// the rest is strictly passive.
    StrictEquivalentBalance,
    /// One non-strict edge whose sum with the equivalent edge function of
    /// the rest is passive.
    EquivalentBalance,
    /// As `EquivalentBalance`, with a single cycle through that edge.
    EquivalentBalanceSingleCycle,
    /// Several non-strict edges, no two on a common cycle, each balanced.
    EquivalentBalanceSeparateCycles,
    None,
}

impl Basis {
    pub fn tag(self) -> &'static str {
        match self {
            Self::StrictlyPositiveNetwork => "strictly-positive-network",
            Self::StrictlyPositiveSpanningSubgraph => "strictly-positive-spanning-subgraph",
            Self::PositiveNetwork => "positive-network",
            Self::StrictEquivalentBalance => "strict-equivalent-balance",
            Self::EquivalentBalance => "equivalent-balance",
            Self::EquivalentBalanceSingleCycle => "equivalent-balance-single-cycle",
            Self::EquivalentBalanceSeparateCycles => "equivalent-balance-separate-cycles",
            Self::None => "none",
        }
    }
}

/// The test `(psi_hat(zeta) + psi_bar(zeta)) * zeta >= 0` on the samples of
/// an equivalent edge table.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceCheck {
    pub edge: usize,
    pub p: usize,
    pub q: usize,
    pub holds: bool,
    pub strict: bool,
    /// Smallest `s(zeta) / zeta^2` over the samples away from 0.
    pub margin: f64,
    /// Sample with the smallest ratio.
    pub worst_zeta: f64,
    /// `s(zeta)` at each table sample.
    pub curve: Vec<f64>,
    pub table: EquivalentEdgeTable,
}

impl BalanceCheck {
    /// `|psi_hat(zeta) + psi_bar(zeta)|`, which vanishes at a settled state.
    pub fn terminal_residual(&self, psi_hat: &EdgeFunction, zeta: f64) -> f64 {
        (psi_hat.eval(zeta) + self.table.eval(zeta)).abs()
    }
}

/// Evaluates the balance test for the non-strict edge `psi_hat` closing
/// the terminals `p`, `q` of the network `(graph, edges)`, which may be
/// disconnected (then the equivalent edge function is zero).
///
/// `s` counts as non-negative when `s >= -1e-9 * max(1, zeta^2)` and as
/// strictly positive when it exceeds `1e-9 * max(1, zeta^2)` for every
/// sample with `|zeta| > 1e-9`.
pub fn balance_condition(
    graph: &Graph,
    edges: &[EdgeFunction],
    psi_hat: &EdgeFunction,
    p: usize,
    q: usize,
    half_width: f64,
    samples: usize,
) -> Result<BalanceCheck, CircuitError> {
    let table = equivalent_edge_table(graph, edges, p, q, half_width, samples)?;
    let mut holds = true;
    let mut strict = true;
    let mut margin = f64::INFINITY;
    let mut worst_zeta = 0.0;
    let mut curve = Vec::with_capacity(table.len());
    for (&z, &m) in table.zeta.iter().zip(&table.mu) {
        let s = (psi_hat.eval(z) + m) * z;
        curve.push(s);
        let tol = 1e-9 * (z * z).max(1.0);
        if s < -tol {
            holds = false;
        }
        if z.abs() > 1e-9 {
            if s <= tol {
                strict = false;
            }
            let r = s / (z * z);
            if r < margin {
                margin = r;
                worst_zeta = z;
            }
        }
    }
    Ok(BalanceCheck {
        edge: usize::MAX,
        p,
        q,
        holds,
        strict: holds && strict,
        margin,
        worst_zeta,
        curve,
        table,
    })
}

fn without_edges(
    graph: &Graph,
    edges: &[EdgeFunction],
    drop: &[usize],
) -> (Graph, Vec<EdgeFunction>) {
    let keep: Vec<usize> = (0..graph.edge_count())
        .filter(|k| !drop.contains(k))
        .collect();
    let pairs: Vec<(usize, usize)> = keep
        .iter()
        .map(|&k| (graph.edges()[k].tail, graph.edges()[k].head))
        .collect();
    let g = Graph::new(graph.node_count(), &pairs).expect("subgraph of a valid graph");
    (g, keep.iter().map(|&k| edges[k].clone()).collect())
}

/// Balance test for edge `k_hat` against the rest of the network.
pub fn balance_condition_for_edge(
    net: &NetworkSystem,
    k_hat: usize,
    half_width: f64,
    samples: usize,
) -> Result<BalanceCheck, AnalysisError> {
    balance_against(net, k_hat, &[k_hat], half_width, samples)
}

fn balance_against(
    net: &NetworkSystem,
    k_hat: usize,
    removed: &[usize],
    half_width: f64,
    samples: usize,
) -> Result<BalanceCheck, AnalysisError> {
    let e = net.graph().edge(k_hat)?;
    let (g, fs) = without_edges(net.graph(), net.edge_functions(), removed);
    let psi_hat = &net.edge_functions()[k_hat];
    let mut check = balance_condition(&g, &fs, psi_hat, e.tail, e.head, half_width, samples)?;
    check.edge = k_hat;
    Ok(check)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub verdict: Verdict,
    pub basis: Basis,
    pub grid: Grid,
    pub sign_classes: Vec<SignClass>,
    /// Edges that are not strictly positive.
    pub non_strict_edges: Vec<usize>,
    pub balance: Vec<BalanceCheck>,
    /// Node count of each cycle through the single non-strict edge.
    pub cycle_lengths: Vec<usize>,
    pub notes: Vec<String>,
    /// Cycle enumeration hit the graph's node cap, so the verdict may be
    /// weaker than the hypotheses allow.
    pub cap_exceeded: bool,
}

impl Prediction {
    fn skip_enumeration(&mut self, e: &GraphError) {
        self.cap_exceeded |= matches!(e, GraphError::CapExceeded { .. });
        self.notes.push(format!("cycle enumeration skipped: {e}"));
    }

    /// `key: value` lines, edges and nodes numbered from 1.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "verdict: {}", self.verdict);
        let _ = writeln!(w, "basis: {}", self.basis.tag());
        let _ = writeln!(w, "grid_half_width: {}", self.grid.half_width());
        let _ = writeln!(w, "grid_samples: {}", self.grid.samples());
        for (k, c) in self.sign_classes.iter().enumerate() {
            let _ = writeln!(w, "edge_{}_sign: {}", k + 1, c.sign);
            let _ = writeln!(w, "edge_{}_margin: {:.16e}", k + 1, c.margin);
        }
        let list: Vec<String> = self
            .non_strict_edges
            .iter()
            .map(|k| (k + 1).to_string())
            .collect();
        let _ = writeln!(w, "non_strict_edges: {}", list.join(","));
        for b in &self.balance {
            let _ = writeln!(w, "balance_edge: {}", b.edge + 1);
            let _ = writeln!(w, "balance_terminals: {},{}", b.p + 1, b.q + 1);
            let _ = writeln!(w, "balance_holds: {}", b.holds);
            let _ = writeln!(w, "balance_strict: {}", b.strict);
            let _ = writeln!(w, "balance_margin: {:.16e}", b.margin);
            let _ = writeln!(w, "balance_worst_zeta: {:.16e}", b.worst_zeta);
        }
        if !self.cycle_lengths.is_empty() {
            let list: Vec<String> = self.cycle_lengths.iter().map(usize::to_string).collect();
            let _ = writeln!(w, "cycle_lengths: {}", list.join(","));
        }
        for n in &self.notes {
            let _ = writeln!(w, "note: {n}");
        }
        s
    }
}

/// Picks the strongest verdict whose hypotheses hold on `grid`.
///
/// Order: strictly positive spanning subgraph, positive network, then a
/// single non-strict edge balanced strictly or non-strictly against the
/// equivalent edge function of the rest, then several non-strict edges
/// on separate cycles.
pub fn predict(net: &NetworkSystem, grid: &Grid) -> Prediction {
    let sign_classes: Vec<SignClass> = net
        .edge_functions()
        .iter()
        .map(|f| f.classify_sign(grid))
        .collect();
    let non_strict: Vec<usize> = (0..net.edge_count())
        .filter(|&k| !sign_classes[k].sign.is_strictly_positive())
        .collect();
    let mut pred = Prediction {
        verdict: Verdict::NoGuarantee,
        basis: Basis::None,
        grid: *grid,
        sign_classes,
        non_strict_edges: non_strict.clone(),
        balance: Vec::new(),
        cycle_lengths: Vec::new(),
        notes: Vec::new(),
        cap_exceeded: false,
    };

    if non_strict.is_empty() {
        pred.verdict = Verdict::AgreementGuaranteed;
        pred.basis = Basis::StrictlyPositiveNetwork;
        return pred;
    }
    if pred.sign_classes.iter().all(|c| c.sign.is_positive()) {
        let spanning = net
            .graph()
            .connected_components(|k| !non_strict.contains(&k))
            .len()
            == 1;
        if spanning {
            pred.verdict = Verdict::AgreementGuaranteed;
            pred.basis = Basis::StrictlyPositiveSpanningSubgraph;
        } else {
            pred.verdict = Verdict::ConvergenceGuaranteed;
            pred.basis = Basis::PositiveNetwork;
        }
        return pred;
    }

    let not_monotone: Vec<usize> = (0..net.edge_count())
        .filter(|k| !non_strict.contains(k))
        .filter(|&k| !net.edge_functions()[k].monotonicity(grid).nondecreasing)
        .collect();
    if !not_monotone.is_empty() {
        pred.notes.push(format!(
            "strictly positive edges {:?} are not monotone",
            one_based(&not_monotone)
        ));
        return pred;
    }

    let (half_width, samples) = (grid.half_width(), grid.samples());
    let samples = if samples % 2 == 0 {
        samples + 1
    } else {
        samples
    };

    if let [k_hat] = non_strict[..] {
        let check = match balance_against(net, k_hat, &[k_hat], half_width, samples) {
            Ok(c) => c,
            Err(e) => {
                pred.notes
                    .push(format!("equivalent edge function failed: {e}"));
                return pred;
            }
        };
        let (holds, strict) = (check.holds, check.strict);
        pred.balance.push(check);
        if strict {
            pred.verdict = Verdict::AgreementGuaranteed;
            pred.basis = Basis::StrictEquivalentBalance;
        } else if holds {
            pred.verdict = Verdict::ConvergenceGuaranteed;
            pred.basis = Basis::EquivalentBalance;
            match net.graph().cycles_through_edge(k_hat) {
                Ok(cycles) => {
                    pred.cycle_lengths = cycles.iter().map(|c| c.len() + 1).collect();
                    if let [len] = pred.cycle_lengths[..] {
                        pred.verdict = Verdict::ClusterCountPrediction {
                            counts: vec![1, len],
                        };
                        pred.basis = Basis::EquivalentBalanceSingleCycle;
                    }
                }
                Err(e) => pred.skip_enumeration(&e),
            }
        }
        return pred;
    }

    // Several non-strict edges: each must avoid the cycles of the others.
    for &k in &non_strict {
        let cycles = match net.graph().cycles_through_edge(k) {
            Ok(c) => c,
            Err(e) => {
                pred.skip_enumeration(&e);
                return pred;
            }
        };
        let shared = cycles.iter().any(|c| {
            c.steps
                .iter()
                .any(|s| s.edge != k && non_strict.contains(&s.edge))
        });
        if shared {
            pred.notes.push(format!(
                "edge {} shares a cycle with another non-strict edge",
                k + 1
            ));
            return pred;
        }
    }
    let mut all_hold = true;
    for &k in &non_strict {
        match balance_against(net, k, &non_strict, half_width, samples) {
            Ok(c) => {
                all_hold &= c.holds;
                pred.balance.push(c);
            }
            Err(e) => {
                pred.notes
                    .push(format!("equivalent edge function failed: {e}"));
                return pred;
            }
        }
    }
    if all_hold {
        pred.verdict = Verdict::ConvergenceGuaranteed;
        pred.basis = Basis::EquivalentBalanceSeparateCycles;
    }
    pred
}

fn one_based(ks: &[usize]) -> Vec<usize> {
    ks.iter().map(|k| k + 1).collect()
}

/// Interval containing `lim y_i - y_j` in a positive network, from the
/// equilibria intervals along every simple path between the two nodes.
///
/// Each path contributes the interval sum of its edges' intervals, taken
/// as `[I_L, I_R]` along the edge orientation and `[-I_R, -I_L]` against
/// it; the bound is the intersection over paths.
pub fn distance_bounds(
    net: &NetworkSystem,
    i: usize,
    j: usize,
) -> Result<(f64, f64), AnalysisError> {
    let grid = Grid::default();
    for (edge, f) in net.edge_functions().iter().enumerate() {
        let sign = f.classify_sign(&grid).sign;
        if !sign.is_positive() {
            return Err(AnalysisError::NotPositive { edge, sign });
        }
    }
    let paths = net.graph().all_simple_paths(i, j)?;
    let mut intervals = Vec::with_capacity(net.edge_count());
    for (edge, f) in net.edge_functions().iter().enumerate() {
        intervals.push(
            f.equilibria()
                .map_err(|source| AnalysisError::EdgeFn { edge, source })?,
        );
    }
    let mut z_min = f64::NEG_INFINITY;
    let mut z_max = f64::INFINITY;
    for path in &paths {
        let (mut lo, mut hi) = (0.0, 0.0);
        for step in &path.steps {
            let iv = intervals[step.edge];
            if step.reversed {
                lo -= iv.upper;
                hi -= iv.lower;
            } else {
                lo += iv.lower;
                hi += iv.upper;
            }
        }
        z_min = z_min.max(lo);
        z_max = z_max.min(hi);
    }
    Ok((z_min, z_max))
}

/// Candidate cluster counts `{1, cycle length}` when `k_hat` is the only
/// non-strictly-positive edge and lies on exactly one cycle.
pub fn cluster_count_prediction(
    net: &NetworkSystem,
    k_hat: usize,
) -> Result<Vec<usize>, AnalysisError> {
    net.graph().edge(k_hat)?;
    let grid = Grid::default();
    let others: Vec<usize> = (0..net.edge_count())
        .filter(|&k| k != k_hat)
        .filter(|&k| {
            !net.edge_functions()[k]
                .classify_sign(&grid)
                .sign
                .is_strictly_positive()
        })
        .collect();
    if !others.is_empty() {
        return Err(AnalysisError::Inapplicable(format!(
            "edges {:?} are also not strictly positive",
            one_based(&others)
        )));
    }
    let cycles = net.graph().cycles_through_edge(k_hat)?;
    match cycles.len() {
        1 => Ok(vec![1, cycles[0].len() + 1]),
        n => Err(AnalysisError::Inapplicable(format!(
            "edge {} lies on {n} cycles",
            k_hat + 1
        ))),
    }
}

/// Smallest eigenvalue of `E diag(w) E^T` on the complement of the
/// all-ones vector.
pub fn signed_laplacian_min_eigen(graph: &Graph, weights: &[f64]) -> f64 {
    let n = graph.node_count();
    if n < 2 {
        return f64::INFINITY;
    }
    let lap = weighted_laplacian(graph, weights);
    // the all-ones direction is an eigenvector with eigenvalue 0; lift it
    // above the rest of the spectrum
    let lift = 1.0 + 4.0 * weights.iter().map(|w| w.abs()).sum::<f64>();
    let shifted = lap + DMatrix::from_element(n, n, lift / n as f64);
    shifted.symmetric_eigenvalues().min()
}

/// [`signed_laplacian_min_eigen`] for a network whose edges are all linear.
pub fn signed_laplacian_eigen_oracle(net: &NetworkSystem) -> Result<f64, AnalysisError> {
    let weights = net
        .edge_functions()
        .iter()
        .enumerate()
        .map(|(k, f)| f.linear_weight().ok_or(AnalysisError::NonLinearEdges(k)))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(signed_laplacian_min_eigen(net.graph(), &weights))
}

/// Steady-state check: when every non-positive edge sits in its equilibria
/// interval, so must every edge. `None` when the premise fails.
pub fn edge_equilibria_check(
    net: &NetworkSystem,
    zeta: &[f64],
    tol: f64,
    grid: &Grid,
) -> Option<bool> {
    let inside = |k: usize| {
        net.edge_functions()[k]
            .equilibria()
            .map(|iv| iv.contains(zeta[k], tol))
            .unwrap_or(false)
    };
    let premise = (0..net.edge_count())
        .filter(|&k| {
            !net.edge_functions()[k]
                .classify_sign(grid)
                .sign
                .is_positive()
        })
        .all(inside);
    premise.then(|| (0..net.edge_count()).all(inside))
}

/// Nodes incident only to strictly positive edges whose settled output
/// breaks the neighbor min-max property: outside `[min, max]` of the
/// neighbors, or equal to one end without equalling the other.
pub fn minmax_violations(net: &NetworkSystem, y: &[f64], tol: f64, grid: &Grid) -> Vec<usize> {
    let strict: Vec<bool> = net
        .edge_functions()
        .iter()
        .map(|f| f.classify_sign(grid).sign.is_strictly_positive())
        .collect();
    let g = net.graph();
    (0..g.node_count())
        .filter(|&i| !g.incident(i).is_empty() && g.incident(i).iter().all(|&(_, k)| strict[k]))
        .filter(|&i| {
            let (lo, hi) = g
                .neighbors(i)
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &n| {
                    (lo.min(y[n]), hi.max(y[n]))
                });
            let outside = y[i] < lo - tol || y[i] > hi + tol;
            let at_lo = (y[i] - lo).abs() <= tol;
            let at_hi = (y[i] - hi).abs() <= tol;
            outside || at_lo != at_hi
        })
        .collect()
}
