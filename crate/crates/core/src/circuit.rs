//! Resistive-circuit view of a network: operating points by cocontent
//! minimization, equivalent edge functions between two terminals, and
//! effective resistance for the linear case.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::edgefn::{EdgeFnError, EdgeFunction, Extrapolation, SampledTable};
use crate::graph::{Graph, GraphError};
use crate::grid::{symmetric_samples, Grid};
use crate::network::{NetworkError, NetworkSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("terminals must be distinct nodes (got {0} twice)")]
    SameTerminal(usize),
    #[error("operating point did not converge at zeta = {zeta} after {iterations} iterations (gradient {gradient:e})")]
    NoConvergence {
        zeta: f64,
        iterations: usize,
        gradient: f64,
    },
    #[error("graph is not connected")]
    Disconnected,
    #[error("edge {edge} has weight {weight}; weights must be positive")]
    NonPositiveWeight { edge: usize, weight: f64 },
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("sample count must be odd and at least 3, got {0}")]
    SampleCount(usize),
    #[error("half-width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    EdgeFn(#[from] EdgeFnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl From<NetworkError> for CircuitError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::DimensionMismatch {
                what,
                expected,
                got,
            } => CircuitError::DimensionMismatch {
                what,
                expected,
                got,
            },
            NetworkError::Disconnected => CircuitError::Disconnected,
            NetworkError::Graph(g) => CircuitError::Graph(g),
        }
    }
}

/// Solution of the network closed by a virtual edge `p -> q`.
///
/// `tension` and `flow` carry one entry per real edge followed by the
/// virtual edge, whose flow is `-terminal_flow`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub potentials: Vec<f64>,
    pub tension: Vec<f64>,
    pub flow: Vec<f64>,
    /// Net flow leaving `p` into the network, the equivalent edge value.
    pub terminal_flow: f64,
    /// Total cocontent of the real edges.
    pub cocontent: f64,
    pub iterations: usize,
    /// The Hessian of the cocontent is (numerically) singular at the
    /// solution, so interior tensions may not be unique.
    pub degenerate: bool,
}

const MAX_ITERATIONS: usize = 10_000;
const GRADIENT_TOL: f64 = 1e-10;
const SLOPE_CAP: f64 = 1e12;

/// Cocontent minimizer for a fixed graph, edge set and terminal pair,
/// reusable across terminal tensions.
///
/// Only edges on some simple `p`-`q` path take part in the minimization.
/// Everything else hangs off that block at a single node and settles at
/// zero tension, which is the minimizer for passive edges.
pub struct OperatingPointSolver<'a> {
    graph: &'a Graph,
    edges: &'a [EdgeFunction],
    p: usize,
    q: usize,
    active: Vec<usize>,
    free: Vec<usize>,
    slot: Vec<Option<usize>>,
    anchored: Vec<bool>,
    // potentials for a unit terminal tension under unit conductances
    unit_guess: Vec<f64>,
    max_iterations: usize,
}

impl<'a> OperatingPointSolver<'a> {
    pub fn new(
        graph: &'a Graph,
        edges: &'a [EdgeFunction],
        p: usize,
        q: usize,
    ) -> Result<Self, CircuitError> {
        if edges.len() != graph.edge_count() {
            return Err(CircuitError::DimensionMismatch {
                what: "edge functions",
                expected: graph.edge_count(),
                got: edges.len(),
            });
        }
        graph.check_node(p)?;
        graph.check_node(q)?;
        if p == q {
            return Err(CircuitError::SameTerminal(p));
        }
        let marked = graph.edges_between(p, q)?;
        let active: Vec<usize> = (0..graph.edge_count()).filter(|&k| marked[k]).collect();

        let n = graph.node_count();
        let mut anchored = vec![false; n];
        anchored[p] = true;
        anchored[q] = true;
        for &k in &active {
            let e = graph.edges()[k];
            anchored[e.tail] = true;
            anchored[e.head] = true;
        }
        let free: Vec<usize> = (0..n)
            .filter(|&i| anchored[i] && i != p && i != q)
            .collect();
        let mut slot = vec![None; n];
        for (s, &i) in free.iter().enumerate() {
            slot[i] = Some(s);
        }

        let grid = Grid::default();
        for &k in &active {
            if !edges[k].monotonicity(&grid).nondecreasing {
                log::warn!("edge {k} is not monotone; the operating point may not be unique");
            }
        }

        let mut solver = Self {
            graph,
            edges,
            p,
            q,
            active,
            free,
            slot,
            anchored,
            unit_guess: vec![0.0; n],
            max_iterations: MAX_ITERATIONS,
        };
        solver.unit_guess = solver.harmonic_guess();
        Ok(solver)
    }

    pub fn with_max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = cap;
        self
    }

    pub fn terminals(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    /// Edges that carry flow between the terminals.
    pub fn active_edges(&self) -> &[usize] {
        &self.active
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    fn harmonic_guess(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.graph.node_count()];
        y[self.p] = 1.0;
        let nf = self.free.len();
        if nf == 0 {
            return y;
        }
        let mut lap = DMatrix::<f64>::zeros(nf, nf);
        let mut rhs = DVector::<f64>::zeros(nf);
        for &k in &self.active {
            let e = self.graph.edges()[k];
            for (a, b) in [(e.tail, e.head), (e.head, e.tail)] {
                if let Some(sa) = self.slot[a] {
                    lap[(sa, sa)] += 1.0;
                    match self.slot[b] {
                        Some(sb) => lap[(sa, sb)] -= 1.0,
                        None => rhs[sa] += y[b],
                    }
                }
            }
        }
        if let Some(sol) = lap.cholesky().map(|c| c.solve(&rhs)) {
            for (s, &i) in self.free.iter().enumerate() {
                y[i] = sol[s];
            }
        }
        y
    }

    fn cocontent_at(&self, y: &[f64]) -> f64 {
        self.active
            .iter()
            .map(|&k| {
                let e = self.graph.edges()[k];
                self.edges[k].cocontent(y[e.tail] - y[e.head])
            })
            .sum()
    }

    fn gradient_at(&self, y: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.free.len());
        for &k in &self.active {
            let e = self.graph.edges()[k];
            let m = self.edges[k].eval(y[e.tail] - y[e.head]);
            if let Some(s) = self.slot[e.tail] {
                g[s] += m;
            }
            if let Some(s) = self.slot[e.head] {
                g[s] -= m;
            }
        }
        g
    }

    fn hessian_at(&self, y: &[f64]) -> DMatrix<f64> {
        let nf = self.free.len();
        let mut h = DMatrix::zeros(nf, nf);
        for &k in &self.active {
            let e = self.graph.edges()[k];
            let d = self.edges[k].derivative(y[e.tail] - y[e.head]);
            let d = if d.is_nan() {
                0.0
            } else {
                d.clamp(0.0, SLOPE_CAP)
            };
            let (st, sh) = (self.slot[e.tail], self.slot[e.head]);
            if let Some(a) = st {
                h[(a, a)] += d;
            }
            if let Some(b) = sh {
                h[(b, b)] += d;
            }
            if let (Some(a), Some(b)) = (st, sh) {
                h[(a, b)] -= d;
                h[(b, a)] -= d;
            }
        }
        h
    }

    fn newton_direction(&self, h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
        let nf = g.len();
        let max_diag = (0..nf).map(|i| h[(i, i)]).fold(0.0, f64::max);
        let mut lambda = 0.0;
        for _ in 0..12 {
            let shifted = h + DMatrix::identity(nf, nf) * lambda;
            if let Some(chol) = shifted.cholesky() {
                let d = -chol.solve(g);
                if d.iter().all(|v| v.is_finite()) {
                    return Some(d);
                }
            }
            lambda = if lambda == 0.0 {
                1e-12 * (1.0 + max_diag)
            } else {
                lambda * 100.0
            };
        }
        None
    }

    fn step_to(&self, y: &[f64], d: &DVector<f64>, t: f64) -> Vec<f64> {
        let mut out = y.to_vec();
        for (s, &i) in self.free.iter().enumerate() {
            out[i] += t * d[s];
        }
        out
    }

    // Backtracking on the cocontent. Near the minimum the decrease drops
    // below the rounding noise of F, so a step that keeps F flat to within
    // rounding and shrinks the gradient is also accepted.
    fn line_search(
        &self,
        y: &[f64],
        f0: f64,
        g: &DVector<f64>,
        d: &DVector<f64>,
    ) -> Option<Vec<f64>> {
        let slope = g.dot(d);
        if slope.is_nan() || slope >= 0.0 {
            return None;
        }
        let g_norm = g.amax();
        let noise = 1e-13 * (1.0 + f0.abs());
        let mut t = 1.0;
        for _ in 0..80 {
            let trial = self.step_to(y, d, t);
            let f = self.cocontent_at(&trial);
            if f.is_finite() {
                if f <= f0 + 1e-4 * t * slope {
                    return Some(trial);
                }
                if f <= f0 + noise && self.gradient_at(&trial).amax() < g_norm {
                    return Some(trial);
                }
            }
            t *= 0.5;
        }
        None
    }

    /// Minimizes the cocontent with `y_p = zeta`, `y_q = 0`.
    pub fn solve(&self, zeta: f64) -> Result<OperatingPoint, CircuitError> {
        let n = self.graph.node_count();
        let mut y: Vec<f64> = self.unit_guess.iter().map(|v| v * zeta).collect();
        y[self.p] = zeta;
        y[self.q] = 0.0;

        let mut iterations = 0;
        let mut g = self.gradient_at(&y);
        while !self.free.is_empty() && g.amax() >= GRADIENT_TOL {
            if iterations >= self.max_iterations {
                return Err(CircuitError::NoConvergence {
                    zeta,
                    iterations,
                    gradient: g.amax(),
                });
            }
            iterations += 1;
            let f0 = self.cocontent_at(&y);
            let h = self.hessian_at(&y);
            let next = self
                .newton_direction(&h, &g)
                .and_then(|d| self.line_search(&y, f0, &g, &d))
                .or_else(|| self.line_search(&y, f0, &g, &(-&g)));
            match next {
                Some(trial) => y = trial,
                None => {
                    return Err(CircuitError::NoConvergence {
                        zeta,
                        iterations,
                        gradient: g.amax(),
                    })
                }
            }
            g = self.gradient_at(&y);
        }

        let degenerate = !self.free.is_empty() && {
            let h = self.hessian_at(&y);
            let max_diag = (0..h.nrows()).map(|i| h[(i, i)]).fold(0.0, f64::max);
            let min_eig = h.symmetric_eigenvalues().min();
            min_eig < 1e-12 * (1.0 + max_diag)
        };

        self.settle_dangling(&mut y);
        let mut tension = self.graph.tension_of(&y);
        let mut flow: Vec<f64> = self
            .edges
            .iter()
            .zip(&tension)
            .map(|(f, &z)| f.eval(z))
            .collect();
        let cocontent = self
            .edges
            .iter()
            .zip(&tension)
            .map(|(f, &z)| f.cocontent(z))
            .sum();
        let terminal_flow = self.graph.divergence_of(&flow)[self.p];
        tension.push(y[self.p] - y[self.q]);
        flow.push(-terminal_flow);
        debug_assert_eq!(y.len(), n);
        Ok(OperatingPoint {
            potentials: y,
            tension,
            flow,
            terminal_flow,
            cocontent,
            iterations,
            degenerate,
        })
    }

    // Copies potentials outward from the terminal block so that every
    // edge off the block has zero tension.
    fn settle_dangling(&self, y: &mut [f64]) {
        let n = self.graph.node_count();
        let mut seen = self.anchored.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| seen[i]).collect();
        while let Some(v) = queue.pop_front() {
            for &(w, _) in self.graph.incident(v) {
                if !seen[w] {
                    seen[w] = true;
                    y[w] = y[v];
                    queue.push_back(w);
                }
            }
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                y[i] = 0.0;
            }
        }
    }
}

/// Operating point of `net` with terminal tension `zeta_pq` from `p` to `q`.
pub fn solve_operating_point(
    net: &NetworkSystem,
    p: usize,
    q: usize,
    zeta_pq: f64,
) -> Result<OperatingPoint, CircuitError> {
    OperatingPointSolver::new(net.graph(), net.edge_functions(), p, q)?.solve(zeta_pq)
}

/// Sampled flow-versus-tension map of a two-terminal network.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentEdgeTable {
    pub p: usize,
    pub q: usize,
    pub zeta: Vec<f64>,
    /// Flow into the network at `p` for each tension.
    pub mu: Vec<f64>,
    /// Sample tensions whose operating point was flagged degenerate.
    pub degenerate: Vec<f64>,
}

impl EquivalentEdgeTable {
    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn to_sampled_table(
        &self,
        extrapolation: Extrapolation,
    ) -> Result<SampledTable, EdgeFnError> {
        SampledTable::new(self.zeta.clone(), self.mu.clone(), extrapolation)
    }

    pub fn to_edge_function(
        &self,
        extrapolation: Extrapolation,
    ) -> Result<EdgeFunction, EdgeFnError> {
        EdgeFunction::table(self.to_sampled_table(extrapolation)?)
    }

    /// Linear interpolation of the samples, extended linearly outside.
    pub fn eval(&self, zeta: f64) -> f64 {
        self.to_sampled_table(Extrapolation::Linear)
            .map(|t| t.eval(zeta))
            .unwrap_or(f64::NAN)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.mu.windows(2).all(|w| w[1] >= w[0])
    }

    /// Two-column CSV `zeta,mu` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.to_csv_string().as_bytes())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("zeta,mu\n");
        for (z, m) in self.zeta.iter().zip(&self.mu) {
            writeln!(s, "{z:.16e},{m:.16e}").expect("writing to a String");
        }
        s
    }
}

/// Parses a two-column numeric CSV; a non-numeric first line is a header.
pub fn parse_two_column_csv(text: &str) -> Result<Vec<(f64, f64)>, CircuitError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(CircuitError::Csv {
                line: idx + 1,
                message: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => out.push((a, b)),
            _ if idx == 0 => continue,
            _ => {
                return Err(CircuitError::Csv {
                    line: idx + 1,
                    message: format!("not a number pair: {line}"),
                })
            }
        }
    }
    Ok(out)
}

/// Equivalent edge function between `p` and `q` sampled at `samples`
/// uniform tensions on `[-half_width, half_width]`.
pub fn equivalent_edge_table(
    graph: &Graph,
    edges: &[EdgeFunction],
    p: usize,
    q: usize,
    half_width: f64,
    samples: usize,
) -> Result<EquivalentEdgeTable, CircuitError> {
    if samples < 3 || samples.is_multiple_of(2) {
        return Err(CircuitError::SampleCount(samples));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(CircuitError::HalfWidth(half_width));
    }
    let solver = OperatingPointSolver::new(graph, edges, p, q)?;
    let zeta = symmetric_samples(half_width, samples);
    let solved: Vec<Result<OperatingPoint, CircuitError>> =
        zeta.par_iter().map(|&z| solver.solve(z)).collect();
    let mut mu = Vec::with_capacity(samples);
    let mut degenerate = Vec::new();
    for (z, r) in zeta.iter().zip(solved) {
        let op = r?;
        if op.degenerate {
            degenerate.push(*z);
        }
        mu.push(op.terminal_flow);
    }
    Ok(EquivalentEdgeTable {
        p,
        q,
        zeta,
        mu,
        degenerate,
    })
}

pub fn equivalent_edge_function(
    net: &NetworkSystem,
    p: usize,
    q: usize,
    half_width: f64,
    samples: usize,
) -> Result<EquivalentEdgeTable, CircuitError> {
    equivalent_edge_table(net.graph(), net.edge_functions(), p, q, half_width, samples)
}

/// `(e_p - e_q)^T L^+ (e_p - e_q)` for the weighted Laplacian `L = E W E^T`.
pub fn effective_resistance(
    graph: &Graph,
    weights: &[f64],
    p: usize,
    q: usize,
) -> Result<f64, CircuitError> {
    if weights.len() != graph.edge_count() {
        return Err(CircuitError::DimensionMismatch {
            what: "weights",
            expected: graph.edge_count(),
            got: weights.len(),
        });
    }
    graph.check_node(p)?;
    graph.check_node(q)?;
    if let Some((edge, &weight)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        return Err(CircuitError::NonPositiveWeight { edge, weight });
    }
    if !graph.is_connected() {
        return Err(CircuitError::Disconnected);
    }
    if p == q {
        return Ok(0.0);
    }
    // L + J/n is positive definite on a connected graph and its inverse is
    // L^+ + J/n; the J/n part vanishes against e_p - e_q
    let n = graph.node_count();
    let shifted = weighted_laplacian(graph, weights) + DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut b = DVector::zeros(n);
    b[p] = 1.0;
    b[q] = -1.0;
    let chol = shifted.cholesky().ok_or(CircuitError::Disconnected)?;
    let x = chol.solve(&b);
    Ok(x[p] - x[q])
}

/// `E diag(w) E^T`.
pub fn weighted_laplacian(graph: &Graph, weights: &[f64]) -> DMatrix<f64> {
    let n = graph.node_count();
    let mut lap = DMatrix::zeros(n, n);
    for (e, &w) in graph.edges().iter().zip(weights) {
        lap[(e.tail, e.tail)] += w;
        lap[(e.head, e.head)] += w;
        lap[(e.tail, e.head)] -= w;
        lap[(e.head, e.tail)] -= w;
    }
    lap
}

/// `|mu^T zeta|` over all edges including the virtual one.
pub fn tellegen_residual(op: &OperatingPoint) -> f64 {
    op.flow
        .iter()
        .zip(&op.tension)
        .map(|(m, z)| m * z)
        .sum::<f64>()
        .abs()
}

pub fn total_cocontent(net: &NetworkSystem, zeta: &[f64]) -> Result<f64, CircuitError> {
    Ok(net.total_cocontent(zeta)?)
}
