//! The closed loop `y -> zeta = E^T y -> mu = psi(zeta) -> u = -E mu`.

use thiserror::Error;

use crate::edgefn::EdgeFunction;
use crate::graph::{Graph, GraphError};
use crate::nodes::NodeDynamics;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("graph is not connected")]
    Disconnected,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), NetworkError> {
    if expected == got {
        Ok(())
    } else {
        Err(NetworkError::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}

/// A connected graph with integrator nodes and static edge functions.
///
/// Nonlinear integrators have the whole real line as forced equilibrium
/// outputs at zero input, so the agreement space is always feasible and
/// nothing beyond connectivity is checked here.
#[derive(Debug, Clone)]
pub struct NetworkSystem {
    graph: Graph,
    nodes: Vec<NodeDynamics>,
    edges: Vec<EdgeFunction>,
}

impl NetworkSystem {
    pub fn new(
        graph: Graph,
        nodes: Vec<NodeDynamics>,
        edges: Vec<EdgeFunction>,
    ) -> Result<Self, NetworkError> {
        check_len("node dynamics", graph.node_count(), nodes.len())?;
        check_len("edge functions", graph.edge_count(), edges.len())?;
        if !graph.is_connected() {
            return Err(NetworkError::Disconnected);
        }
        Ok(Self {
            graph,
            nodes,
            edges,
        })
    }

    /// All nodes single integrators.
    pub fn with_integrators(graph: Graph, edges: Vec<EdgeFunction>) -> Result<Self, NetworkError> {
        let nodes = vec![NodeDynamics::Identity; graph.node_count()];
        Self::new(graph, nodes, edges)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_dynamics(&self) -> &[NodeDynamics] {
        &self.nodes
    }

    pub fn edge_functions(&self) -> &[EdgeFunction] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Copy with edge `k` replaced.
    pub fn with_edge_function(&self, k: usize, f: EdgeFunction) -> Result<Self, NetworkError> {
        self.graph.edge(k)?;
        let mut edges = self.edges.clone();
        edges[k] = f;
        Ok(Self {
            edges,
            ..self.clone()
        })
    }

    /// `zeta = E^T y`.
    pub fn tension(&self, y: &[f64]) -> Result<Vec<f64>, NetworkError> {
        check_len("outputs", self.node_count(), y.len())?;
        Ok(self.graph.tension_of(y))
    }

    /// `mu_k = psi_k(zeta_k)`.
    pub fn flow(&self, zeta: &[f64]) -> Result<Vec<f64>, NetworkError> {
        check_len("tensions", self.edge_count(), zeta.len())?;
        Ok(self
            .edges
            .iter()
            .zip(zeta)
            .map(|(f, &z)| f.eval(z))
            .collect())
    }

    /// `u = -E mu`.
    pub fn input(&self, mu: &[f64]) -> Result<Vec<f64>, NetworkError> {
        check_len("flows", self.edge_count(), mu.len())?;
        Ok(self
            .graph
            .divergence_of(mu)
            .into_iter()
            .map(|v| -v)
            .collect())
    }

    /// Node inputs produced by the state `x` through the coupling.
    pub fn coupling_input(&self, x: &[f64]) -> Result<Vec<f64>, NetworkError> {
        check_len("state", self.node_count(), x.len())?;
        let mut u = vec![0.0; self.node_count()];
        self.coupling_input_into(x, &mut u);
        Ok(u)
    }

    pub(crate) fn coupling_input_into(&self, x: &[f64], u: &mut [f64]) {
        u.fill(0.0);
        for (edge, f) in self.graph.edges().iter().zip(&self.edges) {
            let m = f.eval(x[edge.tail] - x[edge.head]);
            u[edge.tail] -= m;
            u[edge.head] += m;
        }
    }

    /// `x'_i = gamma_i(u_i)` with `u = -E psi(E^T x)`.
    pub fn vector_field(&self, x: &[f64]) -> Result<Vec<f64>, NetworkError> {
        let mut dx = self.coupling_input(x)?;
        for (v, d) in dx.iter_mut().zip(&self.nodes) {
            *v = d.drift(*v);
        }
        Ok(dx)
    }

    pub(crate) fn vector_field_into(&self, x: &[f64], dx: &mut [f64]) {
        self.coupling_input_into(x, dx);
        for (v, d) in dx.iter_mut().zip(&self.nodes) {
            *v = d.drift(*v);
        }
    }

    /// Sum of edge cocontents at the tensions `zeta`.
    pub fn total_cocontent(&self, zeta: &[f64]) -> Result<f64, NetworkError> {
        check_len("tensions", self.edge_count(), zeta.len())?;
        Ok(self
            .edges
            .iter()
            .zip(zeta)
            .map(|(f, &z)| f.cocontent(z))
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> NetworkSystem {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        NetworkSystem::with_integrators(
            g,
            vec![
                EdgeFunction::linear(0.5).unwrap(),
                EdgeFunction::linear(1.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn series_example_loop() {
        let n = series();
        let zeta = n.tension(&[3.0, 1.0, 0.0]).unwrap();
        assert_eq!(zeta, vec![2.0, 1.0]);
        let mu = n.flow(&zeta).unwrap();
        assert_eq!(mu, vec![1.0, 1.0]);
        assert_eq!(n.tension(&[1.0; 3]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(n.flow(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        // middle node has balanced flows
        assert_eq!(n.input(&mu).unwrap(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn closing_edge_balances_flows() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let n = NetworkSystem::with_integrators(
            g,
            vec![
                EdgeFunction::linear(0.5).unwrap(),
                EdgeFunction::linear(1.0).unwrap(),
                EdgeFunction::linear(-1.0 / 3.0).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(n.tension(&[3.0, 1.0, 0.0]).unwrap(), vec![2.0, 1.0, 3.0]);
        assert_eq!(n.input(&[1.0, 1.0, -1.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_edge_input_and_field() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let n =
            NetworkSystem::with_integrators(g, vec![EdgeFunction::linear(1.0).unwrap()]).unwrap();
        assert_eq!(n.input(&[1.0]).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(n.vector_field(&[1.0, -1.0]).unwrap(), vec![-2.0, 2.0]);
        assert_eq!(n.vector_field(&[0.7, 0.7]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn basis_vector_tension_marks_incident_edges() {
        let n = series();
        assert_eq!(n.tension(&[0.0, 1.0, 0.0]).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn dimension_and_connectivity_errors() {
        let n = series();
        assert!(matches!(
            n.tension(&[1.0]),
            Err(NetworkError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            n.flow(&[1.0; 3]),
            Err(NetworkError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            n.input(&[1.0]),
            Err(NetworkError::DimensionMismatch { .. })
        ));
        let split = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let lin = EdgeFunction::linear(1.0).unwrap();
        assert_eq!(
            NetworkSystem::with_integrators(split, vec![lin.clone(), lin]).unwrap_err(),
            NetworkError::Disconnected
        );
    }

    #[test]
    fn total_cocontent_examples() {
        let n = series();
        assert_eq!(n.total_cocontent(&[2.0, 1.0]).unwrap(), 1.5);
        assert_eq!(n.total_cocontent(&[1.0, 2.0]).unwrap(), 2.25);
        assert_eq!(n.total_cocontent(&[0.0, 0.0]).unwrap(), 0.0);
    }
}
