//! Undirected graphs with a fixed, caller-chosen orientation on every edge.
//!
//! Nodes and edges are addressed by zero-based indices. The orientation of
//! edge `k` is `tail -> head`; the incidence matrix carries `+1` at the tail
//! and `-1` at the head, so the tension `E^T y` on edge `k` is
//! `y[tail] - y[head]`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use thiserror::Error;

/// Default limit on the node count for path and cycle enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge {edge} is a self-loop on node {node}")]
    SelfLoop { edge: usize, node: usize },
    #[error("edge {edge} references node {node}, but the graph has {node_count} nodes")]
    NodeOutOfRange {
        edge: usize,
        node: usize,
        node_count: usize,
    },
    #[error("node {node} out of range (graph has {node_count} nodes)")]
    BadNode { node: usize, node_count: usize },
    #[error("edge {edge} out of range (graph has {edge_count} edges)")]
    BadEdge { edge: usize, edge_count: usize },
    #[error("enumeration needs {node_count} nodes but the cap is {cap}")]
    CapExceeded { node_count: usize, cap: usize },
}

/// An oriented edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    /// The endpoint opposite to `node`, if `node` is an endpoint.
    pub fn other(&self, node: usize) -> Option<usize> {
        if node == self.tail {
            Some(self.head)
        } else if node == self.head {
            Some(self.tail)
        } else {
            None
        }
    }
}

/// One edge traversal inside a [`Path`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub edge: usize,
    /// `true` when the traversal runs against the stored orientation
    /// (the edge is crossed head -> tail).
    pub reversed: bool,
}

impl PathStep {
    /// Orientation flag as the integer exponent `0` / `1`.
    pub fn orientation_flag(&self) -> u8 {
        u8::from(self.reversed)
    }

    /// `+1.0` when traversed along the orientation, `-1.0` otherwise.
    pub fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }
}

/// A simple path from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub from: usize,
    pub to: usize,
    pub steps: Vec<PathStep>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Node sequence visited by the path, `from` first.
    pub fn nodes(&self, g: &Graph) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut at = self.from;
        out.push(at);
        for s in &self.steps {
            let e = g.edges[s.edge];
            at = if s.reversed { e.tail } else { e.head };
            out.push(at);
        }
        out
    }

    /// The same path walked backwards.
    pub fn reversed(&self) -> Path {
        Path {
            from: self.to,
            to: self.from,
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| PathStep {
                    edge: s.edge,
                    reversed: !s.reversed,
                })
                .collect(),
        }
    }
}

/// Immutable oriented multigraph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    // (neighbor, edge) pairs per node
    adjacency: Vec<Vec<(usize, usize)>>,
    enumeration_cap: usize,
}

impl Graph {
    /// Builds a graph from `(tail, head)` pairs; edge `k` is the `k`-th pair.
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); node_count];
        let mut stored = Vec::with_capacity(edges.len());
        for (k, &(tail, head)) in edges.iter().enumerate() {
            for node in [tail, head] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange {
                        edge: k,
                        node,
                        node_count,
                    });
                }
            }
            if tail == head {
                return Err(GraphError::SelfLoop {
                    edge: k,
                    node: tail,
                });
            }
            adjacency[tail].push((head, k));
            adjacency[head].push((tail, k));
            stored.push(Edge { tail, head });
        }
        Ok(Self {
            node_count,
            edges: stored,
            adjacency,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Overrides the node-count cap used by path and cycle enumeration.
    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    /// Same node set with edge `k` removed; later edges shift down by one.
    pub fn without_edge(&self, k: usize) -> Result<Graph, GraphError> {
        self.edge(k)?;
        let pairs: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, e)| (e.tail, e.head))
            .collect();
        Ok(Graph::new(self.node_count, &pairs)?.with_enumeration_cap(self.enumeration_cap))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> Result<Edge, GraphError> {
        self.edges.get(k).copied().ok_or(GraphError::BadEdge {
            edge: k,
            edge_count: self.edges.len(),
        })
    }

    /// `(neighbor, edge)` pairs incident to `node`.
    pub fn incident(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    /// Distinct neighbors of `node`, ascending.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.adjacency[node].iter().map(|&(n, _)| n).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn check_node(&self, node: usize) -> Result<(), GraphError> {
        if node < self.node_count {
            Ok(())
        } else {
            Err(GraphError::BadNode {
                node,
                node_count: self.node_count,
            })
        }
    }

    /// Dense `|V| x |E|` incidence matrix.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(self.node_count, self.edges.len());
        for (k, edge) in self.edges.iter().enumerate() {
            e[(edge.tail, k)] = 1.0;
            e[(edge.head, k)] = -1.0;
        }
        e
    }

    /// `E^T y`, edge by edge.
    pub fn tension_of(&self, y: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|e| y[e.tail] - y[e.head]).collect()
    }

    /// `E mu`, the net flow leaving each node.
    pub fn divergence_of(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count];
        for (edge, &m) in self.edges.iter().zip(mu) {
            out[edge.tail] += m;
            out[edge.head] -= m;
        }
        out
    }

    /// Partition of the nodes into blocks joined by edges accepted by `keep`.
    /// Blocks are sorted by their smallest node; nodes inside a block ascend.
    pub fn connected_components<F>(&self, keep: F) -> Vec<Vec<usize>>
    where
        F: Fn(usize) -> bool,
    {
        let mut label = vec![usize::MAX; self.node_count];
        let mut blocks = Vec::new();
        for start in 0..self.node_count {
            if label[start] != usize::MAX {
                continue;
            }
            let id = blocks.len();
            let mut block = vec![start];
            label[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &(w, k) in &self.adjacency[v] {
                    if label[w] == usize::MAX && keep(k) {
                        label[w] = id;
                        block.push(w);
                        queue.push_back(w);
                    }
                }
            }
            block.sort_unstable();
            blocks.push(block);
        }
        blocks
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components(|_| true).len() == 1
    }

    fn check_cap(&self) -> Result<(), GraphError> {
        if self.node_count > self.enumeration_cap {
            Err(GraphError::CapExceeded {
                node_count: self.node_count,
                cap: self.enumeration_cap,
            })
        } else {
            Ok(())
        }
    }

    /// Every simple path from `from` to `to`, in depth-first discovery order.
    pub fn all_simple_paths(&self, from: usize, to: usize) -> Result<Vec<Path>, GraphError> {
        self.check_node(from)?;
        self.check_node(to)?;
        self.check_cap()?;
        Ok(self.simple_paths_avoiding(from, to, None))
    }

    /// Cycles containing edge `k`, each given as the path from `head(k)`
    /// back to `tail(k)` that avoids `k`. Closing it with `k` (traversed
    /// along its orientation) yields the cycle.
    pub fn cycles_through_edge(&self, k: usize) -> Result<Vec<Path>, GraphError> {
        let edge = self.edge(k)?;
        self.check_cap()?;
        Ok(self.simple_paths_avoiding(edge.head, edge.tail, Some(k)))
    }

    fn simple_paths_avoiding(&self, from: usize, to: usize, banned: Option<usize>) -> Vec<Path> {
        let mut found = Vec::new();
        if from == to {
            found.push(Path {
                from,
                to,
                steps: Vec::new(),
            });
            return found;
        }
        let mut visited = vec![false; self.node_count];
        let mut steps = Vec::new();
        visited[from] = true;
        self.dfs_paths(from, to, banned, &mut visited, &mut steps, &mut found);
        found
    }

    fn dfs_paths(
        &self,
        at: usize,
        to: usize,
        banned: Option<usize>,
        visited: &mut [bool],
        steps: &mut Vec<PathStep>,
        found: &mut Vec<Path>,
    ) {
        for &(next, k) in &self.adjacency[at] {
            if Some(k) == banned || visited[next] {
                continue;
            }
            steps.push(PathStep {
                edge: k,
                reversed: self.edges[k].tail != at,
            });
            if next == to {
                found.push(Path {
                    from: steps_origin(self, steps),
                    to,
                    steps: steps.clone(),
                });
            } else {
                visited[next] = true;
                self.dfs_paths(next, to, banned, visited, steps, found);
                visited[next] = false;
            }
            steps.pop();
        }
    }

    /// Marks the edges that lie on at least one simple path between `p`
    /// and `q`: the biconnected block that an extra `p`-`q` edge would join.
    pub fn edges_between(&self, p: usize, q: usize) -> Result<Vec<bool>, GraphError> {
        self.check_node(p)?;
        self.check_node(q)?;
        let mut marked = vec![false; self.edges.len()];
        if p == q {
            return Ok(marked);
        }
        let virtual_edge = self.edges.len();
        let mut adjacency = self.adjacency.clone();
        adjacency[p].push((q, virtual_edge));
        adjacency[q].push((p, virtual_edge));

        // Iterative Tarjan over edges; blocks are popped off an edge stack.
        let n = self.node_count;
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0usize;
        let mut edge_stack: Vec<usize> = Vec::new();
        // (node, parent edge, next adjacency slot)
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();
        disc[p] = timer;
        low[p] = timer;
        timer += 1;
        stack.push((p, usize::MAX, 0));
        while let Some(&mut (v, parent_edge, ref mut slot)) = stack.last_mut() {
            if *slot < adjacency[v].len() {
                let (w, k) = adjacency[v][*slot];
                *slot += 1;
                if k == parent_edge {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push(k);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, k, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push(k);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] >= disc[u] {
                        let mut block = Vec::new();
                        while let Some(k) = edge_stack.pop() {
                            block.push(k);
                            if k == parent_edge {
                                break;
                            }
                        }
                        if block.contains(&virtual_edge) {
                            for k in block {
                                if k != virtual_edge {
                                    marked[k] = true;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(marked)
    }
}

fn steps_origin(g: &Graph, steps: &[PathStep]) -> usize {
    let first = steps[0];
    let e = g.edges[first.edge];
    if first.reversed {
        e.head
    } else {
        e.tail
    }
}
