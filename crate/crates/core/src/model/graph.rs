use std::collections::BTreeSet;

use super::Dag;

/// Simple undirected graph with sorted adjacency sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

/// The moralized graph of a DAG is an ordinary undirected graph.
pub type MoralGraph = Graph;

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds `{u, v}`; loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Undirects every arc and marries every pair of co-parents.
pub fn moralize(dag: &Dag) -> MoralGraph {
    let mut g = Graph::new(dag.vertex_count());
    for v in 0..dag.vertex_count() {
        let ps = dag.parents(v);
        for (i, &u) in ps.iter().enumerate() {
            g.add_edge(u, v);
            for &w in &ps[i + 1..] {
                g.add_edge(u, w);
            }
        }
    }
    g
}
