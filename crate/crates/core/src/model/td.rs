use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use super::{Graph, ModelError};

/// A tree decomposition `(T, χ)`: bags indexed by bag id plus the tree edges
/// between bag ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    vertex_count: usize,
    bags: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Bags are sorted and deduplicated. The tree shape itself is not checked
    /// here; see [`validate_td`].
    pub fn new(
        vertex_count: usize,
        mut bags: Vec<Vec<usize>>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, ModelError> {
        for bag in &mut bags {
            bag.sort_unstable();
            bag.dedup();
            if let Some(&v) = bag.iter().find(|&&v| v >= vertex_count) {
                return Err(ModelError::VertexOutOfRange {
                    vertex: v,
                    count: vertex_count,
                });
            }
        }
        for &(a, b) in &edges {
            if a >= bags.len() || b >= bags.len() {
                return Err(ModelError::BadTreeEdge(a, b));
            }
        }
        Ok(Self {
            vertex_count,
            bags,
            edges,
        })
    }

    /// One bag holding every vertex.
    pub fn trivial(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            bags: vec![(0..vertex_count).collect()],
            edges: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn bag_count(&self) -> usize {
        self.bags.len()
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn bag(&self, id: usize) -> &[usize] {
        &self.bags[id]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest bag size minus one (0 for an empty decomposition).
    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    /// Tree adjacency, neighbours sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for ns in &mut adj {
            ns.sort_unstable();
            ns.dedup();
        }
        adj
    }

    /// For every vertex, the ids of the bags containing it.
    pub fn occurrences(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.vertex_count];
        for (id, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                occ[v].push(id);
            }
        }
        occ
    }

    /// Contracts every bag that is a subset of a tree neighbour into that
    /// neighbour and renumbers the survivors. Validity and width are
    /// preserved.
    pub fn simplify(&self) -> Self {
        let n = self.bags.len();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(a, b) in &self.edges {
            if a != b {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut alive = vec![true; n];
        let mut queue: VecDeque<usize> = (0..n).collect();
        while let Some(a) = queue.pop_front() {
            if !alive[a] {
                continue;
            }
            let target = adj[a]
                .iter()
                .copied()
                .find(|&b| is_subset(&self.bags[a], &self.bags[b]));
            let Some(b) = target else { continue };
            let moved: Vec<usize> = adj[a].iter().copied().filter(|&c| c != b).collect();
            for c in moved {
                adj[c].remove(&a);
                adj[c].insert(b);
                adj[b].insert(c);
                queue.push_back(c);
            }
            adj[b].remove(&a);
            adj[a].clear();
            alive[a] = false;
            queue.push_back(b);
        }
        let mut new_id = vec![usize::MAX; n];
        let mut bags = Vec::new();
        for a in 0..n {
            if alive[a] {
                new_id[a] = bags.len();
                bags.push(self.bags[a].clone());
            }
        }
        let mut edges = Vec::new();
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            for &b in &adj[a] {
                if a < b {
                    edges.push((new_id[a], new_id[b]));
                }
            }
        }
        Self {
            vertex_count: self.vertex_count,
            bags,
            edges,
        }
    }
}

fn is_subset(small: &[usize], large: &[usize]) -> bool {
    // both sorted
    let mut it = large.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// A reason a tree decomposition fails for a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdViolation {
    /// The bag graph is not a tree.
    NotATree(String),
    /// T1: no bag contains both endpoints.
    EdgeNotCovered(usize, usize),
    /// T2: the vertex occurs in no bag.
    VertexMissing(usize),
    /// T2: the bags containing the vertex are not connected.
    OccurrenceDisconnected(usize),
}

impl fmt::Display for TdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdViolation::NotATree(why) => write!(f, "bag graph is not a tree: {why}"),
            TdViolation::EdgeNotCovered(u, v) => write!(f, "T1: edge {{{u},{v}}} not covered"),
            TdViolation::VertexMissing(v) => write!(f, "T2: vertex {v} occurs in no bag"),
            TdViolation::OccurrenceDisconnected(v) => {
                write!(f, "T2: bags containing vertex {v} are disconnected")
            }
        }
    }
}

/// Checks the tree shape, T1 and T2, returning every violation found.
pub fn validate_td(td: &TreeDecomposition, g: &Graph) -> Result<Vec<TdViolation>, ModelError> {
    if td.vertex_count() != g.vertex_count() {
        return Err(ModelError::UniverseMismatch {
            td: td.vertex_count(),
            graph: g.vertex_count(),
        });
    }
    let mut violations = Vec::new();
    let adj = td.adjacency();
    let nb = td.bag_count();

    if nb > 0 {
        if td.edges().iter().any(|&(a, b)| a == b) {
            violations.push(TdViolation::NotATree("self-loop tree edge".into()));
        }
        let mut seen = vec![false; nb];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    reached += 1;
                    queue.push_back(b);
                }
            }
        }
        if reached != nb {
            violations.push(TdViolation::NotATree(format!(
                "{} of {nb} bags reachable",
                reached
            )));
        }
        let distinct: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
        if distinct != nb - 1 || td.edges().len() != nb - 1 {
            violations.push(TdViolation::NotATree(format!(
                "{} edges for {nb} bags",
                td.edges().len()
            )));
        }
    }

    let occ = td.occurrences();
    let bag_sets: Vec<BTreeSet<usize>> = td
        .bags()
        .iter()
        .map(|b| b.iter().copied().collect())
        .collect();

    for (u, v) in g.edges() {
        let covered = occ[u].iter().any(|&t| bag_sets[t].contains(&v));
        if !covered {
            violations.push(TdViolation::EdgeNotCovered(u, v));
        }
    }

    for (v, bags_of_v) in occ.iter().enumerate() {
        if bags_of_v.is_empty() {
            violations.push(TdViolation::VertexMissing(v));
            continue;
        }
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut queue = VecDeque::from([bags_of_v[0]]);
        seen.insert(bags_of_v[0]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if bag_sets[b].contains(&v) && seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        if seen.len() != bags_of_v.len() {
            violations.push(TdViolation::OccurrenceDisconnected(v));
        }
    }
    Ok(violations)
}
