use std::collections::VecDeque;

use super::ModelError;

/// A directed acyclic graph stored as sorted parent lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// The arc-free DAG on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Self {
            parents: vec![Vec::new(); n],
        }
    }

    /// Builds a DAG from one parent list per vertex. Lists are sorted and
    /// deduplicated; self-loops, out-of-range ids and cycles are rejected.
    pub fn new(mut parents: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let n = parents.len();
        for (v, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            ps.dedup();
            for &p in ps.iter() {
                if p >= n {
                    return Err(ModelError::VertexOutOfRange {
                        vertex: p,
                        count: n,
                    });
                }
                if p == v {
                    return Err(ModelError::SelfLoop(v));
                }
            }
        }
        if !is_acyclic(&parents) {
            return Err(ModelError::Cycle);
        }
        Ok(Self { parents })
    }

    /// Builds a DAG from an arc list `(tail, head)`.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut parents = vec![Vec::new(); n];
        for &(u, v) in arcs {
            if v >= n {
                return Err(ModelError::VertexOutOfRange {
                    vertex: v,
                    count: n,
                });
            }
            parents[v].push(u);
        }
        Self::new(parents)
    }

    pub fn vertex_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Arcs `(u, v)` with `u` a parent of `v`, ordered by head then tail.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(v, ps)| ps.iter().map(move |&u| (u, v)))
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.parents.len()];
        for (u, v) in self.arcs() {
            children[u].push(v);
        }
        children
    }

    /// Returns a copy with the parent sets of some vertices replaced.
    pub fn with_parents(&self, updates: &[(usize, Vec<usize>)]) -> Result<Self, ModelError> {
        let mut parents = self.parents.clone();
        for (v, ps) in updates {
            if *v >= parents.len() {
                return Err(ModelError::VertexOutOfRange {
                    vertex: *v,
                    count: parents.len(),
                });
            }
            parents[*v] = ps.clone();
        }
        Self::new(parents)
    }

    pub fn topological_order(&self) -> Vec<usize> {
        topological_sort(&self.parents).expect("Dag invariant: acyclic")
    }
}

/// Kahn's algorithm over parent lists; `None` when a cycle exists.
/// Out-of-range parents are ignored.
pub fn topological_sort(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for (v, ps) in parents.iter().enumerate() {
        for &u in ps {
            if u < n {
                indegree[v] += 1;
                children[u].push(v);
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &children[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

pub fn is_acyclic(parents: &[Vec<usize>]) -> bool {
    topological_sort(parents).is_some()
}
