use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Graph, ModelError, TreeDecomposition};

/// A total order in which vertices are eliminated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationOrdering {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl EliminationOrdering {
    pub fn new(order: Vec<usize>) -> Result<Self, ModelError> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || position[v] != usize::MAX {
                return Err(ModelError::NotAPermutation(n));
            }
            position[v] = i;
        }
        Ok(Self { order, position })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }
}

/// Plays the elimination game and returns, for every vertex, its neighbours
/// that come later in `order` within the filled graph.
///
/// # Panics
/// If `order` does not cover exactly the vertices of `g`.
pub fn fill_in_closure(order: &EliminationOrdering, g: &Graph) -> Vec<Vec<usize>> {
    assert_eq!(
        order.len(),
        g.vertex_count(),
        "elimination ordering and graph disagree on the vertex count"
    );
    let n = g.vertex_count();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut higher = vec![Vec::new(); n];
    for &v in order.order() {
        let pv = order.position(v);
        let up: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|&w| order.position(w) > pv)
            .collect();
        for (i, &a) in up.iter().enumerate() {
            for &b in &up[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        higher[v] = up;
    }
    higher
}

/// Maximum number of later neighbours of any vertex in the filled graph.
pub fn width_of_elimination(order: &EliminationOrdering, g: &Graph) -> usize {
    fill_in_closure(order, g)
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0)
}

/// Bag of `v` is `v` plus its later filled neighbours; it hangs below the bag
/// of its earliest-eliminated later neighbour. Vertices without later
/// neighbours hang below the last eliminated vertex's bag. Subsumed bags are
/// contracted afterwards.
pub fn td_from_elimination(order: &EliminationOrdering, g: &Graph) -> TreeDecomposition {
    let higher = fill_in_closure(order, g);
    let n = g.vertex_count();
    if n == 0 {
        return TreeDecomposition::new(0, Vec::new(), Vec::new()).expect("empty decomposition");
    }
    let root = *order.order().last().expect("non-empty ordering");
    let mut bags = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n - 1);
    for (v, up) in higher.iter().enumerate() {
        let mut bag = up.clone();
        bag.push(v);
        bags.push(bag);
        let parent = up
            .iter()
            .copied()
            .min_by_key(|&w| order.position(w))
            .unwrap_or(root);
        if v != root {
            edges.push((v, parent));
        }
    }
    TreeDecomposition::new(n, bags, edges)
        .expect("bags built from graph vertices")
        .simplify()
}

/// Greedy min-fill ordering; ties are broken by a random priority drawn from
/// `rng`.
pub fn min_fill_ordering<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> EliminationOrdering {
    let n = g.vertex_count();
    let mut priority: Vec<usize> = (0..n).collect();
    priority.shuffle(rng);
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let fill = |adj: &[BTreeSet<usize>], v: usize| -> usize {
        let ns: Vec<usize> = adj[v].iter().copied().collect();
        let mut missing = 0;
        for (i, &a) in ns.iter().enumerate() {
            for &b in &ns[i + 1..] {
                if !adj[a].contains(&b) {
                    missing += 1;
                }
            }
        }
        missing
    };
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !eliminated[v])
            .min_by_key(|&v| (fill(&adj, v), adj[v].len(), priority[v]))
            .expect("vertices remain");
        let ns: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in ns.iter().enumerate() {
            adj[a].remove(&v);
            for &b in &ns[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        adj[v].clear();
        eliminated[v] = true;
        order.push(v);
    }
    EliminationOrdering::new(order).expect("each vertex eliminated once")
}
