//! The local window cut out of the global solution: a budgeted subtree of
//! the tree decomposition, its vertex classification, virtual edges, and
//! per-vertex parent-set menus with the virtual arcs each choice imposes.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Dag, TreeDecomposition};
use crate::scoring::ScoreCache;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubinstanceError {
    #[error("budget below max bag size")]
    BudgetTooSmall,
    #[error("tree decomposition has no bags")]
    NoBags,
    #[error("selected bag set is empty")]
    EmptySelection,
    #[error("current parent set {parents:?} of vertex {vertex} is missing from its menu")]
    MissingIncumbent { vertex: usize, parents: Vec<usize> },
}

/// One admissible parent set of a local vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct MenuEntry {
    /// Global ids, sorted.
    pub parents: Vec<usize>,
    /// Local ids of the parents inside the window, sorted.
    pub local_parents: Vec<usize>,
    pub score: f64,
    /// `score − f_∅(v)`, never negative.
    pub offset: f64,
    /// Local ids `u` such that choosing this entry forces the arc `(u, v)`.
    pub forced_sources: Vec<usize>,
}

impl MenuEntry {
    pub fn has_external_parents(&self) -> bool {
        self.local_parents.len() < self.parents.len()
    }
}

/// A connected component of the tree after removing the selected bags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutsideComponent {
    pub bags: Vec<usize>,
    /// The selected bag `s_i` on the tree edge into this component.
    pub selected_neighbor: usize,
    /// The component bag `t_i` on that edge.
    pub attach_bag: usize,
    /// Window vertices occurring in the component (global ids, sorted).
    pub boundary: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subinstance {
    pub selected_bags: Vec<usize>,
    /// Global ids, sorted; position in this list is the local id.
    pub vertices: Vec<usize>,
    pub boundary: Vec<usize>,
    pub internal: Vec<usize>,
    /// Local id pairs `(a, b)` with `a < b`.
    pub virtual_edges: Vec<(usize, usize)>,
    /// Indexed by local id.
    pub menus: Vec<Vec<MenuEntry>>,
    /// Index of the current parent set in each menu.
    pub incumbent: Vec<usize>,
    /// Sum of empty-set scores over the window.
    pub alpha: f64,
    /// Sum of incumbent offsets.
    pub current_weight: f64,
    pub components: Vec<OutsideComponent>,
}

/// Grows a connected bag set breadth-first from a seeded random root, adding
/// a bag whenever the vertex union stays within `budget`. Neighbours are
/// visited in ascending id order. A root too large on its own is skipped in
/// favour of another random root.
pub fn select_subtree(
    td: &TreeDecomposition,
    budget: usize,
    seed: u64,
) -> Result<Vec<usize>, SubinstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    select_subtree_with(td, budget, &mut rng)
}

pub fn select_subtree_with<R: Rng + ?Sized>(
    td: &TreeDecomposition,
    budget: usize,
    rng: &mut R,
) -> Result<Vec<usize>, SubinstanceError> {
    if td.bag_count() == 0 {
        return Err(SubinstanceError::NoBags);
    }
    let mut roots: Vec<usize> = (0..td.bag_count()).collect();
    roots.shuffle(rng);
    let root = roots
        .into_iter()
        .find(|&b| td.bag(b).len() <= budget)
        .ok_or(SubinstanceError::BudgetTooSmall)?;
    Ok(grow_from(td, budget, root))
}

/// Breadth-first growth from a fixed root (which must fit the budget).
pub fn grow_from(td: &TreeDecomposition, budget: usize, root: usize) -> Vec<usize> {
    let adj = td.adjacency();
    let mut covered: BTreeSet<usize> = td.bag(root).iter().copied().collect();
    let mut seen = vec![false; td.bag_count()];
    let mut selected = vec![root];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(b) = queue.pop_front() {
        for &c in &adj[b] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            let extra = td.bag(c).iter().filter(|v| !covered.contains(v)).count();
            // V_S only grows, so a bag that does not fit now never will
            if covered.len() + extra <= budget {
                covered.extend(td.bag(c).iter().copied());
                selected.push(c);
                queue.push_back(c);
            }
        }
    }
    selected.sort_unstable();
    selected
}

/// Splits the window vertices into those occurring in an unselected bag and
/// the rest.
pub fn classify_vertices(td: &TreeDecomposition, selected: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let is_sel = selection_mask(td, selected);
    let mut inside = BTreeSet::new();
    let mut outside = BTreeSet::new();
    for (id, bag) in td.bags().iter().enumerate() {
        if is_sel[id] {
            inside.extend(bag.iter().copied());
        } else {
            outside.extend(bag.iter().copied());
        }
    }
    inside
        .into_iter()
        .partition(|v| outside.contains(v))
}

/// Pairs of boundary vertices that share an unselected bag (global ids,
/// `u < v`, sorted).
pub fn virtual_edges(
    td: &TreeDecomposition,
    selected: &[usize],
    boundary: &[usize],
) -> Vec<(usize, usize)> {
    let is_sel = selection_mask(td, selected);
    let mut out = BTreeSet::new();
    for (id, bag) in td.bags().iter().enumerate() {
        if is_sel[id] {
            continue;
        }
        let inner: Vec<usize> = bag
            .iter()
            .copied()
            .filter(|v| boundary.binary_search(v).is_ok())
            .collect();
        for (i, &u) in inner.iter().enumerate() {
            for &v in &inner[i + 1..] {
                out.insert((u, v));
            }
        }
    }
    out.into_iter().collect()
}

fn selection_mask(td: &TreeDecomposition, selected: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; td.bag_count()];
    for &b in selected {
        mask[b] = true;
    }
    mask
}

/// Window vertices `u` with a directed path `u → … → x` whose vertices
/// other than `u` are all external. `x` must be external.
pub fn external_path_sources(parents: &[Vec<usize>], in_window: &[bool], x: usize) -> BTreeSet<usize> {
    debug_assert!(!in_window[x]);
    let mut sources = BTreeSet::new();
    let mut seen = vec![false; parents.len()];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(y) = stack.pop() {
        for &p in &parents[y] {
            if in_window[p] {
                sources.insert(p);
            } else if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    sources
}

impl Subinstance {
    /// Builds the local problem for a connected set of selected bags.
    pub fn build(
        cache: &ScoreCache,
        dag: &Dag,
        td: &TreeDecomposition,
        selected: &[usize],
    ) -> Result<Self, SubinstanceError> {
        if selected.is_empty() {
            return Err(SubinstanceError::EmptySelection);
        }
        let mut selected_bags = selected.to_vec();
        selected_bags.sort_unstable();
        selected_bags.dedup();
        let n = dag.vertex_count();
        let is_sel = selection_mask(td, &selected_bags);

        let (boundary, internal) = classify_vertices(td, &selected_bags);
        let mut vertices: Vec<usize> = boundary.iter().chain(&internal).copied().collect();
        vertices.sort_unstable();
        let mut local = vec![usize::MAX; n];
        let mut in_window = vec![false; n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
            in_window[v] = true;
        }

        let virtual_edges: Vec<(usize, usize)> = virtual_edges(td, &selected_bags, &boundary)
            .into_iter()
            .map(|(u, v)| (local[u], local[v]))
            .collect();
        debug_assert!(virtual_edges.iter().all(|&(a, b)| {
            let (u, v) = (vertices[a], vertices[b]);
            selected_bags
                .iter()
                .any(|&s| td.bag(s).contains(&u) && td.bag(s).contains(&v))
        }));

        let occurrences = td.occurrences();
        let mut sources_of: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        let mut menus = Vec::with_capacity(vertices.len());
        let mut incumbent = Vec::with_capacity(vertices.len());
        let mut alpha = 0.0;
        let mut current_weight = 0.0;
        for (lv, &v) in vertices.iter().enumerate() {
            let empty = cache.empty_score(v);
            alpha += empty;
            let mut menu = Vec::new();
            for entry in cache.entries(v) {
                let external: Vec<usize> = entry
                    .parents
                    .iter()
                    .copied()
                    .filter(|&p| !in_window[p])
                    .collect();
                let mut forced = BTreeSet::new();
                if !external.is_empty() {
                    let witnessed = occurrences[v].iter().any(|&t| {
                        !is_sel[t] && entry.parents.iter().all(|p| td.bag(t).contains(p))
                    });
                    if !witnessed {
                        continue;
                    }
                    for &x in &external {
                        let srcs = sources_of
                            .entry(x)
                            .or_insert_with(|| external_path_sources(dag.parent_sets(), &in_window, x));
                        forced.extend(srcs.iter().copied());
                    }
                    if forced.contains(&v) {
                        continue;
                    }
                }
                menu.push(MenuEntry {
                    parents: entry.parents.clone(),
                    local_parents: entry
                        .parents
                        .iter()
                        .filter(|&&p| in_window[p])
                        .map(|&p| local[p])
                        .collect(),
                    score: entry.score,
                    offset: (entry.score - empty).max(0.0),
                    forced_sources: forced.into_iter().map(|u| local[u]).collect(),
                });
            }
            let current = dag.parents(v);
            let idx = menu
                .iter()
                .position(|e| e.parents == current)
                .ok_or_else(|| SubinstanceError::MissingIncumbent {
                    vertex: v,
                    parents: current.to_vec(),
                })?;
            current_weight += menu[idx].offset;
            debug_assert!(menu.iter().all(|e| e
                .forced_sources
                .iter()
                .all(|&u| virtual_edges.contains(&(u.min(lv), u.max(lv))))));
            incumbent.push(idx);
            menus.push(menu);
        }

        let components = outside_components(td, &is_sel, &in_window);
        Ok(Self {
            selected_bags,
            vertices,
            boundary,
            internal,
            virtual_edges,
            menus,
            incumbent,
            alpha,
            current_weight,
            components,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Product of menu sizes, saturating.
    pub fn combination_count(&self) -> u128 {
        self.menus
            .iter()
            .fold(1u128, |acc, m| acc.saturating_mul(m.len() as u128))
    }

    /// Structured text listing for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let list = |xs: &[usize]| {
            xs.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "bags: {}", list(&self.selected_bags));
        let _ = writeln!(out, "vertices: {}", list(&self.vertices));
        let _ = writeln!(out, "boundary: {}", list(&self.boundary));
        let _ = writeln!(out, "internal: {}", list(&self.internal));
        let edges: Vec<String> = self
            .virtual_edges
            .iter()
            .map(|&(a, b)| format!("{}-{}", self.vertices[a], self.vertices[b]))
            .collect();
        let _ = writeln!(out, "virtual edges: {}", edges.join(" "));
        let _ = writeln!(out, "alpha: {}", self.alpha);
        let _ = writeln!(out, "current weight: {}", self.current_weight);
        for (lv, menu) in self.menus.iter().enumerate() {
            let _ = writeln!(
                out,
                "menu {} ({} entries, current {:?}):",
                self.vertices[lv],
                menu.len(),
                menu[self.incumbent[lv]].parents
            );
            for e in menu {
                let forced: Vec<usize> = e.forced_sources.iter().map(|&u| self.vertices[u]).collect();
                let _ = writeln!(
                    out,
                    "  {:?} offset {} forced from {:?}",
                    e.parents, e.offset, forced
                );
            }
        }
        for c in &self.components {
            let _ = writeln!(
                out,
                "component bags {} via {}-{} boundary {}",
                list(&c.bags),
                c.selected_neighbor,
                c.attach_bag,
                list(&c.boundary)
            );
        }
        out
    }
}

fn outside_components(
    td: &TreeDecomposition,
    is_sel: &[bool],
    in_window: &[bool],
) -> Vec<OutsideComponent> {
    let adj = td.adjacency();
    let mut seen = is_sel.to_vec();
    let mut components = Vec::new();
    for start in 0..td.bag_count() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut bags = vec![start];
        let mut attach = None;
        let mut i = 0;
        while i < bags.len() {
            let b = bags[i];
            i += 1;
            for &c in &adj[b] {
                if is_sel[c] {
                    debug_assert!(attach.is_none(), "tree has one edge into each component");
                    attach = Some((c, b));
                } else if !seen[c] {
                    seen[c] = true;
                    bags.push(c);
                }
            }
        }
        bags.sort_unstable();
        let boundary: BTreeSet<usize> = bags
            .iter()
            .flat_map(|&b| td.bag(b).iter().copied())
            .filter(|&v| in_window[v])
            .collect();
        // a disconnected forest piece has no attach edge; anchor it anywhere
        let (selected_neighbor, attach_bag) = attach.unwrap_or((usize::MAX, start));
        components.push(OutsideComponent {
            bags,
            selected_neighbor,
            attach_bag,
            boundary: boundary.into_iter().collect(),
        });
    }
    components
}
