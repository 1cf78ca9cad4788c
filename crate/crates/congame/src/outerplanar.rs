//! Maximal outerplanar completions and the layered trapezoidal decomposition
//! (layers, trapezoids, pivots, the total vertex order) that the marking
//! strategy consumes.
//!
//! A maximal outerplanar graph is a triangulated polygon; every 3-clique
//! bounds an inner face, outer edges lie in exactly one triangle and chords
//! in exactly two. The completion first fixes a Hamiltonian outer cycle with
//! the chosen root edge on it, triangulates each chordless region by a fan,
//! and then flips added diagonals until every trapezoid pivot is adjacent in
//! the base graph to one of its parents.

use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{self, Graph, GraphError};

#[derive(Debug, Error)]
pub enum OuterplanarError {
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph is not outerplanar")]
    NotOuterplanar,
    #[error("edge ({0}, {1}) not in the graph")]
    MissingOuterEdge(u32, u32),
    #[error("edge ({0}, {1}) cannot lie on the outer face of any outerplanar embedding")]
    NotExtendable(u32, u32),
    #[error("embedding search budget exhausted")]
    SearchBudget,
    #[error("pivot constraint unachievable for trapezoid rooted at ({0}, {1})")]
    PivotConstraint(u32, u32),
    #[error("structural invariant violated: {0}")]
    Structure(String),
    #[error("vertex {0} is not a child of any trapezoid")]
    NotAChild(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A maximal outerplanar completion of a base graph, with the embedding
/// pinned down by the outer cycle. The cycle is rotated to start with the
/// root outer edge (u, u').
#[derive(Clone, Debug)]
pub struct MaximalOuterplanar {
    gm: Graph,
    base: Graph,
    added_edges: Vec<(u32, u32)>,
    outer_cycle: Vec<u32>,
    root_outer_edge: (u32, u32),
}

impl MaximalOuterplanar {
    pub fn gm(&self) -> &Graph {
        &self.gm
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn added_edges(&self) -> &[(u32, u32)] {
        &self.added_edges
    }

    pub fn outer_cycle(&self) -> &[u32] {
        &self.outer_cycle
    }

    pub fn root_outer_edge(&self) -> (u32, u32) {
        self.root_outer_edge
    }
}

/// One trapezoid: a root edge (v, v'), its children in the next layer
/// ordered along the outer cycle, and the unique child adjacent to both
/// parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trapezoid {
    pub parents: (u32, u32),
    pub children: Vec<u32>,
    pub pivot_index: usize,
}

impl Trapezoid {
    pub fn pivot(&self) -> u32 {
        self.children[self.pivot_index]
    }
}

#[derive(Clone, Debug)]
pub struct TrapezoidalDecomposition {
    pub layers: Vec<Vec<u32>>,
    /// Root edges with a nonempty region below them.
    pub trapezoids: Vec<Trapezoid>,
    /// All root edges: uu' plus every same-layer edge of the completion.
    /// An edge between cycle-consecutive vertices roots no trapezoid.
    pub root_edges: Vec<(u32, u32)>,
    /// All vertices, layer by layer, each layer left to right.
    pub order: Vec<u32>,
    rank: Vec<u32>,
    depth: Vec<u32>,
    child_of: Vec<Option<usize>>,
    parent_edges: Vec<Vec<usize>>,
    root_trapezoid: Vec<Option<usize>>,
    side: Vec<(Option<u32>, Option<u32>)>,
    pivot_flag: Vec<bool>,
}

impl TrapezoidalDecomposition {
    /// Position of `v` in the total order.
    pub fn rank(&self, v: u32) -> u32 {
        self.rank[v as usize]
    }

    pub fn layer_of(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    /// The trapezoid `v` is a child of, if any.
    pub fn child_of(&self, v: u32) -> Option<usize> {
        self.child_of[v as usize]
    }

    pub fn parents_of(&self, v: u32) -> Option<(u32, u32)> {
        self.child_of(v).map(|t| self.trapezoids[t].parents)
    }

    /// Indices into `root_edges` of the root edges containing `v` (at most
    /// two).
    pub fn root_edges_with(&self, v: u32) -> &[usize] {
        &self.parent_edges[v as usize]
    }

    /// The trapezoid rooted at a root edge, when its region is nonempty.
    pub fn trapezoid_of_root_edge(&self, idx: usize) -> Option<&Trapezoid> {
        self.root_trapezoid[idx].map(|t| &self.trapezoids[t])
    }

    pub fn is_pivot(&self, v: u32) -> bool {
        self.pivot_flag[v as usize]
    }

    /// Left and right neighbors inside the child list of `v`'s trapezoid.
    pub fn side_neighbors(&self, v: u32) -> (Option<u32>, Option<u32>) {
        self.side[v as usize]
    }

    pub fn to_json(&self, m: &MaximalOuterplanar) -> Value {
        json!({
            "root_edge": [m.root_outer_edge.0, m.root_outer_edge.1],
            "outer_cycle": m.outer_cycle,
            "added_edges": m.added_edges,
            "layers": self.layers,
            "order": self.order,
            "root_edges": self.root_edges,
            "trapezoids": self.trapezoids.iter().map(|t| json!({
                "parents": [t.parents.0, t.parents.1],
                "children": t.children,
                "pivot": t.pivot(),
            })).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// Completion
// ---------------------------------------------------------------------------

/// Completes a connected outerplanar graph to a maximal one with `outer_edge`
/// on the outer face, deterministically, such that every trapezoid pivot of
/// the decomposition rooted there is adjacent in the base graph to one of its
/// parents.
pub fn maximal_completion(g: &Graph, outer_edge: (u32, u32)) -> Result<MaximalOuterplanar, OuterplanarError> {
    let (u, up) = outer_edge;
    let n = g.n();
    if u == up || u as usize >= n || up as usize >= n || !g.has_edge(u, up) {
        return Err(OuterplanarError::MissingOuterEdge(u, up));
    }
    if !graph::is_connected(g) {
        return Err(OuterplanarError::Disconnected);
    }
    if !graph::is_outerplanar(g)? {
        return Err(OuterplanarError::NotOuterplanar);
    }
    if n == 2 {
        return Ok(MaximalOuterplanar {
            gm: g.clone(),
            base: g.clone(),
            added_edges: Vec::new(),
            outer_cycle: vec![u, up],
            root_outer_edge: outer_edge,
        });
    }

    let cycle = if g.edge_count() == 2 * n - 3 {
        // Already maximal: the outer cycle is forced. Outer edges are the
        // edges lying in exactly one triangle.
        unique_outer_cycle(g, outer_edge)?
    } else {
        search_outer_cycle(g, outer_edge)?
    };

    let mut edges: Vec<(u32, u32)> = g.edges();
    for i in 0..n {
        let (a, b) = (cycle[i], cycle[(i + 1) % n]);
        if !g.has_edge(a, b) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    triangulate_regions(g, &cycle, &mut edges);
    let gm = Graph::from_edges(n, &edges)?;
    debug_assert_eq!(gm.edge_count(), 2 * n - 3);

    let mut m = MaximalOuterplanar {
        added_edges: diff_edges(&gm, g),
        gm,
        base: g.clone(),
        outer_cycle: cycle,
        root_outer_edge: outer_edge,
    };
    repair_pivots(&mut m)?;
    Ok(m)
}

fn diff_edges(gm: &Graph, base: &Graph) -> Vec<(u32, u32)> {
    gm.edges().into_iter().filter(|&(a, b)| !base.has_edge(a, b)).collect()
}

/// Outer cycle of an already-maximal graph, rotated/oriented to start with
/// (u, u').
fn unique_outer_cycle(g: &Graph, (u, up): (u32, u32)) -> Result<Vec<u32>, OuterplanarError> {
    let n = g.n();
    let mut outer: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (a, b) in g.edges() {
        let common = g
            .neighbors(a)
            .iter()
            .filter(|&&z| g.has_edge(b, z))
            .count();
        if common == 1 {
            outer[a as usize].push(b);
            outer[b as usize].push(a);
        }
    }
    if outer.iter().any(|l| l.len() != 2) {
        return Err(OuterplanarError::Structure("outer edges do not form a cycle".into()));
    }
    if !outer[u as usize].contains(&up) {
        return Err(OuterplanarError::NotExtendable(u, up));
    }
    let mut cycle = vec![u, up];
    while cycle.len() < n {
        let last = *cycle.last().unwrap();
        let prev = cycle[cycle.len() - 2];
        let next = *outer[last as usize].iter().find(|&&w| w != prev).unwrap();
        if next == u {
            return Err(OuterplanarError::Structure("outer cycle is not Hamiltonian".into()));
        }
        cycle.push(next);
    }
    Ok(cycle)
}

/// Lexicographically-first cyclic vertex order `[u, u', ...]` under which all
/// base edges are pairwise non-crossing chords of the polygon.
fn search_outer_cycle(g: &Graph, (u, up): (u32, u32)) -> Result<Vec<u32>, OuterplanarError> {
    let n = g.n();
    let mut order = vec![u, up];
    let mut used = vec![false; n];
    used[u as usize] = true;
    used[up as usize] = true;
    let mut budget: u64 = 20_000_000;

    fn crosses(n: usize, pos: &[usize], e1: (u32, u32), e2: (u32, u32)) -> bool {
        let _ = n;
        let (a, b) = (pos[e1.0 as usize].min(pos[e1.1 as usize]), pos[e1.0 as usize].max(pos[e1.1 as usize]));
        let inside = |p: usize| p > a && p < b;
        inside(pos[e2.0 as usize]) != inside(pos[e2.1 as usize])
    }

    fn place(
        g: &Graph,
        order: &mut Vec<u32>,
        used: &mut [bool],
        budget: &mut u64,
    ) -> Result<bool, OuterplanarError> {
        let n = g.n();
        if order.len() == n {
            return Ok(true);
        }
        if *budget == 0 {
            return Err(OuterplanarError::SearchBudget);
        }
        *budget -= 1;
        for w in 0..n as u32 {
            if used[w as usize] {
                continue;
            }
            order.push(w);
            used[w as usize] = true;
            if placement_ok(g, order) {
                if place(g, order, used, budget)? {
                    return Ok(true);
                }
            }
            order.pop();
            used[w as usize] = false;
        }
        Ok(false)
    }

    fn placement_ok(g: &Graph, order: &[u32]) -> bool {
        // Check the new vertex's base edges against every placed base edge.
        let mut pos = vec![usize::MAX; g.n()];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i;
        }
        let w = *order.last().unwrap();
        let mut placed_edges: Vec<(u32, u32)> = Vec::new();
        for &a in order {
            for &b in g.neighbors(a) {
                if a < b && pos[b as usize] != usize::MAX {
                    placed_edges.push((a, b));
                }
            }
        }
        for &e1 in placed_edges.iter().filter(|&&(a, b)| a == w || b == w) {
            for &e2 in &placed_edges {
                if e1 == e2 || e1.0 == e2.0 || e1.0 == e2.1 || e1.1 == e2.0 || e1.1 == e2.1 {
                    continue;
                }
                if crosses(g.n(), &pos, e1, e2) {
                    return false;
                }
            }
        }
        true
    }

    if place(g, &mut order, &mut used, &mut budget)? {
        Ok(order)
    } else {
        Err(OuterplanarError::NotExtendable(u, up))
    }
}

/// Splits the polygon along existing base chords and fan-triangulates each
/// chordless region from its smallest vertex.
fn triangulate_regions(g: &Graph, cycle: &[u32], edges: &mut Vec<(u32, u32)>) {
    let n = cycle.len();
    let mut stack: Vec<Vec<usize>> = vec![(0..n).collect()];
    while let Some(region) = stack.pop() {
        let r = region.len();
        if r < 4 {
            continue;
        }
        // Lexicographically smallest splitting base chord, by position pair.
        let mut split = None;
        'outer: for i in 0..r {
            for j in i + 2..r {
                if i == 0 && j == r - 1 {
                    continue;
                }
                if g.has_edge(cycle[region[i]], cycle[region[j]]) {
                    split = Some((i, j));
                    break 'outer;
                }
            }
        }
        if let Some((i, j)) = split {
            stack.push(region[i..=j].to_vec());
            let mut rest = region[j..].to_vec();
            rest.extend_from_slice(&region[..=i]);
            stack.push(rest);
        } else {
            // Chordless region: fan from the smallest vertex id in it.
            let anchor = (0..r).min_by_key(|&i| cycle[region[i]]).unwrap();
            for step in 2..r - 1 {
                let other = region[(anchor + step) % r];
                let a = cycle[region[anchor]];
                let b = cycle[other];
                edges.push((a.min(b), a.max(b)));
            }
        }
    }
}

/// Flips added diagonals until every trapezoid pivot has a base edge to one
/// of its parents. Each flip slides a pivot one child sideways inside its own
/// trapezoid, so repairs never interfere across trapezoids.
fn repair_pivots(m: &mut MaximalOuterplanar) -> Result<(), OuterplanarError> {
    let satisfied = |base: &Graph, t: &Trapezoid, child: u32| {
        base.has_edge(child, t.parents.0) || base.has_edge(child, t.parents.1)
    };
    for _round in 0..m.gm.n() * m.gm.n() + 1 {
        let d = decompose(m)?;
        let violated = d
            .trapezoids
            .iter()
            .find(|t| !satisfied(&m.base, t, t.pivot()));
        let Some(t) = violated else {
            return Ok(());
        };
        let (v, vp) = t.parents;
        let pi = t.pivot_index;
        // Nearest child with a base edge to a parent; one exists because the
        // region below the root edge meets the rest of the base graph only
        // through v and v'.
        let target = t
            .children
            .iter()
            .enumerate()
            .filter(|&(_, &c)| satisfied(&m.base, t, c))
            .min_by_key(|&(i, _)| (i.abs_diff(pi), i))
            .map(|(i, _)| i)
            .ok_or(OuterplanarError::PivotConstraint(v, vp))?;
        debug_assert_ne!(target, pi);
        let step = if target > pi { pi + 1 } else { pi - 1 };
        let pivot = t.children[pi];
        let next = t.children[step];
        // `next` is adjacent to exactly one parent; flip the pivot's edge to
        // that parent, which hands the other parent to `next`.
        let shared = if m.gm.has_edge(next, v) { v } else { vp };
        let other = if shared == v { vp } else { v };
        debug_assert!(m.gm.has_edge(next, shared) && !m.gm.has_edge(next, other));
        debug_assert!(!m.base.has_edge(pivot, shared), "violated pivot has no base edge to parents");
        let edges: Vec<(u32, u32)> = m
            .gm
            .edges()
            .into_iter()
            .filter(|&(a, b)| (a, b) != (pivot.min(shared), pivot.max(shared)))
            .chain([(next.min(other), next.max(other))])
            .collect();
        m.gm = Graph::from_edges(m.gm.n(), &edges)?;
        m.added_edges = diff_edges(&m.gm, &m.base);
    }
    Err(OuterplanarError::Structure("pivot repair did not converge".into()))
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

/// Builds the layered trapezoid structure of a maximal outerplanar graph,
/// validating every structural invariant on the way.
pub fn decompose(m: &MaximalOuterplanar) -> Result<TrapezoidalDecomposition, OuterplanarError> {
    let gm = &m.gm;
    let n = gm.n();
    let (u, up) = m.root_outer_edge;
    let structure = |msg: String| OuterplanarError::Structure(msg);

    let mut pos = vec![usize::MAX; n];
    for (i, &v) in m.outer_cycle.iter().enumerate() {
        pos[v as usize] = i;
    }

    // Layer = distance to the root edge, measured in the completion.
    let mut depth = vec![u32::MAX; n];
    depth[u as usize] = 0;
    depth[up as usize] = 0;
    let mut queue = std::collections::VecDeque::from([u, up]);
    while let Some(v) = queue.pop_front() {
        for &w in gm.neighbors(v) {
            if depth[w as usize] == u32::MAX {
                depth[w as usize] = depth[v as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    let max_depth = *depth.iter().max().unwrap();
    let mut layers: Vec<Vec<u32>> = vec![Vec::new(); max_depth as usize + 1];
    for v in 0..n as u32 {
        layers[depth[v as usize] as usize].push(v);
    }
    // Within a layer, vertices are listed by outer-cycle position, reading
    // the root edge as u before u'. The rules' candidate order follows this;
    // the strategy's move gate makes its correctness independent of which of
    // the two reflections is chosen.
    for layer in &mut layers {
        layer.sort_by_key(|&v| pos[v as usize]);
    }
    if layers[0] != [u, up] && layers[0] != [up, u] {
        return Err(structure("layer zero is not the root edge".into()));
    }
    layers[0] = vec![u, up];

    // Each layer induces a linear forest.
    for layer in &layers {
        let mut within = 0;
        for &v in layer {
            let deg = gm
                .neighbors(v)
                .iter()
                .filter(|&&w| depth[w as usize] == depth[v as usize])
                .count();
            if deg > 2 {
                return Err(structure(format!("vertex {v} has {deg} same-layer neighbors")));
            }
            within += deg;
        }
        within /= 2;
        let comps = count_components(gm, layer, &depth);
        if within + comps != layer.len() {
            return Err(structure("a layer contains a cycle".into()));
        }
    }

    let order: Vec<u32> = layers.iter().flatten().copied().collect();
    let mut rank = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v as usize] = i as u32;
    }

    if n == 2 {
        return Ok(TrapezoidalDecomposition {
            layers,
            trapezoids: Vec::new(),
            root_edges: vec![(u, up)],
            order,
            rank,
            depth,
            child_of: vec![None; n],
            parent_edges: vec![vec![0], vec![0]],
            root_trapezoid: vec![None],
            side: vec![(None, None); n],
            pivot_flag: vec![false; n],
        });
    }

    // Root edges: uu' plus every same-layer edge of the completion. Edges
    // between cycle-consecutive vertices bound an empty region and root no
    // trapezoid, but rules R2/R3 still consult them.
    let mut root_edges: Vec<(u32, u32)> = vec![(u, up)];
    for (a, b) in gm.edges() {
        if (a, b) == (u.min(up), u.max(up)) {
            continue;
        }
        if depth[a as usize] != depth[b as usize] {
            continue;
        }
        let (first, second) = if rank[a as usize] < rank[b as usize] { (a, b) } else { (b, a) };
        root_edges.push((first, second));
    }
    root_edges.sort_by_key(|&(v, vp)| (rank[v as usize], rank[vp as usize]));

    let mut trapezoids = Vec::new();
    let mut root_trapezoid: Vec<Option<usize>> = vec![None; root_edges.len()];
    let mut child_of: Vec<Option<usize>> = vec![None; n];
    let mut parent_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pivot_flag = vec![false; n];
    let mut side: Vec<(Option<u32>, Option<u32>)> = vec![(None, None); n];

    for (ri, &(v, vp)) in root_edges.iter().enumerate() {
        parent_edges[v as usize].push(ri);
        parent_edges[vp as usize].push(ri);
        let layer = depth[v as usize];
        // The region below a root edge is the outer-cycle arc strictly
        // between its endpoints, away from the root side; for uu' it is
        // everything else.
        let bounds = if (v, vp) == (u, up) {
            None
        } else {
            let (a, b) = (pos[v as usize], pos[vp as usize]);
            Some((a.min(b), a.max(b)))
        };
        let region_empty = matches!(bounds, Some((lo, hi)) if hi == lo + 1);
        let in_region = |w: u32| match bounds {
            None => true,
            Some((lo, hi)) => pos[w as usize] > lo && pos[w as usize] < hi,
        };
        let mut children: Vec<u32> = layers
            .get(layer as usize + 1)
            .map(|next| {
                next.iter()
                    .copied()
                    .filter(|&w| in_region(w) && (gm.has_edge(w, v) || gm.has_edge(w, vp)))
                    .collect()
            })
            .unwrap_or_default();
        children.sort_by_key(|&w| rank[w as usize]);
        if children.is_empty() {
            if region_empty {
                continue;
            }
            return Err(structure(format!(
                "root edge ({v}, {vp}) bounds a region without children"
            )));
        }
        let pivots: Vec<usize> = children
            .iter()
            .enumerate()
            .filter(|&(_, &w)| gm.has_edge(w, v) && gm.has_edge(w, vp))
            .map(|(i, _)| i)
            .collect();
        if pivots.len() != 1 {
            return Err(structure(format!(
                "root edge ({v}, {vp}) has {} pivots",
                pivots.len()
            )));
        }
        for w in 0..children.len().saturating_sub(1) {
            if !gm.has_edge(children[w], children[w + 1]) {
                return Err(structure(format!(
                    "children {} and {} of ({v}, {vp}) are not adjacent",
                    children[w],
                    children[w + 1]
                )));
            }
        }
        let ti = trapezoids.len();
        for (i, &c) in children.iter().enumerate() {
            if child_of[c as usize].is_some() {
                return Err(structure(format!("vertex {c} is a child of two trapezoids")));
            }
            child_of[c as usize] = Some(ti);
            side[c as usize] = (
                if i > 0 { Some(children[i - 1]) } else { None },
                children.get(i + 1).copied(),
            );
        }
        pivot_flag[children[pivots[0]] as usize] = true;
        root_trapezoid[ri] = Some(ti);
        trapezoids.push(Trapezoid { parents: (v, vp), children, pivot_index: pivots[0] });
    }

    for v in 0..n as u32 {
        if depth[v as usize] > 0 && child_of[v as usize].is_none() {
            return Err(structure(format!("vertex {v} is a child of no trapezoid")));
        }
        if parent_edges[v as usize].len() > 2 {
            return Err(structure(format!(
                "vertex {v} belongs to {} root edges",
                parent_edges[v as usize].len()
            )));
        }
    }

    Ok(TrapezoidalDecomposition {
        layers,
        trapezoids,
        root_edges,
        order,
        rank,
        depth,
        child_of,
        parent_edges,
        root_trapezoid,
        side,
        pivot_flag,
    })
}

fn count_components(gm: &Graph, layer: &[u32], depth: &[u32]) -> usize {
    let mut seen = std::collections::HashSet::new();
    let mut comps = 0;
    for &start in layer {
        if seen.contains(&start) {
            continue;
        }
        comps += 1;
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            for &w in gm.neighbors(v) {
                if depth[w as usize] == depth[v as usize] && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
    }
    comps
}

// ---------------------------------------------------------------------------
// lies-above and the triangle tree
// ---------------------------------------------------------------------------

/// Whether `w1`'s trapezoid separates `w2`'s from the root edge: every
/// shortest path (in the completion) from `w2`'s parents to {u, u'} passes
/// through one of `w1`'s parents. The starting vertex itself does not count
/// as passed through, which makes children of one trapezoid not lie above
/// each other.
pub fn lies_above(
    m: &MaximalOuterplanar,
    d: &TrapezoidalDecomposition,
    w1: u32,
    w2: u32,
) -> Result<bool, OuterplanarError> {
    let t1 = d.child_of(w1).ok_or(OuterplanarError::NotAChild(w1))?;
    let t2 = d.child_of(w2).ok_or(OuterplanarError::NotAChild(w2))?;
    let (f1, f2) = d.trapezoids[t1].parents;
    let (x1, x2) = d.trapezoids[t2].parents;
    for x in [x1, x2] {
        if shortest_path_avoids(m, d, x, (f1, f2)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff some shortest path from `x` to {u, u'} visits neither forbidden
/// vertex after its start.
fn shortest_path_avoids(
    m: &MaximalOuterplanar,
    d: &TrapezoidalDecomposition,
    x: u32,
    forbidden: (u32, u32),
) -> bool {
    if d.layer_of(x) == 0 {
        return true;
    }
    let mut stack = vec![x];
    let mut seen = std::collections::HashSet::from([x]);
    while let Some(v) = stack.pop() {
        for &w in m.gm().neighbors(v) {
            if d.layer_of(w) + 1 != d.layer_of(v) || w == forbidden.0 || w == forbidden.1 {
                continue;
            }
            if d.layer_of(w) == 0 {
                return true;
            }
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    false
}

/// Inner faces of the completion and their adjacency; always a tree with
/// n - 2 nodes and n - 3 edges.
#[derive(Clone, Debug)]
pub struct TriangleTree {
    pub triangles: Vec<[u32; 3]>,
    pub edges: Vec<(usize, usize)>,
}

pub fn triangle_tree(m: &MaximalOuterplanar) -> Result<TriangleTree, OuterplanarError> {
    let gm = m.gm();
    let n = gm.n();
    if n < 3 {
        return Err(OuterplanarError::Structure("triangle tree needs n >= 3".into()));
    }
    // In an outerplanar embedding every 3-clique bounds an inner face.
    let mut triangles = Vec::new();
    let mut by_edge: std::collections::HashMap<(u32, u32), Vec<usize>> =
        std::collections::HashMap::new();
    for (a, b) in gm.edges() {
        for &c in gm.neighbors(a) {
            if c > b && gm.has_edge(b, c) {
                let idx = triangles.len();
                triangles.push([a, b, c]);
                for e in [(a, b), (a, c), (b, c)] {
                    by_edge.entry(e).or_default().push(idx);
                }
            }
        }
    }
    let mut edges = Vec::new();
    for faces in by_edge.values() {
        match faces.len() {
            1 => {}
            2 => edges.push((faces[0].min(faces[1]), faces[0].max(faces[1]))),
            k => {
                return Err(OuterplanarError::Structure(format!(
                    "an edge lies in {k} triangles"
                )))
            }
        }
    }
    edges.sort_unstable();
    if triangles.len() != n - 2 || edges.len() != n.saturating_sub(3) {
        return Err(OuterplanarError::Structure(format!(
            "face count {} / adjacency count {} off for n = {n}",
            triangles.len(),
            edges.len()
        )));
    }
    // Connected + |E| = |V| - 1 makes it a tree.
    let mut adj = vec![Vec::new(); triangles.len()];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; triangles.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    if count != triangles.len() {
        return Err(OuterplanarError::Structure("triangle graph is disconnected".into()));
    }
    Ok(TriangleTree { triangles, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    /// The 5-vertex fan: cycle 0-1-2-3-4 plus chords 0-2 and 0-3.
    fn fan() -> Graph {
        Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn completion_of_p4_adds_two_edges() {
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = maximal_completion(&p4, (0, 1)).unwrap();
        assert_eq!(m.gm().edge_count(), 5);
        assert_eq!(m.added_edges().len(), 2);
        for (a, b) in p4.edges() {
            assert!(m.gm().has_edge(a, b));
        }
        // Outer cycle is Hamiltonian in the completion.
        let cyc = m.outer_cycle();
        assert_eq!(cyc.len(), 4);
        for i in 0..cyc.len() {
            assert!(m.gm().has_edge(cyc[i], cyc[(i + 1) % cyc.len()]));
        }
        assert!(crate::graph::is_outerplanar(m.gm()).unwrap());
    }

    #[test]
    fn completion_of_maximal_graph_is_identity() {
        let m = maximal_completion(&fan(), (0, 1)).unwrap();
        assert!(m.added_edges().is_empty());
        assert_eq!(m.gm(), m.base());
        assert_eq!(m.outer_cycle(), &[0, 1, 2, 3, 4]);

        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let m = maximal_completion(&tri, (1, 2)).unwrap();
        assert!(m.added_edges().is_empty());
    }

    #[test]
    fn completion_rejects_bad_inputs() {
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(matches!(
            maximal_completion(&p4, (0, 2)),
            Err(OuterplanarError::MissingOuterEdge(0, 2))
        ));
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(matches!(maximal_completion(&k4, (0, 1)), Err(OuterplanarError::NotOuterplanar)));
        let disc = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(maximal_completion(&disc, (0, 1)), Err(OuterplanarError::Disconnected)));
        // A chord of a maximal graph cannot be an outer edge.
        assert!(matches!(
            maximal_completion(&fan(), (0, 3)),
            Err(OuterplanarError::NotExtendable(0, 3))
        ));
    }

    #[test]
    fn fan_decomposition_matches_hand_computation() {
        let m = maximal_completion(&fan(), (0, 1)).unwrap();
        let d = decompose(&m).unwrap();
        assert_eq!(d.layers, vec![vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(d.order, vec![0, 1, 2, 3, 4]);
        assert_eq!(d.trapezoids.len(), 1);
        let t = &d.trapezoids[0];
        assert_eq!(t.parents, (0, 1));
        assert_eq!(t.children, vec![2, 3, 4]);
        assert_eq!(t.pivot(), 2);
        assert_eq!(d.side_neighbors(3), (Some(2), Some(4)));
        assert_eq!(d.side_neighbors(2), (None, Some(3)));
    }

    #[test]
    fn single_edge_and_triangle_decompositions() {
        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let m = maximal_completion(&e, (0, 1)).unwrap();
        let d = decompose(&m).unwrap();
        assert_eq!(d.layers, vec![vec![0, 1]]);
        assert!(d.trapezoids.is_empty());

        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let m = maximal_completion(&tri, (0, 1)).unwrap();
        let d = decompose(&m).unwrap();
        assert_eq!(d.layers, vec![vec![0, 1], vec![2]]);
        assert_eq!(d.trapezoids.len(), 1);
        assert_eq!(d.trapezoids[0].pivot(), 2);
    }

    #[test]
    fn pivot_repair_on_bent_path() {
        // P5 rooted at its middle edge: the naive fan triangulation leaves a
        // pivot with no base edge to its parents, and the repair flip fixes it.
        let p5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let m = maximal_completion(&p5, (2, 3)).unwrap();
        let d = decompose(&m).unwrap();
        for t in &d.trapezoids {
            let p = t.pivot();
            assert!(
                m.base().has_edge(p, t.parents.0) || m.base().has_edge(p, t.parents.1),
                "pivot {p} of {:?} misses the base graph",
                t.parents
            );
        }
    }

    #[test]
    fn lies_above_cases() {
        // Hexagon with a deep vertex: children of the root trapezoid above a
        // layer-2 child.
        let g = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 2), (0, 4), (2, 4)],
        )
        .unwrap();
        let m = maximal_completion(&g, (0, 1)).unwrap();
        let d = decompose(&m).unwrap();
        // Layers: {0,1}, {2,4,5}, {3}; trapezoid (2,4) holds child 3.
        assert_eq!(d.layer_of(3), 2);
        assert!(lies_above(&m, &d, 2, 3).unwrap());
        assert!(!lies_above(&m, &d, 3, 2).unwrap());
        // Children of the same trapezoid do not lie above each other.
        assert!(!lies_above(&m, &d, 2, 4).unwrap());
        assert!(!lies_above(&m, &d, 4, 2).unwrap());
        assert!(matches!(lies_above(&m, &d, 0, 3), Err(OuterplanarError::NotAChild(0))));
    }

    /// Oracle: enumerate all shortest paths from x to {u, u'} and test the
    /// pass-through condition directly.
    fn lies_above_oracle(m: &MaximalOuterplanar, d: &TrapezoidalDecomposition, w1: u32, w2: u32) -> bool {
        let (f1, f2) = d.trapezoids[d.child_of(w1).unwrap()].parents;
        let (x1, x2) = d.trapezoids[d.child_of(w2).unwrap()].parents;
        fn all_paths(
            m: &MaximalOuterplanar,
            d: &TrapezoidalDecomposition,
            v: u32,
            acc: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
        ) {
            if d.layer_of(v) == 0 {
                out.push(acc.clone());
                return;
            }
            for &w in m.gm().neighbors(v) {
                if d.layer_of(w) + 1 == d.layer_of(v) {
                    acc.push(w);
                    all_paths(m, d, w, acc, out);
                    acc.pop();
                }
            }
        }
        for x in [x1, x2] {
            let mut out = Vec::new();
            all_paths(m, d, x, &mut vec![x], &mut out);
            for path in out {
                // Skip the starting vertex when testing pass-through.
                if !path[1..].iter().any(|&p| p == f1 || p == f2) && path.len() > 1 {
                    return false;
                }
                if path.len() == 1 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn lies_above_agrees_with_path_enumeration() {
        for n in 4..=8 {
            for m in crate::constructions::enumerate_maximal_outerplanar(n).unwrap() {
                let d = decompose(&m).unwrap();
                let children: Vec<u32> =
                    (0..n as u32).filter(|&v| d.child_of(v).is_some()).collect();
                for &a in &children {
                    for &b in &children {
                        assert_eq!(
                            lies_above(&m, &d, a, b).unwrap(),
                            lies_above_oracle(&m, &d, a, b),
                            "n={n} a={a} b={b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn triangle_tree_shapes() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let m = maximal_completion(&tri, (0, 1)).unwrap();
        let t = triangle_tree(&m).unwrap();
        assert_eq!(t.triangles.len(), 1);
        assert!(t.edges.is_empty());

        let diamond = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let m = maximal_completion(&diamond, (0, 1)).unwrap();
        let t = triangle_tree(&m).unwrap();
        assert_eq!(t.triangles.len(), 2);
        assert_eq!(t.edges.len(), 1);

        let m = maximal_completion(&fan(), (0, 1)).unwrap();
        let t = triangle_tree(&m).unwrap();
        assert_eq!(t.triangles.len(), 3);
        assert_eq!(t.edges.len(), 2);
        // A path of three faces: some face touches two others.
        let mut degs = vec![0; 3];
        for &(a, b) in &t.edges {
            degs[a] += 1;
            degs[b] += 1;
        }
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 2]);
    }

    #[test]
    fn decompose_all_small_triangulations() {
        // Full invariant sweep over every polygon triangulation with n <= 10
        // lives in the acceptance suite; spot-check n <= 7 here.
        for n in 3..=7 {
            for m in crate::constructions::enumerate_maximal_outerplanar(n).unwrap() {
                let d = decompose(&m).unwrap();
                assert_eq!(d.order.len(), n);
                let t = triangle_tree(&m).unwrap();
                assert_eq!(t.triangles.len(), n - 2);
                // Vertices on no root edge have completion degree <= 4.
                for v in 0..n as u32 {
                    if d.root_edges_with(v).is_empty() {
                        assert!(m.gm().degree(v) <= 4, "degree bound at {v}");
                    }
                }
            }
        }
    }
}
