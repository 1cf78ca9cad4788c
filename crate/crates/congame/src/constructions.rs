//! Generators and validators for the graph families the games are played on:
//! the six-vertex outerplanar witness, complete bipartite graphs minus a
//! matching, projective plane incidence graphs, the apexed bipartite
//! construction on which Bob beats small color budgets, and labeled polygon
//! triangulations.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::graph::{self, Graph};
use crate::outerplanar::{maximal_completion, MaximalOuterplanar, OuterplanarError};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("need n >= 2, got {0}")]
    TooSmallN(usize),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("plane order {q} too small: q + 1 = {degree} < k^2 = {needed}")]
    PlaneTooSmall { q: u32, degree: u32, needed: u32 },
    #[error("need k >= 3, got {0}")]
    TooSmallK(u8),
    #[error("capped apex policy needs a positive limit")]
    EmptyCap,
    #[error("triangulation size {0} outside 3..=12")]
    BadPolygon(usize),
    #[error("generator output failed validation: {0}")]
    Invalid(String),
    #[error(transparent)]
    Outerplanar(#[from] OuterplanarError),
}

/// The six-vertex outerplanar graph whose connected coloring game Alice wins
/// first at k = 4. Vertices v0..v5.
pub fn figure2_graph() -> Graph {
    Graph::from_edges(
        6,
        &[(1, 2), (2, 4), (1, 4), (1, 5), (1, 0), (2, 3), (3, 4), (4, 5), (5, 0)],
    )
    .expect("static edge list")
}

/// K_{n,n} minus a perfect matching: parts {a_i}, {b_i}, edges a_i b_j for
/// all i != j. Vertices 0..n are the a side, n..2n the b side.
pub fn knn_minus_matching(n: usize) -> Result<Graph, ConstructError> {
    if n < 2 {
        return Err(ConstructError::TooSmallN(n));
    }
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            if i != j {
                edges.push((i, n as u32 + j));
            }
        }
    }
    Ok(Graph::from_edges(2 * n, &edges).expect("construction is simple"))
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Points and lines of the projective plane of prime order q over the
/// normalized homogeneous triples, as a bipartite incidence graph:
/// (q+1)-regular, q^2+q+1 vertices per side, girth 6. Points occupy
/// 0..(q^2+q+1), lines the rest. Returns the graph and the side size.
pub fn projective_plane_incidence(q: u32) -> Result<(Graph, usize), ConstructError> {
    if !is_prime(q) {
        return Err(ConstructError::NotPrime(q));
    }
    // Canonical representatives: first nonzero coordinate equals 1.
    let mut triples: Vec<[u32; 3]> = Vec::new();
    for a in 0..q {
        for b in 0..q {
            triples.push([1, a, b]);
        }
    }
    for a in 0..q {
        triples.push([0, 1, a]);
    }
    triples.push([0, 0, 1]);
    let side = triples.len();
    debug_assert_eq!(side, (q * q + q + 1) as usize);
    let mut edges = Vec::new();
    for (p, pt) in triples.iter().enumerate() {
        for (l, ln) in triples.iter().enumerate() {
            let dot = (u64::from(pt[0]) * u64::from(ln[0])
                + u64::from(pt[1]) * u64::from(ln[1])
                + u64::from(pt[2]) * u64::from(ln[2]))
                % u64::from(q);
            if dot == 0 {
                edges.push((p as u32, (side + l) as u32));
            }
        }
    }
    let g = Graph::from_edges(2 * side, &edges).expect("incidence structure is simple");
    Ok((g, side))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApexPolicy {
    /// One apex per k-subset of B. Astronomical beyond k = 3.
    Full,
    /// Apexes for the first `limit` k-subsets in lexicographic order.
    Capped(usize),
}

/// Construction data for the apexed bipartite graph: the partite sets of the
/// core C4-free graph H, and the apex attached to each chosen k-subset of B.
#[derive(Clone, Debug)]
pub struct GkMetadata {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub apex_map: BTreeMap<Vec<u32>, u32>,
    pub k: u8,
    pub q: u32,
    pub policy: ApexPolicy,
}

impl GkMetadata {
    pub fn is_a(&self, v: u32) -> bool {
        (v as usize) < self.a.len()
    }

    pub fn is_b(&self, v: u32) -> bool {
        let v = v as usize;
        v >= self.a.len() && v < self.a.len() + self.b.len()
    }

    pub fn is_apex(&self, v: u32) -> bool {
        v as usize >= self.a.len() + self.b.len()
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

/// The bipartite graph on which Bob wins the connected coloring game with k
/// colors: a projective plane incidence graph H (C4-free, min degree q + 1
/// >= k^2) with one apex vertex per k-subset of the line side B. Points form
/// A = 0..N, lines B = N..2N, apexes follow.
pub fn gk_construction(
    k: u8,
    q: u32,
    policy: ApexPolicy,
) -> Result<(Graph, GkMetadata), ConstructError> {
    if k < 3 {
        return Err(ConstructError::TooSmallK(k));
    }
    if q + 1 < u32::from(k) * u32::from(k) {
        return Err(ConstructError::PlaneTooSmall {
            q,
            degree: q + 1,
            needed: u32::from(k) * u32::from(k),
        });
    }
    if let ApexPolicy::Capped(0) = policy {
        return Err(ConstructError::EmptyCap);
    }
    let (h, side) = projective_plane_incidence(q)?;
    let a: Vec<u32> = (0..side as u32).collect();
    let b: Vec<u32> = (side as u32..2 * side as u32).collect();

    let limit = match policy {
        ApexPolicy::Full => u64::MAX,
        ApexPolicy::Capped(c) => c as u64,
    };
    let mut edges: Vec<(u32, u32)> = h.edges();
    let mut apex_map = BTreeMap::new();
    let mut next_vertex = 2 * side as u32;
    let mut emitted = 0u64;
    let kk = k as usize;
    // Lexicographic k-subsets of B by index vector.
    let mut idx: Vec<usize> = (0..kk).collect();
    'outer: loop {
        if emitted >= limit {
            break;
        }
        let subset: Vec<u32> = idx.iter().map(|&i| b[i]).collect();
        for &v in &subset {
            edges.push((v, next_vertex));
        }
        apex_map.insert(subset, next_vertex);
        next_vertex += 1;
        emitted += 1;
        // Advance the combination.
        let mut i = kk;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if idx[i] != i + side - kk {
                idx[i] += 1;
                for j in i + 1..kk {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }

    let graph = Graph::from_edges(next_vertex as usize, &edges).expect("apexing keeps it simple");
    let meta = GkMetadata { a, b, apex_map, k, q, policy };
    validate_gk(&graph, &meta, side)?;
    Ok((graph, meta))
}

fn validate_gk(g: &Graph, meta: &GkMetadata, side: usize) -> Result<(), ConstructError> {
    let fail = |msg: String| Err(ConstructError::Invalid(msg));
    // H is C4-free with min degree >= k^2: count common neighbors of B-pairs
    // through each A vertex (and symmetrically); any pair seen twice is a C4.
    let mut pairs = std::collections::HashSet::new();
    for &p in &meta.a {
        let nbrs: Vec<u32> = g.neighbors(p).iter().copied().filter(|&w| meta.is_b(w)).collect();
        if nbrs.len() < (meta.k as usize) * (meta.k as usize) {
            return fail(format!("H degree {} below k^2 at point {p}", nbrs.len()));
        }
        for i in 0..nbrs.len() {
            for j in i + 1..nbrs.len() {
                if !pairs.insert((nbrs[i], nbrs[j])) {
                    return fail(format!("C4 in H through lines {} {}", nbrs[i], nbrs[j]));
                }
            }
        }
    }
    for &l in &meta.b {
        let deg_h = g.neighbors(l).iter().filter(|&&w| meta.is_a(w)).count();
        if deg_h < (meta.k as usize) * (meta.k as usize) {
            return fail(format!("H degree {deg_h} below k^2 at line {l}"));
        }
    }
    // Every apex has degree exactly k with neighborhood S.
    for (subset, &apex) in &meta.apex_map {
        if g.neighbors(apex) != &subset[..] {
            return fail(format!("apex {apex} neighborhood differs from its subset"));
        }
    }
    if let ApexPolicy::Full = meta.policy {
        let expect = binomial(side, meta.k as usize);
        if meta.apex_map.len() as u64 != expect {
            return fail(format!(
                "full policy expects {expect} apexes, got {}",
                meta.apex_map.len()
            ));
        }
    }
    if !graph::is_connected(g) {
        return fail("construction is disconnected".into());
    }
    if !matches!(graph::bipartition(g), graph::Bipartition::Bipartite { .. }) {
        return fail("construction is not bipartite".into());
    }
    Ok(())
}

const CATALAN: [u64; 11] = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];

/// All triangulations of the labeled convex n-gon, each packaged as a
/// maximal outerplanar graph with outer cycle 0..n-1 and root edge (0, 1).
/// The count is the Catalan number C_{n-2}.
pub fn enumerate_maximal_outerplanar(
    n: usize,
) -> Result<impl Iterator<Item = MaximalOuterplanar>, ConstructError> {
    if !(3..=12).contains(&n) {
        return Err(ConstructError::BadPolygon(n));
    }
    let mut all_diagonals = Vec::new();
    let mut current = Vec::new();
    collect_triangulations(0, n as u32 - 1, &mut current, &mut all_diagonals);
    debug_assert_eq!(all_diagonals.len() as u64, CATALAN[n - 2]);
    Ok(all_diagonals.into_iter().map(move |diags| polygon_with_diagonals(n, &diags)))
}

fn collect_triangulations(a: u32, b: u32, current: &mut Vec<(u32, u32)>, out: &mut Vec<Vec<(u32, u32)>>) {
    if b - a < 2 {
        out.push(current.clone());
        return;
    }
    // The boundary chord (a, b) lies in one triangle (a, m, b).
    for m in a + 1..b {
        let mut added = 0;
        if m > a + 1 {
            current.push((a, m));
            added += 1;
        }
        if b > m + 1 {
            current.push((m, b));
            added += 1;
        }
        // Recurse on both sub-polygons; concatenating their choices
        // enumerates products, so nest the recursion.
        nest(a, m, b, current, out);
        for _ in 0..added {
            current.pop();
        }
    }
}

fn nest(a: u32, m: u32, b: u32, current: &mut Vec<(u32, u32)>, out: &mut Vec<Vec<(u32, u32)>>) {
    // Enumerate triangulations of (a..m), and for each, of (m..b).
    let mut left = Vec::new();
    collect_triangulations(a, m, &mut Vec::new(), &mut left);
    for l in left {
        let keep = current.len();
        current.extend(&l);
        collect_triangulations(m, b, current, out);
        current.truncate(keep);
    }
}

fn polygon_with_diagonals(n: usize, diagonals: &[(u32, u32)]) -> MaximalOuterplanar {
    let mut edges: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
    edges.extend_from_slice(diagonals);
    let g = Graph::from_edges(n, &edges).expect("triangulation is simple");
    maximal_completion(&g, (0, 1)).expect("triangulations are maximal outerplanar")
}

/// Seeded uniform sampler over the triangulations of the labeled n-gon,
/// by Catalan-weighted apex choices.
pub fn sample_maximal_outerplanar<R: Rng>(
    n: usize,
    rng: &mut R,
) -> Result<MaximalOuterplanar, ConstructError> {
    if !(3..=12).contains(&n) {
        return Err(ConstructError::BadPolygon(n));
    }
    let mut diagonals = Vec::new();
    let mut stack = vec![(0u32, n as u32 - 1)];
    while let Some((a, b)) = stack.pop() {
        if b - a < 2 {
            continue;
        }
        let total: u64 = (a + 1..b)
            .map(|m| CATALAN[(m - a - 1) as usize] * CATALAN[(b - m - 1) as usize])
            .sum();
        let mut pick = rng.gen_range(0..total);
        let mut apex = a + 1;
        for m in a + 1..b {
            let w = CATALAN[(m - a - 1) as usize] * CATALAN[(b - m - 1) as usize];
            if pick < w {
                apex = m;
                break;
            }
            pick -= w;
        }
        if apex > a + 1 {
            diagonals.push((a, apex));
        }
        if b > apex + 1 {
            diagonals.push((apex, b));
        }
        stack.push((a, apex));
        stack.push((apex, b));
    }
    Ok(polygon_with_diagonals(n, &diagonals))
}
