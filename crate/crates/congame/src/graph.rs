//! Simple undirected graphs with dense vertex identifiers, the edge-list and
//! graph6 formats, and the exact graph predicates the game modules build on.

use thiserror::Error;

/// Hard size limit for the exhaustive predicates (chromatic number, minor
/// tests). Everything the acceptance corpus feeds them stays well below it.
pub const DESK_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("byte {offset}: {msg}")]
    ParseByte { offset: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u32, u32),
    #[error("vertex {v} out of range (n = {n})")]
    VertexOutOfRange { v: u32, n: usize },
    #[error("graph too large for exact computation (n = {n}, limit {limit})")]
    TooLarge { n: usize, limit: usize },
}

/// A simple undirected graph. Vertices are `0..n`; adjacency lists are kept
/// sorted so neighbor queries are binary searches and equality is structural.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    m: usize,
    labels: Option<Vec<String>>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.m)
    }
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        Graph { adj: vec![Vec::new(); n], m: 0, labels: None }
    }

    /// Builds a graph from an explicit edge list, rejecting loops, duplicate
    /// edges and out-of-range endpoints. Duplicates are detected after a
    /// sort rather than per insertion, so dense vertices stay linear.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph, GraphError> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(GraphError::VertexOutOfRange { v: u, n });
            }
            if v as usize >= n {
                return Err(GraphError::VertexOutOfRange { v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            g.adj[u as usize].push(v);
            g.adj[v as usize].push(u);
            g.m += 1;
        }
        for u in 0..n {
            g.adj[u].sort_unstable();
            if let Some(w) = g.adj[u].windows(2).find(|w| w[0] == w[1]) {
                let v = w[0];
                return Err(GraphError::DuplicateEdge(v.min(u as u32), v.max(u as u32)));
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        // Probe the shorter list; matters on the apex-heavy constructions.
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> {
        0..self.n() as u32
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.m);
        for u in self.vertices() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Non-increasing degree sequence.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }

    /// Subgraph induced by `verts`; vertex `verts[i]` becomes vertex `i`.
    pub fn induced(&self, verts: &[u32]) -> Graph {
        let mut index = vec![u32::MAX; self.n()];
        for (i, &v) in verts.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let mut adj = vec![Vec::new(); verts.len()];
        let mut m = 0;
        for (i, &v) in verts.iter().enumerate() {
            for &w in self.neighbors(v) {
                let j = index[w as usize];
                if j != u32::MAX {
                    adj[i].push(j);
                    if (i as u32) < j {
                        m += 1;
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { adj, m, labels: None }
    }

    pub fn set_labels(&mut self, labels: Vec<String>) {
        debug_assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
    }

    pub fn label(&self, v: u32) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v as usize].as_str())
    }
}

// ---------------------------------------------------------------------------
// Parsing and serialization
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Graph6,
}

/// Parses either supported format. Edge-list text is `n` on the first line
/// followed by one `u v` pair per line; graph6 is the standard 6-bit
/// upper-triangle encoding.
pub fn parse_graph(text: &[u8], format: GraphFormat) -> Result<Graph, GraphError> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text),
        GraphFormat::Graph6 => parse_graph6(text),
    }
}

fn parse_edge_list(text: &[u8]) -> Result<Graph, GraphError> {
    let text = std::str::from_utf8(text).map_err(|e| GraphError::Parse {
        line: 0,
        msg: format!("input is not valid UTF-8: {e}"),
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| GraphError::Parse { line: 1, msg: "empty input".into() })?;
    let n: usize = header.trim().parse().map_err(|_| GraphError::Parse {
        line: 1,
        msg: format!("expected vertex count, got {header:?}"),
    })?;
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let u = it.next().unwrap();
        let v = it.next().ok_or_else(|| GraphError::Parse {
            line: line_no,
            msg: format!("expected `u v`, got {line:?}"),
        })?;
        if it.next().is_some() {
            return Err(GraphError::Parse {
                line: line_no,
                msg: format!("trailing tokens after edge in {line:?}"),
            });
        }
        let parse = |s: &str| {
            s.parse::<u32>().map_err(|_| GraphError::Parse {
                line: line_no,
                msg: format!("invalid vertex id {s:?}"),
            })
        };
        let (u, v) = (parse(u)?, parse(v)?);
        if u as usize >= n || v as usize >= n {
            return Err(GraphError::Parse {
                line: line_no,
                msg: format!("vertex {} out of range (n = {n})", u.max(v)),
            });
        }
        if u == v {
            return Err(GraphError::Parse {
                line: line_no,
                msg: format!("self-loop at vertex {u}"),
            });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(GraphError::Parse {
                line: line_no,
                msg: format!("duplicate edge {} {}", u.min(v), u.max(v)),
            });
        }
        edges.push((u, v));
    }
    Graph::from_edges(n, &edges)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

fn parse_graph6(text: &[u8]) -> Result<Graph, GraphError> {
    let mut bytes: &[u8] = text;
    // Optional format header emitted by some tools.
    if let Some(rest) = bytes.strip_prefix(b">>graph6<<") {
        bytes = rest;
    }
    while let Some((last, rest)) = bytes.split_last() {
        if *last == b'\n' || *last == b'\r' {
            bytes = rest;
        } else {
            break;
        }
    }
    let sextet = |i: usize| -> Result<u64, GraphError> {
        let b = *bytes.get(i).ok_or(GraphError::ParseByte {
            offset: i,
            msg: "truncated graph6 data".into(),
        })?;
        if !(63..=126).contains(&b) {
            return Err(GraphError::ParseByte {
                offset: i,
                msg: format!("byte {b:#04x} outside graph6 alphabet"),
            });
        }
        Ok(u64::from(b - 63))
    };
    // Size field: one sextet below 63, else 126 + 3 sextets, else 126 126 + 6.
    let (n, header_len) = if sextet(0)? != 63 {
        (sextet(0)? as usize, 1)
    } else if sextet(1)? != 63 {
        (((sextet(1)? << 12) | (sextet(2)? << 6) | sextet(3)?) as usize, 4)
    } else {
        let mut v: u64 = 0;
        for i in 0..6 {
            v = (v << 6) | sextet(2 + i)?;
        }
        (v as usize, 8)
    };
    let bits = n * n.saturating_sub(1) / 2;
    let expect = header_len + bits.div_ceil(6);
    if bytes.len() != expect {
        return Err(GraphError::ParseByte {
            offset: bytes.len().min(expect),
            msg: format!("expected {expect} bytes for n = {n}, got {}", bytes.len()),
        });
    }
    let mut edges = Vec::new();
    let mut pos = 0usize;
    for j in 1..n {
        for i in 0..j {
            let s = sextet(header_len + pos / 6)?;
            if (s >> (5 - pos % 6)) & 1 == 1 {
                edges.push((i as u32, j as u32));
            }
            pos += 1;
        }
    }
    // Each pair appears once in the bit stream, so this cannot fail.
    Graph::from_edges(n, &edges)
}

/// Standard graph6 encoding, bit-exact so third-party corpora load unchanged.
pub fn write_graph6(g: &Graph) -> String {
    let n = g.n();
    let mut sextets: Vec<u8> = Vec::new();
    if n < 63 {
        sextets.push(n as u8);
    } else if n <= 258_047 {
        sextets.push(63);
        sextets.push(((n >> 12) & 63) as u8);
        sextets.push(((n >> 6) & 63) as u8);
        sextets.push((n & 63) as u8);
    } else {
        sextets.push(63);
        sextets.push(63);
        for shift in (0..6).rev() {
            sextets.push(((n >> (6 * shift)) & 63) as u8);
        }
    }
    let mut acc: u8 = 0;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            acc <<= 1;
            if g.has_edge(i as u32, j as u32) {
                acc |= 1;
            }
            filled += 1;
            if filled == 6 {
                sextets.push(acc);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        sextets.push(acc << (6 - filled));
    }
    sextets.into_iter().map(|s| (s + 63) as char).collect()
}

// ---------------------------------------------------------------------------
// Predicates and parameters
// ---------------------------------------------------------------------------

/// True iff the graph has exactly one connected component (vacuously true for
/// n <= 1).
pub fn is_connected(g: &Graph) -> bool {
    if g.n() <= 1 {
        return true;
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![0u32];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == g.n()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bipartition {
    /// Proper 2-partition covering all vertices. The lowest vertex of each
    /// component is assigned to side A, which makes the result deterministic.
    Bipartite { side_a: Vec<u32>, side_b: Vec<u32> },
    /// Witness odd cycle, as a closed vertex sequence without the repeated
    /// endpoint.
    OddCycle(Vec<u32>),
}

pub fn bipartition(g: &Graph) -> Bipartition {
    let n = g.n();
    let mut side = vec![u8::MAX; n];
    let mut parent = vec![u32::MAX; n];
    let mut depth = vec![0u32; n];
    for start in 0..n as u32 {
        if side[start as usize] != u8::MAX {
            continue;
        }
        side[start as usize] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if side[w as usize] == u8::MAX {
                    side[w as usize] = 1 - side[v as usize];
                    parent[w as usize] = v;
                    depth[w as usize] = depth[v as usize] + 1;
                    queue.push_back(w);
                } else if side[w as usize] == side[v as usize] {
                    return Bipartition::OddCycle(odd_cycle(v, w, &parent, &depth));
                }
            }
        }
    }
    let side_a = (0..n as u32).filter(|&v| side[v as usize] == 0).collect();
    let side_b = (0..n as u32).filter(|&v| side[v as usize] == 1).collect();
    Bipartition::Bipartite { side_a, side_b }
}

fn odd_cycle(mut x: u32, mut y: u32, parent: &[u32], depth: &[u32]) -> Vec<u32> {
    let mut left = vec![x];
    let mut right = vec![y];
    while depth[x as usize] > depth[y as usize] {
        x = parent[x as usize];
        left.push(x);
    }
    while depth[y as usize] > depth[x as usize] {
        y = parent[y as usize];
        right.push(y);
    }
    while x != y {
        x = parent[x as usize];
        y = parent[y as usize];
        left.push(x);
        right.push(y);
    }
    // left ends at the common ancestor; stitch the two arms into one cycle.
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

/// Exact chromatic number by branch and bound, for desk-scale graphs.
pub fn chromatic_number_exact(g: &Graph) -> Result<u32, GraphError> {
    if g.n() > DESK_LIMIT {
        return Err(GraphError::TooLarge { n: g.n(), limit: DESK_LIMIT });
    }
    if g.n() == 0 {
        return Ok(0);
    }
    if g.edge_count() == 0 {
        return Ok(1);
    }
    // Vertices in max-degree-first order speeds up the backtracking a lot.
    let mut order: Vec<u32> = g.vertices().collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    let lower = greedy_clique(g).len() as u32;
    for k in lower.. {
        if colorable(g, &order, k) {
            return Ok(k);
        }
    }
    unreachable!("every graph is max_degree + 1 colorable")
}

fn greedy_clique(g: &Graph) -> Vec<u32> {
    let mut order: Vec<u32> = g.vertices().collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    let mut clique: Vec<u32> = Vec::new();
    for v in order {
        if clique.iter().all(|&c| g.has_edge(c, v)) {
            clique.push(v);
        }
    }
    clique
}

fn colorable(g: &Graph, order: &[u32], k: u32) -> bool {
    fn go(g: &Graph, order: &[u32], k: u32, colors: &mut [u32], idx: usize, used: u32) -> bool {
        if idx == order.len() {
            return true;
        }
        let v = order[idx];
        // Only allow one brand-new color per step, which kills the color
        // permutation symmetry.
        for c in 1..=(used + 1).min(k) {
            if g.neighbors(v).iter().all(|&w| colors[w as usize] != c) {
                colors[v as usize] = c;
                if go(g, order, k, colors, idx + 1, used.max(c)) {
                    return true;
                }
                colors[v as usize] = 0;
            }
        }
        false
    }
    if k == 0 {
        return order.is_empty();
    }
    let mut colors = vec![0u32; g.n()];
    go(g, order, k, &mut colors, 0, 0)
}

/// True iff the graph contains no 4-cycle: no two vertices have two common
/// neighbors.
pub fn is_c4_free(g: &Graph) -> bool {
    let mut seen = std::collections::HashSet::new();
    for v in g.vertices() {
        let nb = g.neighbors(v);
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                if !seen.insert((nb[i], nb[j])) {
                    return false;
                }
            }
        }
    }
    true
}

/// True iff the graph has neither a K4 nor a K_{2,3} minor (desk-scale
/// branch-set search).
pub fn is_outerplanar(g: &Graph) -> Result<bool, GraphError> {
    let n = g.n();
    if n > DESK_LIMIT {
        return Err(GraphError::TooLarge { n, limit: DESK_LIMIT });
    }
    if n <= 3 {
        return Ok(true);
    }
    // Outerplanar graphs have at most 2n - 3 edges.
    if g.edge_count() > 2 * n - 3 {
        return Ok(false);
    }
    let k4 = MinorPattern { n: 4, edges: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], groups: vec![vec![0, 1, 2, 3]] };
    let k23 = MinorPattern {
        n: 5,
        edges: vec![(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)],
        groups: vec![vec![0, 1], vec![2, 3, 4]],
    };
    Ok(!has_minor(g, &k4) && !has_minor(g, &k23))
}

struct MinorPattern {
    n: usize,
    edges: Vec<(usize, usize)>,
    /// Interchangeable pattern vertices; branch-set seeds must increase
    /// within a group, pruning symmetric assignments.
    groups: Vec<Vec<usize>>,
}

/// Branch-set backtracking: grow disjoint connected sets B_0..B_{h-1}, one at
/// a time, each explored from its minimal vertex.
fn has_minor(g: &Graph, h: &MinorPattern) -> bool {
    let n = g.n();
    assert!(n <= 32, "minor search uses u32 vertex masks");
    if n < h.n || g.edge_count() < h.edges.len() {
        return false;
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v as u32).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    let mut h_adj = vec![0u32; h.n];
    for &(a, b) in &h.edges {
        h_adj[a] |= 1 << b;
        h_adj[b] |= 1 << a;
    }
    let mut group_of = vec![usize::MAX; h.n];
    for (gi, grp) in h.groups.iter().enumerate() {
        for &v in grp {
            group_of[v] = gi;
        }
    }

    struct Search<'a> {
        n: usize,
        adj: &'a [u32],
        h_n: usize,
        h_adj: &'a [u32],
        group_of: &'a [usize],
        masks: Vec<u32>,
        nbrs: Vec<u32>,
        seeds: Vec<u32>,
        used: u32,
    }

    impl Search<'_> {
        fn place(&mut self, i: usize) -> bool {
            if i == self.h_n {
                return true;
            }
            let min_seed = (0..i)
                .rev()
                .find(|&j| self.group_of[j] == self.group_of[i])
                .map(|j| self.seeds[j] + 1)
                .unwrap_or(0);
            for s in min_seed..self.n as u32 {
                if self.used & (1 << s) != 0 {
                    continue;
                }
                self.masks[i] = 1 << s;
                self.nbrs[i] = self.adj[s as usize];
                self.seeds[i] = s;
                self.used |= 1 << s;
                if self.grow(i) {
                    return true;
                }
                self.used &= !(1 << s);
            }
            false
        }

        fn grow(&mut self, i: usize) -> bool {
            let closes = (0..i).all(|j| {
                self.h_adj[i] & (1 << j) == 0 || self.nbrs[i] & self.masks[j] != 0
            });
            let free = self.n as u32 - self.used.count_ones();
            if closes && free as usize >= self.h_n - i - 1 && self.place(i + 1) {
                return true;
            }
            // Extend with an unused neighbor above the seed, keeping the set
            // connected and canonically rooted at its minimum.
            let above = !((1u32 << self.seeds[i]) | ((1u32 << self.seeds[i]) - 1));
            let mut cand = self.nbrs[i] & !self.used & above;
            while cand != 0 {
                let w = cand.trailing_zeros();
                cand &= cand - 1;
                let (mask0, nbrs0) = (self.masks[i], self.nbrs[i]);
                self.masks[i] |= 1 << w;
                self.nbrs[i] |= self.adj[w as usize];
                self.used |= 1 << w;
                if self.grow(i) {
                    return true;
                }
                self.masks[i] = mask0;
                self.nbrs[i] = nbrs0;
                self.used &= !(1 << w);
            }
            false
        }
    }

    Search {
        n,
        adj: &adj,
        h_n: h.n,
        h_adj: &h_adj,
        group_of: &group_of,
        masks: vec![0; h.n],
        nbrs: vec![0; h.n],
        seeds: vec![0; h.n],
        used: 0,
    }
    .place(0)
}

/// FNV-1a digest of the canonical edge list; used by the CLI reports.
pub fn digest(g: &Graph) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(g.n() as u64);
    for (u, v) in g.edges() {
        eat(u64::from(u));
        eat(u64::from(v));
    }
    format!("{h:016x}")
}
