//! The explicit strategies as deterministic move functions, generic opponent
//! strategies, playout harnesses, and exhaustive adversarial verification.
//!
//! All randomized play draws from a seeded ChaCha stream, so every trace is
//! reproducible from (inputs, seed).

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::GkMetadata;
use crate::engine::{new_game, EngineError, GameKind, GameSpec, GameState, Move, Player};
use crate::graph::{bipartition, Bipartition, Graph};
use crate::outerplanar::{decompose, maximal_completion, MaximalOuterplanar, OuterplanarError, TrapezoidalDecomposition};
use crate::solver::{best_move, canonical_key, SolveError, SolverConfig};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("strategy not applicable: {0}")]
    NotApplicable(String),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("move history required but not retained")]
    HistoryRequired,
    #[error("{player:?} played illegal {mv:?} at ply {ply}: {source}")]
    IllegalMove { player: Player, mv: Move, ply: u32, source: EngineError },
    #[error("stage infeasible: {0}")]
    StageInfeasible(String),
    #[error("no move available")]
    NoMove,
    #[error("verification budget exhausted after {0} states")]
    Budget(u64),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Outerplanar(#[from] OuterplanarError),
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceMove {
    pub player: Player,
    pub vertex: u32,
    pub color: Option<u8>,
    /// Rule or stage label the strategy reported for this ply, if any.
    pub note: Option<String>,
}

/// A finished playout: the move list a_0, b_1, a_1, ... with its verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trace {
    pub spec: GameSpec,
    pub moves: Vec<TraceMove>,
    pub verdict: Player,
}

impl Trace {
    /// Replays the trace through the engine, checking legality and returning
    /// the final winner.
    pub fn replay(&self, g: &Arc<Graph>) -> Result<Player, EngineError> {
        let mut s = new_game(g.clone(), self.spec)?;
        for (i, tm) in self.moves.iter().enumerate() {
            debug_assert_eq!(tm.player, if i % 2 == 0 { Player::Alice } else { Player::Bob });
            s.apply_move_mut(Move { vertex: tm.vertex, color: tm.color })?;
        }
        Ok(s.winner().unwrap_or(Player::Alice))
    }
}

// ---------------------------------------------------------------------------
// Alice on bipartite graphs
// ---------------------------------------------------------------------------

/// Alice's two-color strategy on connected bipartite graphs: open anywhere
/// (lowest vertex, color 1); afterwards every playable vertex has exactly one
/// proper color, so the first legal move is forced and always exists.
pub fn alice_bipartite_move(s: &GameState) -> Result<Move, StrategyError> {
    let spec = s.spec();
    if spec.kind != GameKind::Coloring || !spec.connected || spec.k != 2 {
        return Err(StrategyError::NotApplicable(
            "bipartite strategy needs the connected coloring game with k = 2".into(),
        ));
    }
    if !matches!(bipartition(s.graph()), Bipartition::Bipartite { .. }) {
        return Err(StrategyError::NotBipartite);
    }
    if s.moves_made() == 0 {
        return Ok(Move::color(0, 1));
    }
    s.legal_moves().first().copied().ok_or(StrategyError::NoMove)
}

// ---------------------------------------------------------------------------
// Alice on outerplanar graphs (connected marking game)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkRule {
    R0,
    R1,
    R2,
    R3,
    R4,
}

impl MarkRule {
    pub fn label(self) -> &'static str {
        match self {
            MarkRule::R0 => "R0",
            MarkRule::R1 => "R1",
            MarkRule::R2 => "R2",
            MarkRule::R3 => "R3",
            MarkRule::R4 => "R4",
        }
    }
}

/// Completion and decomposition backing the outerplanar marking strategy,
/// plus a memo for the invariant-game gate shared across clones.
#[derive(Clone, Debug)]
pub struct OuterplanarContext {
    pub m: MaximalOuterplanar,
    pub d: TrapezoidalDecomposition,
    gate_memo: Arc<std::sync::Mutex<std::collections::HashMap<(u8, u128), bool>>>,
}

impl OuterplanarContext {
    pub fn new(m: MaximalOuterplanar) -> Result<OuterplanarContext, StrategyError> {
        let d = decompose(&m)?;
        Ok(OuterplanarContext {
            m,
            d,
            gate_memo: Arc::new(std::sync::Mutex::new(std::collections::HashMap::new())),
        })
    }

    /// Roots the decomposition at the lexicographically first base edge that
    /// can lie on the outer face.
    pub fn for_graph(g: &Graph) -> Result<OuterplanarContext, StrategyError> {
        for (a, b) in g.edges() {
            match maximal_completion(g, (a, b)) {
                Ok(m) => return OuterplanarContext::new(m),
                Err(OuterplanarError::NotExtendable(..)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Err(StrategyError::NotApplicable("no base edge extends to an outer face".into()))
    }
}

/// The condition the strategy maintains after each of its moves: no vertex is
/// threatened, the root edge is fully marked from Alice's second move on, and
/// every marked child of a trapezoid whose root edge lies in the base graph
/// has both parents marked.
pub fn marking_invariant_violation(s: &GameState, ctx: &OuterplanarContext) -> Option<String> {
    if let Some(t) = s.graph().vertices().find(|&v| s.vertex_status(v).threatened) {
        return Some(format!("vertex {t} threatened after Alice's move"));
    }
    let (u, up) = ctx.m.root_outer_edge();
    if s.moves_made() >= 3 && (s.is_empty_vertex(u) || s.is_empty_vertex(up)) {
        return Some(format!("root edge ({u}, {up}) not fully marked after Alice's second move"));
    }
    for t in &ctx.d.trapezoids {
        let (v, vp) = t.parents;
        if !ctx.m.base().has_edge(v, vp) {
            continue;
        }
        for &c in &t.children {
            if !s.is_empty_vertex(c) && (s.is_empty_vertex(v) || s.is_empty_vertex(vp)) {
                return Some(format!("child {c} marked but root edge ({v}, {vp}) is not"));
            }
        }
    }
    None
}

fn marked_mask(s: &GameState) -> u128 {
    debug_assert!(s.graph().n() <= 128);
    s.assigned().iter().fold(0u128, |m, &v| m | (1 << v))
}

/// Whether Alice can keep the marking invariant through every continuation,
/// starting from a position she has just moved in (and which satisfies the
/// invariant). Memoized on the marked set; marks only grow, so the recursion
/// terminates.
fn invariant_game_won(s: &GameState, ctx: &OuterplanarContext) -> bool {
    if s.winner() == Some(Player::Alice) {
        return true;
    }
    let key = (s.spec().k, marked_mask(s));
    if let Some(&won) = ctx.gate_memo.lock().unwrap().get(&key) {
        return won;
    }
    let mut won = true;
    'bob: for b in s.legal_moves() {
        let s1 = s.apply_move(b).expect("legal move");
        if s1.winner() == Some(Player::Bob) {
            won = false;
            break;
        }
        if s1.winner() == Some(Player::Alice) {
            continue;
        }
        for a in s1.legal_moves() {
            let s2 = s1.apply_move(a).expect("legal move");
            if s2.winner() != Some(Player::Bob)
                && marking_invariant_violation(&s2, ctx).is_none()
                && invariant_game_won(&s2, ctx)
            {
                continue 'bob;
            }
        }
        won = false;
        break;
    }
    ctx.gate_memo.lock().unwrap().insert(key, won);
    won
}

/// Applies the first rule in R0 < R1 < R2 < R3 < R4 order (candidates inside
/// a rule taken in the total vertex order) whose move keeps the marking
/// invariant winnable against every Bob continuation.
///
/// The gate matters: the literal rules can be trapped. Small triangulations
/// exist where the plain smallest-playable R4, and even a forced R1 reply,
/// mark the last of the four neighbors {v, v', left, right} around an
/// unmarked pivot with Alice's own hand, leaving it threatened. The gate
/// plays the rules verbatim whenever they are sound and skips to the next
/// candidate exactly where they would lose the invariant.
pub fn alice_outerplanar_move(
    s: &GameState,
    ctx: &OuterplanarContext,
) -> Result<(Move, MarkRule), StrategyError> {
    let spec = s.spec();
    if spec.kind != GameKind::Marking || !spec.connected {
        return Err(StrategyError::NotApplicable(
            "outerplanar strategy plays the connected marking game".into(),
        ));
    }
    if s.graph().as_ref() != ctx.m.base() {
        return Err(StrategyError::NotApplicable("context built for a different graph".into()));
    }
    let d = &ctx.d;
    if s.moves_made() == 0 {
        return Ok((Move::mark(ctx.m.root_outer_edge().0), MarkRule::R0));
    }
    if s.turn() != Player::Alice {
        return Err(StrategyError::NotApplicable("not Alice's turn".into()));
    }
    let history = s.history().ok_or(StrategyError::HistoryRequired)?;
    let bob = history.last().ok_or(StrategyError::HistoryRequired)?.vertex;
    let playable = |v: u32| s.vertex_status(v).playable;

    let mut candidates: Vec<(u32, MarkRule)> = Vec::new();
    // R1: a playable unmarked parent of Bob's vertex.
    if let Some(t) = d.child_of(bob) {
        let (v, vp) = d.trapezoids[t].parents;
        let mut cands: Vec<u32> =
            [v, vp].into_iter().filter(|&p| s.is_empty_vertex(p) && playable(p)).collect();
        cands.sort_by_key(|&p| d.rank(p));
        candidates.extend(cands.into_iter().map(|p| (p, MarkRule::R1)));
    }
    // R2: Bob's vertex ends a root edge whose other end is marked and whose
    // trapezoid pivot is playable.
    let mut pivots: Vec<u32> = d
        .root_edges_with(bob)
        .iter()
        .filter_map(|&ri| {
            let t = d.trapezoid_of_root_edge(ri)?;
            let other = if t.parents.0 == bob { t.parents.1 } else { t.parents.0 };
            let p = t.pivot();
            (!s.is_empty_vertex(other) && s.is_empty_vertex(p) && playable(p)).then_some(p)
        })
        .collect();
    pivots.sort_by_key(|&p| d.rank(p));
    candidates.extend(pivots.into_iter().map(|p| (p, MarkRule::R2)));
    // R3: the other end of a root edge through Bob's vertex is unmarked, is
    // itself a pivot (of any trapezoid), and is playable. Root edges without
    // trapezoids count here.
    let mut ends: Vec<u32> = d
        .root_edges_with(bob)
        .iter()
        .filter_map(|&ri| {
            let (a, b) = d.root_edges[ri];
            let other = if a == bob { b } else { a };
            (s.is_empty_vertex(other) && d.is_pivot(other) && playable(other)).then_some(other)
        })
        .collect();
    ends.sort_by_key(|&p| d.rank(p));
    candidates.extend(ends.into_iter().map(|p| (p, MarkRule::R3)));
    // R4: every playable vertex in the total order.
    candidates.extend(
        d.order
            .iter()
            .copied()
            .filter(|&w| s.is_empty_vertex(w) && playable(w))
            .map(|w| (w, MarkRule::R4)),
    );
    if candidates.is_empty() {
        return Err(StrategyError::NoMove);
    }
    for &(w, rule) in &candidates {
        let next = s.apply_move(Move::mark(w)).expect("playable vertex");
        if next.winner() != Some(Player::Bob)
            && marking_invariant_violation(&next, ctx).is_none()
            && invariant_game_won(&next, ctx)
        {
            return Ok((Move::mark(w), rule));
        }
    }
    // The invariant game is lost from here; fall back to the literal rules.
    let (w, rule) = candidates[0];
    Ok((Move::mark(w), rule))
}

// ---------------------------------------------------------------------------
// Bob on the apexed bipartite construction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GkStage {
    /// Get two A vertices colored with two different colors (at most three
    /// Bob moves, bridging through B when A is unreachable).
    Anchors,
    /// Color a B-neighbor of u with v's color and a B-neighbor of v with u's.
    Mirrors,
    /// Color a k-subset of N(u) ∪ N(v) containing u' and v' with all k
    /// colors; its apex is then saturated.
    Subset,
    Done,
}

impl GkStage {
    pub fn label(self) -> &'static str {
        match self {
            GkStage::Anchors => "stage1",
            GkStage::Mirrors => "stage2",
            GkStage::Subset => "stage3",
            GkStage::Done => "done",
        }
    }
}

/// Mutable stage memory for Bob's strategy; confined to one playout.
#[derive(Clone, Debug)]
pub struct GkContext {
    meta: Arc<GkMetadata>,
    pub stage: GkStage,
    pub anchor_u: Option<u32>,
    pub anchor_v: Option<u32>,
    pub mirror_u: Option<u32>,
    pub mirror_v: Option<u32>,
    pub subset: Vec<u32>,
    stage1_moves: u32,
}

impl GkContext {
    pub fn new(meta: Arc<GkMetadata>) -> GkContext {
        GkContext {
            meta,
            stage: GkStage::Anchors,
            anchor_u: None,
            anchor_v: None,
            mirror_u: None,
            mirror_v: None,
            subset: Vec::new(),
            stage1_moves: 0,
        }
    }
}

fn color_at(s: &GameState, v: u32) -> Option<u8> {
    match s.cell(v) {
        crate::engine::Cell::Color(c) => Some(c),
        _ => None,
    }
}

/// Lowest color in 1..=k proper at `w`, excluding `banned`, scanning the
/// assigned list rather than w's (possibly huge) neighborhood.
fn lowest_proper_color(s: &GameState, w: u32, banned: u64) -> Option<u8> {
    let mut mask = banned;
    for &a in s.assigned() {
        if s.graph().has_edge(w, a) {
            if let Some(c) = color_at(s, a) {
                mask |= 1 << c;
            }
        }
    }
    (1..=s.spec().k).find(|&c| mask >> c & 1 == 0)
}

fn color_proper_at(s: &GameState, w: u32, c: u8) -> bool {
    for &a in s.assigned() {
        if s.graph().has_edge(w, a) {
            if color_at(s, a) == Some(c) {
                return false;
            }
        }
    }
    true
}

pub fn bob_gk_move(s: &GameState, ctx: &mut GkContext) -> Result<(Move, GkStage), StrategyError> {
    let spec = s.spec();
    let meta = ctx.meta.clone();
    if spec.kind != GameKind::Coloring || !spec.connected || spec.k < 3 || spec.k != meta.k {
        return Err(StrategyError::NotApplicable(
            "Bob's strategy needs the connected coloring game with the construction's k >= 3".into(),
        ));
    }
    if s.graph().n() != meta.a.len() + meta.b.len() + meta.apex_map.len() {
        return Err(StrategyError::NotApplicable("graph does not carry this metadata".into()));
    }
    let infeasible = |msg: &str, s: &GameState| {
        StrategyError::StageInfeasible(format!(
            "{msg} (ply {}, assigned {:?})",
            s.moves_made(),
            s.assigned()
        ))
    };

    if ctx.stage == GkStage::Anchors {
        // Anchors may be completed by anyone's moves, including Alice's.
        let colored_a: Vec<u32> =
            s.assigned().iter().copied().filter(|&v| meta.is_a(v)).collect();
        let pair = colored_a.iter().copied().min().and_then(|u| {
            colored_a
                .iter()
                .copied()
                .filter(|&v| color_at(s, v) != color_at(s, u))
                .min()
                .map(|v| (u, v))
        });
        if let Some((u, v)) = pair {
            ctx.anchor_u = Some(u);
            ctx.anchor_v = Some(v);
            ctx.stage = GkStage::Mirrors;
        }
    }

    match ctx.stage {
        GkStage::Anchors => {
            ctx.stage1_moves += 1;
            if ctx.stage1_moves > 3 {
                return Err(infeasible("anchor stage exceeded three Bob moves", s));
            }
            // Prefer coloring a playable A vertex with a color differing from
            // the anchors seen so far.
            let banned: u64 = s
                .assigned()
                .iter()
                .filter(|&&v| meta.is_a(v))
                .filter_map(|&v| color_at(s, v))
                .fold(0, |m, c| m | 1 << c);
            let mut a_frontier: Vec<u32> = s
                .assigned()
                .iter()
                .filter(|&&x| meta.is_b(x))
                .flat_map(|&x| s.graph().neighbors(x))
                .copied()
                .filter(|&w| meta.is_a(w) && s.is_empty_vertex(w))
                .collect();
            a_frontier.sort_unstable();
            a_frontier.dedup();
            for w in a_frontier {
                if let Some(c) = lowest_proper_color(s, w, banned) {
                    return Ok((Move::color(w, c), GkStage::Anchors));
                }
            }
            // No reachable A vertex: bridge through a B vertex that opens one.
            let mut b_frontier: Vec<u32> = s
                .assigned()
                .iter()
                .filter(|&&x| !meta.is_b(x))
                .flat_map(|&x| s.graph().neighbors(x))
                .copied()
                .filter(|&w| meta.is_b(w) && s.is_empty_vertex(w))
                .collect();
            b_frontier.sort_unstable();
            b_frontier.dedup();
            for w in b_frontier {
                let opens_a = s
                    .graph()
                    .neighbors(w)
                    .iter()
                    .any(|&z| meta.is_a(z) && s.is_empty_vertex(z));
                if !opens_a {
                    continue;
                }
                if let Some(c) = lowest_proper_color(s, w, 0) {
                    return Ok((Move::color(w, c), GkStage::Anchors));
                }
            }
            Err(infeasible("no anchor or bridge move", s))
        }
        GkStage::Mirrors => {
            let (u, v) = (ctx.anchor_u.unwrap(), ctx.anchor_v.unwrap());
            let (cu, cv) = (color_at(s, u).unwrap(), color_at(s, v).unwrap());
            if ctx.mirror_u.is_none() {
                let w = s
                    .graph()
                    .neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&w| meta.is_b(w) && s.is_empty_vertex(w))
                    .find(|&w| color_proper_at(s, w, cv))
                    .ok_or_else(|| infeasible("no mirror for u", s))?;
                ctx.mirror_u = Some(w);
                return Ok((Move::color(w, cv), GkStage::Mirrors));
            }
            let w = s
                .graph()
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| meta.is_b(w) && s.is_empty_vertex(w))
                .find(|&w| color_proper_at(s, w, cu))
                .ok_or_else(|| infeasible("no mirror for v", s))?;
            ctx.mirror_v = Some(w);
            ctx.subset = vec![ctx.mirror_u.unwrap(), w];
            ctx.stage = GkStage::Subset;
            Ok((Move::color(w, cu), GkStage::Mirrors))
        }
        GkStage::Subset => {
            let (u, v) = (ctx.anchor_u.unwrap(), ctx.anchor_v.unwrap());
            let k = spec.k;
            let present: u64 = ctx
                .subset
                .iter()
                .filter_map(|&x| color_at(s, x))
                .fold(0, |m, c| m | 1 << c);
            let missing =
                (1..=k).find(|&c| present >> c & 1 == 0).ok_or_else(|| infeasible("no missing color", s))?;
            let mut pool: Vec<u32> = s
                .graph()
                .neighbors(u)
                .iter()
                .chain(s.graph().neighbors(v))
                .copied()
                .filter(|&w| meta.is_b(w) && s.is_empty_vertex(w))
                .collect();
            pool.sort_unstable();
            pool.dedup();
            let last = ctx.subset.len() == k as usize - 1;
            let w = pool
                .into_iter()
                .filter(|&w| color_proper_at(s, w, missing))
                .find(|&w| {
                    if !last {
                        return true;
                    }
                    // The completed subset must own an uncolored apex.
                    let mut x: Vec<u32> = ctx.subset.clone();
                    x.push(w);
                    x.sort_unstable();
                    match meta.apex_map.get(&x) {
                        Some(&apex) => s.is_empty_vertex(apex),
                        None => false,
                    }
                })
                .ok_or_else(|| infeasible("no completion of the subset", s))?;
            ctx.subset.push(w);
            if ctx.subset.len() == k as usize {
                ctx.stage = GkStage::Done;
            }
            Ok((Move::color(w, missing), GkStage::Subset))
        }
        GkStage::Done => Err(infeasible("consulted after the terminal stage", s)),
    }
}

// ---------------------------------------------------------------------------
// Generic strategies and the playout harness
// ---------------------------------------------------------------------------

/// A move policy for one side of a simulated game.
pub enum Strategy {
    /// Lowest vertex, lowest color.
    FirstLegal,
    /// Uniform over the legal moves of the position.
    Random,
    /// Most endangered vertex first (most distinct colored / marked
    /// neighbors), lowest proper color.
    Greedy,
    /// Exact solver under a node budget; on budget exhaustion falls back to
    /// greedy play filtered by a one-ply local safety check.
    SolverLimited { node_limit: u64 },
    /// Exact solver with default budgets.
    Solver,
    AliceBipartite,
    AliceOuterplanar(OuterplanarContext),
    BobGk(GkContext),
}

impl Strategy {
    pub fn next_move(
        &mut self,
        s: &GameState,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Move, Option<String>), StrategyError> {
        match self {
            Strategy::FirstLegal => {
                first_legal(s).map(|m| (m, None)).ok_or(StrategyError::NoMove)
            }
            Strategy::Random => random_move(s, rng).map(|m| (m, None)),
            Strategy::Greedy => greedy_move(s).map(|m| (m, None)).ok_or(StrategyError::NoMove),
            Strategy::SolverLimited { node_limit } => {
                // Exact search keys positions by the whole assignment; past
                // desk scale the budget is unreachable anyway, so fall back
                // without burning it.
                if s.graph().n() > 40 {
                    return safe_greedy_move(s)
                        .map(|m| (m, Some("lookahead".into())))
                        .ok_or(StrategyError::NoMove);
                }
                let cfg = SolverConfig { node_limit: *node_limit, ..SolverConfig::default() };
                match best_move(s, &cfg) {
                    Ok((m, _)) => Ok((m, Some("solver".into()))),
                    Err(SolveError::NodeBudget(_)) | Err(SolveError::MemoBudget(_)) => {
                        safe_greedy_move(s).map(|m| (m, Some("lookahead".into()))).ok_or(StrategyError::NoMove)
                    }
                    Err(e) => Err(e.into()),
                }
            }
            Strategy::Solver => {
                let (m, _) = best_move(s, &SolverConfig::default())?;
                Ok((m, None))
            }
            Strategy::AliceBipartite => alice_bipartite_move(s).map(|m| (m, None)),
            Strategy::AliceOuterplanar(ctx) => {
                alice_outerplanar_move(s, ctx).map(|(m, r)| (m, Some(r.label().to_string())))
            }
            Strategy::BobGk(ctx) => {
                bob_gk_move(s, ctx).map(|(m, st)| (m, Some(st.label().to_string())))
            }
        }
    }
}

/// One pass over the assigned set: for every unassigned neighbor, the
/// accumulated color mask (coloring) or marked-neighbor count (marking).
/// The key set is the frontier; with the connectivity proviso these are
/// exactly the playable vertices.
fn threat_map(s: &GameState) -> std::collections::HashMap<u32, u64> {
    let mut map = std::collections::HashMap::new();
    for &a in s.assigned() {
        let contribution = match s.spec().kind {
            GameKind::Coloring => 1u64 << color_at(s, a).unwrap_or(0),
            GameKind::Marking => 1,
        };
        for &w in s.graph().neighbors(a) {
            if s.is_empty_vertex(w) {
                match s.spec().kind {
                    GameKind::Coloring => *map.entry(w).or_insert(0) |= contribution,
                    GameKind::Marking => *map.entry(w).or_insert(0) += contribution,
                }
            }
        }
    }
    map
}

fn threat_of(s: &GameState, threats: &std::collections::HashMap<u32, u64>, v: u32) -> u32 {
    match s.spec().kind {
        GameKind::Coloring => threats.get(&v).copied().unwrap_or(0).count_ones(),
        GameKind::Marking => threats.get(&v).copied().unwrap_or(0) as u32,
    }
}

fn candidate_vertices(s: &GameState, need_playable: bool) -> Vec<u32> {
    if need_playable {
        let mut out: Vec<u32> = threat_map(s).into_keys().collect();
        out.sort_unstable();
        out
    } else {
        s.graph().vertices().filter(|&v| s.is_empty_vertex(v)).collect()
    }
}

fn first_legal(s: &GameState) -> Option<Move> {
    // Equivalent to legal_moves()[0] but stops at the first hit.
    let need_playable = s.spec().connected && s.moves_made() > 0;
    for v in candidate_vertices(s, need_playable) {
        match s.spec().kind {
            GameKind::Marking => return Some(Move::mark(v)),
            GameKind::Coloring => {
                if let Some(c) = lowest_proper_color(s, v, 0) {
                    return Some(Move::color(v, c));
                }
            }
        }
    }
    None
}

fn random_move(s: &GameState, rng: &mut ChaCha8Rng) -> Result<Move, StrategyError> {
    let spec = s.spec();
    // Opening move: every vertex (and color) is legal; sample directly so
    // huge graphs never materialize a move list.
    if s.assigned().is_empty() {
        let v = rng.gen_range(0..s.graph().n() as u32);
        return Ok(match spec.kind {
            GameKind::Marking => Move::mark(v),
            GameKind::Coloring => Move::color(v, rng.gen_range(1..=spec.k)),
        });
    }
    let cands = candidate_vertices(s, spec.connected);
    if cands.is_empty() {
        return Err(StrategyError::NoMove);
    }
    // Rejection sampling keeps the draw uniform over legal (vertex, color)
    // pairs without enumerating them.
    for _ in 0..200 {
        let v = cands[rng.gen_range(0..cands.len())];
        match spec.kind {
            GameKind::Marking => return Ok(Move::mark(v)),
            GameKind::Coloring => {
                let c = rng.gen_range(1..=spec.k);
                if color_proper_at(s, v, c) {
                    return Ok(Move::color(v, c));
                }
            }
        }
    }
    let moves = s.legal_moves();
    if moves.is_empty() {
        return Err(StrategyError::NoMove);
    }
    Ok(moves[rng.gen_range(0..moves.len())])
}

fn greedy_candidates(s: &GameState, threats: &std::collections::HashMap<u32, u64>) -> Vec<u32> {
    let need_playable = s.spec().connected && s.moves_made() > 0;
    let mut cands = candidate_vertices(s, need_playable);
    cands.sort_by_key(|&v| (std::cmp::Reverse(threat_of(s, threats, v)), v));
    cands
}

fn greedy_move(s: &GameState) -> Option<Move> {
    let threats = threat_map(s);
    for v in greedy_candidates(s, &threats) {
        match s.spec().kind {
            GameKind::Marking => return Some(Move::mark(v)),
            GameKind::Coloring => {
                let mask = threats.get(&v).copied().unwrap_or(0);
                if let Some(c) = (1..=s.spec().k).find(|&c| mask >> c & 1 == 0) {
                    return Some(Move::color(v, c));
                }
            }
        }
    }
    None
}

/// Greedy move that additionally avoids handing the opponent an immediate
/// saturation around the played vertex, when some inspected candidate can.
/// The danger scan is local to the frontier, so it stays cheap on graphs
/// with huge neighborhoods.
fn safe_greedy_move(s: &GameState) -> Option<Move> {
    let k = u32::from(s.spec().k);
    let threats = threat_map(s);
    let cands = greedy_candidates(s, &threats);
    let mut fallback = None;
    for v in cands.into_iter().take(16) {
        let mv = match s.spec().kind {
            GameKind::Marking => Move::mark(v),
            GameKind::Coloring => {
                let mask = threats.get(&v).copied().unwrap_or(0);
                match (1..=s.spec().k).find(|&c| mask >> c & 1 == 0) {
                    Some(c) => Move::color(v, c),
                    None => continue,
                }
            }
        };
        if fallback.is_none() {
            fallback = Some(mv);
        }
        // A neighbor t can only approach saturation if it already had an
        // assigned neighbor, i.e. sits in the threat map.
        let danger = s.graph().neighbors(v).iter().any(|&t| {
            if !s.is_empty_vertex(t) {
                return false;
            }
            let Some(&raw) = threats.get(&t) else { return false };
            let after = match s.spec().kind {
                GameKind::Marking => raw as u32 + 1,
                GameKind::Coloring => (raw | 1 << mv.color.unwrap_or(0)).count_ones(),
            };
            if after >= k {
                return true;
            }
            if after == k - 1 {
                // One opponent move from saturation if t keeps a playable
                // unassigned neighbor; bounded scan, heuristic by design.
                return s
                    .graph()
                    .neighbors(t)
                    .iter()
                    .take(64)
                    .any(|&w| {
                        w != v
                            && s.is_empty_vertex(w)
                            && (threats.contains_key(&w) || s.graph().has_edge(w, v))
                    });
            }
            false
        });
        if !danger {
            return Some(mv);
        }
    }
    fallback.or_else(|| greedy_move(s))
}

/// Runs one full game between two strategies; deterministic given the seed.
pub fn simulate(
    g: &Arc<Graph>,
    spec: GameSpec,
    alice: &mut Strategy,
    bob: &mut Strategy,
    seed: u64,
) -> Result<Trace, StrategyError> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = new_game(g.clone(), spec)?.with_history(true);
    let mut moves = Vec::new();
    let verdict = loop {
        if let Some(w) = s.winner() {
            break w;
        }
        let player = s.turn();
        let strategy = match player {
            Player::Alice => &mut *alice,
            Player::Bob => &mut *bob,
        };
        let (mv, note) = strategy.next_move(&s, &mut rng)?;
        let ply = s.moves_made();
        s.apply_move_mut(mv).map_err(|source| StrategyError::IllegalMove {
            player,
            mv,
            ply,
            source,
        })?;
        moves.push(TraceMove { player, vertex: mv.vertex, color: mv.color, note });
    };
    Ok(Trace { spec, moves, verdict })
}

// ---------------------------------------------------------------------------
// Adversarial verification
// ---------------------------------------------------------------------------

/// Deterministic Alice strategies that can face the exhaustive Bob adversary.
pub enum DeterministicAlice {
    FirstLegal,
    Bipartite,
    Outerplanar(OuterplanarContext),
}

impl DeterministicAlice {
    fn choose(&self, s: &GameState) -> Result<(Move, Option<String>), StrategyError> {
        match self {
            DeterministicAlice::FirstLegal => {
                first_legal(s).map(|m| (m, None)).ok_or(StrategyError::NoMove)
            }
            DeterministicAlice::Bipartite => alice_bipartite_move(s).map(|m| (m, None)),
            DeterministicAlice::Outerplanar(ctx) => {
                alice_outerplanar_move(s, ctx).map(|(m, r)| (m, Some(r.label().to_string())))
            }
        }
    }

    /// Strategy-specific conditions checked after each Alice move; returns a
    /// violation description if one fails. For the outerplanar strategy this
    /// is the same invariant its move gate maintains.
    fn post_move_violation(&self, s: &GameState) -> Option<String> {
        match self {
            DeterministicAlice::Outerplanar(ctx) => {
                let (u, up) = ctx.m.root_outer_edge();
                if s.moves_made() >= 3 && (s.is_empty_vertex(u) || s.is_empty_vertex(up)) {
                    return Some(format!(
                        "root edge ({u}, {up}) not fully marked after Alice's second move"
                    ));
                }
                for t in &ctx.d.trapezoids {
                    let (v, vp) = t.parents;
                    if !ctx.m.base().has_edge(v, vp) {
                        continue;
                    }
                    for &c in &t.children {
                        if !s.is_empty_vertex(c) && (s.is_empty_vertex(v) || s.is_empty_vertex(vp)) {
                            return Some(format!(
                                "child {c} marked but root edge ({v}, {vp}) is not"
                            ));
                        }
                    }
                }
                None
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum VerifyOutcome {
    Pass { states: u64 },
    Fail { witness: Trace, reason: String },
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, VerifyOutcome::Pass { .. })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyLimits {
    pub max_states: u64,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        VerifyLimits { max_states: 100_000_000 }
    }
}

struct VerifyRun<'a> {
    alice: &'a DeterministicAlice,
    limits: VerifyLimits,
    states: u64,
    seen: std::collections::HashSet<Vec<u8>>,
    path: Vec<TraceMove>,
}

enum Walk {
    Clean,
    Witness(Vec<TraceMove>, String),
}

impl VerifyRun<'_> {
    /// Explores all Bob continuations from a position where Bob is to move
    /// (or the game just ended). `s` must already satisfy the after-Alice
    /// checks.
    fn explore(&mut self, s: &GameState) -> Result<Walk, StrategyError> {
        if s.winner().is_some() {
            return Ok(Walk::Clean);
        }
        self.states += 1;
        if self.states > self.limits.max_states {
            return Err(StrategyError::Budget(self.states));
        }
        for bob_move in s.legal_moves() {
            let s1 = s.apply_move(bob_move).expect("legal move");
            self.path.push(TraceMove {
                player: Player::Bob,
                vertex: bob_move.vertex,
                color: bob_move.color,
                note: None,
            });
            let outcome = self.after_bob(&s1)?;
            self.path.pop();
            if let Walk::Witness(..) = outcome {
                return Ok(outcome);
            }
        }
        Ok(Walk::Clean)
    }

    fn after_bob(&mut self, s1: &GameState) -> Result<Walk, StrategyError> {
        if s1.winner() == Some(Player::Bob) {
            return Ok(self.witness("Bob saturated a vertex"));
        }
        if s1.winner() == Some(Player::Alice) {
            return Ok(Walk::Clean);
        }
        let (mv, note) = self.alice.choose(s1)?;
        let ply = s1.moves_made();
        let s2 = s1.apply_move(mv).map_err(|source| StrategyError::IllegalMove {
            player: Player::Alice,
            mv,
            ply,
            source,
        })?;
        self.path.push(TraceMove { player: Player::Alice, vertex: mv.vertex, color: mv.color, note });
        let out = self.after_alice(&s2)?;
        self.path.pop();
        Ok(out)
    }

    fn after_alice(&mut self, s2: &GameState) -> Result<Walk, StrategyError> {
        if let Some(reason) = after_alice_violation(self.alice, s2) {
            return Ok(self.witness(&reason));
        }
        if s2.winner() == Some(Player::Alice) {
            return Ok(Walk::Clean);
        }
        if !self.seen.insert(canonical_key(s2)) {
            return Ok(Walk::Clean);
        }
        self.explore(s2)
    }

    fn witness(&self, reason: &str) -> Walk {
        Walk::Witness(self.path.clone(), reason.to_string())
    }
}

/// The pass conditions checked at every after-Alice position: no saturation
/// anywhere (in particular not by Alice's own move), no threatened vertex in
/// marking games, and the strategy's own structural observations.
fn after_alice_violation(alice: &DeterministicAlice, s2: &GameState) -> Option<String> {
    if s2.winner() == Some(Player::Bob) {
        return Some("a vertex is saturated after Alice's move".into());
    }
    if s2.spec().kind == GameKind::Marking {
        if let Some(t) = s2.graph().vertices().find(|&v| s2.vertex_status(v).threatened) {
            return Some(format!("vertex {t} threatened after Alice's move"));
        }
    }
    alice.post_move_violation(s2)
}

/// Plays the deterministic Alice against every Bob continuation. Marking
/// games pass when no vertex is ever saturated and no vertex is threatened
/// after any Alice move; coloring games pass when Alice wins every playout.
pub fn adversarial_verify_seq(
    g: &Arc<Graph>,
    spec: GameSpec,
    alice: &DeterministicAlice,
    limits: VerifyLimits,
) -> Result<VerifyOutcome, StrategyError> {
    let root = new_game(g.clone(), spec)?.with_history(true);
    let mut run = VerifyRun {
        alice,
        limits,
        states: 0,
        seen: std::collections::HashSet::new(),
        path: Vec::new(),
    };
    let (mv, note) = alice.choose(&root)?;
    let s = root.apply_move(mv).map_err(|source| StrategyError::IllegalMove {
        player: Player::Alice,
        mv,
        ply: 0,
        source,
    })?;
    run.path.push(TraceMove { player: Player::Alice, vertex: mv.vertex, color: mv.color, note });
    let walk = run.after_alice(&s)?;
    finish(spec, walk, run.states)
}

/// Parallel variant: Bob's first replies are explored concurrently, each
/// branch with its own dedup table; the reported witness is the one the
/// sequential order would find first.
#[cfg(feature = "parallel")]
pub fn adversarial_verify_par(
    g: &Arc<Graph>,
    spec: GameSpec,
    alice: &DeterministicAlice,
    limits: VerifyLimits,
) -> Result<VerifyOutcome, StrategyError> {
    use rayon::prelude::*;

    let root = new_game(g.clone(), spec)?.with_history(true);
    let (mv, note) = alice.choose(&root)?;
    let s = root.apply_move(mv).map_err(|source| StrategyError::IllegalMove {
        player: Player::Alice,
        mv,
        ply: 0,
        source,
    })?;
    let first = TraceMove { player: Player::Alice, vertex: mv.vertex, color: mv.color, note };

    if let Some(reason) = after_alice_violation(alice, &s) {
        return finish(spec, Walk::Witness(vec![first], reason), 0);
    }
    if s.winner() == Some(Player::Alice) {
        return finish(spec, Walk::Clean, 0);
    }

    let branches = s.legal_moves();
    let results: Result<Vec<(u64, Walk)>, StrategyError> = branches
        .par_iter()
        .map(|&bob_move| {
            let mut run = VerifyRun {
                alice,
                limits,
                states: 0,
                seen: std::collections::HashSet::new(),
                path: vec![first.clone()],
            };
            let s1 = s.apply_move(bob_move).expect("legal move");
            run.path.push(TraceMove {
                player: Player::Bob,
                vertex: bob_move.vertex,
                color: bob_move.color,
                note: None,
            });
            let walk = run.after_bob(&s1)?;
            Ok((run.states, walk))
        })
        .collect();
    let results = results?;
    let states = results.iter().map(|(n, _)| n).sum();
    for (_, walk) in results {
        if let Walk::Witness(..) = walk {
            return finish(spec, walk, states);
        }
    }
    finish(spec, Walk::Clean, states)
}

fn finish(spec: GameSpec, walk: Walk, states: u64) -> Result<VerifyOutcome, StrategyError> {
    match walk {
        Walk::Clean => Ok(VerifyOutcome::Pass { states }),
        Walk::Witness(moves, reason) => {
            let verdict = Player::Bob;
            Ok(VerifyOutcome::Fail { witness: Trace { spec, moves, verdict }, reason })
        }
    }
}

/// Feature-dispatched verification entry point.
pub fn adversarial_verify(
    g: &Arc<Graph>,
    spec: GameSpec,
    alice: &DeterministicAlice,
    limits: VerifyLimits,
) -> Result<VerifyOutcome, StrategyError> {
    #[cfg(feature = "parallel")]
    {
        adversarial_verify_par(g, spec, alice, limits)
    }
    #[cfg(not(feature = "parallel"))]
    {
        adversarial_verify_seq(g, spec, alice, limits)
    }
}
