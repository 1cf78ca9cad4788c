//! Rules of the four games: {coloring, marking} x {connected, ordinary}.
//!
//! States are immutable values; `apply_move` returns a fresh state and the
//! mutating variant exists for harnesses that replay long playouts on large
//! graphs. Bob's win (a saturated vertex) is detected eagerly at the move
//! that creates it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{is_connected, Graph};

pub const EMPTY: u8 = 0;
pub const MARKED: u8 = u8::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Coloring,
    Marking,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Alice,
    Bob,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Alice => Player::Bob,
            Player::Bob => Player::Alice,
        }
    }
}

/// Which game is being played: kind, connectivity restriction, and the number
/// of colors (or the marking threshold) `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameSpec {
    pub kind: GameKind,
    pub connected: bool,
    pub k: u8,
}

impl GameSpec {
    pub fn coloring(connected: bool, k: u8) -> GameSpec {
        GameSpec { kind: GameKind::Coloring, connected, k }
    }

    pub fn marking(connected: bool, k: u8) -> GameSpec {
        GameSpec { kind: GameKind::Marking, connected, k }
    }
}

/// A move: the vertex, plus the color for coloring games.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub vertex: u32,
    pub color: Option<u8>,
}

impl Move {
    pub fn color(vertex: u32, color: u8) -> Move {
        Move { vertex, color: Some(color) }
    }

    pub fn mark(vertex: u32) -> Move {
        Move { vertex, color: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Color(u8),
    Marked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexStatus {
    pub playable: bool,
    pub saturated: bool,
    pub threatened: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("connected game requires a connected nonempty graph")]
    DisconnectedGraph,
    #[error("game needs k >= 1")]
    ZeroBudget,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u32),
    #[error("vertex {0} is already occupied")]
    Occupied(u32),
    #[error("color {color} on vertex {vertex} clashes with a neighbor")]
    ImproperColor { vertex: u32, color: u8 },
    #[error("color {color} outside 1..={k}")]
    ColorOutOfRange { color: u8, k: u8 },
    #[error("coloring move needs a color")]
    ColorRequired,
    #[error("marking move must not carry a color")]
    ColorForbidden,
    #[error("vertex {0} is not playable (no assigned neighbor)")]
    NotPlayable(u32),
}

/// A position in one of the games. `assignment[v]` is `EMPTY`, `MARKED`, or a
/// color in `1..=k`.
#[derive(Clone, Debug)]
pub struct GameState {
    graph: Arc<Graph>,
    spec: GameSpec,
    assignment: Vec<u8>,
    assigned: Vec<u32>,
    moves_made: u32,
    winner: Option<Player>,
    history: Option<Vec<Move>>,
}

pub fn new_game(graph: Arc<Graph>, spec: GameSpec) -> Result<GameState, EngineError> {
    if spec.k == 0 {
        return Err(EngineError::ZeroBudget);
    }
    if spec.connected && (graph.n() == 0 || !is_connected(&graph)) {
        return Err(EngineError::DisconnectedGraph);
    }
    let n = graph.n();
    Ok(GameState {
        graph,
        spec,
        assignment: vec![EMPTY; n],
        assigned: Vec::new(),
        moves_made: 0,
        winner: None,
        history: None,
    })
}

impl GameState {
    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn moves_made(&self) -> u32 {
        self.moves_made
    }

    /// Alice moves first and the players alternate.
    pub fn turn(&self) -> Player {
        if self.moves_made % 2 == 0 {
            Player::Alice
        } else {
            Player::Bob
        }
    }

    pub fn cell(&self, v: u32) -> Cell {
        match self.assignment[v as usize] {
            EMPTY => Cell::Empty,
            MARKED => Cell::Marked,
            c => Cell::Color(c),
        }
    }

    pub fn raw_assignment(&self) -> &[u8] {
        &self.assignment
    }

    /// Vertices in the order they were assigned.
    pub fn assigned(&self) -> &[u32] {
        &self.assigned
    }

    pub fn is_empty_vertex(&self, v: u32) -> bool {
        self.assignment[v as usize] == EMPTY
    }

    pub fn with_history(mut self, on: bool) -> GameState {
        self.history = if on { Some(Vec::new()) } else { None };
        self
    }

    pub fn history(&self) -> Option<&[Move]> {
        self.history.as_deref()
    }

    /// Distinct colors among the assigned neighbors of `v` (coloring games).
    fn neighbor_color_mask(&self, v: u32) -> u64 {
        let mut mask = 0u64;
        self.for_assigned_neighbors(v, |c| mask |= 1 << c);
        mask
    }

    fn marked_neighbor_count(&self, v: u32) -> usize {
        let mut count = 0;
        self.for_assigned_neighbors(v, |_| count += 1);
        count
    }

    /// Visits the assigned neighbors of `v`, scanning whichever of {neighbor
    /// list, assigned list} is shorter. On apex-heavy graphs the assigned
    /// list wins by orders of magnitude.
    fn for_assigned_neighbors(&self, v: u32, mut f: impl FnMut(u8)) {
        if self.graph.degree(v) <= self.assigned.len() {
            for &w in self.graph.neighbors(v) {
                let c = self.assignment[w as usize];
                if c != EMPTY {
                    f(c);
                }
            }
        } else {
            for &w in &self.assigned {
                if self.graph.has_edge(v, w) {
                    f(self.assignment[w as usize]);
                }
            }
        }
    }

    pub fn is_playable(&self, v: u32) -> bool {
        if self.assignment[v as usize] != EMPTY {
            return false;
        }
        let mut any = false;
        self.for_assigned_neighbors(v, |_| any = true);
        any
    }

    fn is_saturated(&self, v: u32) -> bool {
        if self.assignment[v as usize] != EMPTY {
            return false;
        }
        match self.spec.kind {
            GameKind::Coloring => {
                self.neighbor_color_mask(v).count_ones() as u8 >= self.spec.k
            }
            GameKind::Marking => self.marked_neighbor_count(v) >= self.spec.k as usize,
        }
    }

    /// The playable / saturated / threatened predicates. Threatened is a
    /// marking-game notion: one Bob move away from saturation.
    pub fn vertex_status(&self, v: u32) -> VertexStatus {
        let playable = self.is_playable(v);
        let saturated = self.is_saturated(v);
        let threatened = self.spec.kind == GameKind::Marking
            && self.assignment[v as usize] == EMPTY
            && self.marked_neighbor_count(v) == self.spec.k as usize - 1
            && self.graph.neighbors(v).iter().any(|&w| self.is_playable(w));
        VertexStatus { playable, saturated, threatened }
    }

    /// Bob wins as soon as some empty vertex is saturated; Alice wins when
    /// everything is assigned. `None` while the game is still open.
    pub fn winner(&self) -> Option<Player> {
        if let Some(w) = self.winner {
            return Some(w);
        }
        if self.assigned.len() == self.graph.n() {
            return Some(Player::Alice);
        }
        None
    }

    fn playability_required(&self) -> bool {
        self.spec.connected && self.moves_made > 0
    }

    fn check_move(&self, m: Move) -> Result<(), EngineError> {
        let v = m.vertex;
        if v as usize >= self.graph.n() {
            return Err(EngineError::VertexOutOfRange(v));
        }
        if self.assignment[v as usize] != EMPTY {
            return Err(EngineError::Occupied(v));
        }
        match self.spec.kind {
            GameKind::Coloring => {
                let c = m.color.ok_or(EngineError::ColorRequired)?;
                if c == 0 || c > self.spec.k {
                    return Err(EngineError::ColorOutOfRange { color: c, k: self.spec.k });
                }
                if self.neighbor_color_mask(v) >> c & 1 == 1 {
                    return Err(EngineError::ImproperColor { vertex: v, color: c });
                }
            }
            GameKind::Marking => {
                if m.color.is_some() {
                    return Err(EngineError::ColorForbidden);
                }
            }
        }
        if self.playability_required() && !self.is_playable(v) {
            return Err(EngineError::NotPlayable(v));
        }
        Ok(())
    }

    /// All legal moves, ordered by vertex id then color.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut out = Vec::new();
        let need_playable = self.playability_required();
        for v in self.graph.vertices() {
            if self.assignment[v as usize] != EMPTY {
                continue;
            }
            if need_playable && !self.is_playable(v) {
                continue;
            }
            match self.spec.kind {
                GameKind::Coloring => {
                    let mask = self.neighbor_color_mask(v);
                    for c in 1..=self.spec.k {
                        if mask >> c & 1 == 0 {
                            out.push(Move::color(v, c));
                        }
                    }
                }
                GameKind::Marking => out.push(Move::mark(v)),
            }
        }
        out
    }

    /// Applies a legal move in place. Used by the solver and the playout
    /// harnesses; the value-semantics `apply_move` is a clone plus this.
    pub fn apply_move_mut(&mut self, m: Move) -> Result<(), EngineError> {
        self.check_move(m)?;
        let v = m.vertex;
        self.assignment[v as usize] = match self.spec.kind {
            GameKind::Coloring => m.color.unwrap(),
            GameKind::Marking => MARKED,
        };
        self.assigned.push(v);
        self.moves_made += 1;
        if let Some(h) = self.history.as_mut() {
            h.push(m);
        }
        // Saturation can only appear next to the vertex just assigned.
        if self.winner.is_none()
            && self.graph.neighbors(v).iter().any(|&w| self.is_saturated(w))
        {
            self.winner = Some(Player::Bob);
        }
        Ok(())
    }

    pub fn apply_move(&self, m: Move) -> Result<GameState, EngineError> {
        let mut next = self.clone();
        next.apply_move_mut(m)?;
        Ok(next)
    }
}
