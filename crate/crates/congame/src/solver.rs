//! Exact winner determination by memoized exhaustive search, and the derived
//! game parameters (the least k for which Alice wins each game kind).
//!
//! The game is win/loss valued, so plain AND-OR minimax with a transposition
//! table suffices; positions are collapsed up to color renaming. Budgets are
//! explicit: exceeding one is an error, never a wrong answer.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{new_game, EngineError, GameKind, GameSpec, GameState, Move, Player, EMPTY};
use crate::graph::Graph;

/// Environment variable overriding the default memo entry budget.
pub const MEMO_LIMIT_ENV: &str = "CONGAME_MEMO_LIMIT";

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("node budget exhausted after {0} expansions")]
    NodeBudget(u64),
    #[error("memo budget exhausted at {0} entries")]
    MemoBudget(usize),
    #[error(transparent)]
    Setup(#[from] EngineError),
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// Collapse positions up to color renaming. Turning this off keeps the
    /// raw assignment as the memo key; used for self-consistency checks.
    pub canonical: bool,
    pub node_limit: u64,
    pub memo_limit: usize,
    pub want_pv: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let memo_limit = std::env::var(MEMO_LIMIT_ENV)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(32_000_000);
        SolverConfig { canonical: true, node_limit: 2_000_000_000, memo_limit, want_pv: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub winner: Player,
    pub nodes_expanded: u64,
    pub memo_hits: u64,
    pub principal_variation: Option<Vec<Move>>,
}

/// Per-k winners over a queried range, and the least k where Alice wins. No
/// monotonicity is assumed: the profile is the report, the minimum derived.
#[derive(Clone, Debug, Serialize)]
pub struct WinnerProfile {
    pub winners: Vec<(u8, Player)>,
    pub min_winning_k: Option<u8>,
    pub nodes_expanded: u64,
}

/// Memo key identifying a position up to color renaming: spec, turn parity,
/// then the assignment with colors renumbered by first appearance along the
/// fixed vertex order. Marks and empties are kept verbatim.
pub fn canonical_key(s: &GameState) -> Vec<u8> {
    key_of(s, true)
}

fn key_of(s: &GameState, canonical: bool) -> Vec<u8> {
    let spec = s.spec();
    let n = s.graph().n();
    let mut key = Vec::with_capacity(n + 4);
    key.push(match spec.kind {
        GameKind::Coloring => 0,
        GameKind::Marking => 1,
    });
    key.push(spec.connected as u8);
    key.push(spec.k);
    key.push((s.moves_made() % 2) as u8);
    let raw = s.raw_assignment();
    if canonical && spec.kind == GameKind::Coloring {
        let mut rename = [0u8; 256];
        let mut next = 0u8;
        for &c in raw {
            if c == EMPTY {
                key.push(EMPTY);
            } else {
                if rename[c as usize] == 0 {
                    next += 1;
                    rename[c as usize] = next;
                }
                key.push(rename[c as usize]);
            }
        }
    } else {
        key.extend_from_slice(raw);
    }
    key
}

struct Search {
    memo: HashMap<Vec<u8>, Player>,
    nodes: u64,
    hits: u64,
    cfg: SolverConfig,
}

impl Search {
    fn run(&mut self, s: &GameState) -> Result<Player, SolveError> {
        if let Some(w) = s.winner() {
            return Ok(w);
        }
        let key = key_of(s, self.cfg.canonical);
        if let Some(&w) = self.memo.get(&key) {
            self.hits += 1;
            return Ok(w);
        }
        self.nodes += 1;
        if self.nodes > self.cfg.node_limit {
            return Err(SolveError::NodeBudget(self.nodes));
        }
        let mover = s.turn();
        let mut result = mover.opponent();
        for m in s.legal_moves() {
            let child = s.apply_move(m).expect("legal move");
            if self.run(&child)? == mover {
                result = mover;
                break;
            }
        }
        if self.memo.len() >= self.cfg.memo_limit {
            return Err(SolveError::MemoBudget(self.memo.len()));
        }
        self.memo.insert(key, result);
        Ok(result)
    }

    /// Rebuilds a winning line from the warm memo: the winner plays a move
    /// that preserves the win, the loser the first legal move.
    fn principal_variation(&mut self, root: &GameState, winner: Player) -> Vec<Move> {
        let mut pv = Vec::new();
        let mut s = root.clone();
        while s.winner().is_none() {
            let moves = s.legal_moves();
            debug_assert!(!moves.is_empty(), "no stalemates");
            let mover = s.turn();
            let chosen = if mover == winner {
                *moves
                    .iter()
                    .find(|&&m| {
                        let child = s.apply_move(m).expect("legal move");
                        matches!(self.run(&child), Ok(w) if w == winner)
                    })
                    .expect("winner has a winning move")
            } else {
                moves[0]
            };
            pv.push(chosen);
            s = s.apply_move(chosen).expect("legal move");
        }
        debug_assert_eq!(s.winner(), Some(winner));
        pv
    }
}

/// Exact winner under optimal play from an arbitrary position.
pub fn solve_state(s: &GameState, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    let mut search = Search { memo: HashMap::new(), nodes: 0, hits: 0, cfg: *cfg };
    let winner = search.run(s)?;
    let principal_variation =
        if cfg.want_pv { Some(search.principal_variation(s, winner)) } else { None };
    Ok(SolveResult {
        winner,
        nodes_expanded: search.nodes,
        memo_hits: search.hits,
        principal_variation,
    })
}

pub fn solve_with(g: &Arc<Graph>, spec: GameSpec, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    let s = new_game(g.clone(), spec)?;
    solve_state(&s, cfg)
}

/// Exact winner with the default configuration.
pub fn solve_fixed_k(g: &Arc<Graph>, spec: GameSpec) -> Result<SolveResult, SolveError> {
    solve_with(g, spec, &SolverConfig::default())
}

/// A move keeping the mover's game-theoretic value, for solver-driven play:
/// the winning mover gets a winning move, the loser the first legal one.
pub fn best_move(s: &GameState, cfg: &SolverConfig) -> Result<(Move, Player), SolveError> {
    let mut search = Search { memo: HashMap::new(), nodes: 0, hits: 0, cfg: *cfg };
    let value = search.run(s)?;
    let moves = s.legal_moves();
    let mover = s.turn();
    if value == mover {
        for m in moves {
            let child = s.apply_move(m).expect("legal move");
            if search.run(&child)? == mover {
                return Ok((m, value));
            }
        }
        unreachable!("winning position without a winning move");
    }
    Ok((moves[0], value))
}

pub fn winner_profile(
    g: &Arc<Graph>,
    kind: GameKind,
    connected: bool,
    k_range: std::ops::RangeInclusive<u8>,
    cfg: &SolverConfig,
) -> Result<WinnerProfile, SolveError> {
    let ks: Vec<u8> = k_range.collect();
    let solve_one = |&k: &u8| -> Result<(u8, Player, u64), SolveError> {
        let r = solve_with(g, GameSpec { kind, connected, k }, cfg)?;
        Ok((k, r.winner, r.nodes_expanded))
    };

    #[cfg(feature = "parallel")]
    let solved: Result<Vec<_>, SolveError> = {
        use rayon::prelude::*;
        ks.par_iter().map(solve_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let solved: Result<Vec<_>, SolveError> = ks.iter().map(solve_one).collect();

    let solved = solved?;
    let winners: Vec<(u8, Player)> = solved.iter().map(|&(k, w, _)| (k, w)).collect();
    let nodes_expanded = solved.iter().map(|&(_, _, n)| n).sum();
    let min_winning_k = winners.iter().find(|&&(_, w)| w == Player::Alice).map(|&(k, _)| k);
    Ok(WinnerProfile { winners, min_winning_k, nodes_expanded })
}

/// Sequential profile regardless of the `parallel` feature; the benches
/// compare this against `winner_profile`.
pub fn winner_profile_seq(
    g: &Arc<Graph>,
    kind: GameKind,
    connected: bool,
    k_range: std::ops::RangeInclusive<u8>,
    cfg: &SolverConfig,
) -> Result<WinnerProfile, SolveError> {
    let mut winners = Vec::new();
    let mut nodes_expanded = 0;
    for k in k_range {
        let r = solve_with(g, GameSpec { kind, connected, k }, cfg)?;
        winners.push((k, r.winner));
        nodes_expanded += r.nodes_expanded;
    }
    let min_winning_k = winners.iter().find(|&&(_, w)| w == Player::Alice).map(|&(k, _)| k);
    Ok(WinnerProfile { winners, min_winning_k, nodes_expanded })
}

/// The game parameter for one kind: the least k for which Alice wins.
/// Searching up to max_degree + 1 always terminates with an Alice win, since
/// no vertex can ever be saturated there.
pub fn game_parameter(
    g: &Arc<Graph>,
    kind: GameKind,
    connected: bool,
    cfg: &SolverConfig,
) -> Result<u8, SolveError> {
    let top = g.max_degree() as u8 + 1;
    for k in 1..=top {
        let r = solve_with(g, GameSpec { kind, connected, k }, cfg)?;
        if r.winner == Player::Alice {
            return Ok(k);
        }
    }
    unreachable!("Alice wins every game with k = max_degree + 1");
}
