//! Exact game values and best-response searches.
//!
//! The full game is solved through the decision question "can Spoiler
//! force at least `k` colours from here?", memoized as proven bounds on the
//! canonical (automorphism-folded) state key. The value is found by raising
//! `k` until the answer turns negative. Best responses against a fixed
//! strategy search one side only and memoize on the plain state key plus
//! the strategy's fingerprint, since a fixed strategy need not respect the
//! host's symmetry.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{ColorChoice, Game, GameConfig, GameError, MoveRecord, Rules, StateKey, TokenState};
use crate::graph::members;
use crate::strategies::{AlgorithmStrategy, SpoilerStrategy, StrategyError};

pub const DEFAULT_MAX_STATES: u64 = 10_000_000;
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_states: u64,
    pub time_limit: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_states: DEFAULT_MAX_STATES,
            time_limit: DEFAULT_TIME_LIMIT,
        }
    }
}

impl Budget {
    pub fn states(max_states: u64) -> Self {
        Budget {
            max_states,
            ..Budget::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("strategy failed: {0}")]
    Strategy(#[from] StrategyError),
    #[error("strategy {strategy} made an illegal move: {source}")]
    IllegalMove {
        strategy: &'static str,
        #[source]
        source: GameError,
    },
}

/// Outcome of a search. When `exact` is false the budget ran out and
/// `value` is the best proven bound: a lower bound for the full game and for
/// Spoiler's best response, an upper bound for Algorithm's best response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameValue {
    pub value: u32,
    pub exact: bool,
    pub states: u64,
    pub principal_variation: Vec<MoveRecord>,
}

enum Stop {
    Budget,
    Failed(SolverError),
}

impl From<SolverError> for Stop {
    fn from(e: SolverError) -> Self {
        Stop::Failed(e)
    }
}

impl From<StrategyError> for Stop {
    fn from(e: StrategyError) -> Self {
        Stop::Failed(e.into())
    }
}

struct Meter {
    states: u64,
    max_states: u64,
    deadline: Instant,
}

impl Meter {
    fn new(budget: Budget) -> Self {
        Meter {
            states: 0,
            max_states: budget.max_states,
            deadline: Instant::now() + budget.time_limit,
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.states += 1;
        if self.states > self.max_states || (self.states.is_multiple_of(1024) && Instant::now() >= self.deadline) {
            return Err(Stop::Budget);
        }
        Ok(())
    }
}

/// Tokens that could still be placed, one colour each at most.
fn capacity(rules: &Rules, state: &TokenState) -> u32 {
    let w = rules.width();
    state
        .counts()
        .iter()
        .map(|&c| {
            let c = c as u32;
            if rules.config().restricted {
                u32::from(c == 0)
            } else {
                w.saturating_sub(c)
            }
        })
        .sum()
}

/// Legal Spoiler moves, most-loaded vertices first.
fn ordered_moves(rules: &Rules, state: &TokenState) -> Vec<usize> {
    let mut moves: Vec<usize> = members(rules.legal_spoiler_moves(state)).collect();
    moves.sort_by_key(|&v| std::cmp::Reverse(state.count(v)));
    moves
}

/// Algorithm replies, extensions first.
fn ordered_options(rules: &Rules, state: &TokenState, v: usize) -> Vec<ColorChoice> {
    let mut options = rules.algorithm_options(state, v);
    options.rotate_left(1);
    options
}

/// Full-game solver with a bounds memo that survives across queries.
pub struct Solver {
    rules: Arc<Rules>,
    /// Proven `(lower, upper)` bounds on the value of each canonical state.
    bounds: DashMap<StateKey, (u32, u32)>,
}

impl Solver {
    pub fn new(rules: Arc<Rules>) -> Self {
        Solver {
            rules,
            bounds: DashMap::new(),
        }
    }

    pub fn rules(&self) -> &Arc<Rules> {
        &self.rules
    }

    fn forces(&self, meter: &mut Meter, state: &TokenState, k: u32) -> Result<bool, Stop> {
        let used = state.colors_used();
        if used >= k {
            return Ok(true);
        }
        if used + capacity(&self.rules, state) < k {
            return Ok(false);
        }
        let key = self.rules.canonical_key(state);
        if let Some(b) = self.bounds.get(&key) {
            if b.0 >= k {
                return Ok(true);
            }
            if b.1 < k {
                return Ok(false);
            }
        }
        meter.tick()?;
        let mut forced = false;
        for v in ordered_moves(&self.rules, state) {
            let mut all = true;
            for c in ordered_options(&self.rules, state, v) {
                if !self.forces(meter, &state.applied(v, c), k)? {
                    all = false;
                    break;
                }
            }
            if all {
                forced = true;
                break;
            }
        }
        let mut entry = self.bounds.entry(key).or_insert((0, u32::MAX));
        if forced {
            entry.0 = entry.0.max(k);
        } else {
            entry.1 = entry.1.min(k - 1);
        }
        Ok(forced)
    }

    /// Value from `state`; on budget exhaustion the proven lower bound is
    /// returned in the error position.
    fn value_in(&self, meter: &mut Meter, state: &TokenState) -> Result<u32, (u32, Stop)> {
        let key = self.rules.canonical_key(state);
        let (mut lo, hi) = self.bounds.get(&key).map(|b| *b).unwrap_or((0, u32::MAX));
        lo = lo.max(state.colors_used());
        while lo < hi {
            match self.forces(meter, state, lo + 1) {
                Ok(true) => lo += 1,
                Ok(false) => break,
                Err(stop) => return Err((lo, stop)),
            }
        }
        Ok(lo)
    }

    /// Exact value of `state` under `budget`.
    pub fn value(&self, state: &TokenState, budget: Budget) -> Result<GameValue, SolverError> {
        let mut meter = Meter::new(budget);
        let (value, exact) = match self.value_in(&mut meter, state) {
            Ok(v) => (v, true),
            Err((lo, Stop::Budget)) => (lo, false),
            Err((_, Stop::Failed(e))) => return Err(e),
        };
        let principal_variation = if exact {
            self.principal_variation(&mut meter, state)
        } else {
            Vec::new()
        };
        Ok(GameValue {
            value,
            exact,
            states: meter.states,
            principal_variation,
        })
    }

    /// Spoiler move achieving the value of `state`, if any move helps.
    pub fn best_spoiler_move(&self, state: &TokenState, budget: Budget) -> Result<Option<usize>, SolverError> {
        let mut meter = Meter::new(budget);
        Ok(self.best_line_step(&mut meter, state).map(|(v, _)| v))
    }

    /// Algorithm reply minimising the value after a token at `v`.
    pub fn best_reply(&self, state: &TokenState, v: usize, budget: Budget) -> Option<ColorChoice> {
        let mut meter = Meter::new(budget);
        self.best_reply_in(&mut meter, state, v).map(|(c, _)| c)
    }

    fn best_reply_in(&self, meter: &mut Meter, state: &TokenState, v: usize) -> Option<(ColorChoice, u32)> {
        let mut best: Option<(ColorChoice, u32)> = None;
        for c in ordered_options(&self.rules, state, v) {
            let value = self.value_in(meter, &state.applied(v, c)).ok()?;
            if best.is_none_or(|(_, b)| value < b) {
                best = Some((c, value));
            }
        }
        best
    }

    fn best_line_step(&self, meter: &mut Meter, state: &TokenState) -> Option<(usize, ColorChoice)> {
        let value = self.value_in(meter, state).ok()?;
        if value == state.colors_used() {
            return None;
        }
        for v in ordered_moves(&self.rules, state) {
            let (c, reply_value) = self.best_reply_in(meter, state, v)?;
            if reply_value == value {
                return Some((v, c));
            }
        }
        None
    }

    fn principal_variation(&self, meter: &mut Meter, state: &TokenState) -> Vec<MoveRecord> {
        let mut line = Vec::new();
        let mut current = state.clone();
        while let Some((v, c)) = self.best_line_step(meter, &current) {
            line.push((v, c));
            current = current.applied(v, c);
        }
        concrete_line(&self.rules, state, &line)
    }
}

/// Concrete colour indices for a line of anonymous moves from `start`.
/// Only meaningful from the empty position, where palettes agree.
fn concrete_line(rules: &Arc<Rules>, start: &TokenState, line: &[(usize, ColorChoice)]) -> Vec<MoveRecord> {
    if start.total_tokens() != 0 {
        return Vec::new();
    }
    let mut game = Game::new(Arc::clone(rules));
    for &(v, c) in line {
        if game.play(v, c).is_err() {
            break;
        }
    }
    game.moves().to_vec()
}

/// `f(w, G)` (or the restricted value) by full minimax.
pub fn exact_value(config: &GameConfig, budget: Budget) -> Result<GameValue, SolverError> {
    let rules = Rules::shared(config.clone());
    let solver = Solver::new(Arc::clone(&rules));
    solver.value(&rules.empty_state(), budget)
}

type StrategyKey = (StateKey, Vec<u64>);

struct SpoilerSearch<'a> {
    rules: &'a Rules,
    meter: Meter,
    memo: HashMap<StrategyKey, u32>,
    best_seen: u32,
}

impl SpoilerSearch<'_> {
    fn search(&mut self, state: &TokenState, alg: &dyn AlgorithmStrategy) -> Result<u32, Stop> {
        let key = (self.rules.plain_key(state), alg.memo_key());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        self.meter.tick()?;
        let used = state.colors_used();
        self.best_seen = self.best_seen.max(used);
        let ceiling = used + capacity(self.rules, state);
        let mut best = used;
        for v in ordered_moves(self.rules, state) {
            let mut next_alg = alg.clone_box();
            let choice = next_alg.respond(self.rules, state, v)?;
            let next = self
                .rules
                .apply(state, v, choice)
                .map_err(|source| SolverError::IllegalMove {
                    strategy: alg.name(),
                    source,
                })?;
            best = best.max(self.search(&next, next_alg.as_ref())?);
            if best >= ceiling {
                break;
            }
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    fn line(&self, state: &TokenState, alg: &dyn AlgorithmStrategy) -> Vec<(usize, ColorChoice)> {
        let mut line = Vec::new();
        let mut state = state.clone();
        let mut alg = alg.clone_box();
        while let Some(&target) = self.memo.get(&(self.rules.plain_key(&state), alg.memo_key())) {
            if target == state.colors_used() {
                break;
            }
            let mut step = None;
            for v in ordered_moves(self.rules, &state) {
                let mut next_alg = alg.clone_box();
                let Ok(choice) = next_alg.respond(self.rules, &state, v) else {
                    break;
                };
                let next = state.applied(v, choice);
                if self.memo.get(&(self.rules.plain_key(&next), next_alg.memo_key())) == Some(&target) {
                    step = Some((v, choice, next, next_alg));
                    break;
                }
            }
            let Some((v, choice, next, next_alg)) = step else { break };
            line.push((v, choice));
            state = next;
            alg = next_alg;
        }
        line
    }
}

/// Most colours any legal Spoiler extracts from `algorithm` (a fresh copy
/// is reset first).
pub fn spoiler_best_response(
    algorithm: &dyn AlgorithmStrategy,
    config: &GameConfig,
    budget: Budget,
) -> Result<GameValue, SolverError> {
    let rules = Rules::shared(config.clone());
    let mut alg = algorithm.clone_box();
    alg.reset();
    let mut search = SpoilerSearch {
        rules: &rules,
        meter: Meter::new(budget),
        memo: HashMap::new(),
        best_seen: 0,
    };
    let root = rules.empty_state();
    match search.search(&root, alg.as_ref()) {
        Ok(value) => {
            let line = search.line(&root, alg.as_ref());
            Ok(GameValue {
                value,
                exact: true,
                states: search.meter.states,
                principal_variation: concrete_line(&rules, &root, &line),
            })
        }
        Err(Stop::Budget) => Ok(GameValue {
            value: search.best_seen,
            exact: false,
            states: search.meter.states,
            principal_variation: Vec::new(),
        }),
        Err(Stop::Failed(e)) => Err(e),
    }
}

struct AlgorithmSearch<'a> {
    rules: &'a Rules,
    meter: Meter,
    memo: HashMap<StrategyKey, u32>,
    best_leaf: u32,
}

impl AlgorithmSearch<'_> {
    fn search(&mut self, state: &TokenState, spoiler: &dyn SpoilerStrategy) -> Result<u32, Stop> {
        let key = (self.rules.plain_key(state), spoiler.memo_key());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        self.meter.tick()?;
        let used = state.colors_used();
        let mut next_spoiler = spoiler.clone_box();
        let value = match next_spoiler.next_move(self.rules, state)? {
            None => {
                self.best_leaf = self.best_leaf.min(used);
                used
            }
            Some(v) => {
                if !self.rules.is_legal_spoiler_move(state, v) {
                    let source = self
                        .rules
                        .apply(state, v, ColorChoice::New)
                        .err()
                        .unwrap_or(GameError::WidthViolation(v));
                    return Err(SolverError::IllegalMove {
                        strategy: spoiler.name(),
                        source,
                    }
                    .into());
                }
                let mut best = u32::MAX;
                for c in ordered_options(self.rules, state, v) {
                    best = best.min(self.search(&state.applied(v, c), next_spoiler.as_ref())?);
                    if best <= used {
                        break;
                    }
                }
                best
            }
        };
        self.memo.insert(key, value);
        Ok(value)
    }

    fn line(&self, state: &TokenState, spoiler: &dyn SpoilerStrategy) -> Vec<(usize, ColorChoice)> {
        let mut line = Vec::new();
        let mut state = state.clone();
        let mut spoiler = spoiler.clone_box();
        while let Some(&target) = self.memo.get(&(self.rules.plain_key(&state), spoiler.memo_key())) {
            let Ok(Some(v)) = spoiler.next_move(self.rules, &state) else {
                break;
            };
            let reply = ordered_options(self.rules, &state, v).into_iter().find(|&c| {
                let next = state.applied(v, c);
                self.memo.get(&(self.rules.plain_key(&next), spoiler.memo_key())) == Some(&target)
            });
            let Some(c) = reply else { break };
            line.push((v, c));
            state = state.applied(v, c);
        }
        line
    }
}

/// Fewest colours any Algorithm can hold `spoiler` to (a fresh copy is
/// reset first).
pub fn algorithm_best_response(
    spoiler: &dyn SpoilerStrategy,
    config: &GameConfig,
    budget: Budget,
) -> Result<GameValue, SolverError> {
    let rules = Rules::shared(config.clone());
    let mut sp = spoiler.clone_box();
    sp.reset();
    let mut search = AlgorithmSearch {
        rules: &rules,
        meter: Meter::new(budget),
        memo: HashMap::new(),
        best_leaf: u32::MAX,
    };
    let root = rules.empty_state();
    match search.search(&root, sp.as_ref()) {
        Ok(value) => {
            let line = search.line(&root, sp.as_ref());
            Ok(GameValue {
                value,
                exact: true,
                states: search.meter.states,
                principal_variation: concrete_line(&rules, &root, &line),
            })
        }
        Err(Stop::Budget) => Ok(GameValue {
            value: search.best_leaf,
            exact: false,
            states: search.meter.states,
            principal_variation: Vec::new(),
        }),
        Err(Stop::Failed(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NamedGraph;
    use crate::strategies::{BipartiteStrategy, FirstFit, ParityPathSpoiler, ScriptedSpoiler};

    fn config(g: NamedGraph, w: u32) -> GameConfig {
        GameConfig::named(g, w).unwrap()
    }

    #[test]
    fn small_exact_values() {
        for (g, w, expected) in [
            (NamedGraph::Path(4), 2, 2),
            (NamedGraph::Complete(1), 3, 3),
            (NamedGraph::Cycle(5), 2, 3),
            (NamedGraph::Complete(3), 3, 3),
        ] {
            let v = exact_value(&config(g, w), Budget::default()).unwrap();
            assert!(v.exact);
            assert_eq!(v.value, expected, "{g} w={w}");
        }
    }

    #[test]
    fn principal_variation_replays() {
        let cfg = config(NamedGraph::Cycle(5), 2);
        let v = exact_value(&cfg, Budget::default()).unwrap();
        let mut game = Game::new(Rules::shared(cfg));
        for m in &v.principal_variation {
            game.play_color(m.vertex, m.color).unwrap();
        }
        assert_eq!(game.colors_used() as u32, v.value);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let v = exact_value(&config(NamedGraph::Cycle(5), 4), Budget::states(10)).unwrap();
        assert!(!v.exact);
        assert!(v.value <= 5);
        let b = spoiler_best_response(&FirstFit::new(), &config(NamedGraph::Cycle(5), 4), Budget::states(10)).unwrap();
        assert!(!b.exact);
    }

    #[test]
    fn best_responses() {
        let c6 = config(NamedGraph::Cycle(6), 3);
        let alg = BipartiteStrategy::for_graph(&c6.graph, 3).unwrap();
        let r = spoiler_best_response(&alg, &c6, Budget::default()).unwrap();
        assert_eq!((r.value, r.exact), (3, true));

        let c5 = config(NamedGraph::Cycle(5), 2);
        let sp = ParityPathSpoiler::for_graph(&c5.graph).unwrap();
        let r = algorithm_best_response(&sp, &c5, Budget::default()).unwrap();
        assert_eq!((r.value, r.exact), (3, true));
        assert!(r.principal_variation.len() >= 4);
    }

    #[test]
    fn illegal_strategy_moves_are_reported() {
        let k2 = config(NamedGraph::Complete(2), 1);
        let sp = ScriptedSpoiler::new(vec![0, 1]);
        assert!(matches!(
            algorithm_best_response(&sp, &k2, Budget::default()),
            Err(SolverError::IllegalMove { .. })
        ));
    }

    #[test]
    fn solver_memo_survives_queries() {
        let rules = Rules::shared(config(NamedGraph::Cycle(5), 2));
        let solver = Solver::new(Arc::clone(&rules));
        let first = solver.value(&rules.empty_state(), Budget::default()).unwrap();
        let second = solver.value(&rules.empty_state(), Budget::default()).unwrap();
        assert_eq!(first.value, second.value);
        assert!(second.states < first.states);
        assert!(solver
            .best_spoiler_move(&rules.empty_state(), Budget::default())
            .unwrap()
            .is_some());
    }
}
