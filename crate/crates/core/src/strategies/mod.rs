//! Algorithm and Spoiler strategies behind two small object-safe traits.
//!
//! Strategies see the anonymous [`TokenState`]; colours that share a
//! support are interchangeable, so an Algorithm answers with a
//! [`ColorChoice`] and list-based strategies keep their own slot table
//! mapping list positions to supports.

mod bipartite;
mod clone_lift;
mod first_fit;
mod fractional;
mod p5sq;
mod spoilers;

pub use bipartite::BipartiteStrategy;
pub use clone_lift::{lift_through_reduction, CloneLift, CloneMap};
pub use first_fit::FirstFit;
pub use fractional::{canonical_pq_coloring, proper_coloring, ColorListPlan, FractionalColoring, FractionalStrategy};
pub use p5sq::{p5sq_invariants_hold, P5SqLabels, P5SqStrategy};
pub use spoilers::{
    find_parity_paths, BullSpoiler, GeneralSpoiler, GeneralSpoilerPlan, ParityPathSpoiler, RandomSpoiler,
    ScriptedSpoiler,
};

use std::sync::Arc;

use thiserror::Error;

use crate::engine::{ColorChoice, Game, GameConfig, GameError, Rules, TokenState, Transcript};
use crate::graph::GraphError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid strategy input: {0}")]
    Validation(String),
    #[error("strategy requires host graph {expected}")]
    WrongHost { expected: &'static str },
    #[error("strategy invariant broken: {0}")]
    Invariant(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Algorithm side: colours the token Spoiler just placed.
pub trait AlgorithmStrategy: Send {
    fn name(&self) -> &'static str;

    /// Forgets the history of the current game.
    fn reset(&mut self);

    /// Choice for a token at `v`; `state` is the position before the token.
    fn respond(&mut self, rules: &Rules, state: &TokenState, v: usize) -> Result<ColorChoice, StrategyError>;

    /// Fingerprint of internal state not visible in the token state. Searches
    /// memoize on it together with the state key.
    fn memo_key(&self) -> Vec<u64> {
        Vec::new()
    }

    fn clone_box(&self) -> Box<dyn AlgorithmStrategy>;
}

impl Clone for Box<dyn AlgorithmStrategy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Spoiler side: the next vertex to play on, or `None` to stop.
pub trait SpoilerStrategy: Send {
    fn name(&self) -> &'static str;

    fn reset(&mut self);

    fn next_move(&mut self, rules: &Rules, state: &TokenState) -> Result<Option<usize>, StrategyError>;

    fn memo_key(&self) -> Vec<u64> {
        Vec::new()
    }

    fn clone_box(&self) -> Box<dyn SpoilerStrategy>;
}

impl Clone for Box<dyn SpoilerStrategy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Colour slots with fixed positions in some preference list, each mapped
/// to the support of the colour it stands for (empty while unused).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SlotTable {
    supports: Vec<u64>,
}

impl SlotTable {
    pub(crate) fn new(len: usize) -> Self {
        SlotTable { supports: vec![0; len] }
    }

    pub(crate) fn supports(&self) -> &[u64] {
        &self.supports
    }

    pub(crate) fn clear(&mut self) {
        self.supports.iter_mut().for_each(|s| *s = 0);
    }

    /// Takes `slot` for a token at `v`, returning the engine-level choice.
    pub(crate) fn take(&mut self, rules: &Rules, slot: usize, v: usize) -> Result<ColorChoice, StrategyError> {
        let support = self.supports[slot];
        let blocked = rules.graph().neighbors(v) | crate::graph::bit(v);
        if support & blocked != 0 {
            return Err(StrategyError::Invariant(format!(
                "slot {slot} already appears on or next to vertex {v}"
            )));
        }
        self.supports[slot] |= crate::graph::bit(v);
        Ok(if support == 0 {
            ColorChoice::New
        } else {
            ColorChoice::Extend(support)
        })
    }

    /// First slot in `order` whose colour is not yet on `v`.
    pub(crate) fn first_free(&self, order: impl IntoIterator<Item = usize>, v: usize) -> Option<usize> {
        order
            .into_iter()
            .find(|&s| self.supports[s] & crate::graph::bit(v) == 0)
    }
}

/// Plays `spoiler` against `algorithm` from the empty position until Spoiler
/// stops or no legal move is left.
pub fn run_duel(
    algorithm: &mut dyn AlgorithmStrategy,
    spoiler: &mut dyn SpoilerStrategy,
    config: GameConfig,
) -> Result<Transcript, StrategyError> {
    algorithm.reset();
    spoiler.reset();
    let rules = Rules::shared(config);
    let mut game = Game::new(Arc::clone(&rules));
    while rules.legal_spoiler_moves(game.state()) != 0 {
        let Some(v) = spoiler.next_move(&rules, game.state())? else {
            break;
        };
        rules.apply(game.state(), v, ColorChoice::New)?;
        let choice = algorithm.respond(&rules, game.state(), v)?;
        game.play(v, choice)?;
    }
    Ok(game.transcript())
}

#[cfg(test)]
pub(crate) mod testing {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::members;

    /// Plays `moves` against `alg`, returning the concrete colours.
    pub fn play_sequence(alg: &mut dyn AlgorithmStrategy, config: GameConfig, moves: &[usize]) -> Vec<usize> {
        let mut game = Game::new(Rules::shared(config));
        let rules = Arc::clone(game.rules());
        moves
            .iter()
            .map(|&v| {
                let choice = alg.respond(&rules, game.state(), v).unwrap();
                game.play(v, choice).unwrap()
            })
            .collect()
    }

    /// Random legal games; returns the most colours seen.
    pub fn fuzz_max_colors(alg: &mut dyn AlgorithmStrategy, config: GameConfig, games: usize, seed: u64) -> usize {
        let rules = Rules::shared(config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0;
        for _ in 0..games {
            alg.reset();
            let mut game = Game::new(Arc::clone(&rules));
            loop {
                let legal: Vec<usize> = members(rules.legal_spoiler_moves(game.state())).collect();
                if legal.is_empty() {
                    break;
                }
                let v = legal[rng.random_range(0..legal.len())];
                let choice = alg.respond(&rules, game.state(), v).unwrap();
                game.play(v, choice).unwrap();
            }
            worst = worst.max(game.colors_used());
        }
        worst
    }
}
