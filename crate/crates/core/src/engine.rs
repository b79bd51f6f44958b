//! The token game itself.
//!
//! Colours are anonymous in [`TokenState`]: a colour is identified only by
//! its support (the set of vertices carrying a token of that colour), and the
//! state keeps a multiset of supports. Two colours with the same support are
//! interchangeable for every future move, so this is the quotient the solver
//! searches over. [`Game`] layers concrete colour indices on top for
//! transcripts and sessions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    automorphisms, bit, maximal_cliques, maximal_independent_sets, members, Graph, NamedGraph, VertexSet,
};

/// Automorphism folding is only attempted on graphs up to this order.
pub const AUTOMORPHISM_FOLDING_LIMIT: usize = 10;
/// At most this many automorphisms are used for folding.
pub const AUTOMORPHISM_CAP: usize = 5040;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("vertex {vertex} does not exist (graph has {n} vertices)")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("a token at vertex {0} would exceed the width")]
    WidthViolation(usize),
    #[error("vertex {0} already holds a token in the restricted model")]
    RestrictedViolation(usize),
    #[error("illegal colour for a token at vertex {vertex}: {reason}")]
    ColoringViolation { vertex: usize, reason: String },
    #[error("width must be at least 1")]
    ZeroWidth,
    #[error("token count at vertex {0} overflows")]
    CountOverflow(usize),
}

/// Where a host graph came from; named graphs serialize by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSource {
    Named(NamedGraph),
    Explicit(Graph),
}

impl GraphSource {
    pub fn build(&self) -> Graph {
        match self {
            GraphSource::Named(n) => n.build(),
            GraphSource::Explicit(g) => g.clone(),
        }
    }

    pub fn named(&self) -> Option<NamedGraph> {
        match self {
            GraphSource::Named(n) => Some(*n),
            GraphSource::Explicit(_) => None,
        }
    }
}

impl Serialize for GraphSource {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GraphSource::Named(n) => serializer.collect_str(n),
            GraphSource::Explicit(g) => g.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for GraphSource {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Graph(Graph),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Name(s) => s.parse().map(GraphSource::Named).map_err(serde::de::Error::custom),
            Raw::Graph(g) => Ok(GraphSource::Explicit(g)),
        }
    }
}

/// Host graph, width and model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConfigJson", into = "ConfigJson")]
pub struct GameConfig {
    pub source: GraphSource,
    pub graph: Graph,
    pub width: u32,
    pub restricted: bool,
}

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    graph: GraphSource,
    width: u32,
    #[serde(default)]
    restricted: bool,
}

impl TryFrom<ConfigJson> for GameConfig {
    type Error = GameError;

    fn try_from(c: ConfigJson) -> Result<Self, Self::Error> {
        GameConfig::new(c.graph, c.width, c.restricted)
    }
}

impl From<GameConfig> for ConfigJson {
    fn from(c: GameConfig) -> Self {
        ConfigJson {
            graph: c.source,
            width: c.width,
            restricted: c.restricted,
        }
    }
}

impl GameConfig {
    pub fn new(source: GraphSource, width: u32, restricted: bool) -> Result<Self, GameError> {
        if width == 0 {
            return Err(GameError::ZeroWidth);
        }
        Ok(GameConfig {
            graph: source.build(),
            source,
            width,
            restricted,
        })
    }

    pub fn named(graph: NamedGraph, width: u32) -> Result<Self, GameError> {
        Self::new(GraphSource::Named(graph), width, false)
    }

    pub fn explicit(graph: Graph, width: u32) -> Result<Self, GameError> {
        Self::new(GraphSource::Explicit(graph), width, false)
    }

    pub fn restricted(mut self, restricted: bool) -> Self {
        self.restricted = restricted;
        self
    }

    pub fn with_width(&self, width: u32) -> Result<Self, GameError> {
        Self::new(self.source.clone(), width, self.restricted)
    }
}

/// How Algorithm colours a token: a fresh colour, or an existing colour
/// identified by its current support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColorChoice {
    New,
    Extend(VertexSet),
}

impl fmt::Display for ColorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColorChoice::New => f.write_str("new"),
            ColorChoice::Extend(s) => write!(f, "extend {:?}", members(*s).collect::<Vec<_>>()),
        }
    }
}

/// A colour class: its support and how many distinct colours share it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorClass {
    pub support: VertexSet,
    pub multiplicity: u32,
}

/// The position after some number of moves, with anonymous colours.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenState {
    counts: Vec<u8>,
    /// Sorted by support; multiplicities are positive.
    classes: Vec<ColorClass>,
    colors_used: u32,
}

impl TokenState {
    pub fn empty(n: usize) -> Self {
        TokenState {
            counts: vec![0; n],
            classes: Vec::new(),
            colors_used: 0,
        }
    }

    /// Rebuilds a state from its class multiset; counts are derived.
    pub fn from_classes(n: usize, classes: impl IntoIterator<Item = (VertexSet, u32)>) -> Self {
        let mut merged: BTreeMap<VertexSet, u32> = BTreeMap::new();
        for (support, m) in classes {
            if m > 0 && support != 0 {
                *merged.entry(support).or_default() += m;
            }
        }
        let mut counts = vec![0u8; n];
        for (&support, &m) in &merged {
            for v in members(support) {
                counts[v] = counts[v].saturating_add(m.min(255) as u8);
            }
        }
        TokenState {
            counts,
            colors_used: merged.values().sum(),
            classes: merged
                .into_iter()
                .map(|(support, multiplicity)| ColorClass { support, multiplicity })
                .collect(),
        }
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn count(&self, v: usize) -> u32 {
        self.counts[v] as u32
    }

    pub fn classes(&self) -> &[ColorClass] {
        &self.classes
    }

    pub fn colors_used(&self) -> u32 {
        self.colors_used
    }

    pub fn total_tokens(&self) -> u32 {
        self.counts.iter().map(|&c| c as u32).sum()
    }

    pub fn multiplicity(&self, support: VertexSet) -> u32 {
        self.classes
            .binary_search_by_key(&support, |c| c.support)
            .map(|i| self.classes[i].multiplicity)
            .unwrap_or(0)
    }

    /// Number of colours whose support contains all of `required` and
    /// none of `excluded`.
    pub fn colors_matching(&self, required: VertexSet, excluded: VertexSet) -> u32 {
        self.classes
            .iter()
            .filter(|c| c.support & required == required && c.support & excluded == 0)
            .map(|c| c.multiplicity)
            .sum()
    }

    fn add_class(&mut self, support: VertexSet, m: u32) {
        match self.classes.binary_search_by_key(&support, |c| c.support) {
            Ok(i) => self.classes[i].multiplicity += m,
            Err(i) => self.classes.insert(
                i,
                ColorClass {
                    support,
                    multiplicity: m,
                },
            ),
        }
    }

    fn remove_one(&mut self, support: VertexSet) -> bool {
        match self.classes.binary_search_by_key(&support, |c| c.support) {
            Ok(i) => {
                self.classes[i].multiplicity -= 1;
                if self.classes[i].multiplicity == 0 {
                    self.classes.remove(i);
                }
                true
            }
            Err(_) => false,
        }
    }

    /// Applies a move without any legality check beyond the support being
    /// present; used by searches that only generate legal moves.
    pub(crate) fn applied(&self, v: usize, choice: ColorChoice) -> TokenState {
        let mut next = self.clone();
        next.counts[v] += 1;
        match choice {
            ColorChoice::New => {
                next.add_class(bit(v), 1);
                next.colors_used += 1;
            }
            ColorChoice::Extend(support) => {
                let removed = next.remove_one(support);
                debug_assert!(removed, "extended support must be present");
                next.add_class(support | bit(v), 1);
            }
        }
        next
    }

    /// Support multiset with supports mapped through `perm`, sorted.
    pub fn permuted_classes(&self, perm: &[usize]) -> Vec<ColorClass> {
        let mut out: Vec<ColorClass> = self
            .classes
            .iter()
            .map(|c| ColorClass {
                support: members(c.support).fold(0, |acc, v| acc | bit(perm[v])),
                multiplicity: c.multiplicity,
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Wire form of a state: counts, class multiset, colours used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStateJson {
    pub counts: Vec<u32>,
    pub classes: Vec<ClassJson>,
    pub colors_used: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassJson {
    pub support: Vec<usize>,
    pub multiplicity: u32,
}

impl From<&TokenState> for TokenStateJson {
    fn from(s: &TokenState) -> Self {
        TokenStateJson {
            counts: s.counts.iter().map(|&c| c as u32).collect(),
            classes: s
                .classes
                .iter()
                .map(|c| ClassJson {
                    support: members(c.support).collect(),
                    multiplicity: c.multiplicity,
                })
                .collect(),
            colors_used: s.colors_used,
        }
    }
}

/// Opaque memo key: the sorted support multiset, optionally minimised over
/// host automorphisms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<ColorClass>);

/// Exact blow-up chromatic numbers with a shared, concurrently fillable memo.
///
/// The value for a counts vector is the least number of independent sets of
/// the host graph (with repetition) covering every vertex `v` at least
/// `counts[v]` times; since independent sets are closed under subsets this
/// equals covering exactly. Branch and bound: the least vertex with demand is
/// covered by some independent set, which may be taken maximal within the
/// remaining demand.
pub struct CoverTable {
    graph: Graph,
    independent: Vec<VertexSet>,
    cliques: Vec<VertexSet>,
    alpha: u32,
    memo: DashMap<Vec<u8>, u32>,
}

impl CoverTable {
    pub fn new(graph: &Graph) -> Self {
        let independent = maximal_independent_sets(graph);
        let alpha = independent.iter().map(|s| s.count_ones()).max().unwrap_or(1).max(1);
        CoverTable {
            cliques: maximal_cliques(graph),
            independent,
            alpha,
            graph: graph.clone(),
            memo: DashMap::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Largest token count on a clique of the host.
    pub fn clique_bound(&self, counts: &[u8]) -> u32 {
        self.cliques
            .iter()
            .map(|&q| members(q).map(|v| counts[v] as u32).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn lower_bound(&self, counts: &[u8]) -> u32 {
        let total: u32 = counts.iter().map(|&c| c as u32).sum();
        self.clique_bound(counts).max(total.div_ceil(self.alpha))
    }

    pub fn chromatic(&self, counts: &[u8]) -> u32 {
        if let Some(v) = self.memo.get(counts) {
            return *v;
        }
        let value = self.solve(counts);
        self.memo.insert(counts.to_vec(), value);
        value
    }

    fn solve(&self, counts: &[u8]) -> u32 {
        let Some(pivot) = counts.iter().position(|&c| c > 0) else {
            return 0;
        };
        let demand: VertexSet = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .fold(0, |acc, (v, _)| acc | bit(v));
        let mut candidates: Vec<VertexSet> = self
            .independent
            .iter()
            .filter(|&&s| s & bit(pivot) != 0)
            .map(|&s| s & demand)
            .collect();
        candidates.sort_unstable_by_key(|&s| (std::cmp::Reverse(s.count_ones()), s));
        candidates.dedup();
        let candidates: Vec<VertexSet> = candidates
            .iter()
            .copied()
            .enumerate()
            .filter(|&(i, s)| !candidates[..i].iter().any(|&t| t & s == s))
            .map(|(_, s)| s)
            .collect();

        let floor = self.lower_bound(counts);
        let mut best = u32::MAX;
        let mut reduced = counts.to_vec();
        for s in candidates {
            for v in members(s) {
                reduced[v] -= 1;
            }
            let value = 1 + self.chromatic(&reduced);
            for v in members(s) {
                reduced[v] += 1;
            }
            best = best.min(value);
            if best <= floor {
                break;
            }
        }
        best
    }
}

/// Blow-up chromatic number of `graph` weighted by `counts`, uncached.
pub fn multichromatic_number(graph: &Graph, counts: &[u8]) -> u32 {
    CoverTable::new(graph).chromatic(counts)
}

/// A configuration plus everything derived from it that the move rules and
/// searches need: the chromatic memo, legal-move memo and automorphisms.
pub struct Rules {
    config: GameConfig,
    cover: CoverTable,
    legal: DashMap<Vec<u8>, VertexSet>,
    automorphisms: Vec<Vec<usize>>,
}

impl fmt::Debug for Rules {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rules")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl Rules {
    pub fn new(config: GameConfig) -> Self {
        let automorphisms = if config.graph.n() <= AUTOMORPHISM_FOLDING_LIMIT {
            automorphisms(&config.graph, AUTOMORPHISM_CAP)
        } else {
            vec![(0..config.graph.n()).collect()]
        };
        Rules {
            cover: CoverTable::new(&config.graph),
            config,
            legal: DashMap::new(),
            automorphisms,
        }
    }

    pub fn shared(config: GameConfig) -> Arc<Self> {
        Arc::new(Self::new(config))
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn graph(&self) -> &Graph {
        &self.config.graph
    }

    pub fn width(&self) -> u32 {
        self.config.width
    }

    pub fn n(&self) -> usize {
        self.config.graph.n()
    }

    pub fn empty_state(&self) -> TokenState {
        TokenState::empty(self.n())
    }

    pub fn automorphisms(&self) -> &[Vec<usize>] {
        &self.automorphisms
    }

    pub fn multichromatic(&self, counts: &[u8]) -> u32 {
        self.cover.chromatic(counts)
    }

    /// Vertices where a new token keeps the blow-up chromatic number within
    /// the width (and, in the restricted model, that carry no token yet).
    pub fn legal_spoiler_moves(&self, state: &TokenState) -> VertexSet {
        let counts = state.counts();
        let unrestricted = match self.legal.get(counts) {
            Some(m) => *m,
            None => {
                let mut bumped = counts.to_vec();
                let mut mask = 0;
                for v in 0..counts.len() {
                    if bumped[v] == u8::MAX {
                        continue;
                    }
                    bumped[v] += 1;
                    if self.cover.clique_bound(&bumped) <= self.config.width
                        && self.cover.chromatic(&bumped) <= self.config.width
                    {
                        mask |= bit(v);
                    }
                    bumped[v] -= 1;
                }
                self.legal.insert(counts.to_vec(), mask);
                mask
            }
        };
        if self.config.restricted {
            members(unrestricted)
                .filter(|&v| counts[v] == 0)
                .fold(0, |acc, v| acc | bit(v))
        } else {
            unrestricted
        }
    }

    pub fn is_legal_spoiler_move(&self, state: &TokenState, v: usize) -> bool {
        v < self.n() && self.legal_spoiler_moves(state) & bit(v) != 0
    }

    /// `New` followed by every class that can absorb a token at `v`,
    /// ascending by support.
    pub fn algorithm_options(&self, state: &TokenState, v: usize) -> Vec<ColorChoice> {
        let blocked = self.graph().neighbors(v) | bit(v);
        std::iter::once(ColorChoice::New)
            .chain(
                state
                    .classes()
                    .iter()
                    .filter(|c| c.support & blocked == 0)
                    .map(|c| ColorChoice::Extend(c.support)),
            )
            .collect()
    }

    pub fn is_legal_choice(&self, state: &TokenState, v: usize, choice: ColorChoice) -> bool {
        match choice {
            ColorChoice::New => true,
            ColorChoice::Extend(s) => state.multiplicity(s) > 0 && s & (self.graph().neighbors(v) | bit(v)) == 0,
        }
    }

    fn check_spoiler_move(&self, state: &TokenState, v: usize) -> Result<(), GameError> {
        if v >= self.n() {
            return Err(GameError::InvalidVertex { vertex: v, n: self.n() });
        }
        if self.config.restricted && state.count(v) > 0 {
            return Err(GameError::RestrictedViolation(v));
        }
        if state.count(v) == u8::MAX as u32 {
            return Err(GameError::CountOverflow(v));
        }
        if self.legal_spoiler_moves(state) & bit(v) == 0 {
            return Err(GameError::WidthViolation(v));
        }
        Ok(())
    }

    /// Plays a token at `v` coloured by `choice`, checking both players' rules.
    pub fn apply(&self, state: &TokenState, v: usize, choice: ColorChoice) -> Result<TokenState, GameError> {
        self.check_spoiler_move(state, v)?;
        if !self.is_legal_choice(state, v, choice) {
            return Err(GameError::ColoringViolation {
                vertex: v,
                reason: format!("{choice} is not available"),
            });
        }
        Ok(state.applied(v, choice))
    }

    /// Memo key equal for states that differ only by class order or by a
    /// host automorphism.
    pub fn canonical_key(&self, state: &TokenState) -> StateKey {
        let mut best = state.classes().to_vec();
        for perm in self.automorphisms.iter().skip(1) {
            let candidate = state.permuted_classes(perm);
            if candidate < best {
                best = candidate;
            }
        }
        StateKey(best)
    }

    /// Memo key up to class order only.
    pub fn plain_key(&self, state: &TokenState) -> StateKey {
        StateKey(state.classes().to_vec())
    }
}

/// One recorded move with its concrete colour index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub vertex: usize,
    pub color: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub moves: Vec<MoveRecord>,
}

impl Transcript {
    /// Replays every move from the empty position, checking legality.
    pub fn replay(&self) -> Result<Game, GameError> {
        let mut game = Game::new(Rules::shared(self.config.clone()));
        for m in &self.moves {
            game.play_color(m.vertex, m.color)?;
        }
        Ok(game)
    }

    pub fn colors_used(&self) -> usize {
        self.moves.iter().map(|m| m.color + 1).max().unwrap_or(0)
    }
}

/// A game in progress with concrete colour indices, allocated densely in
/// first-use order.
#[derive(Clone)]
pub struct Game {
    rules: Arc<Rules>,
    state: TokenState,
    palette: Vec<VertexSet>,
    moves: Vec<MoveRecord>,
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("state", &self.state)
            .field("moves", &self.moves)
            .finish_non_exhaustive()
    }
}

impl Game {
    pub fn new(rules: Arc<Rules>) -> Self {
        Game {
            state: rules.empty_state(),
            rules,
            palette: Vec::new(),
            moves: Vec::new(),
        }
    }

    pub fn rules(&self) -> &Arc<Rules> {
        &self.rules
    }

    pub fn state(&self) -> &TokenState {
        &self.state
    }

    pub fn moves(&self) -> &[MoveRecord] {
        &self.moves
    }

    pub fn colors_used(&self) -> usize {
        self.palette.len()
    }

    /// Support of every concrete colour.
    pub fn palette(&self) -> &[VertexSet] {
        &self.palette
    }

    pub fn legal_moves(&self) -> Vec<usize> {
        members(self.rules.legal_spoiler_moves(&self.state)).collect()
    }

    /// Colours on each vertex, in the order the tokens were played.
    pub fn vertex_colors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.rules.n()];
        for m in &self.moves {
            out[m.vertex].push(m.color);
        }
        out
    }

    /// Plays `v` with an anonymous choice; an extension takes the lowest
    /// colour index with that support. Returns the colour index.
    pub fn play(&mut self, v: usize, choice: ColorChoice) -> Result<usize, GameError> {
        let next = self.rules.apply(&self.state, v, choice)?;
        let color = match choice {
            ColorChoice::New => {
                self.palette.push(bit(v));
                self.palette.len() - 1
            }
            ColorChoice::Extend(s) => {
                let c = self
                    .palette
                    .iter()
                    .position(|&p| p == s)
                    .expect("state and palette agree on supports");
                self.palette[c] |= bit(v);
                c
            }
        };
        self.state = next;
        self.moves.push(MoveRecord { vertex: v, color });
        Ok(color)
    }

    /// Plays `v` with a concrete colour index; `colors_used()` means new.
    pub fn play_color(&mut self, v: usize, color: usize) -> Result<usize, GameError> {
        let choice = match color.cmp(&self.palette.len()) {
            std::cmp::Ordering::Equal => ColorChoice::New,
            std::cmp::Ordering::Less => ColorChoice::Extend(self.palette[color]),
            std::cmp::Ordering::Greater => {
                return Err(GameError::ColoringViolation {
                    vertex: v,
                    reason: format!("colour {color} skips unused colour {}", self.palette.len()),
                })
            }
        };
        let next = self.rules.apply(&self.state, v, choice)?;
        if color == self.palette.len() {
            self.palette.push(bit(v));
        } else {
            self.palette[color] |= bit(v);
        }
        self.state = next;
        self.moves.push(MoveRecord { vertex: v, color });
        Ok(color)
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            config: self.rules.config().clone(),
            moves: self.moves.clone(),
        }
    }
}
