//! The colouring game on the real line: points closer than 1 conflict, and
//! every open unit interval may receive at most `w` points. Coordinates are
//! exact rationals so the open-interval boundary cases are decided exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("{strategy} played {x}, which overfills an open unit interval")]
    IllegalPoint { strategy: &'static str, x: Point },
    #[error("{strategy} gave colour {color} to {x}, already used within distance 1")]
    ImproperColor {
        strategy: &'static str,
        x: Point,
        color: usize,
    },
    #[error("invalid rational {0:?}")]
    Parse(String),
    #[error("width must be at least 1")]
    ZeroWidth,
}

/// A rational coordinate, written `p/q` on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Rational);

impl Point {
    pub fn new(numer: i64, denom: i64) -> Self {
        Point(Rational::new(numer, denom))
    }

    pub fn int(v: i64) -> Self {
        Point(Rational::from_integer(v))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Point {
    type Err = LineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LineError::Parse(s.to_string());
        let s = s.trim();
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let p: i64 = p.parse().map_err(|_| err())?;
        let q: i64 = q.parse().map_err(|_| err())?;
        if q == 0 {
            return Err(err());
        }
        Ok(Point::new(p, q))
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Played points in sorted order with their colours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineState {
    width: u32,
    points: Vec<(Point, usize)>,
}

impl LineState {
    pub fn new(width: u32) -> Result<Self, LineError> {
        if width == 0 {
            return Err(LineError::ZeroWidth);
        }
        Ok(LineState {
            width,
            points: Vec::new(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn points(&self) -> &[(Point, usize)] {
        &self.points
    }

    pub fn colors_used(&self) -> usize {
        self.points.iter().map(|&(_, c)| c + 1).max().unwrap_or(0)
    }

    /// Colours on points at distance less than 1 from `x`.
    pub fn colors_near(&self, x: Point) -> Vec<usize> {
        let one = Rational::one();
        let mut near: Vec<usize> = self
            .points
            .iter()
            .filter(|(p, _)| (p.0 - x.0).abs() < one)
            .map(|&(_, c)| c)
            .collect();
        near.sort_unstable();
        near.dedup();
        near
    }

    fn insert(&mut self, x: Point, color: usize) {
        let at = self.points.partition_point(|&(p, _)| p <= x);
        self.points.insert(at, (x, color));
    }
}

/// Whether `x` can be added with every run of points spanning less than 1
/// still holding at most `w` points.
pub fn line_legal(state: &LineState, x: Point) -> bool {
    let one = Rational::one();
    let mut xs: Vec<Rational> = state.points.iter().map(|(p, _)| p.0).collect();
    let at = xs.partition_point(|&p| p <= x.0);
    xs.insert(at, x.0);
    // Only windows containing the new point can have grown.
    let lo = xs.partition_point(|&p| p <= x.0 - one);
    let mut j = lo;
    for i in lo..=at {
        while j < xs.len() && xs[j] - xs[i] < one {
            j += 1;
        }
        if j > at && j - i > state.width as usize {
            return false;
        }
    }
    true
}

/// Smallest colour absent from every point within open distance 1.
pub fn greedy_line(state: &LineState, x: Point) -> usize {
    let near = state.colors_near(x);
    (0..)
        .find(|c| near.binary_search(c).is_err())
        .expect("some colour is free")
}

pub trait LineAlgorithm: Send {
    fn name(&self) -> &'static str;
    fn reset(&mut self);
    fn respond(&mut self, state: &LineState, x: Point) -> usize;
}

pub trait LineSpoiler: Send {
    fn name(&self) -> &'static str;
    fn reset(&mut self);
    fn next_move(&mut self, state: &LineState) -> Option<Point>;
}

#[derive(Debug, Clone, Default)]
pub struct Greedy;

impl LineAlgorithm for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn reset(&mut self) {}

    fn respond(&mut self, state: &LineState, x: Point) -> usize {
        greedy_line(state, x)
    }
}

/// A free colour chosen uniformly among the used colours and one new one.
#[derive(Debug, Clone)]
pub struct RandomFit {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomFit {
    pub fn new(seed: u64) -> Self {
        RandomFit {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl LineAlgorithm for RandomFit {
    fn name(&self) -> &'static str {
        "random-fit"
    }

    fn reset(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }

    fn respond(&mut self, state: &LineState, x: Point) -> usize {
        let near = state.colors_near(x);
        let free: Vec<usize> = (0..=state.colors_used())
            .filter(|c| near.binary_search(c).is_err())
            .collect();
        free[self.rng.random_range(0..free.len())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Anchor,
    Separate,
    Flood,
    Done,
}

/// `k = floor(w/2)` points at 0; then points in `(1, 2)`, each at the
/// midpoint of the gap between the newly coloured points (below) and the
/// points reusing a stage-one colour (above), until `k` new colours appear;
/// then `w - k` points at `y - 1` for `y` inside the final gap.
#[derive(Debug, Clone)]
pub struct ThreeStage {
    k: usize,
    width: usize,
    stage: Stage,
    played: usize,
    old: Vec<usize>,
    new: Vec<usize>,
    lo: Rational,
    hi: Rational,
    last: Option<Point>,
    separating_plays: usize,
}

impl ThreeStage {
    pub fn new(width: u32) -> Self {
        let mut s = ThreeStage {
            k: (width / 2) as usize,
            width: width as usize,
            stage: Stage::Anchor,
            played: 0,
            old: Vec::new(),
            new: Vec::new(),
            lo: Rational::one(),
            hi: Rational::from_integer(2),
            last: None,
            separating_plays: 0,
        };
        s.reset();
        s
    }

    /// Points played in the second stage so far.
    pub fn separating_plays(&self) -> usize {
        self.separating_plays
    }

    fn midpoint(&self) -> Point {
        Point((self.lo + self.hi) / Rational::from_integer(2))
    }

    fn color_of(state: &LineState, x: Point) -> Option<usize> {
        state.points.iter().rev().find(|&&(p, _)| p == x).map(|&(_, c)| c)
    }
}

impl LineSpoiler for ThreeStage {
    fn name(&self) -> &'static str {
        "three-stage"
    }

    fn reset(&mut self) {
        self.stage = if self.k == 0 { Stage::Done } else { Stage::Anchor };
        self.played = 0;
        self.old.clear();
        self.new.clear();
        self.lo = Rational::one();
        self.hi = Rational::from_integer(2);
        self.last = None;
        self.separating_plays = 0;
    }

    fn next_move(&mut self, state: &LineState) -> Option<Point> {
        loop {
            match self.stage {
                Stage::Anchor => {
                    if self.played < self.k {
                        self.played += 1;
                        return Some(Point(Rational::zero()));
                    }
                    self.old = state.points.iter().map(|&(_, c)| c).collect();
                    self.stage = Stage::Separate;
                }
                Stage::Separate => {
                    if let Some(x) = self.last.take() {
                        let c = Self::color_of(state, x).expect("the last point was coloured");
                        if self.old.contains(&c) {
                            self.hi = x.0;
                        } else {
                            self.new.push(c);
                            self.lo = x.0;
                        }
                    }
                    if self.new.len() < self.k {
                        let x = self.midpoint();
                        self.last = Some(x);
                        self.separating_plays += 1;
                        return Some(x);
                    }
                    self.played = 0;
                    self.stage = Stage::Flood;
                }
                Stage::Flood => {
                    if self.played < self.width - self.k {
                        self.played += 1;
                        return Some(Point(self.midpoint().0 - Rational::one()));
                    }
                    self.stage = Stage::Done;
                }
                Stage::Done => return None,
            }
        }
    }
}

/// Uniformly random legal points on the grid `{i / d : 0 <= i < span * d}`.
#[derive(Debug, Clone)]
pub struct RandomLine {
    seed: u64,
    span: i64,
    denom: i64,
    rng: ChaCha8Rng,
}

impl RandomLine {
    pub fn new(seed: u64) -> Self {
        Self::with_grid(seed, 6, 8)
    }

    pub fn with_grid(seed: u64, span: i64, denom: i64) -> Self {
        RandomLine {
            seed,
            span,
            denom,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl LineSpoiler for RandomLine {
    fn name(&self) -> &'static str {
        "random"
    }

    fn reset(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }

    fn next_move(&mut self, state: &LineState) -> Option<Point> {
        // Rejection sampling first; the full scan only when the grid is
        // nearly saturated.
        for _ in 0..32 {
            let x = Point::new(self.rng.random_range(0..self.span * self.denom), self.denom);
            if line_legal(state, x) {
                return Some(x);
            }
        }
        let legal: Vec<Point> = (0..self.span * self.denom)
            .map(|i| Point::new(i, self.denom))
            .filter(|&x| line_legal(state, x))
            .collect();
        if legal.is_empty() {
            return None;
        }
        Some(legal[self.rng.random_range(0..legal.len())])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineMove {
    pub x: Point,
    pub color: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineTranscript {
    pub width: u32,
    pub moves: Vec<LineMove>,
}

impl LineTranscript {
    pub fn colors_used(&self) -> usize {
        self.moves.iter().map(|m| m.color + 1).max().unwrap_or(0)
    }
}

/// Alternates the two players until Spoiler stops or `max_moves` points
/// are down, checking both the interval rule and the colouring each step.
pub fn run_line_game(
    algorithm: &mut dyn LineAlgorithm,
    spoiler: &mut dyn LineSpoiler,
    width: u32,
    max_moves: usize,
) -> Result<LineTranscript, LineError> {
    algorithm.reset();
    spoiler.reset();
    let mut state = LineState::new(width)?;
    let mut moves = Vec::new();
    while moves.len() < max_moves {
        let Some(x) = spoiler.next_move(&state) else { break };
        if !line_legal(&state, x) {
            return Err(LineError::IllegalPoint {
                strategy: spoiler.name(),
                x,
            });
        }
        let color = algorithm.respond(&state, x);
        if state.colors_near(x).contains(&color) {
            return Err(LineError::ImproperColor {
                strategy: algorithm.name(),
                x,
                color,
            });
        }
        state.insert(x, color);
        moves.push(LineMove { x, color });
    }
    Ok(LineTranscript { width, moves })
}
