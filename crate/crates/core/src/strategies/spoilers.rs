use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Rules, TokenState};
use crate::graph::{bit, find_isomorphism, is_bipartite, members, set_of, Graph, NamedGraph, VertexSet};

use super::{SpoilerStrategy, StrategyError};

fn is_induced_path(g: &Graph, path: &[usize]) -> bool {
    let distinct = set_of(path).count_ones() as usize == path.len();
    distinct
        && path.iter().all(|&v| v < g.n())
        && (0..path.len()).all(|i| (i + 1..path.len()).all(|j| g.has_edge(path[i], path[j]) == (j == i + 1)))
}

fn bipartite_on(g: &Graph, vertices: VertexSet) -> bool {
    is_bipartite(&g.induced(&members(vertices).collect::<Vec<_>>())).is_some()
}

/// Checks that `v` can be played and returns it.
fn legal(rules: &Rules, state: &TokenState, v: usize) -> Result<Option<usize>, StrategyError> {
    if rules.is_legal_spoiler_move(state, v) {
        Ok(Some(v))
    } else {
        Err(StrategyError::Invariant(format!("planned move at {v} is not legal")))
    }
}

/// Shortest induced `uv`-paths of odd and of even length, for the
/// lexicographically least non-adjacent pair `u < v` that has both.
pub fn find_parity_paths(g: &Graph) -> Option<(Vec<usize>, Vec<usize>)> {
    fn grow(g: &Graph, path: &mut Vec<usize>, target: usize, found: &mut [Option<Vec<usize>>; 2]) {
        let last = *path.last().expect("path is nonempty");
        if last == target {
            let parity = (path.len() - 1) % 2;
            let better = found[parity].as_ref().is_none_or(|p| p.len() > path.len());
            if better {
                found[parity] = Some(path.clone());
            }
            return;
        }
        let on_path = set_of(path);
        let earlier = on_path & !bit(last);
        for next in members(g.neighbors(last) & !on_path) {
            // Induced: the new vertex sees only the current end.
            if g.neighbors(next) & earlier != 0 {
                continue;
            }
            path.push(next);
            grow(g, path, target, found);
            path.pop();
        }
    }
    for u in 0..g.n() {
        for v in u + 1..g.n() {
            if g.has_edge(u, v) {
                continue;
            }
            let mut found = [None, None];
            grow(g, &mut vec![u], v, &mut found);
            if let [Some(even), Some(odd)] = found {
                return Some((odd, even));
            }
        }
    }
    None
}

/// Width-2 Spoiler: tokens at `u` and `v`, then the interior of the odd
/// path if they share a colour and of the even path otherwise. The tokens
/// always induce a path, so the width stays 2.
#[derive(Debug, Clone)]
pub struct ParityPathSpoiler {
    odd: Vec<usize>,
    even: Vec<usize>,
}

impl ParityPathSpoiler {
    pub fn new(g: &Graph, odd: Vec<usize>, even: Vec<usize>) -> Result<Self, StrategyError> {
        let bad = |m: &str| Err(StrategyError::Validation(m.to_string()));
        if !is_induced_path(g, &odd) || !is_induced_path(g, &even) {
            return bad("paths must be induced paths of the host");
        }
        if odd.len() < 3 || even.len() < 3 {
            return bad("endpoints must be non-adjacent");
        }
        let ends = |p: &[usize]| (p[0], p[p.len() - 1]);
        if ends(&odd) != ends(&even) {
            return bad("paths must share their endpoints in the same order");
        }
        if (odd.len() - 1) % 2 != 1 || !(even.len() - 1).is_multiple_of(2) {
            return bad("first path must have odd length and the second even length");
        }
        Ok(ParityPathSpoiler { odd, even })
    }

    pub fn for_graph(g: &Graph) -> Result<Self, StrategyError> {
        let (odd, even) = find_parity_paths(g)
            .ok_or_else(|| StrategyError::Validation("no pair with induced paths of both parities".into()))?;
        Self::new(g, odd, even)
    }
}

impl SpoilerStrategy for ParityPathSpoiler {
    fn name(&self) -> &'static str {
        "parity-path"
    }

    fn reset(&mut self) {}

    fn next_move(&mut self, rules: &Rules, state: &TokenState) -> Result<Option<usize>, StrategyError> {
        if rules.width() < 2 {
            return Err(StrategyError::Config(
                "parity-path Spoiler needs width at least 2".into(),
            ));
        }
        let (u, v) = (self.odd[0], self.odd[self.odd.len() - 1]);
        if state.count(u) == 0 {
            return legal(rules, state, u);
        }
        if state.count(v) == 0 {
            return legal(rules, state, v);
        }
        let matched = state.colors_matching(bit(u) | bit(v), 0) > 0;
        let path = if matched { &self.odd } else { &self.even };
        match path[1..path.len() - 1].iter().find(|&&x| state.count(x) == 0) {
            Some(&x) => legal(rules, state, x),
            None => Ok(None),
        }
    }

    fn clone_box(&self) -> Box<dyn SpoilerStrategy> {
        Box::new(self.clone())
    }
}

/// Width-2 Spoiler for the bull, with `v1..v5` along the spanning path and
/// `v3` the apex: play `v1`, `v5`; on a shared colour play `v2`, `v4`;
/// otherwise play `v3` and then whichever of `v2`, `v4` sees two colours.
#[derive(Debug, Clone)]
pub struct BullSpoiler {
    v: [usize; 5],
}

impl BullSpoiler {
    pub fn new(g: &Graph) -> Result<Self, StrategyError> {
        let image =
            find_isomorphism(g, &NamedGraph::Bull.build()).ok_or(StrategyError::WrongHost { expected: "bull" })?;
        Ok(BullSpoiler {
            v: [image[0], image[1], image[2], image[3], image[4]],
        })
    }
}

impl SpoilerStrategy for BullSpoiler {
    fn name(&self) -> &'static str {
        "bull"
    }

    fn reset(&mut self) {}

    fn next_move(&mut self, rules: &Rules, state: &TokenState) -> Result<Option<usize>, StrategyError> {
        if rules.width() < 2 {
            return Err(StrategyError::Config("bull Spoiler needs width at least 2".into()));
        }
        let [v1, v2, v3, v4, v5] = self.v;
        let played = |x: usize| state.count(x) > 0;
        let next = if !played(v1) {
            Some(v1)
        } else if !played(v5) {
            Some(v5)
        } else if state.colors_matching(bit(v1) | bit(v5), 0) > 0 {
            [v2, v4].into_iter().find(|&x| !played(x))
        } else if !played(v3) {
            Some(v3)
        } else if played(v2) || played(v4) {
            None
        } else if state.colors_matching(bit(v1) | bit(v3), 0) == 0 {
            Some(v2)
        } else {
            Some(v4)
        };
        match next {
            Some(x) => legal(rules, state, x),
            None => Ok(None),
        }
    }

    fn clone_box(&self) -> Box<dyn SpoilerStrategy> {
        Box::new(self.clone())
    }
}

/// `U = u_1..u_t`, the path `u_1 x y u_t`, and common neighbours `z_i` of
/// consecutive `u_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralSpoilerPlan {
    pub u: Vec<usize>,
    pub x: usize,
    pub y: usize,
    pub z: Vec<usize>,
}

impl GeneralSpoilerPlan {
    pub fn validate(&self, g: &Graph) -> Result<(), StrategyError> {
        let bad = |m: String| Err(StrategyError::Validation(m));
        let t = self.u.len();
        if t < 2 {
            return bad("U needs at least two vertices".into());
        }
        for &v in self.u.iter().chain([&self.x, &self.y]).chain(&self.z) {
            g.check_vertex(v)?;
        }
        let uset = set_of(&self.u);
        if uset.count_ones() as usize != t {
            return bad("U has repeated vertices".into());
        }
        let (u1, ut) = (self.u[0], self.u[t - 1]);
        let walk = [u1, self.x, self.y, ut];
        if set_of(&walk).count_ones() != 4 || !walk.windows(2).all(|p| g.has_edge(p[0], p[1])) {
            return bad(format!("{u1} {} {} {ut} is not a path", self.x, self.y));
        }
        if !bipartite_on(g, set_of(&walk)) {
            return bad("the x-y path does not induce a bipartite graph".into());
        }
        if self.z.len() != t - 1 {
            return bad(format!("need {} common neighbours, got {}", t - 1, self.z.len()));
        }
        for (i, &z) in self.z.iter().enumerate() {
            if uset & bit(z) != 0 || !g.has_edge(z, self.u[i]) || !g.has_edge(z, self.u[i + 1]) {
                return bad(format!("z{} = {z} is not a common neighbour outside U", i + 1));
            }
            if !bipartite_on(g, uset | bit(z)) {
                return bad(format!("U with z{} is not bipartite", i + 1));
            }
        }
        Ok(())
    }

    /// The valid plan with the fewest `U` vertices, lexicographically least
    /// among those.
    pub fn find(g: &Graph) -> Option<Self> {
        fn extend(g: &Graph, u: &mut Vec<usize>, t: usize) -> Option<GeneralSpoilerPlan> {
            if u.len() == t {
                let (u1, ut) = (u[0], u[t - 1]);
                for x in members(g.neighbors(u1)) {
                    for y in members(g.neighbors(x) & g.neighbors(ut)) {
                        let mut z = Vec::with_capacity(t - 1);
                        for i in 0..t - 1 {
                            let common = g.neighbors(u[i]) & g.neighbors(u[i + 1]) & !set_of(u);
                            {
                                let c = members(common).find(|&c| bipartite_on(g, set_of(u) | bit(c)))?;
                                z.push(c)
                            }
                        }
                        let plan = GeneralSpoilerPlan { u: u.clone(), x, y, z };
                        if plan.validate(g).is_ok() {
                            return Some(plan);
                        }
                    }
                }
                return None;
            }
            for next in 0..g.n() {
                if u.contains(&next) {
                    continue;
                }
                if let Some(&last) = u.last() {
                    if g.neighbors(last) & g.neighbors(next) & !set_of(u) & !bit(next) == 0 {
                        continue;
                    }
                }
                u.push(next);
                let found = extend(g, u, t);
                u.pop();
                if found.is_some() {
                    return found;
                }
            }
            None
        }
        (2..=g.n()).find_map(|t| extend(g, &mut Vec::new(), t))
    }
}

/// `k` tokens at `u_1` and `u_t`; if at least `k/t` colours are on both,
/// `k` tokens at `x` and at `y`; otherwise `k` tokens at every other `u_i`
/// and then at `z_i` for the first `i` maximising `|S_i - S_{i+1}|`.
#[derive(Debug, Clone)]
pub struct GeneralSpoiler {
    plan: GeneralSpoilerPlan,
    k: u32,
}

impl GeneralSpoiler {
    /// Requires an even width; `k = w/2`.
    pub fn new(plan: GeneralSpoilerPlan, g: &Graph, width: u32) -> Result<Self, StrategyError> {
        if !width.is_multiple_of(2) {
            return Err(StrategyError::Config(format!(
                "general Spoiler needs even width, got {width}"
            )));
        }
        Self::floor(plan, g, width)
    }

    /// Plays as if the width were `2 floor(w/2)`.
    pub fn floor(plan: GeneralSpoilerPlan, g: &Graph, width: u32) -> Result<Self, StrategyError> {
        plan.validate(g)?;
        if width < 2 {
            return Err(StrategyError::Config("general Spoiler needs width at least 2".into()));
        }
        Ok(GeneralSpoiler { plan, k: width / 2 })
    }

    pub fn plan(&self) -> &GeneralSpoilerPlan {
        &self.plan
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

impl SpoilerStrategy for GeneralSpoiler {
    fn name(&self) -> &'static str {
        "general"
    }

    fn reset(&mut self) {}

    fn next_move(&mut self, rules: &Rules, state: &TokenState) -> Result<Option<usize>, StrategyError> {
        let (k, u) = (self.k, &self.plan.u);
        let t = u.len();
        let short = |v: usize| state.count(v) < k;
        let fill = |order: &[usize]| order.iter().copied().find(|&v| short(v));
        if let Some(v) = fill(&[u[0], u[t - 1]]) {
            return legal(rules, state, v);
        }
        let shared = state.colors_matching(bit(u[0]) | bit(u[t - 1]), 0);
        let next = if shared * t as u32 >= k {
            fill(&[self.plan.x, self.plan.y])
        } else if let Some(v) = fill(&u[1..t - 1]) {
            Some(v)
        } else {
            let mut best = 0;
            let mut best_gap = 0;
            for i in 0..t - 1 {
                let gap = state.colors_matching(bit(u[i]), bit(u[i + 1]));
                if gap > best_gap {
                    (best, best_gap) = (i, gap);
                }
            }
            fill(&[self.plan.z[best]])
        };
        match next {
            Some(v) => legal(rules, state, v),
            None => Ok(None),
        }
    }

    fn clone_box(&self) -> Box<dyn SpoilerStrategy> {
        Box::new(self.clone())
    }
}

/// Uniformly random legal moves until none remain (or the move cap).
#[derive(Debug, Clone)]
pub struct RandomSpoiler {
    seed: u64,
    max_moves: Option<usize>,
    played: usize,
    rng: ChaCha8Rng,
}

impl RandomSpoiler {
    pub fn new(seed: u64) -> Self {
        RandomSpoiler {
            seed,
            max_moves: None,
            played: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_max_moves(mut self, cap: usize) -> Self {
        self.max_moves = Some(cap);
        self
    }
}

impl SpoilerStrategy for RandomSpoiler {
    fn name(&self) -> &'static str {
        "random"
    }

    fn reset(&mut self) {
        self.played = 0;
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }

    fn next_move(&mut self, rules: &Rules, state: &TokenState) -> Result<Option<usize>, StrategyError> {
        if self.max_moves.is_some_and(|cap| self.played >= cap) {
            return Ok(None);
        }
        let legal: Vec<usize> = members(rules.legal_spoiler_moves(state)).collect();
        if legal.is_empty() {
            return Ok(None);
        }
        self.played += 1;
        Ok(Some(legal[self.rng.random_range(0..legal.len())]))
    }

    fn memo_key(&self) -> Vec<u64> {
        vec![
            self.seed,
            self.rng.get_word_pos() as u64,
            (self.rng.get_word_pos() >> 64) as u64,
        ]
    }

    fn clone_box(&self) -> Box<dyn SpoilerStrategy> {
        Box::new(self.clone())
    }
}

/// Plays a fixed list of vertices, then stops. Moves are not checked here;
/// the engine rejects illegal ones.
#[derive(Debug, Clone)]
pub struct ScriptedSpoiler {
    moves: Vec<usize>,
    next: usize,
}

impl ScriptedSpoiler {
    pub fn new(moves: Vec<usize>) -> Self {
        ScriptedSpoiler { moves, next: 0 }
    }
}

impl SpoilerStrategy for ScriptedSpoiler {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn reset(&mut self) {
        self.next = 0;
    }

    fn next_move(&mut self, _rules: &Rules, _state: &TokenState) -> Result<Option<usize>, StrategyError> {
        let m = self.moves.get(self.next).copied();
        self.next += 1;
        Ok(m)
    }

    fn memo_key(&self) -> Vec<u64> {
        vec![self.next as u64]
    }

    fn clone_box(&self) -> Box<dyn SpoilerStrategy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Game, GameConfig};
    use crate::strategies::{AlgorithmStrategy, BipartiteStrategy, FirstFit};

    /// Plays `spoiler` against `alg`, asserting the width after every move.
    fn duel(spoiler: &mut dyn SpoilerStrategy, alg: &mut dyn AlgorithmStrategy, config: GameConfig) -> Game {
        let rules = Rules::shared(config);
        let mut game = Game::new(rules.clone());
        while let Some(v) = spoiler.next_move(&rules, game.state()).unwrap() {
            let choice = alg.respond(&rules, game.state(), v).unwrap();
            game.play(v, choice).unwrap();
            assert!(rules.multichromatic(game.state().counts()) <= rules.width());
        }
        game
    }

    #[test]
    fn parity_paths_on_obstructions() {
        let (odd, even) = find_parity_paths(&NamedGraph::Cycle(5).build()).unwrap();
        assert_eq!((odd, even), (vec![0, 4, 3, 2], vec![0, 1, 2]));
        for g in [NamedGraph::Cycle(7), NamedGraph::C5Plus] {
            let (odd, even) = find_parity_paths(&g.build()).unwrap();
            assert_eq!(odd.len() % 2, 0, "{g}");
            assert_eq!(even.len() % 2, 1, "{g}");
        }
        assert!(find_parity_paths(&NamedGraph::Cycle(6).build()).is_none());
        assert!(find_parity_paths(&NamedGraph::Bull.build()).is_none());
    }

    #[test]
    fn parity_spoiler_validation() {
        let g = NamedGraph::Cycle(5).build();
        assert!(ParityPathSpoiler::new(&g, vec![0, 1], vec![0, 4, 3, 2, 1]).is_err());
        assert!(ParityPathSpoiler::new(&g, vec![0, 1, 2], vec![0, 4, 3, 2]).is_err());
        assert!(ParityPathSpoiler::new(&g, vec![0, 4, 3, 2], vec![0, 1, 2]).is_ok());
        assert!(ParityPathSpoiler::new(&g, vec![0, 4, 3, 1], vec![0, 1, 2]).is_err());
    }

    #[test]
    fn parity_spoiler_beats_first_fit() {
        for g in [NamedGraph::Cycle(5), NamedGraph::Cycle(7), NamedGraph::C5Plus] {
            let mut s = ParityPathSpoiler::for_graph(&g.build()).unwrap();
            let game = duel(&mut s, &mut FirstFit::new(), GameConfig::named(g, 2).unwrap());
            assert_eq!(game.colors_used(), 3, "{g}");
        }
    }

    #[test]
    fn bull_spoiler_plays_at_most_four_tokens() {
        let g = NamedGraph::Bull.build();
        let mut s = BullSpoiler::new(&g).unwrap();
        let game = duel(
            &mut s,
            &mut FirstFit::new(),
            GameConfig::named(NamedGraph::Bull, 2).unwrap(),
        );
        assert_eq!(game.colors_used(), 3);
        assert!(game.moves().len() <= 4);
        assert!(BullSpoiler::new(&NamedGraph::Cycle(5).build()).is_err());
    }

    #[test]
    fn plans_for_the_corollaries() {
        let c5 = NamedGraph::Cycle(5).build();
        let plan = GeneralSpoilerPlan::find(&c5).unwrap();
        assert_eq!(
            plan,
            GeneralSpoilerPlan {
                u: vec![0, 2],
                x: 4,
                y: 3,
                z: vec![1]
            }
        );

        let c5p = NamedGraph::C5Plus.build();
        GeneralSpoilerPlan {
            u: vec![1, 3],
            x: 0,
            y: 4,
            z: vec![2],
        }
        .validate(&c5p)
        .unwrap();

        let bull = NamedGraph::Bull.build();
        GeneralSpoilerPlan {
            u: vec![0, 2, 4],
            x: 1,
            y: 3,
            z: vec![1, 3],
        }
        .validate(&bull)
        .unwrap();

        let bad = GeneralSpoilerPlan {
            u: vec![0, 2],
            x: 1,
            y: 3,
            z: vec![1],
        };
        assert!(bad.validate(&c5).is_err());
        assert!(GeneralSpoiler::new(plan.clone(), &c5, 3).is_err());
        assert_eq!(GeneralSpoiler::floor(plan, &c5, 5).unwrap().k(), 2);
    }

    #[test]
    fn general_spoiler_plays_legally() {
        let c5 = NamedGraph::Cycle(5).build();
        let plan = GeneralSpoilerPlan::find(&c5).unwrap();
        for w in [2, 4, 6] {
            let mut s = GeneralSpoiler::new(plan.clone(), &c5, w).unwrap();
            let game = duel(
                &mut s,
                &mut FirstFit::new(),
                GameConfig::named(NamedGraph::Cycle(5), w).unwrap(),
            );
            assert!(game.colors_used() as u32 >= w + w / 4, "w={w}");
        }
    }

    #[test]
    fn random_spoiler_is_reproducible() {
        let config = GameConfig::named(NamedGraph::Cycle(6), 3).unwrap();
        let run = |seed| {
            let mut alg = BipartiteStrategy::for_graph(&config.graph, 3).unwrap();
            duel(&mut RandomSpoiler::new(seed), &mut alg, config.clone()).transcript()
        };
        assert_eq!(run(4), run(4));
        assert_ne!(run(4), run(5));
    }
}
