use crate::engine::{ColorChoice, Rules, TokenState};
use crate::graph::{bit, find_isomorphism, Graph};

use super::{AlgorithmStrategy, StrategyError};

/// Host vertices of `v0..v4`, where the complement of the host is the
/// isolated vertex `v0` plus the path `v1 v2 v3 v4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct P5SqLabels {
    pub v: [usize; 5],
}

impl P5SqLabels {
    pub fn find(graph: &Graph) -> Result<Self, StrategyError> {
        let reference = Graph::from_edges(5, [(1, 2), (2, 3), (3, 4)])?.complement();
        let image = find_isomorphism(graph, &reference).ok_or(StrategyError::WrongHost { expected: "p5sq" })?;
        Ok(P5SqLabels {
            v: [image[0], image[1], image[2], image[3], image[4]],
        })
    }

    fn label_of(&self, host: usize) -> Option<usize> {
        self.v.iter().position(|&x| x == host)
    }

    /// Colours living only on `v_i`.
    pub fn y(&self, state: &TokenState, i: usize) -> u32 {
        state.multiplicity(bit(self.v[i]))
    }
}

/// `min{y1,y2} = min{y3,y4} = 0` and `4 min{y2,y3} <= w + 1`.
pub fn p5sq_invariants_hold(labels: &P5SqLabels, state: &TokenState, width: u32) -> bool {
    let y = |i| labels.y(state, i);
    y(1).min(y(2)) == 0 && y(3).min(y(4)) == 0 && 4 * y(2).min(y(3)) <= width + 1
}

/// `v0` always gets a new colour. The pairs `v1v2` and `v3v4` are greedy: a
/// token first joins a colour living only on its mate. Otherwise it gets a
/// new colour, unless that would push `min{y2,y3}` above `(w+1)/4`; then it
/// joins a colour living only on the other middle vertex.
#[derive(Debug, Clone)]
pub struct P5SqStrategy {
    labels: P5SqLabels,
}

impl P5SqStrategy {
    pub fn new(graph: &Graph) -> Result<Self, StrategyError> {
        Ok(P5SqStrategy {
            labels: P5SqLabels::find(graph)?,
        })
    }

    pub fn labels(&self) -> &P5SqLabels {
        &self.labels
    }
}

impl AlgorithmStrategy for P5SqStrategy {
    fn name(&self) -> &'static str {
        "p5sq"
    }

    fn reset(&mut self) {}

    fn respond(&mut self, rules: &Rules, state: &TokenState, v: usize) -> Result<ColorChoice, StrategyError> {
        let i = self
            .labels
            .label_of(v)
            .ok_or_else(|| StrategyError::Config(format!("vertex {v} is not on the host")))?;
        if i == 0 {
            return Ok(ColorChoice::New);
        }
        let mate = [0, 2, 1, 4, 3][i];
        if self.labels.y(state, mate) > 0 {
            return Ok(ColorChoice::Extend(bit(self.labels.v[mate])));
        }
        if i == 2 || i == 3 {
            let j = 5 - i;
            let after = (self.labels.y(state, i) + 1).min(self.labels.y(state, j));
            if 4 * after > rules.width() + 1 {
                return Ok(ColorChoice::Extend(bit(self.labels.v[j])));
            }
        }
        Ok(ColorChoice::New)
    }

    fn clone_box(&self) -> Box<dyn AlgorithmStrategy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::engine::{Game, GameConfig};
    use crate::graph::{members, NamedGraph};
    use crate::strategies::testing::play_sequence;

    #[test]
    fn labels_on_the_canonical_host() {
        let g = NamedGraph::P5Sq.build();
        let l = P5SqLabels::find(&g).unwrap();
        assert_eq!(l.v[0], 2);
        assert_eq!(g.degree(l.v[0]), 4);
        let c = g.complement();
        for (a, b) in [(1, 2), (2, 3), (3, 4)] {
            assert!(c.has_edge(l.v[a], l.v[b]));
        }
        assert!(matches!(
            P5SqStrategy::new(&NamedGraph::Cycle(5).build()),
            Err(StrategyError::WrongHost { .. })
        ));
    }

    #[test]
    fn middle_pair_trace() {
        let g = NamedGraph::P5Sq.build();
        let mut s = P5SqStrategy::new(&g).unwrap();
        let l = *s.labels();
        let moves = [l.v[2], l.v[3], l.v[2], l.v[3]];
        let colors = play_sequence(&mut s, GameConfig::named(NamedGraph::P5Sq, 4).unwrap(), &moves);
        assert_eq!(colors, vec![0, 1, 2, 0]);
    }

    #[test]
    fn invariants_and_ceiling_under_random_play() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for w in 1..=6u32 {
            let rules = Rules::shared(GameConfig::named(NamedGraph::P5Sq, w).unwrap());
            let mut s = P5SqStrategy::new(rules.graph()).unwrap();
            let ceiling = (5 * w + 2) / 4;
            for _ in 0..300 {
                let mut game = Game::new(Arc::clone(&rules));
                loop {
                    let legal: Vec<usize> = members(rules.legal_spoiler_moves(game.state())).collect();
                    if legal.is_empty() {
                        break;
                    }
                    let v = legal[rng.random_range(0..legal.len())];
                    let choice = s.respond(&rules, game.state(), v).unwrap();
                    game.play(v, choice).unwrap();
                    assert!(p5sq_invariants_hold(s.labels(), game.state(), w));
                }
                assert!(game.colors_used() as u32 <= ceiling, "w={w}");
            }
        }
    }
}
