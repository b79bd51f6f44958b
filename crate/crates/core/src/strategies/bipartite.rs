use crate::engine::{ColorChoice, Rules, TokenState};
use crate::graph::{bit, set_of, Graph, VertexSet};

use super::{AlgorithmStrategy, SlotTable, StrategyError};

/// Palette of `w` colours; tokens on the left side take the first colour
/// not yet on their vertex, tokens on the right side take the last. Each
/// vertex therefore carries a prefix (left) or suffix (right) of the
/// palette, and an edge can only see a repeated colour once it holds more
/// than `w` tokens.
#[derive(Debug, Clone)]
pub struct BipartiteStrategy {
    left: VertexSet,
    right: VertexSet,
    slots: SlotTable,
}

impl BipartiteStrategy {
    pub fn new(graph: &Graph, left: &[usize], right: &[usize], width: u32) -> Result<Self, StrategyError> {
        let (l, r) = (set_of(left), set_of(right));
        if l & r != 0 {
            return Err(StrategyError::Validation("bipartition parts overlap".into()));
        }
        for &v in left.iter().chain(right) {
            graph.check_vertex(v)?;
        }
        for (u, v) in graph.edges() {
            let crossing = (l & bit(u) != 0 && r & bit(v) != 0) || (r & bit(u) != 0 && l & bit(v) != 0);
            if !crossing && (l | r) & bit(u) != 0 && (l | r) & bit(v) != 0 {
                return Err(StrategyError::Validation(format!("edge {u}-{v} lies inside one part")));
            }
        }
        Ok(BipartiteStrategy {
            left: l,
            right: r,
            slots: SlotTable::new(width as usize),
        })
    }

    /// Uses the bipartition found by BFS.
    pub fn for_graph(graph: &Graph, width: u32) -> Result<Self, StrategyError> {
        let (left, right) = crate::graph::is_bipartite(graph)
            .ok_or_else(|| StrategyError::Validation("graph is not bipartite".into()))?;
        Self::new(graph, &left, &right, width)
    }
}

impl AlgorithmStrategy for BipartiteStrategy {
    fn name(&self) -> &'static str {
        "bipartite"
    }

    fn reset(&mut self) {
        self.slots.clear();
    }

    fn respond(&mut self, rules: &Rules, _state: &TokenState, v: usize) -> Result<ColorChoice, StrategyError> {
        let w = self.slots.supports().len();
        let slot = if self.left & bit(v) != 0 {
            self.slots.first_free(0..w, v)
        } else if self.right & bit(v) != 0 {
            self.slots.first_free((0..w).rev(), v)
        } else {
            return Err(StrategyError::Config(format!("vertex {v} is in neither part")));
        };
        let slot = slot.ok_or_else(|| StrategyError::Invariant(format!("vertex {v} holds more than {w} tokens")))?;
        self.slots.take(rules, slot, v)
    }

    fn memo_key(&self) -> Vec<u64> {
        self.slots.supports().to_vec()
    }

    fn clone_box(&self) -> Box<dyn AlgorithmStrategy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GameConfig;
    use crate::graph::NamedGraph;
    use crate::strategies::testing::{fuzz_max_colors, play_sequence};

    #[test]
    fn prefix_rule_on_an_edge() {
        let g = NamedGraph::Complete(2).build();
        let mut s = BipartiteStrategy::new(&g, &[0], &[1], 2).unwrap();
        let colors = play_sequence(&mut s, GameConfig::named(NamedGraph::Complete(2), 2).unwrap(), &[0, 0]);
        assert_eq!(colors, vec![0, 1]);
    }

    #[test]
    fn path_trace() {
        // Parts {v1, v3} and {v2, v4}; palette order decides the reuse.
        let g = NamedGraph::Path(4).build();
        let mut s = BipartiteStrategy::new(&g, &[0, 2], &[1, 3], 2).unwrap();
        let colors = play_sequence(
            &mut s,
            GameConfig::named(NamedGraph::Path(4), 2).unwrap(),
            &[0, 1, 3, 2],
        );
        assert_eq!(colors, vec![0, 1, 1, 0]);
    }

    #[test]
    fn rejects_bad_bipartitions() {
        let g = NamedGraph::Path(3).build();
        assert!(BipartiteStrategy::new(&g, &[0, 1], &[2], 2).is_err());
        assert!(BipartiteStrategy::new(&g, &[0, 2], &[1, 2], 2).is_err());
        assert!(BipartiteStrategy::for_graph(&NamedGraph::Cycle(5).build(), 2).is_err());
        let mut s = BipartiteStrategy::new(&g, &[0], &[1], 2).unwrap();
        let rules = Rules::new(GameConfig::named(NamedGraph::Path(3), 2).unwrap());
        assert!(matches!(
            s.respond(&rules, &rules.empty_state(), 2),
            Err(StrategyError::Config(_))
        ));
    }

    #[test]
    fn random_play_never_exceeds_width() {
        for (g, w) in [
            (NamedGraph::Cycle(6), 3),
            (NamedGraph::Path(5), 4),
            (NamedGraph::Cycle(4), 2),
        ] {
            let mut s = BipartiteStrategy::for_graph(&g.build(), w).unwrap();
            let worst = fuzz_max_colors(&mut s, GameConfig::named(g, w).unwrap(), 300, 11);
            assert!(worst <= w as usize, "{g} at width {w}: {worst}");
        }
    }
}
