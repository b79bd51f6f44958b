use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{ColorChoice, GameConfig, Rules, TokenState};
use crate::graph::{bit, members, Graph, VertexSet};
use crate::perfection::twin_reduce;

use super::{AlgorithmStrategy, StrategyError};

/// How a cloned graph projects onto its base: `to_base[v]` is the base
/// vertex simulating `v`, and `original`/`clone` are the twin pair (ids in
/// the cloned graph) that both project to the same base vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneMap {
    pub to_base: Vec<usize>,
    pub original: usize,
    pub clone: usize,
}

impl CloneMap {
    /// The map for `clone_vertex(base, u, _)`: new vertex `n` projects to `u`.
    pub fn appended(base_n: usize, u: usize) -> Self {
        let mut to_base: Vec<usize> = (0..base_n).collect();
        to_base.push(u);
        CloneMap {
            to_base,
            original: u,
            clone: base_n,
        }
    }

    pub fn validate(&self, base: &Graph, cloned: &Graph) -> Result<(), StrategyError> {
        let bad = |m: &str| Err(StrategyError::Validation(m.to_string()));
        if cloned.n() != base.n() + 1 || self.to_base.len() != cloned.n() {
            return bad("cloned graph must have exactly one vertex more than the base");
        }
        if self.original == self.clone || self.original >= cloned.n() || self.clone >= cloned.n() {
            return bad("twin pair is out of range");
        }
        if self.to_base[self.original] != self.to_base[self.clone] {
            return bad("twin pair must project to one base vertex");
        }
        let mut hit = vec![false; base.n()];
        for (v, &b) in self.to_base.iter().enumerate() {
            if b >= base.n() {
                return bad("projection leaves the base graph");
            }
            if v != self.clone {
                if hit[b] {
                    return bad("projection merges vertices outside the twin pair");
                }
                hit[b] = true;
            }
        }
        for a in 0..cloned.n() {
            for b in a + 1..cloned.n() {
                let (ba, bb) = (self.to_base[a], self.to_base[b]);
                if ba != bb && cloned.has_edge(a, b) != base.has_edge(ba, bb) {
                    return bad("projection does not preserve adjacency");
                }
            }
        }
        Ok(())
    }

    pub fn adjacent(&self, cloned: &Graph) -> bool {
        cloned.has_edge(self.original, self.clone)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LiftedColor {
    real: VertexSet,
    sim: VertexSet,
}

/// Runs `inner` on a simulated game on the base graph. For an adjacent
/// clone every token at the twin pair is forwarded to the base vertex. For
/// a non-adjacent clone only tokens that raise the larger of the two counts
/// are forwarded; the others reuse a colour already on the sibling and not
/// yet on the played vertex. The simulation is always unrestricted.
#[derive(Clone)]
pub struct CloneLift {
    inner: Box<dyn AlgorithmStrategy>,
    base_rules: Arc<Rules>,
    map: CloneMap,
    adjacent: bool,
    sim: TokenState,
    colors: Vec<LiftedColor>,
}

impl std::fmt::Debug for CloneLift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CloneLift")
            .field("inner", &self.inner.name())
            .field("map", &self.map)
            .finish_non_exhaustive()
    }
}

impl CloneLift {
    pub fn new(
        inner: Box<dyn AlgorithmStrategy>,
        base: &Graph,
        cloned: &Graph,
        map: CloneMap,
        width: u32,
    ) -> Result<Self, StrategyError> {
        map.validate(base, cloned)?;
        let base_rules = Rules::shared(GameConfig::explicit(base.clone(), width)?);
        Ok(CloneLift {
            inner,
            adjacent: map.adjacent(cloned),
            sim: base_rules.empty_state(),
            base_rules,
            map,
            colors: Vec::new(),
        })
    }

    /// The simulated position on the base graph.
    pub fn simulation(&self) -> &TokenState {
        &self.sim
    }

    fn project(&self, set: VertexSet) -> VertexSet {
        members(set).fold(0, |acc, v| acc | bit(self.map.to_base[v]))
    }
}

impl AlgorithmStrategy for CloneLift {
    fn name(&self) -> &'static str {
        "clone-lift"
    }

    fn reset(&mut self) {
        self.inner.reset();
        self.sim = self.base_rules.empty_state();
        self.colors.clear();
    }

    fn respond(&mut self, _rules: &Rules, state: &TokenState, v: usize) -> Result<ColorChoice, StrategyError> {
        if v >= self.map.to_base.len() {
            return Err(StrategyError::Config(format!("vertex {v} is not on the cloned graph")));
        }
        let in_pair = v == self.map.original || v == self.map.clone;
        if in_pair && !self.adjacent {
            let sibling = if v == self.map.original {
                self.map.clone
            } else {
                self.map.original
            };
            if state.count(v) < state.count(sibling) {
                let i = self
                    .colors
                    .iter()
                    .position(|c| c.real & bit(sibling) != 0 && c.real & bit(v) == 0)
                    .ok_or_else(|| StrategyError::Invariant("no sibling colour to reuse".into()))?;
                let before = self.colors[i].real;
                self.colors[i].real |= bit(v);
                return Ok(ColorChoice::Extend(before));
            }
        }

        let b = self.map.to_base[v];
        let choice = self.inner.respond(&self.base_rules, &self.sim, b)?;
        self.sim = self
            .base_rules
            .apply(&self.sim, b, choice)
            .map_err(|e| StrategyError::Invariant(format!("simulated game broke: {e}")))?;
        Ok(match choice {
            ColorChoice::New => {
                self.colors.push(LiftedColor {
                    real: bit(v),
                    sim: bit(b),
                });
                ColorChoice::New
            }
            ColorChoice::Extend(support) => {
                let i = self
                    .colors
                    .iter()
                    .position(|c| c.sim == support)
                    .ok_or_else(|| StrategyError::Invariant("simulated colour has no real counterpart".into()))?;
                let before = self.colors[i];
                debug_assert_eq!(self.project(before.real), before.sim);
                self.colors[i] = LiftedColor {
                    real: before.real | bit(v),
                    sim: before.sim | bit(b),
                };
                ColorChoice::Extend(before.real)
            }
        })
    }

    fn memo_key(&self) -> Vec<u64> {
        let mut key = self.inner.memo_key();
        key.push(u64::MAX);
        key.extend(self.colors.iter().flat_map(|c| [c.real, c.sim]));
        key
    }

    fn clone_box(&self) -> Box<dyn AlgorithmStrategy> {
        Box::new(self.clone())
    }
}

/// Lifts a strategy for the twin-free core of `graph` back to `graph`,
/// one clone step per recorded twin deletion. Returns the lifted strategy
/// and the core it expects.
pub fn lift_through_reduction(
    graph: &Graph,
    width: u32,
    core_strategy: impl FnOnce(&Graph) -> Result<Box<dyn AlgorithmStrategy>, StrategyError>,
) -> Result<Box<dyn AlgorithmStrategy>, StrategyError> {
    let reduction = twin_reduce(graph);
    // Vertex sets alive before each deletion, then the core.
    let mut alive: Vec<Vec<usize>> = Vec::with_capacity(reduction.trace.len() + 1);
    let mut current: Vec<usize> = (0..graph.n()).collect();
    for step in &reduction.trace {
        alive.push(current.clone());
        current.retain(|&x| x != step.removed);
    }
    debug_assert_eq!(current, reduction.core_vertices);
    let mut strategy = core_strategy(&reduction.core)?;
    let mut base_ids = current;
    let mut base = reduction.core.clone();
    for (step, ids) in reduction.trace.iter().zip(&alive).rev() {
        let cloned = graph.induced(ids);
        let index_in = |set: &[usize], x: usize| set.iter().position(|&y| y == x).expect("vertex is alive");
        let to_base: Vec<usize> = ids
            .iter()
            .map(|&x| index_in(&base_ids, if x == step.removed { step.twin } else { x }))
            .collect();
        let map = CloneMap {
            to_base,
            original: index_in(ids, step.twin),
            clone: index_in(ids, step.removed),
        };
        strategy = Box::new(CloneLift::new(strategy, &base, &cloned, map, width)?);
        base = cloned;
        base_ids = ids.clone();
    }
    Ok(strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clone_vertex, NamedGraph};
    use crate::strategies::testing::{fuzz_max_colors, play_sequence};
    use crate::strategies::{BipartiteStrategy, FirstFit};

    fn k1() -> Graph {
        Graph::empty(1).unwrap()
    }

    #[test]
    fn adjacent_clone_of_k1() {
        let cloned = clone_vertex(&k1(), 0, true).unwrap();
        let mut s = CloneLift::new(Box::new(FirstFit::new()), &k1(), &cloned, CloneMap::appended(1, 0), 2).unwrap();
        let colors = play_sequence(&mut s, GameConfig::explicit(cloned, 2).unwrap(), &[0, 1]);
        assert_eq!(colors, vec![0, 1]);
        assert_eq!(s.simulation().count(0), 2);
    }

    #[test]
    fn non_adjacent_clone_of_k1() {
        let cloned = clone_vertex(&k1(), 0, false).unwrap();
        let mut s = CloneLift::new(Box::new(FirstFit::new()), &k1(), &cloned, CloneMap::appended(1, 0), 2).unwrap();
        let colors = play_sequence(&mut s, GameConfig::explicit(cloned, 2).unwrap(), &[0, 1]);
        assert_eq!(colors, vec![0, 0]);
        assert_eq!(s.simulation().count(0), 1);
    }

    #[test]
    fn map_validation() {
        let base = NamedGraph::Path(3).build();
        let cloned = clone_vertex(&base, 1, false).unwrap();
        let inner = || Box::new(FirstFit::new()) as Box<dyn AlgorithmStrategy>;
        assert!(CloneLift::new(inner(), &base, &cloned, CloneMap::appended(3, 1), 2).is_ok());
        // Projecting the clone onto the wrong vertex breaks adjacency.
        assert!(CloneLift::new(inner(), &base, &cloned, CloneMap::appended(3, 0), 2).is_err());
        let mut merged = CloneMap::appended(3, 1);
        merged.to_base[0] = 2;
        assert!(CloneLift::new(inner(), &base, &cloned, merged, 2).is_err());
        assert!(CloneLift::new(inner(), &base, &base, CloneMap::appended(2, 1), 2).is_err());
    }

    #[test]
    fn lifted_bipartite_strategy_stays_within_width() {
        // Cographs and clones of bipartite graphs reduce to a bipartite core.
        let mut graphs = vec![NamedGraph::Complete(4).build(), NamedGraph::Path(4).build()];
        let c6 = NamedGraph::Cycle(6).build();
        graphs.push(clone_vertex(&clone_vertex(&c6, 0, true).unwrap(), 3, false).unwrap());
        for g in graphs {
            for w in 1..=4 {
                let mut s = lift_through_reduction(&g, w, |core| {
                    Ok(Box::new(BipartiteStrategy::for_graph(core, w)?) as Box<dyn AlgorithmStrategy>)
                })
                .unwrap();
                let worst = fuzz_max_colors(s.as_mut(), GameConfig::explicit(g.clone(), w).unwrap(), 200, 9);
                assert!(worst <= w as usize, "{g:?} w={w}: {worst}");
            }
        }
    }
}
