use serde::{Deserialize, Serialize};

use crate::engine::{ColorChoice, Rules, TokenState};
use crate::graph::{Graph, NamedGraph};

use super::{AlgorithmStrategy, SlotTable, StrategyError};

/// A `(p, q)`-colouring: each vertex gets `q` of the colours `0..p`, and
/// adjacent vertices get disjoint sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalColoring {
    pub p: usize,
    pub q: usize,
    pub phi: Vec<Vec<usize>>,
}

impl FractionalColoring {
    pub fn validate(&self, graph: &Graph) -> Result<(), StrategyError> {
        let bad = |m: String| Err(StrategyError::Validation(m));
        if self.q == 0 || self.q > self.p {
            return bad(format!("need 1 <= q <= p, got p={} q={}", self.p, self.q));
        }
        if self.phi.len() != graph.n() {
            return bad(format!("phi has {} entries for {} vertices", self.phi.len(), graph.n()));
        }
        for (v, set) in self.phi.iter().enumerate() {
            let mut sorted = set.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != self.q || set.len() != self.q {
                return bad(format!("phi({v}) must hold {} distinct colours", self.q));
            }
            if sorted.iter().any(|&c| c >= self.p) {
                return bad(format!("phi({v}) uses a colour outside 0..{}", self.p));
            }
        }
        for (u, v) in graph.edges() {
            if self.phi[u].iter().any(|c| self.phi[v].contains(c)) {
                return bad(format!("phi({u}) and phi({v}) intersect on edge {u}-{v}"));
            }
        }
        Ok(())
    }

    /// `p * ceil(w / 2q)`, the colour ceiling of the list strategy.
    pub fn ceiling(&self, width: u32) -> usize {
        self.p * block_size(width, self.q)
    }
}

fn block_size(width: u32, q: usize) -> usize {
    (width as usize).div_ceil(2 * q).max(1)
}

/// Optimal proper colouring by backtracking: `(chi, colour per vertex)`.
pub fn proper_coloring(graph: &Graph) -> (usize, Vec<usize>) {
    fn assign(g: &Graph, v: usize, k: usize, colors: &mut Vec<usize>) -> bool {
        if v == g.n() {
            return true;
        }
        let used_max = colors[..v].iter().copied().max().map_or(0, |m| m + 1);
        // Symmetry: a vertex may open at most one colour beyond those in use.
        for c in 0..k.min(used_max + 1) {
            if (0..v).any(|u| g.has_edge(u, v) && colors[u] == c) {
                continue;
            }
            colors[v] = c;
            if assign(g, v + 1, k, colors) {
                return true;
            }
        }
        false
    }
    let mut colors = vec![0; graph.n()];
    for k in 1..=graph.n().max(1) {
        if assign(graph, 0, k, &mut colors) {
            return (if graph.n() == 0 { 0 } else { k }, colors);
        }
    }
    unreachable!("n colours always suffice")
}

/// The reference `(p, q)`-colourings for the obstructions: `(n, (n-1)/2)` for
/// odd cycles (consecutive blocks of `q` colours around the cycle) and an
/// optimal proper 3-colouring, read as `(3, 1)`, for `c5plus`, the bull and
/// `p5sq`.
pub fn canonical_pq_coloring(graph: NamedGraph) -> Result<FractionalColoring, StrategyError> {
    match graph {
        NamedGraph::Cycle(n) if n % 2 == 1 => {
            let q = (n - 1) / 2;
            let phi = (0..n).map(|i| (0..q).map(|j| (i * q + j) % n).collect()).collect();
            Ok(FractionalColoring { p: n, q, phi })
        }
        NamedGraph::C5Plus | NamedGraph::Bull | NamedGraph::P5Sq => {
            let (p, colors) = proper_coloring(&graph.build());
            Ok(FractionalColoring {
                p,
                q: 1,
                phi: colors.into_iter().map(|c| vec![c]).collect(),
            })
        }
        other => Err(StrategyError::Validation(format!(
            "no reference (p,q)-colouring for {other}"
        ))),
    }
}

/// Per-vertex preference lists over `p * t` colour slots. Block `j` is
/// slots `j*t .. (j+1)*t`. The forward list at `u` is the blocks of
/// `phi(u)` in ascending order; the reverse list is the remaining blocks
/// concatenated in ascending order and then reversed as a whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorListPlan {
    pub block: usize,
    pub forward: Vec<Vec<usize>>,
    pub reverse: Vec<Vec<usize>>,
}

impl ColorListPlan {
    pub fn new(fc: &FractionalColoring, block: usize) -> Self {
        let blocks = |set: &mut dyn Iterator<Item = usize>| -> Vec<usize> {
            set.flat_map(|j| (j * block)..((j + 1) * block)).collect()
        };
        let mut forward = Vec::with_capacity(fc.phi.len());
        let mut reverse = Vec::with_capacity(fc.phi.len());
        for set in &fc.phi {
            let mut own = set.clone();
            own.sort_unstable();
            forward.push(blocks(&mut own.iter().copied()));
            let mut rest = blocks(&mut (0..fc.p).filter(|j| !own.contains(j)));
            rest.reverse();
            reverse.push(rest);
        }
        ColorListPlan {
            block,
            forward,
            reverse,
        }
    }

    /// The full list `F_u . R_u`.
    pub fn list(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.forward[u].iter().chain(&self.reverse[u]).copied()
    }

    pub fn slot_count(&self) -> usize {
        self.forward.first().map_or(0, |f| f.len() + self.reverse[0].len())
    }
}

/// Each token at `u` takes the first slot of `F_u . R_u` not yet on `u`.
#[derive(Debug, Clone)]
pub struct FractionalStrategy {
    coloring: FractionalColoring,
    plan: ColorListPlan,
    slots: SlotTable,
}

impl FractionalStrategy {
    pub fn new(fc: FractionalColoring, graph: &Graph, width: u32) -> Result<Self, StrategyError> {
        fc.validate(graph)?;
        let plan = ColorListPlan::new(&fc, block_size(width, fc.q));
        let slots = SlotTable::new(plan.slot_count());
        Ok(FractionalStrategy {
            coloring: fc,
            plan,
            slots,
        })
    }

    pub fn plan(&self) -> &ColorListPlan {
        &self.plan
    }

    pub fn coloring(&self) -> &FractionalColoring {
        &self.coloring
    }

    /// Support of every slot (zero while unused).
    pub fn slot_supports(&self) -> &[u64] {
        self.slots.supports()
    }
}

impl AlgorithmStrategy for FractionalStrategy {
    fn name(&self) -> &'static str {
        "fractional"
    }

    fn reset(&mut self) {
        self.slots.clear();
    }

    fn respond(&mut self, rules: &Rules, _state: &TokenState, v: usize) -> Result<ColorChoice, StrategyError> {
        if v >= self.plan.forward.len() {
            return Err(StrategyError::Config(format!("vertex {v} outside the colouring")));
        }
        let slot = self
            .slots
            .first_free(self.plan.list(v), v)
            .ok_or_else(|| StrategyError::Invariant(format!("list at vertex {v} exhausted")))?;
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
    use crate::graph::bit;
    use crate::strategies::testing::{fuzz_max_colors, play_sequence};

    fn c5_coloring() -> FractionalColoring {
        FractionalColoring {
            p: 5,
            q: 2,
            phi: (0..5).map(|i| vec![(2 * i) % 5, (2 * i + 1) % 5]).collect(),
        }
    }

    #[test]
    fn list_layout() {
        let plan = ColorListPlan::new(&c5_coloring(), 1);
        assert_eq!(plan.list(0).collect::<Vec<_>>(), vec![0, 1, 4, 3, 2]);
        let plan = ColorListPlan::new(&c5_coloring(), 2);
        assert_eq!(plan.forward[0], vec![0, 1, 2, 3]);
        assert_eq!(plan.reverse[0], vec![9, 8, 7, 6, 5, 4]);
        for u in 0..5 {
            let mut all: Vec<usize> = plan.list(u).collect();
            all.sort_unstable();
            assert_eq!(all, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn three_tokens_walk_forward_then_reverse() {
        let g = NamedGraph::Cycle(5).build();
        let mut s = FractionalStrategy::new(c5_coloring(), &g, 4).unwrap();
        play_sequence(&mut s, GameConfig::named(NamedGraph::Cycle(5), 4).unwrap(), &[0, 0, 0]);
        let used: Vec<usize> = (0..5).filter(|&i| s.slot_supports()[i] & bit(0) != 0).collect();
        assert_eq!(used, vec![0, 1, 4]);
    }

    #[test]
    fn validation() {
        let g = NamedGraph::Cycle(5).build();
        let mut bad = c5_coloring();
        bad.phi[1] = vec![0, 2];
        assert!(FractionalStrategy::new(bad, &g, 4).is_err());
        let short = FractionalColoring {
            p: 5,
            q: 2,
            phi: vec![vec![0, 1]],
        };
        assert!(short.validate(&g).is_err());
        let wrong_q = FractionalColoring {
            p: 5,
            q: 2,
            phi: (0..5).map(|i| vec![i]).collect(),
        };
        assert!(wrong_q.validate(&g).is_err());
    }

    #[test]
    fn reference_colourings() {
        let c5 = canonical_pq_coloring(NamedGraph::Cycle(5)).unwrap();
        assert_eq!((c5.p, c5.q), (5, 2));
        c5.validate(&NamedGraph::Cycle(5).build()).unwrap();
        let c9 = canonical_pq_coloring(NamedGraph::Cycle(9)).unwrap();
        assert_eq!((c9.p, c9.q), (9, 4));
        c9.validate(&NamedGraph::Cycle(9).build()).unwrap();
        for g in [NamedGraph::C5Plus, NamedGraph::Bull, NamedGraph::P5Sq] {
            let fc = canonical_pq_coloring(g).unwrap();
            assert_eq!((fc.p, fc.q), (3, 1), "{g}");
            fc.validate(&g.build()).unwrap();
        }
        assert!(canonical_pq_coloring(NamedGraph::Cycle(6)).is_err());
        assert!(canonical_pq_coloring(NamedGraph::Petersen).is_err());
    }

    #[test]
    fn chromatic_numbers_by_brute_force() {
        // Independent check: try every assignment of k colours.
        fn brute_chi(g: &Graph) -> usize {
            (1..=g.n())
                .find(|&k| {
                    (0..k.pow(g.n() as u32)).any(|code| {
                        let c: Vec<usize> = (0..g.n()).map(|i| code / k.pow(i as u32) % k).collect();
                        g.edges().all(|(u, v)| c[u] != c[v])
                    })
                })
                .unwrap()
        }
        for g in [
            NamedGraph::P5Sq,
            NamedGraph::Bull,
            NamedGraph::C5Plus,
            NamedGraph::Cycle(5),
            NamedGraph::Path(4),
        ] {
            let graph = g.build();
            assert_eq!(proper_coloring(&graph).0, brute_chi(&graph), "{g}");
        }
        assert_eq!(brute_chi(&NamedGraph::P5Sq.build()), 3);
    }

    #[test]
    fn random_play_respects_ceiling() {
        for (g, w) in [
            (NamedGraph::Cycle(5), 4),
            (NamedGraph::Cycle(7), 3),
            (NamedGraph::Bull, 2),
            (NamedGraph::C5Plus, 5),
        ] {
            let fc = canonical_pq_coloring(g).unwrap();
            let ceiling = fc.ceiling(w);
            let mut s = FractionalStrategy::new(fc, &g.build(), w).unwrap();
            let worst = fuzz_max_colors(&mut s, GameConfig::named(g, w).unwrap(), 300, 5);
            assert!(worst <= ceiling, "{g} w={w}: {worst} > {ceiling}");
        }
    }
}
