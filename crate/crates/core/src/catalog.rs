//! Strategy and graph names shared by the CLI and the session service.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::GameConfig;
use crate::graph::{is_bipartite, Graph, NamedGraph};
use crate::perfection::twin_reduce;
use crate::strategies::{
    canonical_pq_coloring, lift_through_reduction, proper_coloring, AlgorithmStrategy, BipartiteStrategy, BullSpoiler,
    FirstFit, FractionalColoring, FractionalStrategy, GeneralSpoiler, GeneralSpoilerPlan, P5SqStrategy,
    ParityPathSpoiler, RandomSpoiler, SpoilerStrategy, StrategyError,
};

pub const ALGORITHMS: [&str; 5] = ["bipartite", "fractional", "p5sq", "first-fit", "clone-lift"];
pub const SPOILERS: [&str; 5] = ["parity-path", "bull", "general", "random", "exhaustive"];

fn params<T: for<'de> Deserialize<'de>>(value: Option<&Value>) -> Result<Option<T>, StrategyError> {
    match value {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| StrategyError::Validation(format!("bad strategy parameters: {e}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParityPaths {
    odd: Vec<usize>,
    even: Vec<usize>,
}

/// The reference `(p, q)`-colouring for a named obstruction, the Kneser
/// colouring for the Petersen graph, or an optimal proper colouring.
pub fn default_coloring(config: &GameConfig) -> FractionalColoring {
    let named = config.source.named();
    if let Some(fc) = named.and_then(|n| canonical_pq_coloring(n).ok()) {
        return fc;
    }
    if named == Some(NamedGraph::Petersen) {
        let phi = crate::graph::kneser_pairs()
            .into_iter()
            .map(|pair| crate::graph::members(pair).collect())
            .collect();
        return FractionalColoring { p: 5, q: 2, phi };
    }
    let (p, colors) = proper_coloring(&config.graph);
    FractionalColoring {
        p: p.max(1),
        q: 1,
        phi: colors.into_iter().map(|c| vec![c]).collect(),
    }
}

fn core_strategy(core: &Graph, width: u32) -> Result<Box<dyn AlgorithmStrategy>, StrategyError> {
    if is_bipartite(core).is_some() {
        return Ok(Box::new(BipartiteStrategy::for_graph(core, width)?));
    }
    let (p, colors) = proper_coloring(core);
    let fc = FractionalColoring {
        p,
        q: 1,
        phi: colors.into_iter().map(|c| vec![c]).collect(),
    };
    Ok(Box::new(FractionalStrategy::new(fc, core, width)?))
}

/// Builds a named Algorithm strategy. `params` carries the optional JSON
/// parameters: a bipartition `{"left","right"}` or a colouring
/// `{"p","q","phi"}`.
pub fn build_algorithm(
    name: &str,
    config: &GameConfig,
    params_json: Option<&Value>,
) -> Result<Box<dyn AlgorithmStrategy>, StrategyError> {
    let g = &config.graph;
    let w = config.width;
    Ok(match name {
        "bipartite" => match params::<Bipartition>(params_json)? {
            Some(b) => Box::new(BipartiteStrategy::new(g, &b.left, &b.right, w)?),
            None => Box::new(BipartiteStrategy::for_graph(g, w)?),
        },
        "fractional" => {
            let fc = params::<FractionalColoring>(params_json)?.unwrap_or_else(|| default_coloring(config));
            Box::new(FractionalStrategy::new(fc, g, w)?)
        }
        "p5sq" => Box::new(P5SqStrategy::new(g)?),
        "first-fit" => Box::new(FirstFit::new()),
        "clone-lift" => lift_through_reduction(g, w, |core| core_strategy(core, w))?,
        other => {
            return Err(StrategyError::Config(format!(
                "unknown algorithm {other:?}; expected one of {}",
                ALGORITHMS.join(", ")
            )))
        }
    })
}

/// Builds a named Spoiler strategy. `exhaustive` is solver-backed and has no
/// strategy object; callers route it to the best-response search.
pub fn build_spoiler(
    name: &str,
    config: &GameConfig,
    params_json: Option<&Value>,
    seed: u64,
) -> Result<Box<dyn SpoilerStrategy>, StrategyError> {
    let g = &config.graph;
    Ok(match name {
        "parity-path" => match params::<ParityPaths>(params_json)? {
            Some(p) => Box::new(ParityPathSpoiler::new(g, p.odd, p.even)?),
            None => Box::new(ParityPathSpoiler::for_graph(g)?),
        },
        "bull" => Box::new(BullSpoiler::new(g)?),
        "general" => {
            let plan = match params::<GeneralSpoilerPlan>(params_json)? {
                Some(plan) => plan,
                None => GeneralSpoilerPlan::find(g)
                    .ok_or_else(|| StrategyError::Validation("no general Spoiler plan exists for this graph".into()))?,
            };
            Box::new(GeneralSpoiler::floor(plan, g, config.width)?)
        }
        "random" => Box::new(RandomSpoiler::new(seed)),
        "exhaustive" => {
            return Err(StrategyError::Config(
                "the exhaustive Spoiler is a search, not a strategy object".into(),
            ))
        }
        other => {
            return Err(StrategyError::Config(format!(
                "unknown spoiler {other:?}; expected one of {}",
                SPOILERS.join(", ")
            )))
        }
    })
}

/// Proven bounds on the game value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownBounds {
    pub lower: u32,
    pub upper: u32,
}

/// Bounds on `f(w, G)` for the named families, from the strategies in this
/// crate: Spoiler plans for the lower side and list colourings for the
/// upper side. Online-perfect graphs get `w` exactly.
pub fn known_bounds(graph: NamedGraph, width: u32) -> KnownBounds {
    let w = width;
    let half = w / 2;
    let exact = KnownBounds { lower: w, upper: w };
    let ceil_div = |a: u32, b: u32| a.div_ceil(b);
    let (lower, upper) = match graph {
        NamedGraph::Path(_) | NamedGraph::Complete(_) => return exact,
        NamedGraph::Cycle(n) if n % 2 == 0 => return exact,
        NamedGraph::Cycle(n) => {
            let n = n as u32;
            (ceil_div(n * 2 * half, n - 1), n * ceil_div(w, n - 1))
        }
        NamedGraph::C5Plus => (ceil_div(5 * half, 2), 3 * ceil_div(w, 2)),
        NamedGraph::Bull => (ceil_div(7 * half, 3), 3 * ceil_div(w, 2)),
        NamedGraph::P5Sq => (ceil_div(5 * half, 2), (5 * w + 2) / 4),
        // Contains C5; a (5,2)-colouring gives the upper side.
        NamedGraph::Petersen => (ceil_div(10 * half, 4), 5 * ceil_div(w, 4)),
    };
    let mut lower = lower.max(w);
    if w == 2 {
        lower = lower.max(3);
    }
    KnownBounds {
        lower,
        upper: upper.max(lower),
    }
}

/// One entry of the graph catalogue served to clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEntry {
    pub id: String,
    pub family: String,
    pub param: Option<usize>,
    pub graph: Graph,
    pub online_perfect: bool,
}

/// A fixed list of small instances of every family.
pub fn graph_catalog() -> Vec<GraphEntry> {
    let instances = [
        NamedGraph::Path(4),
        NamedGraph::Cycle(4),
        NamedGraph::Cycle(5),
        NamedGraph::Cycle(6),
        NamedGraph::Cycle(7),
        NamedGraph::Complete(3),
        NamedGraph::C5Plus,
        NamedGraph::P5Sq,
        NamedGraph::Bull,
        NamedGraph::Petersen,
    ];
    instances
        .into_iter()
        .map(|n| {
            let graph = n.build();
            let core = twin_reduce(&graph).core;
            GraphEntry {
                id: n.to_string(),
                family: n.name().to_string(),
                param: n.param(),
                online_perfect: is_bipartite(&core).is_some(),
                graph,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_algorithm_builds_somewhere() {
        let c5 = GameConfig::named(NamedGraph::Cycle(5), 4).unwrap();
        let p4 = GameConfig::named(NamedGraph::Path(4), 2).unwrap();
        let p5sq = GameConfig::named(NamedGraph::P5Sq, 4).unwrap();
        assert!(build_algorithm("bipartite", &p4, None).is_ok());
        assert!(build_algorithm("bipartite", &c5, None).is_err());
        assert!(build_algorithm("fractional", &c5, None).is_ok());
        assert!(build_algorithm("p5sq", &p5sq, None).is_ok());
        assert!(build_algorithm("first-fit", &c5, None).is_ok());
        assert!(build_algorithm("clone-lift", &c5, None).is_ok());
        assert!(build_algorithm("nope", &c5, None).is_err());

        let explicit = serde_json::json!({"p": 5, "q": 2, "phi": [[0,1],[2,3],[4,0],[1,2],[3,4]]});
        assert!(build_algorithm("fractional", &c5, Some(&explicit)).is_ok());
        let bad = serde_json::json!({"p": 5, "q": 2, "phi": [[0,1]]});
        assert!(build_algorithm("fractional", &c5, Some(&bad)).is_err());
    }

    #[test]
    fn spoilers_build() {
        let c5 = GameConfig::named(NamedGraph::Cycle(5), 4).unwrap();
        assert!(build_spoiler("parity-path", &c5, None, 0).is_ok());
        assert!(build_spoiler("general", &c5, None, 0).is_ok());
        assert!(build_spoiler("bull", &c5, None, 0).is_err());
        assert!(build_spoiler("random", &c5, None, 0).is_ok());
        assert!(build_spoiler("exhaustive", &c5, None, 0).is_err());
        let odd = c5.with_width(5).unwrap();
        assert!(build_spoiler("general", &odd, None, 0).is_ok());
    }

    #[test]
    fn petersen_colouring_is_valid() {
        let cfg = GameConfig::named(NamedGraph::Petersen, 4).unwrap();
        let fc = default_coloring(&cfg);
        assert_eq!((fc.p, fc.q), (5, 2));
        fc.validate(&cfg.graph).unwrap();
    }

    #[test]
    fn bounds() {
        assert_eq!(
            known_bounds(NamedGraph::Cycle(5), 4),
            KnownBounds { lower: 5, upper: 5 }
        );
        assert_eq!(
            known_bounds(NamedGraph::Cycle(5), 2),
            KnownBounds { lower: 3, upper: 5 }
        );
        assert_eq!(known_bounds(NamedGraph::P5Sq, 4), KnownBounds { lower: 5, upper: 5 });
        assert_eq!(known_bounds(NamedGraph::Path(6), 3), KnownBounds { lower: 3, upper: 3 });
        let b = known_bounds(NamedGraph::Bull, 6);
        assert_eq!(b.lower, 7);
        assert!(b.upper >= b.lower);
    }

    #[test]
    fn catalogue_verdicts() {
        let cat = graph_catalog();
        let perfect: Vec<&str> = cat.iter().filter(|e| e.online_perfect).map(|e| e.id.as_str()).collect();
        assert_eq!(perfect, vec!["path-4", "cycle-4", "cycle-6", "complete-3"]);
    }
}
