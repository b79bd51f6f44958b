//! Online-perfection recognition.
//!
//! The verdict comes from twin reduction: delete one vertex of a twin pair
//! until no twins remain, then test the core for bipartiteness. When the
//! verdict is negative a certificate is found separately by searching for one
//! of the minimal obstructions (odd holes, `c5plus`, `p5sq`, the bull). The
//! two routes are independent and are cross-checked in the tests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{bit, clone_vertex, contains_induced, find_twin_pair, is_bipartite, Graph, NamedGraph};

/// Largest graph the obstruction search accepts.
pub const OBSTRUCTION_SEARCH_LIMIT: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerfectionError {
    #[error("obstruction search is limited to {max} vertices, graph has {n}")]
    TooLarge { n: usize, max: usize },
}

/// One twin deletion, in the ids of the input graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinDeletion {
    pub removed: usize,
    pub twin: usize,
    pub adjacent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    /// Twin-free core, relabelled `0..k` in the order of `core_vertices`.
    pub core: Graph,
    /// Input ids of the core vertices, ascending.
    pub core_vertices: Vec<usize>,
    pub trace: Vec<TwinDeletion>,
}

/// Repeatedly deletes the larger vertex of the lexicographically least twin
/// pair until the graph is twin-free.
pub fn twin_reduce(g: &Graph) -> Reduction {
    let mut current = g.clone();
    let mut labels: Vec<usize> = (0..g.n()).collect();
    let mut trace = Vec::new();
    while let Some((u, v, adjacent)) = find_twin_pair(&current) {
        trace.push(TwinDeletion {
            removed: labels[v],
            twin: labels[u],
            adjacent,
        });
        current = current.remove_vertex(v);
        labels.remove(v);
    }
    Reduction {
        core: current,
        core_vertices: labels,
        trace,
    }
}

impl Reduction {
    /// Replays the trace backwards as clone operations on the core and
    /// returns the result in the input graph's labelling.
    pub fn rebuild(&self) -> Graph {
        let mut g = self.core.clone();
        let mut labels = self.core_vertices.clone();
        for step in self.trace.iter().rev() {
            let at = labels
                .iter()
                .position(|&l| l == step.twin)
                .expect("twin survives its partner");
            g = clone_vertex(&g, at, step.adjacent).expect("index is in range");
            labels.push(step.removed);
        }
        g.permuted(&labels)
    }
}

/// The minimal graphs that are not online-perfect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Obstruction {
    OddHole(usize),
    C5Plus,
    P5Sq,
    Bull,
}

impl Obstruction {
    pub fn graph(&self) -> Graph {
        match *self {
            Obstruction::OddHole(n) => NamedGraph::Cycle(n).build(),
            Obstruction::C5Plus => NamedGraph::C5Plus.build(),
            Obstruction::P5Sq => NamedGraph::P5Sq.build(),
            Obstruction::Bull => NamedGraph::Bull.build(),
        }
    }
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obstruction::OddHole(n) => write!(f, "odd-hole-{n}"),
            Obstruction::C5Plus => f.write_str("c5plus"),
            Obstruction::P5Sq => f.write_str("p5sq"),
            Obstruction::Bull => f.write_str("bull"),
        }
    }
}

impl FromStr for Obstruction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c5plus" => Ok(Obstruction::C5Plus),
            "p5sq" => Ok(Obstruction::P5Sq),
            "bull" => Ok(Obstruction::Bull),
            _ => s
                .strip_prefix("odd-hole-")
                .and_then(|n| n.parse().ok())
                .filter(|&n: &usize| n >= 5 && n % 2 == 1)
                .map(Obstruction::OddHole)
                .ok_or_else(|| format!("unknown obstruction {s:?}")),
        }
    }
}

impl Serialize for Obstruction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Obstruction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An induced copy of an obstruction. `vertices[i]` is the host vertex
/// playing the obstruction's canonical vertex `i`; for odd holes that is
/// the cyclic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: Obstruction,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub online_perfect: bool,
    pub core: Graph,
    pub core_vertices: Vec<usize>,
    pub trace: Vec<TwinDeletion>,
    pub witness: Option<Witness>,
}

impl RecognitionResult {
    pub fn reduction(&self) -> Reduction {
        Reduction {
            core: self.core.clone(),
            core_vertices: self.core_vertices.clone(),
            trace: self.trace.clone(),
        }
    }
}

/// Decides online-perfection by twin reduction; attaches an obstruction
/// witness when the answer is negative.
pub fn is_online_perfect(g: &Graph) -> Result<RecognitionResult, PerfectionError> {
    let Reduction {
        core,
        core_vertices,
        trace,
    } = twin_reduce(g);
    let online_perfect = is_bipartite(&core).is_some();
    let witness = if online_perfect { None } else { find_obstruction(g)? };
    Ok(RecognitionResult {
        online_perfect,
        core,
        core_vertices,
        trace,
        witness,
    })
}

/// Searches for an induced obstruction in the order bull, `c5plus`, `p5sq`,
/// then odd holes of increasing length.
pub fn find_obstruction(g: &Graph) -> Result<Option<Witness>, PerfectionError> {
    if g.n() > OBSTRUCTION_SEARCH_LIMIT {
        return Err(PerfectionError::TooLarge {
            n: g.n(),
            max: OBSTRUCTION_SEARCH_LIMIT,
        });
    }
    for kind in [Obstruction::Bull, Obstruction::C5Plus, Obstruction::P5Sq] {
        if let Some(vertices) = contains_induced(g, &kind.graph()) {
            return Ok(Some(Witness { kind, vertices }));
        }
    }
    for len in (5..=g.n()).step_by(2) {
        if let Some(vertices) = find_induced_cycle(g, len) {
            return Ok(Some(Witness {
                kind: Obstruction::OddHole(len),
                vertices,
            }));
        }
    }
    Ok(None)
}

/// An induced cycle on exactly `len >= 4` vertices, grown as an induced path
/// from its least vertex.
pub fn find_induced_cycle(g: &Graph, len: usize) -> Option<Vec<usize>> {
    if len < 4 || len > g.n() {
        return None;
    }
    let mut path = Vec::with_capacity(len);
    for start in 0..g.n() {
        path.clear();
        path.push(start);
        if grow_induced_cycle(g, len, &mut path) {
            return Some(path);
        }
    }
    None
}

fn grow_induced_cycle(g: &Graph, len: usize, path: &mut Vec<usize>) -> bool {
    let start = path[0];
    let last = *path.last().expect("path starts nonempty");
    let closing = path.len() == len - 1;
    let on_path = path.iter().fold(0, |acc, &v| acc | bit(v));
    // Everything on the path except its last vertex (and the start, which
    // is handled separately).
    let interior = on_path & !bit(last) & !bit(start);
    for next in crate::graph::members(g.neighbors(last) & !on_path) {
        if next < start || g.neighbors(next) & interior != 0 {
            continue;
        }
        let touches_start = g.has_edge(next, start);
        if path.len() >= 2 && touches_start != closing {
            continue;
        }
        if path.len() == 1 && closing {
            continue;
        }
        path.push(next);
        if closing || grow_induced_cycle(g, len, path) {
            return true;
        }
        path.pop();
    }
    false
}
