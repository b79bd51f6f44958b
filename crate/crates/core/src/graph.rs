//! Finite simple graphs on dense vertex ids `0..n`, stored as adjacency bitmasks.
//!
//! Every graph in this crate is small (the searches built on top are
//! exponential), so a `u64` neighbourhood mask per vertex is enough and keeps
//! independence and clique tests to a couple of bit operations.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest vertex count representable with one mask word per vertex.
pub const MAX_VERTICES: usize = 64;

/// Vertex subsets are bitmasks over vertex ids.
pub type VertexSet = u64;

#[inline]
pub fn bit(v: usize) -> VertexSet {
    1u64 << v
}

/// Iterate the vertex ids contained in a mask, ascending.
pub fn members(mut set: VertexSet) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let v = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(v)
        }
    })
}

/// Mask of the ids strictly greater than `v`.
#[inline]
pub fn above(v: usize) -> VertexSet {
    if v >= 63 {
        0
    } else {
        !(bit(v + 1) - 1)
    }
}

pub fn set_of(vertices: &[usize]) -> VertexSet {
    vertices.iter().fold(0, |acc, &v| acc | bit(v))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graph has {n} vertices, at most {max} supported here")]
    TooLarge { n: usize, max: usize },
    #[error("invalid named graph: {0}")]
    InvalidSpec(String),
    #[error("distance power exponent must be at least 1")]
    InvalidPower,
}

/// A finite simple undirected graph.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    adj: Vec<VertexSet>,
}

/// Wire form: `{"vertices": n, "edges": [[i, j], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(value: GraphJson) -> Result<Self, Self::Error> {
        Graph::from_edges(value.vertices, value.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            vertices: g.n(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n(), self.edges().collect::<Vec<_>>())
    }
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n > MAX_VERTICES {
            return Err(GraphError::TooLarge { n, max: MAX_VERTICES });
        }
        Ok(Graph { adj: vec![0; n] })
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates (in
    /// either orientation) and out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n)?;
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if g.has_edge(u, v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            g.adj[u] |= bit(v);
            g.adj[v] |= bit(u);
        }
        Ok(g)
    }

    /// Builds a graph from a symmetric adjacency predicate.
    pub fn from_fn(n: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n)?;
        for u in 0..n {
            for v in (u + 1)..n {
                if adjacent(u, v) {
                    g.adj[u] |= bit(v);
                    g.adj[v] |= bit(u);
                }
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Mask of all vertices.
    #[inline]
    pub fn all(&self) -> VertexSet {
        if self.n() == 64 {
            u64::MAX
        } else {
            bit(self.n()) - 1
        }
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] & bit(v) != 0
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> VertexSet {
        self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| members(self.adj[u] & above(u)).map(move |v| (u, v)))
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.n()).map(|v| self.degree(v)).collect();
        d.sort_unstable();
        d
    }

    pub fn is_independent(&self, set: VertexSet) -> bool {
        members(set).all(|v| self.adj[v] & set == 0)
    }

    pub fn is_clique(&self, set: VertexSet) -> bool {
        members(set).all(|v| (self.adj[v] | bit(v)) & set == set)
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    /// Subgraph induced by `vertices`, relabelled `0..k` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let adj = vertices
            .iter()
            .map(|&u| {
                vertices
                    .iter()
                    .enumerate()
                    .filter(|&(_, &v)| self.has_edge(u, v))
                    .fold(0, |acc, (j, _)| acc | bit(j))
            })
            .collect();
        Graph { adj }
    }

    /// Removes `v` and shifts the higher ids down by one.
    pub fn remove_vertex(&self, v: usize) -> Graph {
        let keep: Vec<usize> = (0..self.n()).filter(|&u| u != v).collect();
        self.induced(&keep)
    }

    pub fn complement(&self) -> Graph {
        let all = self.all();
        Graph {
            adj: (0..self.n()).map(|v| all & !self.adj[v] & !bit(v)).collect(),
        }
    }

    /// Applies the relabelling `v -> perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let mut adj = vec![0; self.n()];
        for (u, v) in self.edges() {
            adj[perm[u]] |= bit(perm[v]);
            adj[perm[v]] |= bit(perm[u]);
        }
        Graph { adj }
    }

    /// BFS distances from `source`; `None` marks unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for v in members(self.adj[u]) {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// The graph families the tools know by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedGraph {
    /// Path on `n` vertices labelled in order.
    Path(usize),
    /// Cycle on `n` vertices labelled in cyclic order.
    Cycle(usize),
    Complete(usize),
    /// The 5-cycle `0..4` with the chord `0-2`.
    C5Plus,
    /// Square of the path `0-1-2-3-4`.
    P5Sq,
    /// Spanning path `0-1-2-3-4` plus the edge `1-3`: the triangle `{1,2,3}`
    /// with pendant horns `0` and `4`.
    Bull,
    /// Kneser graph on the 2-subsets of `{0..4}` listed lexicographically
    /// (`01, 02, 03, 04, 12, 13, 14, 23, 24, 34`), adjacent when disjoint.
    Petersen,
}

impl NamedGraph {
    pub const NAMES: [&'static str; 7] = ["path", "cycle", "complete", "c5plus", "p5sq", "bull", "petersen"];

    /// Validates a `(name, parameter)` pair.
    pub fn new(name: &str, param: Option<usize>) -> Result<Self, GraphError> {
        let bad = |msg: &str| Err(GraphError::InvalidSpec(format!("{name}: {msg}")));
        let fixed = |g: NamedGraph| match param {
            Some(_) => Err(GraphError::InvalidSpec(format!("{name} takes no size parameter"))),
            None => Ok(g),
        };
        match name {
            "path" | "cycle" | "complete" => {
                let Some(n) = param else {
                    return bad("a size parameter is required");
                };
                let min = if name == "cycle" { 3 } else { 1 };
                if n < min {
                    return bad(&format!("size must be at least {min}"));
                }
                if n > MAX_VERTICES {
                    return bad(&format!("size must be at most {MAX_VERTICES}"));
                }
                Ok(match name {
                    "path" => NamedGraph::Path(n),
                    "cycle" => NamedGraph::Cycle(n),
                    _ => NamedGraph::Complete(n),
                })
            }
            "c5plus" => fixed(NamedGraph::C5Plus),
            "p5sq" => fixed(NamedGraph::P5Sq),
            "bull" => fixed(NamedGraph::Bull),
            "petersen" => fixed(NamedGraph::Petersen),
            _ => Err(GraphError::InvalidSpec(format!(
                "unknown graph name {name:?} (expected one of {})",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NamedGraph::Path(_) => "path",
            NamedGraph::Cycle(_) => "cycle",
            NamedGraph::Complete(_) => "complete",
            NamedGraph::C5Plus => "c5plus",
            NamedGraph::P5Sq => "p5sq",
            NamedGraph::Bull => "bull",
            NamedGraph::Petersen => "petersen",
        }
    }

    pub fn param(&self) -> Option<usize> {
        match *self {
            NamedGraph::Path(n) | NamedGraph::Cycle(n) | NamedGraph::Complete(n) => Some(n),
            _ => None,
        }
    }

    pub fn build(&self) -> Graph {
        let built = match *self {
            NamedGraph::Path(n) => Graph::from_edges(n, (1..n).map(|i| (i - 1, i))),
            NamedGraph::Cycle(n) => Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))),
            NamedGraph::Complete(n) => Graph::from_fn(n, |_, _| true),
            NamedGraph::C5Plus => Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]),
            NamedGraph::P5Sq => distance_power(&NamedGraph::Path(5).build(), 2),
            NamedGraph::Bull => Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]),
            NamedGraph::Petersen => {
                let pairs = kneser_pairs();
                Graph::from_fn(10, |u, v| pairs[u] & pairs[v] == 0)
            }
        };
        built.expect("named graphs are well formed")
    }
}

/// The 2-subsets of `{0..4}` in lexicographic order, as bitmasks.
pub(crate) fn kneser_pairs() -> Vec<u64> {
    let mut out = Vec::with_capacity(10);
    for a in 0..5 {
        for b in (a + 1)..5 {
            out.push(bit(a) | bit(b));
        }
    }
    out
}

impl fmt::Display for NamedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some(n) => write!(f, "{}-{}", self.name(), n),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for NamedGraph {
    type Err = GraphError;

    /// Accepts `bull`, `cycle-5`, `cycle5` and `cycle:5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if let Some((name, p)) = s.split_once(['-', ':']) {
            let n = p
                .parse()
                .map_err(|_| GraphError::InvalidSpec(format!("bad size parameter {p:?}")))?;
            return NamedGraph::new(name, Some(n));
        }
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (name, digits) = s.split_at(split);
        // `c5plus` and `p5sq` carry digits in the name itself.
        if digits.is_empty() || NamedGraph::NAMES.contains(&s.as_str()) {
            NamedGraph::new(&s, None)
        } else {
            let n = digits
                .parse()
                .map_err(|_| GraphError::InvalidSpec(format!("bad graph name {s:?}")))?;
            NamedGraph::new(name, Some(n))
        }
    }
}

/// A 2-colouring `(left, right)` of `g`, if one exists. Each component is
/// coloured from its least vertex, which goes to `left`.
pub fn is_bipartite(g: &Graph) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut side: Vec<Option<bool>> = vec![None; g.n()];
    for start in 0..g.n() {
        if side[start].is_some() {
            continue;
        }
        side[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let s = side[u].unwrap_or(false);
            for v in members(g.neighbors(u)) {
                match side[v] {
                    None => {
                        side[v] = Some(!s);
                        queue.push_back(v);
                    }
                    Some(t) if t == s => return None,
                    Some(_) => {}
                }
            }
        }
    }
    let (left, right): (Vec<usize>, Vec<usize>) = (0..g.n()).partition(|&v| side[v] == Some(false));
    Some((left, right))
}

pub fn are_twins(g: &Graph, u: usize, v: usize) -> bool {
    let outside = !(bit(u) | bit(v));
    g.neighbors(u) & outside == g.neighbors(v) & outside
}

/// Lexicographically least twin pair `(u, v, adjacent)` with `u < v`.
pub fn find_twin_pair(g: &Graph) -> Option<(usize, usize, bool)> {
    for u in 0..g.n() {
        for v in (u + 1)..g.n() {
            if are_twins(g, u, v) {
                return Some((u, v, g.has_edge(u, v)));
            }
        }
    }
    None
}

/// An injective map `V(h) -> V(g)` preserving edges and non-edges, found by
/// backtracking with degree pruning. `result[i]` is the image of `h`'s vertex `i`.
pub fn contains_induced(g: &Graph, h: &Graph) -> Option<Vec<usize>> {
    if h.n() > g.n() {
        return None;
    }
    if h.n() == 0 {
        return Some(Vec::new());
    }
    // Connected-first order: high degree start, then vertices adjacent to
    // the already ordered prefix, so adjacency constraints bite early.
    let mut order = Vec::with_capacity(h.n());
    let mut placed: VertexSet = 0;
    while order.len() < h.n() {
        let frontier: Vec<usize> = (0..h.n())
            .filter(|&v| placed & bit(v) == 0)
            .filter(|&v| placed == 0 || h.neighbors(v) & placed != 0)
            .collect();
        let pool: Vec<usize> = if frontier.is_empty() {
            (0..h.n()).filter(|&v| placed & bit(v) == 0).collect()
        } else {
            frontier
        };
        let next = pool
            .into_iter()
            .max_by_key(|&v| {
                (
                    (h.neighbors(v) & placed).count_ones(),
                    h.degree(v),
                    std::cmp::Reverse(v),
                )
            })
            .expect("pool is nonempty");
        placed |= bit(next);
        order.push(next);
    }

    let mut image = vec![usize::MAX; h.n()];
    let mut used: VertexSet = 0;
    if extend_embedding(g, h, &order, 0, &mut image, &mut used) {
        Some(image)
    } else {
        None
    }
}

fn extend_embedding(
    g: &Graph,
    h: &Graph,
    order: &[usize],
    depth: usize,
    image: &mut [usize],
    used: &mut VertexSet,
) -> bool {
    let Some(&hv) = order.get(depth) else {
        return true;
    };
    let need_degree = h.degree(hv);
    for gv in members(g.all() & !*used) {
        if g.degree(gv) < need_degree {
            continue;
        }
        let consistent = order[..depth]
            .iter()
            .all(|&hu| h.has_edge(hu, hv) == g.has_edge(image[hu], gv));
        if !consistent {
            continue;
        }
        image[hv] = gv;
        *used |= bit(gv);
        if extend_embedding(g, h, order, depth + 1, image, used) {
            return true;
        }
        *used &= !bit(gv);
        image[hv] = usize::MAX;
    }
    false
}

/// An isomorphism `h -> g`, if the two graphs are isomorphic.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Option<Vec<usize>> {
    if g.n() != h.n() || g.edge_count() != h.edge_count() || g.degree_sequence() != h.degree_sequence() {
        return None;
    }
    contains_induced(g, h)
}

/// `g^k`: same vertices, `uv` an edge iff `0 < dist(u, v) <= k`.
pub fn distance_power(g: &Graph, k: usize) -> Result<Graph, GraphError> {
    if k == 0 {
        return Err(GraphError::InvalidPower);
    }
    let dist: Vec<Vec<Option<usize>>> = (0..g.n()).map(|v| g.distances_from(v)).collect();
    Graph::from_fn(g.n(), |u, v| matches!(dist[u][v], Some(d) if d <= k))
}

/// Adds vertex `n` as a twin of `u`, adjacent to `u` iff `adjacent`.
pub fn clone_vertex(g: &Graph, u: usize, adjacent: bool) -> Result<Graph, GraphError> {
    g.check_vertex(u)?;
    let n = g.n();
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    edges.extend(members(g.neighbors(u)).map(|v| (v, n)));
    if adjacent {
        edges.push((u, n));
    }
    Graph::from_edges(n + 1, edges)
}

/// Largest order accepted by [`enumerate_graphs`].
pub const ENUMERATION_LIMIT: usize = 7;

/// Every labelled simple graph on `1..=max_n` vertices, each exactly once,
/// ordered by vertex count and then by the edge-subset bitmask.
pub fn enumerate_graphs(max_n: usize) -> Result<impl Iterator<Item = Graph>, GraphError> {
    if max_n > ENUMERATION_LIMIT {
        return Err(GraphError::TooLarge {
            n: max_n,
            max: ENUMERATION_LIMIT,
        });
    }
    Ok((1..=max_n).flat_map(|n| {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
        let total = 1u64 << slots.len();
        (0..total).map(move |mask| {
            Graph::from_edges(
                n,
                slots
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e),
            )
            .expect("enumerated edges are distinct")
        })
    }))
}

/// Automorphisms of `g` as permutations, identity first, stopping after
/// `cap` of them. Any subset is sound for orbit folding.
pub fn automorphisms(g: &Graph, cap: usize) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used: VertexSet = 0;
    collect_automorphisms(g, 0, &mut perm, &mut used, &mut out, cap);
    out
}

fn collect_automorphisms(
    g: &Graph,
    v: usize,
    perm: &mut Vec<usize>,
    used: &mut VertexSet,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    if v == g.n() {
        out.push(perm.clone());
        return;
    }
    for target in 0..g.n() {
        if *used & bit(target) != 0 || g.degree(target) != g.degree(v) {
            continue;
        }
        if (0..v).all(|u| g.has_edge(u, v) == g.has_edge(perm[u], target)) {
            perm[v] = target;
            *used |= bit(target);
            collect_automorphisms(g, v + 1, perm, used, out, cap);
            *used &= !bit(target);
            perm[v] = usize::MAX;
        }
    }
}

/// Maximal cliques (Bron–Kerbosch with pivoting) as masks.
pub fn maximal_cliques(g: &Graph) -> Vec<VertexSet> {
    let mut out = Vec::new();
    bron_kerbosch(g, 0, g.all(), 0, &mut out);
    out
}

fn bron_kerbosch(g: &Graph, r: VertexSet, mut p: VertexSet, mut x: VertexSet, out: &mut Vec<VertexSet>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    let pivot = members(p | x)
        .max_by_key(|&u| (g.neighbors(u) & p).count_ones())
        .expect("p|x nonempty");
    for v in members(p & !g.neighbors(pivot)) {
        bron_kerbosch(g, r | bit(v), p & g.neighbors(v), x & g.neighbors(v), out);
        p &= !bit(v);
        x |= bit(v);
    }
}

/// Maximal independent sets, i.e. maximal cliques of the complement.
pub fn maximal_independent_sets(g: &Graph) -> Vec<VertexSet> {
    maximal_cliques(&g.complement())
}
