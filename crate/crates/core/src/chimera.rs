//! Chimera topology, minor embedding and chain handling.
//!
//! A Chimera graph `(M, N, L)` is an `M × N` grid of unit cells. Each cell is
//! a complete bipartite `K_{L,L}` between a left shore and a right shore.
//! Left-shore qubit `k` couples to left-shore qubit `k` of the cell below;
//! right-shore qubit `k` couples to right-shore qubit `k` of the cell to the
//! right. Qubit ids are the linear index
//! `((row · N + col) · 2 + side) · L + k` with `side = 0` for the left shore,
//! so the single-cell ids `0..L` are one shore and `L..2L` the other.
//!
//! An embedding maps every logical vertex to a connected *chain* of qubits.
//! Chains are disjoint, and each logical edge is realized by one assigned
//! coupler between the two chains.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::qubo_ising::IsingModel;
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChimeraError {
    #[error("chimera dimensions must be positive, got ({0}, {1}, {2})")]
    BadDimensions(usize, usize, usize),
    #[error("inoperable qubit {qubit} is outside 0..{total}")]
    QubitOutOfRange { qubit: usize, total: usize },
    #[error("no embedding found after {0} tries")]
    EmbeddingNotFound(usize),
    #[error("logical graph is empty")]
    EmptyGraph,
    #[error("chain strength must be positive and finite, got {0}")]
    BadChainStrength(f64),
    #[error("invalid embedding: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidEmbedding(Vec<Violation>),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Hardware graph with inoperable qubits removed from the adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct ChimeraGraph {
    rows: usize,
    cols: usize,
    shore: usize,
    inoperable: BTreeSet<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl ChimeraGraph {
    pub fn new(
        rows: usize,
        cols: usize,
        shore: usize,
        inoperable: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ChimeraError> {
        if rows == 0 || cols == 0 || shore == 0 {
            return Err(ChimeraError::BadDimensions(rows, cols, shore));
        }
        let total = 2 * rows * cols * shore;
        let inoperable: BTreeSet<usize> = inoperable.into_iter().collect();
        if let Some(&qubit) = inoperable.iter().find(|&&q| q >= total) {
            return Err(ChimeraError::QubitOutOfRange { qubit, total });
        }
        let mut g = Self { rows, cols, shore, inoperable, adjacency: vec![Vec::new(); total] };
        for (a, b) in g.all_couplers() {
            if g.is_operable(a) && g.is_operable(b) {
                g.adjacency[a].push(b);
                g.adjacency[b].push(a);
            }
        }
        for list in &mut g.adjacency {
            list.sort_unstable();
        }
        Ok(g)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.shore)
    }

    pub fn num_qubits(&self) -> usize {
        2 * self.rows * self.cols * self.shore
    }

    pub fn qubit(&self, row: usize, col: usize, side: usize, k: usize) -> usize {
        ((row * self.cols + col) * 2 + side) * self.shore + k
    }

    /// `(row, col, side, k)` of a qubit id.
    pub fn coords(&self, q: usize) -> (usize, usize, usize, usize) {
        let k = q % self.shore;
        let rest = q / self.shore;
        let side = rest % 2;
        let cell = rest / 2;
        (cell / self.cols, cell % self.cols, side, k)
    }

    pub fn is_operable(&self, q: usize) -> bool {
        q < self.num_qubits() && !self.inoperable.contains(&q)
    }

    pub fn inoperable(&self) -> &BTreeSet<usize> {
        &self.inoperable
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_coupler(&self, a: usize, b: usize) -> bool {
        a < self.adjacency.len() && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Working couplers as `(a, b)` with `a < b`.
    pub fn couplers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }

    /// Every coupler of the ideal graph, ignoring inoperable qubits.
    fn all_couplers(&self) -> Vec<(usize, usize)> {
        let l = self.shore;
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                for i in 0..l {
                    for j in 0..l {
                        out.push((self.qubit(r, c, 0, i), self.qubit(r, c, 1, j)));
                    }
                    if r + 1 < self.rows {
                        out.push((self.qubit(r, c, 0, i), self.qubit(r + 1, c, 0, i)));
                    }
                    if c + 1 < self.cols {
                        out.push((self.qubit(r, c, 1, i), self.qubit(r, c + 1, 1, i)));
                    }
                }
            }
        }
        out
    }
}

pub fn build_chimera(
    rows: usize,
    cols: usize,
    shore: usize,
    inoperable: impl IntoIterator<Item = usize>,
) -> Result<ChimeraGraph, ChimeraError> {
    ChimeraGraph::new(rows, cols, shore, inoperable)
}

/// Parses a whitespace-separated list of qubit ids (`#` comments allowed).
pub fn parse_qubit_list(text: &str) -> Result<Vec<usize>, ChimeraError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        for tok in raw.split('#').next().unwrap_or("").split_whitespace() {
            let q = tok
                .parse::<usize>()
                .map_err(|_| ChimeraError::Parse { line: i + 1, message: format!("bad qubit id `{tok}`") })?;
            out.push(q);
        }
    }
    Ok(out)
}

/// Interaction graph of a logical model: vertices `0..n`, an edge wherever
/// the coupler is non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalGraph {
    num_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl LogicalGraph {
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let num_vertices = edges.iter().map(|&(_, b)| b + 1).fold(num_vertices, usize::max);
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Self { num_vertices, edges, adjacency }
    }

    pub fn from_ising(m: &IsingModel) -> Self {
        Self::new(m.num_vars(), m.couplers().iter().filter(|(_, &j)| j != 0.0).map(|(&e, _)| e))
    }

    pub fn complete(k: usize) -> Self {
        Self::new(k, (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))))
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    MissingChain { vertex: usize },
    EmptyChain { vertex: usize },
    QubitOutOfRange { vertex: usize, qubit: usize },
    InoperableQubit { vertex: usize, qubit: usize },
    SharedQubit { qubit: usize, first: usize, second: usize },
    DisconnectedChain { vertex: usize },
    UncoveredEdge { u: usize, v: usize },
    BadEdgeCoupler { u: usize, v: usize, qa: usize, qb: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingChain { vertex } => write!(f, "vertex {vertex} has no chain"),
            Violation::EmptyChain { vertex } => write!(f, "chain of vertex {vertex} is empty"),
            Violation::QubitOutOfRange { vertex, qubit } => {
                write!(f, "chain of vertex {vertex} uses nonexistent qubit {qubit}")
            }
            Violation::InoperableQubit { vertex, qubit } => {
                write!(f, "chain of vertex {vertex} uses inoperable qubit {qubit}")
            }
            Violation::SharedQubit { qubit, first, second } => {
                write!(f, "qubit {qubit} belongs to chains {first} and {second}")
            }
            Violation::DisconnectedChain { vertex } => write!(f, "chain of vertex {vertex} is not connected"),
            Violation::UncoveredEdge { u, v } => write!(f, "edge {{{u}, {v}}} has no assigned coupler"),
            Violation::BadEdgeCoupler { u, v, qa, qb } => {
                write!(f, "edge {{{u}, {v}}} assigned to ({qa}, {qb}), which is not a coupler between their chains")
            }
        }
    }
}

/// Chains per logical vertex plus one physical coupler per logical edge.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Embedding {
    /// Sorted qubit ids, indexed by logical vertex.
    pub chains: Vec<Vec<usize>>,
    /// Logical edge `(u, v)` with `u < v` → `(qubit in chain u, qubit in chain v)`.
    pub edges: BTreeMap<(usize, usize), (usize, usize)>,
}

impl Embedding {
    pub fn num_qubits_used(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn max_chain_len(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Embedding file: `chain <v> <qubits…>` and `edge <u> <v> <qa> <qb>`,
    /// logical vertices 1-based, qubit ids as-is.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (v, chain) in self.chains.iter().enumerate() {
            out.push_str(&format!("chain {}", v + 1));
            for q in chain {
                out.push_str(&format!(" {q}"));
            }
            out.push('\n');
        }
        for (&(u, v), &(qa, qb)) in &self.edges {
            out.push_str(&format!("edge {} {} {qa} {qb}\n", u + 1, v + 1));
        }
        out
    }

    /// Builds the edge assignment for `g` from the chains alone, picking the
    /// lowest coupler between each pair of chains.
    pub fn assign_edges(&mut self, g: &LogicalGraph, c: &ChimeraGraph) {
        self.edges.clear();
        for &(u, v) in g.edges() {
            let (Some(cu), Some(cv)) = (self.chains.get(u), self.chains.get(v)) else { continue };
            let best = cu
                .iter()
                .flat_map(|&a| cv.iter().map(move |&b| (a, b)))
                .filter(|&(a, b)| c.has_coupler(a, b))
                .min_by_key(|&(a, b)| (a.min(b), a.max(b)));
            if let Some(pair) = best {
                self.edges.insert((u, v), pair);
            }
        }
    }
}

pub fn parse_embedding(text: &str) -> Result<Embedding, ChimeraError> {
    let mut chains: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ChimeraError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tok = content.split_whitespace();
        let kind = tok.next().expect("non-empty");
        let nums = tok
            .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad integer `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        match (kind, nums.as_slice()) {
            ("chain", [v, qubits @ ..]) if *v >= 1 => {
                let mut chain = qubits.to_vec();
                chain.sort_unstable();
                chain.dedup();
                if chains.insert(v - 1, chain).is_some() {
                    return Err(err(format!("duplicate chain for vertex {v}")));
                }
            }
            ("edge", &[u, v, qa, qb]) if u >= 1 && v >= 1 && u != v => {
                let key = if u < v { (u - 1, v - 1) } else { (v - 1, u - 1) };
                let pair = if u < v { (qa, qb) } else { (qb, qa) };
                edges.insert(key, pair);
            }
            _ => return Err(err(format!("unrecognized line `{content}`"))),
        }
    }
    // vertices must be numbered 1..=n with no gaps
    if let Some(missing) = chains.keys().enumerate().find_map(|(i, &v)| (i != v).then_some(i)) {
        return Err(ChimeraError::Parse { line: 0, message: format!("no chain for vertex {}", missing + 1) });
    }
    let n = chains.len();
    if let Some(&(_, v)) = edges.keys().find(|&&(_, v)| v >= n) {
        return Err(ChimeraError::Parse { line: 0, message: format!("edge mentions vertex {} without a chain", v + 1) });
    }
    Ok(Embedding { chains: chains.into_values().collect(), edges })
}

/// Checks every embedding invariant and reports all violations found.
pub fn validate_embedding(g: &LogicalGraph, c: &ChimeraGraph, e: &Embedding) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for v in 0..g.num_vertices() {
        let Some(chain) = e.chains.get(v) else {
            out.push(Violation::MissingChain { vertex: v });
            continue;
        };
        if chain.is_empty() {
            out.push(Violation::EmptyChain { vertex: v });
            continue;
        }
        for &q in chain {
            if q >= c.num_qubits() {
                out.push(Violation::QubitOutOfRange { vertex: v, qubit: q });
            } else if !c.is_operable(q) {
                out.push(Violation::InoperableQubit { vertex: v, qubit: q });
            }
            if let Some(&first) = owner.get(&q) {
                out.push(Violation::SharedQubit { qubit: q, first, second: v });
            } else {
                owner.insert(q, v);
            }
        }
        if !chain_connected(c, chain) {
            out.push(Violation::DisconnectedChain { vertex: v });
        }
    }
    for &(u, v) in g.edges() {
        match e.edges.get(&(u, v)) {
            None => out.push(Violation::UncoveredEdge { u, v }),
            Some(&(qa, qb)) => {
                let in_chain = |x: usize, q: usize| e.chains.get(x).is_some_and(|ch| ch.binary_search(&q).is_ok());
                if !(in_chain(u, qa) && in_chain(v, qb) && c.has_coupler(qa, qb)) {
                    out.push(Violation::BadEdgeCoupler { u, v, qa, qb });
                }
            }
        }
    }
    out
}

fn chain_connected(c: &ChimeraGraph, chain: &[usize]) -> bool {
    let members: BTreeSet<usize> = chain.iter().copied().filter(|&q| q < c.num_qubits()).collect();
    if members.len() != chain.len() {
        return false;
    }
    let Some(&start) = members.iter().next() else { return false };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(q) = queue.pop_front() {
        for &n in c.neighbors(q) {
            if members.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == members.len()
}

/// Randomized rip-up-and-reroute embedding. Chains may share qubits while
/// the search runs, at a cost that grows geometrically with the number of
/// chains on a qubit and with the round number. Each round removes every
/// chain in turn and reroutes it: the new root is the qubit minimizing the
/// summed weighted distance to the neighbouring chains, and the chain is
/// the union of the cheapest paths from that root. Once no qubit is
/// shared, a few tightening rounds keep any reroute that is overlap-free
/// and no longer than the chain it replaces. Tries are seeded
/// independently so the result depends only on `seed`.
pub fn find_embedding(
    g: &LogicalGraph,
    c: &ChimeraGraph,
    seed: u64,
    max_tries: usize,
) -> Result<Embedding, ChimeraError> {
    if g.num_vertices() == 0 {
        return Err(ChimeraError::EmptyGraph);
    }
    for attempt in 0..max_tries {
        let mut rng = rng::stream(seed, attempt as u64);
        if let Some(mut e) = Router::new(g, c).run(&mut rng) {
            e.assign_edges(g, c);
            if validate_embedding(g, c, &e).is_empty() {
                return Ok(e);
            }
        }
    }
    Err(ChimeraError::EmbeddingNotFound(max_tries))
}

const ROUTE_ROUNDS: usize = 100;
const TIGHTEN_ROUNDS: usize = 8;

/// Sharing penalty base for a reroute round: doubles every ten rounds.
fn penalty_base(round: usize) -> f64 {
    2f64.powf(1.0 + round as f64 / 10.0)
}

fn placement_order<R: Rng>(g: &LogicalGraph, rng: &mut R) -> Vec<usize> {
    let n = g.num_vertices();
    let mut tiebreak: Vec<usize> = (0..n).collect();
    tiebreak.shuffle(rng);
    let mut rank = vec![0; n];
    for (r, &v) in tiebreak.iter().enumerate() {
        rank[v] = r;
    }
    let key = |v: usize| (std::cmp::Reverse(g.neighbors(v).len()), rank[v]);
    let mut placed = vec![false; n];
    let mut touched = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let frontier = (0..n).filter(|&v| !placed[v] && touched[v]).min_by_key(|&v| key(v));
        let v = frontier
            .or_else(|| (0..n).filter(|&v| !placed[v]).min_by_key(|&v| key(v)))
            .expect("unplaced vertex remains");
        placed[v] = true;
        for &u in g.neighbors(v) {
            touched[u] = true;
        }
        order.push(v);
    }
    order
}

/// Min-heap entry for Dijkstra over qubits.
#[derive(PartialEq)]
struct Reach(f64, usize);

impl Eq for Reach {}

impl Ord for Reach {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Reach {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Router<'a> {
    g: &'a LogicalGraph,
    c: &'a ChimeraGraph,
    chains: Vec<Vec<usize>>,
    /// Number of chains on each qubit.
    usage: Vec<u32>,
}

impl<'a> Router<'a> {
    fn new(g: &'a LogicalGraph, c: &'a ChimeraGraph) -> Self {
        Router { g, c, chains: vec![Vec::new(); g.num_vertices()], usage: vec![0; c.num_qubits()] }
    }

    fn shared(&self) -> bool {
        self.usage.iter().any(|&u| u > 1)
    }

    fn rip(&mut self, v: usize) -> Vec<usize> {
        for &q in &self.chains[v] {
            self.usage[q] -= 1;
        }
        std::mem::take(&mut self.chains[v])
    }

    fn set(&mut self, v: usize, chain: Vec<usize>) {
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[v] = chain;
    }

    fn run<R: Rng>(mut self, rng: &mut R) -> Option<Embedding> {
        for v in placement_order(self.g, rng) {
            let chain = self.route(v, penalty_base(0), rng)?;
            self.set(v, chain);
        }
        let mut order: Vec<usize> = (0..self.g.num_vertices()).collect();
        for round in 1..=ROUTE_ROUNDS {
            if !self.shared() {
                break;
            }
            order.shuffle(rng);
            for &v in &order {
                self.rip(v);
                let chain = self.route(v, penalty_base(round), rng)?;
                self.set(v, chain);
            }
        }
        if self.shared() {
            return None;
        }
        // Overlaps are now prohibitively expensive; only shrink chains.
        let strict = self.c.num_qubits() as f64 + 1.0;
        for _ in 0..TIGHTEN_ROUNDS {
            order.shuffle(rng);
            for &v in &order {
                let old = self.rip(v);
                let new = self.route(v, strict, rng)?;
                let ok = new.len() <= old.len() && new.iter().all(|&q| self.usage[q] == 0);
                self.set(v, if ok { new } else { old });
            }
        }
        Some(Embedding { chains: self.chains, edges: BTreeMap::new() })
    }

    /// Cheapest-path distance from chain `u` to every qubit (the chain's own
    /// qubits at 0) under qubit weights `w`, with predecessors.
    fn distances(&self, u: usize, w: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let total = self.c.num_qubits();
        let mut dist = vec![f64::INFINITY; total];
        let mut parent = vec![usize::MAX; total];
        let mut heap = BinaryHeap::new();
        for &q in &self.chains[u] {
            dist[q] = 0.0;
            heap.push(Reach(0.0, q));
        }
        while let Some(Reach(d, q)) = heap.pop() {
            if d > dist[q] {
                continue;
            }
            for &n in self.c.neighbors(q) {
                let nd = d + w[n];
                if nd < dist[n] {
                    dist[n] = nd;
                    parent[n] = q;
                    heap.push(Reach(nd, n));
                }
            }
        }
        (dist, parent)
    }

    /// A new chain for the (ripped-up) vertex `v`.
    fn route<R: Rng>(&self, v: usize, base: f64, rng: &mut R) -> Option<Vec<usize>> {
        let total = self.c.num_qubits();
        let w: Vec<f64> = (0..total)
            .map(|q| if self.c.is_operable(q) { base.powi(self.usage[q].min(60) as i32) } else { f64::INFINITY })
            .collect();
        let placed = self.g.neighbors(v).iter().copied().filter(|&u| !self.chains[u].is_empty());
        let searches: Vec<(Vec<f64>, Vec<usize>)> = placed.map(|u| self.distances(u, &w)).collect();
        // The root's weight is charged once per neighbour, so a root on a
        // crowded qubit gets more expensive the more chains it must reach.
        let cost = |q: usize| -> f64 {
            if searches.is_empty() {
                w[q]
            } else {
                searches.iter().map(|(d, _)| d[q].max(w[q])).sum()
            }
        };
        let costs: Vec<f64> = (0..total).map(cost).collect();
        let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return None;
        }
        let pool: Vec<usize> = (0..total).filter(|&q| costs[q] <= best * (1.0 + 1e-12)).collect();
        let root = *pool.choose(rng)?;
        let mut chain = BTreeSet::from([root]);
        for (dist, parent) in &searches {
            let mut q = root;
            while dist[q] > 0.0 {
                q = parent[q];
                if dist[q] > 0.0 {
                    chain.insert(q);
                }
            }
        }
        Some(chain.into_iter().collect())
    }
}

/// Physical model produced by [`embed_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedIsing {
    /// Indexed by qubit id.
    pub physical: IsingModel,
    pub logical: IsingModel,
    pub chain_strength: f64,
    pub embedding: Embedding,
    /// Number of `-M` couplers placed inside chains.
    pub chain_couplers: usize,
}

/// Maps logical weights onto the hardware: every coupler inside a chain gets
/// `-M`, each field `h_i` is split evenly across its chain, and each `J_ij`
/// sits on the edge's assigned coupler. The logical offset is carried over.
pub fn embed_weights(
    m: &IsingModel,
    c: &ChimeraGraph,
    e: &Embedding,
    chain_strength: f64,
) -> Result<EmbeddedIsing, ChimeraError> {
    if !(chain_strength > 0.0 && chain_strength.is_finite()) {
        return Err(ChimeraError::BadChainStrength(chain_strength));
    }
    let g = LogicalGraph::from_ising(m);
    let violations = validate_embedding(&g, c, e);
    if !violations.is_empty() {
        return Err(ChimeraError::InvalidEmbedding(violations));
    }
    let mut physical = IsingModel::new(c.num_qubits());
    physical.offset = m.offset;
    let mut chain_couplers = 0;
    for (v, chain) in e.chains.iter().enumerate().take(m.num_vars()) {
        let share = m.field(v) / chain.len() as f64;
        for (i, &a) in chain.iter().enumerate() {
            physical.add_field(a, share);
            for &b in &chain[i + 1..] {
                if c.has_coupler(a, b) {
                    physical.add_coupler(a, b, -chain_strength);
                    chain_couplers += 1;
                }
            }
        }
    }
    for (&(u, v), &j) in m.couplers() {
        let (qa, qb) = e.edges[&(u, v)];
        physical.add_coupler(qa, qb, j);
    }
    Ok(EmbeddedIsing { physical, logical: m.clone(), chain_strength, embedding: e.clone(), chain_couplers })
}

/// `max(1, max_i(|h_i| + Σ_j |J_ij|)) + 1`. Exceeding the largest local
/// field means flipping any broken piece of a chain into line with the rest
/// always lowers the energy.
pub fn default_chain_strength(m: &IsingModel) -> f64 {
    let mut local = vec![0.0f64; m.num_vars()];
    for (&i, &h) in m.fields() {
        local[i] += h.abs();
    }
    for (&(i, j), &jv) in m.couplers() {
        local[i] += jv.abs();
        local[j] += jv.abs();
    }
    local.into_iter().fold(1.0, f64::max) + 1.0
}

/// Majority vote per chain (ties resolve to `+1`); the flag marks chains
/// whose qubits disagree.
pub fn unembed(sample: &[i8], e: &Embedding) -> (Vec<i8>, Vec<bool>) {
    e.chains
        .iter()
        .map(|chain| {
            let sum: i64 = chain.iter().map(|&q| i64::from(sample[q])).sum();
            let broken = sum.unsigned_abs() as usize != chain.len();
            (if sum >= 0 { 1 } else { -1 }, broken)
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3_table_embedding() -> Embedding {
        // q1, q5, {q2, q6} in 1-based cell numbering.
        Embedding {
            chains: vec![vec![0], vec![4], vec![1, 5]],
            edges: BTreeMap::from([((0, 1), (0, 4)), ((0, 2), (0, 5)), ((1, 2), (4, 1))]),
        }
    }

    #[test]
    fn single_cell_is_k44() {
        let c = build_chimera(1, 1, 4, []).unwrap();
        assert_eq!(c.num_qubits(), 8);
        assert_eq!(c.couplers().len(), 16);
        for a in 0..4 {
            for b in 4..8 {
                assert!(c.has_coupler(a, b));
            }
            assert!(!c.has_coupler(a, (a + 1) % 4));
        }
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(build_chimera(4, 4, 4, []).unwrap().num_qubits(), 128);
        assert_eq!(build_chimera(8, 8, 4, []).unwrap().num_qubits(), 512);
    }

    #[test]
    fn coupler_count_closed_form() {
        for m in 1..=4 {
            for n in 1..=4 {
                for l in 1..=4 {
                    let c = build_chimera(m, n, l, []).unwrap();
                    let expected = m * n * l * l + (m - 1) * n * l + m * (n - 1) * l;
                    assert_eq!(c.couplers().len(), expected, "({m},{n},{l})");
                }
            }
        }
    }

    #[test]
    fn interior_degree_and_coords() {
        let c = build_chimera(3, 3, 4, []).unwrap();
        for side in 0..2 {
            for k in 0..4 {
                let q = c.qubit(1, 1, side, k);
                assert_eq!(c.neighbors(q).len(), 6);
                assert_eq!(c.coords(q), (1, 1, side, k));
            }
        }
        // left shore couples vertically, right shore horizontally
        assert!(c.has_coupler(c.qubit(0, 1, 0, 2), c.qubit(1, 1, 0, 2)));
        assert!(c.has_coupler(c.qubit(1, 0, 1, 3), c.qubit(1, 1, 1, 3)));
        assert!(!c.has_coupler(c.qubit(0, 1, 1, 2), c.qubit(1, 1, 1, 2)));
    }

    #[test]
    fn inoperable_qubits() {
        assert!(matches!(build_chimera(1, 1, 4, [8]), Err(ChimeraError::QubitOutOfRange { qubit: 8, total: 8 })));
        assert!(matches!(build_chimera(0, 1, 4, []), Err(ChimeraError::BadDimensions(..))));
        let c = build_chimera(1, 1, 4, [0]).unwrap();
        assert_eq!(c.couplers().len(), 12);
        assert!(c.neighbors(0).is_empty());
    }

    #[test]
    fn table_k3_embedding_validates() {
        let c = build_chimera(1, 1, 4, []).unwrap();
        assert!(validate_embedding(&LogicalGraph::complete(3), &c, &k3_table_embedding()).is_empty());
    }

    #[test]
    fn detects_split_chain_and_uncovered_edge() {
        let c = build_chimera(1, 1, 4, []).unwrap();
        let g = LogicalGraph::complete(3);
        let mut split = k3_table_embedding();
        split.chains[2] = vec![1, 2];
        split.edges.remove(&(1, 2));
        let v = validate_embedding(&g, &c, &split);
        assert!(v.contains(&Violation::DisconnectedChain { vertex: 2 }));
        assert!(v.contains(&Violation::UncoveredEdge { u: 1, v: 2 }));
        // edge (0,2) now points at qubit 5, which left the chain
        assert!(v.contains(&Violation::BadEdgeCoupler { u: 0, v: 2, qa: 0, qb: 5 }));
    }

    #[test]
    fn detects_overlap_and_inoperable() {
        let c = build_chimera(1, 1, 4, [4]).unwrap();
        let e = Embedding { chains: vec![vec![4], vec![4]], edges: BTreeMap::new() };
        let v = validate_embedding(&LogicalGraph::new(2, []), &c, &e);
        assert!(v.contains(&Violation::InoperableQubit { vertex: 0, qubit: 4 }));
        assert!(v.contains(&Violation::SharedQubit { qubit: 4, first: 0, second: 1 }));
        let missing = validate_embedding(&LogicalGraph::new(2, []), &c, &Embedding::default());
        assert_eq!(missing.len(), 2);
    }

    #[test]
    fn complete_graphs_fit_one_cell() {
        let c = build_chimera(1, 1, 4, []).unwrap();
        for k in 1..=5 {
            let g = LogicalGraph::complete(k);
            let e = find_embedding(&g, &c, 11, 200).unwrap_or_else(|err| panic!("K{k}: {err}"));
            assert!(validate_embedding(&g, &c, &e).is_empty());
            assert!(e.num_qubits_used() <= 8);
        }
        let e = find_embedding(&LogicalGraph::complete(3), &c, 3, 50).unwrap();
        assert!(e.num_qubits_used() <= 4);
        assert_eq!(e.max_chain_len(), 2);
    }

    #[test]
    fn single_vertex_embedding() {
        let c = build_chimera(1, 1, 4, [0, 1]).unwrap();
        let e = find_embedding(&LogicalGraph::new(1, []), &c, 0, 1).unwrap();
        assert_eq!(e.chains.len(), 1);
        assert_eq!(e.chains[0].len(), 1);
        assert!(c.is_operable(e.chains[0][0]));
    }

    #[test]
    fn embedding_is_deterministic_per_seed() {
        let c = build_chimera(2, 2, 4, []).unwrap();
        let g = LogicalGraph::complete(6);
        assert_eq!(find_embedding(&g, &c, 5, 50).unwrap(), find_embedding(&g, &c, 5, 50).unwrap());
    }

    #[test]
    fn impossible_embedding_fails() {
        let c = build_chimera(1, 1, 2, []).unwrap();
        assert_eq!(
            find_embedding(&LogicalGraph::complete(5), &c, 0, 10),
            Err(ChimeraError::EmbeddingNotFound(10))
        );
        assert_eq!(find_embedding(&LogicalGraph::new(0, []), &c, 0, 10), Err(ChimeraError::EmptyGraph));
    }

    #[test]
    fn k3_weights_follow_the_procedure() {
        let c = build_chimera(1, 1, 4, []).unwrap();
        let mut m = IsingModel::new(3);
        m.add_field(0, 1.0);
        m.add_field(1, -2.0);
        m.add_field(2, 3.0);
        m.add_coupler(0, 1, 0.5);
        m.add_coupler(0, 2, -0.25);
        m.add_coupler(1, 2, 0.75);
        let em = embed_weights(&m, &c, &k3_table_embedding(), 4.0).unwrap();
        let p = &em.physical;
        assert_eq!((p.field(0), p.field(4), p.field(1), p.field(5)), (1.0, -2.0, 1.5, 1.5));
        assert_eq!(p.coupler(0, 4), 0.5);
        assert_eq!(p.coupler(0, 5), -0.25);
        assert_eq!(p.coupler(1, 4), 0.75);
        assert_eq!(p.coupler(1, 5), -4.0);
        assert_eq!(p.couplers().len(), 4);
        assert_eq!(em.chain_couplers, 1);
    }

    #[test]
    fn identity_embedding_reproduces_model() {
        let c = build_chimera(1, 1, 4, []).unwrap();
        let mut m = IsingModel::new(2);
        m.add_field(0, 1.0);
        m.add_coupler(0, 1, -1.0);
        let e = Embedding { chains: vec![vec![0], vec![4]], edges: BTreeMap::from([((0, 1), (0, 4))]) };
        let em = embed_weights(&m, &c, &e, 3.0).unwrap();
        assert_eq!(em.chain_couplers, 0);
        assert_eq!(em.physical.field(0), 1.0);
        assert_eq!(em.physical.coupler(0, 4), -1.0);
        assert!(matches!(embed_weights(&m, &c, &e, 0.0), Err(ChimeraError::BadChainStrength(_))));
        assert!(matches!(
            embed_weights(&m, &c, &Embedding::default(), 1.0),
            Err(ChimeraError::InvalidEmbedding(_))
        ));
    }

    #[test]
    fn chain_strength_defaults() {
        assert_eq!(default_chain_strength(&IsingModel::new(3)), 2.0);
        let mut k3 = IsingModel::new(3);
        for v in 0..3 {
            k3.add_field(v, 1.0);
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            k3.add_coupler(a, b, 1.0);
        }
        assert_eq!(default_chain_strength(&k3), 4.0);
    }

    #[test]
    fn majority_vote() {
        let e = Embedding { chains: vec![vec![1, 5], vec![0, 2, 3], vec![4]], edges: BTreeMap::new() };
        let (s, broken) = unembed(&[1, 1, -1, -1, -1, 1], &e);
        assert_eq!(s, vec![1, -1, -1]);
        assert_eq!(broken, vec![false, true, false]);
        let tie = Embedding { chains: vec![vec![0, 1]], edges: BTreeMap::new() };
        assert_eq!(unembed(&[1, -1], &tie), (vec![1], vec![true]));
    }

    #[test]
    fn embedding_file_roundtrip() {
        let e = k3_table_embedding();
        let text = e.render();
        assert_eq!(text, "chain 1 0\nchain 2 4\nchain 3 1 5\nedge 1 2 0 4\nedge 1 3 0 5\nedge 2 3 4 1\n");
        assert_eq!(parse_embedding(&text).unwrap(), e);
        let swapped = "chain 1\nchain 2 1\nchain 3 4\nedge 3 2 4 1";
        assert_eq!(parse_embedding(swapped).unwrap().edges[&(1, 2)], (1, 4));
        assert!(parse_embedding("edge 3 2 1 4").is_err());
        assert!(parse_embedding("chain 1 0\nchain 18446744073709551615 1").is_err());
        assert!(parse_embedding("chain 0 1").is_err());
        assert!(parse_embedding("chain 1 1\nchain 1 2").is_err());
        assert!(parse_embedding("edge 1 2 3").is_err());
        assert_eq!(parse_qubit_list("1 2 # x\n 7").unwrap(), vec![1, 2, 7]);
        assert!(parse_qubit_list("a").is_err());
    }
}
