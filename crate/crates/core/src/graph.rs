//! Immutable probability-annotated directed graphs.
//!
//! Adjacency is stored twice in CSR form, once per direction, with the edge
//! probability duplicated on both sides. Reverse traversal dominates RAPG
//! sampling, so the reverse arrays are kept self-contained.

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub type NodeId = u32;

/// Whether each input line describes one arc or an undirected pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directedness {
    Directed,
    Undirected,
}

/// A set of node ids over `[0, n)` with O(1) membership and insertion-ordered
/// iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    members: Vec<NodeId>,
    flags: Vec<bool>,
}

impl NodeSet {
    pub fn new(n: usize) -> Self {
        Self {
            members: Vec::new(),
            flags: vec![false; n],
        }
    }

    /// Builds a set from `nodes`, rejecting ids `>= n`. Duplicates are ignored.
    pub fn from_nodes(n: usize, nodes: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let mut set = Self::new(n);
        for u in nodes {
            if u as usize >= n {
                return Err(Error::Domain(format!("node {u} outside [0, {n})")));
            }
            set.insert(u);
        }
        Ok(set)
    }

    /// Inserts `u`; returns false when it was already present.
    ///
    /// Panics if `u >= capacity()`.
    pub fn insert(&mut self, u: NodeId) -> bool {
        let slot = &mut self.flags[u as usize];
        if *slot {
            return false;
        }
        *slot = true;
        self.members.push(u);
        true
    }

    #[inline]
    pub fn contains(&self, u: NodeId) -> bool {
        self.flags.get(u as usize).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Universe size `n`.
    pub fn capacity(&self) -> usize {
        self.flags.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.members
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().all(|u| !large.contains(u))
    }

    pub fn to_sorted_vec(&self) -> Vec<NodeId> {
        let mut v = self.members.clone();
        v.sort_unstable();
        v
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.members.serialize(serializer)
    }
}

/// Directed graph with per-edge activation probabilities.
///
/// Edges are identified by their position in the forward adjacency arrays,
/// which is stable for the lifetime of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    fwd_offsets: Vec<usize>,
    fwd_targets: Vec<NodeId>,
    fwd_probs: Vec<f64>,
    rev_offsets: Vec<usize>,
    rev_sources: Vec<NodeId>,
    rev_probs: Vec<f64>,
    probabilities_assigned: bool,
}

impl DirectedGraph {
    /// Builds a graph from raw arcs. Self-loops are dropped and duplicate arcs
    /// are merged, keeping the largest probability.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let mut arcs = Vec::with_capacity(edges.len());
        for &(u, v, p) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Domain(format!("edge ({u}, {v}) outside [0, {n})")));
            }
            check_probability(p)?;
            if u != v {
                arcs.push((u, v, p));
            }
        }
        Ok(Self::build(n, arcs, true))
    }

    fn build(n: usize, mut arcs: Vec<(NodeId, NodeId, f64)>, probabilities_assigned: bool) -> Self {
        arcs.sort_unstable_by_key(|a| (a.0, a.1));
        arcs.dedup_by(|later, kept| {
            if later.0 == kept.0 && later.1 == kept.1 {
                kept.2 = kept.2.max(later.2);
                true
            } else {
                false
            }
        });

        let m = arcs.len();
        let mut fwd_offsets = vec![0usize; n + 1];
        let mut rev_offsets = vec![0usize; n + 1];
        for &(u, v, _) in &arcs {
            fwd_offsets[u as usize + 1] += 1;
            rev_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            fwd_offsets[i + 1] += fwd_offsets[i];
            rev_offsets[i + 1] += rev_offsets[i];
        }

        let mut fwd_targets = Vec::with_capacity(m);
        let mut fwd_probs = Vec::with_capacity(m);
        for &(_, v, p) in &arcs {
            fwd_targets.push(v);
            fwd_probs.push(p);
        }

        // arcs are sorted by source, so each reverse list comes out sorted too
        let mut rev_sources = vec![0; m];
        let mut rev_probs = vec![0.0; m];
        let mut cursor = rev_offsets.clone();
        for &(u, v, p) in &arcs {
            let slot = &mut cursor[v as usize];
            rev_sources[*slot] = u;
            rev_probs[*slot] = p;
            *slot += 1;
        }

        Self {
            n,
            fwd_offsets,
            fwd_targets,
            fwd_probs,
            rev_offsets,
            rev_sources,
            rev_probs,
            probabilities_assigned,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.fwd_targets.len()
    }

    /// False when the source text had arcs without a probability column.
    pub fn probabilities_assigned(&self) -> bool {
        self.probabilities_assigned
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.fwd_offsets[u + 1] - self.fwd_offsets[u]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.rev_offsets[v + 1] - self.rev_offsets[v]
    }

    /// Range of edge ids leaving `u`.
    #[inline]
    pub fn out_edge_range(&self, u: NodeId) -> std::ops::Range<usize> {
        self.fwd_offsets[u as usize]..self.fwd_offsets[u as usize + 1]
    }

    #[inline]
    pub fn edge_target(&self, e: usize) -> NodeId {
        self.fwd_targets[e]
    }

    #[inline]
    pub fn edge_probability(&self, e: usize) -> f64 {
        self.fwd_probs[e]
    }

    /// `(target, probability)` pairs of arcs leaving `u`.
    pub fn out_neighbors(&self, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.out_edge_range(u);
        self.fwd_targets[r.clone()]
            .iter()
            .copied()
            .zip(self.fwd_probs[r].iter().copied())
    }

    /// `(source, probability)` pairs of arcs entering `v`.
    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> (&[NodeId], &[f64]) {
        let r = self.rev_offsets[v as usize]..self.rev_offsets[v as usize + 1];
        (&self.rev_sources[r.clone()], &self.rev_probs[r])
    }

    /// All arcs as `(u, v, p)`, ordered by `(u, v)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.n as NodeId).flat_map(move |u| self.out_neighbors(u).map(move |(v, p)| (u, v, p)))
    }

    /// Reverse adjacency flattened to `(u, v, p)` triples, ordered by `(u, v)`.
    pub fn reverse_edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out: Vec<_> = (0..self.n as NodeId)
            .flat_map(|v| {
                let (src, probs) = self.in_neighbors(v);
                src.iter().zip(probs).map(move |(&u, &p)| (u, v, p))
            })
            .collect();
        out.sort_unstable_by_key(|a| (a.0, a.1));
        out
    }

    /// Weighted-cascade probabilities: every arc into `v` gets `1 / indeg(v)`.
    pub fn with_weighted_ic(&self) -> DirectedGraph {
        self.map_probabilities(|_, v| 1.0 / self.in_degree(v) as f64)
    }

    pub fn with_uniform_probability(&self, p: f64) -> Result<DirectedGraph> {
        check_probability(p)?;
        Ok(self.map_probabilities(|_, _| p))
    }

    fn map_probabilities(&self, f: impl Fn(NodeId, NodeId) -> f64) -> DirectedGraph {
        let arcs: Vec<_> = self.edges().map(|(u, v, _)| (u, v, f(u, v))).collect();
        Self::build(self.n, arcs, true)
    }

    /// Number of arcs whose target lies outside `s_a`.
    pub fn restricted_edge_count(&self, s_a: &NodeSet) -> usize {
        let into_a: usize = s_a.iter().map(|v| self.in_degree(v)).sum();
        self.edge_count() - into_a
    }

    /// Writes `u v p` lines. Probabilities use the shortest round-trip
    /// representation, so reloading reproduces the graph exactly.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for (u, v, p) in self.edges() {
            writeln!(w, "{u} {v} {p}")?;
        }
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

/// Parses a whitespace-separated edge list. `#` lines and blank lines are
/// skipped; `n` is one past the largest id seen.
pub fn load_edge_list<R: BufRead>(reader: R, directedness: Directedness) -> Result<DirectedGraph> {
    let mut arcs = Vec::new();
    let mut max_id: Option<NodeId> = None;
    let mut all_weighted = true;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `u v [p]`, got {} fields", fields.len()),
            });
        }
        let parse_id = |s: &str| -> Result<NodeId> {
            s.parse::<NodeId>()
                .ok()
                .filter(|&id| id < NodeId::MAX)
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: format!("invalid node id `{s}`"),
                })
        };
        let u = parse_id(fields[0])?;
        let v = parse_id(fields[1])?;
        let p = match fields.get(2) {
            Some(s) => {
                let p: f64 = s.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid probability `{s}`"),
                })?;
                check_probability(p).map_err(|_| {
                    Error::Domain(format!("line {lineno}: probability {p} outside [0, 1]"))
                })?;
                p
            }
            None => {
                all_weighted = false;
                0.0
            }
        };
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        if u == v {
            continue;
        }
        arcs.push((u, v, p));
        if directedness == Directedness::Undirected {
            arcs.push((v, u, p));
        }
    }

    let n = max_id.map_or(0, |m| m as usize + 1);
    Ok(DirectedGraph::build(n, arcs, all_weighted))
}

/// Convenience wrapper over [`load_edge_list`] for in-memory text.
pub fn parse_edge_list(text: &str, directedness: Directedness) -> Result<DirectedGraph> {
    load_edge_list(text.as_bytes(), directedness)
}

/// Random graph families used as desk-scale stand-ins for real networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// Each ordered pair `(u, v)`, `u != v`, is an arc independently with this probability.
    ErdosRenyi { p_edge: f64 },
    /// Every node points at `k_out` distinct uniformly chosen other nodes.
    RandomKOut { k_out: usize },
}

/// Generates a graph with probabilities left at zero. Deterministic in
/// `(kind, n, seed)`.
pub fn generate_synthetic(kind: SyntheticKind, n: usize, seed: u64) -> Result<DirectedGraph> {
    if n == 0 {
        return Err(Error::Domain("synthetic graphs need n >= 1".into()));
    }
    if n > NodeId::MAX as usize {
        return Err(Error::Domain(format!("n = {n} exceeds the node id range")));
    }
    let mut rng = RngStream::new(seed, 0).rng();
    let mut arcs = Vec::new();
    let other = |u: usize, j: usize| -> NodeId { (if j < u { j } else { j + 1 }) as NodeId };

    match kind {
        SyntheticKind::ErdosRenyi { p_edge } => {
            if !(0.0..=1.0).contains(&p_edge) {
                return Err(Error::Domain(format!("p_edge {p_edge} outside [0, 1]")));
            }
            let slots = (n as u64) * (n as u64 - 1);
            if p_edge > 0.0 && slots > 0 {
                // geometric skipping over the n(n-1) ordered pairs
                let log_q = (1.0 - p_edge).ln();
                let mut idx: u64 = 0;
                loop {
                    if p_edge < 1.0 {
                        let r: f64 = rng.gen();
                        let skip = ((1.0 - r).ln() / log_q).floor();
                        if skip >= (slots - idx) as f64 {
                            break;
                        }
                        idx += skip as u64;
                    }
                    if idx >= slots {
                        break;
                    }
                    let u = (idx / (n as u64 - 1)) as usize;
                    let j = (idx % (n as u64 - 1)) as usize;
                    arcs.push((u as NodeId, other(u, j), 0.0));
                    idx += 1;
                }
            }
        }
        SyntheticKind::RandomKOut { k_out } => {
            if k_out > n - 1 {
                return Err(Error::Domain(format!(
                    "k_out = {k_out} needs at least {} nodes",
                    k_out + 1
                )));
            }
            for u in 0..n {
                let mut picks = index::sample(&mut rng, n - 1, k_out).into_vec();
                picks.sort_unstable();
                arcs.extend(picks.into_iter().map(|j| (u as NodeId, other(u, j), 0.0)));
            }
        }
    }
    Ok(DirectedGraph::build(n, arcs, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loads_simple_path() {
        let g = parse_edge_list("0 1\n1 2", Directedness::Directed).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(!g.probabilities_assigned());
    }

    #[test]
    fn duplicate_arcs_keep_max_probability() {
        let g = parse_edge_list("0 1 0.5\n0 1 0.7", Directedness::Directed).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 0.7)]);
        assert!(g.probabilities_assigned());
    }

    #[test]
    fn undirected_lines_expand_to_two_arcs() {
        let g = parse_edge_list("0 1", Directedness::Undirected).unwrap();
        assert_eq!(g.edge_count(), 2);
        let arcs: Vec<_> = g.edges().map(|(u, v, _)| (u, v)).collect();
        assert_eq!(arcs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn comments_blank_lines_and_self_loops() {
        let g = parse_edge_list("# header\n\n3 3\n0 2 1\n", Directedness::Directed).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_edge_list("0 1\n0 x\n", Directedness::Directed).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_edge_list("0 1 2 3", Directedness::Directed).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn probability_out_of_range_is_domain_error() {
        let err = parse_edge_list("0 1 1.5", Directedness::Directed).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        let err = parse_edge_list("0 1 -0.1", Directedness::Directed).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn weighted_ic_examples() {
        // node 4 has in-degree 4, node 5 in-degree 1
        let g = parse_edge_list("0 4\n1 4\n2 4\n3 4\n0 5", Directedness::Directed)
            .unwrap()
            .with_weighted_ic();
        for (_, v, p) in g.edges() {
            match v {
                4 => assert_eq!(p, 0.25),
                5 => assert_eq!(p, 1.0),
                _ => unreachable!(),
            }
        }
        // star: five leaves pointing at the center
        let star = parse_edge_list("1 0\n2 0\n3 0\n4 0\n5 0", Directedness::Directed)
            .unwrap()
            .with_weighted_ic();
        assert!(star.edges().all(|(_, _, p)| p == 0.2));
    }

    #[test]
    fn restricted_edge_count_examples() {
        let g = parse_edge_list("0 1\n1 2", Directedness::Directed).unwrap();
        let n = g.node_count();
        assert_eq!(g.restricted_edge_count(&NodeSet::new(n)), 2);
        let all = NodeSet::from_nodes(n, 0..3).unwrap();
        assert_eq!(g.restricted_edge_count(&all), 0);
        let one = NodeSet::from_nodes(n, [1]).unwrap();
        assert_eq!(g.restricted_edge_count(&one), 1);
    }

    #[test]
    fn synthetic_examples() {
        let g = generate_synthetic(SyntheticKind::ErdosRenyi { p_edge: 0.9 }, 1, 3).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = generate_synthetic(SyntheticKind::RandomKOut { k_out: 2 }, 10, 3).unwrap();
        assert_eq!(g.edge_count(), 20);
        assert!(g.edges().all(|(u, v, _)| u != v));
        let again = generate_synthetic(SyntheticKind::RandomKOut { k_out: 2 }, 10, 3).unwrap();
        assert_eq!(g, again);
        let full = generate_synthetic(SyntheticKind::ErdosRenyi { p_edge: 1.0 }, 5, 3).unwrap();
        assert_eq!(full.edge_count(), 20);
        let empty = generate_synthetic(SyntheticKind::ErdosRenyi { p_edge: 0.0 }, 5, 3).unwrap();
        assert_eq!(empty.edge_count(), 0);
    }

    #[test]
    fn synthetic_rejects_bad_params() {
        assert!(generate_synthetic(SyntheticKind::ErdosRenyi { p_edge: 1.1 }, 5, 0).is_err());
        assert!(generate_synthetic(SyntheticKind::RandomKOut { k_out: 5 }, 5, 0).is_err());
        assert!(generate_synthetic(SyntheticKind::RandomKOut { k_out: 1 }, 0, 0).is_err());
    }

    #[test]
    fn erdos_renyi_density_is_close() {
        let g = generate_synthetic(SyntheticKind::ErdosRenyi { p_edge: 0.05 }, 400, 11).unwrap();
        let expected = 0.05 * 400.0 * 399.0;
        let sd = (expected * 0.95f64).sqrt();
        assert!((g.edge_count() as f64 - expected).abs() < 5.0 * sd);
        assert!(g.edges().all(|(u, v, _)| u != v));
    }

    #[test]
    fn node_set_basics() {
        let mut s = NodeSet::new(5);
        assert!(s.insert(3));
        assert!(s.insert(1));
        assert!(!s.insert(3));
        assert_eq!(s.as_slice(), &[3, 1]);
        assert!(s.contains(1) && !s.contains(0) && !s.contains(99));
        assert!(NodeSet::from_nodes(5, [5]).is_err());
        let t = NodeSet::from_nodes(5, [0, 2]).unwrap();
        assert!(s.is_disjoint(&t));
    }

    fn arb_edges() -> impl Strategy<Value = (usize, Vec<(NodeId, NodeId, f64)>)> {
        (1usize..12).prop_flat_map(|n| {
            let edge = (0..n as NodeId, 0..n as NodeId, 0.0f64..=1.0);
            (Just(n), prop::collection::vec(edge, 0..40))
        })
    }

    proptest! {
        #[test]
        fn adjacency_directions_agree((n, edges) in arb_edges()) {
            let g = DirectedGraph::from_edges(n, &edges).unwrap();
            let fwd: Vec<_> = g.edges().collect();
            prop_assert_eq!(fwd, g.reverse_edges());
            let mut pairs: Vec<_> = g.edges().map(|(u, v, _)| (u, v)).collect();
            pairs.dedup();
            prop_assert_eq!(pairs.len(), g.edge_count());
        }

        #[test]
        fn edge_list_round_trip((n, edges) in arb_edges()) {
            let g = DirectedGraph::from_edges(n, &edges).unwrap();
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf).unwrap();
            let back = load_edge_list(&buf[..], Directedness::Directed).unwrap();
            prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
        }

        #[test]
        fn weighted_ic_sums_to_one((n, edges) in arb_edges()) {
            let g = DirectedGraph::from_edges(n, &edges).unwrap().with_weighted_ic();
            for v in 0..n as NodeId {
                let (_, probs) = g.in_neighbors(v);
                if !probs.is_empty() {
                    let s: f64 = probs.iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
