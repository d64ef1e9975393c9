//! Random reverse accessible pointed graphs (RAPGs).
//!
//! An instance is grown by a randomized reverse BFS from a uniformly chosen
//! root. Each examined arc gets exactly one coin flip, so the instance is the
//! set of shortest paths to the root inside one live-edge draw, truncated at
//! the first layer that contains an `S_A` node.

use rand::Rng;

use crate::graph::{DirectedGraph, NodeId, NodeSet};
use crate::model::{fully_covers, ModelKind};
use crate::rng::RngStream;

/// Distance sentinel for "no `S_A` node reached". Strictly larger than any
/// hop count in a graph with fewer than `u32::MAX` nodes.
pub const UNREACHED: u32 = u32::MAX;

const UNSEEN: u32 = u32::MAX;

/// One sampled RAPG.
///
/// Nodes are stored in discovery order, which is also nondecreasing distance
/// to the root; local index 0 is the root. `in_neighbors(i)` lists the local
/// indices `j` with a live arc `nodes[j] -> nodes[i]` and `dist(j) = dist(i) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RapgInstance {
    nodes: Vec<NodeId>,
    dist: Vec<u32>,
    in_offsets: Vec<u32>,
    in_nbrs: Vec<u32>,
    seeds_a: Vec<u32>,
    d_a: u32,
    coin_count: u32,
}

impl RapgInstance {
    pub fn root(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, local: usize) -> NodeId {
        self.nodes[local]
    }

    #[inline]
    pub fn dist(&self, local: usize) -> u32 {
        self.dist[local]
    }

    /// Hop distance from `S_A` to the root, `None` when no `S_A` node was reached.
    pub fn d_a(&self) -> Option<u32> {
        (self.d_a != UNREACHED).then_some(self.d_a)
    }

    /// Raw distance with [`UNREACHED`] as the infinity sentinel.
    #[inline]
    pub fn d_a_raw(&self) -> u32 {
        self.d_a
    }

    /// Local indices of `S_A` members; all of them sit at distance `d_a`.
    pub fn seeds_a(&self) -> &[u32] {
        &self.seeds_a
    }

    #[inline]
    pub fn is_seed_a(&self, local: usize) -> bool {
        // S_A members are only ever discovered in the last layer
        self.dist[local] == self.d_a && self.seeds_a.contains(&(local as u32))
    }

    #[inline]
    pub fn in_neighbors(&self, local: usize) -> &[u32] {
        let lo = self.in_offsets[local] as usize;
        let hi = self.in_offsets[local + 1] as usize;
        &self.in_nbrs[lo..hi]
    }

    /// Number of random numbers drawn for arcs while growing the instance.
    pub fn coin_count(&self) -> u32 {
        self.coin_count
    }

    pub fn edge_count(&self) -> usize {
        self.in_nbrs.len()
    }

    /// Recorded shortest-path arcs as global `(u, v)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.len()).flat_map(move |i| {
            self.in_neighbors(i)
                .iter()
                .map(move |&j| (self.nodes[j as usize], self.nodes[i]))
        })
    }

    /// Linear search for the local index of global node `u`.
    pub fn local_index(&self, u: NodeId) -> Option<usize> {
        self.nodes.iter().position(|&x| x == u)
    }

    /// Bytes held by the node and edge slots.
    pub fn memory_bytes(&self) -> usize {
        use std::mem::size_of;
        self.nodes.len() * (2 * size_of::<u32>() + size_of::<u32>())
            + self.in_nbrs.len() * size_of::<u32>()
            + self.seeds_a.len() * size_of::<u32>()
            + size_of::<Self>()
    }

    /// Text dump, one `u v` arc per line after a header comment.
    pub fn to_edge_list_text(&self) -> String {
        let mut out = format!(
            "# root {} d_a {} nodes {:?}\n",
            self.root(),
            self.d_a()
                .map_or_else(|| "inf".to_string(), |d| d.to_string()),
            self.nodes
        );
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Reusable sampler; holds an `n`-sized scratch map so repeated sampling does
/// not allocate per node of the graph.
pub struct RapgSampler<'a> {
    graph: &'a DirectedGraph,
    s_a: &'a NodeSet,
    local: Vec<u32>,
}

impl<'a> RapgSampler<'a> {
    pub fn new(graph: &'a DirectedGraph, s_a: &'a NodeSet) -> Self {
        Self {
            graph,
            s_a,
            local: vec![UNSEEN; graph.node_count()],
        }
    }

    /// Samples an instance with a uniformly drawn root.
    pub fn sample(&mut self, stream: RngStream) -> RapgInstance {
        let mut rng = stream.rng();
        let root = rng.gen_range(0..self.graph.node_count()) as NodeId;
        self.grow(root, &mut rng)
    }

    /// Samples an instance with a fixed root, drawing coins from `stream`.
    pub fn sample_rooted(&mut self, root: NodeId, stream: RngStream) -> RapgInstance {
        let mut rng = stream.rng();
        self.grow(root, &mut rng)
    }

    fn grow<R: Rng>(&mut self, root: NodeId, rng: &mut R) -> RapgInstance {
        let graph = self.graph;
        let mut nodes = vec![root];
        let mut dist = vec![0u32];
        let mut in_offsets = vec![0u32];
        let mut in_nbrs = Vec::new();
        let mut seeds_a = Vec::new();
        let mut coins = 0u32;
        self.local[root as usize] = 0;

        let mut d_a = UNREACHED;
        if self.s_a.contains(root) {
            seeds_a.push(0);
            d_a = 0;
        }
        let mut head = 0usize;
        while head < nodes.len() && dist[head] < d_a {
            let dv = dist[head];
            let v = nodes[head];
            let (sources, probs) = graph.in_neighbors(v);
            for (&u, &p) in sources.iter().zip(probs) {
                let mut lu = self.local[u as usize];
                if lu != UNSEEN && dist[lu as usize] <= dv {
                    continue;
                }
                coins += 1;
                if rng.gen::<f64>() >= p {
                    continue;
                }
                if lu == UNSEEN {
                    lu = nodes.len() as u32;
                    self.local[u as usize] = lu;
                    nodes.push(u);
                    dist.push(dv + 1);
                    if self.s_a.contains(u) {
                        seeds_a.push(lu);
                        // finish the current layer, expand nothing deeper
                        d_a = d_a.min(dv + 1);
                    }
                }
                in_nbrs.push(lu);
            }
            in_offsets.push(in_nbrs.len() as u32);
            head += 1;
        }
        // unexpanded tail layer
        let edges_end = in_nbrs.len() as u32;
        in_offsets.resize(nodes.len() + 1, edges_end);

        for &u in &nodes {
            self.local[u as usize] = UNSEEN;
        }
        RapgInstance {
            nodes,
            dist,
            in_offsets,
            in_nbrs,
            seeds_a,
            d_a,
            coin_count: coins,
        }
    }
}

/// Samples one instance; see [`RapgSampler`] for repeated sampling.
pub fn sample_rapg(graph: &DirectedGraph, s_a: &NodeSet, stream: RngStream) -> RapgInstance {
    RapgSampler::new(graph, s_a).sample(stream)
}

/// Number of arcs of the full graph pointing into nodes whose singleton score
/// is 1 on this instance.
pub fn rapg_width(instance: &RapgInstance, graph: &DirectedGraph, model: ModelKind) -> u64 {
    (0..instance.len())
        .filter(|&i| fully_covers(model, instance, i))
        .map(|i| graph.in_degree(instance.node(i)) as u64)
        .sum()
}

/// `1 - (1 - width/m')^k`, with `width` clamped to `m'`. Returns
/// `(alpha, clamped)`; `m' = 0` gives 0.
pub fn alpha(width: u64, m_prime: u64, k: usize) -> (f64, bool) {
    if m_prime == 0 {
        return (0.0, false);
    }
    let clamped = width > m_prime;
    let w = width.min(m_prime) as f64;
    let frac = 1.0 - w / m_prime as f64;
    (1.0 - frac.powi(k as i32), clamped)
}
