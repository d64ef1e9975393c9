//! Forward propagation over live-edge draws and the exhaustive oracle.
//!
//! Both entry points share one multi-source BFS from `S_A ∪ S_B`. Arcs are
//! resolved lazily through a coin callback, and only when their outcome can
//! matter: an arc `u -> v` is looked at when `u` is popped and `v` is not
//! already strictly closer to the seeds. Each arc is asked at most once.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId, NodeSet};
use crate::model::ModelKind;
use crate::rng::RngStream;

/// Largest edge count `exact_sigma` accepts.
pub const EXACT_MAX_EDGES: usize = 20;

const FAR: u32 = u32::MAX;

/// Per-node buffers for repeated propagation on one graph.
#[derive(Debug, Default)]
pub struct SimScratch {
    dist: Vec<u32>,
    queue: Vec<NodeId>,
    b_flag: Vec<bool>,
    p_sum: Vec<f64>,
    p_count: Vec<u32>,
    seed_bits: Vec<u64>,
    words: usize,
}

impl SimScratch {
    pub fn new(n: usize) -> Self {
        Self {
            dist: vec![FAR; n],
            ..Self::default()
        }
    }

    fn prepare(&mut self, model: ModelKind, n: usize, seed_count: usize) {
        if self.dist.len() != n {
            self.dist = vec![FAR; n];
        }
        match model {
            ModelKind::Coicm => {
                if self.b_flag.len() != n {
                    self.b_flag = vec![false; n];
                }
            }
            ModelKind::DistanceBased => {
                let words = seed_count.div_ceil(64).max(1);
                if self.words != words || self.seed_bits.len() != n * words {
                    self.words = words;
                    self.seed_bits = vec![0; n * words];
                }
            }
            ModelKind::Wave => {
                if self.p_sum.len() != n {
                    self.p_sum = vec![0.0; n];
                    self.p_count = vec![0; n];
                }
            }
        }
    }
}

/// Checks `S_A ∩ S_B = ∅`.
pub(crate) fn check_disjoint(s_a: &NodeSet, s_b: &NodeSet) -> Result<()> {
    if let Some(u) = s_b.iter().find(|&u| s_a.contains(u)) {
        return Err(Error::Contract(format!("node {u} is seeded by both sources")));
    }
    Ok(())
}

/// Expected number of B-influenced nodes for one live-edge draw, with arc
/// outcomes supplied by `coin(edge_id, p)`.
///
/// Distance-based and Wave return the fractional per-node B probability given
/// the draw rather than a sampled outcome.
pub fn propagate<C>(
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    s_b: &NodeSet,
    mut coin: C,
    scratch: &mut SimScratch,
) -> f64
where
    C: FnMut(usize, f64) -> bool,
{
    if s_b.is_empty() {
        return 0.0;
    }
    let n = graph.node_count();
    let seed_count = s_a.len() + s_b.len();
    scratch.prepare(model, n, seed_count);
    let words = scratch.words;

    // B seed bits occupy positions [|S_A|, |S_A| + |S_B|)
    let b_mask: Vec<u64> = if model == ModelKind::DistanceBased {
        let mut mask = vec![0u64; words];
        for i in s_a.len()..seed_count {
            mask[i / 64] |= 1 << (i % 64);
        }
        mask
    } else {
        Vec::new()
    };

    let SimScratch {
        dist,
        queue,
        b_flag,
        p_sum,
        p_count,
        seed_bits,
        ..
    } = scratch;
    queue.clear();

    for (i, (u, is_b)) in s_a
        .iter()
        .map(|u| (u, false))
        .chain(s_b.iter().map(|u| (u, true)))
        .enumerate()
    {
        let ui = u as usize;
        dist[ui] = 0;
        queue.push(u);
        match model {
            ModelKind::Coicm => b_flag[ui] = is_b,
            ModelKind::DistanceBased => {
                let row = &mut seed_bits[ui * words..(ui + 1) * words];
                row.fill(0);
                row[i / 64] |= 1 << (i % 64);
            }
            ModelKind::Wave => {
                p_sum[ui] = if is_b { 1.0 } else { 0.0 };
                p_count[ui] = 1;
            }
        }
    }

    let mut total = 0.0;
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        let ui = u as usize;
        head += 1;
        let d = dist[ui];

        let value = match model {
            ModelKind::Coicm => b_flag[ui] as u8 as f64,
            ModelKind::DistanceBased => {
                let row = &seed_bits[ui * words..(ui + 1) * words];
                let all: u32 = row.iter().map(|w| w.count_ones()).sum();
                let b: u32 = row.iter().zip(&b_mask).map(|(w, m)| (w & m).count_ones()).sum();
                b as f64 / all as f64
            }
            ModelKind::Wave => {
                let p = p_sum[ui] / p_count[ui] as f64;
                p_sum[ui] = p;
                p
            }
        };
        total += value;

        for e in graph.out_edge_range(u) {
            let v = graph.edge_target(e);
            let vi = v as usize;
            if dist[vi] <= d {
                continue;
            }
            if !coin(e, graph.edge_probability(e)) {
                continue;
            }
            if dist[vi] == FAR {
                dist[vi] = d + 1;
                queue.push(v);
                match model {
                    ModelKind::Coicm => b_flag[vi] = false,
                    ModelKind::DistanceBased => seed_bits[vi * words..(vi + 1) * words].fill(0),
                    ModelKind::Wave => {
                        p_sum[vi] = 0.0;
                        p_count[vi] = 0;
                    }
                }
            }
            match model {
                ModelKind::Coicm => b_flag[vi] |= b_flag[ui],
                ModelKind::DistanceBased => {
                    for w in 0..words {
                        let bits = seed_bits[ui * words + w];
                        seed_bits[vi * words + w] |= bits;
                    }
                }
                ModelKind::Wave => {
                    p_sum[vi] += p_sum[ui];
                    p_count[vi] += 1;
                }
            }
        }
    }

    for &u in queue.iter() {
        dist[u as usize] = FAR;
    }
    total
}

/// One Monte-Carlo draw of the B-influenced mass.
pub fn forward_simulate(
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    s_b: &NodeSet,
    stream: RngStream,
) -> Result<f64> {
    check_disjoint(s_a, s_b)?;
    let mut rng = stream.rng();
    let mut scratch = SimScratch::new(graph.node_count());
    Ok(propagate(
        model,
        graph,
        s_a,
        s_b,
        |_, p| rng.gen::<f64>() < p,
        &mut scratch,
    ))
}

/// Exact expected B influence by enumerating every live-edge set.
///
/// Arcs with probability 0 or 1 are deterministic and not enumerated, so the
/// work is `2^(uncertain arcs)` propagations.
pub fn exact_sigma(model: ModelKind, graph: &DirectedGraph, s_a: &NodeSet, s_b: &NodeSet) -> Result<f64> {
    check_disjoint(s_a, s_b)?;
    let m = graph.edge_count();
    if m > EXACT_MAX_EDGES {
        return Err(Error::TooLarge(format!(
            "exact enumeration needs m <= {EXACT_MAX_EDGES}, graph has {m}"
        )));
    }
    if s_b.is_empty() {
        return Ok(0.0);
    }
    let uncertain: Vec<usize> = (0..m)
        .filter(|&e| {
            let p = graph.edge_probability(e);
            p > 0.0 && p < 1.0
        })
        .collect();
    let mut bit_of = vec![usize::MAX; m];
    for (b, &e) in uncertain.iter().enumerate() {
        bit_of[e] = b;
    }

    let mut scratch = SimScratch::new(graph.node_count());
    let mut total = 0.0;
    for mask in 0u64..(1u64 << uncertain.len()) {
        let weight: f64 = uncertain
            .iter()
            .enumerate()
            .map(|(b, &e)| {
                let p = graph.edge_probability(e);
                if mask >> b & 1 == 1 {
                    p
                } else {
                    1.0 - p
                }
            })
            .product();
        let live = |e: usize, p: f64| match bit_of[e] {
            usize::MAX => p >= 1.0,
            b => mask >> b & 1 == 1,
        };
        total += weight * propagate(model, graph, s_a, s_b, live, &mut scratch);
    }
    Ok(total)
}
