//! Comparison algorithms and brute-force oracles.
//!
//! The simulation-based baselines take a [`SpreadOracle`], so the same
//! selection loop runs either on Monte-Carlo estimates or on exact spreads.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::ln_binomial;
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId, NodeSet};
use crate::model::ModelKind;
use crate::rng::{derive_seed, Phase, RngStream};
use crate::simulate::{check_disjoint, exact_sigma, propagate, SimScratch, EXACT_MAX_EDGES};

/// Gains within this distance of the best count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Simulations handled by one parallel task in [`estimate_sigma_mc`].
const SIM_CHUNK: u64 = 128;

/// Largest number of subsets [`exhaustive_opt`] enumerates.
pub const EXHAUSTIVE_MAX_SUBSETS: f64 = 1e5;

/// Mean of `num_sims` forward simulations, draw `i` using stream `i` of the
/// evaluation phase under `seed`.
pub fn estimate_sigma_mc(
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    s_b: &NodeSet,
    num_sims: u64,
    seed: u64,
) -> Result<f64> {
    if num_sims == 0 {
        return Err(Error::Domain("num_sims must be at least 1".into()));
    }
    check_disjoint(s_a, s_b)?;
    if s_b.is_empty() {
        return Ok(0.0);
    }
    let n = graph.node_count();
    let chunks = num_sims.div_ceil(SIM_CHUNK);
    let sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map_init(
            || SimScratch::new(n),
            |scratch, c| {
                let lo = c * SIM_CHUNK;
                let hi = (lo + SIM_CHUNK).min(num_sims);
                (lo..hi)
                    .map(|i| {
                        let mut rng = RngStream::for_phase(seed, Phase::Evaluate, i).rng();
                        propagate(model, graph, s_a, s_b, |_, p| rng.gen::<f64>() < p, scratch)
                    })
                    .sum()
            },
        )
        .collect();
    Ok(sums.iter().sum::<f64>() / num_sims as f64)
}

/// Source of `σ(S_B | S_A)` values for the greedy baselines.
pub trait SpreadOracle: Sync {
    fn node_count(&self) -> usize;
    fn s_a(&self) -> &NodeSet;
    /// Spread of `s_b`; `eval` numbers the evaluation so noisy oracles can
    /// draw from a distinct stream per call.
    fn sigma(&self, s_b: &[NodeId], eval: u64) -> Result<f64>;
    /// Simulations consumed by one call to [`SpreadOracle::sigma`].
    fn sims_per_eval(&self) -> u64;
}

/// Monte-Carlo oracle with `r` fresh simulations per evaluation.
pub struct MonteCarloOracle<'a> {
    pub model: ModelKind,
    pub graph: &'a DirectedGraph,
    pub s_a: &'a NodeSet,
    pub r: u64,
    pub seed: u64,
}

impl SpreadOracle for MonteCarloOracle<'_> {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn s_a(&self) -> &NodeSet {
        self.s_a
    }

    fn sigma(&self, s_b: &[NodeId], eval: u64) -> Result<f64> {
        let set = NodeSet::from_nodes(self.graph.node_count(), s_b.iter().copied())?;
        let seed = derive_seed(self.seed, eval);
        estimate_sigma_mc(self.model, self.graph, self.s_a, &set, self.r, seed)
    }

    fn sims_per_eval(&self) -> u64 {
        self.r
    }
}

/// Noise-free oracle backed by live-edge enumeration.
pub struct ExactOracle<'a> {
    pub model: ModelKind,
    pub graph: &'a DirectedGraph,
    pub s_a: &'a NodeSet,
}

impl SpreadOracle for ExactOracle<'_> {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn s_a(&self) -> &NodeSet {
        self.s_a
    }

    fn sigma(&self, s_b: &[NodeId], _eval: u64) -> Result<f64> {
        let set = NodeSet::from_nodes(self.graph.node_count(), s_b.iter().copied())?;
        exact_sigma(self.model, self.graph, self.s_a, &set)
    }

    fn sims_per_eval(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineResult {
    /// Seeds in pick order.
    pub seeds_b: Vec<NodeId>,
    /// Spread of the final set as seen by the selection loop, if it has one.
    pub spread_estimate: Option<f64>,
    pub evaluations: u64,
    pub simulations_used: u64,
    pub wall_time_secs: f64,
}

fn check_budget(n: usize, s_a: &NodeSet, k: usize) -> Result<()> {
    let eligible = n - s_a.len();
    if k > eligible {
        return Err(Error::Contract(format!(
            "k = {k} exceeds |V \\ S_A| = {eligible}"
        )));
    }
    Ok(())
}

fn check_r(r: u64) -> Result<()> {
    if r == 0 {
        return Err(Error::Domain("r must be at least 1".into()));
    }
    Ok(())
}

/// Smallest id whose value is within [`TIE_TOLERANCE`] of the maximum.
fn pick_best(scored: &[(NodeId, f64)]) -> Option<(NodeId, f64)> {
    let max = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scored
        .iter()
        .filter(|s| s.1 >= max - TIE_TOLERANCE)
        .min_by_key(|s| s.0)
        .copied()
}

/// `r ≥ (8k² + 2kε) n ((ℓ + 1) ln n + ln k) / (ε² OPT)` with OPT replaced by
/// `opt_lower`, rounded up.
pub fn greedymc_min_r(n: usize, k: usize, ell: f64, epsilon: f64, opt_lower: f64) -> Result<u64> {
    if n < 2 || k == 0 || k > n {
        return Err(Error::Domain(format!("need n >= 2 and 1 <= k <= n, got n = {n}, k = {k}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) || !(ell >= 0.5) || !(opt_lower >= 1.0) {
        return Err(Error::Domain(format!(
            "bad parameters: epsilon = {epsilon}, ell = {ell}, opt_lower = {opt_lower}"
        )));
    }
    let (nf, kf) = (n as f64, k as f64);
    let r = (8.0 * kf * kf + 2.0 * kf * epsilon) * nf * ((ell + 1.0) * nf.ln() + kf.ln())
        / (epsilon * epsilon * opt_lower);
    Ok(r.ceil() as u64)
}

/// Plain greedy: every round evaluates `σ(S_B ∪ {u})` for every candidate.
pub fn greedy_with<O: SpreadOracle>(oracle: &O, k: usize) -> Result<BaselineResult> {
    let started = Instant::now();
    let n = oracle.node_count();
    let s_a = oracle.s_a();
    check_budget(n, s_a, k)?;
    let mut chosen: Vec<NodeId> = Vec::with_capacity(k);
    let mut in_b = vec![false; n];
    let mut evaluations = 0u64;
    let mut spread = 0.0;
    for round in 0..k {
        let candidates: Vec<NodeId> = (0..n as NodeId)
            .filter(|&u| !s_a.contains(u) && !in_b[u as usize])
            .collect();
        let scored: Vec<(NodeId, f64)> = candidates
            .par_iter()
            .map(|&u| {
                let mut set = chosen.clone();
                set.push(u);
                let eval = (round * n) as u64 + u as u64;
                oracle.sigma(&set, eval).map(|s| (u, s))
            })
            .collect::<Result<_>>()?;
        evaluations += scored.len() as u64;
        let (best, value) = pick_best(&scored).expect("budget checked");
        chosen.push(best);
        in_b[best as usize] = true;
        spread = value;
    }
    Ok(BaselineResult {
        seeds_b: chosen,
        spread_estimate: Some(spread),
        evaluations,
        simulations_used: evaluations * oracle.sims_per_eval(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Greedy with `r` Monte-Carlo simulations per evaluation.
pub fn greedy_mc(
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    k: usize,
    r: u64,
    seed: u64,
) -> Result<BaselineResult> {
    check_r(r)?;
    let oracle = MonteCarloOracle {
        model,
        graph,
        s_a,
        r,
        seed: derive_seed(seed, 1),
    };
    greedy_with(&oracle, k)
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    node: NodeId,
    /// Gain with respect to the seeds chosen before round `round`.
    mg1: f64,
    round: usize,
    /// CELF++ only: the round's best node when `mg1` was computed, and the
    /// gain with respect to the seeds plus that node.
    prev_best: Option<NodeId>,
    mg2: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mg1
            .total_cmp(&other.mg1)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Lazy greedy. Picks match [`greedy_with`] whenever the oracle is exact,
/// including the tie rule.
///
/// With `plus_plus`, each re-evaluation also records the gain with respect to
/// the current round's best candidate, which is reused without evaluation if
/// that candidate becomes the next seed.
pub fn celf_with<O: SpreadOracle>(oracle: &O, k: usize, plus_plus: bool) -> Result<BaselineResult> {
    let started = Instant::now();
    let n = oracle.node_count();
    let s_a = oracle.s_a();
    check_budget(n, s_a, k)?;
    let candidates: Vec<NodeId> = (0..n as NodeId).filter(|&u| !s_a.contains(u)).collect();

    let singles: Vec<f64> = candidates
        .par_iter()
        .map(|&u| oracle.sigma(&[u], u as u64))
        .collect::<Result<_>>()?;
    let mut evaluations = candidates.len() as u64;
    let mut next_eval = n as u64;

    // CELF++ needs σ({u, best}) for the running best of the initial pass
    let mut heap = BinaryHeap::with_capacity(candidates.len());
    let mut cur_best: Option<(NodeId, f64)> = None;
    for (&u, &s) in candidates.iter().zip(&singles) {
        let mut entry = Entry {
            node: u,
            mg1: s,
            round: 0,
            prev_best: None,
            mg2: 0.0,
        };
        if plus_plus {
            if let Some((b, sb)) = cur_best {
                entry.prev_best = Some(b);
                entry.mg2 = oracle.sigma(&[b, u], next_eval)? - sb;
                next_eval += 1;
                evaluations += 1;
            }
        }
        if cur_best.is_none_or(|(_, bs)| s > bs) {
            cur_best = Some((u, s));
        }
        heap.push(entry);
    }

    let mut chosen: Vec<NodeId> = Vec::with_capacity(k);
    let mut spread = 0.0;
    let mut last_seed: Option<NodeId> = None;
    let mut cur_best: Option<(NodeId, f64)> = None;
    while chosen.len() < k {
        let round = chosen.len();
        let top = heap.peek().expect("budget checked").mg1;
        let mut group = Vec::new();
        while let Some(e) = heap.peek() {
            if e.mg1 >= top - TIE_TOLERANCE {
                group.push(heap.pop().expect("peeked"));
            } else {
                break;
            }
        }
        if group.iter().all(|e| e.round == round) {
            let pick = group.iter().min_by_key(|e| e.node).copied().expect("nonempty");
            for e in group {
                if e.node != pick.node {
                    heap.push(e);
                }
            }
            chosen.push(pick.node);
            spread += pick.mg1;
            last_seed = Some(pick.node);
            cur_best = None;
            continue;
        }
        for mut e in group {
            if e.round == round {
                heap.push(e);
                continue;
            }
            if plus_plus && e.round + 1 == round && e.prev_best.is_some() && e.prev_best == last_seed {
                e.mg1 = e.mg2;
            } else {
                let mut set = chosen.clone();
                set.push(e.node);
                e.mg1 = oracle.sigma(&set, next_eval)? - spread;
                next_eval += 1;
                evaluations += 1;
                if plus_plus {
                    e.prev_best = cur_best.map(|b| b.0);
                    if let Some((b, _)) = cur_best {
                        let mut with_best = chosen.clone();
                        with_best.push(b);
                        let base = oracle.sigma(&with_best, next_eval)?;
                        with_best.push(e.node);
                        let both = oracle.sigma(&with_best, next_eval + 1)?;
                        e.mg2 = both - base;
                        next_eval += 2;
                        evaluations += 2;
                    }
                }
            }
            e.round = round;
            if cur_best.is_none_or(|(_, g)| e.mg1 > g) {
                cur_best = Some((e.node, e.mg1));
            }
            heap.push(e);
        }
    }
    Ok(BaselineResult {
        seeds_b: chosen,
        spread_estimate: Some(spread),
        evaluations,
        simulations_used: evaluations * oracle.sims_per_eval(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// CELF (or CELF++ with `plus_plus`) on Monte-Carlo estimates with `r`
/// simulations per evaluation.
pub fn celf(
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    k: usize,
    r: u64,
    seed: u64,
    plus_plus: bool,
) -> Result<BaselineResult> {
    check_r(r)?;
    let oracle = MonteCarloOracle {
        model,
        graph,
        s_a,
        r,
        seed: derive_seed(seed, 2),
    };
    celf_with(&oracle, k, plus_plus)
}

/// Repeatedly picks the node with the most out-arcs into nodes outside
/// `S_A ∪ S_B`, smallest id on ties.
pub fn single_discount(graph: &DirectedGraph, s_a: &NodeSet, k: usize) -> Result<BaselineResult> {
    let started = Instant::now();
    let n = graph.node_count();
    check_budget(n, s_a, k)?;
    let mut taken: Vec<bool> = (0..n as NodeId).map(|u| s_a.contains(u)).collect();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(NodeId, usize)> = None;
        for u in 0..n as NodeId {
            if taken[u as usize] {
                continue;
            }
            let d = graph
                .out_neighbors(u)
                .filter(|&(v, _)| !taken[v as usize])
                .count();
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((u, d));
            }
        }
        let (u, _) = best.expect("budget checked");
        taken[u as usize] = true;
        chosen.push(u);
    }
    Ok(BaselineResult {
        seeds_b: chosen,
        spread_estimate: None,
        evaluations: 0,
        simulations_used: 0,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Optimal k-subset of `V \ S_A` by enumeration, with its exact spread.
/// Among equal optima the lexicographically smallest set wins.
pub fn exhaustive_opt(
    model: ModelKind,
    graph: &DirectedGraph,
    s_a: &NodeSet,
    k: usize,
) -> Result<(Vec<NodeId>, f64)> {
    let n = graph.node_count();
    check_budget(n, s_a, k)?;
    if graph.edge_count() > EXACT_MAX_EDGES {
        return Err(Error::TooLarge(format!(
            "{} edges, the limit is {EXACT_MAX_EDGES}",
            graph.edge_count()
        )));
    }
    let eligible: Vec<NodeId> = (0..n as NodeId).filter(|&u| !s_a.contains(u)).collect();
    if ln_binomial(eligible.len(), k) > EXHAUSTIVE_MAX_SUBSETS.ln() + 1e-9 {
        return Err(Error::TooLarge(format!(
            "C({}, {k}) subsets exceeds the limit of {EXHAUSTIVE_MAX_SUBSETS}",
            eligible.len()
        )));
    }
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let set: Vec<NodeId> = idx.iter().map(|&i| eligible[i]).collect();
        let s_b = NodeSet::from_nodes(n, set.iter().copied())?;
        let value = exact_sigma(model, graph, s_a, &s_b)?;
        if best.as_ref().is_none_or(|(_, b)| value > b + TIE_TOLERANCE) {
            best = Some((set, value));
        }
        // advance to the next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best.expect("at least one subset"));
            }
            i -= 1;
            if idx[i] < eligible.len() - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
