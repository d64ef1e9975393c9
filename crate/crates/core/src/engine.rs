//! Two-phase seed selection.
//!
//! Phase one estimates a lower bound on the optimal B influence (a coarse
//! doubling estimate, then a greedy-based refinement). Phase two samples
//! `θ = λ / LB` RAPG instances and greedily maximizes the total score over
//! them.
//!
//! Random streams are partitioned by phase (estimate, refine, select) with
//! one substream per instance, so results do not depend on the number of
//! worker threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId, NodeSet};
use crate::model::{score_of_locals, ModelKind, ScoreState, WaveScratch};
use crate::rapg::{alpha, rapg_width, RapgInstance, RapgSampler};
use crate::rng::{Phase, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TcimParams {
    pub k: usize,
    pub epsilon: f64,
    pub ell: f64,
    pub model: ModelKind,
    pub seed: u64,
}

impl TcimParams {
    pub fn new(k: usize, epsilon: f64, ell: f64, model: ModelKind, seed: u64) -> Self {
        Self {
            k,
            epsilon,
            ell,
            model,
            seed,
        }
    }

    pub fn validate(&self, n: usize, s_a: &NodeSet) -> Result<()> {
        if n < 2 {
            return Err(Error::Domain(format!("graph needs at least 2 nodes, has {n}")));
        }
        if s_a.capacity() != n {
            return Err(Error::Domain(format!(
                "S_A was built for {} nodes, graph has {n}",
                s_a.capacity()
            )));
        }
        let eligible = n - s_a.len();
        if self.k > eligible {
            return Err(Error::Contract(format!(
                "k = {} exceeds |V \\ S_A| = {eligible}",
                self.k
            )));
        }
        check_common(n, self.k, self.ell, self.epsilon)
    }
}

fn check_common(n: usize, k: usize, ell: f64, epsilon: f64) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} must lie in [1, {n}]")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} must lie in (0, 1]")));
    }
    if !(ell >= 0.5) {
        return Err(Error::Domain(format!("ell = {ell} must be at least 0.5")));
    }
    Ok(())
}

/// `ln C(n, k)` as a sum of logs.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    (1..=k)
        .map(|i| ((n - k + i) as f64).ln() - (i as f64).ln())
        .sum()
}

/// `λ = (8 + 2ε) n (ℓ ln n + ln C(n, k) + ln 2) / ε²`.
pub fn lambda_main(n: usize, k: usize, ell: f64, epsilon: f64) -> Result<f64> {
    check_common(n, k, ell, epsilon)?;
    let nf = n as f64;
    Ok((8.0 + 2.0 * epsilon) * nf * (ell * nf.ln() + ln_binomial(n, k) + 2f64.ln())
        / (epsilon * epsilon))
}

/// `ε' = 5 (ℓ ε² / (ℓ + k))^{1/3}`.
pub fn refine_epsilon(k: usize, ell: f64, epsilon: f64) -> f64 {
    5.0 * (ell * epsilon * epsilon / (ell + k as f64)).cbrt()
}

/// `λ' = (2 + ε') ℓ n ln n / ε'²`.
pub fn lambda_refine(n: usize, ell: f64, epsilon_prime: f64) -> f64 {
    let nf = n as f64;
    (2.0 + epsilon_prime) * ell * nf * nf.ln() / (epsilon_prime * epsilon_prime)
}

/// `ℓ' = ℓ + ln 3 / ln n`, splitting the failure budget over three stages.
pub fn adjusted_ell(n: usize, ell: f64) -> f64 {
    ell + 3f64.ln() / (n as f64).ln()
}

/// Samples instances `start..start + count` of `phase` in parallel.
pub fn sample_instances(
    graph: &DirectedGraph,
    s_a: &NodeSet,
    seed: u64,
    phase: Phase,
    start: u64,
    count: u64,
) -> Vec<RapgInstance> {
    (start..start + count)
        .into_par_iter()
        .map_init(
            || RapgSampler::new(graph, s_a),
            |sampler, i| sampler.sample(RngStream::for_phase(seed, phase, i)),
        )
        .collect()
}

/// Output of the doubling lower-bound estimate.
#[derive(Debug, Clone)]
pub struct LbEstimate {
    /// `LB_e*`.
    pub lb: f64,
    /// Every instance drawn, kept for the refinement step.
    pub instances: Vec<RapgInstance>,
    pub rounds: u32,
    pub coins: u64,
    /// Instances whose width had to be clamped to `m'`.
    pub width_clamps: u64,
}

/// Doubling estimate of a lower bound on OPT from per-instance `α(R)`.
///
/// Round `i` draws `c_i = (6ℓ ln n + 6 ln log₂ n) 2^i` instances and stops
/// once their `α` sum exceeds `c_i / 2^i`, returning `n s_i / (2 c_i)`;
/// otherwise it falls through to 1.
pub fn estimate_lb(
    graph: &DirectedGraph,
    s_a: &NodeSet,
    model: ModelKind,
    k: usize,
    ell: f64,
    seed: u64,
) -> LbEstimate {
    let n = graph.node_count();
    let nf = n as f64;
    let m_prime = graph.restricted_edge_count(s_a) as u64;
    let log2n = nf.log2();
    let last_round = (log2n.floor() as i64 - 1).max(0) as u32;

    let mut out = LbEstimate {
        lb: 1.0,
        instances: Vec::new(),
        rounds: 0,
        coins: 0,
        width_clamps: 0,
    };
    for i in 1..=last_round {
        out.rounds = i;
        let pow = 2f64.powi(i as i32);
        let c_i = ((6.0 * ell * nf.ln() + 6.0 * log2n.ln()) * pow).ceil() as u64;
        let start = out.instances.len() as u64;
        let batch = sample_instances(graph, s_a, seed, Phase::Estimate, start, c_i);
        let alphas: Vec<(f64, bool)> = batch
            .par_iter()
            .map(|r| alpha(rapg_width(r, graph, model), m_prime, k))
            .collect();
        let mut s_i = 0.0;
        for (a, clamped) in alphas {
            s_i += a;
            out.width_clamps += clamped as u64;
        }
        out.coins += batch.iter().map(|r| r.coin_count() as u64).sum::<u64>();
        out.instances.extend(batch);
        if s_i > c_i as f64 / pow {
            out.lb = nf * s_i / (2.0 * c_i as f64);
            return out;
        }
    }
    out
}

/// Output of the lower-bound refinement.
#[derive(Debug, Clone)]
pub struct LbRefinement {
    /// `LB_r = max(F / (1 + ε'), LB_e*)`.
    pub lb: f64,
    /// Greedy seed set found on the cached instances.
    pub seeds: Vec<NodeId>,
    pub epsilon_prime: f64,
    pub theta_prime: u64,
    /// Unbiased spread estimate `F` of `seeds` from the fresh instances.
    pub spread: f64,
    pub reused_instances: u64,
    pub fresh_instances: u64,
    pub coins: u64,
}

/// Tightens `lb_estimate` using a greedy solution on the instances cached by
/// [`estimate_lb`] and a fresh batch of `θ' = λ' / LB_e*` instances.
#[allow(clippy::too_many_arguments)]
pub fn refine_lb(
    graph: &DirectedGraph,
    s_a: &NodeSet,
    k: usize,
    lb_estimate: f64,
    cached: &[RapgInstance],
    epsilon: f64,
    ell: f64,
    model: ModelKind,
    seed: u64,
) -> Result<LbRefinement> {
    if !(lb_estimate >= 1.0) {
        return Err(Error::Domain(format!("lb_estimate = {lb_estimate} must be >= 1")));
    }
    let n = graph.node_count();
    let selection = greedy_select(cached, s_a, k, model, n)?;
    let seeds = NodeSet::from_nodes(n, selection.seeds.iter().copied())?;

    let epsilon_prime = refine_epsilon(k, ell, epsilon);
    let lambda_prime = lambda_refine(n, ell, epsilon_prime);
    let theta_prime = (lambda_prime / lb_estimate).ceil().max(1.0) as u64;

    let scored: Vec<(f64, u32)> = (0..theta_prime)
        .into_par_iter()
        .map_init(
            || (RapgSampler::new(graph, s_a), WaveScratch::default(), Vec::new()),
            |(sampler, scratch, locals), i| {
                let r = sampler.sample(RngStream::for_phase(seed, Phase::Refine, i));
                locals.clear();
                locals.extend((0..r.len()).filter(|&j| seeds.contains(r.node(j))));
                (score_of_locals(model, &r, locals, scratch), r.coin_count())
            },
        )
        .collect();
    let total: f64 = scored.iter().map(|s| s.0).sum();
    let coins = scored.iter().map(|s| s.1 as u64).sum();
    let spread = n as f64 * total / theta_prime as f64;

    Ok(LbRefinement {
        lb: (spread / (1.0 + epsilon_prime)).max(lb_estimate),
        seeds: selection.seeds,
        epsilon_prime,
        theta_prime,
        spread,
        reused_instances: cached.len() as u64,
        fresh_instances: theta_prime,
        coins,
    })
}

/// Result of greedy maximization over a fixed instance collection.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Seeds in pick order.
    pub seeds: Vec<NodeId>,
    /// `F_R(S_B) = Σ_R f_R(S_B)`.
    pub coverage: f64,
}

/// Greedy maximizer of `Σ_R f_R(S_B)` with an incrementally maintained
/// marginal gain vector.
///
/// Invariant between picks: `mg(u) = Σ_R Δ_R(u | S_A, S_B)` for every node
/// that is neither an A seed nor selected. After a pick, only instances where
/// the picked node had positive gain are revisited.
pub struct GreedySelector<'a> {
    instances: &'a [RapgInstance],
    s_a: &'a NodeSet,
    posting_offsets: Vec<usize>,
    postings: Vec<(u32, u32)>,
    states: Vec<ScoreState>,
    mg: Vec<f64>,
    selected: NodeSet,
    order: Vec<NodeId>,
    coverage: f64,
    scratch: WaveScratch,
    old_gain: Vec<f64>,
}

impl<'a> GreedySelector<'a> {
    pub fn new(model: ModelKind, instances: &'a [RapgInstance], s_a: &'a NodeSet, n: usize) -> Self {
        assert!(instances.len() <= u32::MAX as usize);
        let mut posting_offsets = vec![0usize; n + 1];
        for r in instances {
            for i in 0..r.len() {
                if !r.is_seed_a(i) {
                    posting_offsets[r.node(i) as usize + 1] += 1;
                }
            }
        }
        for u in 0..n {
            posting_offsets[u + 1] += posting_offsets[u];
        }
        let mut postings = vec![(0u32, 0u32); posting_offsets[n]];
        let mut cursor = posting_offsets.clone();
        for (ri, r) in instances.iter().enumerate() {
            for i in 0..r.len() {
                if !r.is_seed_a(i) {
                    let slot = &mut cursor[r.node(i) as usize];
                    postings[*slot] = (ri as u32, i as u32);
                    *slot += 1;
                }
            }
        }

        let states = vec![ScoreState::new(model); instances.len()];
        let init = ScoreState::new(model);
        let mg: Vec<f64> = (0..n)
            .into_par_iter()
            .map_init(WaveScratch::default, |scratch, u| {
                postings[posting_offsets[u]..posting_offsets[u + 1]]
                    .iter()
                    .map(|&(ri, i)| init.gain(&instances[ri as usize], i as usize, scratch))
                    .sum()
            })
            .collect();

        Self {
            instances,
            s_a,
            posting_offsets,
            postings,
            states,
            mg,
            selected: NodeSet::new(n),
            order: Vec::new(),
            coverage: 0.0,
            scratch: WaveScratch::default(),
            old_gain: Vec::new(),
        }
    }

    fn postings_of(&self, u: NodeId) -> &[(u32, u32)] {
        &self.postings[self.posting_offsets[u as usize]..self.posting_offsets[u as usize + 1]]
    }

    fn eligible(&self, u: NodeId) -> bool {
        !self.s_a.contains(u) && !self.selected.contains(u)
    }

    /// Current marginal gain of `u` as maintained incrementally.
    pub fn mg(&self, u: NodeId) -> f64 {
        self.mg[u as usize]
    }

    /// `Σ_R Δ_R(u | S_A, S_B)` recomputed from scratch for the current `S_B`.
    pub fn naive_mg(&self, u: NodeId) -> f64 {
        let mut scratch = WaveScratch::default();
        let model = self.model();
        self.postings_of(u)
            .iter()
            .map(|&(ri, i)| {
                let r = &self.instances[ri as usize];
                let mut seeds: Vec<usize> =
                    (0..r.len()).filter(|&j| self.selected.contains(r.node(j))).collect();
                let before = score_of_locals(model, r, &seeds, &mut scratch);
                seeds.push(i as usize);
                score_of_locals(model, r, &seeds, &mut scratch) - before
            })
            .sum()
    }

    fn model(&self) -> ModelKind {
        match self.states.first() {
            Some(s) => s.model(),
            None => ModelKind::Coicm,
        }
    }

    pub fn selected(&self) -> &[NodeId] {
        &self.order
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    /// Node the next pick would choose: largest gain, smallest id on ties.
    pub fn best_candidate(&self) -> Option<NodeId> {
        let mut best: Option<(NodeId, f64)> = None;
        for u in 0..self.mg.len() as NodeId {
            if !self.eligible(u) {
                continue;
            }
            let g = self.mg[u as usize];
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((u, g));
            }
        }
        best.map(|(u, _)| u)
    }

    /// Picks the best candidate and updates the marginal gain vector.
    pub fn pick(&mut self) -> Option<NodeId> {
        let v = self.best_candidate()?;
        self.add(v);
        Some(v)
    }

    fn add(&mut self, v: NodeId) {
        let lo = self.posting_offsets[v as usize];
        let hi = self.posting_offsets[v as usize + 1];
        self.selected.insert(v);
        self.order.push(v);
        for p in lo..hi {
            let (ri, i) = self.postings[p];
            let r = &self.instances[ri as usize];
            let i = i as usize;
            let state = &mut self.states[ri as usize];
            let gain = state.gain(r, i, &mut self.scratch);
            if gain <= 0.0 {
                continue;
            }
            self.old_gain.clear();
            for j in 0..r.len() {
                let u = r.node(j);
                let old = if j != i && !r.is_seed_a(j) && !self.selected.contains(u) {
                    state.gain(r, j, &mut self.scratch)
                } else {
                    0.0
                };
                self.old_gain.push(old);
            }
            state.commit(r, i, &mut self.scratch);
            self.coverage += gain;
            for j in 0..r.len() {
                let u = r.node(j);
                if j != i && !r.is_seed_a(j) && !self.selected.contains(u) {
                    let new = state.gain(r, j, &mut self.scratch);
                    self.mg[u as usize] += new - self.old_gain[j];
                }
            }
        }
    }

    /// `Σ_R f_R(S_B)` summed from the per-instance states.
    pub fn exact_coverage(&self) -> f64 {
        self.states
            .iter()
            .zip(self.instances)
            .map(|(s, r)| s.score(r))
            .sum()
    }
}

/// Greedily picks `k` B seeds maximizing `Σ_R f_R(S_B)` over `instances`.
pub fn greedy_select(
    instances: &[RapgInstance],
    s_a: &NodeSet,
    k: usize,
    model: ModelKind,
    n: usize,
) -> Result<Selection> {
    let eligible = n - s_a.len();
    if k > eligible {
        return Err(Error::Contract(format!(
            "k = {k} exceeds |V \\ S_A| = {eligible}"
        )));
    }
    let mut selector = GreedySelector::new(model, instances, s_a, n);
    for _ in 0..k {
        selector.pick();
    }
    Ok(Selection {
        seeds: selector.selected().to_vec(),
        coverage: selector.exact_coverage(),
    })
}

/// Samples `theta` fresh instances and runs [`greedy_select`] on them.
pub fn node_selection(
    graph: &DirectedGraph,
    s_a: &NodeSet,
    k: usize,
    theta: u64,
    model: ModelKind,
    seed: u64,
) -> Result<(Selection, Vec<RapgInstance>)> {
    if theta == 0 {
        return Err(Error::Domain("theta must be at least 1".into()));
    }
    let instances = sample_instances(graph, s_a, seed, Phase::Select, 0, theta);
    let selection = greedy_select(&instances, s_a, k, model, graph.node_count())?;
    Ok((selection, instances))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseCounts {
    pub estimate: u64,
    pub refine: u64,
    pub select: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimings {
    pub estimate_secs: f64,
    pub refine_secs: f64,
    pub select_secs: f64,
    pub total_secs: f64,
}

/// Everything a full run reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TcimResult {
    /// Selected B seeds in pick order.
    pub seeds_b: Vec<NodeId>,
    pub theta: u64,
    pub lb_estimate: f64,
    pub lb_refined: f64,
    /// `n F_R(S_B) / θ` over the selection instances.
    pub spread_estimate: f64,
    pub ell_prime: f64,
    pub lambda: f64,
    pub epsilon_prime: f64,
    pub theta_prime: u64,
    pub instances: PhaseCounts,
    pub instances_generated: u64,
    pub coins_total: u64,
    pub width_clamps: u64,
    pub timings: PhaseTimings,
    /// Bytes of instance storage at the largest retained pool.
    pub peak_memory_estimate: u64,
}

fn pool_bytes(instances: &[RapgInstance]) -> u64 {
    instances.iter().map(|r| r.memory_bytes() as u64).sum()
}

/// Full pipeline: estimate, refine, then select with `θ = ⌈λ / LB_r⌉`.
pub fn tcim(graph: &DirectedGraph, s_a: &NodeSet, params: &TcimParams) -> Result<TcimResult> {
    let n = graph.node_count();
    params.validate(n, s_a)?;
    let TcimParams {
        k,
        epsilon,
        ell,
        model,
        seed,
    } = *params;
    let ell_prime = adjusted_ell(n, ell);
    let started = Instant::now();

    let t = Instant::now();
    let estimate = estimate_lb(graph, s_a, model, k, ell_prime, seed);
    let estimate_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let refinement = refine_lb(
        graph,
        s_a,
        k,
        estimate.lb,
        &estimate.instances,
        epsilon,
        ell_prime,
        model,
        seed,
    )?;
    let refine_secs = t.elapsed().as_secs_f64();
    let estimate_pool = pool_bytes(&estimate.instances);
    let estimate_count = estimate.instances.len() as u64;
    drop(estimate.instances);

    let t = Instant::now();
    let lambda = lambda_main(n, k, ell_prime, epsilon)?;
    let theta = (lambda / refinement.lb).ceil().max(1.0) as u64;
    let (selection, instances) = node_selection(graph, s_a, k, theta, model, seed)?;
    let select_secs = t.elapsed().as_secs_f64();
    let select_coins: u64 = instances.iter().map(|r| r.coin_count() as u64).sum();
    let select_pool = pool_bytes(&instances);

    let counts = PhaseCounts {
        estimate: estimate_count,
        refine: refinement.fresh_instances,
        select: theta,
    };
    Ok(TcimResult {
        seeds_b: selection.seeds,
        theta,
        lb_estimate: estimate.lb,
        lb_refined: refinement.lb,
        spread_estimate: n as f64 * selection.coverage / theta as f64,
        ell_prime,
        lambda,
        epsilon_prime: refinement.epsilon_prime,
        theta_prime: refinement.theta_prime,
        instances: counts,
        instances_generated: counts.estimate + counts.refine + counts.select,
        coins_total: estimate.coins + refinement.coins + select_coins,
        width_clamps: estimate.width_clamps,
        timings: PhaseTimings {
            estimate_secs,
            refine_secs,
            select_secs,
            total_secs: started.elapsed().as_secs_f64(),
        },
        peak_memory_estimate: estimate_pool.max(select_pool),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, parse_edge_list, Directedness, SyntheticKind};
    use crate::model::score;

    fn graph(text: &str) -> DirectedGraph {
        parse_edge_list(text, Directedness::Directed).unwrap()
    }

    fn random_graph(seed: u64) -> DirectedGraph {
        generate_synthetic(SyntheticKind::RandomKOut { k_out: 3 }, 40, seed)
            .unwrap()
            .with_weighted_ic()
    }

    #[test]
    fn lambda_examples() {
        let l = lambda_main(2, 1, 1.0, 1.0).unwrap();
        assert!((l - 60.0 * 2f64.ln()).abs() < 1e-12);
        let full = lambda_main(5, 5, 1.0, 0.5).unwrap();
        let expected = 9.0 * 5.0 * (5f64.ln() + 2f64.ln()) / 0.25;
        assert!((full - expected).abs() < 1e-9);
        let ratio = lambda_main(100, 3, 1.0, 0.2).unwrap() / lambda_main(100, 3, 1.0, 0.1).unwrap();
        assert!((ratio - (8.4 / 8.2) / 4.0).abs() < 1e-12);
        assert!(lambda_main(5, 6, 1.0, 0.5).is_err());
        assert!(lambda_main(5, 1, 0.4, 0.5).is_err());
        assert!(lambda_main(5, 1, 1.0, 0.0).is_err());
        assert!(lambda_main(5, 1, 1.0, 1.5).is_err());
    }

    #[test]
    fn refine_and_ell_formulas() {
        assert!((refine_epsilon(1, 1.0, 1.0) - 3.9685).abs() < 1e-4);
        assert!((adjusted_ell(3, 1.0) - 2.0).abs() < 1e-12);
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn theta_grows_with_k_up_to_half() {
        let mut prev = 0.0;
        for k in 1..=50 {
            let l = lambda_main(100, k, 1.0, 0.3).unwrap();
            assert!(l >= prev);
            prev = l;
        }
    }

    #[test]
    fn estimate_lb_with_full_coverage_returns_half_n() {
        let g = graph("0 1 1\n1 0 1");
        // n = 2 runs no rounds
        let e = estimate_lb(&g, &NodeSet::new(2), ModelKind::Coicm, 1, 1.0, 1);
        assert_eq!((e.lb, e.rounds), (1.0, 0));

        // complete digraph on 8 nodes with certain arcs: every width equals m
        let text: String = (0..8)
            .flat_map(|u| (0..8).filter(move |&v| v != u).map(move |v| format!("{u} {v} 1\n")))
            .collect();
        let g = graph(&text);
        let e = estimate_lb(&g, &NodeSet::new(8), ModelKind::Coicm, 1, 1.0, 1);
        assert_eq!(e.rounds, 1);
        assert!((e.lb - 4.0).abs() < 1e-12);
        assert_eq!(e.width_clamps, 0);
    }

    #[test]
    fn estimate_lb_terminates_without_live_arcs() {
        let g = generate_synthetic(SyntheticKind::RandomKOut { k_out: 2 }, 64, 3)
            .unwrap()
            .with_uniform_probability(0.0)
            .unwrap();
        let e = estimate_lb(&g, &NodeSet::new(64), ModelKind::Wave, 1, 1.0, 1);
        assert_eq!(e.lb, 1.0);
        assert_eq!(e.rounds, 5);
        assert!(e.instances.iter().all(|r| r.len() == 1));
    }

    #[test]
    fn refine_keeps_estimate_when_larger() {
        let g = random_graph(4);
        let s_a = NodeSet::new(40);
        let r = refine_lb(&g, &s_a, 1, 40.0, &[], 0.5, 1.0, ModelKind::Coicm, 3).unwrap();
        assert_eq!(r.lb, 40.0);
        assert_eq!(r.reused_instances, 0);
        assert!(refine_lb(&g, &s_a, 1, 0.5, &[], 0.5, 1.0, ModelKind::Coicm, 3).is_err());
    }

    #[test]
    fn greedy_select_small_examples() {
        let g = graph("1 0 1\n2 3 1");
        let s_a = NodeSet::from_nodes(4, [1]).unwrap();
        let mut sampler = RapgSampler::new(&g, &s_a);
        let r0 = sampler.sample_rooted(0, RngStream::new(0, 0));
        let sel = greedy_select(std::slice::from_ref(&r0), &s_a, 1, ModelKind::Coicm, 4).unwrap();
        assert_eq!((sel.seeds.clone(), sel.coverage), (vec![0], 1.0));

        let s_a = NodeSet::new(4);
        let mut sampler = RapgSampler::new(&g, &s_a);
        let a = sampler.sample_rooted(1, RngStream::new(0, 0));
        let b = sampler.sample_rooted(0, RngStream::new(0, 1));
        let sel = greedy_select(&[a, b], &s_a, 2, ModelKind::Coicm, 4).unwrap();
        assert_eq!(sel.seeds, vec![1, 0]);
        assert_eq!(sel.coverage, 2.0);
        assert!(greedy_select(&[], &s_a, 5, ModelKind::Coicm, 4).is_err());
    }

    #[test]
    fn marginal_gains_match_naive_after_every_round() {
        for model in ModelKind::ALL {
            for seed in 0..4 {
                let g = random_graph(seed);
                let s_a = NodeSet::from_nodes(40, [seed as u32, 7, 19]).unwrap();
                let instances = sample_instances(&g, &s_a, seed, Phase::Select, 0, 300);
                let mut sel = GreedySelector::new(model, &instances, &s_a, 40);
                for _ in 0..6 {
                    for u in 0..40 {
                        if s_a.contains(u) || sel.selected().contains(&u) {
                            continue;
                        }
                        assert!((sel.mg(u) - sel.naive_mg(u)).abs() < 1e-9, "{model} node {u}");
                    }
                    sel.pick().unwrap();
                    let set = NodeSet::from_nodes(40, sel.selected().iter().copied()).unwrap();
                    let direct: f64 = instances.iter().map(|r| score(model, r, &set).unwrap()).sum();
                    assert!((direct - sel.coverage()).abs() < 1e-9);
                    assert!((direct - sel.exact_coverage()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn tcim_with_one_eligible_node() {
        let g = graph("0 1 0.5\n1 2 0.5\n2 0 0.5");
        let s_a = NodeSet::from_nodes(3, [0, 2]).unwrap();
        for model in ModelKind::ALL {
            let res = tcim(&g, &s_a, &TcimParams::new(1, 0.5, 1.0, model, 1)).unwrap();
            assert_eq!(res.seeds_b, vec![1]);
            assert!(res.lb_refined >= res.lb_estimate);
            let lambda = lambda_main(3, 1, adjusted_ell(3, 1.0), 0.5).unwrap();
            assert_eq!(res.theta, (lambda / res.lb_refined).ceil() as u64);
        }
        let err = tcim(&g, &s_a, &TcimParams::new(2, 0.5, 1.0, ModelKind::Coicm, 1));
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn tcim_is_reproducible_and_thread_independent() {
        let g = random_graph(11);
        let s_a = NodeSet::from_nodes(40, [3, 5]).unwrap();
        let params = TcimParams::new(3, 0.5, 1.0, ModelKind::Wave, 77);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| tcim(&g, &s_a, &params).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.seeds_b, b.seeds_b);
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.spread_estimate, b.spread_estimate);
        assert_eq!(a.coins_total, b.coins_total);
        assert_eq!(a.instances.refine, a.theta_prime);
        assert_eq!(a.instances_generated, a.instances.estimate + a.instances.refine + a.theta);
    }

    #[test]
    fn phases_use_disjoint_streams() {
        let g = random_graph(2);
        let s_a = NodeSet::new(40);
        let est = sample_instances(&g, &s_a, 5, Phase::Estimate, 0, 50);
        let sel = sample_instances(&g, &s_a, 5, Phase::Select, 0, 50);
        let same = est
            .iter()
            .zip(&sel)
            .filter(|(a, b)| a.root() == b.root() && a.edges().eq(b.edges()))
            .count();
        assert!(same < 10);
    }
}
