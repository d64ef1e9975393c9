//! Competitive propagation models and their per-instance scores.
//!
//! Every model follows the nearest-initial-adopter rule: a node ends in the
//! state of one of its closest seeds over the live-edge graph. The models
//! differ in how ties between the two sources are resolved:
//!
//! * COICM: the B source always wins ties.
//! * Distance-based: B wins with probability equal to its share of the
//!   nearest seeds.
//! * Wave: a node's B probability is the average over its predecessors on
//!   shortest seed paths.
//!
//! On a RAPG instance only the root's outcome matters. [`ScoreState`] keeps
//! enough per-instance state for O(1) marginal gains under COICM and
//! Distance-based; Wave re-runs its layer DP per query.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeSet};
use crate::rapg::RapgInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Coicm,
    #[serde(rename = "distance")]
    DistanceBased,
    Wave,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Coicm, ModelKind::DistanceBased, ModelKind::Wave];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Coicm => "coicm",
            ModelKind::DistanceBased => "distance",
            ModelKind::Wave => "wave",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coicm" => Ok(ModelKind::Coicm),
            "distance" | "distance-based" => Ok(ModelKind::DistanceBased),
            "wave" => Ok(ModelKind::Wave),
            other => Err(Error::Domain(format!("unknown model `{other}`"))),
        }
    }
}

/// True when B seeding only the node at `local` already captures the root
/// with probability 1.
pub fn fully_covers(model: ModelKind, instance: &RapgInstance, local: usize) -> bool {
    if instance.is_seed_a(local) {
        return false;
    }
    match model {
        ModelKind::Coicm => true,
        ModelKind::DistanceBased | ModelKind::Wave => instance.dist(local) < instance.d_a_raw(),
    }
}

/// Buffers reused across Wave evaluations on instances of varying size.
#[derive(Debug, Default)]
pub struct WaveScratch {
    on_path: Vec<bool>,
    prob: Vec<f64>,
}

/// Root B-probability under the Wave model for the B seeds in `seeds_b`
/// (local indices). Nodes deeper than the nearest seed layer are ignored.
fn wave_root_probability(
    instance: &RapgInstance,
    seeds_b: impl Iterator<Item = usize> + Clone,
    scratch: &mut WaveScratch,
) -> f64 {
    let nearest_b = seeds_b.clone().map(|i| instance.dist(i)).min();
    let d_star = match nearest_b {
        Some(d) => d.min(instance.d_a_raw()),
        None => return 0.0,
    };
    if d_star == 0 {
        // root itself is a seed; A seeds never share a layer with B seeds here
        return if instance.is_seed_a(0) { 0.0 } else { 1.0 };
    }

    // nodes are layer ordered, so the prefix with dist <= d_star is contiguous
    let end = (0..instance.len())
        .find(|&i| instance.dist(i) > d_star)
        .unwrap_or(instance.len());
    let WaveScratch { on_path, prob } = scratch;
    on_path.clear();
    on_path.resize(end, false);
    prob.clear();
    prob.resize(end, 0.0);

    for i in seeds_b.filter(|&i| instance.dist(i) == d_star) {
        on_path[i] = true;
        prob[i] = 1.0;
    }
    if instance.d_a_raw() == d_star {
        for &a in instance.seeds_a() {
            on_path[a as usize] = true;
            prob[a as usize] = 0.0;
        }
    }
    for i in (0..end).rev() {
        if instance.dist(i) >= d_star {
            continue;
        }
        let mut sum = 0.0;
        let mut count = 0u32;
        for &j in instance.in_neighbors(i) {
            if on_path[j as usize] {
                sum += prob[j as usize];
                count += 1;
            }
        }
        if count > 0 {
            on_path[i] = true;
            prob[i] = sum / count as f64;
        }
    }
    if on_path[0] {
        prob[0]
    } else {
        0.0
    }
}

/// Score of the B seeds in `seeds_b` (local indices, no A members).
fn score_local(
    model: ModelKind,
    instance: &RapgInstance,
    seeds_b: &[usize],
    scratch: &mut WaveScratch,
) -> f64 {
    match model {
        ModelKind::Coicm => {
            if seeds_b.is_empty() {
                0.0
            } else {
                1.0
            }
        }
        ModelKind::DistanceBased => {
            let d_a = instance.d_a_raw();
            let Some(nearest) = seeds_b.iter().map(|&i| instance.dist(i)).min() else {
                return 0.0;
            };
            if nearest < d_a {
                return 1.0;
            }
            let n_b = seeds_b.iter().filter(|&&i| instance.dist(i) == d_a).count();
            let n_a = instance.seeds_a().len();
            n_b as f64 / (n_a + n_b) as f64
        }
        ModelKind::Wave => wave_root_probability(instance, seeds_b.iter().copied(), scratch),
    }
}

fn local_seeds(instance: &RapgInstance, s_b: &NodeSet) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..instance.len() {
        if s_b.contains(instance.node(i)) {
            if instance.is_seed_a(i) {
                return Err(Error::Contract(format!(
                    "node {} is seeded by both sources",
                    instance.node(i)
                )));
            }
            out.push(i);
        }
    }
    Ok(out)
}

/// Probability that the root of `instance` ends influenced by B when `s_b`
/// seeds B. Nodes of `s_b` outside the instance contribute nothing.
pub fn score(model: ModelKind, instance: &RapgInstance, s_b: &NodeSet) -> Result<f64> {
    let seeds = local_seeds(instance, s_b)?;
    Ok(score_local(model, instance, &seeds, &mut WaveScratch::default()))
}

#[derive(Debug, Clone, PartialEq)]
enum Counters {
    Coicm { covered: bool },
    Distance { n_b: u32, covered: bool },
    Wave { p_root: f64 },
}

/// Incremental score of one instance under a growing B seed set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreState {
    committed: Vec<u32>,
    counters: Counters,
}

impl ScoreState {
    pub fn new(model: ModelKind) -> Self {
        let counters = match model {
            ModelKind::Coicm => Counters::Coicm { covered: false },
            ModelKind::DistanceBased => Counters::Distance {
                n_b: 0,
                covered: false,
            },
            ModelKind::Wave => Counters::Wave { p_root: 0.0 },
        };
        Self {
            committed: Vec::new(),
            counters,
        }
    }

    pub fn score(&self, instance: &RapgInstance) -> f64 {
        match self.counters {
            Counters::Coicm { covered } => covered as u8 as f64,
            Counters::Distance { covered: true, .. } => 1.0,
            Counters::Distance { n_b, covered: false } => {
                distance_ratio(n_b as usize, instance.seeds_a().len())
            }
            Counters::Wave { p_root } => p_root,
        }
    }

    pub fn model(&self) -> ModelKind {
        match self.counters {
            Counters::Coicm { .. } => ModelKind::Coicm,
            Counters::Distance { .. } => ModelKind::DistanceBased,
            Counters::Wave { .. } => ModelKind::Wave,
        }
    }

    /// Local indices committed as B seeds, in commit order.
    pub fn committed(&self) -> &[u32] {
        &self.committed
    }

    /// Gain of adding the node at `local`. The caller guarantees it is neither
    /// an A seed nor already committed.
    pub fn gain(&self, instance: &RapgInstance, local: usize, scratch: &mut WaveScratch) -> f64 {
        match self.counters {
            Counters::Coicm { covered } => {
                if covered {
                    0.0
                } else {
                    1.0
                }
            }
            Counters::Distance { covered: true, .. } => 0.0,
            Counters::Distance { n_b, covered: false } => {
                let n_a = instance.seeds_a().len();
                let current = distance_ratio(n_b as usize, n_a);
                if instance.dist(local) < instance.d_a_raw() {
                    1.0 - current
                } else {
                    distance_ratio(n_b as usize + 1, n_a) - current
                }
            }
            Counters::Wave { p_root } => {
                if p_root >= 1.0 {
                    return 0.0;
                }
                let seeds = self
                    .committed
                    .iter()
                    .map(|&i| i as usize)
                    .chain(std::iter::once(local));
                wave_root_probability(instance, seeds, scratch) - p_root
            }
        }
    }

    /// Adds the node at `local` to the committed B seeds.
    pub fn commit(&mut self, instance: &RapgInstance, local: usize, scratch: &mut WaveScratch) {
        self.committed.push(local as u32);
        match &mut self.counters {
            Counters::Coicm { covered } => *covered = true,
            Counters::Distance { n_b, covered } => {
                if instance.dist(local) < instance.d_a_raw() {
                    *covered = true;
                } else {
                    *n_b += 1;
                }
            }
            Counters::Wave { p_root } => {
                let seeds = self.committed.iter().map(|&i| i as usize);
                *p_root = wave_root_probability(instance, seeds, scratch);
            }
        }
    }
}

fn distance_ratio(n_b: usize, n_a: usize) -> f64 {
    if n_b == 0 {
        0.0
    } else {
        n_b as f64 / (n_a + n_b) as f64
    }
}

/// State for the empty B seed set.
pub fn init_state(model: ModelKind, _instance: &RapgInstance) -> ScoreState {
    ScoreState::new(model)
}

fn checked_local(instance: &RapgInstance, state: &ScoreState, u: NodeId) -> Result<Option<usize>> {
    let Some(local) = instance.local_index(u) else {
        return Ok(None);
    };
    if instance.is_seed_a(local) {
        return Err(Error::Contract(format!("node {u} is an A seed")));
    }
    if state.committed.contains(&(local as u32)) {
        return Err(Error::Contract(format!("node {u} is already a B seed")));
    }
    Ok(Some(local))
}

/// `f(S_B + u) - f(S_B)` on this instance, where `S_B` is what `state` has
/// committed. Nodes outside the instance gain 0.
pub fn marginal_gain(
    _model: ModelKind,
    instance: &RapgInstance,
    state: &ScoreState,
    u: NodeId,
) -> Result<f64> {
    Ok(match checked_local(instance, state, u)? {
        Some(local) => state.gain(instance, local, &mut WaveScratch::default()),
        None => 0.0,
    })
}

/// Returns the state after adding `u` to the B seeds.
pub fn commit(
    _model: ModelKind,
    instance: &RapgInstance,
    state: &ScoreState,
    u: NodeId,
) -> Result<ScoreState> {
    let mut next = state.clone();
    if let Some(local) = checked_local(instance, state, u)? {
        next.commit(instance, local, &mut WaveScratch::default());
    }
    Ok(next)
}

/// Score from scratch for B seeds given as local indices; used by audits.
pub fn score_of_locals(
    model: ModelKind,
    instance: &RapgInstance,
    seeds_b: &[usize],
    scratch: &mut WaveScratch,
) -> f64 {
    score_local(model, instance, seeds_b, scratch)
}
