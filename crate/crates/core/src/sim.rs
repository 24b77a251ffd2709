//! Round-based fork simulator.
//!
//! Every step, each cluster (ascending id, one shared PRNG stream) draws how
//! many miners succeeded, extends a uniformly chosen live fork, spawns the
//! extra forks off that parent, then eliminates every live fork trailing the
//! longest live fork by at least `confirm_depth` blocks.

use serde::{Deserialize, Serialize};

use crate::model::{ClusterId, Fork, ForkGraph, ForkState, Step, Transaction};
use crate::prng::SplitMix64;
use crate::rational::Rational;
use crate::trace::{EventKind, Trace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub horizon: Step,
    pub clusters: usize,
    /// `fork_prob[i]` is the probability that `i + 1` miners succeed in a round.
    pub fork_prob: Vec<Rational>,
    pub confirm_depth: u64,
}

impl SimConfig {
    pub fn sum_tolerance() -> Rational {
        Rational::new(1, 1_000_000_000)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.clusters == 0 {
            return bad("clusters must be at least 1".into());
        }
        if self.confirm_depth == 0 {
            return bad("confirm_depth must be at least 1".into());
        }
        if self.fork_prob.is_empty() {
            return bad("fork_prob must list at least one probability".into());
        }
        if let Some(p) = self.fork_prob.iter().find(|p| p.is_negative() || **p > Rational::ONE) {
            return bad(format!("probability {p} outside [0, 1]"));
        }
        let mut sum = Rational::ZERO;
        for p in &self.fork_prob {
            sum = sum
                .checked_add(*p)
                .ok_or_else(|| SimError::InvalidConfig("fork_prob denominators too large".into()))?;
        }
        let gap = if sum > Rational::ONE { sum - Rational::ONE } else { Rational::ONE - sum };
        if gap > Self::sum_tolerance() {
            return bad(format!("fork_prob sums to {sum}, not 1"));
        }
        self.thresholds().map(|_| ())
    }

    /// Cumulative inverse-CDF cut points on the raw 64-bit draw: `f = i + 1`
    /// is chosen for the first `i` with `draw < thresholds[i]`.
    pub fn thresholds(&self) -> Result<Vec<i128>, SimError> {
        let mut cumulative = Rational::ZERO;
        self.fork_prob
            .iter()
            .map(|p| {
                cumulative = cumulative.checked_add(*p)?;
                cumulative.scaled_ceil_u64_range()
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| SimError::InvalidConfig("fork_prob denominators too large".into()))
    }
}

/// Miners succeeding this round. Draws past the last cut point (possible when
/// the probabilities sum to slightly under 1) fall into the last bucket.
pub fn draw_fork_factor(thresholds: &[i128], draw: u64) -> usize {
    let draw = draw as i128;
    thresholds.iter().position(|t| draw < *t).unwrap_or(thresholds.len() - 1) + 1
}

/// Marks every live fork trailing the longest live fork by `depth` or more
/// blocks as eliminated. Returns the newly eliminated ids.
pub fn eliminate_trailing(graph: &mut ForkGraph, depth: u64) -> Vec<usize> {
    let best = graph.forks.iter().filter(|f| f.state != ForkState::Eliminated).map(|f| f.length).max().unwrap_or(0);
    let mut eliminated = Vec::new();
    for fork in &mut graph.forks {
        if fork.state != ForkState::Eliminated && fork.length + depth <= best {
            fork.state = ForkState::Eliminated;
            eliminated.push(fork.id);
        }
    }
    eliminated
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub graphs: Vec<ForkGraph>,
    pub rng: SplitMix64,
    thresholds: Vec<i128>,
    confirm_depth: u64,
}

impl SimState {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        Ok(SimState {
            graphs: (0..config.clusters).map(ForkGraph::genesis).collect(),
            rng: SplitMix64::new(config.seed),
            thresholds: config.thresholds()?,
            confirm_depth: config.confirm_depth,
        })
    }

    /// Start from arbitrary graphs, e.g. to replay a hand-built situation.
    pub fn from_parts(graphs: Vec<ForkGraph>, seed: u64, config: &SimConfig) -> Result<Self, SimError> {
        Ok(SimState {
            graphs,
            rng: SplitMix64::new(seed),
            thresholds: config.thresholds()?,
            confirm_depth: config.confirm_depth,
        })
    }

    /// Advance every cluster by one round at step `t >= 1`.
    pub fn step(&mut self, t: Step) -> Vec<TraceEvent> {
        let mut events = Vec::new();
        for graph in &mut self.graphs {
            let cluster = graph.cluster;
            let f = draw_fork_factor(&self.thresholds, self.rng.next_u64());
            let live = graph.live_ids();
            let parent = live[self.rng.next_index(live.len())];

            let parent_len = {
                let p = &mut graph.forks[parent];
                p.length += 1;
                p.length
            };
            events.push(TraceEvent { t, cluster, kind: EventKind::Extend { fork: parent, len: parent_len } });

            for _ in 1..f {
                let id = graph.forks.len();
                graph.forks.push(Fork {
                    id,
                    cluster,
                    state: ForkState::Undecided,
                    length: parent_len,
                    parent: Some(parent),
                    spawn_step: t,
                });
                events.push(TraceEvent { t, cluster, kind: EventKind::Spawn { fork: id, parent } });
            }

            for fork in eliminate_trailing(graph, self.confirm_depth) {
                events.push(TraceEvent { t, cluster, kind: EventKind::Eliminate { fork } });
            }
            graph.derive_states();
        }
        events
    }
}

/// Time-indexed fork graphs of one cluster, `snapshots[t]` for `t = 0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowingFork {
    pub cluster: ClusterId,
    pub snapshots: Vec<ForkGraph>,
}

impl GrowingFork {
    pub fn horizon(&self) -> Step {
        self.snapshots.len().saturating_sub(1)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.snapshots.iter().map(ForkGraph::fork_count).collect()
    }

    pub fn first_fork_time(&self) -> Option<Step> {
        first_fork_step(&self.counts())
    }

    pub fn at(&self, t: Step) -> Option<&ForkGraph> {
        self.snapshots.get(t)
    }
}

/// Smallest `t` with more than one fork.
pub fn first_fork_step(counts: &[usize]) -> Option<Step> {
    counts.iter().position(|&c| c > 1)
}

fn check_transactions(config: &SimConfig, txns: &[Transaction]) -> Result<(), SimError> {
    for txn in txns {
        txn.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        if let Some(p) = txn.parties.iter().find(|p| p.cluster >= config.clusters) {
            return Err(SimError::InvalidConfig(format!(
                "transaction {} references cluster {} of {}",
                txn.id, p.cluster, config.clusters
            )));
        }
    }
    Ok(())
}

/// Runs the simulation and keeps every intermediate snapshot in memory.
pub fn run(config: &SimConfig, txns: &[Transaction]) -> Result<(Trace, Vec<GrowingFork>), SimError> {
    check_transactions(config, txns)?;
    let mut state = SimState::new(config)?;
    let mut history: Vec<GrowingFork> =
        state.graphs.iter().map(|g| GrowingFork { cluster: g.cluster, snapshots: vec![g.clone()] }).collect();
    let mut events = Vec::new();
    for t in 1..=config.horizon {
        events.extend(state.step(t));
        for (h, g) in history.iter_mut().zip(&state.graphs) {
            h.snapshots.push(g.clone());
        }
    }
    let trace = Trace { config: config.clone(), transactions: txns.to_vec(), events };
    Ok((trace, history))
}

pub fn simulate(config: &SimConfig, txns: &[Transaction]) -> Result<Trace, SimError> {
    run(config, txns).map(|(trace, _)| trace)
}
