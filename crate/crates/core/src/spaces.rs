//! Builders for the three concrete spaces: cluster outcomes, static fork
//! graphs with proxies, and growing fork graphs.
//!
//! A distinguished `empty` point stands for the empty fork graph (and, on
//! the transaction side, for its counterpart). It has no distance to
//! anything, so it never joins another point's ball.

use serde::Serialize;

use crate::metrics::{
    fork_distance, fork_fallback_distance, fork_triple_case, growing_fork_distance, ternary_distance, DistanceError,
    DistanceTable, TripleCase,
};
use crate::model::{ForkGraph, ForkId, ForkState, Outcome, Step};
use crate::rational::Rational;
use crate::sim::{first_fork_step, GrowingFork};
use crate::topology::{compute_epsilon, EpsilonInput, FiniteSpace, SpaceKind, TopologyError};

pub const EMPTY_LABEL: &str = "empty";

/// Which fork of each cluster carries the transaction leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "t", rename_all = "snake_case")]
pub enum ProxyBinding {
    /// Fork 0 in every cluster.
    Genesis,
    /// The longest live fork of each cluster at step `t` (lowest id on ties).
    BestAt(Step),
}

impl ProxyBinding {
    /// One proxy per cluster. `None` when `t` is past the horizon.
    pub fn resolve(&self, growing: &[GrowingFork]) -> Option<Vec<ForkId>> {
        match *self {
            ProxyBinding::Genesis => Some(vec![0; growing.len()]),
            ProxyBinding::BestAt(t) => growing.iter().map(|g| g.at(t).map(ForkGraph::best_live)).collect(),
        }
    }
}

/// Outcome of a proxy in a snapshot; a fork that does not exist yet is
/// still pending.
pub fn proxy_outcome(graph: &ForkGraph, proxy: ForkId) -> Outcome {
    graph.fork(proxy).map_or(Outcome::Pending, |f| Outcome::from_state(f.state))
}

/// Liveness of a proxy in a snapshot; a fork that does not exist yet is
/// not live.
pub fn proxy_live(graph: &ForkGraph, proxy: ForkId) -> bool {
    graph.fork(proxy).is_ok_and(|f| f.state != ForkState::Eliminated)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxnPoint {
    pub label: String,
    /// `None` for the empty point.
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForkPoint {
    pub label: String,
    /// `None` for the empty graph.
    pub graph: Option<ForkGraph>,
    pub proxy: ForkId,
}

impl ForkPoint {
    pub fn live(&self) -> bool {
        self.graph.as_ref().is_some_and(|g| proxy_live(g, self.proxy))
    }
}

pub fn transaction_space(id: &str, points: &[TxnPoint]) -> Result<FiniteSpace, TopologyError> {
    if points.is_empty() {
        return Err(TopologyError::EmptySpace);
    }
    let labels = points.iter().map(|p| p.label.clone()).collect();
    let table = DistanceTable::from_fn(labels, |i, j| match (points[i].outcome, points[j].outcome) {
        (Some(a), Some(b)) => ternary_distance(a, b),
        _ => Err(DistanceError::EmptyGraph),
    });
    FiniteSpace::new(id, SpaceKind::TransactionSpace, table, compute_epsilon(EpsilonInput::Transaction)?)
}

/// A fork space and what its points are made of.
#[derive(Debug, Clone)]
pub struct ForkSpace {
    pub space: FiniteSpace,
    pub fallback: Rational,
    pub live: Vec<bool>,
}

impl ForkSpace {
    pub fn classify(&self, x: usize, z: usize, y: usize) -> TripleCase {
        fork_triple_case(self.live[x], self.live[z], self.live[y])
    }
}

/// Fallback distance and ε both take the supremum over the non-empty graphs.
/// A space holding only the empty graph uses a supremum of 1.
pub fn fork_space(id: &str, points: &[ForkPoint]) -> Result<ForkSpace, TopologyError> {
    if points.is_empty() {
        return Err(TopologyError::EmptySpace);
    }
    let mut counts: Vec<usize> = points.iter().filter_map(|p| p.graph.as_ref().map(ForkGraph::fork_count)).collect();
    if counts.is_empty() {
        counts.push(1);
    }
    let fallback = fork_fallback_distance(counts.iter().copied()).map_err(|_| TopologyError::EmptySpace)?;
    let labels = points.iter().map(|p| p.label.clone()).collect();
    let table = DistanceTable::from_fn(labels, |i, j| {
        let (a, b) = (&points[i], &points[j]);
        match (&a.graph, &b.graph) {
            (Some(ga), Some(gb)) => {
                if proxy_live(ga, a.proxy) && proxy_live(gb, b.proxy) {
                    fork_distance(ga, a.proxy, gb, b.proxy, fallback)
                } else {
                    Ok(fallback)
                }
            }
            _ => Err(DistanceError::EmptyGraph),
        }
    });
    let epsilon = compute_epsilon(EpsilonInput::Fork { counts: &counts })?;
    Ok(ForkSpace {
        space: FiniteSpace::new(id, SpaceKind::ForkSpace, table, epsilon)?,
        fallback,
        live: points.iter().map(ForkPoint::live).collect(),
    })
}

pub fn growing_label(cluster: usize) -> String {
    format!("F{cluster}^w")
}

/// One point per cluster; distances from fork-count sequences.
pub fn growing_space(id: &str, growing: &[GrowingFork]) -> Result<FiniteSpace, TopologyError> {
    let counts: Vec<Vec<usize>> = growing.iter().map(GrowingFork::counts).collect();
    growing_space_from_counts(id, growing.iter().map(|g| growing_label(g.cluster)).collect(), &counts)
}

pub fn growing_space_from_counts(
    id: &str,
    labels: Vec<String>,
    counts: &[Vec<usize>],
) -> Result<FiniteSpace, TopologyError> {
    let first: Vec<Option<usize>> = counts.iter().map(|c| first_fork_step(c).map(|m| c[m])).collect();
    let epsilon = compute_epsilon(EpsilonInput::GrowingFork { first_fork_counts: &first })?;
    let table = DistanceTable::from_fn(labels, |i, j| growing_fork_distance(&counts[i], &counts[j]));
    FiniteSpace::new(id, SpaceKind::GrowingForkSpace, table, epsilon)
}

/// Cluster outcomes at step `t` under the given proxies.
pub fn transaction_points_at(growing: &[GrowingFork], proxies: &[ForkId], t: Step) -> Vec<TxnPoint> {
    growing
        .iter()
        .zip(proxies)
        .map(|(g, &p)| TxnPoint {
            label: format!("C{}", g.cluster),
            outcome: Some(g.at(t).map_or(Outcome::Pending, |s| proxy_outcome(s, p))),
        })
        .collect()
}

/// Every cluster's fork graph at step `t` under the given proxies.
pub fn fork_points_at(growing: &[GrowingFork], proxies: &[ForkId], t: Step) -> Vec<ForkPoint> {
    growing
        .iter()
        .zip(proxies)
        .map(|(g, &p)| ForkPoint { label: format!("F{}", g.cluster), graph: g.at(t).cloned(), proxy: p })
        .collect()
}
