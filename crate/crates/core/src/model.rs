//! Forks, fork graphs and cross-chain transactions.
//!
//! A [`ForkGraph`] is the set of every fork a cluster has ever spawned, in
//! ascending id order, each tagged with a [`ForkState`]. Eliminated is set by
//! the simulator's elimination rule and never cleared; Confirmed and
//! Undecided are recomputed from the current fork set by
//! [`ForkGraph::derive_states`].

use serde::{Deserialize, Serialize};

pub type ClusterId = usize;
pub type ForkId = usize;
pub type Step = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForkState {
    Undecided,
    Confirmed,
    Eliminated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fork {
    pub id: ForkId,
    pub cluster: ClusterId,
    pub state: ForkState,
    /// Blocks appended to this fork's chain after genesis.
    pub length: u64,
    pub parent: Option<ForkId>,
    pub spawn_step: Step,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("cluster {cluster} has no fork {fork}")]
    MissingFork { cluster: ClusterId, fork: ForkId },
    #[error("no fork graph for cluster {0}")]
    MissingCluster(ClusterId),
    #[error("invalid transaction {txn}: {reason}")]
    InvalidTransaction { txn: u64, reason: String },
}

/// Reasons a fork graph breaks the state-machine invariants.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantViolation {
    #[error("fork graph of cluster {0} is empty")]
    Empty(ClusterId),
    #[error("cluster {cluster}: fork at position {position} has id {id}")]
    NonSequentialIds { cluster: ClusterId, position: usize, id: ForkId },
    #[error("cluster {0}: more than one confirmed fork")]
    MultipleConfirmed(ClusterId),
    #[error("cluster {cluster}: fork {fork} confirmed while another fork is not eliminated")]
    ConfirmedWithRival { cluster: ClusterId, fork: ForkId },
    #[error("cluster {cluster}: fork {fork} undecided although every other fork is eliminated")]
    UnconfirmedSurvivor { cluster: ClusterId, fork: ForkId },
    #[error("cluster {cluster}: fork {fork} has a bad parent link")]
    BadParent { cluster: ClusterId, fork: ForkId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForkGraph {
    pub cluster: ClusterId,
    pub forks: Vec<Fork>,
}

impl ForkGraph {
    /// A single confirmed genesis fork of length 0.
    pub fn genesis(cluster: ClusterId) -> Self {
        ForkGraph {
            cluster,
            forks: vec![Fork { id: 0, cluster, state: ForkState::Confirmed, length: 0, parent: None, spawn_step: 0 }],
        }
    }

    /// |F_i|: every fork, whatever its state.
    pub fn fork_count(&self) -> usize {
        self.forks.len()
    }

    pub fn fork(&self, id: ForkId) -> Result<&Fork, ModelError> {
        self.forks.get(id).filter(|f| f.id == id).ok_or(ModelError::MissingFork { cluster: self.cluster, fork: id })
    }

    pub fn fork_mut(&mut self, id: ForkId) -> Result<&mut Fork, ModelError> {
        let cluster = self.cluster;
        self.forks.get_mut(id).filter(|f| f.id == id).ok_or(ModelError::MissingFork { cluster, fork: id })
    }

    /// Ids of forks that are not eliminated, ascending.
    pub fn live_ids(&self) -> Vec<ForkId> {
        self.forks.iter().filter(|f| f.state != ForkState::Eliminated).map(|f| f.id).collect()
    }

    /// Longest non-eliminated fork; ties go to the lowest id.
    pub fn best_live(&self) -> ForkId {
        self.forks
            .iter()
            .filter(|f| f.state != ForkState::Eliminated)
            .fold(None::<&Fork>, |best, f| match best {
                Some(b) if b.length >= f.length => Some(b),
                _ => Some(f),
            })
            .map(|f| f.id)
            .unwrap_or(0)
    }

    pub fn confirmed(&self) -> Option<ForkId> {
        self.forks.iter().find(|f| f.state == ForkState::Confirmed).map(|f| f.id)
    }

    /// Recompute Confirmed/Undecided from the sticky Eliminated flags: a
    /// surviving fork is Confirmed iff every other fork is Eliminated.
    pub fn derive_states(&mut self) {
        let live = self.forks.iter().filter(|f| f.state != ForkState::Eliminated).count();
        for fork in &mut self.forks {
            if fork.state != ForkState::Eliminated {
                fork.state = if live == 1 { ForkState::Confirmed } else { ForkState::Undecided };
            }
        }
    }

    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let cluster = self.cluster;
        if self.forks.is_empty() {
            return Err(InvariantViolation::Empty(cluster));
        }
        for (position, f) in self.forks.iter().enumerate() {
            if f.id != position {
                return Err(InvariantViolation::NonSequentialIds { cluster, position, id: f.id });
            }
            let parent_ok = match f.parent {
                None => f.id == 0,
                Some(p) => p != f.id && p < f.id,
            };
            if !parent_ok {
                return Err(InvariantViolation::BadParent { cluster, fork: f.id });
            }
        }
        let confirmed: Vec<_> = self.forks.iter().filter(|f| f.state == ForkState::Confirmed).collect();
        if confirmed.len() > 1 {
            return Err(InvariantViolation::MultipleConfirmed(cluster));
        }
        let live: Vec<_> = self.forks.iter().filter(|f| f.state != ForkState::Eliminated).collect();
        if let Some(c) = confirmed.first() {
            if live.len() != 1 {
                return Err(InvariantViolation::ConfirmedWithRival { cluster, fork: c.id });
            }
        } else if live.len() == 1 {
            return Err(InvariantViolation::UnconfirmedSurvivor { cluster, fork: live[0].id });
        }
        Ok(())
    }
}

/// Pure form of [`ForkGraph::derive_states`].
pub fn derive_fork_states(mut graph: ForkGraph) -> ForkGraph {
    graph.derive_states();
    graph
}

/// A proxy is live while its fork is undecided or confirmed.
pub fn is_live(graph: &ForkGraph, fork: ForkId) -> Result<bool, ModelError> {
    Ok(graph.fork(fork)?.state != ForkState::Eliminated)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Commit,
    Abort,
    Pending,
}

impl Outcome {
    pub fn from_state(state: ForkState) -> Self {
        match state {
            ForkState::Confirmed => Outcome::Commit,
            ForkState::Eliminated => Outcome::Abort,
            ForkState::Undecided => Outcome::Pending,
        }
    }
}

pub fn party_outcome(graph: &ForkGraph, fork: ForkId) -> Result<Outcome, ModelError> {
    Ok(Outcome::from_state(graph.fork(fork)?.state))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Party {
    pub cluster: ClusterId,
    #[serde(rename = "fork")]
    pub proxy_fork: ForkId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: u64,
    pub parties: Vec<Party>,
}

impl Transaction {
    /// At least two parties on pairwise distinct clusters.
    pub fn new(id: u64, parties: Vec<Party>) -> Result<Self, ModelError> {
        let txn = Transaction { id, parties };
        txn.validate()?;
        Ok(txn)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |reason: &str| ModelError::InvalidTransaction { txn: self.id, reason: reason.to_string() };
        if self.parties.len() < 2 {
            return Err(invalid("needs at least two parties"));
        }
        let mut clusters: Vec<_> = self.parties.iter().map(|p| p.cluster).collect();
        clusters.sort_unstable();
        if clusters.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("party clusters must be distinct"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxnVerdict {
    Commit,
    Abort,
    Pending,
    AtomicityViolation,
}

impl TxnVerdict {
    /// Any pending leg makes the whole transaction pending; otherwise the legs
    /// must agree, and a decided mix is an atomicity violation.
    pub fn aggregate(outcomes: &[Outcome]) -> Self {
        if outcomes.contains(&Outcome::Pending) {
            TxnVerdict::Pending
        } else if outcomes.iter().all(|o| *o == Outcome::Commit) {
            TxnVerdict::Commit
        } else if outcomes.iter().all(|o| *o == Outcome::Abort) {
            TxnVerdict::Abort
        } else {
            TxnVerdict::AtomicityViolation
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxnOutcome {
    pub verdict: TxnVerdict,
    pub per_party: Vec<Outcome>,
}

pub fn find_graph(graphs: &[ForkGraph], cluster: ClusterId) -> Result<&ForkGraph, ModelError> {
    graphs
        .get(cluster)
        .filter(|g| g.cluster == cluster)
        .or_else(|| graphs.iter().find(|g| g.cluster == cluster))
        .ok_or(ModelError::MissingCluster(cluster))
}

pub fn txn_outcome(txn: &Transaction, graphs: &[ForkGraph]) -> Result<TxnOutcome, ModelError> {
    let per_party = txn
        .parties
        .iter()
        .map(|p| party_outcome(find_graph(graphs, p.cluster)?, p.proxy_fork))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TxnOutcome { verdict: TxnVerdict::aggregate(&per_party), per_party })
}
