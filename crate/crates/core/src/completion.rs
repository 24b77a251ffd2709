//! Finite-horizon completion check: does a transaction reach a decided,
//! settled outcome within the simulated horizon?

use serde::Serialize;

use crate::model::{ForkId, ModelError, Step, Transaction, TxnOutcome, TxnVerdict};
use crate::sim::GrowingFork;
use crate::spaces::proxy_outcome;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompletionError {
    #[error("no transaction with id {0}")]
    MissingTransaction(u64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletionReport {
    pub txn_id: u64,
    pub outcome_at_horizon: TxnOutcome,
    /// Decided, and unchanged over the last `confirm_depth` steps.
    pub stable: bool,
    /// Earliest step from which the verdict stays decided up to the horizon.
    pub first_decided_step: Option<Step>,
}

/// Rebinds every party of `txn` to `proxies[cluster]`.
pub fn rebind(txn: &Transaction, proxies: &[ForkId]) -> Transaction {
    let mut out = txn.clone();
    for p in &mut out.parties {
        if let Some(&f) = proxies.get(p.cluster) {
            p.proxy_fork = f;
        }
    }
    out
}

/// Outcome of `txn` at step `t`. A proxy fork that has not been spawned yet
/// counts as pending.
pub fn outcome_at(txn: &Transaction, growing: &[GrowingFork], t: Step) -> Result<TxnOutcome, ModelError> {
    let per_party = txn
        .parties
        .iter()
        .map(|p| {
            let g = growing.iter().find(|g| g.cluster == p.cluster).ok_or(ModelError::MissingCluster(p.cluster))?;
            let snap = g.at(t).ok_or(ModelError::MissingCluster(p.cluster))?;
            Ok(proxy_outcome(snap, p.proxy_fork))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(TxnOutcome { verdict: TxnVerdict::aggregate(&per_party), per_party })
}

pub fn completion_check(
    growing: &[GrowingFork],
    txns: &[Transaction],
    txn_id: u64,
    confirm_depth: u64,
) -> Result<CompletionReport, CompletionError> {
    let txn = txns.iter().find(|t| t.id == txn_id).ok_or(CompletionError::MissingTransaction(txn_id))?;
    let horizon = growing.iter().map(GrowingFork::horizon).min().unwrap_or(0);
    let history = (0..=horizon).map(|t| outcome_at(txn, growing, t)).collect::<Result<Vec<_>, _>>()?;
    let last = history.last().expect("horizon snapshot exists").clone();
    let decided = last.verdict != TxnVerdict::Pending;
    let window_start = horizon.saturating_sub(usize::try_from(confirm_depth).unwrap_or(usize::MAX));
    let stable = decided && history[window_start..].iter().all(|o| *o == last);
    let first_decided_step =
        decided.then(|| history.iter().rposition(|o| o.verdict == TxnVerdict::Pending).map_or(0, |p| p + 1));
    Ok(CompletionReport { txn_id, outcome_at_horizon: last, stable, first_decided_step })
}
