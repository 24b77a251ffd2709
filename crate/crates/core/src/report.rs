//! Whole-trace analyses behind the `analyze` and `verify` commands.
//!
//! Both work on replayed snapshots, so a trace read back from disk and the
//! live simulation give byte-identical reports.

use serde::Serialize;

use crate::completion::{outcome_at, rebind};
use crate::metrics::{ternary_distance, verify_metric_axioms, DistanceTable, MetricReport, TripleCase};
use crate::model::{ForkId, Step, Transaction, TxnOutcome};
use crate::morphisms::{build_diagram, verify_diagram, DiagramReport, MorphismError};
use crate::rational::Rational;
use crate::sim::GrowingFork;
use crate::spaces::{
    fork_points_at, fork_space, growing_space, transaction_points_at, transaction_space, ForkPoint, ForkSpace,
    ProxyBinding, EMPTY_LABEL,
};
use crate::topology::{FiniteSpace, SpaceKind, TopologyError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("step {t} is outside 0..={horizon}")]
    OutOfRange { t: Step, horizon: Step },
    #[error("trace has no clusters")]
    NoClusters,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Which static fork graphs `analyze` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "t", rename_all = "snake_case")]
pub enum SnapshotSelection {
    /// Every cluster at step `t`.
    At(Step),
    /// Every cluster at its first forking step (the image of the flattening map).
    FirstFork,
}

fn horizon_of(growing: &[GrowingFork]) -> Result<Step, ReportError> {
    growing.iter().map(GrowingFork::horizon).min().ok_or(ReportError::NoClusters)
}

fn resolve_proxies(growing: &[GrowingFork], binding: ProxyBinding) -> Result<Vec<ForkId>, ReportError> {
    let horizon = horizon_of(growing)?;
    binding.resolve(growing).ok_or(match binding {
        ProxyBinding::BestAt(t) => ReportError::OutOfRange { t, horizon },
        ProxyBinding::Genesis => ReportError::NoClusters,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstForkInfo {
    pub cluster: usize,
    pub step: Option<Step>,
    pub forks: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TxnAnalysis {
    pub id: u64,
    pub at: Step,
    pub outcome: TxnOutcome,
    /// Ternary distances between the decided parties.
    pub distances: DistanceTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzedSpaces {
    pub transaction: FiniteSpace,
    pub fork: FiniteSpace,
    pub growing: FiniteSpace,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub horizon: Step,
    pub clusters: usize,
    pub snapshot: SnapshotSelection,
    pub binding: ProxyBinding,
    pub proxies: Vec<ForkId>,
    /// Fork count of each point of the fork space (`None` for the empty graph).
    pub fork_counts: Vec<Option<usize>>,
    pub first_fork: Vec<FirstForkInfo>,
    pub fork_fallback: Rational,
    pub transactions: Vec<TxnAnalysis>,
    pub spaces: AnalyzedSpaces,
}

fn txn_analysis(txn: &Transaction, growing: &[GrowingFork], t: Step) -> Result<TxnAnalysis, ReportError> {
    let outcome = outcome_at(txn, growing, t)?;
    let decided: Vec<_> = txn
        .parties
        .iter()
        .zip(&outcome.per_party)
        .filter(|(_, o)| **o != crate::model::Outcome::Pending)
        .map(|(p, &o)| (format!("C{}", p.cluster), o))
        .collect();
    let labels = decided.iter().map(|(l, _)| l.clone()).collect();
    let distances = DistanceTable::from_fn(labels, |i, j| ternary_distance(decided[i].1, decided[j].1));
    Ok(TxnAnalysis { id: txn.id, at: t, outcome, distances })
}

fn first_fork_points(growing: &[GrowingFork], proxies: &[ForkId]) -> Vec<ForkPoint> {
    growing
        .iter()
        .zip(proxies)
        .map(|(g, &proxy)| match g.first_fork_time() {
            Some(m) => ForkPoint { label: format!("F{}", g.cluster), graph: g.at(m).cloned(), proxy },
            None => ForkPoint { label: format!("F{}:{EMPTY_LABEL}", g.cluster), graph: None, proxy },
        })
        .collect()
}

pub fn analyze(
    growing: &[GrowingFork],
    transactions: &[Transaction],
    selection: SnapshotSelection,
    binding: ProxyBinding,
) -> Result<AnalyzeReport, ReportError> {
    let horizon = horizon_of(growing)?;
    let proxies = resolve_proxies(growing, binding)?;
    let (points, t_outcomes) = match selection {
        SnapshotSelection::At(t) if t > horizon => return Err(ReportError::OutOfRange { t, horizon }),
        SnapshotSelection::At(t) => (fork_points_at(growing, &proxies, t), t),
        SnapshotSelection::FirstFork => (first_fork_points(growing, &proxies), horizon),
    };
    let fork = fork_space("fork", &points)?;
    let transaction = transaction_space("transaction", &transaction_points_at(growing, &proxies, t_outcomes))?;
    let growing_sp = growing_space("growing", growing)?;
    let transactions = transactions
        .iter()
        .map(|txn| txn_analysis(&rebind_if(txn, binding, &proxies), growing, t_outcomes))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AnalyzeReport {
        horizon,
        clusters: growing.len(),
        snapshot: selection,
        binding,
        proxies,
        fork_counts: points.iter().map(|p| p.graph.as_ref().map(|g| g.fork_count())).collect(),
        first_fork: growing
            .iter()
            .map(|g| {
                let step = g.first_fork_time();
                FirstForkInfo { cluster: g.cluster, step, forks: step.and_then(|m| g.at(m)).map(|s| s.fork_count()) }
            })
            .collect(),
        fork_fallback: fork.fallback,
        transactions,
        spaces: AnalyzedSpaces { transaction, fork: fork.space, growing: growing_sp },
    })
}

/// Transactions keep their own proxies under the genesis binding, and are
/// rebound to the per-cluster proxies otherwise.
pub fn rebind_if(txn: &Transaction, binding: ProxyBinding, proxies: &[ForkId]) -> Transaction {
    match binding {
        ProxyBinding::Genesis => txn.clone(),
        ProxyBinding::BestAt(_) => rebind(txn, proxies),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationWitness {
    pub a: String,
    pub b: String,
    pub distance: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpaceCheck {
    pub kind: SpaceKind,
    pub points: usize,
    pub epsilon: Rational,
    pub discrete: bool,
    pub basis: Vec<Vec<String>>,
    /// Distinct pairs at distance not above ε.
    pub separation_failures: Vec<SeparationWitness>,
    /// Pairs with no defined distance, kept out of every ball.
    pub undefined_pairs: usize,
}

impl SpaceCheck {
    pub fn of(space: &FiniteSpace) -> Self {
        let label = |i: usize| space.labels()[i].clone();
        SpaceCheck {
            kind: space.kind(),
            points: space.len(),
            epsilon: space.epsilon(),
            discrete: space.is_discrete(),
            basis: space.basis().iter().map(|b| space.labels_of(b)).collect(),
            separation_failures: space
                .separation_failures()
                .into_iter()
                .map(|(a, b, distance)| SeparationWitness { a: label(a), b: label(b), distance })
                .collect(),
            undefined_pairs: space.table().undefined_pairs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricChecks {
    pub transaction: MetricReport,
    pub fork: MetricReport,
    pub fork_first_fork: MetricReport,
    pub growing: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpaceChecks {
    pub transaction: SpaceCheck,
    pub fork: SpaceCheck,
    pub fork_first_fork: SpaceCheck,
    pub transaction_first_fork: SpaceCheck,
    pub growing: SpaceCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub horizon: Step,
    pub clusters: usize,
    pub binding: ProxyBinding,
    pub proxies: Vec<ForkId>,
    pub all_clusters_fork: bool,
    pub metrics: MetricChecks,
    pub spaces: SpaceChecks,
    pub diagram: DiagramReport,
    /// One line per failed check; empty exactly when `passed`.
    pub violations: Vec<String>,
}

impl VerifyReport {
    /// Triangle violations outside every proof case, across all metrics.
    pub fn uncovered_count(&self) -> usize {
        let m = &self.metrics;
        m.transaction.uncovered.len()
            + m.fork.uncovered.len()
            + m.fork_first_fork.uncovered.len()
            + m.growing.uncovered.len()
    }
}

fn general(_: usize, _: usize, _: usize) -> TripleCase {
    TripleCase::General
}

fn metric_violations(name: &str, r: &MetricReport, out: &mut Vec<String>) {
    if !r.symmetry_failures.is_empty() {
        out.push(format!("{name} distance: {} symmetry failures", r.symmetry_failures.len()));
    }
    if !r.nonnegativity_failures.is_empty() {
        out.push(format!("{name} distance: {} negative values", r.nonnegativity_failures.len()));
    }
    if let Some(w) = r.triangle_failures.first() {
        out.push(format!(
            "{name} distance: {} triangle failures, first d({},{})={} > d({},{})+d({},{})={}+{}",
            r.triangle_failures.len(),
            w.x,
            w.y,
            w.d_xy,
            w.x,
            w.z,
            w.z,
            w.y,
            w.d_xz,
            w.d_zy
        ));
    }
}

fn space_violations(name: &str, s: &SpaceCheck, out: &mut Vec<String>) {
    if !s.discrete {
        let detail = s
            .separation_failures
            .first()
            .map(|w| format!(", e.g. d({},{})={} <= epsilon={}", w.a, w.b, w.distance, s.epsilon))
            .unwrap_or_default();
        out.push(format!("{name} space: basis is not the singletons{detail}"));
    }
}

pub fn verify(growing: &[GrowingFork], binding: ProxyBinding) -> Result<VerifyReport, ReportError> {
    let horizon = horizon_of(growing)?;
    let proxies = resolve_proxies(growing, binding)?;

    let txn = transaction_space("transaction", &transaction_points_at(growing, &proxies, horizon))?;
    let fork: ForkSpace = fork_space("fork", &fork_points_at(growing, &proxies, horizon))?;
    let diagram = build_diagram(growing, &proxies)?;
    let diagram_report = verify_diagram(&diagram, growing)?;

    let metrics = MetricChecks {
        transaction: verify_metric_axioms(txn.table(), general),
        fork: verify_metric_axioms(fork.space.table(), |x, z, y| fork.classify(x, z, y)),
        fork_first_fork: verify_metric_axioms(diagram.fork.space.table(), |x, z, y| diagram.fork.classify(x, z, y)),
        growing: verify_metric_axioms(diagram.growing.table(), general),
    };
    let spaces = SpaceChecks {
        transaction: SpaceCheck::of(&txn),
        fork: SpaceCheck::of(&fork.space),
        fork_first_fork: SpaceCheck::of(&diagram.fork.space),
        transaction_first_fork: SpaceCheck::of(&diagram.txn),
        growing: SpaceCheck::of(&diagram.growing),
    };

    let mut violations = Vec::new();
    metric_violations("transaction", &metrics.transaction, &mut violations);
    metric_violations("fork", &metrics.fork, &mut violations);
    metric_violations("first-fork", &metrics.fork_first_fork, &mut violations);
    metric_violations("growing", &metrics.growing, &mut violations);
    space_violations("transaction", &spaces.transaction, &mut violations);
    space_violations("fork", &spaces.fork, &mut violations);
    space_violations("first-fork", &spaces.fork_first_fork, &mut violations);
    space_violations("growing", &spaces.growing, &mut violations);
    let d = &diagram_report;
    if !d.h.holds() {
        violations.push(format!(
            "h is not a homeomorphism (bijective={}, continuous={}, inverse_continuous={})",
            d.h.bijective, d.h.continuous, d.h.inverse_continuous
        ));
    }
    if !d.g.continuous {
        violations.push(format!("g is not continuous, witness {:?}", d.g.witness.clone().unwrap_or_default()));
    }
    if !d.hg.continuous || !d.hg.commutes {
        violations.push(format!("h∘g: continuous={}, commutes={}", d.hg.continuous, d.hg.commutes));
    }
    if !d.g_images_valid {
        violations.push("g: a first-fork image is not the first forking snapshot".into());
    }

    Ok(VerifyReport {
        passed: violations.is_empty(),
        horizon,
        clusters: growing.len(),
        binding,
        proxies,
        all_clusters_fork: growing.iter().all(|g| g.first_fork_time().is_some()),
        metrics,
        spaces,
        diagram: diagram_report,
        violations,
    })
}
