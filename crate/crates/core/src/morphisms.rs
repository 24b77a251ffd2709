//! The maps between the three spaces and the diagram they form.
//!
//! `g` flattens each growing fork graph to its snapshot at the step it first
//! forks (the empty graph if it never does); `h` sends the fork graph of
//! cluster `i` to cluster `i`'s transaction point. The fork and transaction
//! spaces of the diagram each carry one `empty` point when some cluster never
//! forks, and `h` matches the two.

use serde::Serialize;

use crate::model::{ForkGraph, ForkId, Step};
use crate::sim::GrowingFork;
use crate::spaces::{
    fork_space, growing_space, proxy_outcome, transaction_space, ForkPoint, ForkSpace, TxnPoint, EMPTY_LABEL,
};
use crate::topology::{
    check_continuity, check_homeomorphism, compose, ContinuityReport, FiniteSpace, HomeomorphismReport, PointMap,
    PointSet, TopologyError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MorphismError {
    #[error("fork space has {fork} points but transaction space has {txn}")]
    SizeMismatch { fork: usize, txn: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// `h`: point `i` of the fork space to point `i` of the transaction space.
pub fn build_h(fork: &FiniteSpace, txn: &FiniteSpace) -> Result<PointMap, MorphismError> {
    if fork.len() != txn.len() {
        return Err(MorphismError::SizeMismatch { fork: fork.len(), txn: txn.len() });
    }
    Ok(PointMap::new(fork, txn, (0..fork.len()).collect())?)
}

/// The set-level action of an index-preserving map: `u = F_I ↦ v = C_I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexCorrespondence {
    pub index_set: Vec<usize>,
    pub left: String,
    pub right: String,
    /// Whether the image of `u` carries exactly the same indices.
    pub preserved: bool,
}

impl IndexCorrespondence {
    pub fn of(map: &PointMap, u: &PointSet) -> Self {
        IndexCorrespondence {
            index_set: u.iter().copied().collect(),
            left: map.domain().to_string(),
            right: map.codomain().to_string(),
            preserved: &map.image(u) == u,
        }
    }
}

/// Where `g` sends one cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstForkImage {
    pub cluster: usize,
    /// First step with more than one fork.
    pub step: Option<Step>,
    /// `None` is the empty graph.
    pub image: Option<ForkGraph>,
    /// Forks spawned at the first-fork step: the mining event that caused it.
    pub trigger: Vec<ForkId>,
}

impl FirstForkImage {
    /// More than one fork, and exactly one fork the step before.
    pub fn is_valid(&self, source: &GrowingFork) -> bool {
        match (self.step, &self.image) {
            (None, None) => source.counts().iter().all(|&c| c == 1),
            (Some(m), Some(img)) => {
                m >= 1
                    && img.fork_count() > 1
                    && source.at(m - 1).is_some_and(|p| p.fork_count() == 1)
                    && source.at(m) == Some(img)
            }
            _ => false,
        }
    }
}

pub fn build_g_images(growing: &[GrowingFork]) -> Vec<FirstForkImage> {
    growing
        .iter()
        .map(|g| {
            let step = g.first_fork_time();
            let image = step.and_then(|m| g.at(m).cloned());
            let trigger = match (step, &image) {
                (Some(m), Some(img)) => img.forks.iter().filter(|f| f.spawn_step == m).map(|f| f.id).collect(),
                _ => Vec::new(),
            };
            FirstForkImage { cluster: g.cluster, step, image, trigger }
        })
        .collect()
}

/// The three spaces of the diagram and the maps between them.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub growing: FiniteSpace,
    pub fork: ForkSpace,
    pub txn: FiniteSpace,
    pub g: PointMap,
    pub h: PointMap,
    pub images: Vec<FirstForkImage>,
}

/// Builds the diagram. `proxies[i]` is cluster `i`'s proxy fork; the fork
/// space evaluates it in the first-fork snapshot, the transaction space at
/// the horizon.
pub fn build_diagram(growing: &[GrowingFork], proxies: &[ForkId]) -> Result<Diagram, MorphismError> {
    let images = build_g_images(growing);
    let mut fork_points = Vec::new();
    let mut txn_points = Vec::new();
    let mut slot = Vec::with_capacity(growing.len());
    for ((img, g), &proxy) in images.iter().zip(growing).zip(proxies) {
        if let Some(graph) = &img.image {
            slot.push(Some(fork_points.len()));
            fork_points.push(ForkPoint { label: format!("F{}", img.cluster), graph: Some(graph.clone()), proxy });
            let last = g.snapshots.last().expect("at least the genesis snapshot");
            txn_points.push(TxnPoint { label: format!("C{}", img.cluster), outcome: Some(proxy_outcome(last, proxy)) });
        } else {
            slot.push(None);
        }
    }
    let empty = slot.contains(&None).then_some(fork_points.len());
    if empty.is_some() {
        fork_points.push(ForkPoint { label: EMPTY_LABEL.into(), graph: None, proxy: 0 });
        txn_points.push(TxnPoint { label: EMPTY_LABEL.into(), outcome: None });
    }
    let growing_sp = growing_space("growing", growing)?;
    let fork = fork_space("fork", &fork_points)?;
    let txn = transaction_space("transaction", &txn_points)?;
    let assignment = slot.into_iter().map(|s| s.or(empty).expect("empty slot exists")).collect();
    let g = PointMap::new(&growing_sp, &fork.space, assignment)?;
    let h = build_h(&fork.space, &txn)?;
    Ok(Diagram { growing: growing_sp, fork, txn, g, h, images })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discreteness {
    pub growing: bool,
    pub fork: bool,
    pub transaction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositeReport {
    pub continuous: bool,
    pub commutes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramReport {
    /// Checked first, so a discreteness failure is told apart from a
    /// continuity failure.
    pub discrete: Discreteness,
    pub h: HomeomorphismReport,
    pub g: ContinuityReport,
    pub hg: CompositeReport,
    pub g_images_valid: bool,
    /// Growing-space points sent to the empty graph.
    pub empty_points: Vec<String>,
}

impl DiagramReport {
    pub fn passed(&self) -> bool {
        self.discrete.growing
            && self.discrete.fork
            && self.discrete.transaction
            && self.h.holds()
            && self.g.continuous
            && self.hg.continuous
            && self.hg.commutes
            && self.g_images_valid
    }
}

pub fn verify_diagram(diagram: &Diagram, growing: &[GrowingFork]) -> Result<DiagramReport, MorphismError> {
    let Diagram { growing: gs, fork, txn, g, h, images } = diagram;
    let discrete =
        Discreteness { growing: gs.is_discrete(), fork: fork.space.is_discrete(), transaction: txn.is_discrete() };
    let hg = compose(g, h)?;
    let commutes = (0..gs.len()).all(|x| hg.apply(x) == h.apply(g.apply(x)));
    let empty_points =
        images.iter().zip(gs.labels()).filter(|(img, _)| img.image.is_none()).map(|(_, l)| l.clone()).collect();
    Ok(DiagramReport {
        discrete,
        h: check_homeomorphism(h, &fork.space, txn),
        g: check_continuity(g, gs, &fork.space),
        hg: CompositeReport { continuous: check_continuity(&hg, gs, txn).continuous, commutes },
        g_images_valid: images.iter().zip(growing).all(|(img, src)| img.is_valid(src)),
        empty_points,
    })
}
