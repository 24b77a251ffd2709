//! Finite metric topology: ε-balls, the basis they induce, open sets, and
//! continuity/homeomorphism checks for point maps.
//!
//! Open sets are never enumerated. A subset is open iff it is the union of
//! the basis elements it contains, and a map is continuous iff the preimage
//! of every codomain basis element is open (preimages commute with unions).
//!
//! Balls always contain their center. A point whose distance to the center
//! is undefined is not inside the ball.

use std::collections::BTreeSet;

use serde::{Serialize, Serializer};

use crate::metrics::DistanceTable;
use crate::rational::Rational;

pub type PointSet = BTreeSet<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    TransactionSpace,
    ForkSpace,
    GrowingForkSpace,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("space has no points")]
    EmptySpace,
    #[error("point {0} is not in the space")]
    UnknownPoint(usize),
    #[error("point {0} of the subset is not in the space")]
    NotASubset(usize),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(Rational),
    #[error("point counts differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("cannot compose: codomain `{codomain}` is not domain `{domain}`")]
    DomainMismatch { codomain: String, domain: String },
    #[error("map assigns point {point} to {target}, outside the codomain")]
    NotTotal { point: usize, target: usize },
}

/// What the radius of each space kind is computed from.
#[derive(Debug, Clone, Copy)]
pub enum EpsilonInput<'a> {
    Transaction,
    /// Fork count of every graph in the space.
    Fork {
        counts: &'a [usize],
    },
    /// Per point, the fork count at that cluster's first fork, or `None` if
    /// it never forks within the horizon.
    GrowingFork {
        first_fork_counts: &'a [Option<usize>],
    },
}

/// 1/4 for transactions; `1 / (1 + sup)` over fork counts for static forks
/// and over first-fork counts for growing forks. If no cluster forks, the
/// growing-fork supremum is taken as 1.
pub fn compute_epsilon(input: EpsilonInput<'_>) -> Result<Rational, TopologyError> {
    match input {
        EpsilonInput::Transaction => Ok(Rational::new(1, 4)),
        EpsilonInput::Fork { counts } => {
            let sup = counts.iter().copied().max().ok_or(TopologyError::EmptySpace)?;
            Ok(Rational::reciprocal_of(1 + sup))
        }
        EpsilonInput::GrowingFork { first_fork_counts } => {
            if first_fork_counts.is_empty() {
                return Err(TopologyError::EmptySpace);
            }
            let sup = first_fork_counts.iter().flatten().copied().max().unwrap_or(1);
            Ok(Rational::reciprocal_of(1 + sup))
        }
    }
}

/// `{center} ∪ {p : d(center, p) < radius}`.
pub fn ball(table: &DistanceTable, center: usize, radius: Rational) -> Result<PointSet, TopologyError> {
    if center >= table.len() {
        return Err(TopologyError::UnknownPoint(center));
    }
    Ok((0..table.len()).filter(|&p| p == center || table.get(center, p).is_ok_and(|d| d < radius)).collect())
}

/// Balls of radius `epsilon` around every point, deduplicated, ordered by
/// least member.
pub fn induce_basis(table: &DistanceTable, epsilon: Rational) -> Vec<PointSet> {
    let mut basis: Vec<PointSet> = (0..table.len()).map(|p| ball(table, p, epsilon).expect("p < len")).collect();
    basis.sort_by(|a, b| a.first().cmp(&b.first()).then_with(|| a.cmp(b)));
    basis.dedup();
    basis
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    id: String,
    kind: SpaceKind,
    table: DistanceTable,
    epsilon: Rational,
    basis: Vec<PointSet>,
}

impl FiniteSpace {
    pub fn new(
        id: impl Into<String>,
        kind: SpaceKind,
        table: DistanceTable,
        epsilon: Rational,
    ) -> Result<Self, TopologyError> {
        if !epsilon.is_positive() {
            return Err(TopologyError::NonPositiveEpsilon(epsilon));
        }
        let basis = induce_basis(&table, epsilon);
        Ok(FiniteSpace { id: id.into(), kind, table, epsilon, basis })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        self.table.labels()
    }

    pub fn table(&self) -> &DistanceTable {
        &self.table
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    pub fn basis(&self) -> &[PointSet] {
        &self.basis
    }

    pub fn ball(&self, center: usize, radius: Rational) -> Result<PointSet, TopologyError> {
        ball(&self.table, center, radius)
    }

    /// True iff the basis is exactly the singletons.
    pub fn is_discrete(&self) -> bool {
        self.basis.len() == self.len() && self.basis.iter().all(|b| b.len() == 1)
    }

    pub fn is_open(&self, subset: &PointSet) -> Result<bool, TopologyError> {
        if let Some(&p) = subset.iter().find(|&&p| p >= self.len()) {
            return Err(TopologyError::NotASubset(p));
        }
        let covered: PointSet =
            self.basis.iter().filter(|b| b.is_subset(subset)).flat_map(|b| b.iter().copied()).collect();
        Ok(&covered == subset)
    }

    /// Distinct pairs with a defined distance not exceeding epsilon.
    pub fn separation_failures(&self) -> Vec<(usize, usize, Rational)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if let Ok(d) = self.table.get(i, j) {
                    if d <= self.epsilon {
                        out.push((i, j, d));
                    }
                }
            }
        }
        out
    }

    pub fn labels_of(&self, set: &PointSet) -> Vec<String> {
        set.iter().map(|&p| self.table.label(p).to_string()).collect()
    }
}

impl Serialize for FiniteSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            kind: SpaceKind,
            epsilon: Rational,
            basis: Vec<Vec<String>>,
            distances: &'a DistanceTable,
        }
        Out {
            kind: self.kind,
            epsilon: self.epsilon,
            basis: self.basis.iter().map(|b| self.labels_of(b)).collect(),
            distances: &self.table,
        }
        .serialize(serializer)
    }
}

/// A total function between the point sets of two spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    domain: String,
    codomain: String,
    codomain_len: usize,
    assignment: Vec<usize>,
}

impl PointMap {
    pub fn new(dom: &FiniteSpace, cod: &FiniteSpace, assignment: Vec<usize>) -> Result<Self, TopologyError> {
        Self::from_parts(dom.id(), dom.len(), cod.id(), cod.len(), assignment)
    }

    pub fn from_parts(
        domain: &str,
        domain_len: usize,
        codomain: &str,
        codomain_len: usize,
        assignment: Vec<usize>,
    ) -> Result<Self, TopologyError> {
        if assignment.len() != domain_len {
            return Err(TopologyError::SizeMismatch { left: assignment.len(), right: domain_len });
        }
        if let Some((point, &target)) = assignment.iter().enumerate().find(|(_, &t)| t >= codomain_len) {
            return Err(TopologyError::NotTotal { point, target });
        }
        Ok(PointMap { domain: domain.into(), codomain: codomain.into(), codomain_len, assignment })
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        PointMap {
            domain: space.id().into(),
            codomain: space.id().into(),
            codomain_len: space.len(),
            assignment: (0..space.len()).collect(),
        }
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn codomain(&self) -> &str {
        &self.codomain
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn apply(&self, x: usize) -> usize {
        self.assignment[x]
    }

    pub fn image(&self, set: &PointSet) -> PointSet {
        set.iter().map(|&x| self.assignment[x]).collect()
    }

    pub fn preimage(&self, set: &PointSet) -> PointSet {
        self.assignment.iter().enumerate().filter(|(_, y)| set.contains(y)).map(|(x, _)| x).collect()
    }

    pub fn is_bijective(&self) -> bool {
        if self.assignment.len() != self.codomain_len {
            return false;
        }
        let mut seen = vec![false; self.codomain_len];
        self.assignment.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn inverse(&self) -> Option<PointMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.codomain_len];
        for (x, &y) in self.assignment.iter().enumerate() {
            inv[y] = x;
        }
        Some(PointMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            codomain_len: self.assignment.len(),
            assignment: inv,
        })
    }
}

/// `h ∘ g`: apply `g`, then `h`.
pub fn compose(g: &PointMap, h: &PointMap) -> Result<PointMap, TopologyError> {
    if g.codomain != h.domain || g.codomain_len != h.assignment.len() {
        return Err(TopologyError::DomainMismatch { codomain: g.codomain.clone(), domain: h.domain.clone() });
    }
    Ok(PointMap {
        domain: g.domain.clone(),
        codomain: h.codomain.clone(),
        codomain_len: h.codomain_len,
        assignment: g.assignment.iter().map(|&y| h.assignment[y]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuityReport {
    pub continuous: bool,
    /// First codomain basis element whose preimage is not open.
    pub witness: Option<Vec<String>>,
}

pub fn check_continuity(f: &PointMap, dom: &FiniteSpace, cod: &FiniteSpace) -> ContinuityReport {
    for b in cod.basis() {
        let pre = f.preimage(b);
        if !dom.is_open(&pre).expect("preimage lies in the domain") {
            return ContinuityReport { continuous: false, witness: Some(cod.labels_of(b)) };
        }
    }
    ContinuityReport { continuous: true, witness: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HomeomorphismReport {
    pub bijective: bool,
    pub continuous: bool,
    /// Always false when the map is not bijective (no inverse to check).
    pub inverse_continuous: bool,
}

impl HomeomorphismReport {
    pub fn holds(&self) -> bool {
        self.bijective && self.continuous && self.inverse_continuous
    }
}

pub fn check_homeomorphism(f: &PointMap, dom: &FiniteSpace, cod: &FiniteSpace) -> HomeomorphismReport {
    let continuous = check_continuity(f, dom, cod).continuous;
    match f.inverse() {
        Some(inv) => HomeomorphismReport {
            bijective: true,
            continuous,
            inverse_continuous: check_continuity(&inv, cod, dom).continuous,
        },
        None => HomeomorphismReport { bijective: false, continuous, inverse_continuous: false },
    }
}
