//! JSON Lines trace files and snapshot replay.
//!
//! The first line echoes the configuration and the scenario's transactions:
//!
//! ```text
//! {"event":"config","seed":7,"horizon":3,"clusters":2,"fork_prob":["9/10","1/10"],"confirm_depth":2,"transactions":[]}
//! {"t":1,"cluster":0,"event":"extend","fork":0,"len":1}
//! {"t":1,"cluster":0,"event":"spawn","fork":1,"parent":0}
//! {"t":2,"cluster":1,"event":"eliminate","fork":2}
//! ```
//!
//! Events are ordered by step, then cluster, then emission order. Confirmed
//! and Undecided are not recorded; replay derives them from the fork set.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::model::{ClusterId, Fork, ForkGraph, ForkId, ForkState, Step, Transaction};
use crate::rational::Rational;
use crate::sim::{GrowingFork, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Spawn { fork: ForkId, parent: ForkId },
    Extend { fork: ForkId, len: u64 },
    Eliminate { fork: ForkId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub t: Step,
    pub cluster: ClusterId,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub config: SimConfig,
    pub transactions: Vec<Transaction>,
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace has no config line")]
    MissingConfig,
    #[error("line {line}: inconsistent event: {message}")]
    Corrupt { line: usize, message: String },
    #[error("step {t} is outside 0..={horizon}")]
    OutOfRange { t: Step, horizon: Step },
    #[error("no cluster {0} in trace")]
    MissingCluster(ClusterId),
}

#[derive(Serialize)]
struct ConfigLineOut<'a> {
    event: &'static str,
    seed: u64,
    horizon: Step,
    clusters: usize,
    fork_prob: &'a [Rational],
    confirm_depth: u64,
    transactions: &'a [Transaction],
}

#[derive(Serialize)]
struct SpawnOut {
    t: Step,
    cluster: ClusterId,
    event: &'static str,
    fork: ForkId,
    parent: ForkId,
}

#[derive(Serialize)]
struct ExtendOut {
    t: Step,
    cluster: ClusterId,
    event: &'static str,
    fork: ForkId,
    len: u64,
}

#[derive(Serialize)]
struct EliminateOut {
    t: Step,
    cluster: ClusterId,
    event: &'static str,
    fork: ForkId,
}

#[derive(Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
enum LineIn {
    Config {
        seed: u64,
        horizon: Step,
        clusters: usize,
        fork_prob: Vec<Rational>,
        confirm_depth: u64,
        #[serde(default)]
        transactions: Vec<Transaction>,
    },
    Spawn {
        t: Step,
        cluster: ClusterId,
        fork: ForkId,
        parent: ForkId,
    },
    Extend {
        t: Step,
        cluster: ClusterId,
        fork: ForkId,
        len: u64,
    },
    Eliminate {
        t: Step,
        cluster: ClusterId,
        fork: ForkId,
    },
}

impl TraceEvent {
    fn to_json(self) -> String {
        let TraceEvent { t, cluster, kind } = self;
        let s = match kind {
            EventKind::Spawn { fork, parent } => {
                serde_json::to_string(&SpawnOut { t, cluster, event: "spawn", fork, parent })
            }
            EventKind::Extend { fork, len } => {
                serde_json::to_string(&ExtendOut { t, cluster, event: "extend", fork, len })
            }
            EventKind::Eliminate { fork } => {
                serde_json::to_string(&EliminateOut { t, cluster, event: "eliminate", fork })
            }
        };
        s.expect("event serialization is infallible")
    }
}

impl Trace {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = ConfigLineOut {
            event: "config",
            seed: self.config.seed,
            horizon: self.config.horizon,
            clusters: self.config.clusters,
            fork_prob: &self.config.fork_prob,
            confirm_depth: self.config.confirm_depth,
            transactions: &self.transactions,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for e in &self.events {
            out.write_all(e.to_json().as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TraceError> {
        let mut config = None;
        let mut transactions = Vec::new();
        let mut events = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LineIn =
                serde_json::from_str(&line).map_err(|e| TraceError::Parse { line: line_no, message: e.to_string() })?;
            let event = match parsed {
                LineIn::Config { seed, horizon, clusters, fork_prob, confirm_depth, transactions: txns } => {
                    if config.is_some() || !events.is_empty() {
                        return Err(TraceError::Corrupt {
                            line: line_no,
                            message: "config must be the first and only header".into(),
                        });
                    }
                    config = Some(SimConfig { seed, horizon, clusters, fork_prob, confirm_depth });
                    transactions = txns;
                    continue;
                }
                LineIn::Spawn { t, cluster, fork, parent } => {
                    TraceEvent { t, cluster, kind: EventKind::Spawn { fork, parent } }
                }
                LineIn::Extend { t, cluster, fork, len } => {
                    TraceEvent { t, cluster, kind: EventKind::Extend { fork, len } }
                }
                LineIn::Eliminate { t, cluster, fork } => {
                    TraceEvent { t, cluster, kind: EventKind::Eliminate { fork } }
                }
            };
            let Some(cfg) = config.as_ref() else {
                return Err(TraceError::MissingConfig);
            };
            if event.t == 0 || event.t > cfg.horizon || event.cluster >= cfg.clusters {
                return Err(TraceError::Corrupt {
                    line: line_no,
                    message: format!("event at step {} for cluster {} out of bounds", event.t, event.cluster),
                });
            }
            if let Some(prev) = events.last().map(|e: &TraceEvent| (e.t, e.cluster)) {
                if prev > (event.t, event.cluster) {
                    return Err(TraceError::Corrupt { line: line_no, message: "events out of order".into() });
                }
            }
            events.push(event);
        }
        let config = config.ok_or(TraceError::MissingConfig)?;
        let trace = Trace { config, transactions, events };
        // Catch dangling fork references now rather than at query time.
        trace.replay()?;
        Ok(trace)
    }

    pub fn horizon(&self) -> Step {
        self.config.horizon
    }

    pub fn clusters(&self) -> usize {
        self.config.clusters
    }

    /// Every cluster's full snapshot sequence.
    pub fn replay(&self) -> Result<Vec<GrowingFork>, TraceError> {
        let mut graphs: Vec<ForkGraph> = (0..self.clusters()).map(ForkGraph::genesis).collect();
        let mut history: Vec<GrowingFork> =
            graphs.iter().map(|g| GrowingFork { cluster: g.cluster, snapshots: vec![g.clone()] }).collect();
        let mut pending = self.events.iter().enumerate().peekable();
        for t in 1..=self.horizon() {
            while let Some((idx, e)) = pending.next_if(|(_, e)| e.t == t) {
                apply(&mut graphs[e.cluster], e, idx)?;
            }
            for (g, h) in graphs.iter_mut().zip(history.iter_mut()) {
                g.derive_states();
                h.snapshots.push(g.clone());
            }
        }
        Ok(history)
    }

    /// The fork graph of `cluster` after all events up to and including step `t`.
    pub fn snapshot(&self, cluster: ClusterId, t: Step) -> Result<ForkGraph, TraceError> {
        if t > self.horizon() {
            return Err(TraceError::OutOfRange { t, horizon: self.horizon() });
        }
        if cluster >= self.clusters() {
            return Err(TraceError::MissingCluster(cluster));
        }
        let mut graph = ForkGraph::genesis(cluster);
        for (idx, e) in self.events.iter().enumerate().take_while(|(_, e)| e.t <= t) {
            if e.cluster == cluster {
                apply(&mut graph, e, idx)?;
            }
        }
        graph.derive_states();
        Ok(graph)
    }
}

fn apply(graph: &mut ForkGraph, e: &TraceEvent, idx: usize) -> Result<(), TraceError> {
    // +2: one for 1-based lines, one for the config header.
    let corrupt = |message: String| TraceError::Corrupt { line: idx + 2, message };
    match e.kind {
        EventKind::Spawn { fork, parent } => {
            if fork != graph.forks.len() {
                return Err(corrupt(format!("spawned fork {fork} is not the next fresh id")));
            }
            let length = graph.fork(parent).map_err(|err| corrupt(err.to_string()))?.length;
            graph.forks.push(Fork {
                id: fork,
                cluster: graph.cluster,
                state: ForkState::Undecided,
                length,
                parent: Some(parent),
                spawn_step: e.t,
            });
        }
        EventKind::Extend { fork, len } => {
            graph.fork_mut(fork).map_err(|err| corrupt(err.to_string()))?.length = len;
        }
        EventKind::Eliminate { fork } => {
            graph.fork_mut(fork).map_err(|err| corrupt(err.to_string()))?.state = ForkState::Eliminated;
        }
    }
    Ok(())
}
