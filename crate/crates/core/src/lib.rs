//! Fork dynamics of several independent blockchains, the three finite metric
//! spaces built on top of them (transaction outcomes, static fork graphs and
//! growing fork graphs), and mechanical checks of the topology those metrics
//! induce.
//!
//! Every distance, radius and probability is an exact [`Rational`].

pub mod completion;
pub mod metrics;
pub mod model;
pub mod morphisms;
pub mod prng;
pub mod rational;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod spaces;
pub mod topology;
pub mod trace;

pub use model::{
    ClusterId, Fork, ForkGraph, ForkId, ForkState, ModelError, Outcome, Party, Step, Transaction, TxnOutcome,
    TxnVerdict,
};
pub use rational::Rational;
pub use scenario::{parse_scenario, Scenario, ScenarioError};
pub use sim::{simulate, GrowingFork, SimConfig, SimError};
pub use trace::{Trace, TraceError, TraceEvent};
