//! Summability of sequences of closed sets under the Wijsman topology.
//!
//! A set sequence is reduced to a [`metric_sets::DistanceTrace`], the values
//! `d(x, A_k)` at a finite list of probe points. Everything downstream is
//! computed from traces: Cesaro-submethod and deferred means, statistical
//! densities, ideal-convergence verdicts and the implication checks between
//! them.

pub mod cli;
pub mod error;
pub mod identities;
pub mod ideals;
pub mod index_methods;
pub mod metric_sets;
pub mod numeric;
pub mod scenarios;
pub mod statistical;
pub mod transforms;

pub use error::{Error, Result};
pub use ideals::{Ideal, IdealKind, IdealVerdict, IndexSet, Status, VerdictMode, VerdictParams};
pub use index_methods::{lambda_for_horizon, parse_lambda, DeferredPair, IndexMethod};
pub use metric_sets::{ClosedSet, DistanceTrace, MetricPoint, SetSequence};
pub use transforms::{MeanSeries, SeriesKind};
