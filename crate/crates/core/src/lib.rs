//! Informed-trading surveillance for binary prediction markets.
//!
//! Three detection layers share one immutable [`model::Corpus`]:
//!
//! * [`signrand`]: account-level skill classification by event-level
//!   sign randomization of realized PnL.
//! * [`screens`]: single-event lifecycle-and-conviction screen, flagged-account
//!   order imbalance, and a composite anomaly score per (account, market).
//! * [`ils`]: per-market deadline information-leakage score with scope gates,
//!   plus an exponential hazard fit of event lead times.
//!
//! [`pipeline`] chains them into account risk scoring, an ILS-gated market
//! queue, and a review export. [`synth`] generates labelled worlds for
//! calibration and end-to-end evaluation; [`io`] reads and writes the
//! JSON Lines corpus, configuration, and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ils;
pub mod io;
pub mod model;
pub mod parallel;
pub mod pipeline;
pub mod screens;
pub mod signrand;
pub mod stats;
pub mod synth;

#[cfg(test)]
pub(crate) mod testkit;
