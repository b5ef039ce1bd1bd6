//! Trace-level comparison of human and GUI-agent search behavior.
//!
//! The crate ingests interaction traces from two cohorts working on the same
//! search tasks and compares them on three dimensions: task outcome and
//! effort ([`outcome`]), query formulation ([`query`]) and navigation over
//! semantic interface states ([`nav`]). [`stats`] holds the statistical
//! procedures they share, [`synth`] generates seeded synthetic cohorts and
//! [`report`] assembles everything into a deterministic JSON report.

pub mod error;
pub mod nav;
pub mod outcome;
pub mod query;
pub mod report;
pub mod stats;
pub mod synth;
pub mod trace;

pub use error::{Error, ErrorCode, Result};
