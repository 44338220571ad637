//! Liveness checking with ranking certificates.
//!
//! Three kinds of finite systems are supported, each given as a one-step
//! transition structure plus an accepting bit per state:
//!
//! * two-player reachability games ([`game`]),
//! * probabilistic transition systems ([`pts`]),
//! * deterministic tree automata ([`tree`]).
//!
//! For each kind the crate computes the least-fixed-point liveness semantics
//! exactly, checks candidate ranking certificates against their one-step
//! post-fixed-point condition, and synthesizes the optimal certificate where
//! one exists. The shared iteration engine lives in [`fixpoint`]; text formats
//! and reports live in [`io`]; independent oracles used by the test suites
//! live in [`testkit`].

pub mod error;
pub mod fixpoint;
pub mod game;
pub mod io;
pub mod linalg;
pub mod pts;
pub mod report;
pub mod testkit;
pub mod tree;
pub mod value;

pub use error::ModelError;
pub use report::{CheckReport, ReportValue, Verdict, Violation};
pub use value::{Extended, Rational};
