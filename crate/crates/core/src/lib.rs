//! Multi-block ADMM solvers for two isotonic regression problems.
//!
//! * [`smooth`] fits a non-decreasing sequence to observations on a chain, with
//!   an additional quadratic penalty on adjacent differences.
//! * [`dag`] fits values that respect an arbitrary set of `tail <= head` edge
//!   constraints (a partial order such as the 2-D dominance order on a grid).
//!
//! Both solvers split the problem into three primal blocks whose subproblems
//! have closed-form, coordinate-separable solutions. Exact small-instance
//! reference solvers live in [`oracle`], reproducible instance generators in
//! [`datagen`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod dag;
pub mod datagen;
pub mod error;
pub mod incidence;
pub mod io;
pub mod oracle;
mod par;
pub mod problem;
pub mod report;
pub mod smooth;

pub use config::{Init, SolverConfig};
pub use error::{Error, Result};
pub use incidence::IncidenceEncoding;
pub use problem::{DagInstance, SmoothInstance};
pub use report::{RunReport, Status, TraceRecord};
