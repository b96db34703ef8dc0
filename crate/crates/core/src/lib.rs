pub mod error;
pub mod factor;
pub mod growth;
pub mod leadlag;
pub mod modes;
pub mod numerics;
pub mod oos;
pub mod panel;
pub mod pipeline;
pub mod report;
pub mod spectrum;
pub mod synthetic;
pub mod xspec;

pub use error::{Error, ErrorKind, Result};
pub use pipeline::{run_pipeline, run_stages, RunConfig, RunOutcome, Stage};
