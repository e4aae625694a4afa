pub mod error;
pub mod eval;
pub mod harmonic;
pub mod ingest;
pub mod lrmodel;
pub mod pipeline;
pub mod scoring;
pub mod sharegraph;
pub mod synth;
pub mod topicmodel;

pub use error::{Error, Result};
