//! File formats, reports, the analysis pipeline and the HTTP job service
//! built on `trussweb-core`.

pub mod advisor;
pub mod catalog;
pub mod error;
pub mod image;
pub mod model_csv;
pub mod pipeline;
pub mod report;
pub mod service;
pub mod store;

pub use error::{Error, Result};
