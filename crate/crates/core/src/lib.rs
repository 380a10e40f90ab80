//! Plane truss analysis, IS 800 angle design, member size optimization and
//! SIMP topology optimization of gusset plates.
//!
//! Everything here is `no_std` and allocation-only. File formats, reports and
//! the HTTP service live in the `trussweb` crate.
#![no_std]

extern crate alloc;

pub mod design;
pub mod error;
pub mod fixtures;
pub mod gusset;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod plate;
pub mod sizing;
pub mod topopt;
pub mod truss;

pub use error::{Axis, Error, Result};
