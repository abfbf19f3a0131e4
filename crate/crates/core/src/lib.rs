//! Primitive-vector key agreement plus a two-layer matrix cipher over F_p.
//!
//! Layering, bottom up: [`field`], [`keyexchange`], [`kdfstream`],
//! [`matrixcore`], [`codec`], [`cipher`]. [`analysis`] hosts the measurement
//! harness used by the acceptance suite and the CLI.

pub mod analysis;
pub mod cipher;
pub mod codec;
pub mod error;
pub mod field;
pub mod kdfstream;
pub mod keyexchange;
pub mod matrixcore;
pub mod reference;

pub use error::{Error, Result};
