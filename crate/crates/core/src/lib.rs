pub mod catalog;
pub mod document;
pub mod erasure;
pub mod error;
pub mod fusion;
pub mod hilbert;
pub mod phase;
pub mod weaving;

pub use error::{Error, Result};
