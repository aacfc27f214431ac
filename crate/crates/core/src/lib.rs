//! Orthotope line codes for multi-wire chip-to-chip links.
//!
//! A code is generated from a balanced initial vector `w1` by a group of
//! mutually commuting reflections. The codebook is the orbit of `w1` under
//! that group, which is the vertex set of an orthotope, so detection is a
//! bank of independent linear slicers.

pub mod analysis;
pub mod catalog;
pub mod codec;
pub mod coxeter;
pub mod document;
pub mod error;
pub mod exactla;
pub mod linecode;
pub mod optimizer;
pub mod pmset;
pub mod sim;

pub use analysis::{alphas, PerformanceProfile};
pub use coxeter::{Negation, RootSet};
pub use document::DesignDocument;
pub use error::{Error, Result};
pub use exactla::{RatMatrix, Rational};
pub use linecode::LineCode;
pub use pmset::InitialVector;
