//! Fractional and mixed-mode spectral submanifolds of fixed points of flows
//! and maps: spectral analysis, fractional-power dictionaries, regression of
//! SSM graphs and reduced dynamics, a small dynamics engine with the built-in
//! testbeds, and polynomial/fractional normal-form machinery.

pub mod error;
pub mod linalg;
pub mod normalform;
pub mod dictionary;
pub mod dynamics;
pub mod fit;
pub mod reference;
pub mod spectrum;
pub mod trajectory;

pub use error::{Error, Result};
