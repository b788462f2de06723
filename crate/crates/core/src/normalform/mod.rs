//! Linearizing transformations, SSM pullbacks and extended normal forms on
//! 2D fractional SSMs.

mod extended;
mod linearize;
pub mod poly;

pub use extended::{
    backbone, damping, extended_normalform_2d, normalize_series, resonance_test_2d, write_curve_csv, ExtendedNormalForm,
    FracExponents, GenIndex, NormalForm2D, NormalFormTerm,
};
pub use linearize::{
    invariance_residual, linear_point, linearize, linearize_with, pullback_graph, shaw_pierre_poly_system, spec_layout,
    validity_radius, LinearizeOptions, LinearizingTransform, PolySystem, SmallDivisorEntry, NEAR_RESONANCE_REL, RADIUS_GAP,
    SMALL_DIVISOR_REL,
};
