//! Gaussian-atom image models and descent-based translation registration.
//!
//! Images are modelled as finite sums of anisotropic Gaussian atoms. On that
//! model the SSD distance between an image and its translates, its
//! derivatives, the neighborhood where the distance has a single extremum,
//! and noise-driven alignment error bounds all have closed forms. The
//! registration layer builds covering grids from those neighborhoods and
//! refines grid estimates by gradient descent.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar type for callers that do not care.

// `!(x > 0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atoms;
pub mod bounds;
pub mod distance;
pub mod error;
pub mod ingestion;
pub mod linalg;
pub mod noise;
pub mod raster;
pub mod registration;
pub mod scalar;
pub mod siden;

pub use atoms::{
    atom_inner_product, pattern_inner_product, pattern_norm, smooth_pattern, translate_pattern,
    Atom, Pattern,
};
pub use bounds::{
    correlation_bound, default_correlation_range, gaussian_bound, gaussian_bound_with,
    generic_bound, mean_deviation, noise_response, second_derivative_constants,
    second_derivative_norm_bound, sharpened_variance_constants, tbar0, uncorrelated_bound,
    var_dh_constant, var_h2_constant, BoundReport, GenericBound, NoiseKind, NoiseSpec,
    PatternConstants, SecondDerivativeConstants, UncorrelatedBound, VarianceMode,
};
pub use distance::{
    distance_derivative, distance_second_derivative, pair_terms, pattern_distance, DistanceField,
    DistanceProfile, PairTerms, PatternPairs, Translation,
};
pub use error::{Error, Result};
pub use linalg::{Sym2, Vec2};
pub use noise::{
    add_digital_noise, distance_deviation, make_generic_noise, random_pattern,
    sample_gaussian_field, smoothed_noise_params, trial_rng, GenericNoiseMode, NoiseDraw,
    RandomPatternSpec,
};
pub use raster::{evaluate_pattern, RasterImage, RasterShape};
pub use registration::{
    build_grid, descend, descend_field, multiscale_register, plan_schedule, two_stage_register,
    two_stage_register_with, DescentOptions, RegistrationResult, TranslationGrid, TwoStageOptions,
};
pub use scalar::Scalar;
pub use siden::{
    alpha_coefficients, delta_t, siden_area, siden_boundary, smoothed_siden_boundary,
    true_siden_boundary, AlphaCoefficients, SidenEstimate,
};

pub type Atom64 = Atom<f64>;
pub type Atom32 = Atom<f32>;
pub type Pattern64 = Pattern<f64>;
pub type Pattern32 = Pattern<f32>;
pub type Vec2d = Vec2<f64>;
pub type Vec2f = Vec2<f32>;
pub type Translation64 = Translation<f64>;
pub type Translation32 = Translation<f32>;
