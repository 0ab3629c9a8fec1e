//! Decomposition of non-modular set functions into a supermodular and a
//! submodular part, the convex surrogates built on top of them, and a
//! cutting-plane trainer for structured output prediction over bags.
//!
//! Everything numeric is generic over [`scalar::Scalar`], which is
//! implemented for `f32`, `f64` and exact rationals (`BigRational`). The
//! aliases below fix the scalar for the common cases.

pub mod decomp;
pub mod error;
pub mod losses;
pub mod lp;
pub mod model;
pub mod scalar;
pub mod setfn;
pub mod surrogates;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use setfn::{GroundSet, Label, MistakeSet, Subset};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type SetFn = setfn::SetFunction<f64>;
pub type SetFn32 = setfn::SetFunction<f32>;
pub type ExactSetFn = setfn::SetFunction<Rational>;

pub type Decomp = decomp::Decomposition<f64>;
pub type ExactDecomp = decomp::Decomposition<Rational>;

pub type Model = model::LinearModel<f64>;
pub type Bag = model::Sample<f64>;
pub type Loss = losses::LossSpec<f64>;
