//! Mixed finite elements for the linearized rotating shallow-water
//! equations with nonlinear bottom drag.

pub mod assembly;
pub mod damping;
pub mod decay;
mod dense;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod linsolve;
pub mod mesh;
pub mod quadrature;
pub mod space;
pub mod sparse;
pub mod timestep;

pub use damping::{DampingKind, DampingLaw, DecayClass, StructuralConstants};
pub use error::{Error, Result};
pub use mesh::Mesh;
pub use space::{FunctionSpacePair, Order};

// The guide's code blocks run as doctests, one module per chapter so a
// failure points at its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/damping.md")]
    mod damping {}
    #[doc = include_str!("../../../book/src/stepping.md")]
    mod stepping {}
    #[doc = include_str!("../../../book/src/decay.md")]
    mod decay {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
