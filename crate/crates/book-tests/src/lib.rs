//! Runs the code listings of the guide as doc-tests, one module per chapter
//! so that a failure names its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/measure.md")]
pub mod measure {}
#[doc = include_str!("../../../book/src/remainder.md")]
pub mod remainder {}
#[doc = include_str!("../../../book/src/profiles.md")]
pub mod profiles {}
#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}
#[doc = include_str!("../../../book/src/functionals.md")]
pub mod functionals {}
#[doc = include_str!("../../../book/src/identities.md")]
pub mod identities {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
