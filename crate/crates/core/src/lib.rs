pub mod affine;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod cohomology;
pub mod context;
pub mod curve;
pub mod dbar;
pub mod error;
pub mod fields;
pub mod hodge;
pub mod kernels;
pub mod poly;
pub mod quad;
pub mod report;
pub mod residue;
pub mod roots;
pub mod validate;

pub use context::CurveContext;
pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/hodge.md")]
    mod hodge {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/cohomology.md")]
    mod cohomology {}
    #[doc = include_str!("../../../book/src/affine.md")]
    mod affine {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
