//! Numerical toolkit for Orlicz-space potential theory on periodic grids.
//!
//! The modules build on each other: [`young`] growth laws feed the modulars in
//! [`orlicz`], which measure fields from [`field`]; [`bessel`] supplies the
//! potentials, [`sobolev`] the Gagliardo modulars, [`lpatoms`] the
//! Littlewood–Paley and atomic machinery and [`radial`] the decay estimates.
//! [`harness`] wires everything into reproducible verification suites.

pub mod bessel;
pub mod error;
pub mod field;
pub mod harness;
pub mod lpatoms;
pub mod orlicz;
pub mod quad;
pub mod radial;
pub mod sobolev;
pub mod young;

pub use error::{Error, Result};
pub use field::{Field, Grid, ProductField};
pub use young::{GrowthIndices, YoungFunction};
