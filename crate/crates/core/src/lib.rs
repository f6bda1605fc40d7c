//! Exact-arithmetic toolkit for the pole-order spectral sequence of a
//! reduced projective hypersurface: graded polynomial calculus, sparse
//! rank/kernel engines over the rationals, Jacobian syzygies, second-page
//! dimensions, pole-order spectra and Alexander polynomials.

pub mod cli;
pub mod forms;
pub mod linalg;
pub mod monodromy;
pub mod poly;
pub mod spectral;
pub mod syzygy;
