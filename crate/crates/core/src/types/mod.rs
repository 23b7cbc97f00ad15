//! Domain types: points, PSD matrices, discrete Lévy measures, triplets and couplings.

mod coupling;
mod matrix;
mod measure;
mod point;
mod triplet;

pub use coupling::{validate_coupling, CouplingAtom, LevyCoupling, MarginalCertificate, Side};
pub use matrix::PsdMatrix;
pub use measure::{Atom, DiscreteLevyMeasure};
pub use point::Point;
pub(crate) use point::{dist_sq, dot, lex_cmp};
pub use triplet::LevyTriplet;
