//! Quaternion function theory: algebra, exponential and logarithm with branch control,
//! noncommutative word calculus, line integrals, and the Cauchy, Laurent, residue and
//! argument-principle machinery.

pub mod cauchy;
pub mod crcheck;
pub mod elem;
pub mod error;
pub mod io;
pub mod paths;
pub mod quat;
pub mod residues;
pub mod roots;
pub mod words;

pub use error::{Error, Result};
pub use paths::{Circle, Partition, Path, QuadOptions, QuadratureResult};
pub use quat::{ExtendedPoint, Quaternion, I, J, K, L, ZERO};
pub use words::{Factor, Hat, Phrase, SandwichForm, Word};
