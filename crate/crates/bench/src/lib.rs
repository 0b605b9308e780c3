//! Fixtures shared by the benchmarks.

use qholo::{Circle, Path, Phrase, Quaternion, I, J, K, L, ZERO};

/// Left-form Laurent phrase `J z^3 + K z - L z^(-2)`.
pub fn laurent_fixture() -> Phrase {
    Phrase::left_form(ZERO, &[(J, 3), (K, 1), (-L, -2)])
}

/// A point off every coordinate plane.
pub fn generic_point() -> Quaternion {
    Quaternion::new(0.3, -0.7, 0.45, 0.2)
}

/// Unit circle around the origin in the `(I, J)` plane.
pub fn unit_circle() -> Path {
    Path::Circle(Circle::new(ZERO, 1.0, J, 1.0).expect("valid circle"))
}

/// Monic quadratic with a unit imaginary root.
pub fn quadratic() -> Phrase {
    Phrase::left_form(ZERO, &[(I, 2), (I, 0)])
}
