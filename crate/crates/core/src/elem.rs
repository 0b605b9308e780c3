//! Exponential, argument, logarithm and polar form with branch conventions.
//!
//! `exp(v + u) = e^v (cos|u| + u sin|u| / |u|)` for imaginary `u`. The argument of
//! `z != 0` is the imaginary quaternion `arg(z) = w_z J + x_z K + y_z L` (measured in turns)
//! with `|z| exp(2 pi arg(z)) = z`, `|arg(z)| < 1` and a non-negative leading
//! coefficient among `(w_z, x_z, y_z)`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{epsilon, Quaternion, BASIS, I, J, ZERO};

/// Real-linear map of the quaternions as a 4x4 matrix acting on `(v, w, x, y)` columns.
pub type LinearMap = Matrix4<f64>;

pub fn to_vec(q: Quaternion) -> Vector4<f64> {
    Vector4::new(q.v, q.w, q.x, q.y)
}

pub fn from_vec(v: &Vector4<f64>) -> Quaternion {
    Quaternion::new(v[0], v[1], v[2], v[3])
}

/// Applies a linear map to a quaternion.
pub fn apply(m: &LinearMap, h: Quaternion) -> Quaternion {
    from_vec(&(m * to_vec(h)))
}

/// Matrix of `h -> f(h)` assembled from the images of the basis.
pub fn matrix_of(mut f: impl FnMut(Quaternion) -> Quaternion) -> LinearMap {
    let mut m = LinearMap::zeros();
    for (c, e) in BASIS.iter().enumerate() {
        m.set_column(c, &to_vec(f(*e)));
    }
    m
}

/// `sin(phi) / phi` with a series guard near zero.
pub fn sinc(phi: f64) -> f64 {
    if phi.abs() < 1e-8 {
        1.0 - phi * phi / 6.0
    } else {
        phi.sin() / phi
    }
}

/// Closed-form exponential.
pub fn exp(z: Quaternion) -> Quaternion {
    let ev = z.v.exp();
    let phi = z.imag_norm();
    if phi == 0.0 {
        return Quaternion::real(ev);
    }
    let s = ev * sinc(phi);
    Quaternion::new(ev * phi.cos(), s * z.w, s * z.x, s * z.y)
}

/// Partial sum `sum_{n < terms} z^n / n!` of the exponential series.
pub fn exp_series(z: Quaternion, terms: usize) -> Quaternion {
    let mut acc = ZERO;
    let mut term = I;
    for n in 0..terms {
        acc += term;
        term = term * z / (n as f64 + 1.0);
    }
    acc
}

/// Argument in turns, `arg(z) = w_z J + x_z K + y_z L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgVector {
    pub w_z: f64,
    pub x_z: f64,
    pub y_z: f64,
}

impl ArgVector {
    pub fn as_quaternion(self) -> Quaternion {
        Quaternion::new(0.0, self.w_z, self.x_z, self.y_z)
    }

    pub fn norm(self) -> f64 {
        self.as_quaternion().norm()
    }

    /// Sign convention: the first nonzero of `(w_z, x_z, y_z)` is positive.
    pub fn satisfies_convention(self) -> bool {
        if self.norm() >= 1.0 {
            return false;
        }
        if self.w_z != 0.0 {
            return self.w_z > 0.0;
        }
        if self.x_z != 0.0 {
            return self.x_z > 0.0;
        }
        self.y_z >= 0.0
    }
}

fn leading_sign_negative(u: Quaternion) -> bool {
    if u.w != 0.0 {
        u.w < 0.0
    } else if u.x != 0.0 {
        u.x < 0.0
    } else {
        u.y < 0.0
    }
}

/// Argument of a nonzero quaternion.
///
/// Negative reals have every direction available; `J` is chosen, giving `(1/2, 0, 0)`.
/// Imaginary parts below `epsilon * |z|` are treated as zero.
pub fn arg(z: Quaternion) -> Result<ArgVector> {
    let rho = z.norm();
    if rho == 0.0 {
        return Err(Error::Domain("argument of zero".into()));
    }
    let s = z.imag_norm();
    if s < epsilon() * rho {
        return Ok(if z.v > 0.0 {
            ArgVector {
                w_z: 0.0,
                x_z: 0.0,
                y_z: 0.0,
            }
        } else {
            ArgVector {
                w_z: 0.5,
                x_z: 0.0,
                y_z: 0.0,
            }
        });
    }
    let theta = s.atan2(z.v);
    let mut n = z.imag() / s;
    let mut turns = theta / (2.0 * std::f64::consts::PI);
    if leading_sign_negative(n) {
        n = -n;
        turns = 1.0 - turns;
    }
    Ok(ArgVector {
        w_z: turns * n.w,
        x_z: turns * n.x,
        y_z: turns * n.y,
    })
}

/// Principal logarithm `ln|z| + 2 pi arg(z)`.
pub fn ln_principal(z: Quaternion) -> Result<Quaternion> {
    let a = arg(z)?;
    Ok(Quaternion::real(z.norm().ln()) + a.as_quaternion() * (2.0 * std::f64::consts::PI))
}

/// Polar decomposition `z = rho exp(2 pi argv)`.
pub fn polar(z: Quaternion) -> Result<(f64, ArgVector)> {
    Ok((z.norm(), arg(z)?))
}

/// Rebuilds `rho exp(2 pi argv)`.
pub fn from_polar(rho: f64, a: ArgVector) -> Quaternion {
    exp(a.as_quaternion() * (2.0 * std::f64::consts::PI)) * rho
}

/// The logarithm of `zeta` on the branch nearest to `reference`.
///
/// All logarithms of `zeta` are `ln|zeta| + (phi + 2 pi m) n` for unit imaginary `n`
/// along the imaginary part of `zeta`; when `zeta` is real the direction is free and the
/// direction of `reference` is used.
pub fn log_near(zeta: Quaternion, reference: Quaternion) -> Result<Quaternion> {
    let rho = zeta.norm();
    if rho == 0.0 {
        return Err(Error::Domain("logarithm of zero".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let re = rho.ln();
    let target = reference.imag();
    let s = zeta.imag_norm();
    if s < epsilon() * rho {
        let t = target.norm();
        let dir = if t > 0.0 { target / t } else { J };
        let k = if zeta.v > 0.0 {
            (t / two_pi).round() * two_pi
        } else {
            let odd = (t / std::f64::consts::PI - 1.0) / 2.0;
            (2.0 * odd.round() + 1.0) * std::f64::consts::PI
        };
        return Ok(Quaternion::real(re) + dir * k);
    }
    let n = zeta.imag() / s;
    let phi = s.atan2(zeta.v);
    // The projection of the reference onto n picks the nearest integer shift.
    let c = target.dot(n);
    let m = ((c - phi) / two_pi).round();
    Ok(Quaternion::real(re) + n * (phi + two_pi * m))
}

/// Left multiplication `h -> a h` as a matrix.
pub fn left_mul(a: Quaternion) -> LinearMap {
    matrix_of(|h| a * h)
}

/// Right multiplication `h -> h a` as a matrix.
pub fn right_mul(a: Quaternion) -> LinearMap {
    matrix_of(|h| h * a)
}

/// Derivative of the exponential at `z` as the series
/// `h -> sum_n sum_{k<n} z^k h z^(n-k-1) / n!`, truncated once the operator-norm bound
/// `n |z|^(n-1) / n!` of the next term drops below `1e-17` relative to the partial sum.
pub fn exp_derivative(z: Quaternion) -> LinearMap {
    let r = z.norm();
    let lz = left_mul(z);
    // t_n = sum_k z^k h z^(n-1-k); t_{n+1} = z t_n + h z^n
    let mut t = LinearMap::identity();
    let mut zn = z;
    let mut acc = LinearMap::identity();
    let mut fact = 1.0_f64;
    for n in 1..400usize {
        t = lz * t + right_mul(zn);
        zn *= z;
        fact *= (n + 1) as f64;
        acc += t / fact;
        // every later term is bounded by r^(n+1) / (n+1)!
        let bound = r.powi(n as i32 + 1) / fact;
        if (n + 1) as f64 > r && bound < 1e-17 * acc.norm().max(1.0) {
            break;
        }
    }
    acc
}

/// Closed form of the same derivative.
///
/// With `z = v + phi n`, the part of `h` in `span(1, n)` maps to `exp(z) h`, the
/// orthogonal part to `e^v sin(phi)/phi h`.
pub fn exp_derivative_closed(z: Quaternion) -> LinearMap {
    let ez = exp(z);
    let ev = z.v.exp();
    let phi = z.imag_norm();
    if phi == 0.0 {
        return LinearMap::identity() * ev;
    }
    let n = z.imag() / phi;
    let perp = ev * sinc(phi);
    matrix_of(|h| {
        let par = Quaternion::real(h.v) + n * h.dot(n);
        let orth = h - par;
        ez * par + orth * perp
    })
}

/// Solves `exp'(lifted) x = h`, the derivative of the logarithm branch through `lifted`
/// applied to `h`.
///
/// The closed form of `exp'` splits along `span(1, n)` and its orthogonal complement, so
/// the solve splits too. When `sin(phi) = 0` the orthogonal block vanishes and only `h`
/// without orthogonal component is solvable; the minimal-norm solution is returned.
pub fn ln_derivative_apply(lifted: Quaternion, h: Quaternion) -> Result<Quaternion> {
    let ev = lifted.v.exp();
    let phi = lifted.imag_norm();
    if phi == 0.0 {
        return Ok(h / ev);
    }
    let n = lifted.imag() / phi;
    let par = Quaternion::real(h.v) + n * h.dot(n);
    let orth = h - par;
    let x_par = exp(-lifted) * par;
    let s = ev * sinc(phi);
    if s.abs() <= 1e-12 * ev {
        if orth.norm() > 1e-9 * h.norm() {
            return Err(Error::BranchDegenerate(exp(lifted)));
        }
        return Ok(x_par);
    }
    Ok(x_par + orth / s)
}

/// Same solve through an SVD of the 4x4 matrix, for cross-checking.
pub fn ln_derivative_svd(lifted: Quaternion, h: Quaternion) -> Result<Quaternion> {
    let a = exp_derivative_closed(lifted);
    let rhs = to_vec(h);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(&rhs, smax * 1e-12)
        .map_err(|_| Error::BranchDegenerate(exp(lifted)))?;
    let resid = (a * x - rhs).norm();
    if resid > 1e-9 * (h.norm() + 1e-300) {
        return Err(Error::BranchDegenerate(exp(lifted)));
    }
    Ok(from_vec(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{K, L};
    use std::f64::consts::PI;

    #[test]
    fn exp_examples() {
        assert_eq!(exp(ZERO), I);
        assert!((exp(J * PI) + I).norm() < 1e-15);
        let z = Quaternion::new(0.3, -1.0, 0.5, 2.0);
        assert!((exp(z) - exp_series(z, 60)).norm() < 1e-13);
    }

    #[test]
    fn arg_examples() {
        let a = arg(I).unwrap();
        assert_eq!(a.as_quaternion(), ZERO);
        let a = arg(J).unwrap();
        assert!((a.w_z - 0.25).abs() < 1e-15 && a.x_z == 0.0 && a.y_z == 0.0);
        let a = arg(-J).unwrap();
        assert!((a.w_z - 0.75).abs() < 1e-15);
        let a = arg(-I).unwrap();
        assert_eq!((a.w_z, a.x_z, a.y_z), (0.5, 0.0, 0.0));
        let a = arg(-K).unwrap();
        assert!((a.x_z - 0.75).abs() < 1e-15 && a.w_z == 0.0);
        assert!(arg(ZERO).is_err());
    }

    #[test]
    fn ln_examples() {
        let e = Quaternion::real(std::f64::consts::E);
        assert!((ln_principal(e).unwrap() - I).norm() < 1e-15);
        assert!((ln_principal(J).unwrap() - J * (PI / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn polar_examples() {
        let (r, a) = polar(Quaternion::real(3.0)).unwrap();
        assert_eq!(r, 3.0);
        assert_eq!(a.as_quaternion(), ZERO);
        let (r, a) = polar(J * 2.0).unwrap();
        assert_eq!(r, 2.0);
        assert!((a.w_z - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exp_derivative_examples() {
        let h = Quaternion::new(0.2, -0.7, 1.1, 0.4);
        assert!((apply(&exp_derivative(ZERO), h) - h).norm() < 1e-15);
        let z = Quaternion::new(0.4, 1.3, -0.6, 0.9);
        let v = 1.7;
        let d = apply(&exp_derivative(z), Quaternion::real(v));
        assert!((d - exp(z) * v).norm() < 1e-13);
        let step = 1e-5;
        let fd = (exp(z + h * step) - exp(z - h * step)) / (2.0 * step);
        assert!((apply(&exp_derivative(z), h) - fd).norm() < 1e-6);
        assert!((exp_derivative(z) - exp_derivative_closed(z)).norm() < 1e-12);
    }

    #[test]
    fn log_near_tracks_branches() {
        let z = J * 2.0;
        let l = log_near(z, J * 8.0).unwrap();
        assert!((exp(l) - z).norm() < 1e-14);
        assert!((l.w - (PI / 2.0 + 2.0 * PI)).abs() < 1e-14);
        // negative real: continue along the direction of the reference
        let l = log_near(Quaternion::real(-1.0), K * 3.0).unwrap();
        assert!((l - K * PI).norm() < 1e-15);
        let l = log_near(Quaternion::real(-1.0), -K * 3.0).unwrap();
        assert!((l + K * PI).norm() < 1e-15);
        let l = log_near(Quaternion::real(2.0), L * 6.0).unwrap();
        assert!((l - Quaternion::real(2f64.ln()) - L * (2.0 * PI)).norm() < 1e-14);
    }

    #[test]
    fn ln_derivative_matches_inverse_on_parallel_directions() {
        let zeta = Quaternion::new(-1.0, 0.0, 0.0, 0.0);
        let lifted = K * PI;
        let h = K * 0.3 + I * 0.2;
        let x = ln_derivative_apply(lifted, h).unwrap();
        assert!((x - zeta.inv().unwrap() * h).norm() < 1e-12);
        assert!(ln_derivative_apply(lifted, J).is_err());
    }

    #[test]
    fn ln_derivative_closed_matches_svd() {
        let lifted = Quaternion::new(0.3, 0.7, -1.1, 0.4);
        for h in [I, J, K, L, Quaternion::new(0.2, -0.5, 0.9, 1.3)] {
            let a = ln_derivative_apply(lifted, h).unwrap();
            let b = ln_derivative_svd(lifted, h).unwrap();
            assert!((a - b).norm() < 1e-12);
            // exp'(lifted) a = h
            assert!((apply(&exp_derivative_closed(lifted), a) - h).norm() < 1e-12);
        }
    }
}
