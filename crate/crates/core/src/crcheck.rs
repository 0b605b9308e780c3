//! Finite-difference checks of the Cauchy-Riemann system, harmonicity and conformality.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elem::{from_vec, to_vec};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, BASIS, J, K, L};
use crate::words::{derivative, Phrase};

/// Default difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Default pass threshold.
pub const DEFAULT_TOL: f64 = 1e-5;

/// Central-difference Jacobian; column `j` is the derivative along basis element `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealJacobian {
    pub matrix: Matrix4<f64>,
    pub step: f64,
}

impl RealJacobian {
    /// Column `j` as a quaternion.
    pub fn column(&self, j: usize) -> Quaternion {
        from_vec(&self.matrix.column(j).into_owned())
    }
}

/// `(f(z + step e_j) - f(z - step e_j)) / (2 step)` for the four basis directions.
pub fn frechet_jacobian<F>(f: F, z: Quaternion, step: f64) -> Result<RealJacobian>
where
    F: Fn(Quaternion) -> Result<Quaternion>,
{
    let mut m = Matrix4::zeros();
    for (j, e) in BASIS.iter().enumerate() {
        let d = (f(z + *e * step)? - f(z - *e * step)?) / (2.0 * step);
        m.set_column(j, &to_vec(d));
    }
    Ok(RealJacobian { matrix: m, step })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrReport {
    /// `|dF/dv - (dF/dw) J^(-1)|`, and the same for `x, K` and `y, L`.
    pub residuals: [f64; 3],
    pub max_residual: f64,
    pub step: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Residuals of `dF/dv = (dF/dw) J^(-1) = (dF/dx) K^(-1) = (dF/dy) L^(-1)`.
///
/// They vanish exactly when the derivative acts as left multiplication by `dF/dv`.
pub fn check_cr<F>(f: F, z: Quaternion, step: f64, tol: f64) -> Result<CrReport>
where
    F: Fn(Quaternion) -> Result<Quaternion>,
{
    let jac = frechet_jacobian(f, z, step)?;
    let dv = jac.column(0);
    let mut residuals = [0.0; 3];
    for (k, e) in [J, K, L].iter().enumerate() {
        residuals[k] = (dv - jac.column(k + 1) * e.inv()?).norm();
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(CrReport {
        residuals,
        max_residual,
        step,
        tol,
        pass: max_residual < tol,
    })
}

/// Coordinate pairs of the pair-Laplacians: `(v, w)`, `(w, x)`, `(x, y)`, `(v, y)`.
pub const LAPLACIAN_PAIRS: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (0, 3)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    /// `laplacians[p][c]`: pair `p` of [`LAPLACIAN_PAIRS`] applied to coefficient `c`.
    pub laplacians: [[f64; 4]; 4],
    pub max_residual: f64,
    pub step: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Second central differences of the pair-Laplacians of every coefficient.
pub fn check_harmonic<F>(f: F, z: Quaternion, step: f64, tol: f64) -> Result<HarmonicReport>
where
    F: Fn(Quaternion) -> Result<Quaternion>,
{
    let f0 = f(z)?;
    let mut second = [crate::quat::ZERO; 4];
    for (j, e) in BASIS.iter().enumerate() {
        second[j] = (f(z + *e * step)? - f0 * 2.0 + f(z - *e * step)?) / (step * step);
    }
    let mut laplacians = [[0.0; 4]; 4];
    for (p, &(a, b)) in LAPLACIAN_PAIRS.iter().enumerate() {
        laplacians[p] = (second[a] + second[b]).to_array();
    }
    let max_residual = laplacians
        .iter()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    Ok(HarmonicReport {
        laplacians,
        max_residual,
        step,
        tol,
        pass: max_residual < tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    /// The derivative as left multiplication `h -> lambda h`.
    pub lambda: Quaternion,
    /// `|cos(image angle) - cos(angle)|` per tangent pair.
    pub cos_deltas: Vec<f64>,
    pub max_delta: f64,
    pub tol: f64,
    pub pass: bool,
}

fn cosine(a: Quaternion, b: Quaternion) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}

/// Compares angles between tangent pairs before and after the derivative of `f` at `z`.
///
/// The derivative must act as left multiplication by a nonzero `lambda`; anything else
/// is rejected.
pub fn check_conformal(
    f: &Phrase,
    z: Quaternion,
    pairs: &[(Quaternion, Quaternion)],
    tol: f64,
) -> Result<ConformalReport> {
    let form = derivative(f);
    let lambda = form.eval(z, BASIS[0], None)?;
    if lambda.norm() <= 1e-14 {
        return Err(Error::Domain(format!("derivative vanishes at {z}")));
    }
    for e in BASIS {
        let d = form.eval(z, e, None)?;
        if (d - lambda * e).norm() > 1e-10 * lambda.norm() {
            return Err(Error::Domain(format!(
                "derivative at {z} is not a left multiplication"
            )));
        }
    }
    let mut cos_deltas = Vec::with_capacity(pairs.len());
    for &(h, k) in pairs {
        if h.norm() == 0.0 || k.norm() == 0.0 {
            return Err(Error::Domain("tangent vectors must be nonzero".into()));
        }
        let (fh, fk) = (form.eval(z, h, None)?, form.eval(z, k, None)?);
        cos_deltas.push((cosine(fh, fk) - cosine(h, k)).abs());
    }
    let max_delta = cos_deltas.iter().copied().fold(0.0, f64::max);
    Ok(ConformalReport {
        lambda,
        cos_deltas,
        max_delta,
        tol,
        pass: max_delta < tol,
    })
}

/// `|d f_11 / d conj(t)|` at `t` for the upper-left entry of `f` on diagonal quaternions,
/// by central differences.
pub fn classical_cr_residual<F>(f: F, t: Complex64, step: f64) -> Result<f64>
where
    F: Fn(Quaternion) -> Result<Quaternion>,
{
    let zero = Complex64::new(0.0, 0.0);
    let f11 = |s: Complex64| -> Result<Complex64> {
        Ok(f(Quaternion::from_complex(s, zero))?.to_complex().0)
    };
    let dx = (f11(t + step)? - f11(t - step)?) / (2.0 * step);
    let dy =
        (f11(t + Complex64::new(0.0, step))? - f11(t - Complex64::new(0.0, step))?) / (2.0 * step);
    Ok((0.5 * (dx + Complex64::new(0.0, 1.0) * dy)).norm())
}
