//! Quaternion arithmetic in the basis `I, J, K, L`.
//!
//! The basis is realised by 2x2 complex matrices
//! `I = 1`, `J = diag(i, -i)`, `K = [[0, 1], [-1, 0]]`, `L = [[0, i], [i, 0]]`,
//! so that `J^2 = K^2 = L^2 = -I`, `JK = L`, `KL = J`, `LJ = K`.
//! A quaternion `vI + wJ + xK + yL` corresponds to `[[t, u], [-conj(u), conj(t)]]`
//! with `t = v + iw` and `u = x + iy`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static EPSILON_BITS: AtomicU64 = AtomicU64::new(0x3DDB_7CDF_D9D7_BDBB); // 1e-10

/// Global comparison tolerance shared by every module.
pub fn epsilon() -> f64 {
    f64::from_bits(EPSILON_BITS.load(Ordering::Relaxed))
}

/// Replaces the global comparison tolerance.
pub fn set_epsilon(eps: f64) {
    assert!(eps > 0.0 && eps.is_finite(), "epsilon must be positive");
    EPSILON_BITS.store(eps.to_bits(), Ordering::Relaxed);
}

/// Element of the quaternion skew field with coefficients of `I, J, K, L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub v: f64,
    pub w: f64,
    pub x: f64,
    pub y: f64,
}

pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
pub const I: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
pub const J: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
pub const K: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
pub const L: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

/// The basis in storage order.
pub const BASIS: [Quaternion; 4] = [I, J, K, L];

impl Quaternion {
    pub const fn new(v: f64, w: f64, x: f64, y: f64) -> Self {
        Quaternion { v, w, x, y }
    }

    pub const fn real(v: f64) -> Self {
        Quaternion::new(v, 0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.v, self.w, self.x, self.y]
    }

    /// Builds `[[t, u], [-conj(u), conj(t)]]` from its first row.
    pub fn from_complex(t: Complex64, u: Complex64) -> Self {
        Quaternion::new(t.re, t.im, u.re, u.im)
    }

    /// The first row `(t, u)` of the matrix view.
    pub fn to_complex(self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.v, self.w),
            Complex64::new(self.x, self.y),
        )
    }

    /// Matrix view, row-major.
    pub fn to_matrix(self) -> [[Complex64; 2]; 2] {
        let (t, u) = self.to_complex();
        [[t, u], [-u.conj(), t.conj()]]
    }

    /// Reads a quaternion back from a matrix of the form `[[t, u], [-conj(u), conj(t)]]`.
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let (t, u) = (m[0][0], m[0][1]);
        let scale = 1.0 + t.norm() + u.norm();
        if (m[1][0] + u.conj()).norm() > epsilon() * scale
            || (m[1][1] - t.conj()).norm() > epsilon() * scale
        {
            return Err(Error::Domain("matrix is not of quaternion form".into()));
        }
        Ok(Quaternion::from_complex(t, u))
    }

    /// Imaginary part `wJ + xK + yL`.
    pub fn imag(self) -> Self {
        Quaternion::new(0.0, self.w, self.x, self.y)
    }

    pub fn imag_norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y).sqrt()
    }

    /// Conjugate `vI - wJ - xK - yL`.
    pub fn conj(self) -> Self {
        Quaternion::new(self.v, -self.w, -self.x, -self.y)
    }

    pub fn norm_sqr(self) -> f64 {
        self.v * self.v + self.w * self.w + self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product of the coefficient vectors.
    pub fn dot(self, o: Self) -> f64 {
        self.v * o.v + self.w * o.w + self.x * o.x + self.y * o.y
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.v * s, self.w * s, self.x * s, self.y * s)
    }

    /// Multiplicative inverse `conj(z) / |z|^2`.
    pub fn inv(self) -> Result<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return Err(Error::Domain("inverse of zero".into()));
        }
        Ok(self.conj().scale(1.0 / n))
    }

    /// Integer power; negative exponents go through the inverse.
    pub fn powi(self, n: i32) -> Result<Self> {
        if n < 0 {
            return Ok(self.inv()?.powi_nonneg((-(n as i64)) as u64));
        }
        Ok(self.powi_nonneg(n as u64))
    }

    fn powi_nonneg(self, mut n: u64) -> Self {
        let mut base = self;
        let mut acc = I;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// True when the imaginary part vanishes exactly.
    pub fn is_exactly_real(self) -> bool {
        self.w == 0.0 && self.x == 0.0 && self.y == 0.0
    }

    pub fn is_zero(self) -> bool {
        self.v == 0.0 && self.w == 0.0 && self.x == 0.0 && self.y == 0.0
    }

    /// Tolerance-based equality using the global epsilon, relative to the larger norm.
    pub fn approx_eq(self, o: Self) -> bool {
        self.approx_eq_tol(o, epsilon())
    }

    pub fn approx_eq_tol(self, o: Self, tol: f64) -> bool {
        (self - o).norm() <= tol * (1.0 + self.norm().max(o.norm()))
    }

    /// Commutator `ab - ba`.
    pub fn commutator(self, o: Self) -> Self {
        self * o - o * self
    }

    pub fn is_finite(self) -> bool {
        self.v.is_finite() && self.w.is_finite() && self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.v + o.v, self.w + o.w, self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.v - o.v, self.w - o.w, self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Quaternion::new(-self.v, -self.w, -self.x, -self.y)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a0, a1, a2, a3) = (self.v, self.w, self.x, self.y);
        let (b0, b1, b2, b3) = (o.v, o.w, o.x, o.y);
        Quaternion::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        self.scale(1.0 / s)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)?;
        for (c, s) in [(self.w, 'J'), (self.x, 'K'), (self.y, 'L')] {
            if c.is_sign_negative() {
                write!(f, "-{}{}", -c, s)?;
            } else {
                write!(f, "+{}{}", c, s)?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Quaternion {
    type Err = Error;

    /// Parses literals such as `1+2J-3K+0.5L`, `J`, `-2.5`, `1e-3K`.
    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::Parse("empty quaternion literal".into()));
        }
        let bytes = text.as_bytes();
        let mut out = ZERO;
        let mut i = 0;
        while i < bytes.len() {
            let start = i;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                i += 1;
            }
            // Mantissa with optional exponent; an exponent sign must not end the term.
            while i < bytes.len() {
                let c = bytes[i];
                if c.is_ascii_digit() || c == b'.' {
                    i += 1;
                } else if (c == b'e' || c == b'E') && i > start {
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                } else {
                    break;
                }
            }
            let num = &text[start..i];
            let unit = if i < bytes.len()
                && matches!(
                    bytes[i],
                    b'I' | b'J' | b'K' | b'L' | b'i' | b'j' | b'k' | b'l'
                ) {
                let u = bytes[i].to_ascii_uppercase();
                i += 1;
                Some(u)
            } else {
                None
            };
            let coef = match num {
                "" | "+" => 1.0,
                "-" => -1.0,
                _ => num
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number '{num}' in '{s}'")))?,
            };
            if unit.is_none() && (num.is_empty() || num == "+" || num == "-") {
                return Err(Error::Parse(format!("dangling sign in '{s}'")));
            }
            match unit {
                None | Some(b'I') => out.v += coef,
                Some(b'J') => out.w += coef,
                Some(b'K') => out.x += coef,
                Some(b'L') => out.y += coef,
                _ => unreachable!(),
            }
            if i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
                return Err(Error::Parse(format!(
                    "unexpected '{}' in '{s}'",
                    bytes[i] as char
                )));
            }
        }
        Ok(out)
    }
}

/// A point of the one-point compactification of the quaternions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedPoint {
    Finite(Quaternion),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(self) -> Result<Quaternion> {
        match self {
            ExtendedPoint::Finite(q) => Ok(q),
            ExtendedPoint::Infinity => {
                Err(Error::Domain("arithmetic on the point at infinity".into()))
            }
        }
    }
}

impl From<Quaternion> for ExtendedPoint {
    fn from(q: Quaternion) -> Self {
        ExtendedPoint::Finite(q)
    }
}

/// Stereographic image on the unit 4-sphere in `R^5`.
///
/// The tangent plane at the south pole `(-1, 0, 0, 0, 0)` carries the quaternions and
/// points are projected from the north pole `(1, 0, 0, 0, 0)`, which is the image of infinity.
pub fn to_sphere(p: ExtendedPoint) -> [f64; 5] {
    match p {
        ExtendedPoint::Infinity => [1.0, 0.0, 0.0, 0.0, 0.0],
        ExtendedPoint::Finite(z) => {
            let n2 = z.norm_sqr();
            let d = n2 + 4.0;
            [
                (n2 - 4.0) / d,
                4.0 * z.v / d,
                4.0 * z.w / d,
                4.0 * z.x / d,
                4.0 * z.y / d,
            ]
        }
    }
}

/// Inverse of [`to_sphere`].
pub fn from_sphere(s: [f64; 5]) -> ExtendedPoint {
    let t = (1.0 - s[0]) / 2.0;
    if t <= 0.0 {
        return ExtendedPoint::Infinity;
    }
    ExtendedPoint::Finite(Quaternion::new(s[1] / t, s[2] / t, s[3] / t, s[4] / t))
}

/// Chordal distance: Euclidean distance of the stereographic images.
pub fn chordal(a: ExtendedPoint, b: ExtendedPoint) -> f64 {
    if a == b {
        return 0.0;
    }
    let (p, q) = (to_sphere(a), to_sphere(b));
    p.iter()
        .zip(q.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Linear subspaces onto which quaternions are projected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubspaceTag {
    RI,
    RJ,
    RK,
    RL,
    IJ,
    IK,
    IL,
    JK,
    JL,
    KL,
    /// `z -> (v, w)`
    Pi1,
    /// `z -> (v, x)`
    Pi2,
    /// `z -> (v, y)`
    Pi3,
}

impl std::str::FromStr for SubspaceTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use SubspaceTag::*;
        Ok(match s {
            "RI" => RI,
            "RJ" => RJ,
            "RK" => RK,
            "RL" => RL,
            "IJ" => IJ,
            "IK" => IK,
            "IL" => IL,
            "JK" => JK,
            "JL" => JL,
            "KL" => KL,
            "pi1" | "Pi1" => Pi1,
            "pi2" | "Pi2" => Pi2,
            "pi3" | "Pi3" => Pi3,
            _ => return Err(Error::Domain(format!("unknown subspace tag '{s}'"))),
        })
    }
}

/// Result of [`project`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projection {
    Quat(Quaternion),
    Planar(f64, f64),
}

/// Projection by coefficient extraction.
pub fn project(z: Quaternion, tag: SubspaceTag) -> Projection {
    use SubspaceTag::*;
    let q = |v, w, x, y| Projection::Quat(Quaternion::new(v, w, x, y));
    match tag {
        RI => q(z.v, 0.0, 0.0, 0.0),
        RJ => q(0.0, z.w, 0.0, 0.0),
        RK => q(0.0, 0.0, z.x, 0.0),
        RL => q(0.0, 0.0, 0.0, z.y),
        IJ => q(z.v, z.w, 0.0, 0.0),
        IK => q(z.v, 0.0, z.x, 0.0),
        IL => q(z.v, 0.0, 0.0, z.y),
        JK => q(0.0, z.w, z.x, 0.0),
        JL => q(0.0, z.w, 0.0, z.y),
        KL => q(0.0, 0.0, z.x, z.y),
        Pi1 => Projection::Planar(z.v, z.w),
        Pi2 => Projection::Planar(z.v, z.x),
        Pi3 => Projection::Planar(z.v, z.y),
    }
}

/// Projection through sandwich formulas `(z ± JzJ ± KzK ± LzL) / 4` and `(z ± SzS) / 2`.
pub fn project_sandwich(z: Quaternion, tag: SubspaceTag) -> Projection {
    use SubspaceTag::*;
    let jzj = J * z * J;
    let kzk = K * z * K;
    let lzl = L * z * L;
    let quad = |a: f64, b: f64, c: f64| Projection::Quat((z + jzj * a + kzk * b + lzl * c) / 4.0);
    let half = |s: Quaternion| Projection::Quat((z + s) / 2.0);
    match tag {
        RI => quad(-1.0, -1.0, -1.0),
        RJ => quad(-1.0, 1.0, 1.0),
        RK => quad(1.0, -1.0, 1.0),
        RL => quad(1.0, 1.0, -1.0),
        IJ => half(-jzj),
        IK => half(-kzk),
        IL => half(-lzl),
        JK => half(lzl),
        JL => half(kzk),
        KL => half(jzj),
        Pi1 | Pi2 | Pi3 => {
            let Projection::Quat(p) = project_sandwich(
                z,
                match tag {
                    Pi1 => IJ,
                    Pi2 => IK,
                    _ => IL,
                },
            ) else {
                unreachable!()
            };
            match tag {
                Pi1 => Projection::Planar(p.v, p.w),
                Pi2 => Projection::Planar(p.v, p.x),
                _ => Projection::Planar(p.v, p.y),
            }
        }
    }
}

/// Planar coordinates of `z` under `pi_l`, `l` in `1..=3`.
pub fn planar(z: Quaternion, l: usize) -> (f64, f64) {
    match l {
        1 => (z.v, z.w),
        2 => (z.v, z.x),
        3 => (z.v, z.y),
        _ => panic!("planar projection index must be 1, 2 or 3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_table() {
        assert_eq!(J * J, -I);
        assert_eq!(K * K, -I);
        assert_eq!(L * L, -I);
        assert_eq!(J * K, L);
        assert_eq!(K * L, J);
        assert_eq!(L * J, K);
        assert_eq!(K * J, -L);
        assert_eq!(L * K, -J);
        assert_eq!(J * L, -K);
    }

    #[test]
    fn matrix_product_agrees_with_table() {
        let a = Quaternion::new(0.3, -1.2, 2.0, 0.7);
        let b = Quaternion::new(-0.5, 0.1, 0.4, -2.2);
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = ma[r][0] * mb[0][c] + ma[r][1] * mb[1][c];
            }
        }
        let p = Quaternion::from_matrix(m).unwrap();
        assert!((p - a * b).norm() < 1e-14);
    }

    #[test]
    fn determinant_is_norm_squared() {
        let z = Quaternion::new(1.5, -0.25, 3.0, 2.0);
        let m = z.to_matrix();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det.re - z.norm_sqr()).abs() < 1e-12);
        assert!(det.im.abs() < 1e-12);
    }

    #[test]
    fn hand_expanded_product() {
        let a = Quaternion::new(1.0, 2.0, 0.0, 0.0);
        let b = Quaternion::new(0.0, 0.0, 3.0, 0.0);
        assert_eq!(a * b, Quaternion::new(0.0, 0.0, 3.0, 6.0));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Quaternion::real(2.0).inv().unwrap(), Quaternion::real(0.5));
        assert_eq!(J.inv().unwrap(), -J);
        assert!(ZERO.inv().is_err());
    }

    #[test]
    fn parse_literals() {
        let q: Quaternion = "1+2J-3K+0.5L".parse().unwrap();
        assert_eq!(q, Quaternion::new(1.0, 2.0, -3.0, 0.5));
        assert_eq!("J".parse::<Quaternion>().unwrap(), J);
        assert_eq!("-L".parse::<Quaternion>().unwrap(), -L);
        assert_eq!(
            "1e-3K".parse::<Quaternion>().unwrap(),
            Quaternion::new(0.0, 0.0, 1e-3, 0.0)
        );
        assert_eq!(
            "-2.5".parse::<Quaternion>().unwrap(),
            Quaternion::real(-2.5)
        );
        assert!("1+".parse::<Quaternion>().is_err());
        assert!("2Q".parse::<Quaternion>().is_err());
        let z = Quaternion::new(-0.5, 1.25, -3.0, 4.0);
        assert_eq!(z.to_string().parse::<Quaternion>().unwrap(), z);
    }

    #[test]
    fn projections_by_both_routes() {
        let z = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(project(z, SubspaceTag::RJ), Projection::Quat(2.0 * J));
        assert_eq!(project(z, SubspaceTag::Pi1), Projection::Planar(1.0, 2.0));
        use SubspaceTag::*;
        for tag in [RI, RJ, RK, RL, IJ, IK, IL, JK, JL, KL, Pi1, Pi2, Pi3] {
            let a = project(z, tag);
            let b = project_sandwich(z, tag);
            match (a, b) {
                (Projection::Quat(p), Projection::Quat(q)) => {
                    assert!((p - q).norm() < 1e-14, "{tag:?}")
                }
                (Projection::Planar(a1, a2), Projection::Planar(b1, b2)) => {
                    assert!((a1 - b1).abs() < 1e-14 && (a2 - b2).abs() < 1e-14)
                }
                _ => panic!("shape mismatch for {tag:?}"),
            }
        }
    }

    #[test]
    fn chordal_examples() {
        let z = Quaternion::new(0.3, 0.1, -2.0, 1.0);
        assert_eq!(chordal(z.into(), z.into()), 0.0);
        assert!((chordal(ZERO.into(), ExtendedPoint::Infinity) - 2.0).abs() < 1e-15);
        // closed form 4|a-b| / sqrt((4+|a|^2)(4+|b|^2)) for this sphere
        let d = chordal(I.into(), (-I).into());
        assert!((d - 8.0 / 5.0).abs() < 1e-15);
        let s = to_sphere(z.into());
        assert!((s.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-15);
        let ExtendedPoint::Finite(back) = from_sphere(s) else {
            panic!()
        };
        assert!((back - z).norm() < 1e-13);
        assert!(ExtendedPoint::Infinity.finite().is_err());
    }
}
