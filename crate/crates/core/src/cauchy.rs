//! Indices of closed paths, the Cauchy integral formula and Laurent components.
//!
//! With a continuous logarithm along a circle `a + r exp(2 pi s M)`, the closed-loop
//! increment of `Ln(z - p)` is `2 pi n M` only when `p` lies in the plane
//! `a + span(1, M)` of the circle; for other points the lift returns to its start. The
//! formulas below therefore hold on that plane. Recentering at `z` also leaves words such as
//! `(zeta - z) c (zeta - z)^(-1)`, which reduce to `c` only when `c` commutes with `M`, so
//! [`cauchy_eval`] additionally asks every coefficient after the first in each recentered
//! word to lie in `span(1, M)`.

use serde::{Deserialize, Serialize};

use crate::elem::{matrix_of, LinearMap};
use crate::error::{Error, Result};
use crate::paths::{integral_dln, line_integral, Circle, Path, QuadOptions, QuadratureResult};
use crate::quat::{planar, Quaternion, I, J, ZERO};
use crate::words::{derivative_i, recenter, Factor, Hat, Phrase, DEFAULT_TRUNCATION};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Winding numbers of the three planar projections `(v, w)`, `(v, x)`, `(v, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopIndex {
    pub windings: [i64; 3],
    /// Projections that collapse to a curve of zero signed area; their entry is zero.
    pub degenerate: [bool; 3],
}

/// Planar winding of `points` around the origin, or `None` when some step turns by a
/// right angle or more.
fn winding(points: &[(f64, f64)]) -> Option<f64> {
    let mut total = 0.0;
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let d = (x0 * y1 - y0 * x1).atan2(x0 * x1 + y0 * y1);
        if d.abs() >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        total += d;
    }
    Some(total / TWO_PI)
}

fn signed_area(points: &[(f64, f64)]) -> f64 {
    0.5 * points
        .windows(2)
        .map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1)
        .sum::<f64>()
}

/// Integer windings of the planar projections of a closed path around `a`.
pub fn topological_index(path: &Path, a: Quaternion, opts: &QuadOptions) -> Result<TopIndex> {
    if !path.is_closed() {
        return Err(Error::Domain("index of an open path".into()));
    }
    let mut windings = [0i64; 3];
    let mut degenerate = [false; 3];
    for l in 1..=3usize {
        let mut done = false;
        for level in 0..=opts.max_refine {
            let n = path.steps(level);
            let pts: Vec<(f64, f64)> = (0..=n)
                .map(|i| planar(path.node(level, i) - a, l))
                .collect();
            let extent = pts.iter().map(|p| p.0.hypot(p.1)).fold(0.0, f64::max);
            if signed_area(&pts).abs() <= 1e-12 * extent * extent {
                degenerate[l - 1] = true;
                done = true;
                break;
            }
            if pts.iter().any(|p| p.0.hypot(p.1) <= 1e-14 * extent) {
                return Err(Error::OnPath(a));
            }
            if let Some(w) = winding(&pts) {
                windings[l - 1] = w.round() as i64;
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Budget("planar winding did not resolve".into()));
        }
    }
    Ok(TopIndex {
        windings,
        degenerate,
    })
}

/// `(2 pi)^(-1) int_gamma d Ln(z - a)`.
pub fn quaternion_index(
    path: &Path,
    a: Quaternion,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let mut r = integral_dln(path, a, opts)?;
    r.value = r.value / TWO_PI;
    r.error_estimate /= TWO_PI;
    for t in &mut r.trace {
        t.value = t.value / TWO_PI;
        t.delta /= TWO_PI;
    }
    Ok(r)
}

/// `In_1 |w| J + In_2 |x| K + In_3 |y| L` for `M = wJ + xK + yL`.
pub fn qindex_from_topindex(t: &TopIndex, m: Quaternion) -> Quaternion {
    let [a, b, c] = t.windings;
    Quaternion::new(
        0.0,
        a as f64 * m.w.abs(),
        b as f64 * m.x.abs(),
        c as f64 * m.y.abs(),
    )
}

/// True when `z` lies in the plane `psi.a + span(1, M)` of the circle.
pub fn in_circle_plane(psi: &Circle, z: Quaternion, tol: f64) -> bool {
    let d = z - psi.a;
    let along = Quaternion::real(d.v) + psi.m * d.dot(psi.m);
    (d - along).norm() <= tol * (1.0 + d.norm())
}

/// True when `c` lies in `span(1, m)` for a unit imaginary `m`.
fn in_span(c: Quaternion, m: Quaternion) -> bool {
    let along = Quaternion::real(c.v) + m * c.dot(m);
    (c - along).norm() <= 1e-12 * (1.0 + c.norm())
}

fn check_inside(psi: &Circle, z: Quaternion) -> Result<()> {
    if (z - psi.a).norm() >= psi.r {
        return Err(Error::Outside(
            z,
            format!("not inside the circle of radius {} around {}", psi.r, psi.a),
        ));
    }
    Ok(())
}

/// `int_psi f(zeta) (zeta - z)^(-k-1) d zeta` with the integrand built by recentering `f`
/// at `z`, without any check on the position of `z`.
pub fn cauchy_integral(
    f: &Phrase,
    psi: &Circle,
    z: Quaternion,
    k: u32,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if !f.is_polynomial() {
        return Err(Error::Unsupported(
            "Cauchy integral of a phrase with negative powers or logarithms".into(),
        ));
    }
    let g = recenter(f, z, DEFAULT_TRUNCATION)?.phrase;
    let kernel = g.append_factor(Factor::new(I, -(k as i32) - 1));
    line_integral(&kernel, &Path::Circle(*psi), opts)
}

/// `k! (2 pi)^(-1) (int_psi f(zeta) (zeta - z)^(-k-1) d zeta) (turns M)^(-1)`, which
/// reproduces the `k`-th `I`-derivative of `f` at `z` in the plane of the circle.
pub fn cauchy_derivative(
    f: &Phrase,
    psi: &Circle,
    z: Quaternion,
    k: u32,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    check_inside(psi, z)?;
    if !psi.is_closed() {
        return Err(Error::Domain("Cauchy formula needs a closed circle".into()));
    }
    if !in_circle_plane(psi, z, 1e-12) {
        return Err(Error::OffSlice(format!(
            "{z} is not in the plane {} + span(1, {}) of the circle",
            psi.a, psi.m
        )));
    }
    if !f.is_polynomial() {
        return Err(Error::Unsupported(
            "Cauchy integral of a phrase with negative powers or logarithms".into(),
        ));
    }
    let g = recenter(f, z, DEFAULT_TRUNCATION)?.phrase;
    for w in &g.words {
        if let Some(c) = w.factors[1..]
            .iter()
            .map(|f| f.coef)
            .find(|&c| !in_span(c, psi.m))
        {
            return Err(Error::OffSlice(format!(
                "recentered coefficient {c} does not commute with {}",
                psi.m
            )));
        }
    }
    let kernel = g.append_factor(Factor::new(I, -(k as i32) - 1));
    let mut r = line_integral(&kernel, &Path::Circle(*psi), opts)?;
    let fact: f64 = (1..=k).map(f64::from).product();
    let post = (psi.m * psi.turns).inv()? * (fact / TWO_PI);
    r.value *= post;
    r.error_estimate *= post.norm();
    for t in &mut r.trace {
        t.value *= post;
        t.delta *= post.norm();
    }
    Ok(r)
}

/// `f(z)` reconstructed from boundary values on `psi`.
pub fn cauchy_eval(
    f: &Phrase,
    psi: &Circle,
    z: Quaternion,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    cauchy_derivative(f, psi, z, 0, opts)
}

/// The `k`-fold `I`-derivative computed symbolically.
pub fn symbolic_derivative(f: &Phrase, k: u32) -> Phrase {
    (0..k).fold(f.clone(), |p, _| derivative_i(&p))
}

/// Terms of the Laurent decomposition at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentComponents {
    /// `phi_k(z)`, from the outer circle, for `k = 0..=kmax`.
    pub phi: Vec<Quaternion>,
    /// `psi_k(z)`, from the inner circle, for `k = 0..=kmax`.
    pub psi: Vec<Quaternion>,
    pub sum: Quaternion,
    /// Value of the words beyond `kmax` in either direction, omitted from `sum`.
    pub tail: f64,
    pub outer_radius: f64,
    pub inner_radius: f64,
    /// Largest quadrature error estimate among the components.
    pub error_estimate: f64,
}

/// Laurent components of a left-form phrase centered at `a` at a point of the annulus
/// `r1 < |z - a| < big_r1`.
///
/// With `w = z - a` and `M` the imaginary direction of `w`, `w` commutes with every
/// point of the circles `a + rho exp(2 pi s M)`, so
/// `phi_k = (2 pi)^(-1) (int sum_n b_n w^k u^(n-k-1) du) M^(-1)` over the outer circle and
/// `psi_k = (2 pi)^(-1) (int sum_n b_n w^(-k-1) u^(n+k) du) M^(-1)` over the inner one.
pub fn laurent_components(
    f: &Phrase,
    a: Quaternion,
    r1: f64,
    big_r1: f64,
    z: Quaternion,
    kmax: usize,
    opts: &QuadOptions,
) -> Result<LaurentComponents> {
    if !f.is_left_form() || f.center != a {
        return Err(Error::Domain(
            "Laurent components need a left-form phrase centered at the annulus center".into(),
        ));
    }
    let w = z - a;
    let rho = w.norm();
    if !(r1 < rho && rho < big_r1) {
        return Err(Error::Outside(
            z,
            format!("not in the annulus {r1} < |z - a| < {big_r1}"),
        ));
    }
    let m = match w.imag_norm() {
        s if s > 0.0 => w.imag() / s,
        _ => J,
    };
    let outer = Path::Circle(Circle::new(a, 0.5 * (rho + big_r1), m, 1.0)?);
    let inner = Path::Circle(Circle::new(a, 0.5 * (r1 + rho), m, 1.0)?);
    let post = m.inv()? / TWO_PI;
    let terms: Vec<(Quaternion, i32)> = f
        .words
        .iter()
        .map(|wd| (wd.factors[0].coef, wd.factors[0].exp))
        .collect();
    let mut phi = Vec::with_capacity(kmax + 1);
    let mut psi = Vec::with_capacity(kmax + 1);
    let mut err = 0.0_f64;
    for k in 0..=kmax {
        let ki = k as i32;
        let wk = w.powi(ki)?;
        let outer_terms: Vec<(Quaternion, i32)> =
            terms.iter().map(|&(b, n)| (b * wk, n - ki - 1)).collect();
        let r = line_integral(&Phrase::left_form(a, &outer_terms), &outer, opts)?;
        err = err.max(r.error_estimate);
        phi.push(r.value * post);
        let wk1 = w.powi(-ki - 1)?;
        let inner_terms: Vec<(Quaternion, i32)> =
            terms.iter().map(|&(b, n)| (b * wk1, n + ki)).collect();
        let r = line_integral(&Phrase::left_form(a, &inner_terms), &inner, opts)?;
        err = err.max(r.error_estimate);
        psi.push(r.value * post);
    }
    let sum = phi
        .iter()
        .chain(psi.iter())
        .copied()
        .fold(ZERO, |s, q| s + q);
    let kmax_i = kmax as i32;
    let mut omitted = ZERO;
    for &(b, n) in &terms {
        if n > kmax_i || n < -kmax_i - 1 {
            omitted += b * w.powi(n)?;
        }
    }
    Ok(LaurentComponents {
        phi,
        psi,
        sum,
        tail: omitted.norm(),
        outer_radius: 0.5 * (rho + big_r1),
        inner_radius: 0.5 * (r1 + rho),
        error_estimate: err * post.norm(),
    })
}

/// `(|f(z)|, sup_{zeta on psi, |h| <= 1} |f_hat(zeta).h|)` with the supremum taken over
/// `samples` points of the circle as the largest singular value of `f_hat(zeta)`.
pub fn cauchy_bound(f: &Phrase, psi: &Circle, z: Quaternion, samples: usize) -> Result<(f64, f64)> {
    let hat = Hat::new(f)?;
    let path = Path::Circle(*psi);
    let mut sup = 0.0_f64;
    for i in 0..samples.max(1) {
        let zeta = path.point(i as f64 / samples.max(1) as f64);
        let mut err = None;
        let m: LinearMap = matrix_of(|h| match hat.apply(zeta, h, None) {
            Ok(q) => q,
            Err(e) => {
                err.get_or_insert(e);
                ZERO
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let s = m.svd(false, false).singular_values.max();
        sup = sup.max(s);
    }
    Ok((f.eval(z)?.norm(), sup))
}
