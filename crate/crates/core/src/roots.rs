//! Root search for polynomial phrases and the directional-limit example.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::elem::{from_vec, to_vec};
use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::words::{derivative, Phrase, Word};

/// Grid resolution and descent budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    /// Points per axis of the coarse grid.
    pub grid: usize,
    /// Number of best grid points used as starting points.
    pub starts: usize,
    /// Descent iterations per start.
    pub iterations: usize,
    pub tol: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            grid: 17,
            starts: 16,
            iterations: 200,
            tol: 1e-8,
        }
    }
}

/// Axis-aligned box `lo <= z <= hi` componentwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: Quaternion,
    pub hi: Quaternion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub root: Quaternion,
    pub residual: f64,
    pub evaluations: usize,
    pub search_box: SearchBox,
}

/// Radius outside which the unique top-degree word dominates: with leading coefficient
/// product `c_N` and the others `c_k`, every root has `|z - a| <= max(1, sum c_k / c_N)`.
pub fn cauchy_radius(p: &Phrase) -> Result<f64> {
    if !p.is_polynomial() || p.is_empty() {
        return Err(Error::Domain(
            "root bound needs a nonempty polynomial phrase".into(),
        ));
    }
    let top = p.max_degree().expect("nonempty phrase");
    let lead: Vec<&Word> = p.words.iter().filter(|w| w.degree() == top).collect();
    if lead.len() != 1 || top == 0 {
        return Err(Error::Domain(
            "root bound needs a single word of top degree".into(),
        ));
    }
    let cn = lead[0].coef_norm();
    let rest: f64 = p
        .words
        .iter()
        .filter(|w| w.degree() < top)
        .map(Word::coef_norm)
        .sum();
    Ok((rest / cn).max(1.0))
}

/// Finds `z` with `|P(z)| < tol` by a grid scan of `|P|` over the box followed by
/// Levenberg-Marquardt descent on `|P|^2` with the sandwich derivative as Jacobian.
pub fn find_root(p: &Phrase, search: Option<SearchBox>, opts: &RootOptions) -> Result<RootResult> {
    if !p.is_polynomial() {
        return Err(Error::Domain(
            "root search needs a polynomial phrase".into(),
        ));
    }
    let search = match search {
        Some(b) => b,
        None => {
            let r = cauchy_radius(p)?;
            let d = Quaternion::new(r, r, r, r);
            SearchBox {
                lo: p.center - d,
                hi: p.center + d,
            }
        }
    };
    let g = opts.grid.max(2);
    let lo = search.lo.to_array();
    let hi = search.hi.to_array();
    let coord =
        |axis: usize, k: usize| lo[axis] + (hi[axis] - lo[axis]) * k as f64 / (g - 1) as f64;
    let mut evaluations = 0usize;
    let mut best: Vec<(f64, Quaternion)> = Vec::with_capacity(opts.starts + 1);
    for i in 0..g {
        for j in 0..g {
            for k in 0..g {
                for l in 0..g {
                    let z = Quaternion::new(coord(0, i), coord(1, j), coord(2, k), coord(3, l));
                    let v = p.eval(z)?.norm();
                    evaluations += 1;
                    if best.len() < opts.starts || v < best.last().expect("nonempty").0 {
                        let pos = best.partition_point(|b| b.0 <= v);
                        best.insert(pos, (v, z));
                        best.truncate(opts.starts);
                    }
                }
            }
        }
    }
    let form = derivative(p);
    let mut champion = best[0];
    for &(_, z0) in &best {
        let (v, z) = descend(p, &form, z0, opts, &mut evaluations)?;
        if v < champion.0 {
            champion = (v, z);
        }
        if champion.0 < opts.tol {
            break;
        }
    }
    if champion.0 < opts.tol {
        Ok(RootResult {
            root: champion.1,
            residual: champion.0,
            evaluations,
            search_box: search,
        })
    } else {
        Err(Error::RootNotFound {
            best: champion.1,
            residual: champion.0,
        })
    }
}

fn descend(
    p: &Phrase,
    form: &crate::words::SandwichForm,
    z0: Quaternion,
    opts: &RootOptions,
    evaluations: &mut usize,
) -> Result<(f64, Quaternion)> {
    let mut z = z0;
    let mut r = p.eval(z)?;
    let mut lambda = 1e-3;
    for _ in 0..opts.iterations {
        let norm = r.norm();
        if norm < 1e-3 * opts.tol {
            break;
        }
        let jac = form.matrix(z, None)?;
        let jt = jac.transpose();
        let rv: Vector4<f64> = to_vec(r);
        let mut accepted = false;
        for _ in 0..30 {
            let a = jt * jac + Matrix4::identity() * (lambda * (1.0 + (jt * jac).diagonal().max()));
            let Some(step) = a.lu().solve(&(-(jt * rv))) else {
                lambda *= 10.0;
                continue;
            };
            let zn = z + from_vec(&step);
            let rn = p.eval(zn)?;
            *evaluations += 1;
            if rn.norm() < norm {
                z = zn;
                r = rn;
                lambda = (lambda * 0.1).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    Ok((r.norm(), z))
}

/// Limits of `z^(-1) a z` as `z -> 0` along `z = s I` and along `z = s h`.
///
/// Along `s I` the value is `a`; along `s h` it is `h^(-1) a h` for every `s != 0`, so the
/// limits differ whenever `a` does not commute with `h`.
pub fn directional_limits(a: Quaternion, h: Quaternion) -> Result<(Quaternion, Quaternion, f64)> {
    let hi = h.inv()?;
    let along_real = a;
    let along_h = hi * a * h;
    Ok((along_real, along_h, (along_real - along_h).norm()))
}
