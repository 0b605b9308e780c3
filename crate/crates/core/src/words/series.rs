//! Recentering, complex extensions, divisors and series norms.

use num_complex::Complex64;

use super::{Factor, Phrase, Word};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, I};

/// Default number of geometric-series terms kept when recentering negative powers.
pub const DEFAULT_TRUNCATION: usize = 24;

/// Bound on the omitted part of a recentered phrase as a function of the evaluation
/// radius `rho = |z - new_center|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailBound {
    /// Distance between the old and new centers.
    pub offset: f64,
    pub truncation: usize,
    /// Per word: coefficient norm product, total positive and total negative degree.
    terms: Vec<(f64, u32, u32)>,
}

impl TailBound {
    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|t| t.2 == 0)
    }

    /// Upper bound on `|f(z) - recentered(z)|` for `|z - new_center| = rho`.
    pub fn at(&self, rho: f64) -> Result<f64> {
        if self.is_exact() {
            return Ok(0.0);
        }
        if rho >= self.offset {
            return Err(Error::ConvergenceRadius {
                radius: rho,
                limit: self.offset,
            });
        }
        let q = rho / self.offset;
        let mut total = 0.0;
        for &(c, pos, neg) in &self.terms {
            if neg == 0 {
                continue;
            }
            let tail = binomial_tail(neg, self.truncation, q);
            total +=
                c * (self.offset + rho).powi(pos as i32) * self.offset.powi(-(neg as i32)) * tail;
        }
        Ok(total)
    }
}

/// `sum_{k > n} C(k + m - 1, m - 1) q^k`.
fn binomial_tail(m: u32, n: usize, q: f64) -> f64 {
    let mut c = 1.0_f64;
    let mut qk = 1.0_f64;
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        if k > n {
            let t = c * qk;
            sum += t;
            if t <= 1e-18 * sum || k > n + 100_000 {
                break;
            }
        }
        c *= (k as f64 + m as f64) / (k as f64 + 1.0);
        qk *= q;
        k += 1;
    }
    sum
}

/// A recentered phrase with the bound on what the truncation dropped.
#[derive(Clone, Debug)]
pub struct Recentered {
    pub phrase: Phrase,
    pub tail: TailBound,
}

/// Words tagged with the geometric-series degree they carry.
type Tagged = Vec<(Word, usize)>;

fn tagged_mul(a: &Tagged, b: &Tagged, n: usize) -> Tagged {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (wa, da) in a {
        for (wb, db) in b {
            if da + db <= n {
                out.push((wa.concat(wb), da + db));
            }
        }
    }
    out
}

/// `(w + d)^n` for `n >= 0`, or the truncated series of `(w + d)^n` for `n < 0`.
fn power_expansion(d: Quaternion, n: i32, trunc: usize) -> Result<Tagged> {
    let one: Tagged = vec![(Word::constant(I), 0)];
    if n >= 0 {
        let lin: Tagged = vec![(Word::monomial(I, 1), 0), (Word::constant(d), 0)];
        let mut acc = one;
        for _ in 0..n {
            acc = tagged_mul(&acc, &lin, trunc);
        }
        return Ok(acc);
    }
    // (w + d)^(-1) = sum_k (-1)^k (d^(-1) w)^k d^(-1)
    let di = d.inv()?;
    let mut series: Tagged = Vec::with_capacity(trunc + 1);
    for k in 0..=trunc {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut f: Vec<Factor> = (0..k).map(|_| Factor::new(di, 1)).collect();
        f.push(Factor::new(di, 0));
        if let Some(first) = f.first_mut() {
            first.coef = first.coef * sign;
        }
        series.push((Word::new(f), k));
    }
    let mut acc = one;
    for _ in 0..-n {
        acc = tagged_mul(&acc, &series, trunc);
    }
    Ok(acc)
}

/// Re-expresses `p` in powers of `w = z - new_center`.
///
/// Nonnegative powers expand exactly. Each `(w + d)^(-1)` with `d = new_center - a`
/// becomes the geometric series `sum_k (-1)^k (d^(-1) w)^k d^(-1)`, valid for `|w| < |d|`,
/// truncated at total series degree `truncation` per word.
pub fn recenter(p: &Phrase, new_center: Quaternion, truncation: usize) -> Result<Recentered> {
    if p.has_ln() {
        return Err(Error::Unsupported(
            "recentering a phrase with a logarithm".into(),
        ));
    }
    let d = new_center - p.center;
    let offset = d.norm();
    if offset == 0.0 {
        let terms = p.words.iter().map(|_| (0.0, 0, 0)).collect();
        return Ok(Recentered {
            phrase: p.clone(),
            tail: TailBound {
                offset,
                truncation,
                terms,
            },
        });
    }
    let mut words = Vec::new();
    let mut terms = Vec::new();
    for w in &p.words {
        let mut acc: Tagged = vec![(Word::constant(I), 0)];
        let (mut pos, mut neg) = (0u32, 0u32);
        for f in &w.factors {
            acc = tagged_mul(&acc, &vec![(Word::constant(f.coef), 0)], truncation);
            if f.exp != 0 {
                if f.exp > 0 {
                    pos += f.exp as u32;
                } else {
                    neg += (-f.exp) as u32;
                }
                acc = tagged_mul(&acc, &power_expansion(d, f.exp, truncation)?, truncation);
            }
        }
        terms.push((w.coef_norm(), pos, neg));
        words.extend(acc.into_iter().map(|(w, _)| w));
    }
    Ok(Recentered {
        phrase: Phrase::new(new_center, words).canonicalize(),
        tail: TailBound {
            offset,
            truncation,
            terms,
        },
    })
}

/// Quaternion phrase `sum_n diag(c_n, conj c_n) (z - diag(t0, conj t0))^n` extending the
/// complex polynomial `sum_n c_n (t - t0)^n`.
pub fn extend_complex(coeffs: &[Complex64], t0: Complex64) -> Phrase {
    let center = Quaternion::from_complex(t0, Complex64::new(0.0, 0.0));
    let terms: Vec<(Quaternion, i32)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() != 0.0)
        .map(|(n, &c)| {
            (
                Quaternion::from_complex(c, Complex64::new(0.0, 0.0)),
                n as i32,
            )
        })
        .collect();
    Phrase::left_form(center, &terms)
}

/// Classification of the phrase center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Singularity {
    Removable,
    Pole(u32),
    /// Infinitely many negative words; never produced from a finite phrase.
    Essential,
}

/// Divisor (minimal total degree over nonzero words) and singularity class at the center.
///
/// Words whose coefficient product is at most `tol` are treated as zero.
pub fn divisor_and_singularity(p: &Phrase, tol: f64) -> Result<(i32, Singularity)> {
    if p.has_ln() {
        return Err(Error::Unsupported(
            "divisor of a phrase with a logarithm".into(),
        ));
    }
    let beta = p
        .words
        .iter()
        .filter(|w| w.coef_norm() > tol)
        .map(Word::degree)
        .min()
        .ok_or_else(|| Error::Domain("divisor of an empty phrase".into()))?;
    let class = if beta < 0 {
        Singularity::Pole((-beta) as u32)
    } else {
        Singularity::Removable
    };
    Ok((beta, class))
}

/// The pair `(sup_{eta<0} |b| r^eta, sup_{eta>=0} |b| R^eta)` over words, with `|b|` the
/// product of coefficient norms.
pub fn series_norm(p: &Phrase, r: f64, big_r: f64) -> (f64, f64) {
    let mut neg = 0.0_f64;
    let mut pos = 0.0_f64;
    for w in &p.words {
        let eta = w.degree();
        let c = w.coef_norm();
        if eta < 0 {
            neg = neg.max(c * r.powi(eta));
        } else {
            pos = pos.max(c * big_r.powi(eta));
        }
    }
    (neg, pos)
}
