//! Residues, the residue theorem and the argument principle.

use serde::{Deserialize, Serialize};

use crate::cauchy::quaternion_index;
use crate::elem::exp;
use crate::error::{Error, Result};
use crate::paths::{
    integral_dln_nodes, line_integral, line_integral_sum, Circle, Path, QuadOptions,
    QuadratureResult,
};
use crate::quat::{Quaternion, BASIS, I, ZERO};
use crate::words::{
    derivative, divisor_and_singularity, primitive, recenter, Atom, Phrase, Slot, Word,
    DEFAULT_TRUNCATION,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn two_pi_m_inv(m: Quaternion) -> Result<Quaternion> {
    (m * TWO_PI).inv()
}

/// `(int f dz)(2 pi M)^(-1)` over the circle `p + r exp(2 pi s M)`.
pub fn residue_numeric(
    f: &Phrase,
    p: Quaternion,
    m: Quaternion,
    r: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let c = Circle::new(p, r, m, 1.0)?;
    let mut q = line_integral(f, &Path::Circle(c), opts)?;
    let post = two_pi_m_inv(c.m)?;
    q.value *= post;
    q.error_estimate *= post.norm();
    for t in &mut q.trace {
        t.value *= post;
        t.delta *= post.norm();
    }
    Ok(q)
}

/// Coefficient of `(z - p)^(-1)` in a left-form phrase; zero when `p` is not its center.
pub fn residue_closed_form(f: &Phrase, p: Quaternion) -> Result<Quaternion> {
    if !f.is_left_form() {
        return Err(Error::Domain(
            "closed-form residue needs a left-form phrase".into(),
        ));
    }
    if f.center != p {
        return Ok(ZERO);
    }
    Ok(f.words
        .iter()
        .filter(|w| w.factors[0].exp == -1)
        .map(|w| w.factors[0].coef)
        .sum())
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                t
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Function factors that remain after every constant has moved to the left.
#[derive(Clone, Copy, Debug)]
enum Along {
    /// `r^n exp(2 pi n s M')`.
    Exp(i32),
    /// `ln r + 2 pi s M'`.
    Ln,
    /// The constant generator `M'` itself.
    Gen,
}

/// A product `c E * prod_j F_j(M_j)` with `E` a product of basis units.
#[derive(Clone, Debug)]
struct Reduced {
    scalar: f64,
    unit: Quaternion,
    funcs: Vec<(Along, Quaternion)>,
}

/// Items of one integrand term in order: constants and functions of the circle generator.
enum Item {
    Const(Quaternion),
    Scalar(f64),
    F(Along),
}

/// Moves every constant to the left through `F(M) S = S F(S^(-1) M S)` after splitting
/// each constant into basis components.
fn reduce(items: &[Item], m: Quaternion) -> Vec<Reduced> {
    let mut out = vec![Reduced {
        scalar: 1.0,
        unit: I,
        funcs: Vec::new(),
    }];
    for it in items {
        match it {
            Item::Scalar(c) => out.iter_mut().for_each(|r| r.scalar *= c),
            Item::F(f) => out.iter_mut().for_each(|r| r.funcs.push((*f, m))),
            Item::Const(q) => {
                let mut next = Vec::with_capacity(4 * out.len());
                for r in &out {
                    for (e, c) in BASIS.iter().zip(q.to_array()) {
                        if c == 0.0 {
                            continue;
                        }
                        let ei = e.conj();
                        next.push(Reduced {
                            scalar: r.scalar * c,
                            unit: r.unit * *e,
                            funcs: r.funcs.iter().map(|&(f, mj)| (f, ei * mj * *e)).collect(),
                        });
                    }
                }
                out = next;
            }
        }
    }
    out
}

fn eval_funcs(funcs: &[(Along, Quaternion)], s: f64, r: f64) -> Quaternion {
    funcs.iter().fold(I, |acc, &(f, mj)| {
        acc * match f {
            Along::Exp(n) => exp(mj * (TWO_PI * n as f64 * s)) * r.powi(n),
            Along::Ln => Quaternion::real(r.ln()) + mj * (TWO_PI * s),
            Along::Gen => mj,
        }
    })
}

fn push_atoms(items: &mut Vec<Item>, atoms: &[Atom]) {
    for a in atoms {
        items.push(match *a {
            Atom::Coef(b) => Item::Const(b),
            Atom::Pow(n) => Item::F(Along::Exp(n)),
            Atom::Ln => Item::F(Along::Ln),
        });
    }
}

/// Residue of a single word at its center from the parametrized circle integral.
///
/// Along `u = r exp(2 pi s M)` the integrand `f_hat(u).u'` is a product of constants,
/// powers `r^n exp(2 pi n s M)`, the lifted logarithm `ln r + 2 pi s M` and the
/// generator from `u' = 2 pi M u` (or `D Ln(u).u' = 2 pi M`). Constants are split into
/// basis components and commuted to the left, turning every function factor into one of
/// a conjugated generator `S^(-1) M S`; the remaining scalar integrals over `s` use
/// composite Gauss-Legendre quadrature. The result is multiplied by `(2 pi M)^(-1)`.
pub fn residue_word_reduction(word: &Word, m: Quaternion, r: f64) -> Result<Quaternion> {
    let c = Circle::new(ZERO, r, m, 1.0)?;
    let m = c.m;
    let phrase = Phrase::new(ZERO, vec![word.clone()]);
    let form = derivative(&primitive(&phrase)?);
    let mut reduced: Vec<Reduced> = Vec::new();
    let mut freq = 1usize;
    for t in &form.terms {
        let mut items = Vec::new();
        push_atoms(&mut items, &t.left.atoms());
        items.push(Item::Scalar(TWO_PI));
        items.push(Item::F(Along::Gen));
        if t.slot == Slot::H {
            items.push(Item::F(Along::Exp(1)));
        }
        push_atoms(&mut items, &t.right.atoms());
        freq += items
            .iter()
            .map(|i| {
                if let Item::F(Along::Exp(n)) = i {
                    n.unsigned_abs() as usize
                } else {
                    0
                }
            })
            .sum::<usize>();
        reduced.extend(reduce(&items, m));
    }
    let (x, w) = gauss_legendre(20);
    let panels = 4 * freq;
    let mut total = ZERO;
    for red in &reduced {
        let mut integral = ZERO;
        for p in 0..panels {
            let (lo, hi) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (xi, wi) in x.iter().zip(&w) {
                integral += eval_funcs(&red.funcs, mid + half * xi, r) * (wi * half);
            }
        }
        total += red.unit * integral * red.scalar;
    }
    Ok(total * two_pi_m_inv(m)?)
}

/// One pole in a residue-theorem check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub pole: Quaternion,
    pub index: Quaternion,
    pub residue: Quaternion,
}

/// Both sides of the residue theorem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueCheck {
    /// Direct quadrature of `int_gamma f dz`.
    pub lhs: Quaternion,
    /// `2 pi sum res_j In_j`.
    pub rhs: Quaternion,
    /// `2 pi sum In_j res_j`.
    pub rhs_index_first: Quaternion,
    pub delta: f64,
    pub delta_index_first: f64,
    pub poles: Vec<PoleTerm>,
}

/// Compares `int_gamma f dz` with `2 pi sum res(p_j, f) In(p_j, gamma)` for `f` given as
/// a sum of phrases, whose centers with negative powers are the poles.
///
/// Each residue uses a circle around `p_j` with generator `In_j / |In_j|` and radius a
/// quarter of the distance to the other poles and to the path.
pub fn residue_theorem_check(
    fs: &[Phrase],
    gamma: &Path,
    opts: &QuadOptions,
) -> Result<ResidueCheck> {
    if !gamma.is_closed() {
        return Err(Error::Domain("residue theorem needs a closed path".into()));
    }
    let mut poles: Vec<Quaternion> = Vec::new();
    for f in fs.iter().filter(|f| f.has_negative_power()) {
        if !poles.contains(&f.center) {
            poles.push(f.center);
        }
    }
    let lhs = line_integral_sum(fs, gamma, opts)?.value;
    let samples = gamma.steps(4);
    let path_pts: Vec<Quaternion> = (0..=samples).map(|i| gamma.node(4, i)).collect();
    let mut terms = Vec::new();
    let (mut rhs, mut rhs2) = (ZERO, ZERO);
    for &p in &poles {
        let index = quaternion_index(gamma, p, opts)?.value;
        let mut dist = path_pts
            .iter()
            .map(|z| (*z - p).norm())
            .fold(f64::INFINITY, f64::min);
        for &q in poles.iter().filter(|&&q| q != p) {
            dist = dist.min((q - p).norm());
        }
        let residue = if index.norm() < 1e-9 {
            ZERO
        } else {
            let m = index / index.norm();
            let local: Vec<Phrase> = fs.iter().filter(|f| f.center == p).cloned().collect();
            let c = Circle::new(p, 0.25 * dist, m, 1.0)?;
            line_integral_sum(&local, &Path::Circle(c), opts)?.value * two_pi_m_inv(c.m)?
        };
        rhs += residue * index * TWO_PI;
        rhs2 += index * residue * TWO_PI;
        terms.push(PoleTerm {
            pole: p,
            index,
            residue,
        });
    }
    Ok(ResidueCheck {
        lhs,
        rhs,
        rhs_index_first: rhs2,
        delta: (lhs - rhs).norm(),
        delta_index_first: (lhs - rhs2).norm(),
        poles: terms,
    })
}

/// A zero with its divisor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTerm {
    pub zero: Quaternion,
    pub divisor: i32,
    pub index: Quaternion,
}

/// Both sides of the argument principle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgumentCheck {
    /// Index of the image path `f o gamma` around zero.
    pub lhs: Quaternion,
    /// `sum In(a, gamma) d_f(a)`.
    pub rhs: Quaternion,
    pub delta: f64,
    pub zeros: Vec<ZeroTerm>,
}

/// Compares the index of `f o gamma` around zero with `sum In(a, gamma) d_f(a)`.
///
/// Divisors left as `None` are computed by recentering `f` at the zero and taking the
/// smallest degree among words that do not cancel.
pub fn argument_principle_check(
    f: &Phrase,
    gamma: &Circle,
    zeros: &[(Quaternion, Option<i32>)],
    opts: &QuadOptions,
) -> Result<ArgumentCheck> {
    let path = Path::Circle(*gamma);
    if !path.is_closed() {
        return Err(Error::Domain(
            "argument principle needs a closed circle".into(),
        ));
    }
    let image = |level: usize, i: usize| f.eval(path.node(level, i)).unwrap_or(ZERO);
    for i in 0..=path.steps(2) {
        let z = path.node(2, i);
        if f.eval(z)?.norm() <= 1e-14 {
            return Err(Error::OnPath(z));
        }
    }
    let lhs = integral_dln_nodes(image, |l| path.steps(l), ZERO, opts)?.value / TWO_PI;
    let mut rhs = ZERO;
    let mut terms = Vec::new();
    for &(a, d) in zeros {
        let divisor = match d {
            Some(d) => d,
            None => {
                let g = recenter(f, a, DEFAULT_TRUNCATION)?.phrase;
                let scale = f.words.iter().map(Word::coef_norm).fold(1.0, f64::max);
                divisor_and_singularity(&g, 1e-9 * scale)?.0
            }
        };
        let index = quaternion_index(&path, a, opts)?.value;
        rhs += index * divisor as f64;
        terms.push(ZeroTerm {
            zero: a,
            divisor,
            index,
        });
    }
    Ok(ArgumentCheck {
        lhs,
        rhs,
        delta: (lhs - rhs).norm(),
        zeros: terms,
    })
}
