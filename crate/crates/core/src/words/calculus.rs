//! Derivatives and primitives of phrases.

use super::{Atom, Factor, Phrase, Word};
use crate::elem::{ln_derivative_apply, ln_principal, matrix_of, LinearMap};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, I, ZERO};

/// Cap on the number of terms of the integration-by-parts recursions.
const MAX_RECURSION: usize = 256;

/// What sits between the two words of a sandwich term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// The increment `h` itself.
    H,
    /// The derivative of `Ln(u)` applied to `h`.
    LnDerivative,
}

/// `left * slot(h) * right`.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichTerm {
    pub left: Word,
    pub slot: Slot,
    pub right: Word,
}

/// Frechet derivative of a phrase as a sum of sandwich terms, linear in `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichForm {
    pub center: Quaternion,
    pub terms: Vec<SandwichTerm>,
}

impl SandwichForm {
    pub fn needs_ln(&self) -> bool {
        self.terms.iter().any(|t| {
            t.slot == Slot::LnDerivative || t.left.ln_count() > 0 || t.right.ln_count() > 0
        })
    }

    /// `Df(z).h`, with `ln` the value of `Ln(z - a)` on the branch in use.
    pub fn eval(&self, z: Quaternion, h: Quaternion, ln: Option<Quaternion>) -> Result<Quaternion> {
        let u = z - self.center;
        let ln = match ln {
            Some(l) => Some(l),
            None if self.needs_ln() => Some(ln_principal(u).map_err(|_| Error::Pole(z))?),
            None => None,
        };
        let mut dln: Option<Quaternion> = None;
        let mut acc = ZERO;
        for t in &self.terms {
            let mid = match t.slot {
                Slot::H => h,
                Slot::LnDerivative => match dln {
                    Some(d) => d,
                    None => {
                        let d = ln_derivative_apply(ln.expect("logarithm value"), h)?;
                        dln = Some(d);
                        d
                    }
                },
            };
            let l = t.left.eval_u(u, ln).map_err(|_| Error::Pole(z))?;
            let r = t.right.eval_u(u, ln).map_err(|_| Error::Pole(z))?;
            acc += l * mid * r;
        }
        Ok(acc)
    }

    /// The derivative at `z` as a real 4x4 matrix.
    pub fn matrix(&self, z: Quaternion, ln: Option<Quaternion>) -> Result<LinearMap> {
        let mut err = None;
        let m = matrix_of(|h| match self.eval(z, h, ln) {
            Ok(q) => q,
            Err(e) => {
                err.get_or_insert(e);
                ZERO
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(m),
        }
    }
}

fn atoms_word(parts: &[&[Atom]]) -> Option<Word> {
    let atoms: Vec<Atom> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    Word::from_atoms(&atoms).canonicalize()
}

fn push_word_terms(w: &Word, out: &mut Vec<SandwichTerm>) {
    let atoms = w.atoms();
    for (i, a) in atoms.iter().enumerate() {
        let (pre, post) = (&atoms[..i], &atoms[i + 1..]);
        let mut push = |left: Option<Word>, slot, right: Option<Word>| {
            if let (Some(left), Some(right)) = (left, right) {
                out.push(SandwichTerm { left, slot, right });
            }
        };
        match *a {
            Atom::Coef(_) => {}
            Atom::Pow(n) if n > 0 => {
                for k in 0..n {
                    push(
                        atoms_word(&[pre, &[Atom::Pow(k)]]),
                        Slot::H,
                        atoms_word(&[&[Atom::Pow(n - 1 - k)], post]),
                    );
                }
            }
            Atom::Pow(n) => {
                for k in 1..=-n {
                    push(
                        atoms_word(&[&[Atom::Coef(-I)], pre, &[Atom::Pow(-k)]]),
                        Slot::H,
                        atoms_word(&[&[Atom::Pow(n + k - 1)], post]),
                    );
                }
            }
            Atom::Ln => push(atoms_word(&[pre]), Slot::LnDerivative, atoms_word(&[post])),
        }
    }
}

/// Leibniz expansion of the derivative of a phrase.
pub fn derivative(p: &Phrase) -> SandwichForm {
    let mut terms = Vec::new();
    for w in &p.words {
        push_word_terms(w, &mut terms);
    }
    SandwichForm {
        center: p.center,
        terms,
    }
}

/// The derivative applied to `h = 1`, as a phrase: `D Ln(u).1 = u^(-1)`.
pub fn derivative_i(p: &Phrase) -> Phrase {
    let form = derivative(p);
    let words = form
        .terms
        .iter()
        .filter_map(|t| {
            let mid = match t.slot {
                Slot::H => Atom::Coef(I),
                Slot::LnDerivative => Atom::Pow(-1),
            };
            atoms_word(&[&t.left.atoms(), &[mid], &t.right.atoms()])
        })
        .collect();
    Phrase::new(p.center, words).canonicalize()
}

/// Primitive of a word with a single body factor `b u^n [Ln]` and optional tail `c`.
fn primitive_single(body: Factor, tail: Option<Quaternion>) -> Result<Vec<Word>> {
    let b = body.coef;
    let n = body.exp;
    let with_tail = |f: Factor| match tail {
        Some(c) => Word::new(vec![f, Factor::new(c, 0)]),
        None => Word::new(vec![f]),
    };
    let m = n + 1;
    let out = match (body.ln, m) {
        (false, 0) => vec![with_tail(Factor::with_ln(b, 0))],
        (false, _) => vec![with_tail(Factor::new(b / m as f64, m))],
        (true, 0) => {
            return Err(Error::Unsupported(
                "primitive of u^(-1) Ln(u) needs a squared logarithm".into(),
            ))
        }
        (true, _) => {
            let mf = m as f64;
            vec![
                with_tail(Factor::with_ln(b / mf, m)),
                with_tail(Factor::new(-b / (mf * mf), m)),
            ]
        }
    };
    Ok(out)
}

fn non_polynomial(f: &Factor) -> bool {
    f.exp < 0 || f.ln
}

/// `(f q)^1 = sum_{p>=1} (-1)^(p-1) f^p q^(p-1)`: repeated primitives of the first
/// factor against derivatives of the polynomial rest.
fn by_parts_first(center: Quaternion, body: &[Factor], tail: Option<Quaternion>) -> Result<Phrase> {
    let f = Phrase::new(center, vec![Word::new(body[..1].to_vec())]);
    let mut rest = body[1..].to_vec();
    if let Some(c) = tail {
        rest.push(Factor::new(c, 0));
    }
    let mut qd = Phrase::new(center, vec![Word::new(rest)]).canonicalize();
    let mut fp = primitive(&f)?;
    let mut acc: Vec<Word> = Vec::new();
    let mut sign = I;
    for _ in 0..MAX_RECURSION {
        acc.extend(fp.mul(&qd)?.scale_left(sign).words);
        qd = derivative_i(&qd);
        if qd.is_empty() {
            return Ok(Phrase::new(center, acc).canonicalize());
        }
        fp = primitive(&fp)?;
        sign = -sign;
    }
    Err(Error::Unsupported(
        "integration by parts did not terminate".into(),
    ))
}

/// `(f q)^1 = sum_{p>=0} (-1)^p f^(p) q^(p+1)`: derivatives of the polynomial prefix
/// against repeated primitives of the last factor.
fn by_parts_last(center: Quaternion, body: &[Factor], tail: Option<Quaternion>) -> Result<Phrase> {
    let (last, prefix) = body.split_last().expect("nonempty body");
    let mut q = vec![*last];
    if let Some(c) = tail {
        q.push(Factor::new(c, 0));
    }
    let mut fd = Phrase::new(center, vec![Word::new(prefix.to_vec())]).canonicalize();
    let mut qp = primitive(&Phrase::new(center, vec![Word::new(q)]))?;
    let mut acc: Vec<Word> = Vec::new();
    let mut sign = I;
    for _ in 0..MAX_RECURSION {
        acc.extend(fd.mul(&qp)?.scale_left(sign).words);
        fd = derivative_i(&fd);
        if fd.is_empty() {
            return Ok(Phrase::new(center, acc).canonicalize());
        }
        qp = primitive(&qp)?;
        sign = -sign;
    }
    Err(Error::Unsupported(
        "integration by parts did not terminate".into(),
    ))
}

fn primitive_word(center: Quaternion, w: &Word) -> Result<Phrase> {
    let (body, tail) = w.split_tail();
    if body.len() == 1 {
        return Ok(Phrase::new(center, primitive_single(body[0], tail)?).canonicalize());
    }
    if w.ln_count() > 1 {
        return Err(Error::Unsupported(
            "word with more than one logarithm".into(),
        ));
    }
    let bad: Vec<usize> = (0..body.len())
        .filter(|&i| non_polynomial(&body[i]))
        .collect();
    let last = body.len() - 1;
    match bad.as_slice() {
        [] if body.len() == 2 => {
            if body[0].exp >= body[1].exp {
                by_parts_first(center, body, tail)
            } else {
                by_parts_last(center, body, tail)
            }
        }
        [] => by_parts_last(center, body, tail),
        [0] => by_parts_first(center, body, tail),
        [i] if *i == last => by_parts_last(center, body, tail),
        _ => Err(Error::Unsupported(format!(
            "no closed primitive for a word whose negative powers or logarithms sit inside the product ({} factors)",
            body.len()
        ))),
    }
}

/// A primitive `F` with `DF(z).1 = f(z)`, normalized to vanish at the center where
/// that makes sense.
pub fn primitive(p: &Phrase) -> Result<Phrase> {
    let mut words = Vec::new();
    for w in &p.words {
        words.extend(primitive_word(p.center, w)?.words);
    }
    Ok(Phrase::new(p.center, words).canonicalize())
}

/// The operator `f_hat(z) h = D(f^1)(z) h` for a fixed phrase.
#[derive(Clone, Debug)]
pub struct Hat {
    pub primitive: Phrase,
    pub form: SandwichForm,
}

impl Hat {
    pub fn new(p: &Phrase) -> Result<Hat> {
        let primitive = primitive(p)?;
        let form = derivative(&primitive);
        Ok(Hat { primitive, form })
    }

    pub fn center(&self) -> Quaternion {
        self.primitive.center
    }

    pub fn needs_ln(&self) -> bool {
        self.form.needs_ln()
    }

    /// `f_hat(z) h`, using the given value of `Ln(z - a)` or the principal one.
    pub fn apply(
        &self,
        z: Quaternion,
        h: Quaternion,
        ln: Option<Quaternion>,
    ) -> Result<Quaternion> {
        self.form.eval(z, h, ln)
    }
}

/// `f_hat(z) h` with the principal logarithm.
pub fn hat_apply(p: &Phrase, z: Quaternion, h: Quaternion) -> Result<Quaternion> {
    Hat::new(p)?.apply(z, h, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{J, K, L};

    fn fd_check(p: &Phrase, z: Quaternion, h: Quaternion) {
        let eps = 1e-6;
        let num = (p.eval(z + h * eps).unwrap() - p.eval(z - h * eps).unwrap()) / (2.0 * eps);
        let ana = derivative(p).eval(z, h, None).unwrap();
        assert!(
            (num - ana).norm() < 1e-7 * (1.0 + ana.norm()),
            "{num} vs {ana}"
        );
    }

    fn sample() -> Vec<Phrase> {
        let a = Quaternion::new(0.3, -0.2, 0.5, 0.1);
        vec![
            Phrase::left_form(ZERO, &[(I, 2)]),
            Phrase::left_form(a, &[(J, 3), (K, -2), (L, 0)]),
            Phrase::new(
                a,
                vec![Word::new(vec![
                    Factor::new(J, 2),
                    Factor::new(K, 1),
                    Factor::new(L, 0),
                ])],
            ),
            Phrase::new(
                a,
                vec![Word::new(vec![Factor::with_ln(J, 1), Factor::new(K, 0)])],
            ),
            Phrase::new(
                ZERO,
                vec![Word::new(vec![Factor::new(J, -1), Factor::new(K, 2)])],
            ),
        ]
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let z = Quaternion::new(1.1, 0.4, -0.7, 0.25);
        for p in sample() {
            for h in [I, J, K, L, Quaternion::new(0.3, 0.1, -0.2, 0.9)] {
                fd_check(&p, z, h);
            }
        }
    }

    #[test]
    fn square_derivative_is_anticommutator() {
        let p = Phrase::left_form(ZERO, &[(I, 2)]);
        let z = Quaternion::new(0.5, 1.0, -2.0, 0.3);
        let h = Quaternion::new(0.0, 0.2, 1.0, -0.4);
        let d = derivative(&p).eval(z, h, None).unwrap();
        assert!((d - (z * h + h * z)).norm() < 1e-14);
        assert_eq!(derivative_i(&p), Phrase::left_form(ZERO, &[(I * 2.0, 1)]));
    }

    #[test]
    fn primitive_inverts_derivative_i() {
        let z = Quaternion::new(0.9, -0.4, 0.6, 0.35);
        for p in sample() {
            let f1 = primitive(&p).unwrap();
            let back = derivative_i(&f1);
            let diff = (back.eval(z).unwrap() - p.eval(z).unwrap()).norm();
            assert!(diff < 1e-12, "{diff}");
        }
    }

    #[test]
    fn primitive_closed_forms() {
        let p = Phrase::left_form(ZERO, &[(J, 1)]);
        assert_eq!(
            primitive(&p).unwrap(),
            Phrase::left_form(ZERO, &[(J * 0.5, 2)])
        );
        let p = Phrase::left_form(ZERO, &[(K, -1)]);
        let f = primitive(&p).unwrap();
        assert_eq!(f.words, vec![Word::new(vec![Factor::with_ln(K, 0)])]);
        let p = Phrase::new(ZERO, vec![Word::new(vec![Factor::with_ln(I, -1)])]);
        assert!(matches!(primitive(&p), Err(Error::Unsupported(_))));
        let p = Phrase::new(
            ZERO,
            vec![Word::new(vec![
                Factor::new(J, 1),
                Factor::new(K, -1),
                Factor::new(L, 1),
            ])],
        );
        assert!(matches!(primitive(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hat_of_left_form_is_left_multiplication() {
        // f = b u^n in left form: f_hat(z) h = b u^n h when u commutes with h
        let b = Quaternion::new(0.2, 1.0, -0.5, 0.3);
        let p = Phrase::left_form(ZERO, &[(b, 2)]);
        let z = Quaternion::new(0.7, 0.4, 0.0, 0.0);
        let h = Quaternion::new(0.1, -0.3, 0.0, 0.0);
        let v = hat_apply(&p, z, h).unwrap();
        assert!((v - b * z * z * h).norm() < 1e-14);
        // h = 1 recovers f
        let v = hat_apply(&p, Quaternion::new(0.3, 0.1, 0.9, -0.2), I).unwrap();
        assert!((v - p.eval(Quaternion::new(0.3, 0.1, 0.9, -0.2)).unwrap()).norm() < 1e-14);
    }
}
