//! Noncommutative words and phrases in a single variable `u = z - a`.
//!
//! A [`Word`] is an ordered product of factors `b u^n` where each factor may also carry
//! `Ln(u)` placed right after its power (`Ln(u)` commutes with powers of `u`). A trailing
//! coefficient is a last factor with exponent zero. A [`Phrase`] is a finite sum of words
//! sharing one center `a`.

mod calculus;
mod conj;
mod series;

pub use calculus::{
    derivative, derivative_i, hat_apply, primitive, Hat, SandwichForm, SandwichTerm, Slot,
};
pub use conj::{eliminate_conjugate, CFactor, CWord, ConjugatePhrase, Sym};
pub use series::{
    divisor_and_singularity, extend_complex, recenter, series_norm, Recentered, Singularity,
    TailBound, DEFAULT_TRUNCATION,
};

use crate::elem::ln_principal;
use crate::error::{Error, Result};
use crate::quat::{Quaternion, I, ZERO};

/// One factor `coef * u^exp`, followed by `Ln(u)` when `ln` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factor {
    pub coef: Quaternion,
    pub exp: i32,
    pub ln: bool,
}

impl Factor {
    pub fn new(coef: Quaternion, exp: i32) -> Self {
        Factor {
            coef,
            exp,
            ln: false,
        }
    }

    pub fn with_ln(coef: Quaternion, exp: i32) -> Self {
        Factor {
            coef,
            exp,
            ln: true,
        }
    }

    fn is_polynomial(&self) -> bool {
        self.exp >= 0 && !self.ln
    }
}

/// Building blocks of a word, used by the Leibniz expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Atom {
    Coef(Quaternion),
    Pow(i32),
    Ln,
}

/// Noncommutative monomial `b_1 u^{n_1} ... b_m u^{n_m}`; the empty product is `1`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Word {
    pub factors: Vec<Factor>,
}

impl Word {
    pub fn new(factors: Vec<Factor>) -> Self {
        Word { factors }
    }

    pub fn constant(b: Quaternion) -> Self {
        Word::new(vec![Factor::new(b, 0)])
    }

    pub fn monomial(b: Quaternion, n: i32) -> Self {
        Word::new(vec![Factor::new(b, n)])
    }

    /// Total degree `eta = sum n_j`.
    pub fn degree(&self) -> i32 {
        self.factors.iter().map(|f| f.exp).sum()
    }

    /// Word length: one per nonzero exponent (and per logarithm), plus `j` for a unit
    /// coefficient in position `j` and `j + 1` for any other coefficient.
    pub fn length(&self) -> usize {
        self.factors
            .iter()
            .enumerate()
            .map(|(idx, f)| {
                let j = idx + 1;
                let delta = usize::from(f.exp != 0) + usize::from(f.ln);
                let kappa = if f.coef == I { j } else { j + 1 };
                delta + kappa
            })
            .sum()
    }

    pub fn ln_count(&self) -> usize {
        self.factors.iter().filter(|f| f.ln).count()
    }

    pub fn has_negative_power(&self) -> bool {
        self.factors.iter().any(|f| f.exp < 0)
    }

    /// Only nonnegative powers and no logarithm.
    pub fn is_polynomial(&self) -> bool {
        self.factors.iter().all(Factor::is_polynomial)
    }

    /// Body factors and the trailing coefficient, if any.
    pub fn split_tail(&self) -> (&[Factor], Option<Quaternion>) {
        match self.factors.split_last() {
            Some((last, rest)) if !rest.is_empty() && last.exp == 0 && !last.ln => {
                (rest, Some(last.coef))
            }
            _ => (&self.factors[..], None),
        }
    }

    /// Product of coefficient norms.
    pub fn coef_norm(&self) -> f64 {
        self.factors.iter().map(|f| f.coef.norm()).product()
    }

    /// Evaluates the word at `u = z - a` with the given value for `Ln(u)`.
    pub fn eval_u(&self, u: Quaternion, ln: Option<Quaternion>) -> Result<Quaternion> {
        let mut acc = I;
        let mut inv: Option<Quaternion> = None;
        for f in &self.factors {
            acc *= f.coef;
            if f.exp > 0 {
                acc *= u.powi(f.exp)?;
            } else if f.exp < 0 {
                let ui = match inv {
                    Some(q) => q,
                    None => {
                        let q = u.inv().map_err(|_| Error::Pole(u))?;
                        inv = Some(q);
                        q
                    }
                };
                acc *= ui.powi(-f.exp)?;
            }
            if f.ln {
                let l = match ln {
                    Some(l) => l,
                    None => ln_principal(u).map_err(|_| Error::Pole(u))?,
                };
                acc *= l;
            }
        }
        Ok(acc)
    }

    pub(crate) fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::with_capacity(3 * self.factors.len());
        for f in &self.factors {
            out.push(Atom::Coef(f.coef));
            if f.exp != 0 {
                out.push(Atom::Pow(f.exp));
            }
            if f.ln {
                out.push(Atom::Ln);
            }
        }
        out
    }

    pub(crate) fn from_atoms(atoms: &[Atom]) -> Word {
        let mut factors: Vec<Factor> = Vec::new();
        for a in atoms {
            match *a {
                Atom::Coef(b) => factors.push(Factor::new(b, 0)),
                Atom::Pow(n) => match factors.last_mut() {
                    Some(f) => f.exp += n,
                    None => factors.push(Factor::new(I, n)),
                },
                Atom::Ln => match factors.last_mut() {
                    Some(f) if !f.ln => f.ln = true,
                    _ => factors.push(Factor::with_ln(I, 0)),
                },
            }
        }
        Word::new(factors)
    }

    /// Concatenation `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        Word::new(f)
    }

    /// Left multiplication of the word by a constant.
    pub fn scale_left(&self, q: Quaternion) -> Word {
        let mut w = self.clone();
        match w.factors.first_mut() {
            Some(f) => f.coef = q * f.coef,
            None => w.factors.push(Factor::new(q, 0)),
        }
        w
    }

    /// Canonical form; `None` when the word is zero.
    ///
    /// Rewrites, applied to a fixed point: real coefficients move to the front, unit
    /// coefficients merge adjacent powers, and a zero-exponent factor without a logarithm
    /// is multiplied into the next coefficient.
    pub fn canonicalize(&self) -> Option<Word> {
        let mut fs = self.factors.clone();
        if fs.is_empty() {
            return Some(Word::constant(I));
        }
        if fs.iter().any(|f| f.coef.is_zero()) {
            return None;
        }
        loop {
            let mut changed = false;
            for j in 1..fs.len() {
                let c = fs[j].coef;
                if c.is_exactly_real() && c != I {
                    fs[0].coef = fs[0].coef * c.v;
                    fs[j].coef = I;
                    changed = true;
                }
            }
            let mut j = 1;
            while j < fs.len() {
                if fs[j].coef == I && !(fs[j].ln && fs[j - 1].ln) {
                    let f = fs.remove(j);
                    fs[j - 1].exp += f.exp;
                    fs[j - 1].ln |= f.ln;
                    changed = true;
                } else {
                    j += 1;
                }
            }
            let mut j = 0;
            while j + 1 < fs.len() {
                if fs[j].exp == 0 && !fs[j].ln {
                    let f = fs.remove(j);
                    fs[j].coef = f.coef * fs[j].coef;
                    changed = true;
                } else {
                    j += 1;
                }
            }
            if fs.iter().any(|f| f.coef.is_zero()) {
                return None;
            }
            if !changed {
                break;
            }
        }
        Some(Word::new(fs))
    }

    /// Exponent and logarithm pattern, used to detect like words.
    fn shape(&self) -> Vec<(i32, bool)> {
        self.factors.iter().map(|f| (f.exp, f.ln)).collect()
    }
}

/// Finite sum of words with a common center.
#[derive(Clone, Debug, PartialEq)]
pub struct Phrase {
    pub center: Quaternion,
    pub words: Vec<Word>,
}

impl Phrase {
    pub fn new(center: Quaternion, words: Vec<Word>) -> Self {
        Phrase { center, words }
    }

    pub fn zero(center: Quaternion) -> Self {
        Phrase::new(center, Vec::new())
    }

    /// `sum_n b_n u^n` from `(b_n, n)` pairs.
    pub fn left_form(center: Quaternion, terms: &[(Quaternion, i32)]) -> Self {
        Phrase::new(
            center,
            terms.iter().map(|&(b, n)| Word::monomial(b, n)).collect(),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Every word is a single factor `b u^n` without logarithm or trailing coefficient.
    pub fn is_left_form(&self) -> bool {
        self.words
            .iter()
            .all(|w| w.factors.len() == 1 && !w.factors[0].ln)
    }

    pub fn is_polynomial(&self) -> bool {
        self.words.iter().all(Word::is_polynomial)
    }

    pub fn has_ln(&self) -> bool {
        self.words.iter().any(|w| w.ln_count() > 0)
    }

    pub fn has_negative_power(&self) -> bool {
        self.words.iter().any(Word::has_negative_power)
    }

    pub fn length(&self) -> usize {
        self.words.iter().map(Word::length).sum()
    }

    /// Largest total degree among words, `None` for the empty phrase.
    pub fn max_degree(&self) -> Option<i32> {
        self.words.iter().map(Word::degree).max()
    }

    /// Evaluates the phrase at `z`, using the principal logarithm where needed.
    pub fn eval(&self, z: Quaternion) -> Result<Quaternion> {
        self.eval_with_ln(z, None)
    }

    /// Evaluates with an explicit value for `Ln(z - a)`.
    pub fn eval_with_ln(&self, z: Quaternion, ln: Option<Quaternion>) -> Result<Quaternion> {
        let u = z - self.center;
        let mut acc = ZERO;
        for w in &self.words {
            acc += w.eval_u(u, ln).map_err(|e| match e {
                Error::Pole(_) => Error::Pole(z),
                other => other,
            })?;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Phrase) -> Result<Phrase> {
        self.check_center(other)?;
        let mut words = self.words.clone();
        words.extend(other.words.iter().cloned());
        Ok(Phrase::new(self.center, words).canonicalize())
    }

    pub fn neg(&self) -> Phrase {
        self.scale_left(-I)
    }

    pub fn scale_left(&self, q: Quaternion) -> Phrase {
        Phrase::new(
            self.center,
            self.words.iter().map(|w| w.scale_left(q)).collect(),
        )
        .canonicalize()
    }

    /// Product, expanded word by word in document order.
    pub fn mul(&self, other: &Phrase) -> Result<Phrase> {
        self.check_center(other)?;
        let mut words = Vec::with_capacity(self.words.len() * other.words.len());
        for a in &self.words {
            for b in &other.words {
                words.push(a.concat(b));
            }
        }
        Ok(Phrase::new(self.center, words).canonicalize())
    }

    /// Appends a factor to every word.
    pub fn append_factor(&self, f: Factor) -> Phrase {
        let words = self
            .words
            .iter()
            .map(|w| {
                let mut w = w.clone();
                w.factors.push(f);
                w
            })
            .collect();
        Phrase::new(self.center, words).canonicalize()
    }

    fn check_center(&self, other: &Phrase) -> Result<()> {
        if self.center != other.center {
            return Err(Error::Domain("phrases with different centers".into()));
        }
        Ok(())
    }

    /// Canonical words with like words merged.
    ///
    /// Two words with the same exponent pattern whose coefficients differ in exactly one
    /// position are added at that position. Sums that cancel to rounding level are dropped.
    pub fn canonicalize(&self) -> Phrase {
        let mut words: Vec<Word> = self.words.iter().filter_map(Word::canonicalize).collect();
        loop {
            let mut merged = false;
            let mut i = 0;
            while i < words.len() {
                let mut j = i + 1;
                while j < words.len() {
                    if let Some(w) = merge_like(&words[i], &words[j]) {
                        words.remove(j);
                        match w {
                            Some(w) => words[i] = w,
                            None => {
                                words.remove(i);
                                j = i + 1;
                                merged = true;
                                if i >= words.len() {
                                    break;
                                }
                                continue;
                            }
                        }
                        merged = true;
                    } else {
                        j += 1;
                    }
                }
                i += 1;
            }
            if !merged {
                break;
            }
        }
        Phrase::new(self.center, words)
    }
}

/// `Some(Some(w))` when `a + b` is the single word `w`, `Some(None)` when it cancels,
/// `None` when the words are not like terms.
fn merge_like(a: &Word, b: &Word) -> Option<Option<Word>> {
    if a.factors.len() != b.factors.len() || a.shape() != b.shape() {
        return None;
    }
    let diff: Vec<usize> = (0..a.factors.len())
        .filter(|&k| a.factors[k].coef != b.factors[k].coef)
        .collect();
    let k = match diff.len() {
        0 => {
            // a + a = 2a
            let mut w = a.clone();
            w.factors[0].coef = w.factors[0].coef * 2.0;
            return Some(w.canonicalize());
        }
        1 => diff[0],
        _ => return None,
    };
    let (ca, cb) = (a.factors[k].coef, b.factors[k].coef);
    let sum = ca + cb;
    if sum.norm() <= 1e-14 * (ca.norm() + cb.norm()) {
        return Some(None);
    }
    let mut w = a.clone();
    w.factors[k].coef = sum;
    Some(w.canonicalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{J, K, L};

    fn phrase329() -> Phrase {
        Phrase::new(
            ZERO,
            vec![
                Word::monomial(I, 2),
                Word::new(vec![
                    Factor::new(I, 1),
                    Factor::new(J, 1),
                    Factor::new(J, 0),
                ]),
                Word::new(vec![
                    Factor::new(I, 1),
                    Factor::new(K, 1),
                    Factor::new(K, 0),
                ]),
                Word::new(vec![
                    Factor::new(I, 1),
                    Factor::new(L, 1),
                    Factor::new(L, 0),
                ]),
                Word::constant(-I),
            ],
        )
    }

    #[test]
    fn eval_examples() {
        let p = phrase329();
        assert!((p.eval(J).unwrap() - Quaternion::real(-3.0)).norm() < 1e-15);
        assert_eq!(Phrase::zero(ZERO).eval(J).unwrap(), ZERO);
        let b = Quaternion::new(1.0, 2.0, -1.0, 0.5);
        let p = Phrase::new(K, vec![Word::monomial(b, 0)]);
        assert_eq!(p.eval(K).unwrap(), b);
        let p = Phrase::left_form(K, &[(b, -1)]);
        assert!(matches!(p.eval(K), Err(Error::Pole(_))));
    }

    #[test]
    fn canonicalize_examples() {
        let w = Word::new(vec![Factor::new(I, 2), Factor::new(I, 3)]);
        assert_eq!(w.canonicalize().unwrap(), Word::monomial(I, 5));
        let w = Word::new(vec![Factor::new(I * 2.0, 1), Factor::new(I * 3.0, 1)]);
        assert_eq!(w.canonicalize().unwrap(), Word::monomial(I * 6.0, 2));
        let p = Phrase::new(
            ZERO,
            vec![
                Word::new(vec![Factor::new(J, 1), Factor::new(K, 0)]),
                Word::monomial(ZERO, 1),
            ],
        )
        .canonicalize();
        assert_eq!(p.words.len(), 1);
        assert_eq!(
            p.words[0],
            Word::new(vec![Factor::new(J, 1), Factor::new(K, 0)])
        );
        // adjacent zero-exponent factors collapse
        let w = Word::new(vec![
            Factor::new(J, 0),
            Factor::new(K, 0),
            Factor::new(L, 2),
        ]);
        assert_eq!(w.canonicalize().unwrap(), Word::monomial(J * K * L, 2));
        // like words add
        let p = Phrase::left_form(ZERO, &[(J, 2), (K, 2), (-J - K, 2)]).canonicalize();
        assert!(p.is_empty());
    }

    #[test]
    fn logarithm_does_not_cross_coefficients() {
        let w = Word::new(vec![Factor::with_ln(J, 0), Factor::new(K, 0)]);
        let c = w.canonicalize().unwrap();
        assert_eq!(c, w);
        let u = Quaternion::new(0.5, 0.2, -0.3, 0.1);
        let l = ln_principal(u).unwrap();
        assert!((c.eval_u(u, None).unwrap() - J * l * K).norm() < 1e-15);
    }

    #[test]
    fn length_rules() {
        // b u^2 with b != 1: delta 1 + kappa 2
        assert_eq!(Word::monomial(J, 2).length(), 3);
        assert_eq!(Word::monomial(I, 2).length(), 2);
        let w = Word::new(vec![Factor::new(J, 1), Factor::new(K, 1)]);
        assert_eq!(w.length(), 1 + 2 + 1 + 3);
    }
}
