//! Words in `u` and its conjugate.

use super::{Factor, Phrase, Word};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, I, J, K, L, ZERO};

/// The variable or its quaternion conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sym {
    Z,
    ZConj,
}

/// `coef * sym^exp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CFactor {
    pub coef: Quaternion,
    pub sym: Sym,
    pub exp: u32,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CWord {
    pub factors: Vec<CFactor>,
}

/// Sum of words in `u = z - a` and `conj(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugatePhrase {
    pub center: Quaternion,
    pub words: Vec<CWord>,
}

impl ConjugatePhrase {
    pub fn eval(&self, z: Quaternion) -> Result<Quaternion> {
        let u = z - self.center;
        let uc = u.conj();
        let mut acc = ZERO;
        for w in &self.words {
            let mut t = I;
            for f in &w.factors {
                let base = match f.sym {
                    Sym::Z => u,
                    Sym::ZConj => uc,
                };
                let e =
                    i32::try_from(f.exp).map_err(|_| Error::Domain("exponent too large".into()))?;
                t = t * f.coef * base.powi(e)?;
            }
            acc += t;
        }
        Ok(acc)
    }
}

/// `conj(u) = -(u + J u J + K u K + L u L) / 2` as a phrase.
fn conj_phrase(center: Quaternion) -> Phrase {
    let mut words = vec![Word::monomial(I * -0.5, 1)];
    for e in [J, K, L] {
        words.push(Word::new(vec![Factor::new(e * -0.5, 1), Factor::new(e, 0)]));
    }
    Phrase::new(center, words)
}

/// Rewrites every conjugate through the identity for `conj(u)`, giving an ordinary phrase.
pub fn eliminate_conjugate(p: &ConjugatePhrase) -> Result<Phrase> {
    let c = conj_phrase(p.center);
    let mut total = Phrase::zero(p.center);
    for w in &p.words {
        let mut acc = Phrase::new(p.center, vec![Word::constant(I)]);
        for f in &w.factors {
            acc = acc.mul(&Phrase::new(p.center, vec![Word::constant(f.coef)]))?;
            let e = i32::try_from(f.exp).map_err(|_| Error::Domain("exponent too large".into()))?;
            match f.sym {
                Sym::Z => acc = acc.mul(&Phrase::new(p.center, vec![Word::monomial(I, e)]))?,
                Sym::ZConj => {
                    for _ in 0..e {
                        acc = acc.mul(&c)?;
                    }
                }
            }
        }
        total = total.add(&acc)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_identity() {
        let z = Quaternion::new(0.4, -1.2, 0.7, 2.0);
        assert!((conj_phrase(ZERO).eval(z).unwrap() - z.conj()).norm() < 1e-14);
    }

    #[test]
    fn elimination_preserves_values() {
        let a = Quaternion::new(0.1, 0.2, 0.0, -0.3);
        let p = ConjugatePhrase {
            center: a,
            words: vec![
                CWord {
                    factors: vec![
                        CFactor {
                            coef: J,
                            sym: Sym::Z,
                            exp: 1,
                        },
                        CFactor {
                            coef: K,
                            sym: Sym::ZConj,
                            exp: 2,
                        },
                    ],
                },
                CWord {
                    factors: vec![CFactor {
                        coef: L,
                        sym: Sym::ZConj,
                        exp: 1,
                    }],
                },
            ],
        };
        let q = eliminate_conjugate(&p).unwrap();
        for z in [
            Quaternion::new(1.0, 0.5, -0.2, 0.3),
            Quaternion::new(-0.7, 0.0, 2.0, 1.0),
        ] {
            assert!((q.eval(z).unwrap() - p.eval(z).unwrap()).norm() < 1e-12);
        }
    }
}
