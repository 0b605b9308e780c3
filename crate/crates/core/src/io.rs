//! JSON encodings of quaternions, phrases and paths.
//!
//! A quaternion is `{"v":..,"w":..,"x":..,"y":..}` or a literal such as `"1+2J-0.5L"`.
//! A phrase is `{"center": q, "words": [{"factors": [[q, n], ...], "ln": i}]}` where the
//! optional `ln` is the index of the factor followed by `Ln(z - center)`. A path is
//! `{"circle": {"a": q, "r": r, "M": q, "turns": n}}` or `{"polyline": [q, ...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{Circle, Path};
use crate::quat::Quaternion;
use crate::words::{Factor, Phrase, Word};

/// A quaternion read from either the object or the literal form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuatIn(pub Quaternion);

impl<'de> Deserialize<'de> for QuatIn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Obj(Quaternion),
            Lit(String),
        }
        match Either::deserialize(d)? {
            Either::Obj(q) => Ok(QuatIn(q)),
            Either::Lit(s) => s
                .parse::<Quaternion>()
                .map(QuatIn)
                .map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for QuatIn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordJson {
    pub factors: Vec<(QuatIn, i32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ln: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhraseJson {
    pub center: QuatIn,
    pub words: Vec<WordJson>,
}

impl TryFrom<&PhraseJson> for Phrase {
    type Error = Error;

    fn try_from(p: &PhraseJson) -> Result<Phrase> {
        let mut words = Vec::with_capacity(p.words.len());
        for w in &p.words {
            if w.factors.is_empty() {
                return Err(Error::Parse("word without factors".into()));
            }
            let mut factors: Vec<Factor> = w
                .factors
                .iter()
                .map(|&(q, n)| Factor::new(q.0, n))
                .collect();
            if let Some(i) = w.ln {
                let f = factors
                    .get_mut(i)
                    .ok_or_else(|| Error::Parse(format!("ln index {i} out of range")))?;
                f.ln = true;
            }
            words.push(Word::new(factors));
        }
        Ok(Phrase::new(p.center.0, words))
    }
}

impl TryFrom<&Phrase> for PhraseJson {
    type Error = Error;

    fn try_from(p: &Phrase) -> Result<PhraseJson> {
        let mut words = Vec::with_capacity(p.words.len());
        for w in &p.words {
            let lns: Vec<usize> = (0..w.factors.len()).filter(|&i| w.factors[i].ln).collect();
            if lns.len() > 1 {
                return Err(Error::Unsupported(
                    "word with more than one logarithm".into(),
                ));
            }
            words.push(WordJson {
                factors: w.factors.iter().map(|f| (QuatIn(f.coef), f.exp)).collect(),
                ln: lns.first().copied(),
            });
        }
        Ok(PhraseJson {
            center: QuatIn(p.center),
            words,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleJson {
    pub a: QuatIn,
    pub r: f64,
    #[serde(rename = "M")]
    pub m: QuatIn,
    pub turns: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathJson {
    Circle(CircleJson),
    Polyline(Vec<QuatIn>),
}

impl TryFrom<&PathJson> for Path {
    type Error = Error;

    fn try_from(p: &PathJson) -> Result<Path> {
        match p {
            PathJson::Circle(c) => {
                let mut circle = Circle::new(c.a.0, c.r, c.m.0, c.turns)?;
                circle.phase = c.phase;
                Ok(Path::Circle(circle))
            }
            PathJson::Polyline(v) => Path::polyline(v.iter().map(|q| q.0).collect()),
        }
    }
}

impl From<&Path> for PathJson {
    fn from(p: &Path) -> PathJson {
        match p {
            Path::Circle(c) => PathJson::Circle(CircleJson {
                a: QuatIn(c.a),
                r: c.r,
                m: QuatIn(c.m),
                turns: c.turns,
                phase: c.phase,
            }),
            Path::Polyline(v) => PathJson::Polyline(v.iter().map(|&q| QuatIn(q)).collect()),
        }
    }
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_quaternion(s: &str) -> Result<Quaternion> {
    let t = s.trim();
    if t.starts_with('{') || t.starts_with('"') {
        return serde_json::from_str::<QuatIn>(t)
            .map(|q| q.0)
            .map_err(parse_err);
    }
    t.parse()
}

pub fn parse_phrase(s: &str) -> Result<Phrase> {
    let j: PhraseJson = serde_json::from_str(s).map_err(parse_err)?;
    Phrase::try_from(&j)
}

pub fn phrase_to_json(p: &Phrase) -> Result<String> {
    let j = PhraseJson::try_from(p)?;
    serde_json::to_string(&j).map_err(parse_err)
}

pub fn parse_path(s: &str) -> Result<Path> {
    let j: PathJson = serde_json::from_str(s).map_err(parse_err)?;
    Path::try_from(&j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::{I, J, K, L};

    #[test]
    fn quaternion_forms() {
        assert_eq!(
            parse_quaternion(r#"{"v":1,"w":2,"x":3,"y":4}"#).unwrap(),
            Quaternion::new(1.0, 2.0, 3.0, 4.0)
        );
        assert_eq!(parse_quaternion(r#""2J-L""#).unwrap(), J * 2.0 - L);
        assert_eq!(parse_quaternion("K").unwrap(), K);
    }

    #[test]
    fn phrase_round_trip() {
        let s = r#"{"center":"1+J","words":[{"factors":[["J",2],["K",0]]},{"factors":[[{"v":1,"w":0,"x":0,"y":0},-1]],"ln":0}]}"#;
        let p = parse_phrase(s).unwrap();
        assert_eq!(p.center, I + J);
        assert!(p.words[1].factors[0].ln);
        let back = parse_phrase(&phrase_to_json(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn path_forms() {
        let c = parse_path(r#"{"circle":{"a":"0","r":1,"M":"J","turns":2}}"#).unwrap();
        assert!(matches!(c, Path::Circle(ref c) if c.turns == 2.0 && c.m == J));
        let p = parse_path(r#"{"polyline":["0","1+K"]}"#).unwrap();
        assert_eq!(p.end(), I + K);
        assert!(parse_path(r#"{"circle":{"a":"0","r":1,"M":"2J","turns":1}}"#).is_err());
    }
}
