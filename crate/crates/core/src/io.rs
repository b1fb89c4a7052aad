//! JSON forms of elements and alphabets, and a mode-erased element wrapper.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{AlgElement, OpNormBracket, OpNormParams};
use crate::coeff::{format_rational, parse_rational, Coeff, Mode, QC};
use crate::error::{Error, Guard, Result};
use crate::multipliers::Pipeline;
use crate::words::{Alphabet, Order, ReducedWord};

/// `"free"`, `{"cyclic": m}` or `{"orders": [null, 3, ...]}` with `null` for infinite order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphabetJson {
    Name(String),
    Cyclic { cyclic: u32 },
    Orders { orders: Vec<Option<u32>> },
}

impl TryFrom<&AlphabetJson> for Alphabet {
    type Error = Error;
    fn try_from(a: &AlphabetJson) -> Result<Alphabet> {
        match a {
            AlphabetJson::Name(n) if n == "free" => Ok(Alphabet::Free),
            AlphabetJson::Name(n) => Err(Error::Unknown {
                kind: "alphabet",
                name: n.clone(),
            }),
            AlphabetJson::Cyclic { cyclic } => Alphabet::cyclic(*cyclic),
            AlphabetJson::Orders { orders } => Alphabet::explicit(
                orders
                    .iter()
                    .map(|o| o.map_or(Order::Infinite, Order::Finite))
                    .collect(),
            ),
        }
    }
}

impl From<&Alphabet> for AlphabetJson {
    fn from(a: &Alphabet) -> AlphabetJson {
        match a {
            Alphabet::Free => AlphabetJson::Name("free".into()),
            Alphabet::Cyclic(m) => AlphabetJson::Cyclic { cyclic: *m },
            Alphabet::Explicit(orders) => AlphabetJson::Orders {
                orders: orders
                    .iter()
                    .map(|o| match o {
                        Order::Infinite => None,
                        Order::Finite(m) => Some(*m),
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    word: ReducedWord,
    re: Value,
    im: Value,
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<AlphabetJson>,
    terms: Vec<TermJson>,
}

/// An element whose coefficient mode is known only at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyElement {
    Exact(AlgElement<QC>),
    Float(AlgElement<Complex64>),
}

fn exact_part(v: &Value) -> Result<num_rational::BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(Error::Parse(format!("expected a rational, found {v}"))),
    }
}

fn float_part(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("number {n} out of range"))),
        Value::String(s) => match parse_rational(s) {
            Ok(q) => Ok(crate::coeff::q_to_f64(&q)),
            Err(_) => s
                .parse()
                .map_err(|_| Error::Parse(format!("expected a number, found {s:?}"))),
        },
        _ => Err(Error::Parse(format!("expected a number, found {v}"))),
    }
}

fn float_value(f: f64) -> Result<Value> {
    serde_json::Number::from_f64(f)
        .map(Value::Number)
        .ok_or_else(|| Error::Parse(format!("non-finite coefficient {f}")))
}

impl AnyElement {
    pub fn from_json(text: &str) -> Result<AnyElement> {
        let raw: ElementJson = serde_json::from_str(text)?;
        let alphabet = match &raw.alphabet {
            Some(a) => Alphabet::try_from(a)?,
            None => Alphabet::Free,
        };
        let words = raw
            .terms
            .iter()
            .map(|t| {
                let w = alphabet.word(t.word.to_pairs())?;
                if w != t.word {
                    return Err(Error::Parse(format!("word {:?} is not reduced", t.word.to_pairs())));
                }
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(match raw.mode {
            Mode::Exact => {
                let terms = words
                    .into_iter()
                    .zip(&raw.terms)
                    .map(|(w, t)| Ok((w, QC::new(exact_part(&t.re)?, exact_part(&t.im)?))))
                    .collect::<Result<Vec<_>>>()?;
                AnyElement::Exact(AlgElement::from_terms(alphabet, terms)?)
            }
            Mode::Float => {
                let terms = words
                    .into_iter()
                    .zip(&raw.terms)
                    .map(|(w, t)| Ok((w, Complex64::new(float_part(&t.re)?, float_part(&t.im)?))))
                    .collect::<Result<Vec<_>>>()?;
                AnyElement::Float(AlgElement::from_terms(alphabet, terms)?)
            }
        })
    }

    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let (mode, alphabet, terms) = match self {
            AnyElement::Exact(x) => (
                Mode::Exact,
                x.alphabet(),
                x.iter()
                    .map(|(w, c)| TermJson {
                        word: w.clone(),
                        re: Value::String(format_rational(&c.re)),
                        im: Value::String(format_rational(&c.im)),
                    })
                    .collect(),
            ),
            AnyElement::Float(x) => (
                Mode::Float,
                x.alphabet(),
                x.iter()
                    .map(|(w, c)| {
                        Ok(TermJson {
                            word: w.clone(),
                            re: float_value(c.re)?,
                            im: float_value(c.im)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let raw = ElementJson {
            mode,
            alphabet: (*alphabet != Alphabet::Free).then(|| alphabet.into()),
            terms,
        };
        Ok(serde_json::to_string_pretty(&raw)? + "\n")
    }

    pub fn mode(&self) -> Mode {
        match self {
            AnyElement::Exact(_) => Mode::Exact,
            AnyElement::Float(_) => Mode::Float,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            AnyElement::Exact(x) => x.alphabet(),
            AnyElement::Float(x) => x.alphabet(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyElement::Exact(x) => x.len(),
            AnyElement::Float(x) => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_float(&self) -> AlgElement<Complex64> {
        match self {
            AnyElement::Exact(x) => x.to_float(),
            AnyElement::Float(x) => x.clone(),
        }
    }

    /// Applies a pipeline, promoting exact input to float when a stage has irrational output.
    pub fn apply(&self, p: &Pipeline) -> Result<AnyElement> {
        match self {
            AnyElement::Exact(x) => match p.apply(x) {
                Ok(y) => Ok(AnyElement::Exact(y)),
                Err(Error::NotExact(why)) => {
                    log::info!("promoting to float mode: {why}");
                    Ok(AnyElement::Float(p.apply(&x.to_float())?))
                }
                Err(e) => Err(e),
            },
            AnyElement::Float(x) => Ok(AnyElement::Float(p.apply(x)?)),
        }
    }

    pub fn norm_2k(&self, k: usize, guard: &Guard) -> Result<f64> {
        match self {
            AnyElement::Exact(x) => x.norm_2k(k, guard),
            AnyElement::Float(x) => x.norm_2k(k, guard),
        }
    }

    /// Exact moment as a `"p/q"` string in exact mode.
    pub fn moment_text(&self, k: usize, guard: &Guard) -> Result<String> {
        Ok(match self {
            AnyElement::Exact(x) => {
                let m = x.moment_2k(k, guard)?;
                format_rational(&m.re)
            }
            AnyElement::Float(x) => format!("{}", x.moment_2k(k, guard)?.re),
        })
    }

    pub fn opnorm_bracket(&self, params: &OpNormParams, guard: &Guard) -> Result<OpNormBracket> {
        match self {
            AnyElement::Exact(x) => x.opnorm_bracket(params, guard),
            AnyElement::Float(x) => x.opnorm_bracket(params, guard),
        }
    }
}

impl<S: Coeff> From<AlgElement<S>> for AnyElement {
    fn from(x: AlgElement<S>) -> AnyElement {
        // route through the concrete types; the two coefficient types are the only impls
        let any: Box<dyn std::any::Any> = Box::new(x);
        match any.downcast::<AlgElement<QC>>() {
            Ok(e) => AnyElement::Exact(*e),
            Err(any) => AnyElement::Float(
                *any.downcast::<AlgElement<Complex64>>()
                    .expect("coefficient type is QC or Complex64"),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{qc_real, Q};

    #[test]
    fn exact_round_trip() {
        let text = r#"{"mode":"exact","terms":[{"word":[[1,3],[2,-1]],"re":"1/2","im":"0"},{"word":[],"re":2,"im":"-3/7"}]}"#;
        let x = AnyElement::from_json(text).unwrap();
        let AnyElement::Exact(e) = &x else { panic!() };
        assert_eq!(e.trace(), QC::new(qc_real(2).re, Q::new((-3).into(), 7.into())));
        let out = x.to_json().unwrap();
        assert_eq!(AnyElement::from_json(&out).unwrap(), x);
        assert_eq!(AnyElement::from_json(&out).unwrap().to_json().unwrap(), out);
    }

    #[test]
    fn float_and_alphabet() {
        let text = r#"{"mode":"float","alphabet":{"cyclic":3},"terms":[{"word":[[1,2]],"re":0.25,"im":-1.5}]}"#;
        let x = AnyElement::from_json(text).unwrap();
        assert_eq!(x.alphabet(), &Alphabet::Cyclic(3));
        assert_eq!(AnyElement::from_json(&x.to_json().unwrap()).unwrap(), x);
    }

    #[test]
    fn rejects_unreduced_words() {
        let text = r#"{"mode":"exact","terms":[{"word":[[1,1],[1,1]],"re":"1","im":"0"}]}"#;
        assert!(AnyElement::from_json(text).is_err());
        let text = r#"{"mode":"exact","alphabet":{"cyclic":3},"terms":[{"word":[[1,4]],"re":"1","im":"0"}]}"#;
        assert!(AnyElement::from_json(text).is_err());
        assert!(AnyElement::from_json(r#"{"mode":"exact"}"#).is_err());
    }
}
