//! Symbols `m: Z^d → C`, forward/backward discrete differences and the
//! Hörmander-Mikhlin norm scanned over a finite box.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{format_rational, parse_rational, q_int, q_to_f64, Coeff, Q, QC};
use crate::error::{Error, Result};

/// A scalar read from JSON: exact when given as an integer, decimal or `"p/q"`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scalar {
    pub exact: Option<QC>,
    pub value: Complex64,
}

impl Scalar {
    pub fn exact(q: QC) -> Scalar {
        Scalar {
            value: q.to_c64(),
            exact: Some(q),
        }
    }

    pub fn float(z: Complex64) -> Scalar {
        Scalar {
            exact: None,
            value: z,
        }
    }

    pub fn from_i64(n: i64) -> Scalar {
        Scalar::exact(QC::new(q_int(n), Q::zero()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartSpec {
    Num(serde_json::Number),
    Text(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
/// JSON scalar: a number, a `"p/q"` string, or `{"re": .., "im": ..}`.
#[serde(untagged)]
pub enum ScalarSpec {
    Parts { re: PartSpec, im: PartSpec },
    Part(PartSpec),
}

fn part_value(p: &PartSpec) -> Result<(Option<Q>, f64)> {
    let text = match p {
        PartSpec::Num(n) => n.to_string(),
        PartSpec::Text(s) => s.clone(),
    };
    match parse_rational(&text) {
        Ok(q) => {
            let f = q_to_f64(&q);
            Ok((Some(q), f))
        }
        Err(e) => match p {
            PartSpec::Num(n) => Ok((None, n.as_f64().ok_or(e)?)),
            PartSpec::Text(_) => Err(e),
        },
    }
}

impl ScalarSpec {
    /// The value as a Gaussian rational; decimals are read exactly.
    pub fn exact_value(&self) -> Result<QC> {
        Scalar::try_from(self.clone())?
            .exact
            .ok_or_else(|| Error::NotExact("scalar is not a rational".into()))
    }
}

impl TryFrom<ScalarSpec> for Scalar {
    type Error = Error;
    fn try_from(spec: ScalarSpec) -> Result<Scalar> {
        let (re, im) = match &spec {
            ScalarSpec::Parts { re, im } => (part_value(re)?, part_value(im)?),
            ScalarSpec::Part(p) => (part_value(p)?, (Some(Q::zero()), 0.0)),
        };
        Ok(match (re.0, im.0) {
            (Some(a), Some(b)) => Scalar::exact(QC::new(a, b)),
            _ => Scalar::float(Complex64::new(re.1, im.1)),
        })
    }
}

fn part_spec(exact: Option<&Q>, f: f64) -> PartSpec {
    match exact {
        Some(q) if q.is_integer() => PartSpec::Num(
            q.to_integer()
                .to_string()
                .parse()
                .unwrap_or_else(|_| serde_json::Number::from(0)),
        ),
        Some(q) => PartSpec::Text(format_rational(q)),
        None => serde_json::Number::from_f64(f)
            .map(PartSpec::Num)
            .unwrap_or(PartSpec::Text(f.to_string())),
    }
}

impl From<&Scalar> for ScalarSpec {
    fn from(s: &Scalar) -> ScalarSpec {
        ScalarSpec::Parts {
            re: part_spec(s.exact.as_ref().map(|q| &q.re), s.value.re),
            im: part_spec(s.exact.as_ref().map(|q| &q.im), s.value.im),
        }
    }
}

/// Signs of dyadic shells: an explicit prefix (then `+1`) or `(−1)^i` throughout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShellSigns {
    List(Vec<i8>),
    Pattern(SignPattern),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignPattern {
    Alternating,
}

impl ShellSigns {
    fn sign(&self, i: usize) -> i64 {
        match self {
            ShellSigns::List(v) => v.get(i).map_or(1, |&s| s as i64),
            ShellSigns::Pattern(SignPattern::Alternating) => {
                if i % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let ShellSigns::List(v) = self {
            if v.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::Precondition("shell signs must be +1 or -1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
enum SymbolSpec {
    Constant {
        d: usize,
        c: ScalarSpec,
    },
    SignCoordinate {
        d: usize,
        j: usize,
    },
    Riesz {
        d: usize,
        j: usize,
    },
    LpRadial {
        d: usize,
        #[serde(default = "no_signs")]
        eps: ShellSigns,
    },
    LpProduct {
        d: usize,
        #[serde(default)]
        eps: Vec<(Vec<u32>, i8)>,
    },
    Table {
        d: usize,
        default: ScalarSpec,
        entries: Vec<(Vec<i64>, ScalarSpec)>,
    },
    Product {
        d: usize,
        factors: Vec<SymbolSpec>,
    },
}

fn no_signs() -> ShellSigns {
    ShellSigns::List(Vec::new())
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Constant(Scalar),
    SignCoordinate(usize),
    Riesz(usize),
    LpRadial(ShellSigns),
    LpProduct(BTreeMap<Vec<u32>, i8>),
    Table {
        default: Scalar,
        entries: BTreeMap<Vec<i64>, Scalar>,
    },
    Product(Vec<SymbolZd>),
    Scaled(Scalar, Box<SymbolZd>),
    Diff {
        base: Box<SymbolZd>,
        alpha: Vec<u32>,
        backward: bool,
    },
}

/// A symbol on `Z^d`, total on the lattice.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(try_from = "SymbolSpec")]
pub struct SymbolZd {
    d: usize,
    kind: Kind,
}

impl TryFrom<SymbolSpec> for SymbolZd {
    type Error = Error;
    fn try_from(spec: SymbolSpec) -> Result<SymbolZd> {
        let sym = match spec {
            SymbolSpec::Constant { d, c } => SymbolZd::constant(d, c.try_into()?)?,
            SymbolSpec::SignCoordinate { d, j } => SymbolZd::sign_coordinate(d, j)?,
            SymbolSpec::Riesz { d, j } => SymbolZd::riesz(d, j)?,
            SymbolSpec::LpRadial { d, eps } => SymbolZd::lp_radial(d, eps)?,
            SymbolSpec::LpProduct { d, eps } => SymbolZd::lp_product(d, eps)?,
            SymbolSpec::Table {
                d,
                default,
                entries,
            } => SymbolZd::table(
                d,
                default.try_into()?,
                entries
                    .into_iter()
                    .map(|(k, v)| Ok((k, v.try_into()?)))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            SymbolSpec::Product { d, factors } => {
                let factors = factors
                    .into_iter()
                    .map(SymbolZd::try_from)
                    .collect::<Result<Vec<_>>>()?;
                SymbolZd::product(d, factors)?
            }
        };
        Ok(sym)
    }
}

impl SymbolZd {
    fn to_spec(&self) -> Result<SymbolSpec> {
        let d = self.d;
        Ok(match &self.kind {
            Kind::Constant(c) => SymbolSpec::Constant { d, c: c.into() },
            Kind::SignCoordinate(j) => SymbolSpec::SignCoordinate { d, j: *j },
            Kind::Riesz(j) => SymbolSpec::Riesz { d, j: *j },
            Kind::LpRadial(eps) => SymbolSpec::LpRadial { d, eps: eps.clone() },
            Kind::LpProduct(eps) => SymbolSpec::LpProduct {
                d,
                eps: eps.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            },
            Kind::Table { default, entries } => SymbolSpec::Table {
                d,
                default: default.into(),
                entries: entries.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
            },
            Kind::Product(f) => SymbolSpec::Product {
                d,
                factors: f.iter().map(|s| s.to_spec()).collect::<Result<_>>()?,
            },
            Kind::Scaled(c, base) => SymbolSpec::Product {
                d,
                factors: vec![SymbolSpec::Constant { d, c: c.into() }, base.to_spec()?],
            },
            Kind::Diff { .. } => {
                return Err(Error::Precondition(
                    "difference symbols have no JSON form".into(),
                ))
            }
        })
    }
}

impl Serialize for SymbolZd {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.to_spec()
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Dimension("symbol dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_coordinate(d: usize, j: usize) -> Result<()> {
    if j == 0 || j > d {
        return Err(Error::Dimension(format!("coordinate {j} outside 1..={d}")));
    }
    Ok(())
}

/// Index `i` of the dyadic shell `2^i − 1 ≤ n < 2^{i+1} − 1`.
pub fn dyadic_shell(n: u64) -> usize {
    (63 - (n + 1).leading_zeros()) as usize
}

fn l1(k: &[i64]) -> u64 {
    k.iter().map(|x| x.unsigned_abs()).sum()
}

impl SymbolZd {
    pub fn constant(d: usize, c: Scalar) -> Result<SymbolZd> {
        check_dim(d)?;
        Ok(SymbolZd {
            d,
            kind: Kind::Constant(c),
        })
    }

    /// `m(k) = sgn(k_j)` with `sgn(0) = 0`.
    pub fn sign_coordinate(d: usize, j: usize) -> Result<SymbolZd> {
        check_dim(d)?;
        check_coordinate(d, j)?;
        Ok(SymbolZd {
            d,
            kind: Kind::SignCoordinate(j),
        })
    }

    /// `m(k) = k_j / ‖k‖` with `m(0) = 0`.
    pub fn riesz(d: usize, j: usize) -> Result<SymbolZd> {
        check_dim(d)?;
        check_coordinate(d, j)?;
        Ok(SymbolZd {
            d,
            kind: Kind::Riesz(j),
        })
    }

    /// `Σ_i ε_i 1{2^i − 1 ≤ |k|_1 < 2^{i+1} − 1}`.
    pub fn lp_radial(d: usize, eps: ShellSigns) -> Result<SymbolZd> {
        check_dim(d)?;
        eps.validate()?;
        Ok(SymbolZd {
            d,
            kind: Kind::LpRadial(eps),
        })
    }

    /// Signs on products of coordinate dyadic intervals, `+1` where unspecified.
    pub fn lp_product(d: usize, eps: Vec<(Vec<u32>, i8)>) -> Result<SymbolZd> {
        check_dim(d)?;
        let mut map = BTreeMap::new();
        for (idx, s) in eps {
            if idx.len() != d {
                return Err(Error::Dimension(format!(
                    "lp_product index {idx:?} has length {} instead of {d}",
                    idx.len()
                )));
            }
            if s != 1 && s != -1 {
                return Err(Error::Precondition("shell signs must be +1 or -1".into()));
            }
            map.insert(idx, s);
        }
        Ok(SymbolZd {
            d,
            kind: Kind::LpProduct(map),
        })
    }

    pub fn table(d: usize, default: Scalar, entries: Vec<(Vec<i64>, Scalar)>) -> Result<SymbolZd> {
        check_dim(d)?;
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if k.len() != d {
                return Err(Error::Dimension(format!(
                    "table key {k:?} has length {} instead of {d}",
                    k.len()
                )));
            }
            map.insert(k, v);
        }
        Ok(SymbolZd {
            d,
            kind: Kind::Table {
                default,
                entries: map,
            },
        })
    }

    /// Pointwise product of symbols of the same dimension.
    pub fn product(d: usize, factors: Vec<SymbolZd>) -> Result<SymbolZd> {
        check_dim(d)?;
        if let Some(f) = factors.iter().find(|f| f.d != d) {
            return Err(Error::Dimension(format!(
                "factor of dimension {} in a product of dimension {d}",
                f.d
            )));
        }
        Ok(SymbolZd {
            d,
            kind: Kind::Product(factors),
        })
    }

    pub fn scaled(&self, c: Scalar) -> SymbolZd {
        SymbolZd {
            d: self.d,
            kind: Kind::Scaled(c, Box::new(self.clone())),
        }
    }

    /// `∂^α m`, forward differences `m(k + e_j) − m(k)` unless `backward`.
    pub fn discrete_diff(&self, alpha: &[u32], backward: bool) -> Result<SymbolZd> {
        if alpha.len() != self.d {
            return Err(Error::Dimension(format!(
                "multi-index of length {} for a symbol on Z^{}",
                alpha.len(),
                self.d
            )));
        }
        Ok(SymbolZd {
            d: self.d,
            kind: Kind::Diff {
                base: Box::new(self.clone()),
                alpha: alpha.to_vec(),
                backward,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eval(&self, k: &[i64]) -> Complex64 {
        debug_assert_eq!(k.len(), self.d);
        match &self.kind {
            Kind::Constant(c) => c.value,
            Kind::SignCoordinate(j) => Complex64::new(k[j - 1].signum() as f64, 0.0),
            Kind::Riesz(j) => {
                let n2: f64 = k.iter().map(|&x| (x as f64) * (x as f64)).sum();
                if n2 == 0.0 {
                    Complex64::zero()
                } else {
                    Complex64::new(k[j - 1] as f64 / n2.sqrt(), 0.0)
                }
            }
            Kind::LpRadial(eps) => Complex64::new(eps.sign(dyadic_shell(l1(k))) as f64, 0.0),
            Kind::LpProduct(eps) => Complex64::new(lp_product_sign(eps, k) as f64, 0.0),
            Kind::Table { default, entries } => entries.get(k).unwrap_or(default).value,
            Kind::Product(fs) => fs.iter().fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.eval(k)),
            Kind::Scaled(c, base) => c.value * base.eval(k),
            Kind::Diff {
                base,
                alpha,
                backward,
            } => {
                let mut acc = Complex64::zero();
                for_each_shift(alpha, *backward, k, |shift, coeff| {
                    acc += base.eval(shift) * coeff as f64;
                });
                acc
            }
        }
    }

    /// Exact value, or `None` when the symbol is irrational at `k`.
    pub fn eval_exact(&self, k: &[i64]) -> Option<QC> {
        let int = |n: i64| QC::new(q_int(n), Q::zero());
        match &self.kind {
            Kind::Constant(c) => c.exact.clone(),
            Kind::SignCoordinate(j) => Some(int(k[j - 1].signum())),
            Kind::Riesz(j) => {
                let n2: BigInt = k.iter().map(|&x| BigInt::from(x) * x).sum();
                if n2.is_zero() {
                    return Some(int(0));
                }
                let r = n2.sqrt();
                (&r * &r == n2).then(|| QC::new(Q::new(k[j - 1].into(), r), Q::zero()))
            }
            Kind::LpRadial(eps) => Some(int(eps.sign(dyadic_shell(l1(k))))),
            Kind::LpProduct(eps) => Some(int(lp_product_sign(eps, k))),
            Kind::Table { default, entries } => entries.get(k).unwrap_or(default).exact.clone(),
            Kind::Product(fs) => fs
                .iter()
                .try_fold(int(1), |acc, f| Some(acc * f.eval_exact(k)?)),
            Kind::Scaled(c, base) => Some(c.exact.clone()? * base.eval_exact(k)?),
            Kind::Diff {
                base,
                alpha,
                backward,
            } => {
                let mut acc = Some(int(0));
                for_each_shift(alpha, *backward, k, |shift, coeff| {
                    acc = match (acc.take(), base.eval_exact(shift)) {
                        (Some(a), Some(v)) => Some(a + v * int(coeff)),
                        _ => None,
                    };
                });
                acc
            }
        }
    }

    /// Value as a coefficient of type `S`; exact mode fails on irrational values.
    pub fn eval_coeff<S: Coeff>(&self, k: &[i64]) -> Result<S> {
        match self.eval_exact(k) {
            Some(q) => Ok(S::from_exact(&q)),
            None => S::try_from_c64(self.eval(k)).ok_or_else(|| {
                Error::NotExact(format!("symbol value at {k:?} is not a Gaussian rational"))
            }),
        }
    }

    /// Sup-HM norm on the box `[−B, B]^d`.
    pub fn hm_norm(&self, box_radius: u64, opts: &HmOptions) -> Result<HmNorm> {
        hm_norm(self, box_radius, opts)
    }
}

fn lp_product_sign(eps: &BTreeMap<Vec<u32>, i8>, k: &[i64]) -> i64 {
    let idx: Vec<u32> = k
        .iter()
        .map(|x| dyadic_shell(x.unsigned_abs()) as u32)
        .collect();
    eps.get(&idx).map_or(1, |&s| s as i64)
}

/// Calls `f(k + β, (−1)^{|α−β|} Π C(α_j, β_j))` for all `β ≤ α`, or `f(k − β, (−1)^{|β|} …)` backward.
fn for_each_shift(alpha: &[u32], backward: bool, k: &[i64], mut f: impl FnMut(&[i64], i64)) {
    let d = alpha.len();
    let mut beta = vec![0u32; d];
    let mut shift = k.to_vec();
    loop {
        let mut coeff: i64 = 1;
        for j in 0..d {
            coeff *= binomial(alpha[j], beta[j]);
            let parity = if backward { beta[j] } else { alpha[j] - beta[j] };
            if parity % 2 == 1 {
                coeff = -coeff;
            }
            let step = beta[j] as i64;
            shift[j] = if backward { k[j] - step } else { k[j] + step };
        }
        f(&shift, coeff);
        // odometer over β
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            if beta[j] < alpha[j] {
                beta[j] += 1;
                break;
            }
            beta[j] = 0;
            j += 1;
        }
    }
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulus {
    #[default]
    Euclidean,
    L1,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HmOptions {
    pub modulus: Modulus,
    pub backward: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HmNorm {
    pub value: f64,
    pub alpha: Vec<u32>,
    pub k: Vec<i64>,
    /// The sup over `B/2 < |k|_∞ ≤ B` strictly exceeds the sup over `|k|_∞ ≤ B/2`.
    pub boundary_flag: bool,
    pub box_radius: u64,
}

/// All multi-indices with `|α| ≤ max_order`.
pub fn multi_indices(d: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(j: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j == cur.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[j] = a;
            rec(j + 1, left - a, cur, out);
        }
        cur[j] = 0;
    }
    rec(0, max_order, &mut cur, &mut out);
    out
}

#[derive(Clone, Debug)]
struct Candidate {
    value: f64,
    alpha: Vec<u32>,
    k: Vec<i64>,
}

impl Candidate {
    fn order(&self) -> u32 {
        self.alpha.iter().sum()
    }

    /// Larger value wins; ties prefer higher `|α|`, then smaller `α`, then smaller `k`.
    fn better_than(&self, other: &Candidate) -> bool {
        if self.value != other.value {
            return self.value > other.value;
        }
        if self.order() != other.order() {
            return self.order() > other.order();
        }
        (&self.alpha, &self.k) < (&other.alpha, &other.k)
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.better_than(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn hm_norm(m: &SymbolZd, box_radius: u64, opts: &HmOptions) -> Result<HmNorm> {
    if box_radius == 0 {
        return Err(Error::Precondition("hm box radius must be at least 1".into()));
    }
    let d = m.d;
    let b = box_radius as i64;
    let side = (2 * box_radius + 1) as u128;
    let total = side.checked_pow(d as u32).filter(|&t| t <= 1 << 40).ok_or_else(|| {
        Error::Resource {
            predicted: usize::MAX,
            limit: 1 << 40,
        }
    })? as u64;
    let diffs: Vec<(Vec<u32>, SymbolZd)> = multi_indices(d, (d / 2 + 1) as u32)
        .into_iter()
        .map(|a| {
            let s = m.discrete_diff(&a, opts.backward)?;
            Ok((a, s))
        })
        .collect::<Result<_>>()?;
    let half = b / 2;

    let scan = |range: std::ops::Range<u64>| {
        let mut inner: Option<Candidate> = None;
        let mut outer: Option<Candidate> = None;
        let mut k = vec![0i64; d];
        for idx in range {
            let mut rest = idx;
            for slot in k.iter_mut() {
                *slot = (rest % side as u64) as i64 - b;
                rest /= side as u64;
            }
            let modulus = match opts.modulus {
                Modulus::Euclidean => k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt(),
                Modulus::L1 => l1(&k) as f64,
            };
            let is_inner = k.iter().all(|x| x.abs() <= half);
            for (a, s) in &diffs {
                let order: u32 = a.iter().sum();
                let v = modulus.powi(order as i32) * s.eval(&k).norm();
                let c = Candidate {
                    value: v,
                    alpha: a.clone(),
                    k: k.clone(),
                };
                let slot = if is_inner { &mut inner } else { &mut outer };
                if slot.as_ref().is_none_or(|cur| c.better_than(cur)) {
                    *slot = Some(c);
                }
            }
        }
        (inner, outer)
    };

    const CHUNK: u64 = 4096;
    let chunks: Vec<std::ops::Range<u64>> = (0..total.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(total))
        .collect();
    let (inner, outer) = chunks
        .into_par_iter()
        .map(scan)
        .reduce(|| (None, None), |a, b| (pick(a.0, b.0), pick(a.1, b.1)));
    let boundary_flag = match (&inner, &outer) {
        (Some(i), Some(o)) => o.value > i.value,
        (None, Some(o)) => o.value > 0.0,
        _ => false,
    };
    let best = pick(inner, outer).expect("box is nonempty");
    Ok(HmNorm {
        value: best.value,
        alpha: best.alpha,
        k: best.k,
        boundary_flag,
        box_radius,
    })
}
