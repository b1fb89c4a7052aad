//! Coefficient fields: exact Gaussian rationals and double-precision complex numbers.

use std::fmt::Debug;
use std::ops::{AddAssign, Neg};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational.
pub type Q = BigRational;
/// Exact complex rational (Gaussian rational).
pub type QC = Complex<BigRational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Scalar type of a sparse element.
///
/// Every element has a uniform coefficient type; `Exact` arithmetic is closed
/// under the ring operations and conjugation, `Float` results are approximate.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
{
    const MODE: Mode;

    fn conj(&self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn to_c64(&self) -> Complex64;
    fn from_exact(q: &QC) -> Self;
    /// `None` when the value cannot be represented exactly.
    fn try_from_c64(z: Complex64) -> Option<Self>;
    /// Draws one coefficient for random test inputs.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_exact(&QC::new(Q::from_integer(n.into()), Q::zero()))
    }

    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out += &-other.clone();
        out
    }

    fn from_phase(phase: &Phase) -> Result<Self> {
        match phase.exact_value() {
            Some(q) => Ok(Self::from_exact(&q)),
            None => Self::try_from_c64(phase.to_c64()).ok_or_else(|| {
                Error::NotExact(format!("phase {phase} is not a Gaussian rational"))
            }),
        }
    }
}

impl Coeff for QC {
    const MODE: Mode = Mode::Exact;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }

    fn from_exact(q: &QC) -> Self {
        q.clone()
    }

    fn try_from_c64(_z: Complex64) -> Option<Self> {
        None
    }

    /// Gaussian-rational grid `{-4..4}^2 / 4`, never zero.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let re: i64 = rng.random_range(-4..=4);
            let im: i64 = rng.random_range(-4..=4);
            if re != 0 || im != 0 {
                return QC::new(
                    Q::new(re.into(), 4.into()),
                    Q::new(im.into(), 4.into()),
                );
            }
        }
    }
}

impl Coeff for Complex64 {
    const MODE: Mode = Mode::Float;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn from_exact(q: &QC) -> Self {
        Complex64::new(q_to_f64(&q.re), q_to_f64(&q.im))
    }

    fn try_from_c64(z: Complex64) -> Option<Self> {
        Some(z)
    }

    /// Standard complex Gaussian, `E|z|^2 = 1`.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qc_real(n: i64) -> QC {
    QC::new(q_int(n), Q::zero())
}

pub fn qc(re: Q, im: Q) -> QC {
    QC::new(re, im)
}

/// `|z|^2` as an exact rational.
pub fn qc_norm_sqr(z: &QC) -> Q {
    &z.re * &z.re + &z.im * &z.im
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let q = Q::new(num, den);
        return Ok(if neg { -q } else { q });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(p))
}

pub fn format_rational(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A unimodular scalar: an exact root of unity `exp(2πi k/n)` or a float point on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phase {
    Root { k: i64, n: u64 },
    Unit(Complex64),
}

impl Phase {
    pub const ONE: Phase = Phase::Root { k: 0, n: 1 };

    pub fn root(k: i64, n: u64) -> Result<Phase> {
        if n == 0 {
            return Err(Error::Precondition("root of unity with order 0".into()));
        }
        Ok(Phase::Root { k, n }.reduced())
    }

    /// Accepts any complex number with `|z| = 1` up to `1e-12`.
    pub fn unit(z: Complex64) -> Result<Phase> {
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("phase {z} is not unimodular")));
        }
        Ok(Phase::Unit(z))
    }

    fn reduced(self) -> Phase {
        match self {
            Phase::Root { k, n } => {
                let n_i = n as i64;
                let k = k.rem_euclid(n_i);
                let g = k.gcd(&n_i).max(1);
                Phase::Root {
                    k: k / g,
                    n: (n_i / g) as u64,
                }
            }
            p => p,
        }
    }

    pub fn pow(&self, e: i64) -> Phase {
        match *self {
            Phase::Root { k, n } => {
                let n_i = n as i128;
                let k = ((k as i128 * e as i128).rem_euclid(n_i)) as i64;
                Phase::Root { k, n }.reduced()
            }
            Phase::Unit(z) => Phase::Unit(z.powi(e as i32)),
        }
    }

    pub fn mul(&self, other: &Phase) -> Phase {
        match (*self, *other) {
            (Phase::Root { k: a, n: m }, Phase::Root { k: b, n }) => {
                let l = m.lcm(&n);
                let k = a as i128 * (l / m) as i128 + b as i128 * (l / n) as i128;
                Phase::Root {
                    k: k.rem_euclid(l as i128) as i64,
                    n: l,
                }
                .reduced()
            }
            (a, b) => Phase::Unit(a.to_c64() * b.to_c64()),
        }
    }

    pub fn conj(&self) -> Phase {
        self.pow(-1)
    }

    pub fn is_one(&self) -> bool {
        match *self {
            Phase::Root { k, .. } => k == 0,
            Phase::Unit(z) => z == Complex64::new(1.0, 0.0),
        }
    }

    /// Exact value for roots of unity of order dividing 4.
    pub fn exact_value(&self) -> Option<QC> {
        match *self {
            Phase::Root { k, n } if 4 % n == 0 => {
                let quarter = k * (4 / n as i64);
                Some(match quarter.rem_euclid(4) {
                    0 => qc_real(1),
                    1 => QC::new(Q::zero(), Q::one()),
                    2 => qc_real(-1),
                    _ => QC::new(Q::zero(), -Q::one()),
                })
            }
            _ => None,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        if let Some(q) = self.exact_value() {
            return Complex64::from_exact(&q);
        }
        match *self {
            Phase::Root { k, n } => {
                Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
            }
            Phase::Unit(z) => z,
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Root { k, n } => write!(f, "exp(2πi·{k}/{n})"),
            Phase::Unit(z) => write!(f, "{z}"),
        }
    }
}
