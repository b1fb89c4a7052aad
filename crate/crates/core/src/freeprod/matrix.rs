//! Small dense matrices over `Q(i)`.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::coeff::{qc_real, Coeff, Q, QC};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    data: Vec<QC>,
}

impl Mat {
    pub fn zero(n: usize) -> Mat {
        Mat {
            n,
            data: vec![QC::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zero(n);
        for p in 0..n {
            m.data[p * n + p] = QC::one();
        }
        m
    }

    /// Matrix unit `e_{pq}`.
    pub fn unit(n: usize, p: usize, q: usize) -> Mat {
        let mut m = Mat::zero(n);
        m.data[p * n + q] = QC::one();
        m
    }

    pub fn from_rows(rows: Vec<Vec<QC>>) -> Result<Mat> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix must be square and nonempty".into()));
        }
        Ok(Mat {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize) -> &QC {
        &self.data[p * self.n + q]
    }

    pub fn set(&mut self, p: usize, q: usize, v: QC) {
        self.data[p * self.n + q] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(n);
        for p in 0..n {
            for r in 0..n {
                let a = self.get(p, r);
                if a.is_zero() {
                    continue;
                }
                for q in 0..n {
                    let b = other.get(r, q);
                    if !b.is_zero() {
                        out.data[p * n + q] += a.mul_ref(b);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        Mat {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        Mat {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &QC) -> Mat {
        Mat {
            n: self.n,
            data: self.data.iter().map(|a| a.mul_ref(c)).collect(),
        }
    }

    pub fn adjoint(&self) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(n);
        for p in 0..n {
            for q in 0..n {
                out.data[q * n + p] = self.get(p, q).conj();
            }
        }
        out
    }

    /// Normalized trace `Tr/n`.
    pub fn trace(&self) -> QC {
        let mut t = QC::zero();
        for p in 0..self.n {
            t += self.get(p, p);
        }
        t / qc_real(self.n as i64)
    }

    pub fn diagonal(&self) -> Mat {
        let mut out = Mat::zero(self.n);
        for p in 0..self.n {
            out.set(p, p, self.get(p, p).clone());
        }
        out
    }

    pub fn is_unitary(&self) -> bool {
        self.mul(&self.adjoint()) == Mat::identity(self.n)
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.data.iter().map(Coeff::to_c64).collect()
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Mat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or_else(|| Error::Precondition("singular matrix".into()))?;
            for q in 0..n {
                a.data.swap(col * n + q, pivot * n + q);
                inv.data.swap(col * n + q, pivot * n + q);
            }
            let s = QC::one() / a.get(col, col).clone();
            for q in 0..n {
                a.data[col * n + q] = a.get(col, q).mul_ref(&s);
                inv.data[col * n + q] = inv.get(col, q).mul_ref(&s);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for q in 0..n {
                    let av = a.get(col, q).mul_ref(&f);
                    let iv = inv.get(col, q).mul_ref(&f);
                    a.data[r * n + q] -= av;
                    inv.data[r * n + q] -= iv;
                }
            }
        }
        Ok(inv)
    }

    /// Cayley transform `(1 − iH)(1 + iH)^{-1}` of a Hermitian `H`: an exact unitary.
    pub fn cayley(h: &Mat) -> Result<Mat> {
        let i = QC::new(Q::zero(), Q::one());
        let ih = h.scale(&i);
        let id = Mat::identity(h.n);
        Ok(id.sub(&ih).mul(&id.add(&ih).inverse()?))
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|p| (0..self.n).map(|q| format!("{}", self.get(p, q))).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_is_unitary() {
        let mut h = Mat::zero(2);
        h.set(0, 0, qc_real(1));
        h.set(0, 1, QC::new(Q::from_integer(2.into()), Q::one()));
        h.set(1, 0, QC::new(Q::from_integer(2.into()), -Q::one()));
        h.set(1, 1, qc_real(-3));
        let u = Mat::cayley(&h).unwrap();
        assert!(u.is_unitary());
        assert_eq!(u.mul(&u.inverse().unwrap()), Mat::identity(2));
    }
}
