//! Matrix algebras `A_i ⊇ B` with their conditional expectations and
//! centered bases adapted to the minimal projections of a commutative `B`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::Mat;
use crate::coeff::{qc, qc_real, Q, QC};
use crate::error::{Error, Result};

/// The amalgamated subalgebra `B ⊆ M_n`, common to all `A_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseKind {
    /// `B = C·1`.
    #[serde(rename = "C", alias = "scalar")]
    Scalar,
    /// `B = diag(M_k)`.
    #[serde(rename = "diag")]
    Diag,
}

/// Basis element of `Å_i` with its `B`-colors: `e_l u e_r = u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Centered {
    pub mat: Mat,
    pub left: usize,
    pub right: usize,
}

/// Product of two basis letters: `E`-part over the color projections plus centered part.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LetterProduct {
    pub base: Vec<(usize, QC)>,
    pub centered: Vec<(usize, QC)>,
}

/// One algebra `A_i = M_n` with its centered basis and structure constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Algebra {
    n: usize,
    basis: Vec<Centered>,
    products: Vec<Vec<LetterProduct>>,
    adjoints: Vec<Vec<(usize, QC)>>,
}

impl Algebra {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[Centered] {
        &self.basis
    }

    pub fn product(&self, a: usize, b: usize) -> &LetterProduct {
        &self.products[a][b]
    }

    pub fn adjoint(&self, a: usize) -> &[(usize, QC)] {
        &self.adjoints[a]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AlgebraSpec {
    Matrix { n: usize },
}

/// `{"B":"diag","k":2,"algebras":[{"type":"matrix","n":2},...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextSpec {
    #[serde(rename = "B")]
    pub base: BaseKind,
    #[serde(default = "one_usize")]
    pub k: usize,
    pub algebras: Vec<AlgebraSpec>,
}

fn one_usize() -> usize {
    1
}

pub const MAX_ALGEBRAS: usize = 8;
pub const MAX_MATRIX_SIZE: usize = 3;

/// An amalgamated free product `*_B A_i` of finitely many matrix algebras.
///
/// `groups` lets consecutive letters from algebras of the same group count as one
/// letter of a coarser free product; the swap construction uses this.
#[derive(Clone, Debug, PartialEq)]
pub struct FPContext {
    base: BaseKind,
    k: usize,
    algebras: Vec<Algebra>,
    groups: Vec<usize>,
}

impl FPContext {
    pub fn new(base: BaseKind, k: usize, sizes: &[usize]) -> Result<FPContext> {
        if sizes.is_empty() || sizes.len() > MAX_ALGEBRAS {
            return Err(Error::Precondition(format!(
                "need between 1 and {MAX_ALGEBRAS} algebras, got {}",
                sizes.len()
            )));
        }
        let colors = match base {
            BaseKind::Scalar => 1,
            BaseKind::Diag => k,
        };
        let mut algebras = Vec::new();
        for &n in sizes {
            if n == 0 || n > MAX_MATRIX_SIZE {
                return Err(Error::Precondition(format!(
                    "matrix size {n} outside 1..={MAX_MATRIX_SIZE}"
                )));
            }
            if base == BaseKind::Diag && n != k {
                return Err(Error::Precondition(format!(
                    "B = diag(M_{k}) needs A_i = M_{k}, got M_{n}"
                )));
            }
            algebras.push(build_algebra(base, n, colors)?);
        }
        let groups = (0..sizes.len()).collect();
        let ctx = FPContext {
            base,
            k,
            algebras,
            groups,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn from_spec(spec: &ContextSpec) -> Result<FPContext> {
        let sizes: Vec<usize> = spec
            .algebras
            .iter()
            .map(|a| match a {
                AlgebraSpec::Matrix { n } => *n,
            })
            .collect();
        FPContext::new(spec.base, spec.k, &sizes)
    }

    pub fn from_json(text: &str) -> Result<FPContext> {
        FPContext::from_spec(&serde_json::from_str(text)?)
    }

    pub fn to_spec(&self) -> ContextSpec {
        ContextSpec {
            base: self.base,
            k: self.k,
            algebras: self
                .algebras
                .iter()
                .map(|a| AlgebraSpec::Matrix { n: a.n })
                .collect(),
        }
    }

    /// Two copies of every algebra, `A_i^{(1)}` at `2i` and `A_i^{(2)}` at `2i+1`,
    /// grouped so that `A_i^{(1)} *_B A_i^{(2)}` is the `i`-th letter algebra.
    pub fn swap_context(&self) -> Result<FPContext> {
        if self.algebras.len() * 2 > MAX_ALGEBRAS {
            return Err(Error::Resource {
                predicted: self.algebras.len() * 2,
                limit: MAX_ALGEBRAS,
            });
        }
        let mut out = self.clone();
        out.algebras = self
            .algebras
            .iter()
            .flat_map(|a| [a.clone(), a.clone()])
            .collect();
        out.groups = self.groups.iter().flat_map(|&g| [g, g]).collect();
        Ok(out)
    }

    pub fn base(&self) -> BaseKind {
        self.base
    }

    /// Number of minimal projections of `B`.
    pub fn colors(&self) -> usize {
        match self.base {
            BaseKind::Scalar => 1,
            BaseKind::Diag => self.k,
        }
    }

    /// `τ_B(e_c)`.
    pub fn color_trace(&self, _c: usize) -> QC {
        match self.base {
            BaseKind::Scalar => QC::one(),
            BaseKind::Diag => QC::one() / qc_real(self.k as i64),
        }
    }

    pub fn num_algebras(&self) -> usize {
        self.algebras.len()
    }

    pub fn algebra(&self, i: usize) -> &Algebra {
        &self.algebras[i]
    }

    pub fn group(&self, i: usize) -> usize {
        self.groups[i]
    }

    pub fn num_groups(&self) -> usize {
        self.groups.iter().max().map_or(0, |g| g + 1)
    }

    pub fn is_grouped(&self) -> bool {
        self.groups.iter().enumerate().any(|(i, &g)| i != g)
    }

    /// Partner copy in a swap context.
    pub fn partner(&self, i: usize) -> Option<usize> {
        let j = i ^ 1;
        (j < self.groups.len() && self.groups[j] == self.groups[i] && j != i).then_some(j)
    }

    /// `E_i(m)` as a matrix.
    pub fn expect_mat(&self, m: &Mat) -> Mat {
        match self.base {
            BaseKind::Scalar => Mat::identity(m.dim()).scale(&m.trace()),
            BaseKind::Diag => m.diagonal(),
        }
    }

    /// Minimal projection `e_c` inside `A_i`.
    pub fn color_mat(&self, i: usize, c: usize) -> Mat {
        let n = self.algebras[i].n;
        match self.base {
            BaseKind::Scalar => Mat::identity(n),
            BaseKind::Diag => Mat::unit(n, c, c),
        }
    }

    /// Coordinates of `b ∈ B` over the color projections.
    pub fn base_coords(&self, b: &Mat) -> Vec<(usize, QC)> {
        let coords: Vec<(usize, QC)> = match self.base {
            BaseKind::Scalar => vec![(0, b.get(0, 0).clone())],
            BaseKind::Diag => (0..self.k).map(|c| (c, b.get(c, c).clone())).collect(),
        };
        coords.into_iter().filter(|(_, v)| !v.is_zero()).collect()
    }

    /// Coordinates of a centered `m ∈ Å_i` over the centered basis.
    pub fn centered_coords(&self, i: usize, m: &Mat) -> Result<Vec<(usize, QC)>> {
        if !self.expect_mat(m).is_zero() {
            return Err(Error::Precondition(format!(
                "matrix {m:?} is not centered in algebra {}",
                i + 1
            )));
        }
        let alg = &self.algebras[i];
        let mut out = Vec::new();
        for (idx, u) in alg.basis.iter().enumerate() {
            let v = centered_coeff(&u.mat, m);
            if !v.is_zero() {
                out.push((idx, v));
            }
        }
        Ok(out)
    }

    /// Checks `τ∘E_i = τ_i`, `E_i² = E_i` and `B`-bimodularity on matrix units.
    fn validate(&self) -> Result<()> {
        for (i, alg) in self.algebras.iter().enumerate() {
            let n = alg.n;
            for p in 0..n {
                for q in 0..n {
                    let a = Mat::unit(n, p, q);
                    let e = self.expect_mat(&a);
                    if e.trace() != a.trace() {
                        return Err(Error::Contract(format!(
                            "trace not preserved by E_{} on e_{p}{q}",
                            i + 1
                        )));
                    }
                    if self.expect_mat(&e) != e {
                        return Err(Error::Contract(format!("E_{} not idempotent", i + 1)));
                    }
                    for c in 0..self.colors() {
                        for c2 in 0..self.colors() {
                            let (b, b2) = (self.color_mat(i, c), self.color_mat(i, c2));
                            let lhs = self.expect_mat(&b.mul(&a).mul(&b2));
                            if lhs != b.mul(&e).mul(&b2) {
                                return Err(Error::Contract(format!(
                                    "E_{} not B-bimodular at (e_{c}, e_{p}{q}, e_{c2})",
                                    i + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Coefficient of `u` in `m`, read off the entry that defines `u`.
fn centered_coeff(u: &Mat, m: &Mat) -> QC {
    let n = u.dim();
    // off-diagonal units are read at their entry; diagonal ones e_pp − e_{n-1,n-1} at (p,p)
    for p in 0..n {
        for q in 0..n {
            if !u.get(p, q).is_zero() && (p != q || p + 1 < n) {
                return m.get(p, q).clone();
            }
        }
    }
    QC::zero()
}

fn build_algebra(base: BaseKind, n: usize, colors: usize) -> Result<Algebra> {
    let mut basis = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p != q {
                let (left, right) = match base {
                    BaseKind::Scalar => (0, 0),
                    BaseKind::Diag => (p, q),
                };
                basis.push(Centered {
                    mat: Mat::unit(n, p, q),
                    left,
                    right,
                });
            }
        }
    }
    if base == BaseKind::Scalar {
        for p in 0..n.saturating_sub(1) {
            basis.push(Centered {
                mat: Mat::unit(n, p, p).sub(&Mat::unit(n, n - 1, n - 1)),
                left: 0,
                right: 0,
            });
        }
    }
    let expect = |m: &Mat| match base {
        BaseKind::Scalar => Mat::identity(n).scale(&m.trace()),
        BaseKind::Diag => m.diagonal(),
    };
    let base_coords = |b: &Mat| -> Vec<(usize, QC)> {
        let v: Vec<(usize, QC)> = match base {
            BaseKind::Scalar => vec![(0, b.get(0, 0).clone())],
            BaseKind::Diag => (0..colors).map(|c| (c, b.get(c, c).clone())).collect(),
        };
        v.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    };
    let coords = |m: &Mat| -> Vec<(usize, QC)> {
        basis
            .iter()
            .enumerate()
            .map(|(idx, u)| (idx, centered_coeff(&u.mat, m)))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    };
    let mut products = Vec::new();
    for a in &basis {
        let mut row = Vec::new();
        for b in &basis {
            let ab = a.mat.mul(&b.mat);
            let e = expect(&ab);
            row.push(LetterProduct {
                base: base_coords(&e),
                centered: coords(&ab.sub(&e)),
            });
        }
        products.push(row);
    }
    let adjoints = basis.iter().map(|u| coords(&u.mat.adjoint())).collect();
    let alg = Algebra {
        n,
        basis,
        products,
        adjoints,
    };
    // the expansions must reproduce the matrices they came from
    for (a, row) in alg.products.iter().enumerate() {
        for (b, prod) in row.iter().enumerate() {
            let mut m = Mat::zero(n);
            for (c, v) in &prod.base {
                let e = match base {
                    BaseKind::Scalar => Mat::identity(n),
                    BaseKind::Diag => Mat::unit(n, *c, *c),
                };
                m = m.add(&e.scale(v));
            }
            for (g, v) in &prod.centered {
                m = m.add(&alg.basis[*g].mat.scale(v));
            }
            if m != alg.basis[a].mat.mul(&alg.basis[b].mat) {
                return Err(Error::Contract("centered basis does not span".into()));
            }
        }
    }
    Ok(alg)
}

/// Random Hermitian matrix with small Gaussian-integer entries.
pub fn random_hermitian<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let mut h = Mat::zero(n);
    let small = |rng: &mut R| Q::from_integer(rng.random_range(-2i64..=2).into());
    for p in 0..n {
        h.set(p, p, qc(small(rng), Q::zero()));
        for q in p + 1..n {
            let v = qc(small(rng), small(rng));
            h.set(q, p, v.conj());
            h.set(p, q, v);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bases_and_json() {
        let ctx = FPContext::from_json(r#"{"B":"diag","k":2,"algebras":[{"type":"matrix","n":2},{"type":"matrix","n":2}]}"#)
            .unwrap();
        assert_eq!(ctx.colors(), 2);
        assert_eq!(ctx.algebra(0).basis().len(), 2);
        let ctx = FPContext::from_json(r#"{"B":"C","algebras":[{"type":"matrix","n":3}]}"#).unwrap();
        assert_eq!(ctx.algebra(0).basis().len(), 8);
        assert!(FPContext::from_json(r#"{"B":"diag","k":2,"algebras":[{"type":"matrix","n":3}]}"#).is_err());
        let s = ctx.swap_context().unwrap();
        assert_eq!((s.num_algebras(), s.num_groups(), s.partner(1)), (2, 1, Some(0)));
    }
}
