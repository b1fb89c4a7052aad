//! Column and row module norms and the length reduction `x = x_0 + x_1 + z`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::context::FPContext;
use super::element::{FPElement, FPWord, Letter};
use super::maps::{t_letter, LetterMaps};
use super::matrix::Mat;
use crate::coeff::{Coeff, QC};
use crate::error::{Error, Guard, Result};

/// `z = Σ_α a_α ⊗ b_α` with `a_α ∈ Å_{i_α}` and `b_α ∈ W̊`, `L_{i_α}(b_α) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleDecomposition {
    ctx: Arc<FPContext>,
    terms: Vec<(FPElement, FPElement)>,
}

fn single_group(x: &FPElement) -> Option<usize> {
    let ctx = x.context();
    let mut g = None;
    for (w, _) in x.iter() {
        let l = w.letters();
        if l.len() != 1 {
            return None;
        }
        let h = ctx.group(l[0].alg);
        if g.is_some_and(|g| g != h) {
            return None;
        }
        g = Some(h);
    }
    g
}

impl ModuleDecomposition {
    pub fn new(ctx: &Arc<FPContext>, terms: Vec<(FPElement, FPElement)>) -> Result<ModuleDecomposition> {
        for (a, b) in &terms {
            let Some(i) = single_group(a) else {
                return Err(Error::Precondition("each a must be a centered letter of one algebra".into()));
            };
            if !b.expect().is_empty() || !b.project_first(i).is_empty() {
                return Err(Error::Precondition(format!(
                    "b must be centered and satisfy L_{}(b) = 0",
                    i + 1
                )));
            }
        }
        Ok(ModuleDecomposition {
            ctx: ctx.clone(),
            terms,
        })
    }

    /// Splits off the first letter of every word of `P_{≥2}(x)`.
    pub fn decompose(x: &FPElement) -> ModuleDecomposition {
        let ctx = x.context();
        let mut by_letter: BTreeMap<Letter, FPElement> = BTreeMap::new();
        for (w, c) in x.project_geq(2).iter() {
            let l = w.letters();
            let b = by_letter.entry(l[0]).or_insert_with(|| FPElement::zero(ctx));
            b.add_term(FPWord::Letters(l[1..].to_vec()), c.clone());
        }
        let terms = by_letter
            .into_iter()
            .filter(|(_, b)| !b.is_empty())
            .map(|(u, b)| {
                (
                    FPElement::basis(ctx, FPWord::Letters(vec![u])).expect("letter of a valid word"),
                    b,
                )
            })
            .collect();
        ModuleDecomposition {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn terms(&self) -> &[(FPElement, FPElement)] {
        &self.terms
    }

    /// `Σ_α a_α b_α`.
    pub fn compose(&self) -> FPElement {
        self.terms
            .iter()
            .fold(FPElement::zero(&self.ctx), |acc, (a, b)| acc.add(&a.mul(b)))
    }

    /// `Σ_α T(a_α) ⊗ b_α`.
    pub fn map_letters(&self, t: &LetterMaps) -> Result<ModuleDecomposition> {
        let terms = self
            .terms
            .iter()
            .map(|(a, b)| Ok((t_letter(1, t, a)?, b.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleDecomposition {
            ctx: self.ctx.clone(),
            terms,
        })
    }

    /// `Σ_{α,β} b_α* E(a_α* a_β) b_β`.
    pub fn column_square(&self, guard: &Guard) -> Result<FPElement> {
        let mut y = FPElement::zero(&self.ctx);
        for (a, b) in &self.terms {
            let left = b.adjoint();
            for (a2, b2) in &self.terms {
                let e = a.adjoint().mul_guarded(a2, guard)?.expect();
                if e.is_empty() {
                    continue;
                }
                y = y.add(&left.mul_guarded(&e, guard)?.mul_guarded(b2, guard)?);
            }
        }
        Ok(y)
    }

    /// `Σ_{α,β} a_α E(b_α b_β*) a_β*`.
    pub fn row_square(&self, guard: &Guard) -> Result<FPElement> {
        let mut y = FPElement::zero(&self.ctx);
        for (a, b) in &self.terms {
            for (a2, b2) in &self.terms {
                let e = b.mul_guarded(&b2.adjoint(), guard)?.expect();
                if e.is_empty() {
                    continue;
                }
                y = y.add(&a.mul_guarded(&e, guard)?.mul_guarded(&a2.adjoint(), guard)?);
            }
        }
        Ok(y)
    }
}

fn root_of_moment(m: QC, k: usize) -> f64 {
    m.to_c64().re.max(0.0).powf(1.0 / (2 * k) as f64)
}

/// `τ[(Σ b_α* E(a_α* a_β) b_β)^k]^{1/2k}`.
pub fn module_col_norm(z: &ModuleDecomposition, k: usize, guard: &Guard) -> Result<f64> {
    let y = z.column_square(guard)?;
    Ok(root_of_moment(FPElement::trace_power(&y, k, guard)?, k))
}

/// `τ[(Σ a_α E(b_α b_β*) a_β*)^k]^{1/2k}`.
pub fn module_row_norm(z: &ModuleDecomposition, k: usize, guard: &Guard) -> Result<f64> {
    let y = z.row_square(guard)?;
    Ok(root_of_moment(FPElement::trace_power(&y, k, guard)?, k))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KhintchineReport {
    pub col: f64,
    pub diagonal: f64,
    pub row: f64,
}

impl KhintchineReport {
    pub fn sum(&self) -> f64 {
        self.col + self.diagonal + self.row
    }
}

/// `‖E(x_1*x_1)^{1/2}‖_{2k}`, `(Σ_i ‖L_i(x_1)‖_{2k}^{2k})^{1/2k}` and `‖E(x_1x_1*)^{1/2}‖_{2k}`.
pub fn khintchine_w1(x1: &FPElement, k: usize, guard: &Guard) -> Result<KhintchineReport> {
    if x1.iter().any(|(w, _)| x1.context().length(w) != 1) {
        return Err(Error::Precondition("khintchine_w1 needs x in W_1".into()));
    }
    let col = FPElement::trace_power(&x1.adjoint().mul_guarded(x1, guard)?.expect(), k, guard)?;
    let row = FPElement::trace_power(&x1.mul_guarded(&x1.adjoint(), guard)?.expect(), k, guard)?;
    let mut diag = 0.0;
    for g in 0..x1.context().num_groups() {
        let li = x1.project_first(g);
        if !li.is_empty() {
            diag += li.moment_2k(k, guard)?.to_c64().re.max(0.0);
        }
    }
    Ok(KhintchineReport {
        col: root_of_moment(col, k),
        diagonal: diag.powf(1.0 / (2 * k) as f64),
        row: root_of_moment(row, k),
    })
}

/// Right-hand side of the length reduction at `p = 2k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RedformReport {
    pub x0: f64,
    pub x1: f64,
    pub col: f64,
    pub row: f64,
}

impl RedformReport {
    pub fn sum(&self) -> f64 {
        self.x0 + self.x1 + self.col + self.row
    }
}

pub fn redform_rhs(x: &FPElement, k: usize, guard: &Guard) -> Result<RedformReport> {
    let z = ModuleDecomposition::decompose(x);
    Ok(RedformReport {
        x0: x.project_len(0).norm_2k(k, guard)?,
        x1: x.project_len(1).norm_2k(k, guard)?,
        col: module_col_norm(&z, k, guard)?,
        row: module_row_norm(&z, k, guard)?,
    })
}

/// `E(T(a)*T(a)) ≤ ‖T‖² E(a*a)` in `B` for a matrix `a ∈ A_alg`; `B` is commutative, so
/// the inequality is read off the diagonal.
pub fn modular_bound_holds(t: &LetterMaps, alg: usize, a: &Mat, norm: f64, tol: f64) -> bool {
    let ctx = t.context();
    let ta = t.maps()[alg].apply(a);
    let lhs = ctx.expect_mat(&ta.adjoint().mul(&ta));
    let rhs = ctx.expect_mat(&a.adjoint().mul(a));
    (0..a.dim()).all(|p| lhs.get(p, p).to_c64().re <= norm * norm * rhs.get(p, p).to_c64().re + tol)
}
