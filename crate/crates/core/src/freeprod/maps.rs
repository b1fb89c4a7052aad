//! Letter-wise maps on `W`: `T^{(d)}`, `T^{Ld}`, `T_π`, the free Hilbert
//! transforms and the daggers, plus the Cotlar identities over matrix contexts.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::context::FPContext;
use super::element::{FPElement, FPWord, Letter};
use super::matrix::Mat;
use crate::coeff::{Coeff, QC};
use crate::error::{Error, Result};
use crate::multipliers::SignFamily;
use crate::paraproducts::{Coord, Dagger, Monomial};

/// A linear map on `M_n`, stored by the images of the matrix units `e_{pq}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMap {
    n: usize,
    images: Vec<Mat>,
}

impl MatrixMap {
    pub fn identity(n: usize) -> MatrixMap {
        MatrixMap::from_fn(n, |m| m.clone())
    }

    pub fn from_fn(n: usize, f: impl Fn(&Mat) -> Mat) -> MatrixMap {
        let images = (0..n * n).map(|pq| f(&Mat::unit(n, pq / n, pq % n))).collect();
        MatrixMap { n, images }
    }

    /// `a ↦ u a u*`.
    pub fn ad(u: &Mat) -> MatrixMap {
        let ua = u.adjoint();
        MatrixMap::from_fn(u.dim(), |m| u.mul(m).mul(&ua))
    }

    /// Schur multiplier `e_{pq} ↦ m_{pq} e_{pq}`.
    pub fn schur(m: &Mat) -> MatrixMap {
        MatrixMap::from_fn(m.dim(), |a| {
            let mut out = Mat::zero(m.dim());
            for p in 0..m.dim() {
                for q in 0..m.dim() {
                    out.set(p, q, a.get(p, q).mul_ref(m.get(p, q)));
                }
            }
            out
        })
    }

    /// From the `n²×n²` matrix acting on row-major vectorizations.
    pub fn from_matrix(t: &Mat) -> Result<MatrixMap> {
        let n = (t.dim() as f64).sqrt().round() as usize;
        if n * n != t.dim() {
            return Err(Error::Dimension(format!("{}×{} is not n²×n²", t.dim(), t.dim())));
        }
        let images = (0..n * n)
            .map(|col| {
                let mut m = Mat::zero(n);
                for row in 0..n * n {
                    m.set(row / n, row % n, t.get(row, col).clone());
                }
                m
            })
            .collect();
        Ok(MatrixMap { n, images })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, m: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(n);
        for p in 0..n {
            for q in 0..n {
                let c = m.get(p, q);
                if !c.is_zero() {
                    out = out.add(&self.images[p * n + q].scale(c));
                }
            }
        }
        out
    }

    fn to_dense(&self, cols: &[usize]) -> DMatrix<Complex64> {
        let images: Vec<Vec<Complex64>> = cols.iter().map(|&c| self.images[c].to_c64()).collect();
        DMatrix::from_fn(cols.len(), cols.len(), |r, c| images[c][cols[r]])
    }

    /// `‖T‖` on `L_2(M_n, tr)` restricted to the span of the given matrix units.
    pub fn l2_norm_on(&self, units: &[usize]) -> f64 {
        if units.is_empty() {
            return 0.0;
        }
        let m = self.to_dense(units);
        m.singular_values().iter().cloned().fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_on(&(0..self.n * self.n).collect::<Vec<_>>())
    }
}

/// One map per algebra, each landing in a target algebra of the same size.
#[derive(Clone, Debug, PartialEq)]
pub struct LetterMaps {
    ctx: Arc<FPContext>,
    maps: Vec<MatrixMap>,
    targets: Vec<usize>,
    centered: Vec<Vec<Vec<(usize, QC)>>>,
}

impl LetterMaps {
    /// Builds the family and checks that centered letters go to centered letters.
    pub fn new(ctx: &Arc<FPContext>, maps: Vec<MatrixMap>, targets: Vec<usize>) -> Result<LetterMaps> {
        if maps.len() != ctx.num_algebras() || targets.len() != ctx.num_algebras() {
            return Err(Error::Dimension(format!(
                "need one map per algebra ({}), got {}",
                ctx.num_algebras(),
                maps.len()
            )));
        }
        let mut centered = Vec::new();
        for (i, (t, &tgt)) in maps.iter().zip(&targets).enumerate() {
            if tgt >= ctx.num_algebras() || t.dim() != ctx.algebra(i).dim() || t.dim() != ctx.algebra(tgt).dim() {
                return Err(Error::Dimension(format!("map {} has the wrong size", i + 1)));
            }
            let mut rows = Vec::new();
            for (idx, u) in ctx.algebra(i).basis().iter().enumerate() {
                let img = t.apply(&u.mat);
                if !ctx.expect_mat(&img).is_zero() {
                    return Err(Error::Contract(format!(
                        "(H1): E∘T∘(Id−E) ≠ 0 for algebra {} at centered basis element {idx}",
                        i + 1
                    )));
                }
                rows.push(ctx.centered_coords(tgt, &img)?);
            }
            centered.push(rows);
        }
        Ok(LetterMaps {
            ctx: ctx.clone(),
            maps,
            targets,
            centered,
        })
    }

    pub fn identity(ctx: &Arc<FPContext>) -> LetterMaps {
        let maps = (0..ctx.num_algebras())
            .map(|i| MatrixMap::identity(ctx.algebra(i).dim()))
            .collect();
        LetterMaps::new(ctx, maps, (0..ctx.num_algebras()).collect()).expect("identity is admissible")
    }

    /// `Ad(u_i)` on every algebra; validated as a trace-preserving representation fixing `B`.
    pub fn ad(ctx: &Arc<FPContext>, us: &[Mat]) -> Result<LetterMaps> {
        for (i, u) in us.iter().enumerate() {
            if !u.is_unitary() {
                return Err(Error::Contract(format!("u_{} is not unitary", i + 1)));
            }
        }
        let t = LetterMaps::new(ctx, us.iter().map(MatrixMap::ad).collect(), (0..us.len()).collect())?;
        t.validate_representation()?;
        Ok(t)
    }

    /// Exchanges the two copies of every algebra of a swap context.
    pub fn swap(ctx: &Arc<FPContext>) -> Result<LetterMaps> {
        let targets = (0..ctx.num_algebras())
            .map(|i| {
                ctx.partner(i)
                    .ok_or_else(|| Error::Precondition("swap needs a context built by swap_context".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let maps = (0..ctx.num_algebras())
            .map(|i| MatrixMap::identity(ctx.algebra(i).dim()))
            .collect();
        LetterMaps::new(ctx, maps, targets)
    }

    pub fn context(&self) -> &Arc<FPContext> {
        &self.ctx
    }

    pub fn maps(&self) -> &[MatrixMap] {
        &self.maps
    }

    /// (H1): `T_i(b a b') = b T_i(a) b'` on basis pairs; centered-to-centered was checked at construction.
    pub fn validate_h1(&self) -> Result<()> {
        let ctx = &self.ctx;
        for (i, t) in self.maps.iter().enumerate() {
            let n = t.dim();
            for c in 0..ctx.colors() {
                for c2 in 0..ctx.colors() {
                    let (b, b2) = (ctx.color_mat(i, c), ctx.color_mat(i, c2));
                    for pq in 0..n * n {
                        let a = Mat::unit(n, pq / n, pq % n);
                        if t.apply(&b.mul(&a).mul(&b2)) != b.mul(&t.apply(&a)).mul(&b2) {
                            return Err(Error::Contract(format!(
                                "(H1): T_{} is not B-bimodular at (e_{c}, e_{}{}, e_{c2})",
                                i + 1,
                                pq / n,
                                pq % n
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `π_i(b) = b`, `E∘π_i = E`, `π_i(a*) = π_i(a)*` and multiplicativity on matrix units.
    pub fn validate_representation(&self) -> Result<()> {
        let ctx = &self.ctx;
        for (i, t) in self.maps.iter().enumerate() {
            let n = t.dim();
            for c in 0..ctx.colors() {
                let b = ctx.color_mat(i, c);
                if t.apply(&b) != b {
                    return Err(Error::Contract(format!("π_{} moves the projection e_{c} of B", i + 1)));
                }
            }
            for pq in 0..n * n {
                let a = Mat::unit(n, pq / n, pq % n);
                let ta = t.apply(&a);
                if ctx.expect_mat(&ta) != ctx.expect_mat(&a) {
                    return Err(Error::Contract(format!("E∘π_{} ≠ E at e_{}{}", i + 1, pq / n, pq % n)));
                }
                if t.apply(&a.adjoint()) != ta.adjoint() {
                    return Err(Error::Contract(format!("π_{} is not *-preserving at e_{}{}", i + 1, pq / n, pq % n)));
                }
                for rs in 0..n * n {
                    let b = Mat::unit(n, rs / n, rs % n);
                    if t.apply(&a.mul(&b)) != ta.mul(&t.apply(&b)) {
                        return Err(Error::Contract(format!(
                            "π_{} is not multiplicative at (e_{}{}, e_{}{})",
                            i + 1,
                            pq / n,
                            pq % n,
                            rs / n,
                            rs % n
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `‖⊕T_i‖` on `L_2`.
    pub fn cb2(&self) -> f64 {
        self.maps.iter().map(MatrixMap::l2_norm).fold(0.0, f64::max)
    }

    /// `sup ‖E(T(x)*T(x))‖^{1/2}` over `‖E(x*x)‖ ≤ 1`: the largest norm of `T` on a column block `A e_c`.
    pub fn modular_norm(&self) -> f64 {
        let ctx = &self.ctx;
        let mut best: f64 = 0.0;
        for t in &self.maps {
            let n = t.dim();
            for c in 0..ctx.colors() {
                let cols: Vec<usize> = match ctx.base() {
                    super::context::BaseKind::Scalar => (0..n * n).collect(),
                    super::context::BaseKind::Diag => (0..n).map(|p| p * n + c).collect(),
                };
                best = best.max(t.l2_norm_on(&cols));
            }
        }
        best
    }

    /// Images of the letters at `positions`, expanded over the centered bases.
    fn apply_at(&self, x: &FPElement, positions: impl Fn(&FPWord) -> Vec<usize>) -> Result<FPElement> {
        let ctx = x.context();
        let mut out = FPElement::zero(ctx);
        for (w, c) in x.iter() {
            let l = match w {
                FPWord::Base(_) => {
                    out.add_term(w.clone(), c.clone());
                    continue;
                }
                FPWord::Letters(l) => l,
            };
            let mut partial: Vec<(Vec<Letter>, QC)> = vec![(l.clone(), c.clone())];
            for pos in positions(w) {
                let x = l[pos];
                let img = &self.centered[x.alg][x.idx];
                let tgt = self.targets[x.alg];
                partial = partial
                    .into_iter()
                    .flat_map(|(word, v)| {
                        img.iter().map(move |(idx, a)| {
                            let mut word = word.clone();
                            word[pos] = Letter { alg: tgt, idx: *idx };
                            (word, v.mul_ref(a))
                        })
                    })
                    .collect();
            }
            for (word, v) in partial {
                if !ctx.is_valid_chain(&word) {
                    return Err(Error::Contract(format!(
                        "letter map breaks the tensor-word {w}: B-bimodularity fails"
                    )));
                }
                out.add_term(FPWord::Letters(word), v);
            }
        }
        Ok(out)
    }
}

/// Random (H1)-admissible family: Schur multipliers for `B = diag`, and for `B = C` maps
/// fixing `C·1` and mixing the centered basis.
pub fn random_h1_maps<R: rand::Rng + ?Sized>(ctx: &Arc<FPContext>, rng: &mut R) -> Result<LetterMaps> {
    let mut maps = Vec::new();
    for i in 0..ctx.num_algebras() {
        let n = ctx.algebra(i).dim();
        let map = match ctx.base() {
            super::context::BaseKind::Diag => {
                let mut m = Mat::zero(n);
                for p in 0..n {
                    for q in 0..n {
                        m.set(p, q, if p == q { QC::one() } else { QC::sample(rng) });
                    }
                }
                MatrixMap::schur(&m)
            }
            super::context::BaseKind::Scalar => {
                let basis = ctx.algebra(i).basis().to_vec();
                let mix: Vec<Vec<QC>> = basis
                    .iter()
                    .map(|_| basis.iter().map(|_| QC::sample(rng)).collect())
                    .collect();
                let ctx2 = ctx.clone();
                MatrixMap::from_fn(n, move |a| {
                    let e = ctx2.expect_mat(a);
                    let mut out = e.clone();
                    let coords = ctx2.centered_coords(i, &a.sub(&e)).expect("centered part");
                    for (alpha, v) in coords {
                        for (beta, u) in basis.iter().enumerate() {
                            out = out.add(&u.mat.scale(&v.mul_ref(&mix[alpha][beta])));
                        }
                    }
                    out
                })
            }
        };
        maps.push(map);
    }
    let t = LetterMaps::new(ctx, maps, (0..ctx.num_algebras()).collect())?;
    t.validate_h1()?;
    Ok(t)
}

/// Random unitary commuting with `B`: a Cayley transform for `B = C`, diagonal
/// Gaussian-rational phases for `B = diag`.
pub fn random_b_unitary<R: rand::Rng + ?Sized>(ctx: &FPContext, n: usize, rng: &mut R) -> Result<Mat> {
    match ctx.base() {
        super::context::BaseKind::Scalar => Mat::cayley(&super::context::random_hermitian(rng, n)),
        super::context::BaseKind::Diag => {
            let five = crate::coeff::q_int(5);
            let phases = [
                QC::one(),
                -QC::one(),
                QC::i(),
                -QC::i(),
                QC::new(crate::coeff::q_int(3) / five.clone(), crate::coeff::q_int(4) / five.clone()),
                QC::new(crate::coeff::q_int(3) / five.clone(), crate::coeff::q_int(-4) / five),
            ];
            let mut u = Mat::zero(n);
            for p in 0..n {
                u.set(p, p, phases[rng.random_range(0..phases.len())].clone());
            }
            Ok(u)
        }
    }
}

fn run_positions(ctx: &FPContext, w: &FPWord, run: usize) -> Vec<usize> {
    ctx.runs(w)
        .get(run)
        .map(|(_, r)| r.clone().collect())
        .unwrap_or_default()
}

/// `T^{(d)}`: the map acts on the `d`-th letter, words shorter than `d` are fixed.
pub fn t_letter(d: usize, t: &LetterMaps, x: &FPElement) -> Result<FPElement> {
    if d == 0 {
        return Err(Error::Precondition("T^(d) needs d >= 1".into()));
    }
    let ctx = x.context().clone();
    t.apply_at(x, |w| run_positions(&ctx, w, d - 1))
}

/// `T^{Ld}`: the `l`-th family acts on the `l`-th letter for `l ≤ min(d, n)`.
pub fn t_ld(levels: &[LetterMaps], x: &FPElement) -> Result<FPElement> {
    let mut y = x.clone();
    for (l, t) in levels.iter().enumerate() {
        y = t_letter(l + 1, t, &y)?;
    }
    Ok(y)
}

/// `T_π(b) = b`, `T_π(a_1 ⊗ a_2 ⊗ ⋯) = π(a_1) ⊗ a_2 ⊗ ⋯` with `a_1` the first (grouped) letter.
pub fn t_pi(pi: &LetterMaps, x: &FPElement) -> Result<FPElement> {
    t_letter(1, pi, x)
}

/// `T_π^{op}(x) = T_π(x*)*`.
pub fn t_pi_op(pi: &LetterMaps, x: &FPElement) -> Result<FPElement> {
    Ok(t_pi(pi, &x.adjoint())?.adjoint())
}

/// Swap of every letter: `x^{(1)} ↔ x^{(2)}`.
pub fn swap_all(pi: &LetterMaps, x: &FPElement) -> Result<FPElement> {
    pi.apply_at(x, |w| (0..w.letters().len()).collect())
}

fn sign_value(s: i8) -> QC {
    if s < 0 {
        -QC::one()
    } else {
        QC::one()
    }
}

fn first_group(ctx: &FPContext, w: &FPWord) -> Option<usize> {
    w.letters().first().map(|x| ctx.group(x.alg))
}

fn last_group(ctx: &FPContext, w: &FPWord) -> Option<usize> {
    w.letters().last().map(|x| ctx.group(x.alg))
}

/// `H_ε(x) = ε_0 E(x) + Σ_i ε_i L_i(x)`, with groups numbered from 1 in the sign family.
pub fn fp_hilbert(eps: &SignFamily, x: &FPElement) -> FPElement {
    let ctx = x.context().clone();
    x.map_terms(|w, c| match first_group(&ctx, w) {
        None => c.mul_ref(&sign_value(eps.eps0())),
        Some(g) => c.mul_ref(&sign_value(eps.sign(1, g as u32 + 1))),
    })
}

/// `H_ε^{op}(x) = E(x) ε_0 + Σ_i R_i(x) ε_i`.
pub fn fp_hilbert_op(eps: &SignFamily, x: &FPElement) -> FPElement {
    let ctx = x.context().clone();
    x.map_terms(|w, c| match last_group(&ctx, w) {
        None => c.mul_ref(&sign_value(eps.eps0())),
        Some(g) => c.mul_ref(&sign_value(eps.sign(1, g as u32 + 1))),
    })
}

/// `H_ε^{(d)}`: sign of the algebra of the `d`-th letter, identity on shorter words.
pub fn fp_hilbert_d(eps: &SignFamily, d: usize, x: &FPElement) -> FPElement {
    let ctx = x.context().clone();
    x.map_terms(|w, c| match ctx.runs(w).get(d.saturating_sub(1)) {
        Some((g, _)) if d >= 1 => c.mul_ref(&sign_value(eps.sign(d, *g as u32 + 1))),
        _ => c.clone(),
    })
}

type SymTerms = BTreeMap<(FPWord, Monomial), QC>;

fn sym_insert(map: &mut SymTerms, key: (FPWord, Monomial), c: QC) {
    let e = map.entry(key.clone()).or_insert_with(QC::zero);
    *e += &c;
    if e.is_zero() {
        map.remove(&key);
    }
}

fn sign_of(g: Option<usize>) -> Monomial {
    Monomial::single(
        Coord::Sign {
            level: 1,
            gen: g.map_or(0, |g| g as u32 + 1),
        },
        1,
    )
}

/// `E_ε[f(x, y)]` where `x` and `y` carry sign tags and every output word is tagged again.
fn sign_expectation(
    x: &FPElement,
    y: &FPElement,
    tag_x: impl Fn(&FPWord) -> Monomial,
    tag_y: impl Fn(&FPWord) -> Monomial,
    tag_out: impl Fn(&FPWord) -> Monomial,
) -> Result<FPElement> {
    let ctx = x.context();
    let mut sym: SymTerms = BTreeMap::new();
    for (g, a) in x.iter() {
        let mg = tag_x(g);
        for (h, b) in y.iter() {
            let m = mg.times(&tag_y(h));
            let prod = FPElement::basis(ctx, g.clone())?.try_mul(&FPElement::basis(ctx, h.clone())?)?;
            for (w, v) in prod.iter() {
                sym_insert(&mut sym, (w.clone(), m.times(&tag_out(w))), a.mul_ref(b).mul_ref(v));
            }
        }
    }
    let mut out = FPElement::zero(ctx);
    for ((w, m), c) in sym {
        if m.has_unit_mean() {
            out.add_term(w, c);
        }
    }
    Ok(out)
}

/// Daggers over `W` from their sign-expectation definitions.
pub fn fp_dagger(x: &FPElement, y: &FPElement, which: Dagger) -> Result<FPElement> {
    let ctx = x.context().clone();
    let xy = x.try_mul(y)?;
    let one = |_: &FPWord| Monomial::one();
    let last = |w: &FPWord| sign_of(last_group(&ctx, w));
    let first = |w: &FPWord| sign_of(first_group(&ctx, w));
    let d10 = || -> Result<FPElement> { Ok(xy.sub(&sign_expectation(x, y, one, last, last)?)) };
    let d01 = || -> Result<FPElement> { Ok(xy.sub(&sign_expectation(x, y, first, one, first)?)) };
    Ok(match which {
        Dagger::D10 => d10()?,
        Dagger::D01 => d01()?,
        Dagger::D11 => xy.sub(&d10()?).sub(&d01()?),
    })
}

/// Word rule: keep a term of `gh` in `†^{1,0}` unless it ends in the algebra `h` ends in,
/// in `†^{0,1}` unless it starts in the algebra `g` starts in.
pub fn fp_dagger_combinatorial(x: &FPElement, y: &FPElement, which: Dagger) -> Result<FPElement> {
    let ctx = x.context().clone();
    let mut out = FPElement::zero(&ctx);
    for (g, a) in x.iter() {
        for (h, b) in y.iter() {
            let prod = FPElement::basis(&ctx, g.clone())?.try_mul(&FPElement::basis(&ctx, h.clone())?)?;
            for (w, v) in prod.iter() {
                let p = (last_group(&ctx, w) != last_group(&ctx, h)) as i64;
                let q = (first_group(&ctx, w) != first_group(&ctx, g)) as i64;
                let weight = match which {
                    Dagger::D10 => p,
                    Dagger::D01 => q,
                    Dagger::D11 => 1 - p - q,
                };
                if weight != 0 {
                    out.add_term(w.clone(), a.mul_ref(b).mul_ref(v).mul_ref(&QC::from_i64(weight)));
                }
            }
        }
    }
    Ok(out)
}

/// `P_{≥2}[T_π(g) T_π^{op}(h)] = P_{≥2}[T_π(g T_π^{op}(h)) + T_π^{op}(T_π(g) h) − T_π T_π^{op}(gh)]`.
pub fn fp_verify_cot2(g: &FPElement, h: &FPElement, pi: &LetterMaps) -> Result<bool> {
    let lhs = t_pi(pi, g)?.try_mul(&t_pi_op(pi, h)?)?.project_geq(2);
    let a = t_pi(pi, &g.try_mul(&t_pi_op(pi, h)?)?)?;
    let b = t_pi_op(pi, &t_pi(pi, g)?.try_mul(h)?)?;
    let c = t_pi(pi, &t_pi_op(pi, &g.try_mul(h)?)?)?;
    Ok(lhs == a.add(&b).sub(&c).project_geq(2))
}

pub type FPDaggerFn<'a> = &'a dyn Fn(&FPElement, &FPElement, Dagger) -> Result<FPElement>;

/// `P_1(T_π(g)T_π^{op}(h)) = T_π[P_1(g †^{1,0} T_π^{op}(h))] + T_π^{op}[P_1(T_π(g) †^{0,1} h)] + T_π[P_1(g †^{1,1} h)]`.
pub fn fp_verify_cot1(g: &FPElement, h: &FPElement, pi: &LetterMaps, dagger: FPDaggerFn) -> Result<bool> {
    let lhs = t_pi(pi, g)?.try_mul(&t_pi_op(pi, h)?)?.project_len(1);
    let a = t_pi(pi, &dagger(g, &t_pi_op(pi, h)?, Dagger::D10)?.project_len(1))?;
    let b = t_pi_op(pi, &dagger(&t_pi(pi, g)?, h, Dagger::D01)?.project_len(1))?;
    let c = t_pi(pi, &dagger(g, h, Dagger::D11)?.project_len(1))?;
    Ok(lhs == a.add(&b).add(&c))
}

/// T-family JSON: one `n²×n²` matrix per algebra, entries as numbers, `"p/q"` strings or `{"re","im"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LetterMapsSpec {
    pub maps: Vec<Vec<Vec<crate::symbols::ScalarSpec>>>,
}

impl LetterMapsSpec {
    pub fn build(&self, ctx: &Arc<FPContext>) -> Result<LetterMaps> {
        let maps = self
            .maps
            .iter()
            .map(|rows| {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|s| s.exact_value()).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                MatrixMap::from_matrix(&Mat::from_rows(rows)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let t = LetterMaps::new(ctx, maps, (0..ctx.num_algebras()).collect())?;
        t.validate_h1()?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{qc, qc_real, Q};
    use crate::freeprod::context::BaseKind;
    use crate::freeprod::element::{random_fp_element, FPRandomParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rot() -> Mat {
        // Pythagorean rotation, an exact unitary
        let f = |a: i64| qc(Q::new(a.into(), 5.into()), Q::zero());
        Mat::from_rows(vec![vec![f(3), f(4)], vec![f(-4), f(3)]]).unwrap()
    }

    #[test]
    fn ad_is_isometric_and_commutes_with_grading() {
        let ctx = Arc::new(FPContext::new(BaseKind::Scalar, 1, &[2, 2, 2]).unwrap());
        let pi = LetterMaps::ad(&ctx, &[rot(), Mat::identity(2), rot().adjoint()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_fp_element(&ctx, &mut rng, &FPRandomParams::default());
            let y = t_pi(&pi, &x).unwrap();
            assert_eq!(y.norm2_sq(), x.norm2_sq());
            assert_eq!(t_pi(&pi, &x.project_len(2)).unwrap(), y.project_len(2));
        }
        assert!((pi.cb2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validators_reject() {
        let ctx = Arc::new(FPContext::new(BaseKind::Diag, 2, &[2, 2]).unwrap());
        assert!(LetterMaps::ad(&ctx, &[rot(), rot()]).is_err());
        let mut t = Mat::zero(4);
        t.set(1, 2, qc_real(1));
        // e10 ↦ e01 keeps centering but breaks bimodularity
        let m = MatrixMap::from_matrix(&t).unwrap();
        let maps = LetterMaps::new(&ctx, vec![m.clone(), m], vec![0, 1]).unwrap();
        assert!(maps.validate_h1().is_err());
    }

    #[test]
    fn daggers_and_cotlar_over_swap_context() {
        let base = FPContext::new(BaseKind::Diag, 2, &[2, 2]).unwrap();
        let ctx = Arc::new(base.swap_context().unwrap());
        let pi = LetterMaps::swap(&ctx).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = FPRandomParams::default();
        for _ in 0..20 {
            let g = random_fp_element(&ctx, &mut rng, &p);
            let h = random_fp_element(&ctx, &mut rng, &p);
            let mut total = FPElement::zero(&ctx);
            for d in Dagger::ALL {
                let a = fp_dagger(&g, &h, d).unwrap();
                assert_eq!(a, fp_dagger_combinatorial(&g, &h, d).unwrap());
                total = total.add(&a);
            }
            assert_eq!(total, g.mul(&h));
            assert!(fp_verify_cot2(&g, &h, &pi).unwrap());
            assert!(fp_verify_cot1(&g, &h, &pi, &fp_dagger).unwrap());
            assert_eq!(swap_all(&pi, &swap_all(&pi, &g).unwrap()).unwrap(), g);
        }
    }
}
