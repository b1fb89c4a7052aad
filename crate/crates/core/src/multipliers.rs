//! Diagonal maps on `C[Γ]`: symbol multipliers, phase actions, free Hilbert
//! transforms, the Poisson semigroup and the bmo/BMO estimators built on it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgElement, OpNormParams};
use crate::coeff::{Coeff, Phase};
use crate::error::{Error, Guard, Result};
use crate::symbols::SymbolZd;
use crate::words::{Alphabet, Order, ReducedWord};

/// Signs `ε_{j,i} ∈ {±1}` indexed by level and generator, plus `ε_0` for the identity component.
///
/// Lookup order: level-specific entry, then generator-wide entry, then `+1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignFamily {
    eps0: i8,
    by_gen: BTreeMap<u32, i8>,
    by_level: BTreeMap<(usize, u32), i8>,
}

fn check_sign(s: i64) -> Result<i8> {
    match s {
        1 | -1 => Ok(s as i8),
        _ => Err(Error::Precondition(format!("sign {s} is not +1 or -1"))),
    }
}

impl SignFamily {
    pub fn new() -> SignFamily {
        SignFamily {
            eps0: 1,
            ..Default::default()
        }
    }

    pub fn with_eps0(mut self, s: i64) -> Result<SignFamily> {
        self.eps0 = check_sign(s)?;
        Ok(self)
    }

    pub fn set_gen(&mut self, i: u32, s: i64) -> Result<()> {
        self.by_gen.insert(i, check_sign(s)?);
        Ok(())
    }

    pub fn set_level(&mut self, j: usize, i: u32, s: i64) -> Result<()> {
        self.by_level.insert((j, i), check_sign(s)?);
        Ok(())
    }

    pub fn eps0(&self) -> i8 {
        if self.eps0 == 0 {
            1
        } else {
            self.eps0
        }
    }

    pub fn sign(&self, j: usize, i: u32) -> i8 {
        self.by_level
            .get(&(j, i))
            .or_else(|| self.by_gen.get(&i))
            .copied()
            .unwrap_or(1)
    }

    /// Level-independent random signs on generators `1..=num_gens` and `ε_0`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, num_gens: u32) -> SignFamily {
        let mut s = SignFamily::new();
        s.eps0 = if rng.random_bool(0.5) { 1 } else { -1 };
        for i in 1..=num_gens {
            s.by_gen.insert(i, if rng.random_bool(0.5) { 1 } else { -1 });
        }
        s
    }

    /// Random signs for levels `1..=levels`, independent across levels.
    pub fn random_levels<R: Rng + ?Sized>(rng: &mut R, num_gens: u32, levels: usize) -> SignFamily {
        let mut s = SignFamily::random(rng, num_gens);
        for j in 1..=levels {
            for i in 1..=num_gens {
                s.by_level.insert((j, i), if rng.random_bool(0.5) { 1 } else { -1 });
            }
        }
        s
    }

    /// Parses `[i, ε]` (all levels) and `[j, i, ε]` (one level) entries.
    pub fn from_entries(entries: &[Vec<i64>], eps0: i64) -> Result<SignFamily> {
        let mut s = SignFamily::new().with_eps0(eps0)?;
        for e in entries {
            match e.as_slice() {
                &[i, v] if i >= 1 => s.set_gen(i as u32, v)?,
                &[j, i, v] if j >= 1 && i >= 1 => s.set_level(j as usize, i as u32, v)?,
                _ => {
                    return Err(Error::Parse(format!(
                        "sign entry {e:?} is neither [i, s] nor [j, i, s]"
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn entries(&self) -> Vec<Vec<i64>> {
        self.by_gen
            .iter()
            .map(|(&i, &s)| vec![i as i64, s as i64])
            .chain(
                self.by_level
                    .iter()
                    .map(|(&(j, i), &s)| vec![j as i64, i as i64, s as i64]),
            )
            .collect()
    }
}

/// Phases `z_{j,i}` indexed by level and generator, `1` where unspecified.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseFamily {
    map: BTreeMap<(usize, u32), Phase>,
}

impl PhaseFamily {
    pub fn new() -> PhaseFamily {
        PhaseFamily::default()
    }

    pub fn set(&mut self, j: usize, i: u32, z: Phase) {
        self.map.insert((j, i), z);
    }

    pub fn get(&self, j: usize, i: u32) -> Phase {
        self.map.get(&(j, i)).copied().unwrap_or(Phase::ONE)
    }

    pub fn conj(&self) -> PhaseFamily {
        PhaseFamily {
            map: self.map.iter().map(|(k, z)| (*k, z.conj())).collect(),
        }
    }

    /// Pointwise product `z·w`.
    pub fn mul(&self, other: &PhaseFamily) -> PhaseFamily {
        let mut out = self.clone();
        for (k, w) in &other.map {
            let z = out.get(k.0, k.1).mul(w);
            out.map.insert(*k, z);
        }
        out
    }

    /// Independent uniformly random `n`-th roots of unity on `levels × gens`.
    pub fn random_roots<R: Rng + ?Sized>(rng: &mut R, n: u64, levels: usize, num_gens: u32) -> PhaseFamily {
        let mut z = PhaseFamily::new();
        for j in 1..=levels {
            for i in 1..=num_gens {
                let k = rng.random_range(0..n) as i64;
                z.set(j, i, Phase::root(k, n).expect("n >= 1"));
            }
        }
        z
    }

    /// The same root `z_i` on every level `1..=levels`.
    pub fn uniform_levels(levels: usize, gens: &[(u32, Phase)]) -> PhaseFamily {
        let mut z = PhaseFamily::new();
        for j in 1..=levels {
            for &(i, p) in gens {
                z.set(j, i, p);
            }
        }
        z
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum PhaseEntry {
    Root { j: usize, i: u32, k: i64, n: u64 },
    Unit { j: usize, i: u32, re: f64, im: f64 },
}

impl PhaseFamily {
    fn from_entries(entries: &[PhaseEntry]) -> Result<PhaseFamily> {
        let mut z = PhaseFamily::new();
        for e in entries {
            match *e {
                PhaseEntry::Root { j, i, k, n } => z.set(j, i, Phase::root(k, n)?),
                PhaseEntry::Unit { j, i, re, im } => {
                    z.set(j, i, Phase::unit(Complex64::new(re, im))?)
                }
            }
        }
        Ok(z)
    }

    fn to_entries(&self) -> Vec<PhaseEntry> {
        self.map
            .iter()
            .map(|(&(j, i), z)| match *z {
                Phase::Root { k, n } => PhaseEntry::Root { j, i, k, n },
                Phase::Unit(c) => PhaseEntry::Unit {
                    j,
                    i,
                    re: c.re,
                    im: c.im,
                },
            })
            .collect()
    }
}

/// Multiplies every term by `factor(word)`, computed once per word.
fn diagonal<S: Coeff>(
    x: &AlgElement<S>,
    mut factor: impl FnMut(&ReducedWord) -> Result<S>,
) -> Result<AlgElement<S>> {
    let mut out = AlgElement::zero(x.alphabet().clone());
    for (w, c) in x.iter() {
        let f = factor(w)?;
        out.add_term(w.clone(), c.mul_ref(&f));
    }
    Ok(out)
}

fn phase_product<S: Coeff>(factors: impl IntoIterator<Item = Phase>) -> Result<S> {
    let p = factors.into_iter().fold(Phase::ONE, |acc, z| acc.mul(&z));
    S::from_phase(&p)
}

fn check_symbol_alphabet(al: &Alphabet) -> Result<()> {
    match al {
        Alphabet::Free | Alphabet::Cyclic(_) => Ok(()),
        Alphabet::Explicit(orders) if orders.iter().all(|o| *o == Order::Infinite) => Ok(()),
        _ => Err(Error::Alphabet(
            "symbol multipliers need an all-infinite or uniform cyclic alphabet".into(),
        )),
    }
}

/// `M_m(λ(g)) = m(k_1, …, k_d) λ(g)` with missing exponents read as 0.
pub fn apply_mm<S: Coeff>(m: &SymbolZd, x: &AlgElement<S>) -> Result<AlgElement<S>> {
    check_symbol_alphabet(x.alphabet())?;
    let d = m.dim();
    diagonal(x, |w| m.eval_coeff(&w.leading_exponents(d)))
}

/// `α_z^{Ld}(λ(g)) = Π_{l ≤ min(d,n)} z_{l,i_l}^{k_l} λ(g)`.
pub fn alpha_ld<S: Coeff>(z: &PhaseFamily, d: usize, x: &AlgElement<S>) -> Result<AlgElement<S>> {
    diagonal(x, |w| {
        phase_product(
            w.blocks()
                .iter()
                .take(d)
                .enumerate()
                .map(|(l, b)| z.get(l + 1, b.gen).pow(b.exp)),
        )
    })
}

/// `[α_{z̄}^{Ld}(x*)]*`, which scales `λ(g)` by `Π_l z_{l,i_{n+1−l}}^{−k_{n+1−l}}`.
pub fn alpha_ld_op<S: Coeff>(z: &PhaseFamily, d: usize, x: &AlgElement<S>) -> Result<AlgElement<S>> {
    diagonal(x, |w| {
        phase_product(
            w.blocks()
                .iter()
                .rev()
                .take(d)
                .enumerate()
                .map(|(l, b)| z.get(l + 1, b.gen).pow(-b.exp)),
        )
    })
}

/// Single-level factor `T_z^{(j)}(λ(g)) = z_{j,i_j}^{k_j} λ(g)`, identity when `n < j`.
pub fn tz_j<S: Coeff>(z: &PhaseFamily, j: usize, x: &AlgElement<S>) -> Result<AlgElement<S>> {
    diagonal(x, |w| match w.block(j) {
        Some(b) => S::from_phase(&z.get(j, b.gen).pow(b.exp)),
        None => Ok(S::one()),
    })
}

/// `[T_{z̄}^{(j)}(x*)]*`.
pub fn tz_j_op<S: Coeff>(z: &PhaseFamily, j: usize, x: &AlgElement<S>) -> Result<AlgElement<S>> {
    diagonal(x, |w| match w.block_from_end(j) {
        Some(b) => S::from_phase(&z.get(j, b.gen).pow(-b.exp)),
        None => Ok(S::one()),
    })
}

fn sign_coeff<S: Coeff>(s: i8) -> S {
    if s < 0 {
        -S::one()
    } else {
        S::one()
    }
}

/// `ε_0 E(x) + Σ_k ε_k L_k(x)` with the level-1 signs.
pub fn hilbert_fh1<S: Coeff>(eps: &SignFamily, x: &AlgElement<S>) -> AlgElement<S> {
    x.map_coeffs(|w, c| match w.first_gen() {
        None => c.mul_ref(&sign_coeff(eps.eps0())),
        Some(i) => c.mul_ref(&sign_coeff(eps.sign(1, i))),
    })
}

/// `ε_0 E(x) + Σ_k R_k(x) ε_k`.
pub fn hilbert_fh1_op<S: Coeff>(eps: &SignFamily, x: &AlgElement<S>) -> AlgElement<S> {
    x.map_coeffs(|w, c| match w.last_gen() {
        None => c.mul_ref(&sign_coeff(eps.eps0())),
        Some(i) => c.mul_ref(&sign_coeff(eps.sign(1, i))),
    })
}

/// `λ(g) ↦ ε_{j,i_j} λ(g)` when `g` has at least `j` blocks, identity otherwise.
pub fn hilbert_j<S: Coeff>(eps: &SignFamily, j: usize, x: &AlgElement<S>) -> AlgElement<S> {
    x.map_coeffs(|w, c| match w.block(j) {
        Some(b) => c.mul_ref(&sign_coeff(eps.sign(j, b.gen))),
        None => c.clone(),
    })
}

/// Sign of the `j`-th block counted from the right.
pub fn hilbert_j_op<S: Coeff>(eps: &SignFamily, j: usize, x: &AlgElement<S>) -> AlgElement<S> {
    x.map_coeffs(|w, c| match w.block_from_end(j) {
        Some(b) => c.mul_ref(&sign_coeff(eps.sign(j, b.gen))),
        None => c.clone(),
    })
}

/// `H^{(1)} ∘ ⋯ ∘ H^{(d)}`.
pub fn hilbert_ld<S: Coeff>(eps: &SignFamily, d: usize, x: &AlgElement<S>) -> AlgElement<S> {
    x.map_coeffs(|w, c| {
        let s = w
            .blocks()
            .iter()
            .take(d)
            .enumerate()
            .fold(1i8, |acc, (l, b)| acc * eps.sign(l + 1, b.gen));
        c.mul_ref(&sign_coeff(s))
    })
}

fn sgn_phase(z: Phase, k: i64) -> Phase {
    z.pow(k.signum())
}

/// `λ(g) ↦ z_{j,i_j}^{sgn k_j} λ(g)` for `n ≥ j`.
pub fn tilde_h_j<S: Coeff>(z: &PhaseFamily, j: usize, x: &AlgElement<S>) -> Result<AlgElement<S>> {
    diagonal(x, |w| match w.block(j) {
        Some(b) => S::from_phase(&sgn_phase(z.get(j, b.gen), b.exp)),
        None => Ok(S::one()),
    })
}

/// `Π_{l ≤ min(d,n)} z_{l,i_l}^{sgn k_l}`.
pub fn tilde_h_ld<S: Coeff>(z: &PhaseFamily, d: usize, x: &AlgElement<S>) -> Result<AlgElement<S>> {
    diagonal(x, |w| {
        phase_product(
            w.blocks()
                .iter()
                .take(d)
                .enumerate()
                .map(|(l, b)| sgn_phase(z.get(l + 1, b.gen), b.exp)),
        )
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthMode {
    #[default]
    Letters,
    Blocks,
}

impl LengthMode {
    pub fn length(&self, al: &Alphabet, w: &ReducedWord) -> u64 {
        match self {
            LengthMode::Letters => al.letter_length(w),
            LengthMode::Blocks => w.block_len() as u64,
        }
    }
}

/// Poisson semigroup `S_t(λ(g)) = e^{−t|g|} λ(g)`; exact mode only supports `t = 0`.
pub fn poisson<S: Coeff>(t: f64, x: &AlgElement<S>, mode: LengthMode) -> Result<AlgElement<S>> {
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("poisson time {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    let al = x.alphabet().clone();
    diagonal(x, |w| {
        let len = mode.length(&al, w);
        if len == 0 {
            return Ok(S::one());
        }
        S::try_from_c64(Complex64::new((-t * len as f64).exp(), 0.0)).ok_or_else(|| {
            Error::NotExact("poisson weights are transcendental; use float mode".into())
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BmoVariant {
    #[serde(rename = "bmo_c")]
    SmallCol,
    #[serde(rename = "bmo_r")]
    SmallRow,
    #[serde(rename = "BMO_c")]
    BigCol,
    #[serde(rename = "BMO_r")]
    BigRow,
}

impl std::str::FromStr for BmoVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<BmoVariant> {
        serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| Error::Unknown {
            kind: "bmo variant",
            name: s.into(),
        })
    }
}

/// `n` logarithmically spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-3, 10.0, 40)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BmoRow {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BmoReport {
    pub lower: f64,
    pub upper: f64,
    pub per_t: Vec<BmoRow>,
}

/// Grid estimate of `sup_t ‖inner_t(x)‖_∞^{1/2}` for the chosen bmo/BMO variant.
pub fn bmo_norm(
    x: &AlgElement<Complex64>,
    variant: BmoVariant,
    t_grid: &[f64],
    mode: LengthMode,
    params: &OpNormParams,
    guard: &Guard,
) -> Result<BmoReport> {
    let tau = x.trace();
    let mut x = x.clone();
    if tau != Complex64::zero() {
        log::warn!("bmo estimator: subtracting trace {tau} from the input");
        x.add_term(ReducedWord::identity(), -tau);
    }
    let x = match variant {
        BmoVariant::SmallCol | BmoVariant::BigCol => x,
        BmoVariant::SmallRow | BmoVariant::BigRow => x.adjoint(),
    };
    let mut per_t = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let inner = match variant {
            BmoVariant::SmallCol | BmoVariant::SmallRow => {
                let xx = x.adjoint().mul_guarded(&x, guard)?;
                let st = poisson(t, &x, mode)?;
                let stst = st.adjoint().mul_guarded(&st, guard)?;
                &poisson(t, &xx, mode)? - &stst
            }
            BmoVariant::BigCol | BmoVariant::BigRow => {
                let dev = &x - &poisson(t, &x, mode)?;
                poisson(t, &dev.adjoint().mul_guarded(&dev, guard)?, mode)?
            }
        };
        let b = inner.opnorm_bracket(params, guard)?;
        per_t.push(BmoRow {
            t,
            lower: b.lower.max(0.0).sqrt(),
            upper: b.upper.max(0.0).sqrt(),
        });
    }
    Ok(BmoReport {
        lower: per_t.iter().map(|r| r.lower).fold(0.0, f64::max),
        upper: per_t.iter().map(|r| r.upper).fold(0.0, f64::max),
        per_t,
    })
}

/// Trigonometric polynomial `z ↦ Σ c z^freq λ(w)` on `T^d` with element coefficients.
pub type TrigPoly<S> = BTreeMap<(Vec<i64>, ReducedWord), S>;

/// `f(z) = α_z^{Ld}(x)` with all generators of level `l` carrying the same phase `z_l`.
pub fn orbit_polynomial<S: Coeff>(x: &AlgElement<S>, d: usize) -> TrigPoly<S> {
    x.iter()
        .map(|(w, c)| ((w.leading_exponents(d), w.clone()), c.clone()))
        .collect()
}

/// Checks `(T_m ⊗ Id)(α_·(x)) = α_·(M_m x)` coefficientwise and at the sample points.
pub fn verify_intertwining<S: Coeff>(
    m: &SymbolZd,
    x: &AlgElement<S>,
    z_samples: &[Vec<Complex64>],
) -> Result<bool> {
    let d = m.dim();
    let mut lhs: TrigPoly<S> = BTreeMap::new();
    for ((freq, w), c) in orbit_polynomial(x, d) {
        let v = c.mul_ref(&m.eval_coeff::<S>(&freq)?);
        if !v.is_zero() {
            lhs.insert((freq, w), v);
        }
    }
    let rhs = orbit_polynomial(&apply_mm(m, x)?, d);
    if lhs != rhs {
        return Ok(false);
    }
    for z in z_samples {
        if z.len() != d {
            return Err(Error::Dimension(format!("sample point of length {} for d = {d}", z.len())));
        }
        let eval = |p: &TrigPoly<S>| {
            let mut out: BTreeMap<ReducedWord, Complex64> = BTreeMap::new();
            for ((freq, w), c) in p {
                let mono = freq
                    .iter()
                    .zip(z)
                    .fold(Complex64::one(), |acc, (&k, zl)| acc * zl.powi(k as i32));
                *out.entry(w.clone()).or_default() += mono * c.to_c64();
            }
            out
        };
        let (a, b) = (eval(&lhs), eval(&rhs));
        for (w, va) in &a {
            let vb = b.get(w).copied().unwrap_or_default();
            if (va - vb).norm() > 1e-12 * (1.0 + va.norm()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Element of `C[Z_m^d] ⊗ C[Γ]`: words tagged by a vector of residues.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedElement<S> {
    m: u32,
    d: usize,
    alphabet: Alphabet,
    terms: BTreeMap<(Vec<u32>, ReducedWord), S>,
}

fn uniform_order(al: &Alphabet) -> Result<u32> {
    match al {
        Alphabet::Cyclic(m) => Ok(*m),
        _ => Err(Error::Alphabet(
            "cyclic tagging needs a uniform finite-order alphabet".into(),
        )),
    }
}

/// `α^{Ld}(λ(g)) = λ(k_1, …, k_d) ⊗ λ(g)` with exponents taken in `Z_m`.
pub fn cyclic_alpha_ld<S: Coeff>(x: &AlgElement<S>, d: usize) -> Result<TaggedElement<S>> {
    let m = uniform_order(x.alphabet())?;
    let terms = x
        .iter()
        .map(|(w, c)| {
            let tag = w
                .leading_exponents(d)
                .into_iter()
                .map(|k| k.rem_euclid(m as i64) as u32)
                .collect();
            ((tag, w.clone()), c.clone())
        })
        .collect();
    Ok(TaggedElement {
        m,
        d,
        alphabet: x.alphabet().clone(),
        terms,
    })
}

impl<S: Coeff> TaggedElement<S> {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<(Vec<u32>, ReducedWord), S> {
        &self.terms
    }

    fn add_term(&mut self, key: (Vec<u32>, ReducedWord), c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn empty_like(&self) -> TaggedElement<S> {
        TaggedElement {
            m: self.m,
            d: self.d,
            alphabet: self.alphabet.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn adjoint(&self) -> TaggedElement<S> {
        let mut out = self.empty_like();
        for ((tag, w), c) in &self.terms {
            let inv_tag = tag.iter().map(|&t| (self.m - t) % self.m).collect();
            out.terms.insert((inv_tag, self.alphabet.invert(w)), c.conj());
        }
        out
    }

    pub fn mul_guarded(&self, other: &TaggedElement<S>, guard: &Guard) -> Result<TaggedElement<S>> {
        guard.check(self.len().saturating_mul(other.len()))?;
        let mut out = self.empty_like();
        for ((ta, wa), a) in &self.terms {
            for ((tb, wb), b) in &other.terms {
                let tag = ta.iter().zip(tb).map(|(x, y)| (x + y) % self.m).collect();
                out.add_term((tag, self.alphabet.concat(wa, wb)), a.mul_ref(b));
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> S {
        self.terms
            .get(&(vec![0; self.d], ReducedWord::identity()))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    /// `τ((F*F)^k)` in the product group algebra, exact in exact mode.
    pub fn moment_2k(&self, k: usize, guard: &Guard) -> Result<S> {
        let y = self.adjoint().mul_guarded(self, guard)?;
        let mut p = y.clone();
        for _ in 1..k {
            p = p.mul_guarded(&y, guard)?;
        }
        Ok(p.trace())
    }

    pub fn norm_2k(&self, k: usize, guard: &Guard) -> Result<f64> {
        let m = self.moment_2k(k, guard)?.to_c64().re.max(0.0);
        Ok(m.powf(1.0 / (2 * k) as f64))
    }

    /// Character slice `F(χ_s) = Σ χ_s(tag) c λ(w)`, `χ_s(t) = exp(2πi s·t / m)`.
    pub fn slice(&self, s: &[u32]) -> AlgElement<Complex64> {
        let mut out = AlgElement::zero(self.alphabet.clone());
        for ((tag, w), c) in &self.terms {
            let dot: u64 = tag.iter().zip(s).map(|(&a, &b)| a as u64 * b as u64).sum();
            let chi = Phase::root(dot as i64, self.m as u64)
                .expect("m >= 2")
                .to_c64();
            out.add_term(w.clone(), chi * c.to_c64());
        }
        out
    }

    /// `‖F‖_{2k}^{2k} = m^{−d} Σ_χ ‖F(χ)‖_{2k}^{2k}`, summed over all `m^d` characters.
    pub fn norm_2k_dft(&self, k: usize, guard: &Guard) -> Result<f64> {
        let count = (self.m as usize).checked_pow(self.d as u32).unwrap_or(usize::MAX);
        guard.check(count)?;
        let mut total = 0.0;
        let mut s = vec![0u32; self.d];
        for _ in 0..count {
            let slice = self.slice(&s);
            total += slice.moment_2k(k, guard)?.re.max(0.0);
            for digit in s.iter_mut() {
                *digit += 1;
                if *digit < self.m {
                    break;
                }
                *digit = 0;
            }
        }
        Ok((total / count as f64).powf(1.0 / (2 * k) as f64))
    }
}

/// One stage of a multiplier pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MultiplierSpec {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "Mm")]
    Mm {
        symbol: SymbolZd,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
    },
    #[serde(rename = "alpha_Ld")]
    AlphaLd { d: usize, phases: Vec<PhaseEntryJson> },
    #[serde(rename = "alpha_Ld_op")]
    AlphaLdOp { d: usize, phases: Vec<PhaseEntryJson> },
    #[serde(rename = "Tz_j")]
    TzJ { j: usize, phases: Vec<PhaseEntryJson> },
    #[serde(rename = "Tz_j_op")]
    TzJOp { j: usize, phases: Vec<PhaseEntryJson> },
    #[serde(rename = "hilbert_fh1")]
    HilbertFh1 {
        #[serde(default)]
        signs: Vec<Vec<i64>>,
        #[serde(default = "plus_one")]
        eps0: i64,
    },
    #[serde(rename = "hilbert_j")]
    HilbertJ {
        j: usize,
        #[serde(default)]
        signs: Vec<Vec<i64>>,
    },
    #[serde(rename = "hilbert_j_op")]
    HilbertJOp {
        j: usize,
        #[serde(default)]
        signs: Vec<Vec<i64>>,
    },
    #[serde(rename = "hilbert_Ld")]
    HilbertLd {
        d: usize,
        #[serde(default)]
        signs: Vec<Vec<i64>>,
    },
    #[serde(rename = "tilde_h_j")]
    TildeHJ { j: usize, phases: Vec<PhaseEntryJson> },
    #[serde(rename = "tilde_h_Ld")]
    TildeHLd { d: usize, phases: Vec<PhaseEntryJson> },
    #[serde(rename = "poisson")]
    Poisson {
        t: f64,
        #[serde(default)]
        length: LengthMode,
    },
}

fn plus_one() -> i64 {
    1
}

/// Phase entry `{"j":1,"i":2,"k":1,"n":4}` (root of unity) or `{"j":1,"i":2,"re":..,"im":..}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseEntryJson(PhaseEntry);

fn phases_of(entries: &[PhaseEntryJson]) -> Result<PhaseFamily> {
    let raw: Vec<PhaseEntry> = entries.iter().map(|e| e.0.clone()).collect();
    PhaseFamily::from_entries(&raw)
}

fn phase_entries(z: &PhaseFamily) -> Vec<PhaseEntryJson> {
    z.to_entries().into_iter().map(PhaseEntryJson).collect()
}

fn conj_entries(entries: &[PhaseEntryJson]) -> Result<Vec<PhaseEntryJson>> {
    Ok(phase_entries(&phases_of(entries)?.conj()))
}

impl MultiplierSpec {
    pub fn apply<S: Coeff>(&self, x: &AlgElement<S>) -> Result<AlgElement<S>> {
        match self {
            MultiplierSpec::Identity => Ok(x.clone()),
            MultiplierSpec::Mm { symbol, d } => {
                if let Some(d) = d {
                    if *d != symbol.dim() {
                        return Err(Error::Dimension(format!(
                            "multiplier d = {d} but symbol lives on Z^{}",
                            symbol.dim()
                        )));
                    }
                }
                apply_mm(symbol, x)
            }
            MultiplierSpec::AlphaLd { d, phases } => alpha_ld(&phases_of(phases)?, *d, x),
            MultiplierSpec::AlphaLdOp { d, phases } => alpha_ld_op(&phases_of(phases)?, *d, x),
            MultiplierSpec::TzJ { j, phases } => tz_j(&phases_of(phases)?, *j, x),
            MultiplierSpec::TzJOp { j, phases } => tz_j_op(&phases_of(phases)?, *j, x),
            MultiplierSpec::HilbertFh1 { signs, eps0 } => {
                Ok(hilbert_fh1(&SignFamily::from_entries(signs, *eps0)?, x))
            }
            MultiplierSpec::HilbertJ { j, signs } => {
                Ok(hilbert_j(&SignFamily::from_entries(signs, 1)?, *j, x))
            }
            MultiplierSpec::HilbertJOp { j, signs } => {
                Ok(hilbert_j_op(&SignFamily::from_entries(signs, 1)?, *j, x))
            }
            MultiplierSpec::HilbertLd { d, signs } => {
                Ok(hilbert_ld(&SignFamily::from_entries(signs, 1)?, *d, x))
            }
            MultiplierSpec::TildeHJ { j, phases } => tilde_h_j(&phases_of(phases)?, *j, x),
            MultiplierSpec::TildeHLd { d, phases } => tilde_h_ld(&phases_of(phases)?, *d, x),
            MultiplierSpec::Poisson { t, length } => poisson(*t, x, *length),
        }
    }

    /// The inverse stage, for invertible multipliers.
    pub fn inverse(&self) -> Result<MultiplierSpec> {
        use MultiplierSpec::*;
        Ok(match self {
            Identity => Identity,
            AlphaLd { d, phases } => AlphaLd {
                d: *d,
                phases: conj_entries(phases)?,
            },
            AlphaLdOp { d, phases } => AlphaLdOp {
                d: *d,
                phases: conj_entries(phases)?,
            },
            TzJ { j, phases } => TzJ {
                j: *j,
                phases: conj_entries(phases)?,
            },
            TzJOp { j, phases } => TzJOp {
                j: *j,
                phases: conj_entries(phases)?,
            },
            TildeHJ { j, phases } => TildeHJ {
                j: *j,
                phases: conj_entries(phases)?,
            },
            TildeHLd { d, phases } => TildeHLd {
                d: *d,
                phases: conj_entries(phases)?,
            },
            s @ (HilbertFh1 { .. } | HilbertJ { .. } | HilbertJOp { .. } | HilbertLd { .. }) => {
                s.clone()
            }
            Mm { .. } | Poisson { .. } => {
                return Err(Error::Precondition(
                    "symbol multipliers and semigroups have no inverse stage".into(),
                ))
            }
        })
    }
}

/// Stages applied left to right.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pipeline(pub Vec<MultiplierSpec>);

impl Pipeline {
    /// Accepts either a single stage object or a list of stages.
    pub fn from_json(text: &str) -> Result<Pipeline> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.is_array() {
            Ok(serde_json::from_value(v)?)
        } else {
            Ok(Pipeline(vec![serde_json::from_value(v)?]))
        }
    }

    pub fn apply<S: Coeff>(&self, x: &AlgElement<S>) -> Result<AlgElement<S>> {
        let mut y = x.clone();
        for stage in &self.0 {
            y = stage.apply(&y)?;
        }
        Ok(y)
    }

    pub fn inverse(&self) -> Result<Pipeline> {
        Ok(Pipeline(
            self.0
                .iter()
                .rev()
                .map(|s| s.inverse())
                .collect::<Result<_>>()?,
        ))
    }

    pub fn set_phases(z: &PhaseFamily) -> Vec<PhaseEntryJson> {
        phase_entries(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{qc_real, Q, QC};
    use crate::symbols::Scalar;

    fn w(s: &str) -> ReducedWord {
        Alphabet::Free.parse_word(s).unwrap()
    }

    fn lam(s: &str) -> AlgElement<QC> {
        AlgElement::basis(Alphabet::Free, w(s))
    }

    fn lamf(s: &str) -> AlgElement<Complex64> {
        AlgElement::basis(Alphabet::Free, w(s))
    }

    #[test]
    fn mm_examples() {
        let one = SymbolZd::constant(2, Scalar::from_i64(1)).unwrap();
        let x = &lam("g1^3 g2^-1") + &lam("e");
        assert_eq!(apply_mm(&one, &x).unwrap(), x);
        let r = SymbolZd::riesz(2, 1).unwrap();
        let y = apply_mm(&r, &lamf("g1^3 g2^-1")).unwrap();
        assert!((y.coeff(&w("g1^3 g2^-1")).re - 3.0 / 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(apply_mm(&r, &lam("g1")).unwrap(), lam("g1"));
        assert!(apply_mm(&r, &lam("e")).unwrap().is_empty());
        assert!(matches!(apply_mm(&r, &lam("g1^3 g2^-1")), Err(Error::NotExact(_))));
    }

    #[test]
    fn alpha_example_and_op() {
        let mut z = PhaseFamily::new();
        z.set(1, 1, Phase::root(1, 4).unwrap());
        assert_eq!(alpha_ld(&z, 1, &lam("g1^2 g2")).unwrap(), lam("g1^2 g2").scale(&qc_real(-1)));
        assert_eq!(alpha_ld(&PhaseFamily::new(), 3, &lam("g1 g2")).unwrap(), lam("g1 g2"));
        // op version equals the definitional adjoint route
        let mut z = PhaseFamily::new();
        z.set(1, 2, Phase::root(1, 4).unwrap());
        z.set(2, 1, Phase::root(3, 4).unwrap());
        let x = &(&lam("g1^3 g2^-1").scale(&QC::new(Q::from_integer(2.into()), Q::one())) + &lam("g2 g1^2")) + &lam("g2");
        let via_adjoint = alpha_ld(&z.conj(), 2, &x.adjoint()).unwrap().adjoint();
        assert_eq!(alpha_ld_op(&z, 2, &x).unwrap(), via_adjoint);
        let via_adjoint = tz_j(&z.conj(), 2, &x.adjoint()).unwrap().adjoint();
        assert_eq!(tz_j_op(&z, 2, &x).unwrap(), via_adjoint);
    }

    #[test]
    fn hilbert_examples() {
        let mut eps = SignFamily::new().with_eps0(-1).unwrap();
        eps.set_gen(1, -1).unwrap();
        let x = &(&lam("g1 g2") + &lam("g2 g1")) + &lam("e").scale(&qc_real(3));
        let expect = &(&lam("g1 g2").scale(&qc_real(-1)) + &lam("g2 g1")) + &lam("e").scale(&qc_real(-3));
        assert_eq!(hilbert_fh1(&eps, &x), expect);
        assert_eq!(hilbert_j(&eps, 2, &lam("g1")), lam("g1"));
        assert_eq!(hilbert_fh1(&eps, &hilbert_fh1(&eps, &x)), x);
        assert_eq!(hilbert_j_op(&eps, 1, &lam("g2 g1")), lam("g2 g1").scale(&qc_real(-1)));
    }

    #[test]
    fn poisson_examples() {
        let x = lamf("g1^2 g2^-1");
        let y = poisson(1.0, &x, LengthMode::Letters).unwrap();
        assert!((y.coeff(&w("g1^2 g2^-1")).re - (-3f64).exp()).abs() < 1e-15);
        let yb = poisson(1.0, &x, LengthMode::Blocks).unwrap();
        assert!((yb.coeff(&w("g1^2 g2^-1")).re - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(poisson(2.0, &lamf("e"), LengthMode::Letters).unwrap(), lamf("e"));
        assert!(poisson(-1.0, &x, LengthMode::Letters).is_err());
        assert!(poisson(1.0, &lam("g1"), LengthMode::Letters).is_err());
    }

    #[test]
    fn bmo_of_generator() {
        let r = bmo_norm(
            &lamf("g1^2"),
            BmoVariant::SmallCol,
            &default_t_grid(),
            LengthMode::Letters,
            &OpNormParams::default(),
            &Guard::default(),
        )
        .unwrap();
        assert!((r.lower - 1.0).abs() < 1e-3 && (r.upper - 1.0).abs() < 1e-3);
        let zero = AlgElement::<Complex64>::zero(Alphabet::Free);
        let r = bmo_norm(&zero, BmoVariant::BigRow, &[0.5], LengthMode::Letters, &OpNormParams::default(), &Guard::default()).unwrap();
        assert_eq!(r.upper, 0.0);
    }

    #[test]
    fn intertwining_riesz() {
        let x = &lamf("g1") + &lamf("g1^-1");
        let r = SymbolZd::riesz(1, 1).unwrap();
        let zs = vec![vec![Complex64::from_polar(1.0, 0.7)]];
        assert!(verify_intertwining(&r, &x, &zs).unwrap());
    }

    #[test]
    fn cyclic_tagging() {
        let al = Alphabet::Cyclic(2);
        let x: AlgElement<QC> = AlgElement::basis(al.clone(), al.generator(1, 1).unwrap());
        let t = cyclic_alpha_ld(&x, 1).unwrap();
        let g = Guard::default();
        assert!((t.norm_2k_dft(2, &g).unwrap() - 1.0).abs() < 1e-12);
        assert!((t.norm_2k(2, &g).unwrap() - 1.0).abs() < 1e-15);
        let c = AlgElement::<QC>::monomial(al, ReducedWord::identity(), qc_real(3));
        let t = cyclic_alpha_ld(&c, 2).unwrap();
        assert_eq!(t.moment_2k(2, &g).unwrap(), qc_real(81));
        assert!(cyclic_alpha_ld(&lam("g1"), 1).is_err());
    }

    #[test]
    fn pipeline_json() {
        let p = Pipeline::from_json(r#"[{"kind":"hilbert_j","j":1,"signs":[[1,-1]]},{"kind":"poisson","t":0.5,"length":"letters"}]"#).unwrap();
        assert_eq!(p.0.len(), 2);
        assert!(p.inverse().is_err());
        let a = Pipeline::from_json(r#"{"kind":"alpha_Ld","d":2,"phases":[{"j":1,"i":1,"k":1,"n":4}]}"#).unwrap();
        let x = &lam("g1 g2") + &lam("g1^3");
        let back = a.inverse().unwrap().apply(&a.apply(&x).unwrap()).unwrap();
        assert_eq!(back, x);
        assert!(Pipeline::from_json(r#"{"kind":"bogus"}"#).is_err());
    }
}
