//! Sparse group-algebra elements `Σ α(g) λ(g)` over a free product of cyclic groups.
//!
//! Elements are finitely supported maps from reduced words to coefficients
//! with no stored zeros. Multiplication is convolution with reduction, the
//! trace reads the coefficient at the identity, and `L_{2k}` norms come from
//! exact trace moments `τ((x*x)^k)`.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coeff::{Coeff, Mode, Phase};
use crate::error::{Error, Guard, Result};
use crate::words::{Alphabet, Order, ReducedWord};

/// Left factors per parallel chunk; fixed so float sums do not depend on the thread count.
const MUL_CHUNK: usize = 64;
const PARALLEL_MUL_THRESHOLD: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
pub struct AlgElement<S> {
    alphabet: Alphabet,
    terms: BTreeMap<ReducedWord, S>,
}

/// Orthogonal projections of the word grading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Block length exactly `n`.
    P(usize),
    /// Block length at least `n`.
    PGeq(usize),
    /// The identity component.
    E,
    /// Words whose first block is a power of `g_k`.
    L(u32),
    /// Words whose last block is a power of `g_k`.
    R(u32),
}

impl Projection {
    pub fn keeps(&self, w: &ReducedWord) -> bool {
        match *self {
            Projection::P(n) => w.block_len() == n,
            Projection::PGeq(n) => w.block_len() >= n,
            Projection::E => w.is_identity(),
            Projection::L(k) => w.first_gen() == Some(k),
            Projection::R(k) => w.last_gen() == Some(k),
        }
    }
}

impl<S: Coeff> AlgElement<S> {
    pub fn zero(alphabet: Alphabet) -> Self {
        AlgElement {
            alphabet,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(alphabet: Alphabet) -> Self {
        Self::monomial(alphabet, ReducedWord::identity(), S::one())
    }

    /// `c·λ(w)`.
    pub fn monomial(alphabet: Alphabet, w: ReducedWord, c: S) -> Self {
        let mut x = Self::zero(alphabet);
        x.add_term(w, c);
        x
    }

    /// `λ(w)`.
    pub fn basis(alphabet: Alphabet, w: ReducedWord) -> Self {
        Self::monomial(alphabet, w, S::one())
    }

    /// Builds an element from `(word, coefficient)` pairs, validating words and summing repeats.
    pub fn from_terms(
        alphabet: Alphabet,
        terms: impl IntoIterator<Item = (ReducedWord, S)>,
    ) -> Result<Self> {
        let mut x = Self::zero(alphabet);
        for (w, c) in terms {
            x.alphabet.validate(&w)?;
            x.add_term(w, c);
        }
        Ok(x)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn mode(&self) -> Mode {
        S::MODE
    }

    pub fn terms(&self) -> &BTreeMap<ReducedWord, S> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ReducedWord, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &ReducedWord) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    /// Adds `c·λ(w)` in place, removing the entry if it cancels.
    pub fn add_term(&mut self, w: ReducedWord, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
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

    fn check_alphabet(&self, other: &Self) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::Alphabet(format!(
                "mismatched alphabets {:?} and {:?}",
                self.alphabet, other.alphabet
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.alphabet.clone());
        }
        self.map_coeffs(|_, a| a.mul_ref(c))
    }

    /// Applies `λ(w) ↦ f(w, α(w)) λ(w)`; zero results are dropped.
    pub fn map_coeffs(&self, mut f: impl FnMut(&ReducedWord, &S) -> S) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(w, c)| {
                let v = f(w, c);
                (!v.is_zero()).then(|| (w.clone(), v))
            })
            .collect();
        AlgElement {
            alphabet: self.alphabet.clone(),
            terms,
        }
    }

    /// Keeps terms whose word satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&ReducedWord) -> bool) -> Self {
        AlgElement {
            alphabet: self.alphabet.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_alphabet(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Convolution with a predicted-size guard on `|supp x|·|supp y|`.
    pub fn mul_guarded(&self, other: &Self, guard: &Guard) -> Result<Self> {
        self.check_alphabet(other)?;
        guard.check(self.len().saturating_mul(other.len()))?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let al = &self.alphabet;
        let left: Vec<(&ReducedWord, &S)> = self.terms.iter().collect();
        let partial = |chunk: &[(&ReducedWord, &S)]| {
            let mut acc: HashMap<ReducedWord, S> = HashMap::new();
            for (g, a) in chunk {
                for (h, b) in &other.terms {
                    let gh = al.concat(g, h);
                    let v = a.mul_ref(b);
                    acc.entry(gh)
                        .and_modify(|c| *c += &v)
                        .or_insert(v);
                }
            }
            let mut sorted: Vec<(ReducedWord, S)> = acc.into_iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            sorted
        };
        let chunks: Vec<Vec<(ReducedWord, S)>> =
            if self.len().saturating_mul(other.len()) >= PARALLEL_MUL_THRESHOLD {
                left.par_chunks(MUL_CHUNK).map(partial).collect()
            } else {
                left.chunks(MUL_CHUNK).map(partial).collect()
            };
        let mut out = Self::zero(al.clone());
        for chunk in chunks {
            for (w, c) in chunk {
                out.add_term(w, c);
            }
        }
        out
    }

    /// Conjugates coefficients and inverts words.
    pub fn adjoint(&self) -> Self {
        let al = &self.alphabet;
        AlgElement {
            alphabet: al.clone(),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (al.invert(w), c.conj()))
                .collect(),
        }
    }

    /// Coefficient of the identity.
    pub fn trace(&self) -> S {
        self.coeff(&ReducedWord::identity())
    }

    /// `τ(xy)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> S {
        let al = &self.alphabet;
        let (small, large, small_left) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = S::zero();
        for (g, a) in &small.terms {
            if let Some(b) = large.terms.get(&al.invert(g)) {
                let v = if small_left { a.mul_ref(b) } else { b.mul_ref(a) };
                acc += &v;
            }
        }
        acc
    }

    /// `τ(x* y)`.
    pub fn inner_l2(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for (w, a) in &self.terms {
            if let Some(b) = other.terms.get(w) {
                acc += &a.conj().mul_ref(b);
            }
        }
        acc
    }

    /// `‖x‖_2^2 = Σ |α(g)|^2`, in the coefficient field.
    pub fn norm2_sq(&self) -> S {
        self.inner_l2(self)
    }

    pub fn norm_2(&self) -> f64 {
        self.norm2_sq().to_c64().re.max(0.0).sqrt()
    }

    /// `Σ |α(g)|`, an upper bound for the operator norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).sum()
    }

    pub fn project(&self, kind: Projection) -> Self {
        self.filter(|w| kind.keeps(w))
    }

    pub fn max_block_len(&self) -> usize {
        self.terms.keys().map(|w| w.block_len()).max().unwrap_or(0)
    }

    /// Homogeneous degree if every word has the same block length.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut lens = self.terms.keys().map(|w| w.block_len());
        let first = lens.next()?;
        lens.all(|n| n == first).then_some(first)
    }

    /// Grading unitary: multiplies the block-length-`n` component by `z^n`.
    pub fn apply_uz(&self, z: &Phase) -> Result<Self> {
        let mut powers: Vec<S> = Vec::new();
        for n in 0..=self.max_block_len() {
            powers.push(S::from_phase(&z.pow(n as i64))?);
        }
        Ok(self.map_coeffs(|w, c| c.mul_ref(&powers[w.block_len()])))
    }

    pub fn generators(&self) -> Vec<u32> {
        let mut gens: Vec<u32> = self
            .terms
            .keys()
            .flat_map(|w| w.blocks().iter().map(|b| b.gen))
            .collect();
        gens.sort_unstable();
        gens.dedup();
        gens
    }

    pub fn to_float(&self) -> AlgElement<Complex64> {
        AlgElement {
            alphabet: self.alphabet.clone(),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c.to_c64()))
                .collect(),
        }
    }

    /// `τ((x*x)^k)`, computed exactly in exact mode.
    pub fn moment_2k(&self, k: usize, guard: &Guard) -> Result<S> {
        if k == 0 {
            return Ok(S::one());
        }
        let y = self.adjoint().mul_guarded(self, guard)?;
        // τ(y^k) = τ(y^a y^b) with a + b = k
        let b = k / 2;
        let a = k - b;
        let mut pow_b = None;
        let mut acc = y.clone();
        for step in 1..a {
            if step == b {
                pow_b = Some(acc.clone());
            }
            acc = acc.mul_guarded(&y, guard)?;
        }
        let pow_a = acc;
        let pow_b = match (b, pow_b) {
            (0, _) => Self::one(self.alphabet.clone()),
            (_, Some(p)) => p,
            (_, None) => pow_a.clone(),
        };
        Ok(pow_a.trace_of_product(&pow_b))
    }

    /// `‖x‖_{2k} = τ((x*x)^k)^{1/2k}`.
    pub fn norm_2k(&self, k: usize, guard: &Guard) -> Result<f64> {
        if k == 0 {
            return Err(Error::Precondition("norm_2k needs k >= 1".into()));
        }
        let m = self.moment_2k(k, guard)?.to_c64().re.max(0.0);
        Ok(m.powf(1.0 / (2 * k) as f64))
    }

    /// Lower and upper bounds for the operator norm `‖x‖_∞`.
    pub fn opnorm_bracket(&self, params: &OpNormParams, guard: &Guard) -> Result<OpNormBracket> {
        opnorm_bracket(self, params, guard)
    }
}

impl<S: Coeff> Add for &AlgElement<S> {
    type Output = AlgElement<S>;
    fn add(self, rhs: Self) -> AlgElement<S> {
        self.try_add(rhs).expect("alphabet mismatch in add")
    }
}

impl<S: Coeff> Sub for &AlgElement<S> {
    type Output = AlgElement<S>;
    fn sub(self, rhs: Self) -> AlgElement<S> {
        self.try_add(&-rhs).expect("alphabet mismatch in sub")
    }
}

impl<S: Coeff + std::fmt::Display> std::fmt::Display for AlgElement<S> {
    /// `(c₁)λ(w₁) + (c₂)λ(w₂) + …`, or `0`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (w, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})λ({w})")?;
        }
        Ok(())
    }
}

impl<S: Coeff> Neg for &AlgElement<S> {
    type Output = AlgElement<S>;
    fn neg(self) -> AlgElement<S> {
        self.map_coeffs(|_, c| -c.clone())
    }
}

impl<S: Coeff> Mul for &AlgElement<S> {
    type Output = AlgElement<S>;
    fn mul(self, rhs: Self) -> AlgElement<S> {
        self.try_mul(rhs).expect("alphabet mismatch in mul")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpNormParams {
    /// Largest moment order used for the moment lower bound.
    pub k_max: usize,
    /// Letter-length radius of the Cayley ball used for compression.
    pub ball_radius: u64,
    pub max_iterations: usize,
    pub rel_tol: f64,
}

impl Default for OpNormParams {
    fn default() -> Self {
        OpNormParams {
            k_max: 12,
            ball_radius: 6,
            max_iterations: 200,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpNormBracket {
    pub lower: f64,
    pub upper: f64,
    /// Best moment bound `max_k τ((x*x)^k)^{1/2k}`.
    pub moment_lower: f64,
    /// Largest `k` whose moment fit under the guard.
    pub moment_k_reached: usize,
    /// Best Rayleigh value of the compressed left-multiplication operator.
    pub ball_lower: f64,
    pub ball_size: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn opnorm_bracket<S: Coeff>(
    x: &AlgElement<S>,
    params: &OpNormParams,
    guard: &Guard,
) -> Result<OpNormBracket> {
    let upper = x.l1_norm();
    if x.is_empty() {
        return Ok(OpNormBracket {
            lower: 0.0,
            upper: 0.0,
            moment_lower: 0.0,
            moment_k_reached: params.k_max,
            ball_lower: 0.0,
            ball_size: 0,
            iterations: 0,
            converged: true,
        });
    }

    // moments: powers of y = x*x until the guard trips
    let xf = x.to_float();
    let y = xf.adjoint().mul_guarded(&xf, guard)?;
    let mut pow = AlgElement::one(x.alphabet.clone());
    let mut moment_lower: f64 = 0.0;
    let mut k_reached = 0;
    for k in 1..=params.k_max {
        match pow.mul_guarded(&y, guard) {
            Ok(p) => pow = p,
            Err(Error::Resource { .. }) if k > 1 => break,
            Err(e) => return Err(e),
        }
        let m = pow.trace().re.max(0.0);
        moment_lower = moment_lower.max(m.powf(1.0 / (2 * k) as f64));
        k_reached = k;
    }

    let ball = cayley_ball(&x.alphabet, &x.generators(), params.ball_radius, guard)?;
    let index: HashMap<&ReducedWord, usize> =
        ball.iter().enumerate().map(|(i, w)| (w, i)).collect();
    guard.check(ball.len().saturating_mul(x.len()))?;
    // compressed operator A = P L_x P as a coordinate list
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for (col, w) in ball.iter().enumerate() {
        for (g, c) in &xf.terms {
            let gw = x.alphabet.concat(g, w);
            if let Some(&row) = index.get(&gw) {
                entries.push((row, col, *c));
            }
        }
    }
    let n = ball.len();
    let apply = |v: &[Complex64]| {
        let mut out = vec![Complex64::zero(); n];
        for &(r, c, a) in &entries {
            out[r] += a * v[c];
        }
        out
    };
    let apply_adj = |v: &[Complex64]| {
        let mut out = vec![Complex64::zero(); n];
        for &(r, c, a) in &entries {
            out[c] += a.conj() * v[r];
        }
        out
    };
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut ball_lower: f64 = 0.0;
    let mut prev = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=params.max_iterations {
        iterations = it;
        let av = apply(&v);
        let sigma = norm(&av);
        ball_lower = ball_lower.max(sigma);
        if sigma == 0.0 {
            converged = true;
            break;
        }
        if it > 1 && (sigma - prev).abs() <= params.rel_tol * sigma {
            converged = true;
            break;
        }
        prev = sigma;
        let w = apply_adj(&av);
        let wn = norm(&w);
        if wn == 0.0 {
            converged = true;
            break;
        }
        v = w.into_iter().map(|z| z / wn).collect();
    }

    Ok(OpNormBracket {
        lower: moment_lower.max(ball_lower).min(upper),
        upper,
        moment_lower,
        moment_k_reached: k_reached,
        ball_lower,
        ball_size: n,
        iterations,
        converged,
    })
}

/// All words over `gens` with letter length at most `radius`, in BFS order.
pub fn cayley_ball(
    alphabet: &Alphabet,
    gens: &[u32],
    radius: u64,
    guard: &Guard,
) -> Result<Vec<ReducedWord>> {
    let mut seen: HashMap<ReducedWord, ()> = HashMap::new();
    let mut ball = vec![ReducedWord::identity()];
    seen.insert(ReducedWord::identity(), ());
    let mut frontier = vec![ReducedWord::identity()];
    let steps: Vec<ReducedWord> = gens
        .iter()
        .flat_map(|&g| [alphabet.generator(g, 1), alphabet.generator(g, -1)])
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|w| !w.is_identity())
        .collect();
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for s in &steps {
                let ws = alphabet.concat(w, s);
                if seen.insert(ws.clone(), ()).is_none() {
                    next.push(ws);
                }
            }
        }
        guard.check(ball.len() + next.len())?;
        ball.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(ball)
}

/// Parameters of the seeded random element generator.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub alphabet: Alphabet,
    pub num_gens: u32,
    pub max_block_len: usize,
    /// Exponents drawn from `±{1..max_exp}` for infinite-order generators.
    pub max_exp: i64,
    pub num_terms: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            alphabet: Alphabet::Free,
            num_gens: 3,
            max_block_len: 3,
            max_exp: 2,
            num_terms: 4,
        }
    }
}

/// Samples reduced words uniformly among those with bounded block length,
/// generator index and exponent.
pub struct WordSampler {
    alphabet: Alphabet,
    gens: Vec<u32>,
    exps: Vec<Vec<i64>>,
    /// `completions[r][g]`: number of ways to append `r` blocks after generator `g`.
    completions: Vec<Vec<f64>>,
    lengths: WeightedIndex<f64>,
}

impl WordSampler {
    pub fn new(params: &RandomParams) -> Result<WordSampler> {
        if params.num_gens == 0 || params.max_exp <= 0 {
            return Err(Error::Precondition("random parameters must be positive".into()));
        }
        let gens: Vec<u32> = (1..=params.num_gens).collect();
        let exps = gens
            .iter()
            .map(|&g| {
                Ok(match params.alphabet.order_of(g)? {
                    Order::Infinite => (1..=params.max_exp).flat_map(|k| [k, -k]).collect(),
                    Order::Finite(m) => (1..m as i64).collect(),
                })
            })
            .collect::<Result<Vec<Vec<i64>>>>()?;
        let counts: Vec<f64> = exps.iter().map(|e| e.len() as f64).collect();
        let ng = gens.len();
        let mut completions = vec![vec![1.0; ng]];
        for r in 1..params.max_block_len.max(1) {
            let prev = &completions[r - 1];
            let row = (0..ng)
                .map(|g| (0..ng).filter(|&h| h != g).map(|h| counts[h] * prev[h]).sum())
                .collect();
            completions.push(row);
        }
        let mut weights = vec![1.0];
        for n in 1..=params.max_block_len {
            weights.push((0..ng).map(|g| counts[g] * completions[n - 1][g]).sum());
        }
        let lengths = WeightedIndex::new(&weights)
            .map_err(|e| Error::Precondition(format!("word sampler: {e}")))?;
        Ok(WordSampler {
            alphabet: params.alphabet.clone(),
            gens,
            exps,
            completions,
            lengths,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ReducedWord {
        let n = self.lengths.sample(rng);
        let mut blocks = Vec::with_capacity(n);
        let mut prev: Option<usize> = None;
        for pos in 0..n {
            let rest = n - pos - 1;
            let weights: Vec<f64> = (0..self.gens.len())
                .map(|g| {
                    if Some(g) == prev {
                        0.0
                    } else {
                        self.exps[g].len() as f64 * self.completions[rest][g]
                    }
                })
                .collect();
            let g = WeightedIndex::new(&weights)
                .expect("at least two generators or a single block")
                .sample(rng);
            let e = self.exps[g][rng.random_range(0..self.exps[g].len())];
            blocks.push((self.gens[g], e));
            prev = Some(g);
        }
        self.alphabet
            .word(blocks)
            .expect("sampled blocks are valid for the alphabet")
    }
}

/// Deterministic random element: `num_terms` sampled words with sampled coefficients.
pub fn random_element<S: Coeff>(seed: u64, params: &RandomParams) -> Result<AlgElement<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element_with(&mut rng, params)
}

pub fn random_element_with<S: Coeff, R: Rng + ?Sized>(
    rng: &mut R,
    params: &RandomParams,
) -> Result<AlgElement<S>> {
    if params.num_gens < 2 && params.max_block_len > 1 {
        return Err(Error::Precondition(
            "words longer than one block need at least two generators".into(),
        ));
    }
    let sampler = WordSampler::new(params)?;
    let mut x = AlgElement::zero(params.alphabet.clone());
    for _ in 0..params.num_terms {
        let w = sampler.sample(rng);
        let c = S::sample(rng);
        x.add_term(w, c);
    }
    Ok(x)
}

/// Random element whose words all have block length exactly `degree`.
pub fn random_homogeneous<S: Coeff, R: Rng + ?Sized>(
    rng: &mut R,
    params: &RandomParams,
    degree: usize,
) -> Result<AlgElement<S>> {
    let mut p = params.clone();
    p.max_block_len = degree;
    let sampler = WordSampler::new(&p)?;
    let mut x = AlgElement::zero(params.alphabet.clone());
    let mut drawn = 0;
    while drawn < params.num_terms {
        let w = sampler.sample(rng);
        if w.block_len() == degree {
            x.add_term(w, S::sample(rng));
            drawn += 1;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q_int, qc_real, Q, QC};
    use num_traits::One;

    fn w(s: &str) -> ReducedWord {
        Alphabet::Free.parse_word(s).unwrap()
    }

    fn lam(s: &str) -> AlgElement<QC> {
        AlgElement::basis(Alphabet::Free, w(s))
    }

    #[test]
    fn four_term_expansion() {
        let x = &lam("g1") + &lam("g2");
        let y = &lam("g1^-1") + &lam("g2^-1");
        let prod = &x * &y;
        let expect = &(&lam("e").scale(&qc_real(2)) + &lam("g1 g2^-1")) + &lam("g2 g1^-1");
        assert_eq!(prod, expect);
        assert_eq!(&lam("g1") * &lam("g1^-1"), lam("e"));
        assert_eq!(&x * &lam("e"), x);
    }

    #[test]
    fn trace_adjoint_inner() {
        assert_eq!(lam("e").trace(), QC::one());
        assert!(lam("g1").trace().is_zero());
        assert_eq!(lam("g1").inner_l2(&lam("g1")), QC::one());
        assert!(lam("g1").inner_l2(&lam("g2")).is_zero());
        let i = QC::new(Q::zero(), Q::one());
        let x = lam("g1^2").scale(&i);
        assert_eq!(x.adjoint(), lam("g1^-2").scale(&-i));
    }

    #[test]
    fn projections() {
        let x = &(&lam("e") + &lam("g1^3")) + &lam("g1 g2");
        assert_eq!(x.project(Projection::P(1)), lam("g1^3"));
        assert_eq!(x.project(Projection::PGeq(1)), &lam("g1^3") + &lam("g1 g2"));
        let y = &lam("g1 g2") + &lam("g2 g1");
        assert_eq!(y.project(Projection::L(2)), lam("g2 g1"));
        assert_eq!(y.project(Projection::R(2)), lam("g1 g2"));
        let z = &lam("e").scale(&qc_real(2)) + &lam("g1");
        assert_eq!(z.project(Projection::E), lam("e").scale(&qc_real(2)));
    }

    #[test]
    fn grading_unitary() {
        let i = Phase::root(1, 4).unwrap();
        let iq = QC::new(Q::zero(), Q::one());
        assert_eq!(lam("g1").apply_uz(&i).unwrap(), lam("g1").scale(&iq));
        assert_eq!(lam("g1 g2").apply_uz(&i).unwrap(), lam("g1 g2").scale(&qc_real(-1)));
        let x = &lam("g1 g2") + &lam("e");
        assert_eq!(x.apply_uz(&Phase::ONE).unwrap(), x);
        assert!(lam("g1").apply_uz(&Phase::root(1, 3).unwrap()).is_err());
    }

    #[test]
    fn moments_of_generators() {
        let g = Guard::default();
        let x = &lam("g1") + &lam("g2");
        assert_eq!(x.moment_2k(2, &g).unwrap(), qc_real(6));
        assert!((x.norm_2k(2, &g).unwrap() - 6f64.powf(0.25)).abs() < 1e-12);
        for k in 1..5 {
            assert!((lam("g1 g3^-2").norm_2k(k, &g).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn moment_guard_reports_prediction() {
        let x = &(&lam("g1") + &lam("g2")) + &lam("g3");
        let err = x.moment_2k(3, &Guard::new(10)).unwrap_err();
        assert!(matches!(err, Error::Resource { predicted: 81.., limit: 10 } | Error::Resource { predicted: 9.., limit: 10 }));
    }

    #[test]
    fn alphabet_mismatch() {
        let a = lam("g1");
        let b = AlgElement::<QC>::basis(Alphabet::Cyclic(3), Alphabet::Cyclic(3).generator(1, 1).unwrap());
        assert!(matches!(a.try_mul(&b), Err(Error::Alphabet(_))));
        assert!(matches!(a.try_add(&b), Err(Error::Alphabet(_))));
    }

    #[test]
    fn opnorm_of_unitary_and_laplacian() {
        let g = Guard::default();
        let b = lam("g1 g2").opnorm_bracket(&OpNormParams::default(), &g).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
        let x = &lam("g1") + &lam("g1^-1");
        let b = x.opnorm_bracket(&OpNormParams::default(), &g).unwrap();
        assert!(b.lower >= 1.85 && b.lower <= 2.0 + 1e-12 && (b.upper - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_is_deterministic() {
        let p = RandomParams { num_gens: 2, max_block_len: 2, max_exp: 2, num_terms: 3, ..Default::default() };
        let a: AlgElement<QC> = random_element(1, &p).unwrap();
        let b: AlgElement<QC> = random_element(1, &p).unwrap();
        assert_eq!(a, b);
        let p0 = RandomParams { num_terms: 0, ..p.clone() };
        assert!(random_element::<QC>(1, &p0).unwrap().is_empty());
        let h: AlgElement<QC> = random_homogeneous(&mut ChaCha8Rng::seed_from_u64(3), &p, 2).unwrap();
        assert_eq!(h.homogeneous_degree(), Some(2));
        let _ = q_int(1);
    }
}
