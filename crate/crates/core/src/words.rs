//! Reduced words in free products of cyclic groups.
//!
//! A word is a sequence of blocks `g_i^k` with adjacent generator indices
//! distinct and every exponent a non-identity element of its cyclic group.
//! The free group on infinitely many generators is the case where every
//! generator has infinite order. Words do not carry their alphabet; the
//! [`Alphabet`] performs every operation that depends on generator orders.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Infinite,
    Finite(u32),
}

/// Generator orders, indexed from 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum Alphabet {
    /// All generators of infinite order (the free group).
    #[default]
    Free,
    /// Every generator of the same finite order `m >= 2`.
    Cyclic(u32),
    /// Orders of generators `1..=len`; other indices are rejected.
    Explicit(Vec<Order>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub gen: u32,
    pub exp: i64,
}

impl Block {
    pub fn new(gen: u32, exp: i64) -> Block {
        Block { gen, exp }
    }
}

/// A group element in reduced form; the empty word is the identity.
///
/// Ordering is lexicographic on the blocks, which fixes the iteration order
/// of every sparse map keyed by words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord(SmallVec<[Block; 4]>);

impl ReducedWord {
    pub fn identity() -> ReducedWord {
        ReducedWord(SmallVec::new())
    }

    #[cfg(test)]
    pub(crate) fn from_reduced(blocks: impl IntoIterator<Item = Block>) -> ReducedWord {
        ReducedWord(blocks.into_iter().collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.0
    }

    /// Number of blocks.
    pub fn block_len(&self) -> usize {
        self.0.len()
    }

    /// 1-based block access; `None` past the end.
    pub fn block(&self, j: usize) -> Option<Block> {
        if j == 0 {
            return None;
        }
        self.0.get(j - 1).copied()
    }

    /// 1-based block access counted from the right.
    pub fn block_from_end(&self, j: usize) -> Option<Block> {
        if j == 0 || j > self.0.len() {
            return None;
        }
        self.0.get(self.0.len() - j).copied()
    }

    pub fn first_gen(&self) -> Option<u32> {
        self.0.first().map(|b| b.gen)
    }

    pub fn last_gen(&self) -> Option<u32> {
        self.0.last().map(|b| b.gen)
    }

    /// The first `j` blocks (all of them if shorter).
    pub fn prefix(&self, j: usize) -> &[Block] {
        &self.0[..j.min(self.0.len())]
    }

    /// The last `j` blocks (all of them if shorter).
    pub fn suffix(&self, j: usize) -> &[Block] {
        let n = self.0.len();
        &self.0[n - j.min(n)..]
    }

    /// Drops the first block.
    pub fn tail(&self) -> ReducedWord {
        ReducedWord(self.0.iter().skip(1).copied().collect())
    }

    /// Drops the last block.
    pub fn init(&self) -> ReducedWord {
        let n = self.0.len().saturating_sub(1);
        ReducedWord(self.0[..n].iter().copied().collect())
    }

    pub fn max_gen(&self) -> u32 {
        self.0.iter().map(|b| b.gen).max().unwrap_or(0)
    }

    /// Exponent vector of the first `d` blocks, zero padded.
    pub fn leading_exponents(&self, d: usize) -> Vec<i64> {
        (1..=d)
            .map(|j| self.block(j).map_or(0, |b| b.exp))
            .collect()
    }

    pub fn to_pairs(&self) -> Vec<(u32, i64)> {
        self.0.iter().map(|b| (b.gen, b.exp)).collect()
    }
}

impl fmt::Display for ReducedWord {
    /// Text form `g1^3 g2^-1`, or `e` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (n, b) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            if b.exp == 1 {
                write!(f, "g{}", b.gen)?;
            } else {
                write!(f, "g{}^{}", b.gen, b.exp)?;
            }
        }
        Ok(())
    }
}

/// Raw (unreduced) block list parsed from text; reduce it with [`Alphabet::word`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordText(pub Vec<(u32, i64)>);

impl FromStr for WordText {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |t: &str| Error::Parse(format!("invalid block {t:?} in word {s:?}"));
        let mut blocks = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let rest = tok.strip_prefix('g').ok_or_else(|| bad(tok))?;
            let (gen, exp) = match rest.split_once('^') {
                Some((g, k)) => (g, k.parse::<i64>().map_err(|_| bad(tok))?),
                None => (rest, 1),
            };
            let gen: u32 = gen.parse().map_err(|_| bad(tok))?;
            if gen == 0 {
                return Err(bad(tok));
            }
            blocks.push((gen, exp));
        }
        Ok(WordText(blocks))
    }
}

impl Alphabet {
    pub fn cyclic(m: u32) -> Result<Alphabet> {
        if m < 2 {
            return Err(Error::Alphabet(format!("finite order {m} < 2")));
        }
        Ok(Alphabet::Cyclic(m))
    }

    pub fn explicit(orders: Vec<Order>) -> Result<Alphabet> {
        if let Some(bad) = orders.iter().find(|o| matches!(o, Order::Finite(m) if *m < 2)) {
            return Err(Error::Alphabet(format!("finite order {bad:?} < 2")));
        }
        Ok(Alphabet::Explicit(orders))
    }

    pub fn order_of(&self, gen: u32) -> Result<Order> {
        if gen == 0 {
            return Err(Error::Alphabet("generator indices start at 1".into()));
        }
        match self {
            Alphabet::Free => Ok(Order::Infinite),
            Alphabet::Cyclic(m) => Ok(Order::Finite(*m)),
            Alphabet::Explicit(orders) => orders.get(gen as usize - 1).copied().ok_or_else(|| {
                Error::Alphabet(format!(
                    "generator g{gen} outside explicit alphabet of size {}",
                    orders.len()
                ))
            }),
        }
    }

    /// Order lookup for generators of already validated words.
    fn order(&self, gen: u32) -> Order {
        self.order_of(gen).unwrap_or(Order::Infinite)
    }

    pub fn is_all_infinite(&self) -> bool {
        match self {
            Alphabet::Free => true,
            Alphabet::Cyclic(_) => false,
            Alphabet::Explicit(o) => o.iter().all(|o| *o == Order::Infinite),
        }
    }

    /// Canonical exponent; `None` for the identity of the cyclic group.
    fn normalize(order: Order, exp: i64) -> Option<i64> {
        match order {
            Order::Infinite => (exp != 0).then_some(exp),
            Order::Finite(m) => {
                let r = exp.rem_euclid(m as i64);
                (r != 0).then_some(r)
            }
        }
    }

    /// Reduces an arbitrary block sequence.
    pub fn word(&self, blocks: impl IntoIterator<Item = (u32, i64)>) -> Result<ReducedWord> {
        let mut out = ReducedWord::identity();
        for (gen, exp) in blocks {
            let order = self.order_of(gen)?;
            if let Some(exp) = Self::normalize(order, exp) {
                self.push_block(&mut out.0, Block { gen, exp });
            }
        }
        Ok(out)
    }

    pub fn parse_word(&self, text: &str) -> Result<ReducedWord> {
        let raw: WordText = text.parse()?;
        self.word(raw.0)
    }

    /// Single generator power `g_gen^exp`.
    pub fn generator(&self, gen: u32, exp: i64) -> Result<ReducedWord> {
        self.word([(gen, exp)])
    }

    /// Checks that a word is reduced and normalized for this alphabet.
    pub fn validate(&self, w: &ReducedWord) -> Result<()> {
        for (n, b) in w.0.iter().enumerate() {
            let order = self.order_of(b.gen)?;
            if Self::normalize(order, b.exp) != Some(b.exp) {
                return Err(Error::Alphabet(format!(
                    "exponent {} of g{} is not canonical",
                    b.exp, b.gen
                )));
            }
            if n > 0 && w.0[n - 1].gen == b.gen {
                return Err(Error::Alphabet(format!("adjacent blocks share generator g{}", b.gen)));
            }
        }
        Ok(())
    }

    fn push_block(&self, stack: &mut SmallVec<[Block; 4]>, b: Block) {
        match stack.last_mut() {
            Some(last) if last.gen == b.gen => {
                match Self::normalize(self.order(b.gen), last.exp + b.exp) {
                    Some(e) => last.exp = e,
                    None => {
                        stack.pop();
                    }
                }
            }
            _ => stack.push(b),
        }
    }

    /// Reduced form of the group product `ab`.
    pub fn concat(&self, a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
        let mut out = a.0.clone();
        for &blk in b.0.iter() {
            self.push_block(&mut out, blk);
        }
        ReducedWord(out)
    }

    pub fn invert(&self, w: &ReducedWord) -> ReducedWord {
        ReducedWord(
            w.0.iter()
                .rev()
                .map(|b| Block {
                    gen: b.gen,
                    exp: Self::normalize(self.order(b.gen), -b.exp).unwrap_or(-b.exp),
                })
                .collect(),
        )
    }

    /// Word-metric size of one exponent: `|k|`, or `min(k, m-k)` in `Z_m`.
    pub fn exp_size(&self, gen: u32, exp: i64) -> u64 {
        match self.order(gen) {
            Order::Infinite => exp.unsigned_abs(),
            Order::Finite(m) => {
                let r = exp.rem_euclid(m as i64) as u64;
                r.min(m as u64 - r)
            }
        }
    }

    /// Sum of block sizes.
    pub fn letter_length(&self, w: &ReducedWord) -> u64 {
        w.0.iter().map(|b| self.exp_size(b.gen, b.exp)).sum()
    }

    /// First `j` blocks of `g` reappear unchanged at the start of `gh`.
    pub fn survives_first(&self, g: &ReducedWord, h: &ReducedWord, j: usize) -> bool {
        survives_first_in(g, &self.concat(g, h), j)
    }

    /// `j`-th block of `gh` is a power of the same generator as the `j`-th block of `g`.
    pub fn marks_first(&self, g: &ReducedWord, h: &ReducedWord, j: usize) -> bool {
        marks_first_in(g, &self.concat(g, h), j)
    }

    /// Last `k` blocks of `h` reappear unchanged at the end of `gh`.
    pub fn survives_last(&self, g: &ReducedWord, h: &ReducedWord, k: usize) -> bool {
        survives_last_in(h, &self.concat(g, h), k)
    }

    /// `k`-th block from the end of `gh` is a power of the same generator as that of `h`.
    pub fn marks_last(&self, g: &ReducedWord, h: &ReducedWord, k: usize) -> bool {
        marks_last_in(h, &self.concat(g, h), k)
    }
}

/// [`Alphabet::survives_first`] with the product already computed.
pub fn survives_first_in(g: &ReducedWord, gh: &ReducedWord, j: usize) -> bool {
    g.block_len() >= j && gh.block_len() >= j && g.prefix(j) == gh.prefix(j)
}

pub fn marks_first_in(g: &ReducedWord, gh: &ReducedWord, j: usize) -> bool {
    match (g.block(j), gh.block(j)) {
        (Some(a), Some(b)) => a.gen == b.gen,
        _ => false,
    }
}

pub fn survives_last_in(h: &ReducedWord, gh: &ReducedWord, k: usize) -> bool {
    h.block_len() >= k && gh.block_len() >= k && h.suffix(k) == gh.suffix(k)
}

pub fn marks_last_in(h: &ReducedWord, gh: &ReducedWord, k: usize) -> bool {
    match (h.block_from_end(k), gh.block_from_end(k)) {
        (Some(a), Some(b)) => a.gen == b.gen,
        _ => false,
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WordJson {
    Pairs(Vec<(u32, i64)>),
    Text(String),
}

/// Deserializes the `[[i, k], ...]` pair list or the `"g1^3 g2^-1"` text form without
/// reduction; callers validate against their alphabet.
impl<'de> Deserialize<'de> for ReducedWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = match WordJson::deserialize(d)? {
            WordJson::Pairs(p) => p,
            WordJson::Text(t) => t.parse::<WordText>().map_err(serde::de::Error::custom)?.0,
        };
        Ok(ReducedWord(pairs.into_iter().map(|(gen, exp)| Block { gen, exp }).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        Alphabet::Free.parse_word(s).unwrap()
    }

    #[test]
    fn concat_cancels_then_merges() {
        let a = w("g1^2 g2^-1");
        let b = w("g2 g1^3");
        assert_eq!(Alphabet::Free.concat(&a, &b), w("g1^5"));
    }

    #[test]
    fn concat_with_inverse_is_identity() {
        let a = w("g1^3 g2^-1 g5^7");
        let inv = Alphabet::Free.invert(&a);
        assert!(Alphabet::Free.concat(&a, &inv).is_identity());
        assert!(Alphabet::Free.concat(&inv, &a).is_identity());
    }

    #[test]
    fn cyclic_exponents_wrap() {
        let z3 = Alphabet::cyclic(3).unwrap();
        let a2 = z3.generator(1, 2).unwrap();
        assert_eq!(z3.concat(&a2, &a2), z3.generator(1, 1).unwrap());
        assert_eq!(z3.invert(&z3.generator(1, 1).unwrap()), a2);
        assert!(z3.generator(1, 3).unwrap().is_identity());
        assert_eq!(z3.generator(2, -1).unwrap().blocks()[0].exp, 2);
    }

    #[test]
    fn inverse_reverses_blocks() {
        assert_eq!(Alphabet::Free.invert(&w("g1^3 g2^-1")), w("g2 g1^-3"));
        assert!(Alphabet::Free.invert(&ReducedWord::identity()).is_identity());
    }

    #[test]
    fn lengths() {
        let g = w("g1^2 g2^-1");
        assert_eq!(g.block_len(), 2);
        assert_eq!(Alphabet::Free.letter_length(&g), 3);
        assert_eq!(Alphabet::Free.letter_length(&ReducedWord::identity()), 0);
        let z5 = Alphabet::cyclic(5).unwrap();
        let a4 = z5.generator(1, 4).unwrap();
        assert_eq!(a4.block_len(), 1);
        assert_eq!(z5.letter_length(&a4), 1);
    }

    #[test]
    fn survival_and_marking() {
        let al = Alphabet::Free;
        assert!(al.survives_first(&w("g1 g2"), &w("g2^-1 g3"), 1));
        assert!(!al.survives_first(&w("g1 g2"), &w("g2^-1 g1^-1"), 1));
        assert!(!al.marks_first(&w("g1 g2"), &w("g2^-1 g1^-1"), 1));
        let (g, h) = (w("g1^2"), w("g1^3"));
        assert!(!al.survives_first(&g, &h, 1));
        assert!(al.marks_first(&g, &h, 1));
        assert!(al.survives_last(&w("g1 g2"), &w("g2^-1 g3"), 1));
        assert!(!al.survives_last(&w("g3^2"), &w("g3 g1"), 2));
        assert!(al.marks_last(&w("g3^2"), &w("g3 g1"), 2));
    }

    #[test]
    fn text_round_trip_and_errors() {
        assert_eq!(w("g1^3 g2^-1").to_string(), "g1^3 g2^-1");
        assert_eq!(w("e").to_string(), "e");
        assert_eq!(w("g1 g1^-1 g2").to_string(), "g2");
        assert!(Alphabet::Free.parse_word("h1").is_err());
        assert!(Alphabet::Free.parse_word("g0").is_err());
        assert!(Alphabet::Free.parse_word("g1^x").is_err());
        let ex = Alphabet::explicit(vec![Order::Infinite, Order::Finite(2)]).unwrap();
        assert!(ex.parse_word("g3").is_err());
        assert_eq!(ex.parse_word("g2^3").unwrap(), ex.generator(2, 1).unwrap());
        assert!(Alphabet::cyclic(1).is_err());
    }

    #[test]
    fn validate_rejects_non_canonical() {
        let bad = ReducedWord::from_reduced([Block::new(1, 1), Block::new(1, 2)]);
        assert!(Alphabet::Free.validate(&bad).is_err());
        let bad = ReducedWord::from_reduced([Block::new(1, 4)]);
        assert!(Alphabet::Cyclic(3).validate(&bad).is_err());
        assert!(Alphabet::Free.validate(&w("g1 g2 g1")).is_ok());
    }
}
