//! Moments and traces checked against brute-force enumeration that shares no code with the
//! sparse algebra.

use std::collections::HashMap;

use freeharm_core::algebra::random_element;
use freeharm_core::coeff::qc_real;
use freeharm_core::{AlgElement, Alphabet, Coeff, Guard, RandomParams, ReducedWord, QC};

#[derive(Clone, Copy, Debug, Default)]
struct C(f64, f64);

impl C {
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn conj(self) -> C {
        C(self.0, -self.1)
    }
}

type Letters = Vec<i64>;

fn reduce_free(mut acc: Letters, w: &[i64]) -> Letters {
    for &l in w {
        if acc.last() == Some(&-l) {
            acc.pop();
        } else {
            acc.push(l);
        }
    }
    acc
}

fn letters(w: &ReducedWord) -> Letters {
    w.to_pairs()
        .into_iter()
        .flat_map(|(g, e)| std::iter::repeat_n(g as i64 * e.signum(), e.unsigned_abs() as usize))
        .collect()
}

fn inverse(w: &[i64]) -> Letters {
    w.iter().rev().map(|l| -l).collect()
}

/// `τ((x*x)^k)` by enumerating every choice of one term per factor.
fn brute_moment(x: &[(Letters, C)], k: usize) -> C {
    let adj: Vec<(Letters, C)> = x.iter().map(|(w, c)| (inverse(w), c.conj())).collect();
    let factors: Vec<&[(Letters, C)]> = (0..2 * k).map(|i| if i % 2 == 0 { &adj[..] } else { x }).collect();
    let mut states: HashMap<Letters, C> = HashMap::from([(Vec::new(), C(1.0, 0.0))]);
    for f in factors {
        let mut next: HashMap<Letters, C> = HashMap::new();
        for (w, c) in &states {
            for (v, d) in f {
                let e = next.entry(reduce_free(w.clone(), v)).or_default();
                let p = c.mul(*d);
                e.0 += p.0;
                e.1 += p.1;
            }
        }
        states = next;
    }
    states.get(&Vec::new()).copied().unwrap_or_default()
}

fn to_oracle(x: &AlgElement<QC>) -> Vec<(Letters, C)> {
    x.iter()
        .map(|(w, c)| {
            let z = c.to_c64();
            (letters(w), C(z.re, z.im))
        })
        .collect()
}

#[test]
fn random_moments_match_enumeration() {
    let params = RandomParams { alphabet: Alphabet::Free, num_gens: 3, max_block_len: 2, max_exp: 2, num_terms: 4 };
    let guard = Guard::default();
    for seed in 0..20 {
        let x: AlgElement<QC> = random_element(seed, &params).unwrap();
        let ox = to_oracle(&x);
        for k in 1..=3 {
            let exact = x.moment_2k(k, &guard).unwrap().to_c64();
            let brute = brute_moment(&ox, k);
            let scale = 1.0 + brute.0.abs();
            assert!((exact.re - brute.0).abs() < 1e-9 * scale, "seed {seed} k {k}: {exact} vs {brute:?}");
            assert!(exact.im.abs() < 1e-12 && brute.1.abs() < 1e-9 * scale);
        }
    }
}

#[test]
fn fourth_moment_of_two_generators_is_six() {
    let al = Alphabet::Free;
    let x = AlgElement::<QC>::basis(al.clone(), al.generator(1, 1).unwrap())
        .try_add(&AlgElement::basis(al.clone(), al.generator(2, 1).unwrap()))
        .unwrap();
    let brute = brute_moment(&to_oracle(&x), 2);
    assert_eq!(brute.0, 6.0);
    assert_eq!(x.moment_2k(2, &Guard::default()).unwrap(), qc_real(6));
}

#[test]
fn haar_unitary_moments_are_central_binomials() {
    let al = Alphabet::Free;
    let x = AlgElement::<QC>::one(al.clone())
        .try_add(&AlgElement::basis(al.clone(), al.generator(1, 1).unwrap()))
        .unwrap();
    let mut c = 1i64;
    for k in 1..=8i64 {
        c = c * (2 * (2 * k - 1)) / k;
        assert_eq!(x.moment_2k(k as usize, &Guard::default()).unwrap(), qc_real(c), "k = {k}");
        assert_eq!(brute_moment(&to_oracle(&x), k as usize).0, c as f64);
    }
}

#[test]
fn cyclic_generator_moments_count_closed_walks() {
    // λ(g) + λ(g)* in Z_m: τ((x*x)^k) counts ±1 walks of length 2k returning to 0 mod m
    for m in [3u32, 4, 5] {
        let al = Alphabet::cyclic(m).unwrap();
        let g = al.generator(1, 1).unwrap();
        let x = AlgElement::<QC>::basis(al.clone(), g.clone())
            .try_add(&AlgElement::basis(al.clone(), al.invert(&g)))
            .unwrap();
        for k in 1..=4usize {
            // x is self-adjoint so (x*x)^k = x^{2k}; each of the 2k factors has two terms
            let closed = (0..1u64 << (2 * k))
                .filter(|bits| {
                    let s: i64 = (0..2 * k).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).sum();
                    s.rem_euclid(m as i64) == 0
                })
                .count();
            assert_eq!(x.moment_2k(k, &Guard::default()).unwrap(), qc_real(closed as i64), "m {m} k {k}");
        }
    }
}
