use freeharm_core::algebra::random_element;
use freeharm_core::multipliers::{poisson, LengthMode};
use freeharm_core::{AlgElement, Alphabet, Coeff, Guard, RandomParams, ReducedWord, QC};
use proptest::prelude::*;

fn params(alphabet: Alphabet) -> RandomParams {
    RandomParams { alphabet, num_gens: 3, max_block_len: 3, max_exp: 2, num_terms: 4 }
}

fn elem(seed: u64) -> AlgElement<QC> {
    random_element(seed, &params(Alphabet::Free)).unwrap()
}

fn alphabet() -> impl Strategy<Value = Alphabet> {
    prop_oneof![Just(Alphabet::Free), (2u32..6).prop_map(|m| Alphabet::cyclic(m).unwrap())]
}

fn raw_blocks() -> impl Strategy<Value = Vec<(u32, i64)>> {
    prop::collection::vec((1u32..4, -4i64..5), 0..8)
}

/// Free-group reduction over single letters, independent of the block representation.
fn letters_reduce(blocks: &[(u32, i64)]) -> Vec<i64> {
    let mut stack: Vec<i64> = Vec::new();
    for &(g, e) in blocks {
        let l = g as i64 * e.signum();
        for _ in 0..e.unsigned_abs() {
            if stack.last() == Some(&-l) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
    }
    stack
}

fn word_letters(w: &ReducedWord) -> Vec<i64> {
    w.to_pairs()
        .into_iter()
        .flat_map(|(g, e)| std::iter::repeat_n(g as i64 * e.signum(), e.unsigned_abs() as usize))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_matches_letter_oracle(blocks in raw_blocks()) {
        let w = Alphabet::Free.word(blocks.iter().copied()).unwrap();
        prop_assert_eq!(word_letters(&w), letters_reduce(&blocks));
        Alphabet::Free.validate(&w).unwrap();
    }

    #[test]
    fn group_laws(al in alphabet(), a in raw_blocks(), b in raw_blocks(), c in raw_blocks()) {
        let (a, b, c) = (al.word(a).unwrap(), al.word(b).unwrap(), al.word(c).unwrap());
        prop_assert_eq!(al.concat(&al.concat(&a, &b), &c), al.concat(&a, &al.concat(&b, &c)));
        prop_assert!(al.concat(&a, &al.invert(&a)).is_identity());
        prop_assert_eq!(al.invert(&al.concat(&a, &b)), al.concat(&al.invert(&b), &al.invert(&a)));
        al.validate(&al.concat(&a, &b)).unwrap();
    }

    #[test]
    fn text_syntax_round_trips(blocks in raw_blocks()) {
        let w = Alphabet::Free.word(blocks).unwrap();
        prop_assert_eq!(Alphabet::Free.parse_word(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn product_is_associative(s in any::<u64>()) {
        let (x, y, z) = (elem(s), elem(s ^ 1), elem(s ^ 2));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
    }

    #[test]
    fn trace_is_tracial_and_adjoint_reverses(s in any::<u64>()) {
        let (x, y) = (elem(s), elem(s.wrapping_add(7)));
        prop_assert_eq!((&x * &y).trace(), (&y * &x).trace());
        prop_assert_eq!((&x * &y).adjoint(), &y.adjoint() * &x.adjoint());
        prop_assert_eq!(x.adjoint().adjoint(), x.clone());
        prop_assert_eq!(x.trace_of_product(&y), (&x * &y).trace());
    }

    #[test]
    fn moments_are_positive_and_monotone(s in any::<u64>()) {
        let x = elem(s);
        let g = Guard::default();
        prop_assert_eq!(x.moment_2k(1, &g).unwrap(), x.norm2_sq());
        let norms: Vec<f64> = (1..=3).map(|k| x.norm_2k(k, &g).unwrap()).collect();
        prop_assert!(norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        let m = x.moment_2k(2, &g).unwrap().to_c64();
        prop_assert!(m.re >= 0.0 && m.im == 0.0);
    }

    #[test]
    fn float_mode_agrees_with_exact(s in any::<u64>()) {
        let (x, y) = (elem(s), elem(s ^ 3));
        let exact = (&x * &y).to_float();
        let float = &x.to_float() * &y.to_float();
        for (w, c) in exact.iter() {
            prop_assert!((float.coeff(w) - c).norm() < 1e-12);
        }
        prop_assert_eq!(exact.len(), float.len());
    }

    #[test]
    fn poisson_semigroup(s in any::<u64>(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let x = elem(s).to_float();
        let lhs = poisson(a, &poisson(b, &x, LengthMode::Letters).unwrap(), LengthMode::Letters).unwrap();
        let rhs = poisson(a + b, &x, LengthMode::Letters).unwrap();
        for (w, c) in rhs.iter() {
            prop_assert!((lhs.coeff(w) - c).norm() < 1e-12);
        }
    }
}
