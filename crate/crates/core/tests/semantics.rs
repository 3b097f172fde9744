mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use support::{all_lassos_from, random_arena, random_lasso_play, random_ltl, rng};
use unisynt_core::omega::{determinize_to_parity, ltl_to_nba, product_emptiness, Alphabet};
use unisynt_core::rltl::{eval_ltl_lasso, eval_ltl_lasso_all};
use unisynt_core::{parse, Formula, Lasso};

const ATOMS: [&str; 3] = ["p", "q", "r"];

fn random_word(rng: &mut rand_chacha::ChaCha8Rng, max_len: usize) -> Lasso<BTreeSet<String>> {
    let len = rng.gen_range(1..=max_len);
    let cut = rng.gen_range(0..len);
    let letters: Vec<BTreeSet<String>> = (0..len)
        .map(|_| {
            ATOMS
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .map(|a| a.to_string())
                .collect()
        })
        .collect();
    Lasso::new(letters[..cut].to_vec(), letters[cut..].to_vec())
}

/// Truth at every index by fixpoint iteration over the lasso's successor
/// function (least fixpoint for until).
fn fixpoint_eval(f: &Formula, word: &Lasso<BTreeSet<String>>) -> Vec<bool> {
    let n = word.span();
    match f {
        Formula::True => vec![true; n],
        Formula::Atom(p) => (0..n).map(|i| word.at(i).contains(p)).collect(),
        Formula::Not(a) => fixpoint_eval(a, word).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => {
            let (x, y) = (fixpoint_eval(a, word), fixpoint_eval(b, word));
            (0..n).map(|i| x[i] && y[i]).collect()
        }
        Formula::Next(a) => {
            let x = fixpoint_eval(a, word);
            (0..n).map(|i| x[word.next_index(i)]).collect()
        }
        Formula::Until(a, b) => {
            let (x, y) = (fixpoint_eval(a, word), fixpoint_eval(b, word));
            let mut z = vec![false; n];
            loop {
                let z2: Vec<bool> = (0..n)
                    .map(|i| y[i] || (x[i] && z[word.next_index(i)]))
                    .collect();
                if z2 == z {
                    return z;
                }
                z = z2;
            }
        }
        Formula::Rel(_) => panic!("R-free only"),
    }
}

#[test]
fn evaluator_matches_fixpoint_oracle() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let size = r.gen_range(1..=8);
        let f = random_ltl(&mut r, size, &ATOMS);
        let w = random_word(&mut r, 6);
        assert_eq!(
            eval_ltl_lasso_all(&f, &w).unwrap(),
            fixpoint_eval(&f, &w),
            "{f}"
        );
    }
}

#[test]
fn evaluator_clauses() {
    let w = |stem: &[&[&str]], cycle: &[&[&str]]| {
        let conv = |xs: &[&[&str]]| -> Vec<BTreeSet<String>> {
            xs.iter()
                .map(|l| l.iter().map(|s| s.to_string()).collect())
                .collect()
        };
        Lasso::new(conv(stem), conv(cycle))
    };
    let g = |s: &str| parse(s).unwrap();
    assert!(eval_ltl_lasso(&g("p U q"), &w(&[&["p"]], &[&["q"]]), 0).unwrap());
    assert!(eval_ltl_lasso(&g("G q"), &w(&[], &[&["q"], &["p", "q"]]), 0).unwrap());
    assert!(!eval_ltl_lasso(&g("G q"), &w(&[], &[&["q"], &["p"]]), 0).unwrap());
    // X shifts into the cycle and indices beyond the span fold back
    let l = w(&[&[]], &[&["p"], &[]]);
    assert!(eval_ltl_lasso(&g("X p"), &l, 0).unwrap());
    assert_eq!(
        eval_ltl_lasso(&g("p"), &l, 3).unwrap(),
        eval_ltl_lasso(&g("p"), &l, 1).unwrap()
    );
    assert!(eval_ltl_lasso(&g("R p"), &l, 0).is_err());
}

#[test]
fn nba_membership_matches_evaluator() {
    let mut r = rng(12);
    for _ in 0..600 {
        let size = r.gen_range(1..=8);
        let f = random_ltl(&mut r, size, &ATOMS);
        let a = ltl_to_nba(&f).unwrap();
        for _ in 0..3 {
            let w = random_word(&mut r, 6);
            assert_eq!(a.accepts(&w), eval_ltl_lasso(&f, &w, 0).unwrap(), "{f}");
        }
    }
}

#[test]
fn parity_determinization_preserves_language() {
    let mut r = rng(13);
    for _ in 0..150 {
        let size = r.gen_range(1..=6);
        let f = random_ltl(&mut r, size, &ATOMS[..2]);
        let nba = ltl_to_nba(&f).unwrap();
        let mut dpa = determinize_to_parity(&nba);
        assert!(dpa.max_priority() <= 2 * nba.len() as u32 + 2);
        for _ in 0..20 {
            let w = random_word(&mut r, 6);
            let letters = nba.alphabet.lasso_letters(&w);
            assert_eq!(
                dpa.accepts_lasso(&letters),
                nba.accepts_lasso(&letters),
                "{f}"
            );
        }
    }
    for text in ["G p", "F q", "G F p", "F G q"] {
        let nba = ltl_to_nba(&parse(text).unwrap()).unwrap();
        let mut dpa = determinize_to_parity(&nba);
        for _ in 0..50 {
            let w = random_word(&mut r, 6);
            let letters = nba.alphabet.lasso_letters(&w);
            assert_eq!(
                dpa.accepts_lasso(&letters),
                nba.accepts_lasso(&letters),
                "{text}"
            );
        }
    }
}

#[test]
fn emptiness_matches_lasso_enumeration() {
    let mut r = rng(14);
    for _ in 0..200 {
        let arena = random_arena(&mut r, 4, &ATOMS[..2]);
        let size = r.gen_range(1..=5);
        let f = random_ltl(&mut r, size, &ATOMS[..2]);
        let neg = Formula::not(f.clone());
        let a = unisynt_core::omega::ltl_to_nba_over(&neg, Alphabet::new(neg.atoms())).unwrap();
        for v in arena.positions() {
            let empty = product_emptiness(&arena, v, &a);
            let violation = all_lassos_from(&arena, v, 4).into_iter().any(|l| {
                let word = l.map(|&u| arena.labels(u).clone());
                !eval_ltl_lasso(&f, &word, 0).unwrap()
            });
            if empty {
                assert!(!violation, "{f} from {v}");
            } else {
                // a shortest accepted lasso exists within the enumeration
                // bound on arenas this small
                assert!(violation, "{f} from {v}");
            }
        }
    }
}

#[test]
fn generated_plays_are_valid_and_prefix_closed() {
    let mut r = rng(15);
    for _ in 0..200 {
        let arena = random_arena(&mut r, 6, &ATOMS);
        let l = random_lasso_play(&mut r, &arena, 8);
        assert!(arena.is_lasso_play(&l));
        let unrolled: Vec<usize> = (0..l.span() + 3).map(|i| *l.at(i)).collect();
        for k in 1..=unrolled.len() {
            assert!(arena.is_play(&unrolled[..k]));
        }
        assert!(!arena.is_play(&[]));
    }
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::falsum()),
        "[a-z][a-z0-9_]{0,3}"
            .prop_filter("reserved", |s| s != "true" && s != "false")
            .prop_map(Formula::atom),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::rel),
            inner.clone().prop_map(Formula::globally),
            inner.clone().prop_map(Formula::eventually),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::until(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(f in formula_strategy()) {
        let text = f.to_string();
        prop_assert_eq!(parse(&text).unwrap(), f);
    }

    #[test]
    fn eliminating_innermost_lowers_depth(f in formula_strategy()) {
        prop_assume!(f.r_depth() >= 1);
        let inner = f.innermost_r_subformulas().unwrap();
        prop_assert!(inner.iter().all(|g| matches!(g, Formula::Rel(b) if b.is_r_free())));
        let map = inner.iter().enumerate().map(|(k, g)| (g.clone(), format!("x{k}"))).collect();
        prop_assert_eq!(f.substitute(&map).r_depth(), f.r_depth() - 1);
    }
}
