use std::collections::HashMap;

use proptest::prelude::*;
use shastry_core::ratpoly::{Reducer, RewriteRule};
use shastry_core::{Coupling, Rat, RatPoly};

const VARS: [&str; 3] = ["x", "y", "z"];

fn rat() -> impl Strategy<Value = Rat> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| Rat::from((p, q)))
}

fn poly() -> impl Strategy<Value = RatPoly> {
    prop::collection::vec((prop::collection::vec(0u32..4, 3), rat()), 0..6)
        .prop_map(|terms| RatPoly::from_terms(&VARS, terms).unwrap())
}

// x^2 -> yz + 1 and y^3 -> z^2 - 2: coprime leads, so normal forms are unique
fn reducer() -> (Reducer, Vec<RatPoly>) {
    let gens: Vec<RatPoly> = ["x^2 - y*z - 1", "y^3 - z^2 + 2"].iter().map(|s| RatPoly::parse(s, &VARS).unwrap()).collect();
    let rules: Vec<RewriteRule> = gens.iter().map(|g| RewriteRule::from_generator(g).unwrap()).collect();
    (Reducer::new(&VARS, &rules).unwrap(), gens)
}

fn at(x: i64, y: i64, z: i64) -> HashMap<&'static str, Rat> {
    HashMap::from([("x", Rat::from(x)), ("y", Rat::from(y)), ("z", Rat::from(z))])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn eval_is_a_homomorphism(p in poly(), q in poly(), x in -4i64..4, y in -4i64..4, z in -4i64..4) {
        let a = at(x, y, z);
        let lhs = (&p * &q).eval(&a).unwrap();
        prop_assert_eq!(lhs, p.eval(&a).unwrap() * q.eval(&a).unwrap());
    }

    #[test]
    fn display_parses_back(p in poly()) {
        let back = RatPoly::parse(&p.to_string(), &VARS).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn reduction_is_idempotent_and_ideal_blind(p in poly(), q1 in poly(), q2 in poly()) {
        let (red, gens) = reducer();
        let nf = red.reduce(&p);
        prop_assert_eq!(red.reduce(&nf), nf.clone());
        let shifted = &(&p + &(&gens[0] * &q1)) + &(&gens[1] * &q2);
        prop_assert_eq!(red.reduce(&shifted), nf.clone());
        for (m, _) in nf.terms() {
            prop_assert!(m.0[0] < 2 && m.0[1] < 3);
        }
    }

    #[test]
    fn reduced_product_matches_product_then_reduce(p in poly(), q in poly()) {
        let (red, _) = reducer();
        let lhs = red.mul(&red.reduce(&p), &red.reduce(&q));
        prop_assert_eq!(lhs, red.reduce(&(&p * &q)));
    }

    #[test]
    fn coupling_round_trips(re in rat(), im in rat()) {
        let u = Coupling::complex(re, im);
        prop_assert_eq!(u.to_string().parse::<Coupling>().unwrap(), u);
    }
}

#[test]
fn non_coprime_rules_are_rejected() {
    let g: Vec<RewriteRule> = ["x^2 - z", "x*y - 1"]
        .iter()
        .map(|s| RewriteRule::from_generator(&RatPoly::parse(s, &VARS).unwrap()).unwrap())
        .collect();
    assert!(Reducer::new(&VARS, &g).is_err());
}

#[test]
fn coupling_forms() {
    for (s, re, im) in [("2", (2, 1), (0, 1)), ("3/2", (3, 2), (0, 1)), ("-0.5", (-1, 2), (0, 1)), ("1+i", (1, 1), (1, 1)), ("-2i", (0, 1), (-2, 1)), ("1/2-3/4i", (1, 2), (-3, 4))] {
        let u: Coupling = s.parse().unwrap();
        assert_eq!(u, Coupling::complex(Rat::from(re), Rat::from(im)), "{s}");
    }
    assert!("".parse::<Coupling>().is_err());
    assert!("abc".parse::<Coupling>().is_err());
}
