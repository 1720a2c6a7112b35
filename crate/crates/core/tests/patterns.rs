use proptest::prelude::*;

use tml_core::parser::{parse_pattern, parse_value};
use tml_core::patterns::{diamond_subst, join, matches_mod, restrict, Pattern};
use tml_core::props;

fn p(s: &str) -> Pattern {
    parse_pattern(s).unwrap()
}

#[test]
fn restriction_examples() {
    assert_eq!(restrict(&parse_value("(1, 2)").unwrap(), &p("(=, _)")).unwrap(), p("(1, _)"));
    assert_eq!(restrict(&parse_value("(1, 2)").unwrap(), &p("=")).unwrap(), p("(1, 2)"));
    assert!(restrict(&parse_value("(1, 2)").unwrap(), &p("(3, _)")).is_err());
}

#[test]
fn join_examples() {
    assert_eq!(join(&p("="), &p("(1, _)")).unwrap(), p("(1, =)"));
    assert_eq!(join(&p("(_, 2)"), &p("(1, _)")).unwrap(), p("(1, 2)"));
    assert_eq!(join(&p("_"), &p("[1, _]")).unwrap(), p("[1, _]"));
    assert!(join(&p("inl 1"), &p("inr _")).is_err());
    assert!(join(&p("1"), &p("2")).is_err());
}

#[test]
fn equivalence_modulo_examples() {
    let v = |s: &str| parse_value(s).unwrap();
    assert!(matches_mod(&p("(1, _)"), &v("(1, 5)"), &v("(1, 7)")));
    assert!(!matches_mod(&p("(1, =)"), &v("(1, 5)"), &v("(1, 7)")));
    assert!(!matches_mod(&p("(1, _)"), &v("(2, 5)"), &v("(2, 5)")));
    assert_eq!(diamond_subst(&p("(_, (=, _))")), p("(=, (=, =))"));
}

#[test]
fn lattice_laws_depth_two() {
    let report = props::pattern_laws(&[0, 1], 2).unwrap();
    assert!(report.patterns > 500 && report.values > 100);
    assert!(report.joins > report.orderings && report.orderings > 0);
}

fn small() -> Vec<Pattern> {
    props::small_patterns(&[0, 1], 1)
}

proptest! {
    #[test]
    fn join_is_a_semilattice(i in 0usize..1000, j in 0usize..1000, k in 0usize..1000) {
        let ps = small();
        let (a, b, c) = (&ps[i % ps.len()], &ps[j % ps.len()], &ps[k % ps.len()]);
        prop_assert_eq!(join(a, a).unwrap(), a.clone());
        let ab = join(a, b);
        prop_assert_eq!(ab.clone().ok(), join(b, a).ok());
        if let Ok(ab) = ab {
            prop_assert!(a.leq(&ab) && b.leq(&ab));
            let l = join(&ab, c).ok();
            let r = join(b, c).ok().and_then(|bc| join(a, &bc).ok());
            prop_assert_eq!(l, r);
        }
        prop_assert_eq!(a.leq(b), join(a, b).ok().as_ref() == Some(b));
    }

    #[test]
    fn restriction_is_below_and_characterises(i in 0usize..1000, j in 0usize..1000) {
        let vs = props::small_values(&[0, 1], 1);
        let ps = small();
        let (v, q) = (&vs[i % vs.len()], &ps[j % ps.len()]);
        if q.leq_value(v) {
            let r = restrict(v, q).unwrap();
            prop_assert!(r.leq_value(v));
            prop_assert!(r.is_diamond_free());
            for w in &vs {
                prop_assert_eq!(matches_mod(q, v, w), r.leq_value(w));
            }
        }
    }
}
