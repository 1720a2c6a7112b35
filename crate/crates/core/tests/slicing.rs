use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tml_core::eval::eval;
use tml_core::gen::Generator;
use tml_core::parser::{parse_expr, parse_pattern};
use tml_core::patterns::{Pattern, PatternEnv};
use tml_core::pretty::pretty_trace;
use tml_core::props;
use tml_core::slicing::{disc_view, disclosure_slice, obf_view, witness};
use tml_core::typecheck::{check_env, elaborate};
use tml_core::{name, Env, Trace, Value};

const MAP: &str = "let map = fun map(f: int -> int): int list -> int list.
    fun go(xs: int list): int list. case xs of { [] . [] ; h :: t . f h :: go t }
  in map f xs";

fn run(src: &str, env: &Env) -> (Value, Trace) {
    let (e, _) = elaborate(&check_env(env).unwrap(), &parse_expr(src).unwrap()).unwrap();
    eval(env, &e).unwrap()
}

fn map_env() -> Env {
    let base = Env::new().with("y", Value::int(2));
    let (f, _) = run("fun f(x: int): int. if x = y then y else x + 1", &base);
    base.with("f", f).with("xs", Value::list(vec![Value::int(1), Value::int(2), Value::int(3)]))
}

fn f_closure(env: &Env) -> std::sync::Arc<tml_core::FunDef> {
    match env.get("f") {
        Some(Value::Closure(k, _)) => k.clone(),
        _ => unreachable!(),
    }
}

fn frames(t: &Trace, fun: &str) -> usize {
    t.count(&|n| matches!(n, Trace::App(k, ..) if &*k.name == fun))
}

fn complete_frames(t: &Trace, fun: &str) -> usize {
    t.count(&|n| matches!(n, Trace::App(k, _, _, body) if &*k.name == fun && body.holes() == 0))
}

fn p(s: &str) -> Pattern {
    parse_pattern(s).unwrap()
}

/// A list pattern whose final `[]` was only inspected as `inl`, never
/// down to its unit payload.
fn spine(items: &[&str]) -> Pattern {
    let end = Pattern::Roll(Box::new(Pattern::Inl(Box::new(Pattern::Hole))));
    items.iter().rev().fold(end, |t, h| Pattern::cons(p(h), t))
}

/// `□::□` as produced by slicing: a cons cell whose contents were not needed.
fn some_cons() -> Pattern {
    Pattern::Roll(Box::new(Pattern::Inr(Box::new(Pattern::Hole))))
}

#[test]
fn swap_pair_slices() {
    let env = Env::new().with("y", Value::int(7)).with("z", Value::int(1));
    let (v, t) = run("let x = (y, z) in (snd x, fst x)", &env);
    let s = disc_view(&p("(1, _)"), &env, &t, &v).unwrap();
    assert_eq!(pretty_trace(&s.trace), "let x = (_, z) in (snd(x), _)");
    assert_eq!(s.env, PatternEnv::singleton(name("z"), Pattern::int(1)));

    let (out, s) = obf_view(&PatternEnv::singleton(name("z"), Pattern::int(1)), &env, &t, &v).unwrap();
    assert_eq!(out, p("(1, _)"));
    assert_eq!(pretty_trace(&s), "let x = (_, z) in (snd(x), fst(x))");
}

#[test]
fn map_run() {
    let (v, _) = run(MAP, &map_env());
    assert_eq!(v, Value::list(vec![Value::int(2), Value::int(2), Value::int(4)]));
}

#[test]
fn map_disclosure_of_the_spine() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    let s = disc_view(&p("[_, _, _]"), &env, &t, &v).unwrap();
    assert_eq!(s.env, PatternEnv::singleton(name("xs"), spine(&["_", "_", "_"])));
    // The initial call and three recursive ones; every call of f is cut.
    assert_eq!(frames(&s.trace, "go"), 4);
    assert_eq!(frames(&s.trace, "f"), 0);
}

#[test]
fn map_disclosure_of_the_empty_list() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    assert_eq!(witness(&p("[]"), &v).unwrap(), some_cons());
    let s = disc_view(&p("[]"), &env, &t, &v).unwrap();
    assert_eq!(s.env, PatternEnv::singleton(name("xs"), some_cons()));
    assert_eq!(frames(&s.trace, "go"), 1);
    assert_eq!(frames(&s.trace, "f"), 0);
}

#[test]
fn map_disclosure_of_the_first_element() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    let s = disc_view(&p("[2, _, _]"), &env, &t, &v).unwrap();
    let f = Pattern::Closure(f_closure(&env), PatternEnv::singleton(name("y"), Pattern::int(2)));
    assert_eq!(s.env.get("f"), &f);
    assert_eq!(s.env.get("xs"), &spine(&["1", "_", "_"]));
    assert_eq!(s.env.get("y"), &Pattern::Hole);
    assert_eq!(frames(&s.trace, "go"), 4);
    assert_eq!(complete_frames(&s.trace, "f"), 1);
    assert_eq!(frames(&s.trace, "f"), 1);
}

#[test]
fn map_disclosure_through_a_witness() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    // [_,3,_] does not match [2,2,4]; the witness is the mismatching 2.
    assert_eq!(witness(&p("[_, 3, _]"), &v).unwrap(), p("_ :: 2 :: _"));
    let s = disc_view(&p("[_, 3, _]"), &env, &t, &v).unwrap();
    assert_eq!(s.env.get("xs"), &p("_ :: 2 :: _"));
    assert!(matches!(s.env.get("f"), Pattern::Closure(..)));
    assert_eq!(frames(&s.trace, "go"), 2);
    assert_eq!(complete_frames(&s.trace, "f"), 1);
}

#[test]
fn map_obfuscation_hiding_y() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    let rho: PatternEnv = [
        (name("f"), Pattern::Closure(f_closure(&env), PatternEnv::new())),
        (name("xs"), p("[1, 2, 3]")),
    ]
    .into_iter()
    .collect();
    let (out, s) = obf_view(&rho, &env, &t, &v).unwrap();
    assert_eq!(out, p("[_, _, _]"));
    assert_eq!(frames(&s, "go"), 4);
    // Three calls of f whose bodies, starting with the test x = y, are gone.
    assert_eq!(frames(&s, "f"), 3);
    assert_eq!(complete_frames(&s, "f"), 0);
    assert!(!pretty_trace(&s).contains("x = y"));
}

#[test]
fn map_obfuscation_hiding_f() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    let rho: PatternEnv = [(name("xs"), p("[1, 2, 3]")), (name("y"), Pattern::int(2))].into_iter().collect();
    let (out, s) = obf_view(&rho, &env, &t, &v).unwrap();
    assert_eq!(out, p("[_, _, _]"));
    assert_eq!(frames(&s, "go"), 4);
    assert_eq!(frames(&s, "f"), 0);
}

#[test]
fn map_obfuscation_of_a_partial_list() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    let f = Pattern::Closure(f_closure(&env), PatternEnv::singleton(name("y"), Pattern::int(2)));
    let rho: PatternEnv =
        [(name("f"), f), (name("xs"), p("_ :: _")), (name("y"), Pattern::int(2))].into_iter().collect();
    let (out, s) = obf_view(&rho, &env, &t, &v).unwrap();
    assert_eq!(out, p("_ :: _"));
    assert_eq!(frames(&s, "go"), 2);
    assert_eq!(frames(&s, "f"), 1);
    assert_eq!(complete_frames(&s, "f"), 0);
}

#[test]
fn hole_pattern_slices_to_nothing() {
    let env = map_env();
    let (_, t) = run(MAP, &env);
    let s = disclosure_slice(&Pattern::Hole, &t).unwrap();
    assert_eq!(s.trace, Trace::Hole);
    assert!(s.env.is_empty());
}

#[test]
fn full_pattern_keeps_everything_exercised() {
    let env = map_env();
    let (v, t) = run(MAP, &env);
    let s = disc_view(&Pattern::from_value(&v), &env, &t, &v).unwrap();
    assert!(s.trace.leq(&t));
    assert_eq!(s.env.get("xs"), &spine(&["1", "2", "3"]));
}

#[test]
fn generated_disclosure_and_obfuscation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut disc, mut obf) = (0, 0);
    for _ in 0..150 {
        let prog = Generator::new(&mut rng).program(6).unwrap();
        let env = prog.random_env(&mut rng);
        let other = prog.random_env(&mut rng);
        disc += props::disclosure_correct(&prog, &env, &other, &mut rng).unwrap() as usize;
        obf += props::obfuscation_stable(&prog, &env, &other, &mut rng).unwrap() as usize;
    }
    assert!(disc > 100, "only {disc} disclosure checks were exercised");
    assert_eq!(obf, 150);
}

#[test]
fn witness_lemma_on_small_types() {
    let ints = [0, 1, 2];
    let types = ["int", "int * int", "int + int", "(int + int) * int", "int list"];
    for src in types {
        let ty = tml_core::parser::parse_type(src).unwrap();
        let values = tml_core::security::enumerate_values(&ty, &ints, 3).unwrap();
        let patterns = props::patterns_of_type(&ty, &ints, 3, false);
        let mut exercised = 0;
        for pat in &patterns {
            for v in &values {
                exercised += props::witness_lemma(pat, v, &values).unwrap() as usize;
            }
        }
        assert!(exercised > 0, "{src}");
    }
}

#[test]
fn full_disclosure_on_small_universes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 5 {
        let prog = Generator::new(&mut rng).program(4).unwrap();
        let Ok(universe) = props::universe(&prog, &[0, 1, 2], 2) else { continue };
        if universe.is_empty() || universe.len() > 300 {
            continue;
        }
        for tr in universe.iter().take(3) {
            let pat = props::random_prefix(&mut rng, &tr.value, false);
            props::full_disclosure(&universe, &pat).unwrap();
        }
        checked += 1;
    }
}

#[test]
fn positive_obfuscation_on_small_universes() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut programs = 0;
    while programs < 5 {
        let prog = Generator::new(&mut rng).program(4).unwrap();
        let Ok(universe) = props::universe(&prog, &[0, 1, 2], 3) else { continue };
        if universe.is_empty() || universe.len() > 3000 {
            continue;
        }
        let sources = props::universe(&prog, &[0, 1, 2], 2).unwrap();
        for tr in sources.iter().take(5) {
            props::positive_obfuscation(&universe, tr, &mut rng).unwrap();
        }
        programs += 1;
    }
}
