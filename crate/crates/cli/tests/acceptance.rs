//! Acceptance gate: one line per criterion, with its budget. Exits nonzero
//! if any criterion fails or overruns.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tml_cli::document::{self, Body, Input, RunDoc, SliceDoc, SliceKind, TraceDocument};
use tml_cli::{run_script, Session};
use tml_core::eval::eval;
use tml_core::gen::{Generator, Program};
use tml_core::parser::{parse_expr, parse_pattern, parse_type};
use tml_core::patterns::{matches_mod, Pattern, PatternEnv};
use tml_core::pretty::pretty_trace;
use tml_core::props::{self, Check};
use tml_core::security::*;
use tml_core::slicing::{disc_view, disclosure_slice, obf_view, witness};
use tml_core::typecheck::{check_env, elaborate};
use tml_core::{name, Env, Trace, Value};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    what: &'static str,
    /// Wall-clock budget in seconds.
    budget: f64,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, what: "golden sessions", budget: 1.0, run: goldens },
    Criterion { id: 2, what: "factorial trace shape", budget: 1.0, run: factorial_shape },
    Criterion { id: 3, what: "consistency, fidelity, determinacy, type safety", budget: 60.0, run: theorems },
    Criterion { id: 4, what: "extraction", budget: 60.0, run: extraction },
    Criterion { id: 5, what: "dependency", budget: 60.0, run: dependency },
    Criterion { id: 6, what: "pattern lattice laws", budget: 30.0, run: lattice },
    Criterion { id: 7, what: "slicing", budget: 120.0, run: slicing },
    Criterion { id: 8, what: "security framework", budget: 60.0, run: security },
    Criterion { id: 9, what: "full disclosure", budget: 60.0, run: full_disclosure },
    Criterion { id: 10, what: "serialization round trips", budget: 60.0, run: serialization },
];

const CORPUS: usize = 500;
const CORPUS_SEED: u64 = 0x7a11;

fn main() -> ExitCode {
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) if secs <= c.budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over budget")),
            Err(e) => ("FAIL", e),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] {:>2} {}: {detail} ({secs:.2} s, budget {} s)", c.id, c.what, c.budget);
    }
    println!("{} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1

const GOLDEN: &[(&str, &str, &[&str])] = &[
    (
        "map",
        include_str!("golden/map.tml"),
        &["val it = [2@{},2@{L},4@{}]", "val it = [2@{L1,L},2@{L2,L},4@{L3,L}]", "val it = [2@{L1+1},2@{L},4@{L3+1}]"],
    ),
    ("pairs", include_str!("golden/pairs.tml"), &["val it = [(5@L5,6),(3@L4,4),(1@L1,2)]"]),
    ("factorial", include_str!("golden/factorial.tml"), &["val it = 24@{L*(L-1)*(L-2)*(L-3)*1}"]),
    ("triples", include_str!("golden/triples.tml"), &["val it = [6@{L1,L2,L3},6@{L1,L2,L3}]"]),
];

fn goldens() -> Outcome {
    let mut lines = 0;
    for (file, script, expected) in GOLDEN {
        let (out, ok) = run_script(&mut Session::default(), script, false);
        ensure(ok, || format!("{file}: script failed\n{out}"))?;
        for want in *expected {
            ensure(out.lines().any(|l| l == *want), || format!("{file}: no line `{want}`"))?;
            lines += 1;
        }
    }
    Ok(format!("{lines} lines match exactly"))
}

// 2

fn elaborate_closed(src: &str, env: &Env) -> tml_core::Expr {
    elaborate(&check_env(env).unwrap(), &parse_expr(src).unwrap()).unwrap().0
}

fn factorial_shape() -> Outcome {
    let e = elaborate_closed("let f = fun f(x: int): int. if x = 0 then 1 else x * f (x - 1) in f 4", &Env::new());
    let (v, t) = eval(&Env::new(), &e).map_err(|e| e.to_string())?;
    ensure(v == Value::int(24), || format!("f 4 = {v}"))?;
    let apps = t.count(&|n| matches!(n, Trace::App(k, ..) if &*k.name == "f"));
    let thens = t.count(&|n| matches!(n, Trace::CaseL(m, ..) if m.from_if));
    let elses = t.count(&|n| matches!(n, Trace::CaseR(m, ..) if m.from_if));
    ensure((apps, elses, thens) == (5, 4, 1), || format!("{apps} applications, {elses} else, {thens} then"))?;
    Ok("5 applications, 4 else-branches, 1 then-branch".into())
}

// 3 to 5

/// The shared corpus: programs of depth 6 over ints 0..=3, each with two
/// random inputs and a generator for per-program choices.
fn corpus(mut check: impl FnMut(&Program, &Env, &Env, &mut ChaCha8Rng) -> Check) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let mut hits = 0;
    for i in 0..CORPUS {
        let prog = Generator::new(&mut rng).program(6).map_err(|e| e.to_string())?;
        let env = prog.random_env(&mut rng);
        let other = prog.random_env(&mut rng);
        let hit = check(&prog, &env, &other, &mut rng)
            .map_err(|m| format!("program {i}: {m}\n  {}", tml_core::pretty::pretty_expr(&prog.expr)))?;
        hits += hit as usize;
    }
    Ok(hits)
}

fn theorems() -> Outcome {
    let mut replays = 0;
    let checked = corpus(|p, g, h, _| {
        props::consistency(p, g)?;
        props::type_safety(p, g)?;
        props::fidelity(p, g, g)?;
        replays += props::fidelity(p, g, h)? as usize;
        let (_, t) = props::run(p, g)?;
        props::determinacy(g, &t)?;
        props::determinacy(h, &t)?;
        Ok(true)
    })?;
    Ok(format!("{checked} programs, {replays} replays on perturbed inputs"))
}

fn extraction() -> Outcome {
    let n = corpus(|p, g, _, _| props::extraction(p, g))?;
    ensure(n == CORPUS, || format!("only {n} programs exercised"))?;
    Ok(format!("{n} programs, four instances each"))
}

fn dependency() -> Outcome {
    let n = corpus(props::dependency)?;
    ensure(n >= 200, || format!("only {n} pairs where both runs succeed"))?;
    Ok(format!("{n} related pairs"))
}

// 6

fn lattice() -> Outcome {
    let r = props::pattern_laws(&[0, 1], 2)?;
    Ok(format!("{} patterns x {} values, {} joins, {} orderings", r.patterns, r.values, r.joins, r.orderings))
}

// 7

const MAP: &str = "let map = fun map(f: int -> int): int list -> int list.
    fun go(xs: int list): int list. case xs of { [] . [] ; h :: t . f h :: go t }
  in map f xs";

fn p(s: &str) -> Pattern {
    parse_pattern(s).unwrap()
}

fn frames(t: &Trace, fun: &str, complete: bool) -> usize {
    t.count(&|n| matches!(n, Trace::App(k, _, _, body) if &*k.name == fun && (!complete || body.holes() == 0)))
}

/// A list pattern ending in `roll(inl □)`.
fn spine(items: &[&str]) -> Pattern {
    let end = Pattern::Roll(Box::new(Pattern::Inl(Box::new(Pattern::Hole))));
    items.iter().rev().fold(end, |t, h| Pattern::cons(p(h), t))
}

fn worked_examples() -> Result<usize, String> {
    let mut n = 0;
    let mut check = |ok: bool, what: &str| {
        n += 1;
        ensure(ok, || format!("worked example: {what}"))
    };

    let env = Env::new().with("y", Value::int(7)).with("z", Value::int(1));
    let (v, t) = eval(&env, &elaborate_closed("let x = (y, z) in (snd x, fst x)", &env)).unwrap();
    let s = disc_view(&p("(1, _)"), &env, &t, &v).unwrap();
    check(pretty_trace(&s.trace) == "let x = (_, z) in (snd(x), _)", "swap disclosure trace")?;
    check(s.env == PatternEnv::singleton(name("z"), Pattern::int(1)), "swap disclosure input")?;
    let (out, s) = obf_view(&PatternEnv::singleton(name("z"), Pattern::int(1)), &env, &t, &v).unwrap();
    check(out == p("(1, _)"), "swap obfuscation output")?;
    check(pretty_trace(&s) == "let x = (_, z) in (snd(x), fst(x))", "swap obfuscation trace")?;

    let base = Env::new().with("y", Value::int(2));
    let (f, _) = eval(&base, &elaborate_closed("fun f(x: int): int. if x = y then y else x + 1", &base)).unwrap();
    let Value::Closure(k, _) = &f else { unreachable!() };
    let k = k.clone();
    let env = base.with("f", f.clone()).with("xs", Value::list([1, 2, 3].map(Value::int).to_vec()));
    let (v, t) = eval(&env, &elaborate_closed(MAP, &env)).unwrap();
    let f_y = Pattern::Closure(k.clone(), PatternEnv::singleton(name("y"), Pattern::int(2)));
    let some_cons = Pattern::Roll(Box::new(Pattern::Inr(Box::new(Pattern::Hole))));

    let s = disc_view(&p("[_, _, _]"), &env, &t, &v).unwrap();
    check(s.env == PatternEnv::singleton(name("xs"), spine(&["_", "_", "_"])), "map spine input")?;
    check(frames(&s.trace, "go", false) == 4 && frames(&s.trace, "f", false) == 0, "map spine frames")?;

    check(witness(&p("[]"), &v).unwrap() == some_cons, "witness of []")?;
    let s = disc_view(&p("[]"), &env, &t, &v).unwrap();
    check(s.env == PatternEnv::singleton(name("xs"), some_cons.clone()), "map [] input")?;
    check(frames(&s.trace, "go", false) == 1 && frames(&s.trace, "f", false) == 0, "map [] frames")?;

    let s = disc_view(&p("[2, _, _]"), &env, &t, &v).unwrap();
    check(s.env.get("f") == &f_y && s.env.get("xs") == &spine(&["1", "_", "_"]), "map head input")?;
    check(frames(&s.trace, "f", false) == 1 && frames(&s.trace, "f", true) == 1, "map head frames")?;

    check(witness(&p("[_, 3, _]"), &v).unwrap() == p("_ :: 2 :: _"), "witness of [_,3,_]")?;
    let s = disc_view(&p("[_, 3, _]"), &env, &t, &v).unwrap();
    check(s.env.get("xs") == &p("_ :: 2 :: _"), "map witness input")?;
    check(frames(&s.trace, "go", false) == 2 && frames(&s.trace, "f", true) == 1, "map witness frames")?;

    let hide_y: PatternEnv =
        [(name("f"), Pattern::Closure(k.clone(), PatternEnv::new())), (name("xs"), p("[1, 2, 3]"))].into_iter().collect();
    let (out, s) = obf_view(&hide_y, &env, &t, &v).unwrap();
    check(out == p("[_, _, _]") && frames(&s, "f", false) == 3 && frames(&s, "f", true) == 0, "map hiding y")?;

    let hide_f: PatternEnv = [(name("xs"), p("[1, 2, 3]")), (name("y"), Pattern::int(2))].into_iter().collect();
    let (out, s) = obf_view(&hide_f, &env, &t, &v).unwrap();
    check(out == p("[_, _, _]") && frames(&s, "go", false) == 4 && frames(&s, "f", false) == 0, "map hiding f")?;

    let partial: PatternEnv =
        [(name("f"), f_y), (name("xs"), p("_ :: _")), (name("y"), Pattern::int(2))].into_iter().collect();
    let (out, s) = obf_view(&partial, &env, &t, &v).unwrap();
    check(out == p("_ :: _") && frames(&s, "go", false) == 2 && frames(&s, "f", true) == 0, "map partial list")?;
    Ok(n)
}

/// Small generated programs whose universes over {0,1,2} are tractable.
fn small_programs(seed: u64, count: usize, depth: usize, max: usize) -> Vec<(Program, Vec<TmlTriple>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let prog = Generator::new(&mut rng).program(4).unwrap();
        match props::universe(&prog, &[0, 1, 2], depth) {
            Ok(u) if !u.is_empty() && u.len() <= max => out.push((prog, u)),
            _ => {}
        }
    }
    out
}

/// For `p ⊑ v` slicing to `S, ρ`: every triple of the universe whose input
/// is `≡_ρ γ` and whose trace lies above `S` has output `≡_p v`.
fn disclosure_implication(u: &[TmlTriple], tr: &TmlTriple, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let pat = props::random_prefix(rng, &tr.value, true);
    let s = disclosure_slice(&pat, &tr.trace).map_err(|e| e.to_string())?;
    let mut related = 0;
    for other in u {
        if s.env.matches_mod(&tr.env, &other.env) && s.trace.leq(&other.trace) {
            related += 1;
            ensure(matches_mod(&pat, &tr.value, &other.value), || {
                format!("slice by {pat} relates outputs {} and {}", tr.value, other.value)
            })?;
        }
    }
    Ok(related)
}

fn slicing() -> Outcome {
    let examples = worked_examples()?;

    let mut witnesses = 0;
    for src in ["int", "int * int", "int + int", "(int + int) * int", "int list"] {
        let ty = parse_type(src).unwrap();
        let values = enumerate_values(&ty, &[0, 1, 2], 3).map_err(|e| e.to_string())?;
        for pat in props::patterns_of_type(&ty, &[0, 1, 2], 3, false) {
            for v in &values {
                witnesses += props::witness_lemma(&pat, v, &values)? as usize;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let programs = small_programs(72, 50, 3, 3000);
    let (mut related, mut stable, mut positive) = (0, 0, 0);
    for (prog, u) in &programs {
        for _ in 0..3 {
            let tr = &u[rng.gen_range(0..u.len())];
            related += disclosure_implication(u, tr, &mut rng)?;
            let other = &u[rng.gen_range(0..u.len())];
            stable += props::obfuscation_stable(prog, &tr.env, &other.env, &mut rng)? as usize;
            positive += props::positive_obfuscation(u, tr, &mut rng)? as usize;
        }
    }
    ensure(positive > 0 && stable == 3 * programs.len(), || format!("{stable} stable, {positive} positive"))?;
    Ok(format!(
        "{examples} worked-example checks, {witnesses} witness cases, {} programs: \
         {related} related triples, {stable} stability and {positive} positive obfuscation checks",
        programs.len()
    ))
}

// 8

fn count(s: &str, c: char) -> usize {
    s.chars().filter(|&x| x == c).count()
}

fn security() -> Outcome {
    let all = strings(&['a', 'b'], 8);
    let no_abab = |s: &String| !s.contains("abab");
    let delete_alternates = |s: &String| s.chars().step_by(2).collect::<String>();
    let no_repeat = |o: &String| !o.contains("aa") && !o.contains("bb");
    ensure(check_positive_disclosure(&all, delete_alternates, no_abab, no_repeat), || "delete-alternates: not positive".into())?;
    ensure(!check_negative_disclosure(&all, delete_alternates, no_abab, no_repeat), || "delete-alternates: negative".into())?;

    let odd_a = |s: &String| count(s, 'a') % 2 == 1;
    let a_to_b = |s: &String| s.replace('a', "b");
    ensure(check_positive_obfuscation(&all, a_to_b, odd_a), || "a-to-b: not positive".into())?;
    ensure(!check_negative_obfuscation(&all, a_to_b, odd_a), || "a-to-b: negative".into())?;

    let nonempty = &all[1..];
    let even_b = |s: &String| count(s, 'b').is_multiple_of(2);
    let t1 = |s: &String| "a".repeat(s.len());
    let t2 = |s: &String| s.clone();
    let t3 = |s: &String| count(s, 'b').min(2);
    ensure(check_obfuscation(nonempty, t1, even_b), || "even-#b not obfuscated by T1".into())?;
    ensure(check_disclosure(nonempty, t2, even_b), || "even-#b not disclosed by T2".into())?;
    ensure(!check_obfuscation(nonempty, t3, even_b) && !check_disclosure(nonempty, t3, even_b), || {
        "T3 decides even-#b".into()
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u: Vec<usize> = (0..16).collect();
    for i in 0..1000 {
        let table: Vec<u8> = (0..16).map(|_| rng.gen_range(0..4)).collect();
        let bits: u16 = rng.gen();
        let view = |t: &usize| table[*t];
        let query = |t: &usize| bits >> t & 1 == 1;
        let q = |o: &u8| u.iter().any(|t| view(t) == *o && query(t));
        let both = check_positive_disclosure(&u, view, query, q) && check_negative_disclosure(&u, view, query, q);
        ensure(check_disclosure(&u, view, query) == both, || format!("instance {i}: disclosure"))?;
        let pn = check_positive_obfuscation(&u, view, query) && check_negative_obfuscation(&u, view, query);
        ensure(check_obfuscation(&u, view, query) == pn, || format!("instance {i}: obfuscation"))?;
    }
    Ok(format!("{} strings, 1000 random instances", all.len()))
}

// 9

fn full_disclosure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let programs = small_programs(90, 20, 2, 300);
    let mut patterns = 0;
    for (_, u) in &programs {
        for _ in 0..3 {
            let tr = &u[rng.gen_range(0..u.len())];
            props::full_disclosure(u, &props::random_prefix(&mut rng, &tr.value, false))?;
            patterns += 1;
        }
    }
    Ok(format!("{} programs, {patterns} patterns, no violations", programs.len()))
}

// 10

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut runs, mut slices, mut bytes) = (0, 0, 0);
    while runs + slices < 1000 {
        let prog = Generator::new(&mut rng).program(6).map_err(|e| e.to_string())?;
        let env = prog.random_env(&mut rng);
        let (value, trace) = props::run(&prog, &env)?;
        let doc = if rng.gen_bool(0.5) {
            runs += 1;
            let inputs = prog
                .inputs
                .iter()
                .map(|(x, ty)| Input { name: x.clone(), ty: ty.clone(), value: env.get(x).unwrap().clone(), marks: vec![] })
                .collect();
            TraceDocument::run(RunDoc { inputs, trace, value, ty: prog.ty.clone() })
        } else if rng.gen_bool(0.5) {
            slices += 1;
            let output = props::random_prefix(&mut rng, &value, true);
            let s = disclosure_slice(&output, &trace).map_err(|e| e.to_string())?;
            TraceDocument::slice(SliceDoc { kind: SliceKind::Disclosure, env: s.env, trace: s.trace, output })
        } else {
            slices += 1;
            let rho = props::random_prefix_env(&mut rng, &env, false);
            let (output, trace) = obf_view(&rho, &env, &trace, &value).map_err(|e| e.to_string())?;
            TraceDocument::slice(SliceDoc { kind: SliceKind::Obfuscation, env: rho, trace, output })
        };
        let first = document::serialize(&doc);
        let back = document::deserialize(&first).map_err(|e| e.to_string())?;
        ensure(back == doc, || "document changed in a round trip".into())?;
        ensure(document::serialize(&back) == first, || "bytes changed in a round trip".into())?;
        if let Body::Run(r) = &back.body {
            ensure(r.env() == env, || "inputs changed".into())?;
        }
        bytes += first.len();
    }
    Ok(format!("{runs} runs and {slices} slices, {bytes} bytes"))
}
