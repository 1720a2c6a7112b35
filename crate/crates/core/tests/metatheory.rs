use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tml_core::gen::Generator;
use tml_core::props;

/// Run `check` on `n` generated programs, each with two random inputs, and
/// return how many instances were exercised.
fn corpus(seed: u64, n: usize, mut check: impl FnMut(&tml_core::gen::Program, &tml_core::Env, &tml_core::Env, &mut ChaCha8Rng) -> props::Check) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exercised = 0;
    for i in 0..n {
        let prog = Generator::new(&mut rng).program(6).unwrap();
        let env = prog.random_env(&mut rng);
        let other = prog.random_env(&mut rng);
        match check(&prog, &env, &other, &mut rng) {
            Ok(hit) => exercised += hit as usize,
            Err(msg) => panic!("program {i}: {msg}\n{}", tml_core::pretty::pretty_expr(&prog.expr)),
        }
    }
    exercised
}

#[test]
fn consistency() {
    assert_eq!(corpus(1, 300, |p, g, _, _| props::consistency(p, g)), 300);
}

#[test]
fn fidelity() {
    let hits = corpus(2, 300, |p, g, h, _| props::fidelity(p, g, h));
    // Traces are specific enough that replay often fails on other inputs.
    assert!(hits >= 30, "{hits}");
}

#[test]
fn fidelity_on_own_input() {
    assert_eq!(corpus(3, 100, |p, g, _, _| props::fidelity(p, g, g)), 100);
}

#[test]
fn determinacy() {
    let hits = corpus(4, 200, |p, g, h, _| {
        let (_, t) = props::run(p, g)?;
        props::determinacy(g, &t)?;
        props::determinacy(h, &t).map(|_| true)
    });
    assert_eq!(hits, 200);
}

#[test]
fn type_safety() {
    assert_eq!(corpus(5, 300, |p, g, _, _| props::type_safety(p, g)), 300);
}

#[test]
fn extraction() {
    assert_eq!(corpus(6, 300, |p, g, _, _| props::extraction(p, g)), 300);
}

#[test]
fn dependency() {
    let hits = corpus(7, 300, props::dependency);
    assert!(hits >= 200, "{hits}");
}
