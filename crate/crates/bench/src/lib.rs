//! Fixed, seeded workloads shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tml_core::gen::{Generator, Program};
use tml_core::{Env, Trace, Value};

/// A generated program with one input and its traced run.
pub struct Case {
    pub prog: Program,
    pub env: Env,
    pub value: Value,
    pub trace: Trace,
}

/// `n` programs of the given depth, the same for every call with `seed`.
pub fn corpus(seed: u64, n: usize, depth: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let prog = Generator::new(&mut rng).program(depth).expect("generated programs typecheck");
            let env = prog.random_env(&mut rng);
            let (value, trace) = tml_core::eval::eval(&env, &prog.expr).expect("generated programs terminate");
            Case { prog, env, value, trace }
        })
        .collect()
}
