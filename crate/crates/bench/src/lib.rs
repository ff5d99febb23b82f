//! Seeded workloads shared by the benches under `benches/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dpl_core::generate::{random_formula, FormulaBounds};
use dpl_core::linarith::{Constraint, LinearSystem, LinearTerm};
use dpl_core::rational::rat;
use dpl_core::Formula;

pub fn formulas(seed: u64, n: usize, bounds: &FormulaBounds) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_formula(&mut rng, bounds)).collect()
}

/// Random systems over `vars` variables with `rows` constraints each.
pub fn systems(seed: u64, n: usize, vars: usize, rows: usize) -> Vec<LinearSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut sys = LinearSystem::new(vars);
            for _ in 0..rows {
                let mut t = LinearTerm::constant(rat(rng.random_range(-3..=3), rng.random_range(1..=4)));
                for v in 0..vars {
                    t = t.with(v, rat(rng.random_range(-3..=3), rng.random_range(1..=4)));
                }
                sys.push(if rng.random_bool(0.3) { Constraint::gt(t) } else { Constraint::ge(t) });
            }
            sys
        })
        .collect()
}
