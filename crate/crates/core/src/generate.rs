//! Seeded random formulas and axiom-scheme instances.

use num_bigint::BigInt;
use rand::Rng;

use crate::proof::Scheme;
use crate::rational::Rational;
use crate::syntax::{Formula, PropId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulaBounds {
    /// node count of the syntax tree
    pub max_size: usize,
    pub max_prob_depth: usize,
    pub max_dyn_depth: usize,
    pub max_denominator: u32,
    /// propositions are drawn from `p0 … p{props-1}`
    pub props: PropId,
}

impl Default for FormulaBounds {
    fn default() -> Self {
        FormulaBounds { max_size: 20, max_prob_depth: 2, max_dyn_depth: 3, max_denominator: 4, props: 3 }
    }
}

/// A uniformly drawn `a/b` with `1 ≤ b ≤ max_denominator`, `0 ≤ a ≤ b`.
pub fn random_index<R: Rng + ?Sized>(rng: &mut R, max_denominator: u32) -> Rational {
    let b = rng.random_range(1..=max_denominator.max(1));
    let a = rng.random_range(0..=b);
    Rational::new(BigInt::from(a), BigInt::from(b))
}

/// A random formula within `bounds`; the size is drawn first, then the
/// shape.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, bounds: &FormulaBounds) -> Formula {
    let size = rng.random_range(1..=bounds.max_size.max(1));
    grow(rng, bounds, size, bounds.max_prob_depth, bounds.max_dyn_depth)
}

fn grow<R: Rng + ?Sized>(rng: &mut R, b: &FormulaBounds, size: usize, pd: usize, dd: usize) -> Formula {
    if size <= 1 {
        return Formula::Prop(rng.random_range(0..b.props.max(1)));
    }
    let mut ops = vec![0u8];
    if size >= 3 {
        ops.extend([1, 1]);
    }
    if pd > 0 {
        ops.push(2);
    }
    if dd > 0 {
        ops.push(3);
    }
    match ops[rng.random_range(0..ops.len())] {
        0 => Formula::not(grow(rng, b, size - 1, pd, dd)),
        1 => {
            let left = rng.random_range(1..size - 1);
            let a = grow(rng, b, left, pd, dd);
            Formula::and(a, grow(rng, b, size - 1 - left, pd, dd))
        }
        2 => {
            let r = random_index(rng, b.max_denominator);
            Formula::l(r, grow(rng, b, size - 1, pd - 1, dd))
        }
        _ => Formula::next(grow(rng, b, size - 1, pd, dd - 1)),
    }
}

/// `(r, s)` on the denominator grid with `r + s > 1` (`above = true`) or
/// `r + s ≤ 1`.
fn index_pair<R: Rng + ?Sized>(rng: &mut R, max_denominator: u32, above: bool) -> (Rational, Rational) {
    let one = Rational::from_integer(BigInt::from(1));
    loop {
        let (r, s) = (random_index(rng, max_denominator), random_index(rng, max_denominator));
        if (&r + &s > one) == above {
            return (r, s);
        }
    }
}

/// A random instance of `scheme` whose metavariables are drawn within
/// `parts`; index side conditions hold by construction.
pub fn scheme_instance<R: Rng + ?Sized>(rng: &mut R, scheme: Scheme, parts: &FormulaBounds) -> Formula {
    let mut part = || random_formula(rng, parts);
    let (phi, psi) = (part(), part());
    match scheme {
        Scheme::Taut => match rng.random_range(0..4) {
            0 => Formula::or(phi.clone(), Formula::not(phi)),
            1 => Formula::implies(phi.clone(), Formula::implies(psi, phi)),
            2 => Formula::iff(Formula::not(Formula::not(phi.clone())), phi),
            _ => Formula::implies(Formula::and(phi.clone(), psi.clone()), Formula::and(psi, phi)),
        },
        Scheme::Fa1 => Formula::l(Rational::from_integer(BigInt::from(0)), Formula::bottom()),
        Scheme::Fa2 => {
            let (r, s) = index_pair(rng, parts.max_denominator, true);
            Formula::implies(Formula::l(r, Formula::not(phi.clone())), Formula::not(Formula::l(s, phi)))
        }
        Scheme::Fa3 | Scheme::Fa4 => {
            let (r, s) = index_pair(rng, parts.max_denominator, false);
            let both = Formula::l(r.clone(), Formula::and(phi.clone(), psi.clone()));
            let differ = Formula::l(s.clone(), Formula::and(phi.clone(), Formula::not(psi)));
            let total = Formula::l(r + s, phi);
            if scheme == Scheme::Fa3 {
                Formula::implies(Formula::and(both, differ), total)
            } else {
                Formula::implies(
                    Formula::and(Formula::not(both), Formula::not(differ)),
                    Formula::not(total),
                )
            }
        }
        Scheme::Mono => {
            let r = random_index(rng, parts.max_denominator);
            Formula::implies(
                Formula::l(Rational::from_integer(BigInt::from(1)), Formula::implies(phi.clone(), psi.clone())),
                Formula::implies(Formula::l(r.clone(), phi), Formula::l(r, psi)),
            )
        }
        Scheme::Func => Formula::iff(Formula::next(Formula::not(phi.clone())), Formula::not(Formula::next(phi))),
        Scheme::Conj => Formula::iff(
            Formula::next(Formula::and(phi.clone(), psi.clone())),
            Formula::and(Formula::next(phi), Formula::next(psi)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::is_instance;
    use crate::syntax::{dyn_depth, prob_depth};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn formulas_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = FormulaBounds::default();
        for _ in 0..500 {
            let f = random_formula(&mut rng, &b);
            assert!(f.size() <= b.max_size);
            assert!(prob_depth(&f) <= b.max_prob_depth);
            assert!(dyn_depth(&f) <= b.max_dyn_depth);
            assert!(f.props().iter().all(|p| *p < b.props));
            for r in f.indices() {
                assert!(r.denom() <= &BigInt::from(b.max_denominator));
            }
        }
    }

    #[test]
    fn instances_are_recognized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let parts = FormulaBounds { max_size: 5, max_prob_depth: 1, max_dyn_depth: 1, max_denominator: 6, props: 2 };
        for scheme in Scheme::ALL {
            for _ in 0..20 {
                let f = scheme_instance(&mut rng, scheme, &parts);
                assert!(is_instance(&f, scheme), "{scheme}: {f}");
            }
        }
    }
}
