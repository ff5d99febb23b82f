use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dpl_core::canonical::{lindenbaum, prokhorov, FiniteMeasure};
use dpl_core::decide::{self, push_next};
use dpl_core::generate::{random_formula, scheme_instance, FormulaBounds};
use dpl_core::linarith::{self, Constraint, LinearSystem, LinearTerm};
use dpl_core::models::{check, extension, random_model, validate, FiniteDmm};
use dpl_core::proof::{self, check_derivation, computable_sets, Derivation, Justification, Mode, Scheme};
use dpl_core::rational::{rat, Rational};
use dpl_core::syntax::{dyn_depth, enum_formula, formula_index, formula_index_u64, prob_depth, profile, render};
use dpl_core::Formula;

fn index() -> impl Strategy<Value = Rational> {
    (1i64..=6).prop_flat_map(|b| (0..=b).prop_map(move |a| rat(a, b)))
}

fn formula(props: u32, depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = (0..props).prop_map(Formula::Prop);
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (index(), inner.clone()).prop_map(|(r, f)| Formula::l(r, f)),
            inner.prop_map(Formula::next),
        ]
    })
}

/// Formulas inside the random-suite bounds, drawn from the crate's generator.
fn suite_formula() -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(|seed| random_formula(&mut ChaCha8Rng::seed_from_u64(seed), &FormulaBounds::default()))
}

fn model() -> impl Strategy<Value = FiniteDmm> {
    (any::<u64>(), 1usize..=4).prop_map(|(seed, n)| random_model(seed, n, 3, 4))
}

// depths by an explicit work stack rather than recursion
fn depths_iterative(f: &Formula) -> (usize, usize) {
    let (mut pd, mut dd) = (0, 0);
    let mut stack = vec![(f, 0usize, 0usize)];
    while let Some((g, p, d)) = stack.pop() {
        pd = pd.max(p);
        dd = dd.max(d);
        match g {
            Formula::Prop(_) => {}
            Formula::Not(h) => stack.push((h, p, d)),
            Formula::And(a, b) => {
                stack.push((a, p, d));
                stack.push((b, p, d));
            }
            Formula::L(_, h) => stack.push((h, p + 1, d)),
            Formula::Next(h) => stack.push((h, p, d + 1)),
        }
    }
    (pd, dd)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_parse_round_trip(f in formula(4, 5)) {
        prop_assert_eq!(render(&f).parse::<Formula>().unwrap(), f);
    }

    #[test]
    fn enumeration_inverts_indexing(f in formula(3, 3)) {
        prop_assume!(f.size() <= 10);
        let i = formula_index(&f);
        prop_assert_eq!(dpl_core::syntax::enum_formula_big(&i), f);
    }

    #[test]
    fn depths_match_iterative_walk(f in formula(3, 6)) {
        prop_assert_eq!((prob_depth(&f), dyn_depth(&f)), depths_iterative(&f));
    }

    #[test]
    fn accuracy_divides_extension(f in formula(2, 4), g in formula(2, 4)) {
        let q = profile(&f).accuracy;
        let q2 = profile(&Formula::and(f, g)).accuracy;
        prop_assert!(q2.is_multiple_of(&q));
    }
}

#[test]
fn indexing_inverts_enumeration() {
    for i in 0..=2000u64 {
        assert_eq!(formula_index_u64(&enum_formula(i)), Some(i), "index {i}");
    }
}

fn coefficient() -> impl Strategy<Value = Rational> {
    (-3i64..=3, 1i64..=4).prop_map(|(a, b)| rat(a, b))
}

fn system() -> impl Strategy<Value = LinearSystem> {
    (1usize..=5).prop_flat_map(|vars| {
        let row = (
            proptest::collection::vec(coefficient(), vars),
            coefficient(),
            0u8..3,
        );
        proptest::collection::vec(row, 1..=10).prop_map(move |rows| {
            let mut sys = LinearSystem::new(vars);
            for (coeffs, c, rel) in rows {
                let mut t = LinearTerm::constant(c);
                for (v, k) in coeffs.into_iter().enumerate() {
                    t = t.with(v, k);
                }
                sys.push(match rel {
                    0 => Constraint::eq(t),
                    1 => Constraint::gt(t),
                    _ => Constraint::ge(t),
                });
            }
            sys
        })
    })
}

// one variable: feasible iff the admissible interval is nonempty
fn one_variable_oracle(rows: &[(Rational, Rational, u8)]) -> bool {
    let (mut lo, mut lo_strict, mut hi, mut hi_strict): (Option<Rational>, bool, Option<Rational>, bool) =
        (None, false, None, false);
    for (a, c, rel) in rows {
        // a·x + c ⋈ 0
        if a.is_zero() {
            let ok = match rel {
                0 => c.is_zero(),
                1 => c > &Rational::zero(),
                _ => c >= &Rational::zero(),
            };
            if !ok {
                return false;
            }
            continue;
        }
        let b = -c / a;
        let strict = *rel == 1;
        let mut tighten_lo = |b: Rational, strict: bool| {
            if lo.as_ref().is_none_or(|l| b > *l || (b == *l && strict)) {
                lo_strict = strict;
                lo = Some(b);
            }
        };
        if *rel == 0 {
            tighten_lo(b.clone(), false);
        } else if a > &Rational::zero() {
            tighten_lo(b.clone(), strict);
        }
        let mut tighten_hi = |b: Rational, strict: bool| {
            if hi.as_ref().is_none_or(|h| b < *h || (b == *h && strict)) {
                hi_strict = strict;
                hi = Some(b);
            }
        };
        if *rel == 0 {
            tighten_hi(b, false);
        } else if a < &Rational::zero() {
            tighten_hi(b, strict);
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => l < h || (l == h && !lo_strict && !hi_strict),
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn feasibility_ignores_order(sys in system(), perm in any::<u64>()) {
        let expected = linarith::feasible(&sys);
        let mut order: Vec<usize> = (0..sys.num_vars()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(perm);
        for _ in 0..5 {
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
            prop_assert_eq!(linarith::feasible_with_order(&sys, &order), expected);
        }
    }

    #[test]
    fn solutions_substitute_exactly(sys in system()) {
        match linarith::solve(&sys) {
            Some(point) => prop_assert!(sys.satisfied_by(&point)),
            None => prop_assert!(!linarith::feasible(&sys)),
        }
    }

    #[test]
    fn one_variable_systems_match_interval_oracle(rows in proptest::collection::vec((coefficient(), coefficient(), 0u8..3), 1..8)) {
        let mut sys = LinearSystem::new(1);
        for (a, c, rel) in &rows {
            let t = LinearTerm::constant(c.clone()).with(0, a.clone());
            sys.push(match rel { 0 => Constraint::eq(t), 1 => Constraint::gt(t), _ => Constraint::ge(t) });
        }
        prop_assert_eq!(linarith::feasible(&sys), one_variable_oracle(&rows));
    }

    #[test]
    fn strict_and_reversed_weak_conflict(sys in system()) {
        let t = sys.constraints()[0].term.clone();
        let mut s = sys.clone();
        s.push(Constraint::gt(t.clone()));
        s.push(Constraint::ge(t.scale(&rat(-1, 1))));
        prop_assert!(!linarith::feasible(&s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sat_is_dual_to_validity(f in suite_formula()) {
        prop_assert_eq!(decide::sat(&f).is_sat(), !decide::valid(&Formula::not(f)));
    }

    #[test]
    fn witnesses_check(f in suite_formula()) {
        if let Some(w) = decide::witness(&f) {
            prop_assert!(validate(&w.model).is_empty());
            prop_assert!(check(&w.model, w.root, &f).unwrap());
        } else {
            prop_assert!(!decide::sat(&f).is_sat());
        }
    }

    #[test]
    fn push_next_keeps_status(f in suite_formula()) {
        prop_assert_eq!(decide::sat(&push_next(&f)).is_sat(), decide::sat(&f).is_sat());
    }

    #[test]
    fn rewrites_keep_status(f in suite_formula()) {
        let s = decide::sat(&f).is_sat();
        prop_assert_eq!(decide::sat(&Formula::and(f.clone(), Formula::top())).is_sat(), s);
        prop_assert_eq!(decide::sat(&Formula::not(Formula::not(f))).is_sat(), s);
    }

    #[test]
    fn l_is_monotone_in_its_index(f in formula(2, 3), r in index(), s in index()) {
        let (hi, lo) = if r >= s { (r, s) } else { (s, r) };
        prop_assert!(decide::valid(&Formula::implies(Formula::l(hi, f.clone()), Formula::l(lo, f))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn semantic_laws(m in model(), f in formula(3, 3), g in formula(3, 3)) {
        let all: BTreeSet<usize> = (0..m.len()).collect();
        let ef = extension(&m, &f).unwrap();
        let eg = extension(&m, &g).unwrap();
        prop_assert_eq!(extension(&m, &Formula::not(f.clone())).unwrap(), all.difference(&ef).cloned().collect::<BTreeSet<_>>());
        prop_assert_eq!(extension(&m, &Formula::and(f.clone(), g)).unwrap(), ef.intersection(&eg).cloned().collect::<BTreeSet<_>>());
        for w in 0..m.len() {
            prop_assert_eq!(check(&m, w, &Formula::next(f.clone())).unwrap(), check(&m, m.successor[w], &f).unwrap());
        }
    }

    #[test]
    fn l_monotone_in_models(m in model(), f in formula(3, 3), r in index(), s in index()) {
        let (hi, lo) = if r >= s { (r, s) } else { (s, r) };
        for w in 0..m.len() {
            if check(&m, w, &Formula::l(hi.clone(), f.clone())).unwrap() {
                prop_assert!(check(&m, w, &Formula::l(lo.clone(), f.clone())).unwrap());
            }
        }
    }

    #[test]
    fn model_json_round_trip(m in model()) {
        prop_assert_eq!(FiniteDmm::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn schemes_hold_in_models(seed in any::<u64>(), m in model()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parts = FormulaBounds { max_size: 6, max_prob_depth: 1, max_dyn_depth: 1, max_denominator: 6, props: 3 };
        for scheme in Scheme::ALL {
            let f = scheme_instance(&mut rng, scheme, &parts);
            for w in 0..m.len() {
                prop_assert!(check(&m, w, &f).unwrap(), "{} fails at {}: {}", scheme, w, f);
            }
        }
    }
}

/// A random derivation that mixes sound steps with noise; the checker has to
/// sort them out.
fn random_derivation(seed: u64) -> Derivation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = FormulaBounds { max_size: 5, max_prob_depth: 1, max_dyn_depth: 1, max_denominator: 4, props: 2 };
    let mut steps: Vec<(Formula, Justification)> = Vec::new();
    let len = rand::Rng::random_range(&mut rng, 1..6);
    while steps.len() < len {
        let n = steps.len();
        let choice = if n == 0 { 0 } else { rand::Rng::random_range(&mut rng, 0..5) };
        match choice {
            0 => {
                let s = Scheme::ALL[rand::Rng::random_range(&mut rng, 0..Scheme::ALL.len())];
                steps.push((scheme_instance(&mut rng, s, &parts), Justification::Axiom(s)));
            }
            1 => {
                // weakening: φ → (ψ → φ), then ψ → φ
                let i = rand::Rng::random_range(&mut rng, 0..n);
                let phi = steps[i].0.clone();
                let psi = random_formula(&mut rng, &parts);
                let k = Formula::implies(phi.clone(), Formula::implies(psi.clone(), phi.clone()));
                steps.push((k, Justification::Axiom(Scheme::Taut)));
                steps.push((Formula::implies(psi, phi), Justification::Mp(n, i)));
            }
            2 => {
                let i = rand::Rng::random_range(&mut rng, 0..n);
                steps.push((Formula::l(rat(1, 1), steps[i].0.clone()), Justification::NecL1(i)));
            }
            3 => {
                let i = rand::Rng::random_range(&mut rng, 0..n);
                steps.push((Formula::next(steps[i].0.clone()), Justification::NecNext(i)));
            }
            _ => {
                // noise: an unjustified formula claimed by MP
                let i = rand::Rng::random_range(&mut rng, 0..n);
                let j = rand::Rng::random_range(&mut rng, 0..n);
                steps.push((random_formula(&mut rng, &parts), Justification::Mp(i, j)));
            }
        }
    }
    Derivation { steps, mode: Mode::Theorem }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn accepted_derivations_end_in_theorems(seed in any::<u64>()) {
        let d = random_derivation(seed);
        if check_derivation(&d).is_ok() {
            prop_assert!(proof::derives(&[], d.conclusion().unwrap()));
        }
    }

    #[test]
    fn consistency_is_dual_to_theoremhood(i in 0u64..5000) {
        let neg = formula_index(&Formula::not(enum_formula(i)));
        let zero = BigUint::zero();
        prop_assert_eq!(
            computable_sets(&BigUint::from(i), &zero).is_consistent,
            !computable_sets(&neg, &zero).is_theorem
        );
    }
}

fn seed_formula() -> impl Strategy<Value = Formula> {
    any::<u64>().prop_filter_map("inconsistent seed", |s| {
        let bounds = FormulaBounds { max_size: 6, max_prob_depth: 1, max_dyn_depth: 1, max_denominator: 3, props: 2 };
        let f = random_formula(&mut ChaCha8Rng::seed_from_u64(s), &bounds);
        decide::sat(&f).is_sat().then_some(f)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn extending_never_flips_bits(seed in seed_formula()) {
        let short = lindenbaum(&seed, 12).unwrap();
        let mut grown = short.clone();
        grown.extend_to(30).unwrap();
        let long = lindenbaum(&seed, 30).unwrap();
        prop_assert_eq!(&long.decided()[..12], short.decided());
        prop_assert_eq!(grown.decided(), long.decided());
    }
}

/// Least `c` in the candidate set with `μ(A) ≤ ν(closed_c(A)) + c` for every
/// subset `A`, by listing subsets.
fn prokhorov_by_subsets(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Rational {
    let pts = &mu.points;
    let n = pts.len();
    let mass = |m: &FiniteMeasure, set: u32| -> Rational {
        (0..n).filter(|i| set & (1 << i) != 0).map(|i| m.weight(&pts[i])).sum()
    };
    let mut candidates: BTreeSet<Rational> = BTreeSet::new();
    for a in pts {
        for b in pts {
            candidates.insert(mu.distance(a, b).unwrap());
        }
    }
    for a in 0..(1u32 << n) {
        for b in 0..(1u32 << n) {
            candidates.insert(mass(mu, a) - mass(nu, b));
        }
    }
    let fits = |c: &Rational| {
        (0..(1u32 << n)).all(|a| {
            let closed = (0..n)
                .filter(|&x| (0..n).any(|y| a & (1 << y) != 0 && mu.distance(&pts[x], &pts[y]).unwrap() <= *c))
                .fold(0u32, |acc, x| acc | (1 << x));
            mass(mu, a) <= mass(nu, closed) + c
        })
    };
    candidates
        .into_iter()
        .filter(|c| *c >= Rational::zero() && *c <= Rational::one())
        .find(|c| fits(c))
        .unwrap_or_else(Rational::one)
}

fn measure_pair() -> impl Strategy<Value = (FiniteMeasure, FiniteMeasure)> {
    let d = (1i64..=10).prop_map(|k| rat(k, 8));
    (d.clone(), d.clone(), d, proptest::collection::vec(0i64..4, 6)).prop_filter_map(
        "metric triangle",
        |(ab, bc, ac, counts)| {
            if ac > &ab + &bc || ab > &ac + &bc || bc > &ab + &ac {
                return None;
            }
            let points: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
            let distance: BTreeMap<_, _> = [
                (("a".to_string(), "b".to_string()), ab),
                (("b".to_string(), "c".to_string()), bc),
                (("a".to_string(), "c".to_string()), ac),
            ]
            .into_iter()
            .collect();
            let build = |c: &[i64]| {
                let total: i64 = c.iter().sum();
                (total > 0).then(|| FiniteMeasure {
                    points: points.clone(),
                    weights: points.iter().cloned().zip(c.iter().map(|k| rat(*k, total))).collect(),
                    distance: distance.clone(),
                })
            };
            Some((build(&counts[..3])?, build(&counts[3..])?))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prokhorov_matches_subset_oracle((mu, nu) in measure_pair()) {
        prop_assert_eq!(prokhorov(&mu, &nu).unwrap(), prokhorov_by_subsets(&mu, &nu));
    }
}

#[test]
fn rationals_stay_exact() {
    // 1/3 + 1/3 + 1/3 summed as masses is exactly one
    let third = rat(1, 3);
    let total: Rational = [third.clone(), third.clone(), third].into_iter().sum();
    assert!(total.is_one());
    assert_eq!(*total.denom(), BigInt::one());
}
