//! Axiom schemes, Hilbert derivation checking and semantic derivability.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::decide::Decider;
use crate::rational::Rational;
use crate::syntax::{enum_formula_big, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Taut,
    Fa1,
    Fa2,
    Fa3,
    Fa4,
    Mono,
    Func,
    Conj,
}

impl Scheme {
    /// Recognition order.
    pub const ALL: [Scheme; 8] = [
        Scheme::Taut,
        Scheme::Fa1,
        Scheme::Fa2,
        Scheme::Fa3,
        Scheme::Fa4,
        Scheme::Mono,
        Scheme::Func,
        Scheme::Conj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Taut => "Taut",
            Scheme::Fa1 => "FA1",
            Scheme::Fa2 => "FA2",
            Scheme::Fa3 => "FA3",
            Scheme::Fa4 => "FA4",
            Scheme::Mono => "Mono",
            Scheme::Func => "Func",
            Scheme::Conj => "Conj",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown axiom scheme '{}'", s.trim()))
    }
}

/// Does `f` instantiate `scheme`, side conditions included?
pub fn is_instance(f: &Formula, scheme: Scheme) -> bool {
    match scheme {
        Scheme::Taut => is_tautology(f),
        Scheme::Fa1 => *f == Formula::l(Rational::zero(), Formula::bottom()),
        Scheme::Fa2 => (|| {
            let (ante, cons) = f.as_implies()?;
            let Formula::L(r, neg_phi) = ante else { return None };
            let Formula::Not(phi) = neg_phi.as_ref() else { return None };
            let Formula::Not(l_s) = cons else { return None };
            let Formula::L(s, phi2) = l_s.as_ref() else { return None };
            Some(phi == phi2 && r + s > Rational::one())
        })()
        .unwrap_or(false),
        Scheme::Fa3 => additivity(f, false),
        Scheme::Fa4 => additivity(f, true),
        Scheme::Mono => (|| {
            let (ante, cons) = f.as_implies()?;
            let Formula::L(one, imp) = ante else { return None };
            let (phi, psi) = imp.as_implies()?;
            let (l_phi, l_psi) = cons.as_implies()?;
            let (Formula::L(r, a), Formula::L(s, b)) = (l_phi, l_psi) else { return None };
            Some(one.is_one() && r == s && a.as_ref() == phi && b.as_ref() == psi)
        })()
        .unwrap_or(false),
        Scheme::Func => (|| {
            let (lhs, rhs) = f.as_iff()?;
            let Formula::Next(neg) = lhs else { return None };
            let Formula::Not(phi) = neg.as_ref() else { return None };
            let Formula::Not(next) = rhs else { return None };
            let Formula::Next(phi2) = next.as_ref() else { return None };
            Some(phi == phi2)
        })()
        .unwrap_or(false),
        Scheme::Conj => (|| {
            let (lhs, rhs) = f.as_iff()?;
            let Formula::Next(conj) = lhs else { return None };
            let Formula::And(phi, psi) = conj.as_ref() else { return None };
            let Formula::And(a, b) = rhs else { return None };
            let (Formula::Next(a), Formula::Next(b)) = (a.as_ref(), b.as_ref()) else { return None };
            Some(a == phi && b == psi)
        })()
        .unwrap_or(false),
    }
}

/// FA3 (`negated = false`) and FA4 (`negated = true`).
fn additivity(f: &Formula, negated: bool) -> bool {
    let strip = |g: &Formula| -> Option<Formula> {
        if negated {
            match g {
                Formula::Not(inner) => Some(inner.as_ref().clone()),
                _ => None,
            }
        } else {
            Some(g.clone())
        }
    };
    (|| {
        let (ante, cons) = f.as_implies()?;
        let Formula::And(left, right) = ante else { return None };
        let (left, right, cons) = (strip(left)?, strip(right)?, strip(cons)?);
        let Formula::L(r, both) = left else { return None };
        let Formula::L(s, differ) = right else { return None };
        let Formula::L(t, phi) = cons else { return None };
        let Formula::And(phi1, psi1) = both.as_ref() else { return None };
        let Formula::And(phi2, neg_psi) = differ.as_ref() else { return None };
        let Formula::Not(psi2) = neg_psi.as_ref() else { return None };
        let sum = &r + &s;
        Some(
            phi1 == phi2
                && phi1.as_ref() == phi.as_ref()
                && psi1 == psi2
                && sum <= Rational::one()
                && t == sum,
        )
    })()
    .unwrap_or(false)
}

/// Truth table over the maximal subformulas that are not `¬` or `∧`.
pub fn is_tautology(f: &Formula) -> bool {
    fn atoms<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::Not(g) => atoms(g, out),
            Formula::And(a, b) => {
                atoms(a, out);
                atoms(b, out);
            }
            _ => {
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
    }
    fn eval(f: &Formula, table: &HashMap<&Formula, bool>) -> bool {
        match f {
            Formula::Not(g) => !eval(g, table),
            Formula::And(a, b) => eval(a, table) && eval(b, table),
            _ => table[f],
        }
    }
    fn abstracted(f: &Formula, list: &[&Formula]) -> Formula {
        match f {
            Formula::Not(g) => Formula::not(abstracted(g, list)),
            Formula::And(a, b) => Formula::and(abstracted(a, list), abstracted(b, list)),
            _ => Formula::Prop(list.iter().position(|a| *a == f).expect("collected") as u32),
        }
    }
    let mut list = Vec::new();
    atoms(f, &mut list);
    if list.len() > 16 {
        // same question, answered by the propositional tableau
        return Decider::new().is_valid(&abstracted(f, &list));
    }
    (0u64..1 << list.len()).all(|bits| {
        let table = list.iter().enumerate().map(|(i, a)| (*a, bits >> i & 1 == 1)).collect();
        eval(f, &table)
    })
}

/// The first scheme `f` instantiates.
pub fn axiom_instance(f: &Formula) -> Option<Scheme> {
    Scheme::ALL.into_iter().find(|s| is_instance(f, *s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Justification {
    Axiom(Scheme),
    Mp(usize, usize),
    NecL1(usize),
    NecNext(usize),
    Hypothesis,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(s) => write!(f, "axiom:{s}"),
            Justification::Mp(i, j) => write!(f, "mp:{i},{j}"),
            Justification::NecL1(i) => write!(f, "nec_l1:{i}"),
            Justification::NecNext(i) => write!(f, "nec_next:{i}"),
            Justification::Hypothesis => f.write_str("hyp"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Theorem,
    FromHypotheses(Vec<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub steps: Vec<(Formula, Justification)>,
    pub mode: Mode,
}

impl Derivation {
    pub fn conclusion(&self) -> Option<&Formula> {
        self.steps.last().map(|(f, _)| f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step} rejected: {reason}")]
pub struct Rejection {
    pub step: usize,
    pub reason: String,
}

/// Accepts the derivation or reports the first step that fails.
pub fn check_derivation(d: &Derivation) -> Result<(), Rejection> {
    if d.steps.is_empty() {
        return Err(Rejection { step: 0, reason: "empty derivation".into() });
    }
    let hypotheses = match &d.mode {
        Mode::Theorem => None,
        Mode::FromHypotheses(gamma) => Some(gamma),
    };
    for (k, (f, just)) in d.steps.iter().enumerate() {
        let reject = |reason: String| Err(Rejection { step: k, reason });
        let earlier = |i: usize| -> Result<&Formula, Rejection> {
            if i < k {
                Ok(&d.steps[i].0)
            } else {
                Err(Rejection { step: k, reason: format!("step {i} does not precede step {k}") })
            }
        };
        match just {
            Justification::Axiom(s) => {
                if !is_instance(f, *s) {
                    return reject(format!("axiom mismatch: not an instance of {s}"));
                }
            }
            Justification::Mp(i, j) => {
                let (imp, premise) = (earlier(*i)?, earlier(*j)?);
                let Some((ante, cons)) = imp.as_implies() else {
                    return reject(format!("step {i} is not an implication"));
                };
                if ante != premise {
                    return reject(format!("step {j} is not the antecedent of step {i}"));
                }
                if cons != f {
                    return reject(format!("formula is not the consequent of step {i}"));
                }
            }
            Justification::NecL1(i) | Justification::NecNext(i) => {
                if hypotheses.is_some() {
                    return reject("necessitation is not allowed when deriving from hypotheses".into());
                }
                let inner = earlier(*i)?;
                let expected = match just {
                    Justification::NecL1(_) => Formula::l(Rational::one(), inner.clone()),
                    _ => Formula::next(inner.clone()),
                };
                if *f != expected {
                    return reject(format!("formula does not wrap step {i}"));
                }
            }
            Justification::Hypothesis => match hypotheses {
                None => return reject("hypotheses are not allowed in a theorem derivation".into()),
                Some(gamma) if !gamma.contains(f) => {
                    return reject("formula is not among the hypotheses".into())
                }
                Some(_) => {}
            },
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct DerivationParseError {
    pub line: usize,
    pub message: String,
}

/// Reads `formula ; justification` lines. Blank lines and lines starting
/// with `#` are skipped; step numbers count only the step lines, from 0.
pub fn parse_derivation(text: &str) -> Result<Vec<(Formula, Justification)>, DerivationParseError> {
    let mut steps = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| DerivationParseError { line: n + 1, message };
        let (formula, just) = line
            .rsplit_once(';')
            .ok_or_else(|| err("expected 'formula ; justification'".into()))?;
        let formula: Formula = formula.trim().parse().map_err(|e| err(format!("{e}")))?;
        let just = parse_justification(just.trim()).map_err(err)?;
        steps.push((formula, just));
    }
    Ok(steps)
}

fn parse_justification(text: &str) -> Result<Justification, String> {
    if text.eq_ignore_ascii_case("hyp") {
        return Ok(Justification::Hypothesis);
    }
    let (kind, args) = text
        .split_once(':')
        .ok_or_else(|| format!("unknown justification '{text}'"))?;
    let index = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("bad step number '{}'", s.trim()));
    match kind.trim().to_ascii_lowercase().as_str() {
        "axiom" => Ok(Justification::Axiom(args.parse()?)),
        "mp" => {
            let (i, j) = args.split_once(',').ok_or("mp needs two step numbers")?;
            Ok(Justification::Mp(index(i)?, index(j)?))
        }
        "nec_l1" => Ok(Justification::NecL1(index(args)?)),
        "nec_next" => Ok(Justification::NecNext(index(args)?)),
        other => Err(format!("unknown justification '{other}'")),
    }
}

/// `Γ ⊢ f`, decided as validity of `⋀Γ → f`.
pub fn derives(gamma: &[Formula], f: &Formula) -> bool {
    let mut decider = Decider::new();
    if gamma.is_empty() {
        decider.is_valid(f)
    } else {
        decider.derives(gamma, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComputableSets {
    pub is_theorem: bool,
    pub is_consistent: bool,
    pub derives_ij: bool,
}

/// Membership of `φ_i` in the theorems and the consistent formulas, and
/// whether `φ_i ⊢ φ_j`.
pub fn computable_sets(i: &BigUint, j: &BigUint) -> ComputableSets {
    let (fi, fj) = (enum_formula_big(i), enum_formula_big(j));
    let mut decider = Decider::new();
    ComputableSets {
        is_theorem: decider.is_valid(&fi),
        is_consistent: decider.is_sat(&fi),
        derives_ij: decider.derives(std::slice::from_ref(&fi), &fj),
    }
}
