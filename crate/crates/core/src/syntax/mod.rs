//! Formulas: representation, concrete syntax, enumeration and depth analysis.

mod enumerate;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::rational::{self, Rational};

pub use enumerate::{enum_formula, enum_formula_big, formula_index, formula_index_u64, weight};
pub use parser::{parse, ParseError};

pub type PropId = u32;

/// A formula of the core grammar `p | ¬φ | φ ∧ φ | L_r φ | ◯φ`.
///
/// Derived connectives are built with the helper constructors, which expand
/// into the core grammar.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(PropId),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    L(Rational, Box<Formula>),
    Next(Box<Formula>),
}

impl Formula {
    pub fn prop(id: PropId) -> Formula {
        Formula::Prop(id)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// `L_r φ`. Panics when `r` is outside `[0, 1]`.
    pub fn l(r: Rational, f: Formula) -> Formula {
        assert!(rational::is_probability(&r), "L index {r} outside [0, 1]");
        Formula::L(r, Box::new(f))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    /// `◯ⁿ φ`.
    pub fn next_n(n: u32, mut f: Formula) -> Formula {
        for _ in 0..n {
            f = Formula::next(f);
        }
        f
    }

    /// `M_r φ := L_{1-r} ¬φ`.
    pub fn m(r: Rational, f: Formula) -> Formula {
        Formula::l(Rational::one() - r, Formula::not(f))
    }

    /// `a ∨ b := ¬(¬a ∧ ¬b)`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a → b := ¬(a ∧ ¬b)`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    /// `a ↔ b := (a → b) ∧ (b → a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// `⊥ := p0 ∧ ¬p0`.
    pub fn bottom() -> Formula {
        Formula::and(Formula::Prop(0), Formula::not(Formula::Prop(0)))
    }

    /// `⊤ := ¬⊥`.
    pub fn top() -> Formula {
        Formula::not(Formula::bottom())
    }

    /// Left-nested conjunction; `⊤` for an empty input.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut iter = items.into_iter();
        match iter.next() {
            None => Formula::top(),
            Some(first) => iter.fold(first, Formula::and),
        }
    }

    /// Splits `¬(a ∧ ¬b)` into `(a, b)`.
    pub fn as_implies(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Not(inner) => match inner.as_ref() {
                Formula::And(a, nb) => match nb.as_ref() {
                    Formula::Not(b) => Some((a, b)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// Splits `(a → b) ∧ (b → a)` into `(a, b)`.
    pub fn as_iff(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::And(l, r) => {
                let (a, b) = l.as_implies()?;
                let (b2, a2) = r.as_implies()?;
                (a == a2 && b == b2).then_some((a, b))
            }
            _ => None,
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Prop(_) => 1,
            Formula::Not(f) | Formula::L(_, f) | Formula::Next(f) => 1 + f.size(),
            Formula::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn props(&self) -> BTreeSet<PropId> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Prop(p) = f {
                out.insert(*p);
            }
        });
        out
    }

    /// All `L` indices, in pre-order.
    pub fn indices(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::L(r, _) = f {
                out.push(r.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, visitor: &mut impl FnMut(&'a Formula)) {
        visitor(self);
        match self {
            Formula::Prop(_) => {}
            Formula::Not(f) | Formula::L(_, f) | Formula::Next(f) => f.visit(visitor),
            Formula::And(a, b) => {
                a.visit(visitor);
                b.visit(visitor);
            }
        }
    }
}

/// Nesting depth of `L` operators.
pub fn prob_depth(f: &Formula) -> usize {
    match f {
        Formula::Prop(_) => 0,
        Formula::Not(g) | Formula::Next(g) => prob_depth(g),
        Formula::And(a, b) => prob_depth(a).max(prob_depth(b)),
        Formula::L(_, g) => prob_depth(g) + 1,
    }
}

/// Nesting depth of `◯` operators.
pub fn dyn_depth(f: &Formula) -> usize {
    match f {
        Formula::Prop(_) => 0,
        Formula::Not(g) | Formula::L(_, g) => dyn_depth(g),
        Formula::And(a, b) => dyn_depth(a).max(dyn_depth(b)),
        Formula::Next(g) => dyn_depth(g) + 1,
    }
}

/// The local language `L(P, q, p, d)` generated by a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageProfile {
    pub props: BTreeSet<PropId>,
    pub accuracy: BigInt,
    pub prob_depth_bound: usize,
    pub dyn_depth_bound: usize,
    /// `{m/q : 0 ≤ m ≤ q}`
    pub index_set: Vec<Rational>,
}

pub fn profile(f: &Formula) -> LanguageProfile {
    let indices = f.indices();
    let accuracy = rational::lcm_of_denominators(&indices);
    let q = accuracy.to_u64().expect("accuracy fits in u64");
    let index_set = (0..=q)
        .map(|m| Rational::new(BigInt::from(m), accuracy.clone()))
        .collect();
    LanguageProfile {
        props: f.props(),
        accuracy,
        prob_depth_bound: prob_depth(f),
        dyn_depth_bound: dyn_depth(f),
        index_set,
    }
}

// Binding strength for minimal parenthesisation: unary operators bind
// tighter than `&`, and `&` is left-associative.
impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Prop(p) => write!(out, "p{p}"),
            Formula::Not(g) => {
                out.write_str("!")?;
                write_unary_operand(out, g)
            }
            Formula::Next(g) => {
                out.write_str("X ")?;
                write_unary_operand(out, g)
            }
            Formula::L(r, g) => {
                write!(out, "L[{}] ", rational::display(r))?;
                write_unary_operand(out, g)
            }
            Formula::And(a, b) => {
                write!(out, "{a} & ")?;
                if matches!(b.as_ref(), Formula::And(..)) {
                    write!(out, "({b})")
                } else {
                    write!(out, "{b}")
                }
            }
        }
    }
}

fn write_unary_operand(out: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    if matches!(g, Formula::And(..)) {
        write!(out, "({g})")
    } else {
        write!(out, "{g}")
    }
}

pub fn render(f: &Formula) -> String {
    f.to_string()
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
