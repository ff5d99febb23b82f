//! Lazy expansion of a formula into exclusive literal conjunctions.
//!
//! Work items are `(formula, polarity, step)`. Non-branching items are
//! consumed first; a negated conjunction `¬(a ∧ b)` splits into the
//! branches `[¬a]` and `[a, ¬b]`, so the produced disjuncts are pairwise
//! exclusive. Branches are abandoned as soon as they contain a clash.

use std::ops::ControlFlow;

use num_traits::Zero;

use super::{push_next, AtomPayload, Literal, TemporalAtom};
use crate::syntax::Formula;

#[derive(Clone)]
struct Item<'a> {
    formula: &'a Formula,
    positive: bool,
    step: u32,
}

impl Item<'_> {
    fn branches(&self) -> bool {
        !self.positive && matches!(self.formula, Formula::And(..))
    }
}

/// Adds `lit` to `lits` unless it is already present. Returns false on a
/// clash: the same atom with both signs, or `+L_r θ` next to `−L_s θ` with
/// `s ≤ r`, or `−L_0 θ` (never true).
fn add_literal(lits: &mut Vec<Literal>, lit: Literal) -> bool {
    if let (false, AtomPayload::L(r, _)) = (lit.positive, &lit.atom.payload) {
        if r.is_zero() {
            return false;
        }
    }
    for other in lits.iter() {
        if other.atom.step != lit.atom.step {
            continue;
        }
        match (&other.atom.payload, &lit.atom.payload) {
            (AtomPayload::Prop(a), AtomPayload::Prop(b)) if a == b => {
                if other.positive == lit.positive {
                    return true;
                }
                return false;
            }
            (AtomPayload::L(r, a), AtomPayload::L(s, b)) if a == b => {
                if r == s && other.positive == lit.positive {
                    return true;
                }
                let clash = match (other.positive, lit.positive) {
                    (true, false) => s <= r,
                    (false, true) => r <= s,
                    _ => false,
                };
                if clash {
                    return false;
                }
            }
            _ => {}
        }
    }
    lits.push(lit);
    true
}

fn expand<'a>(
    mut todo: Vec<Item<'a>>,
    mut lits: Vec<Literal>,
    visit: &mut dyn FnMut(&[Literal]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    loop {
        let next = match todo.iter().rposition(|it| !it.branches()) {
            Some(i) => todo.remove(i),
            None => match todo.pop() {
                Some(it) => it,
                None => return visit(&lits),
            },
        };
        let Item { formula, positive, step } = next;
        match formula {
            Formula::Not(g) => todo.push(Item { formula: g, positive: !positive, step }),
            Formula::Next(g) => todo.push(Item { formula: g, positive, step: step + 1 }),
            Formula::And(a, b) if positive => {
                todo.push(Item { formula: b, positive: true, step });
                todo.push(Item { formula: a, positive: true, step });
            }
            Formula::And(a, b) => {
                let mut left = todo.clone();
                left.push(Item { formula: a, positive: false, step });
                expand(left, lits.clone(), visit)?;
                todo.push(Item { formula: b, positive: false, step });
                todo.push(Item { formula: a, positive: true, step });
            }
            Formula::Prop(p) => {
                let atom = TemporalAtom { step, payload: AtomPayload::Prop(*p) };
                if !add_literal(&mut lits, Literal { atom, positive }) {
                    return ControlFlow::Continue(());
                }
            }
            Formula::L(r, body) => {
                let payload = AtomPayload::L(r.clone(), push_next(body));
                let atom = TemporalAtom { step, payload };
                if !add_literal(&mut lits, Literal { atom, positive }) {
                    return ControlFlow::Continue(());
                }
            }
        }
    }
}

/// Calls `visit` on each clash-free disjunct of `f` in order until it
/// breaks. Returns whether it broke.
pub(super) fn for_each_disjunct(
    f: &Formula,
    visit: &mut dyn FnMut(&[Literal]) -> ControlFlow<()>,
) -> bool {
    let root = Item { formula: f, positive: true, step: 0 };
    expand(vec![root], Vec::new(), visit).is_break()
}
