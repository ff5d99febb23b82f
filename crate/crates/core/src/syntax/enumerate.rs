//! The fixed bijection between naturals and formulas.
//!
//! Formulas are written in prefix (Polish) notation over the symbols
//! `¬ ∧ L_r ◯ p_i`. Every symbol carries a weight: `¬`, `∧` and `◯` weigh 1,
//! `p_i` weighs `i + 1` and `L_{a/b}` weighs `1 + a + b`. Only finitely many
//! formulas share a weight, so they are listed by weight first and then
//! lexicographically over the symbol order `¬ < ∧ < L_r < ◯ < p0 < p1 < …`,
//! where the `L_r` are ordered among themselves by [`rational_index`].
//!
//! Counting uses `F(k, w)`, the number of symbol strings that spell exactly
//! `k` consecutive formulas of total weight `w`.

use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{Formula, PropId};
use crate::rational::{rational_index, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Symbol {
    Not,
    And,
    L(Rational),
    Next,
    Prop(PropId),
}

impl Symbol {
    fn arity(&self) -> usize {
        match self {
            Symbol::Prop(_) => 0,
            Symbol::Not | Symbol::L(_) | Symbol::Next => 1,
            Symbol::And => 2,
        }
    }

    fn weight(&self) -> usize {
        match self {
            Symbol::Not | Symbol::And | Symbol::Next => 1,
            Symbol::Prop(i) => *i as usize + 1,
            Symbol::L(r) => l_weight(r),
        }
    }
}

fn l_weight(r: &Rational) -> usize {
    let w = r.numer() + r.denom() + BigInt::one();
    w.to_usize().expect("index weight fits in usize")
}

/// Total symbol weight of a formula; formulas are enumerated by this first.
pub fn weight(f: &Formula) -> usize {
    match f {
        Formula::Prop(i) => *i as usize + 1,
        Formula::Not(g) | Formula::Next(g) => 1 + weight(g),
        Formula::L(r, g) => l_weight(r) + weight(g),
        Formula::And(a, b) => 1 + weight(a) + weight(b),
    }
}

fn prefix_symbols(f: &Formula, out: &mut Vec<Symbol>) {
    match f {
        Formula::Prop(i) => out.push(Symbol::Prop(*i)),
        Formula::Not(g) => {
            out.push(Symbol::Not);
            prefix_symbols(g, out);
        }
        Formula::Next(g) => {
            out.push(Symbol::Next);
            prefix_symbols(g, out);
        }
        Formula::L(r, g) => {
            out.push(Symbol::L(r.clone()));
            prefix_symbols(g, out);
        }
        Formula::And(a, b) => {
            out.push(Symbol::And);
            prefix_symbols(a, out);
            prefix_symbols(b, out);
        }
    }
}

fn build(symbols: &mut impl Iterator<Item = Symbol>) -> Formula {
    match symbols.next().expect("well-formed prefix string") {
        Symbol::Prop(i) => Formula::Prop(i),
        Symbol::Not => Formula::not(build(symbols)),
        Symbol::Next => Formula::next(build(symbols)),
        Symbol::L(r) => Formula::l(r, build(symbols)),
        Symbol::And => {
            let a = build(symbols);
            let b = build(symbols);
            Formula::and(a, b)
        }
    }
}

/// Memoised `F(k, w)` together with the weight-sorted `L` symbols.
struct Tables {
    max_weight: usize,
    // counts[w][k] = F(k, w), for k <= w
    counts: Vec<Vec<BigUint>>,
    // L symbols with weight <= max_weight, in rank order
    l_symbols: Vec<(Rational, usize)>,
    // l_per_weight[v] = number of L symbols of weight v
    l_per_weight: Vec<usize>,
}

impl Tables {
    fn new() -> Self {
        Tables {
            max_weight: 0,
            counts: vec![vec![BigUint::one()]],
            l_symbols: Vec::new(),
            l_per_weight: vec![0],
        }
    }

    fn count(&self, k: usize, w: usize) -> BigUint {
        if k > w {
            return BigUint::zero();
        }
        self.counts[w][k].clone()
    }

    fn ensure(&mut self, target: usize) {
        if target <= self.max_weight {
            return;
        }
        // rationals a/b in [0, 1] with 1 + a + b <= target
        let mut ls: Vec<(BigUint, Rational, usize)> = Vec::new();
        for b in 1..target {
            for a in 0..=b {
                let w = 1 + a + b;
                if w > target {
                    break;
                }
                if a.gcd(&b) != 1 {
                    continue;
                }
                let r = Rational::new(BigInt::from(a), BigInt::from(b));
                let rank = rational_index(&r).expect("in range");
                ls.push((rank, r, w));
            }
        }
        ls.sort_by(|x, y| x.0.cmp(&y.0));
        self.l_symbols = ls.into_iter().map(|(_, r, w)| (r, w)).collect();
        self.l_per_weight = vec![0; target + 1];
        for (_, w) in &self.l_symbols {
            self.l_per_weight[*w] += 1;
        }
        for w in self.counts.len()..=target {
            let mut row = vec![BigUint::zero(); w + 1];
            for (k, slot) in row.iter_mut().enumerate().skip(1) {
                // ¬ and ◯
                let mut total = self.count(k, w - 1) * 2u32;
                // ∧
                total += self.count(k + 1, w - 1);
                // p_{v-1}
                for v in 1..=w {
                    total += self.count(k - 1, w - v);
                }
                // L symbols of weight v
                for v in 2..=w {
                    let n = self.l_per_weight[v];
                    if n > 0 {
                        total += self.count(k, w - v) * n;
                    }
                }
                *slot = total;
            }
            self.counts.push(row);
        }
        self.max_weight = target;
    }

    /// Symbols of weight at most `rem`, in enumeration order.
    fn symbols(&self, rem: usize) -> impl Iterator<Item = Symbol> + '_ {
        let head = [Symbol::Not, Symbol::And].into_iter();
        let ls = self
            .l_symbols
            .iter()
            .filter(move |(_, w)| *w <= rem)
            .map(|(r, _)| Symbol::L(r.clone()));
        let props = (0..rem as PropId).map(Symbol::Prop);
        head.chain(ls).chain(std::iter::once(Symbol::Next)).chain(props)
    }

    fn completions(&self, pending: usize, rem: usize, s: &Symbol) -> BigUint {
        let w = s.weight();
        if w > rem {
            return BigUint::zero();
        }
        self.count(pending - 1 + s.arity(), rem - w)
    }
}

fn tables() -> &'static Mutex<Tables> {
    static TABLES: OnceLock<Mutex<Tables>> = OnceLock::new();
    TABLES.get_or_init(|| Mutex::new(Tables::new()))
}

/// Position of `f` in the enumeration.
pub fn formula_index(f: &Formula) -> BigUint {
    let total = weight(f);
    let mut tables = tables().lock().expect("enumeration tables poisoned");
    tables.ensure(total);
    let mut index: BigUint = (1..total).map(|w| tables.count(1, w)).sum();

    let mut symbols = Vec::new();
    prefix_symbols(f, &mut symbols);
    let (mut pending, mut rem) = (1usize, total);
    for actual in &symbols {
        for s in tables.symbols(rem) {
            if &s == actual {
                break;
            }
            index += tables.completions(pending, rem, &s);
        }
        pending = pending - 1 + actual.arity();
        rem -= actual.weight();
    }
    index
}

/// [`formula_index`] when it fits in a `u64`.
pub fn formula_index_u64(f: &Formula) -> Option<u64> {
    formula_index(f).to_u64()
}

/// The formula at position `i` of the enumeration.
pub fn enum_formula_big(i: &BigUint) -> Formula {
    let mut tables = tables().lock().expect("enumeration tables poisoned");
    let mut remaining = i.clone();
    let mut w = 1;
    loop {
        tables.ensure(w);
        let class = tables.count(1, w);
        if remaining < class {
            break;
        }
        remaining -= class;
        w += 1;
    }

    let mut out = Vec::new();
    let (mut pending, mut rem) = (1usize, w);
    while pending > 0 {
        let mut chosen = None;
        for s in tables.symbols(rem) {
            let c = tables.completions(pending, rem, &s);
            if remaining < c {
                chosen = Some(s);
                break;
            }
            remaining -= c;
        }
        let s = chosen.expect("count table is consistent");
        pending = pending - 1 + s.arity();
        rem -= s.weight();
        out.push(s);
    }
    debug_assert_eq!(rem, 0);
    build(&mut out.into_iter())
}

pub fn enum_formula(i: u64) -> Formula {
    enum_formula_big(&BigUint::from(i))
}
