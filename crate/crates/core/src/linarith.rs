//! Linear constraint systems over exact rationals, decided by Fourier–Motzkin
//! elimination.
//!
//! Every constraint has the shape `t ≥ 0`, `t > 0` or `t = 0` for a linear
//! term `t`. Strict inequalities are carried through elimination natively: a
//! combined inequality is strict iff either parent is.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

pub type VarId = usize;

/// `Σ coeffs[v]·x_v + constant`, with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<VarId, Rational>,
    constant: Rational,
}

impl LinearTerm {
    pub fn zero() -> Self {
        LinearTerm::default()
    }

    pub fn constant(c: Rational) -> Self {
        LinearTerm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        LinearTerm::zero().with(v, Rational::one())
    }

    /// Adds `c·x_v`.
    pub fn with(mut self, v: VarId, c: Rational) -> Self {
        self.add_coeff(v, c);
        self
    }

    /// Sum of the given variables with unit coefficients.
    pub fn sum(vars: impl IntoIterator<Item = VarId>) -> Self {
        vars.into_iter().fold(LinearTerm::zero(), |t, v| t.with(v, Rational::one()))
    }

    fn add_coeff(&mut self, v: VarId, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn coefficient(&self, v: VarId) -> Rational {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (VarId, &Rational)> {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn scale(&self, k: &Rational) -> LinearTerm {
        if k.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Replaces `x_v` by `replacement`.
    pub fn substitute(&self, v: VarId, replacement: &LinearTerm) -> LinearTerm {
        let c = self.coefficient(v);
        if c.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.coeffs.remove(&v);
        out + replacement.scale(&c)
    }

    /// Value under a (possibly partial) assignment; missing variables read 0.
    pub fn evaluate(&self, assignment: &BTreeMap<VarId, Rational>) -> Rational {
        self.coeffs.iter().fold(self.constant.clone(), |acc, (v, c)| match assignment.get(v) {
            Some(x) => acc + c * x,
            None => acc,
        })
    }
}

impl Add for LinearTerm {
    type Output = LinearTerm;

    fn add(mut self, rhs: LinearTerm) -> LinearTerm {
        for (v, c) in rhs.coeffs {
            self.add_coeff(v, c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinearTerm {
    type Output = LinearTerm;

    fn sub(self, rhs: LinearTerm) -> LinearTerm {
        self + (-rhs)
    }
}

impl Neg for LinearTerm {
    type Output = LinearTerm;

    fn neg(self) -> LinearTerm {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &LinearTerm {
    type Output = LinearTerm;

    fn mul(self, k: &Rational) -> LinearTerm {
        self.scale(k)
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if mag.is_one() {
                write!(f, "x{v}")?;
            } else {
                write!(f, "{}*x{v}", rational::display(&mag))?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", rational::display(&self.constant))
        } else if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", rational::display(&self.constant.abs()))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `t ≥ 0`
    Ge,
    /// `t > 0`
    Gt,
    /// `t = 0`
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub term: LinearTerm,
    pub relation: Relation,
}

impl Constraint {
    pub fn ge(term: LinearTerm) -> Self {
        Constraint { term, relation: Relation::Ge }
    }

    pub fn gt(term: LinearTerm) -> Self {
        Constraint { term, relation: Relation::Gt }
    }

    pub fn eq(term: LinearTerm) -> Self {
        Constraint { term, relation: Relation::Eq }
    }

    /// `t ≤ 0`, stored as `-t ≥ 0`.
    pub fn le(term: LinearTerm) -> Self {
        Constraint::ge(-term)
    }

    /// `t < 0`, stored as `-t > 0`.
    pub fn lt(term: LinearTerm) -> Self {
        Constraint::gt(-term)
    }

    pub fn holds(&self, assignment: &BTreeMap<VarId, Rational>) -> bool {
        let v = self.term.evaluate(assignment);
        match self.relation {
            Relation::Ge => !v.is_negative(),
            Relation::Gt => v.is_positive(),
            Relation::Eq => v.is_zero(),
        }
    }

    /// Truth value of a constraint without variables.
    pub fn constant_truth(&self) -> Option<bool> {
        self.term.is_constant().then(|| self.holds(&BTreeMap::new()))
    }

    /// Positive rescaling (any nonzero rescaling for equalities) that makes
    /// the first nonzero coefficient have magnitude one.
    fn normalized(self) -> Self {
        let Some(lead) = self.term.coeffs.values().next().cloned() else {
            return self;
        };
        let k = match self.relation {
            Relation::Eq => lead.recip(),
            _ => lead.abs().recip(),
        };
        Constraint { term: self.term.scale(&k), relation: self.relation }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        };
        write!(f, "{} {rel} 0", self.term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    constraints: Vec<Constraint>,
    num_vars: usize,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem { constraints: Vec::new(), num_vars }
    }

    pub fn with_constraints(num_vars: usize, constraints: impl IntoIterator<Item = Constraint>) -> Self {
        let mut sys = LinearSystem::new(num_vars);
        for c in constraints {
            sys.push(c);
        }
        sys
    }

    /// Panics when the constraint mentions a variable `>= num_vars`.
    pub fn push(&mut self, c: Constraint) {
        assert!(
            c.term.vars().all(|v| v < self.num_vars),
            "constraint {c} references a variable outside 0..{}",
            self.num_vars
        );
        self.constraints.push(c);
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn satisfied_by(&self, assignment: &BTreeMap<VarId, Rational>) -> bool {
        self.constraints.iter().all(|c| c.holds(assignment))
    }

    fn active_vars(&self) -> BTreeSet<VarId> {
        self.constraints.iter().flat_map(|c| c.term.vars()).collect()
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system over {} variables:", self.num_vars)?;
        for c in &self.constraints {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

/// How a variable left the system; replayed backwards by [`solve`].
#[derive(Debug, Clone)]
enum Step {
    /// `x_var = expr`
    Substitute { var: VarId, expr: LinearTerm },
    /// the inequalities that bounded `x_var` just before it was eliminated
    Bounds { var: VarId, constraints: Vec<Constraint> },
}

/// Normalises each constraint and drops those implied by another one:
/// exact duplicates, constant truths, and of two inequalities with the same
/// coefficients the looser one. Order of first occurrence is kept.
fn dedup(constraints: Vec<Constraint>) -> Vec<Constraint> {
    let mut seen = BTreeSet::new();
    let mut tightest: BTreeMap<BTreeMap<VarId, Rational>, usize> = BTreeMap::new();
    let mut out: Vec<Constraint> = Vec::with_capacity(constraints.len());
    for c in constraints {
        let c = c.normalized();
        if c.constant_truth() == Some(true) || !seen.insert(c.clone()) {
            continue;
        }
        if c.relation == Relation::Eq || c.term.is_constant() {
            out.push(c);
            continue;
        }
        match tightest.get(&c.term.coeffs) {
            Some(&i) => {
                let kept = &out[i];
                let tighter = c.term.constant < kept.term.constant
                    || (c.term.constant == kept.term.constant && c.relation == Relation::Gt);
                if tighter {
                    out[i] = c;
                }
            }
            None => {
                tightest.insert(c.term.coeffs.clone(), out.len());
                out.push(c);
            }
        }
    }
    out
}

fn eliminate_step(constraints: Vec<Constraint>, var: VarId) -> (Vec<Constraint>, Option<Step>) {
    if let Some(pos) = constraints
        .iter()
        .position(|c| c.relation == Relation::Eq && !c.term.coefficient(var).is_zero())
    {
        let eq = &constraints[pos];
        let a = eq.term.coefficient(var);
        // a·x + rest = 0  =>  x = -rest / a
        let mut rest = eq.term.clone();
        rest.coeffs.remove(&var);
        let expr = rest.scale(&-a.recip());
        let out = constraints
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, c)| Constraint { term: c.term.substitute(var, &expr), relation: c.relation })
            .collect();
        return (dedup(out), Some(Step::Substitute { var, expr }));
    }

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut rest = Vec::new();
    for c in constraints {
        let a = c.term.coefficient(var);
        if a.is_zero() {
            rest.push(c);
        } else if a.is_positive() {
            lower.push(c);
        } else {
            upper.push(c);
        }
    }
    if lower.is_empty() && upper.is_empty() {
        return (rest, None);
    }
    for lo in &lower {
        let a = lo.term.coefficient(var);
        for up in &upper {
            let b = -up.term.coefficient(var);
            // b·(a x + s) + a·(-b x + t): the variable cancels
            let term = lo.term.scale(&b) + up.term.scale(&a);
            let relation = if lo.relation == Relation::Gt || up.relation == Relation::Gt {
                Relation::Gt
            } else {
                Relation::Ge
            };
            rest.push(Constraint { term, relation });
        }
    }
    let mut bounds = lower;
    bounds.extend(upper);
    (dedup(rest), Some(Step::Bounds { var, constraints: bounds }))
}

/// Projects `var` out of the system. The result is feasible iff `sys` is.
pub fn eliminate(sys: &LinearSystem, var: VarId) -> LinearSystem {
    assert!(var < sys.num_vars, "variable {var} outside 0..{}", sys.num_vars);
    let (constraints, _) = eliminate_step(dedup(sys.constraints.clone()), var);
    LinearSystem { constraints, num_vars: sys.num_vars }
}

/// Next variable to eliminate: an equality's highest variable when one is
/// available, otherwise the variable producing the fewest new inequalities.
fn pick_var(constraints: &[Constraint]) -> Option<VarId> {
    if let Some(eq) = constraints.iter().find(|c| c.relation == Relation::Eq && !c.term.is_constant()) {
        return eq.term.vars().last();
    }
    let mut stats: BTreeMap<VarId, (usize, usize)> = BTreeMap::new();
    for c in constraints {
        for (v, a) in c.term.coefficients() {
            let entry = stats.entry(v).or_default();
            if a.is_positive() {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    stats
        .into_iter()
        .map(|(v, (p, n))| ((p * n) as isize - (p + n) as isize, v))
        .min_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)))
        .map(|(_, v)| v)
}

fn any_false(constraints: &[Constraint]) -> bool {
    constraints.iter().any(|c| c.constant_truth() == Some(false))
}

/// Runs elimination to completion. `None` when infeasible.
fn run(sys: &LinearSystem, order: Option<&[VarId]>) -> Option<Vec<Step>> {
    let mut constraints = dedup(sys.constraints.clone());
    let mut trace = Vec::new();
    let mut fixed = order.map(|o| o.iter().copied());
    loop {
        if any_false(&constraints) {
            return None;
        }
        let var = match fixed.as_mut() {
            Some(it) => match it.next() {
                Some(v) => v,
                None => break,
            },
            None => match pick_var(&constraints) {
                Some(v) => v,
                None => break,
            },
        };
        let (next, step) = eliminate_step(constraints, var);
        constraints = next;
        trace.extend(step);
    }
    assert!(
        constraints.iter().all(|c| c.term.is_constant()),
        "elimination order left variables behind"
    );
    (!any_false(&constraints)).then_some(trace)
}

pub fn feasible(sys: &LinearSystem) -> bool {
    run(sys, None).is_some()
}

/// Feasibility with an explicit elimination order, which must list every
/// variable occurring in the system.
pub fn feasible_with_order(sys: &LinearSystem, order: &[VarId]) -> bool {
    let live = sys.active_vars();
    assert!(live.iter().all(|v| order.contains(v)), "order must cover every live variable");
    run(sys, Some(order)).is_some()
}

/// A rational point satisfying every constraint, or `None` when infeasible.
///
/// Variables are recovered in reverse elimination order. Each takes the
/// midpoint of its residual interval; with a single finite bound it takes
/// that bound moved by one into the interval, and with none it takes 0.
/// Variables that never occur are 0.
pub fn solve(sys: &LinearSystem) -> Option<BTreeMap<VarId, Rational>> {
    let trace = run(sys, None)?;
    let mut assignment: BTreeMap<VarId, Rational> = BTreeMap::new();
    for step in trace.iter().rev() {
        match step {
            Step::Substitute { var, expr } => {
                let value = expr.evaluate(&assignment);
                assignment.insert(*var, value);
            }
            Step::Bounds { var, constraints } => {
                let mut lo: Option<Rational> = None;
                let mut hi: Option<Rational> = None;
                for c in constraints {
                    let a = c.term.coefficient(*var);
                    let mut rest = c.term.clone();
                    rest.coeffs.remove(var);
                    let bound = -rest.evaluate(&assignment) / &a;
                    if a.is_positive() {
                        lo = Some(match lo {
                            Some(l) if l >= bound => l,
                            _ => bound,
                        });
                    } else {
                        hi = Some(match hi {
                            Some(h) if h <= bound => h,
                            _ => bound,
                        });
                    }
                }
                let value = match (lo, hi) {
                    (Some(l), Some(h)) => (l + h) / rational::int(2),
                    (Some(l), None) => l + Rational::one(),
                    (None, Some(h)) => h - Rational::one(),
                    (None, None) => Rational::zero(),
                };
                assignment.insert(*var, value);
            }
        }
    }
    for v in 0..sys.num_vars {
        assignment.entry(v).or_insert_with(Rational::zero);
    }
    debug_assert!(sys.satisfied_by(&assignment));
    Some(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn x(v: VarId) -> LinearTerm {
        LinearTerm::var(v)
    }

    fn c(r: Rational) -> LinearTerm {
        LinearTerm::constant(r)
    }

    #[test]
    fn eliminate_single_pairing() {
        // x + y >= 1, -y >= -1/2
        let sys = LinearSystem::with_constraints(
            2,
            [
                Constraint::ge(x(0) + x(1) - c(int(1))),
                Constraint::ge(-x(1) + c(rat(1, 2))),
            ],
        );
        let out = eliminate(&sys, 1);
        assert_eq!(out.constraints(), &[Constraint::ge(x(0) - c(rat(1, 2))).normalized()]);
    }

    #[test]
    fn eliminate_by_substitution() {
        let sys = LinearSystem::with_constraints(
            1,
            [Constraint::eq(x(0) - c(rat(1, 3))), Constraint::ge(x(0))],
        );
        // x = 1/3 turns x >= 0 into the constant truth 1/3 >= 0, which is dropped
        let out = eliminate(&sys, 0);
        assert!(out.constraints().is_empty());
        assert!(feasible(&sys));
    }

    #[test]
    fn looser_parallel_inequality_is_dropped() {
        let sys = LinearSystem::with_constraints(
            2,
            [
                Constraint::ge(x(0) + x(1) - c(rat(1, 2))),
                Constraint::gt(x(0).scale(&rat(2, 1)) + x(1).scale(&rat(2, 1)) - c(rat(1, 1))),
                Constraint::ge(x(0) + x(1)),
            ],
        );
        let out = dedup(sys.constraints().to_vec());
        assert_eq!(out, vec![Constraint::gt(x(0) + x(1) - c(rat(1, 2)))]);
    }

    #[test]
    fn eliminate_propagates_strictness() {
        let sys = LinearSystem::with_constraints(1, [Constraint::gt(x(0)), Constraint::ge(-x(0))]);
        let out = eliminate(&sys, 0);
        assert_eq!(out.constraints(), &[Constraint::gt(LinearTerm::zero())]);
        assert_eq!(out.constraints()[0].constant_truth(), Some(false));
    }

    #[test]
    fn feasibility_examples() {
        let infeasible = LinearSystem::with_constraints(
            1,
            [Constraint::ge(x(0) - c(rat(1, 2))), Constraint::gt(-x(0) + c(rat(1, 3)))],
        );
        assert!(!feasible(&infeasible));
        assert_eq!(solve(&infeasible), None);

        let sys = LinearSystem::with_constraints(
            2,
            [
                Constraint::eq(x(0) + x(1) - c(int(1))),
                Constraint::ge(x(0) - c(rat(1, 2))),
                Constraint::gt(x(1) - c(rat(1, 3))),
            ],
        );
        assert!(feasible(&sys));
        let point = solve(&sys).unwrap();
        assert!(sys.satisfied_by(&point));
        // hand elimination: 1/2 <= x0 < 2/3
        assert!(point[&0] >= rat(1, 2) && point[&0] < rat(2, 3));

        assert!(feasible(&LinearSystem::new(0)));
        assert!(feasible(&LinearSystem::new(3)));
    }

    #[test]
    fn solve_examples() {
        let pinched = LinearSystem::with_constraints(
            1,
            [Constraint::ge(x(0) - c(rat(1, 2))), Constraint::ge(-x(0) + c(rat(1, 2)))],
        );
        assert_eq!(solve(&pinched).unwrap()[&0], rat(1, 2));

        let open = LinearSystem::with_constraints(
            1,
            [Constraint::gt(x(0)), Constraint::gt(-x(0) + c(int(1)))],
        );
        assert_eq!(solve(&open).unwrap()[&0], rat(1, 2));

        let one_sided = LinearSystem::with_constraints(1, [Constraint::gt(x(0) - c(int(3)))]);
        assert_eq!(solve(&one_sided).unwrap()[&0], int(4));
        let unconstrained = LinearSystem::new(2);
        assert_eq!(solve(&unconstrained).unwrap()[&1], int(0));
    }

    #[test]
    fn strict_against_non_strict_same_term() {
        let t = x(0) + x(1).scale(&int(2)) - c(rat(1, 3));
        let sys = LinearSystem::with_constraints(2, [Constraint::gt(t.clone()), Constraint::ge(-t)]);
        assert!(!feasible(&sys));
    }

    #[test]
    fn debug_dump() {
        let sys = LinearSystem::with_constraints(2, [Constraint::gt(x(0) - x(1).scale(&rat(1, 2)) + c(int(1)))]);
        assert_eq!(sys.to_string(), "system over 2 variables:\n  x0 - 1/2*x1 + 1 > 0\n");
    }
}
