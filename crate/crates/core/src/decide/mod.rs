//! Satisfiability, validity and finite-model witnesses.
//!
//! A formula is pushed into `◯`-normal form and expanded into exclusive
//! disjuncts of temporal literals. A disjunct is satisfiable iff each of its
//! time steps is satisfiable in isolation: the worlds on a fresh trajectory
//! carry independent valuations and kernels. A step is decided by its
//! propositional clash check plus a linear system over the cells of its
//! distinct `L` bodies, where each cell is decided recursively.

mod tableau;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use num_traits::{One, Zero};

use crate::linarith::{self, Constraint, LinearSystem, LinearTerm};
use crate::models::{FiniteDmm, WorldId};
use crate::rational::Rational;
use crate::syntax::{Formula, PropId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomPayload {
    Prop(PropId),
    /// body is `◯`-normalized
    L(Rational, Formula),
}

/// `◯^step payload`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemporalAtom {
    pub step: u32,
    pub payload: AtomPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: TemporalAtom,
    pub positive: bool,
}

/// The literals of one disjunct that speak about time step `step`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepRequirement {
    pub step: u32,
    pub pos_props: BTreeSet<PropId>,
    pub neg_props: BTreeSet<PropId>,
    pub pos_l: Vec<(Rational, Formula)>,
    pub neg_l: Vec<(Rational, Formula)>,
}

/// One satisfiable cell `δ_S` of a kernel solution with its mass `x_S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    /// indices into the distinct bodies that hold in the cell
    pub members: BTreeSet<usize>,
    pub formula: Formula,
    pub mass: Rational,
}

/// A kernel row shape that meets a step's `L` requirements.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellSolution {
    pub bodies: Vec<Formula>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorldSat {
    Sat(CellSolution),
    Unsat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub model: FiniteDmm,
    pub root: WorldId,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }
}

/// Drives every `◯` down to the propositions and `L` atoms it governs.
pub fn push_next(f: &Formula) -> Formula {
    fn go(f: &Formula, n: u32) -> Formula {
        match f {
            Formula::Prop(_) => Formula::next_n(n, f.clone()),
            Formula::Not(g) => Formula::not(go(g, n)),
            Formula::And(a, b) => Formula::and(go(a, n), go(b, n)),
            Formula::Next(g) => go(g, n + 1),
            Formula::L(r, g) => Formula::next_n(n, Formula::l(r.clone(), go(g, 0))),
        }
    }
    go(f, 0)
}

/// All clash-free disjuncts of `f`, in expansion order.
pub fn to_disjuncts(f: &Formula) -> Vec<Vec<Literal>> {
    let mut out = Vec::new();
    tableau::for_each_disjunct(f, &mut |lits| {
        out.push(lits.to_vec());
        ControlFlow::Continue(())
    });
    out
}

/// Splits a disjunct by time step, in increasing step order.
pub fn group_steps(disjunct: &[Literal]) -> Vec<StepRequirement> {
    let mut steps: BTreeMap<u32, StepRequirement> = BTreeMap::new();
    for lit in disjunct {
        let req = steps.entry(lit.atom.step).or_insert_with(|| StepRequirement {
            step: lit.atom.step,
            ..StepRequirement::default()
        });
        match (&lit.atom.payload, lit.positive) {
            (AtomPayload::Prop(p), true) => {
                req.pos_props.insert(*p);
            }
            (AtomPayload::Prop(p), false) => {
                req.neg_props.insert(*p);
            }
            (AtomPayload::L(r, body), true) => req.pos_l.push((r.clone(), body.clone())),
            (AtomPayload::L(r, body), false) => req.neg_l.push((r.clone(), body.clone())),
        }
    }
    steps.into_values().collect()
}

type LKey = (Vec<(Rational, Formula)>, Vec<(Rational, Formula)>);

/// Memoising decision procedure. Reuse one instance across related queries.
#[derive(Debug, Clone, Default)]
pub struct Decider {
    sat_memo: HashMap<Formula, bool>,
    kernel_memo: HashMap<LKey, Option<CellSolution>>,
}

impl Decider {
    pub fn new() -> Self {
        Decider::default()
    }

    pub fn is_sat(&mut self, f: &Formula) -> bool {
        if let Some(&known) = self.sat_memo.get(f) {
            return known;
        }
        let normal = push_next(f);
        let found = tableau::for_each_disjunct(&normal, &mut |lits| {
            if self.disjunct_sat(lits) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        self.sat_memo.insert(f.clone(), found);
        found
    }

    pub fn is_valid(&mut self, f: &Formula) -> bool {
        !self.is_sat(&Formula::not(f.clone()))
    }

    /// `Γ ⊢ f`, through completeness: `⋀Γ ∧ ¬f` is unsatisfiable.
    pub fn derives(&mut self, gamma: &[Formula], f: &Formula) -> bool {
        let goal = Formula::and(Formula::conjunction(gamma.iter().cloned()), Formula::not(f.clone()));
        !self.is_sat(&goal)
    }

    fn disjunct_sat(&mut self, lits: &[Literal]) -> bool {
        group_steps(lits)
            .iter()
            .all(|req| matches!(self.world_sat(req), WorldSat::Sat(_)))
    }

    pub fn world_sat(&mut self, req: &StepRequirement) -> WorldSat {
        if !req.pos_props.is_disjoint(&req.neg_props) {
            return WorldSat::Unsat;
        }
        match self.kernel_solution(&req.pos_l, &req.neg_l) {
            Some(solution) => WorldSat::Sat(solution),
            None => WorldSat::Unsat,
        }
    }

    fn kernel_solution(
        &mut self,
        pos_l: &[(Rational, Formula)],
        neg_l: &[(Rational, Formula)],
    ) -> Option<CellSolution> {
        if pos_l.is_empty() && neg_l.is_empty() {
            return Some(CellSolution::default());
        }
        let key = (pos_l.to_vec(), neg_l.to_vec());
        if let Some(known) = self.kernel_memo.get(&key) {
            return known.clone();
        }
        let solution = self.solve_kernel(pos_l, neg_l);
        self.kernel_memo.insert(key, solution.clone());
        solution
    }

    fn solve_kernel(
        &mut self,
        pos_l: &[(Rational, Formula)],
        neg_l: &[(Rational, Formula)],
    ) -> Option<CellSolution> {
        let mut bodies: Vec<Formula> = Vec::new();
        for (_, body) in pos_l.iter().chain(neg_l) {
            if !bodies.contains(body) {
                bodies.push(body.clone());
            }
        }
        // tightest lower and upper bound per body
        let mut lower: Vec<Option<Rational>> = vec![None; bodies.len()];
        let mut upper: Vec<Option<Rational>> = vec![None; bodies.len()];
        for (r, body) in pos_l {
            let i = bodies.iter().position(|b| b == body).expect("collected");
            if lower[i].as_ref().is_none_or(|cur| r > cur) {
                lower[i] = Some(r.clone());
            }
        }
        for (r, body) in neg_l {
            let i = bodies.iter().position(|b| b == body).expect("collected");
            if upper[i].as_ref().is_none_or(|cur| r < cur) {
                upper[i] = Some(r.clone());
            }
        }

        let cells = self.satisfiable_cells(&bodies);
        let mut system = LinearSystem::new(cells.len());
        let total = LinearTerm::sum(0..cells.len());
        system.push(Constraint::eq(total - LinearTerm::constant(Rational::one())));
        for v in 0..cells.len() {
            system.push(Constraint::ge(LinearTerm::var(v)));
        }
        for i in 0..bodies.len() {
            let mass = LinearTerm::sum(
                cells
                    .iter()
                    .enumerate()
                    .filter(|(_, (members, _))| members.contains(&i))
                    .map(|(v, _)| v),
            );
            if let Some(r) = &lower[i] {
                if !r.is_zero() {
                    system.push(Constraint::ge(mass.clone() - LinearTerm::constant(r.clone())));
                }
            }
            if let Some(s) = &upper[i] {
                system.push(Constraint::gt(LinearTerm::constant(s.clone()) - mass));
            }
        }
        let point = linarith::solve(&system)?;
        let cells = cells
            .into_iter()
            .enumerate()
            .map(|(v, (members, formula))| Cell {
                members,
                formula,
                mass: point.get(&v).cloned().unwrap_or_else(Rational::zero),
            })
            .collect();
        Some(CellSolution { bodies, cells })
    }

    /// Satisfiable `δ_S`, enumerated depth first with the body asserted
    /// before its negation; unsatisfiable partial conjunctions are pruned.
    fn satisfiable_cells(&mut self, bodies: &[Formula]) -> Vec<(BTreeSet<usize>, Formula)> {
        let mut out = Vec::new();
        let mut partial = Vec::new();
        self.cells_from(bodies, &mut partial, &mut out);
        out
    }

    fn cells_from(
        &mut self,
        bodies: &[Formula],
        partial: &mut Vec<bool>,
        out: &mut Vec<(BTreeSet<usize>, Formula)>,
    ) {
        let conj = |signs: &[bool]| {
            Formula::conjunction(signs.iter().zip(bodies).map(|(&s, b)| {
                if s {
                    b.clone()
                } else {
                    Formula::not(b.clone())
                }
            }))
        };
        if partial.len() == bodies.len() {
            let members = partial.iter().enumerate().filter_map(|(i, &s)| s.then_some(i)).collect();
            out.push((members, conj(partial)));
            return;
        }
        for sign in [true, false] {
            partial.push(sign);
            if self.is_sat(&conj(partial)) {
                self.cells_from(bodies, partial, out);
            }
            partial.pop();
        }
    }

    /// A finite model of `f` with its root world.
    pub fn witness(&mut self, f: &Formula) -> Option<Witness> {
        let normal = push_next(f);
        let mut chosen = None;
        tableau::for_each_disjunct(&normal, &mut |lits| {
            let reqs = group_steps(lits);
            let mut solved = Vec::new();
            for req in &reqs {
                match self.world_sat(req) {
                    WorldSat::Sat(solution) => solved.push((req.clone(), solution)),
                    WorldSat::Unsat => return ControlFlow::Continue(()),
                }
            }
            chosen = Some(solved);
            ControlFlow::Break(())
        });
        let solved = chosen?;
        self.sat_memo.insert(f.clone(), true);
        Some(self.build_trajectory(&solved))
    }

    fn build_trajectory(&mut self, solved: &[(StepRequirement, CellSolution)]) -> Witness {
        let last = solved.iter().map(|(req, _)| req.step).max().unwrap_or(0) as usize;
        let mut model = FiniteDmm::new();
        for i in 0..=last {
            let w = model.add_world(format!("w{i}"));
            model.successor[w] = (w + 1).min(last);
        }
        let by_step: BTreeMap<usize, &(StepRequirement, CellSolution)> =
            solved.iter().map(|s| (s.0.step as usize, s)).collect();
        for w in 0..=last {
            let Some((req, solution)) = by_step.get(&w) else {
                model.add_mass(w, w, Rational::one());
                continue;
            };
            for p in &req.pos_props {
                model.set_prop(*p, w, true);
            }
            let weighted: Vec<&Cell> = solution.cells.iter().filter(|c| !c.mass.is_zero()).collect();
            if weighted.is_empty() {
                model.add_mass(w, w, Rational::one());
            }
            for cell in weighted {
                let sub = self.witness(&cell.formula).expect("cell was decided satisfiable");
                let offset = model.embed(&sub.model);
                model.add_mass(w, offset + sub.root, cell.mass.clone());
            }
        }
        Witness { model, root: 0 }
    }
}

/// Decides `f` without extracting a model.
pub fn sat(f: &Formula) -> Verdict {
    let status = if Decider::new().is_sat(f) { Status::Sat } else { Status::Unsat };
    Verdict { status, witness: None }
}

/// Decides `f` and, when satisfiable, attaches a witness.
pub fn sat_with_witness(f: &Formula) -> Verdict {
    match Decider::new().witness(f) {
        Some(w) => Verdict { status: Status::Sat, witness: Some(w) },
        None => Verdict { status: Status::Unsat, witness: None },
    }
}

pub fn valid(f: &Formula) -> bool {
    Decider::new().is_valid(f)
}

pub fn witness(f: &Formula) -> Option<Witness> {
    Decider::new().witness(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{check, validate};
    use crate::rational::rat;

    fn f(text: &str) -> Formula {
        text.parse().unwrap()
    }

    fn p(i: PropId) -> Formula {
        Formula::Prop(i)
    }

    fn lit(step: u32, positive: bool, payload: AtomPayload) -> Literal {
        Literal { atom: TemporalAtom { step, payload }, positive }
    }

    #[test]
    fn push_next_examples() {
        assert_eq!(push_next(&f("X !p0")), f("!X p0"));
        assert_eq!(push_next(&f("X (p0 & p1)")), f("X p0 & X p1"));
        assert_eq!(push_next(&f("X L[1/2] p0")), f("X L[1/2] p0"));
        assert_eq!(push_next(&f("X L[1/2] X !p0")), f("X L[1/2] !X p0"));
    }

    #[test]
    fn disjunct_examples() {
        assert_eq!(to_disjuncts(&p(0)), vec![vec![lit(0, true, AtomPayload::Prop(0))]]);
        assert_eq!(
            to_disjuncts(&f("!(p0 & p1)")),
            vec![
                vec![lit(0, false, AtomPayload::Prop(0))],
                vec![lit(0, true, AtomPayload::Prop(0)), lit(0, false, AtomPayload::Prop(1))],
            ]
        );
        assert!(to_disjuncts(&f("p0 & !p0")).is_empty());
        assert_eq!(to_disjuncts(&f("X X p2"))[0][0].atom.step, 2);
    }

    #[test]
    fn group_examples() {
        let d = vec![
            lit(0, true, AtomPayload::Prop(0)),
            lit(1, false, AtomPayload::Prop(0)),
            lit(1, true, AtomPayload::L(rat(1, 2), p(1))),
        ];
        let reqs = group_steps(&d);
        assert_eq!(reqs.len(), 2);
        assert_eq!(reqs[0].step, 0);
        assert_eq!(reqs[0].pos_props, [0].into_iter().collect());
        assert_eq!(reqs[1].neg_props, [0].into_iter().collect());
        assert_eq!(reqs[1].pos_l, vec![(rat(1, 2), p(1))]);
        assert!(group_steps(&[]).is_empty());
        let one = group_steps(&[lit(2, true, AtomPayload::Prop(0))]);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].step, 2);
    }

    #[test]
    fn world_sat_examples() {
        let mut d = Decider::new();
        let props_only = StepRequirement { pos_props: [0].into_iter().collect(), ..Default::default() };
        assert!(matches!(d.world_sat(&props_only), WorldSat::Sat(_)));

        let window = StepRequirement {
            pos_l: vec![(rat(1, 2), p(0))],
            neg_l: vec![(rat(2, 3), p(0))],
            ..Default::default()
        };
        let WorldSat::Sat(solution) = d.world_sat(&window) else { panic!("expected SAT") };
        let held = solution.cells.iter().find(|c| c.members.contains(&0)).unwrap();
        assert_eq!(held.mass, rat(7, 12));

        let kernel_free = StepRequirement {
            pos_props: [0].into_iter().collect(),
            pos_l: vec![(rat(1, 1), Formula::not(p(0)))],
            ..Default::default()
        };
        assert!(matches!(d.world_sat(&kernel_free), WorldSat::Sat(_)));

        let impossible = StepRequirement { neg_l: vec![(rat(0, 1), Formula::top())], ..Default::default() };
        assert_eq!(d.world_sat(&impossible), WorldSat::Unsat);
    }

    #[test]
    fn sat_examples() {
        assert!(!sat(&f("p0 & !p0")).is_sat());
        assert!(!sat(&f("L[1/2] p0 & L[2/3] !p0")).is_sat());
        assert!(!sat(&f("!X L[0] T")).is_sat());
        assert!(sat(&f("X L[1] p0 & X !p0")).is_sat());
    }

    #[test]
    fn valid_examples() {
        assert!(valid(&f("L[0] F")));
        assert!(valid(&f("X !p0 <-> !X p0")));
        assert!(valid(&f("L[1/3] (p0 & p1) & L[1/3] (p0 & !p1) -> L[2/3] p0")));
        assert!(!valid(&p(0)));
    }

    #[test]
    fn witness_examples() {
        let g = f("L[1/2] p0");
        let w = witness(&g).unwrap();
        assert_eq!(w.model.len(), 3);
        assert!(validate(&w.model).is_empty());
        assert!(check(&w.model, w.root, &g).unwrap());

        assert!(witness(&f("p0 & !p0")).is_none());

        let g = f("X p0");
        let w = witness(&g).unwrap();
        assert_eq!(w.model.len(), 2);
        assert!(w.model.holds_prop(0, w.model.successor[w.root]));
        assert!(check(&w.model, w.root, &g).unwrap());
    }

    #[test]
    fn nested_witness() {
        let g = f("L[1/2] (X p1 & M[1/3] p0) & !L[3/4] X p1 & X X !p2");
        let w = witness(&g).unwrap();
        assert!(validate(&w.model).is_empty());
        assert!(check(&w.model, w.root, &g).unwrap());
    }
}
