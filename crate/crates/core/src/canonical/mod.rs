//! Computable pieces of the canonical model: finite prefixes of Lindenbaum
//! saturated sets, the disagreement ultrametric, kernel value brackets,
//! Prokhorov distances, basis intersection and the satisfaction function.

mod prokhorov;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decide::Decider;
use crate::rational::{Rational, RationalEnumeration};
use crate::syntax::{enum_formula, formula_index, Formula};

pub use prokhorov::{prokhorov, FiniteMeasure};

#[derive(Debug, Error)]
pub enum CanonicalError {
    #[error("seed is inconsistent")]
    InconsistentSeed,
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("no equivalent formula below index {0}")]
    NotFoundWithinBound(u64),
    #[error("incompatible supports: {0}")]
    IncompatibleSupports(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid prefix: {0}")]
    InvalidPrefix(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Work caps for computations whose natural cost is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// rationals examined per Archimedean witness search
    pub rational_scan: usize,
    /// how far past its budget a prefix may grow to answer a query
    pub extension: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { rational_scan: 20_000, extension: 2_000 }
    }
}

/// What a Lindenbaum stage did with `φ_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage {
    /// `Γ ⊢ φ`, so `φ` was added
    Derivable,
    /// `Γ ⊬ φ`, so `¬φ` was added
    Refuted,
    /// `φ = ◯ⁿL_{r1…rk r}θ` was refuted and `¬◯ⁿL_{r1…rk s}θ` added as well
    Archimedean { s: Rational, extra: Formula },
}

/// `◯ⁿ L_{r1} … L_{rk} L_r θ` with `θ` not `L`-rooted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LStack {
    pub nexts: u32,
    pub outer: Vec<Rational>,
    pub inner: Rational,
    pub body: Formula,
}

impl LStack {
    pub fn of(f: &Formula) -> Option<LStack> {
        let mut nexts = 0;
        let mut cur = f;
        while let Formula::Next(g) = cur {
            nexts += 1;
            cur = g;
        }
        let mut indices = Vec::new();
        while let Formula::L(r, g) = cur {
            indices.push(r.clone());
            cur = g;
        }
        let inner = indices.pop()?;
        Some(LStack { nexts, outer: indices, inner, body: cur.clone() })
    }

    /// The same stack with the innermost index replaced by `s`.
    pub fn with_inner(&self, s: Rational) -> Formula {
        let mut f = Formula::l(s, self.body.clone());
        for r in self.outer.iter().rev() {
            f = Formula::l(r.clone(), f);
        }
        Formula::next_n(self.nexts, f)
    }
}

/// The first `budget` decisions of the saturated set grown from `seed`.
#[derive(Clone)]
pub struct SaturatedPrefix {
    seed: Formula,
    decided: Vec<bool>,
    extras: Vec<Formula>,
    stage_log: Vec<Stage>,
    // seed, then one formula per stage plus case-3 extras, in order added
    gamma: Vec<Formula>,
    limits: Limits,
    decider: Decider,
}

impl std::fmt::Debug for SaturatedPrefix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SaturatedPrefix")
            .field("seed", &self.seed)
            .field("budget", &self.budget())
            .field("decided", &self.decided)
            .field("extras", &self.extras)
            .finish()
    }
}

/// Runs the staged construction for `φ_0 … φ_{budget-1}`.
pub fn lindenbaum(seed: &Formula, budget: u64) -> Result<SaturatedPrefix, CanonicalError> {
    lindenbaum_with(seed, budget, Limits::default())
}

pub fn lindenbaum_with(seed: &Formula, budget: u64, limits: Limits) -> Result<SaturatedPrefix, CanonicalError> {
    let mut decider = Decider::new();
    if !decider.is_sat(seed) {
        return Err(CanonicalError::InconsistentSeed);
    }
    let mut w = SaturatedPrefix {
        seed: seed.clone(),
        decided: Vec::new(),
        extras: Vec::new(),
        stage_log: Vec::new(),
        gamma: vec![seed.clone()],
        limits,
        decider,
    };
    w.extend_to(budget)?;
    Ok(w)
}

impl SaturatedPrefix {
    pub fn seed(&self) -> &Formula {
        &self.seed
    }

    pub fn budget(&self) -> u64 {
        self.decided.len() as u64
    }

    pub fn decided(&self) -> &[bool] {
        &self.decided
    }

    pub fn extras(&self) -> &[Formula] {
        &self.extras
    }

    pub fn stage_log(&self) -> &[Stage] {
        &self.stage_log
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn set_limits(&mut self, limits: Limits) {
        self.limits = limits;
    }

    /// `Γ_l`: the set in force before stage `l` (`l ≤ budget`).
    pub fn stage_set(&self, l: usize) -> Vec<Formula> {
        assert!(l <= self.decided.len(), "stage {l} not yet run");
        let extras_before = self.stage_log[..l]
            .iter()
            .filter(|s| matches!(s, Stage::Archimedean { .. }))
            .count();
        self.gamma[..1 + l + extras_before].to_vec()
    }

    /// The current finite set `Γ_budget`.
    pub fn current_set(&self) -> &[Formula] {
        &self.gamma
    }

    fn derivable(&mut self, f: &Formula) -> bool {
        self.decider.derives(&self.gamma, f)
    }

    /// Runs stages until `budget` indices are decided. Earlier bits never
    /// change.
    pub fn extend_to(&mut self, budget: u64) -> Result<(), CanonicalError> {
        while self.budget() < budget {
            self.run_stage()?;
        }
        Ok(())
    }

    fn run_stage(&mut self) -> Result<(), CanonicalError> {
        let l = self.budget();
        let phi = enum_formula(l);
        if self.derivable(&phi) {
            self.gamma.push(phi);
            self.decided.push(true);
            self.stage_log.push(Stage::Derivable);
            return Ok(());
        }
        let stage = match LStack::of(&phi) {
            Some(stack) => {
                let s = self.archimedean_witness(&stack)?;
                Stage::Archimedean { extra: Formula::not(stack.with_inner(s.clone())), s }
            }
            None => Stage::Refuted,
        };
        self.gamma.push(Formula::not(phi));
        self.decided.push(false);
        if let Stage::Archimedean { extra, .. } = &stage {
            self.gamma.push(extra.clone());
            self.extras.push(extra.clone());
        }
        self.stage_log.push(stage);
        Ok(())
    }

    /// The first `s < r` in enumeration order with `Γ ⊬ ◯ⁿL_{…s}θ`.
    fn archimedean_witness(&mut self, stack: &LStack) -> Result<Rational, CanonicalError> {
        // derivability is downward closed in s
        let mut derivable_up_to: Option<Rational> = None;
        for s in RationalEnumeration::new().take(self.limits.rational_scan) {
            if s >= stack.inner || derivable_up_to.as_ref().is_some_and(|d| s <= *d) {
                continue;
            }
            if self.derivable(&stack.with_inner(s.clone())) {
                derivable_up_to = Some(s);
            } else {
                return Ok(s);
            }
        }
        Err(CanonicalError::LimitExceeded(format!(
            "no Archimedean witness for {} among the first {} rationals",
            stack.with_inner(stack.inner.clone()),
            self.limits.rational_scan
        )))
    }

    /// `Some(bit)` when the prefix already fixes membership of `f`: from its
    /// decided bits, or because `Γ_budget` derives `f` or `¬f` (the set only
    /// grows, so the later stage must agree).
    pub fn settled(&mut self, f: &Formula) -> Option<bool> {
        if let Some(i) = formula_index(f).to_u64().filter(|i| *i < self.budget()) {
            return Some(self.decided[i as usize]);
        }
        if self.derivable(f) {
            return Some(true);
        }
        if self.derivable(&Formula::not(f.clone())) {
            return Some(false);
        }
        None
    }

    /// Is `f` in the saturated set? Indices past the budget are answered by
    /// [`settled`](Self::settled) when possible, otherwise by extending the
    /// prefix within [`Limits::extension`].
    pub fn member(&mut self, f: &Formula) -> Result<bool, CanonicalError> {
        if let Some(bit) = self.settled(f) {
            return Ok(bit);
        }
        let index = formula_index(f);
        let reach = BigUint::from(self.budget() + self.limits.extension);
        if index >= reach {
            return Err(CanonicalError::LimitExceeded(format!(
                "{f} has index {index}, beyond the extension limit {reach}"
            )));
        }
        let i = index.to_u64().expect("below a u64 bound");
        self.extend_to(i + 1)?;
        Ok(self.decided[i as usize])
    }

    pub fn to_json(&self) -> Result<String, CanonicalError> {
        let file = PrefixFile {
            seed: self.seed.to_string(),
            budget: self.budget(),
            decided: self.decided.iter().map(|&b| b as u8).collect(),
            extras: self.extras.iter().map(|f| f.to_string()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Rebuilds a prefix from its export. The stage structure is checked
    /// (one extra per refuted `L`-stack, each of the required shape);
    /// consistency is not re-derived.
    pub fn from_json(text: &str) -> Result<SaturatedPrefix, CanonicalError> {
        let file: PrefixFile = serde_json::from_str(text)?;
        let invalid = |m: String| CanonicalError::InvalidPrefix(m);
        let seed: Formula = file.seed.parse().map_err(|e| invalid(format!("seed: {e}")))?;
        if file.decided.len() as u64 != file.budget {
            return Err(invalid(format!("{} bits for budget {}", file.decided.len(), file.budget)));
        }
        let mut extras = file.extras.iter().map(|t| {
            t.parse::<Formula>().map_err(|e| invalid(format!("extra '{t}': {e}")))
        });
        let mut w = SaturatedPrefix {
            seed: seed.clone(),
            decided: Vec::new(),
            extras: Vec::new(),
            stage_log: Vec::new(),
            gamma: vec![seed],
            limits: Limits::default(),
            decider: Decider::new(),
        };
        for (l, bit) in file.decided.iter().enumerate() {
            let phi = enum_formula(l as u64);
            match bit {
                1 => {
                    w.gamma.push(phi);
                    w.decided.push(true);
                    w.stage_log.push(Stage::Derivable);
                }
                0 => {
                    let stack = LStack::of(&phi);
                    w.gamma.push(Formula::not(phi));
                    w.decided.push(false);
                    let Some(stack) = stack else {
                        w.stage_log.push(Stage::Refuted);
                        continue;
                    };
                    let extra = extras
                        .next()
                        .ok_or_else(|| invalid(format!("missing extra for stage {l}")))??;
                    let s = match &extra {
                        Formula::Not(inner) => LStack::of(inner)
                            .filter(|e| e.nexts == stack.nexts && e.outer == stack.outer && e.body == stack.body)
                            .map(|e| e.inner)
                            .filter(|s| *s < stack.inner),
                        _ => None,
                    }
                    .ok_or_else(|| invalid(format!("extra '{extra}' does not fit stage {l}")))?;
                    w.gamma.push(extra.clone());
                    w.extras.push(extra.clone());
                    w.stage_log.push(Stage::Archimedean { s, extra });
                }
                other => return Err(invalid(format!("decided bit {other} at {l}"))),
            }
        }
        if extras.next().is_some() {
            return Err(invalid("more extras than Archimedean stages".into()));
        }
        Ok(w)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PrefixFile {
    seed: String,
    budget: u64,
    decided: Vec<u8>,
    extras: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distance {
    Exact(Rational),
    /// the distance is at most this value
    UpperBound(Rational),
}

fn power_of_half(n: u64) -> Rational {
    let n = u32::try_from(n).expect("exponent fits in u32");
    Rational::new(BigInt::one(), BigInt::from(2u32).pow(n))
}

/// `d_c(w1, w2) = 2^{-n0}` for the first disagreement `n0 < budget`.
pub fn metric_dc(
    w1: &mut SaturatedPrefix,
    w2: &mut SaturatedPrefix,
    budget: u64,
) -> Result<Distance, CanonicalError> {
    w1.extend_to(budget)?;
    w2.extend_to(budget)?;
    let n = budget as usize;
    match (0..n).find(|&i| w1.decided[i] != w2.decided[i]) {
        Some(n0) => Ok(Distance::Exact(power_of_half(n0 as u64))),
        None => Ok(Distance::UpperBound(power_of_half(budget))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lower: Rational,
    pub upper: Rational,
}

/// Brackets `T_c(w)([f])` on the grid `{m/grid}`.
pub fn kernel_bounds(w: &mut SaturatedPrefix, f: &Formula, grid: u32) -> Result<Interval, CanonicalError> {
    assert!(grid > 0, "grid must be positive");
    let point = |m: u32| Rational::new(BigInt::from(m), BigInt::from(grid));
    let mut lower = Rational::zero();
    let mut upper = None;
    for m in 0..=grid {
        if w.member(&Formula::l(point(m), f.clone()))? {
            lower = point(m);
        } else {
            upper = Some(point(m));
            break;
        }
    }
    // M_lower f pins the value at lower; only consulted when already settled
    if w.settled(&Formula::m(lower.clone(), f.clone())) == Some(true) {
        upper = Some(lower.clone());
    }
    Ok(Interval { upper: upper.unwrap_or_else(Rational::one), lower })
}

/// A bracket of `T_c(w)([f])` read from what the prefix already settles,
/// without extending it. Always sound; as tight as [`kernel_bounds`] when
/// every grid query is settled.
pub fn kernel_bracket(w: &mut SaturatedPrefix, f: &Formula, grid: u32) -> Interval {
    assert!(grid > 0, "grid must be positive");
    let point = |m: u32| Rational::new(BigInt::from(m), BigInt::from(grid));
    let mut lower = Rational::zero();
    for m in 1..=grid {
        if w.settled(&Formula::l(point(m), f.clone())) == Some(true) {
            lower = point(m);
        }
    }
    if w.settled(&Formula::m(lower.clone(), f.clone())) == Some(true) {
        return Interval { upper: lower.clone(), lower };
    }
    let upper = (0..=grid)
        .map(point)
        .filter(|r| *r > lower)
        .find(|r| w.settled(&Formula::l(r.clone(), f.clone())) == Some(false))
        .unwrap_or_else(Rational::one);
    Interval { lower, upper }
}

/// The least `l < search_bound` with `⊢ φ_l ↔ φ_i ∧ φ_j`.
pub fn basis_intersection(i: u64, j: u64, search_bound: u64) -> Result<u64, CanonicalError> {
    let target = Formula::and(enum_formula(i), enum_formula(j));
    let mut decider = Decider::new();
    (0..search_bound)
        .find(|&l| decider.is_valid(&Formula::iff(enum_formula(l), target.clone())))
        .ok_or(CanonicalError::NotFoundWithinBound(search_bound))
}

/// `Sat_c(w, i)`: whether `φ_i` is in `w`.
pub fn sat_function(w: &mut SaturatedPrefix, i: u64) -> Result<bool, CanonicalError> {
    w.member(&enum_formula(i))
}
