//! Finite dynamic Markov models and the satisfaction checker.
//!
//! The σ-algebra of a finite model is the full powerset of its worlds, so
//! every extension is measurable and a kernel row is just a rational
//! distribution over world ids.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};
use crate::syntax::{Formula, PropId};

pub type WorldId = usize;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown world '{0}'")]
    UnknownWorld(String),
    #[error("world index {0} out of range")]
    WorldOutOfRange(WorldId),
    #[error("world '{0}' has no successor")]
    MissingSuccessor(String),
    #[error("duplicate world '{0}'")]
    DuplicateWorld(String),
    #[error("bad proposition name '{0}' (expected p<digits>)")]
    BadProposition(String),
    #[error("bad fraction '{0}'")]
    BadFraction(String),
    #[error("model is malformed: {}", .0.join("; "))]
    Malformed(Vec<String>),
    #[error("invalid model JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A finite dynamic Markov model `⟨Ω, 2^Ω, T, f, v⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteDmm {
    /// world names, indexed by [`WorldId`]
    pub worlds: Vec<String>,
    pub valuation: BTreeMap<PropId, BTreeSet<WorldId>>,
    /// `kernel[w][u] = T(w, {u})`; absent entries are 0
    pub kernel: Vec<BTreeMap<WorldId, Rational>>,
    pub successor: Vec<WorldId>,
}

impl FiniteDmm {
    pub fn new() -> Self {
        FiniteDmm::default()
    }

    /// Adds a world with an empty kernel row and a self-loop successor.
    pub fn add_world(&mut self, name: impl Into<String>) -> WorldId {
        let id = self.worlds.len();
        self.worlds.push(name.into());
        self.kernel.push(BTreeMap::new());
        self.successor.push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world_id(&self, name: &str) -> Option<WorldId> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn set_prop(&mut self, p: PropId, w: WorldId, value: bool) {
        let set = self.valuation.entry(p).or_default();
        if value {
            set.insert(w);
        } else {
            set.remove(&w);
        }
    }

    pub fn holds_prop(&self, p: PropId, w: WorldId) -> bool {
        self.valuation.get(&p).is_some_and(|s| s.contains(&w))
    }

    /// Adds `mass` to `T(from, {to})`.
    pub fn add_mass(&mut self, from: WorldId, to: WorldId, mass: Rational) {
        if mass.is_zero() {
            return;
        }
        *self.kernel[from].entry(to).or_insert_with(Rational::zero) += mass;
    }

    /// Appends a copy of `other` (disjoint union). Returns the id offset of
    /// the copied worlds.
    pub fn embed(&mut self, other: &FiniteDmm) -> WorldId {
        let offset = self.worlds.len();
        for _ in &other.worlds {
            self.worlds.push(format!("w{}", self.worlds.len()));
        }
        for row in &other.kernel {
            self.kernel.push(row.iter().map(|(u, m)| (u + offset, m.clone())).collect());
        }
        self.successor.extend(other.successor.iter().map(|s| s + offset));
        for (p, set) in &other.valuation {
            self.valuation.entry(*p).or_default().extend(set.iter().map(|w| w + offset));
        }
        offset
    }

    fn structurally_sound(&self) -> Result<(), ModelError> {
        let n = self.worlds.len();
        if self.kernel.len() != n || self.successor.len() != n {
            return Err(ModelError::Malformed(validate(self)));
        }
        if let Some(&bad) = self
            .successor
            .iter()
            .chain(self.kernel.iter().flat_map(|row| row.keys()))
            .chain(self.valuation.values().flatten())
            .find(|&&w| w >= n)
        {
            return Err(ModelError::WorldOutOfRange(bad));
        }
        Ok(())
    }

    /// Text form: `{"worlds": [...], "valuation": {...}, "kernel": {...},
    /// "successor": {...}}` with fractions as `num/den` strings.
    pub fn to_json(&self) -> Result<String, ModelError> {
        self.structurally_sound()?;
        let name = |w: &WorldId| self.worlds[*w].clone();
        let file = ModelFile {
            worlds: self.worlds.clone(),
            valuation: self
                .valuation
                .iter()
                .filter(|(_, s)| !s.is_empty())
                .map(|(p, s)| (format!("p{p}"), s.iter().map(name).collect()))
                .collect(),
            kernel: self
                .kernel
                .iter()
                .enumerate()
                .map(|(w, row)| {
                    let cells = row
                        .iter()
                        .filter(|(_, m)| !m.is_zero())
                        .map(|(u, m)| (name(u), rational::fraction_string(m)))
                        .collect();
                    (name(&w), cells)
                })
                .collect(),
            successor: self
                .successor
                .iter()
                .enumerate()
                .map(|(w, s)| (name(&w), name(s)))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<FiniteDmm, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        let mut m = FiniteDmm::new();
        let mut ids = BTreeMap::new();
        for name in &file.worlds {
            if ids.insert(name.clone(), m.add_world(name.clone())).is_some() {
                return Err(ModelError::DuplicateWorld(name.clone()));
            }
        }
        let lookup = |name: &str| ids.get(name).copied().ok_or_else(|| ModelError::UnknownWorld(name.into()));
        for (prop, worlds) in &file.valuation {
            let p = prop
                .strip_prefix('p')
                .and_then(|d| d.parse::<PropId>().ok())
                .filter(|_| prop[1..].bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| ModelError::BadProposition(prop.clone()))?;
            for w in worlds {
                let id = lookup(w)?;
                m.set_prop(p, id, true);
            }
        }
        for (from, row) in &file.kernel {
            let from = lookup(from)?;
            for (to, mass) in row {
                let to = lookup(to)?;
                let mass = rational::parse(mass).ok_or_else(|| ModelError::BadFraction(mass.clone()))?;
                m.kernel[from].insert(to, mass);
            }
        }
        for (w, name) in file.worlds.iter().enumerate() {
            let succ = file.successor.get(name).ok_or_else(|| ModelError::MissingSuccessor(name.clone()))?;
            m.successor[w] = lookup(succ)?;
        }
        if let Some(extra) = file.successor.keys().find(|k| !ids.contains_key(*k)) {
            return Err(ModelError::UnknownWorld(extra.clone()));
        }
        Ok(m)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    worlds: Vec<String>,
    #[serde(default)]
    valuation: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    kernel: BTreeMap<String, BTreeMap<String, String>>,
    successor: BTreeMap<String, String>,
}

/// Every structural problem: rows not summing to 1, negative masses,
/// dangling successor or kernel targets, valuation ids outside the worlds.
/// Empty when the model is well formed.
pub fn validate(m: &FiniteDmm) -> Vec<String> {
    let n = m.worlds.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push("model has no worlds".to_string());
    }
    let label = |w: WorldId| m.worlds.get(w).cloned().unwrap_or_else(|| format!("#{w}"));
    if m.kernel.len() != n {
        out.push(format!("{} kernel rows for {n} worlds", m.kernel.len()));
    }
    if m.successor.len() != n {
        out.push(format!("{} successor entries for {n} worlds", m.successor.len()));
    }
    for (w, row) in m.kernel.iter().enumerate() {
        let mut total = Rational::zero();
        for (u, mass) in row {
            if *u >= n {
                out.push(format!("kernel row {} targets unknown world #{u}", label(w)));
            }
            if mass.is_negative() {
                out.push(format!("negative mass {} in row {}", rational::display(mass), label(w)));
            }
            total += mass;
        }
        if !total.is_one() {
            out.push(format!("row {}: row mass {} ≠ 1", label(w), rational::display(&total)));
        }
    }
    for (w, s) in m.successor.iter().enumerate() {
        if *s >= n {
            out.push(format!("successor of {} points to unknown world #{s}", label(w)));
        }
    }
    for (p, set) in &m.valuation {
        for w in set {
            if *w >= n {
                out.push(format!("valuation of p{p} contains unknown world #{w}"));
            }
        }
    }
    out
}

/// Truth value of `f` at every world.
fn truth_values(m: &FiniteDmm, f: &Formula) -> Vec<bool> {
    let n = m.worlds.len();
    match f {
        Formula::Prop(p) => (0..n).map(|w| m.holds_prop(*p, w)).collect(),
        Formula::Not(g) => truth_values(m, g).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => {
            let (ta, tb) = (truth_values(m, a), truth_values(m, b));
            ta.into_iter().zip(tb).map(|(x, y)| x && y).collect()
        }
        Formula::Next(g) => {
            let tg = truth_values(m, g);
            m.successor.iter().map(|&s| tg[s]).collect()
        }
        Formula::L(r, g) => {
            let tg = truth_values(m, g);
            m.kernel
                .iter()
                .map(|row| {
                    let mass: Rational = row.iter().filter(|(u, _)| tg[**u]).map(|(_, x)| x).sum();
                    mass >= *r
                })
                .collect()
        }
    }
}

/// `M, w ⊨ f`.
pub fn check(m: &FiniteDmm, w: WorldId, f: &Formula) -> Result<bool, ModelError> {
    m.structurally_sound()?;
    if w >= m.worlds.len() {
        return Err(ModelError::WorldOutOfRange(w));
    }
    Ok(truth_values(m, f)[w])
}

/// [`check`] addressing the world by name.
pub fn check_named(m: &FiniteDmm, world: &str, f: &Formula) -> Result<bool, ModelError> {
    let w = m.world_id(world).ok_or_else(|| ModelError::UnknownWorld(world.into()))?;
    check(m, w, f)
}

/// `[[f]] = {w : M, w ⊨ f}`.
pub fn extension(m: &FiniteDmm, f: &Formula) -> Result<BTreeSet<WorldId>, ModelError> {
    m.structurally_sound()?;
    Ok(truth_values(m, f)
        .into_iter()
        .enumerate()
        .filter_map(|(w, b)| b.then_some(w))
        .collect())
}

/// A seeded random model whose kernel rows have denominators at most
/// `denom_bound`: each row spreads `d ≤ denom_bound` unit masses over the
/// worlds and divides by `d`.
pub fn random_model(seed: u64, n_worlds: usize, n_props: u32, denom_bound: u32) -> FiniteDmm {
    assert!(n_worlds >= 1, "a model needs at least one world");
    let denom_bound = denom_bound.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = FiniteDmm::new();
    for w in 0..n_worlds {
        m.add_world(format!("w{w}"));
    }
    for w in 0..n_worlds {
        for p in 0..n_props {
            if rng.random_bool(0.5) {
                m.set_prop(p, w, true);
            }
        }
        m.successor[w] = rng.random_range(0..n_worlds);
        let d = rng.random_range(1..=denom_bound);
        let mut counts = vec![0i64; n_worlds];
        for _ in 0..d {
            counts[rng.random_range(0..n_worlds)] += 1;
        }
        for (u, c) in counts.into_iter().enumerate() {
            if c > 0 {
                m.kernel[w].insert(u, rational::rat(c, d as i64));
            }
        }
    }
    m
}
