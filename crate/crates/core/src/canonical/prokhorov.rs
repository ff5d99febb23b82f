//! Finitely supported measures on a rational metric space and their
//! exact Prokhorov distance.
//!
//! With distance levels `0 = d_0 < d_1 < … < d_K`, every `ε ∈ (d_k, d_{k+1}]`
//! gives the same open enlargement `A^ε = {x : d(x, A) ≤ d_k}`. The worst
//! gap `max_A μ(A) − ν(A^ε)` on that interval is the Hall deficiency of the
//! bipartite graph joining points at distance at most `d_k`, i.e.
//! `1 − maxflow`. The distance is the least `ε` that covers its own gap.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::CanonicalError;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteMeasure {
    pub points: Vec<String>,
    pub weights: BTreeMap<String, Rational>,
    /// keyed by the ordered pair `(min, max)`; the diagonal is implicit
    pub distance: BTreeMap<(String, String), Rational>,
}

fn pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl FiniteMeasure {
    /// `δ_point` over the given metric.
    pub fn dirac(point: &str, distance: BTreeMap<(String, String), Rational>) -> Self {
        FiniteMeasure {
            points: vec![point.to_string()],
            weights: [(point.to_string(), Rational::one())].into_iter().collect(),
            distance,
        }
    }

    pub fn set_distance(&mut self, a: &str, b: &str, d: Rational) {
        self.distance.insert(pair(a, b), d);
    }

    pub fn distance(&self, a: &str, b: &str) -> Option<Rational> {
        if a == b {
            return Some(Rational::zero());
        }
        self.distance.get(&pair(a, b)).cloned()
    }

    pub fn weight(&self, point: &str) -> Rational {
        self.weights.get(point).cloned().unwrap_or_else(Rational::zero)
    }

    /// Weights form a probability vector on the listed points and the
    /// distance table is a metric on them.
    pub fn validate(&self) -> Result<(), CanonicalError> {
        let bad = |msg: String| Err(CanonicalError::InvalidMeasure(msg));
        let listed: BTreeSet<&String> = self.points.iter().collect();
        if listed.len() != self.points.len() {
            return bad("duplicate point".into());
        }
        let mut total = Rational::zero();
        for (p, w) in &self.weights {
            if !listed.contains(p) {
                return bad(format!("weight for unlisted point '{p}'"));
            }
            if w.is_negative() {
                return bad(format!("negative weight at '{p}'"));
            }
            total += w;
        }
        if !total.is_one() {
            return bad(format!("weights sum to {}", rational::display(&total)));
        }
        for ((a, b), d) in &self.distance {
            if a == b {
                if !d.is_zero() {
                    return bad(format!("nonzero self-distance at '{a}'"));
                }
            } else if !d.is_positive() {
                return bad(format!("distance {a}|{b} is not positive"));
            }
        }
        let pts = &self.points;
        for a in pts {
            for b in pts {
                for c in pts {
                    if let (Some(ab), Some(bc), Some(ac)) =
                        (self.distance(a, b), self.distance(b, c), self.distance(a, c))
                    {
                        if ac > ab + bc {
                            return bad(format!("triangle inequality fails on {a}, {b}, {c}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, CanonicalError> {
        let file = MeasureFile {
            points: self.points.clone(),
            weights: self.weights.iter().map(|(p, w)| (p.clone(), rational::fraction_string(w))).collect(),
            distance: self
                .distance
                .iter()
                .map(|((a, b), d)| (format!("{a}|{b}"), rational::fraction_string(d)))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CanonicalError> {
        let file: MeasureFile = serde_json::from_str(text)?;
        let frac = |s: &String| rational::parse(s).ok_or_else(|| CanonicalError::InvalidMeasure(format!("bad fraction '{s}'")));
        let mut m = FiniteMeasure { points: file.points, ..Default::default() };
        for (p, w) in &file.weights {
            m.weights.insert(p.clone(), frac(w)?);
        }
        for (key, d) in &file.distance {
            let (a, b) = key
                .split_once('|')
                .ok_or_else(|| CanonicalError::InvalidMeasure(format!("distance key '{key}' is not 'a|b'")))?;
            m.set_distance(a, b, frac(d)?);
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureFile {
    points: Vec<String>,
    weights: BTreeMap<String, String>,
    #[serde(default)]
    distance: BTreeMap<String, String>,
}

/// Joint distance lookup over the union of both supports.
fn joint_metric(
    mu: &FiniteMeasure,
    nu: &FiniteMeasure,
) -> Result<(Vec<String>, Vec<Vec<Rational>>), CanonicalError> {
    let mut points: Vec<String> = mu.points.clone();
    for p in &nu.points {
        if !points.contains(p) {
            points.push(p.clone());
        }
    }
    let mut table = vec![vec![Rational::zero(); points.len()]; points.len()];
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate() {
            let d = match (mu.distance(a, b), nu.distance(a, b)) {
                (Some(x), Some(y)) if x != y => {
                    return Err(CanonicalError::IncompatibleSupports(format!(
                        "the tables disagree on {a}|{b}"
                    )))
                }
                (Some(x), _) | (None, Some(x)) => x,
                (None, None) => {
                    return Err(CanonicalError::IncompatibleSupports(format!("no distance for {a}|{b}")))
                }
            };
            table[i][j] = d;
        }
    }
    Ok((points, table))
}

/// Max flow from `source` to `sink` (Edmonds–Karp, exact arithmetic).
fn max_flow(mut cap: Vec<Vec<Rational>>, source: usize, sink: usize) -> Rational {
    let n = cap.len();
    let mut total = Rational::zero();
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v].is_positive() {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            return total;
        }
        let mut bottleneck: Option<Rational> = None;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            if bottleneck.as_ref().is_none_or(|b| cap[u][v] < *b) {
                bottleneck = Some(cap[u][v].clone());
            }
            v = u;
        }
        let b = bottleneck.expect("path has an edge");
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] -= &b;
            cap[v][u] += &b;
            v = u;
        }
        total += b;
    }
}

/// `max_A μ(A) − ν({x : d(x, A) ≤ radius})`.
fn hall_deficiency(points: &[String], table: &[Vec<Rational>], mu: &FiniteMeasure, nu: &FiniteMeasure, radius: &Rational) -> Rational {
    let n = points.len();
    // 0 source, 1..=n left copies, n+1..=2n right copies, 2n+1 sink
    let (source, sink) = (0, 2 * n + 1);
    let mut cap = vec![vec![Rational::zero(); 2 * n + 2]; 2 * n + 2];
    for (i, p) in points.iter().enumerate() {
        cap[source][1 + i] = mu.weight(p);
        cap[1 + n + i][sink] = nu.weight(p);
        for j in 0..n {
            if table[i][j] <= *radius {
                cap[1 + i][1 + n + j] = Rational::one();
            }
        }
    }
    Rational::one() - max_flow(cap, source, sink)
}

/// Exact Prokhorov distance `inf{ε > 0 : μ(A) ≤ ν(A^ε) + ε for all A}`
/// with the open enlargement `A^ε = {x : d(x, A) < ε}`.
pub fn prokhorov(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<Rational, CanonicalError> {
    mu.validate()?;
    nu.validate()?;
    let (points, table) = joint_metric(mu, nu)?;
    let levels: Vec<Rational> = table
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut best = Rational::one();
    for (k, dk) in levels.iter().enumerate() {
        let gap = hall_deficiency(&points, &table, mu, nu, dk);
        let fits = levels.get(k + 1).is_none_or(|next| gap <= *next);
        if fits {
            let candidate = if gap > *dk { gap } else { dk.clone() };
            if candidate < best {
                best = candidate;
            }
            break;
        }
    }
    Ok(best)
}
