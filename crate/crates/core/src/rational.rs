//! Exact rationals and the fixed enumeration of `Q ∩ [0, 1]`.
//!
//! Values are [`num_rational::BigRational`], which is always kept in lowest
//! terms with a positive denominator.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Formats as `num/den`, or just `num` when the denominator is one.
pub fn display(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats as `num/den` unconditionally, the form used in JSON files.
pub fn fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or `num` (optionally signed). Returns `None` on malformed
/// text or a zero denominator.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Calkin–Wilf tree node at breadth-first position `n` (1-based).
fn calkin_wilf(n: &BigUint) -> (BigUint, BigUint) {
    let (mut a, mut b) = (BigUint::one(), BigUint::one());
    let bits = n.bits();
    for i in (0..bits.saturating_sub(1)).rev() {
        if n.bit(i) {
            a += &b;
        } else {
            b += &a;
        }
    }
    (a, b)
}

/// Breadth-first position of `a/b` (coprime, both positive) in the
/// Calkin–Wilf tree.
fn calkin_wilf_index(mut a: BigUint, mut b: BigUint) -> BigUint {
    // runs of identical moves, collected leaf to root
    let mut runs: Vec<(bool, u64)> = Vec::new();
    while !(a.is_one() && b.is_one()) {
        if a < b {
            let t = (&b - 1u32) / &a;
            b -= &t * &a;
            runs.push((false, t.to_u64().expect("path length fits in u64")));
        } else {
            let t = (&a - 1u32) / &b;
            a -= &t * &b;
            runs.push((true, t.to_u64().expect("path length fits in u64")));
        }
    }
    let mut index = BigUint::one();
    for &(right, len) in runs.iter().rev() {
        index <<= len;
        if right {
            index += (BigUint::one() << len) - 1u32;
        }
    }
    index
}

/// The `i`-th rational of `Q ∩ [0, 1]`: 0 and 1 first, then the Calkin–Wilf
/// order restricted to the open unit interval.
///
/// In the Calkin–Wilf tree every left child is below 1 and every right child
/// above, so the values below 1 are exactly the left children, taken in
/// order of their parents.
pub fn enum_rational_big(i: &BigUint) -> Rational {
    if i.is_zero() {
        return Rational::zero();
    }
    if i.is_one() {
        return Rational::one();
    }
    let (a, b) = calkin_wilf(&(i - 1u32));
    let denom = &a + &b;
    Rational::new(BigInt::from(a), BigInt::from(denom))
}

pub fn enum_rational(i: u64) -> Rational {
    enum_rational_big(&BigUint::from(i))
}

/// Inverse of [`enum_rational`]. `None` outside `[0, 1]`.
pub fn rational_index(r: &Rational) -> Option<BigUint> {
    if !is_probability(r) {
        return None;
    }
    if r.is_zero() {
        return Some(BigUint::zero());
    }
    if r.is_one() {
        return Some(BigUint::one());
    }
    let p = r.numer().to_biguint().expect("positive");
    let q = r.denom().to_biguint().expect("positive");
    let parent_den = &q - &p;
    Some(calkin_wilf_index(p, parent_den) + 1u32)
}

/// Iterates `enum_rational(0), enum_rational(1), …` without re-deriving each
/// tree path.
#[derive(Debug, Clone)]
pub struct RationalEnumeration {
    position: u64,
    // current Calkin–Wilf node, valid once position >= 2
    node: (BigInt, BigInt),
}

impl RationalEnumeration {
    pub fn new() -> Self {
        RationalEnumeration { position: 0, node: (BigInt::one(), BigInt::one()) }
    }
}

impl Default for RationalEnumeration {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for RationalEnumeration {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        let pos = self.position;
        self.position += 1;
        match pos {
            0 => Some(Rational::zero()),
            1 => Some(Rational::one()),
            2 => Some(rat(1, 2)),
            _ => {
                // Newman's successor: x' = 1 / (2 floor(x) - x + 1)
                let (a, b) = &self.node;
                let fl = a.div_floor(b);
                let num = b.clone();
                let den = (BigInt::from(2) * fl + 1) * b - a;
                self.node = (num, den);
                let (a, b) = &self.node;
                Some(Rational::new(a.clone(), a + b))
            }
        }
    }
}

/// Least common multiple of the denominators, 1 for an empty input.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}
