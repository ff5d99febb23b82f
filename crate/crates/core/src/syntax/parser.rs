//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := iff
//! iff     := imp ("<->" imp)*
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "X" unary | "L[" rational "]" unary
//!          | "M[" rational "]" unary | atom
//! atom    := "p" digits | "T" | "F" | "(" formula ")"
//! ```
//!
//! `->` associates to the right, the other binary connectives to the left.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::Formula;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("index {value} at offset {position} lies outside [0, 1]")]
    IndexOutOfRange { position: usize, value: String },
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser { text, pos: 0 };
    let f = parser.formula()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(parser.expected("end of input"));
    }
    Ok(f)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.expected(&format!("'{token}'")))
        }
    }

    fn expected(&self, what: &str) -> ParseError {
        ParseError::Syntax { position: self.pos, expected: what.to_string() }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.imp()?;
        while self.eat("<->") {
            let g = self.imp()?;
            f = Formula::iff(f, g);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let f = self.or()?;
        if self.eat("->") {
            let g = self.imp()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and()?;
        while self.eat("|") {
            let g = self.and()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            let g = self.unary()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("X") {
            return Ok(Formula::next(self.unary()?));
        }
        if self.eat("L") {
            let r = self.bracketed_index()?;
            return Ok(Formula::l(r, self.unary()?));
        }
        if self.eat("M") {
            let r = self.bracketed_index()?;
            return Ok(Formula::m(r, self.unary()?));
        }
        self.atom()
    }

    fn bracketed_index(&mut self) -> Result<Rational, ParseError> {
        self.expect("[")?;
        self.skip_ws();
        let start = self.pos;
        let numer = self.digits()?;
        let denom = if self.eat("/") { self.digits()? } else { BigInt::from(1) };
        if denom.is_zero() {
            return Err(ParseError::Syntax {
                position: start,
                expected: "nonzero denominator".into(),
            });
        }
        let r = Rational::new(numer, denom);
        if !rational::is_probability(&r) {
            return Err(ParseError::IndexOutOfRange {
                position: start,
                value: rational::display(&r),
            });
        }
        self.expect("]")?;
        Ok(r)
    }

    fn digits(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let len = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return Err(self.expected("digits"));
        }
        let value = self.rest()[..len].parse().expect("ascii digits");
        self.pos += len;
        Ok(value)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.eat("T") {
            return Ok(Formula::top());
        }
        if self.eat("F") {
            return Ok(Formula::bottom());
        }
        if self.rest().starts_with('p') {
            let start = self.pos;
            self.pos += 1;
            let len = self.rest().bytes().take_while(u8::is_ascii_digit).count();
            if len == 0 {
                return Err(self.expected("proposition number after 'p'"));
            }
            let id = self.rest()[..len].parse().map_err(|_| ParseError::Syntax {
                position: start,
                expected: "proposition number below 2^32".into(),
            })?;
            self.pos += len;
            return Ok(Formula::Prop(id));
        }
        Err(self.expected("formula"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn p(i: u32) -> Formula {
        Formula::Prop(i)
    }

    #[test]
    fn examples() {
        assert_eq!(
            parse("L[1/2] p0 & !p1").unwrap(),
            Formula::and(Formula::l(rat(1, 2), p(0)), Formula::not(p(1)))
        );
        assert_eq!(parse("M[1/4] p0").unwrap(), Formula::l(rat(3, 4), Formula::not(p(0))));
        assert!(matches!(parse("L[3/2] p0"), Err(ParseError::IndexOutOfRange { .. })));
    }

    #[test]
    fn derived_connectives() {
        assert_eq!(parse("F").unwrap(), Formula::bottom());
        assert_eq!(parse("T").unwrap(), Formula::top());
        assert_eq!(parse("p0 | p1").unwrap(), Formula::or(p(0), p(1)));
        assert_eq!(
            parse("p0 -> p1 -> p2").unwrap(),
            Formula::implies(p(0), Formula::implies(p(1), p(2)))
        );
        assert_eq!(parse("p0 <-> p1").unwrap(), Formula::iff(p(0), p(1)));
        assert_eq!(parse("X!p0").unwrap(), Formula::next(Formula::not(p(0))));
        assert_eq!(parse(" L [ 2 / 4 ] ( p0 ) ").unwrap(), Formula::l(rat(1, 2), p(0)));
        assert_eq!(parse("L[1] p0").unwrap(), Formula::l(rat(1, 1), p(0)));
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse("p0 & p1 | p2").unwrap(),
            Formula::or(Formula::and(p(0), p(1)), p(2))
        );
        assert_eq!(parse("!p0 & p1").unwrap(), Formula::and(Formula::not(p(0)), p(1)));
        assert_eq!(
            parse("p0 & p1 & p2").unwrap(),
            Formula::and(Formula::and(p(0), p(1)), p(2))
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("p0 &"),
            Err(ParseError::Syntax { position: 4, expected: "formula".into() })
        );
        assert!(matches!(parse("p0 p1"), Err(ParseError::Syntax { position: 3, .. })));
        assert!(matches!(parse("L[1/0] p0"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("q0"), Err(ParseError::Syntax { position: 0, .. })));
        assert!(matches!(parse("(p0"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("M[5/4] p0"), Err(ParseError::IndexOutOfRange { .. })));
    }
}
