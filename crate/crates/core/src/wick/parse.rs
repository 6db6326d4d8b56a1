//! Line-oriented monomial input, one interaction vertex per line:
//!
//! ```text
//! # comment
//! x: A(1,0)@e1 phi(0) d01.phi(1)
//! y: F(1,0) phi(0)
//! ```
//!
//! `phi(m)` is a scalar of mass `m`, `A(s,m)` a string-localized potential
//! that must name its string after `@`, `F(s,m)` its field strength, and a
//! `dNN.` prefix lists derivative components.

use std::fmt;

use super::{validate_product, FieldFactor, FieldMonomial, Species};
use num_traits::Signed;

use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        // comments run to the end of the line
        let body = src.split('#').next().unwrap_or("");
        Cursor { chars: body.chars().collect(), pos: 0, line }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(got) => self.err(format!("expected `{c}`, found `{got}`")),
                None => self.err(format!("expected `{c}` before end of line")),
            }
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an identifier");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn args(&mut self) -> Result<Vec<(usize, String)>, ParseError> {
        self.expect('(')?;
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            while self.peek().is_some_and(|c| !matches!(c, ',' | ')') && !c.is_whitespace()) {
                self.pos += 1;
            }
            out.push((start, self.chars[start..self.pos].iter().collect()));
            self.skip_ws();
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn factor(&mut self) -> Result<FieldFactor, ParseError> {
        let mut derivs = Vec::new();
        let save = self.pos;
        if self.eat('d') && self.peek().is_some_and(|c| c.is_ascii_digit()) {
            while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                if c > '3' {
                    return self.err(format!("derivative component {c} out of range 0..=3"));
                }
                derivs.push(c as u8 - b'0');
                self.pos += 1;
            }
            self.expect('.')?;
        } else {
            self.pos = save;
        }
        let name_at = self.pos;
        let name = self.ident()?;
        let args = self.args()?;
        let number = |cur: &Self, (at, s): &(usize, String)| -> Result<Rational, ParseError> {
            s.parse::<Rational>().map_err(|_| ParseError {
                line: cur.line,
                column: at + 1,
                message: format!("`{s}` is not a rational number"),
            })
        };
        let spin = |cur: &Self, (at, s): &(usize, String)| -> Result<u32, ParseError> {
            match s.parse::<u32>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(ParseError { line: cur.line, column: at + 1, message: format!("spin `{s}` must be a positive integer") }),
            }
        };
        let arity = |cur: &Self, n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(ParseError {
                    line: cur.line,
                    column: name_at + 1,
                    message: format!("{name} takes {n} argument(s), got {}", args.len()),
                })
            }
        };
        let species = match name.as_str() {
            "phi" => {
                arity(self, 1)?;
                Species::Scalar { mass: number(self, &args[0])? }
            }
            "A" | "F" => {
                arity(self, 2)?;
                let (spin, mass) = (spin(self, &args[0])?, number(self, &args[1])?);
                if name == "A" {
                    Species::Potential { spin, mass }
                } else {
                    Species::FieldStrength { spin, mass }
                }
            }
            _ => {
                self.pos = name_at;
                return self.err(format!("unknown field `{name}`; expected phi, A or F"));
            }
        };
        if species.mass().is_negative() {
            self.pos = name_at;
            return self.err("mass must be nonnegative");
        }
        let string = if self.eat('@') { Some(self.ident()?) } else { None };
        match (&string, species.string_localized()) {
            (None, true) => self.err("a potential needs its string variable after `@`"),
            (Some(_), false) => self.err("only potentials carry a string variable"),
            _ => Ok(FieldFactor { species, derivs, string }),
        }
    }
}

pub fn parse_monomials(src: &str) -> Result<Vec<FieldMonomial>, ParseError> {
    let mut out: Vec<FieldMonomial> = Vec::new();
    let mut seen = std::collections::BTreeMap::<String, (usize, usize)>::new();
    for (i, raw) in src.lines().enumerate() {
        let mut cur = Cursor::new(raw, i + 1);
        cur.skip_ws();
        if cur.peek().is_none() {
            continue;
        }
        let label_at = cur.pos;
        let point = cur.ident()?;
        cur.skip_ws();
        cur.expect(':')?;
        let mut factors = Vec::new();
        loop {
            cur.skip_ws();
            if cur.peek().is_none() {
                break;
            }
            let at = cur.pos;
            let f = cur.factor()?;
            if let Some(s) = &f.string {
                if let Some((l, c)) = seen.insert(s.clone(), (i + 1, at + 1)) {
                    cur.pos = at;
                    return cur.err(format!("string `{s}` already used at {l}:{c}; every potential needs its own"));
                }
            }
            factors.push(f);
        }
        if out.iter().any(|m| m.point == point) {
            cur.pos = label_at;
            return cur.err(format!("point `{point}` appears twice"));
        }
        out.push(FieldMonomial { point, factors });
    }
    debug_assert!(validate_product(&out).is_ok());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn reads_the_documented_example() {
        let m = parse_monomials("# vertices\nx: A(1,0)@e1 phi(0) d01.phi(1)\n\ny : F(2,1/2) phi(0)  # tail\n").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].point, "x");
        assert_eq!(m[0].factors[0], FieldFactor::potential(1, int(0), "e1"));
        assert_eq!(m[0].factors[2], FieldFactor::scalar(int(1)).with_derivs(&[0, 1]));
        assert_eq!(m[1].factors[0].species, Species::FieldStrength { spin: 2, mass: crate::scalar::rat(1, 2) });
    }

    fn at(src: &str) -> (usize, usize) {
        let e = parse_monomials(src).unwrap_err();
        (e.line, e.column)
    }

    #[test]
    fn errors_point_at_the_offending_token() {
        assert_eq!(at("x: phi(0)\ny: psi(0)"), (2, 4));
        assert_eq!(at("x: A(1,0)"), (1, 10));
        assert_eq!(at("x: A(1,0)@e\ny: A(1,0)@e"), (2, 4));
        assert_eq!(at("x phi(0)"), (1, 3));
        assert_eq!(at("x: phi(a)"), (1, 8));
        assert_eq!(at("x: A(0,0)@e"), (1, 6));
        assert_eq!(at("x: d4.phi(0)"), (1, 5));
        assert_eq!(at("x: phi(0)@e"), (1, 12));
        assert_eq!(at("x: phi(0)\nx: phi(0)"), (2, 1));
        assert_eq!(at("x: phi(0,1)"), (1, 4));
    }
}
