//! Sparse multivariate polynomials over named coordinates.
//!
//! Coordinates are `(slot, component)` pairs such as `p0` or `ep3`, so
//! polynomials built for one space remain meaningful after tensoring into a
//! larger space without index remapping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{Rational, Scalar};

/// Named coordinate blocks. Declaration order is the canonical slot order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotName {
    T,
    X,
    P,
    E,
    Ep,
    Tau,
    Phi,
    Theta,
    /// Auxiliary covector coordinates, only ever existentially quantified.
    K,
}

impl SlotName {
    pub const ALL: [SlotName; 9] = [
        SlotName::T,
        SlotName::X,
        SlotName::P,
        SlotName::E,
        SlotName::Ep,
        SlotName::Tau,
        SlotName::Phi,
        SlotName::Theta,
        SlotName::K,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SlotName::T => "t",
            SlotName::X => "x",
            SlotName::P => "p",
            SlotName::E => "e",
            SlotName::Ep => "ep",
            SlotName::Tau => "tau",
            SlotName::Phi => "phi",
            SlotName::Theta => "theta",
            SlotName::K => "k",
        }
    }

    /// Minkowski 4-vector slots; the rest are one-dimensional real lines.
    pub fn is_minkowski(self) -> bool {
        matches!(self, SlotName::X | SlotName::P | SlotName::E | SlotName::Ep | SlotName::K)
    }

    pub fn default_dim(self) -> u8 {
        if self.is_minkowski() {
            4
        } else {
            1
        }
    }

    pub fn parse(s: &str) -> Option<SlotName> {
        SlotName::ALL.into_iter().find(|n| n.as_str() == s)
    }
}

impl fmt::Display for SlotName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One coordinate: component `comp` of slot `slot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub slot: SlotName,
    pub comp: u8,
}

impl Var {
    pub const fn new(slot: SlotName, comp: u8) -> Self {
        Var { slot, comp }
    }

    pub fn name(&self) -> String {
        if self.slot.is_minkowski() {
            format!("{}{}", self.slot.as_str(), self.comp)
        } else {
            self.slot.as_str().to_string()
        }
    }

    /// Parses `x0`, `ep3`, `t`, `tau`, ... (longest slot prefix wins).
    pub fn parse(s: &str) -> Option<Var> {
        let mut names: Vec<SlotName> = SlotName::ALL.to_vec();
        names.sort_by_key(|n| std::cmp::Reverse(n.as_str().len()));
        for n in names {
            if let Some(rest) = s.strip_prefix(n.as_str()) {
                if rest.is_empty() {
                    if n.is_minkowski() {
                        continue;
                    }
                    return Some(Var::new(n, 0));
                }
                if let Ok(c) = rest.parse::<u8>() {
                    if c < n.default_dim() {
                        return Some(Var::new(n, c));
                    }
                }
            }
        }
        None
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Var {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Var {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Var::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown coordinate `{s}`")))
    }
}

/// Sorted list of (variable, exponent) with exponents ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut m: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *m.entry(v).or_default() += e;
            }
        }
        Monomial(m.into_iter().collect())
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, pred: impl Fn(Var) -> bool) -> u32 {
        self.0.iter().filter(|(v, _)| pred(*v)).map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_pairs(self.0.iter().chain(other.0.iter()).copied())
    }

    fn without(&self, v: Var) -> (Monomial, u32) {
        let e = self.exponent(v);
        (Monomial(self.0.iter().filter(|(w, _)| *w != v).copied().collect()), e)
    }
}

/// Polynomial with coefficients in `S`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly<S> {
    terms: BTreeMap<Monomial, S>,
}

pub type RatPoly = Poly<Rational>;

impl<S: Scalar> Default for Poly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), S::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, S)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(S::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<S> {
        match self.terms.len() {
            0 => Some(S::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn constant_term(&self) -> S {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(S::zero)
    }

    /// `Some((c, v))` for polynomials of the form `c·v`.
    pub fn as_scaled_var(&self) -> Option<(S, Var)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        match m.pairs() {
            [(v, 1)] => Some((c.clone(), *v)),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.pairs().iter().map(|(v, _)| *v)).collect()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in_var(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Common degree of every term in the selected variables, if homogeneous.
    pub fn homogeneous_degree_in(&self, pred: impl Fn(Var) -> bool + Copy) -> Option<u32> {
        let mut degs = self.terms.keys().map(|m| m.degree_in(pred));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * s.clone())).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, v: Var) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.without(v);
            if e == 0 {
                continue;
            }
            let m2 = rest.mul(&Monomial::from_pairs([(v, e - 1)]));
            out.add_term(m2, c.clone() * S::from_i64(e as i64));
        }
        out
    }

    /// Full evaluation; missing variables are an error.
    pub fn eval(&self, value: impl Fn(Var) -> Option<S>) -> Option<S> {
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.pairs() {
                let x = value(*v)?;
                for _ in 0..*e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        Some(acc)
    }

    /// Partial evaluation: substitutes the variables `value` knows about.
    pub fn substitute(&self, value: impl Fn(Var) -> Option<S>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (v, e) in m.pairs() {
                match value(*v) {
                    Some(x) => {
                        for _ in 0..*e {
                            coeff = coeff * x.clone();
                        }
                    }
                    None => rest.push((*v, *e)),
                }
            }
            out.add_term(Monomial::from_pairs(rest), coeff);
        }
        out
    }

    /// Replaces variables by polynomials (composition).
    pub fn compose(&self, image: impl Fn(Var) -> Option<Poly<S>>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (v, e) in m.pairs() {
                let base = image(*v).unwrap_or_else(|| Poly::var(*v));
                t = t.mul(&base.pow(*e));
            }
            out = out.add(&t);
        }
        out
    }

    /// Renames every variable of slot `from` into slot `to`.
    pub fn rename_slot(&self, from: SlotName, to: SlotName) -> Self {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let pairs = m.pairs().iter().map(|(v, e)| {
                if v.slot == from {
                    (Var::new(to, v.comp), *e)
                } else {
                    (*v, *e)
                }
            });
            (Monomial::from_pairs(pairs), c.clone())
        }))
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Coefficient of the highest monomial (ordering-dependent but deterministic).
    pub fn leading_coeff(&self) -> Option<&S> {
        self.terms.iter().next_back().map(|(_, c)| c)
    }

    /// Univariate view in `v`: coefficient polynomials indexed by power.
    pub fn coefficients_in(&self, v: Var) -> Vec<Poly<S>> {
        let deg = self.degree_in_var(v) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.without(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }
}

impl RatPoly {
    /// Divides by the gcd of numerators (and lcm of denominators) so that
    /// coefficients are coprime integers; `positive_lead` also fixes the sign.
    pub fn primitive(&self, positive_lead: bool) -> RatPoly {
        use num_integer::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let mut g = num_bigint::BigInt::zero();
        let mut l = num_bigint::BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        let mut factor = Rational::new(l, g);
        if positive_lead && self.leading_coeff().map(|c| c < &Rational::zero()).unwrap_or(false) {
            factor = -factor;
        }
        self.scale(&factor)
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = *c < S::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let is_one = abs == S::one();
            if m.degree() == 0 {
                write!(f, "{abs}")?;
                continue;
            }
            if !is_one {
                write!(f, "{abs}*")?;
            }
            let parts: Vec<String> = m
                .pairs()
                .iter()
                .map(|(v, e)| if *e == 1 { v.name() } else { format!("{}^{}", v.name(), e) })
                .collect();
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Serialize for RatPoly {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RatPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_poly(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("polynomial parse error at byte {pos}: {msg}")]
pub struct PolyParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parses strings such as `x0^2 - x1^2 - 2*p0*e0 + 3/2`.
pub fn parse_poly(s: &str) -> Result<RatPoly, PolyParseError> {
    let mut p = PolyParser { src: s.as_bytes(), pos: 0 };
    let out = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct PolyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl PolyParser<'_> {
    fn err(&self, msg: &str) -> PolyParseError {
        PolyParseError { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<RatPoly, PolyParseError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.product()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<RatPoly, PolyParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    let c = d.as_constant().ok_or_else(|| self.err("division by a non-constant"))?;
                    if c.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    acc = acc.scale(&(Rational::one() / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<RatPoly, PolyParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("expected exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatPoly, PolyParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(self.power()?.neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: num_bigint::BigInt = txt.parse().map_err(|_| self.err("bad integer"))?;
                Ok(RatPoly::constant(Rational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v = Var::parse(txt).ok_or_else(|| PolyParseError {
                    pos: start,
                    msg: format!("unknown coordinate `{txt}`"),
                })?;
                Ok(RatPoly::var(v))
            }
            _ => Err(self.err("expected number, coordinate or `(`")),
        }
    }
}

/// Convenience: parse or panic (for literals in library code and tests).
pub fn poly(s: &str) -> RatPoly {
    parse_poly(s).unwrap_or_else(|e| panic!("bad polynomial literal {s:?}: {e}"))
}

/// Minkowski square `v0² - v1² - v2² - v3²` of a 4-vector slot.
pub fn minkowski_square(slot: SlotName) -> RatPoly {
    minkowski_dot(slot, slot)
}

/// Minkowski product `(a b)` of two 4-vector slots.
pub fn minkowski_dot(a: SlotName, b: SlotName) -> RatPoly {
    let mut out = RatPoly::zero();
    for i in 0..4u8 {
        let t = RatPoly::var(Var::new(a, i)).mul(&RatPoly::var(Var::new(b, i)));
        out = if i == 0 { out.add(&t) } else { out.sub(&t) };
    }
    out
}

/// Euclidean norm square of a slot (used to encode `v ≠ 0` as `|v|² > 0`).
pub fn euclidean_square(slot: SlotName) -> RatPoly {
    let mut out = RatPoly::zero();
    for i in 0..slot.default_dim() {
        out = out.add(&RatPoly::var(Var::new(slot, i)).pow(2));
    }
    out
}

/// Minkowski product of a slot with a fixed rational vector.
pub fn minkowski_dot_const(slot: SlotName, v: &[Rational; 4]) -> RatPoly {
    let mut out = RatPoly::zero();
    for (i, c) in v.iter().enumerate() {
        let t = RatPoly::var(Var::new(slot, i as u8)).scale(c);
        out = if i == 0 { out.add(&t) } else { out.sub(&t) };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn parse_and_display_round_trip() {
        let p = poly("x0^2 - x1^2 - x2^2 - x3^2");
        assert_eq!(p, minkowski_square(SlotName::X));
        let q = parse_poly(&p.to_string()).unwrap();
        assert_eq!(p, q);
        let r = poly("3/2*ep0*e1 - (p0 + 1)^2");
        assert_eq!(parse_poly(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn parse_rejects_unknown_names() {
        assert!(parse_poly("y0 + 1").is_err());
        assert!(parse_poly("x4").is_err());
        assert!(parse_poly("x0 / x1").is_err());
    }

    #[test]
    fn one_dimensional_slots_parse_bare() {
        assert_eq!(Var::parse("t"), Some(Var::new(SlotName::T, 0)));
        assert_eq!(Var::parse("tau"), Some(Var::new(SlotName::Tau, 0)));
        assert_eq!(Var::parse("theta"), Some(Var::new(SlotName::Theta, 0)));
        assert_eq!(Var::parse("ep2"), Some(Var::new(SlotName::Ep, 2)));
    }

    #[test]
    fn derivative_and_eval() {
        let p = poly("x0^2 - x1^2");
        let d = p.derivative(Var::new(SlotName::X, 1));
        assert_eq!(d, poly("-2*x1"));
        let v = p.eval(|v| Some(int(v.comp as i64 + 2))).unwrap();
        assert_eq!(v, int(4 - 9));
    }

    #[test]
    fn compose_pulls_back() {
        let t = poly("t^2 + t");
        let x2 = minkowski_square(SlotName::X);
        let pulled = t.compose(|v| (v.slot == SlotName::T).then(|| x2.clone()));
        assert_eq!(pulled, x2.pow(2).add(&x2));
    }

    #[test]
    fn primitive_normalizes() {
        let p = poly("-4/3*x0 + 2/3*x1");
        assert_eq!(p.primitive(true), poly("x1 - 2*x0"));
        assert_eq!(poly("6*x0").primitive(false), poly("x0"));
        assert_eq!(poly("1/2").primitive(true), RatPoly::constant(rat(1, 1)));
    }

    #[test]
    fn homogeneity_detection() {
        let p = minkowski_dot(SlotName::P, SlotName::E);
        assert_eq!(p.homogeneous_degree_in(|v| v.slot == SlotName::P), Some(1));
        assert_eq!(poly("p0^2 - 1").homogeneous_degree_in(|v| v.slot == SlotName::P), None);
    }
}
