//! S-expression surface syntax for expression trees.
//!
//! ```text
//! (delta x)                         (heaviside t +)       (bpow t - 2)
//! (feynman-kernel p 0)              (poly "x0^2" (x))     (string-factor + 1 p e)
//! (smooth "g" (x) (degree x -2) schwartz)
//! (product A B ..)  (tensor A B ..)  (sum A B ..)
//! (pullback (map (from x) (to t) (where "(x0, x1, x2, x3) != 0") "x0^2 - x1^2 - x2^2 - x3^2") A)
//! (pullback (chart lightlike) A)
//! (derivative (x0 x1) A)            (restrict ("e0^2 - e1^2 - e2^2 - e3^2 < 0") A)
//! (smear (e) (testfn (center 0 2 0 0) (radius "1/2") (profile smooth) (normalized #t)) A)
//! (fourier p A)   (scale -1 "i" A)   (extend (x) (fundamental "x0^2 - x1^2 - x2^2 - x3^2") A)
//! (string-integrate e A)
//! ```
//!
//! Signs are the symbols `+` and `-`. Rationals are integers or strings such
//! as `"1/2"`; the reader splits a bare `1/2` into two atoms.

use std::collections::BTreeMap;

use lexpr::Value;

use super::{rat_str, BumpProfile, Chart, ChartMap, DistExpr, ExprError, ExprResult, FtConvention, MapRef, PolyMap, TestFnDescriptor};
use crate::poly::{parse_poly, RatPoly, SlotName, Var};
use crate::scalar::{int, Rational};
use crate::space::{OpenPred, Space};

// ---- printing ---------------------------------------------------------------------

fn quote(s: &str) -> String {
    Value::string(s).to_string()
}

fn rat_atom(q: &Rational) -> String {
    if q.is_integer() {
        rat_str(q)
    } else {
        quote(&q.to_string())
    }
}

fn sign(plus: bool) -> &'static str {
    if plus {
        "+"
    } else {
        "-"
    }
}

fn slot_list(slots: &[SlotName]) -> String {
    let names: Vec<&str> = slots.iter().map(|s| s.as_str()).collect();
    format!("({})", names.join(" "))
}

fn where_clause(preds: &[OpenPred]) -> String {
    if preds.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = preds.iter().map(|p| quote(&p.to_string())).collect();
    format!(" (where {})", parts.join(" "))
}

fn map_sexp(m: &MapRef) -> String {
    match m {
        MapRef::Chart(c) => format!("(chart {})", c.chart.name()),
        MapRef::Poly(m) => {
            let comps: Vec<String> = m.components.iter().map(|c| quote(&c.to_string())).collect();
            format!(
                "(map (from {}) (to {}){} {})",
                slot_list(&m.domain.slots)[1..].trim_end_matches(')'),
                slot_list(&m.codomain.slots)[1..].trim_end_matches(')'),
                where_clause(&m.domain.open_constraints),
                comps.join(" ")
            )
        }
    }
}

fn children_sexp(head: &str, children: &[DistExpr]) -> String {
    let parts: Vec<String> = children.iter().map(to_sexp).collect();
    format!("({head} {})", parts.join(" "))
}

pub fn to_sexp(e: &DistExpr) -> String {
    match e {
        DistExpr::DeltaOrigin { slots } => format!("(delta {})", slot_list(slots).trim_matches(|c| c == '(' || c == ')')),
        DistExpr::Heaviside { slot, plus } => format!("(heaviside {slot} {})", sign(*plus)),
        DistExpr::BoundaryPower { slot, plus, power } => format!("(bpow {slot} {} {power})", sign(*plus)),
        DistExpr::FeynmanMomentumKernel { slot, mass } => format!("(feynman-kernel {slot} {})", rat_atom(mass)),
        DistExpr::Polynomial { space, poly } => format!(
            "(poly {} {}{})",
            quote(&poly.to_string()),
            slot_list(&space.slots),
            where_clause(&space.open_constraints)
        ),
        DistExpr::SmoothSymbol { space, name, degrees, schwartz } => {
            let mut s = format!("(smooth {} {}", quote(name), slot_list(&space.slots));
            for (slot, d) in degrees {
                s.push_str(&format!(" (degree {slot} {})", quote(d)));
            }
            if *schwartz {
                s.push_str(" schwartz");
            }
            s.push_str(&where_clause(&space.open_constraints));
            s.push(')');
            s
        }
        DistExpr::StringFactor { plus, power, p, e } => format!("(string-factor {} {power} {p} {e})", sign(*plus)),
        DistExpr::TensorProduct { children } => children_sexp("tensor", children),
        DistExpr::Product { children } => children_sexp("product", children),
        DistExpr::Sum { children } => children_sexp("sum", children),
        DistExpr::Pullback { map, child } => format!("(pullback {} {})", map_sexp(map), to_sexp(child)),
        DistExpr::Derivative { vars, child } => {
            let names: Vec<String> = vars.iter().map(|v| v.name()).collect();
            format!("(derivative ({}) {})", names.join(" "), to_sexp(child))
        }
        DistExpr::PartialSmear { slots, test_fn, child } => {
            let center: Vec<String> = test_fn.center.iter().map(rat_atom).collect();
            let profile = match test_fn.profile {
                BumpProfile::Smooth => "smooth".to_string(),
                BumpProfile::Polynomial { power } => format!("(polynomial {power})"),
            };
            format!(
                "(smear {} (testfn (center {}) (radius {}) (profile {profile}) (normalized {})) {})",
                slot_list(slots),
                center.join(" "),
                rat_atom(&test_fn.radius),
                if test_fn.normalized { "#t" } else { "#f" },
                to_sexp(child)
            )
        }
        DistExpr::RestrictOpen { preds, child } => {
            let parts: Vec<String> = preds.iter().map(|p| quote(&p.to_string())).collect();
            format!("(restrict ({}) {})", parts.join(" "), to_sexp(child))
        }
        DistExpr::FourierPair { from, child, .. } => format!("(fourier {from} {})", to_sexp(child)),
        DistExpr::Scale { factor, symbol, child } => match symbol {
            Some(s) => format!("(scale {} {} {})", rat_atom(factor), quote(s), to_sexp(child)),
            None => format!("(scale {} {})", rat_atom(factor), to_sexp(child)),
        },
        DistExpr::Extend { slots, fundamental, child } => match fundamental {
            Some(f) => format!("(extend {} (fundamental {}) {})", slot_list(slots), quote(&f.to_string()), to_sexp(child)),
            None => format!("(extend {} {})", slot_list(slots), to_sexp(child)),
        },
        DistExpr::StringIntegrate { e, child } => format!("(string-integrate {e} {})", to_sexp(child)),
    }
}

// ---- reading ----------------------------------------------------------------------

/// Parses every top-level form of `src`.
pub fn parse_sexp(src: &str) -> ExprResult<Vec<DistExpr>> {
    let starts = form_starts(src);
    let mut parser = lexpr::Parser::from_str(src);
    let mut out = Vec::new();
    loop {
        let value = match parser.next_value() {
            Ok(Some(v)) => v,
            Ok(None) => break,
            Err(e) => {
                // the reader's column counts characters consumed on the line,
                // which is the 1-based column of the offending one except at a
                // line start
                let location = e.location().map(|l| (l.line(), l.column().max(1)));
                let msg = e.to_string();
                let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
                return Err(ExprError::Parse { msg, location });
            }
        };
        let location = starts.get(out.len()).copied();
        let mut r = Reader { path: Vec::new() };
        let e = r.expr(&value).map_err(|msg| ExprError::Parse { msg, location })?;
        out.push(e);
    }
    Ok(out)
}

/// Parses exactly one expression.
pub fn parse_expr(src: &str) -> ExprResult<DistExpr> {
    let mut all = parse_sexp(src)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        n => Err(ExprError::Parse { msg: format!("expected one expression, found {n}"), location: None }),
    }
}

/// `(line, column)` of each top-level form, both 1-based.
fn form_starts(src: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 0usize);
    let mut depth = 0i64;
    let mut in_string = false;
    let mut escaped = false;
    let mut in_comment = false;
    let mut in_atom = false;
    for c in src.chars() {
        if c == '\n' {
            line += 1;
            col = 0;
            in_comment = false;
        } else {
            col += 1;
        }
        if in_comment {
            continue;
        }
        if in_string {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            ';' => {
                in_comment = true;
                in_atom = false;
            }
            '(' | '[' => {
                if depth == 0 {
                    out.push((line, col));
                }
                depth += 1;
                in_atom = false;
            }
            ')' | ']' => {
                depth -= 1;
                in_atom = false;
            }
            '"' => {
                if depth == 0 {
                    out.push((line, col));
                }
                in_string = true;
            }
            c if c.is_whitespace() => in_atom = false,
            _ => {
                if depth == 0 && !in_atom {
                    out.push((line, col));
                }
                in_atom = true;
            }
        }
    }
    out
}

struct Reader {
    path: Vec<String>,
}

type R<T> = Result<T, String>;

fn items(v: &Value) -> Option<Vec<&Value>> {
    v.list_iter().map(|it| it.collect())
}

fn name(v: &Value) -> Option<&str> {
    v.as_symbol().or_else(|| v.as_str())
}

impl Reader {
    fn fail<T>(&self, msg: impl Into<String>) -> R<T> {
        let msg = msg.into();
        if self.path.is_empty() {
            Err(msg)
        } else {
            Err(format!("in {}: {msg}", self.path.join(" > ")))
        }
    }

    fn rational(&self, v: &Value) -> R<Rational> {
        if let Some(i) = v.as_i64() {
            return Ok(int(i));
        }
        if v.is_f64() {
            return self.fail(format!("`{v}` is a float; write an exact rational such as 1/2"));
        }
        match name(v).map(|s| s.trim().parse::<Rational>()) {
            Some(Ok(q)) => Ok(q),
            _ => self.fail(format!("expected a rational, got `{v}`")),
        }
    }

    fn uint(&self, v: &Value) -> R<u32> {
        match v.as_u64().and_then(|u| u32::try_from(u).ok()) {
            Some(u) => Ok(u),
            None => self.fail(format!("expected a nonnegative integer, got `{v}`")),
        }
    }

    fn slot(&self, v: &Value) -> R<SlotName> {
        match name(v).and_then(SlotName::parse) {
            Some(s) => Ok(s),
            None => self.fail(format!("unknown slot `{v}`")),
        }
    }

    fn slots(&self, v: &Value) -> R<Vec<SlotName>> {
        match items(v) {
            Some(xs) => xs.into_iter().map(|x| self.slot(x)).collect(),
            None => Ok(vec![self.slot(v)?]),
        }
    }

    fn sign(&self, v: &Value) -> R<bool> {
        match name(v) {
            Some("+" | "plus") => Ok(true),
            Some("-" | "minus") => Ok(false),
            _ => self.fail(format!("expected a sign `+` or `-`, got `{v}`")),
        }
    }

    fn text<'v>(&self, v: &'v Value) -> R<&'v str> {
        match v.as_str() {
            Some(s) => Ok(s),
            None => self.fail(format!("expected a string, got `{v}`")),
        }
    }

    fn polynomial(&self, v: &Value) -> R<RatPoly> {
        let s = match v.as_i64() {
            Some(i) => return Ok(RatPoly::constant(int(i))),
            None => name(v).ok_or(()).or_else(|_| self.fail(format!("expected a polynomial string, got `{v}`")))?,
        };
        parse_poly(s).or_else(|e| self.fail(format!("{e} in `{s}`")))
    }

    fn pred(&self, v: &Value) -> R<OpenPred> {
        let s = self.text(v)?;
        s.parse::<OpenPred>().or_else(|e| self.fail(e))
    }

    /// Splits `(head args..)` into head and arguments.
    fn form<'v>(&self, v: &'v Value) -> R<(&'v str, Vec<&'v Value>)> {
        let xs = match items(v) {
            Some(xs) if !xs.is_empty() => xs,
            _ => return self.fail(format!("expected a form `(head ..)`, got `{v}`")),
        };
        match xs[0].as_symbol() {
            Some(h) => Ok((h, xs[1..].to_vec())),
            None => self.fail(format!("form head must be a symbol, got `{}`", xs[0])),
        }
    }

    /// Optional tagged clause `(tag args..)` among `args`.
    fn clause<'v>(args: &[&'v Value], tag: &str) -> Option<Vec<&'v Value>> {
        args.iter().find_map(|a| {
            let xs = items(a)?;
            (xs.first()?.as_symbol()? == tag).then(|| xs[1..].to_vec())
        })
    }

    fn arity(&self, head: &str, args: &[&Value], lo: usize, hi: usize) -> R<()> {
        if args.len() < lo || args.len() > hi {
            let want = if lo == hi { lo.to_string() } else if hi == usize::MAX { format!("at least {lo}") } else { format!("{lo} to {hi}") };
            return self.fail(format!("`{head}` takes {want} arguments, got {}", args.len()));
        }
        Ok(())
    }

    fn expr(&mut self, v: &Value) -> R<DistExpr> {
        let (head, args) = self.form(v)?;
        self.path.push(head.to_string());
        let out = self.node(head, &args)?;
        match out.space() {
            Ok(_) => {
                self.path.pop();
                Ok(out)
            }
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn child(&mut self, v: &Value) -> R<Box<DistExpr>> {
        self.expr(v).map(Box::new)
    }

    fn node(&mut self, head: &str, args: &[&Value]) -> R<DistExpr> {
        Ok(match head {
            "delta" => {
                self.arity(head, args, 1, usize::MAX)?;
                let slots = args.iter().map(|a| self.slot(a)).collect::<R<Vec<_>>>()?;
                DistExpr::delta(&slots)
            }
            "heaviside" => {
                self.arity(head, args, 1, 2)?;
                let slot = if args.len() == 2 { self.slot(args[0])? } else { SlotName::T };
                DistExpr::Heaviside { slot, plus: self.sign(args[args.len() - 1])? }
            }
            "bpow" => {
                self.arity(head, args, 2, 3)?;
                let slot = if args.len() == 3 { self.slot(args[0])? } else { SlotName::T };
                let n = args.len();
                DistExpr::BoundaryPower { slot, plus: self.sign(args[n - 2])?, power: self.uint(args[n - 1])? }
            }
            "feynman-kernel" => {
                self.arity(head, args, 1, 2)?;
                let slot = if args.len() == 2 { self.slot(args[0])? } else { SlotName::P };
                DistExpr::FeynmanMomentumKernel { slot, mass: self.rational(args[args.len() - 1])? }
            }
            "poly" => {
                self.arity(head, args, 1, 3)?;
                let poly = self.polynomial(args[0])?;
                let explicit = args[1..].iter().find(|a| Self::clause(&[a], "where").is_none());
                let mut space = match explicit {
                    Some(s) => Space::new(self.slots(s)?),
                    None => {
                        let slots: Vec<SlotName> = poly.vars().into_iter().map(|v| v.slot).collect();
                        if slots.is_empty() {
                            return self.fail("constant polynomial needs an explicit slot list");
                        }
                        Space::new(slots)
                    }
                };
                for p in Self::clause(args, "where").unwrap_or_default() {
                    space = space.with(self.pred(p)?);
                }
                DistExpr::Polynomial { space, poly }
            }
            "smooth" => {
                self.arity(head, args, 2, usize::MAX)?;
                let name = self.text(args[0])?.to_string();
                let mut space = Space::new(self.slots(args[1])?);
                let mut degrees = BTreeMap::new();
                let mut schwartz = false;
                for a in &args[2..] {
                    if a.as_symbol() == Some("schwartz") {
                        schwartz = true;
                        continue;
                    }
                    let (tag, rest) = self.form(a)?;
                    match (tag, rest.as_slice()) {
                        ("degree", [s, d]) => {
                            degrees.insert(self.slot(s)?, rat_str(&self.rational(d)?));
                        }
                        ("where", preds) => {
                            for p in preds {
                                space = space.with(self.pred(p)?);
                            }
                        }
                        _ => return self.fail(format!("unexpected clause `{a}`")),
                    }
                }
                DistExpr::SmoothSymbol { space, name, degrees, schwartz }
            }
            "string-factor" => {
                self.arity(head, args, 2, 4)?;
                let (p, e) = if args.len() == 4 { (self.slot(args[2])?, self.slot(args[3])?) } else { (SlotName::P, SlotName::E) };
                DistExpr::StringFactor { plus: self.sign(args[0])?, power: self.uint(args[1])?, p, e }
            }
            "tensor" | "product" | "sum" => {
                self.arity(head, args, 1, usize::MAX)?;
                let children = args.iter().map(|a| self.expr(a)).collect::<R<Vec<_>>>()?;
                match head {
                    "tensor" => DistExpr::TensorProduct { children },
                    "product" => DistExpr::Product { children },
                    _ => DistExpr::Sum { children },
                }
            }
            "pullback" => {
                self.arity(head, args, 2, 2)?;
                let map = self.map(args[0])?;
                DistExpr::Pullback { map, child: self.child(args[1])? }
            }
            "derivative" => {
                self.arity(head, args, 2, 2)?;
                let vars = match items(args[0]) {
                    Some(xs) => xs,
                    None => vec![args[0]],
                };
                let vars = vars
                    .into_iter()
                    .map(|x| name(x).and_then(Var::parse).ok_or(()).or_else(|_| self.fail(format!("unknown coordinate `{x}`"))))
                    .collect::<R<Vec<_>>>()?;
                DistExpr::Derivative { vars, child: self.child(args[1])? }
            }
            "smear" => {
                self.arity(head, args, 3, 3)?;
                let slots = self.slots(args[0])?;
                let test_fn = self.test_fn(args[1])?;
                DistExpr::PartialSmear { slots, test_fn, child: self.child(args[2])? }
            }
            "restrict" => {
                self.arity(head, args, 2, 2)?;
                let preds = match items(args[0]) {
                    Some(xs) => xs.into_iter().map(|p| self.pred(p)).collect::<R<Vec<_>>>()?,
                    None => vec![self.pred(args[0])?],
                };
                DistExpr::RestrictOpen { preds, child: self.child(args[1])? }
            }
            "fourier" => {
                self.arity(head, args, 2, 2)?;
                let from = self.slot(args[0])?;
                let to = match super::dual_slot(from) {
                    Some(t) => t,
                    None => return self.fail(format!("slot {from} has no Fourier dual")),
                };
                DistExpr::FourierPair { from, to, convention: FtConvention::for_slot(from), child: self.child(args[1])? }
            }
            "scale" => {
                self.arity(head, args, 2, 3)?;
                let factor = self.rational(args[0])?;
                let symbol = if args.len() == 3 { Some(self.text(args[1])?.to_string()) } else { None };
                DistExpr::Scale { factor, symbol, child: self.child(args[args.len() - 1])? }
            }
            "extend" => {
                self.arity(head, args, 2, 3)?;
                let slots = self.slots(args[0])?;
                let fundamental = match Self::clause(args, "fundamental") {
                    Some(f) if f.len() == 1 => Some(self.polynomial(f[0])?),
                    Some(_) => return self.fail("`fundamental` takes one polynomial"),
                    None if args.len() == 3 => return self.fail(format!("unexpected clause `{}`", args[1])),
                    None => None,
                };
                DistExpr::Extend { slots, fundamental, child: self.child(args[args.len() - 1])? }
            }
            "string-integrate" => {
                self.arity(head, args, 2, 2)?;
                DistExpr::StringIntegrate { e: self.slot(args[0])?, child: self.child(args[1])? }
            }
            _ => return self.fail(format!("unknown node `{head}`")),
        })
    }

    fn map(&self, v: &Value) -> R<MapRef> {
        let (head, args) = self.form(v)?;
        match head {
            "chart" => {
                self.arity(head, &args, 1, 1)?;
                match name(args[0]).and_then(Chart::parse) {
                    Some(c) => Ok(MapRef::Chart(ChartMap::new(c))),
                    None => self.fail(format!("unknown chart `{}`", args[0])),
                }
            }
            "map" => {
                let from = Self::clause(&args, "from").ok_or(()).or_else(|_| self.fail("map needs a `(from ..)` clause"))?;
                let to = Self::clause(&args, "to").ok_or(()).or_else(|_| self.fail("map needs a `(to ..)` clause"))?;
                let mut domain = Space::new(from.into_iter().map(|s| self.slot(s)).collect::<R<Vec<_>>>()?);
                for p in Self::clause(&args, "where").unwrap_or_default() {
                    domain = domain.with(self.pred(p)?);
                }
                let codomain = Space::new(to.into_iter().map(|s| self.slot(s)).collect::<R<Vec<_>>>()?);
                let components = args
                    .iter()
                    .filter(|a| !a.is_cons())
                    .map(|a| self.polynomial(a))
                    .collect::<R<Vec<_>>>()?;
                PolyMap::new(domain, codomain, components).map(MapRef::Poly).or_else(|e| self.fail(e.to_string()))
            }
            "poly" => {
                self.arity(head, &args, 1, 2)?;
                let f = self.polynomial(args[0])?;
                let mut domain = Space::new(f.vars().into_iter().map(|v| v.slot).collect::<Vec<_>>());
                for p in Self::clause(&args, "where").unwrap_or_default() {
                    domain = domain.with(self.pred(p)?);
                }
                PolyMap::scalar(domain, f).map(MapRef::Poly).or_else(|e| self.fail(e.to_string()))
            }
            _ => self.fail(format!("unknown map `{head}`")),
        }
    }

    fn test_fn(&self, v: &Value) -> R<TestFnDescriptor> {
        let (head, args) = self.form(v)?;
        if head != "testfn" {
            return self.fail(format!("expected `(testfn ..)`, got `{v}`"));
        }
        let center = Self::clause(&args, "center").ok_or(()).or_else(|_| self.fail("testfn needs `(center ..)`"))?;
        let center = center.into_iter().map(|c| self.rational(c)).collect::<R<Vec<_>>>()?;
        let radius = match Self::clause(&args, "radius").as_deref() {
            Some([r]) => self.rational(r)?,
            _ => return self.fail("testfn needs `(radius r)`"),
        };
        let profile = match Self::clause(&args, "profile").as_deref() {
            None => BumpProfile::Smooth,
            Some([p]) if p.as_symbol() == Some("smooth") => BumpProfile::Smooth,
            Some([p]) => match items(p).as_deref() {
                Some([tag, k]) if tag.as_symbol() == Some("polynomial") => BumpProfile::Polynomial { power: self.uint(k)? },
                _ => return self.fail(format!("unknown profile `{p}`")),
            },
            Some(_) => return self.fail("`profile` takes one argument"),
        };
        let normalized = match Self::clause(&args, "normalized").as_deref() {
            None => true,
            Some([b]) => b.as_bool().ok_or(()).or_else(|_| self.fail("`normalized` takes #t or #f"))?,
            Some(_) => return self.fail("`normalized` takes one argument"),
        };
        let t = TestFnDescriptor { center, radius, normalized, profile };
        t.validate().or_else(|e| self.fail(e.to_string()))?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::fourier;
    use crate::poly::minkowski_square;
    use crate::scalar::rat;

    fn samples() -> Vec<DistExpr> {
        let c = TestFnDescriptor::new(vec![int(0), int(2), int(0), int(0)], rat(1, 2)).unwrap();
        let u = DistExpr::string_factor_spacelike(false, 2, SlotName::P, SlotName::E);
        let dressing = DistExpr::poly_on_vars(crate::poly::poly("e1^2"), SlotName::E);
        let q = DistExpr::smear(vec![SlotName::E], c, DistExpr::product(vec![dressing, u]).unwrap()).unwrap();
        let d = fourier(&DistExpr::feynman_kernel(int(0))).unwrap();
        vec![
            DistExpr::delta(&[SlotName::X, SlotName::P]),
            DistExpr::bpow(true, 3),
            DistExpr::feynman_kernel(rat(3, 2)),
            q,
            d.clone(),
            DistExpr::derivative(vec![Var::new(SlotName::X, 0), Var::new(SlotName::X, 3)], d).unwrap(),
            DistExpr::pullback(MapRef::Chart(ChartMap::new(Chart::HMinus1)), DistExpr::string_factor(true, 1, SlotName::P, SlotName::E))
                .unwrap(),
            DistExpr::SmoothSymbol {
                space: Space::minkowski(SlotName::X),
                name: "g \"hat\"".into(),
                degrees: [(SlotName::X, "-3/2".to_string())].into_iter().collect(),
                schwartz: true,
            },
            DistExpr::FourierPair {
                from: SlotName::P,
                to: SlotName::X,
                convention: FtConvention::Minkowski,
                child: Box::new(DistExpr::feynman_kernel(int(1))),
            },
            DistExpr::string_integrate(SlotName::E, DistExpr::poly_on_vars(minkowski_square(SlotName::X), SlotName::X)).unwrap(),
        ]
    }

    #[test]
    fn printing_then_reading_is_the_identity() {
        for e in samples() {
            let s = to_sexp(&e);
            let back = parse_expr(&s).unwrap_or_else(|err| panic!("{s}: {err}"));
            assert_eq!(back, e, "{s}");
        }
    }

    #[test]
    fn json_round_trip() {
        for e in samples() {
            let j = serde_json::to_string(&e).unwrap();
            let back: DistExpr = serde_json::from_str(&j).unwrap();
            assert_eq!(back, e, "{j}");
        }
    }

    #[test]
    fn several_forms_and_comments() {
        let src = "; two kernels\n(feynman-kernel p 0)\n(feynman-kernel \"1/2\") ; massive\n";
        let all = parse_sexp(src).unwrap();
        assert_eq!(all, vec![DistExpr::feynman_kernel(int(0)), DistExpr::feynman_kernel(rat(1, 2))]);
    }

    #[test]
    fn semantic_errors_carry_the_form_line_and_node_path() {
        let src = "(delta x)\n\n  (sum (poly \"x0\")\n       (poly \"p0\"))";
        let err = parse_sexp(src).unwrap_err();
        let ExprError::Parse { msg, location } = err else { panic!() };
        assert_eq!(location, Some((3, 3)));
        assert!(msg.contains("sum"), "{msg}");
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let err = parse_sexp("(delta x\n  (bpow + 1)").unwrap_err();
        assert!(matches!(err, ExprError::Parse { location: Some(_), .. }), "{err}");
        let err = parse_sexp("(delta x))").unwrap_err();
        let ExprError::Parse { msg, location } = err else { panic!() };
        assert_eq!(location, Some((1, 10)));
        assert!(!msg.contains("line"), "{msg}");
    }

    #[test]
    fn malformed_nodes_are_rejected_with_context() {
        for (src, needle) in [
            ("(bpow t * 1)", "sign"),
            ("(feynman-kernel p 0.5)", "float"),
            ("(derivative (y0) (delta x))", "coordinate"),
            ("(wobble x)", "unknown node"),
            ("(smear (e) (testfn (center 1 1 0 0) (radius 1)) (string-factor + 1 p e))", "spacelike"),
            ("(scale 0 (delta x))", "nonzero"),
        ] {
            let err = parse_expr(src).unwrap_err().to_string();
            assert!(err.contains(needle), "{src}: {err}");
        }
    }
}
