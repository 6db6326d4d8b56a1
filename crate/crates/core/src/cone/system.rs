//! Conjunctions of polynomial equations and open predicates over base
//! coordinates: exact pinning propagation (an infeasibility prover) and an
//! exact rational point sampler.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::poly::{RatPoly, SlotName, Var};
use crate::scalar::{rational_sqrt, Rational};
use crate::space::{slot_vars, OpenPred};

pub type Assignment = BTreeMap<Var, Rational>;

/// Existential coordinates ranging over a closed Euclidean ball.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HiddenBall {
    pub slot: SlotName,
    pub center: Vec<Rational>,
    pub radius: Rational,
}

impl HiddenBall {
    pub fn vars(&self) -> Vec<Var> {
        slot_vars(self.slot)
    }

    pub fn contains(&self, pt: &Assignment) -> Option<bool> {
        let mut d2 = Rational::zero();
        for (v, c) in self.vars().iter().zip(&self.center) {
            let x = pt.get(v)?;
            d2 += (x - c) * (x - c);
        }
        Some(d2 <= &self.radius * &self.radius)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct System {
    pub eqs: Vec<RatPoly>,
    pub preds: Vec<OpenPred>,
    pub balls: Vec<HiddenBall>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Propagation {
    Infeasible(String),
    Feasible(Assignment),
}

impl Propagation {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Propagation::Infeasible(_))
    }
}

/// Every monomial has only even exponents, so it is ≥ 0 everywhere.
fn square_monomials(q: &RatPoly) -> bool {
    q.terms().all(|(m, _)| m.pairs().iter().all(|(_, e)| e % 2 == 0))
}

fn all_coeffs(q: &RatPoly, pred: impl Fn(&Rational) -> bool) -> bool {
    q.terms().all(|(_, c)| pred(c))
}

/// `Some(true)` if `q > 0` everywhere, `Some(false)` if `q ≤ 0` everywhere.
fn definite_sign(q: &RatPoly) -> Option<bool> {
    if let Some(c) = q.as_constant() {
        return Some(c.is_positive());
    }
    if square_monomials(q) {
        if all_coeffs(q, |c| !c.is_positive()) {
            return Some(false);
        }
        let constant = q.constant_term();
        if all_coeffs(q, |c| !c.is_negative()) && constant.is_positive() {
            return Some(true);
        }
    }
    None
}

impl System {
    pub fn new(eqs: Vec<RatPoly>, preds: Vec<OpenPred>) -> Self {
        System { eqs, preds, balls: Vec::new() }
    }

    pub fn extend(&mut self, other: &System) {
        self.eqs.extend(other.eqs.iter().cloned());
        self.preds.extend(other.preds.iter().cloned());
        self.balls.extend(other.balls.iter().cloned());
    }

    pub fn with_eqs(&self, eqs: impl IntoIterator<Item = RatPoly>) -> System {
        let mut s = self.clone();
        s.eqs.extend(eqs);
        s
    }

    /// Pins variables forced by single-variable equations and sums of
    /// squares, then checks every predicate on the pinned values.
    pub fn propagate(&self) -> Propagation {
        let mut asg = Assignment::new();
        loop {
            let mut changed = false;
            for eq in &self.eqs {
                let q = eq.substitute(|v| asg.get(&v).cloned());
                if q.is_zero() {
                    continue;
                }
                if let Some(c) = q.as_constant() {
                    return Propagation::Infeasible(format!("{eq} = 0 reduces to {c} = 0"));
                }
                let vars = q.vars();
                if vars.len() == 1 {
                    let v = *vars.iter().next().unwrap();
                    let coeffs = q.coefficients_in(v);
                    if coeffs.len() == 2 {
                        let a = coeffs[1].as_constant().unwrap();
                        let b = coeffs[0].as_constant().unwrap();
                        asg.insert(v, -b / a);
                        changed = true;
                        continue;
                    }
                    if q.num_terms() == 1 {
                        asg.insert(v, Rational::zero());
                        changed = true;
                        continue;
                    }
                }
                if square_monomials(&q) {
                    let c0 = q.constant_term();
                    let all_pos = all_coeffs(&q, |c| !c.is_negative());
                    let all_neg = all_coeffs(&q, |c| !c.is_positive());
                    if all_pos || all_neg {
                        if !c0.is_zero() {
                            return Propagation::Infeasible(format!("{eq} = 0 is a definite sum of squares"));
                        }
                        for (m, _) in q.terms() {
                            if let [(v, _)] = m.pairs() {
                                asg.insert(*v, Rational::zero());
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for pred in &self.preds {
            let sub = |p: &RatPoly| p.substitute(|v| asg.get(&v).cloned());
            match pred {
                OpenPred::Positive(p) => {
                    if definite_sign(&sub(p)) == Some(false) {
                        return Propagation::Infeasible(format!("{pred} fails"));
                    }
                }
                OpenPred::Negative(p) => {
                    if definite_sign(&sub(&p.neg())) == Some(false) {
                        return Propagation::Infeasible(format!("{pred} fails"));
                    }
                }
                OpenPred::NotAllZero(ps) => {
                    if ps.iter().all(|p| sub(p).is_zero()) {
                        return Propagation::Infeasible(format!("{pred} fails"));
                    }
                }
            }
        }
        for b in &self.balls {
            if b.contains(&asg) == Some(false) {
                return Propagation::Infeasible(format!("pinned point leaves the ball around slot {}", b.slot));
            }
        }
        Propagation::Feasible(asg)
    }

    /// Exact check at a fully specified point (missing variables fail).
    pub fn holds_at(&self, pt: &Assignment) -> bool {
        let val = |p: &RatPoly| p.eval(|v| pt.get(&v).cloned());
        for eq in &self.eqs {
            match val(eq) {
                Some(x) if x.is_zero() => {}
                _ => return false,
            }
        }
        for pred in &self.preds {
            let ok = match pred {
                OpenPred::Positive(p) => val(p).is_some_and(|x| x.is_positive()),
                OpenPred::Negative(p) => val(p).is_some_and(|x| x.is_negative()),
                OpenPred::NotAllZero(ps) => {
                    let vals: Option<Vec<Rational>> = ps.iter().map(val).collect();
                    vals.is_some_and(|v| v.iter().any(|x| !x.is_zero()))
                }
            };
            if !ok {
                return false;
            }
        }
        self.balls.iter().all(|b| b.contains(pt) == Some(true))
    }

    /// Draws an exact rational point satisfying the system, solving one
    /// variable per equation (linear, or quadratic with a rational root).
    pub fn sample<R: Rng>(&self, vars: &[Var], rng: &mut R, tries: usize) -> Option<Assignment> {
        let pinned = match self.propagate() {
            Propagation::Infeasible(_) => return None,
            Propagation::Feasible(a) => a,
        };
        'attempt: for _ in 0..tries {
            let mut asg = pinned.clone();
            for b in &self.balls {
                for (v, c) in b.vars().into_iter().zip(&b.center) {
                    if !asg.contains_key(&v) {
                        let k: i64 = rng.gen_range(-1..=1);
                        asg.insert(v, c + &b.radius * Rational::new(k.into(), 4.into()));
                    }
                }
            }
            for _round in 0..self.eqs.len() + 1 {
                let mut progressed = false;
                for eq in &self.eqs {
                    let q = eq.substitute(|v| asg.get(&v).cloned());
                    if q.is_zero() {
                        continue;
                    }
                    if q.as_constant().is_some() {
                        continue 'attempt;
                    }
                    let vars_q: Vec<Var> = q.vars().into_iter().collect();
                    let pick = vars_q
                        .iter()
                        .copied()
                        .filter(|v| q.degree_in_var(*v) <= 2)
                        .min_by_key(|v| (q.degree_in_var(*v), !q.coefficients_in(*v).last().unwrap().as_constant().is_some()));
                    let Some(v) = pick else { continue 'attempt };
                    for w in vars_q.iter().filter(|w| **w != v) {
                        asg.insert(*w, random_rational(rng));
                    }
                    let u = q.substitute(|w| asg.get(&w).cloned());
                    let cs: Vec<Rational> = u.coefficients_in(v).iter().map(|c| c.as_constant().unwrap()).collect();
                    let root = match cs.len() {
                        2 if !cs[1].is_zero() => -&cs[0] / &cs[1],
                        3 if !cs[2].is_zero() => {
                            let disc = &cs[1] * &cs[1] - Rational::from_integer(4.into()) * &cs[2] * &cs[0];
                            let Some(sq) = rational_sqrt(&disc) else { continue 'attempt };
                            let sq = if rng.gen_bool(0.5) { sq } else { -sq };
                            (-&cs[1] + sq) / (Rational::from_integer(2.into()) * &cs[2])
                        }
                        _ => continue 'attempt,
                    };
                    asg.insert(v, root);
                    progressed = true;
                }
                if !progressed {
                    break;
                }
            }
            for v in vars {
                if !asg.contains_key(v) {
                    asg.insert(*v, random_rational(rng));
                }
            }
            if self.holds_at(&asg) {
                return Some(asg);
            }
        }
        None
    }
}

/// Small rationals with a bias towards zero and integers.
pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    match rng.gen_range(0..8) {
        0 | 1 => Rational::zero(),
        2 => Rational::new(rng.gen_range(-5i64..=5).into(), 2.into()),
        _ => Rational::from_integer(rng.gen_range(-3i64..=3).into()),
    }
}

/// Random nonzero rational of the requested sign (`None` = either sign).
pub fn random_nonzero<R: Rng>(rng: &mut R, positive: Option<bool>) -> Rational {
    let n: i64 = rng.gen_range(1..=7);
    let d: i64 = rng.gen_range(1..=3);
    let mag = Rational::new(n.into(), d.into());
    match positive {
        Some(true) => mag,
        Some(false) => -mag,
        None => {
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        }
    }
}
