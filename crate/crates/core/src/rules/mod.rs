//! Recursive wavefront bounds for distribution expressions.
//!
//! Evaluation threads a context of open conditions from restrictions down to
//! the nodes they constrain, so that an extension across an origin the
//! context removes is never attempted. Every evaluated node leaves one
//! [`RuleTraceEntry`]; entries are numbered in evaluation order, children
//! before parents.

mod ops;

use serde::Serialize;

use crate::cone::catalog;
use crate::cone::{lift, BoundJson, ConeFamily, Propagation, System, Verdict, WavefrontBound};
use crate::expr::sexp::to_sexp;
use crate::expr::{
    fourier_slot, joint_nonzero, local_degree, support_class, DistExpr, MapRef, PolyMap, SupportClass,
};
use crate::poly::{minkowski_dot, RatPoly, SlotName};
use crate::scalar::int;
use crate::space::{slot_vars, OpenPred, Space};

pub use ops::{characteristic_set, rule_homogeneity_duality, rule_pde_bound, rule_product, rule_pullback, rule_smear, PdeMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Axiom,
    Pullback,
    Product,
    PdeBound,
    HomogeneityDuality,
    Smear,
    Restrict,
    Tensor,
    Derivative,
    Sum,
    Scale,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleTraceEntry {
    pub id: usize,
    pub rule: RuleName,
    pub node: &'static str,
    pub expr: String,
    /// Entries of the subexpressions this rule consumed.
    pub inputs: Vec<usize>,
    pub output: Option<BoundJson>,
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExistenceKind {
    /// A product or pullback criterion failed.
    Criterion,
    /// Not locally integrable at a position-space origin.
    Ultraviolet,
    /// Not locally integrable at a momentum or string origin.
    Infrared,
}

#[derive(Clone, Debug, Serialize, thiserror::Error)]
#[serde(tag = "failure", rename_all = "kebab-case")]
pub enum WfFailure {
    #[error("existence failure ({kind:?}) in {rule:?}: {detail}")]
    Existence { kind: ExistenceKind, rule: RuleName, verdict: Verdict, detail: String },
    #[error("no bound derived: {0}")]
    Unknown(String),
}

impl WfFailure {
    pub fn is_existence(&self) -> bool {
        matches!(self, WfFailure::Existence { .. })
    }

    pub fn verdict(&self) -> Option<&Verdict> {
        match self {
            WfFailure::Existence { verdict, .. } => Some(verdict),
            WfFailure::Unknown(_) => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WfReport {
    #[serde(serialize_with = "ser_result")]
    pub result: Result<WavefrontBound, WfFailure>,
    pub trace: Vec<RuleTraceEntry>,
}

fn ser_result<S: serde::Serializer>(r: &Result<WavefrontBound, WfFailure>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    #[serde(tag = "status", rename_all = "lowercase")]
    enum Out<'a> {
        Bound { bound: BoundJson, exact: bool },
        Failure { failure: &'a WfFailure },
    }
    match r {
        Ok(b) => Out::Bound { bound: BoundJson::from(b), exact: b.exact }.serialize(s),
        Err(f) => Out::Failure { failure: f }.serialize(s),
    }
}

impl WfReport {
    pub fn bound(&self) -> Option<&WavefrontBound> {
        self.result.as_ref().ok()
    }
}

pub fn wf_bound(e: &DistExpr) -> WfReport {
    let mut engine = Engine::default();
    let result = engine.eval(e, &[]).map(|(b, _)| b);
    WfReport { result, trace: engine.trace }
}

type Eval = Result<(WavefrontBound, usize), WfFailure>;

#[derive(Default)]
struct Engine {
    trace: Vec<RuleTraceEntry>,
}

/// Context conditions that only mention coordinates of `space`.
fn relevant(ctx: &[OpenPred], space: &Space) -> Vec<OpenPred> {
    ctx.iter().filter(|p| p.vars().iter().all(|v| space.has_var(*v))).cloned().collect()
}

fn with_preds(space: Space, preds: &[OpenPred]) -> Space {
    preds.iter().fold(space, |s, p| if s.open_constraints.contains(p) { s } else { s.with(p.clone()) })
}

fn unknown(why: impl Into<String>) -> WfFailure {
    WfFailure::Unknown(why.into())
}

/// Joint origin of `slots` is excluded by the conditions of `space`.
fn origin_excluded(space: &Space, slots: &[SlotName]) -> bool {
    let eqs = slots.iter().flat_map(|s| slot_vars(*s)).map(RatPoly::var).collect();
    System::new(eqs, space.open_constraints.clone()).propagate().is_infeasible()
}

/// `U_±^k` as an extension of the pulled-back boundary value; the third
/// power of the string wave operator maps `U_±` to a multiple of `δ`.
pub fn string_factor_construction(plus: bool, power: u32, p: SlotName, e: SlotName) -> DistExpr {
    let dom = Space::new([p, e]).with(joint_nonzero(&[p, e]));
    let map = PolyMap::scalar(dom, minkowski_dot(p, e)).expect("pairing map");
    let pulled = DistExpr::Pullback { map: MapRef::Poly(map), child: Box::new(DistExpr::bpow(plus, power)) };
    let fundamental = (power == 1).then(|| minkowski_dot(p, e).pow(3));
    DistExpr::Extend { slots: vec![p, e], fundamental, child: Box::new(pulled) }
}

/// `[p² - m² + i0]^{-1}` for `m > 0` as a pullback of the boundary value.
pub fn massive_kernel_construction(slot: SlotName, mass: &crate::scalar::Rational) -> DistExpr {
    let shell = crate::poly::minkowski_square(slot).sub(&RatPoly::constant(mass * mass));
    let map = PolyMap::scalar(Space::minkowski(slot), shell).expect("shell map");
    DistExpr::Pullback { map: MapRef::Poly(map), child: Box::new(DistExpr::bpow(true, 1)) }
}

/// A single power equal to the product, when every factor is the same
/// string factor or boundary value under identical restrictions.
fn collapse_powers(children: &[DistExpr]) -> Option<DistExpr> {
    let mut preds: Option<&Vec<OpenPred>> = None;
    let mut cores = Vec::new();
    for c in children {
        let (ps, core) = match c {
            DistExpr::RestrictOpen { preds, child } => (Some(preds), child.as_ref()),
            other => (None, other),
        };
        match (&preds, ps) {
            (None, Some(p)) if cores.is_empty() => preds = Some(p),
            (Some(a), Some(b)) if *a == b => {}
            (None, None) => {}
            _ => return None,
        }
        cores.push(core);
    }
    let first = cores[0];
    let total: u32 = cores
        .iter()
        .map(|c| match (c, first) {
            (DistExpr::StringFactor { plus, power, p, e }, DistExpr::StringFactor { plus: a, p: b, e: d, .. })
                if plus == a && p == b && e == d =>
            {
                Some(*power)
            }
            (DistExpr::BoundaryPower { plus, power, slot }, DistExpr::BoundaryPower { plus: a, slot: b, .. })
                if plus == a && slot == b =>
            {
                Some(*power)
            }
            _ => None,
        })
        .sum::<Option<u32>>()?;
    let merged = match first {
        DistExpr::StringFactor { plus, p, e, .. } => DistExpr::StringFactor { plus: *plus, power: total, p: *p, e: *e },
        DistExpr::BoundaryPower { plus, slot, .. } => DistExpr::BoundaryPower { plus: *plus, power: total, slot: *slot },
        _ => return None,
    };
    Some(match preds {
        Some(p) => DistExpr::RestrictOpen { preds: p.clone(), child: Box::new(merged) },
        None => merged,
    })
}

fn contains_fourier_pair(e: &DistExpr) -> bool {
    matches!(e, DistExpr::FourierPair { .. }) || e.children().into_iter().any(contains_fourier_pair)
}

/// All families force the coordinates of `slot` to vanish.
fn pinned_at(b: &WavefrontBound, slot: SlotName) -> bool {
    b.families.iter().all(|f| match f.system(&b.space).propagate() {
        Propagation::Infeasible(_) => true,
        Propagation::Feasible(a) => slot_vars(slot).iter().all(|v| a.get(v).is_some_and(num_traits::Zero::is_zero)),
    })
}

/// No family reaches the origin of `slot`.
fn avoids(b: &WavefrontBound, slot: SlotName) -> bool {
    b.families.iter().all(|f| {
        let mut sys = f.system(&b.space);
        sys.eqs.extend(slot_vars(slot).into_iter().map(RatPoly::var));
        sys.propagate().is_infeasible()
    })
}

impl Engine {
    fn record(
        &mut self,
        rule: RuleName,
        e: &DistExpr,
        inputs: Vec<usize>,
        output: Option<&WavefrontBound>,
        verdict: Option<Verdict>,
        note: impl Into<String>,
    ) -> usize {
        let id = self.trace.len();
        self.trace.push(RuleTraceEntry {
            id,
            rule,
            node: e.kind_name(),
            expr: to_sexp(e),
            inputs,
            output: output.map(BoundJson::from),
            exact: output.map(|b| b.exact),
            verdict,
            note: note.into(),
        });
        id
    }

    fn done(&mut self, rule: RuleName, e: &DistExpr, inputs: Vec<usize>, b: WavefrontBound, verdict: Option<Verdict>, note: &str) -> Eval {
        let id = self.record(rule, e, inputs, Some(&b), verdict, note);
        Ok((b, id))
    }

    fn fail(&mut self, rule: RuleName, e: &DistExpr, inputs: Vec<usize>, f: WfFailure) -> Eval {
        let (verdict, note) = match &f {
            WfFailure::Existence { verdict, detail, .. } => (Some(verdict.clone()), detail.clone()),
            WfFailure::Unknown(why) => (None, why.clone()),
        };
        self.record(rule, e, inputs, None, verdict, note);
        Err(f)
    }

    fn eval(&mut self, e: &DistExpr, ctx: &[OpenPred]) -> Eval {
        let space = e.space().map_err(|err| unknown(format!("ill-formed expression: {err}")))?;
        let local = relevant(ctx, &space);
        let target = with_preds(space.clone(), &local);
        match e {
            DistExpr::DeltaOrigin { slots } => {
                let eqs = slots.iter().flat_map(|s| slot_vars(*s)).map(RatPoly::var).collect();
                let b = WavefrontBound::new(space, vec![ConeFamily::full_fiber(eqs, vec![])]).exact(true);
                self.done(RuleName::Axiom, e, vec![], lift(&b, &target), None, "")
            }
            DistExpr::Heaviside { slot, .. } => {
                let fam = ConeFamily::full_fiber(vec![RatPoly::var(slot_vars(*slot)[0])], vec![]);
                let b = WavefrontBound::new(space, vec![fam]).exact(true);
                self.done(RuleName::Axiom, e, vec![], lift(&b, &target), None, "")
            }
            DistExpr::BoundaryPower { slot, plus, .. } => {
                let b = catalog::boundary_value(*slot, *plus);
                self.done(RuleName::Axiom, e, vec![], lift(&b, &target), None, "")
            }
            DistExpr::Polynomial { .. } | DistExpr::SmoothSymbol { .. } => {
                self.done(RuleName::Axiom, e, vec![], WavefrontBound::empty(target), None, "smooth")
            }
            DistExpr::FeynmanMomentumKernel { slot, mass } => {
                if num_traits::Zero::is_zero(mass) {
                    let b = catalog::feynman_momentum(*slot, &int(0));
                    self.done(RuleName::Axiom, e, vec![], lift(&b, &target), None, "")
                } else {
                    let (b, id) = self.eval(&massive_kernel_construction(*slot, mass), &local)?;
                    self.done(RuleName::Pullback, e, vec![id], b, None, "mass shell pullback")
                }
            }
            DistExpr::StringFactor { plus, power, p, e: es } => {
                let (b, id) = self.eval(&string_factor_construction(*plus, *power, *p, *es), &local)?;
                self.done(RuleName::PdeBound, e, vec![id], b, None, "extension of the pulled-back boundary value")
            }
            DistExpr::Pullback { map, child } => {
                let MapRef::Poly(m) = map else {
                    return self.fail(RuleName::Pullback, e, vec![], unknown("chart pullbacks are analysed pointwise"));
                };
                let (cb, cid) = self.eval(child, &[])?;
                let (verdict, bound) = rule_pullback(m, &cb);
                match bound {
                    Some(b) => {
                        let b = b.restrict_open(&local);
                        let b = lift(&b, &target);
                        self.done(RuleName::Pullback, e, vec![cid], b, Some(verdict), "")
                    }
                    None if verdict.is_violated() => {
                        let f = WfFailure::Existence {
                            kind: crate::rules::ExistenceKind::Criterion,
                            rule: RuleName::Pullback,
                            verdict,
                            detail: "normals of the map meet the wavefront set".into(),
                        };
                        self.fail(RuleName::Pullback, e, vec![cid], f)
                    }
                    None => {
                        let why = format!("pullback criterion undecided: {}", verdict.trace.join("; "));
                        self.fail(RuleName::Pullback, e, vec![cid], unknown(why))
                    }
                }
            }
            DistExpr::Product { children } => self.product(e, children, &target, &local),
            DistExpr::TensorProduct { children } => {
                let mut ids = Vec::new();
                let mut acc: Option<WavefrontBound> = None;
                let mut exact = true;
                for c in children {
                    let cs = c.space().map_err(|err| unknown(err.to_string()))?;
                    let (b, id) = self.eval(c, &relevant(&local, &cs))?;
                    ids.push(id);
                    exact &= b.exact && support_class(c) == SupportClass::Dense;
                    let b = lift(&b, &target);
                    acc = Some(match acc {
                        None => b,
                        Some(a) if a.is_empty() => b,
                        Some(a) if b.is_empty() => a,
                        Some(a) => crate::cone::minkowski_sum(&a, &b),
                    });
                }
                let b = acc.expect("tensor factors").exact(exact);
                self.done(RuleName::Tensor, e, ids, b, None, "")
            }
            DistExpr::Derivative { child, .. } => {
                let (b, id) = self.eval(child, &local)?;
                self.done(RuleName::Derivative, e, vec![id], lift(&b, &target).exact(false), None, "")
            }
            DistExpr::Scale { child, .. } => {
                let (b, id) = self.eval(child, &local)?;
                self.done(RuleName::Scale, e, vec![id], lift(&b, &target), None, "")
            }
            DistExpr::Sum { children } => {
                let mut ids = Vec::new();
                let mut acc = WavefrontBound::empty(target.clone());
                for c in children {
                    let (b, id) = self.eval(c, &local)?;
                    ids.push(id);
                    acc = acc.union(&lift(&b, &target));
                }
                // cancellations between terms are not tracked
                let single = children.len() == 1 && acc.exact;
                let acc = acc.exact(single);
                self.done(RuleName::Sum, e, ids, acc, None, "")
            }
            DistExpr::RestrictOpen { preds, child } => {
                let mut inner = local.clone();
                inner.extend(preds.iter().cloned());
                let (b, id) = self.eval(child, &inner)?;
                self.done(RuleName::Restrict, e, vec![id], lift(&b, &target), None, "")
            }
            DistExpr::Extend { slots, fundamental, child } => self.extend(e, slots, fundamental.as_ref(), child, &target, &local),
            DistExpr::PartialSmear { slots, test_fn, child } => {
                let cs = child.space().map_err(|err| unknown(err.to_string()))?;
                let rest = Space::new(cs.slots.iter().copied().filter(|s| !slots.contains(s)));
                let (kb, id) = self.eval(child, &relevant(&local, &rest))?;
                let (b, notes) = rule_smear(&kb, slots, test_fn);
                self.done(RuleName::Smear, e, vec![id], lift(&b, &target), None, &notes.join("; "))
            }
            DistExpr::FourierPair { from, to, child, .. } => self.fourier_pair(e, *from, *to, child, &target, &local),
            DistExpr::StringIntegrate { .. } => {
                self.fail(RuleName::HomogeneityDuality, e, vec![], unknown("string integration is bounded through its transform only"))
            }
        }
    }

    fn product(&mut self, e: &DistExpr, children: &[DistExpr], target: &Space, local: &[OpenPred]) -> Eval {
        let mut ids = Vec::new();
        let mut bounds = Vec::new();
        for c in children {
            let cs = c.space().map_err(|err| unknown(err.to_string()))?;
            let (b, id) = self.eval(c, &relevant(local, &cs))?;
            ids.push(id);
            bounds.push(lift(&b, target));
        }
        let (verdict, bound) = rule_product(&bounds);
        let Some(mut b) = bound else {
            if verdict.is_violated() {
                let f = WfFailure::Existence {
                    kind: ExistenceKind::Criterion,
                    rule: RuleName::Product,
                    verdict,
                    detail: "a factor's wavefront set meets the negated sum of the others".into(),
                };
                return self.fail(RuleName::Product, e, ids, f);
            }
            let why = format!("product criterion undecided: {}", verdict.trace.join("; "));
            return self.fail(RuleName::Product, e, ids, unknown(why));
        };
        let mut note = String::new();
        if let Some(power) = collapse_powers(children) {
            let mut scratch = Engine::default();
            if let Ok((pb, _)) = scratch.eval(&power, local) {
                if pb.exact && pb.same_set_as(&b) {
                    b.exact = true;
                    note = format!("equal to the bound of {power}");
                }
            }
        }
        self.done(RuleName::Product, e, ids, b, Some(verdict), &note)
    }

    fn extend(
        &mut self,
        e: &DistExpr,
        slots: &[SlotName],
        fundamental: Option<&RatPoly>,
        child: &DistExpr,
        target: &Space,
        local: &[OpenPred],
    ) -> Eval {
        if origin_excluded(target, slots) {
            let (b, id) = self.eval(child, local)?;
            return self.done(RuleName::Restrict, e, vec![id], lift(&b, target), None, "origin excluded by the context");
        }
        let degree: Option<crate::scalar::Rational> = slots.iter().map(|s| local_degree(child, *s)).sum();
        let dim: i64 = slots.iter().map(|s| s.default_dim() as i64).sum();
        let Some(degree) = degree else {
            return self.fail(RuleName::PdeBound, e, vec![], unknown("scaling degree at the origin not derivable"));
        };
        if degree <= int(-dim) {
            let kind = if slots.iter().any(|s| matches!(s, SlotName::P | SlotName::E | SlotName::Ep)) {
                ExistenceKind::Infrared
            } else {
                ExistenceKind::Ultraviolet
            };
            let detail = format!("scaling degree {degree} at the origin of {slots:?} does not exceed -{dim}");
            let f = WfFailure::Existence { kind, rule: RuleName::PdeBound, verdict: Verdict::unknown(detail.clone()), detail };
            return self.fail(RuleName::PdeBound, e, vec![], f);
        }
        let (cb, id) = self.eval(child, local)?;
        let pred = joint_nonzero(slots);
        let mut families: Vec<ConeFamily> = cb
            .families
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.base_excl.push(pred.clone());
                f
            })
            .collect();
        let origin_eqs = slots.iter().flat_map(|s| slot_vars(*s)).map(RatPoly::var).collect();
        families.push(ConeFamily::full_fiber(origin_eqs, vec![]));
        let mut b = WavefrontBound::new(target.clone(), families).prune();
        let mut note = format!("locally integrable: degree {degree} > -{dim}");
        b.exact = false;
        if let Some(sym) = fundamental {
            let sym_space = Space::new(slots.iter().copied());
            let map = PolyMap::scalar(sym_space.clone(), sym.clone()).map_err(|err| unknown(err.to_string()))?;
            let delta = WavefrontBound::new(sym_space, vec![ConeFamily::full_fiber(
                slots.iter().flat_map(|s| slot_vars(*s)).map(RatPoly::var).collect(),
                vec![],
            )]);
            let lower = rule_pde_bound(&map, &delta, PdeMode::Lower);
            // the full fiber over the origin is forced from below
            b.exact = cb.exact && !lower.is_empty();
            note.push_str("; origin fiber forced by the fundamental solution");
        }
        self.done(RuleName::PdeBound, e, vec![id], b, None, &note)
    }

    fn fourier_pair(
        &mut self,
        e: &DistExpr,
        from: SlotName,
        to: SlotName,
        child: &DistExpr,
        target: &Space,
        local: &[OpenPred],
    ) -> Eval {
        if let DistExpr::FourierPair { from: a, to: b, child: inner, .. } = child {
            if *a == to && *b == from {
                let (bd, id) = self.eval(inner, local)?;
                return self.done(RuleName::HomogeneityDuality, e, vec![id], lift(&bd, target), None, "inverse pair cancels");
            }
        }
        if let Ok(closed) = fourier_slot(child, from) {
            if !contains_fourier_pair(&closed) {
                let (bd, id) = self.eval(&closed, local)?;
                return self.done(RuleName::Axiom, e, vec![id], lift(&bd, target), None, "closed-form transform");
            }
        }
        if let DistExpr::FeynmanMomentumKernel { mass, slot } = child {
            if *slot == from && !num_traits::Zero::is_zero(mass) {
                let b = lift(&catalog::feynman_massless(to), target);
                return self.done(RuleName::Axiom, e, vec![], b, None, "massive propagator: same singularities as the massless one");
            }
        }
        if let DistExpr::Product { children } = child {
            if children.len() == 2 {
                if let Some(r) = self.auxiliary_product(e, from, to, children, target, local) {
                    return r;
                }
            }
        }
        let (cb, id) = self.eval(child, &[])?;
        let homogeneous = crate::expr::homogeneity_in(child, from).is_some();
        if !homogeneous {
            return self.fail(RuleName::HomogeneityDuality, e, vec![id], unknown(format!("transform of a non-homogeneous distribution in {from}")));
        }
        match rule_homogeneity_duality(&cb, from, to, support_class(child)) {
            Ok(b) => {
                let b = lift(&b.restrict_open(local), target);
                self.done(RuleName::HomogeneityDuality, e, vec![id], b, None, "")
            }
            Err(why) => self.fail(RuleName::HomogeneityDuality, e, vec![id], unknown(why)),
        }
    }

    /// `F(û v̂)` with `WF û` over the origin only and `v̂` singular away from
    /// it: `û` is a convolution-smoothing factor, so the bound of `F(v̂)`
    /// carries over.
    fn auxiliary_product(
        &mut self,
        e: &DistExpr,
        from: SlotName,
        to: SlotName,
        children: &[DistExpr],
        target: &Space,
        local: &[OpenPred],
    ) -> Option<Eval> {
        let mut scratch = Engine::default();
        let bounds: Vec<WavefrontBound> = children.iter().map(|c| scratch.eval(c, &[]).ok().map(|(b, _)| b)).collect::<Option<_>>()?;
        for (i, j) in [(0usize, 1usize), (1, 0)] {
            let (u, v) = (&children[i], &children[j]);
            let (ub, vb) = (&bounds[i], &bounds[j]);
            let ok = crate::expr::homogeneity_in(u, from).is_some()
                && ub.space.slots == vec![from]
                && vb.space.slots == vec![from]
                && pinned_at(ub, from)
                && avoids(vb, from);
            if !ok {
                continue;
            }
            let (_, pid) = match self.eval(&DistExpr::Product { children: children.to_vec() }, &[]) {
                Ok(r) => r,
                Err(err) => return Some(Err(err)),
            };
            let pair = DistExpr::FourierPair {
                from,
                to,
                convention: crate::expr::FtConvention::for_slot(from),
                child: Box::new(v.clone()),
            };
            return Some(match self.eval(&pair, local) {
                Ok((b, vid)) => {
                    let b = lift(&b, target).exact(false);
                    self.done(RuleName::HomogeneityDuality, e, vec![pid, vid], b, None, "smoothing factor singular only at the origin")
                }
                Err(err) => Err(err),
            });
        }
        None
    }
}

#[cfg(test)]
mod tests;
