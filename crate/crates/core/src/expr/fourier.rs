//! Closed-form Fourier transforms of catalog members.
//!
//! Over a Euclidean line the forward transform is `∫ e^{-ikt} u(t) dt`; over a
//! Minkowski slot it is `∫ e^{+i(px)} u(x) d⁴x`, and `p ↦ x` is the inverse
//! transform carrying the `(2π)^{-4}`. Transcendental constants travel as
//! opaque symbols on [`DistExpr::Scale`].

use super::map::{MapRef, PolyMap};
use super::{DistExpr, ExprError, ExprResult};
use crate::poly::{minkowski_square, Monomial, RatPoly, SlotName, Var};
use crate::scalar::{int, Rational};
use crate::space::Space;

pub fn dual_slot(s: SlotName) -> Option<SlotName> {
    match s {
        SlotName::X => Some(SlotName::P),
        SlotName::P => Some(SlotName::X),
        SlotName::T => Some(SlotName::T),
        _ => None,
    }
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).map(int).product()
}

fn scaled(factor: Rational, symbol: impl Into<String>, child: DistExpr) -> DistExpr {
    DistExpr::Scale { factor, symbol: Some(symbol.into()), child: Box::new(child) }
}

/// Sign `s_v` with `FT[x_v u] = s_v · i · ∂_{k_v} FT[u]` in the direction
/// `from → dual(from)`.
fn multiplier_sign(v: Var, inverse: bool) -> i64 {
    let base = if v.slot.is_minkowski() && v.comp == 0 { -1 } else { 1 };
    if inverse {
        -base
    } else {
        base
    }
}

/// Sign `s_v` with `FT[∂_v u] = s_v · i · k_v FT[u]`.
fn derivative_sign(v: Var, inverse: bool) -> i64 {
    let base = if !v.slot.is_minkowski() {
        1
    } else if v.comp == 0 {
        -1
    } else {
        1
    };
    if inverse {
        -base
    } else {
        base
    }
}

fn is_feynman_position(e: &DistExpr) -> bool {
    let DistExpr::Extend { slots, child, .. } = e else { return false };
    if slots != &vec![SlotName::X] {
        return false;
    }
    let DistExpr::Pullback { map: MapRef::Poly(m), child } = child.as_ref() else { return false };
    m.components == vec![minkowski_square(SlotName::X)]
        && matches!(child.as_ref(), DistExpr::BoundaryPower { plus: false, power: 1, .. })
}

/// `[x² - i0]^{-1}` extended across the origin.
pub fn feynman_position_massless() -> DistExpr {
    let m = PolyMap::scalar(Space::minkowski(SlotName::X).punctured(SlotName::X), minkowski_square(SlotName::X))
        .expect("square map");
    let pulled = DistExpr::Pullback { map: MapRef::Poly(m), child: Box::new(DistExpr::bpow(false, 1)) };
    DistExpr::Extend { slots: vec![SlotName::X], fundamental: Some(minkowski_square(SlotName::X)), child: Box::new(pulled) }
}

/// Transform in the natural slot of `e` (`x`, else `p`, else `t`).
pub fn fourier(e: &DistExpr) -> ExprResult<DistExpr> {
    let s = e.space()?;
    let from = [SlotName::X, SlotName::P, SlotName::T]
        .into_iter()
        .find(|x| s.has_slot(*x))
        .ok_or_else(|| ExprError::NotInCatalog(format!("no transformable slot in {s}")))?;
    fourier_slot(e, from)
}

pub fn fourier_slot(e: &DistExpr, from: SlotName) -> ExprResult<DistExpr> {
    let to = dual_slot(from).ok_or_else(|| ExprError::NotInCatalog(format!("slot {from} has no dual")))?;
    let inverse = from == SlotName::P;
    let space = e.space()?;
    let n = from.default_dim();
    let not_known = || ExprError::NotInCatalog(format!("no closed-form transform of `{}` in {from}", e));
    let out = match e {
        DistExpr::FourierPair { from: a, to: b, child, .. } if *b == from && dual_slot(from) == Some(*a) => {
            return Ok(*child.clone());
        }
        DistExpr::DeltaOrigin { slots } if slots == &vec![from] => {
            DistExpr::Polynomial { space: Space::new([to]), poly: RatPoly::one() }
        }
        DistExpr::Polynomial { space: ps, poly } if ps.slots == vec![from] => {
            let delta = DistExpr::delta(&[to]);
            let two_pi = if inverse { String::new() } else { format!("(2π)^{n}") };
            let mut terms = Vec::new();
            for (m, c) in poly.terms() {
                let mut vars = Vec::new();
                let mut sign = 1i64;
                for (v, k) in m.pairs() {
                    for _ in 0..*k {
                        vars.push(Var::new(to, v.comp));
                        sign *= multiplier_sign(*v, inverse);
                    }
                }
                let deg = vars.len();
                let child = if vars.is_empty() {
                    delta.clone()
                } else {
                    DistExpr::Derivative { vars, child: Box::new(delta.clone()) }
                };
                let symbol = match deg {
                    0 => two_pi.clone(),
                    1 => format!("{two_pi}i"),
                    _ => format!("{two_pi}i^{deg}"),
                };
                let symbol = if symbol.is_empty() { None } else { Some(symbol) };
                terms.push(DistExpr::Scale { factor: c.clone() * int(sign), symbol, child: Box::new(child) });
            }
            if terms.len() == 1 {
                terms.pop().unwrap()
            } else {
                DistExpr::Sum { children: terms }
            }
        }
        DistExpr::BoundaryPower { plus, power, slot } if *slot == from => {
            let k = *power;
            let theta = DistExpr::Heaviside { slot: to, plus: *plus };
            let body = if k == 1 {
                theta
            } else {
                let mono = RatPoly::from_terms([(Monomial::from_pairs([(Var::new(to, 0), k - 1)]), int(1))]);
                DistExpr::Product { children: vec![DistExpr::Polynomial { space: Space::line(to), poly: mono }, theta] }
            };
            let sign = if *plus { int(-1) } else { int(1) };
            let symbol = if k == 1 { "2πi".to_string() } else { format!("2πi(-i)^{}", k - 1) };
            scaled(sign / factorial(k - 1), symbol, body)
        }
        DistExpr::Heaviside { plus, slot } if *slot == from => {
            // θ(t) ↦ -i [k - i0]^{-1},  θ(-t) ↦ i [k + i0]^{-1}
            let sign = if *plus { int(-1) } else { int(1) };
            scaled(sign, "i", DistExpr::BoundaryPower { slot: to, plus: !*plus, power: 1 })
        }
        DistExpr::FeynmanMomentumKernel { mass, slot } if *slot == from && from == SlotName::P => {
            if mass == &int(0) {
                scaled(int(1), "i/(4π²)", feynman_position_massless())
            } else {
                DistExpr::FourierPair {
                    from,
                    to,
                    convention: super::FtConvention::for_slot(from),
                    child: Box::new(e.clone()),
                }
            }
        }
        _ if from == SlotName::X && is_feynman_position(e) => {
            scaled(int(1), "-4π²i", DistExpr::feynman_kernel(int(0)))
        }
        DistExpr::SmoothSymbol { space: ss, name, degrees, schwartz: true } if ss.slots == vec![from] => {
            let degrees = degrees
                .get(&from)
                .and_then(|d| d.parse::<Rational>().ok())
                .map(|d| [(to, (-int(n as i64) - d).to_string())].into_iter().collect())
                .unwrap_or_default();
            DistExpr::SmoothSymbol { space: Space::new([to]), name: format!("F[{name}]"), degrees, schwartz: true }
        }
        DistExpr::Scale { factor, symbol, child } => {
            DistExpr::Scale { factor: factor.clone(), symbol: symbol.clone(), child: Box::new(fourier_slot(child, from)?) }
        }
        DistExpr::Sum { children } => {
            DistExpr::Sum { children: children.iter().map(|c| fourier_slot(c, from)).collect::<ExprResult<_>>()? }
        }
        DistExpr::Derivative { vars, child } if vars.iter().all(|v| v.slot == from) => {
            let mut mono = RatPoly::one();
            let mut sign = 1i64;
            for v in vars {
                mono = mono.mul(&RatPoly::var(Var::new(to, v.comp)));
                sign *= derivative_sign(*v, inverse);
            }
            let dressing = DistExpr::Polynomial { space: Space::new([to]), poly: mono.scale(&int(sign)) };
            let inner = fourier_slot(child, from)?;
            let symbol = if vars.len() == 1 { "i".to_string() } else { format!("i^{}", vars.len()) };
            scaled(int(1), symbol, DistExpr::Product { children: vec![dressing, inner] })
        }
        DistExpr::StringIntegrate { e: es, child } if from == SlotName::X => {
            let fhat = fourier_slot(child, from)?;
            let u = DistExpr::string_factor_spacelike(false, 1, SlotName::P, *es);
            scaled(int(-1), "i", DistExpr::Product { children: vec![u, fhat] })
        }
        _ => return Err(not_known()),
    };
    let _ = space;
    out.checked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{support_class, SupportClass};

    #[test]
    fn boundary_value_transforms_to_heaviside_on_the_matching_side() {
        for plus in [true, false] {
            let f = fourier(&DistExpr::bpow(plus, 1)).unwrap();
            let DistExpr::Scale { child, .. } = &f else { panic!("{f}") };
            assert_eq!(**child, DistExpr::heaviside(plus));
            assert_eq!(support_class(child), SupportClass::HalfLine { positive: plus });
        }
    }

    #[test]
    fn higher_boundary_powers_carry_a_polynomial() {
        let f = fourier(&DistExpr::bpow(false, 3)).unwrap();
        let DistExpr::Scale { factor, child, .. } = &f else { panic!() };
        assert_eq!(*factor, crate::scalar::rat(1, 2));
        assert!(matches!(child.as_ref(), DistExpr::Product { .. }));
    }

    #[test]
    fn delta_and_constant() {
        let one = fourier(&DistExpr::delta(&[SlotName::X])).unwrap();
        assert_eq!(one, DistExpr::Polynomial { space: Space::minkowski(SlotName::P), poly: RatPoly::one() });
        let back = fourier(&one).unwrap();
        let DistExpr::Scale { child, .. } = back else { panic!() };
        assert_eq!(*child, DistExpr::delta(&[SlotName::X]));
    }

    #[test]
    fn string_integration_becomes_a_string_factor() {
        let g = DistExpr::SmoothSymbol {
            space: Space::minkowski(SlotName::X),
            name: "gauss".into(),
            degrees: Default::default(),
            schwartz: true,
        };
        let ie = DistExpr::string_integrate(SlotName::E, g).unwrap();
        let f = fourier(&ie).unwrap();
        let DistExpr::Scale { child, factor, symbol } = &f else { panic!() };
        assert_eq!(*factor, int(-1));
        assert_eq!(symbol.as_deref(), Some("i"));
        let DistExpr::Product { children } = child.as_ref() else { panic!() };
        assert_eq!(children[0], DistExpr::string_factor_spacelike(false, 1, SlotName::P, SlotName::E));
    }

    #[test]
    fn unknown_transforms_are_errors() {
        let u = DistExpr::string_factor(true, 1, SlotName::P, SlotName::E);
        assert!(matches!(fourier(&u), Err(ExprError::NotInCatalog(_))));
    }

    #[test]
    fn massless_kernel_and_position_propagator_are_a_pair() {
        let k = DistExpr::feynman_kernel(int(0));
        let d = fourier(&k).unwrap();
        let DistExpr::Scale { child, .. } = &d else { panic!() };
        let k2 = fourier(child).unwrap();
        let DistExpr::Scale { child, .. } = &k2 else { panic!() };
        assert_eq!(**child, k);
    }
}
