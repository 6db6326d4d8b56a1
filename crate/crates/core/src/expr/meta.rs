//! Structural metadata: homogeneity degrees and coarse support classes.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{DistExpr, MapRef};
use crate::poly::SlotName;
use crate::scalar::{int, Rational};

/// Slot whose scaling the unqualified homogeneity degree refers to.
pub fn primary_slot(e: &DistExpr) -> Option<SlotName> {
    let s = e.space().ok()?;
    [SlotName::X, SlotName::P, SlotName::T].into_iter().find(|x| s.has_slot(*x)).or_else(|| s.slots.first().copied())
}

pub fn homogeneity_degree(e: &DistExpr) -> Option<Rational> {
    homogeneity_in(e, primary_slot(e)?)
}

fn sum_all(children: &[DistExpr], slot: SlotName) -> Option<Rational> {
    children.iter().map(|c| homogeneity_in(c, slot)).sum()
}

/// Degree `d` with `u(.., λy, ..) = λ^d u(.., y, ..)` for `y` the coordinates
/// of `slot`; `None` when not derivable structurally.
pub fn homogeneity_in(e: &DistExpr, slot: SlotName) -> Option<Rational> {
    let space = e.space().ok()?;
    if !space.has_slot(slot) {
        return Some(Rational::zero());
    }
    match e {
        DistExpr::DeltaOrigin { .. } => Some(-int(slot.default_dim() as i64)),
        DistExpr::Heaviside { .. } => Some(Rational::zero()),
        DistExpr::BoundaryPower { power, .. } => Some(-int(*power as i64)),
        DistExpr::FeynmanMomentumKernel { mass, .. } => mass.is_zero().then(|| int(-2)),
        DistExpr::Polynomial { poly, .. } => {
            if poly.is_zero() {
                return None;
            }
            poly.homogeneous_degree_in(|v| v.slot == slot).map(|d| int(d as i64))
        }
        DistExpr::SmoothSymbol { degrees, .. } => degrees.get(&slot).and_then(|d| d.parse().ok()),
        DistExpr::StringFactor { power, .. } => Some(-int(*power as i64)),
        DistExpr::TensorProduct { children } | DistExpr::Product { children } => sum_all(children, slot),
        DistExpr::Sum { children } => {
            let first = homogeneity_in(&children[0], slot)?;
            children[1..].iter().all(|c| homogeneity_in(c, slot).as_ref() == Some(&first)).then_some(first)
        }
        DistExpr::Derivative { vars, child } => {
            let d = homogeneity_in(child, slot)?;
            Some(d - int(vars.iter().filter(|v| v.slot == slot).count() as i64))
        }
        DistExpr::PartialSmear { child, .. }
        | DistExpr::RestrictOpen { child, .. }
        | DistExpr::Scale { child, .. }
        | DistExpr::Extend { child, .. } => homogeneity_in(child, slot),
        DistExpr::FourierPair { from, to, child, .. } => {
            if slot == *to {
                let d = homogeneity_in(child, *from)?;
                Some(-int(from.default_dim() as i64) - d)
            } else {
                homogeneity_in(child, slot)
            }
        }
        DistExpr::Pullback { map, child } => {
            let MapRef::Poly(m) = map else { return None };
            let cod = m.codomain.coords();
            if cod.len() != 1 {
                // slot-preserving maps keep the degree of that slot
                let ident = m.codomain.has_slot(slot)
                    && m.codomain.coords().iter().zip(&m.components).all(|(y, f)| {
                        y.slot != slot || *f == crate::poly::RatPoly::var(*y)
                    })
                    && m.codomain.coords().iter().zip(&m.components).all(|(y, f)| {
                        y.slot == slot || f.vars().iter().all(|v| v.slot != slot)
                    });
                return if ident { homogeneity_in(child, slot) } else { None };
            }
            let r = m.components[0].homogeneous_degree_in(|v| v.slot == slot)?;
            let d = homogeneity_in(child, cod[0].slot)?;
            Some(d * int(r as i64))
        }
        DistExpr::StringIntegrate { e: es, child } => {
            if slot == *es {
                Some(int(-1))
            } else {
                Some(homogeneity_in(child, slot)? + int(1))
            }
        }
    }
}

/// Lower bound `d` on the scaling degree at the origin of `slot`: near
/// `y = 0` the distribution is no more singular than `|y|^d`. Agrees with
/// [`homogeneity_in`] on homogeneous input; smooth factors count as `0`.
pub fn local_degree(e: &DistExpr, slot: SlotName) -> Option<Rational> {
    let space = e.space().ok()?;
    if !space.has_slot(slot) {
        return Some(Rational::zero());
    }
    let min_all = |children: &[DistExpr]| -> Option<Rational> {
        children.iter().map(|c| local_degree(c, slot)).collect::<Option<Vec<_>>>()?.into_iter().min()
    };
    match e {
        DistExpr::FeynmanMomentumKernel { mass, .. } if !mass.is_zero() => Some(Rational::zero()),
        DistExpr::Polynomial { poly, .. } => {
            let lowest = poly.terms().map(|(m, _)| m.degree_in(|v| v.slot == slot)).min()?;
            Some(int(lowest as i64))
        }
        DistExpr::SmoothSymbol { degrees, .. } => match degrees.get(&slot) {
            Some(d) => d.parse().ok(),
            None => Some(Rational::zero()),
        },
        DistExpr::TensorProduct { children } | DistExpr::Product { children } => {
            children.iter().map(|c| local_degree(c, slot)).sum()
        }
        DistExpr::Sum { children } => min_all(children),
        DistExpr::Derivative { vars, child } => {
            let d = local_degree(child, slot)?;
            Some(d - int(vars.iter().filter(|v| v.slot == slot).count() as i64))
        }
        DistExpr::PartialSmear { child, .. }
        | DistExpr::RestrictOpen { child, .. }
        | DistExpr::Scale { child, .. }
        | DistExpr::Extend { child, .. } => local_degree(child, slot),
        _ => homogeneity_in(e, slot),
    }
}

/// Coarse description of a distribution's support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportClass {
    /// The whole space: the distribution is a real-analytic function that is
    /// not identically zero on a dense open set.
    Dense,
    /// Only the origin.
    Origin,
    /// The closed half-line `±t ≥ 0` of a one-dimensional slot.
    HalfLine { positive: bool },
    Unknown,
}

pub fn support_class(e: &DistExpr) -> SupportClass {
    use SupportClass::*;
    match e {
        DistExpr::DeltaOrigin { .. } => Origin,
        DistExpr::Heaviside { plus, .. } => HalfLine { positive: *plus },
        DistExpr::BoundaryPower { .. } | DistExpr::FeynmanMomentumKernel { .. } | DistExpr::StringFactor { .. } => Dense,
        DistExpr::Polynomial { poly, .. } => {
            if poly.is_zero() {
                Unknown
            } else {
                Dense
            }
        }
        DistExpr::SmoothSymbol { .. } => Unknown,
        DistExpr::Product { children } | DistExpr::TensorProduct { children } => {
            if children.iter().all(|c| support_class(c) == Dense) {
                Dense
            } else {
                Unknown
            }
        }
        DistExpr::Scale { child, .. } | DistExpr::RestrictOpen { child, .. } | DistExpr::Extend { child, .. } => {
            support_class(child)
        }
        // averages of analytic integrands over a ball stay analytic and,
        // for the kernels built here, nonvanishing
        DistExpr::PartialSmear { child, .. } => support_class(child),
        DistExpr::Pullback { child, .. } => match support_class(child) {
            Dense => Dense,
            _ => Unknown,
        },
        DistExpr::FourierPair { child, .. } => match support_class(child) {
            Origin => Dense,
            _ => Unknown,
        },
        DistExpr::Sum { .. } | DistExpr::Derivative { .. } | DistExpr::StringIntegrate { .. } => Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{PolyMap, TestFnDescriptor};
    use crate::poly::{minkowski_square, RatPoly, SlotName, Var};
    use crate::scalar::{int, rat};
    use crate::space::Space;

    fn feynman_position() -> DistExpr {
        let m = PolyMap::scalar(Space::minkowski(SlotName::X).punctured(SlotName::X), minkowski_square(SlotName::X)).unwrap();
        DistExpr::pullback(MapRef::Poly(m), DistExpr::bpow(false, 1)).unwrap()
    }

    #[test]
    fn propagator_degree_is_minus_two() {
        assert_eq!(homogeneity_degree(&feynman_position()), Some(int(-2)));
        let k = DistExpr::feynman_kernel(int(0));
        assert_eq!(homogeneity_degree(&k), Some(int(-2)));
        assert_eq!(homogeneity_degree(&DistExpr::fourier_pair(k, SlotName::P).unwrap()), Some(int(-2)));
        assert_eq!(homogeneity_degree(&DistExpr::feynman_kernel(int(1))), None);
    }

    #[test]
    fn delta_scales_with_dimension() {
        assert_eq!(homogeneity_degree(&DistExpr::delta(&[SlotName::X])), Some(int(-4)));
        assert_eq!(homogeneity_degree(&DistExpr::delta(&[SlotName::T])), Some(int(-1)));
    }

    #[test]
    fn smeared_string_factor_has_degree_minus_s() {
        let c = TestFnDescriptor::new(vec![int(0), int(2), int(0), int(0)], rat(1, 2)).unwrap();
        for s in 1..=3u32 {
            let dressing = DistExpr::poly_on_vars(RatPoly::var(Var::new(SlotName::E, 1)).pow(s), SlotName::E);
            let u = DistExpr::string_factor_spacelike(true, s, SlotName::P, SlotName::E);
            let q = DistExpr::smear(vec![SlotName::E], c.clone(), DistExpr::product(vec![dressing, u]).unwrap()).unwrap();
            assert_eq!(homogeneity_degree(&q), Some(-int(s as i64)));
        }
    }

    #[test]
    fn product_degree_is_additive() {
        let d = feynman_position();
        let dd = DistExpr::product(vec![d.clone(), d.clone(), d]).unwrap();
        assert_eq!(homogeneity_degree(&dd), Some(int(-6)));
        let der = DistExpr::derivative(vec![Var::new(SlotName::X, 0)], feynman_position()).unwrap();
        assert_eq!(homogeneity_degree(&der), Some(int(-3)));
    }

    #[test]
    fn local_degree_treats_massive_kernels_as_smooth() {
        let k = DistExpr::feynman_kernel(int(2));
        assert_eq!(local_degree(&k, SlotName::P), Some(int(0)));
        let p = DistExpr::poly_on_vars(crate::poly::poly("p0^3 + p1"), SlotName::P);
        assert_eq!(local_degree(&p, SlotName::P), Some(int(1)));
        let prod = DistExpr::product(vec![p, DistExpr::feynman_kernel(int(0))]).unwrap();
        assert_eq!(local_degree(&prod, SlotName::P), Some(int(-1)));
        assert_eq!(homogeneity_in(&prod, SlotName::P), None);
    }

    #[test]
    fn supports() {
        assert_eq!(support_class(&DistExpr::delta(&[SlotName::X])), SupportClass::Origin);
        assert_eq!(support_class(&DistExpr::feynman_kernel(int(0))), SupportClass::Dense);
        assert_eq!(support_class(&DistExpr::heaviside(false)), SupportClass::HalfLine { positive: false });
    }
}
