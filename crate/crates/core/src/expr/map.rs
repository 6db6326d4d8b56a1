//! Polynomial maps between spaces: Jacobians, normals, and covector pullback.

use serde::{Deserialize, Serialize};

use super::chart::ChartMap;
use super::{ExprError, ExprResult};
use crate::cone::{Assignment, ConeFamily, Generator, ParamSign, Propagation, System, WavefrontBound};
use crate::linalg::nullspace;
use crate::poly::{RatPoly, Var};
use crate::scalar::{int, Rational};
use crate::space::{display_factor, OpenPred, Space};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyMap {
    pub domain: Space,
    pub codomain: Space,
    /// One polynomial per codomain coordinate, in `codomain.coords()` order.
    pub components: Vec<RatPoly>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MapRef {
    Poly(PolyMap),
    Chart(ChartMap),
}

impl MapRef {
    pub fn validate(&self) -> ExprResult<()> {
        match self {
            MapRef::Poly(m) => m.validate(),
            MapRef::Chart(_) => Ok(()),
        }
    }

    pub fn domain(&self) -> Space {
        match self {
            MapRef::Poly(m) => m.domain.clone(),
            MapRef::Chart(c) => c.domain(),
        }
    }

    pub fn codomain(&self) -> Space {
        match self {
            MapRef::Poly(m) => m.codomain.clone(),
            MapRef::Chart(c) => c.codomain(),
        }
    }
}

impl PolyMap {
    pub fn new(domain: Space, codomain: Space, components: Vec<RatPoly>) -> ExprResult<Self> {
        let m = PolyMap { domain, codomain, components };
        m.validate()?;
        Ok(m)
    }

    /// Real-valued map onto the line `t`.
    pub fn scalar(domain: Space, f: RatPoly) -> ExprResult<Self> {
        PolyMap::new(domain, Space::line(crate::poly::SlotName::T), vec![f])
    }

    pub fn identity(space: Space) -> Self {
        let components = space.coords().into_iter().map(RatPoly::var).collect();
        PolyMap { domain: space.clone(), codomain: Space { slots: space.slots, open_constraints: Vec::new() }, components }
    }

    pub fn validate(&self) -> ExprResult<()> {
        if self.components.len() != self.codomain.dim() {
            return Err(ExprError::SpaceMismatch(format!(
                "map has {} components but {} has dimension {}",
                self.components.len(),
                self.codomain,
                self.codomain.dim()
            )));
        }
        for c in &self.components {
            for v in c.vars() {
                if !self.domain.has_var(v) {
                    return Err(ExprError::SpaceMismatch(format!("map component uses {v} outside {}", self.domain)));
                }
            }
        }
        Ok(())
    }

    /// `J[i][j] = ∂f_i/∂x_j` over codomain rows and domain columns.
    pub fn jacobian(&self) -> Vec<Vec<RatPoly>> {
        let xs = self.domain.coords();
        self.components.iter().map(|f| xs.iter().map(|x| f.derivative(*x)).collect()).collect()
    }

    pub fn is_affine(&self) -> bool {
        self.jacobian().iter().flatten().all(|d| d.as_constant().is_some())
    }

    /// `g ∘ f` for `g` over codomain coordinates.
    pub fn compose(&self, g: &RatPoly) -> RatPoly {
        let ys = self.codomain.coords();
        g.compose(|v| ys.iter().position(|y| *y == v).map(|i| self.components[i].clone()))
    }

    /// Displayed domain covector `ᵗf'(x) ζ` for a displayed codomain covector `ζ`.
    pub fn pull_covector(&self, zeta: &[(Var, RatPoly)]) -> Vec<(Var, RatPoly)> {
        let ys = self.codomain.coords();
        let xs = self.domain.coords();
        let jac = self.jacobian();
        xs.iter()
            .enumerate()
            .map(|(j, x)| {
                let mut acc = RatPoly::zero();
                for (y, z) in zeta {
                    let Some(i) = ys.iter().position(|w| w == y) else { continue };
                    let euclid = self.compose(z).scale(&int(display_factor(*y)));
                    acc = acc.add(&jac[i][j].mul(&euclid));
                }
                (*x, acc.scale(&int(display_factor(*x))))
            })
            .collect()
    }

    /// `{(f(x); ζ) : ᵗf'(x) ζ = 0, ζ ≠ 0}` as a bound over the codomain.
    pub fn normals_set(&self) -> ExprResult<WavefrontBound> {
        let empty = WavefrontBound::empty(self.codomain.clone()).exact(true);
        let jac = self.jacobian();
        if self.codomain.dim() == 1 {
            let mut sys = System::new(jac[0].clone(), self.domain.open_constraints.clone());
            sys.eqs.retain(|e| !e.is_zero());
            let pins = match sys.propagate() {
                Propagation::Infeasible(_) => return Ok(empty),
                Propagation::Feasible(p) => p,
            };
            let xs = self.domain.coords();
            if xs.iter().all(|x| pins.contains_key(x)) {
                let value = self.components[0].eval(|v| pins.get(&v).cloned()).expect("pinned point");
                let t = self.codomain.coords()[0];
                let fam = ConeFamily::full_fiber(vec![RatPoly::var(t).sub(&RatPoly::constant(value))], Vec::new());
                return Ok(WavefrontBound::new(self.codomain.clone(), vec![fam]).exact(true));
            }
            return Err(ExprError::NotInCatalog(format!(
                "critical set of {} is not an isolated point",
                self.components[0]
            )));
        }
        if self.is_affine() {
            let a: Vec<Vec<Rational>> =
                jac.iter().map(|row| row.iter().map(|d| d.as_constant().unwrap()).collect()).collect();
            let rows = a.len();
            let cols = a.first().map_or(0, Vec::len);
            let at: Vec<Vec<Rational>> = (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect();
            let kernel = nullspace(&at, rows);
            if kernel.is_empty() {
                return Ok(empty);
            }
            let ys = self.codomain.coords();
            let origin: Assignment = self.domain.coords().into_iter().map(|x| (x, int(0))).collect();
            let offset: Vec<Rational> =
                self.components.iter().map(|f| f.eval(|v| origin.get(&v).cloned()).unwrap()).collect();
            // the image is the affine plane annihilated by every kernel vector
            let base_eqs: Vec<RatPoly> = kernel
                .iter()
                .map(|k| {
                    let mut eq = RatPoly::zero();
                    for (i, y) in ys.iter().enumerate() {
                        eq = eq.add(&RatPoly::var(*y).sub(&RatPoly::constant(offset[i].clone())).scale(&k[i]));
                    }
                    eq
                })
                .collect();
            let gens: Vec<Generator> = kernel
                .iter()
                .map(|k| {
                    Generator::new(
                        ys.iter().enumerate().map(|(i, y)| (*y, RatPoly::constant(k[i].clone() * int(display_factor(*y))))),
                        ParamSign::Free,
                    )
                })
                .collect();
            let fam = ConeFamily::generated(base_eqs, Vec::new(), gens);
            return Ok(WavefrontBound::new(self.codomain.clone(), vec![fam]).exact(true));
        }
        Err(ExprError::NotInCatalog("normals of a nonlinear map into more than one dimension".into()))
    }

    /// `f* b`: families pulled back along the map, over the domain.
    pub fn pull_bound(&self, b: &WavefrontBound) -> WavefrontBound {
        let ys = self.codomain.coords();
        let jac = self.jacobian();
        // affine bijections carry full fibers onto full fibers
        let bijective = self.is_affine()
            && self.domain.dim() == self.codomain.dim()
            && self.normals_set().is_ok_and(|n| n.is_empty());
        let mut families = Vec::new();
        let pulled_space_preds: Vec<OpenPred> =
            b.space.open_constraints.iter().map(|p| p.map_polys(|q| self.compose(q))).collect();
        for fam in &b.families {
            let mut out = ConeFamily {
                base_eqs: fam.base_eqs.iter().map(|e| self.compose(e)).collect(),
                base_excl: fam.base_excl.iter().map(|p| p.map_polys(|q| self.compose(q))).collect(),
                generators: Vec::new(),
                full_fiber: false,
                hidden: fam.hidden.clone(),
            };
            out.base_excl.extend(pulled_space_preds.iter().cloned());
            if fam.full_fiber && bijective {
                out.full_fiber = true;
            } else if fam.full_fiber {
                for (i, y) in ys.iter().enumerate() {
                    let comps = self.domain.coords().into_iter().enumerate().map(|(j, x)| {
                        (x, jac[i][j].scale(&int(display_factor(*y) * display_factor(x))))
                    });
                    out.generators.push(Generator::new(comps, ParamSign::Free));
                }
            } else {
                for g in &fam.generators {
                    let zeta: Vec<(Var, RatPoly)> = g.comps.iter().map(|(v, p)| (*v, p.clone())).collect();
                    out.generators.push(Generator::new(self.pull_covector(&zeta), g.sign));
                }
            }
            families.push(out);
        }
        WavefrontBound::new(self.domain.clone(), families).prune()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::catalog::*;
    use crate::cone::{intersect_empty, member};
    use crate::poly::{minkowski_dot, minkowski_square, poly, SlotName};
    use crate::scalar::int;

    fn x2_map() -> PolyMap {
        PolyMap::scalar(Space::minkowski(SlotName::X).punctured(SlotName::X), minkowski_square(SlotName::X)).unwrap()
    }

    #[test]
    fn normals_of_the_square_off_origin_are_empty() {
        assert!(x2_map().normals_set().unwrap().is_empty());
    }

    #[test]
    fn normals_of_the_square_on_full_space_sit_over_zero() {
        let m = PolyMap::scalar(Space::minkowski(SlotName::X), minkowski_square(SlotName::X)).unwrap();
        let n = m.normals_set().unwrap();
        assert_eq!(n.families.len(), 1);
        assert!(n.families[0].full_fiber);
        // meets the boundary value's cone: the pullback is obstructed
        assert!(intersect_empty(&n, &boundary_value(SlotName::T, false)).is_violated());
    }

    #[test]
    fn normals_of_the_string_pairing_are_empty_off_origin() {
        let dom = Space::new([SlotName::P, SlotName::E]).with(crate::expr::joint_nonzero(&[SlotName::P, SlotName::E]));
        let m = PolyMap::scalar(dom, minkowski_dot(SlotName::P, SlotName::E)).unwrap();
        assert!(m.normals_set().unwrap().is_empty());
    }

    #[test]
    fn massive_shell_normals_miss_the_boundary_cone() {
        let m = PolyMap::scalar(Space::minkowski(SlotName::P), minkowski_square(SlotName::P).sub(&RatPoly::constant(int(1)))).unwrap();
        let n = m.normals_set().unwrap();
        assert_eq!(n.families[0].base_eqs, vec![poly("t + 1")]);
        assert!(intersect_empty(&n, &boundary_value(SlotName::T, true)).is_holds());
    }

    #[test]
    fn linear_bijections_have_no_normals() {
        let s = Space::new([SlotName::T]);
        let m = PolyMap::new(s.clone(), s, vec![poly("3*t")]).unwrap();
        assert!(m.normals_set().unwrap().is_empty());
        let id = PolyMap::identity(Space::minkowski(SlotName::X));
        assert!(id.normals_set().unwrap().is_empty());
    }

    #[test]
    fn projection_has_normals_along_the_lost_direction() {
        let dom = Space::new([SlotName::T]);
        let cod = Space::new([SlotName::Tau, SlotName::T]);
        let m = PolyMap::new(dom, cod, vec![poly("t"), poly("2*t")]).unwrap();
        let n = m.normals_set().unwrap();
        assert_eq!(n.families.len(), 1);
        assert_eq!(n.families[0].generators.len(), 1);
    }

    #[test]
    fn pulled_boundary_value_is_the_lightcone_family() {
        let b = x2_map().pull_bound(&boundary_value(SlotName::T, false));
        let mut expected = WavefrontBound::new(
            Space::minkowski(SlotName::X).punctured(SlotName::X),
            vec![lightcone_family(SlotName::X, ParamSign::Pos)],
        );
        expected.exact = b.exact;
        assert!(b.same_set_as(&expected), "{b}");
        let pt: Assignment = [(0, 1), (1, 1), (2, 0), (3, 0)].iter().map(|(c, v)| (Var::new(SlotName::X, *c), int(*v))).collect();
        let xi = [(0, 2), (1, 2)].iter().map(|(c, v)| (Var::new(SlotName::X, *c), int(*v))).collect();
        assert!(member(&b, &pt, &xi).is_holds());
    }

    #[test]
    fn pulled_boundary_value_along_the_pairing_is_the_string_family() {
        let dom = Space::new([SlotName::P, SlotName::E]).with(crate::expr::joint_nonzero(&[SlotName::P, SlotName::E]));
        let m = PolyMap::scalar(dom.clone(), minkowski_dot(SlotName::P, SlotName::E)).unwrap();
        for plus in [true, false] {
            let b = m.pull_bound(&boundary_value(SlotName::T, plus));
            let mut fam = string_family(SlotName::P, SlotName::E, plus);
            fam.base_excl.clear();
            let expected = WavefrontBound::new(dom.clone(), vec![fam]);
            assert!(b.same_set_as(&expected), "{b}");
        }
    }
}
