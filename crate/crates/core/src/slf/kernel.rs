//! Two-point kernels of string-localized potentials as finite sums
//! `Σ c_{ab}(p, e, e′) u₋(p, e)^a u₊(p, e′)^b`.
//!
//! Every `u₋ = [(pe) − i0]^{-1}` sits on slot `e`, every
//! `u₊ = [(pe′) + i0]^{-1}` on slot `e′`; the representation cannot express
//! anything else.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::expr::{DistExpr, ExprResult};
use crate::poly::{minkowski_dot, minkowski_dot_const, RatPoly, SlotName, Var};
use crate::scalar::{int, Rational, Scalar};
use crate::space::{OpenPred, Space};

/// Polynomial coefficients keyed by `(a, b)`, the powers of `u₋` and `u₊`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub terms: BTreeMap<(u32, u32), RatPoly>,
}

fn dot_const(a: &[Rational; 4], b: &[Rational; 4]) -> Rational {
    &a[0] * &b[0] - &a[1] * &b[1] - &a[2] * &b[2] - &a[3] * &b[3]
}

impl Kernel {
    pub fn zero() -> Self {
        Kernel { terms: BTreeMap::new() }
    }

    pub fn constant(c: Rational) -> Self {
        let mut k = Kernel::zero();
        k.add_term(0, 0, RatPoly::constant(c));
        k
    }

    fn add_term(&mut self, a: u32, b: u32, c: RatPoly) {
        let slot = self.terms.entry((a, b)).or_insert_with(RatPoly::zero);
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn add(&self, other: &Kernel) -> Kernel {
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.add_term(*a, *b, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Kernel {
        let mut out = Kernel::zero();
        for ((a, b), c) in &self.terms {
            out.add_term(*a, *b, c.scale(s));
        }
        out
    }

    pub fn mul(&self, other: &Kernel) -> Kernel {
        let mut out = Kernel::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term(a1 + a2, b1 + b2, c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Kernel {
        (0..n).fold(Kernel::constant(int(1)), |acc, _| acc.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `u₋` and `u₊` powers: the string-integration multiplicities.
    pub fn multiplicities(&self) -> (u32, u32) {
        let k = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let kp = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        (k, kp)
    }

    /// Degree in `p` of the numerator over the common denominator
    /// `(pe)^k (pe′)^k′`, when that numerator is homogeneous.
    pub fn numerator_degree(&self) -> Option<u32> {
        let (k, kp) = self.multiplicities();
        let mut deg = None;
        for ((a, b), c) in &self.terms {
            let d = c.homogeneous_degree_in(|v| v.slot == SlotName::P)? + (k - a) + (kp - b);
            if *deg.get_or_insert(d) != d {
                return None;
            }
        }
        deg
    }

    /// Homogeneity in `p` of the kernel itself.
    pub fn p_degree(&self) -> Option<i64> {
        let (k, kp) = self.multiplicities();
        self.numerator_degree().map(|w| w as i64 - k as i64 - kp as i64)
    }

    /// Power pairs of `u₋` on `e` and `u₊` on `e′` in every term.
    pub fn factor_slots(&self) -> Vec<(Option<SlotName>, Option<SlotName>)> {
        self.terms
            .keys()
            .map(|(a, b)| ((*a > 0).then_some(SlotName::E), (*b > 0).then_some(SlotName::Ep)))
            .collect()
    }

    /// The kernel as an expression on `(p, e, e′)` with both strings spacelike.
    pub fn to_expr(&self) -> ExprResult<DistExpr> {
        let space = Space::new([SlotName::P, SlotName::E, SlotName::Ep]);
        let mut summands = Vec::new();
        for ((a, b), c) in &self.terms {
            let mut factors = vec![DistExpr::polynomial(space.clone(), c.clone())?];
            if *a > 0 {
                factors.push(DistExpr::string_factor(false, *a, SlotName::P, SlotName::E));
            }
            if *b > 0 {
                factors.push(DistExpr::string_factor(true, *b, SlotName::P, SlotName::Ep));
            }
            summands.push(if factors.len() == 1 { factors.pop().unwrap() } else { DistExpr::product(factors)? });
        }
        let body = match summands.len() {
            0 => DistExpr::polynomial(space, RatPoly::zero())?,
            1 => summands.pop().unwrap(),
            _ => DistExpr::sum(summands)?,
        };
        DistExpr::restrict(vec![OpenPred::spacelike(SlotName::E), OpenPred::spacelike(SlotName::Ep)], body)
    }

    /// Value at a point with the boundary values regularized at `ε > 0`.
    pub fn eval(&self, p: [f64; 4], e: [f64; 4], ep: [f64; 4], eps: f64) -> Complex64 {
        let um = Complex64::new(mdot(&p, &e), -eps).inv();
        let up = Complex64::new(mdot(&p, &ep), eps).inv();
        let val = |v: Var| -> Option<f64> {
            let i = v.comp as usize;
            match v.slot {
                SlotName::P => Some(p[i]),
                SlotName::E => Some(e[i]),
                SlotName::Ep => Some(ep[i]),
                _ => None,
            }
        };
        let mut acc = Complex64::zero();
        for ((a, b), c) in &self.terms {
            let cv = c.to_f64().eval(val).unwrap_or(0.0);
            acc += um.powu(*a) * up.powu(*b) * cv;
        }
        acc
    }
}

pub fn mdot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

fn term(a: u32, b: u32, c: RatPoly) -> Kernel {
    let mut k = Kernel::zero();
    k.add_term(a, b, c);
    k
}

fn dot(slot: SlotName, v: &[Rational; 4]) -> RatPoly {
    minkowski_dot_const(slot, v)
}

/// `E_{ff′} = f^μ E_{μκ}(p, e, e′) f′^κ`.
pub fn e_mixed(f: &[Rational; 4], fp: &[Rational; 4]) -> Kernel {
    let (p, e, ep) = (SlotName::P, SlotName::E, SlotName::Ep);
    Kernel::constant(dot_const(f, fp))
        .add(&term(1, 0, dot(e, fp).mul(&dot(p, f)).neg()))
        .add(&term(0, 1, dot(ep, f).mul(&dot(p, fp)).neg()))
        .add(&term(1, 1, minkowski_dot(e, ep).mul(&dot(p, f)).mul(&dot(p, fp))))
}

/// `E_{ff} = f^μ E_{μκ}(p, e, −e) f^κ`: only `u₋` appears.
pub fn e_same_minus(f: &[Rational; 4]) -> Kernel {
    let (p, e) = (SlotName::P, SlotName::E);
    Kernel::constant(dot_const(f, f))
        .add(&term(1, 0, dot(e, f).mul(&dot(p, f)).scale(&int(-2))))
        .add(&term(2, 0, minkowski_dot(e, e).mul(&dot(p, f).pow(2))))
}

/// `E_{f′f′} = f′^μ E_{μκ}(p, −e′, e′) f′^κ`: only `u₊` appears.
pub fn e_same_plus(fp: &[Rational; 4]) -> Kernel {
    let (p, ep) = (SlotName::P, SlotName::Ep);
    Kernel::constant(dot_const(fp, fp))
        .add(&term(0, 1, dot(ep, fp).mul(&dot(p, fp)).scale(&int(-2))))
        .add(&term(0, 2, minkowski_dot(ep, ep).mul(&dot(p, fp).pow(2))))
}

/// `(−1)^s Σ_{2n≤s} β_n (E_ff)^n (E_{f′f′})^n (E_{ff′})^{s−2n}`.
pub fn spin_kernel(s: u32, betas: &[Rational], f: &[Rational; 4], fp: &[Rational; 4]) -> Kernel {
    let (eff, epp, emx) = (e_same_minus(f), e_same_plus(fp), e_mixed(f, fp));
    let mut out = Kernel::zero();
    for n in 0..=s / 2 {
        let t = eff.pow(n).mul(&epp.pow(n)).mul(&emx.pow(s - 2 * n));
        out = out.add(&t.scale(&betas[n as usize]));
    }
    if s % 2 == 1 {
        out = out.scale(&-Rational::one());
    }
    out
}

/// `1 / ([(pe) − i0]^k [(pe′) + i0]^k′)` times `p`-monomial of degree `ω`:
/// the generic string-integrated scalar kernel.
pub fn scalar_kernel(omega: u32, k: u32, kp: u32) -> Kernel {
    term(k, kp, RatPoly::var(Var::new(SlotName::P, 0)).pow(omega))
}

/// Numeric `E_{μκ}(p, e, e′)` at `ε > 0`, straight from its definition.
pub fn e_tensor_numeric(p: [f64; 4], e: [f64; 4], ep: [f64; 4], eps: f64) -> [[Complex64; 4]; 4] {
    let eta = [1.0, -1.0, -1.0, -1.0];
    let low = |v: [f64; 4]| [v[0], -v[1], -v[2], -v[3]];
    let (pl, el, epl) = (low(p), low(e), low(ep));
    let um = Complex64::new(mdot(&p, &e), -eps).inv();
    let up = Complex64::new(mdot(&p, &ep), eps).inv();
    let ee = mdot(&e, &ep);
    let mut out = [[Complex64::zero(); 4]; 4];
    for mu in 0..4 {
        for ka in 0..4 {
            let diag = if mu == ka { eta[mu] } else { 0.0 };
            let m = -diag + el[ka] * pl[mu] * um + epl[mu] * pl[ka] * up - ee * pl[mu] * pl[ka] * um * up;
            out[mu][ka] = -m;
        }
    }
    out
}

/// Default generic contraction vectors.
pub fn default_contractions() -> ([Rational; 4], [Rational; 4]) {
    let r = |v: [i64; 4]| v.map(int);
    (r([3, 1, 2, 1]), r([2, 1, 1, 3]))
}

pub fn to_f64_vec(v: &[Rational; 4]) -> [f64; 4] {
    [v[0].to_f64(), v[1].to_f64(), v[2].to_f64(), v[3].to_f64()]
}
