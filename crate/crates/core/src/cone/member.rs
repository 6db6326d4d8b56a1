//! Exact membership of a (base point, covector) pair in a bound.

use num_traits::Zero;

use super::{Assignment, ConeFamily, Covector, Verdict, VerdictValue, WavefrontBound, Witness};
use crate::linalg::{solve_columns, Solution};
use crate::scalar::Rational;
use crate::space::Space;

fn witness(point: &Assignment, xi: &Covector) -> Witness {
    Witness { point: point.clone(), covector: xi.clone() }
}

fn check_dims(space: &Space, point: &Assignment, xi: &Covector) {
    let coords = space.coords();
    for v in &coords {
        assert!(point.contains_key(v), "base point lacks coordinate {v} of {space}");
    }
    for v in point.keys().chain(xi.keys()) {
        assert!(coords.contains(v), "coordinate {v} is not part of {space}");
    }
    assert!(xi.values().any(|c| !c.is_zero()), "membership is only defined for nonzero covectors");
}

pub fn member(b: &WavefrontBound, point: &Assignment, xi: &Covector) -> Verdict {
    check_dims(&b.space, point, xi);
    let mut unknown = None;
    for (i, fam) in b.families.iter().enumerate() {
        let v = member_family(&b.space, fam, point, xi);
        match v.value {
            VerdictValue::Holds => return v.with_note(format!("family {i}")),
            VerdictValue::Unknown => unknown = Some(v.with_note(format!("family {i}"))),
            VerdictValue::Violated => {}
        }
    }
    unknown.unwrap_or_else(|| Verdict::violated(witness(point, xi), "no family contains the covector"))
}

pub fn member_family(space: &Space, fam: &ConeFamily, point: &Assignment, xi: &Covector) -> Verdict {
    let hidden = fam.hidden_vars();
    let mut sys = fam.system(space);
    sys.balls.clear();
    let base_uses_hidden = sys.eqs.iter().any(|e| e.vars().iter().any(|v| hidden.contains(v)))
        || sys.preds.iter().any(|p| p.vars().iter().any(|v| hidden.contains(v)));
    if base_uses_hidden {
        return Verdict::unknown("base conditions depend on hidden coordinates");
    }
    if !sys.holds_at(point) {
        return Verdict::violated(witness(point, xi), "base point not admitted");
    }
    if fam.full_fiber {
        return Verdict::holds("full fiber");
    }
    if !fam.hidden.is_empty() {
        return ray_ball(fam, point, xi);
    }
    let coords = space.coords();
    let mut cols: Vec<Vec<Rational>> = Vec::new();
    let mut signs = Vec::new();
    for g in &fam.generators {
        let val = g.eval(point).expect("generator uses coordinates outside the space");
        if val.is_empty() {
            continue;
        }
        cols.push(coords.iter().map(|v| val.get(v).cloned().unwrap_or_else(Rational::zero)).collect());
        signs.push(g.sign);
    }
    let rhs: Vec<Rational> = coords.iter().map(|v| xi.get(v).cloned().unwrap_or_else(Rational::zero)).collect();
    if cols.is_empty() {
        return Verdict::violated(witness(point, xi), "all generators vanish at the base point");
    }
    match solve_columns(&cols, &rhs) {
        Solution::Inconsistent => Verdict::violated(witness(point, xi), "covector outside the generated span"),
        Solution::Unique(l) => {
            if l.iter().zip(&signs).all(|(x, s)| s.admits(x)) {
                Verdict::holds(format!("coefficients {}", fmt_list(&l)))
            } else {
                Verdict::violated(witness(point, xi), format!("coefficients {} break the sign constraints", fmt_list(&l)))
            }
        }
        Solution::Underdetermined(l) => {
            if l.iter().zip(&signs).all(|(x, s)| s.admits(x)) {
                Verdict::holds(format!("particular coefficients {}", fmt_list(&l)))
            } else {
                Verdict::unknown("linearly dependent generators at this base point")
            }
        }
    }
}

fn fmt_list(l: &[Rational]) -> String {
    let parts: Vec<String> = l.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Single generator whose components are scaled hidden coordinates:
/// `ξ = λ·c·h` for some `h` in the ball. Solved by the closest point of the
/// ray `{t·y}` to the ball center.
fn ray_ball(fam: &ConeFamily, point: &Assignment, xi: &Covector) -> Verdict {
    if fam.generators.len() != 1 || fam.hidden.len() != 1 {
        return Verdict::unknown("hidden family outside the ray-ball pattern");
    }
    let ball = &fam.hidden[0];
    let hv = ball.vars();
    let g = &fam.generators[0];
    // y_k = ξ_v / c_v for the hidden coordinate k referenced by component v
    let mut y: Vec<Option<Rational>> = vec![None; hv.len()];
    for (v, p) in &g.comps {
        let q = p.substitute(|w| point.get(&w).cloned());
        let Some((c, h)) = q.as_scaled_var() else {
            return Verdict::unknown("generator component is not a scaled hidden coordinate");
        };
        let Some(k) = hv.iter().position(|w| *w == h) else {
            return Verdict::unknown("generator component refers to a non-hidden coordinate");
        };
        if y[k].is_some() {
            return Verdict::unknown("hidden coordinate used twice");
        }
        y[k] = Some(xi.get(v).cloned().unwrap_or_else(Rational::zero) / c);
    }
    if xi.keys().any(|v| !g.comps.contains_key(v)) {
        return Verdict::violated(witness(point, xi), "covector has components outside the generator");
    }
    let (mut yy, mut yc, mut cc) = (Rational::zero(), Rational::zero(), Rational::zero());
    for (k, yk) in y.iter().enumerate() {
        if let Some(yk) = yk {
            yy += yk * yk;
            yc += yk * &ball.center[k];
            cc += &ball.center[k] * &ball.center[k];
        }
    }
    if yy.is_zero() {
        return Verdict::violated(witness(point, xi), "covector vanishes on the generator components");
    }
    let r2 = &ball.radius * &ball.radius;
    // t = 1/λ carries the sign of λ; the squared distance is convex in t
    let t_star = &yc / &yy;
    let admissible = !t_star.is_zero() && g.sign.admits(&t_star);
    let reached = if admissible { &cc - &yc * &yc / &yy <= r2 } else { cc < r2 };
    if reached {
        Verdict::holds("ray meets the hidden ball")
    } else {
        Verdict::violated(witness(point, xi), "ray misses the hidden ball")
    }
}
