//! R-matrix weights and layout, Yang–Baxter residuals, and the exact
//! quadric and ideal-generator identities over Q[x1, x2, y1, y2, U].

use std::collections::HashMap;

use rayon::prelude::*;
use rug::Complex;

use crate::elliptic::WeightPoint;
use crate::error::{Error, Result};
use crate::lax::{lax_explicit, LaxFamily};
use crate::matrix::ComplexMatrix;
use crate::numeric::is_tiny;
use crate::ratpoly::{ExactCheck, Rat, RatPoly, Reducer, RewriteRule};

/// The eight R-matrix weights, normalized to c = 1. `bb` is b̄.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTuple {
    pub a: Complex,
    pub b: Complex,
    pub bb: Complex,
    pub c: Complex,
    pub d: Complex,
    pub g: Complex,
    pub h: Complex,
    pub q: Complex,
}

impl WeightTuple {
    pub fn as_array(&self) -> [&Complex; 8] {
        [&self.a, &self.b, &self.bb, &self.c, &self.d, &self.g, &self.h, &self.q]
    }

    /// Residuals of Q1…Q5.
    pub fn quadric_residuals(&self, u: &Complex) -> [Complex; 5] {
        let prec = self.a.prec().0;
        let m = |x: &Complex, y: &Complex| Complex::with_val(prec, x * y);
        let (a, b, bb, c, d, g, h, q) = (&self.a, &self.b, &self.bb, &self.c, &self.d, &self.g, &self.h, &self.q);
        [
            m(a, g) + m(b, bb) - m(c, c),
            m(a, g) - m(g, h) - m(a, q) + m(h, q) + m(b, bb) - m(d, d),
            m(h, q) - m(c, c) - m(d, d),
            m(a, h) + m(g, q) - m(a, a) - m(b, b) - m(g, g) - m(bb, bb),
            m(&m(u, c), d) - m(h, h) + m(q, q),
        ]
    }
}

/// Weights from two curve points (x1, y1), (x2, y2) in the chart c = 1.
pub fn weights_from_points(x1: &Complex, y1: &Complex, x2: &Complex, y2: &Complex) -> Result<WeightTuple> {
    let prec = x1.prec().0;
    let m = |x: &Complex, y: &Complex| Complex::with_val(prec, x * y);
    let guard = |z: &Complex, what: &str| -> Result<()> {
        if z.is_zero() || is_tiny(z, -(prec as i64) / 2) {
            return Err(Error::Pole(format!("{what} vanishes")));
        }
        Ok(())
    };
    let t1 = m(x1, x1) + m(y1, y1);
    let t2 = m(x2, x2) + m(y2, y2);
    let dd = m(&m(x1, x1), &m(x2, x2)) - m(&m(y1, y1), &m(y2, y2));
    guard(&t1, "θ(x1, y1)")?;
    guard(&t2, "θ(x2, y2)")?;
    guard(&dd, "x1²x2² − y1²y2²")?;
    let (x12, y12, x1y2, y1x2) = (m(x1, x2), m(y1, y2), m(x1, y2), m(y1, x2));
    let div = |n: Complex, d: &Complex| Complex::with_val(prec, &n / d);
    Ok(WeightTuple {
        a: div(y12.clone(), &t1) + div(x12.clone(), &t2),
        b: div(y1x2.clone(), &t2) - div(x1y2.clone(), &t1),
        bb: div(y1x2.clone(), &t1) - div(x1y2.clone(), &t2),
        c: Complex::with_val(prec, 1),
        d: div(m(x1, y1) - m(x2, y2), &dd),
        g: div(x12.clone(), &t1) + div(y12.clone(), &t2),
        h: div(m(&x12, &t1) - m(&y12, &t2), &dd),
        q: div(m(&x12, &t2) - m(&y12, &t1), &dd),
    })
}

pub fn weights(w1: &WeightPoint, w2: &WeightPoint) -> Result<WeightTuple> {
    weights_from_points(&w1.xc, &w1.yc, &w2.xc, &w2.yc)
}

const LAYOUT: [(usize, usize, &str); 36] = [
    (1, 1, "a"), (2, 2, "b"), (2, 5, "c"), (3, 3, "b"), (3, 9, "c"),
    (4, 4, "h-a"), (4, 7, "d"), (4, 10, "d"), (4, 13, "h"),
    (5, 2, "c"), (5, 5, "bb"), (6, 6, "g"),
    (7, 4, "d"), (7, 7, "q-g"), (7, 10, "q"), (7, 13, "d"),
    (8, 8, "bb"), (8, 14, "c"), (9, 3, "c"), (9, 9, "bb"),
    (10, 4, "d"), (10, 7, "q"), (10, 10, "q-g"), (10, 13, "d"),
    (11, 11, "g"), (12, 12, "bb"), (12, 15, "c"),
    (13, 4, "h"), (13, 7, "d"), (13, 10, "d"), (13, 13, "h-a"),
    (14, 8, "c"), (14, 14, "b"), (15, 12, "c"), (15, 15, "b"), (16, 16, "a"),
];

fn assemble(w: &WeightTuple, entry_8_8: &str) -> ComplexMatrix {
    let prec = w.a.prec().0;
    let val = |s: &str| -> Complex {
        match s {
            "a" => w.a.clone(),
            "b" => w.b.clone(),
            "bb" => w.bb.clone(),
            "c" => w.c.clone(),
            "d" => w.d.clone(),
            "g" => w.g.clone(),
            "h" => w.h.clone(),
            "q" => w.q.clone(),
            "h-a" => Complex::with_val(prec, &w.h - &w.a),
            "q-g" => Complex::with_val(prec, &w.q - &w.g),
            _ => unreachable!(),
        }
    };
    let mut r = ComplexMatrix::zeros(16, prec);
    for (row, col, s) in LAYOUT {
        let s = if (row, col) == (8, 8) { entry_8_8 } else { s };
        r.set1(row, col, &val(s));
    }
    r
}

/// The R-matrix layout, with b̄ at (8,8).
pub fn rmatrix_assemble(w: &WeightTuple) -> ComplexMatrix {
    assemble(w, "bb")
}

/// Same layout with b in place of b̄ at (8,8); fails Yang–Baxter.
pub fn rmatrix_assemble_b_at_88(w: &WeightTuple) -> ComplexMatrix {
    assemble(w, "b")
}

/// How the R-matrix of a Yang–Baxter check is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RVariant {
    Standard,
    BAt88,
    /// d → −d.
    FlipD,
}

/// ‖R₁₂L₁₃(λ1)L₂₃(λ2) − L₂₃(λ2)L₁₃(λ1)R₁₂‖ / ‖lhs‖ on C4⊗C4⊗C4.
pub fn ybe_residual(fam: &LaxFamily, l1: &Complex, l2: &Complex, variant: RVariant) -> Result<f64> {
    let (p1, p2) = (fam.weights(l1)?, fam.weights(l2)?);
    let mut w = weights(&p1, &p2)?;
    if variant == RVariant::FlipD {
        w.d = -w.d;
    }
    let r = match variant {
        RVariant::BAt88 => rmatrix_assemble_b_at_88(&w),
        _ => rmatrix_assemble(&w),
    };
    ybe_residual_from(&r, &lax_explicit(&p1.xc, &p1.yc)?, &lax_explicit(&p2.xc, &p2.yc)?)
}

pub fn ybe_residual_from(r: &ComplexMatrix, la: &ComplexMatrix, lb: &ComplexMatrix) -> Result<f64> {
    let r12 = r.embed_pair(0, 1, 3)?;
    let l13 = la.embed_pair(0, 2, 3)?;
    let l23 = lb.embed_pair(1, 2, 3)?;
    let lhs = r12.mul(&l13).mul(&l23);
    let rhs = l23.mul(&l13).mul(&r12);
    Ok(lhs.rel_residual(&rhs))
}

/// Variable order for every exact check in this module; x1⁴ and x2⁴ lead.
pub const CURVE_VARS: [&str; 5] = ["x1", "x2", "y1", "y2", "U"];

pub const WEIGHT_VARS: [&str; 8] = ["a", "b", "bb", "c", "d", "g", "h", "q"];

/// p1…p8 in the order a, b, b̄, c, d, g, h, q.
pub const P_POLYS: [&str; 8] = [
    "(y1*y2*T2 + x1*x2*T1)*D",
    "(y1*x2*T1 - x1*y2*T2)*D",
    "(y1*x2*T2 - x1*y2*T1)*D",
    "T1*T2*D",
    "(x1*y1 - x2*y2)*T1*T2",
    "(x1*x2*T2 + y1*y2*T1)*D",
    "(x1*x2*T1 - y1*y2*T2)*T1*T2",
    "(x1*x2*T2 - y1*y2*T1)*T1*T2",
];

pub const QUADRICS: [(&str, &str); 5] = [
    ("Q1", "-c^2 + a*g + b*bb"),
    ("Q2", "-d^2 + a*g - g*h - a*q + h*q + b*bb"),
    ("Q3", "-c^2 - d^2 + h*q"),
    ("Q4", "-a^2 - b^2 - g^2 + a*h + g*q - bb^2"),
    ("Q5", "U*c*d - h^2 + q^2"),
];

/// Q5 with U → 2U.
pub const Q5_MUTATED: &str = "2*U*c*d - h^2 + q^2";

/// Generators of the second ideal; w1, w2 stand for ω1, ω2.
pub const I2_GENERATORS: [(&str, &str); 8] = [
    ("I2_1", "a*g - c^2 + b*bb"),
    ("I2_2", "(b^2 + bb^2 + a^2 - a*h)*(h - a)^3 + a*(d^2 - b*bb)^2 - 2*b*bb*(h - a)*(d^2 - b*bb)"),
    ("I2_3", "(x2^2 + y2^2)^2 - U*x2*y2 - 1"),
    ("I2_4", "b^2 + a^2 - a*h + w1*c*d"),
    ("I2_5", "b*c + w1*bb*d - w2*a*d"),
    ("I2_6", "w2*b*d + w1*w2*bb*c - (1 + w1^2)*(h - a)*c"),
    ("I2_7", "w2*a*d - w1*w2*(q - g)*c - (1 + w1^2)*b*c"),
    ("I2_6_factored", "(c^2 - b*bb)*(d^2 - b*bb) + a*(h - a)*(a*(h - a) - b^2 - bb^2)"),
];

pub const OMEGA_CURVE: &str = "(w1^2 + w2^2)^2 - U*w1*w2^2 + 2*(w1^2 - w2^2) + 1";

const OMEGA_DEN: &str = "U*x2*y2 + 1";
const OMEGA1_NUM: &str = "U*x2^2*y2^2";
const OMEGA2_NUM: &str = "x2^2*(U*x2*y2 + 1) + y2^2";

fn curve_poly(src: &str) -> Result<RatPoly> {
    let src = src
        .replace("T1", "(x1^2 + y1^2)")
        .replace("T2", "(x2^2 + y2^2)")
        .replace('D', "(x1^2*x2^2 - y1^2*y2^2)");
    RatPoly::parse(&src, &CURVE_VARS)
}

pub fn weight_polys() -> Result<Vec<RatPoly>> {
    P_POLYS.iter().map(|s| curve_poly(s)).collect()
}

/// Division by E2(x1, y1) and E2(x2, y2).
pub fn curve_reducer() -> Result<Reducer> {
    let rules = ["(x1^2 + y1^2)^2 - U*x1*y1 - 1", "(x2^2 + y2^2)^2 - U*x2*y2 - 1"]
        .iter()
        .map(|s| RewriteRule::from_generator(&RatPoly::parse(s, &CURVE_VARS)?))
        .collect::<Result<Vec<_>>>()?;
    Reducer::new(&CURVE_VARS, &rules)
}

fn all_vars() -> Vec<&'static str> {
    let mut v: Vec<&str> = WEIGHT_VARS.to_vec();
    v.extend(["w1", "w2"]);
    v.extend(CURVE_VARS);
    v
}

/// Substitutes the p-polynomials and ω's into an expression, clears the ω
/// denominator and reduces modulo the two curve relations.
pub fn reduce_identity(name: &str, src: &str, red: &Reducer, ps: &[RatPoly]) -> Result<ExactCheck> {
    let vars = all_vars();
    let expr = RatPoly::parse(src, &vars)?;
    let (cleared, m) = if expr.degree_in("w1") + expr.degree_in("w2") > 0 {
        let fr = [("w1", RatPoly::parse(OMEGA1_NUM, &CURVE_VARS)?), ("w2", RatPoly::parse(OMEGA2_NUM, &CURVE_VARS)?)];
        let den = RatPoly::parse(OMEGA_DEN, &CURVE_VARS)?;
        expr.clear_fraction_vars(&fr, &den)?
    } else {
        (expr, 0)
    };
    let mut subs: HashMap<&str, RatPoly> = HashMap::new();
    for (v, p) in WEIGHT_VARS.iter().zip(ps) {
        subs.insert(v, p.clone());
    }
    let remainder = cleared.compose_reduced(&subs, red)?;
    let multiplier = match m {
        0 => "1".to_string(),
        1 => format!("({OMEGA_DEN})"),
        m => format!("({OMEGA_DEN})^{m}"),
    };
    Ok(ExactCheck { name: name.to_string(), multiplier, remainder })
}

fn run_all(items: &[(&str, &str)]) -> Result<Vec<ExactCheck>> {
    let red = curve_reducer()?;
    let ps = weight_polys()?;
    items.par_iter().map(|(n, s)| reduce_identity(n, s, &red, &ps)).collect()
}

/// Q1…Q5 with weights replaced by p1…p8; each remainder should vanish.
pub fn verify_quadrics_exact() -> Result<Vec<ExactCheck>> {
    run_all(&QUADRICS)
}

pub fn verify_quadric_mutation() -> Result<ExactCheck> {
    run_all(&[("Q5_U_doubled", Q5_MUTATED)]).map(|mut v| v.remove(0))
}

pub fn verify_i2_generators() -> Result<Vec<ExactCheck>> {
    run_all(&I2_GENERATORS)
}

pub fn verify_omega_curve() -> Result<ExactCheck> {
    run_all(&[("omega_curve", OMEGA_CURVE)]).map(|mut v| v.remove(0))
}

/// (ω1, ω2) at a point of E2.
pub fn omega(x2: &Complex, y2: &Complex, u: &Complex) -> Result<(Complex, Complex)> {
    let prec = x2.prec().0;
    let xy = Complex::with_val(prec, x2 * y2);
    let den = Complex::with_val(prec, u * &xy) + 1u32;
    if den.is_zero() || is_tiny(&den, -(prec as i64) / 2) {
        return Err(Error::Pole("U x2 y2 + 1 vanishes".into()));
    }
    let w1 = Complex::with_val(prec, u * Complex::with_val(prec, &xy * &xy)) / &den;
    let w2 = Complex::with_val(prec, x2 * x2) + Complex::with_val(prec, y2 * y2) / &den;
    Ok((w1, w2))
}

/// The ω-curve evaluated at numeric ω's.
pub fn omega_curve_residual(w1: &Complex, w2: &Complex, u: &Complex) -> Complex {
    let prec = w1.prec().0;
    let s1 = Complex::with_val(prec, w1 * w1);
    let s2 = Complex::with_val(prec, w2 * w2);
    let sum = Complex::with_val(prec, &s1 + &s2);
    Complex::with_val(prec, &sum * &sum) - Complex::with_val(prec, u * w1) * &s2 + (s1 - s2) * 2u32 + 1u32
}

/// p_j / p4 at a numeric point; reproduces the weights with c = 1.
pub fn p_ratios(x1: &Complex, y1: &Complex, x2: &Complex, y2: &Complex, u: &Complex) -> Result<Vec<Complex>> {
    let prec = x1.prec().0;
    let ps = weight_polys()?;
    let env: HashMap<&str, Complex> =
        [("x1", x1.clone()), ("x2", x2.clone()), ("y1", y1.clone()), ("y2", y2.clone()), ("U", u.clone())].into();
    let vals = ps.iter().map(|p| p.eval_complex(&env, prec)).collect::<Result<Vec<_>>>()?;
    if vals[3].is_zero() {
        return Err(Error::Pole("p4 vanishes".into()));
    }
    Ok(vals.iter().map(|v| Complex::with_val(prec, v / &vals[3])).collect())
}

/// Exact p-polynomial values at a rational point.
pub fn p_values(point: &[(&str, Rat)]) -> Result<Vec<Rat>> {
    let env: HashMap<&str, Rat> = point.iter().cloned().collect();
    weight_polys()?.iter().map(|p| p.eval(&env)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::Form;
    use crate::numeric::{abs_f64, c, rel_dist};
    use crate::ratpoly::rat;

    const PREC: u32 = 128;

    #[test]
    fn p_values_at_simple_points() {
        let v = p_values(&[("x1", rat(1, 1)), ("y1", rat(0, 1)), ("x2", rat(1, 1)), ("y2", rat(0, 1)), ("U", rat(3, 1))]).unwrap();
        assert_eq!(v[3], rat(1, 1));
        let ps = weight_polys().unwrap();
        let p5 = ps[4].compose(&[("x2", RatPoly::var(&CURVE_VARS, "x1").unwrap()), ("y2", RatPoly::var(&CURVE_VARS, "y1").unwrap())].into(), &CURVE_VARS).unwrap();
        assert!(p5.is_zero());
    }

    #[test]
    fn coincident_points_give_the_permutation() {
        let (x, y) = (c(PREC, 0.5, 0.1), c(PREC, 0.3, 0.0));
        let w = weights_from_points(&x, &y, &x, &y).unwrap();
        let one = c(PREC, 1.0, 0.0);
        for (v, want) in w.as_array().iter().zip([1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0]) {
            assert!(abs_f64(&Complex::with_val(PREC, *v - c(PREC, want, 0.0))) < 1e-35);
        }
        assert!(rmatrix_assemble(&w).rel_residual(&ComplexMatrix::permutation(PREC)) < 1e-35);
        let _ = one;
    }

    #[test]
    fn layout_entries() {
        let w = WeightTuple {
            a: c(PREC, 2.0, 0.0),
            b: c(PREC, 3.0, 0.0),
            bb: c(PREC, 5.0, 0.0),
            c: c(PREC, 1.0, 0.0),
            d: c(PREC, 7.0, 0.0),
            g: c(PREC, 11.0, 0.0),
            h: c(PREC, 13.0, 0.0),
            q: c(PREC, 17.0, 0.0),
        };
        let r = rmatrix_assemble(&w);
        assert_eq!(r.nonzero_count(), 36);
        assert_eq!(r.get(3, 3), &c(PREC, 11.0, 0.0));
        assert_eq!(r.get(6, 6), &c(PREC, 6.0, 0.0));
        assert_eq!(r.get(7, 7), &c(PREC, 5.0, 0.0));
        assert_eq!(rmatrix_assemble_b_at_88(&w).get(7, 7), &c(PREC, 3.0, 0.0));
    }

    #[test]
    fn ybe_and_quadrics_at_one_point() {
        let u = c(PREC, 2.0, 0.0);
        let fam = LaxFamily::new(&u, PREC, Form::Sn).unwrap();
        let (l1, l2) = (c(PREC, 0.31, 0.07), c(PREC, -0.52, 0.11));
        assert!(ybe_residual(&fam, &l1, &l2, RVariant::Standard).unwrap() < 1e-30);
        assert!(ybe_residual(&fam, &l1, &l2, RVariant::FlipD).unwrap() > 1e-3);
        assert!(ybe_residual(&fam, &l1, &l2, RVariant::BAt88).unwrap() > 1e-3);
        let (p1, p2) = (fam.weights(&l1).unwrap(), fam.weights(&l2).unwrap());
        let w = weights(&p1, &p2).unwrap();
        for r in w.quadric_residuals(&u) {
            assert!(abs_f64(&r) < 1e-30);
        }
        let ratios = p_ratios(&p1.xc, &p1.yc, &p2.xc, &p2.yc, &u).unwrap();
        for (x, y) in ratios.iter().zip(w.as_array()) {
            assert!(rel_dist(x, y) < 1e-30);
        }
        let (o1, o2) = omega(&p2.xc, &p2.yc, &u).unwrap();
        assert!(abs_f64(&omega_curve_residual(&o1, &o2, &u)) < 1e-30);
    }

    #[test]
    fn omega_at_base_point() {
        let (w1, w2) = omega(&c(PREC, 1.0, 0.0), &c(PREC, 0.0, 0.0), &c(PREC, 3.0, 0.0)).unwrap();
        assert!(w1.is_zero());
        assert_eq!(w2, c(PREC, 1.0, 0.0));
    }

    #[test]
    fn quadrics_exact() {
        for chk in verify_quadrics_exact().unwrap() {
            assert!(chk.is_zero(), "{}: {}", chk.name, chk.summary());
        }
        assert!(!verify_quadric_mutation().unwrap().is_zero());
    }

    #[test]
    fn omega_curve_exact() {
        let chk = verify_omega_curve().unwrap();
        assert!(chk.is_zero(), "{}", chk.summary());
        assert_eq!(chk.multiplier, "(U*x2*y2 + 1)^4");
    }

    #[test]
    fn i2_generators_exact() {
        for chk in verify_i2_generators().unwrap() {
            assert!(chk.is_zero(), "{}: {}", chk.name, chk.summary());
        }
    }
}
