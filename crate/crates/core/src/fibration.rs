//! The elliptic fibration over Ē2: fiber quadrics over a base point, the
//! plane quartic C, its birational map to Weierstrass form and the J checks.

use std::collections::HashMap;
use std::sync::OnceLock;

use rug::{Complex, Float};

use crate::curves::{j_e2, j_e3, j_from_weierstrass, phi4, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::numeric::{abs_f64, i_unit, is_tiny, poly_roots};
use crate::ratpoly::{ExactCheck, Rat, RatPoly, Reducer, RewriteRule};

/// Base point (c0, d0) of Ē2 with its coupling; `exact` holds rational coordinates when known.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    pub c0: Complex,
    pub d0: Complex,
    pub u: Complex,
    pub exact: Option<ExactBase>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactBase {
    pub c0: Rat,
    pub d0: Rat,
    pub u: Rat,
}

/// Rational base points used by the suite: (c0, d0).
pub const STANDARD_BASES: [(i64, i64, i64, i64); 5] = [(1, 2, 1, 2), (1, 2, 1, 3), (1, 3, 2, 5), (2, 3, 1, 4), (3, 5, 1, 7)];

/// (1 − (c0² + d0²)²)/(c0 d0), the coupling through (c0, d0).
pub fn induced_coupling(c0: &Rat, d0: &Rat) -> Result<Rat> {
    let p = Rat::from(c0 * d0);
    if p.cmp0().is_eq() {
        return Err(Error::Degenerate("c0·d0 = 0: the Weierstrass map needs c0 d0 ≠ 0".into()));
    }
    let s = Rat::from(c0 * c0) + Rat::from(d0 * d0);
    Ok((Rat::from(1) - Rat::from(&s * &s)) / p)
}

impl BasePoint {
    pub fn from_rational(c0: &Rat, d0: &Rat, prec: u32) -> Result<Self> {
        let u = induced_coupling(c0, d0)?;
        Ok(BasePoint {
            c0: Complex::with_val(prec, c0),
            d0: Complex::with_val(prec, d0),
            u: Complex::with_val(prec, &u),
            exact: Some(ExactBase { c0: c0.clone(), d0: d0.clone(), u }),
        })
    }

    pub fn standard(prec: u32) -> Vec<BasePoint> {
        STANDARD_BASES
            .iter()
            .map(|&(a, b, c, d)| Self::from_rational(&Rat::from((a, b)), &Rat::from((c, d)), prec).unwrap())
            .collect()
    }

    pub fn prec(&self) -> u32 {
        self.c0.prec().0
    }

    /// (c0² + d0²)² + U c0 d0 − 1.
    pub fn base_curve_residual(&self) -> Complex {
        let prec = self.prec();
        let s = Complex::with_val(prec, &self.c0 * &self.c0) + Complex::with_val(prec, &self.d0 * &self.d0);
        Complex::with_val(prec, &s * &s) + Complex::with_val(prec, &self.u * &self.c0) * &self.d0 - 1u32
    }

    fn env(&self) -> HashMap<&'static str, Complex> {
        let prec = self.prec();
        HashMap::from([
            ("c0", self.c0.clone()),
            ("d0", self.d0.clone()),
            ("U", self.u.clone()),
            ("V", Complex::with_val(prec, self.u.recip_ref())),
        ])
    }
}

/// Base points over a given coupling with prescribed c0: the roots d0 ≠ 0 of BASE_CURVE.
pub fn sample_base(u: &Complex, c0: &Complex) -> Result<Vec<BasePoint>> {
    let prec = u.prec().0;
    let c2 = Complex::with_val(prec, c0 * c0);
    let coeffs = vec![
        Complex::with_val(prec, &c2 * &c2) - 1u32,
        Complex::with_val(prec, u * c0),
        Complex::with_val(prec, &c2 * 2u32),
        Complex::new(prec),
        Complex::with_val(prec, 1),
    ];
    Ok(poly_roots(&coeffs, prec)?
        .into_iter()
        .filter(|d0| !is_tiny(d0, -(prec as i64) / 2))
        .map(|d0| BasePoint { c0: c0.clone(), d0, u: u.clone(), exact: None })
        .collect())
}

pub const FIBER_VARS: [&str; 7] = ["a", "b", "bb", "g", "c0", "d0", "U"];

pub const FIBER_QUADRICS: [(&str, &str); 3] = [
    ("Q1~", "b*bb + a*g - c0^2"),
    ("Q2~", "b*bb + g*(a - 1) - (c0^2 + d0^2)*a + c0^2"),
    ("Q4~", "b^2 + bb^2 + g^2 - (c0^2 + d0^2)*g + a*(a - 1)"),
];

/// Q̃1, Q̃2, Q̃4 over (a, b, b̄, g, c0, d0, U).
pub fn fiber_quadrics_symbolic() -> Result<Vec<RatPoly>> {
    FIBER_QUADRICS.iter().map(|(_, s)| RatPoly::parse(s, &FIBER_VARS)).collect()
}

/// The fiber quadrics with an exact base point substituted.
pub fn fiber_quadrics(base: &ExactBase) -> Result<Vec<RatPoly>> {
    Ok(fiber_quadrics_symbolic()?
        .into_iter()
        .map(|p| p.specialize("c0", &base.c0).specialize("d0", &base.d0).specialize("U", &base.u))
        .collect())
}

/// Q̃2 − Q̃1 against −g − (c0² + d0²)a + 2c0²; true when they coincide.
pub fn q2_minus_q1_is_linear_in_g() -> Result<bool> {
    q2_minus_q1_matches(Q2_MINUS_Q1)
}

pub const Q2_MINUS_Q1: &str = "-g - (c0^2 + d0^2)*a + 2*c0^2";
/// Q2_MINUS_Q1 with 2c0² → 3c0².
pub const Q2_MINUS_Q1_MUTATED: &str = "-g - (c0^2 + d0^2)*a + 3*c0^2";

pub fn q2_minus_q1_matches(src: &str) -> Result<bool> {
    let q = fiber_quadrics_symbolic()?;
    let want = RatPoly::parse(src, &FIBER_VARS)?;
    Ok((&(&q[1] - &q[0]) - &want).is_zero())
}

pub const QUARTIC_VARS: [&str; 5] = ["c0", "d0", "a", "b", "U"];

pub const QUARTIC_C: &str = "(a^2 + b^2)^2 - c0^4*(2*a - 1)*(2*a^2 + 2*b^2 - 2*a + 1) \
    - U*c0*d0*a*(a^3 + (1 + a)*b^2) - 2*c0^2*d0^2*((2*a - 1)*a^2 + (2*a + 1)*b^2)";

/// C with 2c0²d0² replaced by 3c0²d0² in its last group.
pub const QUARTIC_C_MUTATED: &str = "(a^2 + b^2)^2 - c0^4*(2*a - 1)*(2*a^2 + 2*b^2 - 2*a + 1) \
    - U*c0*d0*a*(a^3 + (1 + a)*b^2) - 3*c0^2*d0^2*((2*a - 1)*a^2 + (2*a + 1)*b^2)";

pub const BASE_CURVE: &str = "(c0^2 + d0^2)^2 + U*c0*d0 - 1";

pub fn quartic_c() -> Result<RatPoly> {
    RatPoly::parse(QUARTIC_C, &QUARTIC_VARS)
}

fn base_curve_reducer() -> Result<Reducer> {
    let rule = RewriteRule::from_generator(&RatPoly::parse(BASE_CURVE, &QUARTIC_VARS)?)?;
    Reducer::new(&QUARTIC_VARS, &[rule])
}

/// Eliminates g (from Q̃2 − Q̃1) and b̄ (from Q̃1) in b²·Q̃4, then compares with
/// `c_src` modulo BASE_CURVE. A zero remainder means C is recovered.
pub fn verify_quartic_c(c_src: &str) -> Result<ExactCheck> {
    let p = |s: &str| RatPoly::parse(s, &QUARTIC_VARS);
    let g = p("2*c0^2 - (c0^2 + d0^2)*a")?;
    let s = p("c0^2 + d0^2")?;
    let a = p("a")?;
    let b2 = p("b^2")?;
    let c02 = p("c0^2")?;
    // b²·b̄² = (c0² − a g)²
    let bbb = &c02 - &(&a * &g);
    let q4_rest = &(&(&b2 + &(&g * &g)) - &(&s * &g)) + &(&a * &(&a - &p("1")?));
    let eliminated = &(&b2 * &q4_rest) + &(&bbb * &bbb);
    let diff = &eliminated - &p(c_src)?;
    Ok(ExactCheck {
        name: "quartic_C".into(),
        multiplier: "b^2".into(),
        remainder: base_curve_reducer()?.reduce(&diff),
    })
}

pub fn verify_quartic_c_exact() -> Result<ExactCheck> {
    verify_quartic_c(QUARTIC_C)
}

pub const ALPHA_VARS: [&str; 4] = ["c0", "d0", "U", "V"];
pub const BETA_VARS: [&str; 5] = ["c0", "d0", "U", "V", "al1"];

/// α1…α7 with V = 1/U.
pub const ALPHAS: [&str; 7] = [
    "(c0^2 + d0^2)*U",
    "c0^2*U",
    "1 + 4*c0^4 - 12*c0^2*d0^2 - 2*c0*d0*U",
    "32/3*c0*d0*V + 16*c0^4 + 11/6*c0*d0*U - 2",
    "6*c0^3 - 6*c0*d0^2 - d0*U/2",
    "8/3*d0*V + 9*c0^3 - 3*c0*d0^2 - d0*U/24",
    "16/3*d0 + 4*c0^3*U - 4*c0*d0^2*U - d0*U^2/12",
];

/// β1…β10 with V = 1/U; al1 is α1.
pub const BETAS: [&str; 10] = [
    "2*c0^2 - 2*d0^2 - 13*c0^3*d0*U + 3*c0*d0^3*U",
    "al1*V*(8*c0 - 33*c0^2*d0*U - d0^3*U) + 24*c0*d0^2*(2*c0*d0*U - 1)",
    "al1*V*(8*c0 - 35*c0^2*d0*U - 3*d0^3*U) + 32*c0*d0^2*(2*c0*d0*U - 1)",
    "2*c0^2 - 2*d0^2 - 7*c0^3*d0*U + c0*d0^3*U",
    "-8*c0 + 32*c0^3*d0^2 + 32*c0*d0^4 + 17*c0^2*d0*U + d0^3*U",
    "12*c0^3 - 36*c0*d0^2 - d0*U - 40*c0^4*d0*U + 24*c0^2*d0^3*U + c0*d0^2*U^2",
    "24 - 192*c0^2*d0^2 - 58*c0*d0*U - 64*c0^5*d0*U + 192*c0^3*d0^3*U + 35*c0^2*d0^2*U^2 - d0^4*U^2",
    "-8*c0^3 + 8*c0*d0^2 + 32*c0^5*d0^2 + 32*c0^3*d0^4 + d0*U + 24*c0^4*d0*U - 8*c0^2*d0^3*U - c0*d0^2*U^2",
    "-8*c0^3 - 40*c0*d0^2 + 128*c0^5*d0^2 + 128*c0^3*d0^4 - 3*d0*U + 36*c0^4*d0*U + 36*c0^2*d0^3*U + 2*c0*d0^2*U^2",
    "al1*V*(8*c0^2*d0^2 - 1) + c0*d0*(3*c0^2 + d0^2)*U",
];

pub const X_TILDE: &str = "2*al1^2*V*a^2*((d0^2 - 5*c0^2)*a + 3/2*i*(d0^2 - 3*c0^2)*b) \
    + 2*al1*a*(a + i*b)*(b^2 + al1^2*V^2*a^2) + 2*al1*c0*(i*al5*b + al6*a)*a \
    - al2*(2*(2*a - 1)*b^2 + i*al3*b + al4*a) - i*U*(3*c0^2 - d0^2)*b^3 + al7*c0^3";

pub const Y_TILDE: &str = "4*c0*d0*al1*a^2*(b - i*a)*(b^2 + al1^2*V^2*a^2) \
    + 2*al1^2*V^2*a^3*((be1 + al1*c0*d0)*b - i*be1*a) + c0*al1*V*a^2*(2*i*be2*a - 3/2*be3*b) \
    + 2*a*b^2*((be4 + al1*c0*d0)*b - i*be4*a) + 4*i*c0^2*b^2*((2*al1*al2*V^2 - 1)*(2*a - 1) - c0*d0*U/2) \
    + c0/2*(be5*b^3 - 4*i*be6*c0^2*a^2 + be7*c0*a*b - 4*i*c0^2*be8*a + be9*c0^2*b + 8*i*be10*c0^3)";

pub const COEFF_NAMES: [&str; 17] = [
    "al1", "al2", "al3", "al4", "al5", "al6", "al7", "be1", "be2", "be3", "be4", "be5", "be6", "be7", "be8", "be9", "be10",
];

fn map_vars() -> Vec<&'static str> {
    let mut v = vec!["a", "b", "i", "c0", "d0", "U", "V"];
    v.extend(COEFF_NAMES);
    v
}

struct Parsed {
    alphas: Vec<RatPoly>,
    betas: Vec<RatPoly>,
    xt: RatPoly,
    yt: RatPoly,
    c: RatPoly,
}

fn parsed() -> &'static Parsed {
    static P: OnceLock<Parsed> = OnceLock::new();
    P.get_or_init(|| {
        let mv = map_vars();
        Parsed {
            alphas: ALPHAS.iter().map(|s| RatPoly::parse(s, &ALPHA_VARS).unwrap()).collect(),
            betas: BETAS.iter().map(|s| RatPoly::parse(s, &BETA_VARS).unwrap()).collect(),
            xt: RatPoly::parse(X_TILDE, &mv).unwrap(),
            yt: RatPoly::parse(Y_TILDE, &mv).unwrap(),
            c: RatPoly::parse(QUARTIC_C, &QUARTIC_VARS).unwrap(),
        }
    })
}

/// Exact α1…α7 at rational (c0, d0, U).
pub fn alphas_exact(c0: &Rat, d0: &Rat, u: &Rat) -> Result<Vec<Rat>> {
    if u.cmp0().is_eq() {
        return Err(Error::Degenerate("α4 and α6 need U ≠ 0".into()));
    }
    let v = Rat::from(u.recip_ref());
    let env: HashMap<&str, Rat> = HashMap::from([("c0", c0.clone()), ("d0", d0.clone()), ("U", u.clone()), ("V", v)]);
    parsed().alphas.iter().map(|p| p.eval(&env)).collect()
}

/// Exact β1…β10 at rational (c0, d0, U).
pub fn betas_exact(c0: &Rat, d0: &Rat, u: &Rat) -> Result<Vec<Rat>> {
    let al = alphas_exact(c0, d0, u)?;
    let v = Rat::from(u.recip_ref());
    let env: HashMap<&str, Rat> =
        HashMap::from([("c0", c0.clone()), ("d0", d0.clone()), ("U", u.clone()), ("V", v), ("al1", al[0].clone())]);
    parsed().betas.iter().map(|p| p.eval(&env)).collect()
}

/// Numeric α/β table for one base point, keyed by `COEFF_NAMES` order.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients(pub Vec<Complex>);

impl Coefficients {
    pub fn at(base: &BasePoint) -> Result<Self> {
        if base.u.is_zero() {
            return Err(Error::Degenerate("α/β tables need U ≠ 0".into()));
        }
        let prec = base.prec();
        let mut env = base.env();
        let mut out: Vec<Complex> = Vec::with_capacity(17);
        for p in &parsed().alphas {
            out.push(p.eval_complex(&env, prec)?);
        }
        env.insert("al1", out[0].clone());
        for p in &parsed().betas {
            out.push(p.eval_complex(&env, prec)?);
        }
        Ok(Coefficients(out))
    }
}

/// Coefficients of C as a polynomial in b: C = Σ coeffs[k] b^k.
pub fn quartic_in_b(base: &BasePoint, a: &Complex) -> Result<Vec<Complex>> {
    let prec = base.prec();
    let mut env = base.env();
    env.insert("a", a.clone());
    parsed().c.coefficients_in("b").iter().map(|p| p.eval_complex(&env, prec)).collect()
}

/// Points (a, b) of C over the base with the given a: all four roots in b.
pub fn fiber_points(base: &BasePoint, a: &Complex) -> Result<Vec<(Complex, Complex)>> {
    let co = quartic_in_b(base, a)?;
    Ok(poly_roots(&co, base.prec())?.into_iter().map(|b| (a.clone(), b)).collect())
}

/// C(a, b) at a numeric point.
pub fn quartic_residual(base: &BasePoint, a: &Complex, b: &Complex) -> Result<Complex> {
    let mut env = base.env();
    env.insert("a", a.clone());
    env.insert("b", b.clone());
    parsed().c.eval_complex(&env, base.prec())
}

/// Recovers (b̄, g) from a point of C and returns the three fiber-quadric residuals.
pub fn fiber_quadric_residuals(base: &BasePoint, a: &Complex, b: &Complex) -> Result<[Complex; 3]> {
    let prec = base.prec();
    if is_tiny(b, -(prec as i64) / 2) {
        return Err(Error::Degenerate("b = 0: b̄ is not determined by Q̃1".into()));
    }
    let m = |x: &Complex, y: &Complex| Complex::with_val(prec, x * y);
    let c02 = m(&base.c0, &base.c0);
    let s = c02.clone() + m(&base.d0, &base.d0);
    let g = Complex::with_val(prec, &c02 * 2u32) - m(&s, a);
    let bb = (c02.clone() - m(a, &g)) / b;
    let one = Complex::with_val(prec, 1);
    Ok([
        m(b, &bb) + m(a, &g) - &c02,
        m(b, &bb) + m(&g, &Complex::with_val(prec, a - &one)) - m(&s, a) + &c02,
        m(b, b) + m(&bb, &bb) + m(&g, &g) - m(&s, &g) + m(a, &Complex::with_val(prec, a - &one)),
    ])
}

/// (x0, y0) from a point of C.
pub fn weierstrass_map(base: &BasePoint, coeffs: &Coefficients, a: &Complex, b: &Complex) -> Result<(Complex, Complex)> {
    let prec = base.prec();
    let cd = Complex::with_val(prec, &base.c0 * &base.d0);
    if is_tiny(&cd, -(prec as i64) / 2) {
        return Err(Error::Degenerate("c0·d0 = 0".into()));
    }
    let am1 = Complex::with_val(prec, a - 1u32);
    let den = Complex::with_val(prec, &base.c0 * &am1).square() + Complex::with_val(prec, &base.d0 * a).square();
    if is_tiny(&den, -(prec as i64) / 2) {
        return Err(Error::Pole("c0²(a−1)² + (d0 a)² vanishes".into()));
    }
    let mut env = base.env();
    env.insert("a", a.clone());
    env.insert("b", b.clone());
    env.insert("i", i_unit(prec));
    for (n, v) in COEFF_NAMES.iter().zip(&coeffs.0) {
        env.insert(n, v.clone());
    }
    let xt = parsed().xt.eval_complex(&env, prec)?;
    let yt = parsed().yt.eval_complex(&env, prec)?;
    let x0 = Complex::with_val(prec, &cd * &xt) / &den;
    let y0 = Complex::with_val(prec, &cd * &base.u) * yt / den;
    Ok((x0, y0))
}

/// Scaled coefficients: y² = x³ + A x + B with A = −(U⁴ + k U² + 4096)/48.
pub fn scaled_weierstrass(u: &Rat, k: u32) -> WeierstrassCurve {
    let u2 = Rat::from(u * u);
    let u4 = Rat::from(&u2 * &u2);
    let a = -(u4.clone() + Rat::from(&u2 * k) + 4096u32) / 48u32;
    let b = -(u2.clone() + 32u32) * (u4 - Rat::from(&u2 * 512u32) - 8192u32) / 864u32;
    WeierstrassCurve { a, b }
}

fn scaled_weierstrass_complex(u: &Complex, k: u32) -> (Complex, Complex) {
    let prec = u.prec().0;
    let u2 = Complex::with_val(prec, u * u);
    let u4 = Complex::with_val(prec, &u2 * &u2);
    let a = -(Complex::with_val(prec, &u4 + Complex::with_val(prec, &u2 * k)) + 4096u32) / 48u32;
    let b = -(Complex::with_val(prec, &u2 + 32u32)) * (u4 - Complex::with_val(prec, &u2 * 512u32) - 8192u32) / 864u32;
    (a, b)
}

/// The constant in A = −(U⁴ + k U² + 4096)/48 settled by the J oracle.
pub const WEIERSTRASS_CONSTANT: u32 = 256;
pub const WEIERSTRASS_CONSTANT_SLIP: u32 = 246;

/// |y0² − x0³ − A c0⁴d0⁴ x0 − B c0⁶d0⁶| with the scaled coefficients for constant k.
pub fn weierstrass_residual(base: &BasePoint, x0: &Complex, y0: &Complex, k: u32) -> f64 {
    let prec = base.prec();
    let (a, b) = scaled_weierstrass_complex(&base.u, k);
    let cd2 = Complex::with_val(prec, &base.c0 * &base.d0).square();
    let cd4 = Complex::with_val(prec, &cd2 * &cd2);
    let cd6 = Complex::with_val(prec, &cd4 * &cd2);
    let r = Complex::with_val(prec, y0 * y0) - Complex::with_val(prec, x0 * x0) * x0
        - Complex::with_val(prec, &a * &cd4) * x0
        - Complex::with_val(prec, &b * &cd6);
    abs_f64(&r)
}

/// Residual after x0 → x0/(c0d0)², y0 → y0/(c0d0)³, against the base-independent curve.
pub fn weierstrass_scaled_residual(base: &BasePoint, x0: &Complex, y0: &Complex) -> f64 {
    let prec = base.prec();
    let cd = Complex::with_val(prec, &base.c0 * &base.d0);
    let x = Complex::with_val(prec, x0 / Complex::with_val(prec, &cd * &cd));
    let y = Complex::with_val(prec, y0 / Complex::with_val(prec, &cd * &cd) / &cd);
    let (a, b) = scaled_weierstrass_complex(&base.u, WEIERSTRASS_CONSTANT);
    let r = Complex::with_val(prec, &y * &y) - Complex::with_val(prec, &x * &x) * &x - Complex::with_val(prec, &a * &x) - b;
    abs_f64(&r)
}

/// One mapped fiber point with its residuals.
#[derive(Clone, Debug)]
pub struct MappedPoint {
    pub a: Complex,
    pub b: Complex,
    pub x0: Complex,
    pub y0: Complex,
    pub quartic_residual: f64,
    pub weierstrass_residual: f64,
}

/// Maps the four points of C over each a in `avals`.
pub fn map_fiber(base: &BasePoint, avals: &[Rat], k: u32) -> Result<Vec<MappedPoint>> {
    let prec = base.prec();
    let co = Coefficients::at(base)?;
    let mut out = Vec::new();
    for a in avals {
        let ac = Complex::with_val(prec, a);
        for (a, b) in fiber_points(base, &ac)? {
            let (x0, y0) = weierstrass_map(base, &co, &a, &b)?;
            let weierstrass = weierstrass_residual(base, &x0, &y0, k);
            let qr = abs_f64(&quartic_residual(base, &a, &b)?);
            out.push(MappedPoint { a, b, x0, y0, quartic_residual: qr, weierstrass_residual: weierstrass });
        }
    }
    Ok(out)
}

/// For each coefficient, the smallest max-residual reachable by correcting that
/// coefficient alone (Gauss–Newton on one complex scalar), sorted ascending.
/// The first entry names the coefficient most consistent with a single transcription slip.
pub fn isolate_coefficient(base: &BasePoint, coeffs: &Coefficients, points: &[(Complex, Complex)], k: u32) -> Result<Vec<(String, f64)>> {
    let prec = base.prec();
    let resid = |co: &Coefficients| -> Result<Vec<Complex>> {
        points
            .iter()
            .map(|(a, b)| {
                let (x0, y0) = weierstrass_map(base, co, a, b)?;
                let (aa, bb) = scaled_weierstrass_complex(&base.u, k);
                let cd2 = Complex::with_val(prec, &base.c0 * &base.d0).square();
                let cd4 = Complex::with_val(prec, &cd2 * &cd2);
                let cd6 = Complex::with_val(prec, &cd4 * &cd2);
                Ok(Complex::with_val(prec, &y0 * &y0) - Complex::with_val(prec, &x0 * &x0) * &x0
                    - Complex::with_val(prec, &aa * &cd4) * &x0
                    - Complex::with_val(prec, &bb * &cd6))
            })
            .collect()
    };
    let max_abs = |v: &[Complex]| v.iter().map(abs_f64).fold(0.0, f64::max);
    let mut ranking = Vec::new();
    for (j, name) in COEFF_NAMES.iter().enumerate() {
        let mut co = coeffs.clone();
        for _ in 0..12 {
            let r0 = resid(&co)?;
            let scale = abs_f64(&co.0[j]).max(1.0);
            let h = Complex::with_val(prec, Float::with_val(prec, scale * 1e-12));
            let mut bumped = co.clone();
            bumped.0[j] += &h;
            let r1 = resid(&bumped)?;
            // least squares δ for r0 + δ·(r1 − r0)/h ≈ 0
            let mut num = Complex::new(prec);
            let mut den = Float::new(prec);
            for (x, y) in r0.iter().zip(&r1) {
                let dr = Complex::with_val(prec, y - x) / &h;
                num += Complex::with_val(prec, dr.conj_ref()) * x;
                den += Complex::with_val(prec, dr.norm_ref()).real();
            }
            if den.is_zero() {
                break;
            }
            let delta = -num / den;
            co.0[j] += &delta;
            if abs_f64(&delta) < 1e-30 * scale {
                break;
            }
        }
        ranking.push((name.to_string(), max_abs(&resid(&co)?)));
    }
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(ranking)
}

/// J from the scaled fibration coefficients with constant k.
pub fn j_generic_fiber_with(u: &Rat, k: u32) -> Result<Rat> {
    if u.cmp0().is_eq() {
        return Err(Error::Degenerate("U = 0".into()));
    }
    j_from_weierstrass(&scaled_weierstrass(u, k))
}

pub fn j_generic_fiber(u: &Rat) -> Result<Rat> {
    j_generic_fiber_with(u, WEIERSTRASS_CONSTANT)
}

/// How each candidate constant fares against J(E3) and Φ4(J(E2), ·).
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantResolution {
    pub chosen: Option<u32>,
    /// (constant, #U matching J(E3), #U closing Φ4, #U tested)
    pub candidates: Vec<(u32, usize, usize, usize)>,
}

pub fn resolve_weierstrass_constant(us: &[Rat]) -> Result<ConstantResolution> {
    let mut candidates = Vec::new();
    for k in [WEIERSTRASS_CONSTANT_SLIP, WEIERSTRASS_CONSTANT] {
        let (mut m, mut z) = (0, 0);
        for u in us {
            let j = j_generic_fiber_with(u, k)?;
            if j == j_e3(u)? {
                m += 1;
            }
            if phi4(&j_e2(u)?, &j).cmp0().is_eq() {
                z += 1;
            }
        }
        candidates.push((k, m, z, us.len()));
    }
    let chosen = candidates.iter().find(|c| c.1 == c.3 && c.2 == c.3).map(|c| c.0);
    Ok(ConstantResolution { chosen, candidates })
}

fn quartic_invariants_j<T>(co: [T; 5], f: impl Fn(&[T; 5]) -> (T, T)) -> (T, T) {
    f(&co)
}

/// j of the binary quartic f(X) = c4 X⁴ + c3 X³ + c2 X² + c1 X + c0 via its invariants I, J.
pub fn quartic_j(co: &[Rat; 5]) -> Result<Rat> {
    let (i, j) = quartic_invariants_j(co.clone(), |c| {
        let [e, d, cc, b, a] = c.clone();
        let i = Rat::from(12) * &a * &e - Rat::from(3) * &b * &d + Rat::from(&cc * &cc);
        let j = Rat::from(72) * &a * &cc * &e + Rat::from(9) * &b * &cc * &d
            - Rat::from(27) * &a * &d * &d
            - Rat::from(27) * &e * &b * &b
            - Rat::from(2) * &cc * &cc * &cc;
        (i, j)
    });
    j_from_weierstrass(&WeierstrassCurve { a: Rat::from(-27) * i, b: Rat::from(-27) * j })
}

pub fn quartic_j_complex(co: &[Complex; 5]) -> Result<Complex> {
    let prec = co[0].prec().0;
    let [e, d, cc, b, a] = co;
    let m = |x: &Complex, y: &Complex| Complex::with_val(prec, x * y);
    let i = m(a, e) * 12u32 - m(b, d) * 3u32 + m(cc, cc);
    let j = m(&m(a, cc), e) * 72u32 + m(&m(b, cc), d) * 9u32 - m(&m(a, d), d) * 27u32 - m(&m(e, b), b) * 27u32
        - m(&m(cc, cc), cc) * 2u32;
    crate::curves::j_from_weierstrass_complex(&(i * -27i32), &(j * -27i32))
}

/// Hessian of a quadratic form (constant entries) over `vars`.
fn hessian(q: &RatPoly, vars: &[&str]) -> Result<Vec<Vec<RatPoly>>> {
    Ok(vars.iter().map(|r| vars.iter().map(|c| q.derivative(r).derivative(c)).collect()).collect())
}

fn det4_poly(m: &[Vec<RatPoly>]) -> RatPoly {
    fn det(m: &[Vec<RatPoly>], rows: &[usize], cols: &[usize]) -> RatPoly {
        if rows.len() == 1 {
            return m[rows[0]][cols[0]].clone();
        }
        let mut acc: Option<RatPoly> = None;
        for (k, &c) in cols.iter().enumerate() {
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let t = &m[rows[0]][c] * &det(m, &rows[1..], &sub_cols);
            acc = Some(match acc {
                None if k % 2 == 0 => t,
                None => -t,
                Some(a) if k % 2 == 0 => &a + &t,
                Some(a) => &a - &t,
            });
        }
        acc.unwrap()
    }
    let idx: Vec<usize> = (0..m.len()).collect();
    det(m, &idx, &idx)
}

/// J of the generic fiber from the pencil det(X·H(Q̃1) − H(Q̃4)), exact.
/// The fiber is the intersection of Q̃1, Q̃4 in P3(a, b, b̄, z) with g eliminated.
pub fn pencil_j_generic(base: &ExactBase) -> Result<Rat> {
    pencil_j_generic_with(base, PENCIL_Q4)
}

/// Q̃4 homogenized in z with g kept symbolic.
pub const PENCIL_Q4: &str = "b^2 + bb^2 + g^2 - (c0^2 + d0^2)*g*z + a*(a - z)";
/// PENCIL_Q4 with a(a − z) → a(a − 2z).
pub const PENCIL_Q4_MUTATED: &str = "b^2 + bb^2 + g^2 - (c0^2 + d0^2)*g*z + a*(a - 2*z)";

pub fn pencil_j_generic_with(base: &ExactBase, q4_src: &str) -> Result<Rat> {
    let vars = ["a", "b", "bb", "z", "c0", "d0"];
    let p = |s: &str| RatPoly::parse(s, &vars);
    let g = p("2*c0^2*z - (c0^2 + d0^2)*a")?;
    let sub: HashMap<&str, RatPoly> = HashMap::from([("g", g)]);
    let fv = ["a", "b", "bb", "z", "c0", "d0", "g"];
    let q1 = RatPoly::parse("b*bb + a*g - c0^2*z^2", &fv)?.compose(&sub, &vars)?;
    let q4 = RatPoly::parse(q4_src, &fv)?.compose(&sub, &vars)?;
    let fix = |q: RatPoly| q.specialize("c0", &base.c0).specialize("d0", &base.d0);
    pencil_j_exact(&fix(q1), &fix(q4), &["a", "b", "bb", "z"])
}

fn pencil_j_exact(q1: &RatPoly, q4: &RatPoly, vars: &[&str]) -> Result<Rat> {
    let h1 = hessian(q1, vars)?;
    let h4 = hessian(q4, vars)?;
    let xv = ["X"];
    let x = RatPoly::var(&xv, "X")?;
    let konst = |p: &RatPoly| RatPoly::constant(&xv, p.as_constant().expect("quadratic form"));
    let m: Vec<Vec<RatPoly>> = (0..4)
        .map(|r| (0..4).map(|c| &(&x * &konst(&h1[r][c])) - &konst(&h4[r][c])).collect())
        .collect();
    let f = det4_poly(&m);
    let co: [Rat; 5] = std::array::from_fn(|k| f.coeff(&[k as u32]));
    quartic_j(&co)
}

/// J of the special fiber h = 0 (c = 1, d = i, q² = −iU, a = 2/q), numeric.
pub fn pencil_j_special(u: &Complex) -> Result<Complex> {
    let prec = u.prec().0;
    let i = i_unit(prec);
    let q = Complex::with_val(prec, -Complex::with_val(prec, &i * u)).sqrt();
    if q.is_zero() {
        return Err(Error::Degenerate("U = 0".into()));
    }
    let a = Complex::with_val(prec, 2u32) / &q;
    let vars = ["b", "bb", "g", "z", "A", "Q"];
    let q1 = RatPoly::parse("b*bb + A*g*z - z^2", &vars)?;
    let q4 = RatPoly::parse("A^2*z^2 + b^2 + g^2 - Q*g*z + bb^2", &vars)?;
    let env: HashMap<&str, Complex> = HashMap::from([("A", a), ("Q", q)]);
    let fv = ["b", "bb", "g", "z"];
    let eval = |h: Vec<Vec<RatPoly>>| -> Result<Vec<Vec<Complex>>> {
        h.iter().map(|row| row.iter().map(|e| e.eval_complex(&env, prec)).collect()).collect()
    };
    let h1 = eval(hessian(&q1, &fv)?)?;
    let h4 = eval(hessian(&q4, &fv)?)?;
    // det(X H1 − H4) sampled at X = 0..4, then Newton-form interpolation to monomial coefficients
    let xs: Vec<i32> = (0..5).collect();
    let vals: Vec<Complex> = xs
        .iter()
        .map(|&x| {
            let m: Vec<Vec<Complex>> = (0..4)
                .map(|r| (0..4).map(|c| Complex::with_val(prec, &h1[r][c] * x) - &h4[r][c]).collect())
                .collect();
            det_complex(m)
        })
        .collect();
    let co = interpolate(&xs, &vals, prec);
    quartic_j_complex(&[co[0].clone(), co[1].clone(), co[2].clone(), co[3].clone(), co[4].clone()])
}

fn det_complex(mut m: Vec<Vec<Complex>>) -> Complex {
    let n = m.len();
    let prec = m[0][0].prec().0;
    let mut det = Complex::with_val(prec, 1);
    for col in 0..n {
        let piv = (col..n).max_by(|&r1, &r2| abs_f64(&m[r1][col]).total_cmp(&abs_f64(&m[r2][col]))).unwrap();
        if m[piv][col].is_zero() {
            return Complex::new(prec);
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= &m[col][col];
        for r in col + 1..n {
            let f = Complex::with_val(prec, &m[r][col] / &m[col][col]);
            for c in col..n {
                let t = Complex::with_val(prec, &f * &m[col][c]);
                m[r][c] -= t;
            }
        }
    }
    det
}

/// Monomial coefficients of the degree < n interpolant through (xs, vals).
fn interpolate(xs: &[i32], vals: &[Complex], prec: u32) -> Vec<Complex> {
    let n = xs.len();
    let mut out = vec![Complex::new(prec); n];
    for k in 0..n {
        // Lagrange basis polynomial for node k
        let mut basis = vec![Complex::with_val(prec, 1)];
        let mut denom = 1i64;
        for (j, &xj) in xs.iter().enumerate() {
            if j == k {
                continue;
            }
            denom *= (xs[k] - xj) as i64;
            let mut next = vec![Complex::new(prec); basis.len() + 1];
            for (d, c) in basis.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= Complex::with_val(prec, c * xj);
            }
            basis = next;
        }
        for (d, c) in basis.iter().enumerate() {
            out[d] += Complex::with_val(prec, c * &vals[k]) / denom;
        }
    }
    out
}

/// Exact Weierstrass identity at one rational base point: the cleared numerator
/// den³·(y0² − x0³ − A x0 − B) reduced modulo C (in b) and i² + 1.
pub fn verify_weierstrass_exact_at(base: &ExactBase, k: u32) -> Result<ExactCheck> {
    let vars = ["b", "a", "i"];
    let al = alphas_exact(&base.c0, &base.d0, &base.u)?;
    let be = betas_exact(&base.c0, &base.d0, &base.u)?;
    let fix = |p: &RatPoly| -> Result<RatPoly> {
        let mut p = p.specialize("c0", &base.c0).specialize("d0", &base.d0).specialize("U", &base.u);
        p = p.specialize("V", &Rat::from(base.u.recip_ref()));
        for (n, v) in COEFF_NAMES.iter().zip(al.iter().chain(&be)) {
            p = p.specialize(n, v);
        }
        p.reorder(&vars)
    };
    let xt = fix(&parsed().xt)?;
    let yt = fix(&parsed().yt)?;
    let c = parsed().c.specialize("c0", &base.c0).specialize("d0", &base.d0).specialize("U", &base.u).reorder(&vars)?;
    let rules = [RewriteRule::from_generator(&c)?, RewriteRule::from_generator(&RatPoly::parse("i^2 + 1", &vars)?)?];
    let red = Reducer::new(&vars, &rules)?;
    let cd = Rat::from(&base.c0 * &base.d0);
    let den = RatPoly::parse(&format!("({})*(a - 1)^2 + ({})*a^2", Rat::from(&base.c0 * &base.c0), Rat::from(&base.d0 * &base.d0)), &vars)?;
    let w = scaled_weierstrass(&base.u, k);
    let cd2 = Rat::from(&cd * &cd);
    let cd4 = Rat::from(&cd2 * &cd2);
    let a_coef = Rat::from(&w.a * &cd4);
    let b_coef = Rat::from(&w.b * &cd4) * &cd2;
    // den³ y0² = (cd U)² ỹ² den ; den³ x0³ = (cd)³ x̃³ ; den³ A x0 = A cd x̃ den² ; den³ B
    let y2 = red.mul(&red.mul(&yt, &yt), &den).scale(&(Rat::from(&cd * &base.u).square()));
    let x3 = red.mul(&red.mul(&xt, &xt), &xt).scale(&(Rat::from(&cd2 * &cd)));
    let ax = red.mul(&xt, &red.mul(&den, &den)).scale(&(a_coef * &cd));
    let bt = red.mul(&red.mul(&den, &den), &den).scale(&b_coef);
    let total = &(&(&y2 - &x3) - &ax) - &bt;
    Ok(ExactCheck {
        name: format!("weierstrass_exact(c0={}, d0={})", base.c0, base.d0),
        multiplier: "(c0^2*(a-1)^2 + d0^2*a^2)^3".into(),
        remainder: red.reduce(&total),
    })
}
