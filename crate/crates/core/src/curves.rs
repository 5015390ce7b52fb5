//! The curves E1, E2/Ē2 and E3, the isogeny ψ: Ē2 → Ē1, J-invariants and Φ4.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Complex, Integer};

use crate::error::{Error, Result};
use crate::numeric::{abs_f64, i_unit, rel_dist};
use crate::ratpoly::{rat, Rat, RatPoly, RewriteRule};

/// Hubbard coupling U = re + i·im with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coupling {
    pub re: Rat,
    pub im: Rat,
}

impl Coupling {
    pub fn real(u: Rat) -> Self {
        Coupling { re: u, im: Rat::new() }
    }

    pub fn int(u: i64) -> Self {
        Self::real(Rat::from(u))
    }

    pub fn complex(re: Rat, im: Rat) -> Self {
        Coupling { re, im }
    }

    /// The exact value when U is real.
    pub fn as_rat(&self) -> Option<Rat> {
        self.im.cmp0().is_eq().then(|| self.re.clone())
    }

    pub fn to_complex(&self, prec: u32) -> Complex {
        Complex::with_val(prec, (&self.re, &self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0().is_eq() && self.im.cmp0().is_eq()
    }

    /// U ∈ {0, ±4i}: the curves degenerate or become rational.
    pub fn is_degenerate(&self) -> bool {
        self.is_zero() || (self.re.cmp0().is_eq() && (self.im == 4 || self.im == -4))
    }
}

fn parse_rat(s: &str) -> std::result::Result<Rat, String> {
    let s = s.trim();
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let n: Integer = digits.parse().map_err(|_| format!("bad number `{s}`"))?;
        let d = Integer::from(10).pow(fp.len() as u32);
        let r = Rat::from((n, d));
        return Ok(if neg { -r } else { r });
    }
    Rat::from_str(s.trim_start_matches('+')).map_err(|_| format!("bad number `{s}`"))
}

impl FromStr for Coupling {
    type Err = String;

    /// Accepts `2`, `3/2`, `-0.5`, `i`, `-2i`, `1+i`, `1/2-3/4i`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err("empty coupling".into());
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Coupling::real(parse_rat(&t)?));
        };
        let split = body.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').map(|(k, _)| k).last();
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => Rat::from(1),
            "-" => Rat::from(-1),
            x => parse_rat(x)?,
        };
        Ok(Coupling { re: parse_rat(re)?, im })
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im = |x: &Rat| if *x == 1 { String::new() } else if *x == -1 { "-".into() } else { x.to_string() };
        match (self.re.cmp0().is_eq(), self.im.cmp0().is_eq()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", im(&self.im)),
            (false, false) => {
                let sign = if self.im.cmp0().is_gt() { "+" } else { "" };
                write!(f, "{}{}{}i", self.re, sign, im(&self.im))
            }
        }
    }
}

/// Affine residual (x²+y²)² − Uxy − 1.
pub fn on_curve_e2(x: &Complex, y: &Complex, u: &Complex) -> Complex {
    let prec = x.prec().0;
    let t = Complex::with_val(prec, x * x) + Complex::with_val(prec, y * y);
    let t2 = Complex::with_val(prec, &t * &t);
    t2 - Complex::with_val(prec, u * x) * y - 1
}

pub fn on_curve_e2_exact(x: &Rat, y: &Rat, u: &Rat) -> Rat {
    let t = Rat::from(x * x) + Rat::from(y * y);
    Rat::from(&t * &t) - Rat::from(u * x) * y - 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjPointE2 {
    pub x: Complex,
    pub y: Complex,
    pub c: Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjPointE1 {
    pub xp: Complex,
    pub xm: Complex,
    pub z: Complex,
}

impl ProjPointE2 {
    pub fn new(x: Complex, y: Complex, c: Complex) -> Self {
        ProjPointE2 { x, y, c }
    }

    /// (x²+y²)² − Uxyc² − c⁴.
    pub fn residual(&self, u: &Complex) -> Complex {
        let prec = self.x.prec().0;
        let t = Complex::with_val(prec, &self.x * &self.x) + Complex::with_val(prec, &self.y * &self.y);
        let c2 = Complex::with_val(prec, &self.c * &self.c);
        let uxy = Complex::with_val(prec, u * &self.x) * &self.y;
        Complex::with_val(prec, &t * &t) - uxy * &c2 - Complex::with_val(prec, &c2 * &c2)
    }

    fn scale(&self) -> f64 {
        [&self.x, &self.y, &self.c].iter().map(|z| abs_f64(z)).fold(0.0, f64::max)
    }

    /// Residual relative to the fourth power of the largest coordinate.
    pub fn rel_residual(&self, u: &Complex) -> f64 {
        let s = self.scale();
        abs_f64(&self.residual(u)) / (s.powi(4) * (1.0 + abs_f64(u)))
    }
}

impl ProjPointE1 {
    /// (x₊−x₋)(x₊x₋−z²) − iU x₊x₋z.
    pub fn residual(&self, u: &Complex) -> Complex {
        let prec = self.xp.prec().0;
        let pm = Complex::with_val(prec, &self.xp * &self.xm);
        let d = Complex::with_val(prec, &self.xp - &self.xm);
        let z2 = Complex::with_val(prec, &self.z * &self.z);
        let iu = i_unit(prec) * u;
        d * (Complex::with_val(prec, &pm - &z2)) - iu * pm * &self.z
    }

    pub fn rel_residual(&self, u: &Complex) -> f64 {
        let s = [&self.xp, &self.xm, &self.z].iter().map(|z| abs_f64(z)).fold(0.0, f64::max);
        abs_f64(&self.residual(u)) / (s.powi(3) * (1.0 + abs_f64(u)))
    }

    /// Scales so the first coordinate of largest modulus (within 2^-8 of the max) is 1.
    pub fn normalized(&self) -> ProjPointE1 {
        let coords = [&self.xp, &self.xm, &self.z];
        let m = coords.iter().map(|z| abs_f64(z)).fold(0.0, f64::max);
        let pivot = coords.iter().find(|z| abs_f64(z) >= m / 256.0).unwrap();
        let prec = self.xp.prec().0;
        let p = (*pivot).clone();
        ProjPointE1 {
            xp: Complex::with_val(prec, &self.xp / &p),
            xm: Complex::with_val(prec, &self.xm / &p),
            z: Complex::with_val(prec, &self.z / &p),
        }
    }

    pub fn approx_eq(&self, other: &ProjPointE1, tol: f64) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        [(&a.xp, &b.xp), (&a.xm, &b.xm), (&a.z, &b.z)]
            .iter()
            .all(|(p, q)| abs_f64(&Complex::with_val(p.prec().0, *p - *q)) <= tol)
    }
}

/// ψ(x:y:c) = (i x²(x²+y²) : −i y²(x²+y²) : xyc²); at the singular points
/// (1:±i:0) the alternative charts are tried in order.
pub fn isogeny_psi(p: &ProjPointE2, u: &Complex, tol: f64) -> Result<ProjPointE1> {
    let r = p.rel_residual(u);
    if r > tol {
        return Err(Error::NotOnCurve { residual: r });
    }
    let prec = p.x.prec().0;
    let i = i_unit(prec);
    let x2 = Complex::with_val(prec, &p.x * &p.x);
    let y2 = Complex::with_val(prec, &p.y * &p.y);
    let c2 = Complex::with_val(prec, &p.c * &p.c);
    let th = Complex::with_val(prec, &x2 + &y2);
    let xy = Complex::with_val(prec, &p.x * &p.y);
    let psi = ProjPointE1 {
        xp: Complex::with_val(prec, &i * &x2) * &th,
        xm: -Complex::with_val(prec, &i * &y2) * &th,
        z: Complex::with_val(prec, &xy * &c2),
    };
    let scale4 = p.scale().powi(4);
    let vanishes = |z: &Complex| abs_f64(z) <= tol * scale4;
    if !(vanishes(&psi.xp) && vanishes(&psi.xm) && vanishes(&psi.z)) {
        return Ok(psi.normalized());
    }
    // chart (x² : −y² : −i xy c²/(x²+y²))
    if !vanishes(&th) {
        let z = -(Complex::with_val(prec, &i * &xy) * &c2) / &th;
        return Ok(ProjPointE1 { xp: x2, xm: -y2, z }.normalized());
    }
    // chart (x² : −y² : −i xy (x²+y²)/(c² + Uxy))
    let den = c2 + Complex::with_val(prec, u * &xy);
    if !vanishes(&den) {
        let z = -(Complex::with_val(prec, &i * &xy) * &th) / den;
        return Ok(ProjPointE1 { xp: x2, xm: -y2, z }.normalized());
    }
    Err(Error::ChartInvalid("every chart of ψ vanishes at this point".into()))
}

pub const PSI_VARS: [&str; 5] = ["x", "y", "c", "U", "i"];

/// Ē2 and i² + 1 as rewrite rules over (x, y, c, U, i) with leading monomials x⁴, i².
pub fn psi_rules() -> Vec<RewriteRule> {
    let e2 = RatPoly::parse("(x^2+y^2)^2 - U*x*y*c^2 - c^4", &PSI_VARS).unwrap();
    let i2 = RatPoly::parse("i^2 + 1", &PSI_VARS).unwrap();
    vec![RewriteRule::from_generator(&e2).unwrap(), RewriteRule::from_generator(&i2).unwrap()]
}

pub const PSI_POLYS: [&str; 3] = ["i*x^2*(x^2+y^2)", "-i*y^2*(x^2+y^2)", "x*y*c^2"];

/// Remainder of Ē1(ψ1, ψ2, ψ3) modulo ⟨Ē2, i²+1⟩, optionally with U specialized.
pub fn psi_remainder(psi: [&str; 3], u: Option<&Rat>) -> Result<RatPoly> {
    let v = PSI_VARS;
    let e1 = RatPoly::parse("(P-M)*(P*M-Z^2) - i*U*P*M*Z", &["P", "M", "Z", "U", "i"])?;
    let mut subs = HashMap::new();
    subs.insert("P", RatPoly::parse(psi[0], &v)?);
    subs.insert("M", RatPoly::parse(psi[1], &v)?);
    subs.insert("Z", RatPoly::parse(psi[2], &v)?);
    let mut composed = e1.compose(&subs, &v)?;
    let mut rules = psi_rules();
    if let Some(u) = u {
        composed = composed.specialize("U", u);
        rules = rules
            .iter()
            .map(|r| RewriteRule::from_generator(&r.generator().specialize("U", u)))
            .collect::<Result<_>>()?;
    }
    crate::ratpoly::reduce_mod(&composed, &rules)
}

/// Ē1∘ψ reduces to zero modulo Ē2 (U symbolic).
pub fn verify_psi_exact() -> bool {
    psi_remainder(PSI_POLYS, None).map(|r| r.is_zero()).unwrap_or(false)
}

/// Number of distinct preimages of a generic Q ∈ Ē1 on Ē2.
///
/// In the chart x = 1: ψ1/ψ2 gives y² = −Q₂/Q₁, then ψ3/ψ1 gives
/// c² = iθQ₃/(yQ₁) with θ = 1 + y². Roots are clustered at relative
/// distance 2^(−prec/4).
pub fn fiber_count(q: &ProjPointE1, u: &Complex) -> Result<usize> {
    let prec = q.xp.prec().0;
    let tiny = crate::numeric::pow2neg(prec as i64 / 2);
    let qn = q.normalized();
    if abs_f64(&qn.xp) < tiny || abs_f64(&qn.xm) < tiny || abs_f64(&qn.z) < tiny {
        return Err(Error::ChartInvalid("non-generic point (a coordinate vanishes)".into()));
    }
    let i = i_unit(prec);
    let y2 = -Complex::with_val(prec, &qn.xm / &qn.xp);
    let y0 = y2.sqrt();
    let mut cands = Vec::new();
    for y in [y0.clone(), -y0] {
        let th = Complex::with_val(prec, &y * &y) + 1;
        let c2 = Complex::with_val(prec, &i * &th) * &qn.z / (Complex::with_val(prec, &y * &qn.xp));
        let c0 = c2.sqrt();
        for c in [c0.clone(), -c0] {
            cands.push(ProjPointE2::new(Complex::with_val(prec, 1), y.clone(), c));
        }
    }
    let loose = crate::numeric::pow2neg(prec as i64 / 4);
    let on: Vec<&ProjPointE2> = cands.iter().filter(|p| p.rel_residual(u) < loose).collect();
    let dist = |a: &ProjPointE2, b: &ProjPointE2| rel_dist(&a.y, &b.y).max(rel_dist(&a.c, &b.c));
    let gap_hi = loose * crate::numeric::pow2neg(-(prec as i64) / 8);
    let mut reps: Vec<&ProjPointE2> = Vec::new();
    for p in on {
        let mut merged = false;
        for r in &reps {
            let d = dist(p, r);
            if d < loose {
                merged = true;
                break;
            }
            if d < gap_hi {
                return Err(Error::IllConditioned(format!("preimages at relative distance {d:e}")));
            }
        }
        if !merged {
            reps.push(p);
        }
    }
    Ok(reps.len())
}

/// (x, y, w1, w2) with w = (x²+y²)/c, w1 = (c+w)/2, w2 = (w−c)/(2i), and
/// the residuals x²+y²−w1²−w2² and w1w2 − (U/4i)xy.
pub struct EightVertex {
    pub x: Complex,
    pub y: Complex,
    pub w1: Complex,
    pub w2: Complex,
    pub quadric_residuals: [Complex; 2],
}

pub fn eight_vertex_coords(p: &ProjPointE2, u: &Complex) -> Result<EightVertex> {
    let prec = p.x.prec().0;
    if p.c.is_zero() {
        return Err(Error::ChartInvalid("c = 0".into()));
    }
    let i = i_unit(prec);
    let th = Complex::with_val(prec, &p.x * &p.x) + Complex::with_val(prec, &p.y * &p.y);
    let w = Complex::with_val(prec, &th / &p.c);
    let w1 = Complex::with_val(prec, &p.c + &w) / 2;
    let w2 = Complex::with_val(prec, &w - &p.c) / (Complex::with_val(prec, &i * 2));
    let r1 = Complex::with_val(prec, &th - Complex::with_val(prec, &w1 * &w1)) - Complex::with_val(prec, &w2 * &w2);
    let k = Complex::with_val(prec, u / (Complex::with_val(prec, &i * 4)));
    let r2 = Complex::with_val(prec, &w1 * &w2) - k * &p.x * &p.y;
    Ok(EightVertex { x: p.x.clone(), y: p.y.clone(), w1, w2, quadric_residuals: [r1, r2] })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curve {
    E1,
    E2,
    E3,
}

fn check_u(u: &Rat) -> Result<()> {
    if u.cmp0().is_eq() {
        return Err(Error::Degenerate("U = 0".into()));
    }
    Ok(())
}

/// J(E1) = (U⁴+16U²+16)³ / (U²(U²+16)).
pub fn j_e1(u: &Rat) -> Result<Rat> {
    check_u(u)?;
    let u2 = Rat::from(u * u);
    let num: Rat = u2.clone() * &u2 + u2.clone() * 16 + 16;
    let den: Rat = u2.clone() * (u2.clone() + 16);
    Ok(num.clone() * &num * &num / den)
}

/// J(E2) = −(U²+16U+16)³(U²−16U+16)³ / (U²(U²+16)⁴).
pub fn j_e2(u: &Rat) -> Result<Rat> {
    check_u(u)?;
    let u2 = Rat::from(u * u);
    let p = Rat::from(&u2 + 16) + Rat::from(u * 16);
    let m = Rat::from(&u2 + 16) - Rat::from(u * 16);
    let pm = p * m;
    let s = Rat::from(&u2 + 16);
    let s2 = Rat::from(&s * &s);
    let den = u2 * Rat::from(&s2 * &s2);
    Ok(-(pm.clone() * &pm * &pm) / den)
}

/// J(E3) = (U⁴+256U²+4096)³ / (U⁸(U²+16)).
pub fn j_e3(u: &Rat) -> Result<Rat> {
    check_u(u)?;
    let u2 = Rat::from(u * u);
    let u4 = Rat::from(&u2 * &u2);
    let num: Rat = u4.clone() + u2.clone() * 256 + 4096;
    let den: Rat = u4.clone() * &u4 * (u2.clone() + 16);
    Ok(num.clone() * &num * &num / den)
}

pub fn j_invariant(curve: Curve, u: &Rat) -> Result<Rat> {
    match curve {
        Curve::E1 => j_e1(u),
        Curve::E2 => j_e2(u),
        Curve::E3 => j_e3(u),
    }
}

/// y² = x³ + A x + B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassCurve {
    pub a: Rat,
    pub b: Rat,
}

impl WeierstrassCurve {
    pub fn discriminant_part(&self) -> Rat {
        Rat::from(4) * self.a.clone() * &self.a * &self.a + Rat::from(27) * self.b.clone() * &self.b
    }
}

/// J = 1728·4A³/(4A³+27B²).
pub fn j_from_weierstrass(w: &WeierstrassCurve) -> Result<Rat> {
    let d = w.discriminant_part();
    if d.cmp0().is_eq() {
        return Err(Error::ZeroDiscriminant);
    }
    let a3 = w.a.clone() * &w.a * &w.a;
    Ok(Rat::from(1728 * 4) * a3 / d)
}

pub fn j_from_weierstrass_complex(a: &Complex, b: &Complex) -> Result<Complex> {
    let prec = a.prec().0;
    let a3 = Complex::with_val(prec, a * a) * a;
    let d: Complex = Complex::with_val(prec, &a3 * 4u32) + Complex::with_val(prec, b * b) * 27u32;
    if d.is_zero() {
        return Err(Error::ZeroDiscriminant);
    }
    Ok(a3 * 6912u32 / d)
}

/// Symmetric coefficient table of Φ4: (i, j, c) with i ≥ j stands for
/// c·(x^i y^j + x^j y^i), halved on the diagonal.
pub const PHI4_TABLE: [(u32, u32, &str); 21] = [
    (6, 0, "1"),
    (5, 4, "-1"),
    (5, 3, "2976"),
    (5, 2, "-2533680"),
    (5, 1, "561444609"),
    (5, 0, "-8507430000"),
    (4, 4, "7440"),
    (4, 3, "80967606480"),
    (4, 2, "1425220456750080"),
    (4, 1, "1194227244109980000"),
    (4, 0, "24125474716854750000"),
    (3, 3, "2729942049541120"),
    (3, 2, "-914362550706103200000"),
    (3, 1, "12519806366846423598750000"),
    (3, 0, "-22805180351548032195000000000"),
    (2, 2, "26402314839969410496000000"),
    (2, 1, "188656639464998455284287109375"),
    (2, 0, "158010236947953767724187500000000"),
    (1, 1, "-94266583063223403127324218750000"),
    (1, 0, "-364936327796757658404375000000000000"),
    (0, 0, "280949374722195372109640625000000000000"),
];

/// Φ4 as a polynomial in (x, y).
pub fn phi4_poly() -> RatPoly {
    let mut terms = Vec::new();
    for (i, j, c) in PHI4_TABLE {
        let c = Rat::from(c.parse::<Integer>().unwrap());
        terms.push((vec![i, j], c.clone()));
        if i != j {
            terms.push((vec![j, i], c));
        }
    }
    RatPoly::from_terms(&["x", "y"], terms).unwrap()
}

pub fn phi4(j1: &Rat, j2: &Rat) -> Rat {
    // Horner in y over coefficient polynomials in x
    let mut coeffs = vec![Rat::new(); 7];
    let mut xp = vec![Rat::from(1)];
    for k in 1..=6 {
        let next = Rat::from(&xp[k - 1] * j1);
        xp.push(next);
    }
    for (i, j, c) in PHI4_TABLE {
        let c = Rat::from(c.parse::<Integer>().unwrap());
        coeffs[j as usize] += Rat::from(&c * &xp[i as usize]);
        if i != j {
            coeffs[i as usize] += Rat::from(&c * &xp[j as usize]);
        }
    }
    let mut acc = Rat::new();
    for c in coeffs.iter().rev() {
        acc = acc * j2 + c;
    }
    acc
}

/// Φ4(1, 1), the transcription checksum.
pub fn phi4_checksum() -> Rat {
    phi4(&Rat::from(1), &Rat::from(1))
}

pub const PHI4_CHECKSUM: &str = "280219724152247047853358587525773258240";

/// Nondegenerate rational couplings used for the exact J checks: 1..=n/2 and k/3.
pub fn sample_couplings(n: usize) -> Vec<Rat> {
    let mut out = Vec::with_capacity(n);
    let mut k = 1i64;
    while out.len() < n {
        out.push(rat(k, 1));
        if out.len() < n {
            out.push(rat(-(2 * k - 1), 3));
        }
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 128;

    fn cc(re: f64, im: f64) -> Complex {
        Complex::with_val(PREC, (re, im))
    }

    #[test]
    fn coupling_parsing() {
        let p = |s: &str| s.parse::<Coupling>().unwrap();
        assert_eq!(p("2"), Coupling::int(2));
        assert_eq!(p("1+i"), Coupling::complex(rat(1, 1), rat(1, 1)));
        assert_eq!(p("i"), Coupling::complex(rat(0, 1), rat(1, 1)));
        assert_eq!(p("-2i"), Coupling::complex(rat(0, 1), rat(-2, 1)));
        assert_eq!(p("1/2-3/4i"), Coupling::complex(rat(1, 2), rat(-3, 4)));
        assert_eq!(p("-0.25"), Coupling::real(rat(-1, 4)));
        assert!("x".parse::<Coupling>().is_err());
        for s in ["2", "1+i", "i", "-2i", "1/2-3/4i"] {
            assert_eq!(p(&p(s).to_string()), p(s));
        }
        assert!(p("4i").is_degenerate() && p("-4i").is_degenerate() && p("0").is_degenerate());
        assert!(!p("4").is_degenerate());
    }

    #[test]
    fn on_curve_examples() {
        assert_eq!(on_curve_e2_exact(&rat(1, 1), &rat(0, 1), &rat(7, 3)), 0);
        assert_eq!(on_curve_e2_exact(&rat(1, 2), &rat(1, 2), &rat(-3, 1)), 0);
        assert_eq!(on_curve_e2_exact(&rat(1, 1), &rat(1, 1), &rat(0, 1)), 3);
    }

    #[test]
    fn psi_at_simple_and_singular_points() {
        let u = cc(2.0, 0.0);
        let tol = 1e-30;
        let q = isogeny_psi(&ProjPointE2::new(cc(1.0, 0.0), cc(0.0, 0.0), cc(1.0, 0.0)), &u, tol).unwrap();
        assert!(q.approx_eq(&ProjPointE1 { xp: cc(1.0, 0.0), xm: cc(0.0, 0.0), z: cc(0.0, 0.0) }, tol));
        assert!(q.residual(&u).is_zero());
        let target = ProjPointE1 { xp: cc(1.0, 0.0), xm: cc(1.0, 0.0), z: cc(0.0, 0.0) };
        for s in [1.0, -1.0] {
            let p = ProjPointE2::new(cc(1.0, 0.0), cc(0.0, s), cc(0.0, 0.0));
            assert!(p.residual(&u).is_zero());
            assert!(isogeny_psi(&p, &u, tol).unwrap().approx_eq(&target, tol));
        }
        let off = ProjPointE2::new(cc(1.0, 0.0), cc(1.0, 0.0), cc(1.0, 0.0));
        assert!(matches!(isogeny_psi(&off, &u, tol), Err(Error::NotOnCurve { .. })));
    }

    #[test]
    fn psi_exact_identity_and_mutation() {
        assert!(verify_psi_exact());
        let mutated = psi_remainder(["i*x^2*(x^2+y^2)", "-i*y^2*(x^2+y^2)", "x*y*c^2 + c^4"], None).unwrap();
        assert!(!mutated.is_zero());
        assert!(psi_remainder(PSI_POLYS, Some(&rat(2, 1))).unwrap().is_zero());
    }

    #[test]
    fn j_spot_values() {
        assert_eq!(j_e1(&rat(4, 1)).unwrap(), 287496);
        assert_eq!(j_e1(&rat(1, 1)).unwrap(), rat(35937, 17));
        assert_eq!(j_e2(&rat(1, 1)).unwrap(), rat(-35937, 83521));
        assert_eq!(j_e3(&rat(1, 1)).unwrap(), Rat::from(Integer::from(4353).pow(3)) / 17);
        assert!(matches!(j_e1(&rat(0, 1)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn weierstrass_j_examples() {
        let w = |a: i64, b: i64| WeierstrassCurve { a: rat(a, 1), b: rat(b, 1) };
        assert_eq!(j_from_weierstrass(&w(1, 0)).unwrap(), 1728);
        assert_eq!(j_from_weierstrass(&w(0, 1)).unwrap(), 0);
        assert_eq!(j_from_weierstrass(&w(1, 1)).unwrap(), rat(6912, 31));
        assert_eq!(j_from_weierstrass(&w(0, 0)), Err(Error::ZeroDiscriminant));
    }

    #[test]
    fn phi4_table_guards() {
        assert_eq!(phi4(&Rat::new(), &Rat::new()).to_string(), "280949374722195372109640625000000000000");
        assert_eq!(phi4_checksum().to_string(), PHI4_CHECKSUM);
        let p = phi4_poly();
        let mut a = HashMap::new();
        a.insert("x", rat(3, 7));
        a.insert("y", rat(-5, 2));
        assert_eq!(p.eval(&a).unwrap(), phi4(&rat(3, 7), &rat(-5, 2)));
    }

    #[test]
    fn modular_identities_at_u1() {
        let u = rat(1, 1);
        assert_eq!(phi4(&j_e1(&u).unwrap(), &j_e2(&u).unwrap()), 0);
        assert_eq!(phi4(&j_e2(&u).unwrap(), &j_e3(&u).unwrap()), 0);
        assert_ne!(j_e1(&u).unwrap(), j_e2(&u).unwrap());
    }

    #[test]
    fn eight_vertex_examples() {
        let u = cc(-3.0, 0.0);
        let ev = eight_vertex_coords(&ProjPointE2::new(cc(1.0, 0.0), cc(0.0, 0.0), cc(1.0, 0.0)), &u).unwrap();
        assert_eq!(ev.w1, cc(1.0, 0.0));
        assert!(ev.w2.is_zero());
        assert!(ev.quadric_residuals.iter().all(|r| r.is_zero()));
        // (1/2, 1/2, 1) lies on Ē2 for U = −3
        let p = ProjPointE2::new(cc(0.5, 0.0), cc(0.5, 0.0), cc(1.0, 0.0));
        assert!(p.residual(&u).is_zero());
        let ev = eight_vertex_coords(&p, &u).unwrap();
        assert!(ev.quadric_residuals.iter().all(|r| abs_f64(r) < 1e-35));
        let bad = ProjPointE2::new(cc(1.0, 0.0), cc(0.0, 1.0), cc(0.0, 0.0));
        assert!(matches!(eight_vertex_coords(&bad, &u), Err(Error::ChartInvalid(_))));
    }

    #[test]
    fn sample_couplings_are_distinct_and_nondegenerate() {
        let s = sample_couplings(20);
        assert_eq!(s.len(), 20);
        for (k, a) in s.iter().enumerate() {
            assert!(a.cmp0().is_ne());
            assert!(s[k + 1..].iter().all(|b| b != a));
        }
    }
}
