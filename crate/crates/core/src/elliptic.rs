//! Complete elliptic integrals, theta products and Jacobi sn for complex
//! modulus, and the two uniformizations of the Lax weights on Ē2.
//!
//! The modulus is k = U/(4i), purely imaginary for real U, so nothing here
//! takes a real-axis shortcut.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numeric::{abs, abs_f64, i_unit, is_tiny, pow_rat};

fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

fn cpi(prec: u32) -> Complex {
    Complex::with_val(prec, pi(prec))
}

/// AGM(a, b) choosing at each step the root of ab closest to the arithmetic mean.
pub fn agm(a: &Complex, b: &Complex) -> Complex {
    let prec = a.prec().0;
    let mut a = a.clone();
    let mut b = Complex::with_val(prec, b);
    for _ in 0..(4 * prec as usize + 64) {
        let diff = Complex::with_val(prec, &a - &b);
        if diff.is_zero() || is_tiny(&diff, abs(&a).get_exp().unwrap_or(0) as i64 - prec as i64 - 2) {
            break;
        }
        let a1 = Complex::with_val(prec, &a + &b) / 2u32;
        let r = Complex::with_val(prec, &a * &b).sqrt();
        let d_plus = abs(&Complex::with_val(prec, &r - &a1));
        let d_minus = abs(&Complex::with_val(prec, &r + &a1));
        b = if d_minus < d_plus { -r } else { r };
        a = a1;
    }
    a
}

fn check_branch(k: &Complex) -> Result<Complex> {
    let prec = k.prec().0;
    let m = Complex::with_val(prec, k * k);
    let im_small = m.imag().is_zero() || is_tiny(&Complex::with_val(prec, m.imag()), -(prec as i64) + 4);
    if im_small && *m.real() >= 1 {
        return Err(Error::BranchCut(format!("k² = {} is real and ≥ 1", m.real().to_f64())));
    }
    Ok(m)
}

/// K(k) = π/2 · ₂F₁(½,½;1;k²) by its power series.
pub fn complete_k_series(k: &Complex) -> Result<Complex> {
    let prec = k.prec().0;
    let m = check_branch(k)?;
    if abs_f64(&m) >= 1.0 {
        return Err(Error::BranchCut("series needs |k| < 1".into()));
    }
    let mut term = Complex::with_val(prec, 1);
    let mut sum = Complex::with_val(prec, 1);
    let mut n: u64 = 0;
    loop {
        let r = Float::with_val(prec, 2 * n + 1) / (2 * n + 2);
        term *= Float::with_val(prec, &r * &r);
        term *= &m;
        sum += &term;
        n += 1;
        if term.is_zero() || is_tiny(&term, -(prec as i64) - 8) {
            break;
        }
        if n > 100 * prec as u64 {
            return Err(Error::IllConditioned("K series did not converge".into()));
        }
    }
    Ok(sum * pi(prec) / 2u32)
}

/// K(k) = π / (2·AGM(1, k′)) with k′ = √(1−k²) principal.
pub fn complete_k_agm(k: &Complex) -> Result<Complex> {
    let prec = k.prec().0;
    let m = check_branch(k)?;
    let kp = (Complex::with_val(prec, 1) - m).sqrt();
    let g = agm(&Complex::with_val(prec, 1), &kp);
    if g.is_zero() {
        return Err(Error::BranchCut("AGM vanished".into()));
    }
    Ok(cpi(prec) / (g * 2u32))
}

/// Principal K(k): power series for |k| ≤ 0.9, AGM otherwise.
pub fn complete_k(k: &Complex) -> Result<Complex> {
    if abs_f64(k) <= 0.9 {
        complete_k_series(k)
    } else {
        complete_k_agm(k)
    }
}

/// Everything needed to evaluate the theta products for one modulus.
#[derive(Clone, Debug)]
pub struct ThetaContext {
    pub prec: u32,
    pub k: Complex,
    pub kp: Complex,
    pub big_k: Complex,
    pub big_kp: Complex,
    pub tau: Complex,
    pub q: Complex,
    pub trunc: usize,
    q14: Complex,
    sqrt_k: Complex,
    qpow: Vec<Complex>,
    euler: Complex,
}

fn theta2_theta3(q: &Complex, q14: &Complex, prec: u32) -> (Complex, Complex) {
    let mut t2 = Complex::new(prec);
    let mut t3 = Complex::with_val(prec, 1);
    let mut n: u32 = 0;
    loop {
        let a = Complex::with_val(prec, Pow::pow(q, n * (n + 1)));
        let b = Complex::with_val(prec, Pow::pow(q, (n + 1) * (n + 1)));
        t2 += &a;
        t3 += Complex::with_val(prec, &b * 2u32);
        n += 1;
        if (a.is_zero() || is_tiny(&a, -(prec as i64) - 8)) && (b.is_zero() || is_tiny(&b, -(prec as i64) - 8)) {
            break;
        }
    }
    (t2 * q14 * 2u32, t3)
}

impl ThetaContext {
    /// Context for k = U/(4i).
    pub fn from_coupling(u: &Complex, prec: u32) -> Result<Self> {
        let k = Complex::with_val(prec, u) / (i_unit(prec) * 4u32);
        Self::from_modulus(&k, prec)
    }

    /// K′ is computed from AGM(1, ±k) (sign with Re ≥ 0) and τ = iK′/K is moved by
    /// a multiple of 2 into (−2, 0] or (0, 2], keeping the window where
    /// θ₂²/θ₃² = k. The theta form holds only for that representative.
    pub fn from_modulus(k: &Complex, prec: u32) -> Result<Self> {
        let k = Complex::with_val(prec, k);
        if k.is_zero() {
            return Err(Error::Degenerate("k = 0 has no theta representation (U = 0)".into()));
        }
        let m = check_branch(&k)?;
        let kp = (Complex::with_val(prec, 1) - &m).sqrt();
        let big_k = complete_k(&k)?;
        let khat = if k.real().is_sign_negative() && !k.real().is_zero() { Complex::with_val(prec, -&k) } else { k.clone() };
        let g = agm(&Complex::with_val(prec, 1), &khat);
        let kp0 = cpi(prec) / (g * 2u32);
        let tau0 = Complex::with_val(prec, &kp0 * i_unit(prec)) / &big_k;
        let shift = (tau0.real().to_f64() / 2.0).ceil();
        let tau_a = Complex::with_val(prec, &tau0 - Float::with_val(prec, 2.0 * shift));
        let tau_b = Complex::with_val(prec, &tau_a + 2u32);
        let ipi = i_unit(prec) * pi(prec);
        let mut best: Option<(f64, Complex, Complex, Complex, Complex)> = None;
        for tau in [tau_a, tau_b] {
            let q = Complex::with_val(prec, &ipi * &tau).exp();
            let q14 = (Complex::with_val(prec, &ipi * &tau) / 4u32).exp();
            let (t2, t3) = theta2_theta3(&q, &q14, prec);
            let sk = t2 / t3;
            let miss = abs_f64(&(Complex::with_val(prec, &sk * &sk) - &k)) / abs_f64(&k);
            if best.as_ref().map(|b| miss < b.0).unwrap_or(true) {
                best = Some((miss, tau, q, q14, sk));
            }
        }
        let (miss, tau, q, q14, sqrt_k) = best.unwrap();
        if miss > crate::numeric::pow2neg(prec as i64 / 2) {
            return Err(Error::IllConditioned(format!("θ₂²/θ₃² misses k by {miss:e}")));
        }
        let big_kp = Complex::with_val(prec, &tau * &big_k) / i_unit(prec);
        let log_q = pi(prec).to_f64() * tau.imag().to_f64();
        let trunc = ((prec as f64 * std::f64::consts::LN_2) / (2.0 * log_q)).ceil() as usize + 8;
        let mut ctx = ThetaContext {
            prec,
            k,
            kp,
            big_k,
            big_kp,
            tau,
            q,
            trunc: 0,
            q14,
            sqrt_k,
            qpow: vec![],
            euler: Complex::new(prec),
        };
        ctx.set_trunc(trunc);
        Ok(ctx)
    }

    fn set_trunc(&mut self, trunc: usize) {
        let prec = self.prec;
        let mut qpow = vec![Complex::with_val(prec, 1)];
        for j in 1..=4 * trunc {
            let next = Complex::with_val(prec, &qpow[j - 1] * &self.q);
            qpow.push(next);
        }
        let mut euler = Complex::with_val(prec, 1);
        for j in 1..=trunc {
            euler *= Complex::with_val(prec, 1) - &qpow[2 * j];
        }
        self.trunc = trunc;
        self.qpow = qpow;
        self.euler = euler;
    }

    /// Overrides the product truncation; rejected unless |q|^(2·trunc) < 2^(−prec).
    pub fn with_trunc(mut self, trunc: usize) -> Result<Self> {
        let tail = Float::with_val(self.prec, self.q.abs_ref()).log2().to_f64() * 2.0 * trunc as f64;
        if tail >= -(self.prec as f64) {
            return Err(Error::TruncationTooSmall { trunc, prec: self.prec });
        }
        self.set_trunc(trunc);
        Ok(self)
    }

    /// √k as θ₂/θ₃, the branch consistent with sn = H/(√k Θ).
    pub fn sqrt_k(&self) -> &Complex {
        &self.sqrt_k
    }

    fn half_angle(&self, lambda: &Complex) -> Complex {
        Complex::with_val(self.prec, lambda * cpi(self.prec)) / Complex::with_val(self.prec, &self.big_k * 2u32)
    }

    /// H(λ) = 2q^{1/4} sin(πλ/2K) Π (1 − 2q^{2j} cos(πλ/K) + q^{4j})(1 − q^{2j}).
    pub fn theta_h(&self, lambda: &Complex) -> Complex {
        let prec = self.prec;
        let v = self.half_angle(lambda);
        let c2 = Complex::with_val(prec, &v * 2u32).cos() * 2u32;
        let mut p = Complex::with_val(prec, v.sin_ref()) * &self.q14 * 2u32;
        for j in 1..=self.trunc {
            let f = Complex::with_val(prec, 1) - Complex::with_val(prec, &self.qpow[2 * j] * &c2) + &self.qpow[4 * j];
            p *= f;
        }
        p * &self.euler
    }

    /// Θ(λ) = Π (1 − 2q^{2j−1} cos(πλ/K) + q^{4j−2})(1 − q^{2j}).
    pub fn theta_theta(&self, lambda: &Complex) -> Complex {
        let prec = self.prec;
        let v = self.half_angle(lambda);
        let c2 = Complex::with_val(prec, &v * 2u32).cos() * 2u32;
        let mut p = Complex::with_val(prec, 1);
        for j in 1..=self.trunc {
            let f = Complex::with_val(prec, 1) - Complex::with_val(prec, &self.qpow[2 * j - 1] * &c2) + &self.qpow[4 * j - 2];
            p *= f;
        }
        p * &self.euler
    }

    /// sn(λ) = H(λ)/(√k Θ(λ)).
    pub fn sn(&self, lambda: &Complex) -> Result<Complex> {
        let th = self.theta_theta(lambda);
        if is_tiny(&th, -(self.prec as i64) / 2) {
            return Err(Error::Pole(format!("Θ(λ) vanishes at λ = {}", fmt_c(lambda))));
        }
        Ok(self.theta_h(lambda) / (th * &self.sqrt_k))
    }

    /// λ = K·(s + i·t·Im τ/4), the sampling rectangle in lattice coordinates.
    pub fn lattice_point(&self, s: f64, t: f64) -> Complex {
        let prec = self.prec;
        let it = Float::with_val(prec, self.tau.imag() * t) / 4u32;
        Complex::with_val(prec, (Float::with_val(prec, s), it)) * &self.big_k
    }
}

pub(crate) fn fmt_c(z: &Complex) -> String {
    format!("{:.6e}{:+.6e}i", z.real().to_f64(), z.imag().to_f64())
}

/// Jacobi sn at working precision; k = 0 gives sin λ.
pub fn sn(lambda: &Complex, k: &Complex) -> Result<Complex> {
    if k.is_zero() {
        return Ok(Complex::with_val(lambda.prec().0, lambda.sin_ref()));
    }
    ThetaContext::from_modulus(k, lambda.prec().0)?.sn(lambda)
}

/// Jacobi sn by descending Landen transformation, independent of the theta code.
pub fn sn_landen(lambda: &Complex, k: &Complex) -> Result<Complex> {
    let prec = lambda.prec().0;
    check_branch(k)?;
    let mut ks = vec![Complex::with_val(prec, k)];
    let stop = -(prec as i64) / 2 - 4;
    while !(ks.last().unwrap().is_zero() || is_tiny(ks.last().unwrap(), stop)) {
        let kn = ks.last().unwrap();
        let kp = (Complex::with_val(prec, 1) - Complex::with_val(prec, kn * kn)).sqrt();
        let next = Complex::with_val(prec, 1 - Complex::with_val(prec, &kp)) / (kp + 1u32);
        ks.push(next);
        if ks.len() > 200 {
            return Err(Error::IllConditioned("Landen descent did not converge".into()));
        }
    }
    let mut v = lambda.clone();
    for kn in &ks[1..] {
        v /= Complex::with_val(prec, kn + 1u32);
    }
    let kn = ks.last().unwrap();
    let (s, c) = (Complex::with_val(prec, v.sin_ref()), Complex::with_val(prec, v.cos_ref()));
    let corr = Complex::with_val(prec, kn * kn) / 4u32 * (Complex::with_val(prec, &v - Complex::with_val(prec, &s * &c))) * &c;
    let mut s = s - corr;
    for kn in ks[1..].iter().rev() {
        let s2 = Complex::with_val(prec, &s * &s);
        let den = Complex::with_val(prec, kn * &s2) + 1u32;
        s = Complex::with_val(prec, kn + 1u32) * s / den;
    }
    if !(s.real().is_finite() && s.imag().is_finite()) {
        return Err(Error::Pole(format!("sn pole near λ = {}", fmt_c(lambda))));
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Form {
    Sn,
    Theta,
}

/// One point of the uniformized weights: x/c, y/c and θ/c² at λ.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPoint {
    pub lambda: Complex,
    pub xc: Complex,
    pub yc: Complex,
    pub thc: Complex,
}

impl WeightPoint {
    /// Affine Ē2 residual (xc²+yc²)² − U xc yc − 1.
    pub fn curve_residual(&self, u: &Complex) -> Complex {
        crate::curves::on_curve_e2(&self.xc, &self.yc, u)
    }
}

/// Reusable uniformization for one coupling.
#[derive(Clone, Debug)]
pub struct Uniformizer {
    pub prec: u32,
    pub u: Complex,
    pub k: Complex,
    pub big_k: Complex,
    ctx: Option<ThetaContext>,
}

impl Uniformizer {
    pub fn new(u: &Complex, prec: u32) -> Result<Self> {
        let u = Complex::with_val(prec, u);
        let k = Complex::with_val(prec, &u) / (i_unit(prec) * 4u32);
        if k.is_zero() {
            return Ok(Uniformizer { prec, u, big_k: cpi(prec) / 2u32, k, ctx: None });
        }
        let ctx = ThetaContext::from_modulus(&k, prec)?;
        Ok(Uniformizer { prec, u, k, big_k: ctx.big_k.clone(), ctx: Some(ctx) })
    }

    pub fn context(&self) -> Option<&ThetaContext> {
        self.ctx.as_ref()
    }

    /// K − λ.
    pub fn cross(&self, lambda: &Complex) -> Complex {
        Complex::with_val(self.prec, &self.big_k - lambda)
    }

    pub fn point(&self, lambda: &Complex, form: Form) -> Result<WeightPoint> {
        match form {
            Form::Sn => self.sn_form(lambda),
            Form::Theta => self.theta_form(lambda),
        }
    }

    fn pole_guard(&self, z: &Complex, what: &str, lambda: &Complex) -> Result<()> {
        if is_tiny(z, -(self.prec as i64) / 2) {
            return Err(Error::Pole(format!("{what} vanishes at λ = {}", fmt_c(lambda))));
        }
        Ok(())
    }

    /// xc = sn(K−λ)/(1 − ik sn(λ) sn(K−λ)), yc = sn(λ)/(same), with Landen sn.
    fn sn_form(&self, lambda: &Complex) -> Result<WeightPoint> {
        let prec = self.prec;
        let lambda = Complex::with_val(prec, lambda);
        let s1 = sn_landen(&lambda, &self.k)?;
        let s2 = sn_landen(&self.cross(&lambda), &self.k)?;
        let ik = i_unit(prec) * &self.k;
        let den = Complex::with_val(prec, 1) - ik * &s1 * &s2;
        self.pole_guard(&den, "1 − ik sn(λ) sn(K−λ)", &lambda)?;
        let xc = Complex::with_val(prec, &s2 / &den);
        let yc = s1 / den;
        let thc = Complex::with_val(prec, &xc * &xc) + Complex::with_val(prec, &yc * &yc);
        Ok(WeightPoint { lambda, xc, yc, thc })
    }

    fn theta_form(&self, lambda: &Complex) -> Result<WeightPoint> {
        let prec = self.prec;
        let ctx = self.ctx.as_ref().ok_or_else(|| Error::Degenerate("theta form needs U ≠ 0".into()))?;
        let lambda = Complex::with_val(prec, lambda);
        let i = i_unit(prec);
        let half_kp = Complex::with_val(prec, &i * &ctx.big_kp) / 2u32;
        // i (4k)^{-1/4} e^{-iπτ/8} = i (4k√q)^{-1/4} with the lattice branch of √q
        let four_k = Complex::with_val(prec, &ctx.k * 4u32);
        let pre = Complex::with_val(prec, &i * pow_rat(&four_k, -0.25))
            * (-(Complex::with_val(prec, &i * pi(prec)) * &ctx.tau) / 8u32).exp();
        let kml = self.cross(&lambda);
        let d1 = ctx.theta_h(&Complex::with_val(prec, &lambda + &half_kp));
        let d2 = ctx.theta_h(&Complex::with_val(prec, &kml + &half_kp));
        let den = Complex::with_val(prec, &d1 * &d2);
        self.pole_guard(&den, "H(λ+iK′/2)·H(K+iK′/2−λ)", &lambda)?;
        let xc = Complex::with_val(prec, &pre * ctx.theta_h(&kml)) * ctx.theta_theta(&lambda) / &den;
        let yc = Complex::with_val(prec, &pre * ctx.theta_theta(&kml)) * ctx.theta_h(&lambda) / &den;
        let thc = self.theta_c2_forms_inner(ctx, &lambda)?.0;
        Ok(WeightPoint { lambda, xc, yc, thc })
    }

    /// Both theta forms of θ(λ)/c²: with Θ(λ+iK′/2) and with H(λ−iK′/2).
    pub fn theta_c2_forms(&self, lambda: &Complex) -> Result<(Complex, Complex)> {
        let ctx = self.ctx.as_ref().ok_or_else(|| Error::Degenerate("theta form needs U ≠ 0".into()))?;
        self.theta_c2_forms_inner(ctx, &Complex::with_val(self.prec, lambda))
    }

    fn theta_c2_forms_inner(&self, ctx: &ThetaContext, lambda: &Complex) -> Result<(Complex, Complex)> {
        let prec = self.prec;
        let i = i_unit(prec);
        let half_kp = Complex::with_val(prec, &i * &ctx.big_kp) / 2u32;
        let a = Complex::with_val(prec, &self.cross(lambda) + &half_kp);
        let lp = Complex::with_val(prec, lambda + &half_kp);
        let lm = Complex::with_val(prec, lambda - &half_kp);
        let th_a = ctx.theta_theta(&a);
        let h_a = ctx.theta_h(&a);
        let h_lp = ctx.theta_h(&lp);
        let th_lm = ctx.theta_theta(&lm);
        let d1 = Complex::with_val(prec, &h_a * &h_lp);
        let d2 = Complex::with_val(prec, &h_a * &th_lm);
        self.pole_guard(&d1, "H(K+iK′/2−λ)·H(λ+iK′/2)", lambda)?;
        self.pole_guard(&d2, "H(K+iK′/2−λ)·Θ(λ−iK′/2)", lambda)?;
        let f1 = Complex::with_val(prec, &i * &th_a) * ctx.theta_theta(&lp) / d1;
        let f2 = Complex::with_val(prec, &i * &th_a) * ctx.theta_h(&lm) / d2;
        Ok((f1, f2))
    }
}

/// One-shot uniformization.
pub fn uniformize(lambda: &Complex, u: &Complex, form: Form) -> Result<WeightPoint> {
    Uniformizer::new(u, lambda.prec().0)?.point(lambda, form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{c, rel_dist};

    const PREC: u32 = 128;

    #[test]
    fn k_at_zero_and_reference_value() {
        let k0 = complete_k(&c(PREC, 0.0, 0.0)).unwrap();
        assert!(rel_dist(&k0, &(cpi(PREC) / 2u32)) < 1e-36);
        let s = Complex::with_val(PREC, 0.5).sqrt();
        let k = complete_k(&s).unwrap();
        // K(1/√2) = Γ(1/4)²/(4√π)
        let want = Complex::with_val(PREC, (Float::with_val(PREC, 0.25).gamma().square()) / (Float::with_val(PREC, Constant::Pi).sqrt() * 4u32));
        assert!(rel_dist(&k, &want) < 1e-36);
        assert!(k.real().to_string().starts_with("1.85407467730137"));
    }

    #[test]
    fn series_and_agm_agree() {
        for (re, im) in [(0.0, -0.5), (0.3, 0.2), (0.0, 0.75), (-0.6, 0.1)] {
            let k = c(PREC, re, im);
            let a = complete_k_series(&k).unwrap();
            let b = complete_k_agm(&k).unwrap();
            assert!(rel_dist(&a, &b) < crate::numeric::pow2neg(PREC as i64 - 8), "{re} {im}");
        }
    }

    #[test]
    fn branch_cut_rejected() {
        assert!(matches!(complete_k(&c(PREC, 1.0, 0.0)), Err(Error::BranchCut(_))));
        assert!(matches!(ThetaContext::from_coupling(&c(PREC, 0.0, 4.0), PREC), Err(Error::BranchCut(_))));
        assert!(matches!(ThetaContext::from_coupling(&c(PREC, 0.0, -6.0), PREC), Err(Error::BranchCut(_))));
    }

    #[test]
    fn context_invariants() {
        for u in [(1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (-2.0, 0.5), (0.0, 1.0)] {
            let ctx = ThetaContext::from_coupling(&c(PREC, u.0, u.1), PREC).unwrap();
            let s = Complex::with_val(PREC, &ctx.k * &ctx.k) + Complex::with_val(PREC, &ctx.kp * &ctx.kp);
            assert!(rel_dist(&s, &c(PREC, 1.0, 0.0)) < 1e-35);
            assert!(abs_f64(&ctx.q) < 1.0);
            let q2 = (-(Complex::with_val(PREC, &ctx.big_kp * cpi(PREC))) / &ctx.big_k).exp();
            assert!(rel_dist(&q2, &ctx.q) < 1e-35);
        }
    }

    #[test]
    fn theta_zeros_and_sn_special_values() {
        let ctx = ThetaContext::from_coupling(&c(PREC, 2.0, 0.0), PREC).unwrap();
        assert!(ctx.theta_h(&c(PREC, 0.0, 0.0)).is_zero());
        let two_k = Complex::with_val(PREC, &ctx.big_k * 2u32);
        assert!(abs_f64(&ctx.theta_h(&two_k)) < 1e-35);
        assert!(ctx.sn(&c(PREC, 0.0, 0.0)).unwrap().is_zero());
        assert!(rel_dist(&ctx.sn(&ctx.big_k).unwrap(), &c(PREC, 1.0, 0.0)) < 1e-35);
    }

    #[test]
    fn truncation_override_is_validated() {
        let ctx = ThetaContext::from_coupling(&c(PREC, 2.0, 0.0), PREC).unwrap();
        assert!(matches!(ctx.clone().with_trunc(1), Err(Error::TruncationTooSmall { .. })));
        assert!(ctx.clone().with_trunc(ctx.trunc + 4).is_ok());
    }

    #[test]
    fn sn_degenerate_modulus_is_sine() {
        for x in [0.3, -1.2, 2.5] {
            let l = c(PREC, x, 0.1);
            let s = sn(&l, &c(PREC, 0.0, 0.0)).unwrap();
            assert!(rel_dist(&s, &Complex::with_val(PREC, l.sin_ref())) < 1e-36);
            let s = sn_landen(&l, &c(PREC, 0.0, 0.0)).unwrap();
            assert!(rel_dist(&s, &Complex::with_val(PREC, l.sin_ref())) < 1e-36);
        }
    }

    #[test]
    fn regular_point_and_trigonometric_limit() {
        for form in [Form::Sn, Form::Theta] {
            let w = uniformize(&c(PREC, 0.0, 0.0), &c(PREC, 2.0, 0.0), form).unwrap();
            assert!(rel_dist(&w.xc, &c(PREC, 1.0, 0.0)) < 1e-35);
            assert!(abs_f64(&w.yc) < 1e-35);
            assert!(rel_dist(&w.thc, &c(PREC, 1.0, 0.0)) < 1e-35);
        }
        let l = c(PREC, 0.7, 0.05);
        let w = uniformize(&l, &c(PREC, 0.0, 0.0), Form::Sn).unwrap();
        assert!(rel_dist(&w.xc, &Complex::with_val(PREC, l.cos_ref())) < 1e-36);
        assert!(rel_dist(&w.yc, &Complex::with_val(PREC, l.sin_ref())) < 1e-36);
        assert!(matches!(uniformize(&l, &c(PREC, 0.0, 0.0), Form::Theta), Err(Error::Degenerate(_))));
    }
    #[test]
    fn theta_sn_matches_landen_and_forms_agree() {
        let mut smp = crate::numeric::Sampler::new(5, 0);
        for u in [(1.0, 0.0), (3.0, 0.0), (1.0, 1.0), (-2.0, 0.0), (0.5, -2.0)] {
            let uc = c(PREC, u.0, u.1);
            let un = Uniformizer::new(&uc, PREC).unwrap();
            let ctx = un.context().unwrap();
            for _ in 0..6 {
                let l = ctx.lattice_point(smp.uniform(-2.0, 2.0), smp.uniform(-1.0, 1.0));
                let a = ctx.sn(&l).unwrap();
                let b = sn_landen(&l, &ctx.k).unwrap();
                assert!(rel_dist(&a, &b) < 1e-30, "sn {u:?}: {}", rel_dist(&a, &b));
                let w1 = un.point(&l, Form::Sn).unwrap();
                let w2 = un.point(&l, Form::Theta).unwrap();
                assert!(rel_dist(&w1.xc, &w2.xc) < 1e-30, "xc {u:?}");
                assert!(rel_dist(&w1.yc, &w2.yc) < 1e-30, "yc {u:?}");
                assert!(rel_dist(&w1.thc, &w2.thc) < 1e-30, "thc {u:?}");
                assert!(abs_f64(&w1.curve_residual(&uc)) < 1e-30);
                let (f1, f2) = un.theta_c2_forms(&l).unwrap();
                assert!(rel_dist(&f1, &f2) < 1e-30);
            }
        }
    }
}
