//! The 16×16 Lax operator in its explicit and Pauli-product forms, crossing,
//! unitarity, transfer matrices and the two-leg spin Hamiltonian.
//!
//! Each 4-dim site is C²⊗C² with σ on the first qubit and τ on the second.

use rug::Complex;

use crate::elliptic::{Form, Uniformizer, WeightPoint};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::numeric::{abs_f64, is_tiny, pow2neg};

/// L(x, y, c) with θ = x² + y².
pub fn lax_xyc(x: &Complex, y: &Complex, c: &Complex) -> Result<ComplexMatrix> {
    let prec = x.prec().0;
    let m = |a: &Complex, b: &Complex| Complex::with_val(prec, a * b);
    let th = m(x, x) + m(y, y);
    if th.is_zero() || is_tiny(&th, -(prec as i64) / 2) {
        return Err(Error::Degenerate("θ = x² + y² vanishes".into()));
    }
    let c2 = m(c, c);
    let (xx, xy, yy) = (m(x, x), m(x, y), m(y, y));
    let (xc, yc) = (m(x, c), m(y, c));
    let xyt = Complex::with_val(prec, &xy * &c2) / &th;
    let xxt = Complex::with_val(prec, &xx * &c2) / &th;
    let yyt = Complex::with_val(prec, &yy * &c2) / &th;
    let mut l = ComplexMatrix::zeros(16, prec);
    let entries: [(usize, usize, &Complex); 36] = [
        (1, 1, &xx), (2, 2, &xy), (2, 5, &xc), (3, 3, &xy), (3, 9, &xc),
        (4, 4, &yy), (4, 7, &yc), (4, 10, &yc), (4, 13, &th),
        (5, 2, &xc), (5, 5, &xyt), (6, 6, &xxt),
        (7, 4, &yc), (7, 7, &yyt), (7, 10, &c2), (7, 13, &yc),
        (8, 8, &xyt), (8, 14, &xc), (9, 3, &xc), (9, 9, &xyt),
        (10, 4, &yc), (10, 7, &c2), (10, 10, &yyt), (10, 13, &yc),
        (11, 11, &xxt), (12, 12, &xyt), (12, 15, &xc),
        (13, 4, &th), (13, 7, &yc), (13, 10, &yc), (13, 13, &yy),
        (14, 8, &xc), (14, 14, &xy), (15, 12, &xc), (15, 15, &xy), (16, 16, &xx),
    ];
    for (r, col, v) in entries {
        l.set1(r, col, v);
    }
    Ok(l)
}

/// L(λ) normalized by c², i.e. L(x, y, c) at (xc, yc, 1).
pub fn lax_explicit(xc: &Complex, yc: &Complex) -> Result<ComplexMatrix> {
    lax_xyc(xc, yc, &Complex::with_val(xc.prec().0, 1))
}

/// Free-fermion weights a, b, c and interaction h of the Pauli-product form.
#[derive(Clone, Debug, PartialEq)]
pub struct ShastryParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub h: Complex,
}

impl ShastryParams {
    /// c = 1, e^h = √θ (principal), a = xc e^{-h}, b = yc e^{-h}.
    pub fn from_weights(xc: &Complex, yc: &Complex) -> Result<Self> {
        let prec = xc.prec().0;
        let th = Complex::with_val(prec, xc * xc) + Complex::with_val(prec, yc * yc);
        if th.is_zero() {
            return Err(Error::Degenerate("θ = 0 has no logarithm".into()));
        }
        let h = Complex::with_val(prec, th.ln_ref()) / 2u32;
        let eh = Complex::with_val(prec, h.exp_ref());
        Ok(ShastryParams {
            a: Complex::with_val(prec, xc / &eh),
            b: Complex::with_val(prec, yc / &eh),
            c: Complex::with_val(prec, 1),
            h,
        })
    }

    /// (a² + b² − c², sinh 2h − U ab/(2c²)).
    pub fn constraint_residuals(&self, u: &Complex) -> (f64, f64) {
        let prec = self.a.prec().0;
        let sq = |z: &Complex| Complex::with_val(prec, z * z);
        let c2 = sq(&self.c);
        let ff = sq(&self.a) + sq(&self.b) - &c2;
        let s = Complex::with_val(prec, &self.h * 2u32).sinh();
        let rhs = Complex::with_val(prec, u * &self.a) * &self.b / (c2 * 2u32);
        (abs_f64(&ff), abs_f64(&(s - rhs)))
    }
}

fn pauli(prec: u32, which: char) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, prec);
    let one = Complex::with_val(prec, 1);
    match which {
        'z' => {
            m.set(0, 0, one.clone());
            m.set(1, 1, -one);
        }
        '+' => m.set(0, 1, one),
        '-' => m.set(1, 0, one),
        _ => {
            m.set(0, 0, one.clone());
            m.set(1, 1, one);
        }
    }
    m
}

fn kron_all(ms: &[ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = acc.kron(m);
    }
    acc
}

/// (a+b)/2 + (a−b)/2 σᶻ₀σᶻⱼ + c(σ⁺₀σ⁻ⱼ + σ⁻₀σ⁺ⱼ) on qubit pair (slot, slot+2) of (σ0, τ0, σj, τj).
fn six_vertex(p: &ShastryParams, slot: usize) -> ComplexMatrix {
    let prec = p.a.prec().0;
    let put = |o0: char, oj: char| {
        let mut f: Vec<ComplexMatrix> = (0..4).map(|_| pauli(prec, 'i')).collect();
        f[slot] = pauli(prec, o0);
        f[slot + 2] = pauli(prec, oj);
        kron_all(&f)
    };
    let half_sum = Complex::with_val(prec, &p.a + &p.b) / 2u32;
    let half_diff = Complex::with_val(prec, &p.a - &p.b) / 2u32;
    ComplexMatrix::identity(16, prec)
        .scale(&half_sum)
        .add(&put('z', 'z').scale(&half_diff))
        .add(&put('+', '-').add(&put('-', '+')).scale(&p.c))
}

/// e^{h/2(σᶻτᶻ+1)} Lσ Lτ e^{h/2(σᶻτᶻ+1)}, the exponential acting on the auxiliary site.
pub fn lax_shastry(p: &ShastryParams, u: &Complex) -> Result<ComplexMatrix> {
    let prec = p.a.prec().0;
    let (ff, lax3) = p.constraint_residuals(u);
    let tol = pow2neg(prec as i64 / 2);
    if ff > tol || lax3 > tol {
        return Err(Error::Constraint(format!("free-fermion defect {ff:e}, sinh 2h defect {lax3:e}")));
    }
    let eh = Complex::with_val(prec, p.h.exp_ref());
    let mut e = ComplexMatrix::zeros(16, prec);
    for aux in 0..4 {
        let v = if aux == 0 || aux == 3 { eh.clone() } else { Complex::with_val(prec, 1) };
        for s in 0..4 {
            e.set(4 * aux + s, 4 * aux + s, v.clone());
        }
    }
    Ok(e.mul(&six_vertex(p, 0)).mul(&six_vertex(p, 1)).mul(&e))
}

/// max |A − rB| / max |A| with r = A₁₁/B₁₁; the scalar r is returned too.
pub fn proportionality_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(f64, Complex)> {
    let b11 = b.get(0, 0);
    if b11.is_zero() {
        return Err(Error::Degenerate("reference (1,1) entry vanishes".into()));
    }
    let r = Complex::with_val(a.prec(), a.get(0, 0) / b11);
    Ok((a.rel_residual(&b.scale(&r)), r))
}

/// The anti-diagonal charge-conjugation matrix; `flip` negates one entry (mutation control).
pub fn charge_conjugation(prec: u32, flip: Option<usize>) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, prec);
    for r in 0..4 {
        let v = if flip == Some(r) { -1 } else { 1 };
        m.set(r, 3 - r, Complex::with_val(prec, v));
    }
    m
}

/// Lax operators along the uniformized curve for one coupling.
#[derive(Clone, Debug)]
pub struct LaxFamily {
    pub un: Uniformizer,
    pub form: Form,
}

impl LaxFamily {
    pub fn new(u: &Complex, prec: u32, form: Form) -> Result<Self> {
        Ok(LaxFamily { un: Uniformizer::new(u, prec)?, form })
    }

    pub fn prec(&self) -> u32 {
        self.un.prec
    }

    pub fn weights(&self, lambda: &Complex) -> Result<WeightPoint> {
        self.un.point(lambda, self.form)
    }

    pub fn at(&self, lambda: &Complex) -> Result<ComplexMatrix> {
        let w = self.weights(lambda)?;
        lax_explicit(&w.xc, &w.yc)
    }

    /// ‖L(λ) − (M⊗1) L(K−λ)^{t₂} (M⁻¹⊗1)‖ / ‖L(λ)‖.
    pub fn crossing_residual(&self, lambda: &Complex, flip: Option<usize>) -> Result<f64> {
        let prec = self.prec();
        let l = self.at(lambda)?;
        let lc = self.at(&self.un.cross(lambda))?.partial_transpose2()?;
        let m = charge_conjugation(prec, flip);
        // M is a signed permutation, so M⁻¹ = Mᵗ
        let id = ComplexMatrix::identity(4, prec);
        let rhs = m.kron(&id).mul(&lc).mul(&m.transpose().kron(&id));
        Ok(l.rel_residual(&rhs))
    }

    /// ‖L(λ)L(−λ) − s·1‖ / |s| with s = xc(λ)² xc(−λ)²; `permuted` uses L₂₁(−λ) = P L(−λ) P.
    pub fn unitarity_residual(&self, lambda: &Complex, permuted: bool) -> Result<f64> {
        let prec = self.prec();
        let neg = Complex::with_val(prec, -lambda);
        let (w, wm) = (self.weights(lambda)?, self.weights(&neg)?);
        let l = lax_explicit(&w.xc, &w.yc)?;
        let mut lm = lax_explicit(&wm.xc, &wm.yc)?;
        if permuted {
            let p = ComplexMatrix::permutation(prec);
            lm = p.mul(&lm).mul(&p);
        }
        let s = Complex::with_val(prec, &w.xc * &w.xc) * &wm.xc * &wm.xc;
        if s.is_zero() {
            return Err(Error::Degenerate("unitarity scalar vanishes".into()));
        }
        let prod = l.mul(&lm).scale(&Complex::with_val(prec, s.recip_ref()));
        Ok(prod.sub(&ComplexMatrix::identity(16, prec)).max_abs_f64())
    }

    pub fn transfer(&self, lambda: &Complex, n: usize) -> Result<ComplexMatrix> {
        transfer_matrix(&self.at(lambda)?, n)
    }

    /// Z_N(λ) = Tr T(λ)^N.
    pub fn partition_trace(&self, lambda: &Complex, n: usize) -> Result<Complex> {
        Ok(self.transfer(lambda, n)?.pow(n as u32).trace())
    }
}

pub const MAX_SITES: usize = 3;

/// T = tr₀[L₀N ··· L₀1] on N sites.
pub fn transfer_matrix(l: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Config("transfer matrix needs N ≥ 1".into()));
    }
    if n > MAX_SITES {
        return Err(Error::TooLarge(format!("N = {n} exceeds the dense limit N ≤ {MAX_SITES}")));
    }
    let mut acc = l.embed_pair(0, 1, n + 1)?;
    for j in 2..=n {
        acc = l.embed_pair(0, j, n + 1)?.mul(&acc);
    }
    Ok(acc.trace_first_factor())
}

/// Σⱼ (σ⁺ⱼσ⁻ⱼ₊₁ + σ⁻ⱼσ⁺ⱼ₊₁) + (τ likewise) + (U/4) σᶻⱼτᶻⱼ, periodic.
pub fn spin_hamiltonian(n: usize, u: &Complex) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Config("Hamiltonian needs N ≥ 2".into()));
    }
    if n > 6 {
        return Err(Error::TooLarge(format!("N = {n} gives a dense 4^{n} matrix")));
    }
    let prec = u.prec().0;
    let qubits = 2 * n;
    let dim = 1usize << qubits;
    let bit = |q: usize| 1usize << (qubits - 1 - q);
    let mut h = ComplexMatrix::zeros(dim, prec);
    let quarter_u = Complex::with_val(prec, u) / 4u32;
    for col in 0..dim {
        for j in 0..n {
            let k = (j + 1) % n;
            for s in 0..2 {
                let (bj, bk) = (bit(2 * j + s), bit(2 * k + s));
                // σ⁺ lowers the basis index 1 → 0, σ⁻ raises it
                for (from_j, from_k) in [(bj, 0), (0, bk)] {
                    if col & (bj | bk) == from_j | from_k {
                        let row = col ^ bj ^ bk;
                        let v = Complex::with_val(prec, h.get(row, col) + 1u32);
                        h.set(row, col, v);
                    }
                }
            }
            let zs = if col & bit(2 * j) == 0 { 1 } else { -1 };
            let zt = if col & bit(2 * j + 1) == 0 { 1 } else { -1 };
            let v = Complex::with_val(prec, h.get(col, col) + Complex::with_val(prec, &quarter_u * (zs * zt)));
            h.set(col, col, v);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    const PREC: u32 = 128;

    #[test]
    fn regular_point_is_the_permutation() {
        let l = lax_explicit(&c(PREC, 1.0, 0.0), &c(PREC, 0.0, 0.0)).unwrap();
        assert_eq!(l, ComplexMatrix::permutation(PREC));
    }

    #[test]
    fn entry_positions() {
        let (x, y) = (c(PREC, 0.3, 0.1), c(PREC, 0.7, -0.2));
        let l = lax_explicit(&x, &y).unwrap();
        assert_eq!(l.nonzero_count(), 36);
        let th = Complex::with_val(PREC, &x * &x) + Complex::with_val(PREC, &y * &y);
        assert_eq!(l.get(3, 12), &th);
        assert_eq!(l.get(12, 3), &th);
        assert_eq!(l.get(6, 9), &c(PREC, 1.0, 0.0));
        assert!(lax_explicit(&c(PREC, 1.0, 0.0), &c(PREC, 0.0, 1.0)).is_err());
    }

    #[test]
    fn shastry_form_at_trivial_parameters() {
        let one = c(PREC, 1.0, 0.0);
        let zero = c(PREC, 0.0, 0.0);
        let p = ShastryParams { a: one.clone(), b: zero.clone(), c: one.clone(), h: zero.clone() };
        let l = lax_shastry(&p, &c(PREC, 2.0, 0.0)).unwrap();
        let (defect, _) = proportionality_defect(&l, &ComplexMatrix::permutation(PREC)).unwrap();
        assert!(defect < 1e-36);
        let bad = ShastryParams { b: one.clone(), ..p };
        assert!(matches!(lax_shastry(&bad, &zero), Err(Error::Constraint(_))));
    }

    #[test]
    fn transfer_single_site_trace() {
        let t = transfer_matrix(&ComplexMatrix::permutation(PREC), 1).unwrap();
        assert_eq!(t.trace(), c(PREC, 4.0, 0.0));
        assert!(matches!(transfer_matrix(&ComplexMatrix::permutation(PREC), 4), Err(Error::TooLarge(_))));
    }

    #[test]
    fn hamiltonian_is_hermitian_and_traceless() {
        for n in [2, 3] {
            let h = spin_hamiltonian(n, &c(PREC, 2.5, 0.0)).unwrap();
            assert_eq!(h, h.conj_transpose());
            assert!(h.trace().is_zero());
        }
        assert!(spin_hamiltonian(1, &c(PREC, 1.0, 0.0)).is_err());
    }

    #[test]
    fn equivalence_crossing_unitarity_at_a_point() {
        let u = c(PREC, 2.0, 0.0);
        let fam = LaxFamily::new(&u, PREC, Form::Theta).unwrap();
        let l = c(PREC, 0.37, 0.12);
        let w = fam.weights(&l).unwrap();
        let p = ShastryParams::from_weights(&w.xc, &w.yc).unwrap();
        let ls = lax_shastry(&p, &u).unwrap();
        let (defect, _) = proportionality_defect(&ls, &fam.at(&l).unwrap()).unwrap();
        assert!(defect < 1e-30, "{defect}");
        assert!(fam.crossing_residual(&l, None).unwrap() < 1e-30);
        assert!(fam.crossing_residual(&l, Some(0)).unwrap() > 1e-3);
        assert!(fam.unitarity_residual(&l, false).unwrap() < 1e-30);
        assert!(fam.unitarity_residual(&l, true).unwrap() > 1e-3);
    }
}
