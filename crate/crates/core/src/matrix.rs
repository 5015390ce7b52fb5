//! Dense square matrices of `rug::Complex`, with products that skip exact zeros.
//!
//! Multi-site spaces are tensor products of 4-dimensional factors with the
//! first factor most significant, so the basis index of (i, j) in C4⊗C4 is 4i+j.

use std::fmt::Write as _;

use rug::{Assign, Complex, Float};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    prec: u32,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize, prec: u32) -> Self {
        ComplexMatrix { dim, prec, data: vec![Complex::new(prec); dim * dim] }
    }

    pub fn identity(dim: usize, prec: u32) -> Self {
        let mut m = Self::zeros(dim, prec);
        for i in 0..dim {
            m.data[i * dim + i] = Complex::with_val(prec, 1);
        }
        m
    }

    /// P on C4⊗C4: P[(i,j),(k,l)] = δ_il δ_jk.
    pub fn permutation(prec: u32) -> Self {
        let mut m = Self::zeros(16, prec);
        for i in 0..4 {
            for j in 0..4 {
                m.data[(4 * i + j) * 16 + 4 * j + i] = Complex::with_val(prec, 1);
            }
        }
        m
    }

    pub fn from_fn(dim: usize, prec: u32, f: impl Fn(usize, usize) -> Complex) -> Self {
        let mut m = Self::zeros(dim, prec);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = Complex::with_val(prec, f(r, c));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn get(&self, r: usize, c: usize) -> &Complex {
        &self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex) {
        self.data[r * self.dim + c] = Complex::with_val(self.prec, v);
    }

    /// 1-based setter.
    pub fn set1(&mut self, r: usize, c: usize, v: &Complex) {
        self.set(r - 1, c - 1, v.clone());
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|z| !z.is_zero()).count()
    }

    pub fn nonzero_positions(&self) -> Vec<(usize, usize)> {
        (0..self.dim * self.dim)
            .filter(|&k| !self.data[k].is_zero())
            .map(|k| (k / self.dim, k % self.dim))
            .collect()
    }

    fn row_nonzeros(&self) -> Vec<Vec<usize>> {
        (0..self.dim)
            .map(|r| (0..self.dim).filter(|&c| !self.data[r * self.dim + c].is_zero()).collect())
            .collect()
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let a_rows = self.row_nonzeros();
        let b_rows = other.row_nonzeros();
        let mut out = Self::zeros(n, self.prec);
        let mut tmp = Complex::new(self.prec);
        for i in 0..n {
            for &k in &a_rows[i] {
                let a = &self.data[i * n + k];
                for &j in &b_rows[k] {
                    tmp.assign(a * &other.data[k * n + j]);
                    out.data[i * n + j] += &tmp;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        self.zip(other, |a, b| Complex::with_val(self.prec, a + b))
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        self.zip(other, |a, b| Complex::with_val(self.prec, a - b))
    }

    fn zip(&self, other: &ComplexMatrix, f: impl Fn(&Complex, &Complex) -> Complex) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            prec: self.prec,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: &Complex) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            prec: self.prec,
            data: self.data.iter().map(|a| Complex::with_val(self.prec, a * s)).collect(),
        }
    }

    pub fn commutator(&self, other: &ComplexMatrix) -> ComplexMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, self.prec, |r, c| self.get(c, r).clone())
    }

    pub fn conj_transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, self.prec, |r, c| Complex::with_val(self.prec, self.get(c, r).conj_ref()))
    }

    pub fn trace(&self) -> Complex {
        let mut t = Complex::new(self.prec);
        for i in 0..self.dim {
            t += &self.data[i * self.dim + i];
        }
        t
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, self.prec, |r, c| {
            Complex::with_val(self.prec, self.get(r / m, c / m) * other.get(r % m, c % m))
        })
    }

    pub fn pow(&self, e: u32) -> ComplexMatrix {
        let mut acc = Self::identity(self.dim, self.prec);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Largest |entry|.
    pub fn max_abs(&self) -> Float {
        let mut best = Float::new(self.prec);
        for z in &self.data {
            let a = Float::with_val(self.prec, z.abs_ref());
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.max_abs().to_f64()
    }

    /// ‖self − other‖_max / ‖self‖_max (plain difference when self vanishes).
    pub fn rel_residual(&self, other: &ComplexMatrix) -> f64 {
        let d = self.sub(other).max_abs();
        let s = self.max_abs();
        if s.is_zero() {
            d.to_f64()
        } else {
            (d / s).to_f64()
        }
    }

    /// Partial transpose on the second factor of C4⊗C4.
    pub fn partial_transpose2(&self) -> Result<ComplexMatrix> {
        if self.dim != 16 {
            return Err(Error::Config(format!("partial transpose needs dim 16, got {}", self.dim)));
        }
        Ok(Self::from_fn(16, self.prec, |r, c| {
            let (i, j, k, l) = (r / 4, r % 4, c / 4, c % 4);
            self.get(4 * i + l, 4 * k + j).clone()
        }))
    }

    /// Embeds an operator on C4⊗C4 into factors (s1, s2) of `n` 4-dim factors.
    pub fn embed_pair(&self, s1: usize, s2: usize, n: usize) -> Result<ComplexMatrix> {
        if self.dim != 16 || s1 == s2 || s1 >= n || s2 >= n {
            return Err(Error::Config("embed_pair needs a 16×16 operator and two distinct factors".into()));
        }
        let big = 4usize.pow(n as u32);
        let shift = |s: usize| 4usize.pow((n - 1 - s) as u32);
        let (w1, w2) = (shift(s1), shift(s2));
        let mut out = Self::zeros(big, self.prec);
        for (r, c) in self.nonzero_positions() {
            let v = self.get(r, c);
            let (i1, i2, j1, j2) = (r / 4, r % 4, c / 4, c % 4);
            for base in 0..big {
                // iterate over basis states whose digits at s1, s2 are zero
                if (base / w1) % 4 != 0 || (base / w2) % 4 != 0 {
                    continue;
                }
                let row = base + i1 * w1 + i2 * w2;
                let col = base + j1 * w1 + j2 * w2;
                out.data[row * big + col] = v.clone();
            }
        }
        Ok(out)
    }

    /// tr over the most significant 4-dim factor.
    pub fn trace_first_factor(&self) -> ComplexMatrix {
        let d = self.dim / 4;
        let mut out = Self::zeros(d, self.prec);
        for a in 0..4 {
            for r in 0..d {
                for c in 0..d {
                    out.data[r * d + c] += &self.data[(a * d + r) * self.dim + a * d + c];
                }
            }
        }
        out
    }

    /// Row-major plain-text dump: header line, then one `re im` token pair per entry.
    pub fn dump(&self) -> String {
        let mut s = format!("# dim {} prec {}\n", self.dim, self.prec);
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{}{}{}i", z.real(), if z.imag().is_sign_negative() { "" } else { "+" }, z.imag())
                })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::with_val(64, (re, im))
    }

    #[test]
    fn permutation_is_an_involution() {
        let p = ComplexMatrix::permutation(64);
        assert_eq!(p.mul(&p), ComplexMatrix::identity(16, 64));
        assert_eq!(p.nonzero_count(), 16);
    }

    #[test]
    fn embed_pair_matches_kron_for_adjacent_leading_factors() {
        let a = ComplexMatrix::from_fn(16, 64, |r, cc| c((r * 16 + cc) as f64 % 7.0, 0.0));
        let e = a.embed_pair(0, 1, 3).unwrap();
        assert_eq!(e, a.kron(&ComplexMatrix::identity(4, 64)));
        let e2 = a.embed_pair(1, 2, 3).unwrap();
        assert_eq!(e2, ComplexMatrix::identity(4, 64).kron(&a));
    }

    #[test]
    fn embed_pair_in_reversed_order_conjugates_by_swap() {
        let a = ComplexMatrix::from_fn(16, 64, |r, cc| c(r as f64 + 0.5 * cc as f64, 1.0));
        let p = ComplexMatrix::permutation(64);
        let rev = a.embed_pair(1, 0, 2).unwrap();
        assert_eq!(rev, p.mul(&a).mul(&p));
    }

    #[test]
    fn trace_first_factor_of_permutation_is_identity() {
        let p = ComplexMatrix::permutation(64);
        assert_eq!(p.trace_first_factor(), ComplexMatrix::identity(4, 64));
    }

    #[test]
    fn partial_transpose_twice_is_identity() {
        let a = ComplexMatrix::from_fn(16, 64, |r, cc| c(r as f64, cc as f64));
        let t = a.partial_transpose2().unwrap();
        assert_ne!(t, a);
        assert_eq!(t.partial_transpose2().unwrap(), a);
    }

    #[test]
    fn sparse_product_agrees_with_definition() {
        let a = ComplexMatrix::from_fn(4, 64, |r, cc| if (r + cc) % 2 == 0 { c(r as f64, 1.0) } else { c(0.0, 0.0) });
        let b = ComplexMatrix::from_fn(4, 64, |r, cc| c(cc as f64 - r as f64, 0.5));
        let p = a.mul(&b);
        for r in 0..4 {
            for cc in 0..4 {
                let mut s = Complex::new(64);
                for k in 0..4 {
                    s += Complex::with_val(64, a.get(r, k) * b.get(k, cc));
                }
                assert_eq!(p.get(r, cc), &s);
            }
        }
    }
}
