//! Small helpers over `rug` complex numbers shared by the numeric modules.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rug::float::Constant;
use rug::{Complex, Float, Rational};

use crate::error::{Error, Result};

pub fn c(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

pub fn c_rat(prec: u32, re: &Rational) -> Complex {
    Complex::with_val(prec, re)
}

pub fn i_unit(prec: u32) -> Complex {
    Complex::with_val(prec, (0, 1))
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn abs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn abs_f64(z: &Complex) -> f64 {
    abs(z).to_f64()
}

pub fn is_tiny(z: &Complex, log2_bound: i64) -> bool {
    let a = abs(z);
    a.is_zero() || a.get_exp().map(|e| (e as i64) <= log2_bound).unwrap_or(true)
}

/// 2^(-e) as f64 (saturating to 0 for huge e).
pub fn pow2neg(e: i64) -> f64 {
    (2f64).powi(-(e.clamp(-1000, 1074) as i32))
}

/// log2 of a nonnegative f64, with -inf for 0.
pub fn log2(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.log2()
    }
}

/// Relative distance |a-b| / max(|a|,|b|,tiny).
pub fn rel_dist(a: &Complex, b: &Complex) -> f64 {
    let prec = a.prec().0;
    let d = abs_f64(&Complex::with_val(prec, a - b));
    let s = abs_f64(a).max(abs_f64(b));
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Principal z^p for a rational exponent.
pub fn pow_rat(z: &Complex, p: f64) -> Complex {
    let prec = z.prec().0;
    let l = Complex::with_val(prec, z.ln_ref());
    (l * Float::with_val(prec, p)).exp()
}

/// All roots of sum_k coeffs[k] x^k (Aberth–Ehrlich iteration, then Newton polish).
pub fn poly_roots(coeffs: &[Complex], prec: u32) -> Result<Vec<Complex>> {
    let mut co: Vec<Complex> = coeffs.to_vec();
    while co.len() > 1 && co.last().unwrap().is_zero() {
        co.pop();
    }
    let n = co.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = co[n].clone();
    let monic: Vec<Complex> = co.iter().map(|x| Complex::with_val(prec, x / &lead)).collect();
    // Cauchy bound for the initial circle
    let bound = 1.0 + monic[..n].iter().map(abs_f64).fold(0.0, f64::max);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            c(prec, 0.5 * bound * t.cos(), 0.5 * bound * t.sin())
        })
        .collect();
    let eval = |x: &Complex| -> (Complex, Complex) {
        let mut p = Complex::with_val(prec, 1);
        let mut dp = Complex::new(prec);
        for k in (0..n).rev() {
            dp = Complex::with_val(prec, &dp * x) + &p;
            p = Complex::with_val(prec, &p * x) + &monic[k];
        }
        (p, dp)
    };
    let target = -(prec as i64) + 8;
    for _ in 0..(prec as usize * 4 + 200) {
        let mut moved = false;
        for i in 0..n {
            let (p, dp) = eval(&z[i]);
            if p.is_zero() {
                continue;
            }
            let ratio = Complex::with_val(prec, &p / &dp);
            let mut s = Complex::new(prec);
            for j in 0..n {
                if j != i {
                    let d = Complex::with_val(prec, &z[i] - &z[j]);
                    s += d.recip();
                }
            }
            let denom = Complex::with_val(prec, 1) - Complex::with_val(prec, &ratio * &s);
            let step = ratio / denom;
            let scale = abs_f64(&z[i]).max(1.0);
            if !is_tiny(&step, target + scale.log2().ceil() as i64) {
                moved = true;
            }
            z[i] -= step;
        }
        if !moved {
            return Ok(z);
        }
    }
    Err(Error::IllConditioned(format!("root iteration for degree {n} did not converge")))
}

/// Deterministic uniform samples: one ChaCha stream per (seed, stream id).
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Small nonzero rational p/q with |p| <= pmax, 1 <= q <= qmax.
    pub fn small_rational(&mut self, pmax: i64, qmax: i64) -> Rational {
        loop {
            let p = (self.rng.next_u64() % (2 * pmax as u64 + 1)) as i64 - pmax;
            let q = (self.rng.next_u64() % qmax as u64) as i64 + 1;
            if p != 0 {
                return Rational::from((p, q));
            }
        }
    }
}

/// Stable 64-bit id for a check name, used as the sampler stream.
pub fn stream_id(name: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
