//! Tabulated weights along a λ grid, as CSV.

use std::fmt::Write;

use rug::Complex;

use crate::elliptic::{Form, Uniformizer};
use crate::error::Result;
use crate::numeric::abs_f64;

const NEAR_POLE: f64 = 1e8;

/// One grid point; `values` is None when λ sits on a pole.
#[derive(Clone, Debug)]
pub struct WeightRow {
    pub lambda: Complex,
    pub values: Option<(Complex, Complex, Complex, Complex)>,
    pub flag: String,
}

/// (re, im) multiples of K: re ∈ {0, 1/20, …, 1}, im ∈ {0, 1/10}.
pub fn default_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for im in [0.0, 0.1] {
        for k in 0..=20 {
            g.push((k as f64 / 20.0, im));
        }
    }
    g
}

fn rows(u: &Complex, prec: u32, grid: &[(f64, f64)]) -> Result<Vec<WeightRow>> {
    let un = Uniformizer::new(u, prec)?;
    let mut out = Vec::with_capacity(grid.len());
    for &(re, im) in grid {
        let lambda = Complex::with_val(prec, (re, im)) * &un.big_k;
        let row = match un.point(&lambda, Form::Sn) {
            Ok(w) => {
                let r = w.curve_residual(u);
                // grid values are f64, so a pole shows up as a huge but finite weight
                let big = abs_f64(&w.xc).max(abs_f64(&w.yc)) > NEAR_POLE;
                let flag = if big { "near_pole" } else { "ok" };
                WeightRow { lambda, values: Some((w.xc, w.yc, w.thc, r)), flag: flag.into() }
            }
            Err(e @ (crate::Error::Pole(_) | crate::Error::Degenerate(_))) => {
                WeightRow { lambda, values: None, flag: format!("pole: {}", e.to_string().replace(',', ";")) }
            }
            Err(e) => return Err(e),
        };
        out.push(row);
    }
    Ok(out)
}

fn push_c(line: &mut String, z: &Complex) {
    let _ = write!(line, ",{},{}", z.real(), z.imag());
}

/// CSV with header `lambda_re,lambda_im,xc_re,xc_im,yc_re,yc_im,thc_re,thc_im,curve_residual,flag`.
/// Values carry every digit of the working precision; pole rows keep λ and leave the rest empty.
pub fn emit_weights(u: &Complex, prec: u32, grid: &[(f64, f64)]) -> Result<String> {
    let mut s = String::from("lambda_re,lambda_im,xc_re,xc_im,yc_re,yc_im,thc_re,thc_im,curve_residual,flag\n");
    for row in rows(u, prec, grid)? {
        let mut line = format!("{},{}", row.lambda.real(), row.lambda.imag());
        match &row.values {
            Some((x, y, t, r)) => {
                push_c(&mut line, x);
                push_c(&mut line, y);
                push_c(&mut line, t);
                let _ = write!(line, ",{}", Complex::with_val(prec, r.abs_ref()).real());
            }
            None => line.push_str(",,,,,,,"),
        }
        let _ = writeln!(line, ",{}", row.flag);
        s.push_str(&line);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    const PREC: u32 = 128;

    fn parse(csv: &str) -> Vec<Vec<String>> {
        csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
    }

    #[test]
    fn regular_point_row_and_header() {
        let csv = emit_weights(&c(PREC, 2.0, 0.0), PREC, &[(0.0, 0.0), (0.3, 0.1)]).unwrap();
        assert!(csv.starts_with("lambda_re,lambda_im,xc_re"));
        let r = parse(&csv);
        assert_eq!(r.len(), 2);
        let f = |s: &str| s.parse::<f64>().unwrap();
        assert_eq!((f(&r[0][2]), f(&r[0][4]), f(&r[0][6]), f(&r[0][8])), (1.0, 0.0, 1.0, 0.0));
        assert_eq!(r[0][9], "ok");
        // full precision digits
        assert!(r[1][2].len() > 30);
    }

    #[test]
    fn crossing_pairs_swap_columns() {
        let csv = emit_weights(&c(PREC, 3.0, 0.0), PREC, &[(0.2, 0.0), (0.8, 0.0)]).unwrap();
        let r = parse(&csv);
        let f = |s: &str| s.parse::<f64>().unwrap();
        assert!((f(&r[0][2]) - f(&r[1][4])).abs() < 1e-15);
        assert!((f(&r[0][4]) - f(&r[1][2])).abs() < 1e-15);
    }

    #[test]
    fn free_limit_is_trigonometric() {
        let csv = emit_weights(&c(PREC, 0.0, 0.0), PREC, &default_grid()).unwrap();
        for row in parse(&csv) {
            let f = |k: usize| row[k].parse::<f64>().unwrap();
            let (lr, li) = (f(0), f(1));
            let cos = num_cos(lr, li);
            assert!((f(2) - cos.0).abs() < 1e-14 && (f(3) - cos.1).abs() < 1e-14);
        }
    }

    fn num_cos(a: f64, b: f64) -> (f64, f64) {
        (a.cos() * b.cosh(), -a.sin() * b.sinh())
    }

    #[test]
    fn pole_rows_are_flagged_not_dropped() {
        // λ = −iK′/2 is a pole of the weights
        let u = c(PREC, 2.0, 0.0);
        let un = Uniformizer::new(&u, PREC).unwrap();
        let kp = un.context().unwrap().big_kp.clone();
        let k = -Complex::with_val(PREC, crate::numeric::i_unit(PREC) * &kp) / 2u32;
        let at = Complex::with_val(PREC, &k / &un.big_k);
        let grid = [(0.5, 0.0), (at.real().to_f64(), at.imag().to_f64()), (0.0, 0.0)];
        let r = parse(&emit_weights(&u, PREC, &grid).unwrap());
        assert_eq!(r.len(), 3);
        assert!(r[1][9].starts_with("pole") || r[1][9] == "near_pole", "{:?}", r[1]);
        assert_eq!(r[0][9], "ok");
    }
}
