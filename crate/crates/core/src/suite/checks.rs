//! The check registry. Each job yields one or more named outcomes.

use rayon::prelude::*;
use rug::Complex;

use super::{Job, Method, Outcome, RunConfig, Status, SuiteName};
use crate::curves::{self, Coupling, ProjPointE2};
use crate::elliptic::{complete_k_agm, complete_k_series, Form, Uniformizer};
use crate::error::{Error, Result};
use crate::fibration::{self as fib, BasePoint, Coefficients};
use crate::lax::{self, LaxFamily, ShastryParams};
use crate::matrix::ComplexMatrix;
use crate::numeric::{abs_f64, c, pow2neg, rel_dist, stream_id, Sampler};
use crate::ratpoly::{rat, ExactCheck, Rat};
use crate::rmatrix::{self, RVariant};

/// Rational couplings for the exact J checks.
pub(crate) const EXACT_U_COUNT: usize = 20;
/// Cap on samples for the 4^N-dimensional transfer-matrix checks.
const HEAVY_SAMPLES: usize = 10;
/// A mutant counts as detected once its residual clears the tolerance by this factor.
const DETECT_MARGIN: f64 = 65536.0;
/// Fiber a-values per standard base point for the Weierstrass sample.
const FIBER_A: [(i64, i64); 3] = [(1, 3), (2, 7), (-3, 5)];

fn outcome(name: String, method: Method, status: Status, summary: String) -> Outcome {
    Outcome { name, method, status, mutation: false, summary, residual: None, tolerance: None }
}

fn error_outcome(name: String, method: Method, e: &Error) -> Outcome {
    outcome(name, method, Status::Error, e.to_string())
}

fn exact(name: impl Into<String>, chk: Result<ExactCheck>) -> Outcome {
    let name = name.into();
    match chk {
        Ok(c) => outcome(name, Method::Exact, if c.is_zero() { Status::Pass } else { Status::Fail }, c.summary()),
        Err(e) => error_outcome(name, Method::Exact, &e),
    }
}

fn exact_bool(name: impl Into<String>, r: Result<(bool, String)>) -> Outcome {
    let name = name.into();
    match r {
        Ok((ok, s)) => outcome(name, Method::Exact, if ok { Status::Pass } else { Status::Fail }, s),
        Err(e) => error_outcome(name, Method::Exact, &e),
    }
}

/// A mutation control passes when the mutant is detected.
fn mutant(name: impl Into<String>, method: Method, detected: Result<(bool, String)>) -> Outcome {
    let name = name.into();
    let mut o = match detected {
        Ok((d, s)) => outcome(name, method, if d { Status::Pass } else { Status::Fail }, format!("mutant {}: {s}", if d { "detected" } else { "NOT detected" })),
        Err(e) => error_outcome(name, method, &e),
    };
    o.mutation = true;
    o
}

fn mutant_exact(name: impl Into<String>, chk: Result<ExactCheck>) -> Outcome {
    mutant(name, Method::Exact, chk.map(|c| (!c.is_zero(), c.summary())))
}

struct Sampled {
    max: f64,
    min: f64,
    used: usize,
    skipped: usize,
}

impl Sampled {
    fn one(v: f64) -> Self {
        Sampled { max: v, min: v, used: 1, skipped: 0 }
    }
}

fn numeric(name: impl Into<String>, r: Result<Sampled>, tol: f64, what: &str) -> Outcome {
    let name = name.into();
    match r {
        Ok(s) => {
            let ok = s.max.is_finite() && s.max < tol;
            let mut summary = format!("max {what} {:.3e} over {} samples", s.max, s.used);
            if s.skipped > 0 {
                summary.push_str(&format!(" ({} pole draws skipped)", s.skipped));
            }
            Outcome {
                name,
                method: Method::Numeric,
                status: if ok { Status::Pass } else { Status::Fail },
                mutation: false,
                summary,
                residual: Some(s.max),
                tolerance: Some(tol),
            }
        }
        Err(e) => error_outcome(name, Method::Numeric, &e),
    }
}

fn fold_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Evaluates `f` on `n` draws of `dims` uniform numbers, skipping draws that land on poles.
/// Draws depend only on (seed, name), so reports are reproducible.
fn sample<F>(cfg: &RunConfig, name: &str, n: usize, dims: usize, f: F) -> Result<Sampled>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut sampler = Sampler::new(cfg.seed, stream_id(name));
    let mut out = Sampled { max: 0.0, min: f64::INFINITY, used: 0, skipped: 0 };
    while out.used < n {
        if out.skipped > 4 * n + 20 {
            return Err(Error::IllConditioned(format!("{} of {} draws hit poles", out.skipped, out.skipped + out.used)));
        }
        let batch: Vec<Vec<f64>> = (0..n - out.used).map(|_| (0..dims).map(|_| sampler.unit()).collect()).collect();
        let res: Vec<Result<f64>> = batch.par_iter().map(|d| f(d)).collect();
        for r in res {
            match r {
                Ok(v) => {
                    out.max = fold_max(out.max, v);
                    out.min = out.min.min(v);
                    out.used += 1;
                }
                Err(Error::Pole(_) | Error::Degenerate(_) | Error::ChartInvalid(_)) => out.skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

fn tag(u: &Coupling) -> String {
    format!("[U={u}]")
}

fn form_for(u: &Complex) -> Form {
    if u.is_zero() {
        Form::Sn
    } else {
        Form::Theta
    }
}

/// λ = K(s + i t Im τ/4) with s ∈ (−2, 2), t ∈ (−1, 1) from two unit draws.
fn lambda_at(un: &Uniformizer, d: &[f64]) -> Complex {
    let (s, t) = (-2.0 + 4.0 * d[0], -1.0 + 2.0 * d[1]);
    match un.context() {
        Some(ctx) => ctx.lattice_point(s, t),
        None => Complex::with_val(un.prec, (s, t / 4.0)) * &un.big_k,
    }
}

fn max_rel(pairs: &[(&Complex, &Complex)]) -> f64 {
    pairs.iter().map(|(a, b)| rel_dist(a, b)).fold(0.0, fold_max)
}

fn mat_comm_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.commutator(b).max_abs_f64();
    d / (a.max_abs_f64() * b.max_abs_f64())
}

fn job(suite: SuiteName, anchor: &'static str, f: impl Fn(&RunConfig) -> Vec<Outcome> + Send + Sync + 'static) -> Job {
    Job { suite, anchor, run: Box::new(f) }
}

pub(crate) fn plan(cfg: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for s in &cfg.suites {
        match s {
            SuiteName::Curves => curves_jobs(cfg, &mut jobs),
            SuiteName::Elliptic => elliptic_jobs(cfg, &mut jobs),
            SuiteName::Lax => lax_jobs(cfg, &mut jobs),
            SuiteName::Rmatrix => rmatrix_jobs(cfg, &mut jobs),
            SuiteName::Fibration => fibration_jobs(cfg, &mut jobs),
        }
    }
    jobs
}

fn phi4_at_all(first: fn(&Rat) -> Result<Rat>, second: fn(&Rat) -> Result<Rat>, shift: i64) -> Result<(usize, usize)> {
    let us = curves::sample_couplings(EXACT_U_COUNT);
    let mut zero = 0;
    for u in &us {
        let v = curves::phi4(&first(u)?, &second(u)?) + Rat::from(shift);
        if v.cmp0().is_eq() {
            zero += 1;
        }
    }
    Ok((zero, us.len()))
}

fn curves_jobs(cfg: &RunConfig, jobs: &mut Vec<Job>) {
    use SuiteName::Curves as S;
    jobs.push(job(S, "isogeny", |cfg| {
        let chk = |psi, n: &str| curves::psi_remainder(psi, None).map(|r| ExactCheck { name: n.into(), multiplier: "1".into(), remainder: r });
        let mut v = vec![exact("curves.isogeny.exact", chk(curves::PSI_POLYS, "psi"))];
        if cfg.mutations {
            v.push(mutant_exact("curves.isogeny.exact.mutant[psi3 + c^4]", chk(["i*x^2*(x^2+y^2)", "-i*y^2*(x^2+y^2)", "x*y*c^2 + c^4"], "psi")));
        }
        v
    }));
    jobs.push(job(S, "modular-polynomial", |cfg| {
        let mut v = vec![exact_bool(
            "curves.phi4.checksum",
            Ok((curves::phi4_checksum().to_string() == curves::PHI4_CHECKSUM, format!("Φ4(1,1) = {}", curves::phi4_checksum()))),
        )];
        for (name, a, b) in [("e1_e2", curves::j_e1 as fn(&Rat) -> Result<Rat>, curves::j_e2 as fn(&Rat) -> Result<Rat>), ("e2_e3", curves::j_e2, curves::j_e3)] {
            v.push(exact_bool(
                format!("curves.phi4.{name}"),
                phi4_at_all(a, b, 0).map(|(z, n)| (z == n, format!("Φ4 vanishes at {z}/{n} rational U"))),
            ));
            if cfg.mutations {
                v.push(mutant(
                    format!("curves.phi4.{name}.mutant[constant coefficient + 1]"),
                    Method::Exact,
                    phi4_at_all(a, b, 1).map(|(z, n)| (z == 0, format!("Φ4 vanishes at {z}/{n} rational U"))),
                ));
            }
        }
        v
    }));
    jobs.push(job(S, "j-invariants", |_| {
        let r = (|| {
            let us = curves::sample_couplings(EXACT_U_COUNT);
            let mut same = 0;
            for u in &us {
                if curves::j_e1(u)? == curves::j_e2(u)? {
                    same += 1;
                }
            }
            let spot = curves::j_e1(&rat(4, 1))?;
            Ok((same == 0 && spot == 287496, format!("J(E1) = J(E2) at {same}/{} U; J(E1)(4) = {spot}", us.len())))
        })();
        vec![exact_bool("curves.j.e1_ne_e2", r)]
    }));
    for u in cfg.couplings.clone() {
        jobs.push(job(S, "isogeny", move |cfg| {
            let prec = cfg.precision;
            let uc = u.to_complex(prec);
            let name = format!("curves.isogeny.numeric{}", tag(&u));
            let un = match Uniformizer::new(&uc, prec) {
                Ok(un) => un,
                Err(e) => return vec![error_outcome(name, Method::Numeric, &e)],
            };
            let point = |d: &[f64]| -> Result<ProjPointE2> {
                let w = un.point(&lambda_at(&un, d), Form::Sn)?;
                Ok(ProjPointE2::new(w.xc, w.yc, Complex::with_val(prec, 1)))
            };
            let tol = cfg.tolerance();
            let r = sample(cfg, &name, cfg.samples, 2, |d| Ok(curves::isogeny_psi(&point(d)?, &uc, tol)?.rel_residual(&uc)));
            let mut o = vec![numeric(name.clone(), r, tol, "relative Ē1 residual of ψ(P)")];
            let fname = format!("curves.isogeny.degree{}", tag(&u));
            let counts = (|| {
                let mut bad = Vec::new();
                let n = cfg.samples.min(5);
                let s = sample(cfg, &fname, n, 2, |d| {
                    let q = curves::isogeny_psi(&point(d)?, &uc, tol)?;
                    let k = curves::fiber_count(&q, &uc)?;
                    Ok(if k == 4 { 0.0 } else { k as f64 })
                })?;
                if s.max != 0.0 {
                    bad.push(s.max);
                }
                Ok((bad.is_empty(), format!("4 distinct preimages at {} generic points of Ē1", s.used)))
            })();
            o.push(exact_bool(fname, counts).with_method(Method::Numeric));
            let ename = format!("curves.eight_vertex{}", tag(&u));
            let r = sample(cfg, &ename, cfg.samples, 2, |d| {
                let ev = curves::eight_vertex_coords(&point(d)?, &uc)?;
                Ok(ev.quadric_residuals.iter().map(abs_f64).fold(0.0, fold_max))
            });
            o.push(numeric(ename, r, tol, "eight-vertex quadric residual"));
            o
        }));
    }
}

impl Outcome {
    fn with_method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }
}

fn elliptic_jobs(cfg: &RunConfig, jobs: &mut Vec<Job>) {
    use SuiteName::Elliptic as S;
    jobs.push(job(S, "complete-elliptic-integral", |cfg| {
        let prec = cfg.precision;
        let name = "elliptic.k_series_vs_agm";
        let r = sample(cfg, name, cfg.samples, 2, |d| {
            let k = Complex::with_val(prec, Complex::with_val(prec, (0.0, std::f64::consts::TAU * d[1])).exp() * (0.9 * d[0]));
            Ok(rel_dist(&complete_k_series(&k)?, &complete_k_agm(&k)?))
        });
        vec![numeric(name, r, cfg.tolerance(), "relative K(k) difference")]
    }));
    jobs.push(job(S, "trigonometric-limit", |cfg| {
        let prec = cfg.precision;
        let name = "elliptic.trig_limit[U=0]";
        let r = Uniformizer::new(&Complex::new(prec), prec).and_then(|un| {
            sample(cfg, name, cfg.samples, 2, |d| {
                let l = lambda_at(&un, d);
                let w = un.point(&l, Form::Sn)?;
                Ok(max_rel(&[(&w.xc, &Complex::with_val(prec, l.cos_ref())), (&w.yc, &Complex::with_val(prec, l.sin_ref()))]))
            })
        });
        vec![numeric(name, r, cfg.tolerance(), "distance to (cos λ, sin λ)")]
    }));
    for u in cfg.couplings.clone() {
        jobs.push(job(S, "uniformization", move |cfg| {
            let prec = cfg.precision;
            let tol = cfg.tolerance();
            let uc = u.to_complex(prec);
            let form = form_for(&uc);
            let t = tag(&u);
            let un = match Uniformizer::new(&uc, prec) {
                Ok(un) => un,
                Err(e) => return vec![error_outcome(format!("elliptic.curve_residual{t}"), Method::Numeric, &e)],
            };
            let mut o = Vec::new();
            let name = format!("elliptic.curve_residual{t}");
            let r = sample(cfg, &name, cfg.samples, 2, |d| {
                let w = un.point(&lambda_at(&un, d), form)?;
                let th = Complex::with_val(prec, &w.xc * &w.xc) + Complex::with_val(prec, &w.yc * &w.yc);
                let scale = abs_f64(&th).powi(2).max(1.0);
                Ok(abs_f64(&w.curve_residual(&uc)) / scale)
            });
            o.push(numeric(name, r, tol, "Ē2 residual of (xc, yc)"));
            let name = format!("elliptic.regular_point{t}");
            let r = un.point(&Complex::new(prec), form).map(|w| {
                let one = Complex::with_val(prec, 1);
                let m = [abs_f64(&Complex::with_val(prec, &w.xc - &one)), abs_f64(&w.yc), abs_f64(&Complex::with_val(prec, &w.thc - &one))];
                Sampled::one(m.into_iter().fold(0.0, fold_max))
            });
            o.push(numeric(name, r, tol, "distance of (xc, yc, thc)(0) from (1, 0, 1)"));
            let name = format!("elliptic.crossing_swap{t}");
            let r = sample(cfg, &name, cfg.samples, 2, |d| {
                let l = lambda_at(&un, d);
                let (w, wc) = (un.point(&l, form)?, un.point(&un.cross(&l), form)?);
                Ok(max_rel(&[(&w.xc, &wc.yc), (&w.yc, &wc.xc)]))
            });
            o.push(numeric(name, r, tol, "relative swap defect"));
            if form == Form::Theta {
                let name = format!("elliptic.forms_agree{t}");
                let r = sample(cfg, &name, cfg.samples, 2, |d| {
                    let l = lambda_at(&un, d);
                    let (a, b) = (un.point(&l, Form::Theta)?, un.point(&l, Form::Sn)?);
                    let (f1, f2) = un.theta_c2_forms(&l)?;
                    let th = Complex::with_val(prec, &b.xc * &b.xc) + Complex::with_val(prec, &b.yc * &b.yc);
                    Ok(max_rel(&[(&a.xc, &b.xc), (&a.yc, &b.yc), (&f1, &th), (&f2, &th)]))
                });
                o.push(numeric(name, r, tol, "relative theta/Landen disagreement"));
            }
            o
        }));
    }
}

fn lax_jobs(cfg: &RunConfig, jobs: &mut Vec<Job>) {
    use SuiteName::Lax as S;
    jobs.push(job(S, "lax-operator", |cfg| {
        let prec = cfg.precision;
        let r = lax::lax_explicit(&c(prec, 1.0, 0.0), &c(prec, 0.0, 0.0)).map(|l| {
            let p = ComplexMatrix::permutation(prec);
            (l == p, format!("L(0) {} the permutation matrix entrywise", if l == p { "equals" } else { "differs from" }))
        });
        vec![exact_bool("lax.regular_point", r)]
    }));
    for u in cfg.couplings.clone() {
        for n in [2usize, 3] {
            let u = u.clone();
            jobs.push(job(S, "transfer-matrix", move |cfg| transfer_checks(cfg, &u, n)));
        }
        jobs.push(job(S, "lax-operator", move |cfg| {
            let prec = cfg.precision;
            let tol = cfg.tolerance();
            let uc = u.to_complex(prec);
            let t = tag(&u);
            let fam = match LaxFamily::new(&uc, prec, form_for(&uc)) {
                Ok(f) => f,
                Err(e) => return vec![error_outcome(format!("lax.equivalence{t}"), Method::Numeric, &e)],
            };
            let lam = |d: &[f64]| lambda_at(&fam.un, d);
            let mut o = Vec::new();
            let name = format!("lax.equivalence{t}");
            let r = sample(cfg, &name, cfg.samples, 2, |d| {
                let w = fam.weights(&lam(d))?;
                let p = ShastryParams::from_weights(&w.xc, &w.yc)?;
                Ok(lax::proportionality_defect(&lax::lax_shastry(&p, &uc)?, &lax::lax_explicit(&w.xc, &w.yc)?)?.0)
            });
            o.push(numeric(name, r, tol, "proportionality defect"));
            let name = format!("lax.crossing{t}");
            let r = sample(cfg, &name, cfg.samples, 2, |d| fam.crossing_residual(&lam(d), None));
            o.push(numeric(name, r, tol, "crossing residual"));
            let name = format!("lax.unitarity{t}");
            let r = sample(cfg, &name, cfg.samples, 2, |d| fam.unitarity_residual(&lam(d), false));
            o.push(numeric(name, r, tol, "unitarity residual"));
            // the permuted product L(λ)L₂₁(−λ) must stay far from a scalar
            let name = format!("lax.unitarity.permuted_control{t}");
            let r = sample(cfg, &name, cfg.samples.min(HEAVY_SAMPLES), 2, |d| fam.unitarity_residual(&lam(d), true));
            o.push(match r {
                Ok(s) => {
                    let min = s.min;
                    let st = if min > 1e-3 { Status::Pass } else { Status::Fail };
                    Outcome { residual: Some(min), ..outcome(name, Method::Numeric, st, format!("min permuted residual {min:.3e} over {} samples (expected O(1))", s.used)) }
                }
                Err(e) => error_outcome(name, Method::Numeric, &e),
            });
            if cfg.mutations {
                let name = format!("lax.crossing.mutant[M(0,3) sign flipped]{t}");
                let r = sample(cfg, &name, cfg.samples.min(HEAVY_SAMPLES), 2, |d| fam.crossing_residual(&lam(d), Some(0)));
                o.push(mutant(name, Method::Numeric, r.map(|s| (s.min > tol * DETECT_MARGIN, format!("min residual {:.3e}", s.min)))));
            }
            o
        }));
    }
}

fn transfer_checks(cfg: &RunConfig, u: &Coupling, n: usize) -> Vec<Outcome> {
    let prec = cfg.precision;
    let tol = cfg.tolerance();
    let uc = u.to_complex(prec);
    let t = format!("N{n}{}", tag(u));
    let fam = match LaxFamily::new(&uc, prec, form_for(&uc)) {
        Ok(f) => f,
        Err(e) => return vec![error_outcome(format!("lax.transfer.commute.{t}"), Method::Numeric, &e)],
    };
    let lam = |d: &[f64]| lambda_at(&fam.un, d);
    let k = cfg.samples.min(HEAVY_SAMPLES);
    let mut o = Vec::new();
    let name = format!("lax.transfer.commute.{t}");
    let r = sample(cfg, &name, k, 4, |d| Ok(mat_comm_norm(&fam.transfer(&lam(&d[..2]), n)?, &fam.transfer(&lam(&d[2..]), n)?)));
    o.push(numeric(name, r, tol, "normalized ‖[T(λ1), T(λ2)]‖"));
    let name = format!("lax.transfer.partition_symmetry.{t}");
    let r = sample(cfg, &name, k, 2, |d| {
        let l = lam(d);
        Ok(rel_dist(&fam.partition_trace(&l, n)?, &fam.partition_trace(&fam.un.cross(&l), n)?))
    });
    o.push(numeric(name, r, tol, "relative |Z(λ) − Z(K−λ)|"));
    let name = format!("lax.hamiltonian.commute.{t}");
    let r = lax::spin_hamiltonian(n, &uc).and_then(|h| sample(cfg, &name, k, 2, |d| Ok(mat_comm_norm(&fam.transfer(&lam(d), n)?, &h))));
    o.push(numeric(name, r, tol, "normalized ‖[T(λ), H]‖"));
    if cfg.mutations && n == 2 {
        // transfer matrices of two different couplings
        let name = format!("lax.transfer.commute.mutant[U → U+1 in T(λ2)].{t}");
        let other = LaxFamily::new(&Complex::with_val(prec, &uc + 1u32), prec, Form::Theta);
        let r = other.and_then(|f2| {
            sample(cfg, &name, k, 4, |d| Ok(mat_comm_norm(&fam.transfer(&lam(&d[..2]), n)?, &f2.transfer(&lambda_at(&f2.un, &d[2..]), n)?)))
        });
        o.push(mutant(name, Method::Numeric, r.map(|s| (s.min > tol * DETECT_MARGIN, format!("min commutator {:.3e}", s.min)))));
    }
    o
}

/// Mutates an identity by doubling its last top-level term.
pub(crate) fn double_last_term(src: &str) -> String {
    let bytes = src.as_bytes();
    let mut depth = 0i32;
    let mut cut = 0;
    for (k, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && k > 0 => cut = k,
            _ => {}
        }
    }
    let (sign, term) = match bytes[cut] {
        b'-' => ("-", &src[cut + 1..]),
        b'+' => ("+", &src[cut + 1..]),
        _ => ("+", src),
    };
    format!("{src} {sign} ({})", term.trim())
}

fn reduce_items(items: &[(String, String)], mutated: bool) -> Vec<Outcome> {
    let setup = rmatrix::curve_reducer().and_then(|red| Ok((red, rmatrix::weight_polys()?)));
    let (red, ps) = match setup {
        Ok(s) => s,
        Err(e) => return items.iter().map(|(n, _)| error_outcome(n.clone(), Method::Exact, &e)).collect(),
    };
    items
        .par_iter()
        .map(|(n, src)| {
            let chk = rmatrix::reduce_identity(n, src, &red, &ps);
            if mutated {
                mutant_exact(n.clone(), chk)
            } else {
                exact(n.clone(), chk)
            }
        })
        .collect()
}

fn rmatrix_jobs(cfg: &RunConfig, jobs: &mut Vec<Job>) {
    use SuiteName::Rmatrix as S;
    let named = |prefix: &str, items: &[(&str, &str)], mutate: bool| -> Vec<(String, String)> {
        items
            .iter()
            .map(|(n, s)| {
                if mutate {
                    let m = double_last_term(s);
                    (format!("{prefix}.{n}.mutant[last term doubled]"), m)
                } else {
                    (format!("{prefix}.{n}"), s.to_string())
                }
            })
            .collect()
    };
    let mut exact_items = named("rmatrix.quadric", &rmatrix::QUADRICS, false);
    exact_items.extend(named("rmatrix.second_ideal", &rmatrix::I2_GENERATORS, false));
    exact_items.push(("rmatrix.omega_curve".into(), rmatrix::OMEGA_CURVE.into()));
    jobs.push(job(S, "r-matrix-quadrics", move |_| reduce_items(&exact_items, false)));
    if cfg.mutations {
        let mut m = named("rmatrix.quadric", &rmatrix::QUADRICS, true);
        m.extend(named("rmatrix.second_ideal", &rmatrix::I2_GENERATORS, true));
        m.push(("rmatrix.omega_curve.mutant[last term doubled]".into(), double_last_term(rmatrix::OMEGA_CURVE)));
        m.push(("rmatrix.quadric.Q5.mutant[U → 2U]".into(), rmatrix::Q5_MUTATED.into()));
        jobs.push(job(S, "r-matrix-quadrics", move |_| reduce_items(&m, true)));
    }
    for u in cfg.couplings.clone() {
        jobs.push(job(S, "yang-baxter", move |cfg| {
            let prec = cfg.precision;
            let tol = cfg.tolerance();
            let uc = u.to_complex(prec);
            let t = tag(&u);
            let fam = match LaxFamily::new(&uc, prec, form_for(&uc)) {
                Ok(f) => f,
                Err(e) => return vec![error_outcome(format!("rmatrix.ybe{t}"), Method::Numeric, &e)],
            };
            let lam = |d: &[f64]| lambda_at(&fam.un, d);
            let mut o = Vec::new();
            let name = format!("rmatrix.ybe{t}");
            let r = sample(cfg, &name, cfg.samples, 4, |d| rmatrix::ybe_residual(&fam, &lam(&d[..2]), &lam(&d[2..]), RVariant::Standard));
            o.push(numeric(name, r, tol, "Yang–Baxter residual"));
            o.push(ybe_scaling(cfg, &u));
            let name = format!("rmatrix.weights.quadrics{t}");
            let r = sample(cfg, &name, cfg.samples, 4, |d| {
                let w = rmatrix::weights(&fam.weights(&lam(&d[..2]))?, &fam.weights(&lam(&d[2..]))?)?;
                let scale = w.as_array().iter().map(|z| abs_f64(z)).fold(1.0, f64::max).powi(2);
                Ok(w.quadric_residuals(&uc).iter().map(abs_f64).fold(0.0, fold_max) / scale)
            });
            o.push(numeric(name, r, tol, "Q1…Q5 residual of the weights"));
            let name = format!("rmatrix.weights.p_ratios{t}");
            let r = sample(cfg, &name, cfg.samples.min(20), 4, |d| {
                let (p1, p2) = (fam.weights(&lam(&d[..2]))?, fam.weights(&lam(&d[2..]))?);
                let w = rmatrix::weights(&p1, &p2)?;
                let ratios = rmatrix::p_ratios(&p1.xc, &p1.yc, &p2.xc, &p2.yc, &uc)?;
                let scale = w.as_array().iter().map(|z| abs_f64(z)).fold(1.0, f64::max);
                Ok(ratios.iter().zip(w.as_array()).map(|(a, b)| abs_f64(&Complex::with_val(prec, a - b)) / scale).fold(0.0, fold_max))
            });
            o.push(numeric(name, r, tol, "p_j/p4 against the weights"));
            let name = format!("rmatrix.omega_curve.numeric{t}");
            let r = sample(cfg, &name, cfg.samples, 2, |d| {
                let w = fam.weights(&lam(d))?;
                let (o1, o2) = rmatrix::omega(&w.xc, &w.yc, &uc)?;
                let scale = abs_f64(&o1).max(abs_f64(&o2)).max(1.0).powi(4);
                Ok(abs_f64(&rmatrix::omega_curve_residual(&o1, &o2, &uc)) / scale)
            });
            o.push(numeric(name, r, tol, "ω-curve residual at ω(λ)"));
            if cfg.mutations {
                for (label, v) in [("(8,8) = b", RVariant::BAt88), ("d → −d", RVariant::FlipD)] {
                    let name = format!("rmatrix.ybe.mutant[{label}]{t}");
                    let k = cfg.samples.min(HEAVY_SAMPLES);
                    let r = sample(cfg, &name, k, 4, |d| rmatrix::ybe_residual(&fam, &lam(&d[..2]), &lam(&d[2..]), v));
                    o.push(mutant(name, Method::Numeric, r.map(|s| (s.min > tol * DETECT_MARGIN, format!("min residual {:.3e}", s.min)))));
                }
            }
            o
        }));
    }
}

/// Residual at precision p against 2p on the same λ pairs; the ratio must reach 2^(p/4).
fn ybe_scaling(cfg: &RunConfig, u: &Coupling) -> Outcome {
    let name = format!("rmatrix.ybe.precision_scaling{}", tag(u));
    let lo = cfg.precision;
    let hi = 2 * lo;
    let run = |prec: u32| -> Result<Sampled> {
        let uc = u.to_complex(prec);
        let fam = LaxFamily::new(&uc, prec, form_for(&uc))?;
        sample(cfg, &name, cfg.samples.min(5), 4, |d| {
            rmatrix::ybe_residual(&fam, &lambda_at(&fam.un, &d[..2]), &lambda_at(&fam.un, &d[2..]), RVariant::Standard)
        })
    };
    let need = pow2neg(-(lo as i64) / 4);
    match run(lo).and_then(|a| Ok((a, run(hi)?))) {
        Ok((a, b)) => {
            let ratio = if b.max == 0.0 { f64::INFINITY } else { a.max / b.max };
            let st = if ratio >= need { Status::Pass } else { Status::Fail };
            Outcome {
                residual: Some(ratio),
                tolerance: Some(need),
                ..outcome(name, Method::Numeric, st, format!("max residual {:.3e} at {lo} bits, {:.3e} at {hi} bits, ratio 2^{:.1}", a.max, b.max, ratio.log2()))
            }
        }
        Err(e) => error_outcome(name, Method::Numeric, &e),
    }
}

fn j_e3_complex(u: &Complex) -> Complex {
    let prec = u.prec().0;
    let u2 = Complex::with_val(prec, u * u);
    let u4 = Complex::with_val(prec, &u2 * &u2);
    let num = Complex::with_val(prec, &u4 + Complex::with_val(prec, &u2 * 256u32)) + 4096u32;
    let num3 = Complex::with_val(prec, &num * &num) * &num;
    let den = Complex::with_val(prec, &u4 * &u4) * (u2 + 16u32);
    num3 / den
}

fn standard_points(prec: u32) -> Result<Vec<(BasePoint, Complex, Complex)>> {
    let mut out = Vec::new();
    for base in BasePoint::standard(prec) {
        for &(p, q) in &FIBER_A {
            for (a, b) in fib::fiber_points(&base, &Complex::with_val(prec, &rat(p, q)))? {
                out.push((base.clone(), a, b));
            }
        }
    }
    Ok(out)
}

fn fibration_jobs(cfg: &RunConfig, jobs: &mut Vec<Job>) {
    use SuiteName::Fibration as S;
    jobs.push(job(S, "fibration-base", |_| {
        let r = (|| {
            let mut bad = 0;
            for &(a, b, c0, d0) in &fib::STANDARD_BASES {
                let (c0, d0) = (rat(a, b), rat(c0, d0));
                let u = fib::induced_coupling(&c0, &d0)?;
                let s = Rat::from(&c0 * &c0) + Rat::from(&d0 * &d0);
                if Rat::from(&s * &s) + u * &c0 * &d0 - 1u32 != 0 {
                    bad += 1;
                }
            }
            let u1 = fib::induced_coupling(&rat(1, 2), &rat(1, 2))?;
            let u2 = fib::induced_coupling(&rat(1, 2), &rat(1, 3))?;
            let n = fib::STANDARD_BASES.len();
            Ok((bad == 0 && u1 == 3 && u2 == rat(1127, 216), format!("base curve exact at {}/{n} bases; U(1/2,1/2) = {u1}, U(1/2,1/3) = {u2}", n - bad)))
        })();
        let ab = (|| {
            let (h, u) = (rat(1, 2), rat(3, 1));
            let al = fib::alphas_exact(&h, &h, &u)?;
            let be = fib::betas_exact(&h, &h, &u)?;
            Ok((al[0] == rat(3, 2) && al[1] == rat(3, 4) && be[9] == rat(1, 2), format!("α1 = {}, α2 = {}, β10 = {} at (1/2, 1/2, 3)", al[0], al[1], be[9])))
        })();
        vec![exact_bool("fibration.base_points", r), exact_bool("fibration.alpha_beta.spot", ab)]
    }));
    jobs.push(job(S, "fiber-quadrics", |cfg| {
        let mut v = vec![
            exact_bool("fibration.q2_minus_q1", fib::q2_minus_q1_is_linear_in_g().map(|ok| (ok, "Q̃2 − Q̃1 = −g − (c0² + d0²)a + 2c0²".to_string()))),
            exact("fibration.quartic_c", fib::verify_quartic_c_exact()),
        ];
        if cfg.mutations {
            v.push(mutant(
                "fibration.q2_minus_q1.mutant[2c0² → 3c0²]",
                Method::Exact,
                fib::q2_minus_q1_matches(fib::Q2_MINUS_Q1_MUTATED).map(|m| (!m, format!("difference {} the mutated form", if m { "matches" } else { "does not match" }))),
            ));
            v.push(mutant_exact("fibration.quartic_c.mutant[2c0²d0² → 3c0²d0²]", fib::verify_quartic_c(fib::QUARTIC_C_MUTATED)));
        }
        v
    }));
    jobs.push(job(S, "weierstrass-fibration", |cfg| {
        let prec = cfg.precision;
        let tol = cfg.tolerance();
        let pts = match standard_points(prec) {
            Ok(p) => p,
            Err(e) => return vec![error_outcome("fibration.weierstrass".into(), Method::Numeric, &e)],
        };
        let coeffs: Vec<Result<Coefficients>> = BasePoint::standard(prec).iter().map(Coefficients::at).collect();
        let per_point = |f: &(dyn Fn(&BasePoint, &Coefficients, &Complex, &Complex) -> Result<f64> + Sync)| -> Result<Sampled> {
            let vals: Vec<Result<f64>> = pts
                .par_iter()
                .enumerate()
                .map(|(k, (base, a, b))| {
                    let co = coeffs[k / (4 * FIBER_A.len())].as_ref().map_err(Clone::clone)?;
                    f(base, co, a, b)
                })
                .collect();
            let mut s = Sampled { max: 0.0, min: f64::INFINITY, used: 0, skipped: 0 };
            for v in vals {
                let v = v?;
                s.max = fold_max(s.max, v);
                s.min = s.min.min(v);
                s.used += 1;
            }
            Ok(s)
        };
        let mut o = Vec::new();
        let r = per_point(&|base, _, a, b| {
            let q = fib::fiber_quadric_residuals(base, a, b)?;
            Ok(q.iter().map(abs_f64).fold(abs_f64(&fib::quartic_residual(base, a, b)?), fold_max))
        });
        o.push(numeric("fibration.fiber_quadrics", r, tol, "C and Q̃ residual"));
        let r = per_point(&|base, co, a, b| {
            let (x, y) = fib::weierstrass_map(base, co, a, b)?;
            Ok(fib::weierstrass_residual(base, &x, &y, fib::WEIERSTRASS_CONSTANT))
        });
        o.push(numeric("fibration.weierstrass", r, tol, &format!("Weierstrass residual ({} fiber points over {} bases)", pts.len(), fib::STANDARD_BASES.len())));
        let r = per_point(&|base, co, a, b| {
            let (x, y) = fib::weierstrass_map(base, co, a, b)?;
            Ok(fib::weierstrass_scaled_residual(base, &x, &y))
        });
        o.push(numeric("fibration.weierstrass.scaled", r, tol, "base-independent Weierstrass residual"));
        if cfg.mutations {
            let r = (|| {
                let mut missed = Vec::new();
                for (j, nm) in fib::COEFF_NAMES.iter().enumerate() {
                    let worst = per_point(&|base, co, a, b| {
                        let mut co = co.clone();
                        co.0[j] *= Complex::with_val(prec, 1.001);
                        let (x, y) = fib::weierstrass_map(base, &co, a, b)?;
                        Ok(fib::weierstrass_residual(base, &x, &y, fib::WEIERSTRASS_CONSTANT))
                    })?;
                    if worst.max <= tol * DETECT_MARGIN {
                        missed.push(*nm);
                    }
                }
                Ok((missed.is_empty(), format!("{}/17 single-coefficient slips raise the Weierstrass residual{}", 17 - missed.len(), if missed.is_empty() { String::new() } else { format!(" (missed {missed:?})") })))
            })();
            o.push(mutant("fibration.weierstrass.mutant[each α/β × 1.001]", Method::Numeric, r));
            let r = (|| {
                let base = BasePoint::standard(prec).swap_remove(1);
                let mut co = Coefficients::at(&base)?;
                co.0[4] *= Complex::with_val(prec, 1.001);
                let mut p = Vec::new();
                for &(x, y) in &FIBER_A[..2] {
                    p.extend(fib::fiber_points(&base, &Complex::with_val(prec, &rat(x, y)))?);
                }
                let ranking = fib::isolate_coefficient(&base, &co, &p, fib::WEIERSTRASS_CONSTANT)?;
                Ok((ranking[0].0 == "al5", format!("isolation ranks {} first (residual {:.2e}), next {} ({:.2e})", ranking[0].0, ranking[0].1, ranking[1].0, ranking[1].1)))
            })();
            o.push(mutant("fibration.weierstrass.mutant[α5 slip isolated]", Method::Numeric, r));
        }
        o
    }));
    jobs.push(job(S, "j-invariants", |cfg| {
        let us = curves::sample_couplings(EXACT_U_COUNT);
        let res = fib::resolve_weierstrass_constant(&us).map(|r| {
            let cands: Vec<String> = r.candidates.iter().map(|(k, m, z, n)| format!("{k}: J(E3) {m}/{n}, Φ4 {z}/{n}")).collect();
            (r.chosen == Some(fib::WEIERSTRASS_CONSTANT), format!("constant resolved to {}; {}", r.chosen.map_or("none".into(), |k| k.to_string()), cands.join("; ")))
        });
        let check = |k: u32| -> Result<(usize, usize)> {
            let mut ok = 0;
            for u in &us {
                let j = fib::j_generic_fiber_with(u, k)?;
                if j == curves::j_e3(u)? && curves::phi4(&curves::j_e2(u)?, &j) == 0 {
                    ok += 1;
                }
            }
            Ok((ok, us.len()))
        };
        let mut v = vec![
            exact_bool("fibration.weierstrass_constant", res),
            exact_bool("fibration.j_generic", check(fib::WEIERSTRASS_CONSTANT).map(|(ok, n)| (ok == n, format!("J of the scaled Weierstrass equals J(E3) and closes Φ4 at {ok}/{n} U")))),
        ];
        let pencil = |q4: &str| -> Result<(usize, usize)> {
            let mut ok = 0;
            for &(a, b, c0, d0) in &fib::STANDARD_BASES {
                let (c0, d0) = (rat(a, b), rat(c0, d0));
                let u = fib::induced_coupling(&c0, &d0)?;
                if fib::pencil_j_generic_with(&fib::ExactBase { c0, d0, u: u.clone() }, q4)? == curves::j_e3(&u)? {
                    ok += 1;
                }
            }
            Ok((ok, fib::STANDARD_BASES.len()))
        };
        v.push(exact_bool(
            "fibration.pencil_j.generic",
            pencil(fib::PENCIL_Q4).map(|(ok, n)| (ok == n, format!("pencil J of the fiber equals J(E3) at {ok}/{n} bases"))),
        ));
        if cfg.mutations {
            v.push(mutant(
                "fibration.pencil_j.generic.mutant[a(a − z) → a(a − 2z)]",
                Method::Exact,
                pencil(fib::PENCIL_Q4_MUTATED).map(|(ok, n)| (ok == 0, format!("pencil J equals J(E3) at {ok}/{n} bases"))),
            ));
        }
        if cfg.mutations {
            v.push(mutant(
                "fibration.j_generic.mutant[U² coefficient 246]",
                Method::Exact,
                check(fib::WEIERSTRASS_CONSTANT_SLIP).map(|(ok, n)| (ok == 0, format!("matches at {ok}/{n} U"))),
            ));
        }
        v
    }));
    for u in cfg.couplings.clone() {
        if u.is_zero() {
            continue;
        }
        jobs.push(job(S, "special-fiber", move |cfg| {
            let prec = cfg.precision;
            let uc = u.to_complex(prec);
            let t = tag(&u);
            let mut o = Vec::new();
            let name = format!("fibration.pencil_j.special_h0{t}");
            let r = fib::pencil_j_special(&uc).map(|j| Sampled::one(rel_dist(&j, &j_e3_complex(&uc))));
            o.push(numeric(name, r, cfg.tolerance(), "relative distance to J(E3)"));
            // numeric base points over this coupling, c0 = 1/2 + i/5
            let name = format!("fibration.weierstrass.sampled_base{t}");
            let c0 = Complex::with_val(prec, (&rat(1, 2), &rat(1, 5)));
            let r = (|| {
                let mut s = Sampled { max: 0.0, min: f64::INFINITY, used: 0, skipped: 0 };
                for base in fib::sample_base(&uc, &c0)? {
                    let co = Coefficients::at(&base)?;
                    for &(p, q) in &FIBER_A {
                        for (a, b) in fib::fiber_points(&base, &Complex::with_val(prec, &rat(p, q)))? {
                            match fib::weierstrass_map(&base, &co, &a, &b) {
                                Ok((x, y)) => {
                                    let v = fib::weierstrass_scaled_residual(&base, &x, &y);
                                    s.max = fold_max(s.max, v);
                                    s.min = s.min.min(v);
                                    s.used += 1;
                                }
                                Err(Error::Pole(_)) => s.skipped += 1,
                                Err(e) => return Err(e),
                            }
                        }
                    }
                }
                Ok(s)
            })();
            o.push(numeric(name, r, cfg.tolerance(), "base-independent Weierstrass residual"));
            o
        }));
    }
    if cfg.stretch {
        for &(a, b, c0, d0) in &fib::STANDARD_BASES {
            jobs.push(job(S, "weierstrass-fibration", move |cfg| {
                let (c0, d0) = (rat(a, b), rat(c0, d0));
                let name = format!("fibration.weierstrass.exact[c0={c0},d0={d0}]");
                let base = fib::induced_coupling(&c0, &d0).map(|u| fib::ExactBase { c0, d0, u });
                let mut o = vec![exact(name.clone(), base.clone().and_then(|b| fib::verify_weierstrass_exact_at(&b, fib::WEIERSTRASS_CONSTANT)))];
                if cfg.mutations {
                    o.push(mutant_exact(format!("{name}.mutant[U² coefficient 246]"), base.and_then(|b| fib::verify_weierstrass_exact_at(&b, fib::WEIERSTRASS_CONSTANT_SLIP))));
                }
                o
            }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_term_doubling() {
        assert_eq!(double_last_term("a*b - c^2"), "a*b - c^2 - (c^2)");
        assert_eq!(double_last_term("(x + 1)^2 + 1"), "(x + 1)^2 + 1 + (1)");
        assert_eq!(double_last_term("x*(y - 1)"), "x*(y - 1) + (x*(y - 1))");
        assert_eq!(double_last_term("-c^2 + a*g + b*bb"), "-c^2 + a*g + b*bb + (b*bb)");
    }
}
