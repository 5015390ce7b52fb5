//! One line per acceptance criterion; exits nonzero when any fails.
//! Tolerances are pinned here rather than taken from the run configuration.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use shastry_core::curves;
use shastry_core::suite::{self, Method, Record, Report, RunConfig, Status, SuiteName};
use shastry_core::Rat;

const TOL_54: f64 = 1.0 / (1u64 << 54) as f64;
const TOL_48: f64 = 1.0 / (1u64 << 48) as f64;
const SCALING: f64 = (1u64 << 32) as f64;

struct Run {
    report: Report,
    elapsed: Duration,
}

fn run(suite: SuiteName, stretch: bool) -> Run {
    let cfg = RunConfig { suites: vec![suite], mutations: true, stretch, ..RunConfig::default() };
    let t0 = Instant::now();
    let report = suite::run(&cfg).expect("default config is valid");
    Run { report, elapsed: t0.elapsed() }
}

fn plain<'a>(rep: &'a Report, prefix: &str) -> Vec<&'a Record> {
    rep.records.iter().filter(|r| r.name.starts_with(prefix) && !r.mutation).collect()
}

/// Every numeric record under `prefix` passes with residual below `tol`; returns the worst residual.
fn below(rep: &Report, prefix: &str, tol: f64, want: usize) -> Result<f64, String> {
    let rs: Vec<&Record> = plain(rep, prefix).into_iter().filter(|r| r.method == Method::Numeric).collect();
    if rs.len() < want {
        return Err(format!("{prefix}: {} records, expected {want}", rs.len()));
    }
    let mut worst = 0f64;
    for r in rs {
        let x = r.residual.ok_or_else(|| format!("{} has no residual", r.name))?;
        if r.status != Status::Pass || !(x < tol) {
            return Err(format!("{}: {:?} residual {x:.3e}", r.name, r.status));
        }
        worst = worst.max(x);
    }
    Ok(worst)
}

fn passes<'a>(rep: &'a Report, name: &str) -> Result<&'a Record, String> {
    let r = rep.get(name).ok_or_else(|| format!("{name} missing"))?;
    if r.status == Status::Pass {
        Ok(r)
    } else {
        Err(format!("{name}: {}", r.summary))
    }
}

fn in_time(run: &Run, limit: u64) -> Result<(), String> {
    if run.elapsed.as_secs() < limit {
        Ok(())
    } else {
        Err(format!("took {:.1}s, limit {limit}s", run.elapsed.as_secs_f64()))
    }
}

fn samples_in(summary: &str) -> usize {
    summary.rsplit("over ").next().and_then(|s| s.split_whitespace().next()).and_then(|n| n.parse().ok()).unwrap_or(0)
}

const US: usize = 4;

fn main() -> ExitCode {
    let curves_run = run(SuiteName::Curves, false);
    let rm = run(SuiteName::Rmatrix, false);
    let lax = run(SuiteName::Lax, false);
    let fib = run(SuiteName::Fibration, true);
    let (c, r, l, f) = (&curves_run.report, &rm.report, &lax.report, &fib.report);

    let mut results: Vec<(&str, Result<String, String>)> = Vec::new();

    results.push(("1 exact quadrics Q1..Q5", (|| {
        for k in 1..=5 {
            passes(r, &format!("rmatrix.quadric.Q{k}"))?;
        }
        in_time(&rm, 120)?;
        Ok(format!("5/5 remainders zero, rmatrix suite {:.1}s", rm.elapsed.as_secs_f64()))
    })()));

    results.push(("2 exact isogeny", (|| {
        let s = passes(c, "curves.isogeny.exact")?.summary.clone();
        let t = Instant::now();
        if !curves::verify_psi_exact() {
            return Err("direct reduction nonzero".into());
        }
        (t.elapsed().as_secs() < 10).then_some(()).ok_or("slower than 10s")?;
        Ok(s)
    })()));

    results.push(("3 modular identities", (|| {
        let a = passes(c, "curves.phi4.e1_e2")?;
        let b = passes(c, "curves.phi4.e2_e3")?;
        for x in [a, b] {
            if !x.summary.contains("20/20") {
                return Err(x.summary.clone());
            }
        }
        in_time(&curves_run, 60)?;
        Ok(format!("Φ4 zero at 20/20 U twice, curves suite {:.1}s", curves_run.elapsed.as_secs_f64()))
    })()));

    results.push(("4 non-isomorphism", (|| {
        passes(c, "curves.j.e1_ne_e2")?;
        let j = curves::j_e1(&Rat::from(4)).map_err(|e| e.to_string())?;
        (j == 287496).then_some(()).ok_or(format!("J(E1)(4) = {j}"))?;
        Ok("J(E1) ≠ J(E2) at 20 U, J(E1)(4) = 287496".into())
    })()));

    results.push(("5 Yang-Baxter", (|| {
        let w = below(r, "rmatrix.ybe[", TOL_54, US)?;
        let mut ratio = f64::INFINITY;
        for x in plain(r, "rmatrix.ybe.precision_scaling") {
            let v = x.residual.unwrap_or(0.0);
            if x.status != Status::Pass || v < SCALING {
                return Err(format!("{}: ratio {v:.3e}", x.name));
            }
            ratio = ratio.min(v);
        }
        (ratio.is_finite()).then_some(()).ok_or("no scaling records")?;
        for x in plain(r, "rmatrix.ybe[") {
            if samples_in(&x.summary) < 100 {
                return Err(format!("{}: {}", x.name, x.summary));
            }
        }
        in_time(&rm, 300)?;
        Ok(format!("max {w:.2e} < 2^-54 over 100 pairs × {US} U; 128→256 bit ratio ≥ 2^{:.0}", ratio.log2()))
    })()));

    results.push(("6 crossing and unitarity", (|| {
        let a = below(l, "lax.crossing[", TOL_54, US)?;
        let b = below(l, "lax.unitarity[", TOL_54, US)?;
        let mut least = f64::INFINITY;
        for x in plain(l, "lax.unitarity.permuted_control") {
            passes(l, &x.name)?;
            least = least.min(x.residual.unwrap_or(0.0));
        }
        (least > 1e-3 && least.is_finite()).then_some(()).ok_or(format!("permuted residual {least:.2e}"))?;
        Ok(format!("crossing {a:.2e}, unitarity {b:.2e}; permuted variant ≥ {least:.2e}"))
    })()));

    results.push(("7 Lax equivalence", (|| {
        let a = below(l, "lax.equivalence[", TOL_54, US)?;
        passes(l, "lax.regular_point")?;
        Ok(format!("ratio defect {a:.2e}; L(0) = P exactly"))
    })()));

    results.push(("8 transfer matrices", (|| {
        let a = below(l, "lax.transfer.commute.N", TOL_48, 2 * US)?;
        let b = below(l, "lax.transfer.partition_symmetry.N", TOL_48, 2 * US)?;
        Ok(format!("commutator {a:.2e}, Z symmetry {b:.2e} for N = 2, 3"))
    })()));

    results.push(("9 second ideal and ω-curve", (|| {
        passes(r, "rmatrix.omega_curve")?;
        let gens = plain(r, "rmatrix.second_ideal.");
        if gens.len() < 7 {
            return Err(format!("{} generators", gens.len()));
        }
        for g in &gens {
            passes(r, &g.name)?;
        }
        Ok(format!("ω-curve and {} generators reduce to 0", gens.len()))
    })()));

    results.push(("10 Weierstrass fibration", (|| {
        let w = below(f, "fibration.weierstrass", TOL_48, 1)?;
        let n = samples_in(&passes(f, "fibration.weierstrass")?.summary);
        (n >= 50).then_some(()).ok_or(format!("{n} fiber points"))?;
        let bases = plain(f, "fibration.weierstrass.exact[");
        (bases.len() >= 5).then_some(()).ok_or(format!("{} exact bases", bases.len()))?;
        for x in &bases {
            passes(f, &x.name)?;
        }
        passes(f, "fibration.quartic_c")?;
        passes(f, "fibration.j_generic")?;
        let k = passes(f, "fibration.weierstrass_constant")?;
        (k.summary.contains("resolved to 256")).then_some(()).ok_or(k.summary.clone())?;
        Ok(format!("{n} points over 5 bases, max {w:.2e}; C exact; J and Φ4 close with 256 (246 rejected)"))
    })()));

    results.push(("11 mutation controls", (|| {
        let all: Vec<&Record> = [c, r, l, f].iter().flat_map(|x| x.records.iter()).collect();
        let mutants: Vec<&&Record> = all.iter().filter(|x| x.mutation).collect();
        if let Some(m) = mutants.iter().find(|m| m.status != Status::Pass) {
            return Err(format!("{} undetected: {}", m.name, m.summary));
        }
        let exact = ["curves.isogeny.exact", "curves.phi4.e1_e2", "curves.phi4.e2_e3", "rmatrix.omega_curve", "fibration.quartic_c", "fibration.q2_minus_q1", "fibration.j_generic", "fibration.pencil_j.generic"];
        let mut names: Vec<String> = exact.iter().map(|s| s.to_string()).collect();
        names.extend((1..=5).map(|k| format!("rmatrix.quadric.Q{k}")));
        names.extend(plain(r, "rmatrix.second_ideal.").iter().map(|x| x.name.clone()));
        names.extend(plain(f, "fibration.weierstrass.exact[").iter().map(|x| x.name.clone()));
        for n in &names {
            if !mutants.iter().any(|m| m.name.starts_with(&format!("{n}.mutant["))) {
                return Err(format!("{n} has no mutant"));
            }
        }
        Ok(format!("{} mutants detected, covering {} exact identities", mutants.len(), names.len()))
    })()));

    let mut ok = true;
    for (name, res) in &results {
        match res {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                ok = false;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
