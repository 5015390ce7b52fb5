use proptest::prelude::*;
use shastry_core::elliptic::{Form, Uniformizer};
use shastry_core::lax::LaxFamily;
use shastry_core::numeric::{abs_f64, c, stream_id, Sampler};
use shastry_core::Error;

const PREC: u32 = 128;
const TOL: f64 = 1e-30;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampler_is_reproducible_and_in_range(seed in any::<u64>(), name in "[a-z.]{1,12}") {
        let mut a = Sampler::new(seed, stream_id(&name));
        let mut b = Sampler::new(seed, stream_id(&name));
        for _ in 0..32 {
            let x = a.uniform(-2.0, 2.0);
            prop_assert_eq!(x, b.uniform(-2.0, 2.0));
            prop_assert!((-2.0..2.0).contains(&x));
        }
    }

    // weights land on Ē2 and the two forms agree anywhere in the rectangle
    #[test]
    fn uniformized_points_lie_on_the_curve(s in -1.95f64..1.95, t in -0.95f64..0.95, ur in 0.5f64..4.0, ui in -1.0f64..1.0) {
        let u = c(PREC, ur, ui);
        let un = Uniformizer::new(&u, PREC).unwrap();
        let lam = un.context().unwrap().lattice_point(s, t);
        match (un.point(&lam, Form::Theta), un.point(&lam, Form::Sn)) {
            (Ok(w), Ok(v)) => {
                let scale = 1.0 + abs_f64(&w.xc).max(abs_f64(&w.yc)).powi(4);
                prop_assert!(abs_f64(&w.curve_residual(&u)) / scale < TOL);
                let d = abs_f64(&(w.xc.clone() - &v.xc)) + abs_f64(&(w.yc.clone() - &v.yc));
                prop_assert!(d / (1.0 + abs_f64(&w.xc) + abs_f64(&w.yc)) < TOL);
            }
            (Err(Error::Pole(_)), _) | (_, Err(Error::Pole(_))) => {}
            (a, b) => prop_assert!(false, "{:?} {:?}", a.err(), b.err()),
        }
    }

    #[test]
    fn crossing_and_unitarity_hold(s in -1.9f64..1.9, t in -0.9f64..0.9) {
        let u = c(PREC, 2.0, 0.5);
        let fam = LaxFamily::new(&u, PREC, Form::Theta).unwrap();
        let lam = Uniformizer::new(&u, PREC).unwrap().context().unwrap().lattice_point(s, t);
        if let (Ok(cr), Ok(un)) = (fam.crossing_residual(&lam, None), fam.unitarity_residual(&lam, false)) {
            prop_assert!(cr < TOL && un < TOL, "{cr} {un}");
        }
    }
}
