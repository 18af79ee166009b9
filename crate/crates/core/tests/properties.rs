use std::sync::OnceLock;

use orlicz_core::bessel::{bessel_inverse, bessel_potential, hs_norm};
use orlicz_core::lpatoms::{build_filter_bank, triebel_norm};
use orlicz_core::orlicz::{luxemburg_norm, modular};
use orlicz_core::sobolev::{gagliardo_seminorm, GagliardoQuadrature};
use orlicz_core::{Field, Grid, YoungFunction};
use proptest::prelude::*;

const NAMES: [&str; 4] = ["power:p=1.5", "power:p=3", "zygmund:p=2,q=1,r=1", "powersum:p=2,q=4"];

fn young(i: usize) -> &'static (YoungFunction, YoungFunction) {
    static CACHE: OnceLock<Vec<(YoungFunction, YoungFunction)>> = OnceLock::new();
    &CACHE.get_or_init(|| {
        NAMES
            .iter()
            .map(|n| {
                let a: YoungFunction = n.parse().unwrap();
                let c = a.conjugate().unwrap();
                (a, c)
            })
            .collect()
    })[i]
}

fn grid() -> Grid {
    Grid::new(1, 64, 4.0).unwrap()
}

fn field() -> impl Strategy<Value = Field> {
    prop::collection::vec(-3.0f64..3.0, 64).prop_map(|v| Field::new(grid(), v).unwrap())
}

fn smooth_field() -> impl Strategy<Value = Field> {
    (0.3f64..1.0, -1.0f64..1.0, 0.2f64..2.0).prop_map(|(w, c, a)| {
        Field::from_fn(grid(), move |x| a * (-((x[0] - c) / w).powi(2)).exp())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn luxemburg_is_a_norm(u in field(), v in field(), c in -4.0f64..4.0, k in 0usize..4) {
        let a = &young(k).0;
        let nu = luxemburg_norm(a, &u).unwrap().value;
        let nv = luxemburg_norm(a, &v).unwrap().value;
        let sum = luxemburg_norm(a, &u.add(&v).unwrap()).unwrap().value;
        prop_assert!(sum <= (nu + nv) * (1.0 + 1e-7));
        let scaled = luxemburg_norm(a, &u.scale(c)).unwrap().value;
        prop_assert!((scaled - c.abs() * nu).abs() <= 1e-7 * (c.abs() * nu).max(1e-300));
        if nu > 0.0 {
            prop_assert!(modular(a, &u.scale(1.0 / nu)).unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn young_inequality_holds(t in 1e-3f64..1e3, w in 1e-3f64..1e3, k in 0usize..4) {
        let (a, c) = young(k);
        let slack = a.eval(t).unwrap() + c.eval(w).unwrap() - t * w;
        prop_assert!(slack >= -1e-9 * t * w);
    }

    #[test]
    fn convolution_commutes(u in field(), v in field()) {
        let uv = u.convolve(&v).unwrap();
        let vu = v.convolve(&u).unwrap();
        prop_assert!(uv.sub(&vu).unwrap().max_abs() <= 1e-12 * (1.0 + uv.max_abs()));
    }

    #[test]
    fn maximal_function_is_sublinear(u in field(), v in field()) {
        let mu = u.maximal_function();
        let mv = v.maximal_function();
        let muv = u.add(&v).unwrap().maximal_function();
        for i in 0..64 {
            prop_assert!(muv.samples()[i] <= mu.samples()[i] + mv.samples()[i] + 1e-12);
            prop_assert!(mu.samples()[i] >= u.samples()[i].abs() - 1e-12);
        }
    }

    #[test]
    fn potentials_contract_and_invert(f in field(), s in 0.2f64..2.5, k in 0usize..4) {
        let a = &young(k).0;
        let u = bessel_potential(s, &f).unwrap();
        prop_assert!(luxemburg_norm(a, &u).unwrap().value <= luxemburg_norm(a, &f).unwrap().value + 1e-7);
        let back = bessel_inverse(s, &u).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-10 * (1.0 + f.max_abs()));
    }

    #[test]
    fn potential_norms_grow_with_order(u in smooth_field(), s1 in 0.1f64..1.0, ds in 0.0f64..1.0, k in 0usize..4) {
        let a = &young(k).0;
        let low = hs_norm(a, s1, &u).unwrap().value;
        let high = hs_norm(a, s1 + ds, &u).unwrap().value;
        prop_assert!(low <= high + 1e-7);
    }

    #[test]
    fn gagliardo_seminorm_is_a_seminorm(u in smooth_field(), v in smooth_field(), c in -3.0f64..3.0, s in 0.1f64..0.9) {
        let a = &young(2).0;
        let q = GagliardoQuadrature::for_grid(&grid(), 8);
        let su = gagliardo_seminorm(a, s, &u, &q).unwrap().value;
        let sv = gagliardo_seminorm(a, s, &v, &q).unwrap().value;
        let suv = gagliardo_seminorm(a, s, &u.add(&v).unwrap(), &q).unwrap().value;
        prop_assert!(suv <= (su + sv) * (1.0 + 1e-7));
        let scaled = gagliardo_seminorm(a, s, &u.scale(c), &q).unwrap().value;
        prop_assert!((scaled - c.abs() * su).abs() <= 1e-7 * (c.abs() * su).max(1e-300));
        let shifted = gagliardo_seminorm(a, s, &u.map(|x| x + 2.0), &q).unwrap().value;
        prop_assert!((shifted - su).abs() <= 1e-7 * su);
    }

    #[test]
    fn triebel_norm_is_homogeneous(u in smooth_field(), c in -3.0f64..3.0, s in 0.1f64..1.5) {
        let bank = build_filter_bank(3, grid()).unwrap();
        let a = &young(0).0;
        let one = triebel_norm(a, s, 2.0, &u, &bank).unwrap();
        let scaled = triebel_norm(a, s, 2.0, &u.scale(c), &bank).unwrap();
        prop_assert!((scaled - c.abs() * one).abs() <= 1e-7 * (c.abs() * one).max(1e-300));
    }
}
