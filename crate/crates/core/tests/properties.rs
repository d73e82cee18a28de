use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

use mislab::asymptotics::{lambert_residual, lambert_w, tau};
use mislab::exact::{mu_recurrence, PoissonGf};
use mislab::graphs::{brute_force_alpha, sample_gnp};
use mislab::search::run_exhaustive_mis;
use mislab::stats::{ks_distance_normal, SampleMoments};
use mislab::{ModelParams, NumericContext};

fn ratio() -> impl Strategy<Value = ModelParams> {
    (1u64..12).prop_flat_map(|den| (1..den + 1, Just(den + 1))).prop_map(|(a, b)| ModelParams::from_ratio(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_finds_alpha(p in ratio(), n in 0usize..14, stream in 0u64..1000) {
        let g = sample_gnp(n, &p, 5, stream).unwrap();
        let out = run_exhaustive_mis(&g, u64::MAX).unwrap();
        prop_assert_eq!(out.alpha, brute_force_alpha(&g).unwrap());
        prop_assert!(out.cost >= 1 || n == 0);
        prop_assert!(out.cost <= 1u64 << n.saturating_sub(1));
    }

    #[test]
    fn mu_is_increasing_and_bounded(p in ratio()) {
        let ctx = NumericContext::default();
        let mu = mu_recurrence::<Rational>(30, &p, &ctx);
        for n in 1..30 {
            prop_assert!(mu[n + 1] > mu[n]);
            prop_assert!(mu[n + 1] <= 1u64 << n);
        }
    }

    #[test]
    fn poisson_functional_equation(p in ratio(), x in 0.1f64..30.0) {
        let ctx = NumericContext::default();
        let gf = PoissonGf::new(&p, &ctx, PoissonGf::table_len_for(30.0, 1, &ctx));
        let r = gf.functional_residual(&Float::with_val(256, x)).unwrap();
        prop_assert!(r < Float::with_val(64, 1) >> 128u32);
    }

    #[test]
    fn lambert_defining_equation(e in -20i32..60, frac in 1.0f64..10.0) {
        let ctx = NumericContext::new(160).unwrap();
        let y = Float::with_val(160, frac) * Float::with_val(160, 10).pow(e);
        let w = lambert_w(&y, &ctx).unwrap();
        prop_assert!(lambert_residual(&w, &y) < 1e-40);
    }

    #[test]
    fn charlier_second_polynomial(n in 1u64..10_000) {
        prop_assert_eq!(tau(2, n), -rug::Integer::from(n));
        prop_assert_eq!(tau(1, n), 0);
    }

    #[test]
    fn sample_statistics_are_affine_invariant(xs in prop::collection::vec(-1e3f64..1e3, 3..200), a in 0.5f64..4.0, b in -50.0f64..50.0) {
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let (mx, my) = (SampleMoments::of(&xs), SampleMoments::of(&ys));
        prop_assume!(mx.variance > 1e-6);
        prop_assert!((my.variance - a * a * mx.variance).abs() <= 1e-8 * my.variance.max(1.0));
        prop_assert!((my.skewness() - mx.skewness()).abs() < 1e-8);
        let (kx, ky) = (ks_distance_normal(&xs), ks_distance_normal(&ys));
        prop_assert!((0.0..=1.0).contains(&kx));
        prop_assert!((kx - ky).abs() < 1e-9);
    }
}
