use fracsde_core::fou::{
    fou_limit_variance, fou_mean, fou_variance, fsode_variance, loglog_slope, regime_classify,
    FouParams, Regime,
};
use fracsde_core::Error;
use proptest::prelude::*;

fn params(a: f64, beta: f64, gamma: f64) -> FouParams {
    FouParams {
        x0: 1.0,
        a,
        beta,
        gamma,
    }
}

#[test]
fn zero_reversion_matches_fsode_exactly() {
    for (beta, gamma) in [(0.9, 0.2), (0.5, 0.5), (1.0, 0.7), (0.3, 0.6)] {
        for t in [0.1, 1.0, 7.5] {
            let a = fou_variance(&params(0.0, beta, gamma), t).unwrap();
            let b = fsode_variance(beta, gamma, t).unwrap();
            assert_eq!(a, b, "({beta},{gamma}) at {t}");
        }
    }
}

#[test]
fn limit_is_approached_when_gamma_exceeds_half() {
    for (a, beta, gamma) in [(1.0, 0.9, 0.7), (2.0, 0.6, 0.8), (0.5, 1.0, 1.0)] {
        let limit = fou_limit_variance(a, beta, gamma).unwrap();
        let late = fou_variance(&params(a, beta, gamma), 1e5).unwrap();
        assert!((late - limit).abs() <= 0.01 * limit, "({a},{beta},{gamma}): {late} vs {limit}");
    }
}

#[test]
fn limit_is_refused_outside_the_convergent_regime() {
    for gamma in [0.5, 0.3] {
        assert!(matches!(fou_limit_variance(1.0, 0.9, gamma), Err(Error::Divergent { .. })));
    }
    assert!(fou_limit_variance(0.0, 0.9, 0.7).is_err());
}

#[test]
fn mean_starts_at_initial_value_and_decays() {
    let p = FouParams {
        x0: 2.5,
        a: 1.0,
        beta: 0.7,
        gamma: 0.6,
    };
    assert_eq!(fou_mean(&p, 0.0).unwrap(), 2.5);
    let mut prev = 2.5;
    for t in [0.5, 1.0, 4.0, 20.0, 100.0] {
        let m = fou_mean(&p, t).unwrap();
        assert!(m > 0.0 && m < prev, "{t}: {m}");
        prev = m;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variance_scales_with_reversion_rate(
        a in 0.2f64..5.0,
        beta in 0.3f64..=1.0,
        gamma in 0.3f64..=1.0,
        t in 0.1f64..5.0,
    ) {
        prop_assume!(beta - gamma > -0.45);
        // Var(a, t) = c^(2(beta-gamma)+1) Var(1, t/c) with c = a^(-1/beta)
        let c = a.powf(-1.0 / beta);
        let lhs = fou_variance(&params(a, beta, gamma), t).unwrap();
        let rhs = c.powf(2.0 * (beta - gamma) + 1.0) * fou_variance(&params(1.0, beta, gamma), t / c).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-7 * lhs, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn fsode_growth_exponent(beta in 0.05f64..=1.0, gamma in 0.05f64..=1.0) {
        prop_assume!(beta - gamma > -0.5);
        let ts = [1.0, 10.0, 100.0];
        let vs: Vec<f64> = ts.iter().map(|&t| fsode_variance(beta, gamma, t).unwrap()).collect();
        let slope = loglog_slope(&ts, &vs);
        let want = 2.0 * (beta - gamma) + 1.0;
        prop_assert!(slope > 0.0 && slope < 3.0);
        prop_assert!((slope - want).abs() < 1e-9);
    }

    #[test]
    fn regime_matches_limit_availability(beta in 0.05f64..=1.0, gamma in 0.05f64..=1.0) {
        let regime = regime_classify(beta, gamma).unwrap();
        let limit = fou_limit_variance(1.0, beta, gamma);
        match regime {
            Regime::GeneralizedOnly => {
                let refused = matches!(limit, Err(Error::NotSquareIntegrable { .. }));
                prop_assert!(refused);
            }
            Regime::ConvergentGaussian => prop_assert!(limit.unwrap() > 0.0),
            Regime::LogGrowth => prop_assert!(false, "gamma = 1/2 is not sampled"),
            Regime::PowerGrowth { exponent } => {
                prop_assert!((exponent - (1.0 - 2.0 * gamma)).abs() < 1e-15);
                let refused = matches!(limit, Err(Error::Divergent { .. }));
                prop_assert!(refused, "{:?}", limit);
            }
        }
    }

    #[test]
    fn variance_is_nondecreasing(beta in 0.3f64..=1.0, gamma in 0.3f64..=1.0) {
        prop_assume!(beta - gamma > -0.45);
        let p = params(1.0, beta, gamma);
        let mut prev = 0.0;
        for t in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
            let v = fou_variance(&p, t).unwrap();
            prop_assert!(v >= prev * (1.0 - 1e-12), "{} at {}", v, t);
            prev = v;
        }
    }
}
