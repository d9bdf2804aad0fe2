use fracsde_core::chaos::{
    bm_chaos_coeff, cosine_basis_eval, gbm_layers, gbm_propagator, gbm_second_moment, genproc_coeffs,
    hermite_eval, norm_trend, table_size, ChaosTable, GbmParams, MultiIndex, NormVerdict,
    WeightSequence, DEFAULT_TABLE_LIMIT,
};
use fracsde_core::fou::loglog_slope;
use fracsde_core::special::{gamma, ml_eval, rgamma, EvalConfig};
use fracsde_core::volterra::GridSpec;
use fracsde_core::Error;
use proptest::prelude::*;

/// Composite Simpson rule on `[0, horizon]` with `n` (even) panels.
fn simpson(horizon: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = horizon / n as f64;
    let mut acc = f(0.0) + f(horizon);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn cosine_basis_is_orthonormal() {
    let horizon = 2.5;
    for j in 1..=16 {
        for k in j..=16 {
            let g = simpson(horizon, 4000, |t| {
                cosine_basis_eval(j, t, horizon).unwrap() * cosine_basis_eval(k, t, horizon).unwrap()
            });
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-8, "<m_{j}, m_{k}> = {g}");
        }
    }
}

#[test]
fn brownian_coefficients_resolve_the_variance() {
    // sum_k (int_0^t m_k)^2 = t, with a tail of order 1/K
    let (horizon, t) = (1.0, 0.37);
    let partial = |k_max: usize| -> f64 {
        (1..=k_max)
            .map(|k| bm_chaos_coeff(k, t, horizon).unwrap().powi(2))
            .sum()
    };
    let gaps: Vec<f64> = [100, 1000, 10_000].iter().map(|&k| (partial(k) - t).abs()).collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
    assert!(gaps[2] < 1e-4, "{gaps:?}");
}

#[test]
fn brownian_coefficients_match_quadrature() {
    let horizon = 3.0;
    for k in [1, 2, 7, 20] {
        let t = 1.3;
        let q = simpson(t, 2000, |s| cosine_basis_eval(k, s, horizon).unwrap());
        assert!((q - bm_chaos_coeff(k, t, horizon).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn first_order_coefficients_decay_with_smoothing_order() {
    // at t = T the oscillating leading term has constant amplitude, so
    // |I^p m_k(T)| ~ k^-p with p = 1 + beta - gamma
    let (beta, gamma) = (0.8, 0.5);
    let coeffs = genproc_coeffs(512, 1.0, 1.0, beta, gamma).unwrap();
    let ks: Vec<f64> = (16..=512).map(|k| k as f64).collect();
    let mags: Vec<f64> = (16..=512).map(|k| coeffs[k - 1].abs()).collect();
    let slope = loglog_slope(&ks, &mags);
    let want = gamma - beta - 1.0;
    assert!((slope - want).abs() < 0.1, "slope {slope} vs {want}");
}

#[test]
fn first_order_coefficient_of_mode_one_is_a_power() {
    // m_1 is constant: I^p m_1(t) = t^p / (Gamma(p + 1) sqrt(T))
    let (beta, gamma, horizon, t) = (0.6, 0.9, 2.0, 1.5);
    let p = 1.0 + beta - gamma;
    let got = genproc_coeffs(1, t, horizon, beta, gamma).unwrap()[0];
    let want = t.powf(p) * rgamma(p + 1.0) / horizon.sqrt();
    assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
}

#[test]
fn hermite_polynomials() {
    for x in [-2.0, -0.3, 0.0, 1.7] {
        assert_eq!(hermite_eval(0, x), 1.0);
        assert_eq!(hermite_eval(1, x), x);
        let he4 = x * x * x * x - 6.0 * x * x + 3.0;
        assert!((hermite_eval(4, x) - he4).abs() < 1e-12);
        // He_n' = n He_(n-1)
        for n in 1..10 {
            let h = 1e-5;
            let d = (hermite_eval(n, x + h) - hermite_eval(n, x - h)) / (2.0 * h);
            let want = n as f64 * hermite_eval(n - 1, x);
            assert!((d - want).abs() <= 1e-5 * want.abs().max(1.0), "n = {n}, x = {x}");
        }
    }
}

fn gbm(a: f64, sigma: f64, beta: f64, gamma: f64) -> GbmParams {
    GbmParams {
        x0: 1.0,
        a,
        sigma,
        beta,
        gamma,
    }
}

#[test]
fn layers_are_positive_and_nondecreasing() {
    let grid = GridSpec::new(2.0, 256).unwrap();
    let layers = gbm_layers(&gbm(0.5, 1.0, 0.8, 0.6), grid, 6).unwrap();
    for (n, layer) in layers.iter().enumerate() {
        assert!(layer.iter().all(|v| *v >= 0.0), "layer {n}");
        assert!(layer.windows(2).all(|w| w[1] >= w[0]), "layer {n}");
        if n > 0 {
            assert_eq!(layer[0], 0.0);
        }
    }
}

#[test]
fn driftless_layers_have_closed_form() {
    // Phi(t)^2 = t^(2d) / Gamma(1+d)^2, so
    // M_n(t) = (Gamma(2d+1) / Gamma(1+d)^2)^n t^(n r) / Gamma(n r + 1), r = 2d + 1
    let (beta, gamma_ord) = (0.7, 0.5);
    let d: f64 = beta - gamma_ord;
    let r = 2.0 * d + 1.0;
    let c0 = gamma(2.0 * d + 1.0).unwrap() / gamma(1.0 + d).unwrap().powi(2);
    let t = 1.5;
    let grid = GridSpec::new(t, 1024).unwrap();
    let layers = gbm_layers(&gbm(0.0, 1.0, beta, gamma_ord), grid, 5).unwrap();
    for (n, layer) in layers.iter().enumerate() {
        let nr = n as f64 * r;
        let want = c0.powi(n as i32) * t.powf(nr) * rgamma(nr + 1.0);
        let got = layer[1024];
        assert!((got - want).abs() <= 1e-5 * want, "layer {n}: {got} vs {want}");
    }
}

#[test]
fn driftless_second_moment_is_a_mittag_leffler_function() {
    // summing the closed-form layers: E X(t)^2 = E_r(sigma^2 c0 t^r)
    let (beta, gamma_ord, sigma, t) = (0.5, 0.75, 0.8, 2.0f64);
    let d: f64 = beta - gamma_ord;
    let r = 2.0 * d + 1.0;
    let c0 = gamma(2.0 * d + 1.0).unwrap() / gamma(1.0 + d).unwrap().powi(2);
    let want = ml_eval(r, 1.0, sigma * sigma * c0 * t.powf(r), &EvalConfig::default()).unwrap();
    let got = gbm_second_moment(&gbm(0.0, sigma, beta, gamma_ord), t, 1e-12).unwrap();
    assert!((got.value - want).abs() <= 1e-4 * want, "{} vs {want}", got.value);
    assert!(got.bound <= 1e-12);
}

#[test]
fn propagator_energy_approaches_the_second_moment() {
    let p = gbm(0.3, 0.5, 0.9, 0.8);
    let grid = GridSpec::new(1.0, 256).unwrap();
    let exact = gbm_second_moment(&p, 1.0, 1e-12).unwrap().value;
    let table = gbm_propagator(&p, 16, 3, grid, DEFAULT_TABLE_LIMIT).unwrap();
    let mut prev = 0.0;
    for n_max in 0..=3 {
        let e = table.energy(256, 16, n_max);
        assert!(e > prev && e <= exact * (1.0 + 1e-3), "N = {n_max}: {e} vs {exact}");
        prev = e;
    }
    assert!(prev >= 0.97 * exact, "{prev} vs {exact}");
}

#[test]
fn zeroth_order_entry_is_the_mean() {
    let p = GbmParams {
        x0: 2.0,
        ..gbm(0.4, 1.0, 0.75, 0.6)
    };
    let grid = GridSpec::new(1.0, 64).unwrap();
    let table = gbm_propagator(&p, 2, 1, grid, DEFAULT_TABLE_LIMIT).unwrap();
    let mean = table.get(&MultiIndex::empty()).unwrap();
    for (i, v) in mean.iter().enumerate() {
        let t = grid.time(i);
        let want = 2.0 * ml_eval(0.75, 1.0, 0.4 * t.powf(0.75), &EvalConfig::default()).unwrap();
        assert!((v - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn weighted_norm_of_propagator_is_cauchy_in_the_order() {
    // a rough kernel (beta - gamma <= -1/2) still has a finite weighted norm
    let p = gbm(0.0, 1.0, 0.3, 0.9);
    let grid = GridSpec::new(1.0, 256).unwrap();
    let q = WeightSequence::power(0.1, 1.0).unwrap();
    let table = gbm_propagator(&p, 8, 5, grid, DEFAULT_TABLE_LIMIT).unwrap();
    let norm_up_to = |n_max: usize| -> f64 {
        let sub = ChaosTable {
            entries: table
                .entries
                .iter()
                .filter(|e| e.alpha.order() <= n_max)
                .cloned()
                .collect(),
            ..table.clone()
        };
        sub.weighted_norm(&q, 256)
    };
    let norms: Vec<f64> = (0..=5).map(norm_up_to).collect();
    let steps: Vec<f64> = norms.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|s| *s >= 0.0), "{norms:?}");
    assert!(steps.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    assert!(matches!(
        gbm_layers(&p, grid, 2),
        Err(Error::NotSquareIntegrable { .. })
    ));
}

#[test]
fn norm_trend_separates_summable_weights() {
    // x_k ~ k^-0.3 with q_k = 0.5 k^-p: summable iff 2 (0.3) + p > 1
    let xs: Vec<f64> = (1..=4096).map(|k| (k as f64).powf(-0.3)).collect();
    let summable = norm_trend(&xs, &WeightSequence::power(0.5, 1.0).unwrap()).unwrap();
    assert_eq!(summable.verdict, NormVerdict::Cauchy);
    let heavy = norm_trend(&xs, &WeightSequence::power(0.5, 0.0).unwrap()).unwrap();
    assert_eq!(heavy.verdict, NormVerdict::Divergent);
    // p = 0.4 makes the terms harmonic: increments level off, ratios tend to 1
    let critical = norm_trend(&xs, &WeightSequence::power(0.5, 0.4).unwrap()).unwrap();
    assert_eq!(critical.verdict, NormVerdict::Inconclusive);
}

#[test]
fn table_size_is_capped() {
    assert_eq!(table_size(32, 4), 58905.0);
    let p = gbm(0.0, 1.0, 0.8, 0.6);
    let grid = GridSpec::new(1.0, 16).unwrap();
    assert!(matches!(
        gbm_propagator(&p, 64, 6, grid, DEFAULT_TABLE_LIMIT),
        Err(Error::ResourceCap { .. })
    ));
}

#[test]
fn table_survives_json() {
    let table = gbm_propagator(&gbm(0.2, 0.7, 0.8, 0.6), 3, 2, GridSpec::new(1.0, 8).unwrap(), 100).unwrap();
    let text = serde_json::to_string(&table).unwrap();
    let back: ChaosTable = serde_json::from_str(&text).unwrap();
    assert_eq!(table, back);
    assert!(text.contains("\"T\":1.0") && text.contains("\"K\":3") && text.contains("\"N\":2"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multi_index_entries_round_trip(modes in prop::collection::vec(1u32..9, 0..7)) {
        let alpha = MultiIndex::from_modes(modes.clone()).unwrap();
        prop_assert_eq!(alpha.order(), modes.len());
        let back = MultiIndex::from_entries(&alpha.entries()).unwrap();
        prop_assert_eq!(&back, &alpha);
        let json = serde_json::to_string(&alpha).unwrap();
        let parsed: MultiIndex = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(parsed, alpha);
    }

    #[test]
    fn lower_order_sorts_first(
        a in prop::collection::vec(1u32..9, 0..5),
        b in prop::collection::vec(1u32..9, 0..5),
    ) {
        let (x, y) = (MultiIndex::from_modes(a).unwrap(), MultiIndex::from_modes(b).unwrap());
        if x.order() < y.order() {
            prop_assert!(x < y);
        }
    }

    #[test]
    fn weights_outside_unit_interval_are_rejected(c in -2.0f64..3.0) {
        prop_assert_eq!(WeightSequence::power(c, 1.0).is_ok(), c > 0.0 && c < 1.0);
    }
}
