//! Fractional integrals and derivatives of sampled functions, a numeric
//! Laplace transform, the fractional Gronwall bound and the linear Caputo ODE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{CellMoments, MlKernel, PowerKernel};
use crate::special::mittag_leffler::{ml_general, EvalConfig};
use crate::special::{gamma, rgamma};

/// A function sampled at `t_i = i T / n`, `i = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    horizon: f64,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", horizon, "must be positive and finite"));
        }
        if values.len() < 2 {
            return Err(Error::MalformedPath("need at least two samples (n_steps >= 1)"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedPath("values must be finite"));
        }
        Ok(SampledPath { horizon, values })
    }

    /// Builds a path from sample times, rejecting non-uniform spacing.
    pub fn from_samples(times: &[f64], values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::MalformedPath("times and values must match, length >= 2"));
        }
        if times[0] != 0.0 {
            return Err(Error::MalformedPath("grid must start at t = 0"));
        }
        let n = times.len() - 1;
        let horizon = times[n];
        let h = horizon / n as f64;
        for (i, &t) in times.iter().enumerate() {
            if (t - i as f64 * h).abs() > 1e-9 * horizon.max(1.0) {
                return Err(Error::MalformedPath("grid is not uniform"));
            }
        }
        SampledPath::new(horizon, values)
    }

    /// Samples `f` on `n_steps + 1` uniform nodes of `[0, horizon]`.
    pub fn from_fn(horizon: f64, n_steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n_steps < 1 {
            return Err(Error::MalformedPath("n_steps must be >= 1"));
        }
        let h = horizon / n_steps as f64;
        SampledPath::new(horizon, (0..=n_steps).map(|i| f(i as f64 * h)).collect())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `f(0+)`, taken as the first sample.
    pub fn initial_value(&self) -> f64 {
        self.values[0]
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.dt();
        (0..self.values.len()).map(move |i| i as f64 * h)
    }

    fn with_values(&self, values: Vec<f64>) -> SampledPath {
        SampledPath {
            horizon: self.horizon,
            values,
        }
    }
}

/// Riemann-Liouville `I^p f` or Kochubei `J^p f = I^p (f - f(0+))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralKind {
    RiemannLiouville,
    Kochubei,
}

/// Fractional integral of order `p >= 0` by product integration against the
/// linear interpolant. Order 0 returns `f` (RL) or `f - f(0+)` (Kochubei).
pub fn frac_integral(kind: IntegralKind, p: f64, f: &SampledPath) -> Result<SampledPath> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::invalid("p", p, "order must be non-negative"));
    }
    let f0 = match kind {
        IntegralKind::RiemannLiouville => 0.0,
        IntegralKind::Kochubei => f.initial_value(),
    };
    let shifted: Vec<f64> = f.values.iter().map(|v| v - f0).collect();
    if p == 0.0 {
        return Ok(f.with_values(shifted));
    }
    let w = CellMoments::new(&PowerKernel::fractional_integral(p), f.dt(), f.n_steps())?;
    Ok(f.with_values(w.convolve(&shifted)))
}

fn check_derivative_order(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("beta", beta, "derivative order must lie in (0, 1)"))
    }
}

/// Second-order finite-difference derivative; interior nodes are central,
/// end nodes use three-point one-sided stencils.
fn differentiate(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len() - 1;
    let mut d = vec![0.0; n + 1];
    if n == 1 {
        let s = (g[1] - g[0]) / h;
        return vec![s, s];
    }
    d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h);
    for i in 1..n {
        d[i] = (g[i + 1] - g[i - 1]) / (2.0 * h);
    }
    d[n] = (3.0 * g[n] - 4.0 * g[n - 1] + g[n - 2]) / (2.0 * h);
    d
}

/// Result of a fractional derivative on a grid.
///
/// The Riemann-Liouville derivative of a function with `f(0) != 0` is
/// unbounded at the origin; the first value is then `+-inf`. The path is kept
/// as a plain vector because [`SampledPath`] requires finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativePath {
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl DerivativePath {
    pub fn dt(&self) -> f64 {
        self.horizon / (self.values.len() - 1) as f64
    }

    /// Converts to a [`SampledPath`]; fails when the origin value is infinite.
    pub fn into_path(self) -> Result<SampledPath> {
        SampledPath::new(self.horizon, self.values)
    }
}

/// Riemann-Liouville derivative `D^beta f = d/dt I^(1-beta) f`.
pub fn rl_derivative(beta: f64, f: &SampledPath) -> Result<DerivativePath> {
    check_derivative_order(beta)?;
    let g = frac_integral(IntegralKind::RiemannLiouville, 1.0 - beta, f)?;
    let mut values = differentiate(&g.values, f.dt());
    let f0 = f.initial_value();
    if f0 != 0.0 {
        values[0] = f64::INFINITY.copysign(f0);
    }
    Ok(DerivativePath {
        horizon: f.horizon,
        values,
    })
}

/// Caputo (Kochubei) derivative `d/dt J^(1-beta) f`.
pub fn caputo_derivative(beta: f64, f: &SampledPath) -> Result<SampledPath> {
    check_derivative_order(beta)?;
    let g = frac_integral(IntegralKind::Kochubei, 1.0 - beta, f)?;
    Ok(f.with_values(differentiate(&g.values, f.dt())))
}

/// Laplace parameters, positive and strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceGrid {
    lambdas: Vec<f64>,
}

impl LaplaceGrid {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::invalid("lambdas", f64::NAN, "need at least one value"));
        }
        for (i, &l) in lambdas.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid("lambda", l, "must be positive and finite"));
            }
            if i > 0 && l <= lambdas[i - 1] {
                return Err(Error::invalid("lambda", l, "grid must be strictly increasing"));
            }
        }
        Ok(LaplaceGrid { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
}

/// One value of a truncated numeric Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    pub lambda: f64,
    pub value: f64,
    /// `max |f| e^(-lambda T) / lambda`, a bound for the neglected tail if `f`
    /// stays bounded by its sampled maximum beyond the horizon.
    pub truncation_bound: f64,
}

/// `int_0^1 e^(-x v) (1 - v) dv` and `int_0^1 e^(-x v) v dv`.
fn exp_hat_weights(x: f64) -> (f64, f64) {
    if x < 1e-3 {
        let x2 = x * x;
        (
            0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0,
            0.5 - x / 3.0 + x2 / 8.0 - x2 * x / 30.0,
        )
    } else {
        let em = (-x).exp_m1();
        let x2 = x * x;
        ((x + em) / x2, (-em - x * (1.0 + em)) / x2)
    }
}

/// `int_0^T f(t) e^(-lambda t) dt` for the piecewise-linear interpolant of `f`.
///
/// The exponential is integrated exactly on each cell, so the only
/// discretization error comes from interpolating `f`.
pub fn laplace_numeric(f: &SampledPath, grid: &LaplaceGrid) -> Vec<LaplaceValue> {
    let h = f.dt();
    let fmax = f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    grid.lambdas
        .iter()
        .map(|&lambda| {
            let (w0, w1) = exp_hat_weights(lambda * h);
            let decay = (-lambda * h).exp();
            let mut acc = 0.0;
            let mut scale = 1.0;
            for pair in f.values.windows(2) {
                acc += scale * (pair[0] * w0 + pair[1] * w1);
                scale *= decay;
                if scale == 0.0 {
                    break;
                }
            }
            LaplaceValue {
                lambda,
                value: acc * h,
                truncation_bound: fmax * (-lambda * f.horizon).exp() / lambda,
            }
        })
        .collect()
}

/// `A(t) E_beta(B Gamma(beta) t^beta)`, the fractional Gronwall-Bellman bound
/// for `u(t) <= A(t) + B int_0^t (t-s)^(beta-1) u(s) ds`.
pub fn gronwall_bound(a: &SampledPath, b: f64, beta: f64) -> Result<SampledPath> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid("B", b, "must be positive"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", beta, "must be positive"));
    }
    if a.values.iter().any(|&v| v < 0.0) {
        return Err(Error::MalformedPath("A must be non-negative"));
    }
    if a.values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::MalformedPath("A must be non-decreasing"));
    }
    let c = b * gamma(beta)?;
    let cfg = EvalConfig::default();
    let mut out = Vec::with_capacity(a.values.len());
    for (t, &av) in a.times().zip(&a.values) {
        if av == 0.0 {
            out.push(0.0);
            continue;
        }
        let e = ml_general(beta, 1.0, c * t.powf(beta), &cfg)?;
        out.push(av * e);
    }
    SampledPath::new(a.horizon, out).map_err(|_| Error::Divergent {
        what: "Gronwall bound",
        regime: "Mittag-Leffler factor overflows on this horizon",
    })
}

/// Solution of the Caputo problem `d^beta y = a y + f`, `y(0) = y0`:
/// `y(t) = y0 E_beta(a t^beta) + int_0^t (t-s)^(beta-1) E_{beta,beta}(a (t-s)^beta) f(s) ds`.
///
/// `beta = 1` gives the classical variation-of-constants formula.
pub fn solve_linear_fode(a: f64, y0: f64, f: &SampledPath, beta: f64) -> Result<SampledPath> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid("beta", beta, "must lie in (0, 1]"));
    }
    if !a.is_finite() || !y0.is_finite() {
        return Err(Error::invalid("a", a, "coefficients must be finite"));
    }
    let cfg = EvalConfig::default();
    let w = CellMoments::new(&MlKernel::new(beta, beta, a), f.dt(), f.n_steps())?;
    let forced = w.convolve(&f.values);
    let mut out = Vec::with_capacity(forced.len());
    for (t, conv) in f.times().zip(forced) {
        let free = if t == 0.0 {
            1.0
        } else {
            ml_general(beta, 1.0, a * t.powf(beta), &cfg)?
        };
        out.push(y0 * free + conv);
    }
    SampledPath::new(f.horizon, out)
}

/// `t^p / Gamma(p + 1)`, the fractional integral of order `p` of the constant 1.
pub fn integral_of_one(p: f64, t: f64) -> f64 {
    t.powf(p) * rgamma(p + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &[f64], b: impl Fn(usize) -> f64, from: usize) -> f64 {
        a.iter()
            .enumerate()
            .skip(from)
            .map(|(i, v)| (v - b(i)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn integral_of_constant() {
        let one = SampledPath::from_fn(2.0, 64, |_| 1.0).unwrap();
        for p in [0.3, 0.5, 1.0, 1.7] {
            let rl = frac_integral(IntegralKind::RiemannLiouville, p, &one).unwrap();
            let e = max_err(rl.values(), |i| integral_of_one(p, one.time(i)), 0);
            assert!(e < 1e-13, "p = {p}: {e}");
            let j = frac_integral(IntegralKind::Kochubei, p, &one).unwrap();
            assert!(j.values().iter().all(|v| *v == 0.0));
        }
        let j0 = frac_integral(IntegralKind::Kochubei, 0.0, &one).unwrap();
        assert!(j0.values().iter().all(|v| *v == 0.0));
        assert!(frac_integral(IntegralKind::RiemannLiouville, -0.1, &one).is_err());
    }

    #[test]
    fn half_integral_twice_is_integral() {
        let mut prev = f64::INFINITY;
        for n in [64, 128, 256] {
            let one = SampledPath::from_fn(1.0, n, |_| 1.0).unwrap();
            let half = frac_integral(IntegralKind::RiemannLiouville, 0.5, &one).unwrap();
            let twice = frac_integral(IntegralKind::RiemannLiouville, 0.5, &half).unwrap();
            let e = max_err(twice.values(), |i| one.time(i), 0);
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn derivatives_of_constant_and_linear() {
        let beta = 0.4;
        let one = SampledPath::from_fn(1.0, 400, |_| 1.0).unwrap();
        let d = rl_derivative(beta, &one).unwrap();
        assert_eq!(d.values[0], f64::INFINITY);
        let h = one.dt();
        for i in 100..400 {
            let t = i as f64 * h;
            let want = t.powf(-beta) * rgamma(1.0 - beta);
            assert!((d.values[i] - want).abs() < 1e-4, "t = {t}");
        }
        let c = caputo_derivative(beta, &one).unwrap();
        assert!(c.values().iter().all(|v| *v == 0.0));

        let lin = SampledPath::from_fn(1.0, 400, |t| t).unwrap();
        let c = caputo_derivative(beta, &lin).unwrap();
        for i in 100..=400 {
            let t = i as f64 * h;
            assert!((c.values()[i] - integral_of_one(1.0 - beta, t)).abs() < 1e-4);
        }
        assert!(rl_derivative(1.0, &one).is_err());
        assert!(caputo_derivative(0.0, &one).is_err());
    }

    #[test]
    fn laplace_of_constant_and_exponential() {
        let one = SampledPath::from_fn(10.0, 1000, |_| 1.0).unwrap();
        let grid = LaplaceGrid::new(vec![2.0, 5.0, 20.0]).unwrap();
        for v in laplace_numeric(&one, &grid) {
            assert!((v.value - 1.0 / v.lambda).abs() < 1e-8 + v.truncation_bound);
        }
        let ex = SampledPath::from_fn(10.0, 4000, |t| (-t).exp()).unwrap();
        for v in laplace_numeric(&ex, &grid) {
            let want = 1.0 / (v.lambda + 1.0);
            assert!(((v.value - want) / want).abs() < 1e-5);
        }
        assert!(LaplaceGrid::new(vec![1.0, 1.0]).is_err());
        assert!(LaplaceGrid::new(vec![-1.0]).is_err());
    }

    #[test]
    fn gronwall_classical_and_zero() {
        let a = SampledPath::from_fn(1.0, 10, |_| 2.0).unwrap();
        let g = gronwall_bound(&a, 0.7, 1.0).unwrap();
        for (t, v) in a.times().zip(g.values()) {
            assert!((v - 2.0 * (0.7 * t).exp()).abs() < 1e-13);
        }
        let zero = SampledPath::from_fn(1.0, 10, |_| 0.0).unwrap();
        assert!(gronwall_bound(&zero, 1.0, 0.5).unwrap().values().iter().all(|v| *v == 0.0));
        let dec = SampledPath::from_fn(1.0, 10, |t| 1.0 - t).unwrap();
        assert!(gronwall_bound(&dec, 1.0, 0.5).is_err());
    }

    #[test]
    fn linear_fode_reference_cases() {
        let zero = SampledPath::from_fn(2.0, 200, |_| 0.0).unwrap();
        let y = solve_linear_fode(-1.0, 1.5, &zero, 1.0).unwrap();
        for (t, v) in zero.times().zip(y.values()) {
            assert!((v - 1.5 * (-t).exp()).abs() < 1e-13);
        }
        let one = SampledPath::from_fn(2.0, 200, |_| 1.0).unwrap();
        let y = solve_linear_fode(0.0, 0.0, &one, 0.6).unwrap();
        for (t, v) in one.times().zip(y.values()) {
            assert!((v - integral_of_one(0.6, t)).abs() < 1e-13);
        }
        // y' = a y + cos t, y(0) = 1
        let a = -0.5;
        let f = SampledPath::from_fn(2.0, 400, f64::cos).unwrap();
        let y = solve_linear_fode(a, 1.0, &f, 1.0).unwrap();
        let exact = |t: f64| {
            let c = 1.0 / (1.0 + a * a);
            (a * t).exp() * (1.0 + a * c) + c * (t.sin() - a * t.cos())
        };
        for (t, v) in f.times().zip(y.values()) {
            assert!((v - exact(t)).abs() < 1e-5, "t = {t}");
        }
        assert!(solve_linear_fode(1.0, 1.0, &one, 1.5).is_err());
    }

    #[test]
    fn path_construction_checks() {
        assert!(SampledPath::new(1.0, vec![0.0]).is_err());
        assert!(SampledPath::new(1.0, vec![0.0, f64::NAN]).is_err());
        assert!(SampledPath::from_samples(&[0.0, 0.4, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        let p = SampledPath::from_samples(&[0.0, 0.5, 1.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.n_steps(), 2);
        assert_eq!(p.initial_value(), 1.0);
    }
}
