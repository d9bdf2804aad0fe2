//! Mean and variance of the time-fractional Ornstein-Uhlenbeck process
//! `d^beta X = -a X + d^gamma w'`, its long-time limit and regime.
//!
//! The process is Gaussian with mean `X0 E_beta(-a t^beta)` and variance
//! `int_0^t Phi(s)^2 ds`, where `Phi(s) = s^(beta-gamma) E_{beta,beta-gamma+1}(-a s^beta)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_order, check_square_integrable, Error, Result};
use crate::kernel::{Kernel, MlKernel};
use crate::quadrature::{integrate_from_zero, Adaptive};
use crate::special::mittag_leffler::{ml_general, EvalConfig};
use crate::special::rgamma;

/// Parameters of the fractional Ornstein-Uhlenbeck equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FouParams {
    pub x0: f64,
    /// Reversion coefficient, in units of `1 / time^beta`.
    pub a: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl FouParams {
    pub fn validate(&self) -> Result<()> {
        check_order("beta", self.beta)?;
        check_order("gamma", self.gamma)?;
        if !self.x0.is_finite() {
            return Err(Error::invalid("X0", self.x0, "must be finite"));
        }
        if !self.a.is_finite() {
            return Err(Error::invalid("a", self.a, "must be finite"));
        }
        Ok(())
    }

    fn kernel(&self) -> MlKernel {
        MlKernel::new(self.beta, self.beta - self.gamma + 1.0, -self.a)
    }
}

/// Long-time behavior of the variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum Regime {
    /// `beta - gamma <= -1/2`: no square-integrable solution.
    GeneralizedOnly,
    /// `gamma > 1/2`: `X(t)` converges in law to a centered Gaussian.
    ConvergentGaussian,
    /// `gamma = 1/2`: variance of order `ln t`.
    LogGrowth,
    /// `gamma < 1/2`: variance of order `t^exponent`, `exponent = 1 - 2 gamma`.
    PowerGrowth { exponent: f64 },
}

/// `X0 E_beta(-a t^beta)`.
pub fn fou_mean(p: &FouParams, t: f64) -> Result<f64> {
    p.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", t, "must be non-negative"));
    }
    if t == 0.0 {
        return Ok(p.x0);
    }
    if p.beta == 1.0 {
        return Ok(p.x0 * (-p.a * t).exp());
    }
    Ok(p.x0 * ml_general(p.beta, 1.0, -p.a * t.powf(p.beta), &EvalConfig::default())?)
}

fn variance_quadrature() -> Adaptive {
    Adaptive::with_tol(1e-300, 1e-11)
}

/// Geometric levels for splitting `[0, t]` down to scale `1e-6 min(1, t)`.
fn levels_for(t: f64) -> usize {
    let span = t / (1e-6 * t.min(1.0));
    (span.ln() / 4f64.ln()).ceil().max(4.0) as usize
}

fn integrate_square(k: &MlKernel, t: f64, exponent: f64) -> Result<f64> {
    let r = integrate_from_zero(
        |s| {
            let v = k.eval(s);
            v * v
        },
        t,
        2.0 * exponent,
        levels_for(t),
        &variance_quadrature(),
    );
    if !r.value.is_finite() {
        return Err(Error::NonConvergence {
            what: "variance quadrature",
            iterations: r.evaluations,
        });
    }
    Ok(r.value)
}

/// `int_0^t s^(2(beta-gamma)) E_{beta,beta-gamma+1}(-a s^beta)^2 ds`.
pub fn fou_variance(p: &FouParams, t: f64) -> Result<f64> {
    p.validate()?;
    check_square_integrable(p.beta, p.gamma)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", t, "must be non-negative"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let diff = p.beta - p.gamma;
    if p.a == 0.0 {
        return fsode_variance(p.beta, p.gamma, t);
    }
    if p.beta == 1.0 && p.gamma == 1.0 {
        // classical OU
        return Ok(-(-2.0 * p.a * t).exp_m1() / (2.0 * p.a));
    }
    integrate_square(&p.kernel(), t, diff)
}

/// Variance of the driftless solution `X = I^(beta-gamma+1) w'`:
/// `t^r / (r Gamma(1+beta-gamma)^2)` with `r = 2(beta-gamma)+1`.
pub fn fsode_variance(beta: f64, gamma: f64, t: f64) -> Result<f64> {
    check_order("beta", beta)?;
    check_order("gamma", gamma)?;
    check_square_integrable(beta, gamma)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", t, "must be non-negative"));
    }
    let r = 2.0 * (beta - gamma) + 1.0;
    let g = rgamma(1.0 + beta - gamma);
    Ok(t.powf(r) * g * g / r)
}

/// Number of asymptotic terms used for the variance tail.
const TAIL_TERMS: usize = 8;
/// The tail starts where `a s^beta` reaches this value.
const TAIL_ARGUMENT: f64 = 400.0;

/// `lim_{t -> inf} fou_variance(t)`, finite only for `gamma > 1/2`.
///
/// The integral is computed by quadrature up to `s*` with `a s*^beta = 400`
/// and beyond it from the large-argument expansion
/// `Phi(s) ~ sum_k (-1)^(k+1) a^-k s^(beta-gamma-k beta) / Gamma(1-gamma+beta-k beta)`,
/// squared and integrated term by term.
pub fn fou_limit_variance(a: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_order("beta", beta)?;
    check_order("gamma", gamma)?;
    check_square_integrable(beta, gamma)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid("a", a, "limit requires a > 0"));
    }
    if gamma <= 0.5 {
        return Err(Error::Divergent {
            what: "limiting variance",
            regime: if gamma == 0.5 {
                "gamma = 1/2, variance grows like ln t"
            } else {
                "gamma < 1/2, variance grows like t^(1 - 2 gamma)"
            },
        });
    }
    if beta == 1.0 && gamma == 1.0 {
        return Ok(0.5 / a);
    }
    let diff = beta - gamma;
    let cutoff = (TAIL_ARGUMENT / a).powf(1.0 / beta);
    let params = FouParams {
        x0: 0.0,
        a,
        beta,
        gamma,
    };
    let body = integrate_square(&params.kernel(), cutoff, diff)?;
    let coeff: Vec<f64> = (1..=TAIL_TERMS)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * a.powi(-(k as i32)) * rgamma(1.0 - gamma + beta - k as f64 * beta)
        })
        .collect();
    let mut tail = 0.0;
    for (j, cj) in coeff.iter().enumerate() {
        for (k, ck) in coeff.iter().enumerate() {
            let e = 2.0 * diff - (j + k + 2) as f64 * beta;
            tail += cj * ck * cutoff.powf(e + 1.0) / (-e - 1.0);
        }
    }
    Ok(body + tail)
}

/// Long-time regime; the `gamma = 1/2` comparison is exact.
pub fn regime_classify(beta: f64, gamma: f64) -> Result<Regime> {
    check_order("beta", beta)?;
    check_order("gamma", gamma)?;
    Ok(if beta - gamma <= -0.5 {
        Regime::GeneralizedOnly
    } else if gamma > 0.5 {
        Regime::ConvergentGaussian
    } else if gamma == 0.5 {
        Regime::LogGrowth
    } else {
        Regime::PowerGrowth {
            exponent: 1.0 - 2.0 * gamma,
        }
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, beta: f64, gamma: f64) -> FouParams {
        FouParams {
            x0: 1.5,
            a,
            beta,
            gamma,
        }
    }

    #[test]
    fn mean_special_cases() {
        assert_eq!(fou_mean(&params(2.0, 0.7, 0.5), 0.0).unwrap(), 1.5);
        let m = fou_mean(&params(2.0, 1.0, 0.5), 0.8).unwrap();
        assert!((m - 1.5 * (-1.6f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn variance_without_reversion_is_fsode() {
        let p = params(0.0, 0.9, 0.2);
        assert_eq!(fou_variance(&p, 2.0).unwrap(), fsode_variance(0.9, 0.2, 2.0).unwrap());
        // 2^2.4 / (2.4 Gamma(1.7)^2), mpmath
        let want = 2.663_656_734_084_971;
        assert!((fsode_variance(0.9, 0.2, 2.0).unwrap() - want).abs() < 1e-13);
        assert!((fsode_variance(0.6, 0.6, 3.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn variance_starts_at_zero() {
        assert_eq!(fou_variance(&params(1.0, 0.8, 0.6), 0.0).unwrap(), 0.0);
        assert_eq!(fsode_variance(0.8, 0.6, 0.0).unwrap(), 0.0);
        assert!(fou_variance(&params(1.0, 0.8, 0.6), -1.0).is_err());
    }

    #[test]
    fn classical_ou_variance() {
        let v = fou_variance(&params(0.7, 1.0, 1.0), 2.0).unwrap();
        assert!((v - (1.0 - (-2.8f64).exp()) / 1.4).abs() < 1e-15);
        // the quadrature path agrees with the closed form
        let k = params(0.7, 1.0, 1.0).kernel();
        let q = integrate_square(&k, 2.0, 0.0).unwrap();
        assert!((q - v).abs() < 1e-12);
    }

    #[test]
    fn variance_reference_value() {
        // int_0^1 s^0.4 E_{0.8,1.2}(-s^0.8)^2 ds, mpmath quad
        let v = fou_variance(&params(1.0, 0.8, 0.6), 1.0).unwrap();
        let want = 0.319_802_452_381_095_2;
        assert!((v - want).abs() < 1e-9 * want, "{v}");
    }

    #[test]
    fn limit_variance_cases() {
        assert_eq!(fou_limit_variance(1.0, 1.0, 1.0).unwrap(), 0.5);
        assert!(matches!(fou_limit_variance(1.0, 0.8, 0.5), Err(Error::Divergent { .. })));
        assert!(matches!(
            fou_limit_variance(1.0, 0.3, 0.9),
            Err(Error::NotSquareIntegrable { .. })
        ));
        // frequency-domain (Plancherel) integral of the kernel transform, mpmath
        let v = fou_limit_variance(1.0, 0.9, 0.7).unwrap();
        let want = 0.807_739_100_990_132_8;
        assert!((v - want).abs() < 1e-7 * want, "{v}");
    }

    #[test]
    fn regimes() {
        assert_eq!(regime_classify(0.3, 0.9).unwrap(), Regime::GeneralizedOnly);
        assert_eq!(regime_classify(0.8, 0.5).unwrap(), Regime::LogGrowth);
        assert_eq!(regime_classify(0.8, 0.9).unwrap(), Regime::ConvergentGaussian);
        match regime_classify(0.8, 0.3).unwrap() {
            Regime::PowerGrowth { exponent } => assert!((exponent - 0.4).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }
}
