//! Well-posedness of the fractional stochastic heat-type equation
//! `d^beta u = -b Lambda^alpha u + sigma Lambda^nu u d^gamma W'` in L2, mode by mode.
//!
//! After a Fourier transform each wavenumber `|y|` evolves as a fractional
//! geometric Brownian motion with reversion `a = b |y|^alpha` and noise level
//! `sigma |y|^nu`, so its second moment solves a linear Volterra equation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_order, check_square_integrable, Error, Result};
use crate::fou::fou_limit_variance;
use crate::frac_calculus::SampledPath;
use crate::kernel::{CellMoments, MlKernel, Squared};
use crate::special::mittag_leffler::{ml_general, EvalConfig};
use crate::volterra::GridSpec;

/// Coefficients of the equation; the spatial dimension never enters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpdeParams {
    pub beta: f64,
    pub gamma: f64,
    /// Order of the dissipative operator.
    pub alpha: f64,
    /// Order of the operator multiplying the noise.
    pub nu: f64,
    pub b: f64,
    pub sigma: f64,
}

impl SpdeParams {
    pub fn validate(&self) -> Result<()> {
        check_order("beta", self.beta)?;
        check_order("gamma", self.gamma)?;
        for (name, v) in [("alpha", self.alpha), ("nu", self.nu)] {
            if !(v > 0.0 && v <= 2.0) {
                return Err(Error::invalid(name, v, "operator order must lie in (0, 2]"));
            }
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::invalid("b", self.b, "must be positive"));
        }
        if !self.sigma.is_finite() {
            return Err(Error::invalid("sigma", self.sigma, "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictTag {
    WellPosed,
    NotWellPosed,
    WellPosedAtThreshold,
    Unknown,
    NoClassicalSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub tag: VerdictTag,
    /// The branch of the classification that produced the tag.
    pub reason: String,
}

fn verdict(tag: VerdictTag, reason: impl Into<String>) -> Verdict {
    Verdict {
        tag,
        reason: reason.into(),
    }
}

/// `(gamma - 1/2) / beta`, the loss of dissipation caused by the noise order.
fn epsilon(beta: f64, gamma: f64) -> f64 {
    (gamma - 0.5) / beta
}

/// `sigma_inf^2(1, beta, gamma)^(1 / (2 - 2 eps))`; the borderline case
/// `alpha = nu / (1 - eps)` is well posed when `b >= coefficient * |sigma|^(1/(1-eps))`.
pub fn threshold_coefficient(beta: f64, gamma: f64) -> Result<f64> {
    check_order("beta", beta)?;
    check_order("gamma", gamma)?;
    let eps = epsilon(beta, gamma);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(
            "gamma",
            gamma,
            "threshold needs (gamma - 1/2) / beta in (0, 1)",
        ));
    }
    Ok(fou_limit_variance(1.0, beta, gamma)?.powf(1.0 / (2.0 - 2.0 * eps)))
}

/// Classifies L2 well-posedness. Equalities (`gamma = 1/2`,
/// `alpha = nu / (1 - eps)`) are tested exactly.
pub fn classify(p: &SpdeParams) -> Result<Verdict> {
    p.validate()?;
    use VerdictTag::*;
    if p.beta - p.gamma <= -0.5 {
        return Ok(verdict(
            NoClassicalSolution,
            "beta - gamma <= -1/2: the mode kernel is not square integrable",
        ));
    }
    if p.gamma < 0.5 {
        return Ok(if p.alpha >= p.nu {
            verdict(WellPosed, "gamma < 1/2 and alpha >= nu")
        } else {
            verdict(NotWellPosed, "gamma < 1/2 requires alpha >= nu (necessary and sufficient)")
        });
    }
    if p.gamma == 0.5 {
        return Ok(if p.alpha > p.nu {
            verdict(WellPosed, "gamma = 1/2 and alpha > nu")
        } else {
            verdict(NotWellPosed, "gamma = 1/2 requires alpha > nu (necessary and sufficient)")
        });
    }
    let eps = epsilon(p.beta, p.gamma);
    if eps >= 1.0 {
        return Ok(verdict(
            Unknown,
            "gamma > 1/2 with (gamma - 1/2) / beta >= 1: no sufficient condition applies",
        ));
    }
    let critical = p.nu / (1.0 - eps);
    if p.alpha > critical {
        return Ok(verdict(WellPosed, "gamma > 1/2 and alpha > nu / (1 - eps)"));
    }
    if p.alpha < critical {
        return Ok(verdict(
            Unknown,
            "gamma > 1/2 and alpha < nu / (1 - eps): a generalized chaos solution is unlikely, no negative result is known",
        ));
    }
    let needed = threshold_coefficient(p.beta, p.gamma)? * p.sigma.abs().powf(1.0 / (1.0 - eps));
    Ok(if p.b >= needed {
        verdict(
            WellPosedAtThreshold,
            "alpha = nu / (1 - eps) and b >= sigma_inf^2^(1/(2-2 eps)) |sigma|^(1/(1-eps))",
        )
    } else {
        verdict(
            Unknown,
            "alpha = nu / (1 - eps) below the sufficient bound on b",
        )
    })
}

/// Blow-up threshold for the second-moment march.
pub const BLOW_UP_CAP: f64 = 1e30;

/// Second moment of one Fourier mode, normalized to 1 at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMoment {
    /// Values on the grid, up to the blow-up node when truncated.
    pub values: Vec<f64>,
    pub grid: GridSpec,
    /// First node at which the march exceeded the cap, if any.
    pub truncated_at: Option<usize>,
}

impl ModeMoment {
    /// The moment as a sampled path (only when the march reached the horizon).
    pub fn path(&self) -> Result<SampledPath> {
        if self.truncated_at.is_some() {
            return Err(Error::Divergent {
                what: "mode second moment",
                regime: "overflow before the horizon",
            });
        }
        SampledPath::new(self.grid.horizon, self.values.clone())
    }

    /// `sup_t V(t) / V(0)`, infinite after blow-up.
    pub fn sup_ratio(&self) -> f64 {
        if self.truncated_at.is_some() {
            return f64::INFINITY;
        }
        self.values.iter().cloned().fold(0.0, f64::max) / self.values[0]
    }

    /// `V(T) / V(0)`, infinite after blow-up.
    pub fn final_ratio(&self) -> f64 {
        match self.truncated_at {
            Some(_) => f64::INFINITY,
            None => self.values[self.values.len() - 1] / self.values[0],
        }
    }
}

/// Solves `V = E0 + sigma^2 |y|^(2 nu) int_0^t Phi_y(t-s)^2 V(s) ds` with
/// `E0(t) = E_beta(-b |y|^alpha t^beta)^2` and
/// `Phi_y(u) = u^(beta-gamma) E_{beta,beta-gamma+1}(-b |y|^alpha u^beta)`.
pub fn second_moment_volterra(p: &SpdeParams, y_mag: f64, grid: GridSpec) -> Result<ModeMoment> {
    p.validate()?;
    check_square_integrable(p.beta, p.gamma)?;
    grid.validate()?;
    if !(y_mag > 0.0) || !y_mag.is_finite() {
        return Err(Error::invalid("y", y_mag, "wavenumber must be positive"));
    }
    let a = p.b * y_mag.powf(p.alpha);
    let cfg = EvalConfig::default();
    let forcing: Vec<f64> = (0..=grid.n_steps)
        .map(|i| {
            let t = grid.time(i);
            ml_general(p.beta, 1.0, -a * t.powf(p.beta), &cfg).map(|e| e * e)
        })
        .collect::<Result<_>>()?;
    let lambda = p.sigma * p.sigma * y_mag.powf(2.0 * p.nu);
    if lambda == 0.0 {
        return Ok(ModeMoment {
            values: forcing,
            grid,
            truncated_at: None,
        });
    }
    let kernel = Squared(MlKernel::new(p.beta, p.beta - p.gamma + 1.0, -a));
    let w = CellMoments::new(&kernel, grid.dt(), grid.n_steps)?;
    let sol = w.solve_volterra(&forcing, lambda, BLOW_UP_CAP);
    Ok(ModeMoment {
        values: sol.values,
        grid,
        truncated_at: sol.blow_up_at,
    })
}

/// Growth of each mode over `grid`: `(|y|, sup_t V(t) / V(0))`.
///
/// The supremum rather than the final value is reported so that strongly
/// damped modes do not drive the spread across wavenumbers.
pub fn growth_probe(p: &SpdeParams, y_list: &[f64], grid: GridSpec) -> Result<Vec<(f64, f64)>> {
    y_list
        .par_iter()
        .map(|&y| second_moment_volterra(p, y, grid).map(|m| (y, m.sup_ratio())))
        .collect()
}
