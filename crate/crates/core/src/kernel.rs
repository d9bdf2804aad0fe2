//! Convolution kernels and product-integration weights on a uniform grid.
//!
//! A convolution `int_0^{t_n} k(t_n - s) f(s) ds` is approximated by replacing
//! `f` with its piecewise-linear interpolant and integrating the kernel exactly
//! (or to near machine precision) against each hat function. With the lag
//! cells `[m h, (m+1) h]` and
//!
//! ```text
//! M0_m = int_cell k(u) du,    P_m = int_cell k(u) (u - m h) / h du,    Q_m = M0_m - P_m
//! ```
//!
//! the rule reads `sum_{m=0}^{n-1} (f_{n-m-1} P_m + f_{n-m} Q_m)`. The first
//! cell carries the kernel singularity and uses closed forms where available,
//! otherwise dyadic subcells with the leading power behavior on the innermost
//! piece. All other cells use 16-point Gauss-Legendre, which is accurate to
//! rounding there because the nearest singularity sits at least one cell away.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss16, gl16};
use crate::special::mittag_leffler::{y_general, EvalConfig};
use crate::special::rgamma;

/// A kernel `k(u)`, `u > 0`, with at most a power singularity at the origin.
pub trait Kernel: Sync {
    fn eval(&self, u: f64) -> f64;

    /// `(c, e)` such that `k(u) ~ c u^e` as `u -> 0+`.
    fn leading(&self) -> (f64, f64);

    /// Exact `(int_0^h k, int_0^h k(u) u / h du)` when a closed form exists.
    fn first_cell(&self, _h: f64) -> Option<(f64, f64)> {
        None
    }
}

/// `scale * u^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerKernel {
    pub scale: f64,
    pub exponent: f64,
}

impl PowerKernel {
    /// Kernel of the Riemann-Liouville integral of order `p`: `u^(p-1) / Gamma(p)`.
    pub fn fractional_integral(p: f64) -> Self {
        PowerKernel {
            scale: rgamma(p),
            exponent: p - 1.0,
        }
    }
}

impl Kernel for PowerKernel {
    fn eval(&self, u: f64) -> f64 {
        if self.exponent == 0.0 {
            self.scale
        } else {
            self.scale * u.powf(self.exponent)
        }
    }

    fn leading(&self) -> (f64, f64) {
        (self.scale, self.exponent)
    }

    fn first_cell(&self, h: f64) -> Option<(f64, f64)> {
        let e = self.exponent;
        let base = self.scale * h.powf(e + 1.0);
        Some((base / (e + 1.0), base / (e + 2.0)))
    }
}

/// `y_{beta,rho}(u) = u^(rho-1) E_{beta,rho}(a u^beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlKernel {
    pub beta: f64,
    pub rho: f64,
    pub a: f64,
    pub cfg: EvalConfig,
}

impl MlKernel {
    pub fn new(beta: f64, rho: f64, a: f64) -> Self {
        MlKernel {
            beta,
            rho,
            a,
            cfg: EvalConfig::default(),
        }
    }

    fn y(&self, rho: f64, u: f64) -> f64 {
        y_general(self.beta, rho, self.a, u, &self.cfg).unwrap_or(f64::NAN)
    }
}

impl Kernel for MlKernel {
    fn eval(&self, u: f64) -> f64 {
        self.y(self.rho, u)
    }

    fn leading(&self) -> (f64, f64) {
        (rgamma(self.rho), self.rho - 1.0)
    }

    // int_0^u y_{beta,rho} = y_{beta,rho+1}(u), applied twice
    fn first_cell(&self, h: f64) -> Option<(f64, f64)> {
        let k1 = self.y(self.rho + 1.0, h);
        let k2 = self.y(self.rho + 2.0, h);
        Some((k1, k1 - k2 / h))
    }
}

/// Pointwise square of another kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squared<K>(pub K);

impl<K: Kernel> Kernel for Squared<K> {
    fn eval(&self, u: f64) -> f64 {
        let v = self.0.eval(u);
        v * v
    }

    fn leading(&self) -> (f64, f64) {
        let (c, e) = self.0.leading();
        (c * c, 2.0 * e)
    }
}

/// Number of dyadic levels used on the singular first cell.
pub(crate) const GRADED_LEVELS: usize = 48;

/// `(int_0^h k w, int_0^h k(u) w(u) u / h du)` by dyadic subcells
/// `[h 2^-(i+1), h 2^-i]`; the leading power law covers `[0, h 2^-L]`.
///
/// `w` is a bounded weight, smooth on `(0, h]`, that is replaced by `w(0+)`
/// on the innermost piece.
pub(crate) fn graded_first_cell<K: Kernel + ?Sized>(
    k: &K,
    h: f64,
    w: impl Fn(f64) -> f64,
    w0: f64,
) -> (f64, f64) {
    let mut m0 = 0.0;
    let mut p = 0.0;
    let mut hi = h;
    for _ in 0..GRADED_LEVELS {
        let lo = 0.5 * hi;
        m0 += gauss16(|u| k.eval(u) * w(u), lo, hi);
        p += gauss16(|u| k.eval(u) * w(u) * u / h, lo, hi);
        hi = lo;
    }
    let (c, e) = k.leading();
    m0 += w0 * c * hi.powf(e + 1.0) / (e + 1.0);
    p += w0 * c * hi.powf(e + 2.0) / ((e + 2.0) * h);
    (m0, p)
}

/// Product-integration moments of a kernel on `n` lag cells of width `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMoments {
    pub h: f64,
    /// `int_cell k`.
    pub m0: Vec<f64>,
    /// `int_cell k(u) (u - m h) / h du`, the weight of the older node.
    pub p: Vec<f64>,
}

impl CellMoments {
    pub fn new<K: Kernel + ?Sized>(k: &K, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || n == 0 {
            return Err(Error::invalid("h", h, "need a positive step and n >= 1"));
        }
        let first = k
            .first_cell(h)
            .unwrap_or_else(|| graded_first_cell(k, h, |_| 1.0, 1.0));
        let (xs, ws) = gl16();
        let rest: Vec<(f64, f64)> = (1..n)
            .into_par_iter()
            .map(|m| {
                let lo = m as f64 * h;
                let mut m0 = 0.0;
                let mut p = 0.0;
                for (x, w) in xs.iter().zip(ws) {
                    let frac = 0.5 * (1.0 + x);
                    let kv = w * k.eval(lo + frac * h);
                    m0 += kv;
                    p += kv * frac;
                }
                (0.5 * h * m0, 0.5 * h * p)
            })
            .collect();
        let mut m0 = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        m0.push(first.0);
        p.push(first.1);
        for (a, b) in rest {
            m0.push(a);
            p.push(b);
        }
        if m0.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence {
                what: "kernel evaluation for product-integration weights",
                iterations: n,
            });
        }
        Ok(CellMoments { h, m0, p })
    }

    pub fn len(&self) -> usize {
        self.m0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m0.is_empty()
    }

    /// Weight of the newer node of lag cell `m`.
    pub fn q(&self, m: usize) -> f64 {
        self.m0[m] - self.p[m]
    }

    /// Convolution at node `i` of samples `f` (needs `f.len() > i`, `i <= len()`).
    pub fn convolve_at(&self, f: &[f64], i: usize) -> f64 {
        let mut acc = 0.0;
        for m in 0..i {
            acc += f[i - m - 1] * self.p[m] + f[i - m] * (self.m0[m] - self.p[m]);
        }
        acc
    }

    /// Convolution at every node; node 0 is 0.
    pub fn convolve(&self, f: &[f64]) -> Vec<f64> {
        let n = (f.len() - 1).min(self.len());
        (0..=n)
            .into_par_iter()
            .map(|i| self.convolve_at(f, i))
            .collect()
    }

    /// Time-marches `v = forcing + lambda * (k * v)`, implicit in the newest node.
    ///
    /// Stops early, reporting the node index, once `|v|` exceeds `cap` or the
    /// implicit step becomes singular (`1 - lambda Q_0 <= 0`).
    pub fn solve_volterra(&self, forcing: &[f64], lambda: f64, cap: f64) -> VolterraSolution {
        let n = (forcing.len() - 1).min(self.len());
        let diag = 1.0 - lambda * self.q(0);
        let mut v = Vec::with_capacity(n + 1);
        v.push(forcing[0]);
        if diag <= 0.0 {
            return VolterraSolution {
                values: v,
                blow_up_at: Some(1),
            };
        }
        for i in 1..=n {
            let mut acc = forcing[i];
            let mut hist = v[i - 1] * self.p[0];
            for m in 1..i {
                hist += v[i - m - 1] * self.p[m] + v[i - m] * self.q(m);
            }
            acc += lambda * hist;
            let next = acc / diag;
            if !next.is_finite() || next.abs() > cap {
                return VolterraSolution {
                    values: v,
                    blow_up_at: Some(i),
                };
            }
            v.push(next);
        }
        VolterraSolution {
            values: v,
            blow_up_at: None,
        }
    }
}

/// Output of [`CellMoments::solve_volterra`].
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    /// Values up to (excluding) the blow-up node, if any.
    pub values: Vec<f64>,
    pub blow_up_at: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn power_kernel_first_cell_matches_graded() {
        let k = PowerKernel {
            scale: 0.7,
            exponent: -0.35,
        };
        let exact = k.first_cell(0.1).unwrap();
        let g = graded_first_cell(&k, 0.1, |_| 1.0, 1.0);
        assert!((exact.0 - g.0).abs() < 1e-14);
        assert!((exact.1 - g.1).abs() < 1e-14);
    }

    #[test]
    fn ml_kernel_first_cell_matches_graded() {
        for &(b, r, a) in &[(0.6, 0.6, -1.3), (0.8, 1.2, 0.5), (0.3, 0.8, -4.0)] {
            let k = MlKernel::new(b, r, a);
            let exact = k.first_cell(0.05).unwrap();
            let g = graded_first_cell(&k, 0.05, |_| 1.0, 1.0);
            assert!((exact.0 - g.0).abs() < 1e-12 * exact.0.abs(), "{exact:?} {g:?}");
            assert!((exact.1 - g.1).abs() < 1e-12 * exact.1.abs(), "{exact:?} {g:?}");
        }
    }

    #[test]
    fn convolution_of_constant_is_exact() {
        // int_0^t (t-s)^(p-1)/Gamma(p) ds = t^p / Gamma(p+1)
        let p = 0.4;
        let n = 50;
        let h = 0.02;
        let w = CellMoments::new(&PowerKernel::fractional_integral(p), h, n).unwrap();
        let out = w.convolve(&vec![1.0; n + 1]);
        for (i, v) in out.iter().enumerate() {
            let t = i as f64 * h;
            let want = t.powf(p) / gamma(p + 1.0).unwrap();
            assert!((v - want).abs() < 1e-14, "node {i}");
        }
    }

    #[test]
    fn volterra_exponential() {
        // v = 1 + lambda int_0^t v  =>  v = exp(lambda t); trapezoid error O(h^2)
        let lambda = 0.8;
        let h = 1e-3;
        let n = 1000;
        let w = CellMoments::new(&PowerKernel { scale: 1.0, exponent: 0.0 }, h, n).unwrap();
        let sol = w.solve_volterra(&vec![1.0; n + 1], lambda, 1e30);
        assert!(sol.blow_up_at.is_none());
        let end = *sol.values.last().unwrap();
        assert!((end - lambda.exp()).abs() < 1e-6);
    }

    #[test]
    fn volterra_blow_up_is_flagged() {
        let w = CellMoments::new(&PowerKernel { scale: 1.0, exponent: 0.0 }, 0.1, 400).unwrap();
        let sol = w.solve_volterra(&vec![1.0; 401], 5.0, 1e10);
        assert!(sol.blow_up_at.is_some());
        let w = CellMoments::new(&PowerKernel { scale: 1.0, exponent: 0.0 }, 1.0, 4).unwrap();
        let sol = w.solve_volterra(&[1.0; 5], 3.0, 1e30);
        assert_eq!(sol.blow_up_at, Some(1));
    }
}
