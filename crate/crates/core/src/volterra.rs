//! Seeded Monte Carlo for Brownian motion and Gaussian Volterra processes
//! `V(t) = int_0^t k(t - s) dW(s)`.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::GbmParams;
use crate::error::{check_order, check_square_integrable, Error, Result};
use crate::fou::FouParams;
use crate::frac_calculus::SampledPath;
use crate::kernel::{graded_first_cell, CellMoments, Kernel, MlKernel, PowerKernel, Squared};
use crate::quadrature::{gauss16, gl16};
use crate::rng::PathNoise;
use crate::special::mittag_leffler::{ml_general, EvalConfig};
use crate::special::rgamma;

/// Uniform time grid `t_i = i T / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub horizon: f64,
    pub n_steps: usize,
}

impl GridSpec {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        let g = GridSpec { horizon, n_steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("T", self.horizon, "horizon must be positive"));
        }
        if self.n_steps < 2 {
            return Err(Error::invalid("n_steps", self.n_steps as f64, "need at least 2 steps"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }
}

/// Convolution kernel of a Gaussian Volterra process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `scale * (t - s)^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `(t-s)^(beta-gamma) E_{beta,beta-gamma+1}(-a (t-s)^beta)`, the
    /// fractional Ornstein-Uhlenbeck kernel.
    Fou { a: f64, beta: f64, gamma: f64 },
}

impl KernelSpec {
    /// `K = 1`: Brownian motion itself.
    pub fn brownian() -> Self {
        KernelSpec::Power {
            scale: 1.0,
            exponent: 0.0,
        }
    }

    /// Kernel of the fractional derivative of order `gamma` of Brownian motion.
    pub fn fractional_noise(gamma: f64) -> Self {
        KernelSpec::Power {
            scale: rgamma(1.0 - gamma),
            exponent: -gamma,
        }
    }

    /// Kernel of the solution of `d^beta X = d^gamma w'` with `X(0) = 0`.
    pub fn fsode(beta: f64, gamma: f64) -> Self {
        KernelSpec::Power {
            scale: rgamma(1.0 + beta - gamma),
            exponent: beta - gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Power { scale, exponent } => {
                if !scale.is_finite() {
                    return Err(Error::invalid("scale", scale, "must be finite"));
                }
                if !(exponent > -0.5) || !exponent.is_finite() {
                    return Err(Error::invalid(
                        "exponent",
                        exponent,
                        "kernel must be square integrable (exponent > -1/2)",
                    ));
                }
                Ok(())
            }
            KernelSpec::Fou { a, beta, gamma } => {
                check_order("beta", beta)?;
                check_order("gamma", gamma)?;
                check_square_integrable(beta, gamma)?;
                if !a.is_finite() {
                    return Err(Error::invalid("a", a, "must be finite"));
                }
                Ok(())
            }
        }
    }

    fn as_kernel(&self) -> AnyKernel {
        match *self {
            KernelSpec::Power { scale, exponent } => AnyKernel::Power(PowerKernel { scale, exponent }),
            KernelSpec::Fou { a, beta, gamma } => {
                AnyKernel::Ml(MlKernel::new(beta, beta - gamma + 1.0, -a))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum AnyKernel {
    Power(PowerKernel),
    Ml(MlKernel),
}

impl Kernel for AnyKernel {
    fn eval(&self, u: f64) -> f64 {
        match self {
            AnyKernel::Power(k) => k.eval(u),
            AnyKernel::Ml(k) => k.eval(u),
        }
    }

    fn leading(&self) -> (f64, f64) {
        match self {
            AnyKernel::Power(k) => k.leading(),
            AnyKernel::Ml(k) => k.leading(),
        }
    }

    fn first_cell(&self, h: f64) -> Option<(f64, f64)> {
        match self {
            AnyKernel::Power(k) => k.first_cell(h),
            AnyKernel::Ml(k) => k.first_cell(h),
        }
    }
}

/// How a Volterra ensemble is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    /// `V(t_i) = sum_j kappa_ij dW_j` with cell-averaged kernel weights.
    IncrementQuadrature,
    /// Exact-in-law sampling through a Cholesky factor of the node covariance.
    CovarianceFactor,
}

/// `n_paths` realizations on a grid, stored row-major (one row per path).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub grid: GridSpec,
    pub n_paths: usize,
    pub seed: u64,
    data: Vec<f64>,
}

impl PathEnsemble {
    pub fn from_rows(grid: GridSpec, seed: u64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = grid.n_steps + 1;
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::MalformedPath("every path needs n_steps + 1 values"));
        }
        let n_paths = rows.len();
        Ok(PathEnsemble {
            grid,
            n_paths,
            seed,
            data: rows.concat(),
        })
    }

    pub fn width(&self) -> usize {
        self.grid.n_steps + 1
    }

    pub fn path(&self, p: usize) -> &[f64] {
        let w = self.width();
        &self.data[p * w..(p + 1) * w]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.width())
    }

    /// Values of all paths at node `i`.
    pub fn node(&self, i: usize) -> Vec<f64> {
        self.paths().map(|p| p[i]).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn sampled_path(&self, p: usize) -> Result<SampledPath> {
        SampledPath::new(self.grid.horizon, self.path(p).to_vec())
    }
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", 0.0, "need at least one path"));
    }
    Ok(())
}

/// Draws the increments `dW_j` and auxiliary normals of one path.
fn path_noise(seed: u64, path: usize, n: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut noise = PathNoise::new(seed, path as u64);
    let sqrt_h = h.sqrt();
    let mut dw = Vec::with_capacity(n);
    let mut aux = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = noise.next_pair();
        dw.push(sqrt_h * a);
        aux.push(b);
    }
    (dw, aux)
}

/// Standard Brownian motion paths.
pub fn simulate_bm(grid: GridSpec, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    grid.validate()?;
    check_paths(n_paths)?;
    let n = grid.n_steps;
    let rows: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let (dw, _) = path_noise(seed, p, n, grid.dt());
            let mut row = Vec::with_capacity(n + 1);
            let mut w = 0.0;
            row.push(0.0);
            for d in dw {
                w += d;
                row.push(w);
            }
            row
        })
        .collect();
    PathEnsemble::from_rows(grid, seed, rows)
}

/// Per-lag weights for increment quadrature.
///
/// Lags `m >= 1` use the cell average `M0_m / h`. On the diagonal cell the
/// stochastic integral is drawn jointly with `dW`: its covariance with `dW` is
/// `M0_0` and its variance `int_0^h k^2`, so
/// `D = (M0_0 / h) dW + sqrt(int_0^h k^2 - M0_0^2 / h) N` is exact in law.
struct IncrementWeights {
    kappa: Vec<f64>,
    diagonal_residual: f64,
}

impl IncrementWeights {
    fn new(kernel: &AnyKernel, grid: &GridSpec) -> Result<Self> {
        let h = grid.dt();
        let w = CellMoments::new(kernel, h, grid.n_steps)?;
        let square = graded_first_cell(&Squared(*kernel), h, |_| 1.0, 1.0).0;
        let excess = square - w.m0[0] * w.m0[0] / h;
        // below rounding level the kernel is constant on the cell
        let resid = if excess > 1e-12 * square { excess.sqrt() } else { 0.0 };
        if !resid.is_finite() {
            return Err(Error::NonConvergence {
                what: "diagonal kernel moment",
                iterations: crate::kernel::GRADED_LEVELS,
            });
        }
        Ok(IncrementWeights {
            kappa: w.m0.iter().map(|m| m / h).collect(),
            diagonal_residual: resid,
        })
    }

    /// Stochastic convolution at node `i` with multipliers `x_j` on `dW_j`.
    fn node(&self, i: usize, dw: &[f64], aux: &[f64], x: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..i {
            acc += self.kappa[i - 1 - j] * x(j) * dw[j];
        }
        acc + self.diagonal_residual * x(i - 1) * aux[i - 1]
    }
}

/// Gaussian Volterra paths `V(t_i) = int_0^{t_i} K(t_i - s) dW(s)`.
pub fn simulate_volterra(
    kernel: KernelSpec,
    grid: GridSpec,
    n_paths: usize,
    seed: u64,
    method: SamplingMethod,
) -> Result<PathEnsemble> {
    kernel.validate()?;
    grid.validate()?;
    check_paths(n_paths)?;
    let k = kernel.as_kernel();
    let n = grid.n_steps;
    let h = grid.dt();
    let rows: Vec<Vec<f64>> = match method {
        SamplingMethod::IncrementQuadrature => {
            let w = IncrementWeights::new(&k, &grid)?;
            (0..n_paths)
                .into_par_iter()
                .map(|p| {
                    let (dw, aux) = path_noise(seed, p, n, h);
                    let mut row = Vec::with_capacity(n + 1);
                    row.push(0.0);
                    for i in 1..=n {
                        row.push(w.node(i, &dw, &aux, |_| 1.0));
                    }
                    row
                })
                .collect()
        }
        SamplingMethod::CovarianceFactor => {
            let factor = factorize_covariance(covariance_matrix(kernel, grid)?)?;
            let l = factor.l();
            (0..n_paths)
                .into_par_iter()
                .map(|p| {
                    let (dw, _) = path_noise(seed, p, n, h);
                    let z: Vec<f64> = dw.iter().map(|d| d / h.sqrt()).collect();
                    let mut row = Vec::with_capacity(n + 1);
                    row.push(0.0);
                    for i in 0..n {
                        let mut acc = 0.0;
                        for (j, zj) in z.iter().enumerate().take(i + 1) {
                            acc += l[(i, j)] * zj;
                        }
                        row.push(acc);
                    }
                    row
                })
                .collect()
        }
    };
    PathEnsemble::from_rows(grid, seed, rows)
}

/// Barycentric Lagrange basis on the Gauss-Legendre nodes of `[0, h]`.
fn lagrange_basis(nodes: &[f64], bary: &[f64], v: f64) -> Vec<f64> {
    if let Some(q) = nodes.iter().position(|&x| x == v) {
        let mut out = vec![0.0; nodes.len()];
        out[q] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(x, b)| b / (v - x)).collect();
    let total: f64 = terms.iter().sum();
    terms.iter().map(|t| t / total).collect()
}

/// Covariance `C(t_i, t_j) = int_0^{min} K(t_i - s) K(t_j - s) ds` of nodes `1..=n`.
///
/// Writing `d = i - j`, the entry is `sum_{l < j} int_{cell l} k(d h + v) k(v) dv`.
/// Off the first cell both factors are smooth and 16-point Gauss-Legendre is
/// used with kernel values cached per cell. On the first cell `k(v)` is
/// singular while `k(d h + v)` (`d >= 1`) is smooth, so the latter is
/// interpolated on the same 16 nodes and integrated against `k` with
/// product weights computed on dyadic subcells.
pub fn covariance_matrix(kernel: KernelSpec, grid: GridSpec) -> Result<DMatrix<f64>> {
    kernel.validate()?;
    grid.validate()?;
    let k = kernel.as_kernel();
    let n = grid.n_steps;
    let h = grid.dt();
    let (xs, ws) = gl16();
    let q = xs.len();
    let cell_nodes: Vec<f64> = xs.iter().map(|x| 0.5 * h * (1.0 + x)).collect();
    let values: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|c| cell_nodes.iter().map(|v| k.eval(c as f64 * h + v)).collect())
        .collect();
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence {
            what: "kernel evaluation for covariance entries",
            iterations: n * q,
        });
    }
    // barycentric weights of the interpolation nodes
    let bary: Vec<f64> = (0..q)
        .map(|a| {
            let prod: f64 = (0..q)
                .filter(|&b| b != a)
                .map(|b| cell_nodes[a] - cell_nodes[b])
                .product();
            1.0 / prod
        })
        .collect();
    // first-cell product weights int_0^h k(v) l_q(v) dv
    let mut first_weights = vec![0.0; q];
    let mut hi = h;
    for _ in 0..crate::kernel::GRADED_LEVELS {
        let lo = 0.5 * hi;
        for (a, wq) in first_weights.iter_mut().enumerate() {
            *wq += gauss16(|v| k.eval(v) * lagrange_basis(&cell_nodes, &bary, v)[a], lo, hi);
        }
        hi = lo;
    }
    let (c0, e0) = k.leading();
    let at_zero = lagrange_basis(&cell_nodes, &bary, 0.0);
    for (wq, l0) in first_weights.iter_mut().zip(&at_zero) {
        *wq += l0 * c0 * hi.powf(e0 + 1.0) / (e0 + 1.0);
    }
    let diag0 = graded_first_cell(&Squared(k), h, |_| 1.0, 1.0).0;

    // cell contributions c[d][l] accumulated into prefix sums over l
    let half_h = 0.5 * h;
    let prefix: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|d| {
            let len = n - d;
            let mut out = Vec::with_capacity(len);
            let mut acc = if d == 0 {
                diag0
            } else {
                first_weights.iter().zip(&values[d]).map(|(w, v)| w * v).sum()
            };
            out.push(acc);
            for l in 1..len {
                let mut cell = 0.0;
                for a in 0..q {
                    cell += ws[a] * values[d + l][a] * values[l][a];
                }
                acc += half_h * cell;
                out.push(acc);
            }
            out
        })
        .collect();
    // node i (1-based) and j <= i: C = prefix[i - j][j - 1]
    Ok(DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = if r >= c { (r + 1, c + 1) } else { (c + 1, r + 1) };
        prefix[i - j][j - 1]
    }))
}

/// Cholesky factor of a covariance matrix, retried once with a diagonal
/// jitter of `1e-12 * max diag`.
pub fn factorize_covariance(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let max_diag = m.diagonal().iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mut jittered = m.clone();
    for i in 0..m.nrows() {
        jittered[(i, i)] += 1e-12 * max_diag;
    }
    if let Some(c) = Cholesky::new(jittered) {
        return Ok(c);
    }
    let min_eigenvalue = SymmetricEigen::new(m).eigenvalues.min();
    Err(Error::Factorization { min_eigenvalue })
}

/// Fractional Ornstein-Uhlenbeck paths:
/// `X(t) = X0 E_beta(-a t^beta) + int_0^t Phi(t - s) dW(s)`.
pub fn simulate_fou(params: &FouParams, grid: GridSpec, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    params.validate()?;
    let kernel = KernelSpec::Fou {
        a: params.a,
        beta: params.beta,
        gamma: params.gamma,
    };
    let noise = simulate_volterra(kernel, grid, n_paths, seed, SamplingMethod::IncrementQuadrature)?;
    let mean: Vec<f64> = (0..=grid.n_steps)
        .map(|i| crate::fou::fou_mean(params, grid.time(i)))
        .collect::<Result<_>>()?;
    let rows = noise
        .paths()
        .map(|p| p.iter().zip(&mean).map(|(v, m)| v + m).collect())
        .collect();
    PathEnsemble::from_rows(grid, seed, rows)
}

/// Experimental: the multiplicative equation
/// `X(t) = X0 E_beta(a t^beta) + sigma int_0^t Phi(t-s) X(s) dW(s)`
/// with the integrand frozen at the left end of each cell.
pub fn simulate_fgbm(params: &GbmParams, grid: GridSpec, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    params.validate()?;
    check_square_integrable(params.beta, params.gamma)?;
    grid.validate()?;
    check_paths(n_paths)?;
    let k = AnyKernel::Ml(MlKernel::new(params.beta, params.beta - params.gamma + 1.0, params.a));
    let w = IncrementWeights::new(&k, &grid)?;
    let cfg = EvalConfig::default();
    let mean: Vec<f64> = (0..=grid.n_steps)
        .map(|i| {
            let t = grid.time(i);
            ml_general(params.beta, 1.0, params.a * t.powf(params.beta), &cfg).map(|e| params.x0 * e)
        })
        .collect::<Result<_>>()?;
    let n = grid.n_steps;
    let h = grid.dt();
    let rows: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let (dw, aux) = path_noise(seed, p, n, h);
            let mut row = Vec::with_capacity(n + 1);
            row.push(mean[0]);
            for i in 1..=n {
                let conv = w.node(i, &dw, &aux, |j| row[j]);
                row.push(mean[i] + params.sigma * conv);
            }
            row
        })
        .collect();
    PathEnsemble::from_rows(grid, seed, rows)
}

/// Per-node sample statistics of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: SampledPath,
    /// Unbiased sample variance.
    pub variance: SampledPath,
    pub mean_se: Vec<f64>,
    /// Standard error of the sample variance, from the fourth central moment.
    pub variance_se: Vec<f64>,
    /// Sample excess kurtosis (0 where the variance vanishes).
    pub excess_kurtosis: Vec<f64>,
}

/// Sample mean, variance and their standard errors at every node.
pub fn empirical_moments(ens: &PathEnsemble) -> Result<Moments> {
    if ens.n_paths < 2 {
        return Err(Error::DegenerateEnsemble("need at least two paths"));
    }
    let n = ens.n_paths as f64;
    let width = ens.width();
    let mut mean = vec![0.0; width];
    for p in ens.paths() {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut m2 = vec![0.0; width];
    let mut m4 = vec![0.0; width];
    for p in ens.paths() {
        for i in 0..width {
            let d = p[i] - mean[i];
            let d2 = d * d;
            m2[i] += d2;
            m4[i] += d2 * d2;
        }
    }
    let mut variance = Vec::with_capacity(width);
    let mut mean_se = Vec::with_capacity(width);
    let mut variance_se = Vec::with_capacity(width);
    let mut kurt = Vec::with_capacity(width);
    for i in 0..width {
        let c2 = m2[i] / n;
        let c4 = m4[i] / n;
        let var = m2[i] / (n - 1.0);
        variance.push(var);
        mean_se.push((var / n).sqrt());
        variance_se.push(((c4 - c2 * c2).max(0.0) / n).sqrt());
        kurt.push(if c2 > 0.0 { c4 / (c2 * c2) - 3.0 } else { 0.0 });
    }
    Ok(Moments {
        mean: SampledPath::new(ens.grid.horizon, mean)?,
        variance: SampledPath::new(ens.grid.horizon, variance)?,
        mean_se,
        variance_se,
        excess_kurtosis: kurt,
    })
}
