//! Wiener chaos machinery on `[0, T]`: the cosine basis, Hermite polynomials,
//! first-order chaos coefficients, weighted norms, and the chaos propagator and
//! second moment of the fractional geometric Brownian motion
//! `X(t) = X0 E_beta(a t^beta) + sigma int_0^t Phi(t-s) X(s) dW(s)`,
//! `Phi(u) = u^(beta-gamma) E_{beta,1+beta-gamma}(a u^beta)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_order, check_square_integrable, Error, Result};
use crate::kernel::{CellMoments, MlKernel, PowerKernel, Squared};
use crate::special::mittag_leffler::{ml_general, EvalConfig};
use crate::special::{gamma, ln_gamma};
use crate::volterra::GridSpec;

/// `m_1 = 1/sqrt(T)`, `m_k(t) = sqrt(2/T) cos(pi (k-1) t / T)`.
pub fn cosine_basis_eval(k: usize, t: f64, horizon: f64) -> Result<f64> {
    check_mode(k, t, horizon)?;
    Ok(basis(k, t, horizon))
}

fn check_mode(k: usize, t: f64, horizon: f64) -> Result<()> {
    if k < 1 {
        return Err(Error::invalid("k", k as f64, "modes start at 1"));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid("T", horizon, "must be positive"));
    }
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::invalid("t", t, "must lie in [0, T]"));
    }
    Ok(())
}

fn basis(k: usize, t: f64, horizon: f64) -> f64 {
    if k == 1 {
        1.0 / horizon.sqrt()
    } else {
        (2.0 / horizon).sqrt() * (PI * (k - 1) as f64 * t / horizon).cos()
    }
}

/// Probabilists' Hermite polynomial `He_n(x)`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `int_0^t m_k(s) ds`, the coefficient of `xi_k` in `w(t)`.
pub fn bm_chaos_coeff(k: usize, t: f64, horizon: f64) -> Result<f64> {
    check_mode(k, t, horizon)?;
    if k == 1 {
        return Ok(t / horizon.sqrt());
    }
    let freq = PI * (k - 1) as f64 / horizon;
    Ok((2.0 / horizon).sqrt() * (freq * t).sin() / freq)
}

/// Grid steps per mode used for fractional integrals of the basis.
const STEPS_PER_MODE: usize = 128;

/// `I^(1+beta-gamma) m_k(t)`, the first-order chaos coefficient of the
/// driftless solution of `d^beta X = d^gamma w'`.
pub fn genproc_coeff(k: usize, t: f64, horizon: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_mode(k, t, horizon)?;
    Ok(genproc_coeffs(k, t, horizon, beta, gamma)?[k - 1])
}

/// `genproc_coeff` for modes `1..=max_k`, sharing one product-integration grid.
///
/// The grid has `128 (max_k + 1)` steps, so the highest mode is sampled at
/// least 128 times per period.
pub fn genproc_coeffs(max_k: usize, t: f64, horizon: f64, beta: f64, gamma: f64) -> Result<Vec<f64>> {
    check_mode(max_k.max(1), t, horizon)?;
    check_order("beta", beta)?;
    check_order("gamma", gamma)?;
    if t == 0.0 {
        return Ok(vec![0.0; max_k]);
    }
    let order = 1.0 + beta - gamma;
    let n = STEPS_PER_MODE * (max_k + 1);
    let h = t / n as f64;
    let w = CellMoments::new(&PowerKernel::fractional_integral(order), h, n)?;
    Ok((1..=max_k)
        .into_par_iter()
        .map(|k| {
            let f: Vec<f64> = (0..=n).map(|i| basis(k, i as f64 * h, horizon)).collect();
            w.convolve_at(&f, n)
        })
        .collect())
}

/// Weights `0 < q_k < 1` of a weighted chaos norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSequence {
    /// `q_k = scale * k^-power`.
    Power { scale: f64, power: f64 },
    /// `q_1, q_2, ...` given explicitly.
    Explicit { values: Vec<f64> },
}

impl WeightSequence {
    pub fn power(scale: f64, power: f64) -> Result<Self> {
        if !(scale > 0.0 && scale < 1.0) {
            return Err(Error::invalid("c", scale, "weights need 0 < c < 1"));
        }
        if !(power >= 0.0) || !power.is_finite() {
            return Err(Error::invalid("p", power, "weights need p >= 0"));
        }
        Ok(WeightSequence::Power { scale, power })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
            return Err(Error::invalid("q_k", bad, "weights must lie in (0, 1)"));
        }
        Ok(WeightSequence::Explicit { values })
    }

    /// `q_k`, or `None` past the end of an explicit list.
    pub fn get(&self, k: usize) -> Option<f64> {
        match self {
            WeightSequence::Power { scale, power } => Some(scale * (k as f64).powf(-power)),
            WeightSequence::Explicit { values } => values.get(k - 1).copied(),
        }
    }

    /// `q^alpha = prod_k q_k^alpha_k`.
    pub fn of_index(&self, alpha: &MultiIndex) -> Option<f64> {
        alpha
            .entries()
            .iter()
            .map(|&(k, m)| self.get(k as usize).map(|q| q.powi(m as i32)))
            .product()
    }
}

/// `(sum_k q_k x_k^2)^(1/2)` over first-order coefficients `x_1, x_2, ...`.
pub fn weighted_norm(coeffs: &[f64], q: &WeightSequence) -> Result<f64> {
    let mut acc = 0.0;
    for (i, x) in coeffs.iter().enumerate() {
        let qk = q.get(i + 1).ok_or(Error::invalid(
            "q",
            coeffs.len() as f64,
            "explicit weight list shorter than the coefficient list",
        ))?;
        acc += qk * x * x;
    }
    Ok(acc.sqrt())
}

/// Behavior of dyadic partial sums `S_K = sum_{k <= K} q_k x_k^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTrend {
    /// `S_{2^(j+1)} - S_(2^j)` for `j = 0, 1, ...`.
    pub increments: Vec<f64>,
    /// Ratios of consecutive increments.
    pub ratios: Vec<f64>,
    pub verdict: NormVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormVerdict {
    /// Dyadic increments shrink geometrically.
    Cauchy,
    /// Dyadic increments grow.
    Divergent,
    Inconclusive,
}

/// Ratios this close to 1 are not trusted either way: at the critical weight
/// the dyadic increments are nearly constant and the ratios approach 1 from below.
const RATIO_MARGIN: f64 = 0.02;

/// Ratio test on the dyadic blocks of the weighted norm; the last three
/// ratios decide.
pub fn norm_trend(coeffs: &[f64], q: &WeightSequence) -> Result<NormTrend> {
    let mut partial = Vec::new();
    let mut k = 1;
    while k <= coeffs.len() {
        partial.push(weighted_norm(&coeffs[..k], q)?.powi(2));
        k *= 2;
    }
    let increments: Vec<f64> = partial.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = increments.windows(2).map(|w| w[1] / w[0]).collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let verdict = if tail.len() < 3 {
        NormVerdict::Inconclusive
    } else if tail.iter().all(|r| *r < 1.0 - RATIO_MARGIN) {
        NormVerdict::Cauchy
    } else if tail.iter().all(|r| *r > 1.0 + RATIO_MARGIN) {
        NormVerdict::Divergent
    } else {
        NormVerdict::Inconclusive
    };
    Ok(NormTrend {
        increments,
        ratios,
        verdict,
    })
}

/// A multi-index with finitely many nonzero entries, stored as the
/// nondecreasing list of its modes (`{1: 2, 3: 1}` is `[1, 1, 3]`).
///
/// Ordering is graded lexicographic: by `|alpha|`, then by the mode list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    modes: Vec<u32>,
}

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex::default()
    }

    pub fn from_modes(mut modes: Vec<u32>) -> Result<Self> {
        if modes.contains(&0) {
            return Err(Error::invalid("k", 0.0, "modes start at 1"));
        }
        modes.sort_unstable();
        Ok(MultiIndex { modes })
    }

    /// `(k, alpha_k)` pairs with `alpha_k >= 1`, increasing in `k`.
    pub fn entries(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &k in &self.modes {
            match out.last_mut() {
                Some((last, m)) if *last == k => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    pub fn from_entries(entries: &[(u32, u32)]) -> Result<Self> {
        let mut modes = Vec::new();
        for &(k, m) in entries {
            modes.extend(std::iter::repeat_n(k, m as usize));
        }
        MultiIndex::from_modes(modes)
    }

    pub fn order(&self) -> usize {
        self.modes.len()
    }

    pub fn max_mode(&self) -> u32 {
        self.modes.last().copied().unwrap_or(0)
    }

    /// `alpha - e_k`, assuming `alpha_k >= 1`.
    fn without(&self, k: u32) -> MultiIndex {
        let mut modes = self.modes.clone();
        let pos = modes.iter().position(|&m| m == k).expect("mode present");
        modes.remove(pos);
        MultiIndex { modes }
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.modes.cmp(&other.modes))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[u32; 2]> = self.entries().into_iter().map(|(k, m)| [k, m]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[u32; 2]>::deserialize(d)?;
        let entries: Vec<(u32, u32)> = pairs.into_iter().map(|[k, m]| (k, m)).collect();
        MultiIndex::from_entries(&entries).map_err(serde::de::Error::custom)
    }
}

/// All multi-indices of order `n` on modes `1..=k_max`, in graded-lex order.
fn indices_of_order(n: usize, k_max: u32) -> Vec<MultiIndex> {
    fn extend(prefix: &mut Vec<u32>, left: usize, from: u32, k_max: u32, out: &mut Vec<MultiIndex>) {
        if left == 0 {
            out.push(MultiIndex {
                modes: prefix.clone(),
            });
            return;
        }
        for k in from..=k_max {
            prefix.push(k);
            extend(prefix, left - 1, k, k_max, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), n, 1, k_max, &mut out);
    out
}

/// `sum_{n <= N} C(K + n - 1, n)`, the number of entries of a full table.
pub fn table_size(k_max: usize, n_max: usize) -> f64 {
    (0..=n_max)
        .map(|n| {
            let n = n as f64;
            (ln_gamma(k_max as f64 + n) - ln_gamma(n + 1.0) - ln_gamma(k_max as f64))
            .exp()
            .round()
        })
        .sum()
}

/// Parameters of the fractional geometric Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub x0: f64,
    pub a: f64,
    pub sigma: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl GbmParams {
    pub fn validate(&self) -> Result<()> {
        check_order("beta", self.beta)?;
        check_order("gamma", self.gamma)?;
        for (name, v) in [("X0", self.x0), ("a", self.a), ("sigma", self.sigma)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, v, "must be finite"));
            }
        }
        Ok(())
    }

    fn phi(&self) -> MlKernel {
        MlKernel::new(self.beta, 1.0 + self.beta - self.gamma, self.a)
    }

    /// `X0 E_beta(a t^beta)` on the grid nodes.
    fn mean_on(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let cfg = EvalConfig::default();
        (0..=grid.n_steps)
            .map(|i| {
                let t = grid.time(i);
                ml_general(self.beta, 1.0, self.a * t.powf(self.beta), &cfg).map(|e| self.x0 * e)
            })
            .collect()
    }
}

/// Chaos coefficients `X_alpha(t)` for all `|alpha| <= N` on modes `<= K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosTable {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "K")]
    pub basis_size: usize,
    #[serde(rename = "N")]
    pub max_order: usize,
    pub entries: Vec<ChaosEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosEntry {
    pub alpha: MultiIndex,
    /// Samples on the uniform grid of `[0, T]`.
    pub values: Vec<f64>,
}

impl ChaosTable {
    pub fn get(&self, alpha: &MultiIndex) -> Option<&[f64]> {
        self.entries
            .binary_search_by(|e| e.alpha.cmp(alpha))
            .ok()
            .map(|i| self.entries[i].values.as_slice())
    }

    /// `sum X_alpha(t_node)^2` over entries with `|alpha| <= n_max`, modes `<= k_max`.
    pub fn energy(&self, node: usize, k_max: usize, n_max: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.alpha.order() <= n_max && e.alpha.max_mode() as usize <= k_max)
            .map(|e| e.values[node] * e.values[node])
            .sum()
    }

    /// `(sum_alpha q^alpha X_alpha(t_node)^2)^(1/2)`; entries outside an
    /// explicit weight list are skipped.
    pub fn weighted_norm(&self, q: &WeightSequence, node: usize) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| q.of_index(&e.alpha).map(|w| w * e.values[node] * e.values[node]))
            .sum::<f64>()
            .sqrt()
    }
}

/// Default cap on the number of propagator entries.
pub const DEFAULT_TABLE_LIMIT: usize = 200_000;

/// Solves the propagator
/// `X_alpha(t) = sigma sum_k sqrt(alpha_k) int_0^t Phi(t-s) X_{alpha-e_k}(s) m_k(s) ds`
/// order by order, with `X_0(t) = X0 E_beta(a t^beta)`.
pub fn gbm_propagator(
    p: &GbmParams,
    k_max: usize,
    n_max: usize,
    grid: GridSpec,
    limit: usize,
) -> Result<ChaosTable> {
    p.validate()?;
    grid.validate()?;
    if k_max < 1 {
        return Err(Error::invalid("K", k_max as f64, "need at least one mode"));
    }
    let size = table_size(k_max, n_max);
    if size > limit as f64 {
        return Err(Error::ResourceCap {
            what: "chaos table entries",
            requested: size.min(usize::MAX as f64) as usize,
            limit,
        });
    }
    let n = grid.n_steps;
    let h = grid.dt();
    let w = CellMoments::new(&p.phi(), h, n)?;
    let basis_values: Vec<Vec<f64>> = (1..=k_max)
        .map(|k| (0..=n).map(|i| basis(k, grid.time(i), grid.horizon)).collect())
        .collect();

    let mut entries = vec![ChaosEntry {
        alpha: MultiIndex::empty(),
        values: p.mean_on(&grid)?,
    }];
    let mut previous: HashMap<MultiIndex, usize> = HashMap::from([(MultiIndex::empty(), 0)]);
    for order in 1..=n_max {
        let layer = indices_of_order(order, k_max as u32);
        let values: Vec<Vec<f64>> = layer
            .par_iter()
            .map(|alpha| {
                let mut f = vec![0.0; n + 1];
                for (k, mult) in alpha.entries() {
                    let parent = &entries[previous[&alpha.without(k)]].values;
                    let scale = p.sigma * (mult as f64).sqrt();
                    let m = &basis_values[k as usize - 1];
                    for i in 0..=n {
                        f[i] += scale * parent[i] * m[i];
                    }
                }
                w.convolve(&f)
            })
            .collect();
        let start = entries.len();
        previous = layer
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), start + i))
            .collect();
        entries.extend(layer.into_iter().zip(values).map(|(alpha, values)| ChaosEntry { alpha, values }));
    }
    if entries.iter().flat_map(|e| &e.values).any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence {
            what: "chaos propagator",
            iterations: entries.len(),
        });
    }
    Ok(ChaosTable {
        horizon: grid.horizon,
        basis_size: k_max,
        max_order: n_max,
        entries,
    })
}

/// Grid steps on `[0, t]` for the layer recursion.
pub const LAYER_STEPS: usize = 1024;
/// Hard cap on the number of layers.
pub const MAX_LAYERS: usize = 200;

/// Second moment from the layer recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub value: f64,
    /// Layers summed, including `n = 0`.
    pub layers: usize,
    /// Truncation bound of the first omitted layer, relative to `value`.
    pub bound: f64,
}

/// The layers `M_0 = E_beta(a t^beta)^2`, `M_n = Phi^2 * M_{n-1}` on `grid`.
pub fn gbm_layers(p: &GbmParams, grid: GridSpec, n_layers: usize) -> Result<Vec<Vec<f64>>> {
    p.validate()?;
    check_square_integrable(p.beta, p.gamma)?;
    grid.validate()?;
    let unit = GbmParams { x0: 1.0, ..*p };
    let m0: Vec<f64> = unit.mean_on(&grid)?.iter().map(|e| e * e).collect();
    let w = CellMoments::new(&Squared(p.phi()), grid.dt(), grid.n_steps)?;
    let mut layers = vec![m0];
    for _ in 1..n_layers {
        let next = w.convolve(layers.last().expect("non-empty"));
        layers.push(next);
    }
    Ok(layers)
}

/// `E X(t)^2 = X0^2 sum_n sigma^(2n) M_n(t)`.
///
/// The series stops once `sigma^(2n) sup M_0 C^n / Gamma(n r + 1)`,
/// `r = 2(beta-gamma)+1`, falls below `tol` times the partial sum. The
/// constant is `C = Gamma(r+1) sup_t (Phi^2 * 1)(t)`, which reproduces the
/// layers exactly when `a = 0`.
pub fn gbm_second_moment(p: &GbmParams, t: f64, tol: f64) -> Result<SecondMoment> {
    p.validate()?;
    check_square_integrable(p.beta, p.gamma)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", t, "must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", tol, "must be positive"));
    }
    let grid = GridSpec::new(t, LAYER_STEPS)?;
    let unit = GbmParams { x0: 1.0, ..*p };
    let mut layer: Vec<f64> = unit.mean_on(&grid)?.iter().map(|e| e * e).collect();
    let x0_sq = p.x0 * p.x0;
    let sigma_sq = p.sigma * p.sigma;
    if sigma_sq == 0.0 {
        return Ok(SecondMoment {
            value: x0_sq * layer[LAYER_STEPS],
            layers: 1,
            bound: 0.0,
        });
    }
    let w = CellMoments::new(&Squared(p.phi()), grid.dt(), LAYER_STEPS)?;
    let r = 2.0 * (p.beta - p.gamma) + 1.0;
    let sup_m0 = layer.iter().cloned().fold(0.0, f64::max);
    let single = w.convolve(&vec![1.0; LAYER_STEPS + 1]);
    let c = gamma(r + 1.0)? * single.iter().cloned().fold(0.0, f64::max);
    let mut sum = layer[LAYER_STEPS];
    let mut weight = 1.0;
    for n in 1..=MAX_LAYERS {
        let log_bound = n as f64 * (sigma_sq * c).ln() + sup_m0.ln() - ln_gamma(n as f64 * r + 1.0);
        let bound = log_bound.exp() / sum.abs();
        if bound < tol {
            return Ok(SecondMoment {
                value: x0_sq * sum,
                layers: n,
                bound,
            });
        }
        layer = w.convolve(&layer);
        weight *= sigma_sq;
        sum += weight * layer[LAYER_STEPS];
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        what: "second-moment layer series",
        iterations: MAX_LAYERS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_values() {
        assert_eq!(cosine_basis_eval(1, 1.7, 4.0).unwrap(), 0.5);
        assert!((cosine_basis_eval(2, 0.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(cosine_basis_eval(0, 0.0, 1.0).is_err());
        assert!(cosine_basis_eval(2, 1.5, 1.0).is_err());
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_eval(0, 0.3), 1.0);
        assert!((hermite_eval(2, 0.3) - (0.09 - 1.0)).abs() < 1e-15);
        // He_5(x) = x^5 - 10 x^3 + 15 x
        let x: f64 = 1.3;
        assert!((hermite_eval(5, x) - (x.powi(5) - 10.0 * x.powi(3) + 15.0 * x)).abs() < 1e-12);
    }

    #[test]
    fn bm_coefficients() {
        assert!((bm_chaos_coeff(1, 0.3, 2.0).unwrap() - 0.3 / 2f64.sqrt()).abs() < 1e-15);
        for k in 2..10 {
            assert!(bm_chaos_coeff(k, 2.0, 2.0).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn genproc_special_cases() {
        // k = 1: t^p / (sqrt(T) Gamma(p + 1)) with p = 1 + beta - gamma
        let (b, g) = (0.4, 0.7);
        let want = 0.6f64.powf(0.7) / (2f64.sqrt() * gamma(1.7).unwrap());
        let got = genproc_coeff(1, 0.6, 2.0, b, g).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "{got} {want}");
        // order-one integral of the basis is the Brownian coefficient, up to the
        // O((h freq)^2) interpolation error of the product rule
        for k in [2, 5, 9] {
            let got = genproc_coeff(k, 0.7, 1.0, 0.5, 0.5).unwrap();
            let want = bm_chaos_coeff(k, 0.7, 1.0).unwrap();
            assert!((got - want).abs() < 1e-4 * want.abs(), "k={k}");
        }
    }

    #[test]
    fn weights_and_norms() {
        assert!(WeightSequence::power(1.0, 2.0).is_err());
        assert!(WeightSequence::explicit(vec![0.5, 1.0]).is_err());
        let q = WeightSequence::power(0.5, 2.0).unwrap();
        assert_eq!(weighted_norm(&[0.0; 8], &q).unwrap(), 0.0);
        let alpha = MultiIndex::from_entries(&[(1, 2), (2, 1)]).unwrap();
        assert!((q.of_index(&alpha).unwrap() - 0.25 * 0.125).abs() < 1e-16);
    }

    #[test]
    fn white_noise_norm_converges_iff_summable() {
        // every basis function has unit L2 norm
        let ones = vec![1.0; 1 << 12];
        let conv = norm_trend(&ones, &WeightSequence::power(0.5, 1.5).unwrap()).unwrap();
        let div = norm_trend(&ones, &WeightSequence::power(0.5, 0.7).unwrap()).unwrap();
        assert_eq!(conv.verdict, NormVerdict::Cauchy);
        assert_eq!(div.verdict, NormVerdict::Divergent);
    }

    #[test]
    fn multi_index_order_and_serde() {
        let idx = indices_of_order(2, 3);
        assert_eq!(idx.len(), 6);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let a = MultiIndex::from_modes(vec![3, 1, 1]).unwrap();
        assert_eq!(a.entries(), vec![(1, 2), (3, 1)]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "[[1,2],[3,1]]");
        assert_eq!(serde_json::from_str::<MultiIndex>(&json).unwrap(), a);
        assert_eq!(table_size(32, 4), 58_905.0);
    }

    #[test]
    fn propagator_degenerate_cases() {
        let p = GbmParams {
            x0: 2.0,
            a: 0.4,
            sigma: 0.0,
            beta: 0.8,
            gamma: 0.5,
        };
        let grid = GridSpec::new(1.0, 32).unwrap();
        let t = gbm_propagator(&p, 3, 0, grid, DEFAULT_TABLE_LIMIT).unwrap();
        assert_eq!(t.entries.len(), 1);
        let e = ml_general(0.8, 1.0, 0.4, &EvalConfig::default()).unwrap();
        assert!((t.entries[0].values[32] - 2.0 * e).abs() < 1e-14);
        let t = gbm_propagator(&p, 3, 2, grid, DEFAULT_TABLE_LIMIT).unwrap();
        assert!(t.entries[1..].iter().all(|e| e.values.iter().all(|v| *v == 0.0)));
        assert!(matches!(
            gbm_propagator(&p, 64, 6, grid, DEFAULT_TABLE_LIMIT),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn second_moment_without_noise() {
        let p = GbmParams {
            x0: 1.5,
            a: 0.3,
            sigma: 0.0,
            beta: 0.7,
            gamma: 0.4,
        };
        let m = gbm_second_moment(&p, 1.2, 1e-10).unwrap();
        let e = ml_general(0.7, 1.0, 0.3 * 1.2f64.powf(0.7), &EvalConfig::default()).unwrap();
        assert!((m.value - 2.25 * e * e).abs() < 1e-13);
        assert_eq!(m.layers, 1);
    }
}
