//! Execution of a [`RunConfig`].

use std::fmt;
use std::path::Path;

use fracsde_core::chaos::{genproc_coeffs, gbm_propagator, gbm_second_moment, norm_trend, GbmParams, WeightSequence};
use fracsde_core::fou::{fou_limit_variance, fou_variance, regime_classify, FouParams, Regime};
use fracsde_core::frac_calculus::{
    caputo_derivative, frac_integral, laplace_numeric, rl_derivative, IntegralKind, LaplaceGrid,
    SampledPath,
};
use fracsde_core::special::{ml_eval, ml_y_eval, EvalConfig, MLIndex};
use fracsde_core::spde::{classify, growth_probe, SpdeParams};
use fracsde_core::volterra::{simulate_fou, simulate_volterra, GridSpec, KernelSpec, SamplingMethod};
use rayon::prelude::*;
use serde_json::json;

use crate::config::*;
use crate::output::{Field, Report, Table};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable input, or an output file in the way.
    Usage(String),
    Core(fracsde_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<fracsde_core::Error> for CliError {
    fn from(e: fracsde_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn execute(cfg: &RunConfig) -> Result<Report> {
    match &cfg.operation {
        Operation::MlEval(a) => ml(a),
        Operation::FracApply(a) => frac_apply(a),
        Operation::LaplaceProbe(a) => laplace_probe(a),
        Operation::SimVolterra(a) => sim_volterra(a, cfg.seed),
        Operation::SimFou(a) => {
            let p = FouParams {
                x0: a.x0,
                a: a.a,
                beta: a.beta,
                gamma: a.gamma,
            };
            let grid = GridSpec::new(a.horizon, a.n_steps)?;
            Ok(Report::Ensemble(simulate_fou(&p, grid, a.n_paths, cfg.seed)?))
        }
        Operation::OuVariance(a) => ou_variance(a),
        Operation::OuLimit(a) => {
            let v = fou_limit_variance(a.a, a.beta, a.gamma)?;
            Ok(Report::Table(Table::record(vec![("value", v.into())])))
        }
        Operation::OuRegime(a) => {
            let regime = regime_classify(a.beta, a.gamma)?;
            let exponent = match regime {
                Regime::PowerGrowth { exponent } => Field::Num(exponent),
                _ => Field::Empty,
            };
            let tag = serde_json::to_value(regime).expect("regime serializes")["tag"]
                .as_str()
                .unwrap_or_default()
                .to_owned();
            Ok(Report::Table(Table::record(vec![("regime", tag.into()), ("exponent", exponent)])))
        }
        Operation::ChaosGbmMoment(a) => {
            let m = gbm_second_moment(&gbm(&a.gbm), a.t, a.tol)?;
            Ok(Report::Table(Table::record(vec![
                ("value", m.value.into()),
                ("layers", (m.layers as f64).into()),
                ("bound", m.bound.into()),
            ])))
        }
        Operation::ChaosPropagator(a) => {
            let grid = GridSpec::new(a.horizon, a.n_steps)?;
            let table = gbm_propagator(&gbm(&a.gbm), a.k_max, a.n_max, grid, a.limit)?;
            Ok(Report::Document {
                json: serde_json::to_value(&table).expect("chaos table serializes"),
                table: None,
            })
        }
        Operation::ChaosQnorm(a) => qnorm(a),
        Operation::SpdeClassify(a) => {
            let row = classify_row(&snap(spde(&a.spde), a.tol))?;
            Ok(Report::Table(Table {
                names: SWEEP_COLUMNS.to_vec(),
                rows: vec![row],
                record: true,
            }))
        }
        Operation::SpdeProbe(a) => {
            let grid = GridSpec::new(a.horizon, a.n_steps)?;
            let rows = growth_probe(&spde(&a.spde), &a.ys, grid)?
                .into_iter()
                .map(|(y, r)| vec![y.into(), r.into()])
                .collect();
            Ok(Report::Table(Table::columns(vec!["y", "sup_ratio"], rows)))
        }
        Operation::SpdeSweep(a) => sweep(a),
    }
}

fn ml(a: &MlEvalArgs) -> Result<Report> {
    let v = ml_eval(a.beta, a.rho, a.z, &EvalConfig::default())?;
    Ok(Report::Table(Table::record(vec![
        ("beta", a.beta.into()),
        ("rho", a.rho.into()),
        ("z", a.z.into()),
        ("value", v.into()),
    ])))
}

/// Reads a `t,value` CSV into a uniform path.
pub fn read_path(path: &Path) -> Result<SampledPath> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| usage(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
        return Err(usage(format!("{}: expected header `t,value`", path.display())));
    }
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(e.to_string()))?;
        let parse = |s: &str| finite_f64(s).map_err(|e| usage(format!("{} row {}: {e}", path.display(), line + 1)));
        times.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    Ok(SampledPath::from_samples(&times, values)?)
}

fn path_table(p: &SampledPath) -> Table {
    let rows = p.times().zip(p.values()).map(|(t, v)| vec![t.into(), (*v).into()]).collect();
    Table::columns(vec!["t", "value"], rows)
}

fn frac_apply(a: &FracApplyArgs) -> Result<Report> {
    let f = read_path(&a.input)?;
    let out = match a.op {
        FracOp::Integral => frac_integral(IntegralKind::RiemannLiouville, a.order, &f)?,
        FracOp::KochubeiIntegral => frac_integral(IntegralKind::Kochubei, a.order, &f)?,
        FracOp::CaputoDerivative => caputo_derivative(a.order, &f)?,
        FracOp::RlDerivative => {
            // the value at t = 0 may be infinite; keep it in the output
            let d = rl_derivative(a.order, &f)?;
            let h = d.dt();
            let rows = d
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| vec![(i as f64 * h).into(), (*v).into()])
                .collect();
            return Ok(Report::Table(Table::columns(vec!["t", "value"], rows)));
        }
    };
    Ok(Report::Table(path_table(&out)))
}

fn laplace_probe(a: &LaplaceProbeArgs) -> Result<Report> {
    let idx = MLIndex::new(a.beta, a.rho, a.a)?;
    let cfg = EvalConfig::default();
    let grid = GridSpec::new(a.horizon, a.n_steps)?;
    let values = (0..=a.n_steps)
        .map(|i| ml_y_eval(&idx, grid.time(i), &cfg))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let path = SampledPath::new(a.horizon, values)?;
    let lambdas = LaplaceGrid::new(a.lambdas.clone())?;
    let rows = laplace_numeric(&path, &lambdas)
        .into_iter()
        .map(|v| {
            let l = v.lambda;
            let exact = if l.powf(a.beta) > a.a {
                Field::Num(l.powf(a.beta - a.rho) / (l.powf(a.beta) - a.a))
            } else {
                Field::Empty
            };
            let rel = match exact {
                Field::Num(e) => Field::Num((v.value - e).abs() / e.abs()),
                _ => Field::Empty,
            };
            vec![l.into(), v.value.into(), exact, rel, v.truncation_bound.into()]
        })
        .collect();
    Ok(Report::Table(Table::columns(
        vec!["lambda", "numeric", "exact", "rel_error", "truncation_bound"],
        rows,
    )))
}

fn kernel_spec(a: &SimVolterraArgs) -> Result<KernelSpec> {
    let need = |name: &str, v: Option<f64>| v.ok_or_else(|| usage(format!("--kernel {:?} needs --{name}", a.kernel)));
    Ok(match a.kernel {
        KernelKind::Power => KernelSpec::Power {
            scale: need("scale", a.scale)?,
            exponent: need("exponent", a.exponent)?,
        },
        KernelKind::Brownian => KernelSpec::brownian(),
        KernelKind::FractionalNoise => KernelSpec::fractional_noise(need("gamma", a.gamma)?),
        KernelKind::Fsode => KernelSpec::fsode(need("beta", a.beta)?, need("gamma", a.gamma)?),
        KernelKind::Fou => KernelSpec::Fou {
            a: need("a", a.a)?,
            beta: need("beta", a.beta)?,
            gamma: need("gamma", a.gamma)?,
        },
    })
}

fn sim_volterra(a: &SimVolterraArgs, seed: u64) -> Result<Report> {
    let kernel = kernel_spec(a)?;
    let method = match a.method {
        Method::Quadrature => SamplingMethod::IncrementQuadrature,
        Method::Covariance => SamplingMethod::CovarianceFactor,
    };
    let grid = GridSpec::new(a.horizon, a.n_steps)?;
    Ok(Report::Ensemble(simulate_volterra(kernel, grid, a.n_paths, seed, method)?))
}

fn ou_variance(a: &OuVarianceArgs) -> Result<Report> {
    let p = FouParams {
        x0: 0.0,
        a: a.a,
        beta: a.beta,
        gamma: a.gamma,
    };
    let grid = GridSpec::new(a.horizon, a.n_steps)?;
    let rows = (0..=a.n_steps)
        .into_par_iter()
        .map(|i| {
            let t = grid.time(i);
            fou_variance(&p, t).map(|v| vec![t.into(), v.into()])
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Report::Table(Table::columns(vec!["t", "value"], rows)))
}

fn gbm(a: &GbmArgs) -> GbmParams {
    GbmParams {
        x0: a.x0,
        a: a.a,
        sigma: a.sigma,
        beta: a.beta,
        gamma: a.gamma,
    }
}

fn qnorm(a: &QnormArgs) -> Result<Report> {
    let q = WeightSequence::power(a.scale, a.power)?;
    let coeffs = genproc_coeffs(a.k_max, a.t, a.horizon, a.beta, a.gamma)?;
    let trend = norm_trend(&coeffs, &q)?;
    let norm = fracsde_core::chaos::weighted_norm(&coeffs, &q)?;
    let verdict = serde_json::to_value(trend.verdict).expect("verdict serializes");
    let last_ratio = trend.ratios.last().copied().map(Field::Num).unwrap_or(Field::Empty);
    let table = Table::record(vec![
        ("norm", norm.into()),
        ("verdict", verdict.as_str().unwrap_or_default().into()),
        ("last_ratio", last_ratio),
    ]);
    Ok(Report::Document {
        json: json!({ "norm": norm, "trend": trend }),
        table: Some(table),
    })
}

fn spde(a: &SpdeArgs) -> SpdeParams {
    SpdeParams {
        beta: a.beta,
        gamma: a.gamma,
        alpha: a.alpha,
        nu: a.nu,
        b: a.b,
        sigma: a.sigma,
    }
}

/// Moves `gamma` onto 1/2 and `alpha` onto `nu / (1 - eps)` when they lie
/// within `tol`, so that the exact comparisons of the classifier fire.
pub fn snap(mut p: SpdeParams, tol: f64) -> SpdeParams {
    if tol <= 0.0 {
        return p;
    }
    if (p.gamma - 0.5).abs() <= tol {
        p.gamma = 0.5;
    }
    let eps = (p.gamma - 0.5) / p.beta;
    if eps > 0.0 && eps < 1.0 {
        let critical = p.nu / (1.0 - eps);
        if (p.alpha - critical).abs() <= tol {
            p.alpha = critical;
        }
    }
    p
}

const SWEEP_COLUMNS: [&str; 8] = ["beta", "gamma", "alpha", "nu", "b", "sigma", "verdict", "reason"];

fn classify_row(p: &SpdeParams) -> Result<Vec<Field>> {
    let v = classify(p)?;
    let tag = serde_json::to_value(v.tag).expect("tag serializes");
    Ok(vec![
        p.beta.into(),
        p.gamma.into(),
        p.alpha.into(),
        p.nu.into(),
        p.b.into(),
        p.sigma.into(),
        tag.as_str().unwrap_or_default().into(),
        v.reason.into(),
    ])
}

fn sweep(a: &SpdeSweepArgs) -> Result<Report> {
    let mut points = Vec::new();
    for &beta in &a.betas {
        for &gamma in &a.gammas {
            for &alpha in &a.alphas {
                for &nu in &a.nus {
                    for &b in &a.bs {
                        for &sigma in &a.sigmas {
                            points.push(SpdeParams {
                                beta,
                                gamma,
                                alpha,
                                nu,
                                b,
                                sigma,
                            });
                        }
                    }
                }
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|p| classify_row(&snap(*p, a.tol)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::Table(Table::columns(SWEEP_COLUMNS.to_vec(), rows)))
}
