use mtss::density::{levy_density_grid, linspace, pdf_imtss_grid, pdf_mtss_grid};
use mtss::fpk::{
    imtss_refinement, imtss_transform_identity, mtss_refinement, mtss_transform_identity,
    pgf_mtsfpp, pmf_mtsfpp, pmf_mttfpp, pmf_ode_residual_mtsfpp, tcbm_transform_check, ImtssGrid,
    MtssGrid, MttfppMethod, Norms, TcbmMonteCarlo,
};
use mtss::stats::variance_se;
use mtss::{
    cumulant, pdf_imtss_contour, pdf_mtss_inversion, raw_moment, renewal_asymptote,
    renewal_numeric, sample_mtss_path, sample_tcbm, AsymptoticRegime, Clock, DensityGrid,
    GridConvention, ImtssSampler, InversionMethod, MixtureParams, QuadratureConfig, RngConfig,
    VerificationReport,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::*;
use crate::output::Artifact;
use crate::CliError;

/// Result of a subcommand: its artifacts and whether its checks passed.
pub struct Run {
    pub artifacts: Vec<Artifact>,
    pub pass: bool,
}

impl Run {
    fn ok(artifacts: Vec<Artifact>) -> Self {
        Self {
            artifacts,
            pass: true,
        }
    }
}

fn require(
    ok: bool,
    name: &str,
    value: impl std::fmt::Display,
    constraint: &str,
) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "invalid `--{name}` = {value}: must satisfy {constraint}"
        )))
    }
}

fn finite_positive(name: &str, v: f64) -> Result<(), CliError> {
    require(v > 0.0 && v.is_finite(), name, v, "0 < value < inf")
}

fn fmt_row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    cells.join(",")
}

pub fn run(cmd: &Command, g: &Global, params: &MixtureParams) -> Result<Run, CliError> {
    let rng = RngConfig::new(g.seed, g.substreams).map_err(|_| {
        CliError::Usage(format!(
            "invalid `--substreams` = {}: must satisfy substreams >= 1",
            g.substreams
        ))
    })?;
    match cmd {
        Command::Sample(a) => sample(a, g, params, &rng),
        Command::Pdf(a) => pdf(a, g, params),
        Command::Levy(a) => levy(a, g, params),
        Command::Moments(a) => moments(a, g, params),
        Command::Renewal(a) => renewal(a, g, params),
        Command::Poisson(a) => poisson(a, g, params, &rng),
        Command::Verify(a) => verify(a, params, &rng),
    }
}

fn sample(a: &SampleArgs, g: &Global, p: &MixtureParams, rng: &RngConfig) -> Result<Run, CliError> {
    require(a.paths >= 1, "paths", a.paths, "paths >= 1")?;
    let paths: Vec<mtss::SamplePath> = if a.inverse {
        require(
            !a.targets.is_empty(),
            "targets",
            "(none)",
            "at least one target time with --inverse",
        )?;
        for &t in &a.targets {
            finite_positive("targets", t)?;
        }
        require(
            a.targets.windows(2).all(|w| w[1] >= w[0]),
            "targets",
            format!("{:?}", a.targets),
            "nondecreasing target times",
        )?;
        require(
            a.resolution >= 1,
            "resolution",
            a.resolution,
            "resolution >= 1",
        )?;
        let t_max = *a.targets.last().unwrap();
        let sampler = ImtssSampler::new(p, t_max, a.resolution)?;
        let convention = match a.convention {
            Convention::Left => GridConvention::LeftGrid,
            Convention::Midpoint => GridConvention::Midpoint,
        };
        rng.batch(a.paths, |r, _| {
            let values = sampler.sample(&a.targets, convention, r)?;
            Ok(mtss::SamplePath {
                times: a.targets.clone(),
                values,
            })
        })?
    } else {
        finite_positive("horizon", a.horizon)?;
        require(a.steps >= 1, "steps", a.steps, "steps >= 1")?;
        rng.batch(a.paths, |r, _| sample_mtss_path(p, a.horizon, a.steps, r))?
    };
    let artifacts = match g.format {
        Format::Csv => paths
            .iter()
            .enumerate()
            .map(|(i, path)| Artifact::new(format!("path_{i:03}.csv"), path.to_csv()))
            .collect(),
        Format::Json => vec![Artifact::new(
            "paths.json",
            serde_json::to_string_pretty(&paths).expect("paths serialize"),
        )],
    };
    Ok(Run::ok(artifacts))
}

fn grid_abscissae(a: &GridArgs) -> Result<Vec<f64>, CliError> {
    finite_positive("xmin", a.xmin)?;
    require(
        a.xmax.is_finite() && a.xmax > a.xmin,
        "xmax",
        a.xmax,
        "xmin < xmax < inf",
    )?;
    require(a.n >= 2, "n", a.n, "n >= 2")?;
    Ok(linspace(a.xmin, a.xmax, a.n))
}

fn grid_artifact(grid: &DensityGrid, stem: &str, format: Format) -> Artifact {
    match format {
        Format::Csv => Artifact::new(format!("{stem}.csv"), grid.to_csv()),
        Format::Json => Artifact::new(format!("{stem}.json"), grid.to_json()),
    }
}

fn pdf(a: &PdfArgs, g: &Global, p: &MixtureParams) -> Result<Run, CliError> {
    finite_positive("t", a.t)?;
    let xs = grid_abscissae(&a.grid)?;
    let quad = QuadratureConfig::default();
    let grid = match (a.inverse, a.method) {
        (false, PdfMethod::Contour) => pdf_mtss_grid(p, a.t, xs, &quad)?,
        (false, m) => {
            let (method, name) = if m == PdfMethod::Talbot {
                (InversionMethod::Talbot, "talbot")
            } else {
                (InversionMethod::GaverStehfest, "gaver-stehfest")
            };
            let values = xs
                .par_iter()
                .map(|&x| pdf_mtss_inversion(p, x, a.t, method))
                .collect::<mtss::Result<Vec<_>>>()?;
            DensityGrid::new(p.clone(), Some(a.t), name, xs, values)?
        }
        (true, PdfMethod::Contour) => {
            let values = xs
                .par_iter()
                .map(|&x| pdf_imtss_contour(p, x, a.t, &quad).map(|v| v.max(0.0)))
                .collect::<mtss::Result<Vec<_>>>()?;
            DensityGrid::new(p.clone(), Some(a.t), "contour", xs, values)?
        }
        (true, PdfMethod::Talbot) => pdf_imtss_grid(p, a.t, xs)?,
        (true, PdfMethod::Stehfest) => {
            return Err(CliError::Usage(
                "invalid `--method` = stehfest: must satisfy method in {contour, talbot} with --inverse"
                    .into(),
            ))
        }
    };
    Ok(Run::ok(vec![grid_artifact(&grid, "pdf", g.format)]))
}

fn levy(a: &GridArgs, g: &Global, p: &MixtureParams) -> Result<Run, CliError> {
    let grid = levy_density_grid(p, grid_abscissae(a)?)?;
    Ok(Run::ok(vec![grid_artifact(&grid, "levy", g.format)]))
}

fn moments(a: &MomentsArgs, g: &Global, p: &MixtureParams) -> Result<Run, CliError> {
    finite_positive("t", a.t)?;
    require(
        !a.orders.is_empty(),
        "orders",
        "(none)",
        "at least one order",
    )?;
    let mut rows = Vec::with_capacity(a.orders.len());
    for &n in &a.orders {
        require(n >= 1, "orders", n, "order >= 1")?;
        rows.push((n, raw_moment(p, n, a.t)?, cumulant(p, n, a.t)?));
    }
    let artifact = match g.format {
        Format::Csv => {
            let mut body = String::from("order,raw_moment,cumulant\n");
            for (n, m, k) in &rows {
                body.push_str(&format!("{n},{}\n", fmt_row(&[*m, *k])));
            }
            Artifact::new("moments.csv", body)
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(n, m, k)| json!({"order": n, "raw_moment": m, "cumulant": k}))
                .collect();
            Artifact::new(
                "moments.json",
                serde_json::to_string_pretty(&json!({"t": a.t, "rows": v})).unwrap(),
            )
        }
    };
    Ok(Run::ok(vec![artifact]))
}

fn regime_for(r: Regime, p: &MixtureParams, t: f64) -> AsymptoticRegime {
    match r {
        Regime::Small => AsymptoticRegime::SmallArgument,
        Regime::Tempered => AsymptoticRegime::LargeArgumentTempered,
        Regime::Untempered => AsymptoticRegime::LargeArgumentUntempered,
        Regime::Auto if t < 1.0 => AsymptoticRegime::SmallArgument,
        Regime::Auto if p.all_tempered() => AsymptoticRegime::LargeArgumentTempered,
        Regime::Auto => AsymptoticRegime::LargeArgumentUntempered,
    }
}

fn renewal(a: &RenewalArgs, g: &Global, p: &MixtureParams) -> Result<Run, CliError> {
    let mut rows = Vec::with_capacity(a.t.len());
    for &t in &a.t {
        finite_positive("t", t)?;
        let regime = regime_for(a.regime, p, t);
        let asym = renewal_asymptote(p, t, regime)?;
        rows.push((t, renewal_numeric(p, t)?, asym, regime));
    }
    let artifact = match g.format {
        Format::Csv => {
            let mut body = String::from("t,value,asymptote,literature,regime\n");
            for (t, u, asym, regime) in &rows {
                body.push_str(&format!(
                    "{},{}\n",
                    fmt_row(&[*t, *u, asym.value, asym.literature]),
                    regime.name()
                ));
            }
            Artifact::new("renewal.csv", body)
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(t, u, asym, regime)| {
                    json!({"t": t, "value": u, "asymptote": asym, "regime": regime.name()})
                })
                .collect();
            Artifact::new("renewal.json", serde_json::to_string_pretty(&v).unwrap())
        }
    };
    Ok(Run::ok(vec![artifact]))
}

fn poisson(
    a: &PoissonArgs,
    g: &Global,
    p: &MixtureParams,
    rng: &RngConfig,
) -> Result<Run, CliError> {
    finite_positive("mu", a.mu)?;
    finite_positive("t", a.t)?;
    let pmf = if a.inverse {
        let method = match a.method {
            PoissonMethod::Quadrature => MttfppMethod::Quadrature,
            PoissonMethod::Transform => MttfppMethod::Transform,
            PoissonMethod::Mc => {
                require(a.samples >= 1, "samples", a.samples, "samples >= 1")?;
                MttfppMethod::MonteCarlo {
                    samples: a.samples,
                    path_resolution: 256,
                    rng: *rng,
                }
            }
        };
        pmf_mttfpp(p, a.mu, a.t, a.k, method)?
    } else {
        let mut pmf = pmf_mtsfpp(p, a.mu, a.t, a.k)?;
        // the defect target may have grown the order; report what was asked for
        pmf.probs.truncate(a.k + 1);
        mtss::PmfVector::from_raw(pmf.probs)
    };
    let artifact = match g.format {
        Format::Csv => Artifact::new("pmf.csv", pmf.to_csv()),
        Format::Json => Artifact::new("pmf.json", pmf.to_json()),
    };
    Ok(Run::ok(vec![artifact]))
}

const TRANSFORM_S: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const TRANSFORM_TOL: f64 = 1e-8;

fn with_transform_identity(mut rep: VerificationReport, err: f64) -> VerificationReport {
    let ok = err < TRANSFORM_TOL;
    rep.grid["transform_identity"] =
        json!({"s": TRANSFORM_S, "max_rel_error": err, "tolerance": TRANSFORM_TOL, "pass": ok});
    rep.pass &= ok;
    rep
}

fn verify(a: &VerifyArgs, p: &MixtureParams, rng: &RngConfig) -> Result<Run, CliError> {
    finite_positive("t", a.t)?;
    let quad = QuadratureConfig::default();
    let rep = match a.suite {
        Suite::FpkMtss => {
            require(
                a.refinements >= 1,
                "refinements",
                a.refinements,
                "refinements >= 1",
            )?;
            let spec = MtssGrid {
                halvings: a.refinements,
                ..MtssGrid::default()
            };
            let rep = mtss_refinement(p, a.t, &spec, &quad)?;
            with_transform_identity(rep, mtss_transform_identity(p, a.t, &TRANSFORM_S)?)
        }
        Suite::FpkImtss => {
            require(
                a.refinements >= 1,
                "refinements",
                a.refinements,
                "refinements >= 1",
            )?;
            let spec = ImtssGrid {
                halvings: a.refinements,
                ..ImtssGrid::default()
            };
            let rep = imtss_refinement(p, a.t, &spec, &quad)?;
            with_transform_identity(rep, imtss_transform_identity(p, 0.7, &TRANSFORM_S)?)
        }
        Suite::Tcbm => tcbm_suite(a, p, rng)?,
        Suite::Poisson => poisson_suite(a, p)?,
    };
    let pass = rep.pass;
    Ok(Run {
        artifacts: vec![Artifact::new("report.json", rep.to_json())],
        pass,
    })
}

fn tcbm_suite(
    a: &VerifyArgs,
    p: &MixtureParams,
    rng: &RngConfig,
) -> Result<VerificationReport, CliError> {
    let mc = (a.samples > 0).then_some(TcbmMonteCarlo {
        samples: a.samples,
        rng: *rng,
    });
    let mut rep = tcbm_transform_check(p, a.t, &[0.0, 0.5, 1.0, 2.0, 4.0], mc)?;
    if a.samples > 0 {
        // B(E(t)) has variance E E(t) = U(t)
        let sampler = ImtssSampler::new(p, a.t, 128)?;
        let stream = RngConfig::new(rng.seed.wrapping_add(1), rng.substream_count)?;
        let draws = stream.batch(a.samples, |r, _| {
            sample_tcbm(p, a.t, r, Clock::Imtss(&sampler, GridConvention::Midpoint))
        })?;
        let (var, se) = variance_se(&draws);
        let u = renewal_numeric(p, a.t)?;
        let ok = (var - u).abs() <= 3.0 * se;
        rep.grid["inverse_clock_variance"] = json!({
            "samples": a.samples, "sample_variance": var, "standard_error": se,
            "renewal": u, "path_resolution": 128, "convention": "midpoint", "pass": ok,
        });
        rep.pass &= ok;
    }
    Ok(rep)
}

fn poisson_suite(a: &VerifyArgs, p: &MixtureParams) -> Result<VerificationReport, CliError> {
    finite_positive("mu", a.mu)?;
    let (mu, t, k_max) = (a.mu, a.t, 20usize);
    let pmf = pmf_mtsfpp(p, mu, t, k_max)?;
    let total: f64 = pmf.probs.iter().sum();
    let normalization = (total - 1.0).abs();
    let pgf_error = [0.0, 0.3, 0.7, 1.0]
        .iter()
        .map(|&z| Ok((pmf.pgf(z) - pgf_mtsfpp(p, mu, z, t)?.value).abs()))
        .collect::<mtss::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let ode = pmf_ode_residual_mtsfpp(p, mu, t, k_max, 1e-5)?;
    let inverse = pmf_mttfpp(p, mu, t, 60, MttfppMethod::Quadrature)?;
    let mean_ratio = inverse.mean() / (mu * renewal_numeric(p, t)?);
    let checks = [
        normalization < 1e-8,
        pgf_error < 1e-7,
        ode.max_abs() < 1e-4,
        (mean_ratio - 1.0).abs() < 0.01,
    ];
    Ok(VerificationReport {
        check_name: "poisson".into(),
        params: p.clone(),
        grid: json!({
            "mu": mu, "t": t, "k_max": k_max,
            "normalization_error": normalization, "defect": pmf.defect, "clipped": pmf.clipped,
            "pgf_max_error": pgf_error,
            "ode_residual_max": ode.max_abs(),
            "inverse_clock_mean_ratio": mean_ratio,
        }),
        norms: Norms {
            max: ode.max_abs(),
            l1: ode.residual.iter().map(|r| r.abs()).sum(),
        },
        refinement_slopes: Vec::new(),
        pass: checks.iter().all(|&c| c),
    })
}
