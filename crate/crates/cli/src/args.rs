use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Mixture used when no `--comp` is given.
pub const DEFAULT_COMPONENTS: [(f64, f64, f64); 2] = [(0.6, 1.0, 0.5), (0.9, 2.0, 0.5)];

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "mtss",
    version,
    about = "Sampling, densities, moments and equation checks for mixtures of tempered stable subordinators"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Mixture component `alpha:lambda:weight`; repeat for more components.
    /// Defaults to 0.6:1:0.5 and 0.9:2:0.5.
    #[arg(long = "comp", global = true, value_parser = parse_component)]
    pub comp: Vec<(f64, f64, f64)>,

    /// Seed of the random streams.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Number of random substreams; fixes the output independently of `--threads`.
    #[arg(long, global = true, default_value_t = 64)]
    pub substreams: usize,

    /// Worker threads (0 lets the runtime decide).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory for output files and `manifest.json`; without it outputs go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Sample paths of S, or of the inverse E at target times.
    Sample(SampleArgs),
    /// Density of S(t) on a grid of x, or of E(t) with `--inverse`.
    Pdf(PdfArgs),
    /// Lévy density on a grid.
    Levy(GridArgs),
    /// Raw moments and cumulants of S(t).
    Moments(MomentsArgs),
    /// Renewal function U(t) with its asymptote.
    Renewal(RenewalArgs),
    /// PMF of the Poisson process run on S (or on E with `--inverse`).
    Poisson(PoissonArgs),
    /// Run a verification suite; exits with 1 if it fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Sample E(t) at `--targets` instead of paths of S.
    #[arg(long)]
    pub inverse: bool,
    /// Comma-separated increasing target times for `--inverse`.
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<f64>,
    /// Grid steps per U(max target) for `--inverse`.
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = Convention::Left)]
    pub convention: Convention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Left,
    Midpoint,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.05)]
    pub xmin: f64,
    #[arg(long, default_value_t = 5.0)]
    pub xmax: f64,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PdfArgs {
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = PdfMethod::Contour)]
    pub method: PdfMethod,
    /// Density of E(t) in x instead of S(t).
    #[arg(long)]
    pub inverse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PdfMethod {
    Contour,
    Talbot,
    Stehfest,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4])]
    pub orders: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct RenewalArgs {
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
    pub t: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Regime::Auto)]
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Small t below 1, large t above (tempered or untempered by the rates).
    Auto,
    Small,
    Tempered,
    Untempered,
}

#[derive(Debug, Args, Serialize)]
pub struct PoissonArgs {
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Largest count reported.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Run the Poisson process on E instead of S.
    #[arg(long)]
    pub inverse: bool,
    /// Route for `--inverse`.
    #[arg(long, value_enum, default_value_t = PoissonMethod::Quadrature)]
    pub method: PoissonMethod,
    /// Draws for `--method mc`.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoissonMethod {
    Quadrature,
    Transform,
    Mc,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Number of grid halvings in refinement studies.
    #[arg(long, default_value_t = 3)]
    pub refinements: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Poisson intensity for the `poisson` suite.
    #[arg(long, default_value_t = 0.4)]
    pub mu: f64,
    /// Monte Carlo draws for the `tcbm` suite (0 skips the variance check).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Suite {
    #[value(name = "fpk-mtss")]
    #[serde(rename = "fpk-mtss")]
    FpkMtss,
    #[value(name = "fpk-imtss")]
    #[serde(rename = "fpk-imtss")]
    FpkImtss,
    #[value(name = "tcbm")]
    #[serde(rename = "tcbm")]
    Tcbm,
    #[value(name = "poisson")]
    #[serde(rename = "poisson")]
    Poisson,
}

fn parse_component(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!(
            "component `{s}` must have the form alpha:lambda:weight"
        ));
    }
    let num = |name: &str, v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("component {name} `{v}` is not a number"))
    };
    Ok((
        num("alpha", parts[0])?,
        num("lambda", parts[1])?,
        num("weight", parts[2])?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_grammar() {
        assert_eq!(parse_component("0.5:1:0.25"), Ok((0.5, 1.0, 0.25)));
        assert!(parse_component("0.5:1").is_err());
        assert!(parse_component("a:1:1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
