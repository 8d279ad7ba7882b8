//! `qarch` command line.
//!
//! Exit status: 0 success, 1 usage, 2 data error, 3 partial batch failure.

use std::fmt::Write as _;
use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qarch::innovations::horizon_innovations;
use qarch::pipeline::{
    analyze_series, batch_report, exit_code, load_manifest, load_prices_file, parse_published, published_report,
    AnalysisConfig, BatchReport,
};
use qarch::simulate::{run_replicas, simulate, OuParams, ProcessSpec};
use qarch::stats::{mean_test, moments, parse_distributions, variance_test, InnovationDistribution};
use qarch::volatility::AffineParams;
use qarch::{extract_innovations, linear_variance, Error, KernelSpec, Result, ReturnKind};

#[derive(Parser)]
#[command(name = "qarch", version, about = "Quadratic ARCH volatility and innovation statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the lag weights of a kernel as `lag,weight` CSV
    Weights {
        #[arg(long, default_value = "lmarch")]
        kernel: KernelSpec,
    },
    /// Realized innovations of a price file as `date,eps` CSV
    Innovations {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "lmarch")]
        kernel: KernelSpec,
        #[arg(long, default_value = "log")]
        returns: ReturnKind,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
    },
    /// Mean and variance tests for one price file
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Series name (defaults to the file stem)
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Report table for a manifest of price files or for published statistics
    Report {
        #[arg(long, conflicts_with = "published", required_unless_present = "published")]
        manifest: Option<PathBuf>,
        /// CSV with name,startDate,length,mean,variance columns
        #[arg(long)]
        published: Option<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Simulate ARCH paths
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct AnalysisArgs {
    #[arg(long, default_value = "lmarch")]
    kernel: KernelSpec,
    /// Comma separated assumptions for the variance p-values
    #[arg(long, default_value = "st6,st5")]
    dist: String,
    #[arg(long, default_value_t = 1)]
    horizon: usize,
    #[arg(long, default_value = "log")]
    returns: ReturnKind,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl AnalysisArgs {
    fn config(&self) -> Result<AnalysisConfig> {
        if self.horizon == 0 {
            return Err(Error::Usage("--horizon must be at least 1".into()));
        }
        Ok(AnalysisConfig {
            kernel: self.kernel,
            assumptions: parse_distributions(&self.dist)?,
            horizon: self.horizon,
            returns: self.returns,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    /// One row per replica and step
    Paths,
    /// One row of innovation statistics per replica
    Summary,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "lmarch")]
    kernel: KernelSpec,
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Innovation distribution: normal or st<nu>
    #[arg(long, default_value = "normal")]
    dist: InnovationDistribution,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long)]
    w_inf: Option<f64>,
    /// Long-run daily volatility of the affine estimator
    #[arg(long, requires = "w_inf")]
    sigma_inf: Option<f64>,
    /// OU pull-back time scale in days
    #[arg(long)]
    ou_tau: Option<f64>,
    #[arg(long, default_value_t = 20, requires = "ou_tau")]
    ou_lag: usize,
    #[arg(long, default_value_t = 1e-4)]
    init_variance: f64,
    #[arg(long, default_value_t = 100.0)]
    p0: f64,
    /// Total kernel mass; values other than 1 give inconsistent processes
    #[arg(long, default_value_t = 1.0)]
    weight_sum: f64,
    #[arg(long, value_enum, default_value_t = Output::Summary)]
    output: Output,
    /// Assumptions for the variance p-values in summary output
    #[arg(long, default_value = "st6,normal")]
    assumptions: String,
}

fn render(report: &BatchReport, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv(),
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<String> {
    let kernel = args.kernel.build()?;
    let affine = match (args.w_inf, args.sigma_inf) {
        (Some(w_inf), sigma_inf) => Some(AffineParams { w_inf, sigma_inf: sigma_inf.unwrap_or(args.init_variance.sqrt()) }),
        _ => None,
    };
    let spec = ProcessSpec {
        kernel,
        weight_sum: args.weight_sum,
        affine,
        gamma: args.gamma,
        ou: args.ou_tau.map(|tau| OuParams { tau, n_lag: args.ou_lag }),
        dist: args.dist,
        init_variance: args.init_variance,
        p0: args.p0,
    };
    spec.validate()?;
    let assumptions = parse_distributions(&args.assumptions)?;
    let rows = run_replicas(args.replicas, args.seed, |i, seed| -> Result<String> {
        let path = simulate(&spec, args.steps, seed)?;
        let mut out = String::new();
        match args.output {
            Output::Paths => {
                let returns = path.returns();
                for t in 0..path.steps() {
                    let _ = writeln!(
                        out,
                        "{i},{},{},{},{},{}",
                        returns.dates()[t],
                        path.log_prices()[t + 1].exp(),
                        returns.returns()[t],
                        path.true_variance()[t],
                        path.drawn_eps()[t]
                    );
                }
            }
            Output::Summary => {
                let forecast = linear_variance(path.returns(), &spec.kernel)?;
                let eps = extract_innovations(path.returns(), &forecast)?;
                let m = moments(eps.eps())?;
                let _ = write!(out, "{i},{seed},{},{},{},{}", m.n, m.mu_hat, mean_test(m.mu_hat, m.n).p, m.var_hat);
                for d in &assumptions {
                    let _ = write!(out, ",{}", variance_test(m.var_hat, m.n, *d)?.p);
                }
                out.push('\n');
            }
        }
        Ok(out)
    });
    let mut out = match args.output {
        Output::Paths => "replica,date,price,return,variance,eps\n".to_string(),
        Output::Summary => {
            let labels: Vec<String> = assumptions.iter().map(|d| format!("p-value {}", d.label())).collect();
            format!("replica,seed,length,mean,p-value,variance,{}\n", labels.join(","))
        }
    };
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(String, u8)> {
    match cli.command {
        Command::Weights { kernel } => {
            let weights = kernel.build()?;
            let mut out = String::from("lag,weight\n");
            for (l, w) in weights.weights().iter().enumerate() {
                let _ = writeln!(out, "{l},{w}");
            }
            Ok((out, 0))
        }
        Command::Innovations { input, kernel, returns, horizon } => {
            let prices = load_prices_file(&input)?;
            let eps = horizon_innovations(&prices, &kernel.build()?, horizon, returns)?;
            let mut out = String::from("date,eps\n");
            for (d, e) in eps.dates().iter().zip(eps.eps()) {
                let _ = writeln!(out, "{d},{e}");
            }
            Ok((out, 0))
        }
        Command::Analyze { input, name, analysis } => {
            let config = analysis.config()?;
            let mut prices = load_prices_file(&input)?;
            if let Some(name) = name {
                prices = qarch::PriceSeries::new(name, prices.dates().to_vec(), prices.prices().to_vec())?;
            }
            let row = analyze_series(&prices, &config)?;
            let report = BatchReport { assumptions: config.assumptions, rows: vec![Ok(row)] };
            Ok((render(&report, analysis.format), 0))
        }
        Command::Report { manifest, published, analysis } => {
            let config = analysis.config()?;
            let report = match (manifest, published) {
                (Some(manifest), None) => batch_report(&load_manifest(&manifest)?, &config)?,
                (None, Some(published)) => {
                    published_report(&parse_published(File::open(published)?)?, &config.assumptions)?
                }
                _ => return Err(Error::Usage("give exactly one of --manifest or --published".into())),
            };
            let status = if report.failures() > 0 { 3 } else { 0 };
            Ok((render(&report, analysis.format), status))
        }
        Command::Simulate(args) => Ok((run_simulate(&args)?, 0)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((out, status)) => {
            print!("{out}");
            ExitCode::from(status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
