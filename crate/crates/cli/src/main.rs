//! Command-line front end: exact risk measures, single-sample estimation,
//! the simulation study, and the historical backtest.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use tailrisk::distributions::{BaselineModel, Family, Seed};
use tailrisk::estimators::{estimate_bmh, estimate_ipbmh, estimate_mh, MethodId, RiskEstimate};
use tailrisk::harness::{
    historical_backtest, read_price_csv, run_study, write_backtest_csv, write_study_csv,
    ReturnSeries, StudyGrid,
};
use tailrisk::mcmc::ChainConfig;
use tailrisk::numfmt::{sig7, sig7_opt};
use tailrisk::risk;

#[derive(Parser)]
#[command(name = "tailrisk", version, about = "Tail-risk (VaR/CVaR) estimation toolkit")]
struct Cli {
    /// Worker threads for study/backtest fan-out (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact VaR and CVaR of a fully specified family.
    Risk(RiskArgs),
    /// Estimate VaR/CVaR from a sample (file or synthetic generator).
    Estimate(EstimateArgs),
    /// Monte Carlo simulation study over a parameter grid.
    Study(StudyArgs),
    /// Expanding-window historical backtest on a price file.
    Backtest(BacktestArgs),
}

#[derive(Args)]
struct FamilyParams {
    /// Family: exp, gamma, normal or cauchy.
    #[arg(long)]
    family: String,

    /// Rate λ (exp).
    #[arg(long)]
    lambda: Option<f64>,
    /// Shape α (gamma).
    #[arg(long)]
    alpha: Option<f64>,
    /// Rate β (gamma).
    #[arg(long)]
    beta: Option<f64>,
    /// Mean μ (normal).
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Standard deviation σ (normal).
    #[arg(long)]
    sigma: Option<f64>,
    /// Location γ (cauchy).
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Scale δ (cauchy).
    #[arg(long)]
    delta: Option<f64>,
}

impl FamilyParams {
    fn resolve(&self) -> Result<BaselineModel, String> {
        let family = Family::from_str(&self.family).map_err(|e| e.to_string())?;
        let pick = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| format!("--{flag} is required for --family {family}"))
        };
        let params = match family {
            Family::Exponential => vec![pick(self.lambda, "lambda")?],
            Family::Gamma => vec![pick(self.alpha, "alpha")?, pick(self.beta, "beta")?],
            Family::Normal => vec![pick(self.mu, "mu")?, pick(self.sigma, "sigma")?],
            Family::Cauchy => vec![pick(self.gamma, "gamma")?, pick(self.delta, "delta")?],
        };
        BaselineModel::from_params(family, &params).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct ChainArgs {
    /// Total chain length.
    #[arg(long, default_value_t = 10_000)]
    chain_length: usize,
    /// Discarded initial iterations.
    #[arg(long, default_value_t = 3_000)]
    burn_in: usize,
    /// Thinning interval of the retained draws.
    #[arg(long, default_value_t = 50)]
    thin: usize,
    /// Base RNG seed.
    #[arg(long, env = "TAILRISK_SEED", default_value_t = 42)]
    seed: u64,
}

impl ChainArgs {
    fn config(&self) -> ChainConfig {
        ChainConfig {
            length: self.chain_length,
            burn_in: self.burn_in,
            thin: self.thin,
            proposal_scale: Vec::new(),
            seed: Seed(self.seed),
        }
    }

    fn describe(&self) -> String {
        format!(
            "chain={}/{}/{} seed={}",
            self.chain_length, self.burn_in, self.thin, self.seed
        )
    }
}

#[derive(Args)]
struct RiskArgs {
    #[command(flatten)]
    family: FamilyParams,

    /// Risk level.
    #[arg(long, default_value_t = 0.95)]
    p: f64,
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample file: one observation per line.
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,

    /// Synthetic generator, e.g. exp:1, normal:0,1, gamma:2,1, cauchy:0,1.
    #[arg(long = "gen")]
    gen: Option<String>,

    /// Sample size for --gen.
    #[arg(long, default_value_t = 1024)]
    n: usize,

    /// Estimation method: mh, bmh or ipbmh.
    #[arg(long)]
    method: String,

    /// Baseline family (required for bmh/ipbmh).
    #[arg(long)]
    family: Option<String>,

    /// Risk level.
    #[arg(long, default_value_t = 0.95)]
    p: f64,

    /// Threshold probability.
    #[arg(long = "pu", default_value_t = 0.9)]
    p_u: f64,

    #[command(flatten)]
    chain: ChainArgs,
}

#[derive(Args)]
struct StudyArgs {
    /// Family: exp, gamma, normal or cauchy.
    #[arg(long)]
    family: String,

    /// Parameter grid. Scale values for exp/normal/cauchy (e.g. 0.5,1,2);
    /// alpha:beta pairs for gamma (e.g. 0.5:0.25,2:1). Default: the 2^j
    /// grids.
    #[arg(long)]
    params: Option<String>,

    /// Sample sizes (default 32,64,128,256,512,1024).
    #[arg(long)]
    sizes: Option<String>,

    /// Replications per cell.
    #[arg(long, default_value_t = 100)]
    reps: usize,

    /// Methods to run, comma-separated.
    #[arg(long, default_value = "mh,bmh,ipbmh")]
    methods: String,

    /// Risk level.
    #[arg(long, default_value_t = 0.95)]
    p: f64,

    /// Threshold probability.
    #[arg(long = "pu", default_value_t = 0.9)]
    p_u: f64,

    /// Output file.
    #[arg(long)]
    out: PathBuf,

    #[command(flatten)]
    chain: ChainArgs,
}

#[derive(Args)]
struct BacktestArgs {
    /// Price file with header `date,price`.
    #[arg(long)]
    prices: PathBuf,

    /// Methods to run, comma-separated (bmh assumes a certain baseline and
    /// is excluded by default).
    #[arg(long, default_value = "mh,ipbmh")]
    methods: String,

    /// Risk level (of the loss tail).
    #[arg(long, default_value_t = 0.95)]
    p: f64,

    /// Threshold probability.
    #[arg(long = "pu", default_value_t = 0.9)]
    p_u: f64,

    /// Observations before the first estimated day.
    #[arg(long, default_value_t = 100)]
    warmup: usize,

    /// Work in percent returns instead of fractions.
    #[arg(long)]
    percent: bool,

    /// Output file.
    #[arg(long)]
    out: PathBuf,

    #[command(flatten)]
    chain: ChainArgs,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Risk(args) => cmd_risk(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Study(args) => cmd_study(args),
        Command::Backtest(args) => cmd_backtest(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_risk(args: RiskArgs) -> Result<(), String> {
    if !(args.p > 0.0 && args.p < 1.0) {
        return Err(format!("--p must lie in (0, 1), got {}", args.p));
    }
    let model = args.family.resolve()?;
    println!("config: family={model} p={}", sig7(args.p));
    let (var, cvar) = match model {
        BaselineModel::Exponential { rate } => {
            let r = risk::risk_exponential(rate, args.p);
            (r.var, r.cvar)
        }
        BaselineModel::Gamma { shape, rate } => (
            model.quantile(args.p).map_err(|e| e.to_string())?,
            Some(risk::cvar_gamma(shape, rate, args.p)),
        ),
        BaselineModel::Normal { mean, sd } => {
            let r = risk::risk_normal(mean, sd, args.p);
            (r.var, r.cvar)
        }
        BaselineModel::Cauchy { location, scale } => {
            (risk::var_cauchy(location, scale, args.p), None)
        }
    };
    println!("var {}", sig7(var));
    println!("cvar {}", sig7_opt(cvar));
    Ok(())
}

/// Parse a generator spec such as `exp:1` or `normal:0,1`.
fn parse_generator(spec: &str) -> Result<BaselineModel, String> {
    let (name, params) = spec
        .split_once(':')
        .ok_or_else(|| format!("generator spec `{spec}` must look like family:params"))?;
    let family = Family::from_str(name).map_err(|e| e.to_string())?;
    let values: Vec<f64> = params
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad parameter `{v}` in `{spec}`: {e}"))
        })
        .collect::<Result<_, _>>()?;
    BaselineModel::from_params(family, &values).map_err(|e| e.to_string())
}

fn read_sample_file(path: &PathBuf) -> Result<Vec<f64>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut sample = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line
            .parse()
            .map_err(|e| format!("{} line {}: bad value `{line}`: {e}", path.display(), idx + 1))?;
        sample.push(value);
    }
    if sample.is_empty() {
        return Err(format!("{} contains no observations", path.display()));
    }
    Ok(sample)
}

fn print_estimate(est: &RiskEstimate) {
    println!(
        "var {} [{}, {}]",
        sig7(est.var_point),
        sig7(est.var_lo),
        sig7(est.var_hi)
    );
    match est.cvar_point {
        Some(c) => println!(
            "cvar {} [{}, {}]",
            sig7(c),
            sig7_opt(est.cvar_lo),
            sig7_opt(est.cvar_hi)
        ),
        None => println!("cvar undefined"),
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), String> {
    let method = MethodId::from_str(&args.method).map_err(|e| e.to_string())?;
    let family = args
        .family
        .as_deref()
        .map(Family::from_str)
        .transpose()
        .map_err(|e| e.to_string())?;
    if method.requires_family() && family.is_none() {
        return Err(format!("--family is required for method {method}"));
    }
    let cfg = args.chain.config();
    let (sample, source) = match (&args.input, &args.gen) {
        (Some(path), None) => (read_sample_file(path)?, path.display().to_string()),
        (None, Some(spec)) => {
            let model = parse_generator(spec)?;
            (
                model.sample(args.n, cfg.seed.derive(0xDA7A)),
                format!("{model} n={}", args.n),
            )
        }
        (None, None) => return Err("one of --input or --gen is required".into()),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    println!(
        "config: method={method} family={} p={} p_u={} n={} source=[{source}] {}",
        family.map_or_else(|| "-".to_string(), |f| f.to_string()),
        sig7(args.p),
        sig7(args.p_u),
        sample.len(),
        args.chain.describe()
    );
    let est = match method {
        MethodId::Mh => estimate_mh(&sample, args.p, args.p_u, &cfg),
        MethodId::Bmh => estimate_bmh(&sample, family.unwrap(), args.p, args.p_u, &cfg),
        MethodId::Ipbmh => estimate_ipbmh(&sample, family.unwrap(), args.p, args.p_u, &cfg),
    }
    .map_err(|e| e.to_string())?;
    print_estimate(&est);
    Ok(())
}

fn parse_methods(spec: &str) -> Result<Vec<MethodId>, String> {
    spec.split(',')
        .map(|m| MethodId::from_str(m.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn parse_study_params(family: Family, spec: &str) -> Result<Vec<Vec<f64>>, String> {
    let parse_f64 = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad parameter `{v}`: {e}"))
    };
    spec.split(',')
        .map(|entry| match family {
            Family::Gamma => {
                let (a, b) = entry.split_once(':').ok_or_else(|| {
                    format!("gamma grid entries are alpha:beta pairs, got `{entry}`")
                })?;
                Ok(vec![parse_f64(a)?, parse_f64(b)?])
            }
            Family::Exponential => Ok(vec![parse_f64(entry)?]),
            Family::Normal | Family::Cauchy => Ok(vec![0.0, parse_f64(entry)?]),
        })
        .collect()
}

fn cmd_study(args: StudyArgs) -> Result<(), String> {
    let family = Family::from_str(&args.family).map_err(|e| e.to_string())?;
    let mut grid = StudyGrid::defaults(family);
    grid.replications = args.reps;
    grid.p = args.p;
    grid.p_u = args.p_u;
    grid.methods = parse_methods(&args.methods)?;
    grid.chain = args.chain.config();
    grid.seed = args.chain.seed;
    if let Some(spec) = &args.params {
        grid.params = parse_study_params(family, spec)?;
    }
    if let Some(spec) = &args.sizes {
        grid.sizes = spec
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad size `{v}`: {e}"))
            })
            .collect::<Result<_, _>>()?;
    }
    println!(
        "config: study family={family} params={:?} sizes={:?} reps={} methods=[{}] p={} p_u={} {}",
        grid.params,
        grid.sizes,
        grid.replications,
        grid.methods
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(","),
        sig7(grid.p),
        sig7(grid.p_u),
        args.chain.describe()
    );
    let cells = run_study(&grid).map_err(|e| e.to_string())?;
    write_study_csv(&cells, &args.out).map_err(|e| e.to_string())?;
    println!("wrote {} rows to {}", cells.len(), args.out.display());
    Ok(())
}

fn cmd_backtest(args: BacktestArgs) -> Result<(), String> {
    let methods = parse_methods(&args.methods)?;
    let (dates, prices) = read_price_csv(&args.prices).map_err(|e| e.to_string())?;
    let series = ReturnSeries::from_prices(Some(dates), prices, args.percent)
        .map_err(|e| e.to_string())?;
    println!(
        "config: backtest prices={} returns={} methods=[{}] p={} p_u={} warmup={} percent={} {}",
        args.prices.display(),
        series.returns.len(),
        methods
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(","),
        sig7(args.p),
        sig7(args.p_u),
        args.warmup,
        args.percent,
        args.chain.describe()
    );
    let rows = historical_backtest(
        &series,
        args.p,
        args.p_u,
        &methods,
        args.warmup,
        &args.chain.config(),
    )
    .map_err(|e| e.to_string())?;
    write_backtest_csv(&rows, &args.out).map_err(|e| e.to_string())?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}
