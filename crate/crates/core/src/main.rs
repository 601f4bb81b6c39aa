use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rstat::bench::calibrate::{calibrate_sigma, coarse_grid, full_grid};
use rstat::bench::power::{run_power_experiment, PowerConfig};
use rstat::bench::qq;
use rstat::null::{build_null, NullKey};
use rstat::sntest::{r_test_single, r_test_two, NullSource, TestConfig, TestResult};
use rstat::{Alternative, DistributionSpec, Equalize, Error, NullDistribution, Result, RngSeed, Sample, Variant};

#[derive(Parser)]
#[command(name = "rstat", version, about = "Record-statistics tests for the signal-to-noise ratio")]
struct Cli {
    /// Master seed (default 0); every command is deterministic given it.
    /// For `power` it overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "RSTAT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-sample r-test of zero signal-to-noise ratio.
    Rtest(RtestArgs),
    /// Two-sample record test.
    Rtest2(Rtest2Args),
    /// Build a null table and save it.
    NullTable(NullTableArgs),
    /// Run a power experiment described by a JSON config.
    Power(PowerArgs),
    /// Measure sd(mean R0) on a grid of lengths and fit the sigma_N constants.
    Calibrate(CalibrateArgs),
    /// Normal QQ data of the single-sample null.
    Qq(QqArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct MonteCarlo {
    /// Permutations per statistic evaluation.
    #[arg(long, default_value_t = 10_000)]
    permutations: usize,
    /// Null draws.
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
}

#[derive(Args)]
struct Generator {
    /// Data law for null draws, e.g. `gaussian`, `student_t(nu=3)`.
    #[arg(long, default_value = "gaussian")]
    dist: String,
    /// Overrides the SNR of `--dist`.
    #[arg(long)]
    theta: Option<f64>,
    /// Overrides the Student-t tail parameter of `--dist`.
    #[arg(long)]
    nu: Option<f64>,
}

impl Generator {
    fn spec(&self) -> Result<DistributionSpec> {
        // `--nu` goes into the text before parsing, since parsing validates.
        let text = match (self.nu, self.dist.split_once('(')) {
            (None, _) => self.dist.clone(),
            (Some(nu), None) => format!("{}(nu={nu})", self.dist),
            (Some(nu), Some((name, rest))) => format!("{name}(nu={nu},{rest}"),
        };
        let mut spec: DistributionSpec = text.parse()?;
        if let Some(t) = self.theta {
            spec.theta = t;
        }
        if self.nu.is_some() {
            spec.nu = self.nu;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct TestOpts {
    #[command(flatten)]
    mc: MonteCarlo,
    #[arg(long, default_value = "two_sided")]
    alternative: String,
    /// Prebuilt null table; its key must match the test.
    #[arg(long)]
    null_table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RtestArgs {
    /// One value per line; `#` starts a comment; `-` reads stdin.
    input: PathBuf,
    #[command(flatten)]
    opts: TestOpts,
}

#[derive(Args)]
struct Rtest2Args {
    /// First sample, or a two-column `x,y` file when `y` is omitted.
    x: PathBuf,
    y: Option<PathBuf>,
    #[arg(long)]
    variant: String,
    #[arg(long, default_value = "trim")]
    equalize: String,
    #[command(flatten)]
    generator: Generator,
    #[command(flatten)]
    opts: TestOpts,
}

#[derive(Args)]
struct NullTableArgs {
    #[arg(long)]
    n: usize,
    /// Second sample length for two-sample variants (defaults to `n`).
    #[arg(long)]
    n_y: Option<usize>,
    #[arg(long, default_value = "single_r0")]
    variant: String,
    #[arg(long, default_value = "trim")]
    equalize: String,
    #[command(flatten)]
    mc: MonteCarlo,
    #[command(flatten)]
    generator: Generator,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the ROC curves (`method,fpr,tpr`).
    #[arg(long)]
    roc_out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// `coarse` (11 lengths), `full` (21 lengths) or a comma-separated list.
    #[arg(long, default_value = "coarse")]
    grid: String,
    #[arg(long, default_value_t = 5000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QqArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let reader: Box<dyn BufRead> = if path.as_os_str() == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        let file = fs::File::open(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Box::new(BufReader::new(file))
    };
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((i + 1, body.to_string()));
        }
    }
    Ok(out)
}

fn parse_value(path: &Path, line: usize, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{}:{line}: not a number: {text:?}", path.display())))?;
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("{}:{line}: non-finite value", path.display())));
    }
    Ok(v)
}

fn read_column(path: &Path) -> Result<Sample> {
    let values = read_lines(path)?
        .iter()
        .map(|(line, text)| {
            if text.contains(',') {
                return Err(Error::InvalidInput(format!(
                    "{}:{line}: expected one value per line",
                    path.display()
                )));
            }
            parse_value(path, *line, text)
        })
        .collect::<Result<Vec<_>>>()?;
    Sample::new(values)
}

fn read_pairs(path: &Path) -> Result<(Sample, Sample)> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (line, text) in read_lines(path)? {
        let cols: Vec<&str> = text.split(',').collect();
        if cols.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "{}:{line}: expected two comma-separated columns",
                path.display()
            )));
        }
        x.push(parse_value(path, line, cols[0])?);
        y.push(parse_value(path, line, cols[1])?);
    }
    Ok((Sample::new(x)?, Sample::new(y)?))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

fn write_json<T: serde::Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

fn emit_result(res: &TestResult, format: Format, out: &Option<PathBuf>) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Json => write_json(&mut *w, res)?,
        Format::Csv => {
            writeln!(w, "method,statistic,normalized,p_value,alternative,n,n_y,p_perms,m_draws,seed,ties_seen,parametric")?;
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                res.method,
                res.statistic,
                opt(res.normalized),
                res.p_value,
                res.alternative.name(),
                res.n_x,
                res.n_y.map(|v| v.to_string()).unwrap_or_default(),
                res.p_perms,
                res.m_draws,
                res.seed,
                res.ties_seen,
                res.parametric
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn test_config(opts: &TestOpts, seed: u64) -> Result<TestConfig> {
    let null_source = match &opts.null_table {
        Some(p) => NullSource::Table(NullDistribution::load(p)?),
        None => NullSource::Fresh,
    };
    Ok(TestConfig {
        p_perms: opts.mc.permutations,
        m_draws: opts.mc.draws,
        alternative: opts.alternative.parse::<Alternative>()?,
        seed: RngSeed::new(seed),
        null_source,
        ..TestConfig::default()
    })
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Rtest(a) => {
            let cfg = test_config(&a.opts, seed)?;
            let x = read_column(&a.input)?;
            emit_result(&r_test_single(&x, &cfg)?, a.opts.format, &a.opts.out)
        }
        Command::Rtest2(a) => {
            let variant: Variant = a.variant.parse()?;
            let mut cfg = test_config(&a.opts, seed)?;
            cfg.equalize = a.equalize.parse()?;
            cfg.generator = a.generator.spec()?;
            let (x, y) = match &a.y {
                Some(y) => (read_column(&a.x)?, read_column(y)?),
                None => read_pairs(&a.x)?,
            };
            emit_result(&r_test_two(&x, &y, variant, &cfg)?, a.opts.format, &a.opts.out)
        }
        Command::NullTable(a) => {
            let variant: Variant = a.variant.parse()?;
            let equalize: Equalize = a.equalize.parse()?;
            let key = if variant.is_two_sample() {
                NullKey::two(variant, a.n, a.n_y.unwrap_or(a.n), equalize, a.mc.permutations)
            } else {
                if a.n_y.is_some() {
                    return Err(Error::InvalidInput("--n-y only applies to two-sample variants".into()));
                }
                NullKey::single(a.n, a.mc.permutations)
            }
            .with_generator(a.generator.spec()?);
            let table = build_null(key, a.mc.draws, RngSeed::new(seed))?;
            table.save(&a.out)?;
            let summary = serde_json::json!({
                "key": table.key,
                "m_draws": table.m_draws,
                "seed": table.seed,
                "summary": table.summary(),
                "path": a.out.display().to_string(),
            });
            let mut w = sink(&None)?;
            write_json(&mut *w, &summary)?;
            w.flush()?;
            Ok(())
        }
        Command::Power(a) => {
            let text = fs::read_to_string(&a.config)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", a.config.display())))?;
            let mut config: PowerConfig = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("bad power config: {e}")))?;
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            let report = run_power_experiment(&config)?;
            let mut w = sink(&a.out)?;
            match a.format {
                Format::Csv => report.write_csv(&mut w)?,
                Format::Json => write_json(
                    &mut *w,
                    &serde_json::json!({ "config": report.config, "rows": report.rows }),
                )?,
            }
            w.flush()?;
            if let Some(p) = &a.roc_out {
                let mut r = sink(&Some(p.clone()))?;
                report.write_roc_csv(&mut r)?;
                r.flush()?;
            }
            Ok(())
        }
        Command::Calibrate(a) => {
            let grid = match a.grid.as_str() {
                "coarse" => coarse_grid(),
                "full" => full_grid(),
                list => list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidInput(format!("bad grid length {t:?}")))
                    })
                    .collect::<Result<_>>()?,
            };
            let fit = calibrate_sigma(&grid, a.samples, a.permutations, RngSeed::new(seed))?;
            let mut w = sink(&a.out)?;
            match a.format {
                Format::Csv => {
                    fit.write_csv(&mut w)?;
                    writeln!(w, "# seed: {seed}")?;
                }
                Format::Json => write_json(&mut *w, &serde_json::json!({ "seed": seed, "fit": fit }))?,
            }
            w.flush()?;
            Ok(())
        }
        Command::Qq(a) => {
            let points = qq::qq_data(a.n, a.draws, a.permutations, RngSeed::new(seed))?;
            let mut w = sink(&a.out)?;
            match a.format {
                Format::Csv => {
                    qq::write_csv(&points, &mut w)?;
                    writeln!(w, "# seed: {seed}")?;
                }
                Format::Json => write_json(&mut *w, &serde_json::json!({ "seed": seed, "points": points }))?,
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
