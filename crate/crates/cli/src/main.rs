//! `gsample`: command-line access to the greedy sampler, the comparison
//! sequences, the discrepancy metrics and the mean-field analyzer.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use greedy_sampling::baselines::{SequenceGenerator, SequenceKind};
use greedy_sampling::experiments::{
    benchmark_csv, benchmark_reports, bimodality, clustered_ends_run, energy_dynamics, random_points, RunConfig,
    SeedSpec,
};
use greedy_sampling::heuristics::predict_next;
use greedy_sampling::mean_field::{analyze, MeanFieldMeasure};
use greedy_sampling::metrics::REPORT_CSV_HEADER;
use greedy_sampling::point_set::format_real;
use greedy_sampling::targets::retarget;
use greedy_sampling::{extend, next_point, DiscrepancyReport, GridKind, SortedPointSet, TargetDistribution};

#[derive(Parser, Debug)]
#[command(name = "gsample", version, about = "Greedy online sampling on [0,1]")]
struct Cli {
    /// Initial points: one value per line, optional `num/den` column, `#` comments.
    #[arg(long, global = true)]
    seed_file: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for every random draw; required whenever randomness is used.
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
    /// Target grid of the transport energy.
    #[arg(long, global = true, value_enum, default_value_t = Grid::End)]
    grid: Grid,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Grid {
    /// Targets i/n.
    End,
    /// Targets (2i−1)/(2n).
    Centered,
}

impl From<Grid> for GridKind {
    fn from(g: Grid) -> Self {
        match g {
            Grid::End => GridKind::End,
            Grid::Centered => GridKind::Centered,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Vdc,
    Kronecker,
    Kritzinger,
    Bernoulli,
    Energy,
}

impl Kind {
    fn sequence(self, grid: Grid) -> SequenceKind {
        match self {
            Kind::Vdc => SequenceKind::VanDerCorput,
            Kind::Kronecker => SequenceKind::KroneckerGolden,
            Kind::Kritzinger => SequenceKind::Kritzinger,
            Kind::Bernoulli => SequenceKind::PeriodicBernoulli,
            Kind::Energy => SequenceKind::Energy(grid.into()),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the first points of a sequence. Greedy kinds start from the seed
    /// file, or from {1/3, 1/2} when none is given.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        count: usize,
    },
    /// Add greedy points to the seed set and print the energy trace.
    Extend {
        #[arg(long)]
        count: usize,
        /// Also write the extended point set here.
        #[arg(long)]
        points_out: Option<PathBuf>,
    },
    /// Extend the seed values towards a target distribution.
    Retarget {
        /// Distribution spec as JSON, e.g. {"type":"gaussian","mean":0,"std":1}.
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        count: usize,
    },
    /// Discrepancy measures of the seed set.
    Metrics,
    /// Discrepancy of every scheduled prefix of a sequence.
    Bench {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Total number of points, seed included.
        #[arg(long)]
        total: usize,
        /// Start from this many iid uniform points (needs --rng-seed).
        #[arg(long)]
        random_count: Option<usize>,
        /// Evaluate every prefix, not just the logarithmic schedule.
        #[arg(long)]
        full_prefix: bool,
    },
    /// Consecutive energies of a greedy run, their projection and a
    /// two-component mixture test of that projection.
    Dynamics {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
    },
    /// JSON report of the continuous energy analysis of a density on [0,1].
    Meanfield {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Predicted versus actual next greedy point.
    Predict {
        /// Use this many iid uniform points instead of the seed file.
        #[arg(long)]
        random_count: Option<usize>,
    },
    /// Energies of the clustered-ends configuration and its first three
    /// greedy steps.
    Clustered {
        #[arg(long, default_value_t = 25)]
        m: usize,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        let closed_pipe = e.chain().any(|c| {
            c.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
        });
        if closed_pipe {
            return;
        }
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut out = open_output(cli.out.as_deref())?;
    match &cli.command {
        Command::Gen { kind, count } => gen(cli, *kind, *count, &mut out)?,
        Command::Extend { count, points_out } => extend_cmd(cli, *count, points_out.as_deref(), &mut out)?,
        Command::Retarget { dist, count } => retarget_cmd(cli, dist, *count, &mut out)?,
        Command::Metrics => metrics_cmd(cli, &mut out)?,
        Command::Bench {
            kind,
            total,
            random_count,
            full_prefix,
        } => bench(cli, *kind, *total, *random_count, *full_prefix, &mut out)?,
        Command::Dynamics { count, burn_in } => dynamics(cli, *count, *burn_in, &mut out)?,
        Command::Meanfield { dist } => meanfield(dist, &mut out)?,
        Command::Predict { random_count } => predict(cli, *random_count, &mut out)?,
        Command::Clustered { m } => clustered(cli, *m, &mut out)?,
    }
    out.flush().context("flushing output")?;
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn seed_set(cli: &Cli) -> Result<Option<SortedPointSet>> {
    cli.seed_file
        .as_deref()
        .map(|p| SortedPointSet::read_file(p).with_context(|| format!("reading {}", p.display())))
        .transpose()
}

fn require_rng_seed(cli: &Cli) -> Result<u64> {
    match cli.rng_seed {
        Some(s) => Ok(s),
        None => bail!("this command draws random points; pass --rng-seed"),
    }
}

/// Raw values for `retarget`, which may lie outside [0,1].
fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split(|c: char| c == ',' || c.is_whitespace()).next().unwrap_or_default();
        let v: f64 = first
            .parse()
            .with_context(|| format!("{}:{}: bad value {first:?}", path.display(), i + 1))?;
        values.push(v);
    }
    Ok(values)
}

fn gen(cli: &Cli, kind: Kind, count: usize, out: &mut dyn Write) -> Result<()> {
    let seq = kind.sequence(cli.grid);
    let seed = match seed_set(cli)? {
        Some(s) => s,
        None if seq.is_greedy() => SortedPointSet::default_seed(),
        None => SortedPointSet::new(),
    };
    let points: Vec<f64> = SequenceGenerator::new(seq, seed)?.take(count).map(|p| p.value()).collect();
    match cli.format {
        Format::Csv => {
            writeln!(out, "index,value")?;
            for (i, x) in points.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, format_real(*x))?;
            }
        }
        Format::Json => write_json(out, &json!({ "kind": seq, "points": points }))?,
    }
    Ok(())
}

fn extend_cmd(cli: &Cli, count: usize, points_out: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let seed = seed_set(cli)?.unwrap_or_default();
    let (all, trace) = extend(&seed, count, cli.grid.into())?;
    if let Some(p) = points_out {
        all.write_file(p)?;
    }
    match cli.format {
        Format::Csv => trace.write_csv(&mut *out)?,
        Format::Json => {
            let steps: Vec<_> = trace
                .entries
                .iter()
                .map(|e| json!({ "n": e.n, "chosen": e.chosen.value(), "energy": e.energy }))
                .collect();
            write_json(out, &json!({ "start": seed.len(), "steps": steps }))?;
        }
    }
    Ok(())
}

fn retarget_cmd(cli: &Cli, dist: &Path, count: usize, out: &mut dyn Write) -> Result<()> {
    let dist = TargetDistribution::from_json_file(dist)?;
    let values = match &cli.seed_file {
        Some(p) => read_values(p)?,
        None => Vec::new(),
    };
    let r = retarget(&values, &dist, count)?;
    match cli.format {
        Format::Csv => {
            writeln!(out, "value")?;
            for x in r.new_points() {
                writeln!(out, "{}", format_real(*x))?;
            }
        }
        Format::Json => write_json(
            out,
            &json!({
                "distribution": dist.spec(),
                "original_count": values.len(),
                "points_needed_estimate": r.plan.points_needed_estimate,
                "new_points": r.new_points(),
            }),
        )?,
    }
    Ok(())
}

fn metrics_cmd(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let Some(ps) = seed_set(cli)? else {
        bail!("metrics needs --seed-file");
    };
    let report = DiscrepancyReport::compute(&ps)?;
    let energy = greedy_sampling::energy_of(&ps, cli.grid.into())?;
    match cli.format {
        Format::Csv => {
            writeln!(out, "{REPORT_CSV_HEADER},energy")?;
            writeln!(out, "{},{}", report.csv_row(), format_real(energy))?;
        }
        Format::Json => {
            let mut v = serde_json::to_value(report)?;
            v["energy"] = json!(energy);
            write_json(out, &v)?;
        }
    }
    Ok(())
}

fn bench(
    cli: &Cli,
    kind: Kind,
    total: usize,
    random_count: Option<usize>,
    full_prefix: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let seq = kind.sequence(cli.grid);
    let seed = match (random_count, seed_set(cli)?) {
        (Some(_), Some(_)) => bail!("--random-count and --seed-file are mutually exclusive"),
        (Some(count), None) => SeedSpec::Random { count },
        (None, Some(ps)) => SeedSpec::Points {
            values: ps.values().to_vec(),
        },
        (None, None) if seq.is_greedy() => SeedSpec::DefaultSeed,
        (None, None) => SeedSpec::Empty,
    };
    let mut config = RunConfig::new(seed, seq, total);
    config.rng_seed = cli.rng_seed;
    config.full_prefix = full_prefix;
    match cli.format {
        Format::Csv => benchmark_csv(&config, &mut *out)?,
        Format::Json => write_json(out, &serde_json::to_value(benchmark_reports(&config)?)?)?,
    }
    Ok(())
}

fn dynamics(cli: &Cli, count: usize, burn_in: usize, out: &mut dyn Write) -> Result<()> {
    let seed = seed_set(cli)?.unwrap_or_else(SortedPointSet::default_seed);
    let (_, trace) = extend(&seed, count, cli.grid.into())?;
    let record = energy_dynamics(&trace, burn_in)?;
    match cli.format {
        Format::Csv => record.write_csv(&mut *out)?,
        Format::Json => {
            let report = bimodality(&record.projection)?;
            write_json(
                out,
                &json!({
                    "triples": record.triples.len(),
                    "bimodality": report,
                    "bimodal": report.is_bimodal(),
                    "projection": record.projection,
                }),
            )?;
        }
    }
    Ok(())
}

fn meanfield(dist: &Path, out: &mut dyn Write) -> Result<()> {
    let dist = TargetDistribution::from_json_file(dist)?;
    let m = MeanFieldMeasure::from_distribution(&dist)?;
    write_json(out, &serde_json::to_value(analyze(&m)?)?)
}

fn predict(cli: &Cli, random_count: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let ps = match (random_count, seed_set(cli)?) {
        (Some(_), Some(_)) => bail!("--random-count and --seed-file are mutually exclusive"),
        (Some(count), None) => random_points(count, require_rng_seed(cli)?),
        (None, Some(ps)) => ps,
        (None, None) => bail!("predict needs --seed-file or --random-count"),
    };
    let predicted = predict_next(&ps)?.point.value();
    let actual = next_point(&ps, cli.grid.into()).chosen.value();
    let gap = (predicted - actual).abs();
    match cli.format {
        Format::Csv => {
            writeln!(out, "predicted,actual,gap")?;
            writeln!(out, "{},{},{}", format_real(predicted), format_real(actual), format_real(gap))?;
        }
        Format::Json => write_json(out, &json!({ "predicted": predicted, "actual": actual, "gap": gap }))?,
    }
    Ok(())
}

fn clustered(cli: &Cli, m: usize, out: &mut dyn Write) -> Result<()> {
    let run = clustered_ends_run(m)?;
    match cli.format {
        Format::Csv => {
            writeln!(out, "step,chosen,energy")?;
            writeln!(out, "0,,{}", format_real(run.initial_energy))?;
            for (k, (x, e)) in run.chosen.iter().zip(&run.energies).enumerate() {
                writeln!(out, "{},{},{}", k + 1, format_real(*x), format_real(*e))?;
            }
        }
        Format::Json => {
            let mut v = serde_json::to_value(&run)?;
            v["first_step_increase"] = json!(run.first_step_increase());
            v["three_step_decrease"] = json!(run.three_step_decrease());
            write_json(out, &v)?;
        }
    }
    Ok(())
}
