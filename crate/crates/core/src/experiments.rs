//! Reproduction harness: the explicit configuration on which one greedy step
//! raises the energy, energy-dynamics summaries of long runs, and a streaming
//! discrepancy benchmark over prefix sizes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::baselines::{SequenceGenerator, SequenceKind};
use crate::error::{Error, Result};
use crate::greedy::{next_point, EnergyTrace};
use crate::metrics::{DiscrepancyReport, REPORT_CSV_HEADER};
use crate::point_set::{energy_of, GridKind, SortedPointSet, UnitPoint};

/// Largest total size evaluated at every prefix by default.
pub const FULL_PREFIX_LIMIT: usize = 10_000;
/// Sizes per decade in the logarithmic schedule.
pub const SCHEDULE_STEPS_PER_DECADE: u32 = 40;

/// The `n = 4m` point configuration: `m` copies of 0, the points `k/n` for
/// `m < k <= 3m`, then `m` copies of 1.
pub fn clustered_ends_example(m: usize) -> Result<SortedPointSet> {
    if m == 0 {
        return Err(Error::arg("m must be at least 1"));
    }
    let n = 4 * m as u64;
    let zeros = (0..m).map(|_| UnitPoint::from_ratio(0, 1));
    let middle = (m as u64 + 1..=3 * m as u64).map(|k| UnitPoint::from_ratio(k, n));
    let ones = (0..m).map(|_| UnitPoint::from_ratio(1, 1));
    let points = zeros.chain(middle).chain(ones).collect::<Result<Vec<_>>>()?;
    Ok(SortedPointSet::from_points(points))
}

/// Energies of the configuration and of its first three greedy extensions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusteredEndsRun {
    pub m: usize,
    pub initial_energy: f64,
    /// Energies after one, two and three greedy steps.
    pub energies: [f64; 3],
    pub chosen: [f64; 3],
}

impl ClusteredEndsRun {
    /// `E_{n+1} − E_n`.
    pub fn first_step_increase(&self) -> f64 {
        self.energies[0] - self.initial_energy
    }

    /// `E_n − E_{n+3}`.
    pub fn three_step_decrease(&self) -> f64 {
        self.initial_energy - self.energies[2]
    }
}

pub fn clustered_ends_run(m: usize) -> Result<ClusteredEndsRun> {
    let mut ps = clustered_ends_example(m)?;
    let initial_energy = energy_of(&ps, GridKind::End)?;
    let mut energies = [0.0; 3];
    let mut chosen = [0.0; 3];
    for i in 0..3 {
        let step = next_point(&ps, GridKind::End);
        ps.insert_in_place(step.chosen);
        energies[i] = step.new_energy;
        chosen[i] = step.chosen.value();
    }
    Ok(ClusteredEndsRun {
        m,
        initial_energy,
        energies,
        chosen,
    })
}

/// Consecutive-energy summaries of a trace.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DynamicsRecord {
    pub pairs: Vec<(f64, f64)>,
    pub triples: Vec<(f64, f64, f64)>,
    /// `0.2 E_n − 0.35 E_{n+1} + 0.2 E_{n+2}` for each triple.
    pub projection: Vec<f64>,
}

impl DynamicsRecord {
    /// `E_n,E_{n+1},E_{n+2},projection` CSV, one row per triple.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        use crate::point_set::format_real;
        writeln!(out, "e_n,e_n1,e_n2,projection")?;
        for (t, p) in self.triples.iter().zip(&self.projection) {
            writeln!(
                out,
                "{},{},{},{}",
                format_real(t.0),
                format_real(t.1),
                format_real(t.2),
                format_real(*p)
            )?;
        }
        Ok(())
    }
}

/// Pairs, triples and the fixed linear projection of the energies after
/// dropping the first `burn_in` entries.
pub fn energy_dynamics(trace: &EnergyTrace, burn_in: usize) -> Result<DynamicsRecord> {
    if trace.len() <= burn_in + 2 {
        return Err(Error::arg(format!(
            "trace of length {} is too short for burn-in {burn_in}",
            trace.len()
        )));
    }
    let e: Vec<f64> = trace.entries[burn_in..].iter().map(|t| t.energy).collect();
    let pairs = e.windows(2).map(|w| (w[0], w[1])).collect();
    let triples: Vec<(f64, f64, f64)> = e.windows(3).map(|w| (w[0], w[1], w[2])).collect();
    let projection = triples
        .iter()
        .map(|&(a, b, c)| 0.2 * a - 0.35 * b + 0.2 * c)
        .collect();
    Ok(DynamicsRecord {
        pairs,
        triples,
        projection,
    })
}

/// One- versus two-component Gaussian mixture fit of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BimodalityReport {
    pub log_likelihood_one: f64,
    pub log_likelihood_two: f64,
    /// Log-likelihood improvement scaled to 10⁴ samples.
    pub gain_per_10k: f64,
    pub means: [f64; 2],
    pub std_devs: [f64; 2],
    pub weights: [f64; 2],
}

impl BimodalityReport {
    /// Gain threshold above which a sample counts as bimodal.
    pub const THRESHOLD: f64 = 10.0;

    pub fn is_bimodal(&self) -> bool {
        self.gain_per_10k > Self::THRESHOLD
    }
}

fn normal_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (x - mean) * (x - mean) / var)
}

/// Fits both models by maximum likelihood (EM for the mixture) and compares.
pub fn bimodality(samples: &[f64]) -> Result<BimodalityReport> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::arg("bimodality needs at least four samples"));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
    if var.is_nan() || var <= 0.0 {
        return Err(Error::arg("bimodality needs a sample with positive variance"));
    }
    let ll1 = -0.5 * nf * ((2.0 * std::f64::consts::PI * var).ln() + 1.0);

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut mu = [sorted[n / 4], sorted[3 * n / 4]];
    let mut vars = [var, var];
    let mut w = [0.5f64, 0.5];
    let floor = var * 1e-10;
    let mut resp = vec![0.0; n];
    let mut ll2 = f64::NEG_INFINITY;
    for _ in 0..2000 {
        let mut ll = 0.0f64;
        for (r, &x) in resp.iter_mut().zip(samples) {
            let a = w[0].ln() + normal_log_pdf(x, mu[0], vars[0]);
            let b = w[1].ln() + normal_log_pdf(x, mu[1], vars[1]);
            let top = a.max(b);
            let lse = top + ((a - top).exp() + (b - top).exp()).ln();
            *r = (a - lse).exp();
            ll += lse;
        }
        let r0: f64 = resp.iter().sum();
        let r1 = nf - r0;
        if r0 < 1e-9 * nf || r1 < 1e-9 * nf {
            ll2 = ll.max(ll1);
            break;
        }
        mu = [
            resp.iter().zip(samples).map(|(r, x)| r * x).sum::<f64>() / r0,
            resp.iter().zip(samples).map(|(r, x)| (1.0 - r) * x).sum::<f64>() / r1,
        ];
        vars = [
            (resp.iter().zip(samples).map(|(r, x)| r * (x - mu[0]).powi(2)).sum::<f64>() / r0).max(floor),
            (resp.iter().zip(samples).map(|(r, x)| (1.0 - r) * (x - mu[1]).powi(2)).sum::<f64>() / r1).max(floor),
        ];
        w = [r0 / nf, r1 / nf];
        let converged = (ll - ll2).abs() <= 1e-12 * ll.abs().max(1.0);
        ll2 = ll;
        if converged {
            break;
        }
    }
    Ok(BimodalityReport {
        log_likelihood_one: ll1,
        log_likelihood_two: ll2,
        gain_per_10k: (ll2 - ll1) / nf * 1e4,
        means: mu,
        std_devs: [vars[0].sqrt(), vars[1].sqrt()],
        weights: w,
    })
}

/// Initial points of a benchmark run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SeedSpec {
    /// No initial points.
    Empty,
    /// `{1/3, 1/2}`.
    DefaultSeed,
    Points { values: Vec<f64> },
    /// `count` iid uniform points drawn from the run's RNG seed.
    Random { count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: SeedSpec,
    pub kind: SequenceKind,
    /// Total number of points, seed included.
    pub total: usize,
    /// Required whenever the seed is random.
    #[serde(default)]
    pub rng_seed: Option<u64>,
    /// Evaluate every prefix even above [`FULL_PREFIX_LIMIT`].
    #[serde(default)]
    pub full_prefix: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(seed: SeedSpec, kind: SequenceKind, total: usize) -> Self {
        Self {
            seed,
            kind,
            total,
            rng_seed: None,
            full_prefix: false,
            output: None,
        }
    }

    pub fn with_rng_seed(mut self, seed: u64) -> Self {
        self.rng_seed = Some(seed);
        self
    }

    /// Materialises the seed points.
    pub fn seed_points(&self) -> Result<SortedPointSet> {
        match &self.seed {
            SeedSpec::Empty => Ok(SortedPointSet::new()),
            SeedSpec::DefaultSeed => Ok(SortedPointSet::default_seed()),
            SeedSpec::Points { values } => SortedPointSet::from_values(values),
            SeedSpec::Random { count } => {
                let seed = self
                    .rng_seed
                    .ok_or_else(|| Error::Config("a random seed set needs an RNG seed".into()))?;
                Ok(random_points(*count, seed))
            }
        }
    }

    fn validate(&self, seed_len: usize) -> Result<()> {
        if self.total < seed_len {
            return Err(Error::Config(format!(
                "total {} is smaller than the seed size {seed_len}",
                self.total
            )));
        }
        if self.total == 0 {
            return Err(Error::Config("total must be positive".into()));
        }
        Ok(())
    }
}

/// `count` iid uniform points from a PCG stream seeded with `seed`.
pub fn random_points(count: usize, seed: u64) -> SortedPointSet {
    let mut rng = Pcg64::seed_from_u64(seed);
    let values: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
    SortedPointSet::from_values(&values).expect("uniform draws lie in [0,1)")
}

/// Prefix sizes at which a run from `start` to `total` points is evaluated:
/// every size when `total <= FULL_PREFIX_LIMIT` or `full` is set, otherwise
/// `⌈10^{k/40}⌉` plus `total`.
pub fn prefix_schedule(start: usize, total: usize, full: bool) -> Vec<usize> {
    let first = start.max(1);
    if first > total {
        return Vec::new();
    }
    if full || total <= FULL_PREFIX_LIMIT {
        return (first..=total).collect();
    }
    let mut sizes = Vec::new();
    for k in 0u32.. {
        let size = 10f64.powf(k as f64 / SCHEDULE_STEPS_PER_DECADE as f64).ceil() as usize;
        if size > total {
            break;
        }
        if size >= first {
            sizes.push(size);
        }
    }
    sizes.push(total);
    sizes.dedup();
    sizes
}

/// Generates the configured sequence and hands a report for every scheduled
/// prefix size to `sink`, in increasing size.
pub fn benchmark<F>(config: &RunConfig, mut sink: F) -> Result<()>
where
    F: FnMut(&DiscrepancyReport) -> Result<()>,
{
    let seed = config.seed_points()?;
    config.validate(seed.len())?;
    let schedule = prefix_schedule(seed.len(), config.total, config.full_prefix);
    let mut next = schedule.iter().copied().peekable();
    let mut set = seed.clone();
    let mut generator = SequenceGenerator::new(config.kind, seed)?;
    loop {
        if next.peek() == Some(&set.len()) {
            next.next();
            sink(&DiscrepancyReport::compute(&set)?)?;
        }
        if set.len() >= config.total {
            break;
        }
        set.insert_in_place(generator.next_point());
    }
    Ok(())
}

/// Collects every report of a run.
pub fn benchmark_reports(config: &RunConfig) -> Result<Vec<DiscrepancyReport>> {
    let mut out = Vec::new();
    benchmark(config, |r| {
        out.push(*r);
        Ok(())
    })?;
    Ok(out)
}

/// Streams the run as CSV into `out`.
pub fn benchmark_csv<W: Write>(config: &RunConfig, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::io(config.output.clone().unwrap_or_else(|| "<output>".into()), e);
    writeln!(out, "{REPORT_CSV_HEADER}").map_err(io)?;
    benchmark(config, |r| writeln!(out, "{}", r.csv_row()).map_err(io))?;
    out.flush().map_err(io)
}

/// Runs the benchmark into `config.output`, or stdout when unset.
pub fn run_benchmark(config: &RunConfig) -> Result<()> {
    match &config.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            benchmark_csv(config, BufWriter::new(file))
        }
        None => benchmark_csv(config, std::io::stdout().lock()),
    }
}

/// Mean of `n · D*_n / ln n` over reports with `lo <= n <= hi`.
pub fn mean_scaled_star(reports: &[DiscrepancyReport], lo: usize, hi: usize) -> Option<f64> {
    let vals: Vec<f64> = reports
        .iter()
        .filter(|r| r.n >= lo && r.n <= hi)
        .filter_map(|r| r.scaled_star)
        .collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}
