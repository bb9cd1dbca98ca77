//! Config-driven experiment orchestration.
//!
//! An [`ExperimentConfig`] names one of the built-in experiment kinds and
//! its parameters; [`run_experiment`] fans the work out across seeds,
//! aggregates medians with order-statistic confidence intervals, and
//! [`emit_report`] renders the records as CSV or JSON.
//!
//! Parallelism is across seeds only: each seed owns its own ChaCha stream,
//! so the statistical content of a run is independent of the thread count.
//! Wall-time fields are measured and therefore not part of the determinism
//! contract.

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusp::{canonical_traces, cusp_profile_with_tol, CuspData};
use crate::dynamics::orbit::ExactOrbit;
use crate::dynamics::processes::{collect_returns, hypothesis_main_stat, wn_value_at_one};
use crate::dynamics::InducedScheme;
use crate::error::{Error, Result};
use crate::metrics::{classify_profile_mode, d_tilde_d, ConvergenceMode};
use crate::stable::{ecf, ks_two_sample, SpectralMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MarginalKs,
    Overshoot,
    HypothesisTrend,
    Lapnumber,
    ExcursionShape,
    ProfileClassify,
    ChfCheck,
}

impl ExperimentKind {
    fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::MarginalKs => "marginal-ks",
            ExperimentKind::Overshoot => "overshoot",
            ExperimentKind::HypothesisTrend => "hypothesis-trend",
            ExperimentKind::Lapnumber => "lapnumber",
            ExperimentKind::ExcursionShape => "excursion-shape",
            ExperimentKind::ProfileClassify => "profile-classify",
            ExperimentKind::ChfCheck => "chf-check",
        }
    }

    fn needs_map(&self) -> bool {
        matches!(
            self,
            ExperimentKind::MarginalKs
                | ExperimentKind::Overshoot
                | ExperimentKind::HypothesisTrend
                | ExperimentKind::Lapnumber
                | ExperimentKind::ExcursionShape
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomConfig {
    pub weight: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Free-form experiment name, echoed into every report row.
    pub experiment: String,
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Cusp flatness for profile-classify.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Spectral atoms for chf-check; defaults to one-sided delta_1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomConfig>>,
    #[serde(default)]
    pub ns: Vec<u64>,
    #[serde(default = "default_one")]
    pub samples: usize,
    #[serde(default = "default_one_u64")]
    pub seeds: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_one() -> usize {
    1
}

fn default_one_u64() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() {
            return Err(Error::config("experiment", "name must be nonempty"));
        }
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        if self.seeds == 0 {
            return Err(Error::config("seeds", "must be at least 1"));
        }
        if self.kind.needs_map() {
            self.scheme()?;
            if self.ns.is_empty() {
                return Err(Error::config("ns", "at least one n is required"));
            }
            if self.ns.iter().any(|&n| n == 0) {
                return Err(Error::config("ns", "n must be positive"));
            }
        }
        match self.kind {
            ExperimentKind::ProfileClassify => {
                match self.beta {
                    Some(b) if b > 2.0 => {}
                    Some(_) => {
                        return Err(Error::config("beta", "cusp flatness must exceed 2"))
                    }
                    None => return Err(Error::config("beta", "required for profile-classify")),
                }
                if self.map.is_some() {
                    return Err(Error::config("map", "not used by profile-classify"));
                }
            }
            ExperimentKind::ChfCheck => {
                self.spectral()?;
            }
            _ => {
                if self.beta.is_some() {
                    return Err(Error::config("beta", "only used by profile-classify"));
                }
            }
        }
        Ok(())
    }

    /// The induced scheme named by `map` (+ `alpha` where the map needs it).
    pub fn scheme(&self) -> Result<InducedScheme> {
        let name = self
            .map
            .as_deref()
            .ok_or_else(|| Error::config("map", "required for this experiment kind"))?;
        let alpha = || {
            self.alpha
                .ok_or_else(|| Error::config("alpha", format!("required for map `{name}`")))
        };
        match name {
            "doubling" => InducedScheme::doubling(alpha()?),
            "tripling" => InducedScheme::tripling(alpha()?),
            "lsv" => InducedScheme::lsv(alpha()?),
            "gauss" => Ok(InducedScheme::gauss()),
            "double-lsv" => InducedScheme::double_lsv(alpha()?),
            other => Err(Error::config("map", format!("unknown map `{other}`"))),
        }
        .map_err(|e| match e {
            Error::Domain(msg) => Error::config("alpha", msg),
            e => e,
        })
    }

    fn spectral(&self) -> Result<SpectralMeasure> {
        let alpha = self
            .alpha
            .ok_or_else(|| Error::config("alpha", "required for chf-check"))?;
        let atoms = match &self.atoms {
            Some(list) if !list.is_empty() => list
                .iter()
                .map(|a| (a.weight, a.direction.clone()))
                .collect(),
            Some(_) => return Err(Error::config("atoms", "must be nonempty when given")),
            None => vec![(1.0, vec![1.0])],
        };
        SpectralMeasure::new(alpha, atoms)
            .map_err(|e| Error::config("atoms", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub n: u64,
    /// Seed index, or -1 for the cross-seed aggregate row.
    pub seed: i64,
    pub statistic: String,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub experiment: String,
    pub kind: ExperimentKind,
    pub records: Vec<Record>,
}

/// splitmix64 finalizer; decorrelates the per-(n, seed) ChaCha streams.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub fn stream_rng(base: u64, n: u64, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(base ^ n.wrapping_mul(0xA24BAED4963EE407)) ^ seed))
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// Nonparametric order-statistic CI for the median (~95%).
fn median_ci(sorted: &[f64]) -> (f64, f64) {
    let k = sorted.len();
    if k < 3 {
        return (sorted[0], sorted[k - 1]);
    }
    let kf = k as f64;
    let half = 1.96 * (kf / 4.0).sqrt();
    let lo = ((kf / 2.0 - half).floor().max(0.0)) as usize;
    let hi = ((kf / 2.0 + half).ceil() as usize).min(k - 1);
    (sorted[lo], sorted[hi])
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx]
}

fn per_seed_statistic(
    cfg: &ExperimentConfig,
    scheme: &InducedScheme,
    n: u64,
    seed: u64,
) -> Result<f64> {
    let mut rng = stream_rng(cfg.seed, n, seed);
    match cfg.kind {
        ExperimentKind::Lapnumber => {
            let mut orbit = ExactOrbit::random_anywhere(scheme, &mut rng);
            let mut laps = 0u64;
            for _ in 0..n {
                orbit.step(&mut rng)?;
                if orbit.in_x(scheme) {
                    laps += 1;
                }
            }
            Ok(laps as f64 / n as f64)
        }
        ExperimentKind::Overshoot => {
            let mut orbit = ExactOrbit::random_in_x(scheme, &mut rng);
            let recs = collect_returns(scheme, &mut orbit, n, &mut rng)?;
            if recs.is_empty() {
                return Err(Error::domain("no completed returns within n iterates"));
            }
            let mut sizes: Vec<f64> = recs.iter().map(|r| r.v.abs()).collect();
            sizes.sort_by(f64::total_cmp);
            let q90 = percentile(&sizes, 0.9);
            let mut ratios: Vec<f64> = recs
                .iter()
                .filter(|r| r.v.abs() >= q90 && r.v.abs() > 0.0)
                .map(|r| (r.max - r.min) / r.v.abs())
                .collect();
            if ratios.is_empty() {
                return Err(Error::domain("no jumps above the size percentile"));
            }
            ratios.sort_by(f64::total_cmp);
            Ok(median_sorted(&ratios))
        }
        ExperimentKind::HypothesisTrend => hypothesis_main_stat(scheme, n, &mut rng),
        ExperimentKind::MarginalKs => {
            let mut wn = Vec::with_capacity(cfg.samples);
            for _ in 0..cfg.samples {
                let mut orbit = ExactOrbit::random_anywhere(scheme, &mut rng);
                wn.push(wn_value_at_one(scheme, &mut orbit, n, &mut rng)?[0]);
            }
            let measure = scheme_spectral(scheme)?;
            let c = branch_scale(scheme);
            let stable: Vec<f64> = (0..cfg.samples)
                .map(|_| c * measure.sample_marginal(&mut rng)[0])
                .collect();
            ks_two_sample(&wn, &stable)
        }
        ExperimentKind::ExcursionShape => {
            let mut worst = 0.0f64;
            for _ in 0..cfg.samples {
                let x = scheme.sample_mu_x(&mut rng);
                let os = scheme.induced_observable(x)?;
                worst = worst.max(d_tilde_d(&os.xi, &os.zeta)?.value);
            }
            Ok(worst)
        }
        _ => unreachable!("kind handled outside the seed fan-out"),
    }
}

/// The limiting spectral measure of a scalar scheme, read off the sign
/// structure of its observable's poles. (The profile family always carries
/// both orientations for the decoration functional, so it cannot be used
/// here: a one-pole observable only ever realizes positive jumps.)
fn scheme_spectral(scheme: &InducedScheme) -> Result<SpectralMeasure> {
    use crate::dynamics::ObservableSpec;
    if scheme.dim() != 1 {
        return Err(Error::domain("marginal-ks is scalar-only"));
    }
    match scheme.observable {
        ObservableSpec::PowerPole { .. } | ObservableSpec::GaussDigit => {
            SpectralMeasure::one_sided(scheme.alpha, 1.0)
        }
        _ => SpectralMeasure::symmetric(scheme.alpha, 1.0),
    }
}

/// The constant c in L_alpha = c L~_alpha for the piecewise-linear schemes.
fn branch_scale(scheme: &InducedScheme) -> f64 {
    use crate::dynamics::MapSpec;
    match scheme.map {
        MapSpec::Doubling => (2.0f64).powf(-1.0 / scheme.alpha),
        MapSpec::Tripling => (3.0f64).powf(-1.0 / scheme.alpha),
        _ => 1.0,
    }
}

fn run_seeded(cfg: &ExperimentConfig, statistic: &str) -> Result<Vec<Record>> {
    let scheme = cfg.scheme()?;
    let mut records = Vec::new();
    for &n in &cfg.ns {
        let outcomes: Vec<(u64, Result<(f64, f64)>)> = (0..cfg.seeds)
            .into_par_iter()
            .map(|s| {
                let t0 = Instant::now();
                let out = per_seed_statistic(cfg, &scheme, n, s)
                    .map(|v| (v, t0.elapsed().as_secs_f64()));
                (s, out)
            })
            .collect();
        let mut done: Vec<(u64, f64, f64)> = Vec::new();
        let mut failures: Vec<(u64, Error)> = Vec::new();
        for (s, out) in outcomes {
            match out {
                Ok((v, t)) => done.push((s, v, t)),
                Err(e) => failures.push((s, e)),
            }
        }
        if let Some((s, e)) = failures.into_iter().next() {
            let completed: Vec<u64> = done.iter().map(|(s, _, _)| *s).collect();
            return Err(Error::config(
                "seeds",
                format!("worker for seed {s} failed: {e}; completed seeds {completed:?}"),
            ));
        }
        done.sort_by_key(|(s, _, _)| *s);
        let mut values: Vec<f64> = done.iter().map(|(_, v, _)| *v).collect();
        for (s, v, t) in &done {
            records.push(Record {
                n,
                seed: *s as i64,
                statistic: statistic.to_string(),
                value: *v,
                ci_lo: *v,
                ci_hi: *v,
                runtime_s: *t,
            });
        }
        values.sort_by(f64::total_cmp);
        let (lo, hi) = median_ci(&values);
        let mut times: Vec<f64> = done.iter().map(|(_, _, t)| *t).collect();
        times.sort_by(f64::total_cmp);
        records.push(Record {
            n,
            seed: -1,
            statistic: statistic.to_string(),
            value: median_sorted(&values),
            ci_lo: lo,
            ci_hi: hi,
            runtime_s: times.iter().sum(),
        });
    }
    Ok(records)
}

fn mode_code(mode: ConvergenceMode) -> f64 {
    match mode {
        ConvergenceMode::M1 => 1.0,
        ConvergenceMode::M2 => 2.0,
        ConvergenceMode::None => 0.0,
    }
}

fn run_profile_classify(cfg: &ExperimentConfig) -> Result<Vec<Record>> {
    let beta = cfg.beta.expect("validated");
    let grid = 512;
    let mut records = Vec::new();
    let t0 = Instant::now();
    for (i, data) in canonical_traces(beta, grid)?.iter().enumerate() {
        let (profile, tol) = cusp_profile_with_tol(data, grid)?;
        let mode = classify_profile_mode(&profile, tol)?;
        records.push(Record {
            n: (i + 1) as u64,
            seed: -1,
            statistic: "mode".to_string(),
            value: mode_code(mode),
            ci_lo: mode_code(mode),
            ci_hi: mode_code(mode),
            runtime_s: t0.elapsed().as_secs_f64(),
        });
    }
    // random positive traces must always classify as monotone
    let mut rng = stream_rng(cfg.seed, 0, 0);
    let mut m1 = 0usize;
    let t1 = Instant::now();
    for _ in 0..cfg.samples {
        let data = random_positive_trace(beta, grid, &mut rng)?;
        let (profile, tol) = cusp_profile_with_tol(&data, grid)?;
        if classify_profile_mode(&profile, tol)? == ConvergenceMode::M1 {
            m1 += 1;
        }
    }
    let frac = m1 as f64 / cfg.samples as f64;
    records.push(Record {
        n: 0,
        seed: -1,
        statistic: "m1_fraction".to_string(),
        value: frac,
        ci_lo: frac,
        ci_hi: frac,
        runtime_s: t1.elapsed().as_secs_f64(),
    });
    Ok(records)
}

/// Random strictly positive scalar traces: a few positive Fourier bumps.
pub fn random_positive_trace(
    beta: f64,
    grid: usize,
    rng: &mut impl rand::Rng,
) -> Result<CuspData> {
    let base: f64 = rng.gen_range(0.2..2.0);
    let coefs: Vec<(f64, f64)> = (1..=4)
        .map(|_| (rng.gen_range(-0.2..0.2), rng.gen_range(0.5..4.0)))
        .collect();
    let base2: f64 = rng.gen_range(0.0..1.0);
    let trace = move |t: f64| {
        let mut v = base;
        for (a, w) in &coefs {
            v += a * (w * t).sin();
        }
        v.max(0.01)
    };
    CuspData::from_fns(beta, grid, trace, move |t| base2 * (1.0 + 0.2 * t.cos()))
}

fn run_chf_check(cfg: &ExperimentConfig) -> Result<Vec<Record>> {
    let measure = cfg.spectral()?;
    let d = measure.dim();
    let direction: Vec<f64> = measure.atoms()[0].1.clone();
    let s_points: Vec<Vec<f64>> = (1..=20)
        .map(|k| direction.iter().map(|w| w * k as f64 * 0.15).collect())
        .collect();
    let outcomes: Vec<(u64, Result<(f64, f64)>)> = (0..cfg.seeds)
        .into_par_iter()
        .map(|s| {
            let t0 = Instant::now();
            let mut rng = stream_rng(cfg.seed, 0, s);
            let draws: Vec<Vec<f64>> =
                (0..cfg.samples).map(|_| measure.sample_marginal(&mut rng)).collect();
            let out = (|| {
                let mut worst = 0.0f64;
                for s_pt in &s_points {
                    let (emp, se_re, se_im) = ecf(&draws, s_pt);
                    let theo = measure.char_fn(s_pt)?;
                    let zr = (emp.re - theo.re).abs() / se_re.max(1e-12);
                    let zi = (emp.im - theo.im).abs() / se_im.max(1e-12);
                    worst = worst.max(zr).max(zi);
                }
                Ok((worst, t0.elapsed().as_secs_f64()))
            })();
            (s, out)
        })
        .collect();
    let mut done: Vec<(u64, f64, f64)> = Vec::new();
    for (s, out) in outcomes {
        let (v, t) = out.map_err(|e: Error| {
            Error::config("seeds", format!("worker for seed {s} failed: {e}"))
        })?;
        done.push((s, v, t));
    }
    done.sort_by_key(|(s, _, _)| *s);
    let mut records: Vec<Record> = done
        .iter()
        .map(|(s, v, t)| Record {
            n: d as u64,
            seed: *s as i64,
            statistic: "max_z".to_string(),
            value: *v,
            ci_lo: *v,
            ci_hi: *v,
            runtime_s: *t,
        })
        .collect();
    let mut values: Vec<f64> = done.iter().map(|(_, v, _)| *v).collect();
    values.sort_by(f64::total_cmp);
    let (lo, hi) = median_ci(&values);
    records.push(Record {
        n: d as u64,
        seed: -1,
        statistic: "max_z".to_string(),
        value: median_sorted(&values),
        ci_lo: lo,
        ci_hi: hi,
        runtime_s: done.iter().map(|(_, _, t)| t).sum(),
    });
    Ok(records)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let records = match cfg.kind {
        ExperimentKind::Lapnumber => run_seeded(cfg, "lap_ratio")?,
        ExperimentKind::Overshoot => run_seeded(cfg, "overshoot_ratio")?,
        ExperimentKind::HypothesisTrend => run_seeded(cfg, "main_stat")?,
        ExperimentKind::MarginalKs => run_seeded(cfg, "ks")?,
        ExperimentKind::ExcursionShape => run_seeded(cfg, "max_dtilde")?,
        ExperimentKind::ProfileClassify => run_profile_classify(cfg)?,
        ExperimentKind::ChfCheck => run_chf_check(cfg)?,
    };
    let result = RunResult {
        experiment: cfg.experiment.clone(),
        kind: cfg.kind,
        records,
    };
    if let Some(path) = &cfg.output {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), &result)?;
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::config("format", format!("unknown format `{other}`"))),
        }
    }
}

pub fn emit_report(result: &RunResult, format: ReportFormat) -> Result<String> {
    if result.records.is_empty() {
        return Err(Error::domain("cannot report an empty result"));
    }
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(result)?),
        ReportFormat::Csv => {
            let mut out = String::from("experiment,kind,n,seed,statistic,value,ci_lo,ci_hi,runtime_s\n");
            for r in &result.records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{:.3}\n",
                    result.experiment,
                    result.kind.as_str(),
                    r.n,
                    r.seed,
                    r.statistic,
                    r.value,
                    r.ci_lo,
                    r.ci_hi,
                    r.runtime_s
                ));
            }
            Ok(out)
        }
    }
}
