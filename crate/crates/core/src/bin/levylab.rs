use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levylab::cusp::{cusp_profile_with_tol, CuspData};
use levylab::dynamics::orbit::ExactOrbit;
use levylab::dynamics::processes::wn_path_from;
use levylab::dynamics::InducedScheme;
use levylab::fprime::{chi, psi_max, Decorated};
use levylab::harness::{emit_report, run_experiment, ExperimentConfig, ReportFormat, RunResult};
use levylab::metrics::{classify_profile_mode, d_j1_bracket, d_m2, d_tilde_paths, hausdorff};
use levylab::paths::{completed_graph, Completion, Path, Profile};
use levylab::stable::SpectralMeasure;
use levylab::{Error, Result};

#[derive(Parser)]
#[command(name = "levylab", version, about = "Cadlag path metrics, interval-map simulation, and stable-law experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two paths in one of the supported metrics.
    Distance(DistanceArgs),
    /// Attach excursion decorations to a step path via the profile family.
    Decorate {
        /// JSON array of profile paths.
        #[arg(long)]
        profiles: PathBuf,
        /// Step path JSON.
        levy: PathBuf,
    },
    /// Running-maximum functional of a decorated scalar path.
    Psi {
        /// Decorated path JSON.
        x: PathBuf,
    },
    /// Normalized Birkhoff-sum paths W_n for an interval map, one JSON path per line.
    Simulate(SimulateArgs),
    /// First-return samples (x0, R, V) for an interval map, as CSV.
    Induce(InduceArgs),
    /// Stable-law sampling and characteristic function evaluation.
    Stable {
        #[command(subcommand)]
        command: StableCommand,
    },
    /// Cusp profile from boundary traces by quadrature.
    ProfileCusp(ProfileCuspArgs),
    /// Config-driven experiments and report emission.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Dtilde,
    Hausdorff,
    M2,
    J1,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long, value_enum)]
    metric: Metric,
    /// Sampling step for the Hausdorff-based metrics.
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    map: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, one JSON path per line; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InduceArgs {
    #[arg(long)]
    map: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum StableCommand {
    /// Sample Levy paths, one JSON object per line.
    Sample {
        #[arg(long)]
        alpha: f64,
        /// Spectral measure JSON: [{"weight":..., "direction":[...]}].
        #[arg(long)]
        nu: PathBuf,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10000)]
        k_trunc: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristic function on a CSV grid of s-points.
    Chf {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        nu: PathBuf,
        /// CSV file, one s-vector per row.
        #[arg(long)]
        s_grid: PathBuf,
    },
}

#[derive(Args)]
struct ProfileCuspArgs {
    /// Cusp flatness (> 2).
    #[arg(long)]
    beta: f64,
    /// CSV columns: theta, v_plus components, v_minus components.
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512)]
    panels: usize,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Render a stored result file as CSV or JSON.
    Report {
        results: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn scheme_from(map: &str, alpha: Option<f64>) -> Result<InducedScheme> {
    let need = |a: Option<f64>| a.ok_or_else(|| Error::config("alpha", "required for this map"));
    match map {
        "doubling" => InducedScheme::doubling(need(alpha)?),
        "tripling" => InducedScheme::tripling(need(alpha)?),
        "lsv" => InducedScheme::lsv(need(alpha)?),
        "gauss" => Ok(InducedScheme::gauss()),
        "double-lsv" => InducedScheme::double_lsv(need(alpha)?),
        other => Err(Error::config("map", format!("unknown map `{other}`"))),
    }
}

fn spectral_from(alpha: f64, nu: &PathBuf) -> Result<SpectralMeasure> {
    #[derive(serde::Deserialize)]
    struct Atom {
        weight: f64,
        direction: Vec<f64>,
    }
    let atoms: Vec<Atom> = read_json(nu)?;
    SpectralMeasure::new(alpha, atoms.into_iter().map(|a| (a.weight, a.direction)).collect())
}

fn write_lines(out: Option<&PathBuf>, lines: &[String]) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(fs::File::create(path)?);
            for l in lines {
                writeln!(f, "{l}")?;
            }
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut f = stdout.lock();
            for l in lines {
                writeln!(f, "{l}")?;
            }
            Ok(())
        }
    }
}

fn run_distance(args: &DistanceArgs) -> Result<()> {
    let a: Path = read_json(&args.a)?;
    let b: Path = read_json(&args.b)?;
    let res = match args.metric {
        Metric::Dtilde => d_tilde_paths(&a, &b)?,
        Metric::M2 => d_m2(&a, &b, args.delta)?,
        Metric::Hausdorff => {
            let ga = completed_graph(&a, Completion::Box);
            let gb = completed_graph(&b, Completion::Box);
            hausdorff(&ga, &gb, args.delta)?
        }
        Metric::J1 => {
            let (sa, sb) = match (&a, &b) {
                (Path::Step(sa), Path::Step(sb)) => (sa, sb),
                _ => return Err(Error::domain("j1 bracket needs step paths")),
            };
            let (lo, hi) = d_j1_bracket(sa, sb)?;
            println!(
                "{}",
                serde_json::json!({"value": lo, "error_bound": hi - lo, "method": "bracket"})
            );
            return Ok(());
        }
    };
    println!(
        "{}",
        serde_json::json!({
            "value": res.value,
            "error_bound": res.error_bound,
            "method": format!("{:?}", res.method).to_lowercase(),
        })
    );
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let scheme = scheme_from(&args.map, args.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut lines = Vec::with_capacity(args.samples);
    for _ in 0..args.samples {
        let mut orbit = ExactOrbit::random_anywhere(&scheme, &mut rng);
        let (path, _) = wn_path_from(&scheme, &mut orbit, args.n, &mut rng)?;
        lines.push(serde_json::to_string(&Path::Step(path))?);
    }
    write_lines(args.out.as_ref(), &lines)
}

fn run_induce(args: &InduceArgs) -> Result<()> {
    let scheme = scheme_from(&args.map, args.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let d = scheme.dim();
    let header: Vec<String> = ["x0".to_string(), "R".to_string()]
        .into_iter()
        .chain((1..=d).map(|k| format!("V_{k}")))
        .collect();
    let mut lines = vec![header.join(",")];
    for _ in 0..args.samples {
        let x0 = scheme.sample_mu_x(&mut rng);
        let sample = scheme.induced_observable(x0)?;
        let mut row = vec![format!("{x0}"), format!("{}", sample.r)];
        row.extend(sample.v.iter().map(|v| format!("{v}")));
        lines.push(row.join(","));
    }
    write_lines(None, &lines)
}

fn run_stable(cmd: &StableCommand) -> Result<()> {
    match cmd {
        StableCommand::Sample {
            alpha,
            nu,
            paths,
            seed,
            k_trunc,
            out,
        } => {
            let measure = spectral_from(*alpha, nu)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut lines = Vec::with_capacity(*paths);
            for _ in 0..*paths {
                let l = measure.sample_path(&mut rng, *k_trunc)?;
                lines.push(
                    serde_json::json!({
                        "drift": l.drift,
                        "path": Path::Step(l.jumps.clone()),
                    })
                    .to_string(),
                );
            }
            write_lines(out.as_ref(), &lines)
        }
        StableCommand::Chf { alpha, nu, s_grid } => {
            let measure = spectral_from(*alpha, nu)?;
            let mut lines = vec!["s,re,im".to_string()];
            for row in fs::read_to_string(s_grid)?.lines() {
                let row = row.trim();
                if row.is_empty() {
                    continue;
                }
                let s: Vec<f64> = row
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::config("s-grid", e.to_string()))?;
                let phi = measure.char_fn(&s)?;
                lines.push(format!("{row},{},{}", phi.re, phi.im));
            }
            write_lines(None, &lines)
        }
    }
}

fn run_profile_cusp(args: &ProfileCuspArgs) -> Result<()> {
    let text = fs::read_to_string(&args.traces)?;
    let mut thetas = Vec::new();
    let mut v_plus = Vec::new();
    let mut v_minus = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("theta") {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config("traces", e.to_string()))?;
        if cols.len() < 3 || cols.len() % 2 == 0 {
            return Err(Error::config(
                "traces",
                "rows must be theta plus equal-length v_plus and v_minus blocks",
            ));
        }
        let d = (cols.len() - 1) / 2;
        thetas.push(cols[0]);
        v_plus.push(cols[1..1 + d].to_vec());
        v_minus.push(cols[1 + d..].to_vec());
    }
    let data = CuspData::new(args.beta, thetas, v_plus, v_minus)?;
    let (profile, tol) = cusp_profile_with_tol(&data, args.panels)?;
    fs::write(&args.out, serde_json::to_string(profile.path())?)?;
    let mode = classify_profile_mode(&profile, tol)?;
    println!("mode={mode} quadrature_tol={tol:.3e}");
    Ok(())
}

fn run_experiment_cmd(cmd: &ExperimentCommand) -> Result<()> {
    match cmd {
        ExperimentCommand::Run { config } => {
            let cfg: ExperimentConfig = read_json(config)?;
            let result = run_experiment(&cfg)?;
            print!("{}", emit_report(&result, ReportFormat::Csv)?);
            Ok(())
        }
        ExperimentCommand::Report { results, format } => {
            let result: RunResult = read_json(results)?;
            print!("{}", emit_report(&result, format.parse()?)?);
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Distance(args) => run_distance(args),
        Command::Decorate { profiles, levy } => {
            let paths: Vec<Path> = read_json(profiles)?;
            let profiles: Vec<Profile> = paths
                .into_iter()
                .map(Profile::new)
                .collect::<Result<_>>()?;
            let u: Path = read_json(levy)?;
            let decorated = chi(&u, &profiles)?;
            println!("{}", serde_json::to_string(&decorated)?);
            Ok(())
        }
        Command::Psi { x } => {
            let decorated: Decorated = read_json(x)?;
            let psi = psi_max(&decorated)?;
            println!("{}", serde_json::to_string(&Path::Step(psi))?);
            Ok(())
        }
        Command::Simulate(args) => run_simulate(args),
        Command::Induce(args) => run_induce(args),
        Command::Stable { command } => run_stable(command),
        Command::ProfileCusp(args) => run_profile_cusp(args),
        Command::Experiment { command } => run_experiment_cmd(command),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
