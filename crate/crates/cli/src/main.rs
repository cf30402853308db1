//! `pdmp-axon`: simulate the stochastic axon model and run the averaging
//! diagnostics from the command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdmp_axon::analysis::{epsilon_sweep, poisson_solve, AnalysisError};
use pdmp_axon::field::{Field, TestFunction};
use pdmp_axon::hybrid::{
    member_rng, parse_pairs, simulate, ConfigError, HybridError, InitialProfile, SimConfig,
};
use pdmp_axon::io::{
    heatmap_pgm, jumps_csv, read_matrix, resolve_seed, snapshots_csv, verify_manifest, GrayMap,
    IoError, RunManifest,
};
use pdmp_axon::kinetics::{load_scheme, stationary_distribution, KineticScheme, KineticsError};

#[derive(Parser)]
#[command(
    name = "pdmp-axon",
    version,
    about = "Stochastic Hodgkin-Huxley axon as a PDMP, with averaging diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory; writes snapshots.csv, jumps.csv and manifest.json.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Render a snapshot CSV as a PGM heatmap (space vertical, time horizontal).
    Heatmap {
        /// Snapshot CSV written by `simulate`.
        csv: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 115.0)]
        hi: f64,
    },
    /// Mean-square averaging defect over a decreasing eps ladder.
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated, strictly decreasing.
        #[arg(long, default_value = "0.5,0.1,0.02", value_delimiter = ',')]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        ensemble: usize,
        #[arg(long, default_value = "sine")]
        phi: TestFunction,
        #[arg(long, default_value = "sweep")]
        out_dir: PathBuf,
    },
    /// Solve the Poisson equation of the corrector at a frozen field.
    Poisson {
        #[arg(long, default_value = "toy2")]
        scheme: String,
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        #[arg(long = "M", default_value_t = 30)]
        m: usize,
        /// Field profile: zero, const:X or sine:A.
        #[arg(long, default_value = "sine:1")]
        u0: InitialProfile,
        #[arg(long, default_value = "sine")]
        phi: TestFunction,
        /// Also write the report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Stationary law of one channel at a fixed voltage.
    Stationary {
        #[arg(long, default_value = "na8")]
        scheme: String,
        /// Quasi-stationary law of this class instead of the full chain.
        #[arg(long)]
        class: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        v: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// Check the file hashes recorded in a run's manifest.json.
    Verify { dir: PathBuf },
}

/// Flags shared by `simulate` and `sweep`; they override `--config`.
#[derive(Args)]
struct SimArgs {
    /// `key = value` file using the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Defaults to the largest admissible step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    k_diff: Option<f64>,
    /// `none`, `AMP` (on [0, 0.1]) or `AMP:LO:HI`.
    #[arg(long)]
    input: Option<String>,
    /// Clamp u to the input amplitude on its segment instead of adding a source.
    #[arg(long)]
    clamp_input: bool,
    /// zero, const:X or sine:A.
    #[arg(long)]
    u0: Option<String>,
    /// Initial states (full) or classes (averaged), comma-separated.
    #[arg(long)]
    q0: Option<String>,
    /// Falls back to PDMP_AXON_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    snapshot_stride: Option<usize>,
    /// Keep u fixed at u0 (no diffusion, no reaction).
    #[arg(long)]
    frozen_potential: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<KineticsError> for Failure {
    fn from(e: KineticsError) -> Self {
        match e {
            KineticsError::Parse(_)
            | KineticsError::InvalidClass { .. }
            | KineticsError::InvalidEpsilon(_)
            | KineticsError::InvalidScheme(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<HybridError> for Failure {
    fn from(e: HybridError) -> Self {
        match e {
            HybridError::Config(c) => c.into(),
            HybridError::WrongModel { .. } | HybridError::InvalidState { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Hybrid(h) => h.into(),
            AnalysisError::InsufficientEnsemble { .. }
            | AnalysisError::InvalidLadder(_)
            | AnalysisError::WrongModel(_)
            | AnalysisError::Mismatch(_)
            | AnalysisError::TooLarge { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Config(c) => c.into(),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl SimArgs {
    /// Config file pairs, then flags; resolves the seed and, when no `dt`
    /// was given, the admissible step.
    fn build(&self) -> Result<(KineticScheme, SimConfig), Failure> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        set("model", self.model.clone());
        set("scheme", self.scheme.clone());
        set("eps", self.eps.map(|x| x.to_string()));
        set("N", self.n.map(|x| x.to_string()));
        set("M", self.m.map(|x| x.to_string()));
        set("dt", self.dt.map(|x| x.to_string()));
        set("T", self.t_end.map(|x| x.to_string()));
        set("k-diff", self.k_diff.map(|x| x.to_string()));
        set("input", self.input.clone());
        set("clamp-input", self.clamp_input.then(|| "true".to_string()));
        set("u0", self.u0.clone());
        set("q0", self.q0.clone());
        set("seed", self.seed.map(|x| x.to_string()));
        set(
            "snapshot-stride",
            self.snapshot_stride.map(|x| x.to_string()),
        );
        set(
            "frozen-potential",
            self.frozen_potential.then(|| "true".to_string()),
        );
        let has = |k: &str| pairs.iter().any(|(key, _)| key == k);
        let (has_seed, has_dt) = (has("seed"), has("dt"));
        let mut cfg = SimConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        if !has_seed {
            cfg.seed = resolve_seed(None)?;
        }
        let scheme = load_scheme(&cfg.scheme)?;
        if !has_dt {
            cfg = cfg.with_admissible_dt(&scheme)?;
        }
        cfg.validate(&scheme)?;
        Ok((scheme, cfg))
    }
}

fn write(
    dir: &Path,
    name: &str,
    contents: impl AsRef<[u8]>,
    manifest: &mut RunManifest,
) -> Result<(), Failure> {
    fs::write(dir.join(name), contents)?;
    manifest.add_file(dir, name)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { sim, out_dir } => {
            let (scheme, cfg) = sim.build()?;
            let traj = simulate(&scheme, &cfg, &mut member_rng(cfg.seed, 0))?;
            fs::create_dir_all(&out_dir)?;
            let mut manifest = RunManifest::new("simulate", cfg.seed, cfg.to_pairs());
            write(
                &out_dir,
                "snapshots.csv",
                snapshots_csv(&traj),
                &mut manifest,
            )?;
            write(&out_dir, "jumps.csv", jumps_csv(&traj), &mut manifest)?;
            manifest.finish(&out_dir)?;
            println!(
                "{} steps of dt = {:e}, {} jumps, {} snapshots -> {}",
                cfg.steps(),
                cfg.dt,
                traj.jumps.len(),
                traj.snapshots.len(),
                out_dir.display()
            );
        }
        Command::Heatmap {
            csv,
            output,
            lo,
            hi,
        } => {
            let rows = read_matrix(&fs::read_to_string(&csv)?)?;
            let img = heatmap_pgm(&rows, GrayMap { lo, hi })?;
            fs::write(&output, img)?;
            println!("{} snapshots -> {}", rows.len(), output.display());
        }
        Command::Sweep {
            sim,
            ladder,
            ensemble,
            phi,
            out_dir,
        } => {
            let (scheme, cfg) = sim.build()?;
            let report = epsilon_sweep(&scheme, &cfg, &ladder, ensemble, &phi)?;
            fs::create_dir_all(&out_dir)?;
            let summary = report.summary();
            let mut pairs = cfg.to_pairs();
            pairs.push((
                "ladder".into(),
                ladder
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ));
            pairs.push(("ensemble".into(), ensemble.to_string()));
            pairs.push(("phi".into(), phi.to_string()));
            let mut manifest = RunManifest::new("sweep", cfg.seed, pairs);
            write(&out_dir, "sweep.csv", report.to_csv(), &mut manifest)?;
            write(&out_dir, "summary.txt", &summary, &mut manifest)?;
            manifest.finish(&out_dir)?;
            print!("{summary}");
        }
        Command::Poisson {
            scheme,
            n,
            m,
            u0,
            phi,
            output,
        } => {
            let scheme = load_scheme(&scheme)?;
            let grid =
                pdmp_axon::field::Grid::new(m, n).map_err(|e| Failure::Usage(e.to_string()))?;
            let u = Field::from_fn(grid, |x| u0.value(x));
            let sol = poisson_solve(&scheme, &u, &phi)?;
            let report = sol.report();
            if let Some(path) = output {
                fs::write(path, &report)?;
            }
            print!("{report}");
        }
        Command::Stationary {
            scheme,
            class,
            v,
            eps,
        } => {
            let scheme = load_scheme(&scheme)?;
            let (states, mu) = match class {
                Some(j) => (
                    scheme.class_members(j)?.to_vec(),
                    scheme.quasi_stationary(j, v)?,
                ),
                None => (
                    (0..scheme.n_states()).collect(),
                    stationary_distribution(&scheme.full_generator(v, eps)?)?,
                ),
            };
            for (s, p) in states.iter().zip(mu.probs()) {
                println!("{} {:.6e}", scheme.state_names()[*s], p);
            }
        }
        Command::Verify { dir } => {
            let bad = verify_manifest(&dir)?;
            if !bad.is_empty() {
                return Err(Failure::Runtime(format!(
                    "hash mismatch: {}",
                    bad.join(", ")
                )));
            }
            println!("manifest verified");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
