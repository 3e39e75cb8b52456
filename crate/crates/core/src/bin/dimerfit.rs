use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dimerfit::config::RunConfig;
use dimerfit::model::{BasisSpec, DimerParams, MonomerParams};
use dimerfit::pipeline::{cmd_fit, cmd_landscape, cmd_simulate, cmd_validate, SimulateRequest};
use dimerfit::spectra::{FrequencyGrid, SimulationSettings};
use dimerfit::{Error, Result};

#[derive(Parser)]
#[command(name = "dimerfit", version, about = "Fit vibronic monomer and dimer absorption spectra")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a monomer or dimer fit.
    Fit(FitArgs),
    /// Cost landscapes and consistency regions for a finished fit.
    Landscape(LandscapeArgs),
    /// Simulate one spectrum.
    Simulate(SimulateArgs),
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LandscapeArgs {
    /// manifest.json of the fit.
    #[arg(long)]
    manifest: PathBuf,
    /// Evaluate the simulator on the cut grids as well.
    #[arg(long)]
    exact_cuts: bool,
    /// Evaluate the simulator on a full grid over all searched parameters.
    #[arg(long)]
    exact_full: bool,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    exact_points: Option<usize>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// epsilon_e,omega_vib,huang_rhys,gamma,sigma_m
    #[arg(long, allow_hyphen_values = true)]
    monomer: String,
    /// coupling_v,delta,alpha,sigma_d
    #[arg(long, allow_hyphen_values = true)]
    dimer: Option<String>,
    /// start:end:points
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = BasisSpec::DEFAULT_N_MAX)]
    n_max: usize,
    /// Spectrum file to compare against; prints the cost.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<FrequencyGrid> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::config("--grid", format!("expected start:end:points, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let end: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    FrequencyGrid::new(start, end, n)
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::config(flag, format!("not a number: {v:?}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let mut cfg = RunConfig::load(&a.config)?;
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(w) = a.workers {
                cfg.workers = w;
            }
            if let Some(b) = a.budget {
                cfg.budget = b;
            }
            if let Some(o) = a.out {
                cfg.output_dir = o;
            }
            let (m, path) = cmd_fit(&cfg)?;
            println!("best cost {:.6}", m.best.cost);
            for (n, v) in m.best.full_names.iter().zip(&m.best.full_params) {
                println!("  {n} = {v}");
            }
            println!("manifest: {}", path.display());
        }
        Command::Landscape(a) => {
            let text = std::fs::read_to_string(&a.manifest).map_err(|e| Error::Io {
                path: a.manifest.clone(),
                source: e,
            })?;
            let mut lc = dimerfit::manifest::RunManifest::from_json(&text)?.config.landscape;
            lc.exact_cuts |= a.exact_cuts;
            lc.exact_full |= a.exact_full;
            if let Some(p) = a.points {
                lc.points = p;
            }
            if let Some(p) = a.exact_points {
                lc.exact_points = p;
            }
            let report = cmd_landscape(&a.manifest, &lc, a.workers)?;
            for e in &report.landscapes {
                print!("{}: {} nodes, mean std {:.4}", e.label, e.nodes, e.uncertainty_metric);
                if let Some(ec) = e.error_metric {
                    print!(", E^C {ec:.4}");
                }
                println!();
                let regions = e.exact_regions.as_ref().unwrap_or(&e.surrogate_regions);
                for r in regions {
                    let ext: Vec<String> = r
                        .extents
                        .iter()
                        .map(|(n, lo, hi)| format!("{n} [{lo:.4}, {hi:.4}]"))
                        .collect();
                    println!("  cost <= {}: {} nodes {}", r.threshold, r.nodes, ext.join(" "));
                }
            }
        }
        Command::Simulate(a) => {
            let monomer = MonomerParams::from_slice(&parse_list("--monomer", &a.monomer)?)?;
            let dimer = match &a.dimer {
                Some(d) => Some(DimerParams::from_slice(&parse_list("--dimer", d)?)?),
                None => None,
            };
            let mut basis = BasisSpec::new(a.n_max);
            basis.max_dim = basis.max_dim.max(basis.dimer_dim());
            let req = SimulateRequest {
                monomer,
                dimer,
                settings: SimulationSettings {
                    basis,
                    ..Default::default()
                },
                grid: a.grid.as_deref().map(parse_grid).transpose()?,
                reference: a.reference,
                out: a.out.clone(),
            };
            let rep = cmd_simulate(&req)?;
            println!("coverage {:.6}", rep.result.coverage);
            if let Some(c) = rep.cost {
                println!("cost {c:.9}");
            }
            match a.out {
                Some(p) => println!("wrote {}", p.display()),
                None => print!("{}", dimerfit::spectra::io::format_spectrum(&rep.result.spectrum, &[])),
            }
        }
        Command::Validate { config } => {
            let report = cmd_validate(&config);
            print!("{}", report.render());
            if !report.ok() {
                return Err(Error::config("config", "validation failed"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
