//! Command-line front end. Every subcommand is a thin wrapper over the library.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uwofdm_lab::airlink::UwSpec;
use uwofdm_lab::design::{AdDomain, DescentOptions, InitKind};
use uwofdm_lab::genmat::archive::GeneratorArchive;
use uwofdm_lab::genmat::GeneratorSet;
use uwofdm_lab::harness::{
    design_generators, parse_eps_grid, run_approx_error, run_cpe_bmse, run_ici_sweep, run_pilot_table,
    write_approx_error_csv, write_bmse_csv, write_ici_csv, write_pilot_table_csv, Link, Scenario, DEFAULT_REALIZATIONS,
};
use uwofdm_lab::sysmodel::{validate_config, Mode};
use uwofdm_lab::{Error, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "uwofdm-lab", version, about = "UW-OFDM pilot, CFO and CPE experiments")]
struct Cli {
    /// TOML system configuration (defaults to the 64-point reference setup).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configuration and print it fully resolved.
    Validate,
    /// Optimize the data generator and write a generator archive.
    OptimizeGd {
        #[command(flatten)]
        design: DesignArgs,
        /// Seed of the random initialization.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Archive path.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV of the cost after every accepted step.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Minimum pilot energy per PSK alphabet size.
    PilotTable {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,10,20")]
        cardinalities: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo BMSE of the compensated CPE estimate, UW-OFDM against CP-OFDM.
    SimulateCpe {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Data and pilot ICI power at the pilots, UW-OFDM against CP-OFDM.
    IciSweep {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Per-subcarrier power of the neglected zero-subcarrier leakage.
    ApproxError {
        #[command(flatten)]
        source: GenSource,
        /// zero, cazac, barker or custom:PATH
        #[arg(long, default_value = "cazac")]
        uw: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert generator archives to and from CSV text.
    Genmat {
        #[command(subcommand)]
        action: GenmatAction,
    },
}

#[derive(Subcommand)]
enum GenmatAction {
    /// Write the entries of an archive as `name,row,col,re,im` CSV.
    Export {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an archive for the configuration from exported CSV.
    Import {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct DesignArgs {
    /// Initial A_d: perm or random.
    #[arg(long, default_value = "perm")]
    init: InitKind,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    /// Allow complex entries in A_d.
    #[arg(long)]
    complex: bool,
    /// Pilot alphabet size for the pilot search.
    #[arg(long, default_value_t = 20)]
    cardinality: usize,
}

#[derive(Args, Clone)]
struct GenSource {
    /// Use generators from this archive instead of optimizing.
    #[arg(long)]
    genmat: Option<PathBuf>,
    #[command(flatten)]
    design: DesignArgs,
    /// Seed of the random initialization when optimizing.
    #[arg(long, default_value_t = 1)]
    design_seed: u64,
}

#[derive(Args, Clone)]
struct SimArgs {
    #[command(flatten)]
    source: GenSource,
    /// zero, cazac, barker or custom:PATH
    #[arg(long, default_value = "cazac")]
    uw: String,
    #[arg(long, default_value_t = DEFAULT_REALIZATIONS)]
    realizations: usize,
    /// CFO grid a:b:step.
    #[arg(long, default_value = "0:0.1:0.02")]
    eps_grid: String,
    /// Time-domain noise variance.
    #[arg(long, default_value_t = 0.0)]
    noise_var: f64,
    /// Monte-Carlo seed (channels and data).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl DesignArgs {
    fn options(&self, seed: u64) -> DescentOptions {
        DescentOptions {
            max_iters: self.max_iters,
            seed,
            domain: if self.complex {
                AdDomain::Complex
            } else {
                AdDomain::Real
            },
            ..Default::default()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<SystemConfig> {
    match path {
        Some(p) => SystemConfig::load(p),
        None => Ok(SystemConfig::reference_uw()),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn generators(cfg: &SystemConfig, src: &GenSource) -> Result<GeneratorSet> {
    if let Some(path) = &src.genmat {
        let ar = GeneratorArchive::load(path)?;
        ar.check_config(cfg)?;
        return Ok(ar.set);
    }
    let (gens, descent, _) = design_generators(
        cfg,
        src.design.init,
        &src.design.options(src.design_seed),
        src.design.cardinality,
    )?;
    eprintln!(
        "designed G_d: {} steps, J_d {:.6} -> {:.6}",
        descent.costs.len() - 1,
        descent.costs[0],
        descent.costs.last().copied().unwrap_or(f64::NAN)
    );
    Ok(gens)
}

fn require_uw(cfg: &SystemConfig) -> Result<()> {
    if cfg.mode != Mode::UwOfdm {
        return Err(Error::InvalidArgument(
            "this command needs a UW-OFDM configuration".into(),
        ));
    }
    Ok(())
}

fn links(cfg: &SystemConfig, sim: &SimArgs) -> Result<(Link, Link, Scenario)> {
    require_uw(cfg)?;
    let uw_spec = UwSpec::parse(&sim.uw)?;
    let gens = generators(cfg, &sim.source)?;
    let p = gens.p.clone();
    let uw = Link::uw_ofdm("uw-ofdm", cfg, gens, &uw_spec)?;
    let cp = Link::cp_reference("cp-ofdm", cfg, &p)?;
    let sc = Scenario {
        eps_grid: parse_eps_grid(&sim.eps_grid)?,
        n_realizations: sim.realizations,
        noise_var: sim.noise_var,
        seed: sim.seed,
        symbols: cfg.l,
        ..Default::default()
    };
    sc.validate()?;
    Ok((uw, cp, sc))
}

fn run(cli: Cli) -> Result<()> {
    let cfg_path = cli.config.as_deref();
    match cli.command {
        Command::Validate => {
            let cfg = load_config(cfg_path)?;
            let problems = validate_config(&cfg);
            if !problems.is_empty() {
                return Err(Error::InvalidConfig(problems));
            }
            print!("{}", cfg.to_toml_string());
            println!("# cfg_hash = \"{}\"", cfg.hash_hex());
        }
        Command::OptimizeGd {
            design,
            seed,
            out,
            trace,
        } => {
            let cfg = load_config(cfg_path)?;
            require_uw(&cfg)?;
            let (gens, descent, pilots) =
                design_generators(&cfg, design.init, &design.options(seed), design.cardinality)?;
            GeneratorArchive::new(gens, &cfg).save(&out)?;
            if let Some(t) = trace {
                let mut w = BufWriter::new(File::create(t)?);
                writeln!(w, "iteration,cost")?;
                for (i, c) in descent.costs.iter().enumerate() {
                    writeln!(w, "{i},{c}")?;
                }
                w.flush()?;
            }
            eprintln!(
                "{} steps ({}), J_d {:.6} -> {:.6}, N*E_p {:.6} with exponents {:?}",
                descent.costs.len() - 1,
                if descent.converged {
                    "converged"
                } else {
                    "iteration limit"
                },
                descent.costs[0],
                descent.costs.last().copied().unwrap_or(f64::NAN),
                pilots.energy,
                pilots.exponents
            );
        }
        Command::PilotTable { cardinalities, out } => {
            let cfg = load_config(cfg_path)?;
            let rows = run_pilot_table(&cfg, &cardinalities)?;
            write_pilot_table_csv(output(out.as_deref())?, &rows)?;
        }
        Command::SimulateCpe { sim } => {
            let cfg = load_config(cfg_path)?;
            let (uw, cp, sc) = links(&cfg, &sim)?;
            let rows = vec![
                (uw.label.clone(), run_cpe_bmse(&uw, &sc)?),
                (cp.label.clone(), run_cpe_bmse(&cp, &sc)?),
            ];
            for (label, t) in &rows {
                for r in t.iter().filter(|r| r.n_used < sc.n_realizations) {
                    eprintln!(
                        "warning: {label} eps={}: {} realizations skipped",
                        r.eps,
                        sc.n_realizations - r.n_used
                    );
                }
            }
            write_bmse_csv(output(sim.out.as_deref())?, sc.seed, &rows)?;
        }
        Command::IciSweep { sim } => {
            let cfg = load_config(cfg_path)?;
            let (uw, cp, sc) = links(&cfg, &sim)?;
            let rows = vec![
                (uw.label.clone(), run_ici_sweep(&uw, &sc)?),
                (cp.label.clone(), run_ici_sweep(&cp, &sc)?),
            ];
            write_ici_csv(output(sim.out.as_deref())?, sc.seed, &rows)?;
        }
        Command::ApproxError { source, uw, eps, out } => {
            let cfg = load_config(cfg_path)?;
            require_uw(&cfg)?;
            let spec = UwSpec::parse(&uw)?;
            let gens = generators(&cfg, &source)?;
            let report = run_approx_error(&cfg, &gens, &[spec], eps)?;
            write_approx_error_csv(output(out.as_deref())?, &report[0].1)?;
        }
        Command::Genmat { action } => match action {
            GenmatAction::Export { archive, out } => {
                let ar = GeneratorArchive::load(archive)?;
                ar.export_csv(output(out.as_deref())?)?;
            }
            GenmatAction::Import { from, out } => {
                let cfg = load_config(cfg_path)?;
                let ar = GeneratorArchive::import_csv(File::open(from)?, &cfg)?;
                ar.save(out)?;
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
