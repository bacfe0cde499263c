use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvngs::figures::CATALOG;
use cvngs::manifest::{
    AxisChoice, Command, Format, FourCatSection, GridSection, Manifest, OracleSection,
    PulseSection, Range, StageSection, SweepSection, SystemSection, TargetSection,
};
use cvngs::{execute, report_load_failure, Overrides};

#[derive(Parser)]
#[command(
    name = "cvngs",
    version,
    about = "Pulsed optomechanics and engineered photon subtraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output directory (default: manifest output.dir, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and grids (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Square Wigner grid "xmin,xmax,n".
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Sub {
    /// Run whatever command the manifest names.
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
    EntanglementSweep(WithManifest),
    Eps(WithManifest),
    GainSolve(WithManifest),
    FourCat(WithManifest),
    Imperfections(WithManifest),
    Oracle(WithManifest),
    /// Emit the data and plot scripts behind published figures.
    Figures {
        /// Comma-separated figure ids, or "all".
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Print the figure catalog and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args)]
struct WithManifest {
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn default_manifest(c: Command) -> Manifest {
    let mut m = Manifest::new(c);
    match c {
        Command::EntanglementSweep => {
            m.sweep = Some(SweepSection {
                reflectivity: Some(Range::Span {
                    start: 0.01,
                    stop: 1.0,
                    n: 100,
                }),
                ..Default::default()
            });
        }
        Command::GainSolve => m.pulse = Some(PulseSection::reflectivity(0.9)),
        Command::Eps => {
            m.pulse = Some(PulseSection::reflectivity(0.9));
            m.stages = vec![StageSection::xi(1.0, 2)];
            m.target = Some(TargetSection::BestCat {
                axis: AxisChoice::P,
                parity: 1,
            });
        }
        Command::Imperfections => {
            m.system = SystemSection::with_cooperativity(0.8);
            m.pulse = Some(PulseSection::reflectivity(0.5));
            m.stages = vec![StageSection::xi(1.0, 2)];
            m.channel.eta = 0.9;
            m.channel.nu = 0.98;
            m.measurement.efficiency = 0.8;
            m.target = Some(TargetSection::BestCat {
                axis: AxisChoice::P,
                parity: 1,
            });
        }
        Command::FourCat => {
            m.pulse = Some(PulseSection::reflectivity(0.9));
            m.four_cat = Some(FourCatSection { xi1: 0.0 });
        }
        Command::Oracle => {
            m.system.gamma_mhz = Some(0.0);
            m.pulse = Some(PulseSection::reflectivity(0.5));
            m.stages = vec![StageSection::xi(1.0, 2)];
            m.oracle = Some(OracleSection { truncation: 40 });
        }
        Command::Figures => m.figures = CATALOG.iter().map(|s| s.to_string()).collect(),
    }
    m
}

fn load(
    path: &Option<PathBuf>,
    c: Command,
    out_flag: &Option<PathBuf>,
) -> Result<Manifest, (PathBuf, cvngs::error::CliError)> {
    let Some(p) = path else {
        return Ok(default_manifest(c));
    };
    let m = Manifest::load(p).map_err(|e| (p.clone(), e))?;
    if m.command != c {
        let _ = out_flag;
        return Err((
            p.clone(),
            cvngs::error::CliError::validation(format!(
                "manifest command is {}, not {}",
                m.command.name(),
                c.name()
            )),
        ));
    }
    Ok(m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let grid = match cli
        .common
        .grid
        .as_deref()
        .map(GridSection::parse)
        .transpose()
    {
        Ok(g) => g,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let ov = Overrides {
        jobs: cli.common.jobs,
        grid,
        format: cli.common.format,
    };
    let loaded = match &cli.command {
        Sub::Run { manifest } => Manifest::load(manifest).map_err(|e| (manifest.clone(), e)),
        Sub::EntanglementSweep(a) => load(&a.manifest, Command::EntanglementSweep, &cli.common.out),
        Sub::Eps(a) => load(&a.manifest, Command::Eps, &cli.common.out),
        Sub::GainSolve(a) => load(&a.manifest, Command::GainSolve, &cli.common.out),
        Sub::FourCat(a) => load(&a.manifest, Command::FourCat, &cli.common.out),
        Sub::Imperfections(a) => load(&a.manifest, Command::Imperfections, &cli.common.out),
        Sub::Oracle(a) => load(&a.manifest, Command::Oracle, &cli.common.out),
        Sub::Figures {
            which,
            manifest,
            list,
        } => {
            if *list {
                for id in CATALOG {
                    println!("{id}");
                }
                return ExitCode::SUCCESS;
            }
            load(manifest, Command::Figures, &cli.common.out).map(|mut m| {
                if let Some(w) = which {
                    m.figures = if w == "all" {
                        CATALOG.iter().map(|s| s.to_string()).collect()
                    } else {
                        w.split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect()
                    };
                }
                m
            })
        }
    };
    let out_for = |m: Option<&Manifest>| {
        cli.common
            .out
            .clone()
            .or_else(|| m.and_then(|m| m.output.dir.clone()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    };
    let (report, code) = match loaded {
        Ok(m) => execute(&m, &out_for(Some(&m)), &ov),
        Err((path, e)) => report_load_failure(&path, e, &out_for(None)),
    };
    match serde_json::to_string_pretty(&report) {
        Ok(s) if code == 0 => println!("{s}"),
        _ => eprintln!(
            "{}",
            report.error.as_deref().unwrap_or("failed to write report")
        ),
    }
    ExitCode::from(code as u8)
}
