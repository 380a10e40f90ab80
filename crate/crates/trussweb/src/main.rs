use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use trussweb::pipeline::{self, Analysis, AnalysisRequest, Catalog, TopOptSettings};
use trussweb::service::{self, Config};
use trussweb::store::write_atomic;
use trussweb::{advisor, model_csv};
use trussweb_core::fixtures;

#[derive(Parser)]
#[command(name = "trussweb", version, about = "Plane truss analysis, IS 800 design, size and gusset optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisArg {
    Static,
    Is800Design,
    SizeOpt,
    GussetTopopt,
}

impl From<AnalysisArg> for Analysis {
    fn from(a: AnalysisArg) -> Self {
        match a {
            AnalysisArg::Static => Analysis::Static,
            AnalysisArg::Is800Design => Analysis::Is800Design,
            AnalysisArg::SizeOpt => Analysis::SizeOpt,
            AnalysisArg::GussetTopopt => Analysis::GussetTopopt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogArg {
    Default,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    /// Roof truss of the design demonstration, loads scaled by 10.
    Demo,
    /// 8 m Pratt truss used for hand-checked forces.
    Pratt,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP job service.
    Serve {
        #[arg(long, env = "TRUSSWEB_ADDR", default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long, env = "TRUSSWEB_JOBS", default_value = "jobs")]
        jobs_dir: PathBuf,
        /// Jobs run at once; defaults to the CPU count.
        #[arg(long, env = "TRUSSWEB_WORKERS")]
        workers: Option<usize>,
        /// Browser bundle to serve at /.
        #[arg(long, env = "TRUSSWEB_STATIC")]
        static_dir: Option<PathBuf>,
    },
    /// Analyse a model document and write every artifact to a directory.
    Run {
        model: PathBuf,
        #[arg(long, short, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "static")]
        analyses: Vec<AnalysisArg>,
        #[arg(long, default_value_t = 0.5)]
        volfrac: f64,
        /// Gusset elements per side.
        #[arg(long, default_value_t = trussweb_core::gusset::DEFAULT_MESH)]
        nel: usize,
        /// Gusset thickness, m.
        #[arg(long, default_value_t = trussweb_core::gusset::DEFAULT_THICKNESS)]
        thickness: f64,
        #[arg(long, value_enum, default_value = "default")]
        catalog: CatalogArg,
    },
    /// Print validation problems in a model document.
    Check { model: PathBuf },
    /// Suggest layouts for a span, optionally writing each as a model document.
    Advisor {
        #[arg(long)]
        span: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a bundled example model document.
    Example {
        #[arg(value_enum)]
        name: Example,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> trussweb::Result<ExitCode> {
    match cmd {
        Command::Serve { addr, jobs_dir, workers, static_dir } => {
            let mut cfg = Config::new(addr, jobs_dir);
            if let Some(w) = workers {
                cfg.workers = w;
            }
            cfg.static_dir = static_dir;
            let running = service::start(cfg)?;
            eprintln!("listening on {}", running.url());
            running.join();
        }
        Command::Run { model, out, analyses, volfrac, nel, thickness, catalog } => {
            let req = AnalysisRequest {
                model: std::fs::read_to_string(&model)?,
                analyses: analyses.into_iter().map(Analysis::from).collect(),
                topopt: TopOptSettings { volfrac, nelx: nel, nely: nel, thickness },
                catalog: match catalog {
                    CatalogArg::Default => Catalog::Default,
                    CatalogArg::Full => Catalog::Full,
                },
            };
            let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
            let outcome = pipeline::run(&req, threads)?;
            for (name, bytes) in &outcome.files {
                write_atomic(&out.join(name), bytes)?;
                println!("{}", out.join(name).display());
            }
        }
        Command::Check { model } => {
            let m = model_csv::parse(&std::fs::read_to_string(&model)?)?;
            let v = trussweb_core::model::validate(&m);
            for line in &v {
                println!("{line}");
            }
            if !v.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
            println!("ok: {} nodes, {} members", m.nodes.len(), m.members.len());
        }
        Command::Advisor { span, out } => {
            for s in advisor::suggest(span)? {
                println!("{}: {} panels, height {:.3} m", s.name, s.panels, s.height);
                if let Some(dir) = &out {
                    let file = dir.join(format!("{:?}.csv", s.kind).to_lowercase());
                    write_atomic(&file, s.model.as_bytes())?;
                }
            }
        }
        Command::Example { name } => {
            let m = match name {
                Example::Demo => fixtures::roof_truss(10.0),
                Example::Pratt => fixtures::pratt_verification(),
            };
            print!("{}", model_csv::serialize(&m));
        }
    }
    Ok(ExitCode::SUCCESS)
}
