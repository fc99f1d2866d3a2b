use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kunits::study::{self, Rq, StudyConfig, StudyError};

#[derive(Parser)]
#[command(name = "kunits", version, about = "Knowledge-unit defect prediction study")]
struct Cli {
    /// Study configuration (TOML).
    #[arg(short, long, global = true, default_value = "kunits.toml")]
    config: PathBuf,
    /// Replaces the configured output directory.
    #[arg(long, global = true, env = "KUNITS_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "KUNITS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one feature table per release.
    Extract,
    /// Correlation and clustering comparison of KUs and code metrics.
    Prelim,
    /// Evaluate models for research questions.
    Study {
        /// rq1, rq2, rq4, rq5, rq6, or all. Repeatable.
        #[arg(long = "rq", required = true, num_args = 1..)]
        rq: Vec<String>,
    },
    /// Explain the prediction for one file.
    Explain {
        #[arg(long)]
        release: String,
        #[arg(long)]
        path: String,
        /// KUCLS, CC_PROD, CC, KUCLS+CC or KUCLS_CC_COST_EFF; default KUCLS and CC.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Summarize every finished step.
    Report,
}

const PARTIAL: u8 = 1;
const CONFIG: u8 = 2;

fn code_of(e: &StudyError) -> u8 {
    match e {
        StudyError::Config(_) => CONFIG,
        _ => PARTIAL,
    }
}

fn report_failures(failures: &[study::ReleaseFailure]) -> u8 {
    for f in failures {
        eprintln!("{}: {}", f.release, f.error);
    }
    if failures.is_empty() {
        0
    } else {
        PARTIAL
    }
}

fn run(cli: Cli) -> Result<u8, StudyError> {
    let mut cfg = StudyConfig::load(&cli.config)?;
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    let dir = cfg.run_dir();
    match cli.command {
        Command::Extract => {
            let out = study::run_extract(&cfg)?;
            println!("{} table(s) in {}", out.written.len(), dir.join("tables").display());
            Ok(report_failures(&out.failures))
        }
        Command::Prelim => {
            let r = study::run_prelim(&cfg)?;
            let ari = r.median_ari.map_or("-".into(), |a| format!("{a:.3}"));
            println!("median ARI {ari}; outputs in {}", dir.join("prelim").display());
            Ok(report_failures(&r.failures))
        }
        Command::Study { rq } => {
            let mut wanted = Vec::new();
            for s in &rq {
                if s.eq_ignore_ascii_case("all") {
                    wanted.extend(Rq::ALL);
                } else {
                    wanted.push(s.parse::<Rq>()?);
                }
            }
            wanted.sort();
            wanted.dedup();
            let mut code = 0;
            for q in wanted {
                let s = study::run_study(&cfg, q)?;
                println!("{q}: {} release(s); outputs in {}", s.releases.len(), dir.join(q.name()).display());
                code = code.max(report_failures(&s.failures));
            }
            Ok(code)
        }
        Command::Explain { release, path, model, top } => {
            let out = study::explain_file(&cfg, &release, &path, model.as_deref(), top)?;
            print!("{}", out.render());
            Ok(0)
        }
        Command::Report => {
            study::run_report(&cfg)?;
            println!("{}", dir.join("report").join("summary.md").display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code_of(&e))
        }
    }
}
