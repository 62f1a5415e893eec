use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info, warn};

use adacat::bench::{emit_csv, execute_runs, exit_code, load_config};
use adacat::numkit::Rng;
use adacat::problems::{a1a_like, parse_libsvm, to_libsvm_string, QuadraticProblem};
use adacat::Error;

const A1A_URL: &str = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/a1a";

const EXIT_CONFIG: u8 = 3;
const EXIT_FAILURE: u8 = 1;

#[derive(Parser)]
#[command(name = "adacat", version, about = "Benchmark harness for the adaptive accelerated proximal envelope")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the runs of a config file and write one CSV per run.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replace the `seed` (and default `run_seed`) of every run.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated run ids to execute.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Generate a degenerate random quadratic and write its matrix.
    GenQuadratic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded synthetic sample with a1a's feature layout.
    GenLogistic {
        #[arg(long, default_value_t = 1605)]
        rows: usize,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Download the a1a dataset (network access).
    FetchA1a {
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that a file parses as LIBSVM text and print its shape.
    Validate {
        #[arg(long)]
        libsvm: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    dispatch(Cli::parse())
}

fn dispatch(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Run { config, out, seed, only, jobs } => run(config, out, seed, only, jobs),
        Command::GenQuadratic { n, seed, out } => {
            if n == 0 {
                error!("--n must be positive");
                return ExitCode::from(EXIT_CONFIG);
            }
            let q = QuadraticProblem::generate(n, &mut Rng::new(seed));
            finish(std::fs::write(&out, q.to_text()).map_err(Error::from), &out)
        }
        Command::GenLogistic { rows, seed, out } => {
            let ds = a1a_like(rows, seed);
            finish(std::fs::write(&out, to_libsvm_string(&ds)).map_err(Error::from), &out)
        }
        Command::FetchA1a { out } => finish(fetch(&out), &out),
        Command::Validate { libsvm } => validate(libsvm),
    }
}

fn finish(r: adacat::Result<()>, out: &std::path::Path) -> ExitCode {
    match r {
        Ok(()) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn run(config: PathBuf, out: PathBuf, seed: Option<u64>, only: Option<Vec<String>>, jobs: usize) -> ExitCode {
    let mut loaded = match load_config(&config) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    for w in &loaded.warnings {
        warn!("{w}");
    }
    if let Some(ids) = only {
        let known: HashSet<&str> = loaded.runs.iter().map(|r| r.run_id.as_str()).collect();
        if let Some(bad) = ids.iter().find(|id| !known.contains(id.as_str())) {
            error!("--only: no run named `{bad}`");
            return ExitCode::from(EXIT_CONFIG);
        }
        loaded.runs.retain(|r| ids.contains(&r.run_id));
    }
    if let Some(s) = seed {
        for r in &mut loaded.runs {
            if let adacat::bench::ProblemSpec::Quadratic { seed, .. } = &mut r.problem {
                *seed = s;
            }
            r.run_seed = s;
        }
    }

    let results = execute_runs(&loaded.runs, jobs);
    if let Err(e) = emit_csv(&results, &out) {
        error!("{e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    for r in &results {
        println!(
            "{:<24} {:<10} gap {:>12} cost {:>12}",
            r.spec.run_id,
            r.trace.terminal_status,
            format!("{:.3e}", r.trace.final_gap()),
            format!("{:.1}", r.trace.total_grad_equiv()),
        );
        if let Some(e) = &r.trace.error {
            warn!("run `{}`: {e}", r.spec.run_id);
        }
    }
    info!("traces written to {}", out.display());
    ExitCode::from(exit_code(&results) as u8)
}

fn fetch(out: &std::path::Path) -> adacat::Result<()> {
    let body = ureq::get(A1A_URL)
        .call()
        .map_err(|e| Error::Io(format!("GET {A1A_URL}: {e}")))?
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Io(e.to_string()))?;
    let ds = parse_libsvm(&body)?;
    info!("a1a: {} rows, {} features", ds.len(), ds.n_features);
    std::fs::write(out, body)?;
    Ok(())
}

fn validate(path: PathBuf) -> ExitCode {
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            error!("{}: {e}", path.display());
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    match parse_libsvm(&text) {
        Ok(ds) => {
            let pos = ds.rows.iter().filter(|r| r.label > 0.0).count();
            println!(
                "{}: {} rows, {} features, {} nonzeros, {} positive / {} negative",
                path.display(),
                ds.len(),
                ds.n_features,
                ds.nnz(),
                pos,
                ds.len() - pos
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{}: {e}", path.display());
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> ExitCode {
        dispatch(Cli::try_parse_from(std::iter::once("adacat").chain(args.iter().copied())).unwrap())
    }

    fn path_str(p: &std::path::Path) -> &str {
        p.to_str().unwrap()
    }

    const SMALL: &str = "[defaults]\nproblem = quadratic\nn = 10\nseed = 4\nmethod = sd\neps = 1e-6\n[run plain]\n[run acc]\naccelerated = true\n";

    #[test]
    fn run_writes_one_csv_per_run_plus_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("small.cfg");
        std::fs::write(&cfg, SMALL).unwrap();
        let out = dir.path().join("out");
        assert_eq!(exec(&["run", "--config", path_str(&cfg), "--out", path_str(&out)]), ExitCode::SUCCESS);
        let mut names: Vec<String> =
            std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        assert_eq!(names, ["acc.csv", "manifest.csv", "plain.csv"]);
        let manifest = std::fs::read_to_string(out.join("manifest.csv")).unwrap();
        assert_eq!(manifest.lines().count(), 3);
        assert!(manifest.lines().skip(1).all(|l| l.contains(",converged,")));
    }

    #[test]
    fn only_filters_runs_and_rejects_unknown_ids() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("small.cfg");
        std::fs::write(&cfg, SMALL).unwrap();
        let out = dir.path().join("out");
        let args = ["run", "--config", path_str(&cfg), "--out", path_str(&out), "--only"];
        assert_eq!(exec(&[&args[..], &["acc"]].concat()), ExitCode::SUCCESS);
        assert!(out.join("acc.csv").exists() && !out.join("plain.csv").exists());
        assert_eq!(exec(&[&args[..], &["nope"]].concat()), ExitCode::from(EXIT_CONFIG));
    }

    #[test]
    fn config_errors_exit_with_config_code() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.cfg");
        std::fs::write(&cfg, "[run a]\nmethod = sd\nwhatever = 1\n").unwrap();
        let out = path_str(dir.path());
        assert_eq!(exec(&["run", "--config", path_str(&cfg), "--out", out]), ExitCode::from(EXIT_CONFIG));
        let missing = dir.path().join("missing.cfg");
        assert_eq!(exec(&["run", "--config", path_str(&missing), "--out", out]), ExitCode::from(EXIT_CONFIG));
    }

    #[test]
    fn generated_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let q = dir.path().join("q.txt");
        assert_eq!(exec(&["gen-quadratic", "--n", "6", "--seed", "9", "--out", path_str(&q)]), ExitCode::SUCCESS);
        let back = QuadraticProblem::from_text(&std::fs::read_to_string(&q).unwrap()).unwrap();
        let fresh = QuadraticProblem::generate(6, &mut Rng::new(9));
        assert_eq!(back.matrix(), fresh.matrix());
        assert_eq!(
            exec(&["gen-quadratic", "--n", "0", "--seed", "9", "--out", path_str(&q)]),
            ExitCode::from(EXIT_CONFIG)
        );

        let l = dir.path().join("l.txt");
        assert_eq!(exec(&["gen-logistic", "--rows", "30", "--out", path_str(&l)]), ExitCode::SUCCESS);
        assert_eq!(exec(&["validate", "--libsvm", path_str(&l)]), ExitCode::SUCCESS);
        assert_eq!(exec(&["validate", "--libsvm", path_str(&q)]), ExitCode::from(EXIT_FAILURE));
    }
}
