//! Run-matrix configuration files.
//!
//! ```text
//! # comments start with '#'
//! [defaults]
//! problem = quadratic
//! n = 100
//! seed = 1
//!
//! [run sd-plain]
//! method = sd
//!
//! [run sd-acc]
//! method = sd
//! accelerated = true
//! gamma = 1.3
//! ```
//!
//! Keys in `[defaults]` apply to every run; a run section overrides them.
//! `l0`, `ld`, `lu` are multipliers of the problem's smoothness constant
//! `L_f`, which is estimated when the run starts.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use crate::envelope::{CatalystConfig, InnerStart};
use crate::error::{Error, Result};
use crate::problems::A1A_N_FEATURES;
use crate::solvers::MethodKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSource {
    /// The sample compiled into the crate.
    Bundled,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSpec {
    /// Generated from `(n, seed)`, or read from a matrix file written by
    /// `gen-quadratic`.
    Quadratic {
        n: usize,
        seed: u64,
        file: Option<PathBuf>,
    },
    Logistic {
        data: DataSource,
        n_features: usize,
    },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::Logistic { .. } => "logistic",
        }
    }
}

/// Initial RACDM estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta0 {
    /// `1/L_0` for every coordinate.
    InvL0,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub run_id: String,
    pub problem: ProblemSpec,
    pub method: MethodKind,
    pub accelerated: bool,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Multipliers of `L_f`.
    pub l0: f64,
    pub ld: f64,
    pub lu: f64,
    pub beta0: Beta0,
    /// Fixed GD step; `1/(L_f + L)` when absent.
    pub step: Option<f64>,
    pub eps: f64,
    /// Seeds the starting point and any randomized solver.
    pub run_seed: u64,
    pub inner_cap: usize,
    pub outer_cap: usize,
    /// Unit cap for non-accelerated runs.
    pub max_units: usize,
    pub budget: Option<f64>,
    /// Block count for alternating minimization.
    pub blocks: Option<usize>,
    pub warm_start: bool,
    pub inner_start: InnerStart,
}

impl RunSpec {
    /// Envelope parameters with the multipliers resolved against `lf`.
    pub fn catalyst_config(&self, lf: f64) -> CatalystConfig {
        CatalystConfig {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            l0: self.l0 * lf,
            ld: self.ld * lf,
            lu: self.lu * lf,
            eps: self.eps,
            inner_unit_cap: self.inner_cap,
            outer_cap: self.outer_cap,
            warm_start_state: self.warm_start,
            budget: self.budget,
            inner_start: self.inner_start,
        }
    }
}

/// Parsed specs plus non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub runs: Vec<RunSpec>,
    pub warnings: Vec<String>,
}

const KEYS: &[&str] = &[
    "problem",
    "n",
    "seed",
    "run_seed",
    "data",
    "n_features",
    "method",
    "accelerated",
    "alpha",
    "beta",
    "gamma",
    "l0",
    "ld",
    "lu",
    "beta0",
    "step",
    "eps",
    "inner_cap",
    "outer_cap",
    "max_units",
    "budget",
    "blocks",
    "warm_start",
    "inner_start",
];

type Section = BTreeMap<String, (String, usize)>;

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingFile(path.display().to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Parses config text; relative data paths are resolved against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<LoadedConfig> {
    let cfg_err = |field: &str, reason: String| Error::Config { field: field.to_string(), reason };
    let mut defaults = Section::new();
    let mut runs: Vec<(String, Section)> = Vec::new();
    let mut seen = HashSet::new();
    let mut current: Option<usize> = None; // None = defaults
    let mut any_section = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| cfg_err("section", format!("line {lineno}: unterminated header `{line}`")))?
                .trim();
            any_section = true;
            if header == "defaults" {
                current = None;
            } else if let Some(id) = header.strip_prefix("run ") {
                let id = id.trim();
                if id.is_empty() || id.contains(|c: char| c.is_whitespace() || c == ',' || c == '/') {
                    return Err(cfg_err("run_id", format!("line {lineno}: invalid run id `{id}`")));
                }
                if !seen.insert(id.to_string()) {
                    return Err(cfg_err("run_id", format!("line {lineno}: duplicate run id `{id}`")));
                }
                runs.push((id.to_string(), Section::new()));
                current = Some(runs.len() - 1);
            } else {
                return Err(cfg_err("section", format!("line {lineno}: unknown section `[{header}]`")));
            }
            continue;
        }
        if !any_section {
            return Err(cfg_err("section", format!("line {lineno}: key outside any section")));
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| cfg_err("syntax", format!("line {lineno}: expected `key = value`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(cfg_err(key, format!("line {lineno}: unknown key")));
        }
        let section = match current {
            None => &mut defaults,
            Some(r) => &mut runs[r].1,
        };
        if section.insert(key.to_string(), (value.to_string(), lineno)).is_some() {
            return Err(cfg_err(key, format!("line {lineno}: key repeated in the same section")));
        }
    }

    let mut out = LoadedConfig { runs: Vec::new(), warnings: Vec::new() };
    for (id, section) in runs {
        let mut merged = defaults.clone();
        merged.extend(section);
        let spec = build_spec(&id, &merged, base)?;
        if spec.accelerated {
            for w in
                spec.catalyst_config(1.0).validate().map_err(|e| cfg_err("catalyst", format!("run `{id}`: {e}")))?
            {
                out.warnings.push(format!("run `{id}`: {w}"));
            }
        }
        out.runs.push(spec);
    }
    if out.runs.is_empty() {
        return Err(cfg_err("run", "config defines no `[run <id>]` sections".into()));
    }
    Ok(out)
}

struct Fields<'a> {
    id: &'a str,
    map: &'a Section,
}

impl Fields<'_> {
    fn err(&self, key: &str, reason: impl std::fmt::Display) -> Error {
        let at = self.map.get(key).map(|(_, l)| format!(" (line {l})")).unwrap_or_default();
        Error::Config { field: key.to_string(), reason: format!("run `{}`{at}: {reason}", self.id) }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| v.parse::<T>().map_err(|e| self.err(key, format!("`{v}`: {e}")))).transpose()
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| self.err(key, "required"))
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get::<f64>(key)?.unwrap_or(default);
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.err(key, format!("must be positive and finite, got {v}")));
        }
        Ok(v)
    }
}

fn build_spec(id: &str, map: &Section, base: &Path) -> Result<RunSpec> {
    let f = Fields { id, map };
    let problem_kind: String = f.required("problem")?;
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_relative() {
            base.join(p)
        } else {
            p
        }
    };

    let problem = match problem_kind.as_str() {
        "quadratic" => {
            let file = f.raw("data").map(resolve);
            let n = match (f.get::<usize>("n")?, &file) {
                (Some(n), _) => n,
                (None, Some(_)) => 0,
                (None, None) => return Err(f.err("n", "required for generated quadratics")),
            };
            if file.is_none() && n == 0 {
                return Err(f.err("n", "must be positive"));
            }
            ProblemSpec::Quadratic { n, seed: f.get("seed")?.unwrap_or(0), file }
        }
        "logistic" => {
            let data = match f.raw("data") {
                None | Some("bundled") => DataSource::Bundled,
                Some(p) => DataSource::File(resolve(p)),
            };
            ProblemSpec::Logistic { data, n_features: f.get("n_features")?.unwrap_or(A1A_N_FEATURES) }
        }
        other => return Err(f.err("problem", format!("unknown problem `{other}` (quadratic | logistic)"))),
    };
    let logistic = matches!(problem, ProblemSpec::Logistic { .. });

    let method: MethodKind = f.required::<String>("method")?.parse().map_err(|e: Error| f.err("method", e))?;
    let blocks = f.get::<usize>("blocks")?;
    if method == MethodKind::Am {
        if logistic {
            return Err(f.err("method", "alternating minimization needs exact block solves (quadratic only)"));
        }
        match blocks {
            Some(p) if p >= 2 => {}
            _ => return Err(f.err("blocks", "alternating minimization needs `blocks` >= 2")),
        }
    }

    let beta0 = match f.raw("beta0") {
        None | Some("inv_l0") => Beta0::InvL0,
        Some(_) => Beta0::Value(f.positive("beta0", 1.0)?),
    };
    let inner_start = match f.raw("inner_start") {
        None | Some("center") => InnerStart::Center,
        Some("previous") => InnerStart::PreviousIterate,
        Some(v) => return Err(f.err("inner_start", format!("`{v}` (center | previous)"))),
    };
    let budget = match f.raw("budget") {
        None => None,
        Some(_) => Some(f.positive("budget", 1.0)?),
    };
    let step = match f.raw("step") {
        None => None,
        Some(_) => Some(f.positive("step", 1.0)?),
    };
    let problem_seed = f.get::<u64>("seed")?.unwrap_or(0);

    // Logistic defaults follow the bounds used for the steepest-descent
    // experiments: L_d = 0.01·L_f, L_u = L_f.
    let (ld_default, lu_default) = if logistic { (0.01, 1.0) } else { (0.005, 10.0) };

    Ok(RunSpec {
        run_id: id.to_string(),
        problem,
        method,
        accelerated: f.get("accelerated")?.unwrap_or(false),
        alpha: f.positive("alpha", CatalystConfig::DEFAULT_ALPHA)?,
        beta: f.positive("beta", CatalystConfig::DEFAULT_BETA)?,
        gamma: f.positive("gamma", CatalystConfig::DEFAULT_GAMMA)?,
        l0: f.positive("l0", 1.6)?,
        ld: f.positive("ld", ld_default)?,
        lu: f.positive("lu", lu_default)?,
        beta0,
        step,
        eps: f.positive("eps", 1e-9)?,
        run_seed: f.get("run_seed")?.unwrap_or(problem_seed),
        inner_cap: f.get("inner_cap")?.unwrap_or(100_000),
        outer_cap: f.get("outer_cap")?.unwrap_or(1_000),
        max_units: f.get("max_units")?.unwrap_or(100_000),
        budget,
        blocks,
        warm_start: f.get("warm_start")?.unwrap_or(true),
        inner_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedConfig> {
        parse_config(text, Path::new("/cfg"))
    }

    #[test]
    fn minimal_run_gets_defaults() {
        let c = parse("[run a]\nproblem = quadratic\nn = 100\nseed = 1\nmethod = sd\naccelerated = true\n").unwrap();
        assert!(c.warnings.is_empty());
        let s = &c.runs[0];
        assert_eq!(s.problem, ProblemSpec::Quadratic { n: 100, seed: 1, file: None });
        assert_eq!((s.alpha, s.beta, s.gamma), (2.0, 1.5, 1.3));
        assert_eq!((s.l0, s.ld, s.lu), (1.6, 0.005, 10.0));
        assert_eq!(s.eps, 1e-9);
        assert_eq!((s.inner_cap, s.outer_cap), (100_000, 1_000));
        assert_eq!(s.run_seed, 1);
        assert_eq!(s.beta0, Beta0::InvL0);
        assert!(s.warm_start);
    }

    #[test]
    fn defaults_section_and_override() {
        let c = parse(
            "[defaults]\nproblem = logistic\nmethod = sd\n\n[run a]\naccelerated = true\n[run b]\nmethod = gd\nstep = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.runs.len(), 2);
        assert_eq!(c.runs[0].problem, ProblemSpec::Logistic { data: DataSource::Bundled, n_features: 123 });
        assert_eq!((c.runs[0].ld, c.runs[0].lu), (0.01, 1.0));
        assert_eq!(c.runs[1].method, MethodKind::Gd);
        assert_eq!(c.runs[1].step, Some(0.5));
    }

    #[test]
    fn small_gamma_is_a_warning() {
        let c = parse("[run a]\nproblem = quadratic\nn = 5\nmethod = gd\naccelerated = true\ngamma = 0.9\n").unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn duplicate_run_id() {
        let e = parse("[run a]\nproblem = quadratic\nn = 5\nmethod = gd\n[run a]\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "run_id"), "{e}");
    }

    #[test]
    fn bad_inputs() {
        let field = |t: &str| match parse(t) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(field("[run a]\nproblem = quadratic\nmethod = gd\n"), "n");
        assert_eq!(field("[run a]\nproblem = cubic\n"), "problem");
        assert_eq!(field("[run a]\nproblem = quadratic\nn = 4\nmethod = am\n"), "blocks");
        assert_eq!(field("[run a]\nproblem = quadratic\nn = 4\nmethod = gd\nspeed = 3\n"), "speed");
        assert_eq!(field("[run a]\nproblem = quadratic\nn = x\nmethod = gd\n"), "n");
        assert_eq!(
            field("[run a]\nproblem = quadratic\nn = 4\nmethod = gd\naccelerated = true\nbeta = 3\n"),
            "catalyst"
        );
        assert_eq!(field("problem = quadratic\n"), "section");
        assert_eq!(field("[defaults]\nproblem = quadratic\n"), "run");
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let c = parse("[run a]\nproblem = logistic\ndata = d/a1a.txt\nmethod = sd\n").unwrap();
        assert_eq!(
            c.runs[0].problem,
            ProblemSpec::Logistic { data: DataSource::File(PathBuf::from("/cfg/d/a1a.txt")), n_features: 123 }
        );
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_config(Path::new("/nonexistent/x.cfg")), Err(Error::MissingFile(_))));
    }
}
