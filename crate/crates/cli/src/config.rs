//! Experiment configuration files.
//!
//! A config is UTF-8 text with one statement per line:
//!
//! ```text
//! # comment
//! [section]
//! key = value        # trailing comment
//! ```
//!
//! Sections are `experiment`, `run` and `params`. Integers accept `_`
//! separators and powers such as `10^6`; reals accept the same power form.
//! Lists are comma separated. See `docs/config.md` for the keys of each kind.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rwalks_core::urns::FiniteDist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    TwoPlayerUrn,
    MultiWalkerLine,
    LambdaStarLine,
    LambdaStarCycle,
    LambdaPlusLine,
    TransientEnv,
    Polya,
    ReinforcedUrn,
    RwreAnalysis,
    OdeTriangle,
    CouplingCheck,
    DecayProbe,
}

impl Kind {
    pub const ALL: [Kind; 12] = [
        Kind::TwoPlayerUrn,
        Kind::MultiWalkerLine,
        Kind::LambdaStarLine,
        Kind::LambdaStarCycle,
        Kind::LambdaPlusLine,
        Kind::TransientEnv,
        Kind::Polya,
        Kind::ReinforcedUrn,
        Kind::RwreAnalysis,
        Kind::OdeTriangle,
        Kind::CouplingCheck,
        Kind::DecayProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::TwoPlayerUrn => "two-player-urn",
            Kind::MultiWalkerLine => "multi-walker-line",
            Kind::LambdaStarLine => "lambda-star-line",
            Kind::LambdaStarCycle => "lambda-star-cycle",
            Kind::LambdaPlusLine => "lambda-plus-line",
            Kind::TransientEnv => "transient-env",
            Kind::Polya => "polya",
            Kind::ReinforcedUrn => "reinforced-urn",
            Kind::RwreAnalysis => "rwre-analysis",
            Kind::OdeTriangle => "ode-triangle",
            Kind::CouplingCheck => "coupling-check",
            Kind::DecayProbe => "decay-probe",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Kind::TwoPlayerUrn => "two walkers on the segment -1..1; limiting left-edge fraction",
            Kind::MultiWalkerLine => "k linearly reinforced walkers on Z; recurrence dichotomy proxy",
            Kind::LambdaStarLine => "multiplicatively biased walk on Z; speed and last visit to 0",
            Kind::LambdaStarCycle => "multiplicatively biased walk on the triangle against the ODE",
            Kind::LambdaPlusLine => "additively biased walk on Z; speed and last visit to 0",
            Kind::TransientEnv => "sampled transient environments; effective resistance",
            Kind::Polya => "Polya urn; limiting white fraction against its Beta law",
            Kind::ReinforcedUrn => "urn with random replacement counts",
            Kind::RwreAnalysis => "additive-bias environment: drift, classification, walk speed",
            Kind::OdeTriangle => "mean-field ODE trajectories on the simplex",
            Kind::CouplingCheck => "Bernoulli coupling domination of the conductance ratio",
            Kind::DecayProbe => "decay of estimated conductances with distance",
        }
    }

    /// Whether the kind reads `steps` from `[run]`.
    fn uses_steps(self) -> bool {
        !matches!(self, Kind::OdeTriangle | Kind::TransientEnv)
    }

    /// Whether the kind reads `replicates` from `[run]`.
    fn uses_replicates(self) -> bool {
        !matches!(self, Kind::OdeTriangle)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind `{s}`; run `rwalks list-kinds`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerChoice {
    Uniform,
    Alternating,
}

impl FromStr for SchedulerChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(SchedulerChoice::Uniform),
            "alternating" => Ok(SchedulerChoice::Alternating),
            _ => Err(format!("expected `uniform` or `alternating`, got `{s}`")),
        }
    }
}

impl fmt::Display for SchedulerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerChoice::Uniform => "uniform",
            SchedulerChoice::Alternating => "alternating",
        })
    }
}

/// Kind-specific parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    TwoPlayerUrn { a: f64, b: f64, delta: f64, scheduler: SchedulerChoice, bins: usize },
    MultiWalkerLine { k: usize, scheduler: SchedulerChoice, a: f64, delta: f64 },
    LambdaStarLine { lambdas: Vec<f64> },
    LambdaStarCycle { lambda: f64, weights: [f64; 3] },
    LambdaPlusLine { lambdas: Vec<f64> },
    TransientEnv { lambda: f64, radius: u64 },
    Polya { white: f64, black: f64, delta: f64 },
    ReinforcedUrn { white: f64, black: f64, white_law: FiniteDist, black_law: FiniteDist, laws: String },
    RwreAnalysis { lambdas: Vec<f64> },
    OdeTriangle { lambda: f64, starts: Vec<[f64; 3]>, horizon: f64, step: f64, record_every: f64 },
    CouplingCheck { a: f64, k_bound: usize, path_len: usize },
    DecayProbe { a: f64, s: f64, radius: u64, min_count: usize, bootstrap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Experiment id written in the first CSV column.
    pub name: String,
    pub seed: u64,
    /// File name of the CSV inside the output directory.
    pub output: String,
    pub steps: u64,
    pub replicates: usize,
    pub full_steps: Option<u64>,
    pub full_replicates: Option<usize>,
    pub params: Params,
}

impl ExperimentConfig {
    /// (steps, replicates) at the requested scale.
    pub fn scale(&self, full: bool) -> (u64, usize) {
        if full {
            (self.full_steps.unwrap_or(self.steps), self.full_replicates.unwrap_or(self.replicates))
        } else {
            (self.steps, self.replicates)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UnknownSection,
    UnknownKey,
    Duplicate,
    Missing,
    Invalid,
    Range,
    Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub kind: ErrorKind,
    /// 1-based line; `None` for missing keys.
    pub line: Option<usize>,
    /// `section.key`, or empty for syntax errors.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::UnknownSection => "unknown section",
            ErrorKind::UnknownKey => "unknown key",
            ErrorKind::Duplicate => "duplicate key",
            ErrorKind::Missing => "missing key",
            ErrorKind::Invalid => "invalid value",
            ErrorKind::Range => "out of range",
            ErrorKind::Constraint => "inconsistent value",
        };
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if self.key.is_empty() {
            write!(f, "{what}: {}", self.message)
        } else {
            write!(f, "{what} `{}`: {}", self.key, self.message)
        }
    }
}

/// All validation errors of one config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: [&str; 3] = ["experiment", "run", "params"];

const MAX_STEPS: u64 = 10_000_000_000;
const MAX_REPLICATES: usize = 10_000_000;

struct Entry {
    value: String,
    line: usize,
}

struct Fields {
    entries: BTreeMap<String, Entry>,
    used: BTreeSet<String>,
    errors: Vec<ConfigError>,
}

impl Fields {
    fn err(&mut self, kind: ErrorKind, line: Option<usize>, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError { kind, line, key: key.to_owned(), message: message.into() });
    }

    /// Parses and range-checks `key`; `None` when absent or invalid (the
    /// error is recorded unless the key is merely absent and optional).
    fn get<T>(
        &mut self,
        key: &str,
        required: bool,
        parse: impl Fn(&str) -> Result<T, String>,
        check: impl Fn(&T) -> Result<(), String>,
    ) -> Option<T> {
        self.used.insert(key.to_owned());
        let Some(entry) = self.entries.get(key) else {
            if required {
                self.err(ErrorKind::Missing, None, key, "required");
            }
            return None;
        };
        let line = entry.line;
        match parse(&entry.value) {
            Err(m) => {
                self.err(ErrorKind::Invalid, Some(line), key, m);
                None
            }
            Ok(v) => match check(&v) {
                Ok(()) => Some(v),
                Err(m) => {
                    self.err(ErrorKind::Range, Some(line), key, m);
                    None
                }
            },
        }
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn f64(&mut self, key: &str, check: impl Fn(f64) -> Result<(), String>) -> Option<f64> {
        self.get(key, true, parse_f64, |x| check(*x))
    }

    fn f64_or(&mut self, key: &str, default: f64, check: impl Fn(f64) -> Result<(), String>) -> Option<f64> {
        if !self.entries.contains_key(key) {
            self.used.insert(key.to_owned());
            return Some(default);
        }
        self.f64(key, check)
    }

    fn usize_or(&mut self, key: &str, default: usize, check: impl Fn(usize) -> Result<(), String>) -> Option<usize> {
        if !self.entries.contains_key(key) {
            self.used.insert(key.to_owned());
            return Some(default);
        }
        self.get(key, true, parse_usize, |x| check(*x))
    }

    fn f64_list(&mut self, key: &str, check: impl Fn(f64) -> Result<(), String>) -> Option<Vec<f64>> {
        self.get(key, true, |s| split_list(s).map(parse_f64).collect(), |xs: &Vec<f64>| {
            if xs.is_empty() {
                return Err("list is empty".into());
            }
            xs.iter().try_for_each(|&x| check(x))
        })
    }
}

fn positive(x: f64) -> Result<(), String> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(format!("must be > 0, got {x}"))
    }
}

fn nonnegative(x: f64) -> Result<(), String> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(format!("must be >= 0, got {x}"))
    }
}

fn in_range<T: PartialOrd + fmt::Display + Copy>(lo: T, hi: T) -> impl Fn(T) -> Result<(), String> {
    move |x| {
        if lo <= x && x <= hi {
            Ok(())
        } else {
            Err(format!("must lie in {lo}..={hi}, got {x}"))
        }
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

fn normalize_number(s: &str) -> String {
    s.trim().replace('_', "").replace('\u{2212}', "-")
}

/// Integer literal: digits, or `base^exp`.
pub fn parse_u64(s: &str) -> Result<u64, String> {
    let t = normalize_number(s);
    if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.trim().parse().map_err(|_| format!("`{s}` is not an integer"))?;
        let e: u32 = e.trim().parse().map_err(|_| format!("`{s}` is not an integer"))?;
        return b.checked_pow(e).ok_or_else(|| format!("`{s}` overflows"));
    }
    t.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    parse_u64(s).and_then(|v| usize::try_from(v).map_err(|_| format!("`{s}` is too large")))
}

/// Real literal, or `base^exp` with an integer exponent.
pub fn parse_f64(s: &str) -> Result<f64, String> {
    let t = normalize_number(s);
    if let Some((b, e)) = t.split_once('^') {
        let b: f64 = b.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
        let e: i32 = e.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
        return Ok(b.powi(e));
    }
    t.parse::<f64>().map_err(|_| format!("`{s}` is not a number")).and_then(|x| {
        if x.is_nan() {
            Err("NaN is not allowed".into())
        } else {
            Ok(x)
        }
    })
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let xs: Vec<f64> = split_list(s).map(parse_f64).collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(xs).map_err(|_| format!("expected three numbers, got `{s}`"))
}

/// `value:prob, value:prob, …`
fn parse_law(s: &str) -> Result<FiniteDist, String> {
    let pairs = split_list(s)
        .map(|item| {
            let (v, p) = item.split_once(':').ok_or_else(|| format!("expected value:probability, got `{item}`"))?;
            let v = u32::try_from(parse_u64(v)?).map_err(|_| format!("`{v}` is too large"))?;
            Ok((v, parse_f64(p)?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    FiniteDist::new(&pairs).map_err(|e| e.to_string())
}

/// Parses and validates a config, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut f = Fields { entries: BTreeMap::new(), used: BTreeSet::new(), errors: Vec::new() };
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                f.err(ErrorKind::Syntax, Some(line), "", format!("unterminated section header `{content}`"));
                continue;
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                f.err(ErrorKind::UnknownSection, Some(line), name, format!("expected one of {}", SECTIONS.join(", ")));
            }
            section = Some(name.to_owned());
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            f.err(ErrorKind::Syntax, Some(line), "", format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            f.err(ErrorKind::Syntax, Some(line), key, "empty key or value");
            continue;
        }
        let Some(sec) = &section else {
            f.err(ErrorKind::Syntax, Some(line), key, "key outside of a section");
            continue;
        };
        if !SECTIONS.contains(&sec.as_str()) {
            continue;
        }
        let full = format!("{sec}.{key}");
        if let Some(prev) = f.entries.get(&full) {
            let msg = format!("already set on line {}", prev.line);
            f.err(ErrorKind::Duplicate, Some(line), &full, msg);
            continue;
        }
        f.entries.insert(full, Entry { value: value.to_owned(), line });
    }

    let kind = f.get("experiment.kind", true, |s| s.parse::<Kind>(), |_| Ok(()));
    let seed = f.get("experiment.seed", true, parse_u64, |_| Ok(()));
    let name = f.get("experiment.name", false, |s| Ok(s.to_owned()), |_| Ok(()));
    let output = f.get("experiment.output", false, |s| Ok(s.to_owned()), valid_file_name);

    let uses_steps = kind.map_or(true, Kind::uses_steps);
    let uses_replicates = kind.map_or(true, Kind::uses_replicates);
    let steps_check = |x: &u64| in_range(1, MAX_STEPS)(*x);
    let reps_check = |x: &usize| in_range(0, MAX_REPLICATES)(*x);
    let steps = f.get("run.steps", uses_steps, parse_u64, steps_check);
    let replicates = f.get("run.replicates", uses_replicates, parse_usize, reps_check);
    let full_steps = f.get("run.full_steps", false, parse_u64, steps_check);
    let full_replicates = f.get("run.full_replicates", false, parse_usize, reps_check);

    let params = kind.and_then(|k| parse_params(k, &mut f));

    let unknown: Vec<(String, usize)> =
        f.entries.iter().filter(|(k, _)| !f.used.contains(*k)).map(|(k, e)| (k.clone(), e.line)).collect();
    for (k, line) in unknown {
        let msg = match &kind {
            Some(kd) => format!("not a key of `{kd}`"),
            None => "not recognised".to_owned(),
        };
        f.err(ErrorKind::UnknownKey, Some(line), &k, msg);
    }

    if !f.errors.is_empty() {
        f.errors.sort_by_key(|e| (e.line.unwrap_or(usize::MAX), e.key.clone()));
        return Err(ConfigErrors(f.errors));
    }
    let kind = kind.expect("checked");
    Ok(ExperimentConfig {
        kind,
        name: name.unwrap_or_else(|| kind.name().to_owned()),
        seed: seed.expect("checked"),
        output: output.unwrap_or_else(|| format!("{}.csv", kind.name())),
        steps: steps.unwrap_or(1),
        replicates: replicates.unwrap_or(1),
        full_steps,
        full_replicates,
        params: params.expect("checked"),
    })
}

fn valid_file_name(s: &String) -> Result<(), String> {
    if s.contains('/') || s.contains('\\') || s == "." || s == ".." {
        Err(format!("must be a plain file name, got `{s}`"))
    } else {
        Ok(())
    }
}

fn parse_params(kind: Kind, f: &mut Fields) -> Option<Params> {
    let before = f.errors.len();
    let sched = |f: &mut Fields| f.get("params.scheduler", true, |s| s.parse::<SchedulerChoice>(), |_| Ok(()));
    let params = match kind {
        Kind::TwoPlayerUrn => {
            let a = f.f64_or("params.a", 1.0, positive);
            let b = f.f64_or("params.b", 1.0, positive);
            let delta = f.f64_or("params.delta", 1.0, positive);
            let scheduler = sched(f);
            let k = f.usize_or("params.k", 2, |_| Ok(()));
            if let Some(k) = k.filter(|&k| k != 2) {
                let line = f.line_of("params.k");
                f.err(ErrorKind::Constraint, line, "params.k", format!("the two-player urn has k = 2, got {k}"));
            }
            let bins = f.usize_or("params.bins", 20, in_range(1, 10_000));
            Some(Params::TwoPlayerUrn { a: a?, b: b?, delta: delta?, scheduler: scheduler?, bins: bins? })
        }
        Kind::MultiWalkerLine => {
            let k = f.get("params.k", true, parse_usize, |k| in_range(1, 64)(*k));
            let scheduler = sched(f);
            if let (Some(k), Some(SchedulerChoice::Alternating)) = (k, scheduler) {
                if k != 2 {
                    let line = f.line_of("params.scheduler");
                    f.err(
                        ErrorKind::Constraint,
                        line,
                        "params.scheduler",
                        format!("alternating scheduler requires k = 2, got k = {k}"),
                    );
                }
            }
            let a = f.f64_or("params.a", 1.0, positive);
            let delta = f.f64_or("params.delta", 1.0, positive);
            Some(Params::MultiWalkerLine { k: k?, scheduler: scheduler?, a: a?, delta: delta? })
        }
        Kind::LambdaStarLine => f.f64_list("params.lambda", positive).map(|lambdas| Params::LambdaStarLine { lambdas }),
        Kind::LambdaPlusLine => {
            f.f64_list("params.lambda", nonnegative).map(|lambdas| Params::LambdaPlusLine { lambdas })
        }
        Kind::RwreAnalysis => f.f64_list("params.lambda", nonnegative).map(|lambdas| Params::RwreAnalysis { lambdas }),
        Kind::LambdaStarCycle => {
            let lambda = f.f64("params.lambda", positive);
            let weights = f.get("params.weights", true, parse_triple, |w| w.iter().try_for_each(|&x| positive(x)));
            Some(Params::LambdaStarCycle { lambda: lambda?, weights: weights? })
        }
        Kind::TransientEnv => {
            let lambda = f.f64("params.lambda", positive);
            let radius = f.get("params.radius", true, parse_u64, |r| in_range(1, 500)(*r));
            Some(Params::TransientEnv { lambda: lambda?, radius: radius? })
        }
        Kind::Polya => {
            let white = f.f64_or("params.white", 1.0, positive);
            let black = f.f64_or("params.black", 1.0, positive);
            let delta = f.f64_or("params.delta", 1.0, positive);
            Some(Params::Polya { white: white?, black: black?, delta: delta? })
        }
        Kind::ReinforcedUrn => {
            let white = f.f64_or("params.white", 1.0, positive);
            let black = f.f64_or("params.black", 1.0, positive);
            let wl = f.get("params.white_law", true, |s| parse_law(s).map(|d| (d, s.to_owned())), |_| Ok(()));
            let bl = f.get("params.black_law", true, |s| parse_law(s).map(|d| (d, s.to_owned())), |(d, _)| {
                if d.prob_of(0) > 0.0 {
                    Err("black law must not charge 0".into())
                } else {
                    Ok(())
                }
            });
            let ((white_law, ws), (black_law, bs)) = (wl?, bl?);
            Some(Params::ReinforcedUrn {
                white: white?,
                black: black?,
                white_law,
                black_law,
                laws: format!("white {ws}; black {bs}"),
            })
        }
        Kind::OdeTriangle => {
            let lambda = f.f64("params.lambda", positive);
            let starts = f.get(
                "params.starts",
                true,
                |s| s.split(';').map(parse_triple).collect::<Result<Vec<_>, _>>(),
                |v: &Vec<[f64; 3]>| {
                    if v.is_empty() {
                        return Err("no start given".into());
                    }
                    v.iter().flatten().try_for_each(|&x| nonnegative(x))
                },
            );
            let horizon = f.f64("params.horizon", positive);
            let step = f.f64_or("params.step", 1e-3, positive);
            let record_every = f.f64_or("params.record_every", 0.1, positive);
            Some(Params::OdeTriangle {
                lambda: lambda?,
                starts: starts?,
                horizon: horizon?,
                step: step?,
                record_every: record_every?,
            })
        }
        Kind::CouplingCheck => {
            let a = f.f64("params.a", positive);
            let k_bound = f.usize_or("params.k_bound", 3, in_range(2, 64));
            let path_len = f.usize_or("params.path_len", 3, in_range(2, 32));
            Some(Params::CouplingCheck { a: a?, k_bound: k_bound?, path_len: path_len? })
        }
        Kind::DecayProbe => {
            let a = f.f64("params.a", positive);
            let s = f.f64_or("params.s", 0.2, |s| {
                if s > 0.0 && s < 0.25 {
                    Ok(())
                } else {
                    Err(format!("must lie in (0, 1/4), got {s}"))
                }
            });
            let radius = f.get("params.radius", true, parse_u64, |r| in_range(0, 1_000)(*r));
            let min_count = f.usize_or("params.min_count", 20, |_| Ok(()));
            let bootstrap = f.usize_or("params.bootstrap", 1_000, in_range(0, 100_000));
            Some(Params::DecayProbe { a: a?, s: s?, radius: radius?, min_count: min_count?, bootstrap: bootstrap? })
        }
    };
    if f.errors.len() > before {
        None
    } else {
        params
    }
}
