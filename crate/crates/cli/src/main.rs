//! `chardy` command-line front end.
//!
//! Exit codes: 0 pass, 1 numerical failure (JSON diagnostics on stdout),
//! 2 usage error.

mod parse;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use chardy::covering::{joukowski_fixture, Varsigma};
use chardy::fixture::{collapse_points, fixture_space, run_fixture_suite, FixtureConfig, DEFAULT_SEED};
use chardy::fuchsian::orbit_enumerate;
use chardy::green::circle_probes;
use chardy::io::{complex_fields, csv_string, fmt_f64, to_json_string};
use chardy::multiplier::{leech_solve, roundtrip_check, LeechProblem, MultiplierCandidate, RoundtripConfig};
use chardy::{evaluator, Character, Complex64, GreenFunction, GroupPresentation, HardySpace, Moebius, Normalization};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

const MAX_DEPTH_CYCLIC: usize = 16;
const MAX_DEPTH_FREE: usize = 8;

#[derive(Parser)]
#[command(name = "chardy", version, about = "Character-automorphic Hardy space computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the Joukowski/Szegő fixture suite and emit a JSON summary.
    Fixture,
    /// List orbit words of a free group as CSV.
    Orbit,
    /// Evaluate the truncated Green's function on a polar grid.
    Green,
    /// Evaluate the fixture kernel on a grid.
    Kernel,
    /// Run the multiplier round trip for a polynomial candidate `--s`.
    Multiplier,
    /// Solve a Leech factorization problem read from `--input`.
    Leech,
}

/// Every flag is also accepted as `key = value` in the `--config` file.
/// Flags on the command line win.
#[derive(Args, Default)]
struct RunArgs {
    /// Flat key=value file mirroring the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Generators as `a,b` pairs separated by `;`, e.g. "cosh1,sinh1".
    #[arg(long, global = true)]
    gens: Option<String>,
    /// Character values, comma separated.
    #[arg(long = "char", global = true)]
    character: Option<String>,
    /// Truncation depth.
    #[arg(long = "L", global = true)]
    depth: Option<String>,
    #[arg(long, global = true)]
    grid_n: Option<String>,
    /// RNG seed, decimal or 0x hex.
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Built-in fixture label.
    #[arg(long, global = true)]
    fixture: Option<String>,
    /// Emit JSON instead of text/CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Constant in the rewritten kernel weight: `sqrt2` or `2`.
    #[arg(long, global = true)]
    normalization: Option<String>,
    /// Multiplier candidate, a polynomial in z.
    #[arg(long, global = true)]
    s: Option<String>,
    /// Problem file for `leech`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numerical {
        command: &'static str,
        message: String,
        details: serde_json::Value,
    },
}

impl From<chardy::Error> for Failure {
    fn from(e: chardy::Error) -> Self {
        Failure::Numerical {
            command: "",
            message: e.to_string(),
            details: json!(null),
        }
    }
}

type Outcome = Result<bool, Failure>;

struct RunConfig {
    args: RunArgs,
    file: BTreeMap<String, String>,
}

impl RunConfig {
    fn load(args: RunArgs) -> Result<Self, Failure> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse::config(&text).map_err(Failure::Usage)?
            }
            None => BTreeMap::new(),
        };
        for key in file.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Failure::Usage(format!("unknown config key `{key}`")));
            }
        }
        Ok(Self { args, file })
    }

    fn raw(&self, key: &str) -> Option<String> {
        let a = &self.args;
        let flag = match key {
            "gens" => a.gens.clone(),
            "char" => a.character.clone(),
            "L" => a.depth.clone(),
            "grid-n" => a.grid_n.clone(),
            "seed" => a.seed.clone(),
            "tol" => a.tol.clone(),
            "out" => a.out.as_ref().map(|p| p.display().to_string()),
            "fixture" => a.fixture.clone(),
            "json" => a.json.then(|| "true".to_string()),
            "normalization" => a.normalization.clone(),
            "s" => a.s.clone(),
            "input" => a.input.as_ref().map(|p| p.display().to_string()),
            _ => unreachable!("unknown key {key}"),
        };
        flag.or_else(|| self.file.get(key).cloned())
    }

    fn parsed<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, Failure> {
        self.raw(key)
            .map(|v| f(&v).map_err(|e| Failure::Usage(format!("--{key}: {e}"))))
            .transpose()
    }

    fn required(&self, key: &str) -> Result<String, Failure> {
        self.raw(key).ok_or_else(|| Failure::Usage(format!("missing --{key}")))
    }

    fn positive<T: std::str::FromStr + PartialOrd + Default>(&self, key: &str, default: T) -> Result<T, Failure> {
        let v = self.parsed(key, |s| s.trim().parse::<T>().map_err(|_| format!("bad value `{s}`")))?;
        match v {
            Some(v) if v <= T::default() => Err(Failure::Usage(format!("--{key} must be positive"))),
            Some(v) => Ok(v),
            None => Ok(default),
        }
    }

    fn json(&self) -> Result<bool, Failure> {
        Ok(self
            .parsed("json", |s| {
                s.trim().parse::<bool>().map_err(|_| format!("bad bool `{s}`"))
            })?
            .unwrap_or(false))
    }

    fn seed(&self) -> Result<u64, Failure> {
        Ok(self.parsed("seed", parse::seed)?.unwrap_or(DEFAULT_SEED))
    }

    fn normalization(&self) -> Result<Normalization, Failure> {
        Ok(self
            .parsed("normalization", |s| match s.trim() {
                "sqrt2" | "√2" => Ok(Normalization::Sqrt2),
                "2" => Ok(Normalization::Two),
                other => Err(format!("expected `sqrt2` or `2`, got `{other}`")),
            })?
            .unwrap_or(Normalization::Sqrt2))
    }

    fn group(&self) -> Result<GroupPresentation, Failure> {
        let gens = self
            .parsed("gens", parse::generators)?
            .ok_or_else(|| Failure::Usage("missing --gens".into()))?;
        let moebius = gens
            .into_iter()
            .map(|(a, b)| Moebius::new(a, b))
            .collect::<chardy::Result<Vec<_>>>()
            .map_err(|e| Failure::Usage(format!("--gens: {e}")))?;
        GroupPresentation::new(moebius).map_err(|e| Failure::Usage(format!("--gens: {e}")))
    }

    fn depth(&self, group: &GroupPresentation, default: Option<usize>) -> Result<usize, Failure> {
        let depth = match self.parsed("L", |s| {
            s.trim().parse::<usize>().map_err(|_| format!("bad depth `{s}`"))
        })? {
            Some(d) => d,
            None => default.ok_or_else(|| Failure::Usage("missing --L".into()))?,
        };
        let cap = if group.rank() <= 1 {
            MAX_DEPTH_CYCLIC
        } else {
            MAX_DEPTH_FREE
        };
        if depth > cap {
            return Err(Failure::Usage(format!(
                "--L {depth} exceeds the cap {cap} for rank {}",
                group.rank()
            )));
        }
        Ok(depth)
    }

    /// Only the trivial-group Joukowski fixture is built in.
    fn fixture_space(&self) -> Result<HardySpace, Failure> {
        match self.raw("fixture").as_deref().map(str::trim) {
            None | Some("trivial") | Some("joukowski") => Ok(fixture_space()),
            Some(other) => Err(Failure::Usage(format!(
                "unknown fixture `{other}` (known: trivial, joukowski)"
            ))),
        }
    }

    fn emit(&self, name: &str, content: &str) -> Result<(), Failure> {
        match self.raw("out") {
            Some(dir) => {
                let dir = PathBuf::from(dir);
                fs::create_dir_all(&dir)
                    .and_then(|_| fs::write(dir.join(name), content))
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", dir.join(name).display())))
            }
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

const KNOWN_KEYS: [&str; 12] = [
    "gens",
    "char",
    "L",
    "grid-n",
    "seed",
    "tol",
    "out",
    "fixture",
    "json",
    "normalization",
    "s",
    "input",
];

fn json_text<T: Serialize>(value: &T) -> String {
    to_json_string(value).expect("report serializes")
}

fn cmd_fixture(cfg: &RunConfig) -> Outcome {
    let fc = FixtureConfig {
        normalization: cfg.normalization()?,
        seed: cfg.seed()?,
        grid_n: cfg.positive("grid-n", 20)?,
        tol: cfg.positive("tol", 1e-10)?,
    };
    let summary = run_fixture_suite(&fc);
    if cfg.json()? || cfg.raw("out").is_some() {
        cfg.emit("fixture.json", &summary.to_json())?;
    } else {
        for c in &summary.checks {
            println!(
                "{:<28} {}  metric {}  threshold {}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                fmt_f64(c.metric),
                fmt_f64(c.threshold)
            );
        }
    }
    if let Some(first) = &summary.first_failure {
        eprintln!("first failing check: {first}");
        for c in summary.checks.iter().filter(|c| !c.pass) {
            if let Some(d) = &c.detail {
                eprintln!("  {}: {d}", c.name);
            }
        }
    }
    Ok(summary.pass)
}

#[derive(Serialize)]
struct OrbitRow {
    word: String,
    length: usize,
    #[serde(with = "chardy::io::complex")]
    a: Complex64,
    #[serde(with = "chardy::io::complex")]
    b: Complex64,
    #[serde(with = "chardy::io::complex")]
    orbit_point: Complex64,
}

fn cmd_orbit(cfg: &RunConfig) -> Outcome {
    let group = cfg.group()?;
    let depth = cfg.depth(&group, None)?;
    let orbit = orbit_enumerate(&group, depth)?;
    let rows: Vec<OrbitRow> = orbit
        .elements
        .iter()
        .map(|w| {
            let t = w.transform();
            Ok(OrbitRow {
                word: w.to_string(),
                length: w.len(),
                a: t.a(),
                b: t.b(),
                orbit_point: t.apply(Complex64::new(0.0, 0.0))?,
            })
        })
        .collect::<chardy::Result<_>>()?;
    if cfg.json()? {
        cfg.emit("orbit.json", &json_text(&rows))?;
    } else {
        let csv = csv_string(
            &["word", "length", "re_a", "im_a", "re_b", "im_b", "re_orbit", "im_orbit"],
            rows.iter().map(|r| {
                let mut row = vec![r.word.clone(), r.length.to_string()];
                row.extend(complex_fields(r.a));
                row.extend(complex_fields(r.b));
                row.extend(complex_fields(r.orbit_point));
                row
            }),
        );
        cfg.emit("orbit.csv", &csv)?;
    }
    Ok(true)
}

fn cmd_green(cfg: &RunConfig) -> Outcome {
    let group = cfg.group()?;
    let depth = cfg.depth(&group, Some(12))?;
    let n: usize = cfg.positive("grid-n", 20)?;
    let green = GreenFunction::at_origin(&group, depth)?;
    if cfg.json()? {
        let probes = circle_probes(8, 0.3, 0.1);
        let table = green.character_table(depth.min(3), &probes)?;
        let report = json!({
            "depth": depth,
            "elements": green.truncation().elements.len(),
            "tail_bound": green.tail_bound(),
            "derivative_at_0": complex_fields(green.derivative(Complex64::new(0.0, 0.0))),
            "characters": table,
        });
        cfg.emit("green.json", &json_text(&report))?;
    } else {
        let points: Vec<Complex64> = (0..n)
            .flat_map(|j| {
                let r = 0.95 * (j + 1) as f64 / n as f64;
                (0..n).map(move |k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64))
            })
            .collect();
        cfg.emit("green.csv", &green.grid_csv(&points))?;
    }
    Ok(true)
}

fn cmd_kernel(cfg: &RunConfig) -> Outcome {
    let space = cfg.fixture_space()?;
    let norm = cfg.normalization()?;
    let tol: f64 = cfg.positive("tol", 1e-10)?;
    let points = collapse_points(cfg.positive("grid-n", 8)?);
    if !cfg.json()? {
        cfg.emit("kernel.csv", &space.kernel_csv(&points)?)?;
        return Ok(true);
    }
    let (mut szego, mut rewritten) = (0.0f64, 0.0f64);
    for &z in &points {
        for &w in &points {
            let k = space.kernel_structure(z, w)?;
            szego = szego.max((k - (Complex64::new(1.0, 0.0) - z * w.conj()).inv()).norm());
            rewritten = rewritten.max((space.kernel_rewritten(z, w, norm)? - k).norm());
        }
    }
    let pass = szego <= tol && rewritten <= tol;
    let report = json!({
        "fixture": space.spectral().label(),
        "normalization": norm,
        "points": points.len(),
        "max_szego_error": szego,
        "max_rewritten_difference": rewritten,
        "tol": tol,
        "pass": pass,
    });
    cfg.emit("kernel.json", &json_text(&report))?;
    Ok(pass)
}

fn cmd_multiplier(cfg: &RunConfig) -> Outcome {
    let space = cfg.fixture_space()?;
    let text = cfg.required("s")?;
    let coeffs = parse::polynomial(&text).map_err(|e| Failure::Usage(format!("--s: {e}")))?;
    let beta = match cfg.parsed("char", parse::character)? {
        Some(v) => Character::new(v).map_err(|e| Failure::Usage(format!("--char: {e}")))?,
        None => Character::trivial(0),
    };
    if beta.rank() != 0 {
        return Err(Failure::Usage(
            "--char: the built-in fixture group is trivial (rank 0)".into(),
        ));
    }
    let s = MultiplierCandidate::new(text.trim(), beta, evaluator(move |z| parse::horner(&coeffs, z)));
    let defaults = RoundtripConfig::default();
    let rc = RoundtripConfig {
        seed: cfg.seed()?,
        grid_points: cfg.positive("grid-n", defaults.grid_points)?,
        tol: cfg.positive("tol", defaults.tol)?,
        ..defaults
    };
    let cov = joukowski_fixture();
    let vs = Varsigma::new(&cov, &GroupPresentation::trivial(), 0)?;
    let report = roundtrip_check(&s, &space, &space, &vs, &rc);
    if cfg.json()? || cfg.raw("out").is_some() {
        cfg.emit("multiplier.json", &json_text(&report))?;
    } else {
        for st in &report.stages {
            println!(
                "{:<22} {}  metric {}",
                st.name,
                if st.pass { "PASS" } else { "FAIL" },
                fmt_f64(st.metric)
            );
        }
        println!(
            "{}: {}",
            report.candidate,
            if report.pass { "multiplier" } else { "rejected" }
        );
    }
    if let Some(first) = report.first_failure() {
        eprintln!("first failing stage: {first}");
    }
    Ok(report.pass)
}

fn cmd_leech(cfg: &RunConfig) -> Outcome {
    let path = cfg.required("input")?;
    let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    let problem: LeechProblem =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{path}: not a Leech problem: {e}")))?;
    let sigma = leech_solve(&problem).map_err(|e| {
        let details = match &e {
            chardy::Error::Infeasible { min_eig } => json!({ "min_eig": min_eig }),
            chardy::Error::ResidualTooLarge { node, residual } => json!({ "node": node, "residual": residual }),
            _ => json!(null),
        };
        Failure::Numerical {
            command: "leech",
            message: e.to_string(),
            details,
        }
    })?;
    let realization = sigma.realization().expect("leech_solve returns a realization");
    let report = json!({
        "state_dim": realization.state_dim(),
        "colligation_norm": realization.colligation_norm(),
        "residual": sigma.node_residual(),
        "realization": realization,
    });
    cfg.emit("leech.json", &json_text(&report))?;
    Ok(true)
}

fn name(cmd: Command) -> &'static str {
    match cmd {
        Command::Fixture => "fixture",
        Command::Orbit => "orbit",
        Command::Green => "green",
        Command::Kernel => "kernel",
        Command::Multiplier => "multiplier",
        Command::Leech => "leech",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = cli.command;
    let result = RunConfig::load(cli.run).and_then(|cfg| match cmd {
        Command::Fixture => cmd_fixture(&cfg),
        Command::Orbit => cmd_orbit(&cfg),
        Command::Green => cmd_green(&cfg),
        Command::Kernel => cmd_kernel(&cfg),
        Command::Multiplier => cmd_multiplier(&cfg),
        Command::Leech => cmd_leech(&cfg),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical {
            command,
            message,
            details,
        }) => {
            let command = if command.is_empty() { name(cmd) } else { command };
            let diag = json!({ "status": "error", "command": command, "error": message, "details": details });
            print!("{}", json_text(&diag));
            ExitCode::from(1)
        }
    }
}
