//! The `cqp` command: parse and check CQP programs, explore them in the CNOT
//! experiment's environment, probe the gate output state and decide
//! equivalence.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use cqp_lang::{check_ownership, parse, Program};
use equivalence::check_pbb;
use loqc_models::{
    build, cnot_output, environment_for, mutant, role_amplitudes, InputStateSpec, ModelError, ModelId, Mutant,
};
use quantum_state::Complex64;
use semantics::{explore, terminal_distributions, Limits, SemanticsError};

use crate::report::*;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_EQUIVALENT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_LIMIT: u8 = 4;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const TOL_VAR: &str = "CQP_LOQC_TOL";

#[derive(Debug, Parser)]
#[command(name = "cqp", version, about = "CQP interpreter and equivalence checker for the LOQC CNOT study")]
struct Cli {
    /// Abort exploration beyond this many configurations.
    #[arg(long, global = true, default_value_t = 100_000)]
    max_nodes: usize,
    /// Abort when a state needs more photons than this.
    #[arg(long, global = true, default_value_t = 4)]
    max_photons: u32,
    /// Worker threads for exploration (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check syntax and ownership of a source file.
    Parse { file: PathBuf },
    /// Explore MODEL on an input and report its output distribution.
    Run {
        /// Corpus model name, `mutant:<name>` or a .cqp file.
        model: String,
        /// Four real amplitudes, eight numbers (re,im pairs) or a family label.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Print the joint state at a probe point.
    State {
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long, value_enum)]
        at: Probe,
        #[arg(long)]
        json: bool,
    },
    /// Decide equivalence of two models over a set of inputs.
    Equiv {
        a: String,
        b: String,
        /// `basis`, `family` or a file with one input per line.
        #[arg(long, default_value = "family")]
        inputs: String,
        /// Numeric tolerance (default: $CQP_LOQC_TOL or 1e-6).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Write the transition system of MODEL on an input as JSON.
    Lts {
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Probe {
    CnotOutput,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Limit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Limit(_) => EXIT_LIMIT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Limit(m) => m,
        }
    }
}

impl From<SemanticsError> for Failure {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::LimitExceeded(m) => Failure::Limit(format!("limit exceeded: {m}")),
            SemanticsError::Expand(e) => Failure::Parse(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Semantics(s) => s.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Runs `cqp` with `argv` (program name first) and returns the exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let shown = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{shown}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{shown}");
                EXIT_OK
            };
        }
    };
    let limits = Limits { max_nodes: cli.max_nodes, max_photons: cli.max_photons };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(cli.cmd, limits, &mut buf));
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cmd: Command, limits: Limits, out: &mut dyn Write) -> Result<u8, Failure> {
    match cmd {
        Command::Parse { file } => cmd_parse(&file, out),
        Command::Run { model, input, json } => cmd_run(&model, &input, json, limits, out),
        Command::State { model, input, at: Probe::CnotOutput, json } => cmd_state(&model, &input, json, limits, out),
        Command::Equiv { a, b, inputs, tol, json } => cmd_equiv(&a, &b, &inputs, tol, json, limits, out),
        Command::Lts { model, input, output } => cmd_lts(&model, &input, &output, limits, out),
    }
}

fn load_file(path: &Path) -> Result<Program, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let prog = parse(&src).map_err(|e| Failure::Parse(format!("{}:{e}", path.display())))?;
    let diags = check_ownership(&prog);
    if !diags.is_empty() {
        let lines: Vec<String> =
            diags.iter().map(|d| format!("{}: in {}: {d}", path.display(), d.within)).collect();
        return Err(Failure::Parse(lines.join("\n")));
    }
    Ok(prog)
}

/// Resolves a corpus name, `mutant:<name>` or a source file.
fn load_model(spec: &str) -> Result<(String, Program), Failure> {
    if let Some(name) = spec.strip_prefix("mutant:") {
        let m = Mutant::ALL
            .iter()
            .copied()
            .find(|m| m.name() == name)
            .ok_or_else(|| Failure::Usage(format!("unknown mutant {name}")))?;
        return Ok((spec.to_string(), mutant(m)));
    }
    let path = Path::new(spec);
    if spec.ends_with(".cqp") || path.is_file() {
        return Ok((spec.to_string(), load_file(path)?));
    }
    let id = ModelId::from_str(spec).map_err(Failure::Usage)?;
    Ok((id.name().to_string(), build(id)))
}

/// Parses an input state: a family label, four reals, or eight numbers
/// giving (re, im) of each amplitude.
pub fn parse_input(text: &str) -> Result<(String, InputStateSpec), String> {
    let t = text.trim();
    let family = InputStateSpec::default_family();
    let key = t.trim_start_matches('|').trim_end_matches('>');
    if let Some((label, s)) = family.iter().find(|(l, _)| l == t || l.trim_start_matches('|').trim_end_matches('>') == key) {
        return Ok((label.clone(), *s));
    }
    let nums = t
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?} in input {t:?}")))
        .collect::<Result<Vec<f64>, String>>()?;
    let amps: [Complex64; 4] = match nums.len() {
        4 => std::array::from_fn(|i| Complex64::new(nums[i], 0.0)),
        8 => std::array::from_fn(|i| Complex64::new(nums[2 * i], nums[2 * i + 1])),
        n => return Err(format!("input needs 4 or 8 numbers, got {n}")),
    };
    let spec = InputStateSpec::new(amps[0], amps[1], amps[2], amps[3]).map_err(|e| e.to_string())?;
    Ok((t.to_string(), spec))
}

fn input_arg(text: &str) -> Result<(String, InputStateSpec), Failure> {
    parse_input(text).map_err(Failure::Usage)
}

/// `basis`, `family`, or a file with one input per line (`label: spec` or
/// just the amplitudes; `#` starts a comment).
pub fn parse_input_set(text: &str) -> Result<Vec<(String, InputStateSpec)>, String> {
    let family = InputStateSpec::default_family();
    match text {
        "basis" => return Ok(family.into_iter().take(4).collect()),
        "family" => return Ok(family),
        _ => {}
    }
    let src = std::fs::read_to_string(text).map_err(|e| format!("{text}: {e}"))?;
    let mut v = Vec::new();
    for line in src.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once(':') {
            Some((label, spec)) => v.push((label.trim().to_string(), parse_input(spec)?.1)),
            None => v.push(parse_input(line)?),
        }
    }
    if v.is_empty() {
        return Err(format!("{text}: no inputs"));
    }
    Ok(v)
}

fn tolerance(flag: Option<f64>) -> Result<f64, Failure> {
    let tol = match (flag, std::env::var(TOL_VAR)) {
        (Some(t), _) => t,
        (None, Ok(v)) => v.trim().parse().map_err(|_| Failure::Usage(format!("{TOL_VAR}={v} is not a number")))?,
        (None, Err(_)) => DEFAULT_TOL,
    };
    if tol.is_finite() && tol >= 0.0 {
        Ok(tol)
    } else {
        Err(Failure::Usage(format!("tolerance {tol} must be a non-negative number")))
    }
}

fn emit_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn cmd_parse(file: &Path, out: &mut dyn Write) -> Result<u8, Failure> {
    let prog = load_file(file)?;
    writeln!(out, "{}: ok ({} definitions)", file.display(), prog.definitions.len())?;
    Ok(EXIT_OK)
}

fn tuple_text(t: &[semantics::Value]) -> String {
    format!("({})", t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
}

fn cmd_run(model: &str, input: &str, json: bool, limits: Limits, out: &mut dyn Write) -> Result<u8, Failure> {
    let (name, prog) = load_model(model)?;
    let (label, spec) = input_arg(input)?;
    let g = explore(&prog, &environment_for(&spec), limits)?;
    let dists = terminal_distributions(&g);
    let report = RunReport {
        report: "run",
        model: name,
        input: InputJson::new(&label, &spec),
        terminal_distribution: dists.first().map(outcomes).unwrap_or_default(),
        distributions: dists.len(),
        deadlocks: g.deadlocks().into_iter().map(|n| g.nodes[n].id.clone()).collect(),
        lts_stats: LtsStats { nodes: g.len(), edges: g.edges.len() },
    };
    if json {
        emit_json(out, &report)?;
    } else {
        writeln!(out, "model {} on input {} {}", report.model, label, spec)?;
        writeln!(
            out,
            "LTS: {} nodes, {} edges, {} deadlocks",
            report.lts_stats.nodes,
            report.lts_stats.edges,
            report.deadlocks.len()
        )?;
        if report.distributions > 1 {
            writeln!(out, "warning: {} distinct distributions; showing the first", report.distributions)?;
        }
        for o in &report.terminal_distribution {
            let obs: Vec<String> = o
                .outputs
                .iter()
                .map(|(c, ts)| format!("{c}={}", ts.iter().map(|t| tuple_text(t)).collect::<Vec<_>>().join("")))
                .collect();
            writeln!(out, "{:.9}  {}", o.probability, obs.join(" "))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_state(model: &str, input: &str, json: bool, limits: Limits, out: &mut dyn Write) -> Result<u8, Failure> {
    let (name, prog) = load_model(model)?;
    let (label, spec) = input_arg(input)?;
    let probe = cnot_output(&prog, &spec, limits)?;
    let amps = role_amplitudes(&probe.state, &probe.roles)?;
    let r = &probe.roles;
    let report = StateReport {
        report: "state",
        model: name,
        input: InputJson::new(&label, &spec),
        probe: "cnot-output",
        node: probe.node.clone(),
        roles: [("c1", &r.c1), ("c2", &r.c2), ("t1", &r.t1), ("t2", &r.t2), ("x1", &r.x1), ("x2", &r.x2)]
            .into_iter()
            .map(|(k, v)| (k, v.clone()))
            .collect(),
        amplitudes: amps
            .iter()
            .filter(|(_, a)| a.norm() > quantum_state::PRUNE_EPS)
            .map(|(b, a)| Amplitude { basis: b.clone(), re: a.re, im: a.im })
            .collect(),
    };
    if json {
        emit_json(out, &report)?;
    } else {
        writeln!(out, "model {} on input {} {} at cnot-output", report.model, label, spec)?;
        writeln!(out, "modes c1 c2 t1 t2 | x1 x2 = {}", r.in_order().join(" "))?;
        for a in &report.amplitudes {
            let (occ, anc) = a.basis.split_once('|').unwrap_or((&a.basis, ""));
            writeln!(out, "|{occ}>|{anc}>  {:+.12} {:+.12}i", a.re, a.im)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_equiv(
    a: &str,
    b: &str,
    inputs: &str,
    tol: Option<f64>,
    json: bool,
    limits: Limits,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let (name_a, pa) = load_model(a)?;
    let (name_b, pb) = load_model(b)?;
    let set = parse_input_set(inputs).map_err(Failure::Usage)?;
    let tol = tolerance(tol)?;
    let mut verdicts = Vec::new();
    for (label, spec) in &set {
        let env = environment_for(spec);
        let ga = explore(&pa, &env, limits)?;
        let gb = explore(&pb, &env, limits)?;
        let verdict = check_pbb(&ga, &gb, tol);
        verdicts.push(InputVerdict { input: InputJson::new(label, spec), nodes_a: ga.len(), nodes_b: gb.len(), verdict });
    }
    let equivalent = verdicts.iter().all(|v| v.verdict.equivalent);
    let report = EquivReport { report: "equiv", a: name_a, b: name_b, tolerance: tol, equivalent, inputs: verdicts };
    if json {
        emit_json(out, &report)?;
    } else {
        for v in &report.inputs {
            let what = if v.verdict.equivalent { "equivalent" } else { "NOT equivalent" };
            writeln!(
                out,
                "{:<8} {what} ({} + {} nodes, {} classes)",
                v.input.label, v.nodes_a, v.nodes_b, v.verdict.classes
            )?;
            for s in v.verdict.counterexample.iter().flatten() {
                writeln!(out, "    {:?} {}  {}", s.side, s.label, abbreviate(&s.term, 100))?;
            }
        }
        let what = if equivalent { "equivalent" } else { "not equivalent" };
        writeln!(out, "{} vs {}: {what} at tolerance {tol:e}", report.a, report.b)?;
    }
    Ok(if equivalent { EXIT_OK } else { EXIT_NOT_EQUIVALENT })
}

fn abbreviate(s: &str, n: usize) -> String {
    match s.char_indices().nth(n) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

fn cmd_lts(model: &str, input: &str, output: &Path, limits: Limits, out: &mut dyn Write) -> Result<u8, Failure> {
    let (name, prog) = load_model(model)?;
    let (label, spec) = input_arg(input)?;
    let g = explore(&prog, &environment_for(&spec), limits)?;
    let mut doc = serde_json::json!({
        "report": "lts",
        "model": name,
        "input": InputJson::new(&label, &spec),
    });
    if let (Some(d), serde_json::Value::Object(lts)) = (doc.as_object_mut(), g.to_json()) {
        d.extend(lts);
    }
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Usage(e.to_string()))?;
    std::fs::write(output, text + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", output.display())))?;
    writeln!(out, "wrote {} nodes and {} edges to {}", g.len(), g.edges.len(), output.display())?;
    Ok(EXIT_OK)
}
