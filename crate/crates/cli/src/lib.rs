//! The `forktopo` command line: `simulate`, `analyze`, `verify`, `outcome`.
//!
//! Exit codes: 0 success, 1 I/O or usage error, 2 when `verify` finds a
//! violated property that should always hold.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use forktopo_core::completion::{completion_check, CompletionReport};
use forktopo_core::metrics::{DistanceTable, MetricReport};
use forktopo_core::report::{analyze, rebind_if, verify, AnalyzeReport, SnapshotSelection, SpaceCheck, VerifyReport};
use forktopo_core::scenario::parse_seed;
use forktopo_core::spaces::ProxyBinding;
use forktopo_core::topology::FiniteSpace;
use forktopo_core::{parse_scenario, simulate, GrowingFork, Trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Environment variable that overrides the scenario seed.
pub const SEED_ENV: &str = "FORKTOPO_SEED";

#[derive(Debug, Parser)]
#[command(name = "forktopo", version, about = "Fork simulation and finite-topology verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its trace as JSON Lines.
    Simulate {
        /// Scenario JSON document.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Trace output path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the three distances, the fallback distance, radii and bases.
    Analyze {
        #[command(flatten)]
        common: TraceArgs,
        /// Measure static fork graphs at this step (default: the horizon).
        #[arg(long, value_name = "INT", conflicts_with = "first_fork")]
        at: Option<usize>,
        /// Measure each cluster's graph at its first forking step.
        #[arg(long)]
        first_fork: bool,
    },
    /// Check metric axioms, discreteness and the map diagram.
    Verify {
        #[command(flatten)]
        common: TraceArgs,
    },
    /// Finite-horizon completion check for one transaction.
    Outcome {
        #[command(flatten)]
        common: TraceArgs,
        #[arg(long, value_name = "INT")]
        txn: u64,
    },
}

#[derive(Debug, Args)]
struct TraceArgs {
    /// Trace file written by `simulate`.
    #[arg(long, value_name = "PATH")]
    trace: PathBuf,
    /// Bind every proxy to its cluster's longest live fork at this step
    /// (default: the genesis fork).
    #[arg(long, value_name = "INT")]
    proxy_at: Option<usize>,
    #[arg(long)]
    json: bool,
}

impl TraceArgs {
    fn binding(&self) -> ProxyBinding {
        self.proxy_at.map_or(ProxyBinding::Genesis, ProxyBinding::BestAt)
    }
}

/// A failure that ends the command with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Runs the command line `args` (program name first). `seed_override` is the
/// value of [`SEED_ENV`], if set.
pub fn run<I, T>(args: I, seed_override: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out: path, json } => cmd_simulate(&config, &path, json, seed_override, out),
        Command::Analyze { common, at, first_fork } => {
            let selection = if first_fork { Some(SnapshotSelection::FirstFork) } else { at.map(SnapshotSelection::At) };
            cmd_analyze(&common, selection, out)
        }
        Command::Verify { common } => cmd_verify(&common, out),
        Command::Outcome { common, txn } => cmd_outcome(&common, txn, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "forktopo: {message}");
            EXIT_ERROR
        }
    }
}

fn read_trace(path: &Path) -> Result<(Trace, Vec<GrowingFork>), Failure> {
    let file = File::open(path).map_err(|e| Failure(format!("cannot open {}: {e}", path.display())))?;
    let trace = Trace::read_jsonl(BufReader::new(file)).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let growing = trace.replay()?;
    Ok((trace, growing))
}

fn emit_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_simulate(
    config: &Path,
    path: &Path,
    json: bool,
    seed_override: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let text =
        std::fs::read_to_string(config).map_err(|e| Failure(format!("cannot read {}: {e}", config.display())))?;
    let mut scenario = parse_scenario(&text).map_err(|e| Failure(format!("{}: {e}", config.display())))?;
    if let Some(seed) = seed_override {
        scenario.config.seed = parse_seed(seed).map_err(|e| Failure(format!("{SEED_ENV}: {e}")))?;
    }
    let trace = simulate(&scenario.config, &scenario.transactions)?;
    let file = File::create(path).map_err(|e| Failure(format!("cannot create {}: {e}", path.display())))?;
    let mut writer = BufWriter::new(file);
    trace.write_jsonl(&mut writer).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?;
    writer.flush()?;
    if json {
        emit_json(
            out,
            &serde_json::json!({
                "out": path.display().to_string(),
                "seed": trace.config.seed,
                "horizon": trace.config.horizon,
                "clusters": trace.config.clusters,
                "events": trace.events.len(),
            }),
        )?;
    } else {
        writeln!(
            out,
            "wrote {} events ({} clusters, {} steps, seed {}) to {}",
            trace.events.len(),
            trace.config.clusters,
            trace.config.horizon,
            trace.config.seed,
            path.display()
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_analyze(args: &TraceArgs, selection: Option<SnapshotSelection>, out: &mut dyn Write) -> Result<i32, Failure> {
    let (trace, growing) = read_trace(&args.trace)?;
    let selection = selection.unwrap_or(SnapshotSelection::At(trace.horizon()));
    let report = analyze(&growing, &trace.transactions, selection, args.binding())?;
    if args.json {
        emit_json(out, &report)?;
    } else {
        write_analyze(out, &report)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &TraceArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (_, growing) = read_trace(&args.trace)?;
    let report = verify(&growing, args.binding())?;
    if args.json {
        emit_json(out, &report)?;
    } else {
        write_verify(out, &report)?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_outcome(args: &TraceArgs, txn: u64, out: &mut dyn Write) -> Result<i32, Failure> {
    let (trace, growing) = read_trace(&args.trace)?;
    let binding = args.binding();
    let proxies = binding.resolve(&growing).ok_or_else(|| {
        Failure(format!("--proxy-at {} is past the horizon {}", args.proxy_at.unwrap_or_default(), trace.horizon()))
    })?;
    let txns: Vec<_> = trace.transactions.iter().map(|t| rebind_if(t, binding, &proxies)).collect();
    let report = completion_check(&growing, &txns, txn, trace.config.confirm_depth)?;
    if args.json {
        emit_json(out, &report)?;
    } else {
        write_outcome(out, &report)?;
    }
    Ok(EXIT_OK)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// The serialized (snake_case) name of a unit enum variant.
fn name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn binding_text(b: ProxyBinding) -> String {
    match b {
        ProxyBinding::Genesis => "genesis fork".into(),
        ProxyBinding::BestAt(t) => format!("longest live fork at step {t}"),
    }
}

fn write_table(out: &mut dyn Write, table: &DistanceTable) -> std::io::Result<()> {
    let n = table.len();
    let cell = |i: usize, j: usize| {
        if i == j {
            "-".to_string()
        } else {
            table.get(i, j).map_or_else(|_| "undef".to_string(), |r| r.to_string())
        }
    };
    let width = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| cell(i, j).len())
        .chain(table.labels().iter().map(String::len))
        .max()
        .unwrap_or(1);
    write!(out, "    {:>width$}", "")?;
    for l in table.labels() {
        write!(out, " {l:>width$}")?;
    }
    writeln!(out)?;
    for i in 0..n {
        write!(out, "    {:>width$}", table.label(i))?;
        for j in 0..n {
            write!(out, " {:>width$}", cell(i, j))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn basis_text(space: &FiniteSpace) -> String {
    space.basis().iter().map(|b| format!("{{{}}}", space.labels_of(b).join(", "))).collect::<Vec<_>>().join(" ")
}

fn write_space(out: &mut dyn Write, name: &str, space: &FiniteSpace) -> std::io::Result<()> {
    writeln!(out, "{name} space: epsilon {}, discrete {}", space.epsilon(), yes(space.is_discrete()))?;
    writeln!(out, "  basis: {}", basis_text(space))?;
    write_table(out, space.table())
}

fn write_analyze(out: &mut dyn Write, r: &AnalyzeReport) -> std::io::Result<()> {
    let snapshot = match r.snapshot {
        SnapshotSelection::At(t) => format!("step {t}"),
        SnapshotSelection::FirstFork => "first forking step".into(),
    };
    writeln!(
        out,
        "horizon {}, {} clusters; fork graphs at {snapshot}; proxies: {}",
        r.horizon,
        r.clusters,
        binding_text(r.binding)
    )?;
    let first: Vec<String> = r
        .first_fork
        .iter()
        .map(|f| match (f.step, f.forks) {
            (Some(m), Some(c)) => format!("C{}@{m}({c})", f.cluster),
            _ => format!("C{}:never", f.cluster),
        })
        .collect();
    writeln!(out, "first forks: {}", first.join(" "))?;
    writeln!(out, "fallback fork distance: {}", r.fork_fallback)?;
    for t in &r.transactions {
        let parties: Vec<String> = t.outcome.per_party.iter().map(name).collect();
        writeln!(out, "transaction {} at step {}: {} ({})", t.id, t.at, name(&t.outcome.verdict), parties.join(", "))?;
        if t.distances.len() >= 2 {
            write_table(out, &t.distances)?;
        }
    }
    write_space(out, "transaction", &r.spaces.transaction)?;
    write_space(out, "fork", &r.spaces.fork)?;
    write_space(out, "growing fork", &r.spaces.growing)
}

fn write_metric(out: &mut dyn Write, name: &str, m: &MetricReport) -> std::io::Result<()> {
    writeln!(
        out,
        "metric {name}: {} pairs ({} skipped), {} triples ({} skipped); failures: symmetry {}, non-negativity {}, triangle {}",
        m.pairs_checked,
        m.pairs_skipped,
        m.triples_checked,
        m.triples_skipped,
        m.symmetry_failures.len(),
        m.nonnegativity_failures.len(),
        m.triangle_failures.len()
    )?;
    if !m.uncovered.is_empty() {
        writeln!(out, "  uncovered_by_paper_proof: {} triples", m.uncovered.len())?;
        for w in &m.uncovered {
            writeln!(
                out,
                "    d({x},{y})={} > d({x},{z})+d({z},{y})={}+{} [{}]",
                w.d_xy,
                w.d_xz,
                w.d_zy,
                w.case.label(),
                x = w.x,
                y = w.y,
                z = w.z
            )?;
        }
    }
    Ok(())
}

fn write_space_check(out: &mut dyn Write, name: &str, s: &SpaceCheck) -> std::io::Result<()> {
    let basis: Vec<String> = s.basis.iter().map(|b| format!("{{{}}}", b.join(", "))).collect();
    writeln!(out, "space {name}: epsilon {}, discrete {}, basis {}", s.epsilon, yes(s.discrete), basis.join(" "))
}

fn write_verify(out: &mut dyn Write, r: &VerifyReport) -> std::io::Result<()> {
    writeln!(out, "verify: {}", if r.passed { "PASS" } else { "FAIL" })?;
    writeln!(out, "horizon {}, {} clusters; proxies: {}", r.horizon, r.clusters, binding_text(r.binding))?;
    write_metric(out, "transaction", &r.metrics.transaction)?;
    write_metric(out, "fork", &r.metrics.fork)?;
    write_metric(out, "first-fork", &r.metrics.fork_first_fork)?;
    write_metric(out, "growing", &r.metrics.growing)?;
    write_space_check(out, "transaction", &r.spaces.transaction)?;
    write_space_check(out, "fork", &r.spaces.fork)?;
    write_space_check(out, "first-fork", &r.spaces.fork_first_fork)?;
    write_space_check(out, "first-fork transaction", &r.spaces.transaction_first_fork)?;
    write_space_check(out, "growing", &r.spaces.growing)?;
    let d = &r.diagram;
    writeln!(
        out,
        "diagram: h bijective {}, continuous {}, inverse continuous {}; g continuous {}; h∘g continuous {}, commutes {}",
        yes(d.h.bijective),
        yes(d.h.continuous),
        yes(d.h.inverse_continuous),
        yes(d.g.continuous),
        yes(d.hg.continuous),
        yes(d.hg.commutes)
    )?;
    if !d.empty_points.is_empty() {
        writeln!(out, "  sent to the empty graph: {}", d.empty_points.join(", "))?;
    }
    for v in &r.violations {
        writeln!(out, "violation: {v}")?;
    }
    Ok(())
}

fn write_outcome(out: &mut dyn Write, r: &CompletionReport) -> std::io::Result<()> {
    let parties: Vec<String> = r.outcome_at_horizon.per_party.iter().map(name).collect();
    let first = r.first_decided_step.map_or("never".to_string(), |t| format!("step {t}"));
    writeln!(
        out,
        "transaction {}: {} ({}); stable {}; decided from {first}",
        r.txn_id,
        name(&r.outcome_at_horizon.verdict),
        parties.join(", "),
        yes(r.stable)
    )
}
