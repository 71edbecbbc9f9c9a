//! Batch front door: instance generation, pipeline runs, benchmarks, and
//! the self-test gate.
//!
//! Exit codes: 0 success, 1 property failure (failed self-test or a
//! `--check` disagreement), 2 usage or I/O problems.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sumlab::accept::{run_core_criteria, AcceptConfig};
use sumlab::conv::{solve_3sum_via_conv, ConvConfig};
use sumlab::matching::{emit_query_csv, QueryMode};
use sumlab::sd::{solve_3sum_via_sd, solve_3sum_via_si};
use sumlab::setsystem::{
    brute_disjointness, gen_system, read_setsys, write_setsys, Backend, HeavyLightStructure,
};
use sumlab::threesum::{
    gen_instance, read_3sum, solve_3sum_bruteforce, solve_conv_bruteforce, write_3sum, Plant,
    ThreeSumInstance, Witness3,
};
use sumlab::triangles::{enum_triangles_cn, gen_graph, hard_instance, write_graph, HardStats};
use sumlab::{rng, Error};

#[derive(Parser)]
#[command(
    name = "sumlab",
    version,
    about = "3SUM reduction pipelines and their classical counterparts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write instance files (3SUM, set systems, hardness graphs).
    Gen {
        #[command(subcommand)]
        what: GenKind,
    },
    /// Decide a 3SUM instance file through one of the pipelines.
    Solve(SolveArgs),
    /// Timed trials with counted operations, CSV output.
    Bench(BenchArgs),
    /// Run the acceptance suite; exit 0 only if everything passes.
    Selftest(SelftestArgs),
    /// Answer a set-system file's queries through the matching gadget,
    /// emitting one CSV row per query.
    MatchQueries(MatchQueriesArgs),
}

#[derive(Subcommand)]
enum GenKind {
    /// A 3SUM instance: n distinct values below a power-of-two universe.
    #[command(name = "3sum")]
    ThreeSum {
        #[arg(long)]
        n: usize,
        /// Universe size, a power of two.
        #[arg(long, default_value_t = 1 << 20)]
        u: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Guarantee at least one witness.
        #[arg(long)]
        plant: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// A random set system with query pairs.
    Setsys {
        /// Sets per family.
        #[arg(long)]
        n: usize,
        /// Universe (element id) count.
        #[arg(long, default_value_t = 64)]
        u: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// A split-and-oriented hardness graph derived from a random instance.
    Graph {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1 << 20)]
        u: u64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Via {
    Sd,
    Si,
    Conv,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Brute,
    Heavylight,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Brute => Backend::Brute,
            BackendArg::Heavylight => Backend::HeavyLight,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    /// 3SUM instance file.
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Via::Sd)]
    via: Via,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Brute)]
    backend: BackendArg,
    /// Also run the brute-force oracle and report agreement.
    #[arg(long)]
    check: bool,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchTask {
    Sd,
    Si,
    Conv,
    Triangles,
    Heavylight,
    Matching,
}

impl BenchTask {
    fn name(self) -> &'static str {
        match self {
            BenchTask::Sd => "sd",
            BenchTask::Si => "si",
            BenchTask::Conv => "conv",
            BenchTask::Triangles => "triangles",
            BenchTask::Heavylight => "heavylight",
            BenchTask::Matching => "matching",
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    task: BenchTask,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1 << 20)]
    u: u64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Reduced trial counts; finishes quickly.
    #[arg(long)]
    quick: bool,
    /// Test hook: corrupt one convolution vector so the suite must fail.
    #[arg(long, hide = true)]
    inject_layout_fault: bool,
    /// Skip the byte-determinism re-execution round.
    #[arg(long, hide = true)]
    no_determinism: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rollback,
    Perfect,
    Combined,
}

#[derive(Args)]
struct MatchQueriesArgs {
    /// Set-system file with query pairs.
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Perfect)]
    mode: ModeArg,
    /// Work threshold exponent for combined mode.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Gen { what } => cmd_gen(what),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Selftest(args) => cmd_selftest(args),
        Command::MatchQueries(args) => cmd_match_queries(args),
    }
}

fn write_output(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn cmd_gen(what: GenKind) -> Result<ExitCode, Error> {
    match what {
        GenKind::ThreeSum {
            n,
            u,
            seed,
            plant,
            out,
        } => {
            let plant = if plant { Plant::Witness } else { Plant::None };
            let inst = gen_instance(n, u, plant, &mut rng::stream(seed, "cli-gen-3sum", 0))?;
            write_output(&out, &write_3sum(&inst))?;
            println!("wrote 3sum instance n={} u={} to {}", inst.len(), u, out.display());
        }
        GenKind::Setsys { n, u, seed, out } => {
            if n == 0 || u == 0 {
                return Err(Error::Parameter("need n >= 1 and u >= 1".into()));
            }
            let universe = u as usize;
            let max_size = (universe / 4).max(1);
            let (sys, batch) = gen_system(
                universe,
                n,
                n,
                max_size,
                2 * n,
                &mut rng::stream(seed, "cli-gen-setsys", 0),
            )?;
            write_output(&out, &write_setsys(&sys, &batch))?;
            println!(
                "wrote set system |A|=|B|={n} universe={universe} q={} to {}",
                batch.len(),
                out.display()
            );
        }
        GenKind::Graph {
            n,
            u,
            gamma,
            delta,
            seed,
            out,
        } => {
            let hard =
                hard_instance(n, u, gamma, delta, &mut rng::stream(seed, "cli-gen-graph", 0))?;
            write_output(&out, &write_graph(&hard.graph))?;
            println!("{}", HardStats::csv_header());
            println!("{}", hard.stats.csv_row());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn witness_text(w: Option<Witness3>) -> String {
    match w {
        Some(w) => format!("witness found: {w}"),
        None => "no witness".into(),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.file)?;
    let inst: ThreeSumInstance = read_3sum(&text)?;
    let backend: Backend = args.backend.into();
    let mut r = rng::stream(args.seed, "cli-solve", 0);
    let (via_name, witness) = match args.via {
        Via::Sd => (
            "sd",
            solve_3sum_via_sd(&inst, args.gamma, backend, &mut r)?.witness,
        ),
        Via::Si => (
            "si",
            solve_3sum_via_si(&inst, args.gamma, args.delta, backend, &mut r)?.witness,
        ),
        Via::Conv => (
            "conv",
            solve_3sum_via_conv(&inst, solve_conv_bruteforce, &ConvConfig::default(), &mut r)?
                .witness,
        ),
        Via::Brute => ("brute", solve_3sum_bruteforce(&inst)),
    };
    let check = if args.check {
        let expected = solve_3sum_bruteforce(&inst);
        Some(expected.is_some() == witness.is_some())
    } else {
        None
    };

    match args.format {
        Format::Plain => {
            println!(
                "instance {}: n={} u={}",
                args.file.display(),
                inst.len(),
                inst.universe()
            );
            println!(
                "via {via_name} gamma={} delta={} backend={} seed={}",
                args.gamma,
                args.delta,
                backend.name(),
                args.seed
            );
            println!("decision: {}", witness_text(witness));
            if let Some(agree) = check {
                println!("check: {}", if agree { "agree" } else { "DISAGREE" });
            }
        }
        Format::Csv => {
            println!("file,via,gamma,delta,seed,backend,decision,x,y,z,check");
            let (x, y, z) = witness.map_or((String::new(), String::new(), String::new()), |w| {
                (w.x.to_string(), w.y.to_string(), w.z.to_string())
            });
            println!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                args.file.display(),
                via_name,
                args.gamma,
                args.delta,
                args.seed,
                backend.name(),
                u8::from(witness.is_some()),
                x,
                y,
                z,
                check.map_or(String::new(), |a| u8::from(a).to_string()),
            );
        }
    }
    if check == Some(false) {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

/// One bench trial: returns (counted ops, result tag).
fn bench_trial(
    task: BenchTask,
    n: usize,
    u: u64,
    gamma: f64,
    delta: f64,
    seed: u64,
) -> Result<(u64, String), Error> {
    match task {
        BenchTask::Sd => {
            let inst = gen_instance(n, u, Plant::None, &mut rng::stream(seed, "bench-gen", 0))?;
            let run =
                solve_3sum_via_sd(&inst, gamma, Backend::Brute, &mut rng::stream(seed, "bench-sd", 0))?;
            Ok((run.queries as u64, u8::from(run.witness.is_some()).to_string()))
        }
        BenchTask::Si => {
            let inst = gen_instance(n, u, Plant::None, &mut rng::stream(seed, "bench-gen", 0))?;
            let run = solve_3sum_via_si(
                &inst,
                gamma,
                delta,
                Backend::Brute,
                &mut rng::stream(seed, "bench-si", 0),
            )?;
            Ok((run.queries as u64, u8::from(run.witness.is_some()).to_string()))
        }
        BenchTask::Conv => {
            let inst = gen_instance(n, u, Plant::None, &mut rng::stream(seed, "bench-gen", 0))?;
            let run = solve_3sum_via_conv(
                &inst,
                solve_conv_bruteforce,
                &ConvConfig::default(),
                &mut rng::stream(seed, "bench-conv", 0),
            )?;
            Ok((
                run.total_calls as u64,
                u8::from(run.witness.is_some()).to_string(),
            ))
        }
        BenchTask::Triangles => {
            let g = gen_graph(n, 0.2, &mut rng::stream(seed, "bench-tri", 0));
            let listing = enum_triangles_cn(&g);
            Ok((listing.ops, listing.triangles.len().to_string()))
        }
        BenchTask::Heavylight => {
            let universe = n.max(4);
            let (sys, batch) = gen_system(
                universe,
                n.max(2),
                n.max(2),
                (universe / 2).max(1),
                4 * n.max(1),
                &mut rng::stream(seed, "bench-hl", 0),
            )?;
            let hl = HeavyLightStructure::build(&sys);
            let mut ops = hl.preprocess_ops();
            let mut disjoint = 0u64;
            for &(a, b) in batch.pairs() {
                let (ans, o) = hl.query(&sys, a, b);
                ops += o;
                disjoint += u64::from(ans);
            }
            Ok((ops, disjoint.to_string()))
        }
        BenchTask::Matching => {
            let universe = n.max(4);
            let (sys, batch) = gen_system(
                universe,
                n.max(2),
                n.max(2),
                (universe / 4).max(1),
                2 * n.max(1),
                &mut rng::stream(seed, "bench-match", 0),
            )?;
            let csv = emit_query_csv(&sys, &batch, QueryMode::Perfect)?;
            let answers = brute_disjointness(&sys, &batch);
            let disjoint: u64 = answers.iter().map(|&b| u64::from(b)).sum();
            Ok((csv.lines().count() as u64 - 1, disjoint.to_string()))
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, Error> {
    let mut out = String::from("task,n,gamma,delta,seed,ops,micros,result\n");
    let rows = sumlab::par::map_indexed(args.trials, |t| {
        let seed = args.seed.wrapping_add(t as u64);
        let start = Instant::now();
        let trial = bench_trial(args.task, args.n, args.u, args.gamma, args.delta, seed);
        let micros = start.elapsed().as_micros();
        trial.map(|(ops, result)| {
            format!(
                "{},{},{},{},{},{},{},{}",
                args.task.name(),
                args.n,
                args.gamma,
                args.delta,
                seed,
                ops,
                micros,
                result
            )
        })
    });
    for row in rows {
        let row = row?;
        out.push_str(&row);
        out.push('\n');
    }
    match &args.out {
        Some(path) => write_output(path, &out)?,
        None => print!("{out}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_match_queries(args: MatchQueriesArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.file)?;
    let (sys, batch) = read_setsys(&text)?;
    let mode = match args.mode {
        ModeArg::Rollback => QueryMode::Rollback,
        ModeArg::Perfect => QueryMode::Perfect,
        ModeArg::Combined => QueryMode::Combined { alpha: args.alpha },
    };
    let csv = emit_query_csv(&sys, &batch, mode)?;
    match &args.out {
        Some(path) => write_output(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: SelftestArgs) -> Result<ExitCode, Error> {
    let cfg = AcceptConfig {
        quick: args.quick,
        inject_conv_layout_fault: args.inject_layout_fault,
    };
    let mut all_passed = true;
    for report in run_core_criteria(&cfg) {
        println!("{}", report.line());
        all_passed &= report.passed;
    }
    if !args.no_determinism {
        let (passed, detail) = determinism_check()?;
        println!(
            "criterion 10 {:<26} {}  {}",
            "cli-determinism",
            if passed { "PASS" } else { "FAIL" },
            detail
        );
        all_passed &= passed;
    }
    if all_passed {
        println!("selftest: all criteria passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("selftest: FAILURES present");
        Ok(ExitCode::from(1))
    }
}

/// Criterion 10: re-runs a representative command set twice and compares
/// bytes (stdout and written files). The bench timing column is masked, as
/// wall-clock time is the one intentionally non-reproducible output.
fn determinism_check() -> Result<(bool, String), Error> {
    let exe = std::env::current_exe()?;
    let dir = std::env::temp_dir().join(format!("sumlab-selftest-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let result = determinism_check_in(&exe, &dir);
    let _ = std::fs::remove_dir_all(&dir);
    result
}

fn determinism_check_in(exe: &Path, dir: &Path) -> Result<(bool, String), Error> {
    let f3 = dir.join("det.3sum");
    let f3small = dir.join("det-small.3sum");
    let fsys = dir.join("det.setsys");
    let fgraph = dir.join("det.graph");
    let s = |p: &Path| p.display().to_string();
    let owned = |parts: &[&str]| -> Vec<String> { parts.iter().map(|p| p.to_string()).collect() };
    let commands: Vec<Vec<String>> = vec![
        owned(&["gen", "3sum", "--n", "32", "--seed", "7", "--plant", "--out", &s(&f3)]),
        owned(&["gen", "3sum", "--n", "10", "--u", "4096", "--seed", "9", "--out", &s(&f3small)]),
        owned(&["gen", "setsys", "--n", "6", "--u", "32", "--seed", "7", "--out", &s(&fsys)]),
        owned(&[
            "gen", "graph", "--n", "48", "--gamma", "0.5", "--delta", "0.5", "--seed", "7",
            "--out", &s(&fgraph),
        ]),
        owned(&["solve", &s(&f3), "--via", "sd", "--seed", "7", "--check"]),
        owned(&["solve", &s(&f3), "--via", "si", "--seed", "7", "--check", "--format", "csv"]),
        owned(&["solve", &s(&f3small), "--via", "conv", "--seed", "7", "--check"]),
        owned(&["solve", &s(&f3), "--via", "brute", "--check"]),
        owned(&["bench", "--task", "heavylight", "--n", "16", "--trials", "2", "--seed", "7"]),
        owned(&["match-queries", &s(&fsys), "--mode", "perfect"]),
        owned(&["match-queries", &s(&fsys), "--mode", "combined", "--alpha", "0.4"]),
    ];

    let mut checked = 0;
    for cmd in &commands {
        let run = |label: &str| -> Result<(Vec<u8>, Vec<Vec<u8>>), Error> {
            let output = std::process::Command::new(exe).args(cmd).output()?;
            if !output.status.success() {
                return Err(Error::Invariant(format!(
                    "determinism probe `{}` ({label}) exited with {:?}: {}",
                    cmd.join(" "),
                    output.status.code(),
                    String::from_utf8_lossy(&output.stderr)
                )));
            }
            let mut files = Vec::new();
            for f in [&f3, &f3small, &fsys, &fgraph] {
                files.push(std::fs::read(f).unwrap_or_default());
            }
            Ok((output.stdout, files))
        };
        let (mut out1, files1) = run("first")?;
        let (mut out2, files2) = run("second")?;
        if cmd[0] == "bench" {
            out1 = mask_micros_column(&out1);
            out2 = mask_micros_column(&out2);
        }
        if out1 != out2 || files1 != files2 {
            return Ok((false, format!("command `{}` diverged", cmd.join(" "))));
        }
        checked += 1;
    }
    Ok((true, format!("{checked} commands byte-identical across reruns")))
}

/// Blanks the `micros` column (7th field) of bench CSV output.
fn mask_micros_column(bytes: &[u8]) -> Vec<u8> {
    let text = String::from_utf8_lossy(bytes);
    let mut out = String::new();
    for line in text.lines() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() == 8 && fields[6] != "micros" {
            let _ = write!(
                out,
                "{},{},{},{},{},{},-,{}",
                fields[0], fields[1], fields[2], fields[3], fields[4], fields[5], fields[7]
            );
            out.push('\n');
        } else {
            out.push_str(line);
            out.push('\n');
        }
    }
    out.into_bytes()
}
