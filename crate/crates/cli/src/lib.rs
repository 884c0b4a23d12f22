//! Command-line front end: instance generation, solver dispatch, entropy and
//! adversary reports, and benchmark sweeps.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use rectvis::adversary::{AdvCounters, Adversary};
use rectvis::baseline::{report_bichromatic_pairs, report_participating_sweep};
use rectvis::entropy::{
    auto_tester, build_pikd_partition, build_slab_partition, certify_bounds, partition_entropy,
    EntropyReport,
};
use rectvis::gen::{generate, Family, GenParams};
use rectvis::instance::parse_instance;
use rectvis::optimal::{
    report_pairs_optimal, report_participating_optimal, EmptinessMode, OptimalConfig, RoundStats,
    DEFAULT_DELTA,
};
use rectvis::oracle::{
    oracle_participating, oracle_structural_entropy, oracle_visible_pairs, Pair, ENTROPY_CAP,
};
use rectvis::{CoordOracle, CountingOracle, Instance, PointId};

pub const SCHEMA: u32 = 1;

/// Largest instance checked against the brute-force oracle after an
/// adversary run; above it the sweep serves as reference.
const ADVERSARY_ORACLE_MAX_N: usize = 1024;
/// Largest instance whose adversary run re-verifies the invariant after every
/// query.
const ADVERSARY_CHECK_MAX_N: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<rectvis::Error> for CliError {
    fn from(e: rectvis::Error) -> Self {
        use rectvis::Error::*;
        match e {
            DegenerateInput { .. } | Parse { .. } | BadParams(_) | TooLarge { .. } => {
                CliError::Validation(e.to_string())
            }
            InvalidRanges(_) | PreconditionViolated(_) | InconsistentState(_) => {
                CliError::Internal(e.to_string())
            }
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "rectvis",
    version,
    about = "Bichromatic rectangular visibility"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated instance in point-file format.
    Gen(GenArgs),
    /// Report the points that see some opposite-color point.
    Points(SolveArgs),
    /// Report the visible red/blue pairs.
    Pairs(SolveArgs),
    /// Entropy bounds from the kd-tree and slab partitions.
    Entropy(SolveArgs),
    /// Run a solver against the lazy adversary.
    Adversary(SolveArgs),
    /// Comparison counts over generated families, as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Oracle,
    Sweep,
    Optimal,
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Solver::Oracle => "oracle",
            Solver::Sweep => "sweep",
            Solver::Optimal => "optimal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emptiness {
    Grid,
    Scan,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Cluster count (diag-clusters only).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    #[arg(long, value_enum, default_value_t = Solver::Optimal)]
    pub solver: Solver,
    #[arg(long, value_enum, default_value_t = Emptiness::Grid)]
    pub emptiness: Emptiness,
    /// Round-limit exponent of the optimal solver.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
}

impl SolverFlags {
    fn config(&self) -> Result<OptimalConfig, CliError> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(CliError::Validation(format!(
                "--delta must be positive, got {}",
                self.delta
            )));
        }
        Ok(OptimalConfig {
            delta: self.delta,
            emptiness: match self.emptiness {
                Emptiness::Grid => EmptinessMode::Grid,
                Emptiness::Scan => EmptinessMode::Scan,
            },
            ..OptimalConfig::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Point file: `x<TAB>y<TAB>R|B` per line.
    pub input: PathBuf,
    #[command(flatten)]
    pub flags: SolverFlags,
    /// Accepted for symmetry with `gen` and `bench`; solving is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here (`-` for stdout instead of the summary).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Break coordinate ties by input order instead of rejecting them.
    #[arg(long)]
    pub dedupe_ties: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub family: Family,
    /// Comma-separated sizes (per line for threelines).
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Comma-separated cluster counts (diag-clusters only).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated solvers.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "sweep,optimal"
    )]
    pub solvers: Vec<Solver>,
    #[arg(long, value_enum, default_value_t = Emptiness::Grid)]
    pub emptiness: Emptiness,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// CSV output file; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryReport {
    pub sigma: Vec<PointId>,
    pub counters: AdvCounters,
    pub chips_bound_holds: bool,
    pub replay_mismatches: usize,
    pub invariant_checked: bool,
    /// The solver's answer matches the reference on the committed instance.
    pub output_correct: bool,
}

/// Machine-readable result of one command. Byte-identical across runs
/// except for `wall_ms`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub input_digest: String,
    pub solver: Solver,
    pub n: usize,
    pub h: usize,
    pub participating: Vec<PointId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<Pair>>,
    /// Absent for the oracle, which reads coordinates directly.
    pub comparisons: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<Vec<RoundStats>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversaryReport>,
    pub wall_ms: f64,
}

impl Report {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} ({}): n = {}, {} participating",
            self.command, self.solver, self.n, self.h
        );
        if let Some(p) = &self.pairs {
            s += &format!(", {} visible pairs", p.len());
        }
        if let Some(c) = self.comparisons {
            s += &format!(", {c} comparisons");
        }
        if let Some(e) = &self.entropy {
            s += &format!(
                "\nH_pikd = {:.4}, H_slab = {:.4}{}, certificates {}",
                e.h_pikd,
                e.h_slab,
                e.h_exact
                    .map(|h| format!(", H_exact = {h:.4}"))
                    .unwrap_or_default(),
                if e.all_flags() { "ok" } else { "FAILED" }
            );
        }
        if let Some(a) = &self.adversary {
            s += &format!(
                "\nD = {}, D_post = {}, replay mismatches = {}, output {}",
                a.counters.d,
                a.counters.d_post,
                a.replay_mismatches,
                if a.output_correct { "correct" } else { "WRONG" }
            );
        }
        s
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

struct Solved {
    participating: Vec<PointId>,
    pairs: Option<BTreeSet<Pair>>,
    comparisons: Option<u64>,
    rounds: Option<Vec<RoundStats>>,
}

fn solve<O: CoordOracle>(
    inst: &Instance,
    o: &O,
    solver: Solver,
    cfg: &OptimalConfig,
    pairs: bool,
) -> Result<Solved, CliError> {
    let mut out = Solved {
        participating: Vec::new(),
        pairs: None,
        comparisons: None,
        rounds: None,
    };
    match (solver, pairs) {
        (Solver::Oracle, false) => {
            out.participating = oracle_participating(inst).into_iter().collect()
        }
        (Solver::Oracle, true) => {
            let p = oracle_visible_pairs(inst);
            out.participating = participants(&p);
            out.pairs = Some(p);
        }
        (Solver::Sweep, false) => out.participating = report_participating_sweep(o),
        (Solver::Sweep, true) => {
            let p = report_bichromatic_pairs(o);
            out.participating = participants(&p);
            out.pairs = Some(p);
        }
        (Solver::Optimal, false) => {
            let run = report_participating_optimal(o, cfg)?;
            out.participating = run.participating;
            out.rounds = Some(run.rounds);
        }
        (Solver::Optimal, true) => {
            let (p, run) = report_pairs_optimal(o, cfg)?;
            out.participating = run.participating;
            out.rounds = Some(run.rounds);
            out.pairs = Some(p);
        }
    }
    if solver != Solver::Oracle {
        out.comparisons = Some(o.comparisons());
    }
    Ok(out)
}

fn participants(pairs: &BTreeSet<Pair>) -> Vec<PointId> {
    let s: BTreeSet<PointId> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    s.into_iter().collect()
}

fn read_instance(path: &Path, dedupe: bool) -> Result<(Instance, String), CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| io_err(path, e))?;
    let inst = parse_instance(&text, dedupe)?;
    Ok((inst, digest(text.as_bytes())))
}

pub fn entropy_report(inst: &Instance, participating: &[PointId]) -> EntropyReport {
    let pikd = build_pikd_partition(inst, auto_tester(inst).as_mut());
    let slab = build_slab_partition(inst, participating);
    let exact = (inst.len() <= ENTROPY_CAP)
        .then(|| {
            oracle_structural_entropy(inst, ENTROPY_CAP)
                .ok()
                .map(|(_, p)| p)
        })
        .flatten();
    certify_bounds(inst, participating.len(), &pikd, &slab, exact.as_ref())
}

fn adversary_report(
    inst: &Instance,
    solver: Solver,
    cfg: &OptimalConfig,
) -> Result<(AdversaryReport, Solved), CliError> {
    if solver == Solver::Oracle {
        return Err(CliError::Validation(
            "the oracle solver reads coordinates directly; pick sweep or optimal".into(),
        ));
    }
    let check = inst.len() <= ADVERSARY_CHECK_MAX_N;
    let mut adv = Adversary::new(inst, auto_tester(inst).as_mut());
    if check {
        adv = adv.with_invariant_checks();
    }
    let solved = solve(inst, &adv, solver, cfg, false)?;
    let out = adv.finalize()?;
    let sigma_s = out.permuted(inst);
    let reference: Vec<PointId> = if inst.len() <= ADVERSARY_ORACLE_MAX_N {
        oracle_participating(&sigma_s).into_iter().collect()
    } else {
        report_participating_sweep(&rectvis::RawOracle(&sigma_s))
    };
    let report = AdversaryReport {
        replay_mismatches: out.replay_mismatches(inst),
        output_correct: reference == solved.participating,
        sigma: out.sigma,
        counters: out.counters,
        chips_bound_holds: out.chips_bound_holds,
        invariant_checked: check,
    };
    Ok((report, solved))
}

/// Runs `points`, `pairs`, `entropy` or `adversary` on a file.
pub fn run_solve(command: &str, args: &SolveArgs) -> Result<Report, CliError> {
    let (inst, input_digest) = read_instance(&args.input, args.dedupe_ties)?;
    let cfg = args.flags.config()?;
    let solver = args.flags.solver;
    let start = Instant::now();
    let counting = CountingOracle::new(&inst);
    let (solved, entropy, adversary) = match command {
        "points" => (solve(&inst, &counting, solver, &cfg, false)?, None, None),
        "pairs" => (solve(&inst, &counting, solver, &cfg, true)?, None, None),
        "entropy" => {
            let s = solve(&inst, &counting, solver, &cfg, false)?;
            let e = entropy_report(&inst, &s.participating);
            (s, Some(e), None)
        }
        "adversary" => {
            let (a, s) = adversary_report(&inst, solver, &cfg)?;
            (s, None, Some(a))
        }
        other => return Err(CliError::Validation(format!("unknown command {other}"))),
    };
    let report = Report {
        schema: SCHEMA,
        command: command.to_string(),
        input_digest,
        solver,
        n: inst.len(),
        h: solved.participating.len(),
        participating: solved.participating,
        pairs: solved.pairs.map(|p| p.into_iter().collect()),
        comparisons: solved.comparisons,
        rounds: solved.rounds,
        entropy,
        adversary,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    if let Some(a) = &report.adversary {
        if a.replay_mismatches > 0 || a.counters.invariant_violations > 0 || !a.output_correct {
            return Err(CliError::Internal(format!(
                "adversary run inconsistent: {} replay mismatches, {} invariant violations, output correct = {}",
                a.replay_mismatches, a.counters.invariant_violations, a.output_correct
            )));
        }
    }
    if let Some(e) = &report.entropy {
        if !(e.pikd.respectful && e.slab.respectful) {
            return Err(CliError::Internal(
                "constructed partition is not respectful".into(),
            ));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub solver: Solver,
    pub comparisons: Option<u64>,
    pub h: usize,
    #[serde(rename = "H_pikd")]
    pub h_pikd: f64,
    #[serde(rename = "nH1")]
    pub n_h1: f64,
}

/// One row per (size, cluster count, solver). `n` is the generated instance
/// size; `k` is 0 for families without clusters.
pub fn run_bench(args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    let flags = SolverFlags {
        solver: Solver::Optimal,
        emptiness: args.emptiness,
        delta: args.delta,
    };
    let cfg = flags.config()?;
    let ks: Vec<usize> = if args.family == Family::DiagClusters {
        args.k.clone()
    } else {
        vec![0]
    };
    let mut rows = Vec::new();
    for &n in &args.n {
        for &k in &ks {
            let inst = generate(&GenParams {
                family: args.family,
                n,
                k,
                seed: args.seed,
            })?;
            let pikd = build_pikd_partition(&inst, auto_tester(&inst).as_mut());
            let h_pikd = partition_entropy(&pikd, inst.len());
            for &solver in &args.solvers {
                let o = CountingOracle::new(&inst);
                let s = solve(&inst, &o, solver, &cfg, false)?;
                rows.push(BenchRow {
                    family: args.family.to_string(),
                    n: inst.len(),
                    k,
                    seed: args.seed,
                    solver,
                    comparisons: s.comparisons,
                    h: s.participating.len(),
                    h_pikd,
                    n_h1: inst.len() as f64 * (h_pikd + 1.0),
                });
            }
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) if p != Path::new("-") => fs::write(p, text).map_err(|e| io_err(p, e)),
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Validation(format!("stdout: {e}")))
        }
    }
}

/// Executes a parsed command line, writing results to files or stdout.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Command::Gen(g) => {
            let inst = generate(&GenParams {
                family: g.family,
                n: g.n,
                k: g.k,
                seed: g.seed,
            })?;
            emit(g.out.as_deref(), &inst.to_point_file())
        }
        Command::Bench(b) => emit(b.out.as_deref(), &bench_csv(&run_bench(b)?)?),
        Command::Points(a) | Command::Pairs(a) | Command::Entropy(a) | Command::Adversary(a) => {
            let name = match &cli.cmd {
                Command::Points(_) => "points",
                Command::Pairs(_) => "pairs",
                Command::Entropy(_) => "entropy",
                _ => "adversary",
            };
            let report = run_solve(name, a)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Internal(e.to_string()))?
                + "\n";
            match a.json.as_deref() {
                Some(p) if p == Path::new("-") => emit(None, &json),
                Some(p) => {
                    emit(Some(p), &json)?;
                    emit(None, &(report.summary() + "\n"))
                }
                None => emit(None, &(report.summary() + "\n")),
            }
        }
    }
}
