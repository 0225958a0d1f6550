use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use flagft::circuits::{build_round, count_locations, dump_circuit, FlagPolicy, LocationCensus};
use flagft::codes::{build_concat_steane49_with, code_by_name, Steane49Ordering, CODE_NAMES};
use flagft::decode::{build_lut, code_capacity_lut, LookupTable};
use flagft::faults::{Distinguishability, FaultContext};
use flagft::montecarlo::{
    collect_failures, parse_csv, pseudothreshold, run_code_capacity_trial, run_sweep_points, to_csv, ExperimentConfig,
    Protocol, Regime, SweepConfig, SweepRow,
};
use flagft::nogo::{build_w2l_w4l, exhaustive_search, verify_extension, ORDERINGS};
use flagft::{Error, StabilizerCode};

#[derive(Parser)]
#[command(name = "flagft", version, about = "Flag-qubit syndrome extraction: verification, decoding tables and Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Code name (see `flagft code --list`).
    #[arg(long, default_value = "steane49")]
    code: String,
    /// `table`, `swapped` (steane49 only) or a code JSON file whose
    /// generators list the same supports in a different CNOT order.
    #[arg(long, default_value = "table")]
    ordering: String,
    /// Flag CNOT pair `s,e` for the highest-weight generators.
    #[arg(long, value_parser = parse_pair)]
    flag_pair: Option<(usize, usize)>,
}

#[derive(Subcommand)]
enum Command {
    /// Code parameters, generator weights and fault-location census.
    Code {
        #[command(flatten)]
        code: CodeArgs,
        /// List known code names and exit.
        #[arg(long)]
        list: bool,
        /// Write the code definition as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Print the extraction circuit of this round index.
        #[arg(long)]
        dump_circuit: Option<usize>,
    },
    /// Distinguishability of all combinations of up to t faults.
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long = "t", default_value_t = 4)]
        t: usize,
        /// Search for the effective distance up to this many faults instead.
        #[arg(long)]
        effective_distance: Option<usize>,
        #[arg(long, default_value_t = 1 << 27)]
        max_entries: usize,
        /// Write the JSON result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build or inspect lookup-table files.
    Lut {
        #[command(subcommand)]
        action: LutCmd,
    },
    /// Monte Carlo sweep over physical error rates.
    Simulate(SimArgs),
    /// Pseudothreshold from a sweep CSV.
    Threshold {
        csv: PathBuf,
    },
    /// Single-flag no-go search for 4.8.8 color codes (d = 5) or the
    /// extension check (d = 7, 9).
    Nogo {
        d: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the full JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LutCmd {
    Build {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long = "t", default_value_t = 4)]
        t: usize,
        #[arg(long, default_value_t = 1 << 27)]
        max_entries: usize,
        #[arg(long)]
        out: PathBuf,
    },
    Info {
        #[command(flatten)]
        code: CodeArgs,
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Circuit,
    CodeCapacity,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Comma-separated physical error rates.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long, value_enum, default_value = "circuit")]
    regime: RegimeArg,
    #[arg(long = "t", default_value_t = 4)]
    t: usize,
    #[arg(long, default_value_t = 3)]
    mim_radius: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_samples: u64,
    #[arg(long, default_value_t = 1000)]
    failure_target: u64,
    /// Count logical X failures as well.
    #[arg(long)]
    both_observables: bool,
    /// Experiment config JSON; replaces the code, grid and sampling flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lookup-table file, loaded if present and written otherwise.
    #[arg(long)]
    lut: Option<PathBuf>,
    /// Directory for per-point checkpoints keyed by the config hash.
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    /// Write up to 20 failing trials per point as replayable JSON.
    #[arg(long)]
    replay_out: Option<PathBuf>,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected s,e")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

/// Failure categories mapped to exit codes.
enum Fail {
    Violated(String),
    Usage(String),
    Resource(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget(_) => Fail::Resource(e.to_string()),
            Error::NotDistinguishable(_) | Error::NoCrossing => Fail::Violated(e.to_string()),
            _ => Fail::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Code { code, list, export, dump_circuit } => cmd_code(&code, list, export, dump_circuit),
        Command::Verify { code, t, effective_distance, max_entries, out } => {
            cmd_verify(&code, t, effective_distance, max_entries, out)
        }
        Command::Lut { action } => cmd_lut(action),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Threshold { csv } => cmd_threshold(&csv),
        Command::Nogo { d, workers, out } => cmd_nogo(d, workers, out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Violated(m)) => {
            eprintln!("violated: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Resource(m)) => {
            eprintln!("resource cap: {m}");
            ExitCode::from(3)
        }
    }
}

fn load_code(a: &CodeArgs) -> Result<StabilizerCode, Fail> {
    let base = code_by_name(&a.code)?;
    match a.ordering.as_str() {
        "table" => Ok(base),
        "swapped" if a.code == "steane49" => Ok(build_concat_steane49_with(Steane49Ordering::SwapFirstTwo)),
        "swapped" => Err(Fail::Usage(format!("ordering `swapped` applies to steane49, not {}", a.code))),
        path => {
            let text = fs::read_to_string(path)?;
            let file = StabilizerCode::from_json(&text)?;
            Ok(base.with_orders(&file.name, file.z_supports, file.x_supports)?)
        }
    }
}

fn policy(code: &StabilizerCode, a: &CodeArgs) -> FlagPolicy {
    match a.flag_pair {
        None => FlagPolicy::Straddle,
        Some(pair) => {
            let w = code.z_supports.iter().chain(&code.x_supports).map(Vec::len).max().unwrap_or(0);
            FlagPolicy::ByWeight(BTreeMap::from([(w, pair)]))
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct CodeReport {
    name: String,
    n: usize,
    k: usize,
    d: usize,
    weight_histogram: Vec<(usize, usize)>,
    circuits: usize,
    ancillas: usize,
    census: LocationCensus,
}

fn cmd_code(a: &CodeArgs, list: bool, export: Option<PathBuf>, dump: Option<usize>) -> CmdResult {
    if list {
        for n in CODE_NAMES {
            println!("{n}");
        }
        return Ok(());
    }
    let code = load_code(a)?;
    let sched = build_round(&code, &policy(&code, a))?;
    if let Some(c) = dump {
        let circ = sched.circuits.get(c).ok_or_else(|| Fail::Usage(format!("circuit {c} out of range")))?;
        print!("{}", dump_circuit(&code.name, &a.ordering, circ));
        return Ok(());
    }
    if let Some(p) = export {
        fs::write(p, code.to_json()?)?;
    }
    let report = CodeReport {
        name: code.name.clone(),
        n: code.n,
        k: code.k,
        d: code.d,
        weight_histogram: code.weight_histogram(),
        circuits: sched.circuits.len(),
        ancillas: sched.num_ancillas(),
        census: count_locations(&sched),
    };
    eprintln!(
        "{}: [[{},{},{}]] Z: {} gates / {} prep-meas, X: {} gates / {} prep-meas",
        code.name, code.n, code.k, code.d, report.census.z.gates, report.census.z.prep_meas, report.census.x.gates,
        report.census.x.prep_meas
    );
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_verify(a: &CodeArgs, t: usize, eff: Option<usize>, max_entries: usize, out: Option<PathBuf>) -> CmdResult {
    let code = load_code(a)?;
    let sched = build_round(&code, &policy(&code, a))?;
    let ctx = FaultContext::new(&code, &sched)?;
    let start = Instant::now();
    if let Some(f_max) = eff {
        let (dist, witness) = ctx.effective_distance(f_max, max_entries)?;
        eprintln!("effective distance {}{} ({:.1}s)", if witness.is_none() { ">=" } else { "" }, dist, start.elapsed().as_secs_f64());
        let v = serde_json::json!({
            "code": code.name, "ordering": a.ordering, "f_max": f_max,
            "effective_distance": dist, "lower_bound_only": witness.is_none(), "witness": witness,
        });
        emit(&out, &serde_json::to_string_pretty(&v)?)?;
        return if dist >= code.d { Ok(()) } else { Err(Fail::Violated(format!("effective distance {dist} < {}", code.d))) };
    }
    if 2 * t + 1 > code.d {
        return Err(Fail::Usage(format!("t = {t} exceeds (d-1)/2 for d = {}", code.d)));
    }
    match ctx.check_distinguishable(t, max_entries)? {
        Distinguishability::Ok { x_entries, z_entries } => {
            eprintln!("distinguishable at t={t} ({:.1}s)", start.elapsed().as_secs_f64());
            let v = serde_json::json!({
                "code": code.name, "ordering": a.ordering, "t": t, "distinguishable": true,
                "x_entries": x_entries, "z_entries": z_entries,
            });
            emit(&out, &serde_json::to_string_pretty(&v)?)
        }
        Distinguishability::Violated(ce) => {
            let v = serde_json::json!({
                "code": code.name, "ordering": a.ordering, "t": t, "distinguishable": false, "counterexample": ce,
            });
            emit(&out, &serde_json::to_string_pretty(&v)?)?;
            Err(Fail::Violated(format!(
                "{} + {} faults share a full syndrome; merged set of {} faults is a silent logical: {}",
                ce.faults_a.len(),
                ce.faults_b.len(),
                ce.merged_faults,
                ce.merged_is_silent_logical()
            )))
        }
    }
}

#[derive(Serialize)]
struct LutReport {
    code: String,
    code_id: String,
    t: usize,
    entries: usize,
    x_entries: usize,
    z_entries: usize,
    resident_bytes: usize,
    level_counts: [Vec<u64>; 2],
}

fn lut_report(code: &StabilizerCode, lut: &LookupTable) -> LutReport {
    LutReport {
        code: code.name.clone(),
        code_id: format!("{:016x}", lut.code_id),
        t: lut.t,
        entries: lut.len(),
        x_entries: lut.sectors[0].table.len(),
        z_entries: lut.sectors[1].table.len(),
        resident_bytes: lut.resident_bytes(),
        level_counts: lut.level_counts(),
    }
}

fn cmd_lut(action: LutCmd) -> CmdResult {
    match action {
        LutCmd::Build { code: a, t, max_entries, out } => {
            let code = load_code(&a)?;
            let sched = build_round(&code, &policy(&code, &a))?;
            let ctx = FaultContext::new(&code, &sched)?;
            let start = Instant::now();
            let lut = build_lut(&ctx, t, max_entries)?;
            eprintln!("built {} entries in {:.1}s", lut.len(), start.elapsed().as_secs_f64());
            let mut w = BufWriter::new(File::create(&out)?);
            lut.write_to(&mut w)?;
            w.flush()?;
            println!("{}", serde_json::to_string_pretty(&lut_report(&code, &lut))?);
            Ok(())
        }
        LutCmd::Info { code: a, file } => {
            let code = load_code(&a)?;
            let sched = build_round(&code, &policy(&code, &a))?;
            let ctx = FaultContext::new(&code, &sched)?;
            let lut = LookupTable::read_from(&mut BufReader::new(File::open(&file)?), &ctx)?;
            println!("{}", serde_json::to_string_pretty(&lut_report(&code, &lut))?);
            Ok(())
        }
    }
}

fn experiment(args: &SimArgs) -> Result<ExperimentConfig, Fail> {
    if let Some(p) = &args.config {
        let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(p)?)?;
        return Ok(cfg);
    }
    if args.p.is_empty() {
        return Err(Fail::Usage("no error rates given (--p)".into()));
    }
    Ok(ExperimentConfig {
        code: args.code.code.clone(),
        ordering: args.code.ordering.clone(),
        flag_policy: match args.code.flag_pair {
            None => "straddle".into(),
            Some((s, e)) => format!("{s},{e}"),
        },
        regime: match args.regime {
            RegimeArg::Circuit => Regime::CircuitLevel,
            RegimeArg::CodeCapacity => Regime::CodeCapacity,
        },
        ps: args.p.clone(),
        t: args.t,
        mim_radius: args.mim_radius,
        seed: args.seed,
        failure_target: args.failure_target,
        max_samples: args.max_samples,
    })
}

fn load_or_build_lut(path: Option<&Path>, ctx: &FaultContext, t: usize) -> Result<LookupTable, Fail> {
    if let Some(p) = path.filter(|p| p.exists()) {
        eprintln!("loading table {}", p.display());
        let lut = LookupTable::read_from(&mut BufReader::new(File::open(p)?), ctx)?;
        if lut.t != t {
            return Err(Fail::Usage(format!("table file has t = {}, config wants {t}", lut.t)));
        }
        return Ok(lut);
    }
    let start = Instant::now();
    let lut = build_lut(ctx, t, 1 << 27)?;
    eprintln!("built table: {} entries in {:.1}s", lut.len(), start.elapsed().as_secs_f64());
    if let Some(p) = path {
        let mut w = BufWriter::new(File::create(p)?);
        lut.write_to(&mut w)?;
        w.flush()?;
    }
    Ok(lut)
}

fn cmd_simulate(args: &SimArgs) -> CmdResult {
    let exp = experiment(args)?;
    let code_args = CodeArgs {
        code: exp.code.clone(),
        ordering: exp.ordering.clone(),
        flag_pair: match exp.flag_policy.as_str() {
            "straddle" => None,
            s => Some(parse_pair(s).map_err(Fail::Usage)?),
        },
    };
    let code = load_code(&code_args)?;
    let sweep = SweepConfig {
        ps: exp.ps.clone(),
        max_samples: exp.max_samples,
        failure_target: exp.failure_target,
        seed: exp.seed,
        workers: args.workers,
        ..Default::default()
    };
    // Completed points from an earlier run of the same config.
    let ckpt = match &args.checkpoint_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let key = crc32fast::hash(serde_json::to_string(&(&exp, args.both_observables))?.as_bytes());
            Some(dir.join(format!("sweep-{key:08x}.csv")))
        }
        None => None,
    };
    let mut done: Vec<SweepRow> = match &ckpt {
        Some(p) if p.exists() => parse_csv(&fs::read_to_string(p)?)?,
        _ => Vec::new(),
    };
    let todo: Vec<usize> = (0..exp.ps.len()).filter(|&i| !done.iter().any(|r| r.p == exp.ps[i])).collect();
    if !done.is_empty() {
        eprintln!("resuming: {} of {} points from checkpoint", done.len(), exp.ps.len());
    }
    let save = |rows: &[SweepRow]| -> CmdResult {
        if let Some(p) = &ckpt {
            fs::write(p, to_csv(rows))?;
        }
        Ok(())
    };
    let start = Instant::now();
    let mut replays = Vec::new();
    match exp.regime {
        Regime::CodeCapacity => {
            let cc = code_capacity_lut(&code, (code.d - 1) / 2)?;
            for &i in &todo {
                let rows = run_sweep_points(&sweep, &[i], |p, rng| {
                    run_code_capacity_trial(&cc, p, exp.mim_radius, args.both_observables, rng)
                })?;
                eprintln!("p={} done ({:.1}s)", exp.ps[i], start.elapsed().as_secs_f64());
                done.extend(rows);
                save(&done)?;
            }
        }
        Regime::CircuitLevel => {
            let sched = build_round(&code, &policy(&code, &code_args))?;
            let ctx = FaultContext::new(&code, &sched)?;
            let lut = load_or_build_lut(args.lut.as_deref(), &ctx, exp.t)?;
            let cc = code_capacity_lut(&code, (code.d - 1) / 2)?;
            let mut proto = Protocol::new(&ctx, &lut, &cc);
            proto.mim_radius = exp.mim_radius;
            proto.both_observables = args.both_observables;
            for &i in &todo {
                let rows = run_sweep_points(&sweep, &[i], |p, rng| proto.run_trial(p, rng))?;
                eprintln!("p={} done ({:.1}s)", exp.ps[i], start.elapsed().as_secs_f64());
                done.extend(rows);
                save(&done)?;
            }
            if args.replay_out.is_some() {
                for (i, &p) in exp.ps.iter().enumerate() {
                    replays.extend(collect_failures(&proto, exp.seed, i as u64, p, 20, exp.max_samples));
                }
            }
        }
    }
    if let Some(p) = &args.replay_out {
        fs::write(p, serde_json::to_string_pretty(&replays)?)?;
    }
    done.sort_by(|a, b| a.p.total_cmp(&b.p));
    let csv = to_csv(&done);
    match &args.out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_threshold(csv: &Path) -> CmdResult {
    let rows = parse_csv(&fs::read_to_string(csv)?)?;
    let pt = pseudothreshold(&rows)?;
    eprintln!("pseudothreshold {:.4e} +/- {:.2e}", pt.value, pt.err);
    println!("{}", serde_json::to_string(&pt)?);
    Ok(())
}

fn cmd_nogo(d: usize, workers: usize, out: Option<PathBuf>) -> CmdResult {
    let start = Instant::now();
    match d {
        5 => {
            let code = flagft::codes::build_color488(5)?;
            let sets = build_w2l_w4l(&code)?;
            let report = exhaustive_search(&code, &sets, ORDERINGS, workers)?;
            eprintln!(
                "W2L={} W4L={} case(a)={} case(b)={} ({:.1}s)",
                report.w2l,
                report.w4l,
                report.case_a,
                report.case_b,
                start.elapsed().as_secs_f64()
            );
            if let Some(p) = &out {
                fs::write(p, serde_json::to_string_pretty(&report)?)?;
            }
            println!("{}", report.summary_line());
            if report.passes.is_empty() {
                Ok(())
            } else {
                Err(Fail::Violated(format!("{} configurations preserve the distance", report.passes.len())))
            }
        }
        7 | 9 => {
            let report = verify_extension(d, workers)?;
            eprintln!("({:.1}s)", start.elapsed().as_secs_f64());
            if let Some(p) = &out {
                fs::write(p, serde_json::to_string_pretty(&report)?)?;
            }
            println!("{}", report.summary_line());
            if report.all_logical && report.not_extendable.is_empty() && report.search.passes.is_empty() {
                Ok(())
            } else {
                Err(Fail::Violated("extension check failed".into()))
            }
        }
        _ => Err(Fail::Usage(format!("unsupported distance {d} (use 5, 7 or 9)"))),
    }
}
