use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ia_feasibility::bounds::bound_report;
use ia_feasibility::channel::{build_blocks, check_psi, diversity_order, sample_instance, ChannelFamily};
use ia_feasibility::error::{Error, Result};
use ia_feasibility::io::{blocks_json, load_instance, read_json, save_instance, write_json, BeamsFile};
use ia_feasibility::lifted::{
    check_lifted, dimension_audit, lemma_implication_test, lifted_receivers, independent_of, LiftedInstance,
};
use ia_feasibility::linalg::RANK_TOL;
use ia_feasibility::solver::{leakage, polish, solve, SolverConfig, POLISH_TARGET};
use ia_feasibility::support::{
    build_zf_system, enumerate_block_patterns, improper_everywhere, survives, PatternFile, DEFAULT_PATTERN_BUDGET,
    IMPROPER_MAX_VARS,
};
use ia_feasibility::sweep::{run_sweep, SweepConfig};

#[derive(Parser)]
#[command(name = "iafeas", version, about = "Interference alignment feasibility toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// siso-generic-ext, siso-ltap, siso-block-fading, mimo-constant,
    /// mimo-constant-ext, mimo-generic-ext or acs-constant
    #[arg(long)]
    family: String,
    /// Comma-separated key=value pairs, e.g. `Mt=2,Mr=2` or `N=4,delays=0:1`
    #[arg(long, default_value = "")]
    params: String,
}

impl FamilyArgs {
    fn family(&self) -> Result<ChannelFamily> {
        ChannelFamily::parse(&self.family, &self.params)
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol_leakage: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol_margin: f64,
    /// Seed for the solver's random initializations
    #[arg(long, default_value_t = 0)]
    solver_seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            restarts: self.restarts,
            tol_leakage: self.tol_leakage,
            tol_margin: self.tol_margin,
            seed: self.solver_seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the building blocks of a family, report the diversity order
    /// and full-rank check, and optionally dump the blocks as JSON
    Blocks {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a channel (or load one) and search for an alignment solution
    Solve {
        #[arg(long, required_unless_present = "instance")]
        family: Option<String>,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long = "K", required_unless_present = "instance")]
        k: Option<usize>,
        /// Seed of the sampled channel instance
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Load the channel from an instance file instead of sampling
        #[arg(long, conflicts_with_all = ["family", "k"])]
        instance: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the beams and report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the channel instance here
        #[arg(long)]
        save_instance: Option<PathBuf>,
    },
    /// Counting analysis of the zero-forcing system and support patterns
    Supports {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long = "K")]
        k: usize,
        /// Enumerate every block-support pattern
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value_t = DEFAULT_PATTERN_BUDGET)]
        budget: u128,
        /// Evaluate one pattern file ({R, S} or {Rb, Sb}, 0-based)
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Original and lifted independence checks on saved beams. The beams are
    /// first refined by further alternating steps so that alignment
    /// residuals sit well below the rank tolerance
    LiftedCheck {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        beams: PathBuf,
        /// Relative tolerance for zero-forcing and orthogonality tests
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Check the beams as loaded instead of refining them first
        #[arg(long)]
        no_polish: bool,
    },
    /// Closed-form bounds for a family
    Bounds {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo feasibility sweep driven by a key=value config file
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Blocks { family, out } => {
            let family = family.family()?;
            let blocks = build_blocks(&family)?;
            if let Some(path) = out {
                std::fs::write(path, blocks_json(&blocks)? + "\n")?;
            }
            print_json(&json!({
                "family": family.to_string(),
                "Nr": blocks.nr(),
                "Nt": blocks.nt(),
                "L": blocks.l(),
                "diversity_order": diversity_order(&blocks, RANK_TOL),
                "full_rank_combination": check_psi(&blocks, 8, 0x5eed, RANK_TOL),
            }))?;
        }
        Command::Solve { family, params, k, seed, instance, solver, out, save_instance: save } => {
            let ch = match instance {
                Some(path) => load_instance(&path)?,
                None => {
                    let family = FamilyArgs { family: family.unwrap_or_default(), params }.family()?;
                    let blocks = Arc::new(build_blocks(&family)?);
                    sample_instance(&blocks, k.unwrap_or(0), seed)?
                }
            };
            let sol = solve(&ch, &solver.config())?;
            if let Some(path) = out {
                write_json(&path, &BeamsFile::new(&sol.beams, Some(sol.report.clone())))?;
            }
            if let Some(path) = save {
                save_instance(&path, &ch)?;
            }
            print_json(&sol.report)?;
        }
        Command::Supports { family, k, enumerate, budget, pattern } => {
            let family = family.family()?;
            if let Some(path) = pattern {
                let file: PatternFile = read_json(&path)?;
                print_json(&file.evaluate(&family)?)?;
            } else if enumerate {
                let mut total = 0usize;
                let mut ruled_out = 0usize;
                let mut audit_failed = 0usize;
                for (p, report) in enumerate_block_patterns(&family, k, budget)? {
                    total += 1;
                    ruled_out += report.ruled_out as usize;
                    audit_failed += (!report.ruled_out && report.audit == Some(false)) as usize;
                    let mut record = serde_json::to_value(&report)?;
                    record["Rb"] = json!(p.rb);
                    record["Sb"] = json!(p.sb);
                    record["survives"] = json!(survives(&report));
                    out!("{}", serde_json::to_string(&record)?);
                }
                eprintln!(
                    "{total} patterns: {ruled_out} ruled out by counting, {audit_failed} fail the audit, {} survive",
                    total - ruled_out - audit_failed
                );
            } else {
                let sys = build_zf_system(&family, k)?;
                let improper = if sys.n <= IMPROPER_MAX_VARS { Some(improper_everywhere(&sys)?) } else { None };
                print_json(&json!({
                    "family": family.to_string(),
                    "K": k,
                    "n": sys.n,
                    "m": sys.m,
                    "constant_terms": sys.has_constant.iter().filter(|&&c| c).count(),
                    "improper_everywhere": improper,
                }))?;
            }
        }
        Command::LiftedCheck { instance, beams, tol, no_polish } => {
            let ch = load_instance(&instance)?;
            let loaded = read_json::<BeamsFile>(&beams)?.beams();
            let leakage_before = leakage(&ch, &loaded)?;
            let beams = if no_polish { loaded } else { polish(&ch, &loaded, POLISH_TARGET, 20_000)? };
            let implication = lemma_implication_test(&ch, &beams.v, RANK_TOL)?;
            let lifted = LiftedInstance::from_channel(&ch, &beams.v)?;
            let per_user: Vec<_> = (0..ch.k())
                .map(|rx| {
                    let others = (0..ch.k()).filter(|&tx| tx != rx);
                    let orig: Vec<_> = others.clone().map(|tx| ch.h(rx, tx) * &beams.v[tx]).collect();
                    let lift: Vec<_> = others.map(|tx| lifted.lifted(rx, tx)).collect();
                    json!({
                        "k": rx,
                        "original": independent_of(&(ch.h(rx, rx) * &beams.v[rx]), &orig, RANK_TOL),
                        "lifted": independent_of(&lifted.lifted(rx, rx), &lift, RANK_TOL),
                    })
                })
                .collect();
            let audit = if beams.u.len() == ch.k() {
                match dimension_audit(&lifted_receivers(&ch, &beams.u), &lifted, tol) {
                    Ok(a) => json!({ "holds": a.holds(), "users": a.users }),
                    Err(e) => json!({ "error": e.to_string() }),
                }
            } else {
                json!(null)
            };
            print_json(&json!({
                "leakage_loaded": leakage_before,
                "leakage_checked": leakage(&ch, &beams)?,
                "implication": implication,
                "lifted": check_lifted(&lifted, RANK_TOL),
                "per_user": per_user,
                "dimension_audit": audit,
            }))?;
        }
        Command::Bounds { family, k, json } => {
            let report = bound_report(&family.family()?, k)?;
            if json {
                print_json(&report)?;
            } else {
                out!("{}", report.family);
                out!("  N = {}, L = {}, T = {}", report.n, report.l, report.t);
                out!("  upper K      {:>10}", report.upper_k);
                out!("  achievable K {:>10}", report.achievable_k);
                out!("  DoF upper    {:>10.4}", report.dof_upper);
                out!("  DoF lower    {:>10.4}", report.dof_lower);
                for e in &report.formula_tags {
                    out!("  {:<52} {:>10}", e.tag, e.value);
                }
                for n in &report.notes {
                    out!("  note: {n}");
                }
            }
        }
        Command::Sweep { config, resume, jobs } => {
            let mut cfg = SweepConfig::load(&config)?;
            cfg.resume |= resume;
            if jobs.is_some() {
                cfg.jobs = jobs;
            }
            let summary = run_sweep(&cfg)?;
            for s in &summary.per_k {
                out!("K = {:>3}  feasible {:>4}/{:<4} ({:.3})", s.k, s.feasible, s.trials, s.feasible_fraction);
            }
            match summary.empirical_k_star {
                Some(k) => out!("empirical K* = {k}"),
                None => out!("empirical K* undefined (no K reached one half)"),
            }
            for v in &summary.bound_violations {
                out!("bound violation: {v}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 3,
                _ => 2,
            })
        }
    }
}
