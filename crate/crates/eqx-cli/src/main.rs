//! `eqx` — solve, check, decide, and generate EQx allocation problems from
//! the command line.
//!
//! Machine-readable JSON goes to stdout; human summaries go to stderr. Exit
//! codes: 0 success (and the checked notion holds), 1 failure of the notion
//! or an internal arithmetic error, 2 precondition or argument violations,
//! 3 unreadable or malformed files, 4 exhausted budgets.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use eqx_core::{
    dp, gen, io, monotone, nonmonotone, oracle, verify, Allocation, Direction, Epsilon, Error,
    Instance, Value,
};

/// Budget for exhaustive enumeration and step-limited searches, unless
/// overridden by --budget or the EQX_BUDGET environment variable.
const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "eqx", version, about = "EQx allocation solver toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver on an instance file and verify its output.
    Solve(SolveArgs),
    /// Check an allocation file against an instance for a fairness notion.
    Check(CheckArgs),
    /// Decide whether an EQx allocation exists at all.
    Exists(ExistsArgs),
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run the built-in cross-validation battery.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    /// Greedy add-and-fix for monotone valuations.
    AddFix,
    /// The (1∓ε)-approximate add-and-fix.
    AddFixApprox,
    /// Two-agent two-way greedy for additive objective instances.
    TwoWay,
    /// Local search for additive objective goods plus one chore.
    SingleChore,
    /// Local search for additive objective chores plus one good.
    SingleGood,
    /// Exhaustive leximin++ maximization.
    Leximin,
    /// First EQx allocation by brute-force enumeration.
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Goods,
    Chores,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NotionArg {
    Eqx,
    Efx,
    Equitable,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dp,
    Brute,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Approximation parameter a/b for add-fix-approx (0 = exact).
    #[arg(long, default_value = "0")]
    epsilon: String,
    /// Monotone direction for add-fix variants; ordering direction for
    /// leximin (chores = identically-valued chores ordering).
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Enumeration / step budget override.
    #[arg(long)]
    budget: Option<u64>,
    /// Accepted for interface stability; output is deterministic regardless.
    #[arg(long)]
    seedless: bool,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    allocation: PathBuf,
    #[arg(long, value_enum, default_value_t = NotionArg::Eqx)]
    notion: NotionArg,
    /// Check the (1−ε)- or (1+ε)-relaxation instead of exact EQx.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, value_enum, default_value_t = DirectionArg::Goods)]
    direction: DirectionArg,
}

#[derive(Args)]
struct ExistsArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
    method: MethodArg,
    /// Reconstruct and emit a witness allocation when one exists.
    #[arg(long)]
    witness: bool,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKindArg {
    Random,
    Partition,
    ThreePartition,
    Table2,
    Table4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    MonotoneGoods,
    MonotoneChores,
    ObjectiveMixed,
    Subjective,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Additive,
    BudgetAdditive,
    PartitionMatroidRank,
    ExplicitTable,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKindArg,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 6)]
    items: usize,
    #[arg(long, value_enum, default_value_t = ClassArg::MonotoneGoods)]
    class: ClassArg,
    #[arg(long, value_enum, default_value_t = KindArg::Additive)]
    valuation: KindArg,
    #[arg(long, default_value_t = 0)]
    value_lo: Value,
    #[arg(long, default_value_t = 20)]
    value_hi: Value,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated positive integers for --kind partition.
    #[arg(long)]
    multiset: Option<String>,
    /// Comma-separated integers (3n of them) for --kind three-partition.
    #[arg(long)]
    values: Option<String>,
    /// Triple-sum target T for --kind three-partition.
    #[arg(long)]
    target: Option<Value>,
    /// Explicit Δ for --kind three-partition (multiple of 10, > 10nT).
    #[arg(long)]
    delta: Option<Value>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Trim the random sweeps to a handful of seeds.
    #[arg(long)]
    quick: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Check(args) => cmd_check(args),
        Command::Exists(args) => cmd_exists(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Selftest(args) => cmd_selftest(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(error_code(&err))
        }
    }
}

fn error_code(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 3,
        Error::InvalidInput(_) | Error::Precondition(_) | Error::Contract(_) => 2,
        Error::BudgetExceeded(_) => 4,
        Error::Overflow(_) => 1,
    }
}

fn read_file(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn budget_for(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("EQX_BUDGET").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(DEFAULT_BUDGET)
}

fn emit(document: &serde_json::Value, out: Option<&PathBuf>) -> Result<(), Error> {
    let text = format!("{}\n", serde_json::to_string_pretty(document).expect("json"));
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bundle_values(instance: &Instance, allocation: &Allocation) -> Result<Vec<Value>, Error> {
    (0..instance.agent_count())
        .map(|i| instance.valuation(i).eval(allocation.bundle(i)))
        .collect()
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Error> {
    let instance = io::load_instance(&read_file(&args.instance)?)?;
    let epsilon = Epsilon::from_str(&args.epsilon)?;
    let direction = match args.direction {
        Some(DirectionArg::Goods) => Direction::Goods,
        Some(DirectionArg::Chores) => Direction::Chores,
        None => Direction::Goods,
    };
    let budget = budget_for(args.budget);

    let (allocation, stats) = match args.algorithm {
        AlgorithmArg::AddFix => monotone::add_and_fix(&instance, direction)?,
        AlgorithmArg::AddFixApprox => {
            monotone::add_and_fix_approx(&instance, epsilon, direction)?
        }
        AlgorithmArg::TwoWay => nonmonotone::two_way_greedy(&instance)?,
        AlgorithmArg::SingleChore => {
            nonmonotone::single_special_local_search_traced(
                &instance,
                nonmonotone::Special::Chore,
                budget,
            )
            .map(|(a, s, _)| (a, s))?
        }
        AlgorithmArg::SingleGood => {
            nonmonotone::single_special_local_search_traced(
                &instance,
                nonmonotone::Special::Good,
                budget,
            )
            .map(|(a, s, _)| (a, s))?
        }
        AlgorithmArg::Leximin => {
            let sigma = match args.direction {
                Some(DirectionArg::Goods) => nonmonotone::SigmaDirection::GoodsIdentical,
                Some(DirectionArg::Chores) => nonmonotone::SigmaDirection::ChoresIdentical,
                None => {
                    return Err(Error::InvalidInput(
                        "leximin needs --direction (chores = identically-valued chores ordering)"
                            .into(),
                    ))
                }
            };
            let allocation = nonmonotone::leximin_pp(&instance, sigma, budget)?;
            (allocation, zero_stats(&instance)?)
        }
        AlgorithmArg::Brute => {
            let found = oracle::brute_force_eqx(&instance, oracle::BruteMode::Any, budget)?;
            match found.into_iter().next() {
                Some(allocation) => (allocation, zero_stats(&instance)?),
                None => {
                    eprintln!("no EQx allocation exists for this instance");
                    return Ok(1);
                }
            }
        }
    };

    let approximate = args.algorithm == AlgorithmArg::AddFixApprox && !epsilon.is_zero();
    let verification = if approximate {
        verify::check_eps_eqx(&instance, &allocation, epsilon, direction)?
    } else {
        verify::check_eqx(&instance, &allocation)?
    };
    let values = bundle_values(&instance, &allocation)?;
    let document = json!({
        "allocation": io::allocation_value(&allocation),
        "values": values,
        "stats": serde_json::to_value(stats).expect("stats"),
        "verification": serde_json::to_value(&verification).expect("report"),
    });
    emit(&document, args.out.as_ref())?;
    if verification.is_eqx {
        eprintln!("solved: values {values:?}, verification passed");
        Ok(0)
    } else {
        eprintln!("solver output FAILED verification");
        Ok(1)
    }
}

/// Placeholder stats for solvers that have no counters of their own
/// (enumeration-based ones); only v_max and oracle_calls are meaningful.
fn zero_stats(instance: &Instance) -> Result<monotone::SolveStats, Error> {
    let full: BTreeSet<usize> = (0..instance.item_count()).collect();
    let mut v_max: u64 = 0;
    for i in 0..instance.agent_count() {
        v_max = v_max.max(instance.valuation(i).eval(&full)?.unsigned_abs());
    }
    Ok(monotone::SolveStats {
        outer_iterations: 0,
        add_steps: 0,
        fix_steps: 0,
        oracle_calls: instance.oracle_calls(),
        v_max: Value::try_from(v_max).map_err(|_| Error::Overflow("grand bundle magnitude"))?,
        terminated_by: monotone::Termination::EmptyPool,
    })
}

fn cmd_check(args: CheckArgs) -> Result<u8, Error> {
    let instance = io::load_instance(&read_file(&args.instance)?)?;
    let allocation = io::load_allocation(&read_file(&args.allocation)?, instance.item_count())?;
    if allocation.agent_count() != instance.agent_count() {
        return Err(Error::Parse(format!(
            "allocation has {} bundles but the instance has {} agents",
            allocation.agent_count(),
            instance.agent_count()
        )));
    }
    let direction = match args.direction {
        DirectionArg::Goods => Direction::Goods,
        DirectionArg::Chores => Direction::Chores,
    };
    let (holds, document) = match args.notion {
        NotionArg::Equitable => {
            let equitable = verify::check_equitable(&instance, &allocation)?;
            let values = bundle_values(&instance, &allocation)?;
            (equitable, json!({ "equitable": equitable, "values": values }))
        }
        NotionArg::Efx => {
            let report = verify::check_efx(&instance, &allocation)?;
            (report.is_eqx, serde_json::to_value(&report).expect("report"))
        }
        NotionArg::Eqx => {
            let report = match &args.epsilon {
                Some(text) => {
                    let epsilon = Epsilon::from_str(text)?;
                    verify::check_eps_eqx(&instance, &allocation, epsilon, direction)?
                }
                None => verify::check_eqx(&instance, &allocation)?,
            };
            (report.is_eqx, serde_json::to_value(&report).expect("report"))
        }
    };
    emit(&document, None)?;
    Ok(if holds { 0 } else { 1 })
}

fn cmd_exists(args: ExistsArgs) -> Result<u8, Error> {
    let instance = io::load_instance(&read_file(&args.instance)?)?;
    let budget = budget_for(args.budget);
    let (exists, witness) = match args.method {
        MethodArg::Dp => {
            let outcome = dp::dp_exists_with_budget(
                &instance,
                args.witness,
                usize::try_from(budget).unwrap_or(usize::MAX),
            )?;
            (outcome.exists, outcome.witness)
        }
        MethodArg::Brute => {
            let found = oracle::brute_force_eqx(&instance, oracle::BruteMode::Any, budget)?;
            let witness = found.into_iter().next();
            (witness.is_some(), if args.witness { witness } else { None })
        }
    };
    let mut document = json!({ "exists": exists });
    if let Some(witness) = witness {
        document["witness"] = io::allocation_value(&witness);
    }
    emit(&document, None)?;
    eprintln!("EQx allocation {}", if exists { "exists" } else { "does not exist" });
    Ok(0)
}

fn parse_int_list(text: &str) -> Result<Vec<Value>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<Value>()
                .map_err(|e| Error::InvalidInput(format!("`{part}`: {e}")))
        })
        .collect()
}

fn cmd_gen(args: GenArgs) -> Result<u8, Error> {
    let instance = match args.kind {
        GenKindArg::Table2 => gen::canonical("table2")?,
        GenKindArg::Table4 => gen::canonical("table4")?,
        GenKindArg::Partition => {
            let multiset = args.multiset.as_deref().ok_or_else(|| {
                Error::InvalidInput("--kind partition needs --multiset a,b,c".into())
            })?;
            gen::gen_partition_reduction(&parse_int_list(multiset)?)?
        }
        GenKindArg::ThreePartition => {
            let values = args.values.as_deref().ok_or_else(|| {
                Error::InvalidInput("--kind three-partition needs --values".into())
            })?;
            let target = args.target.ok_or_else(|| {
                Error::InvalidInput("--kind three-partition needs --target".into())
            })?;
            gen::gen_3partition_reduction(&parse_int_list(values)?, target, args.delta)?
        }
        GenKindArg::Random => {
            let params = gen::GenParams {
                agents: args.agents,
                items: args.items,
                value_lo: args.value_lo,
                value_hi: args.value_hi,
                class: match args.class {
                    ClassArg::MonotoneGoods => gen::InstanceClass::MonotoneGoods,
                    ClassArg::MonotoneChores => gen::InstanceClass::MonotoneChores,
                    ClassArg::ObjectiveMixed => gen::InstanceClass::ObjectiveMixed,
                    ClassArg::Subjective => gen::InstanceClass::Subjective,
                },
                kind: match args.valuation {
                    KindArg::Additive => gen::ValuationKind::Additive,
                    KindArg::BudgetAdditive => gen::ValuationKind::BudgetAdditive,
                    KindArg::PartitionMatroidRank => gen::ValuationKind::PartitionMatroidRank,
                    KindArg::ExplicitTable => gen::ValuationKind::ExplicitTable,
                },
            };
            gen::gen_random(&params, args.seed)?
        }
    };
    let text = io::save_instance(&instance);
    match &args.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprintln!(
        "generated instance: {} agents, {} items",
        instance.agent_count(),
        instance.item_count()
    );
    Ok(0)
}

fn cmd_selftest(args: SelftestArgs) -> Result<u8, Error> {
    let sweeps: u64 = if args.quick { 10 } else { 100 };
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut record = |name: &str, pass: bool| {
        eprintln!("{} - {name}", if pass { "ok  " } else { "FAIL" });
        checks.push((name.to_string(), pass));
    };

    let table2 = gen::canonical("table2")?;
    let brute_empty = oracle::brute_force_eqx(&table2, oracle::BruteMode::Any, DEFAULT_BUDGET)?
        .is_empty();
    let dp_no = !dp::dp_exists(&table2, false)?.exists;
    record("table2 has no EQx allocation (brute force and dp agree)", brute_empty && dp_no);

    let table4 = gen::canonical("table4")?;
    let leximin =
        nonmonotone::leximin_pp(&table4, nonmonotone::SigmaDirection::ChoresIdentical, 1 << 20)?;
    let leximin_report = verify::check_eqx(&table4, &leximin)?;
    record(
        "table4 leximin++ allocation fails EQx with one chores violation",
        !leximin_report.is_eqx
            && leximin_report.goods_violations.is_empty()
            && leximin_report.chores_violations.len() == 1,
    );
    let (chore_solution, _) =
        nonmonotone::single_special_local_search(&table4, nonmonotone::Special::Chore)?;
    record(
        "table4 single-chore local search finds an EQx allocation",
        verify::check_eqx(&table4, &chore_solution)?.is_eqx,
    );

    let yes = gen::gen_partition_reduction(&[1, 1, 2])?;
    let no = gen::gen_partition_reduction(&[1, 1, 1])?;
    record(
        "partition reduction matches equal-sum splittability",
        dp::dp_exists(&yes, false)?.exists && !dp::dp_exists(&no, false)?.exists,
    );

    let mut monotone_ok = true;
    for seed in 0..sweeps {
        let inst = gen::gen_random(
            &gen::GenParams {
                agents: 3,
                items: 6,
                value_lo: 0,
                value_hi: 20,
                class: gen::InstanceClass::MonotoneGoods,
                kind: gen::ValuationKind::BudgetAdditive,
            },
            seed,
        )?;
        let (allocation, stats) = monotone::add_and_fix(&inst, Direction::Goods)?;
        monotone_ok &= verify::check_eqx(&inst, &allocation)?.is_eqx && stats.fix_steps == 0;
    }
    record("random monotone add-and-fix outputs are EQx without fixing", monotone_ok);

    let mut two_way_ok = true;
    for seed in 0..sweeps {
        let inst = gen::gen_random(
            &gen::GenParams {
                agents: 2,
                items: 7,
                value_lo: 0,
                value_hi: 20,
                class: gen::InstanceClass::ObjectiveMixed,
                kind: gen::ValuationKind::Additive,
            },
            seed,
        )?;
        let (allocation, _) = nonmonotone::two_way_greedy(&inst)?;
        two_way_ok &= verify::check_eqx(&inst, &allocation)?.is_eqx;
    }
    record("random two-way greedy outputs are EQx", two_way_ok);

    let mut dp_ok = true;
    let mut rng = gen::SplitMix64::new(0x5E1F);
    for _ in 0..sweeps {
        let inst = gen::gen_random(
            &gen::GenParams {
                agents: 2,
                items: 1 + (rng.next_below(5) as usize),
                value_lo: 0,
                value_hi: 5,
                class: gen::InstanceClass::Subjective,
                kind: gen::ValuationKind::Additive,
            },
            rng.next_u64(),
        )?;
        let exists = dp::dp_exists(&inst, false)?.exists;
        let brute =
            !oracle::brute_force_eqx(&inst, oracle::BruteMode::Any, DEFAULT_BUDGET)?.is_empty();
        dp_ok &= exists == brute;
    }
    record("dp existence agrees with brute force on random instances", dp_ok);

    let failed = checks.iter().filter(|(_, pass)| !pass).count();
    let document = json!({
        "checks": checks
            .iter()
            .map(|(name, pass)| json!({ "name": name, "pass": pass }))
            .collect::<Vec<_>>(),
        "passed": checks.len() - failed,
        "failed": failed,
    });
    emit(&document, None)?;
    Ok(if failed == 0 { 0 } else { 1 })
}
