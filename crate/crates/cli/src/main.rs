use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use rsimple_core::directed::{default_bound, solve_directed, ColoringChoice, SolverParams};
use rsimple_core::graph::Adjacency;
use rsimple_core::io::{generate, kernel_json, parse_walk, read_instance, read_text, serialize_instance, Generator, GraphInstance, Instance};
use rsimple_core::oracle::{brute_packing_budget, brute_rsimple_max_budget, brute_rsimple_witness, verify_walk, DEFAULT_STATE_BUDGET};
use rsimple_core::packing::{kernelize, solve_packing_budget, DEFAULT_SEARCH_BUDGET};
use rsimple_core::undirected::{default_bound_undirected, solve_undirected, FitThreshold, Pipeline, UndirSolverParams};

#[derive(Parser)]
#[command(name = "rsimple", version, about = "Decide long r-simple paths and multiset packing")]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Directed r-simple k-path.
    SolveDirected(SolveArgs),
    /// Undirected r-simple k-path.
    SolveUndirected {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, value_enum, default_value_t = PipelineArg::Auto)]
        pipeline: PipelineArg,
        #[arg(long, value_enum, default_value_t = FitArg::Half)]
        fit: FitArg,
    },
    /// Multiset packing.
    SolvePacking {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        budget_states: Option<u64>,
    },
    /// Exhaustive search (small instances only).
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        kr: KrArgs,
        /// Also print a walk of maximum size (capped at k).
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        budget_states: Option<usize>,
    },
    /// Emit a generated instance.
    Gen {
        #[command(subcommand)]
        which: GenCommand,
    },
    /// Check a walk against an instance.
    Verify {
        #[arg(long)]
        walk: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        r: Option<BigUint>,
    },
    /// Reduce a packing instance to its kernel.
    Kernelize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    TightnessDirected {
        #[arg(long)]
        r: usize,
    },
    GridPendant {
        #[arg(long)]
        c: usize,
        #[arg(long)]
        r: u64,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Instance file; stdin when absent or "-".
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct KrArgs {
    /// Overrides k from the instance.
    #[arg(long)]
    k: Option<BigUint>,
    /// Overrides r from the instance.
    #[arg(long)]
    r: Option<BigUint>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kr: KrArgs,
    /// Walk-length bound, at most the default.
    #[arg(long)]
    bound: Option<u64>,
    #[arg(long, value_enum, default_value_t = ColoringArg::Auto)]
    coloring: ColoringArg,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on topologies or occurrence sequences examined.
    #[arg(long)]
    budget_states: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColoringArg {
    Auto,
    Exhaustive,
    Injective,
    Randomized,
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineArg {
    Auto,
    General,
    Special,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitArg {
    Half,
    Full,
}

/// JSON to print and the exit code to return.
struct Outcome {
    body: Value,
    code: u8,
}

fn answer(yes: bool, extra: Value) -> Outcome {
    let mut body = json!({ "answer": if yes { "yes" } else { "no" } });
    if let (Some(o), Value::Object(e)) = (body.as_object_mut(), extra) {
        o.extend(e);
    }
    Outcome { body, code: if yes { 0 } else { 1 } }
}

fn plain(body: Value) -> Outcome {
    Outcome { body, code: 0 }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn instance(input: &InputArgs) -> Result<Instance, String> {
    read_instance(input.input.as_deref()).map_err(err)
}

fn kr<G>(inst: &GraphInstance<G>, over: &KrArgs) -> Result<(BigUint, BigUint), String> {
    let k = over.k.clone().or_else(|| inst.k.clone()).ok_or("k is missing (give it in the instance or with --k)")?;
    let r = over.r.clone().or_else(|| inst.r.clone()).ok_or("r is missing (give it in the instance or with --r)")?;
    Ok((k, r))
}

fn params(a: &SolveArgs) -> SolverParams {
    let mut p = SolverParams {
        bound_override: a.bound,
        coloring: match a.coloring {
            ColoringArg::Auto => ColoringChoice::Auto,
            ColoringArg::Exhaustive => ColoringChoice::Exhaustive,
            ColoringArg::Injective => ColoringChoice::Injective,
            ColoringArg::Randomized => ColoringChoice::Randomized,
        },
        trials: a.trials,
        seed: a.seed,
        ..SolverParams::default()
    };
    if let Some(b) = a.budget_states {
        p.work_budget = b;
    }
    p
}

fn bound_used(default: BigUint, a: &SolveArgs) -> String {
    a.bound.map(BigUint::from).unwrap_or(default).to_string()
}

fn run(cli: Cli) -> Result<Outcome, String> {
    match cli.cmd {
        Command::SolveDirected(a) => {
            let Instance::Digraph(inst) = instance(&a.input)? else {
                return Err("solve-directed expects a digraph instance".into());
            };
            let (k, r) = kr(&inst, &a.kr)?;
            let yes = solve_directed(&inst.graph, &k, &r, &params(&a)).map_err(err)?;
            Ok(answer(yes, json!({ "bound_used": bound_used(default_bound(&k, &r), &a) })))
        }
        Command::SolveUndirected { solve: a, pipeline, fit } => {
            let Instance::Graph(inst) = instance(&a.input)? else {
                return Err("solve-undirected expects a graph instance".into());
            };
            let (k, r) = kr(&inst, &a.kr)?;
            let p = UndirSolverParams {
                base: params(&a),
                pipeline: match pipeline {
                    PipelineArg::Auto => Pipeline::Auto,
                    PipelineArg::General => Pipeline::General,
                    PipelineArg::Special => Pipeline::Special,
                },
                fit: match fit {
                    FitArg::Half => FitThreshold::Half,
                    FitArg::Full => FitThreshold::Full,
                },
            };
            let yes = solve_undirected(&inst.graph, &k, &r, &p).map_err(err)?;
            Ok(answer(yes, json!({ "bound_used": bound_used(default_bound_undirected(&k, &r), &a) })))
        }
        Command::SolvePacking { input, budget_states } => {
            let Instance::Packing(p) = instance(&input)? else {
                return Err("solve-packing expects a packing instance".into());
            };
            let yes = solve_packing_budget(&p, budget_states.unwrap_or(DEFAULT_SEARCH_BUDGET)).map_err(err)?;
            Ok(answer(yes, json!({})))
        }
        Command::Oracle { input, kr: over, witness, budget_states } => {
            let budget = budget_states.unwrap_or(DEFAULT_STATE_BUDGET);
            match instance(&input)? {
                Instance::Digraph(inst) => oracle(&inst, &over, witness, budget),
                Instance::Graph(inst) => oracle(&inst, &over, witness, budget),
                Instance::Packing(p) => Ok(answer(brute_packing_budget(&p, budget).map_err(err)?, json!({}))),
                _ => Err("oracle expects a digraph, graph or packing instance".into()),
            }
        }
        Command::Gen { which } => {
            let g = match which {
                GenCommand::TightnessDirected { r } => Generator::TightnessDirected { r },
                GenCommand::GridPendant { c, r } => Generator::GridPendant { c, r },
            };
            let inst = generate(g).map_err(err)?;
            Ok(plain(serde_json::from_str(&serialize_instance(&inst)).map_err(err)?))
        }
        Command::Verify { walk, input, r } => {
            let w = parse_walk(&read_text(Some(&walk)).map_err(err)?).map_err(err)?;
            let check = |r_inst: &Option<BigUint>| r.clone().or_else(|| r_inst.clone()).ok_or_else(|| "r is missing".to_string());
            let res = match instance(&input)? {
                Instance::Digraph(i) => verify_walk(&i.graph, &w, &check(&i.r)?),
                Instance::Graph(i) => verify_walk(&i.graph, &w, &check(&i.r)?),
                _ => return Err("verify expects a digraph or graph instance".into()),
            };
            Ok(Outcome { body: json!({ "valid": res.valid, "size": res.size }), code: if res.valid { 0 } else { 1 } })
        }
        Command::Kernelize { input, out } => {
            let Instance::Packing(p) = instance(&input)? else {
                return Err("kernelize expects a packing instance".into());
            };
            let kernel = kernelize(&p).map_err(err)?;
            let body = kernel_json(&kernel);
            match out {
                Some(path) => {
                    write(&path, &body)?;
                    Ok(plain(json!({ "written": path.display().to_string(), "decided": kernel.decided })))
                }
                None => Ok(plain(body)),
            }
        }
    }
}

fn write(path: &Path, body: &Value) -> Result<(), String> {
    std::fs::write(path, format!("{body}\n")).map_err(|e| format!("{}: {e}", path.display()))
}

fn oracle<G: Adjacency>(inst: &GraphInstance<G>, over: &KrArgs, witness: bool, budget: usize) -> Result<Outcome, String> {
    let r = over.r.clone().or_else(|| inst.r.clone()).ok_or("r is missing")?;
    let k = over.k.clone().or_else(|| inst.k.clone());
    // Without k the search runs to the true maximum, at most r·n.
    let cap = k.clone().unwrap_or_else(|| &r * BigUint::from(inst.graph.n().max(1)));
    let max = brute_rsimple_max_budget(&inst.graph, &r, &cap, budget).map_err(err)?;
    let mut extra = json!({ "max": max.to_string() });
    if witness {
        let w = brute_rsimple_witness(&inst.graph, &r, &cap, budget).map_err(err)?;
        extra["walk"] = json!(w.map(|w| w.0).unwrap_or_default());
    }
    match k {
        Some(k) => Ok(answer(max >= k, extra)),
        None => Ok(plain(extra)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("rsimple: {e}");
            return ExitCode::from(2);
        }
    }
    let Format::Json = cli.format;
    match run(cli) {
        Ok(out) => {
            println!("{}", out.body);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("rsimple: {e}");
            ExitCode::from(2)
        }
    }
}
