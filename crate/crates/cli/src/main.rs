use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use symref_core::auto::{detect_symmetries, Detection};
use symref_core::groups::{analyze, group_order};
use symref_core::handle::{build_plan, describe_action};
use symref_core::instances::{self, Graph};
use symref_core::solve::{solve, Limits, Status};
use symref_core::{Classification, Error, GroupReport, HandlerPlan, Minlp, Mode, Setting};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "symref", version, about = "Permutation and reflection symmetries of MINLPs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Perm,
    Refl,
}

#[derive(Subcommand)]
enum Cmd {
    /// Detect symmetries, classify the group and print the handling plan
    Detect {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "refl")]
        mode: ModeArg,
        /// Use pattern gadgets for plain expression constraints
        #[arg(long)]
        enhanced: bool,
        /// Setting used for the printed plan
        #[arg(long, default_value = "auto")]
        setting: String,
        #[arg(long)]
        json: bool,
    },
    /// Solve with branch-and-bound under a symmetry handling setting
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "auto")]
        setting: String,
        /// Node limit
        #[arg(long, default_value_t = 100_000)]
        nodes: usize,
        /// Relative gap tolerance
        #[arg(long, default_value_t = 1e-4)]
        gap: f64,
        /// Wall time limit in seconds
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Write a generated instance
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Output file (stdout if omitted)
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Family {
    /// ℓ1-ball packing in the unit box
    Packing { n: usize, d: usize },
    /// Kissing number variant
    Kissing { n: usize, d: usize },
    /// Energy minimization on the sphere
    Energy { n: usize, d: usize },
    /// Max-cut on `complete K`, `cycle K`, `petersen`, or `edges 1-2,2-3,...`
    Maxcut { graph: String, arg: Option<String> },
    /// Disk packing in a `w × h` box
    Disks { k: usize, w: f64, h: f64 },
    /// The four-variable linear example
    TwoPairs,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(code)
}

fn load(path: &PathBuf) -> Result<Minlp, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {}", path.display(), e)))?;
    instances::parse(&text).map_err(|e| match e {
        Error::Parse { line, msg } => fail(EXIT_INPUT, format!("{}:{}: {}", path.display(), line, msg)),
        e => fail(EXIT_INPUT, format!("{}: {}", path.display(), e)),
    })
}

fn setting(s: &str) -> Result<Setting, ExitCode> {
    s.parse().map_err(|e| fail(EXIT_INPUT, e))
}

/// Detection in the given mode; an unsupported constraint disables it.
fn detect(p: &Minlp, mode: Mode, enhanced: bool) -> (Option<Detection>, Option<String>) {
    match detect_symmetries(p, mode, enhanced) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn names(p: &Minlp, vars: &[usize]) -> Vec<String> {
    vars.iter().map(|&v| p.variables[v].name.clone()).collect()
}

fn classification_json(p: &Minlp, c: &Classification) -> Value {
    let m = |matrix: &Vec<Vec<usize>>| matrix.iter().map(|r| names(p, r)).collect::<Vec<_>>();
    match c {
        Classification::RowColumn { matrix, column_reflections, row_reflections } => json!({
            "kind": "row-column", "matrix": m(matrix),
            "column_reflections": column_reflections, "row_reflections": row_reflections,
        }),
        Classification::Row { matrix, column_reflections } => {
            json!({ "kind": "row", "matrix": m(matrix), "column_reflections": column_reflections })
        }
        Classification::Unstructured => json!({ "kind": "unstructured" }),
    }
}

fn report_json(p: &Minlp, r: &GroupReport) -> Value {
    let factors: Vec<Value> = r
        .factors
        .iter()
        .map(|f| {
            json!({
                "support": names(p, &f.support),
                "generators": f.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "order": f.order,
                "classification": classification_json(p, &f.classification),
                "full_reflection": f.has_full_reflection,
                "reflected_support": names(p, &f.reflected_support),
                "signed_fraction": f.signed_fraction,
            })
        })
        .collect();
    json!({ "factors": factors, "orbits": r.orbits })
}

fn plan_json(plan: &HandlerPlan) -> Value {
    let factors: Vec<Value> = plan
        .factors
        .iter()
        .map(|f| {
            json!({
                "factor": f.factor.map(|k| k + 1),
                "method": format!("{:?}", f.method),
                "actions": f.actions.iter().map(describe_action).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!(factors)
}

fn classification_text(p: &Minlp, c: &Classification) -> String {
    let m = |matrix: &Vec<Vec<usize>>| matrix.iter().map(|r| names(p, r).join(" ")).collect::<Vec<_>>().join(" | ");
    match c {
        Classification::RowColumn { matrix, column_reflections, row_reflections } => format!(
            "row-column [{}] column reflections: {}, row reflections: {}",
            m(matrix),
            column_reflections,
            row_reflections
        ),
        Classification::Row { matrix, column_reflections } => {
            format!("row [{}] column reflections: {}", m(matrix), column_reflections)
        }
        Classification::Unstructured => "unstructured".to_string(),
    }
}

fn run_detect(file: &PathBuf, mode: ModeArg, enhanced: bool, setting_name: &str, as_json: bool) -> ExitCode {
    let p = match load(file) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let s = match setting(setting_name) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let mode = match mode {
        ModeArg::Perm => Mode::Permutation,
        ModeArg::Refl => Mode::Reflection,
    };
    let (det, disabled) = detect(&p, mode, enhanced);
    let gens = det.as_ref().map(|d| d.generators.clone()).unwrap_or_default();
    let report = analyze(&gens, p.n());
    let order = if gens.is_empty() { Some(1) } else { group_order(&gens, p.n()) };
    let plan = match build_plan(&p, &report, s) {
        Ok(plan) => plan,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    if as_json {
        let out = json!({
            "variables": p.n(),
            "mode": if mode == Mode::Reflection { "refl" } else { "perm" },
            "enhanced": enhanced,
            "disabled": disabled,
            "graph": det.as_ref().map(|d| json!({
                "nodes": d.graph_nodes, "edges": d.graph_edges, "quotient_nodes": d.quotient_nodes,
            })),
            "generators": gens.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "order": order,
            "report": report_json(&p, &report),
            "setting": s.name(),
            "plan": plan_json(&plan),
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        return ExitCode::SUCCESS;
    }
    println!("variables: {}", p.n());
    if let Some(why) = &disabled {
        println!("detection disabled: {}", why);
    }
    if let Some(d) = &det {
        println!("graph: {} nodes, {} edges, {} after color elimination", d.graph_nodes, d.graph_edges, d.quotient_nodes);
    }
    println!("generators: {}", gens.len());
    for g in &gens {
        println!("  {}", g);
    }
    match order {
        Some(o) => println!("group order: {}", o),
        None => println!("group order: too large to enumerate"),
    }
    for (k, f) in report.factors.iter().enumerate() {
        println!("factor {}: {} generators, order {}", k + 1, f.generators.len(), f.order.map_or("?".into(), |o| o.to_string()));
        println!("  support: {}", names(&p, &f.support).join(" "));
        println!("  structure: {}", classification_text(&p, &f.classification));
        println!("  full reflection: {}", f.has_full_reflection);
    }
    println!("plan ({}):", s.name());
    if plan.is_empty() {
        println!("  none");
    } else {
        for line in plan.describe().lines() {
            println!("  {}", line);
        }
    }
    ExitCode::SUCCESS
}

fn run_solve(file: &PathBuf, setting_name: &str, limits: Limits, as_json: bool) -> ExitCode {
    let p = match load(file) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let s = match setting(setting_name) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let (det, disabled) = if s == Setting::Sym0 { (None, None) } else { detect(&p, Mode::Reflection, true) };
    let gens = det.map(|d| d.generators).unwrap_or_default();
    let report = analyze(&gens, p.n());
    let plan = match build_plan(&p, &report, s) {
        Ok(plan) => plan,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let r = match solve(&p, &plan, &limits) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let status = match r.status {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Limit => "limit",
    };
    if as_json {
        let point = r.incumbent.as_ref().map(|x| {
            p.variables.iter().zip(x).map(|(v, &xi)| (v.name.clone(), json!(xi))).collect::<serde_json::Map<_, _>>()
        });
        let out = json!({
            "status": status,
            "setting": s.name(),
            "value": r.value,
            "dual_bound": r.dual_bound,
            "node_count": r.node_count,
            "primal_dual_integral": r.primal_dual_integral,
            "incumbent": point,
            "detection_disabled": disabled,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    } else {
        if let Some(why) = &disabled {
            println!("detection disabled: {}", why);
        }
        println!("status: {}", status);
        println!("setting: {}", s.name());
        match r.value {
            Some(v) => println!("value: {}", v),
            None => println!("value: none"),
        }
        println!("dual bound: {}", r.dual_bound);
        println!("nodes: {}", r.node_count);
        println!("primal-dual integral: {:.6}", r.primal_dual_integral);
        if let Some(x) = &r.incumbent {
            for (v, xi) in p.variables.iter().zip(x) {
                println!("  {} = {}", v.name, xi);
            }
        }
    }
    match r.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        Status::Limit => ExitCode::from(EXIT_LIMIT),
    }
}

fn parse_graph(kind: &str, arg: Option<&str>) -> Result<Graph, String> {
    let size = || -> Result<usize, String> {
        arg.ok_or("missing size")?.parse().map_err(|_| "bad size".to_string())
    };
    match kind {
        "complete" => Ok(Graph::complete(size()?)),
        "cycle" => Ok(Graph::cycle(size()?)),
        "petersen" => Ok(Graph::petersen()),
        "edges" => {
            let mut edges = Vec::new();
            for e in arg.ok_or("missing edge list")?.split(',') {
                let (u, v) = e.split_once('-').ok_or_else(|| format!("bad edge '{}'", e))?;
                let (u, v): (usize, usize) =
                    (u.parse().map_err(|_| format!("bad edge '{}'", e))?, v.parse().map_err(|_| format!("bad edge '{}'", e))?);
                if u == 0 || v == 0 || u == v {
                    return Err(format!("bad edge '{}' (nodes are 1-based)", e));
                }
                edges.push((u - 1, v - 1));
            }
            let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
            Ok(Graph { n, edges })
        }
        k => Err(format!("unknown graph '{}'", k)),
    }
}

fn run_gen(family: &Family, output: Option<&PathBuf>) -> ExitCode {
    let p = match family {
        Family::Packing { n, d } => instances::gen_packing(*n, *d),
        Family::Kissing { n, d } => instances::gen_kissing(*n, *d),
        Family::Energy { n, d } => instances::gen_energy(*n, *d),
        Family::Maxcut { graph, arg } => match parse_graph(graph, arg.as_deref()) {
            Ok(g) => instances::gen_maxcut(&g),
            Err(e) => return fail(EXIT_INPUT, e),
        },
        Family::Disks { k, w, h } => instances::gen_disk_packing(*k, *w, *h),
        Family::TwoPairs => instances::gen_two_pairs(),
    };
    let text = instances::write(&p);
    match output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                return fail(EXIT_INPUT, format!("{}: {}", path.display(), e));
            }
        }
        None => print!("{}", text),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Detect { file, mode, enhanced, setting, json } => run_detect(file, *mode, *enhanced, setting, *json),
        Cmd::Solve { file, setting, nodes, gap, time, json } => {
            let limits = Limits { max_nodes: *nodes, gap: *gap, time_limit: time.map(std::time::Duration::from_secs_f64) };
            run_solve(file, setting, limits, *json)
        }
        Cmd::Gen { family, output } => run_gen(family, output.as_ref()),
    }
}
