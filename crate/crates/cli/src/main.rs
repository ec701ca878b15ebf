use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gbp_core::dispatch::{analyze, cross_validate, dispatch, export_dot, Algo, BudgetVerdict, RunReport};
use gbp_core::error::SolveError;
use gbp_core::exact::ExactError;
use gbp_core::generate::{generate, GeneratorConfig, Regime};
use gbp_core::hardness::{construct1, construct2, Construction, VcInstance};
use gbp_core::model::{Instance, SolutionFile};
use gbp_core::preprocess::{preprocess_all, Verdict};

#[derive(Parser)]
#[command(name = "gbp", version, about = "Diameter-two green bridge placement solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input file; `-` or absent reads standard input.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; absent writes standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "auto")]
    algo: String,
    /// Machine-readable report.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the run report.
    Solve,
    /// Apply the reduction rules; writes the reduced instance.
    Preprocess {
        /// Where to write the reduction ledger.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Structural statistics and what each solver would see.
    Analyze,
    /// Random instance of a regime, or a gadget instance from a vertex cover source.
    Generate(GenerateArgs),
    /// Graphviz rendering, optionally with a solution.
    ExportDot {
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Check a solution against an instance.
    Verify {
        #[arg(long)]
        solution: PathBuf,
    },
    /// Compare specialised solvers with the exact oracle on seeded instances.
    CrossValidate {
        #[arg(long, default_value = "deg3")]
        regime: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        r: usize,
        /// Directory receiving one instance file per mismatch.
        #[arg(long)]
        repro_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "deg3")]
    regime: String,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    r: usize,
    #[arg(long, default_value_t = 1)]
    cost_min: u64,
    #[arg(long, default_value_t = 5)]
    cost_max: u64,
    #[arg(long)]
    budget: Option<i64>,
    /// Gadget construction (1 or 2) applied to `--vc`.
    #[arg(long)]
    construction: Option<String>,
    /// Vertex cover source graph in JSON.
    #[arg(long)]
    vc: Option<PathBuf>,
    /// Where to write the gadget map.
    #[arg(long)]
    map: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Infeasible(String),
    Inapplicable(String),
    Mismatch(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => 1,
            Failure::Input(_) | Failure::Internal(_) => 2,
            Failure::Inapplicable(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Infeasible(m) | Failure::Inapplicable(m) | Failure::Mismatch(m) => m,
            Failure::Internal(m) => m,
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Inapplicable(_) => Failure::Inapplicable(e.to_string()),
            SolveError::NoInstance { .. } | SolveError::Exact(ExactError::Infeasible { .. }) => {
                Failure::Infeasible(e.to_string())
            }
            SolveError::Exact(_) => Failure::Inapplicable(e.to_string()),
            SolveError::Model(_) => Failure::Input(e.to_string()),
            SolveError::Internal(_) => Failure::Internal(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load_instance(path: Option<&Path>) -> Result<Instance, Failure> {
    let text = read_text(path)?;
    let instance: Instance = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("instance: {e}")))?;
    instance.validate().map_err(|e| Failure::Input(format!("instance: {e}")))?;
    Ok(instance)
}

fn load_solution(path: &Path) -> Result<SolutionFile, Failure> {
    let text = read_text(Some(path))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("solution: {e}")))
}

fn human_report(r: &RunReport) -> String {
    let mut lines = vec![
        format!("algorithm: {}", r.algorithm.name()),
        format!("instance: {}", r.stats),
        format!("feasible: {}", r.feasible),
    ];
    if let Some(c) = r.cost {
        lines.push(format!("cost: {c}"));
    }
    if let Some(h) = r.infeasible_habitat {
        lines.push(format!("violated habitat: {h}"));
    }
    lines.push(format!("budget: {:?}", r.budget));
    if let Some(l) = &r.ledger {
        lines.push(format!(
            "preprocessing: forced {} removed habitats {} deleted edges {} components {} budget delta {}",
            l.newly_forced, l.removed_habitats, l.deleted_edges, l.removed_components, l.budget_delta
        ));
    }
    lines.push(format!("time: {:.3} ms", r.wall_time_ms));
    lines.join("\n") + "\n"
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    report: &'a RunReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution: Option<SolutionFile>,
}

fn solve(cli: &Cli) -> Outcome {
    let algo = Algo::parse(&cli.algo).ok_or_else(|| Failure::Input(format!("unknown algorithm {}", cli.algo)))?;
    let instance = load_instance(cli.input.as_deref())?;
    let out = dispatch(&instance, algo)?;
    let solution = out.solution.as_ref().map(|s| s.to_file(&instance));
    if let (Some(path), Some(sol)) = (&cli.output, &solution) {
        write_text(Some(path), &to_json(sol))?;
    }
    let text = if cli.json {
        let inline = if cli.output.is_none() { solution.clone() } else { None };
        to_json(&SolveOutput { report: &out.report, solution: inline })
    } else {
        let mut t = human_report(&out.report);
        if let (None, Some(sol)) = (&cli.output, &solution) {
            let pairs: Vec<String> = sol.edges.iter().map(|[u, v]| format!("{u}-{v}")).collect();
            t.push_str(&format!("edges: {}\n", pairs.join(" ")));
        }
        t
    };
    write_text(None, &text)?;
    if !out.report.feasible {
        return Err(Failure::Infeasible("no solution: a habitat cannot reach diameter two".into()));
    }
    if out.report.budget == BudgetVerdict::Exceeded {
        return Err(Failure::Infeasible("optimum exceeds the budget".into()));
    }
    Ok(())
}

fn preprocess(cli: &Cli, ledger_path: Option<&Path>) -> Outcome {
    let instance = load_instance(cli.input.as_deref())?;
    let (reduced, ledger) = preprocess_all(&instance);
    if let Some(p) = ledger_path {
        write_text(Some(p), &to_json(&ledger))?;
    }
    write_text(cli.output.as_deref(), &to_json(&reduced))?;
    if let Verdict::NoInstance { habitat } = ledger.verdict {
        return Err(Failure::Infeasible(format!("no-instance: habitat {habitat} cannot reach diameter two")));
    }
    Ok(())
}

fn analyze_cmd(cli: &Cli) -> Outcome {
    let instance = load_instance(cli.input.as_deref())?;
    let a = analyze(&instance)?;
    let text = if cli.json {
        to_json(&a)
    } else {
        let mut lines = vec![
            format!("instance: {}", a.stats),
            format!("auto algorithm: {}", a.auto.name()),
            format!("reduced: {}", a.reduced),
            format!("postcondition violations: {}", a.postcondition_violations),
        ];
        if let Some(h) = a.no_instance {
            lines.push(format!("no-instance: habitat {h}"));
        }
        if let Some(z) = &a.zones {
            lines.push(format!("zones: K3 {} K4-e {} prism-e {}", z.k3, z.k4_minus_e, z.prism_minus_matching_edge));
        }
        if let Some(i) = &a.intersection {
            lines.push(format!(
                "intersection graph: {} habitats, {} paths, {} cycles, {} constant-size, at most {} habitats per edge, audit {}",
                i.habitats,
                i.paths,
                i.cycles,
                i.constant_size,
                i.max_habitats_per_edge,
                if i.audit.is_clean() { "clean" } else { "violated" }
            ));
        }
        if let Some(p) = &a.planar {
            lines.push(format!("habitat triangles: {} faces, {} nested, reducible {:?}", p.faces, p.nested, p.reducible));
        }
        lines.join("\n") + "\n"
    };
    write_text(cli.output.as_deref(), &text)?;
    if a.no_instance.is_some() {
        return Err(Failure::Infeasible("no-instance".into()));
    }
    Ok(())
}

fn generate_cmd(cli: &Cli, args: &GenerateArgs) -> Outcome {
    if let Some(c) = &args.construction {
        let construction =
            Construction::parse(c).ok_or_else(|| Failure::Input(format!("unknown construction {c}")))?;
        let vc_path = args.vc.as_deref().or(cli.input.as_deref());
        let text = read_text(vc_path)?;
        let vc: VcInstance = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("vertex cover source: {e}")))?;
        let (instance, map) = match construction {
            Construction::One => construct1(&vc),
            Construction::Two => construct2(&vc).map_err(|e| Failure::Input(e.to_string()))?,
        };
        let instance = match args.budget.or(vc.k().map(|k| map.target(k) as i64)) {
            Some(b) => instance.with_budget(Some(b)),
            None => instance,
        };
        if let Some(p) = &args.map {
            write_text(Some(p), &to_json(&map))?;
        }
        return write_text(cli.output.as_deref(), &to_json(&instance));
    }
    let regime = Regime::parse(&args.regime).ok_or_else(|| Failure::Input(format!("unknown regime {}", args.regime)))?;
    if args.cost_min > args.cost_max {
        return Err(Failure::Input("cost-min exceeds cost-max".into()));
    }
    let config = GeneratorConfig {
        cost_min: args.cost_min,
        cost_max: args.cost_max,
        ..GeneratorConfig::new(regime, args.n, args.r, cli.seed)
    };
    let instance = generate(&config).with_budget(args.budget);
    write_text(cli.output.as_deref(), &to_json(&instance))
}

fn export_dot_cmd(cli: &Cli, solution: Option<&Path>) -> Outcome {
    let instance = load_instance(cli.input.as_deref())?;
    let edges = match solution {
        Some(p) => Some(load_solution(p)?.edge_ids(&instance).map_err(|e| Failure::Input(e.to_string()))?),
        None => None,
    };
    write_text(cli.output.as_deref(), &export_dot(&instance, edges.as_deref()))
}

fn verify_cmd(cli: &Cli, solution: &Path) -> Outcome {
    let instance = load_instance(cli.input.as_deref())?;
    let edges = load_solution(solution)?.edge_ids(&instance).map_err(|e| Failure::Input(e.to_string()))?;
    let verdict = instance.is_solution(&edges);
    let text = if cli.json { to_json(&verdict) } else { format!("feasible: {}\ncost: {}\n", verdict.is_feasible(), verdict.cost) };
    write_text(cli.output.as_deref(), &text)?;
    if verdict.is_feasible() {
        Ok(())
    } else {
        Err(Failure::Infeasible(format!("{:?}", verdict.status)))
    }
}

fn cross_validate_cmd(cli: &Cli, regime: &str, trials: usize, n: usize, r: usize, repro: Option<&Path>) -> Outcome {
    let regime = Regime::parse(regime).ok_or_else(|| Failure::Input(format!("unknown regime {regime}")))?;
    let report = cross_validate(&GeneratorConfig::new(regime, n, r, cli.seed), trials);
    if let Some(dir) = repro {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        for m in &report.mismatches {
            write_text(Some(&dir.join(format!("mismatch-{}-{}.json", regime.name(), m.seed))), &to_json(&m.instance))?;
        }
    }
    let text = if cli.json {
        to_json(&report)
    } else {
        let mut t = format!(
            "{}: {} trials, {} agreed ({} infeasible), {} mismatches\n",
            regime.name(),
            report.trials,
            report.agreed,
            report.infeasible,
            report.mismatches.len()
        );
        for m in &report.mismatches {
            t.push_str(&format!("  seed {}: solver {:?} oracle {:?} ({})\n", m.seed, m.solver, m.oracle, m.detail));
        }
        t
    };
    write_text(cli.output.as_deref(), &text)?;
    if report.mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} mismatches", report.mismatches.len())))
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Solve => solve(cli),
        Command::Preprocess { ledger } => preprocess(cli, ledger.as_deref()),
        Command::Analyze => analyze_cmd(cli),
        Command::Generate(args) => generate_cmd(cli, args),
        Command::ExportDot { solution } => export_dot_cmd(cli, solution.as_deref()),
        Command::Verify { solution } => verify_cmd(cli, solution),
        Command::CrossValidate { regime, trials, n, r, repro_dir } => {
            cross_validate_cmd(cli, regime, *trials, *n, *r, repro_dir.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gbp: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
