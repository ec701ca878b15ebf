//! Algorithm selection, run reports, DOT export and the oracle harness.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::exact::{solve_exact, ExactError};
use crate::generate::{generate, GeneratorConfig, Regime};
use crate::hardness::{gadget_case, solve_vc_exact};
use crate::intersect4::{
    apply_rule9, audit, build_intersection_graph, solve_deg4_detailed, to_gen, ComponentShape, StructureAudit,
    DEFAULT_COMPONENT_CAP,
};
use crate::model::{Cost, EdgeId, Instance, InstanceFile, InstanceStats, Solution, SolutionFile};
use crate::planar3::{classify_all, find_reducible, solve_planar3_detailed};
use crate::preprocess::{check_postconditions, preprocess_all, ReductionLedger, Verdict};
use crate::zones3::{find_zones, solve_deg3_detailed, ZoneKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Auto,
    Exact,
    Deg3,
    Deg4,
    Planar3,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::Exact => "exact",
            Algo::Deg3 => "deg3",
            Algo::Deg4 => "deg4",
            Algo::Planar3 => "planar3",
        }
    }

    pub fn parse(text: &str) -> Option<Algo> {
        match text {
            "auto" => Some(Algo::Auto),
            "exact" => Some(Algo::Exact),
            "deg3" => Some(Algo::Deg3),
            "deg4" => Some(Algo::Deg4),
            "planar3" => Some(Algo::Planar3),
            _ => None,
        }
    }
}

/// First specialised solver whose preconditions hold, else the oracle.
pub fn select_algorithm(stats: &InstanceStats) -> Algo {
    if stats.max_degree <= 3 {
        Algo::Deg3
    } else if stats.max_degree <= 4 && stats.max_habitat_size <= 4 {
        Algo::Deg4
    } else if stats.is_planar_embedded && stats.max_habitat_size <= 3 {
        Algo::Planar3
    } else {
        Algo::Exact
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub budget_delta: i64,
    pub newly_forced: usize,
    pub removed_habitats: usize,
    pub deleted_edges: usize,
    pub deleted_vertices: usize,
    pub removed_components: usize,
    /// Zones (deg3), intersection-graph components (deg4) or Rule 8 applications (planar3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structures: Option<usize>,
}

impl LedgerSummary {
    pub fn from_ledger(ledger: &ReductionLedger, structures: Option<usize>) -> Self {
        LedgerSummary {
            budget_delta: ledger.budget_delta,
            newly_forced: ledger.newly_forced.len(),
            removed_habitats: ledger.removed_habitats.len(),
            deleted_edges: ledger.deleted_edges.len(),
            deleted_vertices: ledger.deleted_vertices.len(),
            removed_components: ledger.removed_components.len(),
            structures,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetVerdict {
    NoBudget,
    Within,
    Exceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Algo,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Cost>,
    pub budget: BudgetVerdict,
    pub wall_time_ms: f64,
    pub stats: InstanceStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<LedgerSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infeasible_habitat: Option<usize>,
}

impl RunReport {
    /// The report with the timing zeroed, for reproducibility comparisons.
    pub fn untimed(&self) -> RunReport {
        RunReport { wall_time_ms: 0.0, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub solution: Option<Solution>,
}

#[cfg(not(target_arch = "wasm32"))]
fn stopwatch() -> impl FnOnce() -> f64 {
    let start = std::time::Instant::now();
    move || start.elapsed().as_secs_f64() * 1e3
}

#[cfg(target_arch = "wasm32")]
fn stopwatch() -> impl FnOnce() -> f64 {
    || 0.0
}

/// Runs the requested algorithm; infeasibility is a report, not an error.
pub fn dispatch(instance: &Instance, algo: Algo) -> Result<RunOutcome, SolveError> {
    let stats = instance.stats();
    let chosen = if algo == Algo::Auto { select_algorithm(&stats) } else { algo };
    let elapsed = stopwatch();
    let result: Result<(Vec<EdgeId>, Option<LedgerSummary>), SolveError> = match chosen {
        Algo::Exact | Algo::Auto => solve_exact(instance, None).map(|s| (s.edges, None)).map_err(SolveError::from),
        Algo::Deg3 => solve_deg3_detailed(instance)
            .map(|r| (r.solution.edges, Some(LedgerSummary::from_ledger(&r.ledger, Some(r.zones.len()))))),
        Algo::Deg4 => solve_deg4_detailed(instance, DEFAULT_COMPONENT_CAP).map(|r| {
            let summary = LedgerSummary::from_ledger(&r.ledger, Some(r.graph.components.len()));
            (r.solution.edges, Some(summary))
        }),
        Algo::Planar3 => solve_planar3_detailed(instance)
            .map(|r| (r.solution.edges, Some(LedgerSummary::from_ledger(&r.ledger, Some(r.applications.len()))))),
    };
    let elapsed = elapsed();
    let infeasible_habitat = match &result {
        Err(SolveError::NoInstance { habitat }) | Err(SolveError::Exact(ExactError::Infeasible { habitat })) => {
            Some(*habitat)
        }
        Err(e) => return Err(e.clone()),
        Ok(_) => None,
    };
    let (solution, ledger) = match result {
        Ok((edges, ledger)) => {
            let unbudgeted = instance.clone().with_budget(None).is_solution(&edges);
            if !unbudgeted.is_feasible() {
                return Err(SolveError::Internal(format!("{} returned an infeasible edge set", chosen.name())));
            }
            (Some(instance.is_solution(&edges)), ledger)
        }
        Err(_) => (None, None),
    };
    let budget = match (instance.budget(), &solution) {
        (None, _) => BudgetVerdict::NoBudget,
        (Some(k), Some(s)) if (s.cost as i128) <= k as i128 => BudgetVerdict::Within,
        (Some(_), _) => BudgetVerdict::Exceeded,
    };
    let report = RunReport {
        algorithm: chosen,
        feasible: solution.is_some(),
        cost: solution.as_ref().map(|s| s.cost),
        budget,
        wall_time_ms: elapsed,
        stats,
        ledger,
        infeasible_habitat,
    };
    Ok(RunOutcome { report, solution })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneCounts {
    pub k3: usize,
    pub k4_minus_e: usize,
    pub prism_minus_matching_edge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionSummary {
    pub habitats: usize,
    pub paths: usize,
    pub cycles: usize,
    pub constant_size: usize,
    pub max_habitats_per_edge: usize,
    pub audit: StructureAudit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarSummary {
    pub faces: usize,
    pub nested: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reducible: Option<usize>,
}

/// Structural view of an instance: what preprocessing does and what each solver would see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub stats: InstanceStats,
    pub auto: Algo,
    pub no_instance: Option<usize>,
    pub reduced: InstanceStats,
    pub ledger: LedgerSummary,
    pub postcondition_violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zones: Option<ZoneCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection: Option<IntersectionSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planar: Option<PlanarSummary>,
}

pub fn analyze(instance: &Instance) -> Result<Analysis, SolveError> {
    let stats = instance.stats();
    let (reduced, ledger) = preprocess_all(instance);
    let no_instance = match ledger.verdict {
        Verdict::NoInstance { habitat } => Some(habitat),
        Verdict::Continue => None,
    };
    let mut analysis = Analysis {
        stats,
        auto: select_algorithm(&stats),
        no_instance,
        reduced: reduced.stats(),
        ledger: LedgerSummary::from_ledger(&ledger, None),
        postcondition_violations: 0,
        zones: None,
        intersection: None,
        planar: None,
    };
    if no_instance.is_some() {
        return Ok(analysis);
    }
    analysis.postcondition_violations = check_postconditions(&reduced).len();
    if reduced.max_degree() <= 3 {
        let mut counts = ZoneCounts::default();
        for zone in find_zones(&reduced)? {
            match zone.kind {
                ZoneKind::K3 => counts.k3 += 1,
                ZoneKind::K4MinusE => counts.k4_minus_e += 1,
                ZoneKind::PrismMinusMatchingEdge => counts.prism_minus_matching_edge += 1,
            }
        }
        analysis.zones = Some(counts);
    }
    if reduced.max_degree() <= 4 && reduced.max_habitat_size() <= 4 {
        let gen = apply_rule9(to_gen(&reduced)?)?;
        let graph = build_intersection_graph(&gen);
        let count = |shape| graph.components.iter().filter(|c| c.shape == shape).count();
        analysis.intersection = Some(IntersectionSummary {
            habitats: graph.nodes.len(),
            paths: count(ComponentShape::Path),
            cycles: count(ComponentShape::Cycle),
            constant_size: count(ComponentShape::ConstantSize),
            max_habitats_per_edge: graph.max_habitats_per_edge,
            audit: audit(&gen, &graph, DEFAULT_COMPONENT_CAP),
        });
    }
    if reduced.embedding().is_some() && reduced.habitats().iter().all(|h| h.len() == 3) {
        let geometry = classify_all(&reduced)?;
        let faces = geometry.iter().filter(|g| g.is_face()).count();
        analysis.planar = Some(PlanarSummary {
            faces,
            nested: geometry.len() - faces,
            reducible: find_reducible(&geometry),
        });
    }
    Ok(analysis)
}

const PALETTE: [&str; 12] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#1f78b4",
    "#b2df8a", "#fb9a99", "#cab2d6",
];

/// DOT rendering: habitats as coloured clusters of vertex pen colours, solution edges bold, forced edges dashed red.
pub fn export_dot(instance: &Instance, solution: Option<&[EdgeId]>) -> String {
    let mut chosen = vec![false; instance.edge_count()];
    for &e in solution.unwrap_or(&[]) {
        if e < chosen.len() {
            chosen[e] = true;
        }
    }
    let mut out = String::from("graph gbp {\n  node [shape=circle];\n");
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); instance.vertex_count()];
    for (h, vs) in instance.habitats().iter().enumerate() {
        for &v in vs {
            classes[v].push(h);
        }
    }
    for v in 0..instance.vertex_count() {
        let _ = write!(out, "  v{v} [label=\"{v}\"");
        if let Some(p) = instance.embedding().map(|pts| pts[v]) {
            let _ = write!(out, ", pos=\"{},{}!\"", p[0], p[1]);
        }
        if !classes[v].is_empty() {
            let colors: Vec<&str> = classes[v].iter().map(|&h| PALETTE[h % PALETTE.len()]).collect();
            let names: Vec<String> = classes[v].iter().map(|h| format!("h{h}")).collect();
            let _ = write!(out, ", style=wedged, fillcolor=\"{}\", class=\"{}\"", colors.join(":"), names.join(" "));
        }
        out.push_str("];\n");
    }
    for (id, e) in instance.edges().iter().enumerate() {
        let mut attrs = vec![format!("label=\"{}\"", e.cost)];
        if chosen[id] {
            attrs.push("penwidth=3".into());
            attrs.push("style=bold".into());
        }
        if e.forced {
            attrs.push("color=red".into());
            if !chosen[id] {
                attrs.push("style=dashed".into());
            }
        }
        let _ = writeln!(out, "  v{} -- v{} [{}];", e.u, e.v, attrs.join(", "));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub seed: u64,
    pub solver: Option<Cost>,
    pub oracle: Option<Cost>,
    pub detail: String,
    pub instance: InstanceFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub regime: Regime,
    pub trials: usize,
    pub agreed: usize,
    pub infeasible: usize,
    pub mismatches: Vec<Mismatch>,
}

fn trial_config(config: &GeneratorConfig, i: usize) -> GeneratorConfig {
    GeneratorConfig { seed: config.seed.wrapping_add(i as u64), ..config.clone() }
}

/// Seeded trials comparing a specialised solver with the oracle.
///
/// In the gadget regime the oracle's optimum is compared with the value the
/// vertex cover of the source graph predicts.
pub fn cross_validate(config: &GeneratorConfig, trials: usize) -> CrossReport {
    let mut report = CrossReport { regime: config.regime, trials, agreed: 0, infeasible: 0, mismatches: Vec::new() };
    for i in 0..trials {
        let cfg = trial_config(config, i);
        let (instance, solver, oracle, detail, failed) = if config.regime == Regime::Gadget {
            let case = gadget_case(cfg.seed);
            let predicted = case.map.target(solve_vc_exact(&case.source).len());
            let oracle = solve_exact(&case.instance, None).ok().map(|s| s.cost);
            let detail = format!("{} via construction {:?}", case.source_name, case.construction);
            (case.instance, Some(predicted), oracle, detail, false)
        } else {
            let instance = generate(&cfg);
            let algo = match config.regime {
                Regime::Deg3 => Algo::Deg3,
                Regime::Deg4h4 => Algo::Deg4,
                _ => Algo::Planar3,
            };
            let solver = dispatch(&instance, algo);
            let oracle = solve_exact(&instance, None).ok().map(|s| s.cost);
            match solver {
                Ok(out) => (instance, out.report.cost, oracle, algo.name().to_string(), false),
                Err(e) => (instance, None, oracle, format!("{}: {e}", algo.name()), true),
            }
        };
        if solver == oracle && !failed {
            report.agreed += 1;
            if oracle.is_none() {
                report.infeasible += 1;
            }
        } else {
            report.mismatches.push(Mismatch { seed: cfg.seed, solver, oracle, detail, instance: instance.into() });
        }
    }
    report
}

/// Verdict of checking a proposed solution.
pub fn verify(instance: &Instance, edges: &SolutionFile) -> Result<Solution, crate::model::ModelError> {
    Ok(instance.is_solution(&edges.edge_ids(instance)?))
}
