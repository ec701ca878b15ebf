//! Acceptance suite: one PASS/FAIL line per criterion.

mod oracle;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gbp_core::dispatch::{dispatch, Algo};
use gbp_core::exact::solve_exact;
use gbp_core::generate::{generate, GeneratorConfig, Regime};
use gbp_core::hardness::{self, catalog, construct1, construct2, map_gbp_to_vc, solve_vc_exact, GadgetMap, VcInstance};
use gbp_core::intersect4::{
    brute_force_product, component_costs, minimal_members, path_dp, solve_deg4, solve_deg4_detailed, ComponentShape,
    DEFAULT_COMPONENT_CAP, HABITATS_PER_EDGE_BOUND,
};
use gbp_core::model::{Cost, Instance, InstanceFile, Solution};
use gbp_core::planar3::{classify, figure2_instance, inside_optima, rule8_step, solve_planar3_detailed, FIGURE2_REDUCIBLE};
use gbp_core::preprocess::{check_postconditions, preprocess_all, Verdict};
use gbp_core::zones3::{find_zones, solve_deg3, zones_edge_disjoint};

const DEG3_TRIALS: u64 = 500;
const DEG3_N: usize = 14;
const DEG3_R: usize = 10;
const DEG3_BUDGET: Duration = Duration::from_secs(60);

const DEG4_TRIALS: u64 = 500;
const DEG4_N: usize = 14;
const DEG4_R: usize = 10;
/// Larger instances added only to exercise longer path components.
const DEG4_PATH_TRIALS: u64 = 200;
const DEG4_PATH_N: usize = 40;
const PATH_DP_MAX_R: usize = 6;

const PLANAR_TRIALS: u64 = 300;
const PLANAR_N: usize = 14;
const PLANAR_R: usize = 24;
const RULE8_ORACLE_N: usize = 12;

const INVARIANT_TRIALS: u64 = 500;

const GADGET_BUDGET: Duration = Duration::from_secs(600);
const GADGET_MAX_DEGREE: usize = 5;
const C1_MAX_HABITAT: usize = 3;
const C2_MAX_HABITAT: usize = 4;

const SCALE_N: usize = 100_000;
const SCALE_R: usize = 100_000;
const SCALE_BUDGET: Duration = Duration::from_secs(10);

/// Exhaustive cross-check is run when at most this many unforced habitat edges exist.
const BRUTE_LIMIT: usize = 16;

type Verdict_ = Result<String, String>;

fn costs_agree(instance: &Instance, solver: &Result<Solution, impl std::fmt::Debug>, seed: u64) -> Result<bool, String> {
    let exact = solve_exact(instance, None);
    match (solver, &exact) {
        (Ok(s), Ok(e)) => {
            if s.cost != e.cost {
                return Err(format!("seed {seed}: solver {} oracle {}", s.cost, e.cost));
            }
            if !oracle::feasible(instance, &s.edges) || oracle::cost(instance, &s.edges) != s.cost {
                return Err(format!("seed {seed}: solver output fails the independent check"));
            }
        }
        (Err(_), Err(_)) => {}
        _ => {
            return Err(format!(
                "seed {seed}: solver {:?} oracle {:?}",
                solver.as_ref().map(|s| s.cost),
                exact.as_ref().map(|s| s.cost)
            ))
        }
    }
    let mut brute_checked = false;
    if let Some(b) = oracle::brute_min(instance, BRUTE_LIMIT) {
        if b != exact.as_ref().ok().map(|s| s.cost) {
            return Err(format!("seed {seed}: exhaustive {b:?} oracle {:?}", exact.map(|s| s.cost)));
        }
        brute_checked = true;
    }
    Ok(brute_checked)
}

fn criterion1() -> Verdict_ {
    let start = Instant::now();
    let mut brute = 0;
    for seed in 0..DEG3_TRIALS {
        let inst = generate(&GeneratorConfig::new(Regime::Deg3, DEG3_N, DEG3_R, seed));
        if inst.max_degree() > 3 || inst.vertex_count() > DEG3_N {
            return Err(format!("seed {seed}: generator left the regime"));
        }
        brute += costs_agree(&inst, &solve_deg3(&inst), seed)? as usize;
    }
    let elapsed = start.elapsed();
    if elapsed > DEG3_BUDGET {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{DEG3_TRIALS} instances agree ({brute} also exhaustively), {elapsed:.2?}"))
}

fn path_dp_checks(inst: &Instance, paths: &mut usize) -> Result<(), String> {
    let (reduced, ledger) = preprocess_all(inst);
    if ledger.is_no_instance() {
        return Ok(());
    }
    let Ok(run) = solve_deg4_detailed(inst, DEFAULT_COMPONENT_CAP) else { return Ok(()) };
    let _ = reduced;
    let costs = component_costs(&run.gen.instance);
    for comp in &run.graph.components {
        if comp.shape != ComponentShape::Path || comp.habitats.len() > PATH_DP_MAX_R {
            continue;
        }
        let members: Vec<_> = comp.habitats.iter().map(|&h| minimal_members(run.gen.family(h))).collect();
        let (dp, choice) = path_dp(&members, &costs);
        let (bf, _) = brute_force_product(&members, &costs);
        let mut union: Vec<usize> = choice.iter().enumerate().flat_map(|(i, &j)| members[i][j].clone()).collect();
        union.sort_unstable();
        union.dedup();
        let realised: Cost = union.iter().map(|&e| costs[e]).sum();
        if dp != bf || realised != dp {
            return Err(format!("path {:?}: dp {dp} realised {realised} brute force {bf}", comp.habitats));
        }
        *paths += 1;
    }
    Ok(())
}

fn criterion2() -> Verdict_ {
    let start = Instant::now();
    let (mut brute, mut paths) = (0, 0);
    for seed in 0..DEG4_TRIALS {
        let inst = generate(&GeneratorConfig::new(Regime::Deg4h4, DEG4_N, DEG4_R, seed));
        if inst.max_degree() > 4 || inst.max_habitat_size() > 4 {
            return Err(format!("seed {seed}: generator left the regime"));
        }
        brute += costs_agree(&inst, &solve_deg4(&inst), seed)? as usize;
        path_dp_checks(&inst, &mut paths)?;
    }
    for seed in 0..DEG4_PATH_TRIALS {
        let inst = generate(&GeneratorConfig::new(Regime::Deg4h4, DEG4_PATH_N, DEG4_PATH_N, seed));
        path_dp_checks(&inst, &mut paths)?;
    }
    if paths == 0 {
        return Err("no path components exercised".into());
    }
    Ok(format!(
        "{DEG4_TRIALS} instances agree ({brute} also exhaustively), {paths} path components match brute force, {:.2?}",
        start.elapsed()
    ))
}

struct PlanarRuns {
    agreed: usize,
    applications: usize,
    oracle_checked: usize,
    rule8_failures: Vec<String>,
    cost_failures: Vec<String>,
}

fn planar_runs() -> PlanarRuns {
    let mut out = PlanarRuns { agreed: 0, applications: 0, oracle_checked: 0, rule8_failures: vec![], cost_failures: vec![] };
    for seed in 0..PLANAR_TRIALS {
        let inst = generate(&GeneratorConfig::new(Regime::PlanarH3, PLANAR_N, PLANAR_R, seed));
        let run = solve_planar3_detailed(&inst);
        match costs_agree(&inst, &run.as_ref().map(|r| r.solution.clone()), seed) {
            Ok(_) => out.agreed += 1,
            Err(e) => out.cost_failures.push(e),
        }
        let Ok(run) = run else { continue };
        for app in &run.applications {
            out.applications += 1;
            if app.before.vertex_count() > RULE8_ORACLE_N {
                continue;
            }
            out.oracle_checked += 1;
            let before = solve_exact(&app.before.clone().with_budget(None), None).map(|s| s.cost as i64);
            let after = solve_exact(&app.after.clone().with_budget(None), None).map(|s| s.cost as i64);
            match (before, after) {
                (Ok(b), Ok(a)) if b == a - app.delta => {}
                (b, a) => out.rule8_failures.push(format!("seed {seed}: before {b:?} after {a:?} delta {}", app.delta)),
            }
        }
    }
    out
}

fn criterion3(runs: &PlanarRuns) -> Verdict_ {
    if let Some(e) = runs.cost_failures.first() {
        return Err(format!("{} failures, first {e}", runs.cost_failures.len()));
    }
    Ok(format!("{} instances agree", runs.agreed))
}

fn criterion4(runs: &PlanarRuns) -> Verdict_ {
    if let Some(e) = runs.rule8_failures.first() {
        return Err(format!("{} failures, first {e}", runs.rule8_failures.len()));
    }
    if runs.oracle_checked == 0 {
        return Err("no Rule 8 application on a small instance".into());
    }
    Ok(format!("{} applications, {} checked by the oracle on both sides", runs.applications, runs.oracle_checked))
}

fn criterion5() -> Verdict_ {
    let (l, r, b) = (0, 1, 3);
    let inst = figure2_instance();
    let g = classify(&inst, FIGURE2_REDUCIBLE).map_err(|e| e.to_string())?;
    let o = inside_optima(&inst, &g).map_err(|e| e.to_string())?;
    let omit = |u, v| {
        let e = inst.edge_between(u, v).ok_or("missing edge")?;
        o.omitting(e).map(|x| x.opt).ok_or("missing omitting optimum")
    };
    let got = [o.opt, omit(l, b)?, omit(l, r)?, omit(r, b)?];
    if got != [3, 3, 7, 11] {
        return Err(format!("inside optima {got:?}"));
    }
    let app = rule8_step(&inst).map_err(|e| e.to_string())?.ok_or("Rule 8 did not fire")?;
    let child = |p| app.relabel.vertex_to_parent.iter().position(|&x| x == p);
    let rb = match (child(r), child(b)) {
        (Some(x), Some(y)) => app.after.edge_between(x, y),
        _ => None,
    };
    match rb {
        Some(e) if app.after.edge(e).forced => Ok(format!("optima {got:?}, {{v_r,v_b}} forced")),
        _ => Err("{v_r,v_b} not forced after Rule 8".into()),
    }
}

/// Minimum vertex cover by subset enumeration.
fn min_cover(vc: &VcInstance) -> usize {
    let n = vc.vertex_count();
    (0u32..1 << n)
        .filter(|mask| vc.edges().iter().all(|&(u, v)| mask >> u & 1 == 1 || mask >> v & 1 == 1))
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

fn gadget_soundness(
    build: impl Fn(&VcInstance) -> Result<(Instance, GadgetMap), String>,
    per_edge: usize,
    max_habitat: usize,
    plane: bool,
) -> Verdict_ {
    let mut lines = Vec::new();
    for (name, vc) in catalog() {
        let start = Instant::now();
        let (inst, map) = build(&vc).map_err(|e| format!("{name}: {e}"))?;
        let (n, m) = (vc.vertex_count(), vc.edges().len());
        let k = min_cover(&vc);
        if solve_vc_exact(&vc).len() != k {
            return Err(format!("{name}: solve_vc_exact disagrees with enumeration"));
        }
        let target = (5 * n + per_edge * m + k) as Cost;
        if map.target(k) != target {
            return Err(format!("{name}: map predicts {} instead of {target}", map.target(k)));
        }
        let sol = solve_exact(&inst, None).map_err(|e| format!("{name}: {e}"))?;
        if sol.cost != target || !oracle::feasible(&inst, &sol.edges) {
            return Err(format!("{name}: optimum {} target {target}", sol.cost));
        }
        let back = map_gbp_to_vc(&map, &vc, &inst, &sol.edges).map_err(|e| format!("{name}: {e}"))?;
        if back.len() != k || vc.uncovered_edge(&back).is_some() {
            return Err(format!("{name}: mapped back to a cover of size {}", back.len()));
        }
        let audit = hardness::audit(&inst, &map);
        if audit.max_degree > GADGET_MAX_DEGREE
            || audit.max_habitat_size > max_habitat
            || !audit.dockings_once
            || !audit.degree_formula_failures.is_empty()
        {
            return Err(format!("{name}: audit {audit:?}"));
        }
        if plane && (!oracle::plane_drawing(&inst) || inst.validate().is_err()) {
            return Err(format!("{name}: drawing is not plane"));
        }
        let elapsed = start.elapsed();
        if elapsed > GADGET_BUDGET {
            return Err(format!("{name}: took {elapsed:?}"));
        }
        lines.push(format!("{name} {} in {elapsed:.1?}", sol.cost));
    }
    Ok(lines.join(", "))
}

fn criterion6() -> Verdict_ {
    gadget_soundness(|vc| Ok(construct1(vc)), 4, C1_MAX_HABITAT, false)
}

fn criterion7() -> Verdict_ {
    gadget_soundness(|vc| construct2(vc).map_err(|e| e.to_string()), 7, C2_MAX_HABITAT, true)
}

fn criterion8() -> Verdict_ {
    let mut counts = [0usize; 3];
    for seed in 0..INVARIANT_TRIALS {
        for (i, regime) in [Regime::Deg3, Regime::Deg4h4, Regime::PlanarH3].into_iter().enumerate() {
            let (n, r) = if regime == Regime::Deg4h4 { (DEG4_PATH_N, DEG4_PATH_N) } else { (DEG3_N, DEG3_R) };
            let inst = generate(&GeneratorConfig::new(regime, n, r, seed));
            let (reduced, ledger) = preprocess_all(&inst);
            if let Verdict::NoInstance { .. } = ledger.verdict {
                continue;
            }
            let post = check_postconditions(&reduced);
            if !post.is_empty() {
                return Err(format!("{} seed {seed}: postconditions {post:?}", regime.name()));
            }
            match regime {
                Regime::Deg3 => {
                    let zones = find_zones(&reduced).map_err(|e| e.to_string())?;
                    if !zones_edge_disjoint(&zones, reduced.edge_count()) {
                        return Err(format!("seed {seed}: zones overlap"));
                    }
                }
                Regime::Deg4h4 => {
                    let run = solve_deg4_detailed(&inst, DEFAULT_COMPONENT_CAP)
                        .map_err(|e| format!("seed {seed}: {e}"))?;
                    if !run.audit.is_clean() || run.graph.max_habitats_per_edge > HABITATS_PER_EDGE_BOUND {
                        return Err(format!("seed {seed}: audit {:?}", run.audit));
                    }
                }
                _ => {}
            }
            counts[i] += 1;
        }
    }
    if counts[1] < INVARIANT_TRIALS as usize / 2 {
        return Err(format!("only {} preprocessed degree-four instances", counts[1]));
    }
    Ok(format!("preprocessed deg3 {} deg4 {} planar {}, zero violations", counts[0], counts[1], counts[2]))
}

fn snapshot(regime: Regime, seed: u64) -> Result<(String, String, String), String> {
    let inst = if regime == Regime::Gadget {
        hardness::gadget_instance(seed)
    } else {
        generate(&GeneratorConfig::new(regime, DEG3_N, DEG3_R, seed))
    };
    let text = serde_json::to_string(&InstanceFile::from(inst.clone())).map_err(|e| e.to_string())?;
    let out = dispatch(&inst, Algo::Auto).map_err(|e| e.to_string())?;
    let report = serde_json::to_string(&out.report.untimed()).map_err(|e| e.to_string())?;
    let sol = serde_json::to_string(&out.solution.map(|s| s.to_file(&inst))).map_err(|e| e.to_string())?;
    Ok((text, report, sol))
}

fn criterion9() -> Verdict_ {
    let mut runs = 0;
    for regime in [Regime::Deg3, Regime::Deg4h4, Regime::PlanarH3, Regime::Gadget] {
        let seeds = if regime == Regime::Gadget { 0..4 } else { 0..50 };
        for seed in seeds {
            if snapshot(regime, seed)? != snapshot(regime, seed)? {
                return Err(format!("{} seed {seed} differs", regime.name()));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} seeded runs byte-identical"))
}

fn criterion10() -> Verdict_ {
    let mut parts = Vec::new();
    for regime in [Regime::Deg3, Regime::Deg4h4] {
        let inst = generate(&GeneratorConfig::new(regime, SCALE_N, SCALE_R, 1));
        let start = Instant::now();
        let sol = if regime == Regime::Deg3 { solve_deg3(&inst) } else { solve_deg4(&inst) };
        let elapsed = start.elapsed();
        let sol = sol.map_err(|e| format!("{}: {e}", regime.name()))?;
        if !sol.is_feasible() || inst.habitats().len() < SCALE_R || inst.vertex_count() < SCALE_N {
            return Err(format!("{}: bad run", regime.name()));
        }
        if elapsed > SCALE_BUDGET {
            return Err(format!("{}: took {elapsed:?}", regime.name()));
        }
        parts.push(format!("{} {elapsed:.2?}", regime.name()));
    }
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let planar = planar_runs();
    let results: Vec<(usize, Verdict_)> = vec![
        (1, criterion1()),
        (2, criterion2()),
        (3, criterion3(&planar)),
        (4, criterion4(&planar)),
        (5, criterion5()),
        (6, criterion6()),
        (7, criterion7()),
        (8, criterion8()),
        (9, criterion9()),
        (10, criterion10()),
    ];
    let mut ok = true;
    for (i, r) in results {
        match r {
            Ok(msg) => println!("criterion {i}: PASS {msg}"),
            Err(msg) => {
                ok = false;
                println!("criterion {i}: FAIL {msg}");
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
