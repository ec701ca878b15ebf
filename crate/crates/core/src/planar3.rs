//! Embedded planar instances with habitats of size at most three.
//!
//! Each triangle habitat splits the plane in two. A habitat whose inside
//! habitats are all faces is collapsed by pushing the cost of its cheapest
//! interior subsolutions onto its three boundary edges (Rule 8). Once every
//! habitat is a face, the residual instance is solved exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::exact::{minimize, solve_exact, ExactError};
use crate::geometry::{strictly_inside_triangle, Point};
use crate::model::{Cost, Edge, EdgeId, Instance, Relabel, Solution, VertexId};
use crate::preprocess::{preprocess_all, ReductionLedger, Verdict};

pub const MAX_HABITAT_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HabitatGeometry {
    pub habitat: usize,
    pub triangle: [VertexId; 3],
    pub inside_vertices: Vec<VertexId>,
    pub outside_vertices: Vec<VertexId>,
    pub inside_edges: Vec<EdgeId>,
    pub outside_edges: Vec<EdgeId>,
    pub inside_habitats: Vec<usize>,
    pub outside_habitats: Vec<usize>,
    pub boundary_edges: [EdgeId; 3],
}

impl HabitatGeometry {
    pub fn is_face(&self) -> bool {
        self.inside_habitats.is_empty()
    }
}

fn require_embedding(instance: &Instance) -> Result<&[Point], SolveError> {
    instance
        .embedding()
        .ok_or_else(|| SolveError::Inapplicable("planar3 requires an embedding".into()))
}

/// Splits vertices, edges and habitats into those inside and outside a triangle habitat.
pub fn classify(instance: &Instance, habitat: usize) -> Result<HabitatGeometry, SolveError> {
    let pts = require_embedding(instance)?;
    let hv = instance.habitat(habitat);
    let boundary = instance.induced_edges(hv);
    if hv.len() != 3 || boundary.len() != 3 {
        return Err(SolveError::Inapplicable(format!("habitat {habitat} does not induce a triangle")));
    }
    let [a, b, c] = [hv[0], hv[1], hv[2]];
    let mut inside = vec![false; instance.vertex_count()];
    let (mut inside_vertices, mut outside_vertices) = (Vec::new(), Vec::new());
    for v in 0..instance.vertex_count() {
        if hv.contains(&v) {
            continue;
        }
        if strictly_inside_triangle(pts[v], pts[a], pts[b], pts[c]) {
            inside[v] = true;
            inside_vertices.push(v);
        } else {
            outside_vertices.push(v);
        }
    }
    let (mut inside_edges, mut outside_edges) = (Vec::new(), Vec::new());
    for (id, e) in instance.edges().iter().enumerate() {
        if boundary.binary_search(&id).is_ok() {
            continue;
        }
        if inside[e.u] || inside[e.v] {
            inside_edges.push(id);
        } else {
            outside_edges.push(id);
        }
    }
    let (mut inside_habitats, mut outside_habitats) = (Vec::new(), Vec::new());
    for (id, other) in instance.habitats().iter().enumerate() {
        if id == habitat {
            continue;
        }
        let ins = other.iter().filter(|&&v| inside[v]).count();
        let outs = other.iter().filter(|&&v| !inside[v] && !hv.contains(&v)).count();
        match (ins, outs) {
            (0, _) => outside_habitats.push(id),
            (_, 0) => inside_habitats.push(id),
            _ => {
                return Err(SolveError::Internal(format!(
                    "habitat {id} straddles the boundary of habitat {habitat}"
                )))
            }
        }
    }
    Ok(HabitatGeometry {
        habitat,
        triangle: [a, b, c],
        inside_vertices,
        outside_vertices,
        inside_edges,
        outside_edges,
        inside_habitats,
        outside_habitats,
        boundary_edges: [boundary[0], boundary[1], boundary[2]],
    })
}

pub fn classify_all(instance: &Instance) -> Result<Vec<HabitatGeometry>, SolveError> {
    (0..instance.habitats().len()).map(|h| classify(instance, h)).collect()
}

/// Smallest-id habitat that is not a face but has only faces inside it.
pub fn find_reducible(geometries: &[HabitatGeometry]) -> Option<usize> {
    let face: BTreeMap<usize, bool> = geometries.iter().map(|g| (g.habitat, g.is_face())).collect();
    geometries
        .iter()
        .find(|g| !g.is_face() && g.inside_habitats.iter().all(|h| face[h]))
        .map(|g| g.habitat)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmittingOptimum {
    pub edge: EdgeId,
    pub opt: Cost,
    pub witness: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsideOptima {
    pub habitat: usize,
    pub opt: Cost,
    pub witness: Vec<EdgeId>,
    /// One entry per unforced boundary edge, in edge-id order.
    pub omitting: Vec<OmittingOptimum>,
}

impl InsideOptima {
    pub fn omitting(&self, e: EdgeId) -> Option<&OmittingOptimum> {
        self.omitting.iter().find(|o| o.edge == e)
    }
}

/// Cheapest interior subsolutions with all boundary edges free, and with each
/// unforced boundary edge priced out.
pub fn inside_optima(instance: &Instance, geometry: &HabitatGeometry) -> Result<InsideOptima, SolveError> {
    let m = instance.edge_count();
    let mut allowed = vec![false; m];
    for &e in geometry.inside_edges.iter().chain(&geometry.boundary_edges) {
        allowed[e] = true;
    }
    let required: Vec<bool> = (0..m).map(|e| allowed[e] && instance.edge(e).forced).collect();
    let inside_total: Cost = geometry.inside_edges.iter().map(|&e| instance.edge(e).cost).sum();
    let mut costs: Vec<Cost> = instance.edges().iter().map(|e| e.cost).collect();
    for &e in &geometry.boundary_edges {
        costs[e] = 0;
    }
    let solve = |costs: &[Cost]| -> Result<(Cost, Vec<EdgeId>), SolveError> {
        match minimize(instance, costs, &allowed, &required, &geometry.inside_habitats) {
            Ok(o) => Ok((o.cost, o.edges)),
            Err(ExactError::Infeasible { habitat }) => Err(SolveError::Internal(format!(
                "inside habitat {habitat} of {} cannot be satisfied",
                geometry.habitat
            ))),
            Err(other) => Err(other.into()),
        }
    };
    let (opt, witness) = solve(&costs)?;
    let mut omitting = Vec::new();
    for &e in &geometry.boundary_edges {
        if instance.edge(e).forced {
            continue;
        }
        let mut priced = costs.clone();
        priced[e] = 1 + inside_total;
        let (opt_e, witness_e) = solve(&priced)?;
        omitting.push(OmittingOptimum { edge: e, opt: opt_e, witness: witness_e });
    }
    Ok(InsideOptima { habitat: geometry.habitat, opt, witness, omitting })
}

/// One application of Rule 8 with everything needed to undo it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule8Application {
    pub habitat: usize,
    pub geometry: HabitatGeometry,
    pub optima: InsideOptima,
    /// Change of the budget, `k' = k + delta`.
    pub delta: i64,
    /// Boundary edges whose cost went negative and were forced.
    pub negative: Vec<EdgeId>,
    pub before: Instance,
    pub after: Instance,
    pub relabel: Relabel,
}

impl Rule8Application {
    /// Extends a solution of the reduced instance to one of the instance before the rule.
    pub fn unwind(&self, reduced: &[EdgeId]) -> Vec<EdgeId> {
        let mut out = self.relabel.edges_to_parent(reduced);
        let missing: Vec<EdgeId> =
            self.geometry.boundary_edges.iter().copied().filter(|e| !out.contains(e)).collect();
        let interior = match missing.as_slice() {
            [] => &self.optima.witness,
            [f] => &self.optima.omitting(*f).expect("an omitted edge is unforced").witness,
            _ => panic!("reduced solution leaves habitat {} disconnected", self.habitat),
        };
        out.extend(interior.iter().filter(|e| self.geometry.inside_edges.binary_search(e).is_ok()));
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Applies Rule 8 to a reducible habitat.
pub fn apply_rule8(instance: &Instance, geometry: &HabitatGeometry, optima: &InsideOptima) -> Rule8Application {
    let mut next = instance.clone();
    let opt = optima.opt as i64;
    let mut delta = 2 * opt;
    let mut negative = Vec::new();
    for &e in &geometry.boundary_edges {
        let edge = instance.edge(e);
        let mut cost = edge.cost as i64 + opt;
        if !edge.forced {
            let opt_e = optima.omitting(e).expect("unforced boundary edge has an omitting optimum").opt as i64;
            delta -= opt_e;
            cost -= opt_e;
        }
        if cost < 0 {
            delta += -cost;
            negative.push(e);
            next.set_forced(e, true);
            cost = 0;
        }
        next.set_cost(e, cost as Cost);
    }
    next.set_budget(instance.budget().map(|k| k + delta));
    let mut keep_v = vec![true; instance.vertex_count()];
    let mut keep_e = vec![true; instance.edge_count()];
    let mut keep_h = vec![true; instance.habitats().len()];
    geometry.inside_vertices.iter().for_each(|&v| keep_v[v] = false);
    geometry.inside_edges.iter().for_each(|&e| keep_e[e] = false);
    geometry.inside_habitats.iter().for_each(|&h| keep_h[h] = false);
    let (after, relabel) = next.compact(&keep_v, &keep_e, &keep_h);
    Rule8Application {
        habitat: geometry.habitat,
        geometry: geometry.clone(),
        optima: optima.clone(),
        delta,
        negative,
        before: instance.clone(),
        after,
        relabel,
    }
}

/// Finds a reducible habitat and reduces it, or reports that all habitats are faces.
pub fn rule8_step(instance: &Instance) -> Result<Option<Rule8Application>, SolveError> {
    let geometries = classify_all(instance)?;
    let Some(h) = find_reducible(&geometries) else {
        return Ok(None);
    };
    let optima = inside_optima(instance, &geometries[h])?;
    Ok(Some(apply_rule8(instance, &geometries[h], &optima)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Planar3Run {
    pub solution: Solution,
    pub ledger: ReductionLedger,
    pub reduced: Instance,
    pub applications: Vec<Rule8Application>,
    pub residual: Instance,
}

pub fn solve_planar3(instance: &Instance) -> Result<Solution, SolveError> {
    solve_planar3_detailed(instance).map(|run| run.solution)
}

pub fn solve_planar3_detailed(instance: &Instance) -> Result<Planar3Run, SolveError> {
    require_embedding(instance)?;
    if instance.max_habitat_size() > MAX_HABITAT_SIZE {
        return Err(SolveError::Inapplicable(format!(
            "habitat size {} exceeds {MAX_HABITAT_SIZE}",
            instance.max_habitat_size()
        )));
    }
    instance.validate()?;
    let (reduced, ledger) = preprocess_all(instance);
    if let Verdict::NoInstance { habitat } = ledger.verdict {
        return Err(SolveError::NoInstance { habitat });
    }
    let mut applications = Vec::new();
    let mut current = reduced.clone();
    while let Some(app) = rule8_step(&current)? {
        current = app.after.clone();
        applications.push(app);
    }
    let residual = solve_exact(&current.clone().with_budget(None), None)?;
    let mut edges = residual.edges;
    for app in applications.iter().rev() {
        edges = app.unwind(&edges);
    }
    let solution = instance.is_solution(&ledger.lift(&edges));
    Ok(Planar3Run { solution, ledger, reduced, applications, residual: current })
}

/// Vertex names of the worked example, in id order.
pub const FIGURE2_NAMES: [&str; 5] = ["v_l", "v_r", "v_t", "v_b", "v_c"];

/// The worked Rule 8 example: outer habitat `{v_l, v_r, v_t}`, reducible
/// habitat `{v_l, v_r, v_b}` with the face habitats `{v_l, v_r, v_c}` and
/// `{v_r, v_b, v_c}` inside it, budget 11.
pub fn figure2_instance() -> Instance {
    let (l, r, t, b, c) = (0, 1, 2, 3, 4);
    let edges = vec![
        Edge::new(l, c, 4),
        Edge::new(r, c, 3),
        Edge::new(b, c, 8),
        Edge::new(l, t, 1),
        Edge::new(r, t, 1),
        Edge::new(l, r, 4),
        Edge::new(l, b, 1),
        Edge::new(r, b, 1),
    ];
    let habitats = vec![vec![l, r, t], vec![l, r, b], vec![l, r, c], vec![r, b, c]];
    let embedding = vec![[0, 0], [8, 0], [4, 4], [4, -6], [4, -2]];
    Instance::new(5, edges, habitats, Some(11), Some(embedding)).expect("worked example is valid")
}

/// Id of the reducible habitat in [`figure2_instance`].
pub const FIGURE2_REDUCIBLE: usize = 1;

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(inst: &Instance, u: usize, v: usize) -> EdgeId {
        inst.edge_between(u, v).unwrap()
    }

    #[test]
    fn figure2_classification() {
        let inst = figure2_instance();
        let g = classify(&inst, FIGURE2_REDUCIBLE).unwrap();
        assert_eq!(g.inside_vertices, vec![4]);
        assert_eq!(g.outside_vertices, vec![2]);
        assert_eq!(g.inside_habitats, vec![2, 3]);
        assert_eq!(g.outside_habitats, vec![0]);
        let all = classify_all(&inst).unwrap();
        assert_eq!(find_reducible(&all), Some(FIGURE2_REDUCIBLE));
    }

    #[test]
    fn figure2_inside_optima() {
        let inst = figure2_instance();
        let g = classify(&inst, FIGURE2_REDUCIBLE).unwrap();
        let o = inside_optima(&inst, &g).unwrap();
        assert_eq!(o.opt, 3);
        let rb = edge(&inst, 1, 3);
        let lb = edge(&inst, 0, 3);
        let lr = edge(&inst, 0, 1);
        assert_eq!(o.omitting(rb).unwrap().opt, 11);
        assert_eq!(o.omitting(lb).unwrap().opt, 3);
        assert_eq!(o.omitting(lr).unwrap().opt, 7);
        let mut with_boundary = o.witness.clone();
        with_boundary.extend(g.boundary_edges);
        with_boundary.sort_unstable();
        with_boundary.dedup();
        let mut expected = vec![lr, lb, rb, edge(&inst, 1, 4)];
        expected.sort_unstable();
        assert_eq!(with_boundary, expected);
    }

    #[test]
    fn figure2_rule8_forces_rb_and_preserves_optimum() {
        let inst = figure2_instance();
        let app = rule8_step(&inst).unwrap().unwrap();
        assert_eq!(app.delta, -8);
        assert_eq!(app.after.budget(), Some(3));
        assert_eq!(app.after.vertex_count(), 4);
        assert_eq!(app.after.habitats().len(), 2);
        let rb = app.after.edge_between(1, 3).unwrap();
        assert!(app.after.edge(rb).forced);
        assert_eq!(app.after.edge(rb).cost, 0);
        let before = solve_exact(&inst, None).unwrap();
        let after = solve_exact(&app.after, None).unwrap();
        assert_eq!(before.cost as i64, after.cost as i64 - app.delta);
        let lifted = inst.is_solution(&app.unwind(&after.edges));
        assert!(lifted.is_feasible());
        assert_eq!(lifted.cost, before.cost);
    }

    #[test]
    fn figure2_end_to_end_within_budget() {
        let sol = solve_planar3(&figure2_instance()).unwrap();
        assert!(sol.is_feasible());
        assert!(sol.cost <= 11);
    }

    /// Three nested triangles with a spoke structure so every level stays connected.
    fn nested() -> Instance {
        let pts = vec![
            [0, 0], [60, 0], [30, 52],
            [15, 8], [45, 8], [30, 35],
            [25, 14], [35, 14], [30, 22],
        ];
        let mut edges = Vec::new();
        for t in 0..3 {
            let base = 3 * t;
            edges.push(Edge::new(base, base + 1, 1));
            edges.push(Edge::new(base + 1, base + 2, 1));
            edges.push(Edge::new(base, base + 2, 1));
        }
        for t in 0..2 {
            for i in 0..3 {
                edges.push(Edge::new(3 * t + i, 3 * (t + 1) + i, 2));
            }
        }
        let habitats = vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]];
        Instance::new(9, edges, habitats, None, Some(pts)).unwrap()
    }

    #[test]
    fn middle_of_three_nested_triangles_is_reducible() {
        let inst = nested();
        inst.validate().unwrap();
        let all = classify_all(&inst).unwrap();
        assert_eq!(all[0].inside_habitats, vec![1, 2]);
        assert_eq!(all[1].inside_habitats, vec![2]);
        assert!(all[2].is_face());
        assert_eq!(find_reducible(&all), Some(1));
    }

    #[test]
    fn disjoint_insider_shifts_budget_by_minus_two() {
        // outer triangle with an inner triangle joined by three spokes; unit costs
        let mut inst = nested();
        let keep_v: Vec<bool> = (0..9).map(|v| v < 6).collect();
        let keep_e: Vec<bool> = inst.edges().iter().map(|e| e.u < 6 && e.v < 6).collect();
        let (mut two, _) = inst.compact(&keep_v, &keep_e, &[true, true, false]);
        for e in 0..two.edge_count() {
            two.set_cost(e, 1);
        }
        inst = two.with_budget(Some(10));
        let g = classify(&inst, 0).unwrap();
        let o = inside_optima(&inst, &g).unwrap();
        assert_eq!(o.opt, 2);
        assert!(o.omitting.iter().all(|x| x.opt == 2));
        let app = apply_rule8(&inst, &g, &o);
        assert_eq!(app.delta, -2);
        assert!(app.negative.is_empty());
        assert!(g.boundary_edges.iter().all(|&e| app.before.edge(e).cost == 1));
        assert!(app.after.edges().iter().all(|e| e.cost == 1));
        assert_eq!(app.after.budget(), Some(8));
        let before = solve_exact(&inst, None).unwrap().cost as i64;
        let after = solve_exact(&app.after, None).unwrap().cost as i64;
        assert_eq!(before, after - app.delta);
    }

    #[test]
    fn faces_only_needs_no_rule8() {
        let inst = Instance::new(
            4,
            vec![Edge::new(0, 1, 1), Edge::new(0, 2, 1), Edge::new(1, 2, 1), Edge::new(1, 3, 1), Edge::new(2, 3, 1)],
            vec![vec![0, 1, 2], vec![1, 2, 3]],
            None,
            Some(vec![[0, 0], [4, 0], [2, 3], [6, 3]]),
        )
        .unwrap();
        assert!(rule8_step(&inst).unwrap().is_none());
    }

    #[test]
    fn missing_embedding_is_inapplicable() {
        let inst = figure2_instance().with_embedding(None).unwrap();
        assert!(matches!(solve_planar3(&inst), Err(SolveError::Inapplicable(_))));
    }
}
