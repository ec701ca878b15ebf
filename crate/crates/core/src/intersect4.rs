//! Linear-time solver for maximum degree four and habitats of size at most four.
//!
//! Pipeline: reduce, translate to explicit feasible families, drop habitats
//! contained in others (Rule 9), build the habitat intersection graph, and
//! solve each of its components on its own.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::exact::{enumerate_feasible_sets, ExactError, FeasibleFamily};
use crate::model::{Cost, EdgeId, Instance, Solution, VertexId};
use crate::preprocess::{preprocess_all, ReductionLedger, Verdict};
use crate::zones3::habitats_by_vertex;

pub const MAX_DEGREE: usize = 4;
pub const MAX_HABITAT_SIZE: usize = 4;
/// Habitats per edge when degree and habitat size are both at most four.
pub const HABITATS_PER_EDGE_BOUND: usize = 21;
/// Default limit on the habitat count of a component that is neither a path nor a cycle.
pub const DEFAULT_COMPONENT_CAP: usize = 12;

/// 2-DIAM GBP-C instance restated with explicit feasible families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenInstance {
    pub instance: Instance,
    /// `None` once a habitat has been removed by Rule 9.
    pub families: Vec<Option<FeasibleFamily>>,
}

impl GenInstance {
    pub fn alive(&self) -> Vec<usize> {
        (0..self.families.len()).filter(|&h| self.families[h].is_some()).collect()
    }

    pub fn family(&self, h: usize) -> &FeasibleFamily {
        self.families[h].as_ref().expect("habitat is alive")
    }

    pub fn lambda(&self) -> usize {
        self.families.iter().flatten().map(FeasibleFamily::len).max().unwrap_or(0)
    }

    /// `F` solves the instance iff it holds the forced edges and a member of every family.
    pub fn is_solution(&self, edges: &[EdgeId]) -> bool {
        let mask = self.instance.edge_mask(edges);
        if self.instance.forced_edges().iter().any(|&e| !mask[e]) {
            return false;
        }
        self.families.iter().flatten().all(|fam| {
            (0..fam.len()).any(|i| fam.member(i).iter().all(|&e| mask[e]))
        })
    }
}

/// Computes every habitat's feasible family.
pub fn to_gen(instance: &Instance) -> Result<GenInstance, SolveError> {
    if let Some(h) = instance.habitats().iter().position(|h| h.len() > MAX_HABITAT_SIZE) {
        return Err(SolveError::Inapplicable(format!(
            "habitat {h} has {} vertices (limit {MAX_HABITAT_SIZE})",
            instance.habitat(h).len()
        )));
    }
    let families = (0..instance.habitats().len())
        .map(|h| enumerate_feasible_sets(instance, h).map(Some))
        .collect::<Result<Vec<_>, ExactError>>()?;
    Ok(GenInstance { instance: instance.clone(), families })
}

fn is_subset(small: &[VertexId], big: &[VertexId]) -> bool {
    small.iter().all(|v| big.binary_search(v).is_ok())
}

/// Removes every habitat contained in another one, filtering the containers' families.
///
/// Contained habitats are processed smallest first, ties by id.
pub fn apply_rule9(mut gen: GenInstance) -> Result<GenInstance, SolveError> {
    let by_vertex = habitats_by_vertex(&gen.instance);
    let mut order = gen.alive();
    order.sort_by_key(|&h| (gen.instance.habitat(h).len(), h));
    for small in order {
        if gen.families[small].is_none() {
            continue;
        }
        let sv = gen.instance.habitat(small).to_vec();
        let containers: Vec<usize> = by_vertex[sv[0]]
            .iter()
            .copied()
            .filter(|&h| h != small && gen.families[h].is_some() && is_subset(&sv, gen.instance.habitat(h)))
            .collect();
        if containers.is_empty() {
            continue;
        }
        let inner = gen.families[small].take().expect("alive");
        for h in containers {
            let fam = gen.families[h].as_mut().expect("alive");
            let position: Vec<usize> = inner
                .edges
                .iter()
                .map(|e| fam.edges.binary_search(e).expect("sub-habitat edges are container edges"))
                .collect();
            let lifted: Vec<u64> = inner
                .masks
                .iter()
                .map(|&m| {
                    position
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| m >> i & 1 == 1)
                        .fold(0u64, |acc, (_, &p)| acc | 1 << p)
                })
                .collect();
            fam.masks.retain(|&m| lifted.iter().any(|&l| l & !m == 0));
            if fam.masks.is_empty() {
                return Err(SolveError::Internal(format!("family of habitat {h} emptied by rule 9")));
            }
        }
    }
    Ok(gen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentShape {
    Path,
    Cycle,
    ConstantSize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionComponent {
    pub shape: ComponentShape,
    /// Path order, cycle order starting at the smallest id, or sorted ids.
    pub habitats: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionGraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub components: Vec<IntersectionComponent>,
    pub max_habitats_per_edge: usize,
}

impl IntersectionGraph {
    pub fn neighbors(&self, h: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == h { Some(b) } else if b == h { Some(a) } else { None })
            .collect()
    }
}

fn shared_edges(instance: &Instance, a: &[VertexId], b: &[VertexId]) -> Vec<EdgeId> {
    let common: Vec<VertexId> = a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect();
    instance.induced_edges(&common)
}

fn proper_subset(small: &[EdgeId], big: &[EdgeId]) -> bool {
    small.len() < big.len() && small.iter().all(|e| big.binary_search(e).is_ok())
}

/// Builds the habitat intersection graph over the alive habitats and classifies its components.
pub fn build_intersection_graph(gen: &GenInstance) -> IntersectionGraph {
    let inst = &gen.instance;
    let alive = gen.alive();
    let mut per_edge: Vec<Vec<usize>> = vec![Vec::new(); inst.edge_count()];
    for &h in &alive {
        for &e in &gen.family(h).edges {
            per_edge[e].push(h);
        }
    }
    let max_habitats_per_edge = per_edge.iter().map(Vec::len).max().unwrap_or(0);

    // Habitats sharing at least one edge with a given habitat.
    let mut edge_partners: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    let mut candidates = BTreeSet::new();
    for (e, hs) in per_edge.iter().enumerate() {
        for (i, &a) in hs.iter().enumerate() {
            for &b in &hs[i + 1..] {
                edge_partners.entry(a).or_default().insert(b);
                edge_partners.entry(b).or_default().insert(a);
                if !inst.edge(e).forced {
                    candidates.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    let mut edges = Vec::new();
    for (a, b) in candidates {
        let (ha, hb) = (inst.habitat(a), inst.habitat(b));
        let shared = shared_edges(inst, ha, hb);
        let dominated = [(a, ha), (b, hb)].iter().any(|&(x, hx)| {
            edge_partners[&x].iter().any(|&c| {
                c != a && c != b && proper_subset(&shared, &shared_edges(inst, hx, inst.habitat(c)))
            })
        });
        if !dominated {
            edges.push((a, b));
        }
    }

    let mut adj: BTreeMap<usize, Vec<usize>> = alive.iter().map(|&h| (h, Vec::new())).collect();
    for &(a, b) in &edges {
        adj.get_mut(&a).unwrap().push(b);
        adj.get_mut(&b).unwrap().push(a);
    }
    for list in adj.values_mut() {
        list.sort_unstable();
    }
    let mut seen = BTreeSet::new();
    let mut components = Vec::new();
    for &start in &alive {
        if !seen.insert(start) {
            continue;
        }
        let mut members = vec![start];
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            i += 1;
            for &y in &adj[&x] {
                if seen.insert(y) {
                    members.push(y);
                }
            }
        }
        members.sort_unstable();
        components.push(classify(&members, &adj));
    }
    IntersectionGraph { nodes: alive, edges, components, max_habitats_per_edge }
}

fn classify(members: &[usize], adj: &BTreeMap<usize, Vec<usize>>) -> IntersectionComponent {
    let degree = |h: usize| adj[&h].len();
    let edge_count: usize = members.iter().map(|&h| degree(h)).sum::<usize>() / 2;
    if members.iter().all(|&h| degree(h) <= 2) {
        if edge_count + 1 == members.len() {
            let start = members.iter().copied().find(|&h| degree(h) <= 1).expect("a path has an end");
            return IntersectionComponent { shape: ComponentShape::Path, habitats: walk(start, adj, members.len()) };
        }
        if edge_count == members.len() && members.len() >= 3 {
            return IntersectionComponent { shape: ComponentShape::Cycle, habitats: walk(members[0], adj, members.len()) };
        }
    }
    IntersectionComponent { shape: ComponentShape::ConstantSize, habitats: members.to_vec() }
}

fn walk(start: usize, adj: &BTreeMap<usize, Vec<usize>>, len: usize) -> Vec<usize> {
    let mut order = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while order.len() < len {
        let next = adj[&cur].iter().copied().find(|&y| y != prev && !order.contains(&y));
        match next {
            Some(y) => {
                prev = cur;
                cur = y;
                order.push(y);
            }
            None => break,
        }
    }
    order
}

/// Families pruned to inclusion-minimal members, as sorted edge lists.
pub fn minimal_members(fam: &FeasibleFamily) -> Vec<Vec<EdgeId>> {
    let minimal: Vec<u64> = fam
        .masks
        .iter()
        .copied()
        .filter(|&m| !fam.masks.iter().any(|&o| o != m && o & !m == 0))
        .collect();
    minimal.into_iter().map(|m| crate::exact::mask_edges(&fam.edges, m)).collect()
}

/// Edge costs used inside components: forced edges are paid once, globally.
pub fn component_costs(instance: &Instance) -> Vec<Cost> {
    instance.edges().iter().map(|e| if e.forced { 0 } else { e.cost }).collect()
}

fn union_cost(sets: &[&[EdgeId]], costs: &[Cost]) -> Cost {
    let mut all: Vec<EdgeId> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all.iter().map(|&e| costs[e]).sum()
}

/// Members of `mask`-indexed window edges.
struct Window {
    edges: Vec<EdgeId>,
}

impl Window {
    fn new(groups: &[&Vec<Vec<EdgeId>>]) -> Self {
        let mut edges: Vec<EdgeId> = groups.iter().flat_map(|g| g.iter().flatten().copied()).collect();
        edges.sort_unstable();
        edges.dedup();
        Window { edges }
    }

    fn mask(&self, set: &[EdgeId]) -> u64 {
        set.iter().fold(0, |m, e| m | 1 << self.edges.binary_search(e).expect("window edge"))
    }

    fn cost(&self, mut mask: u64, costs: &[Cost]) -> Cost {
        let mut total = 0;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            total += costs[self.edges[i]];
        }
        total
    }
}

/// Minimum union cost choosing one member per habitat along a path whose
/// habitats at distance three or more share no edge of positive cost.
///
/// Returns the cost and the chosen member index for each position.
pub fn path_dp(members: &[Vec<Vec<EdgeId>>], costs: &[Cost]) -> (Cost, Vec<usize>) {
    let r = members.len();
    match r {
        0 => return (0, Vec::new()),
        1 => {
            let (i, c) = members[0]
                .iter()
                .enumerate()
                .map(|(i, m)| (i, union_cost(&[m], costs)))
                .min_by_key(|&(i, c)| (c, i))
                .expect("non-empty family");
            return (c, vec![i]);
        }
        2 => {
            let mut best = (Cost::MAX, vec![0, 0]);
            for (i, a) in members[0].iter().enumerate() {
                for (j, b) in members[1].iter().enumerate() {
                    let c = union_cost(&[a, b], costs);
                    if c < best.0 {
                        best = (c, vec![i, j]);
                    }
                }
            }
            return best;
        }
        _ => {}
    }
    // table[b][c] = min cost of habitats 0..=i+2 given members b, c of i+1, i+2
    let w = Window::new(&[&members[0], &members[1], &members[2]]);
    let m0: Vec<u64> = members[0].iter().map(|s| w.mask(s)).collect();
    let m1: Vec<u64> = members[1].iter().map(|s| w.mask(s)).collect();
    let m2: Vec<u64> = members[2].iter().map(|s| w.mask(s)).collect();
    let mut table = vec![vec![Cost::MAX; m2.len()]; m1.len()];
    let mut back: Vec<Vec<Vec<u16>>> = Vec::with_capacity(r - 2);
    let mut arg = vec![vec![0u16; m2.len()]; m1.len()];
    for (a, &ma) in m0.iter().enumerate() {
        for (b, &mb) in m1.iter().enumerate() {
            for (c, &mc) in m2.iter().enumerate() {
                let v = w.cost(ma | mb | mc, costs);
                if v < table[b][c] {
                    table[b][c] = v;
                    arg[b][c] = a as u16;
                }
            }
        }
    }
    back.push(arg);
    for i in 1..r - 2 {
        let w = Window::new(&[&members[i], &members[i + 1], &members[i + 2]]);
        let ma: Vec<u64> = members[i].iter().map(|s| w.mask(s)).collect();
        let mb: Vec<u64> = members[i + 1].iter().map(|s| w.mask(s)).collect();
        let mc: Vec<u64> = members[i + 2].iter().map(|s| w.mask(s)).collect();
        let mut next = vec![vec![Cost::MAX; mc.len()]; mb.len()];
        let mut arg = vec![vec![0u16; mc.len()]; mb.len()];
        for (a, &xa) in ma.iter().enumerate() {
            for (b, &xb) in mb.iter().enumerate() {
                let prev = table[a][b];
                if prev == Cost::MAX {
                    continue;
                }
                let covered = xa | xb;
                for (c, &xc) in mc.iter().enumerate() {
                    let v = prev + w.cost(xc & !covered, costs);
                    if v < next[b][c] {
                        next[b][c] = v;
                        arg[b][c] = a as u16;
                    }
                }
            }
        }
        table = next;
        back.push(arg);
    }
    let mut best = (Cost::MAX, 0, 0);
    for (b, row) in table.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v < best.0 {
                best = (v, b, c);
            }
        }
    }
    let mut choice = vec![0usize; r];
    choice[r - 1] = best.2;
    choice[r - 2] = best.1;
    for i in (0..r - 2).rev() {
        choice[i] = back[i][choice[i + 1]][choice[i + 2]] as usize;
    }
    (best.0, choice)
}

/// Exhaustive minimum over the product of the given families.
pub fn brute_force_product(members: &[Vec<Vec<EdgeId>>], costs: &[Cost]) -> (Cost, Vec<usize>) {
    fn go(
        i: usize,
        members: &[Vec<Vec<EdgeId>>],
        costs: &[Cost],
        chosen: &mut Vec<EdgeId>,
        cost: Cost,
        pick: &mut Vec<usize>,
        best: &mut (Cost, Vec<usize>),
    ) {
        if cost >= best.0 {
            return;
        }
        if i == members.len() {
            *best = (cost, pick.clone());
            return;
        }
        for (j, m) in members[i].iter().enumerate() {
            let added: Vec<EdgeId> = m.iter().copied().filter(|e| !chosen.contains(e)).collect();
            let extra: Cost = added.iter().map(|&e| costs[e]).sum();
            chosen.extend(&added);
            pick.push(j);
            go(i + 1, members, costs, chosen, cost + extra, pick, best);
            pick.pop();
            chosen.truncate(chosen.len() - added.len());
        }
    }
    let mut best = (Cost::MAX, Vec::new());
    go(0, members, costs, &mut Vec::new(), 0, &mut Vec::new(), &mut best);
    best
}

/// Habitats at path distance three or more must not share a positive-cost edge.
fn path_is_separated(instance: &Instance, order: &[usize], costs: &[Cost]) -> bool {
    for i in 0..order.len() {
        for j in i + 3..order.len() {
            let shared = shared_edges(instance, instance.habitat(order[i]), instance.habitat(order[j]));
            if shared.iter().any(|&e| costs[e] > 0) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentMethod {
    PathDp,
    CycleDp,
    BruteForce,
}

/// Minimum-cost edge set covering one component; forced edges are not charged.
pub fn solve_component(
    gen: &GenInstance,
    component: &IntersectionComponent,
    cap: usize,
) -> Result<(Vec<EdgeId>, ComponentMethod), SolveError> {
    let costs = component_costs(&gen.instance);
    let members: Vec<Vec<Vec<EdgeId>>> =
        component.habitats.iter().map(|&h| minimal_members(gen.family(h))).collect();
    let pick = |choice: &[usize], members: &[Vec<Vec<EdgeId>>]| -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = choice.iter().enumerate().flat_map(|(i, &j)| members[i][j].clone()).collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    match component.shape {
        ComponentShape::Path if path_is_separated(&gen.instance, &component.habitats, &costs) => {
            let (_, choice) = path_dp(&members, &costs);
            Ok((pick(&choice, &members), ComponentMethod::PathDp))
        }
        ComponentShape::Cycle => {
            let rest = &component.habitats[1..];
            let mut best: Option<(Cost, Vec<EdgeId>)> = None;
            for anchor in &members[0] {
                let mut local = costs.clone();
                anchor.iter().for_each(|&e| local[e] = 0);
                if !path_is_separated(&gen.instance, rest, &local) {
                    return brute(&members, &costs, component, cap).map(|e| (e, ComponentMethod::BruteForce));
                }
                let (c, choice) = path_dp(&members[1..], &local);
                let total = c + union_cost(&[anchor], &costs);
                if best.as_ref().is_none_or(|b| total < b.0) {
                    let mut edges = pick(&choice, &members[1..]);
                    edges.extend(anchor);
                    edges.sort_unstable();
                    edges.dedup();
                    best = Some((total, edges));
                }
            }
            Ok((best.expect("non-empty family").1, ComponentMethod::CycleDp))
        }
        _ => brute(&members, &costs, component, cap).map(|e| (e, ComponentMethod::BruteForce)),
    }
}

fn brute(
    members: &[Vec<Vec<EdgeId>>],
    costs: &[Cost],
    component: &IntersectionComponent,
    cap: usize,
) -> Result<Vec<EdgeId>, SolveError> {
    if members.len() > cap {
        return Err(SolveError::Inapplicable(format!(
            "component of {} habitats exceeds the constant-size cap {cap}",
            members.len()
        )));
    }
    let _ = component;
    let (_, choice) = brute_force_product(members, costs);
    let mut out: Vec<EdgeId> = choice.iter().enumerate().flat_map(|(i, &j)| members[i][j].clone()).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureAudit {
    /// Edges lying in more than 21 habitats.
    pub crowded_edges: Vec<EdgeId>,
    /// Neighbouring pairs `(H, H')` whose count of vertices docking towards `H'` is out of range.
    pub docking_out_of_range: Vec<(usize, usize, usize)>,
    /// Path components with a proper docking edge whose end habitats break the endpoint structure.
    pub path_end_violations: Vec<usize>,
    /// Components that are neither paths nor cycles and exceed the cap.
    pub oversized_components: Vec<usize>,
    /// Unforced edges shared by habitats of different components.
    pub leaking_edges: Vec<EdgeId>,
}

impl StructureAudit {
    pub fn is_clean(&self) -> bool {
        self.crowded_edges.is_empty()
            && self.docking_out_of_range.is_empty()
            && self.path_end_violations.is_empty()
            && self.oversized_components.is_empty()
            && self.leaking_edges.is_empty()
    }
}

/// Vertices of `h` adjacent to some vertex of `other \ h`.
pub fn docking_vertices(instance: &Instance, h: &[VertexId], other: &[VertexId]) -> Vec<VertexId> {
    h.iter()
        .copied()
        .filter(|v| other.binary_search(v).is_ok())
        .filter(|&v| {
            instance
                .neighbors(v)
                .iter()
                .any(|&(w, _)| other.binary_search(&w).is_ok() && h.binary_search(&w).is_err())
        })
        .collect()
}

fn union_degrees(instance: &Instance, habitats: &[usize]) -> BTreeMap<VertexId, usize> {
    let mut vs: Vec<VertexId> = habitats.iter().flat_map(|&h| instance.habitat(h).iter().copied()).collect();
    vs.sort_unstable();
    vs.dedup();
    let mut deg: BTreeMap<VertexId, usize> = vs.iter().map(|&v| (v, 0)).collect();
    for e in instance.induced_edges(&vs) {
        let edge = instance.edge(e);
        *deg.get_mut(&edge.u).unwrap() += 1;
        *deg.get_mut(&edge.v).unwrap() += 1;
    }
    deg
}

/// Checks the structural claims about the intersection graph on a reduced instance.
pub fn audit(gen: &GenInstance, graph: &IntersectionGraph, cap: usize) -> StructureAudit {
    let inst = &gen.instance;
    let mut out = StructureAudit::default();
    let mut per_edge: Vec<Vec<usize>> = vec![Vec::new(); inst.edge_count()];
    for &h in &graph.nodes {
        for &e in &gen.family(h).edges {
            per_edge[e].push(h);
        }
    }
    for (e, hs) in per_edge.iter().enumerate() {
        if hs.len() > HABITATS_PER_EDGE_BOUND {
            out.crowded_edges.push(e);
        }
    }
    for &(a, b) in &graph.edges {
        let (ha, hb) = (inst.habitat(a), inst.habitat(b));
        let upper = ha.len().max(hb.len()) - 1;
        for (x, hx, y, hy) in [(a, ha, b, hb), (b, hb, a, ha)] {
            let count = docking_vertices(inst, hx, hy).len();
            if count < 2 || count > upper {
                out.docking_out_of_range.push((x, y, count));
            }
        }
    }
    let mut comp_of = HashMap::new();
    for (ci, comp) in graph.components.iter().enumerate() {
        for &h in &comp.habitats {
            comp_of.insert(h, ci);
        }
        match comp.shape {
            ComponentShape::ConstantSize if comp.habitats.len() > cap => out.oversized_components.push(ci),
            ComponentShape::Path if comp.habitats.len() >= 2 => {
                let deg = union_degrees(inst, &comp.habitats);
                let vs: Vec<VertexId> = deg.keys().copied().collect();
                let has_proper = inst.induced_edges(&vs).iter().any(|&e| {
                    let (u, v) = inst.edge(e).endpoints();
                    let (du, dv) = (deg[&u], deg[&v]);
                    (du == 2 && dv == 3) || (du == 3 && dv == 2)
                });
                if has_proper {
                    let ends = [comp.habitats[0], *comp.habitats.last().unwrap()];
                    let bad = ends.iter().any(|&h| {
                        let hv = inst.habitat(h);
                        let count = hv
                            .iter()
                            .filter(|&&x| {
                                deg[&x] == 2
                                    && inst.neighbors(x).iter().any(|&(y, _)| {
                                        hv.binary_search(&y).is_ok() && deg[&y] == 3
                                    })
                            })
                            .count();
                        count != 1
                    });
                    if bad {
                        out.path_end_violations.push(ci);
                    }
                }
            }
            _ => {}
        }
    }
    for (e, hs) in per_edge.iter().enumerate() {
        if inst.edge(e).forced {
            continue;
        }
        let comps: BTreeSet<usize> = hs.iter().map(|h| comp_of[h]).collect();
        if comps.len() > 1 {
            out.leaking_edges.push(e);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deg4Run {
    pub solution: Solution,
    pub ledger: ReductionLedger,
    pub gen: GenInstance,
    pub graph: IntersectionGraph,
    pub methods: Vec<ComponentMethod>,
    pub audit: StructureAudit,
}

/// Minimum-cost solution when the maximum degree and the habitat size are at most four.
pub fn solve_deg4(instance: &Instance) -> Result<Solution, SolveError> {
    solve_deg4_detailed(instance, DEFAULT_COMPONENT_CAP).map(|run| run.solution)
}

pub fn solve_deg4_detailed(instance: &Instance, cap: usize) -> Result<Deg4Run, SolveError> {
    if instance.max_degree() > MAX_DEGREE {
        return Err(SolveError::Inapplicable(format!(
            "maximum degree {} exceeds {MAX_DEGREE}",
            instance.max_degree()
        )));
    }
    if instance.max_habitat_size() > MAX_HABITAT_SIZE {
        return Err(SolveError::Inapplicable(format!(
            "habitat size {} exceeds {MAX_HABITAT_SIZE}",
            instance.max_habitat_size()
        )));
    }
    let (reduced, ledger) = preprocess_all(instance);
    if let Verdict::NoInstance { habitat } = ledger.verdict {
        return Err(SolveError::NoInstance { habitat });
    }
    let gen = apply_rule9(to_gen(&reduced)?)?;
    let graph = build_intersection_graph(&gen);
    let audit = audit(&gen, &graph, cap);
    if !audit.leaking_edges.is_empty() {
        return Err(SolveError::Internal(format!(
            "components share unforced edges {:?}",
            audit.leaking_edges
        )));
    }
    let mut chosen = reduced.forced_edges();
    let mut methods = Vec::with_capacity(graph.components.len());
    for comp in &graph.components {
        let (edges, method) = solve_component(&gen, comp, cap)?;
        chosen.extend(edges);
        methods.push(method);
    }
    chosen.sort_unstable();
    chosen.dedup();
    if !reduced.clone().with_budget(None).is_solution(&chosen).is_feasible() {
        return Err(SolveError::Internal("component union is not a solution".into()));
    }
    let solution = instance.is_solution(&ledger.lift(&chosen));
    Ok(Deg4Run { solution, ledger, gen, graph, methods, audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_exact;
    use crate::model::Edge;

    fn unit(n: usize, pairs: &[(usize, usize)], habitats: Vec<Vec<usize>>) -> Instance {
        let edges = pairs.iter().map(|&(u, v)| Edge::new(u, v, 1)).collect();
        Instance::new(n, edges, habitats, None, None).unwrap()
    }

    fn k4() -> Instance {
        unit(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], vec![vec![0, 1, 2, 3], vec![1, 2, 3]])
    }

    #[test]
    fn triangle_family_and_k4_stars() {
        let gen = to_gen(&k4()).unwrap();
        assert_eq!(gen.family(1).len(), 4);
        let sets = gen.family(0).sets();
        let star0 = vec![0, 1, 2];
        assert!(sets.contains(&star0));
    }

    #[test]
    fn rule9_drops_star_outside_subhabitat() {
        let gen = apply_rule9(to_gen(&k4()).unwrap()).unwrap();
        assert!(gen.families[1].is_none());
        assert!(!gen.family(0).sets().contains(&vec![0, 1, 2]));
        // every surviving member still holds two edges of the inner triangle
        for s in gen.family(0).sets() {
            assert!(s.iter().filter(|&&e| e >= 3).count() >= 2);
        }
    }

    #[test]
    fn rule9_identity_without_nesting() {
        let inst = unit(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)], vec![vec![0, 1, 2], vec![1, 2, 3]]);
        let gen = to_gen(&inst).unwrap();
        assert_eq!(apply_rule9(gen.clone()).unwrap(), gen);
    }

    #[test]
    fn rule9_merges_duplicates_by_intersection() {
        // same vertex set listed twice (bypassing preprocessing's dedup)
        let inst = unit(3, &[(0, 1), (0, 2), (1, 2)], vec![vec![0, 1, 2], vec![0, 1, 2]]);
        let gen = apply_rule9(to_gen(&inst).unwrap()).unwrap();
        assert_eq!(gen.alive(), vec![1]);
        assert_eq!(gen.family(1).len(), 4);
    }

    #[test]
    fn forced_shared_edge_is_not_an_intersection() {
        let mut edges: Vec<Edge> = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)].iter().map(|&(u, v)| Edge::new(u, v, 1)).collect();
        edges[2].forced = true;
        let inst = Instance::new(4, edges, vec![vec![0, 1, 2], vec![1, 2, 3]], None, None).unwrap();
        let g = build_intersection_graph(&to_gen(&inst).unwrap());
        assert!(g.edges.is_empty());
        assert_eq!(g.components.len(), 2);
    }

    /// Triangle strip 0..n with edges i,i+1 and i,i+2; habitats are consecutive triples.
    fn strip(n: usize) -> Instance {
        let mut pairs = Vec::new();
        for i in 0..n {
            if i + 1 < n {
                pairs.push((i, i + 1));
            }
            if i + 2 < n {
                pairs.push((i, i + 2));
            }
        }
        let habitats = (0..n - 2).map(|i| vec![i, i + 1, i + 2]).collect();
        unit(n, &pairs, habitats)
    }

    #[test]
    fn triangle_strip_is_a_path() {
        let gen = to_gen(&strip(8)).unwrap();
        let g = build_intersection_graph(&gen);
        assert_eq!(g.components.len(), 1);
        assert_eq!(g.components[0].shape, ComponentShape::Path);
        assert_eq!(g.components[0].habitats, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn vertex_only_overlap_is_not_adjacent() {
        // {0,1,2} and {2,3,4} share only vertex 2
        let inst = unit(5, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)], vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4]]);
        let g = build_intersection_graph(&to_gen(&inst).unwrap());
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn strip_dp_matches_oracle_and_brute_force() {
        for n in [5, 6, 8, 12] {
            let inst = strip(n);
            let gen = to_gen(&inst).unwrap();
            let g = build_intersection_graph(&gen);
            let costs = component_costs(&inst);
            let members: Vec<_> = g.components[0].habitats.iter().map(|&h| minimal_members(gen.family(h))).collect();
            let (dp, _) = path_dp(&members, &costs);
            let oracle = solve_exact(&inst, None).unwrap().cost;
            assert_eq!(dp, oracle, "n = {n}");
            if members.len() <= 6 {
                assert_eq!(brute_force_product(&members, &costs).0, dp);
            }
        }
    }

    #[test]
    fn cycle_of_five_triangles_matches_oracle() {
        // wheel-like ring: outer cycle 0..5, each triangle {i, i+1, hub_i} sharing edges consecutively
        // built as a closed triangle strip on 10 vertices
        let n = 10;
        let mut pairs = Vec::new();
        for i in 0..n {
            pairs.push((i.min((i + 1) % n), i.max((i + 1) % n)));
            pairs.push((i.min((i + 2) % n), i.max((i + 2) % n)));
        }
        let habitats = (0..n).map(|i| {
            let mut h = vec![i, (i + 1) % n, (i + 2) % n];
            h.sort_unstable();
            h
        }).collect();
        let inst = unit(n, &pairs, habitats);
        let run = solve_deg4_detailed(&inst, DEFAULT_COMPONENT_CAP).unwrap();
        assert!(run.graph.components.iter().any(|c| c.shape == ComponentShape::Cycle));
        assert_eq!(run.solution.cost, solve_exact(&inst, None).unwrap().cost);
    }

    #[test]
    fn single_habitat_component_takes_cheapest_member() {
        let inst = Instance::new(
            3,
            vec![Edge::new(0, 1, 3), Edge::new(0, 2, 1), Edge::new(1, 2, 1)],
            vec![vec![0, 1, 2]],
            None,
            None,
        )
        .unwrap();
        let gen = to_gen(&inst).unwrap();
        let g = build_intersection_graph(&gen);
        let (edges, _) = solve_component(&gen, &g.components[0], DEFAULT_COMPONENT_CAP).unwrap();
        assert_eq!(edges, vec![1, 2]);
    }
}
