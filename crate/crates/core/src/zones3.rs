//! Linear-time solver for graphs of maximum degree three via zones.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::exact::LocalHabitat;
use crate::model::{Cost, EdgeId, Instance, Solution, VertexId};
use crate::preprocess::{preprocess_all, ReductionLedger, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZoneKind {
    K3,
    K4MinusE,
    PrismMinusMatchingEdge,
}

impl ZoneKind {
    pub fn edge_count(self) -> usize {
        match self {
            ZoneKind::K3 => 3,
            ZoneKind::K4MinusE => 5,
            ZoneKind::PrismMinusMatchingEdge => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub kind: ZoneKind,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

type Triangle = [VertexId; 3];

fn triangles(instance: &Instance) -> Vec<Triangle> {
    let mut out = Vec::new();
    for u in 0..instance.vertex_count() {
        let nbrs = instance.neighbors(u);
        for (i, &(v, _)) in nbrs.iter().enumerate() {
            if v <= u {
                continue;
            }
            for &(w, _) in &nbrs[i + 1..] {
                if w > v && instance.edge_between(v, w).is_some() {
                    out.push([u, v, w]);
                }
            }
        }
    }
    out
}

fn zone_from(instance: &Instance, kind: ZoneKind, vertices: BTreeSet<VertexId>) -> Zone {
    let vertices: Vec<VertexId> = vertices.into_iter().collect();
    let edges = instance.induced_edges(&vertices);
    Zone { kind, vertices, edges }
}

/// Zone decomposition of a (preprocessed) graph with maximum degree three.
pub fn find_zones(instance: &Instance) -> Result<Vec<Zone>, SolveError> {
    if instance.max_degree() > 3 {
        return Err(SolveError::Inapplicable(format!(
            "maximum degree {} exceeds 3",
            instance.max_degree()
        )));
    }
    let tris = triangles(instance);
    let mut tri_of_vertex = vec![Vec::new(); instance.vertex_count()];
    for (t, tri) in tris.iter().enumerate() {
        for &v in tri {
            tri_of_vertex[v].push(t);
        }
    }
    let mut used = vec![false; tris.len()];
    let mut zones = Vec::new();

    // Two disjoint triangles joined by exactly two matching edges.
    for t in 0..tris.len() {
        if used[t] {
            continue;
        }
        let mut links: Vec<(usize, VertexId, VertexId)> = Vec::new();
        for &a in &tris[t] {
            for &(b, _) in instance.neighbors(a) {
                if tris[t].contains(&b) {
                    continue;
                }
                for &s in &tri_of_vertex[b] {
                    if s != t && !tris[s].iter().any(|x| tris[t].contains(x)) {
                        links.push((s, a, b));
                    }
                }
            }
        }
        links.sort_unstable();
        let mut i = 0;
        while i < links.len() {
            let s = links[i].0;
            let group: Vec<_> = links[i..].iter().take_while(|l| l.0 == s).copied().collect();
            i += group.len();
            if used[s] || group.len() < 2 {
                continue;
            }
            if group.len() >= 3 {
                return Err(SolveError::Inapplicable(format!(
                    "isolated prism on triangles {:?} and {:?}; preprocess first",
                    tris[t], tris[s]
                )));
            }
            let (a1, b1, a2, b2) = (group[0].1, group[0].2, group[1].1, group[1].2);
            if a1 != a2 && b1 != b2 {
                used[t] = true;
                used[s] = true;
                let vs: BTreeSet<_> = tris[t].iter().chain(tris[s].iter()).copied().collect();
                zones.push(zone_from(instance, ZoneKind::PrismMinusMatchingEdge, vs));
                break;
            }
        }
    }

    // Two triangles sharing an edge.
    for t in 0..tris.len() {
        if used[t] {
            continue;
        }
        let partner = (t + 1..tris.len()).chain(0..t).find(|&s| {
            !used[s] && tris[s].iter().filter(|x| tris[t].contains(x)).count() == 2
        });
        if let Some(s) = partner {
            let vs: BTreeSet<_> = tris[t].iter().chain(tris[s].iter()).copied().collect();
            let extra: Vec<_> = vs.iter().copied().collect();
            if instance.induced_edges(&extra).len() == 6 {
                return Err(SolveError::Inapplicable(format!(
                    "isolated K4 on {extra:?}; preprocess first"
                )));
            }
            used[t] = true;
            used[s] = true;
            zones.push(zone_from(instance, ZoneKind::K4MinusE, vs));
        }
    }

    for t in 0..tris.len() {
        if !used[t] {
            used[t] = true;
            zones.push(zone_from(instance, ZoneKind::K3, tris[t].iter().copied().collect()));
        }
    }
    zones.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(zones)
}

/// Checks that no edge lies in two zones.
pub fn zones_edge_disjoint(zones: &[Zone], edge_count: usize) -> bool {
    let mut owner = vec![false; edge_count];
    for z in zones {
        for &e in &z.edges {
            if owner[e] {
                return false;
            }
            owner[e] = true;
        }
    }
    true
}

fn habitats_touching(vertices: &[VertexId], by_vertex: &[Vec<usize>]) -> Vec<usize> {
    let mut hs: Vec<usize> = vertices.iter().flat_map(|&v| by_vertex[v].iter().copied()).collect();
    hs.sort_unstable();
    hs.dedup();
    hs
}

pub(crate) fn habitats_by_vertex(instance: &Instance) -> Vec<Vec<usize>> {
    let mut by_vertex = vec![Vec::new(); instance.vertex_count()];
    for (h, hv) in instance.habitats().iter().enumerate() {
        for &v in hv {
            by_vertex[v].push(h);
        }
    }
    by_vertex
}

/// Cheapest `F* ∩ E(X) ⊆ F_X ⊆ E(X)` satisfying every habitat meeting the zone,
/// assuming all habitat edges outside the zone are present.
pub fn optimize_zone(instance: &Instance, zone: &Zone) -> Result<Vec<EdgeId>, SolveError> {
    optimize_zone_with(instance, zone, &habitats_by_vertex(instance))
}

fn optimize_zone_with(
    instance: &Instance,
    zone: &Zone,
    by_vertex: &[Vec<usize>],
) -> Result<Vec<EdgeId>, SolveError> {
    let hs = habitats_touching(&zone.vertices, by_vertex);
    let locals = hs
        .iter()
        .map(|&h| LocalHabitat::new(instance, h, instance.habitat(h)))
        .collect::<Result<Vec<_>, _>>()?;
    let forced: Vec<EdgeId> = zone.edges.iter().copied().filter(|&e| instance.edge(e).forced).collect();
    let free: Vec<EdgeId> = zone.edges.iter().copied().filter(|&e| !instance.edge(e).forced).collect();
    let mut best: Option<(Cost, Vec<EdgeId>)> = None;
    for bits in 0u32..(1 << free.len()) {
        let picked: Vec<EdgeId> = free
            .iter()
            .enumerate()
            .filter(|&(j, _)| bits >> j & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let cost: Cost = picked.iter().map(|&e| instance.edge(e).cost).sum();
        if let Some((bc, bl)) = &best {
            if cost > *bc || (cost == *bc && picked >= *bl) {
                continue;
            }
        }
        let present = |e: EdgeId| {
            zone.edges.binary_search(&e).is_err()
                || picked.binary_search(&e).is_ok()
                || forced.binary_search(&e).is_ok()
        };
        if locals.iter().all(|l| l.ok_with(|i| present(l.edges[i].2))) {
            best = Some((cost, picked));
        }
    }
    let (_, picked) = best.ok_or_else(|| {
        SolveError::Internal(format!("zone {:?} admits no feasible subset", zone.vertices))
    })?;
    let mut out = forced;
    out.extend(picked);
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deg3Run {
    pub solution: Solution,
    pub ledger: ReductionLedger,
    pub reduced: Instance,
    pub zones: Vec<Zone>,
}

/// Minimum-cost solution for instances whose graph has maximum degree three.
pub fn solve_deg3(instance: &Instance) -> Result<Solution, SolveError> {
    solve_deg3_detailed(instance).map(|run| run.solution)
}

pub fn solve_deg3_detailed(instance: &Instance) -> Result<Deg3Run, SolveError> {
    if instance.max_degree() > 3 {
        return Err(SolveError::Inapplicable(format!(
            "maximum degree {} exceeds 3",
            instance.max_degree()
        )));
    }
    let (reduced, ledger) = preprocess_all(instance);
    if let Verdict::NoInstance { habitat } = ledger.verdict {
        return Err(SolveError::NoInstance { habitat });
    }
    let zones = find_zones(&reduced)?;
    if !zones_edge_disjoint(&zones, reduced.edge_count()) {
        return Err(SolveError::Internal("zones overlap".into()));
    }
    let by_vertex = habitats_by_vertex(&reduced);
    let mut chosen = reduced.forced_edges();
    for zone in &zones {
        chosen.extend(optimize_zone_with(&reduced, zone, &by_vertex)?);
    }
    chosen.sort_unstable();
    chosen.dedup();
    let local = reduced.clone().with_budget(None).is_solution(&chosen);
    if !local.is_feasible() {
        return Err(SolveError::Internal("zone union is not a solution".into()));
    }
    let solution = instance.is_solution(&ledger.lift(&chosen));
    Ok(Deg3Run { solution, ledger, reduced, zones })
}
