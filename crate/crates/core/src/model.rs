//! Instances, solutions and the diameter-two feasibility check.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Point};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type Cost = u64;

/// Every habitat must reach diameter at most this bound in the selected subgraph.
pub const DIAMETER_BOUND: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("vertex {vertex} is out of range (instance has {vertex_count} vertices)")]
    VertexOutOfRange { vertex: VertexId, vertex_count: usize },
    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: VertexId },
    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: VertexId, v: VertexId },
    #[error("habitat {habitat} has fewer than two vertices")]
    HabitatTooSmall { habitat: usize },
    #[error("embedding lists {found} points for {expected} vertices")]
    EmbeddingSize { expected: usize, found: usize },
    #[error("vertices {a} and {b} share the same coordinates")]
    CoincidentVertices { a: VertexId, b: VertexId },
    #[error("edges {e1} and {e2} cross in the embedding")]
    CrossingEdges { e1: EdgeId, e2: EdgeId },
    #[error("vertex {vertex} lies on edge {edge}")]
    VertexOnEdge { vertex: VertexId, edge: EdgeId },
    #[error("habitat {habitat} induces a degenerate (collinear) triangle")]
    CollinearHabitat { habitat: usize },
    #[error("no edge {{{u}, {v}}} in the instance")]
    UnknownEdge { u: VertexId, v: VertexId },
    #[error("edge id {edge} is out of range")]
    EdgeOutOfRange { edge: EdgeId },
}

impl ModelError {
    /// Stable short code, one per error kind.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::VertexOutOfRange { .. } => "vertex-out-of-range",
            ModelError::SelfLoop { .. } => "self-loop",
            ModelError::DuplicateEdge { .. } => "duplicate-edge",
            ModelError::HabitatTooSmall { .. } => "habitat-too-small",
            ModelError::EmbeddingSize { .. } => "embedding-size",
            ModelError::CoincidentVertices { .. } => "embedding-coincident",
            ModelError::CrossingEdges { .. } => "embedding-crossing",
            ModelError::VertexOnEdge { .. } => "embedding-vertex-on-edge",
            ModelError::CollinearHabitat { .. } => "embedding-collinear-habitat",
            ModelError::UnknownEdge { .. } => "unknown-edge",
            ModelError::EdgeOutOfRange { .. } => "edge-out-of-range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub cost: Cost,
    #[serde(default)]
    pub forced: bool,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId, cost: Cost) -> Self {
        Edge { u, v, cost, forced: false }
    }

    pub fn forced(u: VertexId, v: VertexId, cost: Cost) -> Self {
        Edge { u, v, cost, forced: true }
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }

    pub fn other(&self, w: VertexId) -> VertexId {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// Wire form of an instance, field order fixed for byte-stable output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub vertices: usize,
    pub edges: Vec<Edge>,
    pub habitats: Vec<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<Point>>,
}

/// A 2-diameter green bridge placement instance `(G, c, H, F*, k)`.
///
/// Edges are kept canonical (`u < v`) and sorted; an edge id is its index in
/// that order. Habitats are sorted vertex lists. The budget is signed because
/// reductions may push it below zero, which simply means "no".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    vertex_count: usize,
    edges: Vec<Edge>,
    habitats: Vec<Vec<VertexId>>,
    budget: Option<i64>,
    embedding: Option<Vec<Point>>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = ModelError;

    fn try_from(file: InstanceFile) -> Result<Self, Self::Error> {
        Instance::new(file.vertices, file.edges, file.habitats, file.budget, file.embedding)
    }
}

impl From<Instance> for InstanceFile {
    fn from(instance: Instance) -> Self {
        InstanceFile {
            vertices: instance.vertex_count,
            edges: instance.edges,
            habitats: instance.habitats,
            budget: instance.budget,
            embedding: instance.embedding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    pub max_habitat_size: usize,
    pub habitat_count: usize,
    pub is_planar_embedded: bool,
}

/// Maps ids of a compacted instance back to the instance it was cut from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabel {
    pub vertex_to_parent: Vec<VertexId>,
    pub edge_to_parent: Vec<EdgeId>,
    pub habitat_to_parent: Vec<usize>,
}

impl Relabel {
    pub fn edges_to_parent(&self, edges: &[EdgeId]) -> Vec<EdgeId> {
        edges.iter().map(|&e| self.edge_to_parent[e]).collect()
    }

    /// Inverse edge map over a parent with `parent_edges` edges.
    pub fn edge_from_parent(&self, parent_edges: usize) -> Vec<Option<EdgeId>> {
        let mut inv = vec![None; parent_edges];
        for (child, &parent) in self.edge_to_parent.iter().enumerate() {
            inv[parent] = Some(child);
        }
        inv
    }
}

impl Instance {
    pub fn new(
        vertex_count: usize,
        edges: Vec<Edge>,
        habitats: Vec<Vec<VertexId>>,
        budget: Option<i64>,
        embedding: Option<Vec<Point>>,
    ) -> Result<Self, ModelError> {
        let mut edges = edges;
        for e in edges.iter_mut() {
            for w in [e.u, e.v] {
                if w >= vertex_count {
                    return Err(ModelError::VertexOutOfRange { vertex: w, vertex_count });
                }
            }
            if e.u == e.v {
                return Err(ModelError::SelfLoop { vertex: e.u });
            }
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        for pair in edges.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(ModelError::DuplicateEdge { u: pair[0].u, v: pair[0].v });
            }
        }
        let mut canonical_habitats = Vec::with_capacity(habitats.len());
        for (i, mut h) in habitats.into_iter().enumerate() {
            h.sort_unstable();
            h.dedup();
            if let Some(&w) = h.iter().find(|&&w| w >= vertex_count) {
                return Err(ModelError::VertexOutOfRange { vertex: w, vertex_count });
            }
            if h.len() < 2 {
                return Err(ModelError::HabitatTooSmall { habitat: i });
            }
            canonical_habitats.push(h);
        }
        if let Some(points) = &embedding {
            if points.len() != vertex_count {
                return Err(ModelError::EmbeddingSize { expected: vertex_count, found: points.len() });
            }
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        Ok(Instance {
            vertex_count,
            edges,
            habitats: canonical_habitats,
            budget,
            embedding,
            adjacency,
        })
    }

    pub fn empty() -> Self {
        Instance::new(0, Vec::new(), Vec::new(), None, None).expect("empty instance is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn habitats(&self) -> &[Vec<VertexId>] {
        &self.habitats
    }

    pub fn habitat(&self, id: usize) -> &[VertexId] {
        &self.habitats[id]
    }

    pub fn budget(&self) -> Option<i64> {
        self.budget
    }

    pub fn embedding(&self) -> Option<&[Point]> {
        self.embedding.as_deref()
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_habitat_size(&self) -> usize {
        self.habitats.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return None;
        }
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |&(w, _)| w).ok().map(|i| list[i].1)
    }

    pub fn forced_edges(&self) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.edges[e].forced).collect()
    }

    pub fn cost_of(&self, edges: &[EdgeId]) -> Cost {
        edges.iter().map(|&e| self.edges[e].cost).sum()
    }

    /// Edge ids of `G[H]`, sorted.
    pub fn induced_edges(&self, vertices: &[VertexId]) -> Vec<EdgeId> {
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        let mut out = Vec::new();
        for &u in &sorted {
            for &(w, e) in &self.adjacency[u] {
                if w > u && sorted.binary_search(&w).is_ok() {
                    out.push(e);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn with_budget(mut self, budget: Option<i64>) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_embedding(self, embedding: Option<Vec<Point>>) -> Result<Self, ModelError> {
        Instance::new(self.vertex_count, self.edges, self.habitats, self.budget, embedding)
    }

    pub(crate) fn set_cost(&mut self, e: EdgeId, cost: Cost) {
        self.edges[e].cost = cost;
    }

    pub(crate) fn set_forced(&mut self, e: EdgeId, forced: bool) {
        self.edges[e].forced = forced;
    }

    pub(crate) fn set_budget(&mut self, budget: Option<i64>) {
        self.budget = budget;
    }

    pub fn stats(&self) -> InstanceStats {
        InstanceStats {
            vertex_count: self.vertex_count,
            edge_count: self.edges.len(),
            max_degree: self.max_degree(),
            max_habitat_size: self.max_habitat_size(),
            habitat_count: self.habitats.len(),
            is_planar_embedded: self.embedding.is_some(),
        }
    }

    /// Checks the embedding (if any) with exact predicates and returns the stats.
    ///
    /// Structural invariants (ranges, loops, duplicates, habitat sizes) are
    /// enforced by [`Instance::new`]; this adds the quadratic geometric audit.
    pub fn validate(&self) -> Result<InstanceStats, ModelError> {
        if let Some(points) = &self.embedding {
            let mut order: Vec<VertexId> = (0..self.vertex_count).collect();
            order.sort_by_key(|&v| points[v]);
            for pair in order.windows(2) {
                if points[pair[0]] == points[pair[1]] {
                    let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                    return Err(ModelError::CoincidentVertices { a, b });
                }
            }
            for (id, e) in self.edges.iter().enumerate() {
                let (a, b) = (points[e.u], points[e.v]);
                for (w, &p) in points.iter().enumerate() {
                    if w != e.u && w != e.v && geometry::on_segment(p, a, b) {
                        return Err(ModelError::VertexOnEdge { vertex: w, edge: id });
                    }
                }
            }
            for i in 0..self.edges.len() {
                let ei = &self.edges[i];
                let (a, b) = (points[ei.u], points[ei.v]);
                for j in (i + 1)..self.edges.len() {
                    let ej = &self.edges[j];
                    if geometry::segments_conflict(a, b, points[ej.u], points[ej.v]) {
                        return Err(ModelError::CrossingEdges { e1: i, e2: j });
                    }
                }
            }
            for (i, h) in self.habitats.iter().enumerate() {
                if h.len() == 3 && geometry::collinear(points[h[0]], points[h[1]], points[h[2]]) {
                    return Err(ModelError::CollinearHabitat { habitat: i });
                }
            }
        }
        Ok(self.stats())
    }

    pub fn edge_mask(&self, edges: &[EdgeId]) -> Vec<bool> {
        let mut mask = vec![false; self.edges.len()];
        for &e in edges {
            mask[e] = true;
        }
        mask
    }

    /// Diameter of `G[F][H]`; `None` stands for infinity.
    pub fn habitat_diameter(
        &self,
        selected: &[EdgeId],
        habitat: &[VertexId],
    ) -> Result<Option<usize>, ModelError> {
        if let Some(&w) = habitat.iter().find(|&&w| w >= self.vertex_count) {
            return Err(ModelError::VertexOutOfRange { vertex: w, vertex_count: self.vertex_count });
        }
        if let Some(&e) = selected.iter().find(|&&e| e >= self.edges.len()) {
            return Err(ModelError::EdgeOutOfRange { edge: e });
        }
        Ok(self.diameter_under_mask(&self.edge_mask(selected), habitat))
    }

    pub(crate) fn diameter_under_mask(&self, mask: &[bool], habitat: &[VertexId]) -> Option<usize> {
        let mut sorted = habitat.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let local = |w: VertexId| sorted.binary_search(&w).ok();
        let mut diameter = 0;
        let mut dist = vec![usize::MAX; sorted.len()];
        let mut queue = VecDeque::new();
        for s in 0..sorted.len() {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &(w, e) in &self.adjacency[sorted[x]] {
                    if !mask[e] {
                        continue;
                    }
                    if let Some(y) = local(w) {
                        if dist[y] == usize::MAX {
                            dist[y] = dist[x] + 1;
                            queue.push_back(y);
                        }
                    }
                }
            }
            for &d in &dist {
                if d == usize::MAX {
                    return None;
                }
                diameter = diameter.max(d);
            }
        }
        Some(diameter)
    }

    pub(crate) fn habitat_ok_under_mask(&self, mask: &[bool], habitat: &[VertexId]) -> bool {
        matches!(self.diameter_under_mask(mask, habitat), Some(d) if d <= DIAMETER_BOUND)
    }

    /// Feasibility verdict for an edge set.
    pub fn is_solution(&self, selected: &[EdgeId]) -> Solution {
        let mut edges: Vec<EdgeId> = selected.iter().copied().filter(|&e| e < self.edges.len()).collect();
        edges.sort_unstable();
        edges.dedup();
        let mask = self.edge_mask(&edges);
        let cost = self.cost_of(&edges);
        let missing_forced: Vec<EdgeId> =
            self.forced_edges().into_iter().filter(|&e| !mask[e]).collect();
        let habitats: Vec<usize> = (0..self.habitats.len())
            .filter(|&h| !self.habitat_ok_under_mask(&mask, &self.habitats[h]))
            .collect();
        let over_budget = matches!(self.budget, Some(k) if (cost as i128) > k as i128);
        let status = if missing_forced.is_empty() && habitats.is_empty() && !over_budget {
            SolutionStatus::Feasible
        } else {
            SolutionStatus::Infeasible(Violations { habitats, missing_forced, over_budget })
        };
        Solution { edges, cost, status }
    }

    /// Cuts out the kept parts and renumbers vertices, edges and habitats in order.
    ///
    /// Kept edges must have kept endpoints and kept habitats kept vertices.
    pub(crate) fn compact(
        &self,
        keep_vertex: &[bool],
        keep_edge: &[bool],
        keep_habitat: &[bool],
    ) -> (Instance, Relabel) {
        let mut new_id = vec![usize::MAX; self.vertex_count];
        let mut vertex_to_parent = Vec::new();
        for v in 0..self.vertex_count {
            if keep_vertex[v] {
                new_id[v] = vertex_to_parent.len();
                vertex_to_parent.push(v);
            }
        }
        let mut edges = Vec::new();
        let mut edge_to_parent = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            if keep_edge[id] {
                debug_assert!(keep_vertex[e.u] && keep_vertex[e.v]);
                edges.push(Edge { u: new_id[e.u], v: new_id[e.v], cost: e.cost, forced: e.forced });
                edge_to_parent.push(id);
            }
        }
        let mut habitats = Vec::new();
        let mut habitat_to_parent = Vec::new();
        for (id, h) in self.habitats.iter().enumerate() {
            if keep_habitat[id] {
                habitats.push(h.iter().map(|&w| new_id[w]).collect());
                habitat_to_parent.push(id);
            }
        }
        let embedding = self
            .embedding
            .as_ref()
            .map(|pts| vertex_to_parent.iter().map(|&v| pts[v]).collect());
        // Monotone relabeling keeps the edge list sorted, so ids line up.
        let instance = Instance::new(vertex_to_parent.len(), edges, habitats, self.budget, embedding)
            .expect("compaction of a valid instance is valid");
        (instance, Relabel { vertex_to_parent, edge_to_parent, habitat_to_parent })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    pub habitats: Vec<usize>,
    pub missing_forced: Vec<EdgeId>,
    pub over_budget: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionStatus {
    Feasible,
    Infeasible(Violations),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub edges: Vec<EdgeId>,
    pub cost: Cost,
    pub status: SolutionStatus,
}

impl Solution {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, SolutionStatus::Feasible)
    }

    pub fn to_file(&self, instance: &Instance) -> SolutionFile {
        SolutionFile {
            edges: self.edges.iter().map(|&e| [instance.edge(e).u, instance.edge(e).v]).collect(),
            cost: self.cost,
            feasible: self.is_feasible(),
        }
    }
}

/// Wire form of a solution: edges as endpoint pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub edges: Vec<[VertexId; 2]>,
    #[serde(default)]
    pub cost: Cost,
    #[serde(default)]
    pub feasible: bool,
}

impl SolutionFile {
    pub fn edge_ids(&self, instance: &Instance) -> Result<Vec<EdgeId>, ModelError> {
        resolve_pairs(instance, &self.edges)
    }
}

pub fn resolve_pairs(instance: &Instance, pairs: &[[VertexId; 2]]) -> Result<Vec<EdgeId>, ModelError> {
    let mut ids = pairs
        .iter()
        .map(|&[u, v]| instance.edge_between(u, v).ok_or(ModelError::UnknownEdge { u, v }))
        .collect::<Result<Vec<_>, _>>()?;
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

impl fmt::Display for InstanceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} m={} r={} max_degree={} max_habitat_size={} embedded={}",
            self.vertex_count,
            self.edge_count,
            self.habitat_count,
            self.max_degree,
            self.max_habitat_size,
            self.is_planar_embedded
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4_one_triangle() -> Instance {
        let edges = vec![
            Edge::new(0, 1, 1),
            Edge::new(0, 2, 1),
            Edge::new(0, 3, 1),
            Edge::new(1, 2, 1),
            Edge::new(1, 3, 1),
            Edge::new(2, 3, 1),
        ];
        Instance::new(4, edges, vec![vec![0, 1, 2]], None, None).unwrap()
    }

    #[test]
    fn triangle_fully_selected_has_diameter_one() {
        let inst = k4_one_triangle();
        let all = inst.induced_edges(&[0, 1, 2]);
        assert_eq!(inst.habitat_diameter(&all, &[0, 1, 2]).unwrap(), Some(1));
    }

    #[test]
    fn induced_semantics_ignore_outside_vertices() {
        // path u - x - w with x outside the habitat {u, w}
        let inst = Instance::new(
            3,
            vec![Edge::new(0, 1, 1), Edge::new(1, 2, 1)],
            vec![vec![0, 2]],
            None,
            None,
        )
        .unwrap();
        assert_eq!(inst.habitat_diameter(&[0, 1], &[0, 2]).unwrap(), None);
        assert_eq!(inst.habitat_diameter(&[0, 1], &[0, 1, 2]).unwrap(), Some(2));
    }

    #[test]
    fn unknown_vertex_is_an_input_error() {
        let inst = k4_one_triangle();
        assert!(matches!(
            inst.habitat_diameter(&[], &[0, 9]),
            Err(ModelError::VertexOutOfRange { vertex: 9, .. })
        ));
    }

    #[test]
    fn missing_forced_edge_is_reported() {
        let inst = Instance::new(2, vec![Edge::forced(0, 1, 3)], vec![], None, None).unwrap();
        match inst.is_solution(&[]).status {
            SolutionStatus::Infeasible(v) => assert_eq!(v.missing_forced, vec![0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn budget_violation_is_reported() {
        let inst = Instance::new(2, vec![Edge::new(0, 1, 5)], vec![vec![0, 1]], Some(4), None).unwrap();
        let sol = inst.is_solution(&[0]);
        assert_eq!(sol.cost, 5);
        match sol.status {
            SolutionStatus::Infeasible(v) => {
                assert!(v.over_budget);
                assert!(v.habitats.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_reports_stats() {
        let stats = k4_one_triangle().validate().unwrap();
        assert_eq!((stats.max_degree, stats.max_habitat_size, stats.habitat_count), (3, 3, 1));
    }

    #[test]
    fn structural_errors_have_distinct_codes() {
        let dup = Instance::new(2, vec![Edge::new(0, 1, 1), Edge::new(1, 0, 2)], vec![], None, None);
        let small = Instance::new(2, vec![Edge::new(0, 1, 1)], vec![vec![1]], None, None);
        let cross = Instance::new(
            4,
            vec![Edge::new(0, 1, 1), Edge::new(2, 3, 1)],
            vec![],
            None,
            Some(vec![[0, 0], [2, 2], [0, 2], [2, 0]]),
        )
        .unwrap()
        .validate();
        let codes: Vec<&str> = [dup.unwrap_err(), small.unwrap_err(), cross.unwrap_err()]
            .iter()
            .map(ModelError::code)
            .collect();
        assert_eq!(codes, vec!["duplicate-edge", "habitat-too-small", "embedding-crossing"]);
    }

    #[test]
    fn collinear_habitat_is_rejected() {
        // a "triangle" whose corners are collinear would need a vertex on an edge,
        // so use a habitat triple without all three edges drawn
        let inst = Instance::new(
            3,
            vec![Edge::new(0, 1, 1), Edge::new(1, 2, 1)],
            vec![vec![0, 1, 2]],
            None,
            Some(vec![[0, 0], [1, 0], [2, 0]]),
        )
        .unwrap();
        assert_eq!(inst.validate().unwrap_err().code(), "embedding-collinear-habitat");
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let inst = k4_one_triangle().with_budget(Some(7));
        let text = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn forced_defaults_to_false() {
        let inst: Instance = serde_json::from_str(
            r#"{"vertices":2,"edges":[{"u":1,"v":0,"cost":2}],"habitats":[[0,1]]}"#,
        )
        .unwrap();
        assert!(!inst.edge(0).forced);
        assert_eq!(inst.edge(0).endpoints(), (0, 1));
    }
}
