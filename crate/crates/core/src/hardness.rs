//! Gadget reductions from vertex cover on planar cubic graphs.
//!
//! Construction 1 yields instances of maximum degree five with habitats of
//! size at most three; Construction 2 yields planar instances of maximum
//! degree five with habitats of size at most four. Both come with maps that
//! turn vertex covers into solutions and back.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drawing::{check_planar_rotation, rotation_from_points, tutte_drawing, DrawingError};
use crate::geometry::Point;
use crate::model::{Edge, EdgeId, Instance, ModelError, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardnessError {
    #[error("vertex {0} has degree {1}, expected 3")]
    NotCubic(usize, usize),
    #[error("edge {0:?} is a loop, repeated, or out of range")]
    BadEdge([usize; 2]),
    #[error("source graph is disconnected")]
    Disconnected,
    #[error("construction 2 needs a rotation system")]
    MissingRotation,
    #[error("rotation system: {0}")]
    Rotation(#[from] DrawingError),
    #[error("vertex set does not cover edge {0:?}")]
    NotACover([usize; 2]),
    #[error("edge set is not a solution of the gadget instance")]
    InfeasibleSolution,
    #[error("docking {0} cannot be oriented consistently")]
    Orientation(String),
    #[error("synthesised embedding rejected: {0}")]
    Embedding(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcFile {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// A connected cubic graph, optionally with a planar rotation system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VcFile", into = "VcFile")]
pub struct VcInstance {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    rotation: Option<Vec<Vec<usize>>>,
    k: Option<usize>,
}

impl TryFrom<VcFile> for VcInstance {
    type Error = HardnessError;
    fn try_from(f: VcFile) -> Result<Self, Self::Error> {
        let edges = f.edges.iter().map(|e| (e[0], e[1])).collect();
        VcInstance::new(f.vertices, edges, f.rotation, f.k)
    }
}

impl From<VcInstance> for VcFile {
    fn from(vc: VcInstance) -> Self {
        VcFile {
            vertices: vc.vertex_count,
            edges: vc.edges.iter().map(|&(u, v)| [u, v]).collect(),
            rotation: vc.rotation,
            k: vc.k,
        }
    }
}

impl VcInstance {
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize)>,
        rotation: Option<Vec<Vec<usize>>>,
        k: Option<usize>,
    ) -> Result<Self, HardnessError> {
        let mut canon = BTreeSet::new();
        for &(u, v) in &edges {
            if u == v || u >= n || v >= n || !canon.insert((u.min(v), u.max(v))) {
                return Err(HardnessError::BadEdge([u, v]));
            }
        }
        let edges: Vec<(usize, usize)> = canon.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (v, a) in adjacency.iter_mut().enumerate() {
            a.sort_unstable();
            if a.len() != 3 {
                return Err(HardnessError::NotCubic(v, a.len()));
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = n > 0;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(HardnessError::Disconnected);
        }
        if let Some(rot) = &rotation {
            check_planar_rotation(n, &edges, rot)?;
        }
        Ok(VcInstance { vertex_count: n, edges, adjacency, rotation, k })
    }

    /// Builds the graph with the rotation read off a plane drawing.
    pub fn from_drawing(points: &[Point], edges: Vec<(usize, usize)>) -> Result<Self, HardnessError> {
        let rot = rotation_from_points(points.len(), &edges, points);
        VcInstance::new(points.len(), edges, Some(rot), None)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn rotation(&self) -> Option<&[Vec<usize>]> {
        self.rotation.as_deref()
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn with_k(mut self, k: Option<usize>) -> Self {
        self.k = k;
        self
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn uncovered_edge(&self, cover: &[usize]) -> Option<(usize, usize)> {
        let mut inside = vec![false; self.vertex_count];
        cover.iter().filter(|&&v| v < self.vertex_count).for_each(|&v| inside[v] = true);
        self.edges.iter().copied().find(|&(u, v)| !inside[u] && !inside[v])
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let rotation = self.rotation.as_ref().map(|rot| {
            let mut out = vec![Vec::new(); self.vertex_count];
            for (v, list) in rot.iter().enumerate() {
                out[perm[v]] = list.iter().map(|&w| perm[w]).collect();
            }
            out
        });
        VcInstance::new(self.vertex_count, edges, rotation, self.k).expect("relabeling preserves validity")
    }
}

/// Minimum vertex cover by branching on a vertex of maximum remaining degree.
pub fn solve_vc_exact(vc: &VcInstance) -> Vec<usize> {
    fn go(vc: &VcInstance, taken: &mut Vec<bool>, size: usize, best: &mut Option<Vec<usize>>) {
        if best.as_ref().is_some_and(|b| size >= b.len()) {
            return;
        }
        let open_degree = |v: usize, taken: &[bool]| vc.neighbors(v).iter().filter(|&&w| !taken[w]).count();
        let pick = (0..vc.vertex_count())
            .filter(|&v| !taken[v])
            .map(|v| (open_degree(v, taken), v))
            .filter(|&(d, _)| d > 0)
            .max_by_key(|&(d, v)| (d, usize::MAX - v));
        let Some((_, v)) = pick else {
            *best = Some((0..vc.vertex_count()).filter(|&x| taken[x]).collect());
            return;
        };
        taken[v] = true;
        go(vc, taken, size + 1, best);
        taken[v] = false;
        let open: Vec<usize> = vc.neighbors(v).iter().copied().filter(|&w| !taken[w]).collect();
        open.iter().for_each(|&w| taken[w] = true);
        go(vc, taken, size + open.len(), best);
        open.iter().for_each(|&w| taken[w] = false);
    }
    let mut best = None;
    go(vc, &mut vec![false; vc.vertex_count()], 0, &mut best);
    best.unwrap_or_default()
}

/// Simple undirected graph used by the docking operation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimpleGraph {
    pub vertex_count: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Self {
        SimpleGraph { vertex_count, edges: edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect() }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// Glues `h` onto `g` by identifying `dh.0` with `dg.0` and `dh.1` with `dg.1`.
///
/// Returns the merged graph and where each vertex of `h` ended up. Vertices
/// of `g` keep their ids.
pub fn dock(
    g: &SimpleGraph,
    h: &SimpleGraph,
    dg: (usize, usize),
    dh: (usize, usize),
) -> Result<(SimpleGraph, Vec<usize>), HardnessError> {
    if !g.has_edge(dg.0, dg.1) {
        return Err(HardnessError::BadEdge([dg.0, dg.1]));
    }
    if !h.has_edge(dh.0, dh.1) {
        return Err(HardnessError::BadEdge([dh.0, dh.1]));
    }
    let mut map = vec![usize::MAX; h.vertex_count];
    map[dh.0] = dg.0;
    map[dh.1] = dg.1;
    let mut next = g.vertex_count;
    for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = next;
        next += 1;
    }
    let mut merged = g.clone();
    merged.vertex_count = next;
    for &(a, b) in &h.edges {
        let (x, y) = (map[a], map[b]);
        merged.edges.insert((x.min(y), x.max(y)));
    }
    Ok((merged, map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    /// Degree five, habitats of size three.
    One,
    /// Planar, degree five, habitats of size four.
    Two,
}

impl Construction {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "1" => Some(Construction::One),
            "2" => Some(Construction::Two),
            _ => None,
        }
    }
}

/// Edge lists are 0-based local vertex pairs.
struct GadgetSpec {
    size: usize,
    star: &'static [(usize, usize)],
    first: &'static [(usize, usize)],
    second: &'static [(usize, usize)],
    docking: &'static [(usize, usize)],
    /// Explicit habitats; when empty, every star edge and every triangle.
    habitats: &'static [&'static [usize]],
    coords: &'static [Point],
    /// Counter-clockwise outer boundary.
    boundary: &'static [usize],
}

impl GadgetSpec {
    fn edges(&self) -> Vec<(usize, usize)> {
        self.star.iter().chain(self.first).chain(self.second).copied().collect()
    }

    fn habitat_sets(&self) -> Vec<Vec<usize>> {
        if !self.habitats.is_empty() {
            return self.habitats.iter().map(|h| h.to_vec()).collect();
        }
        let g = SimpleGraph::new(self.size, &self.edges());
        let mut out: Vec<Vec<usize>> = self.star.iter().map(|&(a, b)| vec![a.min(b), a.max(b)]).collect();
        for a in 0..self.size {
            for b in a + 1..self.size {
                for c in b + 1..self.size {
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        out.push(vec![a, b, c]);
                    }
                }
            }
        }
        out
    }
}

// Construction 1: `first` is F^⊤ (vertex) or F^u (edge); `second` is F^⊥ or F^v.
const C1_VERTEX: GadgetSpec = GadgetSpec {
    size: 5,
    star: &[(0, 3), (1, 4), (2, 3)],
    first: &[(0, 1), (1, 2), (3, 4)],
    second: &[(0, 4), (2, 4)],
    docking: &[(1, 0), (1, 2), (4, 3)],
    habitats: &[],
    coords: &[],
    boundary: &[],
};

const C1_EDGE: GadgetSpec = GadgetSpec {
    size: 5,
    star: &[(0, 3), (1, 2), (2, 4)],
    first: &[(0, 1), (2, 3)],
    second: &[(0, 2), (3, 4)],
    docking: &[(1, 0), (4, 3)],
    habitats: &[],
    coords: &[],
    boundary: &[],
};

const C2_VERTEX: GadgetSpec = GadgetSpec {
    size: 6,
    star: &[(1, 5), (3, 5)],
    first: &[(0, 1), (1, 2), (2, 3), (3, 4)],
    second: &[(0, 5), (2, 5), (4, 5)],
    docking: &[(1, 0), (1, 2), (3, 4)],
    habitats: &[&[0, 1, 2, 5], &[2, 3, 4, 5]],
    coords: &[[10, 0], [5, 9], [-5, 9], [-10, 0], [-5, -9], [0, 0]],
    boundary: &[0, 1, 2, 3, 4, 5],
};

// Edge gadgets of Construction 2 list docking pairs as [v side, u side].
const C2_EDGE_DEFAULT: GadgetSpec = GadgetSpec {
    size: 7,
    star: &[(0, 3), (3, 5), (1, 2), (2, 4), (4, 6)],
    first: &[(0, 2), (3, 4), (5, 6)],
    second: &[(0, 1), (2, 3), (3, 6)],
    docking: &[(1, 0), (5, 6)],
    habitats: &[],
    coords: &[[1, 2], [0, 0], [2, 0], [3, 2], [4, 0], [5, 2], [6, 0]],
    boundary: &[1, 2, 4, 6, 5, 3, 0],
};

const C2_EDGE_ANTI: GadgetSpec = GadgetSpec {
    size: 7,
    star: &[(0, 3), (3, 5), (1, 2), (2, 4), (4, 6)],
    first: &[(0, 2), (3, 4), (5, 6)],
    second: &[(0, 1), (2, 3), (4, 5)],
    docking: &[(1, 0), (6, 5)],
    habitats: &[],
    coords: &[[1, 2], [0, 0], [2, 0], [3, 2], [4, 0], [5, 2], [6, 0]],
    boundary: &[1, 2, 4, 6, 5, 3, 0],
};

const C2_DOCKED: &[(usize, usize)] = &[(0, 1), (5, 6)];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGadget {
    pub source: usize,
    pub vertices: Vec<VertexId>,
    pub top: Vec<EdgeId>,
    pub bottom: Vec<EdgeId>,
    pub star: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeGadget {
    pub source: [usize; 2],
    /// Endpoint whose vertex gadget shares an edge with `f_u`.
    pub u_side: usize,
    pub v_side: usize,
    /// Docking slots (1-based) used at `u_side` and `v_side`.
    pub slots: [usize; 2],
    pub anti_crossing: bool,
    pub mirrored: bool,
    pub vertices: Vec<VertexId>,
    pub star: Vec<EdgeId>,
    pub f_u: Vec<EdgeId>,
    pub f_v: Vec<EdgeId>,
    /// Edges shared with vertex gadgets.
    pub docked: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DockingRecord {
    pub vertex: usize,
    pub slot: usize,
    pub edge: usize,
    pub u_side: bool,
    pub pair: [VertexId; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetMap {
    pub construction: Construction,
    pub vertex_gadgets: Vec<VertexGadget>,
    pub edge_gadgets: Vec<EdgeGadget>,
    pub docking: Vec<DockingRecord>,
    /// Cost of a solution for an empty cover: `5n + 4m` or `5n + 7m`.
    pub base_cost: u64,
}

impl GadgetMap {
    /// Budget matching a vertex cover of size `k`.
    pub fn target(&self, k: usize) -> u64 {
        self.base_cost + k as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetAudit {
    pub max_degree: usize,
    pub max_habitat_size: usize,
    pub dockings_once: bool,
    /// Vertices whose degree differs from the sum over gadgets minus dockings.
    pub degree_formula_failures: Vec<VertexId>,
}

struct Occurrence {
    spec: &'static GadgetSpec,
    raw: Vec<usize>,
    mirrored: bool,
}

struct Builder {
    parent: Vec<usize>,
    occurrences: Vec<Occurrence>,
    /// (raw vertex of the vertex gadget, raw vertex of the edge gadget) per docking.
    glued: Vec<[(usize, usize); 2]>,
}

impl Builder {
    fn new() -> Self {
        Builder { parent: Vec::new(), occurrences: Vec::new(), glued: Vec::new() }
    }

    fn add(&mut self, spec: &'static GadgetSpec) -> usize {
        let start = self.parent.len();
        self.parent.extend(start..start + spec.size);
        self.occurrences.push(Occurrence { spec, raw: (start..start + spec.size).collect(), mirrored: false });
        self.occurrences.len() - 1
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        self.parent[x] = r;
        r
    }

    fn dock(&mut self, a: usize, da: (usize, usize), b: usize, db: (usize, usize)) {
        let pairs = [
            (self.occurrences[a].raw[da.0], self.occurrences[b].raw[db.0]),
            (self.occurrences[a].raw[da.1], self.occurrences[b].raw[db.1]),
        ];
        for &(x, y) in &pairs {
            let (rx, ry) = (self.find(x), self.find(y));
            self.parent[rx.max(ry)] = rx.min(ry);
        }
        self.glued.push(pairs);
    }

    /// Final ids in order of first raw occurrence.
    fn labels(&mut self) -> Vec<usize> {
        let mut id_of_root = BTreeMap::new();
        (0..self.parent.len())
            .map(|x| {
                let r = self.find(x);
                let next = id_of_root.len();
                *id_of_root.entry(r).or_insert(next)
            })
            .collect()
    }
}

struct Built {
    instance: Instance,
    label: Vec<usize>,
    edge_pairs: Vec<(usize, usize)>,
}

fn assemble(builder: &mut Builder) -> Built {
    let label = builder.labels();
    let n = label.iter().copied().max().map_or(0, |x| x + 1);
    let mut forced = BTreeSet::new();
    let mut all = BTreeSet::new();
    let mut habitats = Vec::new();
    for occ in &builder.occurrences {
        let map = |a: usize| label[occ.raw[a]];
        for (a, b) in occ.spec.edges() {
            let (x, y) = (map(a), map(b));
            all.insert((x.min(y), x.max(y)));
        }
        for &(a, b) in occ.spec.star {
            let (x, y) = (map(a), map(b));
            forced.insert((x.min(y), x.max(y)));
        }
        for h in occ.spec.habitat_sets() {
            habitats.push(h.into_iter().map(map).collect::<Vec<_>>());
        }
    }
    let edge_pairs: Vec<(usize, usize)> = all.iter().copied().collect();
    let edges = edge_pairs
        .iter()
        .map(|&(u, v)| if forced.contains(&(u, v)) { Edge::forced(u, v, 1) } else { Edge::new(u, v, 1) })
        .collect();
    let instance = Instance::new(n, edges, habitats, None, None).expect("gadget instance is well formed");
    Built { instance, label, edge_pairs }
}

fn edge_ids(inst: &Instance, label: &[usize], occ: &Occurrence, local: &[(usize, usize)]) -> Vec<EdgeId> {
    let mut out: Vec<EdgeId> = local
        .iter()
        .map(|&(a, b)| inst.edge_between(label[occ.raw[a]], label[occ.raw[b]]).expect("gadget edge exists"))
        .collect();
    out.sort_unstable();
    out
}

/// Construction 1: gadgets docked along sorted neighbour order.
pub fn construct1(vc: &VcInstance) -> (Instance, GadgetMap) {
    let mut b = Builder::new();
    let vertex_occ: Vec<usize> = (0..vc.vertex_count()).map(|_| b.add(&C1_VERTEX)).collect();
    let edge_occ: Vec<usize> = vc.edges().iter().map(|_| b.add(&C1_EDGE)).collect();
    let mut docking_plan = Vec::new();
    for u in 0..vc.vertex_count() {
        for (slot, &w) in vc.neighbors(u).iter().enumerate() {
            let e = vc.edge_index(u, w).expect("neighbour edge");
            let u_side = vc.edges()[e].0 == u;
            let pair = C1_EDGE.docking[if u_side { 0 } else { 1 }];
            b.dock(vertex_occ[u], C1_VERTEX.docking[slot], edge_occ[e], pair);
            docking_plan.push((u, slot + 1, e, u_side));
        }
    }
    let built = assemble(&mut b);
    let map = gadget_map(vc, Construction::One, &b, &built, &vertex_occ, &edge_occ, &docking_plan, |_| (false, false));
    (built.instance, map)
}

#[allow(clippy::too_many_arguments)]
fn gadget_map(
    vc: &VcInstance,
    construction: Construction,
    b: &Builder,
    built: &Built,
    vertex_occ: &[usize],
    edge_occ: &[usize],
    plan: &[(usize, usize, usize, bool)],
    flags: impl Fn(usize) -> (bool, bool),
) -> GadgetMap {
    let inst = &built.instance;
    let label = &built.label;
    let vertex_gadgets = vertex_occ
        .iter()
        .enumerate()
        .map(|(u, &o)| {
            let occ = &b.occurrences[o];
            VertexGadget {
                source: u,
                vertices: occ.raw.iter().map(|&x| label[x]).collect(),
                top: edge_ids(inst, label, occ, occ.spec.first),
                bottom: edge_ids(inst, label, occ, occ.spec.second),
                star: edge_ids(inst, label, occ, occ.spec.star),
            }
        })
        .collect();
    let mut slots = vec![[0usize; 2]; vc.edges().len()];
    for &(_, slot, e, u_side) in plan {
        slots[e][if u_side { 0 } else { 1 }] = slot;
    }
    let edge_gadgets = edge_occ
        .iter()
        .enumerate()
        .map(|(e, &o)| {
            let occ = &b.occurrences[o];
            let (u, v) = vc.edges()[e];
            let (anti, mirrored) = flags(e);
            let docked_local: Vec<(usize, usize)> = occ.spec.docking.to_vec();
            EdgeGadget {
                source: [u, v],
                u_side: u,
                v_side: v,
                slots: slots[e],
                anti_crossing: anti,
                mirrored,
                vertices: occ.raw.iter().map(|&x| label[x]).collect(),
                star: edge_ids(inst, label, occ, occ.spec.star),
                f_u: edge_ids(inst, label, occ, occ.spec.first),
                f_v: edge_ids(inst, label, occ, occ.spec.second),
                docked: edge_ids(inst, label, occ, &docked_local),
            }
        })
        .collect();
    let docking = plan
        .iter()
        .zip(&b.glued)
        .map(|(&(vertex, slot, edge, u_side), g)| DockingRecord {
            vertex,
            slot,
            edge,
            u_side,
            pair: [label[g[0].0], label[g[1].0]],
        })
        .collect();
    let (n, m) = (vc.vertex_count() as u64, vc.edges().len() as u64);
    let base_cost = match construction {
        Construction::One => 5 * n + 4 * m,
        Construction::Two => 5 * n + 7 * m,
    };
    GadgetMap { construction, vertex_gadgets, edge_gadgets, docking, base_cost }
}

/// Counter-clockwise fan around a boundary vertex, from its boundary successor to its predecessor.
fn local_fan(spec: &GadgetSpec, mirrored: bool, x: usize) -> Vec<usize> {
    let pts: Vec<Point> = spec.coords.iter().map(|&[px, py]| if mirrored { [-px, py] } else { [px, py] }).collect();
    let rot = rotation_from_points(spec.size, &spec.edges(), &pts);
    let mut boundary = spec.boundary.to_vec();
    if mirrored {
        boundary.reverse();
    }
    let pos = boundary.iter().position(|&b| b == x).expect("every gadget vertex is on the boundary");
    let next = boundary[(pos + 1) % boundary.len()];
    let start = rot[x].iter().position(|&w| w == next).expect("boundary successor is a neighbour");
    (0..rot[x].len()).map(|i| rot[x][(start + i) % rot[x].len()]).collect()
}

/// Chains per-gadget fans into one rotation; `None` if they do not line up.
fn chain_fans(mut fans: Vec<Vec<usize>>) -> Option<Vec<usize>> {
    let firsts: Vec<usize> = fans.iter().map(|f| f[0]).collect();
    let lasts: Vec<usize> = fans.iter().map(|f| *f.last().unwrap()).collect();
    let start = (0..fans.len()).find(|&i| !lasts.contains(&firsts[i])).unwrap_or(0);
    let mut out = fans.swap_remove(start);
    while !fans.is_empty() {
        let tail = *out.last().unwrap();
        let i = fans.iter().position(|f| f[0] == tail)?;
        let f = fans.swap_remove(i);
        out.extend_from_slice(&f[1..]);
    }
    if out.len() > 1 && out[0] == *out.last().unwrap() {
        out.pop();
    }
    let mut check = out.clone();
    check.sort_unstable();
    check.dedup();
    (check.len() == out.len()).then_some(out)
}

fn rotation_of(b: &Builder, label: &[usize], n: usize) -> Option<Vec<Vec<usize>>> {
    let mut fans: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for occ in &b.occurrences {
        for x in 0..occ.spec.size {
            let fan = local_fan(occ.spec, occ.mirrored, x).into_iter().map(|w| label[occ.raw[w]]).collect();
            fans[label[occ.raw[x]]].push(fan);
        }
    }
    fans.into_iter().map(chain_fans).collect()
}

/// Construction 2: planar gadgets wired along the rotation system, with coordinates.
pub fn construct2(vc: &VcInstance) -> Result<(Instance, GadgetMap), HardnessError> {
    let rot = vc.rotation().ok_or(HardnessError::MissingRotation)?.to_vec();
    let slot_of = |u: usize, w: usize| rot[u].iter().position(|&x| x == w).expect("rotation lists neighbours") + 1;
    let mut b = Builder::new();
    let vertex_occ: Vec<usize> = (0..vc.vertex_count()).map(|_| b.add(&C2_VERTEX)).collect();
    let mut anti = Vec::new();
    let edge_occ: Vec<usize> = vc
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (i, j) = (slot_of(u, v), slot_of(v, u));
            let is_anti = (i == 1) != (j == 1);
            anti.push(is_anti);
            b.add(if is_anti { &C2_EDGE_ANTI } else { &C2_EDGE_DEFAULT })
        })
        .collect();
    let mut plan = Vec::new();
    for (e, &(u, v)) in vc.edges().iter().enumerate() {
        let spec = b.occurrences[edge_occ[e]].spec;
        let (i, j) = (slot_of(u, v), slot_of(v, u));
        b.dock(vertex_occ[u], C2_VERTEX.docking[i - 1], edge_occ[e], spec.docking[1]);
        plan.push((u, i, e, true));
        b.dock(vertex_occ[v], C2_VERTEX.docking[j - 1], edge_occ[e], spec.docking[0]);
        plan.push((v, j, e, false));
    }
    let mut built = assemble(&mut b);
    let n = built.instance.vertex_count();

    // pick each edge gadget's reflection so that both of its dockings glue opposite orientations
    let mut mirrored = vec![false; edge_occ.len()];
    for (e, &o) in edge_occ.iter().enumerate() {
        let ok = |b: &mut Builder, flag: bool| {
            b.occurrences[o].mirrored = flag;
            let occ = &b.occurrences[o];
            occ.spec.docking.iter().flat_map(|&(x, y)| [x, y]).all(|x| {
                let id = built.label[occ.raw[x]];
                let mut fans = Vec::new();
                for other in &b.occurrences {
                    for (lx, &raw) in other.raw.iter().enumerate() {
                        if built.label[raw] == id {
                            fans.push(
                                local_fan(other.spec, other.mirrored, lx)
                                    .into_iter()
                                    .map(|w| built.label[other.raw[w]])
                                    .collect(),
                            );
                        }
                    }
                }
                fans.len() > 2 || chain_fans(fans).is_some()
            })
        };
        if ok(&mut b, false) {
            mirrored[e] = false;
        } else if ok(&mut b, true) {
            mirrored[e] = true;
        } else {
            let (u, v) = vc.edges()[e];
            return Err(HardnessError::Orientation(format!("edge gadget for {{{u}, {v}}}")));
        }
        b.occurrences[o].mirrored = mirrored[e];
    }
    let rotation = rotation_of(&b, &built.label, n)
        .ok_or_else(|| HardnessError::Orientation("fans do not chain".into()))?;
    let pts = tutte_drawing(n, &built.edge_pairs, &rotation)?;
    built.instance = built.instance.with_embedding(Some(pts))?;
    built.instance.validate()?;
    let map = gadget_map(vc, Construction::Two, &b, &built, &vertex_occ, &edge_occ, &plan, |e| (anti[e], mirrored[e]));
    let mut map = map;
    for g in &mut map.edge_gadgets {
        let o = &b.occurrences[edge_occ[vc.edge_index(g.source[0], g.source[1]).unwrap()]];
        g.docked = edge_ids(&built.instance, &built.label, o, C2_DOCKED);
    }
    Ok((built.instance, map))
}

/// Structural checks on a generated instance.
pub fn audit(instance: &Instance, map: &GadgetMap) -> GadgetAudit {
    let mut vertex_slots = BTreeSet::new();
    let mut edge_sides = BTreeSet::new();
    let mut once = true;
    for d in &map.docking {
        once &= vertex_slots.insert((d.vertex, d.slot));
        once &= edge_sides.insert((d.edge, d.u_side));
    }
    once &= vertex_slots.len() == 3 * map.vertex_gadgets.len() && edge_sides.len() == 2 * map.edge_gadgets.len();

    let (vspec, espec): (&GadgetSpec, Box<dyn Fn(&EdgeGadget) -> &'static GadgetSpec>) = match map.construction {
        Construction::One => (&C1_VERTEX, Box::new(|_| &C1_EDGE)),
        Construction::Two => (&C2_VERTEX, Box::new(|g: &EdgeGadget| if g.anti_crossing { &C2_EDGE_ANTI } else { &C2_EDGE_DEFAULT })),
    };
    let mut expected = vec![0i64; instance.vertex_count()];
    let local_degree = |spec: &GadgetSpec, x: usize| spec.edges().iter().filter(|&&(a, b)| a == x || b == x).count() as i64;
    for g in &map.vertex_gadgets {
        for (x, &id) in g.vertices.iter().enumerate() {
            expected[id] += local_degree(vspec, x);
        }
    }
    for g in &map.edge_gadgets {
        let spec = espec(g);
        for (x, &id) in g.vertices.iter().enumerate() {
            expected[id] += local_degree(spec, x);
        }
    }
    for d in &map.docking {
        expected[d.pair[0]] -= 1;
        expected[d.pair[1]] -= 1;
    }
    let degree_formula_failures =
        (0..instance.vertex_count()).filter(|&v| expected[v] != instance.degree(v) as i64).collect();
    GadgetAudit {
        max_degree: instance.max_degree(),
        max_habitat_size: instance.max_habitat_size(),
        dockings_once: once,
        degree_formula_failures,
    }
}

/// Solution built from a vertex cover; each edge is charged to its smallest covering endpoint.
pub fn map_vc_to_gbp(map: &GadgetMap, vc: &VcInstance, cover: &[usize]) -> Result<Vec<EdgeId>, HardnessError> {
    if let Some((u, v)) = vc.uncovered_edge(cover) {
        return Err(HardnessError::NotACover([u, v]));
    }
    let inside: BTreeSet<usize> = cover.iter().copied().collect();
    let mut out = Vec::new();
    for g in &map.vertex_gadgets {
        out.extend(&g.star);
        out.extend(if inside.contains(&g.source) { &g.top } else { &g.bottom });
    }
    for g in &map.edge_gadgets {
        out.extend(&g.star);
        let chooser = *g.source.iter().filter(|v| inside.contains(v)).min().expect("covered");
        out.extend(if chooser == g.u_side { &g.f_u } else { &g.f_v });
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Vertex cover read off a solution of a generated instance.
pub fn map_gbp_to_vc(
    map: &GadgetMap,
    vc: &VcInstance,
    instance: &Instance,
    solution: &[EdgeId],
) -> Result<Vec<usize>, HardnessError> {
    if !instance.clone().with_budget(None).is_solution(solution).is_feasible() {
        return Err(HardnessError::InfeasibleSolution);
    }
    let chosen: BTreeSet<EdgeId> = solution.iter().copied().collect();
    let mut cover: BTreeSet<usize> = map
        .vertex_gadgets
        .iter()
        .filter(|g| match map.construction {
            Construction::One => g.top.iter().chain(&g.bottom).filter(|e| chosen.contains(e)).count() >= 3,
            Construction::Two => g.top.iter().any(|e| chosen.contains(e)),
        })
        .map(|g| g.source)
        .collect();
    for &(u, v) in vc.edges() {
        if !cover.contains(&u) && !cover.contains(&v) {
            cover.insert(u.min(v));
        }
    }
    Ok(cover.into_iter().collect())
}

/// Every connected planar cubic graph on at most eight vertices, with a rotation taken from a drawing.
pub fn catalog() -> Vec<(&'static str, VcInstance)> {
    let ring = |k: usize, off: usize| (0..k).map(move |i| (off + i, off + (i + 1) % k));
    let k4 = VcInstance::from_drawing(
        &[[0, 0], [10, 0], [5, 9], [5, 3]],
        vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    );
    let prism = VcInstance::from_drawing(
        &[[0, 0], [12, 0], [6, 10], [4, 2], [8, 2], [6, 6]],
        ring(3, 0).chain(ring(3, 3)).chain((0..3).map(|i| (i, i + 3))).collect(),
    );
    let cube = VcInstance::from_drawing(
        &[[0, 0], [12, 0], [12, 12], [0, 12], [4, 4], [8, 4], [8, 8], [4, 8]],
        ring(4, 0).chain(ring(4, 4)).chain((0..4).map(|i| (i, i + 4))).collect(),
    );
    let diamonds = VcInstance::from_drawing(
        &[[2, 10], [0, 5], [4, 5], [2, 0], [10, 10], [8, 5], [12, 5], [10, 0]],
        vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (4, 5), (4, 6), (5, 6), (5, 7), (6, 7), (0, 4), (3, 7)],
    );
    let twin_triangles = VcInstance::from_drawing(
        &[[0, 0], [12, 0], [6, 9], [14, 14], [9, 12], [3, 12], [-2, 14], [6, 3]],
        vec![(0, 1), (0, 6), (0, 7), (1, 3), (1, 7), (2, 4), (2, 5), (2, 7), (3, 4), (3, 6), (4, 5), (5, 6)],
    );
    vec![("k4", k4), ("prism", prism), ("cube", cube), ("diamonds", diamonds), ("twin-triangles", twin_triangles)]
        .into_iter()
        .map(|(name, g)| (name, g.expect("catalog graphs are cubic and planar")))
        .collect()
}

#[derive(Debug, Clone)]
pub struct GadgetCase {
    pub source_name: &'static str,
    pub source: VcInstance,
    pub construction: Construction,
    pub instance: Instance,
    pub map: GadgetMap,
}

/// Random gadget case: K4 or the prism under a random relabeling, either construction.
pub fn gadget_case(seed: u64) -> GadgetCase {
    let mut rng = crate::generate::rng(seed);
    let graphs = catalog();
    let (source_name, base) = &graphs[rng.gen_range(0..2)];
    let mut perm: Vec<usize> = (0..base.vertex_count()).collect();
    perm.shuffle(&mut rng);
    let source = base.relabeled(&perm);
    let construction = if rng.gen_bool(0.5) { Construction::One } else { Construction::Two };
    let (instance, map) = match construction {
        Construction::One => construct1(&source),
        Construction::Two => construct2(&source).expect("catalog graphs admit construction 2"),
    };
    GadgetCase { source_name, source, construction, instance, map }
}

pub fn gadget_instance(seed: u64) -> Instance {
    gadget_case(seed).instance
}
