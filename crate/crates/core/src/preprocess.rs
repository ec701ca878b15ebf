//! Reduction rules 1 to 7, applied to a fixpoint, with a replayable ledger.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::exact;
use crate::model::{Cost, Edge, EdgeId, Instance, Relabel, VertexId, DIAMETER_BOUND};

/// Components with at most this many vertices are solved by brute force and removed.
pub const SMALL_COMPONENT: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Continue,
    NoInstance { habitat: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedComponent {
    pub vertices: Vec<VertexId>,
    pub chosen: Vec<EdgeId>,
    pub cost: Cost,
}

/// What preprocessing did, in terms of the original instance's ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionLedger {
    pub verdict: Verdict,
    /// Amount subtracted from the budget.
    pub budget_delta: i64,
    pub newly_forced: Vec<EdgeId>,
    pub removed_habitats: Vec<usize>,
    pub deleted_edges: Vec<EdgeId>,
    /// Forced edges deleted by Rule 5; they belong to every solution.
    pub deleted_forced: Vec<EdgeId>,
    pub deleted_vertices: Vec<VertexId>,
    pub removed_components: Vec<RemovedComponent>,
    pub relabel: Relabel,
}

impl ReductionLedger {
    fn empty() -> Self {
        ReductionLedger {
            verdict: Verdict::Continue,
            budget_delta: 0,
            newly_forced: Vec::new(),
            removed_habitats: Vec::new(),
            deleted_edges: Vec::new(),
            deleted_forced: Vec::new(),
            deleted_vertices: Vec::new(),
            removed_components: Vec::new(),
            relabel: Relabel::default(),
        }
    }

    pub fn is_no_instance(&self) -> bool {
        matches!(self.verdict, Verdict::NoInstance { .. })
    }

    /// Rebuilds the reduced instance from the original by replaying the recorded edits.
    pub fn replay(&self, original: &Instance) -> Instance {
        let mut base = original.clone();
        for &e in &self.newly_forced {
            base.set_forced(e, true);
        }
        let mut keep_v = vec![true; original.vertex_count()];
        let mut keep_e = vec![true; original.edge_count()];
        let mut keep_h = vec![true; original.habitats().len()];
        self.deleted_vertices.iter().for_each(|&v| keep_v[v] = false);
        self.deleted_edges.iter().for_each(|&e| keep_e[e] = false);
        self.removed_habitats.iter().for_each(|&h| keep_h[h] = false);
        base.set_budget(original.budget().map(|k| k - self.budget_delta));
        base.compact(&keep_v, &keep_e, &keep_h).0
    }

    /// Expresses a solution of the reduced instance on the original edges.
    pub fn lift(&self, reduced_solution: &[EdgeId]) -> Vec<EdgeId> {
        let mut out = self.relabel.edges_to_parent(reduced_solution);
        out.extend(&self.deleted_forced);
        for comp in &self.removed_components {
            out.extend(&comp.chosen);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A habitat's induced subgraph with local vertex indices.
pub(crate) struct Induced {
    pub vertices: Vec<VertexId>,
    /// Local adjacency: `(local neighbor, edge id)`.
    pub adj: Vec<Vec<(usize, EdgeId)>>,
    pub edges: Vec<(usize, usize, EdgeId)>,
}

impl Induced {
    pub fn new(instance: &Instance, vertices: &[VertexId], alive: impl Fn(EdgeId) -> bool) -> Self {
        let vertices = vertices.to_vec();
        let mut adj = vec![Vec::new(); vertices.len()];
        let mut edges = Vec::new();
        for (a, &u) in vertices.iter().enumerate() {
            for &(w, e) in instance.neighbors(u) {
                if w > u && alive(e) {
                    if let Ok(b) = vertices.binary_search(&w) {
                        adj[a].push((b, e));
                        adj[b].push((a, e));
                        edges.push((a, b, e));
                    }
                }
            }
        }
        Induced { vertices, adj, edges }
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].iter().any(|&(x, _)| x == b)
    }

    /// Diameter restricted to edges accepted by `pick`; `None` if disconnected.
    pub fn diameter(&self, pick: impl Fn(EdgeId) -> bool) -> Option<usize> {
        let n = self.vertices.len();
        let mut worst = 0;
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &(y, e) in &self.adj[x] {
                    if pick(e) && dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            for &d in &dist {
                if d == usize::MAX {
                    return None;
                }
                worst = worst.max(d);
            }
        }
        Some(worst)
    }

    pub fn edge_in_triangle(&self, a: usize, b: usize) -> bool {
        self.adj[a].iter().any(|&(w, _)| w != b && self.has_edge(w, b))
    }

    pub fn triangle_count(&self) -> usize {
        let mut count = 0;
        for &(a, b, _) in &self.edges {
            for &(w, _) in &self.adj[a] {
                if w > b && self.has_edge(w, b) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn cut_vertices(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut cuts = Vec::new();
        for v in 0..n {
            if n < 3 {
                break;
            }
            let start = if v == 0 { 1 } else { 0 };
            let mut seen = vec![false; n];
            seen[v] = true;
            seen[start] = true;
            let mut stack = vec![start];
            let mut reached = 1;
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        reached += 1;
                        stack.push(y);
                    }
                }
            }
            if reached < n - 1 {
                cuts.push(v);
            }
        }
        cuts
    }
}

struct Work<'a> {
    base: &'a Instance,
    forced: Vec<bool>,
    edge_alive: Vec<bool>,
    vertex_alive: Vec<bool>,
    habitat_alive: Vec<bool>,
    ledger: ReductionLedger,
}

impl<'a> Work<'a> {
    fn new(base: &'a Instance) -> Self {
        Work {
            base,
            forced: base.edges().iter().map(|e| e.forced).collect(),
            edge_alive: vec![true; base.edge_count()],
            vertex_alive: vec![true; base.vertex_count()],
            habitat_alive: vec![true; base.habitats().len()],
            ledger: ReductionLedger::empty(),
        }
    }

    fn induced(&self, h: usize) -> Induced {
        Induced::new(self.base, self.base.habitat(h), |e| self.edge_alive[e])
    }

    fn alive_habitats(&self) -> Vec<usize> {
        (0..self.habitat_alive.len()).filter(|&h| self.habitat_alive[h]).collect()
    }

    fn drop_habitat(&mut self, h: usize) {
        self.habitat_alive[h] = false;
        self.ledger.removed_habitats.push(h);
    }

    fn force(&mut self, e: EdgeId) -> bool {
        if self.forced[e] {
            return false;
        }
        self.forced[e] = true;
        self.ledger.newly_forced.push(e);
        true
    }

    fn dedup_habitats(&mut self) {
        let mut first_of = BTreeMap::new();
        for h in 0..self.base.habitats().len() {
            if first_of.contains_key(self.base.habitat(h)) {
                self.drop_habitat(h);
            } else {
                first_of.insert(self.base.habitat(h).to_vec(), h);
            }
        }
    }

    fn rule1(&self) -> Option<usize> {
        self.alive_habitats().into_iter().find(|&h| {
            !matches!(self.induced(h).diameter(|_| true), Some(d) if d <= DIAMETER_BOUND)
        })
    }

    fn rule2(&mut self) -> bool {
        let mut changed = false;
        for h in self.alive_habitats() {
            let g = self.induced(h);
            for &(a, b, e) in &g.edges {
                if !g.edge_in_triangle(a, b) {
                    changed |= self.force(e);
                }
            }
        }
        changed
    }

    fn rule3(&mut self) -> bool {
        let mut changed = false;
        for h in self.alive_habitats() {
            let g = self.induced(h);
            if g.triangle_count() == 0 {
                for &(_, _, e) in &g.edges {
                    changed |= self.force(e);
                }
            }
            for v in g.cut_vertices() {
                for &(_, e) in &g.adj[v] {
                    changed |= self.force(e);
                }
            }
        }
        changed
    }

    fn rule4(&mut self) -> bool {
        let mut changed = false;
        for h in self.alive_habitats() {
            let g = self.induced(h);
            if matches!(g.diameter(|e| self.forced[e]), Some(d) if d <= DIAMETER_BOUND) {
                self.drop_habitat(h);
                changed = true;
                continue;
            }
            // a lone unforced edge is then needed by every solution
            let unforced: Vec<EdgeId> = g.edges.iter().map(|&(_, _, e)| e).filter(|&e| !self.forced[e]).collect();
            if let [e] = unforced[..] {
                self.force(e);
                self.drop_habitat(h);
                changed = true;
            }
        }
        changed
    }

    fn rule5(&mut self) -> bool {
        let mut covered = vec![false; self.base.edge_count()];
        for h in self.alive_habitats() {
            for &(_, _, e) in &self.induced(h).edges {
                covered[e] = true;
            }
        }
        let mut changed = false;
        for e in 0..self.base.edge_count() {
            if self.edge_alive[e] && !covered[e] {
                self.edge_alive[e] = false;
                self.ledger.deleted_edges.push(e);
                if self.forced[e] {
                    self.ledger.deleted_forced.push(e);
                    self.ledger.budget_delta += self.base.edge(e).cost as i64;
                }
                changed = true;
            }
        }
        changed
    }

    fn rule6(&mut self) -> bool {
        let mut changed = false;
        for v in 0..self.base.vertex_count() {
            if self.vertex_alive[v] && !self.base.neighbors(v).iter().any(|&(_, e)| self.edge_alive[e]) {
                self.vertex_alive[v] = false;
                self.ledger.deleted_vertices.push(v);
                changed = true;
            }
        }
        changed
    }

    fn rule7(&mut self) -> bool {
        let n = self.base.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut components: Vec<Vec<VertexId>> = Vec::new();
        for s in 0..n {
            if !self.vertex_alive[s] || comp[s] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut i = 0;
            while i < members.len() {
                let x = members[i];
                i += 1;
                for &(y, e) in self.base.neighbors(x) {
                    if self.edge_alive[e] && comp[y] == usize::MAX {
                        comp[y] = id;
                        members.push(y);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        let small: Vec<usize> = (0..components.len())
            .filter(|&c| components[c].len() <= SMALL_COMPONENT)
            .collect();
        if small.is_empty() {
            return false;
        }
        let mut habitats_of: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for h in self.alive_habitats() {
            let c = comp[self.base.habitat(h)[0]];
            habitats_of.entry(c).or_default().push(h);
        }
        let mut local = vec![usize::MAX; n];
        for c in small {
            let vertices = components[c].clone();
            for (i, &v) in vertices.iter().enumerate() {
                local[v] = i;
            }
            // vertices are sorted, so local edge order matches global edge order
            let mut edge_ids: Vec<EdgeId> = vertices
                .iter()
                .flat_map(|&v| self.base.neighbors(v).iter().filter(move |&&(y, _)| v < y).map(|&(_, e)| e))
                .filter(|&e| self.edge_alive[e])
                .collect();
            edge_ids.sort_unstable();
            let edges: Vec<Edge> = edge_ids
                .iter()
                .map(|&e| {
                    let edge = self.base.edge(e);
                    Edge { u: local[edge.u], v: local[edge.v], cost: edge.cost, forced: self.forced[e] }
                })
                .collect();
            let hs = habitats_of.remove(&c).unwrap_or_default();
            let local_habitats = hs.iter().map(|&h| self.base.habitat(h).iter().map(|&v| local[v]).collect()).collect();
            let sub = Instance::new(vertices.len(), edges, local_habitats, None, None)
                .expect("a component of a valid instance is valid");
            let costs: Vec<Cost> = sub.edges().iter().map(|e| e.cost).collect();
            let required: Vec<bool> = sub.edges().iter().map(|e| e.forced).collect();
            let all: Vec<usize> = (0..hs.len()).collect();
            let opt = exact::minimize(&sub, &costs, &vec![true; costs.len()], &required, &all)
                .expect("rule 1 guarantees local feasibility");
            let opt = exact::Optimum { edges: opt.edges.iter().map(|&e| edge_ids[e]).collect(), cost: opt.cost };
            for &e in &edge_ids {
                self.edge_alive[e] = false;
                self.ledger.deleted_edges.push(e);
            }
            for &v in &vertices {
                self.vertex_alive[v] = false;
                self.ledger.deleted_vertices.push(v);
            }
            for h in hs {
                self.drop_habitat(h);
            }
            self.ledger.budget_delta += opt.cost as i64;
            self.ledger.removed_components.push(RemovedComponent { vertices, chosen: opt.edges, cost: opt.cost });
        }
        true
    }

    fn finish(mut self) -> (Instance, ReductionLedger) {
        let mut base = self.base.clone();
        for e in 0..self.forced.len() {
            base.set_forced(e, self.forced[e]);
        }
        base.set_budget(self.base.budget().map(|k| k - self.ledger.budget_delta));
        let (reduced, relabel) = base.compact(&self.vertex_alive, &self.edge_alive, &self.habitat_alive);
        for list in [
            &mut self.ledger.newly_forced,
            &mut self.ledger.removed_habitats,
            &mut self.ledger.deleted_edges,
            &mut self.ledger.deleted_forced,
            &mut self.ledger.deleted_vertices,
        ] {
            list.sort_unstable();
        }
        self.ledger.relabel = relabel;
        (reduced, self.ledger)
    }
}

/// `NoInstance` iff some habitat induces a subgraph of diameter above two.
pub fn rule1_diameter_guard(instance: &Instance) -> Verdict {
    match Work::new(instance).rule1() {
        Some(habitat) => Verdict::NoInstance { habitat },
        None => Verdict::Continue,
    }
}

/// Forces every habitat edge lying in no triangle of its habitat.
pub fn rule2_force_non_triangle_edges(instance: &Instance) -> (Instance, ReductionLedger) {
    let mut work = Work::new(instance);
    work.rule2();
    work.finish()
}

/// Forces all edges of triangle-free habitats and all habitat edges at cut vertices.
pub fn rule3_force_structural_edges(instance: &Instance) -> (Instance, ReductionLedger) {
    let mut work = Work::new(instance);
    work.rule3();
    work.finish()
}

/// One pass of Rules 4, 5 and 6.
pub fn rule4_to_6_cleanup(instance: &Instance) -> (Instance, ReductionLedger) {
    let mut work = Work::new(instance);
    work.rule4();
    work.rule5();
    work.rule6();
    work.finish()
}

/// Solves and removes every component with at most six vertices.
pub fn rule7_small_components(instance: &Instance) -> (Instance, ReductionLedger) {
    let mut work = Work::new(instance);
    work.rule7();
    work.finish()
}

/// Applies Rules 1 to 7 until none is applicable.
pub fn preprocess_all(instance: &Instance) -> (Instance, ReductionLedger) {
    let mut work = Work::new(instance);
    work.dedup_habitats();
    if let Some(habitat) = work.rule1() {
        work.ledger.verdict = Verdict::NoInstance { habitat };
        return work.finish();
    }
    loop {
        let mut changed = work.rule2();
        changed |= work.rule3();
        changed |= work.rule5();
        changed |= work.rule4();
        changed |= work.rule6();
        changed |= work.rule7();
        if !changed {
            break;
        }
    }
    work.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PostconditionViolation {
    SmallComponent { vertices: Vec<VertexId> },
    NotBiconnected { habitat: usize },
    FewUnforcedEdges { habitat: usize, unforced: usize },
    NoTriangle { habitat: usize },
}

/// Audits a reduced instance for the structure promised by exhaustive reduction.
pub fn check_postconditions(instance: &Instance) -> Vec<PostconditionViolation> {
    let mut out = Vec::new();
    let n = instance.vertex_count();
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut members = vec![s];
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            i += 1;
            for &(y, _) in instance.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    members.push(y);
                }
            }
        }
        if members.len() <= SMALL_COMPONENT {
            members.sort_unstable();
            out.push(PostconditionViolation::SmallComponent { vertices: members });
        }
    }
    for h in 0..instance.habitats().len() {
        let g = Induced::new(instance, instance.habitat(h), |_| true);
        if g.diameter(|_| true).is_none() || !g.cut_vertices().is_empty() {
            out.push(PostconditionViolation::NotBiconnected { habitat: h });
        }
        let unforced = g.edges.iter().filter(|&&(_, _, e)| !instance.edge(e).forced).count();
        if unforced < 2 {
            out.push(PostconditionViolation::FewUnforcedEdges { habitat: h, unforced });
        }
        if g.triangle_count() == 0 {
            out.push(PostconditionViolation::NoTriangle { habitat: h });
        }
    }
    out
}
