//! Exact minimum-cost oracle and per-habitat feasible families.
//!
//! Branch and bound on unforced habitat edges, picking the edge that occurs in
//! the most unsatisfied habitats. Among optima the one whose sorted edge list
//! is lexicographically smallest is returned (for positive costs).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Cost, EdgeId, Instance, Solution, VertexId};

/// Habitats with more vertices than this cannot be represented by the bitset checks.
pub const MAX_HABITAT_VERTICES: usize = 64;
/// Family enumeration refuses habitats with more unforced edges than this.
pub const FAMILY_EDGE_GUARD: usize = 12;
const COMPLETION_ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("habitat {habitat} cannot reach diameter two within the allowed edges")]
    Infeasible { habitat: usize },
    #[error("habitat {habitat} is too large ({size}) for this routine")]
    HabitatTooLarge { habitat: usize, size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Optimum {
    pub edges: Vec<EdgeId>,
    pub cost: Cost,
}

/// All feasible edge sets of one habitat, each a subset of `E(G[H])` holding its forced edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibleFamily {
    pub habitat: usize,
    /// `E(G[H])`, sorted.
    pub edges: Vec<EdgeId>,
    /// Members as bitmasks over `edges`.
    pub masks: Vec<u64>,
}

impl FeasibleFamily {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn member(&self, i: usize) -> Vec<EdgeId> {
        mask_edges(&self.edges, self.masks[i])
    }

    pub fn sets(&self) -> Vec<Vec<EdgeId>> {
        (0..self.masks.len()).map(|i| self.member(i)).collect()
    }
}

pub(crate) fn mask_edges(edges: &[EdgeId], mask: u64) -> Vec<EdgeId> {
    edges
        .iter()
        .enumerate()
        .filter(|&(i, _)| mask >> i & 1 == 1)
        .map(|(_, &e)| e)
        .collect()
}

/// A habitat's induced subgraph with vertices renumbered `0..n`.
#[derive(Debug, Clone)]
pub(crate) struct LocalHabitat {
    pub vertex_count: usize,
    /// `(a, b, global edge id)`, sorted by edge id.
    pub edges: Vec<(usize, usize, EdgeId)>,
}

impl LocalHabitat {
    pub fn new(instance: &Instance, habitat: usize, vertices: &[VertexId]) -> Result<Self, ExactError> {
        if vertices.len() > MAX_HABITAT_VERTICES {
            return Err(ExactError::HabitatTooLarge { habitat, size: vertices.len() });
        }
        let edges: Vec<(usize, usize, EdgeId)> = instance
            .induced_edges(vertices)
            .into_iter()
            .map(|e| {
                let edge = instance.edge(e);
                let a = vertices.binary_search(&edge.u).expect("endpoint in habitat");
                let b = vertices.binary_search(&edge.v).expect("endpoint in habitat");
                (a, b, e)
            })
            .collect();
        if edges.len() > 64 {
            return Err(ExactError::HabitatTooLarge { habitat, size: vertices.len() });
        }
        Ok(LocalHabitat { vertex_count: vertices.len(), edges })
    }

    fn full(&self) -> u64 {
        if self.vertex_count == 64 {
            u64::MAX
        } else {
            (1u64 << self.vertex_count) - 1
        }
    }

    /// Diameter at most two using the local edges selected by `pick`.
    pub fn ok_with(&self, pick: impl Fn(usize) -> bool) -> bool {
        let mut adj = [0u64; MAX_HABITAT_VERTICES];
        for (i, &(a, b, _)) in self.edges.iter().enumerate() {
            if pick(i) {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        let full = self.full();
        (0..self.vertex_count).all(|v| {
            let mut reach = adj[v] | 1 << v;
            let mut rest = adj[v];
            while rest != 0 {
                let w = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                reach |= adj[w];
            }
            reach == full
        })
    }

    pub fn ok_mask(&self, mask: u64) -> bool {
        self.ok_with(|i| mask >> i & 1 == 1)
    }
}

/// Every subset of `E(G[H])` containing the forced habitat edges that gives diameter at most two.
pub fn enumerate_feasible_sets(instance: &Instance, habitat: usize) -> Result<FeasibleFamily, ExactError> {
    let vertices = instance.habitat(habitat);
    let local = LocalHabitat::new(instance, habitat, vertices)?;
    let forced_mask: u64 = local
        .edges
        .iter()
        .enumerate()
        .filter(|(_, &(_, _, e))| instance.edge(e).forced)
        .fold(0, |m, (i, _)| m | 1 << i);
    let free: Vec<usize> = (0..local.edges.len()).filter(|&i| forced_mask >> i & 1 == 0).collect();
    if free.len() > FAMILY_EDGE_GUARD {
        return Err(ExactError::HabitatTooLarge { habitat, size: free.len() });
    }
    let mut masks = Vec::new();
    for bits in 0u64..(1 << free.len()) {
        let mut mask = forced_mask;
        for (j, &i) in free.iter().enumerate() {
            if bits >> j & 1 == 1 {
                mask |= 1 << i;
            }
        }
        if local.ok_mask(mask) {
            masks.push(mask);
        }
    }
    masks.sort_unstable();
    Ok(FeasibleFamily {
        habitat,
        edges: local.edges.iter().map(|&(_, _, e)| e).collect(),
        masks,
    })
}

/// Minimum-cost `F` with `F* ⊆ F ⊆ restrict_to ∪ F*` satisfying every habitat.
pub fn solve_exact(instance: &Instance, restrict_to: Option<&[EdgeId]>) -> Result<Solution, ExactError> {
    let m = instance.edge_count();
    let required: Vec<bool> = instance.edges().iter().map(|e| e.forced).collect();
    let allowed = match restrict_to {
        None => vec![true; m],
        Some(list) => {
            let mut mask = required.clone();
            for &e in list {
                if e < m {
                    mask[e] = true;
                }
            }
            mask
        }
    };
    let costs: Vec<Cost> = instance.edges().iter().map(|e| e.cost).collect();
    let habitats: Vec<usize> = (0..instance.habitats().len()).collect();
    let optimum = minimize(instance, &costs, &allowed, &required, &habitats)?;
    Ok(instance.is_solution(&optimum.edges))
}

/// The general oracle: cheapest edge set under `costs` that contains `required`,
/// stays within `allowed ∪ required`, and satisfies the listed habitats.
///
/// Edges outside every listed habitat are never chosen unless required.
pub fn minimize(
    instance: &Instance,
    costs: &[Cost],
    allowed: &[bool],
    required: &[bool],
    habitats: &[usize],
) -> Result<Optimum, ExactError> {
    let m = instance.edge_count();
    let mut locals = Vec::with_capacity(habitats.len());
    for &h in habitats {
        locals.push((h, LocalHabitat::new(instance, h, instance.habitat(h))?));
    }

    // Variables are unforced allowed edges inside some listed habitat.
    let mut var_of = vec![usize::MAX; m];
    let mut vars = Vec::new();
    for (_, local) in &locals {
        for &(_, _, e) in &local.edges {
            if !required[e] && allowed[e] && var_of[e] == usize::MAX {
                var_of[e] = 0;
                vars.push(e);
            }
        }
    }
    vars.sort_unstable();
    for (i, &e) in vars.iter().enumerate() {
        var_of[e] = i;
    }

    // Union habitats that share variables.
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut comp_habitats: HashMap<usize, Vec<usize>> = HashMap::new();
    for (h, local) in &locals {
        let hv: Vec<usize> = local
            .edges
            .iter()
            .filter(|&&(_, _, e)| var_of[e] != usize::MAX)
            .map(|&(_, _, e)| var_of[e])
            .collect();
        if hv.is_empty() {
            if !local.ok_with(|i| required[local.edges[i].2]) {
                return Err(ExactError::Infeasible { habitat: *h });
            }
            continue;
        }
        for w in hv.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    for (idx, (_, local)) in locals.iter().enumerate() {
        if let Some(&(_, _, e)) = local.edges.iter().find(|&&(_, _, e)| var_of[e] != usize::MAX) {
            let root = find(&mut parent, var_of[e]);
            comp_habitats.entry(root).or_default().push(idx);
        }
    }

    let mut chosen: Vec<EdgeId> = (0..m).filter(|&e| required[e]).collect();
    let mut roots: Vec<usize> = comp_habitats.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        let comp_vars: Vec<usize> = (0..vars.len()).filter(|&v| find(&mut parent, v) == root).collect();
        let members = &comp_habitats[&root];
        let mut search = Search::new(&locals, members, &comp_vars, &vars, &var_of, costs, required);
        match search.run() {
            Some(picked) => chosen.extend(picked),
            None => {
                let h = members
                    .iter()
                    .map(|&i| &locals[i])
                    .find(|(_, l)| !l.ok_with(|b| required[l.edges[b].2] || allowed[l.edges[b].2]))
                    .map_or(locals[members[0]].0, |(h, _)| *h);
                return Err(ExactError::Infeasible { habitat: h });
            }
        }
    }
    chosen.sort_unstable();
    let cost = chosen.iter().map(|&e| costs[e]).sum();
    Ok(Optimum { edges: chosen, cost })
}

const UNDECIDED: u8 = 0;
const IN: u8 = 1;
const OUT: u8 = 2;

struct HabitatSlot {
    local: LocalHabitat,
    base: u64,
    /// `(local bit, component variable index)`.
    vars: Vec<(usize, usize)>,
}

struct Search {
    slots: Vec<HabitatSlot>,
    var_edges: Vec<EdgeId>,
    var_costs: Vec<Cost>,
    state: Vec<u8>,
    best: Option<(Cost, Vec<u8>)>,
    /// Accept only solutions of at most this cost.
    limit: Option<Cost>,
    first_only: bool,
    cache: HashMap<(usize, u64, u64), Option<Cost>>,
    marks: Vec<u32>,
    stamp: u32,
}

impl Search {
    fn new(
        locals: &[(usize, LocalHabitat)],
        members: &[usize],
        comp_vars: &[usize],
        vars: &[EdgeId],
        var_of: &[usize],
        costs: &[Cost],
        required: &[bool],
    ) -> Self {
        let mut comp_index = HashMap::new();
        for (i, &v) in comp_vars.iter().enumerate() {
            comp_index.insert(v, i);
        }
        let mut slots = Vec::with_capacity(members.len());
        for &idx in members {
            let (_, local) = &locals[idx];
            let mut base = 0u64;
            let mut sv = Vec::new();
            for (bit, &(_, _, e)) in local.edges.iter().enumerate() {
                if required[e] {
                    base |= 1 << bit;
                } else if var_of[e] != usize::MAX {
                    let ci = comp_index[&var_of[e]];
                    sv.push((bit, ci));
                }
            }
            slots.push(HabitatSlot { local: local.clone(), base, vars: sv });
        }
        let var_edges: Vec<EdgeId> = comp_vars.iter().map(|&v| vars[v]).collect();
        let var_costs = var_edges.iter().map(|&e| costs[e]).collect();
        Search {
            slots,
            var_costs,
            state: vec![UNDECIDED; var_edges.len()],
            var_edges,
            best: None,
            limit: None,
            first_only: false,
            cache: HashMap::new(),
            marks: vec![0; comp_vars.len()],
            stamp: 0,
        }
    }

    fn run(&mut self) -> Option<Vec<EdgeId>> {
        self.dfs(0);
        let (opt, mut witness) = self.best.take()?;
        // Walk variables in id order, keeping each one whenever some optimum still contains it.
        self.limit = Some(opt);
        self.first_only = true;
        let mut fixed = vec![UNDECIDED; self.state.len()];
        for i in 0..self.state.len() {
            if witness[i] != IN {
                fixed[i] = IN;
                self.state.clone_from(&fixed);
                self.best = None;
                self.dfs(self.fixed_cost(&fixed));
                match self.best.take() {
                    Some((_, found)) => witness = found,
                    None => fixed[i] = OUT,
                }
            }
            fixed[i] = if witness[i] == IN { IN } else { OUT };
        }
        Some(
            fixed
                .iter()
                .enumerate()
                .filter(|&(_, &s)| s == IN)
                .map(|(i, _)| self.var_edges[i])
                .collect(),
        )
    }

    fn fixed_cost(&self, state: &[u8]) -> Cost {
        state.iter().zip(&self.var_costs).filter(|&(&s, _)| s == IN).map(|(_, &c)| c).sum()
    }

    fn slot_satisfied(&self, s: usize) -> bool {
        let slot = &self.slots[s];
        slot.local.ok_mask(self.slot_masks(slot).0)
    }

    fn slot_masks(&self, slot: &HabitatSlot) -> (u64, u64) {
        let mut inc = slot.base;
        let mut und = 0u64;
        for &(bit, v) in &slot.vars {
            match self.state[v] {
                IN => inc |= 1 << bit,
                UNDECIDED => und |= 1 << bit,
                _ => {}
            }
        }
        (inc, und)
    }

    /// Cheapest completion of a slot from its undecided edges; `None` if impossible.
    fn completion(&mut self, s: usize) -> Option<Cost> {
        let slot = &self.slots[s];
        let (inc, und) = self.slot_masks(slot);
        let key = (s, inc, und);
        if let Some(&hit) = self.cache.get(&key) {
            return hit;
        }
        let value = if slot.local.ok_mask(inc) {
            Some(0)
        } else if !slot.local.ok_mask(inc | und) {
            None
        } else if (und.count_ones() as usize) <= COMPLETION_ENUMERATION_LIMIT {
            let bits: Vec<(usize, Cost)> = slot
                .vars
                .iter()
                .filter(|&&(b, _)| und >> b & 1 == 1)
                .map(|&(b, v)| (b, self.var_costs[v]))
                .collect();
            let mut best = Cost::MAX;
            for sub in 1u64..(1 << bits.len()) {
                let mut mask = inc;
                let mut cost = 0;
                for (j, &(b, c)) in bits.iter().enumerate() {
                    if sub >> j & 1 == 1 {
                        mask |= 1 << b;
                        cost += c;
                    }
                }
                if cost < best && slot.local.ok_mask(mask) {
                    best = cost;
                }
            }
            Some(best)
        } else {
            slot.vars
                .iter()
                .filter(|&&(b, _)| und >> b & 1 == 1)
                .map(|&(_, v)| self.var_costs[v])
                .min()
        };
        self.cache.insert(key, value);
        value
    }

    /// Lower bound on the remaining cost, `None` if some habitat is already lost.
    fn lower_bound(&mut self) -> Option<Cost> {
        let mut pending: Vec<(Cost, usize)> = Vec::new();
        for s in 0..self.slots.len() {
            let c = self.completion(s)?;
            if c > 0 {
                pending.push((c, s));
            }
        }
        pending.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let mut total = 0;
        for (c, s) in pending {
            let clash = self.slots[s]
                .vars
                .iter()
                .any(|&(_, v)| self.state[v] == UNDECIDED && self.marks[v] == self.stamp);
            if clash {
                continue;
            }
            for &(_, v) in &self.slots[s].vars {
                if self.state[v] == UNDECIDED {
                    self.marks[v] = self.stamp;
                }
            }
            total += c;
        }
        Some(total)
    }

    fn dfs(&mut self, cost: Cost) {
        if self.first_only && self.best.is_some() {
            return;
        }
        let Some(lb) = self.lower_bound() else { return };
        let bound = match (&self.best, self.limit) {
            (Some((best, _)), _) => Some(*best),
            (None, Some(limit)) => Some(limit + 1),
            (None, None) => None,
        };
        if bound.is_some_and(|b| cost + lb >= b) {
            return;
        }
        let Some(pos) = self.branch_variable() else {
            // every slot is satisfied; undecided edges stay out
            let state = self.state.iter().map(|&s| if s == IN { IN } else { OUT }).collect();
            self.best = Some((cost, state));
            return;
        };
        self.state[pos] = IN;
        self.dfs(cost + self.var_costs[pos]);
        self.state[pos] = OUT;
        self.dfs(cost);
        self.state[pos] = UNDECIDED;
    }

    /// Undecided variable in the most unsatisfied habitats, smallest index on ties.
    fn branch_variable(&mut self) -> Option<usize> {
        let mut count = vec![0u32; self.state.len()];
        for s in 0..self.slots.len() {
            if !self.slot_satisfied(s) {
                for &(_, v) in &self.slots[s].vars {
                    if self.state[v] == UNDECIDED {
                        count[v] += 1;
                    }
                }
            }
        }
        (0..count.len()).filter(|&v| count[v] > 0).max_by_key(|&v| (count[v], std::cmp::Reverse(v)))
    }
}
