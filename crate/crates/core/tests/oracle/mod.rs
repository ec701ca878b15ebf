//! Solver-independent checks used by the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use gbp_core::model::{Cost, EdgeId, Instance};

/// Every habitat has diameter at most two in the chosen edges, and all forced edges are chosen.
pub fn feasible(instance: &Instance, chosen: &[EdgeId]) -> bool {
    let mut on = vec![false; instance.edge_count()];
    for &e in chosen {
        on[e] = true;
    }
    if instance.edges().iter().enumerate().any(|(i, e)| e.forced && !on[i]) {
        return false;
    }
    instance.habitats().iter().all(|h| habitat_ok(instance, h, &on))
}

fn habitat_ok(instance: &Instance, h: &[usize], on: &[bool]) -> bool {
    let k = h.len();
    let local = |v: usize| h.iter().position(|&x| x == v);
    let mut adj = vec![Vec::new(); k];
    for (i, e) in instance.edges().iter().enumerate() {
        if let (true, Some(a), Some(b)) = (on[i], local(e.u), local(e.v)) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    (0..k).all(|s| {
        let mut dist = vec![usize::MAX; k];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist.iter().all(|&d| d <= 2)
    })
}

pub fn cost(instance: &Instance, chosen: &[EdgeId]) -> Cost {
    chosen.iter().map(|&e| instance.edges()[e].cost).sum()
}

/// Exhaustive minimum over unforced edges lying inside some habitat.
///
/// `None` when there are more than `limit` such edges; `Some(None)` when infeasible.
pub fn brute_min(instance: &Instance, limit: usize) -> Option<Option<Cost>> {
    let inside = |u: usize, v: usize| instance.habitats().iter().any(|h| h.contains(&u) && h.contains(&v));
    let forced: Vec<EdgeId> = (0..instance.edge_count()).filter(|&i| instance.edges()[i].forced).collect();
    let free: Vec<EdgeId> = (0..instance.edge_count())
        .filter(|&i| {
            let e = &instance.edges()[i];
            !e.forced && inside(e.u, e.v)
        })
        .collect();
    if free.len() > limit {
        return None;
    }
    let mut best: Option<Cost> = None;
    for mask in 0u64..(1 << free.len()) {
        let mut chosen = forced.clone();
        chosen.extend((0..free.len()).filter(|&i| mask >> i & 1 == 1).map(|i| free[i]));
        let c = cost(instance, &chosen);
        if best.is_none_or(|b| c < b) && feasible(instance, &chosen) {
            best = Some(c);
        }
    }
    Some(best)
}

fn orient(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i128 {
    (b[0] - a[0]) as i128 * (c[1] - a[1]) as i128 - (b[1] - a[1]) as i128 * (c[0] - a[0]) as i128
}

fn within(p: [i64; 2], a: [i64; 2], b: [i64; 2]) -> bool {
    orient(a, b, p) == 0 && p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Straight-line drawing with distinct points, no vertex on a foreign edge and no two edges meeting outside shared endpoints.
pub fn plane_drawing(instance: &Instance) -> bool {
    let Some(pts) = instance.embedding() else { return false };
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i] == pts[j] {
                return false;
            }
        }
    }
    let edges = instance.edges();
    for e in edges {
        for (w, &p) in pts.iter().enumerate() {
            if w != e.u && w != e.v && within(p, pts[e.u], pts[e.v]) {
                return false;
            }
        }
    }
    for (i, e) in edges.iter().enumerate() {
        for f in &edges[i + 1..] {
            if [e.u, e.v].contains(&f.u) || [e.u, e.v].contains(&f.v) {
                continue;
            }
            let (a, b, c, d) = (pts[e.u], pts[e.v], pts[f.u], pts[f.v]);
            let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
            if o1.signum() * o2.signum() < 0 && o3.signum() * o4.signum() < 0 {
                return false;
            }
        }
    }
    true
}
