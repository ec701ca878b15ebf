//! Seeded random instance generators for each solver regime.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{self, Point};
use crate::model::{Cost, Edge, Instance, VertexId};
use crate::preprocess::Induced;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Deg3,
    Deg4h4,
    PlanarH3,
    Gadget,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Deg3 => "deg3",
            Regime::Deg4h4 => "deg4h4",
            Regime::PlanarH3 => "planar-h3",
            Regime::Gadget => "gadget",
        }
    }

    pub fn parse(text: &str) -> Option<Regime> {
        match text {
            "deg3" => Some(Regime::Deg3),
            "deg4h4" | "deg4" => Some(Regime::Deg4h4),
            "planar-h3" | "planar3" => Some(Regime::PlanarH3),
            "gadget" => Some(Regime::Gadget),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub regime: Regime,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    pub cost_min: Cost,
    pub cost_max: Cost,
    /// Probability, in percent, that an edge is forced.
    pub forced_percent: u32,
}

impl GeneratorConfig {
    pub fn new(regime: Regime, n: usize, r: usize, seed: u64) -> Self {
        GeneratorConfig { regime, n, r, seed, cost_min: 1, cost_max: 5, forced_percent: 5 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generates an instance satisfying the regime's preconditions.
///
/// The gadget regime is produced by [`crate::hardness::gadget_instance`].
pub fn generate(config: &GeneratorConfig) -> Instance {
    match config.regime {
        Regime::Deg3 => deg3_blocks(config),
        Regime::Deg4h4 => deg4_strips(config),
        Regime::PlanarH3 => planar_h3(config),
        Regime::Gadget => crate::hardness::gadget_instance(config.seed),
    }
}

struct Builder {
    adj: Vec<Vec<VertexId>>,
    pairs: Vec<(VertexId, VertexId)>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { adj: vec![Vec::new(); n], pairs: Vec::new() }
    }

    fn has(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u].contains(&v)
    }

    fn add(&mut self, u: VertexId, v: VertexId) {
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.pairs.push((u.min(v), u.max(v)));
    }
}

fn finish(
    config: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
    n: usize,
    pairs: &[(VertexId, VertexId)],
    habitats: Vec<Vec<VertexId>>,
    embedding: Option<Vec<Point>>,
) -> Instance {
    let lo = config.cost_min.min(config.cost_max);
    let hi = config.cost_max.max(config.cost_min);
    let edges = pairs
        .iter()
        .map(|&(u, v)| Edge {
            u,
            v,
            cost: rng.gen_range(lo..=hi),
            forced: rng.gen_range(0..100) < config.forced_percent,
        })
        .collect();
    Instance::new(n, edges, habitats, None, embedding).expect("generated instance is well formed")
}

fn deg3_blocks(config: &GeneratorConfig) -> Instance {
    let mut rng = rng(config.seed);
    let n = config.n.max(3);
    let mut b = Builder::new(n);
    let mut next = 0;
    let mut slots: Vec<VertexId> = Vec::new();
    let mut block_habitats: Vec<Vec<VertexId>> = Vec::new();
    // Triangles, diamonds and prisms missing a rung (optionally capped), wired together later.
    while next < n {
        let left = n - next;
        let kind = [0, 1, 1, 2, 2, 3, 3, 4, 4, 4][rng.gen_range(0..10)];
        let v = next;
        if kind == 4 && left >= 7 {
            for (x, y) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 6), (5, 6)] {
                b.add(v + x, v + y);
            }
            for (h, p) in [(&[0, 1, 2, 3, 4, 5, 6][..], 0.6), (&[0, 1, 2, 3, 4][..], 0.4), (&[0, 1, 3, 4, 5][..], 0.4)] {
                if rng.gen_bool(p) {
                    block_habitats.push(h.iter().map(|&x| v + x).collect());
                }
            }
            slots.push(v + 6);
            next += 7;
        } else if kind == 3 && left >= 6 {
            for (x, y) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4)] {
                b.add(v + x, v + y);
            }
            slots.extend([v + 2, v + 5]);
            next += 6;
        } else if kind == 2 && left >= 4 {
            for (x, y) in [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)] {
                b.add(v + x, v + y);
            }
            slots.extend([v, v + 3]);
            next += 4;
        } else if kind == 1 && left >= 3 {
            for (x, y) in [(0, 1), (1, 2), (0, 2)] {
                b.add(v + x, v + y);
            }
            slots.extend([v, v + 1, v + 2]);
            next += 3;
        } else {
            slots.extend([v, v, v]);
            next += 1;
        }
    }
    slots.shuffle(&mut rng);
    while slots.len() >= 2 {
        let u = slots.pop().unwrap();
        if let Some(pos) = slots.iter().position(|&w| w != u && !b.has(u, w)) {
            let w = slots.swap_remove(pos);
            if rng.gen_bool(0.85) {
                b.add(u, w);
            }
        }
    }
    block_habitats.truncate(config.r);
    let rest = config.r - block_habitats.len();
    let mut habitats = block_habitats;
    habitats.extend(sample_habitats(&mut rng, &b, rest, 6));
    finish(config, &mut rng, n, &b.pairs, habitats, None)
}

fn deg4_strips(config: &GeneratorConfig) -> Instance {
    let mut rng = rng(config.seed);
    let n = config.n.max(3);
    let mut b = Builder::new(n);
    let mut windows = Vec::new();
    let mut start = 0;
    while start < n {
        let len = rng.gen_range(4..=10).min(n - start);
        let closed = len >= 6 && rng.gen_bool(0.3);
        let at = |i: usize| start + i % len;
        for i in 0..len {
            for step in [1, 2] {
                if !closed && i + step >= len {
                    continue;
                }
                let (u, w) = (at(i), at(i + step));
                if u != w && !b.has(u, w) && (step == 1 || rng.gen_bool(0.8)) {
                    b.add(u, w);
                }
            }
        }
        for i in 0..len {
            if closed || i + 3 < len {
                let size = rng.gen_range(3..=4);
                let mut h: Vec<VertexId> = (0..size).map(|j| at(i + j)).collect();
                h.sort_unstable();
                h.dedup();
                windows.push(h);
            }
        }
        start += len;
    }
    for _ in 0..n / 3 {
        let u = rng.gen_range(0..n);
        let w = rng.gen_range(0..n);
        if u != w && !b.has(u, w) && b.adj[u].len() < 4 && b.adj[w].len() < 4 {
            b.add(u, w);
        }
    }
    windows.shuffle(&mut rng);
    let from_windows = config.r * 2 / 3;
    let probe = probe_instance(n, &b);
    let mut habitats: Vec<Vec<VertexId>> = windows
        .into_iter()
        .filter(|h| has_small_diameter(&probe, h))
        .take(from_windows)
        .collect();
    let rest = config.r - habitats.len().min(config.r);
    habitats.extend(sample_habitats(&mut rng, &b, rest, 4));
    finish(config, &mut rng, n, &b.pairs, habitats, None)
}

fn probe_instance(n: usize, b: &Builder) -> Instance {
    Instance::new(n, b.pairs.iter().map(|&(u, v)| Edge::new(u, v, 0)).collect(), Vec::new(), None, None)
        .expect("simple graph")
}

fn has_small_diameter(probe: &Instance, h: &[VertexId]) -> bool {
    let g = Induced::new(probe, h, |_| true);
    matches!(g.diameter(|_| true), Some(d) if d <= 2)
}

/// Habitats drawn from closed neighbourhoods, occasionally widened to two hops.
fn sample_habitats(rng: &mut ChaCha8Rng, b: &Builder, r: usize, max_habitat: usize) -> Vec<Vec<VertexId>> {
    let n = b.adj.len();
    let probe = probe_instance(n, b);
    let mut habitats = Vec::new();
    let mut tries = 0;
    while habitats.len() < r && tries < 50 * r + 100 {
        tries += 1;
        let v = rng.gen_range(0..n);
        if b.adj[v].is_empty() {
            continue;
        }
        let mut pool: Vec<VertexId> = b.adj[v].clone();
        if rng.gen_bool(0.3) {
            for &x in &b.adj[v] {
                pool.extend(b.adj[x].iter().copied().filter(|&y| y != v));
            }
            pool.sort_unstable();
            pool.dedup();
        }
        pool.shuffle(rng);
        let size = rng.gen_range(2..=max_habitat.min(pool.len() + 1));
        let mut h: Vec<VertexId> = pool.into_iter().take(size - 1).collect();
        h.push(v);
        h.sort_unstable();
        if has_small_diameter(&probe, &h) {
            habitats.push(h);
        }
    }
    habitats
}

fn planar_h3(config: &GeneratorConfig) -> Instance {
    let mut rng = rng(config.seed);
    let n = config.n.max(3);
    let side = (4 * n as i64).max(16);
    let mut points: Vec<Point> = Vec::with_capacity(n);
    while points.len() < n {
        let p = [rng.gen_range(0..side), rng.gen_range(0..side)];
        let clash = points.contains(&p)
            || (0..points.len()).any(|i| {
                (i + 1..points.len()).any(|j| geometry::collinear(points[i], points[j], p))
            });
        if !clash {
            points.push(p);
        }
    }
    let pairs = greedy_triangulation(&points);
    let kept: Vec<(VertexId, VertexId)> = pairs.into_iter().filter(|_| !rng.gen_bool(0.1)).collect();
    let mut b = Builder::new(n);
    for &(u, v) in &kept {
        b.add(u, v);
    }
    let mut triangles = Vec::new();
    for u in 0..n {
        for &v in &b.adj[u] {
            for &w in &b.adj[u] {
                if u < v && v < w && b.has(v, w) {
                    triangles.push(vec![u, v, w]);
                }
            }
        }
    }
    triangles.sort();
    triangles.shuffle(&mut rng);
    let mut habitats: Vec<Vec<VertexId>> = triangles.into_iter().take(config.r).collect();
    // a few edges as size-two habitats
    let extra = config.r / 6;
    for _ in 0..extra {
        if let Some(&(u, v)) = kept.choose(&mut rng) {
            habitats.push(vec![u, v]);
        }
    }
    finish(config, &mut rng, n, &b.pairs, habitats, Some(points))
}

/// Maximal non-crossing edge set, adding shorter segments first.
pub fn greedy_triangulation(points: &[Point]) -> Vec<(VertexId, VertexId)> {
    let n = points.len();
    let mut candidates = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let dx = (points[u][0] - points[v][0]) as i128;
            let dy = (points[u][1] - points[v][1]) as i128;
            candidates.push((dx * dx + dy * dy, u, v));
        }
    }
    candidates.sort_unstable();
    let mut chosen: Vec<(VertexId, VertexId)> = Vec::new();
    for (_, u, v) in candidates {
        let (a, b) = (points[u], points[v]);
        let blocked = chosen
            .iter()
            .any(|&(x, y)| geometry::segments_conflict(a, b, points[x], points[y]))
            || (0..n).any(|w| w != u && w != v && geometry::on_segment(points[w], a, b));
        if !blocked {
            chosen.push((u, v));
        }
    }
    chosen.sort_unstable();
    chosen
}
