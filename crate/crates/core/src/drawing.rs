//! Rotation systems and straight-line drawings of plane graphs.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DrawingError {
    #[error("rotation of vertex {0} is not a permutation of its neighbours")]
    BadRotation(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("rotation system has genus > 0 ({faces} faces for {vertices} vertices and {edges} edges)")]
    NotPlanar { vertices: usize, edges: usize, faces: usize },
    #[error("barycentric system is singular")]
    Singular,
}

/// Counter-clockwise neighbour order of every vertex, by angle.
pub fn rotation_from_points(n: usize, edges: &[(usize, usize)], pts: &[Point]) -> Vec<Vec<usize>> {
    let mut rot = vec![Vec::new(); n];
    for &(u, v) in edges {
        rot[u].push(v);
        rot[v].push(u);
    }
    for (v, list) in rot.iter_mut().enumerate() {
        let angle = |w: &usize| {
            let (dx, dy) = ((pts[*w][0] - pts[v][0]) as f64, (pts[*w][1] - pts[v][1]) as f64);
            dy.atan2(dx)
        };
        list.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    }
    rot
}

fn check_rotation(n: usize, edges: &[(usize, usize)], rot: &[Vec<usize>]) -> Result<(), DrawingError> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for v in 0..n {
        let (mut a, mut b) = (adj[v].clone(), rot.get(v).cloned().unwrap_or_default());
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(DrawingError::BadRotation(v));
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    if n > 0 {
        seen[0] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(DrawingError::Disconnected);
    }
    Ok(())
}

/// Face boundaries as vertex cycles.
pub fn faces(rot: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut used: Vec<Vec<bool>> = rot.iter().map(|l| vec![false; l.len()]).collect();
    let mut out = Vec::new();
    for u in 0..rot.len() {
        for i in 0..rot[u].len() {
            if used[u][i] {
                continue;
            }
            let mut face = Vec::new();
            let (mut a, mut ai) = (u, i);
            while !used[a][ai] {
                used[a][ai] = true;
                face.push(a);
                let b = rot[a][ai];
                let pos = rot[b].iter().position(|&x| x == a).expect("symmetric rotation");
                let d = rot[b].len();
                a = b;
                ai = (pos + d - 1) % d;
            }
            out.push(face);
        }
    }
    out
}

/// Checks that the rotation system describes a connected plane graph.
pub fn check_planar_rotation(n: usize, edges: &[(usize, usize)], rot: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, DrawingError> {
    check_rotation(n, edges, rot)?;
    let f = faces(rot);
    if n as i64 - edges.len() as i64 + f.len() as i64 != 2 {
        return Err(DrawingError::NotPlanar { vertices: n, edges: edges.len(), faces: f.len() });
    }
    Ok(f)
}

const SCALE: f64 = (1u64 << 50) as f64;

/// Straight-line drawing realising the rotation system.
///
/// Faces are star-triangulated, the largest face becomes the outside, and
/// interior vertices are placed at the barycentre of their neighbours.
pub fn tutte_drawing(n: usize, edges: &[(usize, usize)], rot: &[Vec<usize>]) -> Result<Vec<Point>, DrawingError> {
    let face_list = check_planar_rotation(n, edges, rot)?;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let outer_face = (0..face_list.len()).max_by_key(|&i| (face_list[i].len(), usize::MAX - i)).unwrap_or(0);
    let mut outer = Vec::new();
    for (fi, face) in face_list.iter().enumerate() {
        if face.len() <= 3 {
            if fi == outer_face {
                outer = face.clone();
            }
            continue;
        }
        let hub = adj.len();
        adj.push(face.clone());
        for &v in face {
            adj[v].push(hub);
        }
        if fi == outer_face {
            outer = vec![hub, face[0], face[1]];
        }
    }
    let total = adj.len();
    let mut fixed: Vec<Option<[f64; 2]>> = vec![None; total];
    let corners = [[0.0, 0.0], [SCALE, 0.0], [SCALE / 2.0, SCALE]];
    for (i, &v) in outer.iter().enumerate() {
        fixed[v] = Some(corners[i]);
    }
    let free: Vec<usize> = (0..total).filter(|&v| fixed[v].is_none()).collect();
    let mut index = vec![usize::MAX; total];
    for (i, &v) in free.iter().enumerate() {
        index[v] = i;
    }
    let k = free.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut bx = DVector::<f64>::zeros(k);
    let mut by = DVector::<f64>::zeros(k);
    for (i, &v) in free.iter().enumerate() {
        a[(i, i)] = adj[v].len() as f64;
        for &w in &adj[v] {
            match fixed[w] {
                Some(p) => {
                    bx[i] += p[0];
                    by[i] += p[1];
                }
                None => a[(i, index[w])] -= 1.0,
            }
        }
    }
    let lu = a.lu();
    let xs = lu.solve(&bx).ok_or(DrawingError::Singular)?;
    let ys = lu.solve(&by).ok_or(DrawingError::Singular)?;
    Ok((0..n)
        .map(|v| {
            let p = fixed[v].unwrap_or_else(|| [xs[index[v]], ys[index[v]]]);
            [p[0].round() as i64, p[1].round() as i64]
        })
        .collect())
}
