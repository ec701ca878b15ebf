//! Exact integer predicates for straight-line embeddings.
//!
//! Coordinates are `i64`; every predicate evaluates signed areas in `i128`,
//! so no input within the `i64` range can overflow or round.

use std::cmp::Ordering;

pub type Point = [i64; 2];

/// Twice the signed area of the triangle `(a, b, c)`.
pub fn orient2d(a: Point, b: Point, c: Point) -> i128 {
    let (ax, ay) = (a[0] as i128, a[1] as i128);
    let (bx, by) = (b[0] as i128, b[1] as i128);
    let (cx, cy) = (c[0] as i128, c[1] as i128);
    (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
}

pub fn orientation(a: Point, b: Point, c: Point) -> Ordering {
    orient2d(a, b, c).cmp(&0)
}

pub fn collinear(a: Point, b: Point, c: Point) -> bool {
    orient2d(a, b, c) == 0
}

/// `p` lies on the closed segment `ab` (including endpoints).
pub fn on_segment(p: Point, a: Point, b: Point) -> bool {
    collinear(a, b, p)
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// `p` lies strictly inside segment `ab`, endpoints excluded.
pub fn in_segment_interior(p: Point, a: Point, b: Point) -> bool {
    p != a && p != b && on_segment(p, a, b)
}

/// Two segments share a point other than a common endpoint.
///
/// Segments that merely touch at a shared endpoint do not conflict; any
/// other contact (proper crossing, T-junction, collinear overlap) does.
pub fn segments_conflict(a: Point, b: Point, c: Point, d: Point) -> bool {
    let shared = [a == c, a == d, b == c, b == d];
    let shared_count = shared.iter().filter(|&&s| s).count();
    if shared_count == 2 {
        // same segment
        return true;
    }
    if shared_count == 1 {
        // Only collinear overlap beyond the shared endpoint counts.
        let (p, q, r) = if a == c {
            (a, b, d)
        } else if a == d {
            (a, b, c)
        } else if b == c {
            (b, a, d)
        } else {
            (b, a, c)
        };
        if !collinear(p, q, r) {
            return false;
        }
        // q and r on the same ray from p
        let dq = [q[0] - p[0], q[1] - p[1]];
        let dr = [r[0] - p[0], r[1] - p[1]];
        return (dq[0] as i128) * (dr[0] as i128) + (dq[1] as i128) * (dr[1] as i128) > 0;
    }
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    if o1 != o2 && o3 != o4 && o1 != Ordering::Equal && o2 != Ordering::Equal
        && o3 != Ordering::Equal && o4 != Ordering::Equal
    {
        return true;
    }
    on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d)
}

/// `p` lies strictly inside the (non-degenerate) triangle `abc`.
pub fn strictly_inside_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    let s1 = orient2d(a, b, p).signum();
    let s2 = orient2d(b, c, p).signum();
    let s3 = orient2d(c, a, p).signum();
    s1 != 0 && s1 == s2 && s2 == s3
}
