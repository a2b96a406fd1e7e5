//! Self-intersection test for closed polylines.

type Point = [f64; 2];

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(b0, b1, a0))
        || (d2 == 0.0 && on_segment(b0, b1, a1))
        || (d3 == 0.0 && on_segment(a0, a1, b0))
        || (d4 == 0.0 && on_segment(a0, a1, b1))
}

/// First pair of non-adjacent segments of the closed polyline that intersect.
///
/// Segments are swept in order of their left `x` extent; only pairs with
/// overlapping `x` ranges are tested.
pub fn find_self_intersection(points: &[Point]) -> Option<(usize, usize)> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    let seg = |i: usize| (points[i], points[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |i: usize| {
        let (a, b) = seg(i);
        a[0].min(b[0])
    };
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)));
    for (pos, &i) in order.iter().enumerate() {
        let (a0, a1) = seg(i);
        let xmax = a0[0].max(a1[0]);
        let (ylo, yhi) = (a0[1].min(a1[1]), a0[1].max(a1[1]));
        for &j in &order[pos + 1..] {
            let (b0, b1) = seg(j);
            if b0[0].min(b1[0]) > xmax {
                break;
            }
            let diff = i.abs_diff(j);
            if diff == 1 || diff == n - 1 {
                continue;
            }
            if b0[1].max(b1[1]) < ylo || b0[1].min(b1[1]) > yhi {
                continue;
            }
            if segments_intersect(a0, a1, b0, b1) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}
