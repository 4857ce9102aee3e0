//! Zero-level-set extraction on a rectangular grid (marching squares with
//! center-sampled saddle disambiguation and per-crossing bisection
//! refinement), plus point-vs-polyline utilities shared by the comparison
//! layer.
//!
//! The extractor is deterministic: grid rows are evaluated in parallel but
//! collected in order, crossings are refined in sorted edge-id order, and the
//! output loops are canonicalized (counter-clockwise, lexicographically
//! smallest vertex first, loops sorted by first vertex).

use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap};

/// Rectangular evaluation window and resolution for contour extraction.
/// `nx` × `ny` cells; nodes are `(nx + 1) × (ny + 1)`.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Cell-local edge labels used by the case table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CellEdge {
    Bottom,
    Right,
    Top,
    Left,
}

use CellEdge::{Bottom, Left, Right, Top};

/// Segment list for each of the 16 corner-sign patterns. Bits: 1 = bottom
/// left, 2 = bottom right, 4 = top right, 8 = top left (set = positive).
/// The two saddle patterns (5, 10) are resolved by the sign at the cell
/// center, passed as `center_positive`.
fn cell_segments(case: u8, center_positive: bool) -> &'static [(CellEdge, CellEdge)] {
    match case {
        0 | 15 => &[],
        1 => &[(Left, Bottom)],
        2 => &[(Bottom, Right)],
        3 => &[(Left, Right)],
        4 => &[(Right, Top)],
        5 => {
            if center_positive {
                // positive band along the bl–tr diagonal: negative corners
                // br and tl are cut off separately
                &[(Bottom, Right), (Left, Top)]
            } else {
                &[(Left, Bottom), (Right, Top)]
            }
        }
        6 => &[(Bottom, Top)],
        7 => &[(Left, Top)],
        8 => &[(Top, Left)],
        9 => &[(Bottom, Top)],
        10 => {
            if center_positive {
                &[(Left, Bottom), (Right, Top)]
            } else {
                &[(Bottom, Right), (Left, Top)]
            }
        }
        11 => &[(Right, Top)],
        12 => &[(Left, Right)],
        13 => &[(Bottom, Right)],
        14 => &[(Left, Bottom)],
        _ => unreachable!("4-bit case index"),
    }
}

/// NaN is mapped to the negative side so a pathological evaluation cannot
/// poison sign tests; ±∞ (poles) classify normally.
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        -0.0
    } else {
        v
    }
}

/// Extracts the polylines along which `f` changes sign inside `grid`.
///
/// Each returned polyline is a closed loop given without the repeated final
/// vertex (the closing edge is implicit); a contour that leaves the window
/// comes back as an open chain ending on the window boundary. Crossing
/// positions are sharpened by `refine` bisection steps of `f` along the
/// crossing edge, followed by one secant interpolation.
pub fn zero_contours<F>(f: &F, grid: &GridSpec, refine: usize) -> Vec<Vec<(f64, f64)>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let (nx, ny) = (grid.nx, grid.ny);
    if nx < 1 || ny < 1 || !(grid.x1 > grid.x0) || !(grid.y1 > grid.y0) {
        return Vec::new();
    }
    let xs: Vec<f64> = (0..=nx)
        .map(|i| grid.x0 + (grid.x1 - grid.x0) * i as f64 / nx as f64)
        .collect();
    let ys: Vec<f64> = (0..=ny)
        .map(|j| grid.y0 + (grid.y1 - grid.y0) * j as f64 / ny as f64)
        .collect();

    // node values, row-parallel with ordered collect (deterministic)
    let vals: Vec<Vec<f64>> = ys
        .par_iter()
        .map(|&y| xs.iter().map(|&x| sanitize(f(x, y))).collect())
        .collect();

    // cell-local edge → global edge id (2·node_id for horizontal edges
    // rooted at the node, 2·node_id + 1 for vertical ones)
    let node = |i: usize, j: usize| (j * (nx + 1) + i) as u64;
    let edge_id = |i: usize, j: usize, e: CellEdge| -> u64 {
        match e {
            Bottom => 2 * node(i, j),
            Top => 2 * node(i, j + 1),
            Left => 2 * node(i, j) + 1,
            Right => 2 * node(i + 1, j) + 1,
        }
    };

    // pass 1: classify cells, gather segments (pairs of crossing edge ids)
    let mut segments: Vec<(u64, u64)> = Vec::new();
    let mut crossing_ids: BTreeSet<u64> = BTreeSet::new();
    for j in 0..ny {
        for i in 0..nx {
            let a = vals[j][i] > 0.0;
            let b = vals[j][i + 1] > 0.0;
            let c = vals[j + 1][i + 1] > 0.0;
            let d = vals[j + 1][i] > 0.0;
            let case = a as u8 | (b as u8) << 1 | (c as u8) << 2 | (d as u8) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            let center_positive = if case == 5 || case == 10 {
                let cx = 0.5 * (xs[i] + xs[i + 1]);
                let cy = 0.5 * (ys[j] + ys[j + 1]);
                sanitize(f(cx, cy)) > 0.0
            } else {
                false
            };
            for &(e0, e1) in cell_segments(case, center_positive) {
                let id0 = edge_id(i, j, e0);
                let id1 = edge_id(i, j, e1);
                crossing_ids.insert(id0);
                crossing_ids.insert(id1);
                segments.push((id0, id1));
            }
        }
    }
    if segments.is_empty() {
        return Vec::new();
    }

    // pass 2: refine each crossing once (parallel over sorted ids)
    let ids: Vec<u64> = crossing_ids.into_iter().collect();
    let points: Vec<(f64, f64)> = ids
        .par_iter()
        .map(|&id| {
            let vertical = id & 1 == 1;
            let n = (id >> 1) as usize;
            let i = n % (nx + 1);
            let j = n / (nx + 1);
            let (p0, p1, v0, v1) = if vertical {
                (
                    (xs[i], ys[j]),
                    (xs[i], ys[j + 1]),
                    vals[j][i],
                    vals[j + 1][i],
                )
            } else {
                (
                    (xs[i], ys[j]),
                    (xs[i + 1], ys[j]),
                    vals[j][i],
                    vals[j][i + 1],
                )
            };
            refine_crossing(f, p0, p1, v0, v1, refine)
        })
        .collect();
    let point_of: HashMap<u64, (f64, f64)> =
        ids.iter().copied().zip(points.iter().copied()).collect();

    // pass 3: stitch segments into chains by shared edge ids
    let mut edge_to_segs: HashMap<u64, Vec<usize>> = HashMap::new();
    for (k, &(e0, e1)) in segments.iter().enumerate() {
        edge_to_segs.entry(e0).or_default().push(k);
        edge_to_segs.entry(e1).or_default().push(k);
    }
    let mut visited = vec![false; segments.len()];
    let mut chains: Vec<(Vec<u64>, bool)> = Vec::new();
    for start in 0..segments.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let (a, b) = segments[start];
        let mut chain: Vec<u64> = vec![a, b];
        let mut closed = false;
        // extend forward from the tail, then (if still open) backward from
        // the head
        loop {
            let tail = *chain.last().expect("chain is non-empty");
            let next = edge_to_segs[&tail]
                .iter()
                .copied()
                .find(|&k| !visited[k]);
            let Some(k) = next else { break };
            visited[k] = true;
            let (e0, e1) = segments[k];
            let other = if e0 == tail { e1 } else { e0 };
            if other == chain[0] {
                closed = true;
                break;
            }
            chain.push(other);
        }
        if !closed {
            chain.reverse();
            loop {
                let tail = *chain.last().expect("chain is non-empty");
                let next = edge_to_segs[&tail]
                    .iter()
                    .copied()
                    .find(|&k| !visited[k]);
                let Some(k) = next else { break };
                visited[k] = true;
                let (e0, e1) = segments[k];
                let other = if e0 == tail { e1 } else { e0 };
                if other == chain[0] {
                    closed = true;
                    break;
                }
                chain.push(other);
            }
        }
        chains.push((chain, closed));
    }

    // pass 4: canonicalize
    let mut loops: Vec<Vec<(f64, f64)>> = chains
        .into_iter()
        .map(|(chain, closed)| {
            let mut pts: Vec<(f64, f64)> = chain.iter().map(|id| point_of[id]).collect();
            if closed && pts.len() >= 3 {
                if signed_area(&pts) < 0.0 {
                    pts.reverse();
                }
                let first = lexicographic_min_index(&pts);
                pts.rotate_left(first);
            } else if pts.len() >= 2 {
                let a = pts[0];
                let b = pts[pts.len() - 1];
                if (b.0, b.1) < (a.0, a.1) {
                    pts.reverse();
                }
            }
            pts
        })
        .collect();
    loops.sort_by(|a, b| {
        let ka = a.first().copied().unwrap_or((f64::INFINITY, f64::INFINITY));
        let kb = b.first().copied().unwrap_or((f64::INFINITY, f64::INFINITY));
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    loops
}

/// Bisection along the edge `p0 → p1` keeping the sign change bracketed, then
/// one secant step inside the final bracket. Non-finite endpoint values (a
/// pole sitting exactly on a node) fall back to the bracket midpoint.
fn refine_crossing<F>(
    f: &F,
    p0: (f64, f64),
    p1: (f64, f64),
    v0: f64,
    v1: f64,
    refine: usize,
) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64,
{
    let at = |t: f64| (p0.0 + t * (p1.0 - p0.0), p0.1 + t * (p1.1 - p0.1));
    let positive0 = v0 > 0.0;
    let (mut t_lo, mut t_hi) = (0.0_f64, 1.0_f64);
    let (mut v_lo, mut v_hi) = (v0, v1);
    for _ in 0..refine {
        let tm = 0.5 * (t_lo + t_hi);
        let (x, y) = at(tm);
        let vm = sanitize(f(x, y));
        if (vm > 0.0) == positive0 {
            t_lo = tm;
            v_lo = vm;
        } else {
            t_hi = tm;
            v_hi = vm;
        }
    }
    let t = if v_lo.is_finite() && v_hi.is_finite() && (v_lo - v_hi).abs() > 0.0 {
        (t_lo + (t_hi - t_lo) * v_lo / (v_lo - v_hi)).clamp(t_lo, t_hi)
    } else {
        0.5 * (t_lo + t_hi)
    };
    at(t)
}

fn signed_area(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for k in 0..n {
        let (x0, y0) = pts[k];
        let (x1, y1) = pts[(k + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

fn lexicographic_min_index(pts: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (k, p) in pts.iter().enumerate() {
        if (p.0, p.1) < (pts[best].0, pts[best].1) {
            best = k;
        }
    }
    best
}

/// Even–odd membership of `p` against a family of implicitly closed
/// polylines (ray casting toward +x over every loop edge, wrapping
/// last → first).
pub fn point_in_loops(loops: &[Vec<(f64, f64)>], p: (f64, f64)) -> bool {
    let mut inside = false;
    for lp in loops {
        let n = lp.len();
        if n < 3 {
            continue;
        }
        for k in 0..n {
            let (x0, y0) = lp[k];
            let (x1, y1) = lp[(k + 1) % n];
            if (y0 > p.1) != (y1 > p.1) {
                let x_int = x0 + (p.1 - y0) * (x1 - x0) / (y1 - y0);
                if x_int > p.0 {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Distance from `p` to the nearest segment of the implicitly closed
/// polylines; +∞ when there are none.
pub fn distance_to_loops(loops: &[Vec<(f64, f64)>], p: (f64, f64)) -> f64 {
    let mut best = f64::INFINITY;
    for lp in loops {
        let n = lp.len();
        if n == 1 {
            let d = (lp[0].0 - p.0).hypot(lp[0].1 - p.1);
            best = best.min(d);
            continue;
        }
        for k in 0..n {
            let a = lp[k];
            let b = lp[(k + 1) % n];
            best = best.min(point_segment_distance(p, a, b));
        }
    }
    best
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ux, uy) = (b.0 - a.0, b.1 - a.1);
    let len_sq = ux * ux + uy * uy;
    let t = if len_sq > 0.0 {
        (((p.0 - a.0) * ux + (p.1 - a.1) * uy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + t * ux, a.1 + t * uy);
    (p.0 - cx).hypot(p.1 - cy)
}
