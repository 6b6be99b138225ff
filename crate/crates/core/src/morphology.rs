//! Label-map morphology: square-window erosion and connected components.

use crate::grid::Grid;

/// Sliding min and max of `grid` over `(2 * radius + 1)^2` windows clipped
/// to the image, computed separably.
fn window_min_max(grid: &Grid<u32>, radius: usize) -> (Grid<u32>, Grid<u32>) {
    let (h, w) = (grid.height(), grid.width());
    let mut row_min = Grid::filled(h, w, 0u32);
    let mut row_max = Grid::filled(h, w, 0u32);
    for y in 0..h {
        for x in 0..w {
            let (lo, hi) = (x.saturating_sub(radius), (x + radius).min(w - 1));
            let (mut mn, mut mx) = (u32::MAX, 0);
            for xx in lo..=hi {
                let v = grid.get(y, xx);
                mn = mn.min(v);
                mx = mx.max(v);
            }
            row_min.set(y, x, mn);
            row_max.set(y, x, mx);
        }
    }
    let mut out_min = Grid::filled(h, w, 0u32);
    let mut out_max = Grid::filled(h, w, 0u32);
    for y in 0..h {
        let (lo, hi) = (y.saturating_sub(radius), (y + radius).min(h - 1));
        for x in 0..w {
            let (mut mn, mut mx) = (u32::MAX, 0);
            for yy in lo..=hi {
                mn = mn.min(row_min.get(yy, x));
                mx = mx.max(row_max.get(yy, x));
            }
            out_min.set(y, x, mn);
            out_max.set(y, x, mx);
        }
    }
    (out_min, out_max)
}

/// Erodes every nonzero label against all other labels and background with
/// a `(2 * radius + 1)^2` square. A pixel keeps its label only if its whole
/// window (clipped to the image; the border itself does not erode) carries
/// that label; everything else becomes 0.
pub fn erode_labels(labels: &Grid<u32>, radius: usize) -> Grid<u32> {
    if labels.is_empty() || radius == 0 {
        return labels.clone();
    }
    let (mn, mx) = window_min_max(labels, radius);
    let data = labels
        .as_slice()
        .iter()
        .zip(mn.as_slice().iter().zip(mx.as_slice()))
        .map(|(&v, (&lo, &hi))| if lo == hi && lo == v { v } else { 0 })
        .collect();
    Grid::from_vec(labels.height(), labels.width(), data).expect("same shape")
}

/// 4-connected components of equal nonzero labels. Returns a component id
/// per pixel (0 for background, components numbered from 1 in raster order
/// of their first pixel) and the component count.
pub fn connected_components(labels: &Grid<u32>) -> (Grid<u32>, usize) {
    let (h, w) = (labels.height(), labels.width());
    let src = labels.as_slice();
    let mut comp = vec![0u32; h * w];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..h * w {
        if src[start] == 0 || comp[start] != 0 {
            continue;
        }
        next += 1;
        comp[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (y, x) = (p / w, p % w);
            let mut visit = |q: usize| {
                if comp[q] == 0 && src[q] == src[p] {
                    comp[q] = next;
                    stack.push(q);
                }
            };
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
        }
    }
    (Grid::from_vec(h, w, comp).expect("same shape"), next as usize)
}
