//! Cube-major max-scatter: evaluate a per-cube aggregate once, then give
//! every lattice point the largest aggregate among the cubes containing it.
//!
//! For the all-family the scatter for a fixed side is a sliding-window
//! maximum over the array of cube aggregates (separable in 2D), so a side
//! costs O(points) instead of O(points × side^dim).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{Cube, CubeFamily, Grid, Rect};
use crate::par;

/// Best cube seen for one lattice point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Best {
    pub value: f64,
    pub cube: Cube,
}

impl Best {
    pub const NONE: Best = Best { value: f64::NEG_INFINITY, cube: Cube { side: usize::MAX, anchor: [usize::MAX; 2] } };

    /// Larger value wins; ties go to the cube that comes first in
    /// enumeration order. This is a total order, so merging is schedule
    /// independent.
    #[inline]
    pub fn beats(&self, other: &Best) -> bool {
        self.value > other.value || (self.value == other.value && self.cube < other.cube)
    }

    pub fn is_set(&self) -> bool {
        self.cube.side != usize::MAX
    }
}

/// Result of a scatter over `region`, stored region-local row-major.
pub(crate) struct Scatter {
    pub region: Rect,
    pub best: Vec<Best>,
}

impl Scatter {
    pub fn region_cols(&self) -> usize {
        self.region.c1 - self.region.c0
    }
}

/// Sliding maximum of `get(0..len)` with window `s`; calls `emit(x, a)` for
/// each output position `x in 0..n_out` with the earliest maximizing anchor
/// `a in [x+1-s, x] ∩ [0, len)`.
#[inline]
fn window_max<G, E>(len: usize, s: usize, n_out: usize, get: G, dq: &mut VecDeque<usize>, mut emit: E)
where
    G: Fn(usize) -> f64,
    E: FnMut(usize, usize),
{
    dq.clear();
    for x in 0..n_out {
        if x < len {
            let v = get(x);
            while let Some(&b) = dq.back() {
                if get(b) < v {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(x);
        }
        while let Some(&f) = dq.front() {
            if f + s <= x {
                dq.pop_front();
            } else {
                break;
            }
        }
        emit(x, *dq.front().expect("window always holds an anchor"));
    }
}

/// Sliding minimum, mirror image of [`window_max`].
#[inline]
pub(crate) fn window_min<G, E>(len: usize, s: usize, n_out: usize, get: G, dq: &mut VecDeque<usize>, emit: E)
where
    G: Fn(usize) -> f64,
    E: FnMut(usize, usize),
{
    window_max(len, s, n_out, |a| -get(a), dq, emit)
}

fn merge(mut a: Vec<Best>, b: Vec<Best>) -> Vec<Best> {
    for (x, y) in a.iter_mut().zip(b) {
        if y.beats(x) {
            *x = y;
        }
    }
    a
}

/// Scatters all cubes of side `s` inside `region` into `acc`.
fn scatter_side<V>(dim: usize, region: &Rect, s: usize, value: &V, acc: &mut [Best])
where
    V: Fn(&Cube, &Rect) -> f64,
{
    let rr = region.r1 - region.r0;
    let rc = region.c1 - region.c0;
    let mut dq = VecDeque::new();
    if dim == 1 {
        let len = rr - s + 1;
        let means: Vec<f64> = (0..len)
            .map(|a| {
                let c = Cube::line(region.r0 + a, s);
                value(&c, &c.rect(1))
            })
            .collect();
        window_max(len, s, rr, |a| means[a], &mut dq, |x, a| {
            let cand = Best { value: means[a], cube: Cube::line(region.r0 + a, s) };
            if cand.beats(&acc[x]) {
                acc[x] = cand;
            }
        });
        return;
    }
    let (l0, l1) = (rr - s + 1, rc - s + 1);
    let mut means = Vec::with_capacity(l0 * l1);
    for a0 in 0..l0 {
        for a1 in 0..l1 {
            let c = Cube::square(region.r0 + a0, region.c0 + a1, s);
            means.push(value(&c, &c.rect(2)));
        }
    }
    // pass along axis 1: best anchor a1 for every (a0, x1)
    let mut row_best = vec![(0.0f64, 0usize); l0 * rc];
    for a0 in 0..l0 {
        let row = &means[a0 * l1..(a0 + 1) * l1];
        window_max(l1, s, rc, |a| row[a], &mut dq, |x1, a1| row_best[a0 * rc + x1] = (row[a1], a1));
    }
    // pass along axis 0
    for x1 in 0..rc {
        window_max(l0, s, rr, |a0| row_best[a0 * rc + x1].0, &mut dq, |x0, a0| {
            let (v, a1) = row_best[a0 * rc + x1];
            let cand = Best { value: v, cube: Cube::square(region.r0 + a0, region.c0 + a1, s) };
            let slot = &mut acc[x0 * rc + x1];
            if cand.beats(slot) {
                *slot = cand;
            }
        });
    }
}

/// Max-scatter of `value` over the cubes of `family` lying inside `region`.
///
/// Errors with [`Error::UncoveredPoint`] when some point of the region is
/// contained in no such cube.
pub(crate) fn max_scatter<V>(family: &CubeFamily, region: Rect, value: V) -> Result<Scatter>
where
    V: Fn(&Cube, &Rect) -> f64 + Sync + Send,
{
    let grid = &family.grid;
    let dim = grid.dim();
    let rr = region.r1 - region.r0;
    let rc = region.c1 - region.c0;
    let n = rr * rc;
    let best = if family.is_all() {
        let smax = if dim == 1 { rr } else { rr.min(rc) };
        par::fold_range(
            smax,
            || vec![Best::NONE; n],
            |mut acc, k| {
                scatter_side(dim, &region, k + 1, &value, &mut acc);
                acc
            },
            merge,
        )
    } else {
        let cubes = family.enumerate_within(&region);
        let values = par::map_slice(&cubes, |c| value(c, &c.rect(dim)));
        let mut acc = vec![Best::NONE; n];
        for (c, v) in cubes.iter().zip(values) {
            let cand = Best { value: v, cube: *c };
            let r = c.rect(dim);
            for i in r.r0..r.r1 {
                for j in r.c0..r.c1 {
                    let slot = &mut acc[(i - region.r0) * rc + (j - region.c0)];
                    if cand.beats(slot) {
                        *slot = cand;
                    }
                }
            }
        }
        acc
    };
    if let Some(pos) = best.iter().position(|b| !b.is_set()) {
        let index = grid.index(region.r0 + pos / rc, region.c0 + pos % rc);
        return Err(Error::UncoveredPoint { index });
    }
    Ok(Scatter { region, best })
}

/// Iterates the cubes of the all-family that contain point `(i, j)`, in
/// enumeration order.
pub(crate) fn for_each_cube_containing<F: FnMut(Cube)>(grid: &Grid, region: &Rect, i: usize, j: usize, mut f: F) {
    let dim = grid.dim();
    let rr = region.r1 - region.r0;
    let rc = region.c1 - region.c0;
    let smax = if dim == 1 { rr } else { rr.min(rc) };
    for s in 1..=smax {
        let lo0 = (i + 1).saturating_sub(s).max(region.r0);
        let hi0 = i.min(region.r1 - s);
        if dim == 1 {
            for a0 in lo0..=hi0 {
                f(Cube::line(a0, s));
            }
        } else {
            let lo1 = (j + 1).saturating_sub(s).max(region.c0);
            let hi1 = j.min(region.c1 - s);
            for a0 in lo0..=hi0 {
                for a1 in lo1..=hi1 {
                    f(Cube::square(a0, a1, s));
                }
            }
        }
    }
}
