//! The maximal operators and commutators.
//!
//! Each operator has an accelerated implementation here and a brute-force
//! reference in [`brute`]. The reference loops over (point, cube) pairs and
//! sums directly; the accelerated paths read cube aggregates from prefix
//! tables and scatter maxima cube-major (see the `engine` module).
//!
//! All suprema range over the cubes of a [`CubeFamily`] that fit in the
//! domain, so the global operator is the maximal function restricted to the
//! whole domain.

pub mod brute;
pub(crate) mod engine;

use crate::error::{Error, Result};
use crate::grid::{Cube, CubeFamily, Grid, GridFunction, Rect};
use crate::par;
use crate::prefix::PrefixTable;
use crate::weights::Weight;

use engine::{for_each_cube_containing, max_scatter, Best, Scatter};

/// Values of a maximal-type operator at every lattice point.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorOutput {
    pub values: GridFunction,
    /// Per point, the first cube (enumeration order) attaining the supremum.
    pub argmax: Option<Vec<Cube>>,
}

impl OperatorOutput {
    fn from_best(grid: Grid, best: Vec<Best>) -> OperatorOutput {
        let values = best.iter().map(|b| b.value).collect();
        let argmax = best.iter().map(|b| b.cube).collect();
        OperatorOutput { values: GridFunction::from_vec_unchecked(grid, values), argmax: Some(argmax) }
    }

    fn from_scatter(grid: Grid, scatter: Scatter) -> OperatorOutput {
        debug_assert_eq!(scatter.region, grid.full_rect());
        OperatorOutput::from_best(grid, scatter.best)
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values.values()[index]
    }
}

/// Maximal function restricted to a cube `Q0`; defined only on `Q0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedOutput {
    pub grid: Grid,
    pub q0: Cube,
    values: Vec<Option<f64>>,
    argmax: Vec<Option<Cube>>,
}

impl RestrictedOutput {
    /// `None` outside `Q0`.
    pub fn value_at(&self, index: usize) -> Option<f64> {
        self.values[index]
    }

    pub fn argmax_at(&self, index: usize) -> Option<Cube> {
        self.argmax[index]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Values on `Q0` in row-major order.
    pub fn values_on_q0(&self) -> Vec<f64> {
        self.q0.rect(self.grid.dim()).indices(&self.grid).map(|k| self.values[k].unwrap()).collect()
    }
}

fn check_family(f: &GridFunction, family: &CubeFamily) -> Result<()> {
    f.grid().ensure_same(&family.grid)
}

/// Sum of `term(k)` over the lattice points of `r`, axis-major.
#[inline]
pub(crate) fn sum_rect<F: Fn(usize) -> f64>(grid: &Grid, r: &Rect, term: F) -> f64 {
    let cols = grid.cols();
    let mut s = 0.0;
    for i in r.r0..r.r1 {
        for j in r.c0..r.c1 {
            s += term(i * cols + j);
        }
    }
    s
}

/// `M(f)(x) = sup_{Q ∋ x} mean_Q |f|`.
pub fn hl_maximal(f: &GridFunction, family: &CubeFamily) -> Result<OperatorOutput> {
    check_family(f, family)?;
    let table = PrefixTable::new(&f.abs());
    maximal_from_table(&table, family)
}

/// Maximal function of the (nonnegative) source of `table`.
pub(crate) fn maximal_from_table(table: &PrefixTable, family: &CubeFamily) -> Result<OperatorOutput> {
    let grid = *table.grid();
    let scatter = max_scatter(family, grid.full_rect(), |_, r| table.box_mean(r))?;
    Ok(OperatorOutput::from_scatter(grid, scatter))
}

/// `M_{Q0}(f)(x)` for `x ∈ Q0`: supremum over family cubes `Q ⊆ Q0` containing `x`.
pub fn restricted_maximal(f: &GridFunction, q0: &Cube, family: &CubeFamily) -> Result<RestrictedOutput> {
    check_family(f, family)?;
    let table = PrefixTable::new(&f.abs());
    restricted_from_table(&table, q0, family)
}

pub(crate) fn restricted_from_table(table: &PrefixTable, q0: &Cube, family: &CubeFamily) -> Result<RestrictedOutput> {
    let grid = *table.grid();
    let region = grid.check_cube(q0)?;
    let scatter = max_scatter(family, region, |_, r| table.box_mean(r))?;
    let mut values = vec![None; grid.len()];
    let mut argmax = vec![None; grid.len()];
    let rc = scatter.region_cols();
    for (pos, b) in scatter.best.iter().enumerate() {
        let k = grid.index(region.r0 + pos / rc, region.c0 + pos % rc);
        values[k] = Some(b.value);
        argmax[k] = Some(b.cube);
    }
    Ok(RestrictedOutput { grid, q0: *q0, values, argmax })
}

/// `M_Q(|f|)` on the points of `q` (row-major), all subcubes of `q`.
pub(crate) fn restricted_values(table: &PrefixTable, q: &Cube) -> Result<Vec<f64>> {
    let grid = *table.grid();
    let region = grid.check_cube(q)?;
    let scatter = max_scatter(&CubeFamily::all(grid), region, |_, r| table.box_mean(r))?;
    Ok(scatter.best.into_iter().map(|b| b.value).collect())
}

/// Mean oscillation `mean_Q |f − f_Q|` with `f_Q` read from `table`.
#[inline]
fn oscillation(grid: &Grid, values: &[f64], table: &PrefixTable, r: &Rect) -> f64 {
    let m = table.box_mean(r);
    sum_rect(grid, r, |k| (values[k] - m).abs()) / r.len() as f64
}

/// `M#(f)(x) = sup_{Q ∋ x} mean_Q |f − f_Q|`.
pub fn sharp_maximal(f: &GridFunction, family: &CubeFamily) -> Result<OperatorOutput> {
    check_family(f, family)?;
    let grid = *f.grid();
    let table = PrefixTable::new(f);
    let values = f.values();
    let scatter = max_scatter(family, grid.full_rect(), |_, r| oscillation(&grid, values, &table, r))?;
    Ok(OperatorOutput::from_scatter(grid, scatter))
}

/// `M#(b χ_Q)` on the points of `q` (row-major) over the global all-family.
///
/// Only cubes `R` meeting `Q` matter; for those the oscillation of `bχ_Q`
/// splits into the part on `R ∩ Q` and `|R \ Q|` copies of the mean.
pub fn sharp_of_restriction(b: &GridFunction, q: &Cube, table_b: &PrefixTable) -> Result<Vec<f64>> {
    let grid = *b.grid();
    let qr = grid.check_cube(q)?;
    let dim = grid.dim();
    let bv = b.values();
    let qc = qr.c1 - qr.c0;
    let mut best = vec![f64::NEG_INFINITY; qr.len()];
    for s in 1..=grid.max_side() {
        let lo0 = (qr.r0 + 1).saturating_sub(s);
        let hi0 = (qr.r1 - 1).min(grid.rows() - s);
        let (lo1, hi1) = if dim == 1 { (0, 0) } else { ((qr.c0 + 1).saturating_sub(s), (qr.c1 - 1).min(grid.cols() - s)) };
        for a0 in lo0..=hi0 {
            for a1 in lo1..=hi1 {
                let rr = Cube::new(&[a0, a1], s).rect(dim);
                let inter = rr.intersect(&qr).expect("cube meets Q by construction");
                let total = rr.len() as f64;
                let m = table_b.box_sum_dd(&inter).div_f64(total);
                let inside = sum_rect(&grid, &inter, |k| (bv[k] - m).abs());
                let osc = (inside + (rr.len() - inter.len()) as f64 * m.abs()) / total;
                for i in inter.r0..inter.r1 {
                    for j in inter.c0..inter.c1 {
                        let slot = &mut best[(i - qr.r0) * qc + (j - qr.c0)];
                        if osc > *slot {
                            *slot = osc;
                        }
                    }
                }
            }
        }
    }
    Ok(best)
}

/// `M_b(f)(x) = sup_{Q ∋ x} mean_Q |b(x) − b(y)|·|f(y)|`.
///
/// Point-major: for each `x` the integrand is tabulated once, after which
/// every cube containing `x` costs O(1).
pub fn maximal_commutator(b: &GridFunction, f: &GridFunction, family: &CubeFamily) -> Result<OperatorOutput> {
    check_family(b, family)?;
    check_family(f, family)?;
    let grid = *b.grid();
    let dim = grid.dim();
    let bv = b.values();
    let fv = f.values();
    let listed = (!family.is_all()).then(|| family.enumerate());
    let full = grid.full_rect();
    let best = par::map_range_init(
        grid.len(),
        || PrefixTable::from_fn(grid, |_| 0.0),
        |table, x| {
            let c = bv[x];
            table.fill(|y| (c - bv[y]).abs() * fv[y].abs());
            let mut best = Best::NONE;
            let mut visit = |q: Cube| {
                let cand = Best { value: table.box_mean(&q.rect(dim)), cube: q };
                if cand.beats(&best) {
                    best = cand;
                }
            };
            match &listed {
                None => {
                    let (i, j) = grid.coords(x);
                    for_each_cube_containing(&grid, &full, i, j, &mut visit);
                }
                Some(cubes) => cubes.iter().filter(|q| q.contains_index(&grid, x)).for_each(|q| visit(*q)),
            }
            best
        },
    );
    if let Some(index) = best.iter().position(|b| !b.is_set()) {
        return Err(Error::UncoveredPoint { index });
    }
    Ok(OperatorOutput::from_best(grid, best))
}

/// `M_b(χ_Q)` on the points of `q` (row-major) over the global all-family.
pub fn maximal_commutator_of_indicator(b: &GridFunction, q: &Cube) -> Result<Vec<f64>> {
    let grid = *b.grid();
    let qr = grid.check_cube(q)?;
    let dim = grid.dim();
    let bv = b.values();
    let full = grid.full_rect();
    let points: Vec<usize> = qr.indices(&grid).collect();
    let out = par::map_range_init(
        points.len(),
        || PrefixTable::from_fn(grid, |_| 0.0),
        |table, n| {
            let x = points[n];
            let c = bv[x];
            table.fill(|y| {
                let (i, j) = grid.coords(y);
                if qr.contains(i, j) {
                    (c - bv[y]).abs()
                } else {
                    0.0
                }
            });
            let (i, j) = grid.coords(x);
            let mut best = f64::NEG_INFINITY;
            for_each_cube_containing(&grid, &full, i, j, |r| {
                let rr = r.rect(dim);
                let v = table.box_sum_dd(&rr).div_f64(rr.len() as f64);
                if v > best {
                    best = v;
                }
            });
            best
        },
    );
    Ok(out)
}

/// `[b, M](f) = b·M(f) − M(b f)`.
pub fn commutator_maximal(b: &GridFunction, f: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    check_family(b, family)?;
    let mf = hl_maximal(f, family)?;
    let mbf = hl_maximal(&b.mul(f)?, family)?;
    combine(b, &mf.values, &mbf.values)
}

/// `[b, M#](f) = b·M#(f) − M#(b f)`.
pub fn commutator_sharp(b: &GridFunction, f: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    check_family(b, family)?;
    let mf = sharp_maximal(f, family)?;
    let mbf = sharp_maximal(&b.mul(f)?, family)?;
    combine(b, &mf.values, &mbf.values)
}

pub(crate) fn combine(b: &GridFunction, op_f: &GridFunction, op_bf: &GridFunction) -> Result<GridFunction> {
    let values = b.values().iter().zip(op_f.values()).zip(op_bf.values()).map(|((&bx, &m), &mb)| bx * m - mb).collect();
    GridFunction::new(*b.grid(), values)
}

pub(crate) fn check_fractional(dim: usize, alpha: f64, r: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < dim as f64) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, {dim})")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r = {r} must be positive")));
    }
    Ok(())
}

/// `M_{α,μ,r}(f)(x) = sup_{Q ∋ x} (μ(Q)^{rα/n − 1} ∫_Q |f|^r μ)^{1/r}`.
pub fn weighted_fractional_maximal(
    f: &GridFunction,
    mu: &Weight,
    alpha: f64,
    r: f64,
    family: &CubeFamily,
) -> Result<OperatorOutput> {
    check_family(f, family)?;
    f.grid().ensure_same(mu.grid())?;
    let grid = *f.grid();
    check_fractional(grid.dim(), alpha, r)?;
    let hn = grid.cell_measure();
    let fv = f.values();
    let wv = mu.values();
    let weighted = PrefixTable::from_fn(grid, |k| fv[k].abs().powf(r) * wv[k]);
    let mu_table = mu.table();
    let exponent = r * alpha / grid.dim() as f64 - 1.0;
    let scatter = max_scatter(family, grid.full_rect(), |_, rect| {
        let mass = mu_table.box_sum(rect) * hn;
        let integral = weighted.box_sum(rect) * hn;
        (mass.powf(exponent) * integral).powf(1.0 / r)
    })?;
    Ok(OperatorOutput::from_scatter(grid, scatter))
}

#[cfg(test)]
mod tests;
