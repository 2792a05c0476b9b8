//! Muckenhoupt weights: constants, membership and generators.
//!
//! All constants are maxima over a finite cube family and therefore lower
//! bounds of the continuum constants.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Cube, CubeFamily, Grid, GridFunction, Rect};
use crate::maximal::{self, engine::window_min};
use crate::par;
use crate::prefix::PrefixTable;

/// How a weight was produced; written to the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generator {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl Generator {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Generator {
        Generator { name: name.to_string(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }
}

#[derive(Debug)]
struct Inner {
    base: GridFunction,
    table: PrefixTable,
    powers: Mutex<HashMap<u64, Arc<PrefixTable>>>,
    generator: Generator,
}

/// A strictly positive grid function with cached prefix tables.
///
/// Tables of powers `w^t` are built on first request and shared between
/// clones.
#[derive(Clone, Debug)]
pub struct Weight {
    inner: Arc<Inner>,
}

impl Weight {
    pub fn new(base: GridFunction) -> Result<Weight> {
        Weight::with_generator(base, Generator::new("custom", &[]))
    }

    pub fn with_generator(base: GridFunction, generator: Generator) -> Result<Weight> {
        if let Some((index, &value)) = base.values().iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::NonPositiveWeight { index, value });
        }
        let table = PrefixTable::new(&base);
        Ok(Weight { inner: Arc::new(Inner { base, table, powers: Mutex::new(HashMap::new()), generator }) })
    }

    /// `μ ≡ 1`.
    pub fn unit(grid: Grid) -> Weight {
        Weight::with_generator(GridFunction::constant(grid, 1.0), Generator::new("unit", &[])).expect("1 > 0")
    }

    pub fn grid(&self) -> &Grid {
        self.inner.base.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.inner.base.values()
    }

    pub fn function(&self) -> &GridFunction {
        &self.inner.base
    }

    pub fn generator(&self) -> &Generator {
        &self.inner.generator
    }

    pub fn table(&self) -> &PrefixTable {
        &self.inner.table
    }

    pub fn is_unit(&self) -> bool {
        self.values().iter().all(|&v| v == 1.0)
    }

    /// Prefix table of `w^t`, built lazily per exponent.
    pub fn power_table(&self, t: f64) -> Arc<PrefixTable> {
        let key = t.to_bits();
        let mut cache = self.inner.powers.lock().expect("power cache poisoned");
        cache
            .entry(key)
            .or_insert_with(|| {
                let v = self.values();
                Arc::new(PrefixTable::from_fn(*self.grid(), |k| v[k].powf(t)))
            })
            .clone()
    }

    /// `μ(R) = Σ_{x∈R} μ(x) hⁿ`.
    pub fn measure_rect(&self, r: &Rect) -> f64 {
        self.table().box_sum(r) * self.grid().cell_measure()
    }
}

/// `μ(Q)`, the weighted measure of a cube.
pub fn weighted_measure(mu: &Weight, cube: &Cube) -> Result<f64> {
    let r = mu.grid().check_cube(cube)?;
    Ok(mu.measure_rect(&r))
}

/// For every cube of side `s` (anchors row-major), the minimum of `v` over it.
fn side_minima(grid: &Grid, v: &[f64], s: usize) -> Vec<f64> {
    let mut dq = VecDeque::new();
    let rows = grid.rows();
    if grid.dim() == 1 {
        let mut out = vec![0.0; rows - s + 1];
        window_min(rows, s, rows, |a| v[a], &mut dq, |x, a| {
            if x + 1 >= s {
                out[x + 1 - s] = v[a];
            }
        });
        return out;
    }
    let cols = grid.cols();
    let (l0, l1) = (rows - s + 1, cols - s + 1);
    let mut row_min = vec![0.0; rows * l1];
    for i in 0..rows {
        let row = &v[i * cols..(i + 1) * cols];
        window_min(cols, s, cols, |a| row[a], &mut dq, |x, a| {
            if x + 1 >= s {
                row_min[i * l1 + x + 1 - s] = row[a];
            }
        });
    }
    let mut out = vec![0.0; l0 * l1];
    for a1 in 0..l1 {
        window_min(rows, s, rows, |i| row_min[i * l1 + a1], &mut dq, |x, i| {
            if x + 1 >= s {
                out[(x + 1 - s) * l1 + a1] = row_min[i * l1 + a1];
            }
        });
    }
    out
}

/// `[w]_{A_1} = max_Q mean_Q(w) / min_Q(w)` over the family.
pub fn a1_constant(w: &Weight, family: &CubeFamily) -> Result<f64> {
    w.grid().ensure_same(&family.grid)?;
    let grid = *w.grid();
    let v = w.values();
    let table = w.table();
    if family.is_all() {
        let best = par::fold_range(
            grid.max_side(),
            || 1.0f64,
            |acc, k| {
                let s = k + 1;
                let mins = side_minima(&grid, v, s);
                let l1 = if grid.dim() == 1 { 1 } else { grid.cols() - s + 1 };
                mins.iter().enumerate().fold(acc, |acc, (idx, &m)| {
                    let c = Cube::new(&[idx / l1, idx % l1], s);
                    acc.max(table.box_mean(&c.rect(grid.dim())) / m)
                })
            },
            f64::max,
        );
        return Ok(best);
    }
    let cubes = family.enumerate();
    let ratios = par::map_slice(&cubes, |c| {
        let r = c.rect(grid.dim());
        let m = r.indices(&grid).map(|k| v[k]).fold(f64::INFINITY, f64::min);
        table.box_mean(&r) / m
    });
    Ok(ratios.into_iter().fold(1.0, f64::max))
}

/// `max_x M(w)(x) / w(x)`, the pointwise form of the A_1 constant.
pub fn a1_constant_pointwise(w: &Weight, family: &CubeFamily) -> Result<f64> {
    let mw = maximal::hl_maximal(w.function(), family)?;
    Ok(mw.values.values().iter().zip(w.values()).map(|(m, x)| m / x).fold(1.0, f64::max))
}

/// `[w]_{A_p} = max_Q mean_Q(w) · mean_Q(w^{1/(1−p)})^{p−1}`.
pub fn ap_constant(w: &Weight, p: f64, family: &CubeFamily) -> Result<f64> {
    w.grid().ensure_same(&family.grid)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("A_p needs p > 1, got {p}")));
    }
    let dual = w.power_table(1.0 / (1.0 - p));
    let table = w.table();
    let cubes = family.enumerate();
    let dim = w.grid().dim();
    let vals = par::map_slice(&cubes, |c| {
        let r = c.rect(dim);
        table.box_mean(&r) * dual.box_mean(&r).powf(p - 1.0)
    });
    Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max).max(1.0))
}

/// `w(x) = (|x − c| + ε)^{−a}` with `c` in physical coordinates.
pub fn power_weight(grid: Grid, center: &[f64], a: f64, epsilon: f64) -> Result<Weight> {
    if !(a >= 0.0 && a < grid.dim() as f64) {
        return Err(Error::InvalidParameter(format!("power a = {a} must lie in [0, {})", grid.dim())));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    let c = [center[0], center.get(1).copied().unwrap_or(0.0)];
    let values = (0..grid.len())
        .map(|k| {
            let x = grid.position(k);
            let d = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
            (d + epsilon).powf(-a)
        })
        .collect();
    let gen = Generator::new("power", &[("a", a), ("epsilon", epsilon), ("center0", c[0]), ("center1", c[1])]);
    Weight::with_generator(GridFunction::new(grid, values)?, gen)
}

/// `w = (M|f| + 1e−9·max|f|)^δ`, an A_1 weight for `0 < δ < 1`.
pub fn coifman_rochberg_weight(f: &GridFunction, delta: f64, family: &CubeFamily) -> Result<Weight> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    let peak = f.max_abs();
    if peak == 0.0 {
        return Err(Error::InvalidParameter("Coifman-Rochberg weight of the zero function".into()));
    }
    let floor = 1e-9 * peak;
    let mf = maximal::hl_maximal(f, family)?;
    let w = mf.values.map(|m| (m + floor).powf(delta));
    Weight::with_generator(w, Generator::new("coifman_rochberg", &[("delta", delta)]))
}

/// `w(3Q) / w(Q)` for the concentric tripled cube.
pub fn doubling_ratio(w: &Weight, cube: &Cube) -> Result<f64> {
    let grid = w.grid();
    let inner = grid.check_cube(cube)?;
    let s = cube.side;
    let out_of_domain = || Error::DilateOutOfDomain { cube: *cube };
    let a0 = cube.anchor[0].checked_sub(s).ok_or_else(out_of_domain)?;
    let a1 = if grid.dim() == 2 { cube.anchor[1].checked_sub(s).ok_or_else(out_of_domain)? } else { 0 };
    let dilate = Cube::new(&[a0, a1], 3 * s);
    let outer = grid.check_cube(&dilate).map_err(|_| out_of_domain())?;
    Ok(w.measure_rect(&outer) / w.measure_rect(&inner))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> Weight {
        Weight::new(GridFunction::new(Grid::line(values.len(), 1.0).unwrap(), values.to_vec()).unwrap()).unwrap()
    }

    /// Independent A_1 oracle: direct loops over every cube.
    fn a1_oracle(w: &Weight) -> f64 {
        let g = *w.grid();
        let v = w.values();
        CubeFamily::all(g)
            .enumerate()
            .iter()
            .map(|c| {
                let pts: Vec<f64> = c.rect(g.dim()).indices(&g).map(|k| v[k]).collect();
                let mean = pts.iter().sum::<f64>() / pts.len() as f64;
                mean / pts.iter().copied().fold(f64::INFINITY, f64::min)
            })
            .fold(1.0, f64::max)
    }

    #[test]
    fn a1_examples() {
        let g = Grid::line(8, 1.0).unwrap();
        assert_eq!(a1_constant(&Weight::unit(g), &CubeFamily::all(g)).unwrap(), 1.0);
        let w = line(&[1.0, 2.0]);
        assert_eq!(a1_constant(&w, &CubeFamily::all(*w.grid())).unwrap(), 1.5);
    }

    #[test]
    fn a1_sliding_minimum_matches_direct_loops() {
        for shape in [vec![17], vec![6, 9], vec![8, 8]] {
            let g = Grid::new(&shape, 0.5).unwrap();
            let w = power_weight(g, &[1.3, 1.1], 0.7, 0.1).unwrap();
            let fast = a1_constant(&w, &CubeFamily::all(g)).unwrap();
            let oracle = a1_oracle(&w);
            assert!((fast - oracle).abs() <= 1e-12 * oracle, "{fast} vs {oracle}");
            let pointwise = a1_constant_pointwise(&w, &CubeFamily::all(g)).unwrap();
            assert!((fast - pointwise).abs() <= 1e-12 * fast);
        }
    }

    #[test]
    fn a1_of_power_weight_grows_with_exponent() {
        let g = Grid::line(64, 1.0 / 64.0).unwrap();
        let fam = CubeFamily::all(g);
        let mut last = 1.0;
        for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let w = power_weight(g, &[0.5], a, g.spacing() / 2.0).unwrap();
            let c = a1_constant(&w, &fam).unwrap();
            assert!(c.is_finite() && c > last, "a={a}: {c} <= {last}");
            last = c;
        }
        let w = power_weight(g, &[0.5], 0.5, g.spacing() / 2.0).unwrap();
        assert!(a1_constant(&w, &fam).unwrap() < 20.0);
    }

    #[test]
    fn ap_examples() {
        let g = Grid::line(6, 1.0).unwrap();
        let fam = CubeFamily::all(g);
        for p in [1.5, 2.0, 4.0] {
            assert!((ap_constant(&Weight::unit(g), p, &fam).unwrap() - 1.0).abs() < 1e-15);
        }
        // w = [1, 4], p = 2: intervals {1}, {4} give 1; the pair gives 2.5 * 0.625
        let w = line(&[1.0, 4.0]);
        let c = ap_constant(&w, 2.0, &CubeFamily::all(*w.grid())).unwrap();
        assert!((c - 2.5 * 0.625).abs() < 1e-15);
        assert!(ap_constant(&w, 1.0, &CubeFamily::all(*w.grid())).is_err());
    }

    #[test]
    fn ap_is_nonincreasing_and_below_a1() {
        let g = Grid::plane(10, 10, 0.1).unwrap();
        let fam = CubeFamily::all(g);
        let w = power_weight(g, &[0.5, 0.5], 1.2, 0.05).unwrap();
        let a1 = a1_constant(&w, &fam).unwrap();
        let mut last = f64::INFINITY;
        for p in [1.1, 1.5, 2.0, 3.0, 6.0] {
            let c = ap_constant(&w, p, &fam).unwrap();
            assert!(c <= last * (1.0 + 1e-12));
            assert!(c <= a1 * (1.0 + 1e-12));
            last = c;
        }
    }

    #[test]
    fn power_weight_properties() {
        let g = Grid::line(16, 0.25).unwrap();
        let w = power_weight(g, &[2.0], 0.0, 0.1).unwrap();
        assert!(w.is_unit());
        let w = power_weight(g, &[2.0], 0.5, 0.125).unwrap();
        let v = w.values();
        for k in 0..16 {
            assert!((v[k] - v[15 - k]).abs() < 1e-14);
        }
        assert!(power_weight(g, &[2.0], 1.0, 0.1).is_err());
        assert!(power_weight(g, &[2.0], 0.5, 0.0).is_err());
    }

    #[test]
    fn coifman_rochberg_examples() {
        let g = Grid::line(16, 1.0).unwrap();
        let fam = CubeFamily::all(g);
        let w = coifman_rochberg_weight(&GridFunction::constant(g, 1.0), 0.5, &fam).unwrap();
        assert!(w.values().iter().all(|&v| (v - 1.0).abs() < 1e-9));

        let mut spike = vec![0.0; 16];
        spike[5] = 1.0;
        let f = GridFunction::new(g, spike).unwrap();
        let w = coifman_rochberg_weight(&f, 0.5, &fam).unwrap();
        // brute-force M of a point mass at 5: 1 / (shortest interval reaching 5)
        for x in 0..16usize {
            let m = 1.0 / ((x as f64 - 5.0).abs() + 1.0);
            assert!((w.values()[x] - (m + 1e-9).sqrt()).abs() < 1e-15);
        }
        assert!(a1_constant(&w, &fam).unwrap().is_finite());
        assert!(coifman_rochberg_weight(&GridFunction::zeros(g), 0.5, &fam).is_err());
        assert!(coifman_rochberg_weight(&f, 1.0, &fam).is_err());

        // larger delta gives a larger weight where Mf >= 1
        let big = GridFunction::constant(g, 3.0);
        let w1 = coifman_rochberg_weight(&big, 0.3, &fam).unwrap();
        let w2 = coifman_rochberg_weight(&big, 0.6, &fam).unwrap();
        assert!(w1.values().iter().zip(w2.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn doubling_examples() {
        let g = Grid::line(12, 1.0).unwrap();
        assert_eq!(doubling_ratio(&Weight::unit(g), &Cube::line(3, 3)).unwrap(), 3.0);
        assert!(matches!(doubling_ratio(&Weight::unit(g), &Cube::line(1, 3)), Err(Error::DilateOutOfDomain { .. })));
        let g2 = Grid::plane(9, 9, 1.0).unwrap();
        assert_eq!(doubling_ratio(&Weight::unit(g2), &Cube::square(3, 3, 3)).unwrap(), 9.0);
        let w = power_weight(g2, &[4.5, 4.5], 1.0, 0.5).unwrap();
        let a1 = a1_constant(&w, &CubeFamily::all(g2)).unwrap();
        for c in CubeFamily::all(g2).enumerate() {
            if let Ok(r) = doubling_ratio(&w, &c) {
                assert!(r <= 9.0 * a1 * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn weighted_measure_examples() {
        let g = Grid::line(8, 1.0).unwrap();
        assert_eq!(weighted_measure(&Weight::unit(g), &Cube::line(2, 5)).unwrap(), 5.0);
        let g = Grid::line(8, 0.5).unwrap();
        assert_eq!(weighted_measure(&Weight::unit(g), &Cube::line(0, 4)).unwrap(), 2.0);
        let w = power_weight(g, &[1.0], 0.5, 0.25).unwrap();
        let q = Cube::line(1, 5);
        let direct: f64 = (1..6).map(|k| w.values()[k] * 0.5).sum();
        assert!((weighted_measure(&w, &q).unwrap() - direct).abs() < 1e-14);
        // additive over a split
        let left = weighted_measure(&w, &Cube::line(1, 2)).unwrap();
        let right = weighted_measure(&w, &Cube::line(3, 3)).unwrap();
        assert!((left + right - weighted_measure(&w, &q).unwrap()).abs() < 1e-14);
        assert!(weighted_measure(&w, &Cube::line(6, 3)).is_err());
    }

    #[test]
    fn power_tables_match_direct_powers() {
        let g = Grid::plane(6, 7, 1.0).unwrap();
        let w = power_weight(g, &[2.0, 2.0], 1.5, 0.3).unwrap();
        for t in [-3.0, -0.5, 2.0] {
            let table = w.power_table(t);
            let again = w.power_table(t);
            assert!(Arc::ptr_eq(&table, &again));
            for c in CubeFamily::all(g).enumerate() {
                let direct: f64 = c.rect(2).indices(&g).map(|k| w.values()[k].powf(t)).sum();
                assert!((table.cube_sum(&c).unwrap() - direct).abs() <= 1e-12 * direct);
            }
        }
    }

    #[test]
    fn rejects_nonpositive() {
        let g = Grid::line(3, 1.0).unwrap();
        assert!(Weight::new(GridFunction::new(g, vec![1.0, 0.0, 1.0]).unwrap()).is_err());
    }
}
