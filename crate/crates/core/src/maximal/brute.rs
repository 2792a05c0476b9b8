//! Reference implementations: for every point, loop over every family cube
//! containing it and sum directly. Quadratic-or-worse; meant for grids up
//! to ~32 points per axis and as the oracle for the accelerated paths.

use super::{combine, check_fractional, OperatorOutput, RestrictedOutput};
use crate::error::{Error, Result};
use crate::grid::{Cube, CubeFamily, Grid, GridFunction};
use crate::weights::Weight;

fn points_of(grid: &Grid, q: &Cube) -> Vec<usize> {
    q.rect(grid.dim()).indices(grid).collect()
}

/// Point-major sup of `value(x, Q)` over family cubes containing `x` (and
/// satisfying `admit`). Ties keep the earlier cube.
fn pointwise_sup<A, V>(grid: &Grid, family: &CubeFamily, admit: A, value: V) -> Result<Vec<Option<(f64, Cube)>>>
where
    A: Fn(&Cube) -> bool,
    V: Fn(usize, &Cube) -> f64,
{
    let cubes: Vec<Cube> = family.enumerate().into_iter().filter(|c| admit(c)).collect();
    let mut out = Vec::with_capacity(grid.len());
    for x in 0..grid.len() {
        let mut best: Option<(f64, Cube)> = None;
        for q in cubes.iter().filter(|q| q.contains_index(grid, x)) {
            let v = value(x, q);
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, *q));
            }
        }
        out.push(best);
    }
    Ok(out)
}

fn into_output(grid: Grid, sup: Vec<Option<(f64, Cube)>>) -> Result<OperatorOutput> {
    let mut values = Vec::with_capacity(sup.len());
    let mut argmax = Vec::with_capacity(sup.len());
    for (index, s) in sup.into_iter().enumerate() {
        let (v, c) = s.ok_or(Error::UncoveredPoint { index })?;
        values.push(v);
        argmax.push(c);
    }
    Ok(OperatorOutput { values: GridFunction::new(grid, values)?, argmax: Some(argmax) })
}

fn mean_abs(f: &GridFunction, q: &Cube) -> f64 {
    let pts = points_of(f.grid(), q);
    pts.iter().map(|&k| f.values()[k].abs()).sum::<f64>() / pts.len() as f64
}

pub fn hl_maximal(f: &GridFunction, family: &CubeFamily) -> Result<OperatorOutput> {
    f.grid().ensure_same(&family.grid)?;
    let sup = pointwise_sup(f.grid(), family, |_| true, |_, q| mean_abs(f, q))?;
    into_output(*f.grid(), sup)
}

pub fn restricted_maximal(f: &GridFunction, q0: &Cube, family: &CubeFamily) -> Result<RestrictedOutput> {
    let grid = *f.grid();
    grid.ensure_same(&family.grid)?;
    let region = grid.check_cube(q0)?;
    let dim = grid.dim();
    let sup = pointwise_sup(&grid, family, |c| region.contains_rect(&c.rect(dim)), |_, q| mean_abs(f, q))?;
    let mut values = vec![None; grid.len()];
    let mut argmax = vec![None; grid.len()];
    for k in region.indices(&grid) {
        let (v, c) = sup[k].ok_or(Error::UncoveredPoint { index: k })?;
        values[k] = Some(v);
        argmax[k] = Some(c);
    }
    Ok(RestrictedOutput { grid, q0: *q0, values, argmax })
}

pub fn sharp_maximal(f: &GridFunction, family: &CubeFamily) -> Result<OperatorOutput> {
    f.grid().ensure_same(&family.grid)?;
    let grid = *f.grid();
    let v = f.values();
    let sup = pointwise_sup(&grid, family, |_| true, |_, q| {
        let pts = points_of(&grid, q);
        let n = pts.len() as f64;
        let mean = pts.iter().map(|&k| v[k]).sum::<f64>() / n;
        pts.iter().map(|&k| (v[k] - mean).abs()).sum::<f64>() / n
    })?;
    into_output(grid, sup)
}

pub fn maximal_commutator(b: &GridFunction, f: &GridFunction, family: &CubeFamily) -> Result<OperatorOutput> {
    b.grid().ensure_same(&family.grid)?;
    f.grid().ensure_same(&family.grid)?;
    let grid = *b.grid();
    let (bv, fv) = (b.values(), f.values());
    let sup = pointwise_sup(&grid, family, |_| true, |x, q| {
        let pts = points_of(&grid, q);
        pts.iter().map(|&y| (bv[x] - bv[y]).abs() * fv[y].abs()).sum::<f64>() / pts.len() as f64
    })?;
    into_output(grid, sup)
}

pub fn commutator_maximal(b: &GridFunction, f: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    let mf = hl_maximal(f, family)?;
    let mbf = hl_maximal(&b.mul(f)?, family)?;
    combine(b, &mf.values, &mbf.values)
}

pub fn commutator_sharp(b: &GridFunction, f: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    let mf = sharp_maximal(f, family)?;
    let mbf = sharp_maximal(&b.mul(f)?, family)?;
    combine(b, &mf.values, &mbf.values)
}

pub fn weighted_fractional_maximal(
    f: &GridFunction,
    mu: &Weight,
    alpha: f64,
    r: f64,
    family: &CubeFamily,
) -> Result<OperatorOutput> {
    f.grid().ensure_same(&family.grid)?;
    f.grid().ensure_same(mu.grid())?;
    let grid = *f.grid();
    check_fractional(grid.dim(), alpha, r)?;
    let hn = grid.cell_measure();
    let (fv, wv) = (f.values(), mu.values());
    let n = grid.dim() as f64;
    let sup = pointwise_sup(&grid, family, |_| true, |_, q| {
        let pts = points_of(&grid, q);
        let mass: f64 = pts.iter().map(|&k| wv[k] * hn).sum();
        let integral: f64 = pts.iter().map(|&k| fv[k].abs().powf(r) * wv[k] * hn).sum();
        (mass.powf(r * alpha / n - 1.0) * integral).powf(1.0 / r)
    })?;
    into_output(grid, sup)
}
