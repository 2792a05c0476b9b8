//! Lattices, grid functions, cubes and cube families.
//!
//! A grid stores its points row-major. One-dimensional grids use the same
//! layout with a single column, so a 1D cube with anchor `a` and side `s`
//! covers rows `a..a+s` of column 0.
//!
//! Point `(i, j)` sits at the cell centre `((i + ½)h, (j + ½)h)`, so the
//! domain is `[0, N₀h] × [0, N₁h]` and refining `N → 2N` with `h → h/2`
//! samples the same continuum profile.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    dims: [usize; 2],
    spacing: f64,
}

impl Grid {
    pub fn new(shape: &[usize], spacing: f64) -> Result<Grid> {
        let dim = shape.len();
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if let Some(&n) = shape.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGrid(format!("axis with {n} points (need at least 2)")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        let dims = if dim == 1 { [shape[0], 1] } else { [shape[0], shape[1]] };
        Ok(Grid { dim, dims, spacing })
    }

    pub fn line(n: usize, spacing: f64) -> Result<Grid> {
        Grid::new(&[n], spacing)
    }

    pub fn plane(n0: usize, n1: usize, spacing: f64) -> Result<Grid> {
        Grid::new(&[n0, n1], spacing)
    }

    /// Unit-length domain per axis: `N` points with `h = 1/N`.
    pub fn unit(dim: usize, n: usize) -> Result<Grid> {
        let shape = vec![n; dim];
        Grid::new(&shape, 1.0 / n as f64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.dims[..self.dim]
    }

    pub fn rows(&self) -> usize {
        self.dims[0]
    }

    /// Number of columns in the row-major layout (1 for a 1D grid).
    pub fn cols(&self) -> usize {
        self.dims[1]
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Lebesgue measure `hⁿ` carried by one lattice point.
    pub fn cell_measure(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Largest side of a cube that fits in the domain.
    pub fn max_side(&self) -> usize {
        if self.dim == 1 {
            self.dims[0]
        } else {
            self.dims[0].min(self.dims[1])
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.dims[1] + j
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.dims[1], index % self.dims[1])
    }

    /// Physical coordinates of a lattice point (second entry 0 in 1D).
    pub fn position(&self, index: usize) -> [f64; 2] {
        let (i, j) = self.coords(index);
        let y = if self.dim == 2 { (j as f64 + 0.5) * self.spacing } else { 0.0 };
        [(i as f64 + 0.5) * self.spacing, y]
    }

    /// Coordinates rescaled so that every axis of the domain is `[0, 1]`.
    pub fn normalized_position(&self, index: usize) -> [f64; 2] {
        let (i, j) = self.coords(index);
        let y = if self.dim == 2 { (j as f64 + 0.5) / self.dims[1] as f64 } else { 0.0 };
        [(i as f64 + 0.5) / self.dims[0] as f64, y]
    }

    /// Half-open index rectangle covered by the whole grid.
    pub fn full_rect(&self) -> Rect {
        Rect { r0: 0, r1: self.dims[0], c0: 0, c1: self.dims[1] }
    }

    pub fn contains_cube(&self, cube: &Cube) -> bool {
        let r = cube.rect(self.dim);
        r.r1 <= self.dims[0] && r.c1 <= self.dims[1] && cube.side >= 1 && (self.dim == 2 || cube.anchor[1] == 0)
    }

    pub fn check_cube(&self, cube: &Cube) -> Result<Rect> {
        if self.contains_cube(cube) {
            Ok(cube.rect(self.dim))
        } else {
            Err(Error::CubeOutOfBounds { cube: *cube })
        }
    }

    pub fn same_lattice(&self, other: &Grid) -> bool {
        self == other
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            write!(f, "{} points, h={}", self.dims[0], self.spacing)
        } else {
            write!(f, "{}x{} points, h={}", self.dims[0], self.dims[1], self.spacing)
        }
    }
}

/// Half-open index rectangle `[r0, r1) × [c0, c1)` in the row-major layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub r0: usize,
    pub r1: usize,
    pub c0: usize,
    pub c1: usize,
}

impl Rect {
    pub fn len(&self) -> usize {
        (self.r1 - self.r0) * (self.c1 - self.c0)
    }

    pub fn is_empty(&self) -> bool {
        self.r1 <= self.r0 || self.c1 <= self.c0
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.r0 && i < self.r1 && j >= self.c0 && j < self.c1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.r0 >= self.r0 && other.r1 <= self.r1 && other.c0 >= self.c0 && other.c1 <= self.c1
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            r0: self.r0.max(other.r0),
            r1: self.r1.min(other.r1),
            c0: self.c0.max(other.c0),
            c1: self.c1.min(other.c1),
        };
        if r.is_empty() {
            None
        } else {
            Some(r)
        }
    }

    /// Row-major lattice indices covered by the rectangle.
    pub fn indices(&self, grid: &Grid) -> impl Iterator<Item = usize> + '_ {
        let cols = grid.cols();
        let (c0, c1) = (self.c0, self.c1);
        (self.r0..self.r1).flat_map(move |i| (c0..c1).map(move |j| i * cols + j))
    }
}

/// Axis-aligned lattice cube. Field order gives the enumeration order:
/// side ascending, then anchor lexicographic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub side: usize,
    pub anchor: [usize; 2],
}

impl Cube {
    pub fn new(anchor: &[usize], side: usize) -> Cube {
        let a1 = anchor.get(1).copied().unwrap_or(0);
        Cube { side, anchor: [anchor[0], a1] }
    }

    pub fn line(anchor: usize, side: usize) -> Cube {
        Cube { side, anchor: [anchor, 0] }
    }

    pub fn square(a0: usize, a1: usize, side: usize) -> Cube {
        Cube { side, anchor: [a0, a1] }
    }

    /// The whole domain of a square (or 1D) grid as a cube.
    pub fn whole(grid: &Grid) -> Option<Cube> {
        let s = grid.max_side();
        let cube = Cube { side: s, anchor: [0, 0] };
        let r = cube.rect(grid.dim());
        (r.len() == grid.len()).then_some(cube)
    }

    pub fn rect(&self, dim: usize) -> Rect {
        if dim == 1 {
            Rect { r0: self.anchor[0], r1: self.anchor[0] + self.side, c0: 0, c1: 1 }
        } else {
            Rect {
                r0: self.anchor[0],
                r1: self.anchor[0] + self.side,
                c0: self.anchor[1],
                c1: self.anchor[1] + self.side,
            }
        }
    }

    pub fn point_count(&self, dim: usize) -> usize {
        self.side.pow(dim as u32)
    }

    /// Lebesgue measure `(side·h)ⁿ`.
    pub fn measure(&self, grid: &Grid) -> f64 {
        (self.side as f64 * grid.spacing()).powi(grid.dim() as i32)
    }

    pub fn contains_index(&self, grid: &Grid, index: usize) -> bool {
        let (i, j) = grid.coords(index);
        self.rect(grid.dim()).contains(i, j)
    }

    pub fn anchor_slice(&self, dim: usize) -> &[usize] {
        &self.anchor[..dim]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyMode {
    /// Every in-domain cube.
    All,
    /// Sides that are powers of two, anchors multiples of the side.
    Dyadic,
    /// `count` cubes drawn uniformly without replacement from the all-family.
    Sampled { count: usize, seed: u64 },
}

impl FromStr for FamilyMode {
    type Err = Error;

    /// Accepts `all`, `dyadic`, `sampled:K` and `sampled:K:SEED`.
    fn from_str(s: &str) -> Result<FamilyMode> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parse(format!("unknown cube family `{s}`"));
        match parts.as_slice() {
            ["all"] => Ok(FamilyMode::All),
            ["dyadic"] => Ok(FamilyMode::Dyadic),
            ["sampled", k] => Ok(FamilyMode::Sampled { count: k.parse().map_err(|_| bad())?, seed: 0 }),
            ["sampled", k, seed] => Ok(FamilyMode::Sampled {
                count: k.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for FamilyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyMode::All => write!(f, "all"),
            FamilyMode::Dyadic => write!(f, "dyadic"),
            FamilyMode::Sampled { count, seed } => write!(f, "sampled:{count}:{seed}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubeFamily {
    pub grid: Grid,
    pub mode: FamilyMode,
}

impl CubeFamily {
    pub fn new(grid: Grid, mode: FamilyMode) -> CubeFamily {
        CubeFamily { grid, mode }
    }

    pub fn all(grid: Grid) -> CubeFamily {
        CubeFamily { grid, mode: FamilyMode::All }
    }

    pub fn dyadic(grid: Grid) -> CubeFamily {
        CubeFamily { grid, mode: FamilyMode::Dyadic }
    }

    pub fn sampled(grid: Grid, count: usize, seed: u64) -> CubeFamily {
        CubeFamily { grid, mode: FamilyMode::Sampled { count, seed } }
    }

    pub fn is_all(&self) -> bool {
        self.mode == FamilyMode::All
    }

    /// Number of cubes of side `s` in the all-family.
    fn anchors_per_side(grid: &Grid, s: usize) -> usize {
        let n0 = grid.rows() + 1 - s;
        if grid.dim() == 1 {
            n0
        } else {
            n0 * (grid.cols() + 1 - s)
        }
    }

    /// Closed-form size of the all-family: `Σ_s Π_axis (N_axis − s + 1)`.
    pub fn count_all(grid: &Grid) -> usize {
        (1..=grid.max_side()).map(|s| Self::anchors_per_side(grid, s)).sum()
    }

    /// The `rank`-th cube of the all-family in enumeration order.
    pub fn unrank(grid: &Grid, mut rank: usize) -> Option<Cube> {
        for s in 1..=grid.max_side() {
            let k = Self::anchors_per_side(grid, s);
            if rank < k {
                if grid.dim() == 1 {
                    return Some(Cube::line(rank, s));
                }
                let w = grid.cols() + 1 - s;
                return Some(Cube::square(rank / w, rank % w, s));
            }
            rank -= k;
        }
        None
    }

    /// Cubes of the family in deterministic order (side ascending, then
    /// anchor lexicographic), each exactly once.
    pub fn enumerate(&self) -> Vec<Cube> {
        let grid = &self.grid;
        match self.mode {
            FamilyMode::All => {
                let mut out = Vec::with_capacity(Self::count_all(grid));
                for s in 1..=grid.max_side() {
                    push_side(grid, s, 1, &mut out);
                }
                out
            }
            FamilyMode::Dyadic => {
                let mut out = Vec::new();
                let mut s = 1;
                while s <= grid.max_side() {
                    push_side(grid, s, s, &mut out);
                    s *= 2;
                }
                out
            }
            FamilyMode::Sampled { count, seed } => {
                let total = Self::count_all(grid);
                if count >= total {
                    return CubeFamily::all(*grid).enumerate();
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut ranks = rand::seq::index::sample(&mut rng, total, count).into_vec();
                ranks.sort_unstable();
                ranks.into_iter().filter_map(|r| Self::unrank(grid, r)).collect()
            }
        }
    }

    /// Cubes of the family that lie inside `region`, in enumeration order.
    pub fn enumerate_within(&self, region: &Rect) -> Vec<Cube> {
        let dim = self.grid.dim();
        if self.is_all() {
            // direct enumeration avoids materialising the whole family
            let rows = region.r1 - region.r0;
            let cols = region.c1 - region.c0;
            let max_side = if dim == 1 { rows } else { rows.min(cols) };
            let mut out = Vec::new();
            for s in 1..=max_side {
                for a0 in region.r0..=region.r1 - s {
                    if dim == 1 {
                        out.push(Cube::line(a0, s));
                    } else {
                        for a1 in region.c0..=region.c1 - s {
                            out.push(Cube::square(a0, a1, s));
                        }
                    }
                }
            }
            return out;
        }
        self.enumerate().into_iter().filter(|c| region.contains_rect(&c.rect(dim))).collect()
    }
}

fn push_side(grid: &Grid, s: usize, stride: usize, out: &mut Vec<Cube>) {
    if grid.dim() == 1 {
        out.extend((0..=grid.rows() - s).step_by(stride).map(|a| Cube::line(a, s)));
    } else {
        for a0 in (0..=grid.rows() - s).step_by(stride) {
            for a1 in (0..=grid.cols() - s).step_by(stride) {
                out.push(Cube::square(a0, a1, s));
            }
        }
    }
}

/// See [`CubeFamily::enumerate`].
pub fn enumerate_cubes(family: &CubeFamily) -> Vec<Cube> {
    family.enumerate()
}

/// Real values sampled on every point of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(GridFunction { grid, values })
    }

    /// Construction from values already known to be finite.
    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> GridFunction {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        GridFunction { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> GridFunction {
        GridFunction { grid, values: vec![c; grid.len()] }
    }

    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction::constant(grid, 0.0)
    }

    /// Samples `profile` at normalized coordinates in `[0, 1]ⁿ`.
    pub fn from_profile<F: Fn([f64; 2]) -> f64>(grid: Grid, profile: F) -> Result<GridFunction> {
        let values = (0..grid.len()).map(|k| profile(grid.normalized_position(k))).collect();
        GridFunction::new(grid, values)
    }

    pub fn indicator(grid: Grid, cube: &Cube) -> Result<GridFunction> {
        let rect = grid.check_cube(cube)?;
        let mut values = vec![0.0; grid.len()];
        for k in rect.indices(&grid) {
            values[k] = 1.0;
        }
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn abs(&self) -> GridFunction {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Result<GridFunction> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        GridFunction::new(self.grid, values)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// `f·χ_Q`: values outside `cube` set to zero.
    pub fn restrict(&self, cube: &Cube) -> Result<GridFunction> {
        let rect = self.grid.check_cube(cube)?;
        let mut values = vec![0.0; self.grid.len()];
        for k in rect.indices(&self.grid) {
            values[k] = self.values[k];
        }
        Ok(GridFunction { grid: self.grid, values })
    }

    /// Values over `cube` in row-major order.
    pub fn values_on(&self, cube: &Cube) -> Result<Vec<f64>> {
        let rect = self.grid.check_cube(cube)?;
        Ok(rect.indices(&self.grid).map(|k| self.values[k]).collect())
    }
}

/// See [`GridFunction::restrict`].
pub fn restrict(f: &GridFunction, cube: &Cube) -> Result<GridFunction> {
    f.restrict(cube)
}

/// Minimum of `f` over the lattice points of `cube` (the discrete essinf).
pub fn cube_min(f: &GridFunction, cube: &Cube) -> Result<f64> {
    let rect = f.grid.check_cube(cube)?;
    Ok(rect.indices(&f.grid).map(|k| f.values[k]).fold(f64::INFINITY, f64::min))
}
