//! Seeded test corpora built from closed-form profiles on `[0, 1]^n`.
//!
//! Every profile is defined in normalized coordinates, so corpora with the
//! same seed on grids of different resolution sample the same continuum
//! functions. Random parameters depend on the seed only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{CubeFamily, Grid, GridFunction};
use crate::weights::{coifman_rochberg_weight, power_weight, Weight};

/// Numbers of test functions, symbols and weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusSizes {
    pub functions: usize,
    pub symbols: usize,
    pub weights: usize,
}

impl Default for CorpusSizes {
    fn default() -> CorpusSizes {
        CorpusSizes { functions: 8, symbols: 6, weights: 4 }
    }
}

/// A named test function.
#[derive(Clone, Debug)]
pub struct Member {
    pub name: String,
    pub function: GridFunction,
}

/// A named symbol `b`.
#[derive(Clone, Debug)]
pub struct Symbol {
    pub name: String,
    pub function: GridFunction,
    /// `min b ≥ 0`.
    pub nonnegative: bool,
    /// False for the logarithmic control, which is of bounded mean
    /// oscillation but not Lipschitz.
    pub lipschitz: bool,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub seed: u64,
    pub grid: Grid,
    pub functions: Vec<Member>,
    pub symbols: Vec<Symbol>,
    pub weights: Vec<Weight>,
}

impl Corpus {
    pub fn nonnegative_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| s.nonnegative)
    }

    pub fn lipschitz_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| s.lipschitz)
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.symbols.iter().find(|s| s.name == name)
    }
}

/// Short label `w{index}_{generator}` used in reports.
pub fn weight_label(index: usize, w: &Weight) -> String {
    format!("w{index}_{}", w.generator().name)
}

fn dist(u: [f64; 2], c: [f64; 2], dim: usize) -> f64 {
    let d0 = u[0] - c[0];
    let d1 = if dim == 2 { u[1] - c[1] } else { 0.0 };
    d0.hypot(d1)
}

fn function_member(grid: Grid, kind: usize, rng: &mut ChaCha8Rng) -> Result<Member> {
    let dim = grid.dim();
    let (name, function) = match kind % 8 {
        0 | 1 => {
            let len: [f64; 2] = [rng.gen_range(0.2..0.5), rng.gen_range(0.2..0.5)];
            let lo: [f64; 2] = [rng.gen_range(0.0..1.0 - len[0]), rng.gen_range(0.0..1.0 - len[1])];
            let inside = move |u: [f64; 2]| {
                let ok0 = u[0] >= lo[0] && u[0] < lo[0] + len[0];
                let ok1 = dim == 1 || u[1] >= lo[1] && u[1] < lo[1] + len[1];
                if ok0 && ok1 {
                    1.0
                } else {
                    0.0
                }
            };
            ("indicator", GridFunction::from_profile(grid, inside)?)
        }
        2 => ("ramp", GridFunction::from_profile(grid, |u| u[0] + 0.5 * u[1])?),
        3 | 4 => {
            let c = [rng.gen_range(0.25..0.75), rng.gen_range(0.25..0.75)];
            let sigma: f64 = rng.gen_range(0.08..0.2);
            ("bump", GridFunction::from_profile(grid, move |u| (-dist(u, c, dim).powi(2) / (2.0 * sigma * sigma)).exp())?)
        }
        5 | 6 => {
            let modes: Vec<(f64, f64, f64)> =
                (1..=3).map(|k| (k as f64, rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))).collect();
            let field = move |u: [f64; 2]| {
                modes
                    .iter()
                    .map(|&(k, a, phi)| {
                        let t = std::f64::consts::TAU * k * (u[0] + 0.5 * u[1]) + phi;
                        a * 0.5 * (1.0 + t.cos())
                    })
                    .sum::<f64>()
            };
            ("trig", GridFunction::from_profile(grid, field)?)
        }
        _ => ("oscillatory", GridFunction::from_profile(grid, |u| (std::f64::consts::TAU * 5.0 * u[0]).cos())?),
    };
    Ok(Member { name: format!("f{kind}_{name}"), function })
}

fn symbol_member(grid: Grid, kind: usize, rng: &mut ChaCha8Rng) -> Result<Symbol> {
    let dim = grid.dim();
    let centre = [0.5, 0.5];
    let floor = 1.0 / (2.0 * grid.shape()[0] as f64);
    let mut lipschitz = true;
    let (name, function) = match kind {
        0 => ("bump", GridFunction::from_profile(grid, move |u| (-dist(u, centre, dim).powi(2) / (2.0 * 0.15 * 0.15)).exp())?),
        1 => ("ramp", GridFunction::from_profile(grid, |u| u[0] + 0.5 * u[1])?),
        2 => ("holder03", GridFunction::from_profile(grid, move |u| dist(u, centre, dim).powf(0.3))?),
        3 => ("holder07", GridFunction::from_profile(grid, move |u| dist(u, centre, dim).powf(0.7))?),
        4 => {
            lipschitz = false;
            ("log", GridFunction::from_profile(grid, move |u| (2.0 / (dist(u, centre, dim) + floor)).ln())?)
        }
        5 => ("sin", GridFunction::from_profile(grid, |u| (std::f64::consts::TAU * u[0]).sin())?),
        _ => {
            let c = [rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8)];
            let scale: f64 = rng.gen_range(0.5..2.0);
            ("random_bump", GridFunction::from_profile(grid, move |u| scale * (-dist(u, c, dim).powi(2) / 0.05).exp())?)
        }
    };
    let nonnegative = function.is_nonnegative();
    Ok(Symbol { name: format!("b{kind}_{name}"), function, nonnegative, lipschitz })
}

fn weight_member(grid: Grid, kind: usize, functions: &[Member], rng: &mut ChaCha8Rng) -> Result<Weight> {
    let dim = grid.dim();
    let h = grid.spacing();
    let centre: Vec<f64> = grid.shape().iter().map(|&n| 0.5 * n as f64 * h).collect();
    match kind {
        0 => Ok(Weight::unit(grid)),
        1 => power_weight(grid, &centre, 0.25, h / 2.0),
        2 => power_weight(grid, &centre, 0.5, h / 2.0),
        3 => {
            let bumps: Vec<&Member> = functions.iter().filter(|m| m.name.ends_with("_bump")).take(2).collect();
            let source = match bumps.as_slice() {
                [a, b] => a.function.abs().add(&b.function.abs())?,
                _ => GridFunction::from_profile(grid, |u| (-(u[0] - 0.5).powi(2) / 0.02).exp())?,
            };
            coifman_rochberg_weight(&source, 0.5, &CubeFamily::all(grid))
        }
        _ => {
            let a: f64 = rng.gen_range(0.05..0.6) * dim as f64;
            power_weight(grid, &centre, a, h / 2.0)
        }
    }
}

/// Deterministic corpus for `seed` on `grid`.
///
/// Functions cycle through indicators of random boxes, a ramp, Gaussian
/// bumps, random nonnegative trigonometric fields and an oscillatory
/// cosine. Symbols are a bump, a ramp, Hölder profiles `|u − c|^γ` with
/// γ ∈ {0.3, 0.7}, the logarithmic control and the sign-changing sine
/// control, followed by random bumps. Weights are `μ ≡ 1`, power weights
/// with `a ∈ {0.25, 0.5}` around the domain centre (`ε = h/2`) and a
/// Coifman–Rochberg weight `(M(|f₁| + |f₂|))^{1/2}` from the two bump
/// functions, followed by random power weights.
pub fn build_corpus(seed: u64, grid: Grid, sizes: CorpusSizes) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let functions = (0..sizes.functions).map(|k| function_member(grid, k, &mut rng)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    let symbols = (0..sizes.symbols).map(|k| symbol_member(grid, k, &mut rng)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    let weights =
        (0..sizes.weights).map(|k| weight_member(grid, k, &functions, &mut rng)).collect::<Result<Vec<_>>>()?;
    Ok(Corpus { seed, grid, functions, symbols, weights })
}
