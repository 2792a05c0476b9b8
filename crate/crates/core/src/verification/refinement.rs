//! Grid-refinement experiment for the differentiation-limit arguments.
//!
//! For each profile `b` on `[0, 1]` and each resolution `N` the cube `Q_N`
//! is the two-point interval centred at `x₀`, so `|Q_N| = 2/N → 0`. The
//! table records, with `μ ≡ 1`,
//!
//! * `maximal_lhs = |Q|^{−1} ∫_Q b⁻` and `maximal_rhs = C_N |Q|^{β/n}`, where `C_N` is the
//!   supremum of the maximal characterizing functional (exponent `q`);
//! * `sharp_lhs = |b_Q| − |Q|^{−1} ∫_Q b⁺ + |Q|^{−1} ∫_Q b⁻` and
//!   `sharp_rhs = C'_N |Q|^{β/n}`, where `C'_N` is the sharp characterizing
//!   functional over dyadic cubes (informational).

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::grid::{Cube, CubeFamily, Grid, GridFunction};
use crate::lipschitz::{maximal_char_functional, sharp_char_functional};
use crate::weights::Weight;

use super::{Site, Tally, VerificationReport};

/// A closed-form profile on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Profile {
    pub name: String,
    pub eval: fn(f64) -> f64,
}

fn bump(u: f64) -> f64 {
    (-(u - 0.5).powi(2) / (2.0 * 0.15 * 0.15)).exp()
}

fn ramp(u: f64) -> f64 {
    u
}

fn holder07(u: f64) -> f64 {
    (u - 0.5).abs().powf(0.7)
}

fn signed_ramp(u: f64) -> f64 {
    2.0 * u - 1.0
}

#[derive(Clone, Debug)]
pub struct RefinementConfig {
    /// Resolutions, each a multiple of 4.
    pub levels: Vec<usize>,
    pub exponents: Exponents,
    /// Point `x₀` in `[0, 1]`; must sit on a cell boundary at every level.
    pub x0: f64,
    /// Profiles with `b ≥ 0`.
    pub nonnegative: Vec<Profile>,
    /// Sign-changing controls with `b⁻(x₀) > 0`.
    pub controls: Vec<Profile>,
    /// Relative tolerance of the fitted slope against `β/n`.
    pub slope_tolerance: f64,
    /// Relative tolerance of the control's finest `maximal_lhs` against `b⁻(x₀)`.
    pub control_tolerance: f64,
}

impl RefinementConfig {
    pub fn new() -> Result<RefinementConfig> {
        Ok(RefinementConfig {
            levels: vec![32, 64, 128, 256],
            exponents: Exponents::new(2.0, 0.25, 1)?,
            x0: 0.25,
            nonnegative: vec![
                Profile { name: "bump".into(), eval: bump },
                Profile { name: "ramp".into(), eval: ramp },
                Profile { name: "holder07".into(), eval: holder07 },
            ],
            controls: vec![Profile { name: "signed_ramp".into(), eval: signed_ramp }],
            slope_tolerance: 0.1,
            control_tolerance: 0.1,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRow {
    pub profile: String,
    pub n: usize,
    pub cube_measure: f64,
    pub maximal_lhs: f64,
    pub maximal_c: f64,
    pub maximal_rhs: f64,
    pub sharp_lhs: f64,
    pub sharp_c: f64,
    pub sharp_rhs: f64,
}

#[derive(Clone, Debug)]
pub struct RefinementTable {
    pub rows: Vec<RefinementRow>,
    /// Least-squares slope of `log maximal_rhs` against `log |Q|`, per profile.
    pub slopes: Vec<(String, f64)>,
    pub report: VerificationReport,
}

/// Slope of the least-squares line through `(x, y)`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn row(profile: &Profile, n: usize, config: &RefinementConfig) -> Result<RefinementRow> {
    let e = &config.exponents;
    let grid = Grid::unit(1, n)?;
    let b = GridFunction::from_profile(grid, |u| (profile.eval)(u[0]))?;
    let centre = (config.x0 * n as f64).round() as usize;
    let q = Cube::line(centre - 1, 2);
    let values = b.values_on(&q)?;
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let neg = values.iter().map(|v| (-v).max(0.0)).sum::<f64>() / len;
    let pos = values.iter().map(|v| v.max(0.0)).sum::<f64>() / len;
    let unit = Weight::unit(grid);
    let maximal_c = maximal_char_functional(&b, &unit, e.beta, e.q, &CubeFamily::all(grid))?.sup;
    let sharp_c = sharp_char_functional(&b, &unit, e.beta, e.q, &CubeFamily::dyadic(grid))?.sup;
    let measure = q.measure(&grid);
    let scale = measure.powf(e.beta_over_n());
    Ok(RefinementRow {
        profile: profile.name.clone(),
        n,
        cube_measure: measure,
        maximal_lhs: neg,
        maximal_c,
        maximal_rhs: maximal_c * scale,
        sharp_lhs: mean.abs() - pos + neg,
        sharp_c,
        sharp_rhs: sharp_c * scale,
    })
}

/// Tabulates both sides of the two limit inequalities over the levels.
///
/// For nonnegative profiles the suite asserts `maximal_lhs = 0`, a decreasing
/// right-hand side and a fitted slope within `slope_tolerance` of `β/n`.
/// For controls it asserts that the finest `maximal_lhs` lies within
/// `control_tolerance` of `b⁻(x₀)`.
pub fn refinement_experiment(config: &RefinementConfig) -> Result<RefinementTable> {
    if config.exponents.n != 1 {
        return Err(Error::InvalidParameter("the refinement experiment runs in one dimension".into()));
    }
    if config.levels.len() < 2 {
        return Err(Error::InvalidParameter("at least two levels are required".into()));
    }
    for &n in &config.levels {
        let c = config.x0 * n as f64;
        if n < 4 || c.fract() != 0.0 || c < 1.0 || c >= n as f64 {
            return Err(Error::InvalidParameter(format!("x0 = {} is not an interior cell boundary at N = {n}", config.x0)));
        }
    }
    let target = config.exponents.beta_over_n();
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut t = Tally::new();
    for profile in &config.nonnegative {
        let prof_rows: Vec<RefinementRow> = config.levels.iter().map(|&n| row(profile, n, config)).collect::<Result<_>>()?;
        let site = Site::new(&profile.name);
        for r in &prof_rows {
            t.le("maximal_lhs_vanishes", r.maximal_lhs, 0.0, 0.0, 0.0, site);
        }
        let (first, last) = (&prof_rows[0], &prof_rows[prof_rows.len() - 1]);
        t.check("maximal_rhs_decreases", last.maximal_rhs, first.maximal_rhs, last.maximal_rhs < first.maximal_rhs, site);
        let pts: Vec<(f64, f64)> = prof_rows.iter().map(|r| (r.cube_measure.ln(), r.maximal_rhs.ln())).collect();
        let slope = fit_slope(&pts);
        let ok = (slope - target).abs() <= config.slope_tolerance * target;
        t.check("maximal_rhs_slope", slope, target, ok, site);
        slopes.push((profile.name.clone(), slope));
        rows.extend(prof_rows);
    }
    for profile in &config.controls {
        let prof_rows: Vec<RefinementRow> = config.levels.iter().map(|&n| row(profile, n, config)).collect::<Result<_>>()?;
        let expected = (-(profile.eval)(config.x0)).max(0.0);
        let finest = prof_rows[prof_rows.len() - 1].maximal_lhs;
        let ok = (finest - expected).abs() <= config.control_tolerance * expected;
        t.check("control_maximal_lhs_limit", finest, expected, ok, Site::new(&profile.name));
        rows.extend(prof_rows);
    }
    let mut report = VerificationReport::new("refinement");
    report.absorb(t);
    for (name, s) in &slopes {
        report.stats.insert(format!("slope.{name}"), *s);
    }
    report.stats.insert("slope.target".into(), target);
    Ok(RefinementTable { rows, slopes, report })
}
