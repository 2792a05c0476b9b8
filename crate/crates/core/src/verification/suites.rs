//! Exact identity and inequality suites.

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::grid::{Cube, CubeFamily, GridFunction};
use crate::lipschitz::{MaximalResiduals, Residuals, SharpResiduals};
use crate::maximal::engine::for_each_cube_containing;
use crate::maximal::{self, sharp_of_restriction};
use crate::par;
use crate::prefix::PrefixTable;
use crate::weights::{a1_constant, a1_constant_pointwise, doubling_ratio, Weight};

use super::corpus::{weight_label, Corpus};
use super::{leq, merge_all, Site, Tally, VerificationReport, CHAIN_TOL, IDENTITY_TOL, MONOTONE_TOL};

fn collect(tallies: Vec<Result<Tally>>) -> Result<Tally> {
    Ok(merge_all(tallies.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `|[b, M](f)| ≤ M_b(f)` and `|[b, M#](f)| ≤ 2 M_b(f)` at every point.
///
/// Symbols with negative values are expected-failure controls: their
/// violations are counted under `control_violations` and do not fail the
/// suite.
pub fn verify_pointwise_domination(corpus: &Corpus, family: &CubeFamily) -> Result<VerificationReport> {
    let pairs: Vec<(usize, usize)> =
        (0..corpus.symbols.len()).flat_map(|b| (0..corpus.functions.len()).map(move |f| (b, f))).collect();
    let tallies = par::map_slice(&pairs, |&(bi, fi)| -> Result<Tally> {
        let sym = &corpus.symbols[bi];
        let (b, f) = (&sym.function, &corpus.functions[fi].function);
        let cm = maximal::commutator_maximal(b, f, family)?;
        let cs = maximal::commutator_sharp(b, f, family)?;
        let mb = maximal::maximal_commutator(b, f, family)?.values;
        let scale = b.max_abs() * f.max_abs();
        let ctx = format!("{}/{}", sym.name, corpus.functions[fi].name);
        let mut t = Tally::new();
        for x in 0..b.grid().len() {
            let checks = [
                ("commutator_maximal", cm.values()[x].abs(), mb.values()[x]),
                ("commutator_sharp", cs.values()[x].abs(), 2.0 * mb.values()[x]),
            ];
            for (name, lhs, rhs) in checks {
                if sym.nonnegative {
                    t.le(name, lhs, rhs, IDENTITY_TOL, scale, Site::new(&ctx).point(x));
                } else if !leq(lhs, rhs, IDENTITY_TOL, scale) {
                    t.count("control_violations");
                }
            }
        }
        Ok(t)
    });
    let mut report = VerificationReport::new("pointwise_domination");
    report.absorb(collect(tallies)?);
    report.count("control_violations", 0);
    Ok(report)
}

/// Side `s'` of the superset cube whose density `θ = (s/s')ⁿ` makes
/// `θ(1 − θ)` largest, together with `θ`. `None` when `Q` has maximal side.
fn best_superset(dim: usize, side: usize, max_side: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for outer in side + 1..=max_side {
        let theta = (side as f64 / outer as f64).powi(dim as i32);
        if best.is_none_or(|(_, t)| theta * (1.0 - theta) > t * (1.0 - t)) {
            best = Some((outer, theta));
        }
    }
    best
}

/// Whether some in-domain cube containing the point `(i, j)` meets `q` in
/// exactly half of its points.
fn halving_cube_exists(corpus: &Corpus, q: &Cube, i: usize, j: usize) -> bool {
    let grid = corpus.grid;
    let dim = grid.dim();
    let qr = q.rect(dim);
    let mut found = false;
    for_each_cube_containing(&grid, &grid.full_rect(), i, j, |r| {
        let rr = r.rect(dim);
        let inter = rr.intersect(&qr).map_or(0, |x| x.len());
        if 2 * inter == rr.len() {
            found = true;
        }
    });
    found
}

/// The restriction identities of the cube indicator.
///
/// For every cube `Q` of `family` (operators always use the all-family):
///
/// 1. `M(χ_Q) = 1` on `Q`, exactly;
/// 2. `M(b χ_Q) = M_Q(b)` on `Q`;
/// 3. `M#(χ_Q) ≤ 1/2` everywhere, with equality at points of `Q` lying in
///    a cube that `Q` halves;
/// 4. `|b_Q| ≤ 2 M#(b χ_Q)` on `Q` when a cube of twice the measure of `Q`
///    containing `Q` fits in the domain (counted as `margin_infeasible`
///    otherwise);
/// 5. `4θ(1 − θ)|b_Q| ≤ 2 M#(b χ_Q)` on `Q` for the in-domain superset of
///    density `θ` closest to 1/2.
pub fn verify_restriction_identities(corpus: &Corpus, family: &CubeFamily) -> Result<VerificationReport> {
    let grid = corpus.grid;
    grid.ensure_same(&family.grid)?;
    let dim = grid.dim();
    let all = CubeFamily::all(grid);
    let cubes = family.enumerate();
    let tables: Vec<PrefixTable> = corpus.symbols.iter().map(|s| PrefixTable::new(&s.function)).collect();
    let tallies = par::map_slice(&cubes, |q| -> Result<Tally> {
        let mut t = Tally::new();
        let qr = q.rect(dim);
        let chi = GridFunction::indicator(grid, q)?;
        let m_chi = maximal::hl_maximal(&chi, &all)?.values;
        let s_chi = maximal::sharp_maximal(&chi, &all)?.values;
        for k in qr.indices(&grid) {
            let site = Site::new("indicator").cube(*q).point(k);
            t.le("maximal_indicator", (m_chi.values()[k] - 1.0).abs(), 0.0, 0.0, 0.0, site);
            let (i, j) = grid.coords(k);
            if halving_cube_exists(corpus, q, i, j) {
                t.count("halving_feasible");
                t.eq("sharp_indicator_half", s_chi.values()[k], 0.5, IDENTITY_TOL, 0.0, site);
            } else {
                t.count("halving_infeasible");
            }
        }
        for k in 0..grid.len() {
            t.le("sharp_indicator_bound", s_chi.values()[k], 0.5, IDENTITY_TOL, 0.0, Site::new("indicator").cube(*q).point(k));
        }
        let superset = best_superset(dim, q.side, grid.max_side());
        let doubling_fits = dim == 1 && 2 * q.side <= grid.max_side();
        for (sym, table) in corpus.symbols.iter().zip(&tables) {
            let b = &sym.function;
            let on_q = b.values_on(q)?;
            let floor = on_q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let global = maximal::hl_maximal(&b.restrict(q)?, &all)?.values;
            let local = maximal::restricted_maximal(b, q, &all)?.values_on_q0();
            for (k, &m_q) in qr.indices(&grid).zip(&local) {
                let site = Site::new(&sym.name).cube(*q).point(k);
                t.eq("restricted_maximal", global.values()[k], m_q, IDENTITY_TOL, floor, site);
            }
            let mean = table.cube_mean(q)?;
            let sharp = sharp_of_restriction(b, q, table)?;
            if !doubling_fits {
                t.count("margin_infeasible");
            }
            for (k, &s) in qr.indices(&grid).zip(&sharp) {
                let site = Site::new(&sym.name).cube(*q).point(k);
                if doubling_fits {
                    t.le("mean_below_twice_sharp", mean.abs(), 2.0 * s, IDENTITY_TOL, floor, site);
                }
                if let Some((_, theta)) = superset {
                    let lower = 4.0 * theta * (1.0 - theta) * mean.abs();
                    t.le("mean_below_twice_sharp_general", lower, 2.0 * s, IDENTITY_TOL, floor, site);
                }
            }
        }
        Ok(t)
    });
    let mut report = VerificationReport::new("restriction_identities");
    report.absorb(collect(tallies)?);
    for key in ["halving_feasible", "halving_infeasible", "margin_infeasible"] {
        report.count(key, 0);
    }
    Ok(report)
}

/// `∫_E |b − b_Q| = ∫_F |b − b_Q|` for `E = {b ≤ b_Q}` and `F = Q \ E`.
///
/// Tolerance: `1e−10 · max(E, F)` plus a rounding floor of `64 ε Σ_Q |b| hⁿ`.
pub fn verify_mean_split(corpus: &Corpus, family: &CubeFamily) -> Result<VerificationReport> {
    let grid = corpus.grid;
    grid.ensure_same(&family.grid)?;
    let dim = grid.dim();
    let hn = grid.cell_measure();
    let cubes = family.enumerate();
    let mut report = VerificationReport::new("mean_split");
    for sym in &corpus.symbols {
        let b = sym.function.values();
        let table = PrefixTable::new(&sym.function);
        let tallies = par::map_slice(&cubes, |q| {
            let r = q.rect(dim);
            let mean = table.box_mean(&r);
            let (mut e, mut f, mut mass) = (0.0, 0.0, 0.0);
            for k in r.indices(&grid) {
                if b[k] <= mean {
                    e += mean - b[k];
                } else {
                    f += b[k] - mean;
                }
                mass += b[k].abs();
            }
            let (e, f, mass) = (e * hn, f * hn, mass * hn);
            let mut t = Tally::new();
            let ok = (e - f).abs() <= CHAIN_TOL * e.max(f) + 64.0 * f64::EPSILON * mass;
            t.check("mean_split", e, f, ok, Site::new(&sym.name).cube(*q));
            t
        });
        report.absorb(merge_all(tallies));
    }
    Ok(report)
}

/// The three links of the converse chain, per symbol and cube:
///
/// * (a) `μ(Q)^{−1−β/n} ∫_Q |b − b_Q| ≤ μ(Q)^{−1−β/n} ∫_Q M_b(χ_Q)`;
/// * (b) `∫_Q |b − b_Q| ≤ 2 ∫_Q |b − M_Q(b)|` for `b ≥ 0` (violations by
///   sign-changing controls are counted as `control_violations`);
/// * (c) `μ(Q)^{−1−β/n} ∫_Q |b − M_Q(b)| ≤` the maximal characterizing
///   functional of `Q` with exponent `q`.
pub fn verify_converse_chain(
    corpus: &Corpus,
    family: &CubeFamily,
    exps: &Exponents,
    mu: &Weight,
) -> Result<VerificationReport> {
    let grid = corpus.grid;
    grid.ensure_same(&family.grid)?;
    grid.ensure_same(mu.grid())?;
    let dim = grid.dim();
    let hn = grid.cell_measure();
    let beta_n = exps.beta / dim as f64;
    let mut report = VerificationReport::new("converse_chain");
    for sym in &corpus.symbols {
        let b = sym.function.values();
        let table = PrefixTable::new(&sym.function);
        let residuals = MaximalResiduals::new(&sym.function, family)?;
        let tallies = par::map_range(residuals.cubes().len(), |i| -> Result<Tally> {
            let q = residuals.cubes()[i];
            let r = q.rect(dim);
            let mean = table.box_mean(&r);
            let osc: f64 = r.indices(&grid).map(|k| (b[k] - mean).abs()).sum::<f64>() * hn;
            let mass: f64 = r.indices(&grid).map(|k| b[k].abs()).sum::<f64>() * hn;
            let mb: f64 = maximal::maximal_commutator_of_indicator(&sym.function, &q)?.iter().sum::<f64>() * hn;
            let res: f64 = residuals.on_cube(i).iter().sum::<f64>() * hn;
            let norm = mu.measure_rect(&r).powf(-1.0 - beta_n);
            let site = Site::new(&sym.name).cube(q);
            let mut t = Tally::new();
            t.le("oscillation_below_maximal_commutator", norm * osc, norm * mb, CHAIN_TOL, norm * mass, site);
            if sym.nonnegative {
                t.le("oscillation_below_twice_residual", osc, 2.0 * res, CHAIN_TOL, mass, site);
            } else if !leq(osc, 2.0 * res, CHAIN_TOL, mass) {
                t.count("control_violations");
            }
            let functional = residuals.cube_value(i, mu, exps.beta, exps.q);
            t.le("holder_link", norm * res, functional, CHAIN_TOL, norm * mass, site);
            Ok(t)
        });
        report.absorb(collect(tallies)?);
    }
    report.count("control_violations", 0);
    Ok(report)
}

fn monotone_checks(
    t: &mut Tally,
    residuals: &Residuals,
    name: &str,
    mu: &Weight,
    beta: f64,
    s_list: &[f64],
    context: &str,
) {
    for i in 0..residuals.cubes().len() {
        let values: Vec<f64> = s_list.iter().map(|&s| residuals.cube_value(i, mu, beta, s)).collect();
        for w in values.windows(2) {
            t.le(name, w[0], w[1], MONOTONE_TOL, 0.0, Site::new(context).cube(residuals.cubes()[i]));
        }
    }
}

/// Per-cube monotonicity in `s` of both characterizing functionals, for
/// every symbol and weight of the corpus.
pub fn verify_holder_monotonicity(
    corpus: &Corpus,
    family: &CubeFamily,
    beta: f64,
    s_list: &[f64],
) -> Result<VerificationReport> {
    corpus.grid.ensure_same(&family.grid)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must lie in (0, 1)")));
    }
    let mut sorted = s_list.to_vec();
    if sorted.iter().any(|&s| !(s >= 1.0 && s.is_finite())) {
        return Err(Error::InvalidParameter("every s must be finite and at least 1".into()));
    }
    sorted.sort_by(f64::total_cmp);
    let mut report = VerificationReport::new("holder_monotonicity");
    for sym in &corpus.symbols {
        let maximal = MaximalResiduals::new(&sym.function, family)?;
        let sharp = SharpResiduals::new(&sym.function, family)?;
        let tallies = par::map_range(corpus.weights.len(), |i| {
            let mu = &corpus.weights[i];
            let mut t = Tally::new();
            let ctx = format!("{}/{}", sym.name, weight_label(i, mu));
            monotone_checks(&mut t, &maximal, "maximal_functional", mu, beta, &sorted, &ctx);
            monotone_checks(&mut t, &sharp, "sharp_functional", mu, beta, &sorted, &ctx);
            t
        });
        report.absorb(merge_all(tallies));
    }
    Ok(report)
}

/// Per cube, the maximal characterizing functional with exponent `q`
/// equals `μ(Q)^{−1/p} (Σ_Q |b M(χ_Q) − M(b χ_Q)|^q μ^{1−q} hⁿ)^{1/q}`,
/// where `M` is the global all-family maximal function. Uses the
/// nonnegative symbols.
pub fn verify_commutator_identity(
    corpus: &Corpus,
    family: &CubeFamily,
    exps: &Exponents,
    mu: &Weight,
) -> Result<VerificationReport> {
    let grid = corpus.grid;
    grid.ensure_same(&family.grid)?;
    grid.ensure_same(mu.grid())?;
    let dim = grid.dim();
    let hn = grid.cell_measure();
    let all = CubeFamily::all(grid);
    let w = mu.values();
    let mut report = VerificationReport::new("commutator_identity");
    for sym in corpus.nonnegative_symbols() {
        let b = &sym.function;
        let residuals = MaximalResiduals::new(b, family)?;
        let tallies = par::map_range(residuals.cubes().len(), |i| -> Result<Tally> {
            let q = residuals.cubes()[i];
            let r = q.rect(dim);
            let m_chi = maximal::hl_maximal(&GridFunction::indicator(grid, &q)?, &all)?.values;
            let m_bq = maximal::hl_maximal(&b.restrict(&q)?, &all)?.values;
            let sum: f64 = r
                .indices(&grid)
                .map(|k| {
                    let g = (b.values()[k] * m_chi.values()[k] - m_bq.values()[k]).abs();
                    g.powf(exps.q) * w[k].powf(1.0 - exps.q)
                })
                .sum();
            let rhs = mu.measure_rect(&r).powf(-1.0 / exps.p) * (sum * hn).powf(1.0 / exps.q);
            let lhs = residuals.cube_value(i, mu, exps.beta, exps.q);
            let mut t = Tally::new();
            t.eq("commutator_identity", lhs, rhs, IDENTITY_TOL, 0.0, Site::new(&sym.name).cube(q));
            Ok(t)
        });
        report.absorb(collect(tallies)?);
    }
    Ok(report)
}

/// `a1_constant` agrees with `max M(w)/w`, and `w(3Q) ≤ 3ⁿ [w]_{A_1} w(Q)`
/// for every cube of the family whose tripled cube fits in the domain
/// (others are counted as `dilate_out_of_domain`).
pub fn verify_a1_consistency(corpus: &Corpus, family: &CubeFamily) -> Result<VerificationReport> {
    let grid = corpus.grid;
    grid.ensure_same(&family.grid)?;
    let cubes = family.enumerate();
    let factor = 3f64.powi(grid.dim() as i32);
    let mut report = VerificationReport::new("a1_consistency");
    for (i, w) in corpus.weights.iter().enumerate() {
        let name = &weight_label(i, w);
        let a1 = a1_constant(w, family)?;
        let pointwise = a1_constant_pointwise(w, family)?;
        let mut t = Tally::new();
        t.eq("a1_cube_vs_pointwise", a1, pointwise, IDENTITY_TOL, 0.0, Site::new(name));
        for q in &cubes {
            match doubling_ratio(w, q) {
                Ok(r) => {
                    t.le("doubling", r, factor * a1, 1e-9, 0.0, Site::new(name).cube(*q));
                }
                Err(Error::DilateOutOfDomain { .. }) => t.count("dilate_out_of_domain"),
                Err(e) => return Err(e),
            }
        }
        report.absorb(t);
        report.stat_max(&format!("a1.{name}"), a1);
    }
    report.count("dilate_out_of_domain", 0);
    Ok(report)
}
