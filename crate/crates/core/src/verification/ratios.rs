//! Empirical-constant suites and the refinement-stability experiment.
//!
//! These suites have no target value. They fail only on non-finite
//! ratios, on vanishing denominators in more than half of the terms
//! (reported as [`Error::TooManySkipped`]) and, in the stability
//! experiment, on a change by more than [`REFINEMENT_FACTOR`] between two
//! resolutions.

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::grid::{CubeFamily, Grid};
use crate::lipschitz::{lip_norm, oscillation_bound_with_norm, pointwise_lip_constant};
use crate::maximal;
use crate::par;
use crate::prefix::PrefixTable;
use crate::weights::Weight;

use super::corpus::{build_corpus, weight_label, Corpus, CorpusSizes, Symbol};
use super::norms::{estimate_operator_norm, OperatorTag};
use super::{Site, Tally, VerificationReport, CHAIN_TOL, REFINEMENT_FACTOR};

/// Counts terms with a vanishing denominator.
#[derive(Clone, Copy, Debug, Default)]
struct Skips {
    skipped: usize,
    total: usize,
}

impl Skips {
    /// `num / den`, with `0/0 = 0`; `None` (and a skip) when only the
    /// denominator vanishes.
    fn ratio(&mut self, num: f64, den: f64) -> Option<f64> {
        self.total += 1;
        if num == 0.0 {
            Some(0.0)
        } else if den == 0.0 {
            self.skipped += 1;
            None
        } else {
            Some(num / den)
        }
    }

    fn merge(self, other: Skips) -> Skips {
        Skips { skipped: self.skipped + other.skipped, total: self.total + other.total }
    }

    fn finish(self, report: &mut VerificationReport) -> Result<()> {
        report.count("skipped", self.skipped);
        report.count("terms", self.total);
        if 2 * self.skipped > self.total {
            return Err(Error::TooManySkipped { skipped: self.skipped, total: self.total });
        }
        Ok(())
    }
}

/// Running supremum with the context of its first attainment.
#[derive(Clone, Debug)]
struct Sup {
    value: f64,
    witness: String,
}

impl Sup {
    fn new() -> Sup {
        Sup { value: 0.0, witness: String::new() }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> String) {
        if value > self.value || self.witness.is_empty() {
            self.value = value;
            self.witness = witness();
        }
    }

    fn publish(self, report: &mut VerificationReport, key: &str) {
        if !self.value.is_finite() {
            report.fail(super::Failure {
                check: format!("{key}_finite"),
                cube: None,
                point: None,
                lhs: self.value,
                rhs: f64::MAX,
                context: self.witness.clone(),
            });
        }
        report.stats.insert(key.to_string(), self.value);
        report.notes.push(format!("{key} attained at {}", self.witness));
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("beta = {beta} must lie in (0, 1)")))
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 1.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("r = {r} must exceed 1")))
    }
}

fn lipschitz_symbols(corpus: &Corpus) -> Vec<&Symbol> {
    corpus.lipschitz_symbols().collect()
}

fn weight_pairs(corpus: &Corpus) -> Vec<(usize, usize)> {
    let nb = lipschitz_symbols(corpus).len();
    (0..nb).flat_map(|b| (0..corpus.weights.len()).map(move |w| (b, w))).collect()
}

/// Pointwise Lipschitz constant `max |b(x) − b(y)| / (‖b‖ w(B)^{β/n} (w(x) + w(y)))`
/// over Lipschitz symbols and weights. Stat: `sup`.
pub fn verify_lemma21_pointwise(corpus: &Corpus, beta: f64) -> Result<VerificationReport> {
    check_beta(beta)?;
    let symbols = lipschitz_symbols(corpus);
    let pairs = weight_pairs(corpus);
    let values = par::map_slice(&pairs, |&(b, w)| pointwise_lip_constant(&symbols[b].function, &corpus.weights[w], beta));
    let mut report = VerificationReport::new("lemma21_pointwise");
    let mut sup = Sup::new();
    for (&(b, w), v) in pairs.iter().zip(values) {
        let v = v?;
        report.cases += 1;
        sup.offer(v, || format!("{}/{}", symbols[b].name, weight_label(w, &corpus.weights[w])));
    }
    sup.publish(&mut report, "sup");
    Ok(report)
}

/// Oscillation constant `max |b(x) − b_Q| / (‖b‖ w(Q)^{β/n} w(x))` over
/// cubes of the family, their points, Lipschitz symbols and weights.
/// Stat: `sup`.
pub fn verify_lemma22_oscillation(corpus: &Corpus, family: &CubeFamily, beta: f64) -> Result<VerificationReport> {
    check_beta(beta)?;
    let symbols = lipschitz_symbols(corpus);
    let pairs = weight_pairs(corpus);
    let values = par::map_slice(&pairs, |&(b, w)| -> Result<f64> {
        let (b, w) = (&symbols[b].function, &corpus.weights[w]);
        let norm = lip_norm(b, w, beta, 1.0, family)?.value;
        oscillation_bound_with_norm(b, w, beta, family, norm)
    });
    let mut report = VerificationReport::new("lemma22_oscillation");
    let mut sup = Sup::new();
    for (&(b, w), v) in pairs.iter().zip(values) {
        report.cases += 1;
        sup.offer(v?, || format!("{}/{}", symbols[b].name, weight_label(w, &corpus.weights[w])));
    }
    sup.publish(&mut report, "sup");
    Ok(report)
}

/// `M_{β,w,r}(f)` for every (function, weight) pair, function-major.
fn fractional_table(corpus: &Corpus, family: &CubeFamily, beta: f64, r: f64) -> Result<Vec<Vec<f64>>> {
    let nw = corpus.weights.len();
    let items: Vec<(usize, usize)> = (0..corpus.functions.len()).flat_map(|f| (0..nw).map(move |w| (f, w))).collect();
    par::map_slice(&items, |&(f, w)| -> Result<Vec<f64>> {
        let out = maximal::weighted_fractional_maximal(&corpus.functions[f].function, &corpus.weights[w], beta, r, family)?;
        Ok(out.values.into_values())
    })
    .into_iter()
    .collect()
}

/// `‖b‖_{Lip_{β,w}}` (exponent 1) for every (Lipschitz symbol, weight).
fn norm_table(corpus: &Corpus, family: &CubeFamily, beta: f64) -> Result<Vec<f64>> {
    let symbols = lipschitz_symbols(corpus);
    let pairs = weight_pairs(corpus);
    par::map_slice(&pairs, |&(b, w)| Ok(lip_norm(&symbols[b].function, &corpus.weights[w], beta, 1.0, family)?.value))
        .into_iter()
        .collect()
}

/// Domination ratio `M_b(f)(x) / (‖b‖ w(x) M_{β,w,r}(f)(x))`, maximised over
/// points, functions, Lipschitz symbols and weights. Stat: `sup`.
pub fn verify_lemma24_domination(corpus: &Corpus, family: &CubeFamily, beta: f64, r: f64) -> Result<VerificationReport> {
    check_beta(beta)?;
    check_r(r)?;
    let symbols = lipschitz_symbols(corpus);
    let nf = corpus.functions.len();
    let nw = corpus.weights.len();
    let frac = fractional_table(corpus, family, beta, r)?;
    let norms = norm_table(corpus, family, beta)?;
    let items: Vec<(usize, usize)> = (0..symbols.len()).flat_map(|b| (0..nf).map(move |f| (b, f))).collect();
    let parts = par::map_slice(&items, |&(b, f)| -> Result<(Skips, Sup, Tally)> {
        let mb = maximal::maximal_commutator(&symbols[b].function, &corpus.functions[f].function, family)?.values;
        let mut skips = Skips::default();
        let mut sup = Sup::new();
        let mut t = Tally::new();
        for w in 0..nw {
            let wv = corpus.weights[w].values();
            let fr = &frac[f * nw + w];
            let norm = norms[b * nw + w];
            let ctx = || format!("{}/{}/{}", symbols[b].name, corpus.functions[f].name, weight_label(w, &corpus.weights[w]));
            for x in 0..wv.len() {
                if let Some(v) = skips.ratio(mb.values()[x], norm * wv[x] * fr[x]) {
                    if !v.is_finite() {
                        t.check("finite", v, f64::MAX, false, Site::new(&ctx()).point(x));
                    }
                    sup.offer(v, || format!("{} at point {x}", ctx()));
                }
            }
        }
        Ok((skips, sup, t))
    });
    let mut report = VerificationReport::new("lemma24_domination");
    let mut skips = Skips::default();
    let mut sup = Sup::new();
    for part in parts {
        let (s, p, t) = part?;
        skips = skips.merge(s);
        report.absorb(t);
        sup.offer(p.value, || p.witness.clone());
    }
    report.cases = skips.total;
    skips.finish(&mut report)?;
    sup.publish(&mut report, "sup");
    Ok(report)
}

/// The two cube-average ratios, maximised over cubes `Q` of the family, points
/// `x ∈ Q`, functions, Lipschitz symbols and weights:
///
/// * `first`: `|Q|^{−1} ∫_Q |f| / (w(Q)^{−β/n} M_{β,w,r}(f)(x))`;
/// * `second`: `|Q|^{−1} ∫_Q |b − b_Q||f| / (‖b‖ M(w)(x) M_{β,w,r}(f)(x))`.
///
/// For a fixed cube the worst point minimises the denominator, so only
/// that point is evaluated.
pub fn verify_lemma25_ratios(corpus: &Corpus, family: &CubeFamily, beta: f64, r: f64) -> Result<VerificationReport> {
    check_beta(beta)?;
    check_r(r)?;
    let grid = corpus.grid;
    let dim = grid.dim();
    let symbols = lipschitz_symbols(corpus);
    let nf = corpus.functions.len();
    let nw = corpus.weights.len();
    let cubes = family.enumerate();
    let frac = fractional_table(corpus, family, beta, r)?;
    let norms = norm_table(corpus, family, beta)?;
    let mw: Vec<Vec<f64>> = corpus
        .weights
        .iter()
        .map(|w| Ok(maximal::hl_maximal(w.function(), family)?.values.into_values()))
        .collect::<Result<_>>()?;
    // Per (f, w) and cube: min over Q of M_frac and of M(w)·M_frac.
    let mins: Vec<Vec<(f64, f64)>> = par::map_range(nf * nw, |k| {
        let (fr, m) = (&frac[k], &mw[k % nw]);
        cubes
            .iter()
            .map(|q| {
                q.rect(dim).indices(&grid).fold((f64::INFINITY, f64::INFINITY), |(a, b), x| {
                    (a.min(fr[x]), b.min(m[x] * fr[x]))
                })
            })
            .collect()
    });
    let abs_tables: Vec<PrefixTable> = corpus.functions.iter().map(|m| PrefixTable::new(&m.function.abs())).collect();
    let sym_tables: Vec<PrefixTable> = symbols.iter().map(|s| PrefixTable::new(&s.function)).collect();

    let mut report = VerificationReport::new("lemma25_ratios");
    let mut skips = Skips::default();
    let mut first = Sup::new();
    let mut second = Sup::new();

    for f in 0..nf {
        for w in 0..nw {
            let mass_w = corpus.weights[w].table();
            let hn = grid.cell_measure();
            for (qi, q) in cubes.iter().enumerate() {
                let rect = q.rect(dim);
                let avg = abs_tables[f].box_mean(&rect);
                let wq = mass_w.box_sum(&rect) * hn;
                let den = wq.powf(-beta / dim as f64) * mins[f * nw + w][qi].0;
                if let Some(v) = skips.ratio(avg, den) {
                    first.offer(v, || {
                        format!("{}/{} on {:?}", corpus.functions[f].name, weight_label(w, &corpus.weights[w]), q)
                    });
                }
            }
        }
    }

    let items: Vec<(usize, usize)> = (0..symbols.len()).flat_map(|b| (0..nf).map(move |f| (b, f))).collect();
    let parts = par::map_slice(&items, |&(b, f)| {
        let bv = symbols[b].function.values();
        let fv = corpus.functions[f].function.values();
        let numerators: Vec<f64> = cubes
            .iter()
            .map(|q| {
                let rect = q.rect(dim);
                let mean = sym_tables[b].box_mean(&rect);
                let s: f64 = rect.indices(&grid).map(|k| (bv[k] - mean).abs() * fv[k].abs()).sum();
                s / rect.len() as f64
            })
            .collect();
        let mut skips = Skips::default();
        let mut sup = Sup::new();
        for w in 0..nw {
            let norm = norms[b * nw + w];
            let m = &mins[f * nw + w];
            for (qi, q) in cubes.iter().enumerate() {
                if let Some(v) = skips.ratio(numerators[qi], norm * m[qi].1) {
                    sup.offer(v, || {
                        format!(
                            "{}/{}/{} on {:?}",
                            symbols[b].name,
                            corpus.functions[f].name,
                            weight_label(w, &corpus.weights[w]),
                            q
                        )
                    });
                }
            }
        }
        (skips, sup)
    });
    for (s, p) in parts {
        skips = skips.merge(s);
        second.offer(p.value, || p.witness.clone());
    }
    report.cases = skips.total;
    skips.finish(&mut report)?;
    first.publish(&mut report, "first");
    second.publish(&mut report, "second");
    Ok(report)
}

/// Operator-norm estimates per (Lipschitz symbol, weight).
///
/// Stat `mb_over_lip` is the largest quotient `‖M_b‖ / ‖b‖_{Lip_{β,μ}}`.
/// For nonnegative symbols the suite asserts that the `[b, M]` estimate
/// does not exceed the `M_b` estimate and the `[b, M#]` estimate does not
/// exceed twice of it.
pub fn verify_operator_norms(corpus: &Corpus, family: &CubeFamily, exps: &Exponents) -> Result<VerificationReport> {
    let symbols = lipschitz_symbols(corpus);
    let pairs = weight_pairs(corpus);
    let parts = par::map_slice(&pairs, |&(b, w)| -> Result<(f64, Tally)> {
        let (sym, mu) = (symbols[b], &corpus.weights[w]);
        let norm = lip_norm(&sym.function, mu, exps.beta, 1.0, family)?.value;
        let mb = estimate_operator_norm(OperatorTag::MaximalCommutator, &sym.function, &corpus.functions, exps, mu, family)?;
        let mut t = Tally::new();
        if sym.nonnegative {
            let ctx = format!("{}/{}", sym.name, weight_label(w, mu));
            let cm = estimate_operator_norm(OperatorTag::CommutatorMaximal, &sym.function, &corpus.functions, exps, mu, family)?;
            let cs = estimate_operator_norm(OperatorTag::CommutatorSharp, &sym.function, &corpus.functions, exps, mu, family)?;
            t.le("commutator_maximal_norm", cm.sup_ratio, mb.sup_ratio, CHAIN_TOL, mb.sup_ratio, Site::new(&ctx));
            t.le("commutator_sharp_norm", cs.sup_ratio, 2.0 * mb.sup_ratio, CHAIN_TOL, mb.sup_ratio, Site::new(&ctx));
        }
        let quotient = if norm > 0.0 { mb.sup_ratio / norm } else { 0.0 };
        Ok((quotient, t))
    });
    let mut report = VerificationReport::new("operator_norms");
    let mut sup = Sup::new();
    for (&(b, w), part) in pairs.iter().zip(parts) {
        let (quotient, t) = part?;
        report.absorb(t);
        sup.offer(quotient, || format!("{}/{}", symbols[b].name, weight_label(w, &corpus.weights[w])));
    }
    sup.publish(&mut report, "mb_over_lip");
    Ok(report)
}

/// Parameters of the two-resolution stability experiment (1D, `h = 1/N`).
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityConfig {
    pub seed: u64,
    pub coarse: usize,
    pub fine: usize,
    pub exponents: Exponents,
    pub sizes: CorpusSizes,
    /// Minimal growth of the logarithmic control's Lipschitz norm.
    pub control_growth: f64,
}

impl StabilityConfig {
    pub fn new(seed: u64) -> Result<StabilityConfig> {
        Ok(StabilityConfig {
            seed,
            coarse: 64,
            fine: 128,
            exponents: Exponents::new(2.0, 0.3, 1)?.with_r(1.5)?,
            sizes: CorpusSizes::default(),
            control_growth: 1.2,
        })
    }
}

fn empirical_constants(grid: Grid, config: &StabilityConfig) -> Result<(Vec<(String, f64)>, f64)> {
    let corpus = build_corpus(config.seed, grid, config.sizes)?;
    let family = CubeFamily::all(grid);
    let e = &config.exponents;
    let r = e.r.ok_or_else(|| Error::InvalidExponents("the stability experiment needs r".into()))?;
    let l21 = verify_lemma21_pointwise(&corpus, e.beta)?;
    let l22 = verify_lemma22_oscillation(&corpus, &family, e.beta)?;
    let l24 = verify_lemma24_domination(&corpus, &family, e.beta, r)?;
    let l25 = verify_lemma25_ratios(&corpus, &family, e.beta, r)?;
    let ops = verify_operator_norms(&corpus, &family, e)?;
    let values = vec![
        ("lemma21".to_string(), l21.stats["sup"]),
        ("lemma22".to_string(), l22.stats["sup"]),
        ("lemma24".to_string(), l24.stats["sup"]),
        ("lemma25_first".to_string(), l25.stats["first"]),
        ("lemma25_second".to_string(), l25.stats["second"]),
        ("mb_over_lip".to_string(), ops.stats["mb_over_lip"]),
    ];
    let control = corpus
        .symbols
        .iter()
        .find(|s| !s.lipschitz)
        .ok_or_else(|| Error::InvalidParameter("the corpus has no logarithmic control".into()))?;
    let log_norm = lip_norm(&control.function, &Weight::unit(grid), e.beta, 1.0, &family)?.value;
    Ok((values, log_norm))
}

/// Runs the empirical-constant suites on the same continuum profiles at two
/// resolutions and checks that every supremum changes by at most
/// [`REFINEMENT_FACTOR`], while the Lipschitz norm of the logarithmic
/// control grows by at least `control_growth`.
pub fn stability_experiment(config: &StabilityConfig) -> Result<VerificationReport> {
    if config.fine <= config.coarse {
        return Err(Error::InvalidParameter("the fine level must exceed the coarse level".into()));
    }
    let (coarse, log_coarse) = empirical_constants(Grid::unit(1, config.coarse)?, config)?;
    let (fine, log_fine) = empirical_constants(Grid::unit(1, config.fine)?, config)?;
    let mut report = VerificationReport::new("stability");
    let mut t = Tally::new();
    for ((name, c), (_, f)) in coarse.iter().zip(&fine) {
        let change = if *c == 0.0 && *f == 0.0 { 1.0 } else { (f / c).max(c / f) };
        t.check(name, change, REFINEMENT_FACTOR, change.is_finite() && change <= REFINEMENT_FACTOR, Site::new(name));
        report.stats.insert(format!("{name}.coarse"), *c);
        report.stats.insert(format!("{name}.fine"), *f);
        report.stats.insert(format!("{name}.change"), change);
    }
    let growth = log_fine / log_coarse;
    t.check("log_control_growth", config.control_growth, growth, growth >= config.control_growth, Site::new("log control"));
    report.stats.insert("log_control.coarse".into(), log_coarse);
    report.stats.insert("log_control.fine".into(), log_fine);
    report.stats.insert("log_control.growth".into(), growth);
    report.absorb(t);
    Ok(report)
}
