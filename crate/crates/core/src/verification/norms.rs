//! Weighted Lebesgue norms and corpus-based operator-norm estimates.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::grid::{CubeFamily, GridFunction};
use crate::maximal;
use crate::par;
use crate::weights::Weight;

use super::corpus::Member;

/// `‖f‖_{L^p(μ)} = (Σ |f|^p μ hⁿ)^{1/p}`.
pub fn weighted_lp_norm(f: &GridFunction, p: f64, mu: &Weight) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be finite and at least 1")));
    }
    f.grid().ensure_same(mu.grid())?;
    let hn = f.grid().cell_measure();
    let sum: f64 = f.values().iter().zip(mu.values()).map(|(&v, &w)| v.abs().powf(p) * w).sum();
    Ok((sum * hn).powf(1.0 / p))
}

/// `‖g‖_{L^q(μ^{1−q})} = (Σ |g|^q μ^{1−q} hⁿ)^{1/q}`.
pub fn target_norm(g: &GridFunction, q: f64, mu: &Weight) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q = {q} must be finite and at least 1")));
    }
    g.grid().ensure_same(mu.grid())?;
    let hn = g.grid().cell_measure();
    let sum: f64 = g.values().iter().zip(mu.values()).map(|(&v, &w)| v.abs().powf(q) * w.powf(1.0 - q)).sum();
    Ok((sum * hn).powf(1.0 / q))
}

/// Operators whose norm can be estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorTag {
    /// `M_b`.
    MaximalCommutator,
    /// `[b, M]`.
    CommutatorMaximal,
    /// `[b, M#]`.
    CommutatorSharp,
    /// `M_{β,μ,r}` from `L^p(μ)` to `L^q(μ)`.
    FractionalMaximal,
}

impl FromStr for OperatorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<OperatorTag> {
        match s {
            "Mb" | "mb" => Ok(OperatorTag::MaximalCommutator),
            "bM" | "commutator" => Ok(OperatorTag::CommutatorMaximal),
            "bMsharp" | "commutator-sharp" => Ok(OperatorTag::CommutatorSharp),
            "frac" | "fractional" => Ok(OperatorTag::FractionalMaximal),
            _ => Err(Error::Parse(format!("unknown operator `{s}` (expected Mb, bM, bMsharp or frac)"))),
        }
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OperatorTag::MaximalCommutator => "Mb",
            OperatorTag::CommutatorMaximal => "bM",
            OperatorTag::CommutatorSharp => "bMsharp",
            OperatorTag::FractionalMaximal => "frac",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub op: OperatorTag,
    pub exponents: Exponents,
    pub sup_ratio: f64,
    /// Name of the first function attaining `sup_ratio`.
    pub witness: Option<String>,
    /// Functions with nonzero norm that entered the supremum.
    pub n_samples: usize,
    /// `(function name, ratio)` in input order; excluded functions get 0.
    pub ratios: Vec<(String, f64)>,
}

/// Applies an operator and returns the output grid function.
pub fn apply_operator(
    op: OperatorTag,
    b: &GridFunction,
    f: &GridFunction,
    exps: &Exponents,
    mu: &Weight,
    family: &CubeFamily,
) -> Result<GridFunction> {
    match op {
        OperatorTag::MaximalCommutator => Ok(maximal::maximal_commutator(b, f, family)?.values),
        OperatorTag::CommutatorMaximal => maximal::commutator_maximal(b, f, family),
        OperatorTag::CommutatorSharp => maximal::commutator_sharp(b, f, family),
        OperatorTag::FractionalMaximal => {
            let r = exps.r.ok_or_else(|| Error::InvalidExponents("the fractional operator needs r".into()))?;
            Ok(maximal::weighted_fractional_maximal(f, mu, exps.beta, r, family)?.values)
        }
    }
}

/// `sup_f ‖op(f)‖_target / ‖f‖_{L^p(μ)}` over the test functions.
///
/// The target is `L^q(μ^{1−q})` for the commutators and `L^q(μ)` for the
/// fractional maximal operator, which ignores `b`. Functions with
/// `‖f‖ = 0` are excluded.
pub fn estimate_operator_norm(
    op: OperatorTag,
    b: &GridFunction,
    functions: &[Member],
    exps: &Exponents,
    mu: &Weight,
    family: &CubeFamily,
) -> Result<NormEstimate> {
    if functions.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if op == OperatorTag::FractionalMaximal && exps.r.is_none() {
        return Err(Error::InvalidExponents("the fractional operator needs r".into()));
    }
    let ratios = par::map_slice(functions, |m| -> Result<Option<f64>> {
        let denom = weighted_lp_norm(&m.function, exps.p, mu)?;
        if denom == 0.0 {
            return Ok(None);
        }
        let g = apply_operator(op, b, &m.function, exps, mu, family)?;
        let num = match op {
            OperatorTag::FractionalMaximal => weighted_lp_norm(&g, exps.q, mu)?,
            _ => target_norm(&g, exps.q, mu)?,
        };
        Ok(Some(num / denom))
    });
    let mut sup_ratio = 0.0;
    let mut witness = None;
    let mut n_samples = 0;
    let mut all = Vec::with_capacity(functions.len());
    for (m, r) in functions.iter().zip(ratios) {
        match r? {
            Some(r) => {
                n_samples += 1;
                if witness.is_none() || r > sup_ratio {
                    sup_ratio = r;
                    witness = Some(m.name.clone());
                }
                all.push((m.name.clone(), r));
            }
            None => all.push((m.name.clone(), 0.0)),
        }
    }
    if n_samples == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(NormEstimate { op, exponents: *exps, sup_ratio, witness, n_samples, ratios: all })
}
