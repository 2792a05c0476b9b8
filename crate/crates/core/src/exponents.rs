use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validated exponent triple `(p, β, q)` with `1/q = 1/p − β/n`, plus the
/// auxiliary `r` (fractional maximal power) and `s` (functional exponent).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub n: usize,
    pub r: Option<f64>,
    pub s: Option<f64>,
}

impl Exponents {
    pub fn new(p: f64, beta: f64, n: usize) -> Result<Exponents> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidExponents(format!("dimension {n} not in {{1, 2}}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidExponents(format!("beta = {beta} must lie in (0, 1)")));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponents(format!("p = {p} must exceed 1")));
        }
        let limit = n as f64 / beta;
        if p >= limit {
            return Err(Error::InvalidExponents(format!("p = {p} must be below n/beta = {limit}")));
        }
        let q = 1.0 / (1.0 / p - beta / n as f64);
        Ok(Exponents { p, beta, q, n, r: None, s: None })
    }

    /// Accepts an explicit `q` and checks the scaling relation to 1e−12.
    pub fn with_q(p: f64, beta: f64, q: f64, n: usize) -> Result<Exponents> {
        let e = Exponents::new(p, beta, n)?;
        if ((1.0 / q) - (1.0 / p - beta / n as f64)).abs() > 1e-12 {
            return Err(Error::InvalidExponents(format!("1/q = {} but 1/p - beta/n = {}", 1.0 / q, 1.0 / e.q)));
        }
        Ok(Exponents { q, ..e })
    }

    /// Sets `r`, which must lie in `(1, p)`.
    pub fn with_r(self, r: f64) -> Result<Exponents> {
        if !(r > 1.0 && r < self.p) {
            return Err(Error::InvalidExponents(format!("r = {r} must lie in (1, p = {})", self.p)));
        }
        Ok(Exponents { r: Some(r), ..self })
    }

    pub fn with_s(self, s: f64) -> Result<Exponents> {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::InvalidExponents(format!("s = {s} must be at least 1")));
        }
        Ok(Exponents { s: Some(s), ..self })
    }

    /// `β/n`, the fractional order per dimension.
    pub fn beta_over_n(&self) -> f64 {
        self.beta / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_relation() {
        let e = Exponents::new(2.0, 0.25, 1).unwrap();
        assert!((e.q - 4.0).abs() < 1e-12);
        let e2 = Exponents::new(2.0, 0.25, 2).unwrap();
        assert!((1.0 / e2.q - (0.5 - 0.125)).abs() < 1e-15);
        assert!(Exponents::with_q(2.0, 0.25, 4.0, 1).is_ok());
        assert!(Exponents::with_q(2.0, 0.25, 5.0, 1).is_err());
    }

    #[test]
    fn infeasible_exponents_rejected() {
        assert!(Exponents::new(4.0, 0.25, 1).is_err()); // p = n/beta
        assert!(Exponents::new(1.0, 0.25, 1).is_err());
        assert!(Exponents::new(2.0, 1.0, 1).is_err());
        assert!(Exponents::new(2.0, 0.0, 1).is_err());
        assert!(Exponents::new(2.0, 0.5, 3).is_err());
        let e = Exponents::new(2.0, 0.25, 1).unwrap();
        assert!(e.with_r(1.5).is_ok());
        assert!(e.with_r(2.0).is_err());
        assert!(e.with_s(0.5).is_err());
    }
}
