//! The branch `q` of `sqrt(prod (zeta - k_i))` normalized by `q ~ zeta^n` at infinity.
//!
//! A product of principal square roots of the individual factors already has
//! this normalization: each factor's cut runs left from its endpoint, so a
//! point of the real axis sits on an even number of cuts in every gap and
//! beyond the slits, and on an odd number inside a slit. The product is
//! therefore continuous off the slits and jumps only across them.

use crate::error::{Error, Result};
use crate::model::{SlitConfiguration, C64};

/// Bank of a double-sided slit: `Upper` is approached from `Im zeta > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Bank {
    Upper,
    Lower,
}

impl Bank {
    pub fn sign(self) -> f64 {
        match self {
            Bank::Upper => 1.0,
            Bank::Lower => -1.0,
        }
    }

    pub fn flip(self) -> Bank {
        match self {
            Bank::Upper => Bank::Lower,
            Bank::Lower => Bank::Upper,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Bank::Upper => '+',
            Bank::Lower => '-',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    endpoints: Vec<f64>,
}

impl Branch {
    pub fn new(cfg: &SlitConfiguration) -> Self {
        Self {
            endpoints: cfg.endpoints.clone(),
        }
    }

    pub fn from_endpoints(endpoints: Vec<f64>) -> Self {
        Self { endpoints }
    }

    pub fn n(&self) -> usize {
        self.endpoints.len() / 2
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn slit(&self, j: usize) -> (f64, f64) {
        (self.endpoints[2 * j], self.endpoints[2 * j + 1])
    }

    fn on_slit(&self, z: C64) -> bool {
        z.im == 0.0
            && self
                .endpoints
                .chunks_exact(2)
                .any(|p| p[0] <= z.re && z.re <= p[1])
    }

    /// `q(zeta)` off the closed slits.
    pub fn eval_q(&self, z: C64) -> Result<C64> {
        if self.on_slit(z) {
            return Err(Error::OnSlit(z.to_string()));
        }
        Ok(self.eval_q_unchecked(z))
    }

    pub(crate) fn eval_q_unchecked(&self, z: C64) -> C64 {
        self.endpoints
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &k| acc * (z - k).sqrt())
    }

    /// `|q(xi)| = sqrt(|p(xi)|)` for real `xi`.
    pub fn abs_q(&self, xi: f64) -> f64 {
        self.endpoints
            .iter()
            .fold(1.0, |acc, &k| acc * (xi - k).abs().sqrt())
    }

    /// Sign `s` with `q = s i |q|` on the upper bank of slit `m`.
    pub fn upper_sign(&self, m: usize) -> f64 {
        if (self.n() - 1 - m).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Limit of `q` on a bank of slit `m`; zero at the endpoints.
    pub fn bank_value(&self, m: usize, xi: f64, bank: Bank) -> C64 {
        C64::new(0.0, bank.sign() * self.upper_sign(m) * self.abs_q(xi))
    }

    /// `|q(xi)| / sqrt((xi - a)(b - xi))` on slit `j = [a, b]`: the smooth,
    /// strictly positive remainder once the vanishing factors are removed.
    pub fn weight_factor(&self, j: usize, xi: f64) -> f64 {
        self.endpoints
            .iter()
            .enumerate()
            .filter(|(i, _)| i / 2 != j)
            .fold(1.0, |acc, (_, &k)| acc * (xi - k).abs().sqrt())
    }
}
