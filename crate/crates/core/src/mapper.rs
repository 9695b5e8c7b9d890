//! The conformal map `omega` and the auxiliary function `F` by quadratures.
//!
//! With `s_j` the upper-bank sign of `q` on slit `j` and `C_j` the Cauchy
//! integral over slit `j`, the two solutions are
//!
//! ```text
//!     F(z)      = beta_0 + P(z) + q(z) / (pi i) sum_j s_j C_j[f_j / |q|](z)
//!     i tb w(z) = sum_j (-1)^j lambda_j / pi * C_j[g_1](z)
//!               + (-1)^n i q(z) / pi * sum_j (-1)^j lambda_j C_j[(g_0 + rho'_j) / |q|](z)
//! ```
//!
//! where `P` is the separated pole (or linear) part, `f_j = a_j - Im P`,
//! `tb = tau_bar` and `w = omega_0` is `omega` minus its own separated part
//! and the translation. Boundary values follow from the Plemelj formulas:
//! each Cauchy integral over the slit carrying the target point is replaced
//! by its principal value plus the local jump term. Products with `q` are
//! formed before dividing out the endpoint weight, so every boundary value
//! stays finite up to and including the slit endpoints.

use std::f64::consts::PI;

use serde::Serialize;

use crate::branch::{Bank, Branch};
use crate::error::{Error, Result};
use crate::model::{DerivedConstants, FreeParameters, Loading, MaterialSet, NumericsConfig, ZetaInf, C64};
use crate::quadrature::{cheb_coeffs, cheb_lobatto, ChebyshevSeries};
use crate::solvability::SolvabilityConstants;

fn alt(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Chebyshev representations of the smooth parts of all slit densities.
#[derive(Clone, Debug, Serialize)]
pub struct DensityTable {
    /// `(a_j - Im P) / r_j`
    pub first: Vec<ChebyshevSeries>,
    /// `g_1 / (|q| / r_j)`: `g_1 = h sqrt((xi - a)(b - xi))` with `h` this series.
    pub g1: Vec<ChebyshevSeries>,
    /// The `g1` series multiplied by `(xi - a)(b - xi)`, ready for the Cauchy kernel.
    pub g1_weighted: Vec<ChebyshevSeries>,
    /// `(g_0 + rho'_j) / r_j`
    pub second: Vec<ChebyshevSeries>,
}

impl DensityTable {
    pub fn max_truncation_ratio(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.g1)
            .chain(&self.second)
            .fold(0.0f64, |m, s| m.max(s.truncation_ratio()))
    }
}

/// A boundary sample: the image of `xi` on the given bank of slit `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryValue {
    pub xi: f64,
    pub slit: usize,
    pub bank: Bank,
    pub z: C64,
}

#[derive(Clone, Debug)]
pub struct Mapper {
    branch: Branch,
    derived: DerivedConstants,
    constants: SolvabilityConstants,
    gamma: C64,
    beta0: f64,
    table: DensityTable,
}

impl Mapper {
    pub fn new(
        branch: Branch,
        derived: DerivedConstants,
        constants: SolvabilityConstants,
        free: &FreeParameters,
        numerics: &NumericsConfig,
    ) -> Self {
        let n = branch.n();
        let (nodes, order) = (numerics.nodes, numerics.order);
        let first: Vec<ChebyshevSeries> = (0..n)
            .map(|j| {
                let (a, b) = branch.slit(j);
                let aj = constants.a[j];
                cheb_coeffs(
                    |x| (aj - derived.pole_im(x)) / branch.weight_factor(j, x),
                    a,
                    b,
                    nodes,
                    order,
                )
            })
            .collect();
        let s_at = |m: usize, x: f64| -> f64 {
            (0..n)
                .map(|j| {
                    let v = if j == m {
                        first[j].singular_on(x)
                    } else {
                        first[j].cauchy_off_real(x)
                    };
                    alt(j) * v
                })
                .sum::<f64>()
                / PI
        };
        let g1: Vec<ChebyshevSeries> = (0..n)
            .map(|j| {
                let (a, b) = branch.slit(j);
                cheb_coeffs(|x| branch.weight_factor(j, x) * s_at(j, x), a, b, nodes, order)
            })
            .collect();
        let g1_weighted = g1.iter().map(ChebyshevSeries::times_weight).collect();
        let second = (0..n)
            .map(|j| {
                let (a, b) = branch.slit(j);
                let rp = constants.rho_prime[j];
                cheb_coeffs(
                    |x| (derived.g0(j, x) + rp) / branch.weight_factor(j, x),
                    a,
                    b,
                    nodes,
                    order,
                )
            })
            .collect();
        Self {
            branch,
            derived,
            constants,
            gamma: free.gamma,
            beta0: free.beta0,
            table: DensityTable {
                first,
                g1,
                g1_weighted,
                second,
            },
        }
    }

    pub fn n(&self) -> usize {
        self.branch.n()
    }

    pub fn branch(&self) -> &Branch {
        &self.branch
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    pub fn constants(&self) -> &SolvabilityConstants {
        &self.constants
    }

    pub fn table(&self) -> &DensityTable {
        &self.table
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    fn slit_of(&self, m: usize) -> (f64, f64) {
        self.branch.slit(m)
    }

    fn sqrt_weight(&self, m: usize, xi: f64) -> f64 {
        let (a, b) = self.slit_of(m);
        ((xi - a).max(0.0) * (b - xi).max(0.0)).sqrt()
    }

    pub fn g0(&self, j: usize, xi: f64) -> f64 {
        self.derived.g0(j, xi)
    }

    /// `g_1` on slit `m` evaluated directly from the first-problem densities.
    pub fn g1(&self, m: usize, xi: f64) -> f64 {
        let s: f64 = (0..self.n())
            .map(|j| {
                let v = if j == m {
                    self.table.first[j].singular_on(xi)
                } else {
                    self.table.first[j].cauchy_off_real(xi)
                };
                alt(j) * v
            })
            .sum();
        self.branch.abs_q(xi) * s / PI
    }

    /// `g_1` from its Chebyshev representation.
    fn g1_series(&self, m: usize, xi: f64) -> f64 {
        self.table.g1[m].eval(xi) * self.sqrt_weight(m, xi)
    }

    /// The separated singular part of `omega`.
    fn omega_singular(&self, z: C64) -> C64 {
        match self.derived.zeta_inf {
            ZetaInf::Finite(p) => self.derived.c_m1 / (z - p),
            ZetaInf::AtInfinity => self.derived.c_m1 * z,
        }
    }

    fn f_singular(&self, z: C64) -> C64 {
        match self.derived.zeta_inf {
            ZetaInf::Finite(p) => self.derived.c / (z - p),
            ZetaInf::AtInfinity => self.derived.c * z,
        }
    }

    fn check_interior(&self, z: C64) -> Result<C64> {
        if self.derived.zeta_inf == ZetaInf::Finite(z) {
            return Err(Error::OnSlit(format!("{z} is the pole of the map")));
        }
        self.branch.eval_q(z)
    }

    /// `i tau_bar omega_0(z)` without the additive constant, off the slits.
    fn w_interior(&self, z: C64, q: C64) -> C64 {
        let n = self.n();
        let lam = &self.derived.lambda;
        let w1: C64 = (0..n)
            .map(|j| alt(j) * lam[j] * self.table.g1_weighted[j].cauchy_off(z))
            .sum::<C64>()
            / PI;
        let sum2: C64 = (0..n)
            .map(|j| alt(j) * lam[j] * self.table.second[j].cauchy_off(z))
            .sum();
        let w2 = alt(n) * C64::i() * q / PI * sum2;
        w1 + w2
    }

    /// `omega_0(z) = omega(z) - (separated singular part)`, off the slits.
    pub fn omega0_interior(&self, z: C64) -> Result<C64> {
        let q = self.check_interior(z)?;
        let w = self.w_interior(z, q);
        Ok(self.gamma + w / (C64::i() * self.derived.tau_bar))
    }

    pub fn omega_interior(&self, z: C64) -> Result<C64> {
        Ok(self.omega_singular(z) + self.omega0_interior(z)?)
    }

    pub fn f_interior(&self, z: C64) -> Result<C64> {
        let q = self.check_interior(z)?;
        let n = self.n();
        let sum: C64 = (0..n)
            .map(|j| self.branch.upper_sign(j) * self.table.first[j].cauchy_off(z))
            .sum();
        Ok(self.beta0 + self.f_singular(z) + q * sum / (PI * C64::i()))
    }

    /// `q^sigma(xi) C_j^sigma(xi)` for a density stored as `series / r_j`,
    /// with the endpoint weight cancelled analytically.
    fn q_times_cauchy(&self, series: &[ChebyshevSeries], m: usize, xi: f64, bank: Bank) -> Vec<C64> {
        let sigma = bank.sign();
        let sm = self.branch.upper_sign(m);
        let r = self.branch.weight_factor(m, xi);
        let sw = self.sqrt_weight(m, xi);
        // q^sigma = sigma i s_m r sqrt(w)
        let q_scaled = C64::new(0.0, sigma * sm * r);
        series
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let scaled = if j == m {
                    C64::new(sw * s.singular_on(xi), sigma * PI * s.eval(xi))
                } else {
                    C64::new(sw * s.cauchy_off_real(xi), 0.0)
                };
                q_scaled * scaled
            })
            .collect()
    }

    fn w_boundary(&self, m: usize, xi: f64, bank: Bank) -> C64 {
        let n = self.n();
        let lam = &self.derived.lambda;
        let sigma = bank.sign();
        let w1: C64 = (0..n)
            .map(|j| {
                let s = &self.table.g1_weighted[j];
                let c = if j == m {
                    C64::new(s.singular_on(xi), sigma * PI * self.g1_series(m, xi))
                } else {
                    C64::new(s.cauchy_off_real(xi), 0.0)
                };
                alt(j) * lam[j] * c
            })
            .sum::<C64>()
            / PI;
        let qc = self.q_times_cauchy(&self.table.second, m, xi, bank);
        let sum2: C64 = qc
            .iter()
            .enumerate()
            .map(|(j, v)| alt(j) * lam[j] * v)
            .sum();
        w1 + alt(n) * C64::i() / PI * sum2
    }

    /// `omega(xi +- i0)` on slit `m`, including the endpoints.
    pub fn omega_boundary(&self, m: usize, xi: f64, bank: Bank) -> C64 {
        let w = self.w_boundary(m, xi, bank);
        self.omega_singular(C64::new(xi, 0.0)) + self.gamma + w / (C64::i() * self.derived.tau_bar)
    }

    /// `F(xi +- i0)` on slit `m`.
    pub fn f_boundary(&self, m: usize, xi: f64, bank: Bank) -> C64 {
        let qc = self.q_times_cauchy(&self.table.first, m, xi, bank);
        let sum: C64 = qc
            .iter()
            .enumerate()
            .map(|(j, v)| self.branch.upper_sign(j) * v)
            .sum();
        self.beta0 + self.f_singular(C64::new(xi, 0.0)) + sum / (PI * C64::i())
    }

    /// Residuals of both Schwarz boundary conditions at one boundary point:
    /// `|Im F - a_m|` and `|Im[i tau_bar omega_0] - lambda_m (g_0 + rho'_m +- (-1)^m g_1)|`,
    pub fn schwarz_residuals(&self, m: usize, xi: f64, bank: Bank) -> (f64, f64) {
        let f = self.f_boundary(m, xi, bank);
        let r1 = (f.im - self.constants.a[m]).abs();
        let w = self.w_boundary(m, xi, bank);
        let lam = self.derived.lambda[m];
        let target = lam
            * (self.g0(m, xi) + self.constants.rho_prime[m] + bank.sign() * alt(m) * self.g1(m, xi));
        let r2 = (w.im - target).abs();
        (r1, r2)
    }

    /// Boundary samples of slit `m` at `p` second-kind Chebyshev points per
    /// bank: upper bank left to right, then lower bank right to left.
    pub fn sample_slit(&self, m: usize, p: usize) -> Vec<BoundaryValue> {
        let (a, b) = self.slit_of(m);
        let pts = cheb_lobatto(a, b, p);
        let upper = pts.iter().map(|&xi| BoundaryValue {
            xi,
            slit: m,
            bank: Bank::Upper,
            z: self.omega_boundary(m, xi, Bank::Upper),
        });
        let lower = pts.iter().rev().map(|&xi| BoundaryValue {
            xi,
            slit: m,
            bank: Bank::Lower,
            z: self.omega_boundary(m, xi, Bank::Lower),
        });
        upper.chain(lower).collect()
    }
}

/// Closed-form single-inclusion maps.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleInclusion {
    /// `omega(zeta) = gamma + p zeta + r sqrt(zeta^2 - 1)`
    pub p: C64,
    pub r: C64,
    pub gamma: C64,
    pub delta: C64,
    tau_bar: C64,
    lambda: f64,
    c: C64,
}

impl SingleInclusion {
    pub fn new(loading: &Loading, materials: &MaterialSet, free: &FreeParameters) -> Result<Self> {
        let kappa = materials.kappa[0];
        let mu = loading.mu;
        let tau = loading.tau() / mu;
        let tau_inf = loading.tau_inf() / mu;
        let tb = tau.conj();
        let lt = materials.lambda_tilde(0);
        let cm1 = free.c_m1;
        let c = (tau_inf.conj() - tb) * cm1;
        // tb p has real part lt Re c; tb r has imaginary part lt Im c; p + r = c_m1
        let total = tb * cm1;
        let x = C64::new(lt * c.re, total.im - lt * c.im);
        let y = C64::new(total.re - lt * c.re, lt * c.im);
        let delta = (2.0 * kappa * tau_inf - (kappa + 1.0) * tau) / ((1.0 - kappa) * tb);
        Ok(Self {
            p: x / tb,
            r: y / tb,
            gamma: free.gamma,
            delta,
            tau_bar: tb,
            lambda: lt,
            c,
        })
    }

    /// The map coefficients `m_1`, `m_2` with `omega = gamma + c_{-1}(m_1 zeta + m_2 sqrt(zeta^2 - 1))`
    /// for a real scale.
    pub fn coefficients(loading: &Loading, kappa: f64) -> (C64, C64) {
        let tau = loading.tau() / loading.mu;
        let tau_inf = loading.tau_inf() / loading.mu;
        let tb = tau.conj();
        let lt = kappa / (1.0 - kappa);
        let m1 = (lt * (tau_inf - tau) - C64::new(0.0, tau.im)) / tb;
        let m2 = (-lt * (tau_inf - tau) + tau.re) / tb;
        (m1, m2)
    }

    /// `omega(xi +- i0)` on `[-1, 1]`.
    pub fn slit_profile(&self, xi: f64, bank: Bank) -> C64 {
        let s = (1.0 - xi * xi).max(0.0).sqrt();
        self.gamma + self.p * xi + self.r * C64::new(0.0, bank.sign() * s)
    }

    /// `c_{-1} (e^{i phi} + delta e^{-i phi}) + gamma` for the circular-map scale `c_m1`.
    pub fn circular_profile(&self, c_m1: C64, phi: f64) -> Result<C64> {
        if (self.delta - 1.0).norm() < 1e-12 || (self.delta + 1.0).norm() < 1e-12 {
            return Err(Error::DegenerateEllipse(self.delta.to_string()));
        }
        Ok(c_m1 * (C64::from_polar(1.0, phi) + self.delta * C64::from_polar(1.0, -phi)) + self.gamma)
    }

    /// `F(xi +- i0) - beta_0`: `Re c xi + i Im c q`.
    pub fn f_boundary(&self, xi: f64, bank: Bank) -> C64 {
        let s = (1.0 - xi * xi).max(0.0).sqrt();
        self.c.re * xi + C64::new(0.0, self.c.im) * C64::new(0.0, bank.sign() * s)
    }

    /// Residuals `|Im F|` and the deviation of `Re[tau_bar omega] - lambda Re F`
    /// from its value at the left endpoint (it must be constant on the slit).
    pub fn schwarz_residuals(&self, xi: f64, bank: Bank) -> (f64, f64) {
        let f = self.f_boundary(xi, bank);
        let lhs = |x: f64, b: Bank| {
            (self.tau_bar * (self.slit_profile(x, b) - self.gamma)).re
                - self.lambda * self.f_boundary(x, b).re
        };
        (f.im.abs(), (lhs(xi, bank) - lhs(-1.0, Bank::Upper)).abs())
    }

    pub fn sample(&self, p: usize) -> Vec<BoundaryValue> {
        let pts = cheb_lobatto(-1.0, 1.0, p);
        let upper = pts.iter().map(|&xi| BoundaryValue {
            xi,
            slit: 0,
            bank: Bank::Upper,
            z: self.slit_profile(xi, Bank::Upper),
        });
        let lower = pts.iter().rev().map(|&xi| BoundaryValue {
            xi,
            slit: 0,
            bank: Bank::Lower,
            z: self.slit_profile(xi, Bank::Lower),
        });
        upper.chain(lower).collect()
    }
}
