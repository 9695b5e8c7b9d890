//! Constants `a_j`, `rho_j` that keep both Schwarz-problem solutions bounded
//! at the two infinite points of the hyperelliptic surface.
//!
//! Both conditions have the form
//!
//! ```text
//!     sum_j (-1)^j int_{l_j} (x_j - s_j(xi)) xi^{m-1} / |q(xi)| d xi = 0,   m = 1..n-1,
//! ```
//!
//! one equation per vanishing moment, so they share the alternating-sign
//! period matrix `(-1)^j I_{mj}`. The first constant `x_0` is free.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::branch::Branch;
use crate::error::{Error, Result};
use crate::model::{DerivedConstants, NumericsConfig, ZetaInf};
use crate::quadrature::gauss_cheb;

/// `I[m-1][j] = int_{l_j} xi^{m-1} / |q(xi)| d xi` for `m = 1..=n`.
///
/// Row `n` is only needed when the pole sits at infinity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl PeriodMatrix {
    pub fn get(&self, m: usize, j: usize) -> f64 {
        self.entries[m - 1][j]
    }

    pub fn n(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// The `(n-1) x (n-1)` matrix `(-1)^j I_{mj}`, `m = 1..n-1`, `j = 1..n-1`.
    pub fn system(&self) -> DMatrix<f64> {
        let k = self.n() - 1;
        DMatrix::from_fn(k, k, |r, c| {
            let j = c + 1;
            alt(j) * self.get(r + 1, j)
        })
    }

    pub fn determinant(&self) -> f64 {
        if self.n() < 2 {
            1.0
        } else {
            self.system().determinant()
        }
    }
}

fn alt(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Weighted moment `int_{l_j} f(xi) xi^{m-1} / |q(xi)| d xi` by Gauss-Chebyshev.
pub fn moment<F: Fn(f64) -> f64>(branch: &Branch, j: usize, m: usize, f: F, nodes: usize) -> f64 {
    let (a, b) = branch.slit(j);
    gauss_cheb(
        |x| f(x) * x.powi(m as i32 - 1) / branch.weight_factor(j, x),
        a,
        b,
        nodes,
    )
}

pub fn period_matrix(branch: &Branch, numerics: &NumericsConfig) -> PeriodMatrix {
    let n = branch.n();
    let entries = (1..=n)
        .map(|m| (0..n).map(|j| moment(branch, j, m, |_| 1.0, numerics.nodes)).collect())
        .collect();
    PeriodMatrix { entries }
}

/// The solved (or overridden) constants of both Schwarz problems.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolvabilityConstants {
    pub a: Vec<f64>,
    pub rho: Vec<f64>,
    /// `rho_j / lambda_j`
    pub rho_prime: Vec<f64>,
    /// `beta_0 - rho'_j`
    pub d_prime: Vec<f64>,
}

impl SolvabilityConstants {
    pub fn new(a: Vec<f64>, rho: Vec<f64>, derived: &DerivedConstants, beta0: f64) -> Self {
        let rho_prime: Vec<f64> = rho
            .iter()
            .zip(&derived.lambda)
            .map(|(r, l)| r / l)
            .collect();
        let d_prime = rho_prime.iter().map(|r| beta0 - r).collect();
        Self {
            a,
            rho,
            rho_prime,
            d_prime,
        }
    }
}

fn solve_system(period: &PeriodMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let mat = period.system();
    let det = mat.determinant();
    let lu = mat.lu();
    let x = lu
        .solve(&DVector::from_column_slice(rhs))
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(Error::SingularSystem(det))?;
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularSystem(det));
    }
    Ok(x.iter().copied().collect())
}

/// `sum_j (-1)^j int_{l_j} Im(c / (xi - zeta_inf)) xi^{m-1} / |q|`, i.e. the
/// right side of the first system before the free constant is moved over.
fn pole_moments(branch: &Branch, derived: &DerivedConstants, nodes: usize) -> Vec<f64> {
    let n = branch.n();
    (1..n)
        .map(|m| {
            (0..n)
                .map(|j| alt(j) * moment(branch, j, m, |x| derived.pole_im(x), nodes))
                .sum()
        })
        .collect()
}

/// `sum_j (-1)^j lambda_j int_{l_j} g_0 xi^{m-1} / |q|`.
fn g0_moments(branch: &Branch, derived: &DerivedConstants, nodes: usize) -> Vec<f64> {
    let n = branch.n();
    (1..n)
        .map(|m| {
            (0..n)
                .map(|j| {
                    alt(j) * derived.lambda[j] * moment(branch, j, m, |x| derived.g0(j, x), nodes)
                })
                .sum()
        })
        .collect()
}

/// Solve `sum_{j>=1} (-1)^j I_{mj} a_j = J_m`; returns all `n` constants.
pub fn solve_a(
    period: &PeriodMatrix,
    branch: &Branch,
    derived: &DerivedConstants,
    a0: f64,
    numerics: &NumericsConfig,
) -> Result<Vec<f64>> {
    let n = branch.n();
    if n == 1 {
        return Ok(vec![a0]);
    }
    let rhs: Vec<f64> = pole_moments(branch, derived, numerics.nodes)
        .iter()
        .enumerate()
        .map(|(i, p)| p - period.get(i + 1, 0) * a0)
        .collect();
    let mut a = vec![a0];
    a.extend(solve_system(period, &rhs)?);
    Ok(a)
}

/// Solve `sum_{j>=1} (-1)^j I_{mj} rho_j = -K_m` with `lambda_j` inside the sum.
pub fn solve_rho(
    period: &PeriodMatrix,
    branch: &Branch,
    derived: &DerivedConstants,
    rho0: f64,
    numerics: &NumericsConfig,
) -> Result<Vec<f64>> {
    let n = branch.n();
    if n == 1 {
        return Ok(vec![rho0]);
    }
    let rhs: Vec<f64> = g0_moments(branch, derived, numerics.nodes)
        .iter()
        .enumerate()
        .map(|(i, k)| -(k + period.get(i + 1, 0) * rho0))
        .collect();
    let mut rho = vec![rho0];
    rho.extend(solve_system(period, &rhs)?);
    Ok(rho)
}

/// The free value `x0` for which the affine solution `x(x0)` satisfies
/// `x_{n-1} = -x_0`.
pub fn antisymmetric_seed<F>(solve: F) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let base = solve(0.0)?;
    let unit = solve(1.0)?;
    let last = base.len() - 1;
    let slope = unit[last] - base[last];
    let denom = 1.0 + slope;
    if denom.abs() < 1e-14 {
        return Err(Error::SingularSystem(denom));
    }
    Ok(-base[last] / denom)
}

/// Closed forms for two and three slits, re-derived from the `m = 1, 2`
/// moment conditions. Returns `(a, rho)`.
pub fn closed_form_constants(
    period: &PeriodMatrix,
    branch: &Branch,
    derived: &DerivedConstants,
    a0: f64,
    rho0: f64,
    nodes: usize,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = branch.n();
    let i = |m: usize, j: usize| period.get(m, j);
    // J_{mj}, and lambda_j-weighted g_0 moments K_{mj}
    let jm = |m: usize, j: usize| moment(branch, j, m, |x| derived.pole_im(x), nodes);
    let km = |m: usize, j: usize| {
        derived.lambda[j] * moment(branch, j, m, |x| derived.g0(j, x), nodes)
    };
    match n {
        2 => {
            // a_0 I_10 - a_1 I_11 = J_10 - J_11
            let a1 = (a0 * i(1, 0) - (jm(1, 0) - jm(1, 1))) / i(1, 1);
            // rho_0 I_10 - rho_1 I_11 = -(K_10 - K_11)
            let rho1 = (rho0 * i(1, 0) + km(1, 0) - km(1, 1)) / i(1, 1);
            Some((vec![a0, a1], vec![rho0, rho1]))
        }
        3 => {
            let delta = i(1, 1) * i(2, 2) - i(1, 2) * i(2, 1);
            let (jj, kk): (Vec<f64>, Vec<f64>) = match derived.zeta_inf {
                ZetaInf::Finite(_) => (1..=2)
                    .map(|m| {
                        (
                            jm(m, 0) - jm(m, 1) + jm(m, 2) - a0 * i(m, 0),
                            km(m, 0) - km(m, 1) + km(m, 2) + rho0 * i(m, 0),
                        )
                    })
                    .unzip(),
                ZetaInf::AtInfinity => {
                    let cpp = derived.c.im;
                    (1..=2)
                        .map(|m| {
                            let jhat = cpp * (0..3).map(|j| alt(j) * i(m + 1, j)).sum::<f64>()
                                - a0 * i(m, 0);
                            let khat = (0..3)
                                .map(|j| alt(j) * derived.c_star[j] * derived.lambda[j] * i(m + 1, j))
                                .sum::<f64>()
                                + rho0 * i(m, 0);
                            (jhat, khat)
                        })
                        .unzip()
                }
            };
            let a1 = (jj[1] * i(1, 2) - jj[0] * i(2, 2)) / delta;
            let a2 = (jj[1] * i(1, 1) - jj[0] * i(2, 1)) / delta;
            let rho1 = (kk[0] * i(2, 2) - kk[1] * i(1, 2)) / delta;
            let rho2 = (kk[0] * i(2, 1) - kk[1] * i(1, 1)) / delta;
            Some((vec![a0, a1, a2], vec![rho0, rho1, rho2]))
        }
        _ => None,
    }
}

/// Mirror pair `[-1,-k]`, `[k,1]`, pole at the origin, equal moduli, with the
/// antisymmetric choice `a_1 = -a_0`, `rho_1 = -rho_0`. Returns `(a_1, rho_1)`.
pub fn symmetric_pair_constants(
    branch: &Branch,
    derived: &DerivedConstants,
    nodes: usize,
) -> (f64, f64) {
    let i = moment(branch, 1, 1, |_| 1.0, nodes);
    let l = moment(branch, 1, 1, |x| 1.0 / x, nodes);
    let a1 = derived.c.im * l / i;
    let rho1 = -derived.lambda[0] * derived.c_star[0] * l / i;
    (a1, rho1)
}

/// Relative residuals of both families of boundedness conditions.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundednessResiduals {
    /// First Schwarz problem, one entry per moment `m = 1..n-1`.
    pub first: Vec<f64>,
    /// Second Schwarz problem.
    pub second: Vec<f64>,
}

impl BoundednessResiduals {
    pub fn max(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.second)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Re-evaluate the moment conditions with `nodes` quadrature points. Each
/// residual is scaled by the sum of magnitudes of its terms, floored by the
/// size the terms would have for unit-order data, so that conditions which
/// hold identically do not report roundoff divided by roundoff.
pub fn boundedness_residuals(
    branch: &Branch,
    derived: &DerivedConstants,
    a: &[f64],
    rho: &[f64],
    nodes: usize,
) -> BoundednessResiduals {
    let n = branch.n();
    let amax = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let rmax = rho.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let first_scale = amax.max(derived.c.norm());
    let second_scale = derived
        .g0_coeff
        .iter()
        .zip(&derived.lambda)
        .fold(rmax, |m, (g, l)| m.max(g.norm() * l.abs()));
    let eval = |dens: &dyn Fn(usize, f64) -> f64, m: usize, data: f64| {
        let terms: Vec<f64> = (0..n)
            .map(|j| alt(j) * moment(branch, j, m, |x| dens(j, x), nodes))
            .collect();
        let floor: f64 = (0..n)
            .map(|j| moment(branch, j, m, |x| x.abs().powi(m as i32 - 1), nodes))
            .sum::<f64>()
            * data;
        let sum: f64 = terms.iter().sum();
        let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(floor);
        if sum == 0.0 {
            0.0
        } else {
            sum / scale
        }
    };
    let first = (1..n)
        .map(|m| eval(&|j, x| a[j] - derived.pole_im(x), m, first_scale))
        .collect();
    let second = (1..n)
        .map(|m| eval(&|j, x| rho[j] + derived.lambda[j] * derived.g0(j, x), m, second_scale))
        .collect();
    BoundednessResiduals { first, second }
}
