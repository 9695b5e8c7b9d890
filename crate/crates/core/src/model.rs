//! Domain types shared by every stage of a solve.
//!
//! Stresses are carried as ratios to the matrix modulus whenever `mu = 1`,
//! which is the default everywhere; the formulas only ever see `tau / mu`,
//! `tau_inf / mu` and the modulus ratios `kappa`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Far-field and interior antiplane shear stresses plus the matrix modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub tau1: f64,
    pub tau2: f64,
    pub tau1_inf: f64,
    pub tau2_inf: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
}

fn default_mu() -> f64 {
    1.0
}

impl Loading {
    pub fn new(tau1: f64, tau2: f64, tau1_inf: f64, tau2_inf: f64) -> Self {
        Self {
            tau1,
            tau2,
            tau1_inf,
            tau2_inf,
            mu: 1.0,
        }
    }

    pub fn tau(&self) -> C64 {
        C64::new(self.tau1, self.tau2)
    }

    pub fn tau_inf(&self) -> C64 {
        C64::new(self.tau1_inf, self.tau2_inf)
    }

    /// `tau1 - i tau2`
    pub fn tau_bar(&self) -> C64 {
        self.tau().conj()
    }

    pub fn tau_bar_inf(&self) -> C64 {
        self.tau_inf().conj()
    }
}

/// Inclusion-to-matrix modulus ratios `kappa_j = mu_j / mu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialSet {
    pub kappa: Vec<f64>,
}

impl MaterialSet {
    pub fn new(kappa: Vec<f64>) -> Self {
        Self { kappa }
    }

    pub fn uniform(kappa: f64, n: usize) -> Self {
        Self {
            kappa: vec![kappa; n],
        }
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    /// `kappa / (1 - kappa)`
    pub fn lambda_tilde(&self, j: usize) -> f64 {
        let k = self.kappa[j];
        k / (1.0 - k)
    }

    /// `mu_j / (1 - kappa_j)`, i.e. `mu * lambda_tilde`.
    pub fn lambda(&self, j: usize, mu: f64) -> f64 {
        mu * self.lambda_tilde(j)
    }
}

/// Preimage of the point at infinity of the physical plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZetaInf {
    Finite(C64),
    AtInfinity,
}

impl ZetaInf {
    pub fn finite(&self) -> Option<C64> {
        match self {
            ZetaInf::Finite(z) => Some(*z),
            ZetaInf::AtInfinity => None,
        }
    }
}

/// `n` collinear slits `[k_{2j}, k_{2j+1}]` on the real axis and the pole location.
#[derive(Clone, Debug, PartialEq)]
pub struct SlitConfiguration {
    pub endpoints: Vec<f64>,
    pub zeta_inf: ZetaInf,
}

impl SlitConfiguration {
    pub fn new(endpoints: Vec<f64>, zeta_inf: ZetaInf) -> Self {
        Self {
            endpoints,
            zeta_inf,
        }
    }

    pub fn from_slits(slits: &[[f64; 2]], zeta_inf: ZetaInf) -> Self {
        Self::new(slits.iter().flat_map(|s| [s[0], s[1]]).collect(), zeta_inf)
    }

    /// The single slit `[-1, 1]` with the pole at infinity.
    pub fn single() -> Self {
        Self::new(vec![-1.0, 1.0], ZetaInf::AtInfinity)
    }

    /// Two mirror slits `[-1, -k]`, `[k, 1]`.
    pub fn symmetric_pair(k: f64, zeta_inf: f64) -> Self {
        Self::new(vec![-1.0, -k, k, 1.0], ZetaInf::Finite(C64::new(zeta_inf, 0.0)))
    }

    pub fn n(&self) -> usize {
        self.endpoints.len() / 2
    }

    pub fn slit(&self, j: usize) -> (f64, f64) {
        (self.endpoints[2 * j], self.endpoints[2 * j + 1])
    }

    pub fn slits(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.endpoints.chunks_exact(2).map(|p| (p[0], p[1]))
    }

    /// Index of the closed slit containing the real point `x`, if any.
    pub fn slit_containing(&self, x: f64) -> Option<usize> {
        self.slits().position(|(a, b)| a <= x && x <= b)
    }

    /// Whether `z` lies on one of the closed slits.
    pub fn on_slit(&self, z: C64) -> bool {
        z.im == 0.0 && self.slit_containing(z.re).is_some()
    }

    /// Mirror symmetry `k_i = -k_{2n-1-i}` to within `tol`.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let m = self.endpoints.len();
        (0..m).all(|i| (self.endpoints[i] + self.endpoints[m - 1 - i]).abs() <= tol)
    }
}

/// The free parameters of the map: the two solvability seeds, scaling and translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeParameters {
    pub a0: f64,
    pub rho0: f64,
    pub c_m1: C64,
    pub gamma: C64,
    pub beta0: f64,
    /// Choose `a0`, `rho0` so that `a_{n-1} = -a_0` and `rho_{n-1} = -rho_0`
    /// instead of using the supplied values.
    pub antisymmetric: bool,
}

impl Default for FreeParameters {
    fn default() -> Self {
        Self {
            a0: 0.0,
            rho0: 0.0,
            c_m1: C64::new(1.0, 0.0),
            gamma: C64::new(0.0, 0.0),
            beta0: 0.0,
            antisymmetric: false,
        }
    }
}

impl FreeParameters {
    pub fn with_scale(c_m1: C64) -> Self {
        Self {
            c_m1,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericsConfig {
    /// Gauss-Chebyshev nodes per slit.
    pub nodes: usize,
    /// Chebyshev truncation order, at most `nodes`.
    pub order: usize,
    /// Contour samples per bank.
    pub points: usize,
    /// Relative distance to a slit below which a target counts as near-slit.
    pub eps_near: f64,
    pub tol_solve: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            order: 64,
            points: 200,
            eps_near: 1e-3,
            tol_solve: 1e-8,
        }
    }
}

impl NumericsConfig {
    pub fn with_nodes(nodes: usize) -> Self {
        Self {
            nodes,
            order: nodes,
            ..Self::default()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.nodes < 8 {
            v.push(format!("node count {} < 8", self.nodes));
        }
        if self.order < 4 {
            v.push(format!("Chebyshev order {} < 4", self.order));
        }
        if self.order > self.nodes {
            v.push(format!(
                "Chebyshev order {} exceeds node count {}",
                self.order, self.nodes
            ));
        }
        if self.points < 16 {
            v.push(format!("contour points {} < 16", self.points));
        }
        if !(self.eps_near > 0.0) {
            v.push("eps_near must be positive".into());
        }
        if !(self.tol_solve > 0.0) {
            v.push("tol_solve must be positive".into());
        }
        v
    }
}

/// Constants derived once from the loading, materials and free parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedConstants {
    pub mu: f64,
    pub tau_bar: C64,
    pub tau_bar_inf: C64,
    pub c_m1: C64,
    /// `(tau_bar_inf - tau_bar) c_{-1} / mu`: pole residue (finite pole) or
    /// linear coefficient (pole at infinity) of `F`.
    pub c: C64,
    /// `c_{-1} (tau_bar_inf / mu - tau_bar / mu_j)` per inclusion.
    pub g0_coeff: Vec<C64>,
    /// Real parts of `g0_coeff`.
    pub c_star: Vec<f64>,
    pub lambda: Vec<f64>,
    pub lambda_tilde: Vec<f64>,
    pub zeta_inf: ZetaInf,
}

impl DerivedConstants {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `g_0` on slit `j`: the real density driving the second Schwarz problem.
    pub fn g0(&self, j: usize, xi: f64) -> f64 {
        match self.zeta_inf {
            ZetaInf::Finite(z) => (self.g0_coeff[j] / (C64::new(xi, 0.0) - z)).re,
            ZetaInf::AtInfinity => self.c_star[j] * xi,
        }
    }

    /// `Im` of the separated singular part of `F` at real `xi`.
    pub fn pole_im(&self, xi: f64) -> f64 {
        match self.zeta_inf {
            ZetaInf::Finite(z) => (self.c / (C64::new(xi, 0.0) - z)).im,
            ZetaInf::AtInfinity => self.c.im * xi,
        }
    }
}

/// Human-readable list of invariant violations; empty means runnable.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidInput(self.violations))
        }
    }
}

const KAPPA_ONE_TOL: f64 = 1e-12;

pub fn validate(
    cfg: &SlitConfiguration,
    loading: &Loading,
    materials: &MaterialSet,
) -> ValidationReport {
    let mut r = ValidationReport::default();
    let v = &mut r.violations;

    let vals = [
        loading.tau1,
        loading.tau2,
        loading.tau1_inf,
        loading.tau2_inf,
        loading.mu,
    ];
    if vals.iter().any(|x| !x.is_finite()) {
        v.push("loading contains non-finite values".into());
    }
    if !(loading.mu > 0.0) {
        v.push(format!("matrix modulus mu = {} must be positive", loading.mu));
    }
    if loading.tau1 == 0.0 && loading.tau2 == 0.0 {
        v.push("interior stress tau must be nonzero".into());
    }

    let m = cfg.endpoints.len();
    if m < 2 || !m.is_multiple_of(2) {
        v.push(format!("expected an even, positive number of endpoints, got {m}"));
        return r;
    }
    let n = cfg.n();
    if cfg.endpoints.iter().any(|x| !x.is_finite()) {
        v.push("slit endpoints must be finite".into());
    }
    if cfg.endpoints.windows(2).any(|w| !(w[0] < w[1])) {
        v.push("slit endpoints must be strictly increasing".into());
    }

    if materials.len() != n {
        v.push(format!(
            "expected {n} modulus ratios, got {}",
            materials.len()
        ));
    }
    for (j, &k) in materials.kappa.iter().enumerate() {
        if !(k > 0.0) || !k.is_finite() {
            v.push(format!("kappa_{j} = {k} must be positive and finite"));
        } else if (k - 1.0).abs() < KAPPA_ONE_TOL {
            v.push(format!("kappa_{j} = 1 makes lambda_{j} singular"));
        }
    }

    match cfg.zeta_inf {
        ZetaInf::Finite(z) => {
            if !(z.re.is_finite() && z.im.is_finite()) {
                v.push("zeta_inf must be finite or 'infinity'".into());
            } else if cfg.on_slit(z) {
                v.push(format!("zeta_inf = {z} lies on a slit (preimage on slit)"));
            }
            match n {
                1 => v.push("a single inclusion requires zeta_inf at infinity".into()),
                2 => {
                    let (_, gap_l) = cfg.slit(0);
                    let (gap_r, _) = cfg.slit(1);
                    if z.im != 0.0 || !(gap_l < z.re && z.re < gap_r) {
                        v.push(format!(
                            "two inclusions require a real zeta_inf inside the gap ({gap_l}, {gap_r})"
                        ));
                    }
                }
                _ => {}
            }
        }
        ZetaInf::AtInfinity => {
            if n == 2 {
                v.push("two inclusions require a finite zeta_inf in the gap".into());
            } else if n >= 4 {
                v.push("four or more inclusions require a finite zeta_inf".into());
            }
        }
    }
    if n == 1 && cfg.endpoints != [-1.0, 1.0] {
        v.push("a single inclusion uses the slit [-1, 1]".into());
    }

    if n >= 2 && (cfg.endpoints[0] != -1.0 || cfg.endpoints[m - 1] != 1.0) {
        r.warnings.push(format!(
            "outer endpoints ({}, {}) differ from the (-1, 1) normalization",
            cfg.endpoints[0],
            cfg.endpoints[m - 1]
        ));
    }
    r
}

/// Derive the problem constants; fails on any violated invariant.
pub fn derive_constants(
    loading: &Loading,
    materials: &MaterialSet,
    cfg: &SlitConfiguration,
    free: &FreeParameters,
) -> Result<DerivedConstants> {
    let mut report = validate(cfg, loading, materials);
    if free.c_m1 == C64::new(0.0, 0.0) || !free.c_m1.is_finite() {
        report.violations.push("c_m1 must be nonzero and finite".into());
    }
    report.into_result()?;

    let mu = loading.mu;
    let tau_bar = loading.tau_bar();
    let tau_bar_inf = loading.tau_bar_inf();
    let c = (tau_bar_inf - tau_bar) * free.c_m1 / mu;
    let n = cfg.n();
    let g0_coeff: Vec<C64> = (0..n)
        .map(|j| free.c_m1 * (tau_bar_inf / mu - tau_bar / (mu * materials.kappa[j])))
        .collect();
    Ok(DerivedConstants {
        mu,
        tau_bar,
        tau_bar_inf,
        c_m1: free.c_m1,
        c,
        c_star: g0_coeff.iter().map(|k| k.re).collect(),
        lambda: (0..n).map(|j| materials.lambda(j, mu)).collect(),
        lambda_tilde: (0..n).map(|j| materials.lambda_tilde(j)).collect(),
        g0_coeff,
        zeta_inf: cfg.zeta_inf,
    })
}
