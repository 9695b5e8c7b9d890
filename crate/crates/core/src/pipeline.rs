//! End-to-end solve: constants, densities, boundary values, profiles and a verdict.

use std::fmt;

use serde::Serialize;

use crate::branch::{Bank, Branch};
use crate::error::{Error, Result};
use crate::geometry::{self, ContourProfile, SymmetryReport};
use crate::mapper::{BoundaryValue, Mapper, SingleInclusion};
use crate::model::{
    derive_constants, validate, DerivedConstants, FreeParameters, Loading, MaterialSet, NumericsConfig,
    SlitConfiguration, ZetaInf, C64,
};
use crate::solvability::{
    antisymmetric_seed, boundedness_residuals, closed_form_constants, period_matrix, solve_a, solve_rho,
    symmetric_pair_constants, BoundednessResiduals, PeriodMatrix, SolvabilityConstants,
};

/// Closed forms and the general linear systems must agree to this.
pub const CROSS_CHECK_TOL: f64 = 1e-8;
/// Boundary-condition residuals above this (times the data scale) mean the
/// series representation is not resolving the densities.
pub const SCHWARZ_TOL: f64 = 1e-6;
/// Endpoint mismatch relative to the contour diameter.
pub const CLOSURE_TOL: f64 = 1e-8;
/// Contours whose area falls below this fraction of the squared overall
/// diameter are treated as collapsed.
pub const AREA_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "VALID")]
    Valid,
    #[serde(rename = "INVALID-UNBOUNDED")]
    InvalidUnbounded,
    #[serde(rename = "INVALID-GEOMETRY")]
    InvalidGeometry,
    #[serde(rename = "INVALID-NUMERICS")]
    InvalidNumerics,
    #[serde(rename = "DEGENERATE")]
    Degenerate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Valid => "VALID",
            Verdict::InvalidUnbounded => "INVALID-UNBOUNDED",
            Verdict::InvalidGeometry => "INVALID-GEOMETRY",
            Verdict::InvalidNumerics => "INVALID-NUMERICS",
            Verdict::Degenerate => "DEGENERATE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Verdict::Valid,
            Verdict::InvalidUnbounded,
            Verdict::InvalidGeometry,
            Verdict::InvalidNumerics,
            Verdict::Degenerate,
        ]
        .into_iter()
        .find(|v| v.as_str() == s)
    }

    pub fn is_valid(self) -> bool {
        self == Verdict::Valid
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed for one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub cfg: SlitConfiguration,
    pub loading: Loading,
    pub materials: MaterialSet,
    pub free: FreeParameters,
    pub numerics: NumericsConfig,
}

/// User-supplied solvability constants replacing the solved ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub a: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.a.is_none() && self.rho.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub verdict: Verdict,
    pub reasons: Vec<String>,
    pub warnings: Vec<String>,
    pub n: usize,
    pub a: Vec<f64>,
    pub rho: Vec<f64>,
    pub overridden: bool,
    pub determinant: Option<f64>,
    pub cross_check_deviation: Option<f64>,
    pub boundedness: BoundednessResiduals,
    pub boundedness_max: f64,
    pub schwarz_first_max: f64,
    pub schwarz_second_max: f64,
    pub truncation_ratio: f64,
    /// Per contour, relative to its diameter.
    pub closure_errors: Vec<f64>,
    pub signed_areas: Vec<f64>,
    pub diameters: Vec<f64>,
    pub self_intersecting: Vec<usize>,
    pub overlapping_pairs: Vec<(usize, usize)>,
    pub symmetry: SymmetryReport,
    /// Single inclusion only.
    pub conic_residual: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub constants: SolvabilityConstants,
    pub profiles: Vec<ContourProfile>,
    pub diagnostics: Diagnostics,
}

pub fn solve(problem: &Problem) -> Result<SolveResult> {
    solve_with_overrides(problem, &Overrides::default())
}

/// Like [`solve`], but any supplied constants bypass the linear systems.
pub fn override_constants(problem: &Problem, overrides: &Overrides) -> Result<SolveResult> {
    solve_with_overrides(problem, overrides)
}

fn check_override(name: &str, v: &Option<Vec<f64>>, n: usize) -> Result<()> {
    match v {
        Some(x) if x.len() != n => Err(Error::InvalidInput(vec![format!(
            "override {name} has {} entries, expected {n}",
            x.len()
        )])),
        Some(x) if x.iter().any(|v| !v.is_finite()) => {
            Err(Error::InvalidInput(vec![format!("override {name} contains non-finite values")]))
        }
        _ => Ok(()),
    }
}

pub fn solve_with_overrides(problem: &Problem, overrides: &Overrides) -> Result<SolveResult> {
    let Problem {
        cfg,
        loading,
        materials,
        free,
        numerics,
    } = problem;
    let mut report = validate(cfg, loading, materials);
    report.violations.extend(numerics.violations());
    let report = report.into_result()?;
    let n = cfg.n();
    check_override("a", &overrides.a, n)?;
    check_override("rho", &overrides.rho, n)?;
    let derived = derive_constants(loading, materials, cfg, free)?;

    let mut state = if n == 1 {
        single(problem, &derived, overrides)?
    } else {
        multiple(problem, &derived, overrides)?
    };
    state.warnings.extend(report.warnings);
    Ok(state.finish(numerics, !overrides.is_empty()))
}

struct Partial {
    constants: SolvabilityConstants,
    samples: Vec<Vec<BoundaryValue>>,
    determinant: Option<f64>,
    cross_check: Option<f64>,
    boundedness: BoundednessResiduals,
    schwarz: (f64, f64),
    schwarz_scale: f64,
    truncation: f64,
    warnings: Vec<String>,
}

fn single(problem: &Problem, derived: &DerivedConstants, overrides: &Overrides) -> Result<Partial> {
    let a = overrides.a.clone().unwrap_or_else(|| vec![problem.free.a0]);
    let rho = overrides.rho.clone().unwrap_or_else(|| vec![problem.free.rho0]);
    let constants = SolvabilityConstants::new(a, rho, derived, problem.free.beta0);
    let map = SingleInclusion::new(&problem.loading, &problem.materials, &problem.free)?;
    let samples = map.sample(problem.numerics.points);
    let schwarz = samples.iter().fold((0.0f64, 0.0f64), |acc, s| {
        let (r1, r2) = map.schwarz_residuals(s.xi, s.bank);
        (acc.0.max(r1), acc.1.max(r2))
    });
    Ok(Partial {
        constants,
        samples: vec![samples],
        determinant: None,
        cross_check: None,
        boundedness: BoundednessResiduals::default(),
        schwarz,
        schwarz_scale: data_scale(derived, &[]),
        truncation: 0.0,
        warnings: Vec::new(),
    })
}

fn data_scale(derived: &DerivedConstants, a: &[f64]) -> f64 {
    let lam = derived.lambda.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let amax = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1.0f64.max(derived.c.norm() * lam).max(amax).max(derived.c_m1.norm() * lam)
}

fn max_deviation(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| (p - q).abs() / p.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn solved_constants(
    problem: &Problem,
    branch: &Branch,
    period: &PeriodMatrix,
    derived: &DerivedConstants,
) -> Result<(Vec<f64>, Vec<f64>, Option<f64>)> {
    let (free, nc) = (&problem.free, &problem.numerics);
    let (a0, rho0) = if free.antisymmetric {
        (
            antisymmetric_seed(|x| solve_a(period, branch, derived, x, nc))?,
            antisymmetric_seed(|x| solve_rho(period, branch, derived, x, nc))?,
        )
    } else {
        (free.a0, free.rho0)
    };
    let a = solve_a(period, branch, derived, a0, nc)?;
    let rho = solve_rho(period, branch, derived, rho0, nc)?;

    let mut deviation = None;
    if let Some((ca, cr)) = closed_form_constants(period, branch, derived, a0, rho0, nc.nodes) {
        let d = max_deviation(&a, &ca).max(max_deviation(&rho, &cr));
        if d > CROSS_CHECK_TOL {
            return Err(Error::CrossCheck {
                what: "closed-form constants",
                deviation: d,
            });
        }
        deviation = Some(d);
    }
    let mirror_pair = branch.n() == 2
        && free.antisymmetric
        && problem.cfg.zeta_inf == ZetaInf::Finite(C64::new(0.0, 0.0))
        && problem.cfg.is_mirror_symmetric(1e-14)
        && problem.materials.kappa[0] == problem.materials.kappa[1];
    if mirror_pair {
        let (a1, rho1) = symmetric_pair_constants(branch, derived, nc.nodes);
        let d = max_deviation(&[a[1], rho[1]], &[a1, rho1]);
        if d > CROSS_CHECK_TOL {
            return Err(Error::CrossCheck {
                what: "symmetric-pair constants",
                deviation: d,
            });
        }
        deviation = Some(deviation.unwrap_or(0.0).max(d));
    }
    Ok((a, rho, deviation))
}

fn multiple(problem: &Problem, derived: &DerivedConstants, overrides: &Overrides) -> Result<Partial> {
    let nc = &problem.numerics;
    let branch = Branch::new(&problem.cfg);
    let period = period_matrix(&branch, nc);
    let determinant = period.determinant();

    let (a, rho, cross_check) = match (&overrides.a, &overrides.rho) {
        (Some(a), Some(rho)) => (a.clone(), rho.clone(), None),
        _ => {
            let (a, rho, d) = solved_constants(problem, &branch, &period, derived)?;
            (
                overrides.a.clone().unwrap_or(a),
                overrides.rho.clone().unwrap_or(rho),
                if overrides.is_empty() { d } else { None },
            )
        }
    };
    let boundedness = boundedness_residuals(&branch, derived, &a, &rho, nc.nodes);
    let constants = SolvabilityConstants::new(a, rho, derived, problem.free.beta0);
    let schwarz_scale = data_scale(derived, &constants.a);
    let mapper = Mapper::new(branch, derived.clone(), constants.clone(), &problem.free, nc);

    let samples: Vec<Vec<BoundaryValue>> = (0..mapper.n()).map(|m| mapper.sample_slit(m, nc.points)).collect();
    let mut schwarz = (0.0f64, 0.0f64);
    for s in samples.iter().flatten() {
        let (r1, r2) = mapper.schwarz_residuals(s.slit, s.xi, s.bank);
        if !(r1.is_finite() && r2.is_finite()) {
            return Err(Error::NonFinite("evaluating boundary residuals"));
        }
        schwarz = (schwarz.0.max(r1), schwarz.1.max(r2));
    }
    let truncation = mapper.table().max_truncation_ratio();
    let mut warnings = Vec::new();
    if truncation > 1e-8 {
        warnings.push(format!(
            "Chebyshev coefficients decay only to {truncation:.3e} of their maximum; consider raising N and M"
        ));
    }
    Ok(Partial {
        constants,
        samples,
        determinant: Some(determinant),
        cross_check,
        boundedness,
        schwarz,
        schwarz_scale,
        truncation,
        warnings,
    })
}

impl Partial {
    fn finish(self, numerics: &NumericsConfig, overridden: bool) -> SolveResult {
        if self
            .samples
            .iter()
            .flatten()
            .any(|s| !(s.z.re.is_finite() && s.z.im.is_finite()))
        {
            // Surface as a numerics verdict rather than losing the partial result.
            return self.into_result(Vec::new(), numerics, overridden, Some("non-finite boundary values"));
        }
        let profiles = geometry::build_profiles(&self.samples);
        self.into_result(profiles, numerics, overridden, None)
    }

    fn into_result(
        self,
        profiles: Vec<ContourProfile>,
        numerics: &NumericsConfig,
        overridden: bool,
        fatal: Option<&str>,
    ) -> SolveResult {
        let n = self.samples.len();
        let mut reasons = Vec::new();
        let diameter = geometry::overall_diameter(&profiles);

        let boundedness_max = self.boundedness.max();
        let unbounded = boundedness_max > numerics.tol_solve;
        if unbounded {
            reasons.push(format!(
                "boundedness conditions violated (max relative residual {boundedness_max:.3e})"
            ));
        }

        let mut numerics_bad = fatal.is_some();
        if let Some(f) = fatal {
            reasons.push(f.to_string());
        }
        let schwarz_limit = SCHWARZ_TOL * self.schwarz_scale;
        if self.schwarz.0 > schwarz_limit || self.schwarz.1 > schwarz_limit {
            numerics_bad = true;
            reasons.push(format!(
                "boundary conditions not resolved (residuals {:.3e}, {:.3e})",
                self.schwarz.0, self.schwarz.1
            ));
        }
        let closure_errors: Vec<f64> = profiles
            .iter()
            .map(|p| {
                let d = p.diameter();
                if d > 0.0 {
                    p.closure_error / d
                } else {
                    p.closure_error
                }
            })
            .collect();
        for (m, e) in closure_errors.iter().enumerate() {
            if *e > CLOSURE_TOL && profiles[m].diameter() > AREA_TOL * diameter {
                numerics_bad = true;
                reasons.push(format!("contour {m} does not close (relative gap {e:.3e})"));
            }
        }

        let degenerate: Vec<usize> = profiles
            .iter()
            .filter(|p| diameter == 0.0 || p.is_degenerate(diameter))
            .map(|p| p.slit)
            .collect();
        for m in &degenerate {
            reasons.push(format!("contour {m} collapses to a curve of zero area"));
        }

        let (self_intersecting, overlapping_pairs) = if degenerate.is_empty() {
            let si: Vec<usize> = profiles
                .iter()
                .filter(|p| geometry::self_intersects(p))
                .map(|p| p.slit)
                .collect();
            let mut pairs = Vec::new();
            for i in 0..profiles.len() {
                for j in i + 1..profiles.len() {
                    if !geometry::disjoint(&profiles[i], &profiles[j]) {
                        pairs.push((i, j));
                    }
                }
            }
            (si, pairs)
        } else {
            (Vec::new(), Vec::new())
        };
        for m in &self_intersecting {
            reasons.push(format!("contour {m} intersects itself"));
        }
        for (i, j) in &overlapping_pairs {
            reasons.push(format!("contours {i} and {j} intersect, touch or nest"));
        }

        let verdict = if unbounded {
            Verdict::InvalidUnbounded
        } else if numerics_bad {
            Verdict::InvalidNumerics
        } else if !degenerate.is_empty() {
            Verdict::Degenerate
        } else if !self_intersecting.is_empty() || !overlapping_pairs.is_empty() {
            Verdict::InvalidGeometry
        } else {
            Verdict::Valid
        };

        let conic_residual = (n == 1 && !profiles.is_empty()).then(|| geometry::fit_ellipse(&profiles[0]));
        let diagnostics = Diagnostics {
            verdict,
            reasons,
            warnings: self.warnings,
            n,
            a: self.constants.a.clone(),
            rho: self.constants.rho.clone(),
            overridden,
            determinant: self.determinant,
            cross_check_deviation: self.cross_check,
            boundedness_max,
            boundedness: self.boundedness,
            schwarz_first_max: self.schwarz.0,
            schwarz_second_max: self.schwarz.1,
            truncation_ratio: self.truncation,
            closure_errors,
            signed_areas: profiles.iter().map(|p| p.signed_area).collect(),
            diameters: profiles.iter().map(|p| p.diameter()).collect(),
            self_intersecting,
            overlapping_pairs,
            symmetry: geometry::symmetry_checks(&profiles),
            conic_residual,
        };
        SolveResult {
            constants: self.constants,
            profiles,
            diagnostics,
        }
    }
}

impl SolveResult {
    pub fn verdict(&self) -> Verdict {
        self.diagnostics.verdict
    }

    /// All contour points as `(slit, bank, xi, z)` rows in profile order.
    pub fn rows(&self) -> impl Iterator<Item = (usize, Bank, f64, C64)> + '_ {
        self.profiles.iter().flat_map(|p| {
            p.params
                .iter()
                .zip(&p.points)
                .map(move |(&(xi, bank), &z)| (p.slit, bank, xi, z))
        })
    }
}
