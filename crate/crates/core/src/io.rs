//! Case configuration (JSON), contour data (CSV) and plots (SVG).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::branch::Bank;
use crate::error::{Error, Result};
use crate::model::{FreeParameters, Loading, MaterialSet, NumericsConfig, SlitConfiguration, ZetaInf, C64};
use crate::pipeline::{Overrides, Problem, SolveResult, Verdict};

/// Environment variable overriding the diagnostic residual tolerance.
pub const TOL_ENV: &str = "INCLUSION_FORGE_TOL";

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexValue> for C64 {
    fn from(c: ComplexValue) -> Self {
        C64::new(c.re, c.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaInfValue {
    Named(String),
    Point(ComplexValue),
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingValue {
    pub tau1: f64,
    pub tau2: f64,
    pub tau1_inf: f64,
    pub tau2_inf: f64,
    #[serde(default = "one")]
    pub mu: f64,
}

fn unit() -> ComplexValue {
    ComplexValue { re: 1.0, im: 0.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeValue {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub rho0: f64,
    #[serde(default = "unit")]
    pub c_m1: ComplexValue,
    #[serde(default)]
    pub gamma: ComplexValue,
    #[serde(default)]
    pub beta0: f64,
    /// Pick `a0`, `rho0` so the outermost constants are opposite.
    #[serde(default)]
    pub antisymmetric: bool,
}

impl Default for FreeValue {
    fn default() -> Self {
        Self {
            a0: 0.0,
            rho0: 0.0,
            c_m1: unit(),
            gamma: ComplexValue::default(),
            beta0: 0.0,
            antisymmetric: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsValue {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_near: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverridesValue {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
}

/// The on-disk case description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Expected verdict, used by the figure corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    pub n: usize,
    pub slits: Vec<[f64; 2]>,
    pub zeta_inf: ZetaInfValue,
    pub loading: LoadingValue,
    pub kappa: Vec<f64>,
    #[serde(default)]
    pub free: FreeValue,
    #[serde(default)]
    pub numerics: NumericsValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<OverridesValue>,
}

pub fn parse_config(text: &str) -> Result<CaseConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl CaseConfig {
    /// Resolve into a runnable problem. Structural mismatches are input errors.
    pub fn to_problem(&self) -> Result<(Problem, Overrides)> {
        let mut errs = Vec::new();
        if self.n == 0 {
            errs.push("n must be at least 1".to_string());
        }
        if self.slits.len() != self.n {
            errs.push(format!("n = {} but {} slits given", self.n, self.slits.len()));
        }
        if self.kappa.len() != self.n {
            errs.push(format!("n = {} but {} kappa values given", self.n, self.kappa.len()));
        }
        let zeta_inf = match &self.zeta_inf {
            ZetaInfValue::Named(s) if s == "infinity" => ZetaInf::AtInfinity,
            ZetaInfValue::Named(s) => {
                errs.push(format!("zeta_inf must be {{re, im}} or \"infinity\", got {s:?}"));
                ZetaInf::AtInfinity
            }
            ZetaInfValue::Point(c) => ZetaInf::Finite((*c).into()),
        };
        if let Some(e) = &self.expected {
            if Verdict::parse(e).is_none() {
                errs.push(format!("unknown expected verdict {e:?}"));
            }
        }
        if !errs.is_empty() {
            return Err(Error::InvalidInput(errs));
        }
        let d = NumericsConfig::default();
        let nodes = self.numerics.nodes.unwrap_or(d.nodes);
        let numerics = NumericsConfig {
            nodes,
            order: self.numerics.order.unwrap_or(nodes),
            points: self.numerics.points.unwrap_or(d.points),
            eps_near: self.numerics.eps_near.unwrap_or(d.eps_near),
            tol_solve: d.tol_solve,
        };
        let l = &self.loading;
        let problem = Problem {
            cfg: SlitConfiguration::from_slits(&self.slits, zeta_inf),
            loading: Loading {
                mu: l.mu,
                ..Loading::new(l.tau1, l.tau2, l.tau1_inf, l.tau2_inf)
            },
            materials: MaterialSet::new(self.kappa.clone()),
            free: FreeParameters {
                a0: self.free.a0,
                rho0: self.free.rho0,
                c_m1: self.free.c_m1.into(),
                gamma: self.free.gamma.into(),
                beta0: self.free.beta0,
                antisymmetric: self.free.antisymmetric,
            },
            numerics,
        };
        let overrides = self
            .overrides
            .as_ref()
            .map(|o| Overrides {
                a: o.a.clone(),
                rho: o.rho.clone(),
            })
            .unwrap_or_default();
        Ok((problem, overrides))
    }

    pub fn expected_verdict(&self) -> Option<Verdict> {
        self.expected.as_deref().and_then(Verdict::parse)
    }
}

/// Parse the tolerance override; `None` when unset.
pub fn tol_from_env() -> Result<Option<f64>> {
    match std::env::var(TOL_ENV) {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
            _ => Err(Error::InvalidInput(vec![format!(
                "{TOL_ENV} must be a positive number, got {s:?}"
            )])),
        },
        Err(_) => Ok(None),
    }
}

/// One line of the contour CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub slit_index: usize,
    pub bank: char,
    pub xi: f64,
    pub re_z: f64,
    pub im_z: f64,
}

pub const CSV_HEADER: &str = "slit_index,bank,xi,re_z,im_z";

/// 17 significant digits: enough to reproduce every double exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn contours_csv(result: &SolveResult) -> String {
    let mut out = String::with_capacity(64 * result.profiles.iter().map(|p| p.points.len()).sum::<usize>());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (slit, bank, xi, z) in result.rows() {
        let _ = writeln!(
            out,
            "{slit},{},{},{},{}",
            bank.symbol(),
            fmt_f64(xi),
            fmt_f64(z.re),
            fmt_f64(z.im)
        );
    }
    out
}

pub fn parse_contours_csv(text: &str) -> Result<Vec<ContourRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Csv(format!("expected header {CSV_HEADER:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<ContourRow>().enumerate() {
        let row = rec.map_err(|e| Error::Csv(format!("record {}: {e}", i + 1)))?;
        if row.bank != '+' && row.bank != '-' {
            return Err(Error::Csv(format!("record {}: bank must be '+' or '-'", i + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

impl ContourRow {
    pub fn bank(&self) -> Bank {
        if self.bank == '+' {
            Bank::Upper
        } else {
            Bank::Lower
        }
    }

    pub fn z(&self) -> C64 {
        C64::new(self.re_z, self.im_z)
    }
}

/// Group parsed rows into polylines, one per slit index, in file order.
pub fn polylines(rows: &[ContourRow]) -> Vec<(usize, Vec<C64>)> {
    let mut out: Vec<(usize, Vec<C64>)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((s, pts)) if *s == r.slit_index => pts.push(r.z()),
            _ => out.push((r.slit_index, vec![r.z()])),
        }
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Contours on equal-aspect axes. Depends on nothing but the result.
pub fn render_svg(result: &SolveResult, title: &str) -> String {
    let (w, h, pad) = (640.0f64, 640.0f64, 40.0f64);
    let pts = result.profiles.iter().flat_map(|p| p.points.iter());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (-1.0, -1.0, 1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-300);
    let scale = (w - 2.0 * pad).min(h - 2.0 * pad) / span;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let map = |z: C64| (w / 2.0 + (z.re - cx) * scale, h / 2.0 - (z.im - cy) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ax, ay) = map(C64::new(0.0, 0.0));
    if (0.0..=w).contains(&ax) {
        let _ = writeln!(s, r##"<line x1="{ax:.3}" y1="0" x2="{ax:.3}" y2="{h}" stroke="#bbbbbb" stroke-width="0.5"/>"##);
    }
    if (0.0..=h).contains(&ay) {
        let _ = writeln!(s, r##"<line x1="0" y1="{ay:.3}" x2="{w}" y2="{ay:.3}" stroke="#bbbbbb" stroke-width="0.5"/>"##);
    }
    for p in &result.profiles {
        let colour = PALETTE[p.slit % PALETTE.len()];
        let mut d = String::new();
        for (i, &z) in p.points.iter().enumerate() {
            let (x, y) = map(z);
            let _ = write!(d, "{}{x:.3},{y:.3}", if i == 0 { "M" } else { " L" });
        }
        d.push_str(" Z");
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="{colour}" fill-opacity="0.15" stroke="{colour}" stroke-width="1.5"><title>slit {}</title></path>"#,
            p.slit
        );
    }
    let verdict = result.verdict();
    let tc = if verdict.is_valid() { "#000000" } else { "#d62728" };
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="24" font-family="sans-serif" font-size="14" fill="{tc}">{} : {}</text>"#,
        escape(title),
        verdict
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1B: &str = r#"{
        "n": 2,
        "slits": [[-1, -0.5], [0.5, 1]],
        "zeta_inf": {"re": 0.15, "im": 0},
        "loading": {"tau1": 1, "tau2": 1, "tau1_inf": -1, "tau2_inf": 1},
        "kappa": [5, 5]
    }"#;

    #[test]
    fn defaults_apply() {
        let c = parse_config(FIG1B).unwrap();
        let (p, o) = c.to_problem().unwrap();
        assert_eq!(p.loading.mu, 1.0);
        assert_eq!(p.free, FreeParameters::default());
        assert_eq!(p.numerics, NumericsConfig::default());
        assert!(o.is_empty());
        assert_eq!(p.cfg.endpoints, vec![-1.0, -0.5, 0.5, 1.0]);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_config("{\n  \"n\": 2,\n  \"slits\": [[-1, ]\n}").unwrap_err();
        match err {
            Error::Config { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = FIG1B.replace("\"kappa\"", "\"kapa\": 1, \"kappa\"");
        assert!(matches!(parse_config(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn infinity_string() {
        let text = FIG1B.replace(r#"{"re": 0.15, "im": 0}"#, r#""infinity""#);
        let (p, _) = parse_config(&text).unwrap().to_problem().unwrap();
        assert_eq!(p.cfg.zeta_inf, ZetaInf::AtInfinity);
        let bad = FIG1B.replace(r#"{"re": 0.15, "im": 0}"#, r#""inf""#);
        assert!(matches!(parse_config(&bad).unwrap().to_problem(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn count_mismatch_is_input_error() {
        let text = FIG1B.replace("[5, 5]", "[5]");
        assert!(parse_config(&text).unwrap().to_problem().is_err());
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, f64::MIN_POSITIVE, 0.15 + 0.35] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_rejects_bad_header_and_bank() {
        assert!(parse_contours_csv("a,b\n1,2\n").is_err());
        assert!(parse_contours_csv(&format!("{CSV_HEADER}\n0,x,0,0,0\n")).is_err());
        let ok = parse_contours_csv(&format!("{CSV_HEADER}\n0,+,0.5,1e-3,-2\n")).unwrap();
        assert_eq!(ok[0].bank(), Bank::Upper);
    }

    proptest::proptest! {
        #[test]
        fn fmt_is_exact(bits in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_f64(bits);
            proptest::prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), bits.to_bits());
        }

        #[test]
        fn config_parser_never_panics(s in "\\PC*") {
            let _ = parse_config(&s);
        }
    }
}
