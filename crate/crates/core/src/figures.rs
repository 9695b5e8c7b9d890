//! The bundled figure configurations and their batch reproduction.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::io::{contours_csv, parse_config, render_svg, CaseConfig};
use crate::pipeline::{solve_with_overrides, SolveResult, Verdict};

macro_rules! figure {
    ($name:literal) => {
        ($name, include_str!(concat!("../figures/", $name, ".json")))
    };
}

pub const FIGURES: &[(&str, &str)] = &[
    figure!("fig1a"),
    figure!("fig1b"),
    figure!("fig1c"),
    figure!("fig1d"),
    figure!("fig2a"),
    figure!("fig2b"),
    figure!("fig2c"),
    figure!("fig2d"),
    figure!("fig3a"),
    figure!("fig3b"),
    figure!("fig3c"),
    figure!("fig3d"),
    figure!("fig4a"),
    figure!("fig4b"),
    figure!("fig4c"),
    figure!("fig4d"),
];

pub fn figure(name: &str) -> Option<CaseConfig> {
    FIGURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_config(text).expect("bundled figure config parses"))
}

pub fn all() -> Vec<(String, CaseConfig)> {
    FIGURES
        .iter()
        .map(|(n, text)| (n.to_string(), parse_config(text).expect("bundled figure config parses")))
        .collect()
}

#[derive(Clone, Debug)]
pub struct FigureOutcome {
    pub name: String,
    pub expected: Verdict,
    /// The verdict, or the error message if the solve failed outright.
    pub outcome: std::result::Result<Verdict, String>,
    pub contours: usize,
}

impl FigureOutcome {
    pub fn matches(&self) -> bool {
        self.outcome.as_ref().is_ok_and(|v| *v == self.expected)
    }

    pub fn verdict_str(&self) -> String {
        match &self.outcome {
            Ok(v) => v.to_string(),
            Err(e) => format!("ERROR ({e})"),
        }
    }
}

/// Solve one bundled figure with an optional tolerance override.
pub fn solve_figure(cfg: &CaseConfig, tol: Option<f64>) -> Result<SolveResult> {
    let (mut problem, overrides) = cfg.to_problem()?;
    if let Some(t) = tol {
        problem.numerics.tol_solve = t;
    }
    solve_with_overrides(&problem, &overrides)
}

/// Write `<name>.svg`, `<name>.csv` and `<name>.diag.json` for every figure
/// plus `summary.tsv` into `out`.
pub fn reproduce(out: &Path, tol: Option<f64>) -> Result<Vec<FigureOutcome>> {
    fs::create_dir_all(out)?;
    let mut outcomes = Vec::new();
    for (name, cfg) in all() {
        let expected = cfg.expected_verdict().unwrap_or(Verdict::Valid);
        let (outcome, contours) = match solve_figure(&cfg, tol) {
            Ok(res) => {
                fs::write(out.join(format!("{name}.svg")), render_svg(&res, &name))?;
                fs::write(out.join(format!("{name}.csv")), contours_csv(&res))?;
                let diag = serde_json::to_string_pretty(&res.diagnostics).expect("diagnostics serialize");
                fs::write(out.join(format!("{name}.diag.json")), diag + "\n")?;
                (Ok(res.verdict()), res.profiles.len())
            }
            Err(e) => (Err(e.to_string()), 0),
        };
        outcomes.push(FigureOutcome {
            name,
            expected,
            outcome,
            contours,
        });
    }
    fs::write(out.join("summary.tsv"), summary_table(&outcomes))?;
    Ok(outcomes)
}

pub fn summary_table(outcomes: &[FigureOutcome]) -> String {
    let mut s = String::from("figure\texpected\tverdict\tcontours\tstatus\n");
    for o in outcomes {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            o.name,
            o.expected,
            o.verdict_str(),
            o.contours,
            if o.matches() { "ok" } else { "MISMATCH" }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_parses_and_resolves() {
        for (name, cfg) in all() {
            assert_eq!(cfg.name.as_deref(), Some(name.as_str()));
            cfg.to_problem().unwrap();
            assert!(cfg.expected_verdict().is_some());
        }
        assert_eq!(FIGURES.len(), 16);
    }

    #[test]
    fn figure_verdicts() {
        let mut bad = Vec::new();
        for (name, cfg) in all() {
            let expected = cfg.expected_verdict().unwrap();
            match solve_figure(&cfg, None) {
                Ok(r) if r.verdict() == expected => {}
                Ok(r) => bad.push(format!("{name}: {} {:?}", r.verdict(), r.diagnostics.reasons)),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
        assert!(bad.is_empty(), "{bad:#?}");
    }
}
