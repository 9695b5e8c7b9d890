use inclusion_forge::branch::Bank;
use inclusion_forge::figures::{self, solve_figure};
use inclusion_forge::geometry::{self, hausdorff, max_arclength_deviation};
use inclusion_forge::io::{contours_csv, parse_contours_csv, polylines, render_svg};
use inclusion_forge::mapper::SingleInclusion;
use inclusion_forge::model::{FreeParameters, Loading, MaterialSet, NumericsConfig, SlitConfiguration, ZetaInf};
use inclusion_forge::pipeline::{solve, Problem, Verdict};
use inclusion_forge::C64;

fn figure(name: &str) -> Problem {
    figures::figure(name).unwrap().to_problem().unwrap().0
}

#[test]
fn fig3a_has_three_valid_contours() {
    let r = solve(&figure("fig3a")).unwrap();
    assert_eq!(r.verdict(), Verdict::Valid);
    assert_eq!(r.profiles.len(), 3);
}

#[test]
fn fig4a_contours_are_mutually_disjoint() {
    let r = solve(&figure("fig4a")).unwrap();
    for i in 0..3 {
        assert!(!geometry::self_intersects(&r.profiles[i]));
        for j in 0..3 {
            if i != j {
                assert!(geometry::disjoint(&r.profiles[i], &r.profiles[j]));
            }
        }
    }
}

#[test]
fn fig4d_contours_intersect() {
    let r = solve(&figure("fig4d")).unwrap();
    assert_eq!(r.verdict(), Verdict::InvalidGeometry);
    assert!(!r.diagnostics.overlapping_pairs.is_empty());
}

#[test]
fn violated_conditions_change_the_contours() {
    let c = solve_figure(&figures::figure("fig2c").unwrap(), None).unwrap();
    let d = solve_figure(&figures::figure("fig2d").unwrap(), None).unwrap();
    assert_eq!(d.verdict(), Verdict::InvalidUnbounded);
    assert_eq!(d.profiles.len(), 2);
    let gap = hausdorff(&c.profiles[1], &d.profiles[1]);
    assert!(gap > 1e-2 * c.profiles[1].diameter(), "{gap}");
}

/// A polyline can be no closer to the curve than its chord sagitta, about
/// `(pi / P)^2 / 8` of the radius, so the refinement is run at a density
/// where that bound sits well below the tolerance.
#[test]
fn refinement_converges() {
    let mut p = figure("fig1b");
    p.numerics.points = 2000;
    let coarse = solve(&p).unwrap();
    p.numerics.points = 4000;
    let fine = solve(&p).unwrap();
    for (a, b) in coarse.profiles.iter().zip(&fine.profiles) {
        let h = hausdorff(a, b);
        assert!(h < 1e-6 * a.diameter(), "{h} vs {}", a.diameter());
    }
}

#[test]
fn slit_and_circular_maps_coincide_at_twice_the_scale() {
    let loading = Loading::new(1.0, 1.0, -1.0, 1.0);
    let mats = MaterialSet::new(vec![5.0]);
    for (slit, circ) in [(1.0, 0.5), (2.0, 1.0)] {
        let s = SingleInclusion::new(&loading, &mats, &FreeParameters::with_scale(C64::new(slit, 0.0))).unwrap();
        let f = |t: f64| s.slit_profile(t.cos(), if t.sin() >= 0.0 { Bank::Upper } else { Bank::Lower });
        let g = |t: f64| s.circular_profile(C64::new(circ, 0.0), t).unwrap();
        assert!(max_arclength_deviation(f, g, 1000) < 1e-8);
    }
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let r = solve(&figure("fig3c")).unwrap();
    let text = contours_csv(&r);
    let rows = parse_contours_csv(&text).unwrap();
    let lines = polylines(&rows);
    assert_eq!(lines.len(), r.profiles.len());
    for ((slit, pts), prof) in lines.iter().zip(&r.profiles) {
        assert_eq!(*slit, prof.slit);
        assert_eq!(pts.len(), prof.points.len());
        for (a, b) in pts.iter().zip(&prof.points) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
    for (row, (_, bank, xi, _)) in rows.iter().zip(r.rows()) {
        assert_eq!(row.bank(), bank);
        assert_eq!(row.xi.to_bits(), xi.to_bits());
    }
}

#[test]
fn svg_matches_golden_file() {
    let r = solve(&figure("fig1a")).unwrap();
    let svg = render_svg(&r, "fig1a");
    assert_eq!(svg, render_svg(&r, "fig1a"));
    let golden = include_str!("golden/fig1a.svg");
    assert_eq!(svg, golden);
}

#[test]
fn four_inclusions_satisfy_both_problems() {
    let p = Problem {
        cfg: SlitConfiguration::new(
            vec![-1.0, -0.7, -0.45, -0.25, 0.2, 0.4, 0.7, 1.0],
            ZetaInf::Finite(C64::new(0.1, 0.6)),
        ),
        loading: Loading::new(1.0, 0.5, -1.0, 0.5),
        materials: MaterialSet::new(vec![0.3, 2.0, 0.5, 4.0]),
        free: FreeParameters::default(),
        numerics: NumericsConfig::default(),
    };
    let r = solve(&p).unwrap();
    let d = &r.diagnostics;
    assert!(d.boundedness_max < 1e-12, "{d:?}");
    assert!(d.schwarz_first_max < 1e-9 && d.schwarz_second_max < 1e-9, "{d:?}");
    assert!(d.cross_check_deviation.is_none());
    assert_eq!(r.profiles.len(), 4);
}

#[test]
fn pole_at_infinity_rejected_for_four_inclusions() {
    let p = Problem {
        cfg: SlitConfiguration::new(vec![-1.0, -0.7, -0.45, -0.25, 0.2, 0.4, 0.7, 1.0], ZetaInf::AtInfinity),
        loading: Loading::new(1.0, 0.5, -1.0, 0.5),
        materials: MaterialSet::new(vec![0.3; 4]),
        free: FreeParameters::default(),
        numerics: NumericsConfig::default(),
    };
    assert!(solve(&p).unwrap_err().is_input_error());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]

    #[test]
    fn translation_moves_every_point(re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let mut p = figure("fig3c");
        p.numerics.points = 40;
        let base = solve(&p).unwrap();
        p.free.gamma = C64::new(re, im);
        let moved = solve(&p).unwrap();
        proptest::prop_assert_eq!(base.verdict(), moved.verdict());
        for (u, v) in base.rows().zip(moved.rows()) {
            proptest::prop_assert!((v.3 - u.3 - C64::new(re, im)).norm() < 1e-12);
        }
    }

    #[test]
    fn real_scaling_keeps_the_verdict(s in 0.1f64..10.0, name in proptest::sample::select(vec!["fig1c", "fig3d", "fig4b", "fig4d"])) {
        let mut p = figure(name);
        p.numerics.points = 60;
        let base = solve(&p).unwrap();
        p.free.c_m1 = C64::new(s, 0.0);
        let scaled = solve(&p).unwrap();
        proptest::prop_assert_eq!(base.verdict(), scaled.verdict());
        for (u, v) in base.rows().zip(scaled.rows()) {
            proptest::prop_assert!((v.3 - s * u.3).norm() < 1e-10 * (1.0 + v.3.norm()));
        }
    }
}
