//! Contour profiles and the geometric predicates used to validate them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::branch::Bank;
use crate::mapper::BoundaryValue;
use crate::model::C64;

/// Contours closer than this fraction of their diameter count as touching.
pub const TOUCH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    fn of(points: &[C64]) -> Self {
        points.iter().fold(
            BoundingBox {
                min_x: f64::INFINITY,
                min_y: f64::INFINITY,
                max_x: f64::NEG_INFINITY,
                max_y: f64::NEG_INFINITY,
            },
            |b, p| BoundingBox {
                min_x: b.min_x.min(p.re),
                min_y: b.min_y.min(p.im),
                max_x: b.max_x.max(p.re),
                max_y: b.max_y.max(p.im),
            },
        )
    }

    pub fn diameter(&self) -> f64 {
        (self.max_x - self.min_x).hypot(self.max_y - self.min_y)
    }

    fn expand(&self, d: f64) -> Self {
        BoundingBox {
            min_x: self.min_x - d,
            min_y: self.min_y - d,
            max_x: self.max_x + d,
            max_y: self.max_y + d,
        }
    }

    fn overlaps(&self, o: &BoundingBox) -> bool {
        self.min_x <= o.max_x && o.min_x <= self.max_x && self.min_y <= o.max_y && o.min_y <= self.max_y
    }

    fn union(&self, o: &BoundingBox) -> Self {
        BoundingBox {
            min_x: self.min_x.min(o.min_x),
            min_y: self.min_y.min(o.min_y),
            max_x: self.max_x.max(o.max_x),
            max_y: self.max_y.max(o.max_y),
        }
    }
}

/// The closed image of one slit: upper bank, then lower bank, so that the
/// first and last points coincide up to the closure error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourProfile {
    pub slit: usize,
    pub points: Vec<C64>,
    pub params: Vec<(f64, Bank)>,
    /// Largest mismatch between the two banks at the slit endpoints.
    pub closure_error: f64,
    pub signed_area: f64,
    pub bbox: BoundingBox,
}

fn shoelace(points: &[C64]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (p, q) = (points[i], points[(i + 1) % n]);
            p.re * q.im - q.re * p.im
        })
        .sum::<f64>()
        / 2.0
}

impl ContourProfile {
    /// Build from samples ordered as the mapper emits them: upper bank
    /// left to right, then lower bank right to left.
    pub fn from_samples(slit: usize, samples: &[BoundaryValue]) -> Self {
        let points: Vec<C64> = samples.iter().map(|s| s.z).collect();
        let params = samples.iter().map(|s| (s.xi, s.bank)).collect();
        let half = points.len() / 2;
        let closure_error = if points.len() >= 2 {
            (points[half - 1] - points[half])
                .norm()
                .max((points[points.len() - 1] - points[0]).norm())
        } else {
            0.0
        };
        let mut p = ContourProfile {
            slit,
            signed_area: shoelace(&points),
            bbox: BoundingBox::of(&points),
            points,
            params,
            closure_error,
        };
        p.orient_ccw();
        p
    }

    pub fn diameter(&self) -> f64 {
        self.bbox.diameter()
    }

    /// Reverse the traversal if it is clockwise.
    pub fn orient_ccw(&mut self) {
        if self.signed_area < 0.0 {
            self.points.reverse();
            self.params.reverse();
            self.signed_area = -self.signed_area;
        }
    }

    /// The polygon with repeated vertices removed; the closing edge is implicit.
    pub fn ring(&self) -> Vec<C64> {
        let tol = 1e-12 * self.diameter();
        let mut ring: Vec<C64> = Vec::with_capacity(self.points.len());
        for &p in &self.points {
            if ring.last().is_none_or(|&q: &C64| (p - q).norm() > tol) {
                ring.push(p);
            }
        }
        while ring.len() > 1 && (ring[0] - ring[ring.len() - 1]).norm() <= tol {
            ring.pop();
        }
        ring
    }

    pub fn is_degenerate(&self, scale: f64) -> bool {
        self.signed_area.abs() <= 1e-10 * scale * scale
    }
}

pub fn build_profiles(samples: &[Vec<BoundaryValue>]) -> Vec<ContourProfile> {
    samples
        .iter()
        .enumerate()
        .map(|(m, s)| ContourProfile::from_samples(m, s))
        .collect()
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn point_segment(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn segment_distance(a: C64, b: C64, c: C64, d: C64) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment(a, c, d)
        .min(point_segment(b, c, d))
        .min(point_segment(c, a, b))
        .min(point_segment(d, a, b))
}

struct Edges {
    ends: Vec<(C64, C64)>,
    boxes: Vec<BoundingBox>,
}

fn edges(ring: &[C64], pad: f64) -> Edges {
    let n = ring.len();
    let ends: Vec<(C64, C64)> = (0..n).map(|i| (ring[i], ring[(i + 1) % n])).collect();
    let boxes = ends.iter().map(|&(a, b)| BoundingBox::of(&[a, b]).expand(pad)).collect();
    Edges { ends, boxes }
}

/// True if two non-adjacent edges of the closed polygon cross or come
/// within `TOUCH_TOL` of the diameter of each other.
pub fn self_intersects(profile: &ContourProfile) -> bool {
    let ring = profile.ring();
    let n = ring.len();
    if n < 4 {
        return false;
    }
    let tol = TOUCH_TOL * profile.diameter();
    let e = edges(&ring, tol);
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if !e.boxes[i].overlaps(&e.boxes[j]) {
                continue;
            }
            let (a, b) = e.ends[i];
            let (c, d) = e.ends[j];
            if segment_distance(a, b, c, d) <= tol {
                return true;
            }
        }
    }
    false
}

/// Winding number of the closed polygon around `p`.
pub fn winding_number(ring: &[C64], p: C64) -> i32 {
    let n = ring.len();
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if a.im <= p.im {
            if b.im > p.im && cross(b - a, p - a) > 0.0 {
                w += 1;
            }
        } else if b.im <= p.im && cross(b - a, p - a) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// True if the two closed contours neither cross, touch, nor nest.
pub fn disjoint(p1: &ContourProfile, p2: &ContourProfile) -> bool {
    let (r1, r2) = (p1.ring(), p2.ring());
    if r1.is_empty() || r2.is_empty() {
        return true;
    }
    let tol = TOUCH_TOL * p1.diameter().max(p2.diameter());
    if p1.bbox.expand(tol).overlaps(&p2.bbox) {
        let (e1, e2) = (edges(&r1, tol), edges(&r2, 0.0));
        for (ea, ba) in e1.ends.iter().zip(&e1.boxes) {
            for (eb, bb) in e2.ends.iter().zip(&e2.boxes) {
                if ba.overlaps(bb) && segment_distance(ea.0, ea.1, eb.0, eb.1) <= tol {
                    return false;
                }
            }
        }
    }
    winding_number(&r1, r2[0]) == 0 && winding_number(&r2, r1[0]) == 0
}

/// Diameter of the union of all contours.
pub fn overall_diameter(profiles: &[ContourProfile]) -> f64 {
    profiles
        .iter()
        .map(|p| p.bbox)
        .reduce(|a, b| a.union(&b))
        .map_or(0.0, |b| b.diameter())
}

/// Algebraic least-squares conic fit. Points are centred and scaled to unit
/// RMS radius; the residual is the smallest singular value of the design
/// matrix of `[x^2, xy, y^2, x, y, 1]` over `sqrt(count)`, i.e. the RMS
/// algebraic distance for the best unit-norm coefficient vector. Working
/// with the design matrix rather than its scatter matrix keeps residuals
/// far below `sqrt(eps)` resolvable.
pub fn fit_ellipse(profile: &ContourProfile) -> f64 {
    let pts = profile.ring();
    if pts.len() < 6 {
        return 0.0;
    }
    let count = pts.len() as f64;
    let centre = pts.iter().sum::<C64>() / count;
    let rms = (pts.iter().map(|p| (p - centre).norm_sqr()).sum::<f64>() / count).sqrt();
    if rms == 0.0 {
        return 0.0;
    }
    let design = DMatrix::from_fn(pts.len(), 6, |i, k| {
        let q = (pts[i] - centre) / rms;
        [q.re * q.re, q.re * q.im, q.im * q.im, q.re, q.im, 1.0][k]
    });
    let sv = design.singular_values();
    sv.iter().fold(f64::INFINITY, |m, &v| m.min(v)) / count.sqrt()
}

fn find_partner(profile: &ContourProfile, xi: f64, bank: Bank, tol: f64) -> Option<C64> {
    profile
        .params
        .iter()
        .zip(&profile.points)
        .find(|((x, b), _)| *b == bank && (x - xi).abs() <= tol)
        .map(|(_, &z)| z)
}

/// Symmetry deviations, relative to the overall diameter. `None` when the
/// sample parameters admit no pairing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `omega(-zeta) = 2c - omega(zeta)` about the centroid `c`.
    pub central: Option<f64>,
    /// `omega(conj zeta)` mirrors `omega(zeta)` in the horizontal line through the centroid.
    pub conjugation: Option<f64>,
}

pub fn symmetry_checks(profiles: &[ContourProfile]) -> SymmetryReport {
    let diam = overall_diameter(profiles);
    if profiles.is_empty() || diam == 0.0 {
        return SymmetryReport::default();
    }
    let all: Vec<C64> = profiles.iter().flat_map(|p| p.points.iter().copied()).collect();
    let centre = all.iter().sum::<C64>() / all.len() as f64;
    let n = profiles.len();
    let scale = profiles
        .iter()
        .flat_map(|p| p.params.iter().map(|(x, _)| x.abs()))
        .fold(1.0f64, f64::max);
    let tol = 1e-12 * scale;
    let by_slit = |m: usize| profiles.iter().find(|p| p.slit == m);

    let mut central = Some(0.0f64);
    let mut conjugation = Some(0.0f64);
    for p in profiles {
        let mirror = by_slit(n - 1 - p.slit);
        for (&(xi, bank), &z) in p.params.iter().zip(&p.points) {
            central = match (central, mirror.and_then(|m| find_partner(m, -xi, bank.flip(), tol))) {
                (Some(d), Some(w)) => Some(d.max((z + w - 2.0 * centre).norm())),
                _ => None,
            };
            conjugation = match (conjugation, find_partner(p, xi, bank.flip(), tol)) {
                (Some(d), Some(w)) => {
                    let reflected = C64::new(w.re, 2.0 * centre.im - w.im);
                    Some(d.max((z - reflected).norm()))
                }
                _ => None,
            };
        }
    }
    SymmetryReport {
        central: central.map(|d| d / diam),
        conjugation: conjugation.map(|d| d / diam),
    }
}

fn point_polyline(p: C64, ring: &[C64]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| point_segment(p, ring[i], ring[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between two closed polylines, measured
/// from the vertices of each to the edges of the other.
pub fn hausdorff(p1: &ContourProfile, p2: &ContourProfile) -> f64 {
    let (r1, r2) = (p1.ring(), p2.ring());
    let one = |a: &[C64], b: &[C64]| a.iter().map(|&p| point_polyline(p, b)).fold(0.0f64, f64::max);
    one(&r1, &r2).max(one(&r2, &r1))
}

/// Cumulative arc length of a smooth closed curve `f` on `[0, 2 pi]`,
/// tabulated on a uniform grid by composite Simpson panels.
struct ArcLength<'a> {
    speed: Box<dyn Fn(f64) -> f64 + 'a>,
    grid: Vec<f64>,
    h: f64,
}

impl<'a> ArcLength<'a> {
    const CELLS: usize = 4096;
    const SUB: usize = 8;

    fn new<F: Fn(f64) -> C64 + 'a>(f: F) -> Self {
        // fourth-order centred difference
        let speed = move |t: f64| {
            let e = 1e-3;
            let d = (f(t - 2.0 * e) - 8.0 * f(t - e) + 8.0 * f(t + e) - f(t + 2.0 * e)) / (12.0 * e);
            d.norm()
        };
        let h = 2.0 * std::f64::consts::PI / Self::CELLS as f64;
        let mut grid = vec![0.0; Self::CELLS + 1];
        for k in 0..Self::CELLS {
            grid[k + 1] = grid[k] + simpson(&speed, k as f64 * h, (k + 1) as f64 * h, Self::SUB);
        }
        Self {
            speed: Box::new(speed),
            grid,
            h,
        }
    }

    fn total(&self) -> f64 {
        self.grid[Self::CELLS]
    }

    /// Parameter at which the arc length from 0 equals `s`.
    fn invert(&self, s: f64) -> f64 {
        let k = self.grid.partition_point(|&g| g <= s).clamp(1, Self::CELLS) - 1;
        let t0 = k as f64 * self.h;
        let mut t = t0 + self.h * (s - self.grid[k]) / (self.grid[k + 1] - self.grid[k]).max(1e-300);
        for _ in 0..20 {
            let g = self.grid[k] + simpson(&self.speed, t0, t, 2 * Self::SUB) - s;
            let step = g / (self.speed)(t).max(1e-300);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Largest distance between two closed parametric curves after both are
/// reparameterized by normalized arc length from `t = 0`, over `samples`
/// equally spaced arc-length fractions.
pub fn max_arclength_deviation<F, G>(f: F, g: G, samples: usize) -> f64
where
    F: Fn(f64) -> C64 + Copy,
    G: Fn(f64) -> C64 + Copy,
{
    let (af, ag) = (ArcLength::new(f), ArcLength::new(g));
    (0..samples)
        .map(|i| {
            let frac = i as f64 / samples as f64;
            let zf = f(af.invert(frac * af.total()));
            let zg = g(ag.invert(frac * ag.total()));
            (zf - zg).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn profile_from(points: Vec<C64>) -> ContourProfile {
        let samples: Vec<BoundaryValue> = points
            .iter()
            .enumerate()
            .map(|(i, &z)| BoundaryValue {
                xi: i as f64,
                slit: 0,
                bank: Bank::Upper,
                z,
            })
            .collect();
        ContourProfile::from_samples(0, &samples)
    }

    fn square(offset: C64, side: f64) -> ContourProfile {
        let mut pts = Vec::new();
        let corners = [
            C64::new(0.0, 0.0),
            C64::new(side, 0.0),
            C64::new(side, side),
            C64::new(0.0, side),
        ];
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            for i in 0..10 {
                pts.push(offset + a + (b - a) * (i as f64 / 10.0));
            }
        }
        profile_from(pts)
    }

    fn ellipse(centre: C64, a: f64, b: f64, rot: f64, n: usize) -> ContourProfile {
        let r = C64::from_polar(1.0, rot);
        profile_from(
            (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    centre + r * C64::new(a * t.cos(), b * t.sin())
                })
                .collect(),
        )
    }

    #[test]
    fn orientation_is_normalized_and_idempotent() {
        let mut p = ellipse(C64::new(0.0, 0.0), 2.0, 1.0, 0.0, 50);
        assert!(p.signed_area > 0.0);
        let before = p.clone();
        p.orient_ccw();
        assert_eq!(p, before);
        let cw = profile_from(before.points.iter().rev().copied().collect());
        assert!(cw.signed_area > 0.0);
        assert!((cw.signed_area - before.signed_area).abs() < 1e-12);
    }

    #[test]
    fn ellipse_area() {
        let p = ellipse(C64::new(0.3, -1.0), 2.0, 1.0, 0.4, 4000);
        assert!((p.signed_area - 2.0 * PI).abs() < 1e-5);
    }

    #[test]
    fn squares_far_apart_are_disjoint() {
        let a = square(C64::new(0.0, 0.0), 1.0);
        let d = a.diameter();
        let b = square(C64::new(10.0 * d, 0.0), 1.0);
        assert!(disjoint(&a, &b) && disjoint(&b, &a));
    }

    #[test]
    fn overlapping_and_nested_squares() {
        let a = square(C64::new(0.0, 0.0), 1.0);
        let b = square(C64::new(0.5, 0.5), 1.0);
        let inner = square(C64::new(0.25, 0.25), 0.5);
        assert!(!disjoint(&a, &b) && !disjoint(&b, &a));
        assert!(!disjoint(&a, &inner) && !disjoint(&inner, &a));
    }

    #[test]
    fn touching_squares_are_not_disjoint() {
        let a = square(C64::new(0.0, 0.0), 1.0);
        let b = square(C64::new(1.0 + 1e-12, 0.0), 1.0);
        assert!(!disjoint(&a, &b));
        let c = square(C64::new(1.0 + 1e-6, 0.0), 1.0);
        assert!(disjoint(&a, &c));
    }

    #[test]
    fn figure_eight_self_intersects() {
        let pts = (0..200)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 200.0;
                C64::new(t.sin(), (2.0 * t).sin() / 2.0)
            })
            .collect();
        assert!(self_intersects(&profile_from(pts)));
        assert!(!self_intersects(&ellipse(C64::new(0.0, 0.0), 1.0, 0.2, 0.0, 400)));
    }

    #[test]
    fn conic_fit_residuals() {
        let e = ellipse(C64::new(3.0, 1.0), 5.0, 0.7, 1.1, 300);
        assert!(fit_ellipse(&e) < 1e-12);
        assert!(fit_ellipse(&square(C64::new(0.0, 0.0), 1.0)) > 1e-2);
    }

    #[test]
    fn hausdorff_of_shifted_copy() {
        let a = ellipse(C64::new(0.0, 0.0), 1.0, 0.5, 0.0, 100);
        let b = ellipse(C64::new(1e-3, 0.0), 1.0, 0.5, 0.0, 100);
        let h = hausdorff(&a, &b);
        assert!(h > 0.5e-3 && h <= 1.0001e-3, "{h}");
        assert_eq!(hausdorff(&a, &a), 0.0);
    }

    #[test]
    fn arclength_comparison_ignores_parameterization() {
        let f = |t: f64| C64::new(t.cos(), 0.5 * t.sin());
        let g = |t: f64| f(t + 0.3 * t.sin());
        assert!(max_arclength_deviation(f, g, 500) < 1e-10);
        let shifted = |t: f64| f(t) + C64::new(1e-3, 0.0);
        let d = max_arclength_deviation(f, shifted, 500);
        assert!((d - 1e-3).abs() < 1e-10, "{d}");
    }

    #[test]
    fn degenerate_segment_has_no_area() {
        let pts: Vec<C64> = (0..20)
            .map(|i| C64::new(0.0, i as f64 / 19.0))
            .chain((0..20).map(|i| C64::new(0.0, 1.0 - i as f64 / 19.0)))
            .collect();
        let p = profile_from(pts);
        assert!(p.is_degenerate(1.0));
    }

    proptest::proptest! {
        #[test]
        fn disjoint_is_symmetric(dx in -3.0f64..3.0, dy in -3.0f64..3.0, s in 0.2f64..2.0) {
            let a = square(C64::new(0.0, 0.0), 1.0);
            let b = square(C64::new(dx, dy), s);
            proptest::prop_assert_eq!(disjoint(&a, &b), disjoint(&b, &a));
        }

        #[test]
        fn predicates_invariant_under_similarity(
            dx in -5.0f64..5.0, dy in -5.0f64..5.0, s in 0.1f64..10.0, off in 0.0f64..3.0
        ) {
            let e1 = ellipse(C64::new(0.0, 0.0), 1.0, 0.4, 0.0, 120);
            let e2 = ellipse(C64::new(off, 0.3), 1.0, 0.4, 0.7, 120);
            let moved = |p: &ContourProfile| profile_from(p.points.iter().map(|&z| C64::new(dx, dy) + s * z).collect());
            let (m1, m2) = (moved(&e1), moved(&e2));
            proptest::prop_assert_eq!(disjoint(&e1, &e2), disjoint(&m1, &m2));
            proptest::prop_assert_eq!(self_intersects(&e1), self_intersects(&m1));
        }
    }
}
