//! Gauss-Chebyshev quadrature and Cauchy integrals with the inverse
//! square-root endpoint weight.
//!
//! Every integral over an interval `[a, b]` is written as
//!
//! ```text
//!     int_a^b h(eta) / sqrt((eta - a)(b - eta)) * K(eta) d eta
//! ```
//!
//! with a smooth `h`. After the affine change `eta = d+ + d- y` the density
//! `h` is expanded in Chebyshev polynomials `T_m(y)`, and the Cauchy kernel
//! is integrated termwise in closed form: `pi U_{m-1}(x)` on the interval and
//! `-2 pi w^{m+1} / (1 - w^2)` off it, where `w` is the root of
//! `w^2 - 2 x w + 1 = 0` inside the unit disk.

use std::f64::consts::PI;

use serde::Serialize;

use crate::model::C64;

/// Gauss-Chebyshev nodes `cos((2j - 1) pi / 2N)`, `j = 1..=N`, on `[-1, 1]`.
pub fn cheb_nodes(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |j| ((2 * j - 1) as f64 * PI / (2 * n) as f64).cos())
}

/// `int_a^b h(xi) / sqrt((xi - a)(b - xi)) d xi` by the `N`-point Gauss-Chebyshev rule.
pub fn gauss_cheb<F: Fn(f64) -> f64>(h: F, a: f64, b: f64, n: usize) -> f64 {
    let (dp, dm) = ((b + a) / 2.0, (b - a) / 2.0);
    let s: f64 = cheb_nodes(n).map(|x| h(dp + dm * x)).sum();
    PI / n as f64 * s
}

/// Chebyshev expansion of a smooth density on `[a, b]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebyshevSeries {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

/// Coefficients `alpha_0..=alpha_M` of `h` from its values at the `N` Gauss-Chebyshev nodes.
pub fn cheb_coeffs<F: Fn(f64) -> f64>(h: F, a: f64, b: f64, n: usize, m: usize) -> ChebyshevSeries {
    let (dp, dm) = ((b + a) / 2.0, (b - a) / 2.0);
    let thetas: Vec<f64> = (1..=n)
        .map(|j| (2 * j - 1) as f64 * PI / (2 * n) as f64)
        .collect();
    let vals: Vec<f64> = thetas.iter().map(|t| h(dp + dm * t.cos())).collect();
    ChebyshevSeries::from_node_values(a, b, &vals, &thetas, m)
}

impl ChebyshevSeries {
    fn from_node_values(a: f64, b: f64, vals: &[f64], thetas: &[f64], m: usize) -> Self {
        let n = vals.len() as f64;
        let coeffs = (0..=m)
            .map(|k| {
                let s: f64 = vals
                    .iter()
                    .zip(thetas)
                    .map(|(v, t)| v * (k as f64 * t).cos())
                    .sum();
                if k == 0 {
                    s / n
                } else {
                    2.0 * s / n
                }
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn new(a: f64, b: f64, coeffs: Vec<f64>) -> Self {
        Self { a, b, coeffs }
    }

    pub fn delta_plus(&self) -> f64 {
        (self.b + self.a) / 2.0
    }

    pub fn delta_minus(&self) -> f64 {
        (self.b - self.a) / 2.0
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn unit(&self, xi: f64) -> f64 {
        (xi - self.delta_plus()) / self.delta_minus()
    }

    /// `|alpha_M| / max |alpha_m|`, zero for an identically vanishing series.
    pub fn truncation_ratio(&self) -> f64 {
        let max = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        match self.coeffs.last() {
            Some(last) if max > 0.0 => last.abs() / max,
            _ => 0.0,
        }
    }

    /// The expanded density at `xi` (Clenshaw).
    pub fn eval(&self, xi: f64) -> f64 {
        let y = self.unit(xi);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * y * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + y * b1 - b2
    }

    /// Principal value `int h / (sqrt((eta-a)(b-eta)) (eta - xi))` for `a < xi < b`.
    pub fn singular_on(&self, xi: f64) -> f64 {
        let y = self.unit(xi);
        // sum_{k>=0} alpha_{k+1} U_k(y) by Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * y * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        PI / self.delta_minus() * b1
    }

    /// `int h / (sqrt((eta-a)(b-eta)) (eta - zeta))` for `zeta` off `[a, b]`.
    pub fn cauchy_off(&self, zeta: C64) -> C64 {
        let dm = self.delta_minus();
        let x = (zeta - self.delta_plus()) / dm;
        let s = (x - 1.0).sqrt() * (x + 1.0).sqrt();
        let w = (x + s).inv();
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * w + c);
        -2.0 * PI * w / ((1.0 - w * w) * dm) * poly
    }

    /// Real-valued Cauchy integral at a real point outside the interval.
    pub fn cauchy_off_real(&self, xi: f64) -> f64 {
        self.cauchy_off(C64::new(xi, 0.0)).re
    }

    /// Cauchy integral at a real point: principal value inside, ordinary value outside.
    pub fn cauchy_real(&self, xi: f64) -> f64 {
        if self.a < xi && xi < self.b {
            self.singular_on(xi)
        } else {
            self.cauchy_off_real(xi)
        }
    }

    /// Distance from `zeta` to the interval relative to its length.
    pub fn relative_distance(&self, zeta: C64) -> f64 {
        let x = zeta.re.clamp(self.a, self.b);
        (zeta - x).norm() / (self.b - self.a)
    }

    /// Series of `h(eta) (eta - a)(b - eta)`, exact in coefficient space.
    pub fn times_weight(&self) -> ChebyshevSeries {
        let m = self.coeffs.len();
        let mut out = vec![0.0; m + 2];
        // (1 - y^2) T_k = T_k / 2 - T_{k+2} / 4 - T_{|k-2|} / 4
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k] += c / 2.0;
            out[k + 2] -= c / 4.0;
            out[k.abs_diff(2)] -= c / 4.0;
        }
        let s = self.delta_minus().powi(2);
        out.iter_mut().for_each(|c| *c *= s);
        ChebyshevSeries::new(self.a, self.b, out)
    }
}

/// Chebyshev points of the second kind on `[a, b]`, ascending, endpoints included.
pub fn cheb_lobatto(a: f64, b: f64, p: usize) -> Vec<f64> {
    let (dp, dm) = ((b + a) / 2.0, (b - a) / 2.0);
    let mut pts: Vec<f64> = (0..p)
        .map(|i| dp - dm * (PI * i as f64 / (p - 1) as f64).cos())
        .collect();
    pts[0] = a;
    pts[p - 1] = b;
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(m: usize, y: f64) -> f64 {
        (m as f64 * y.acos()).cos()
    }

    fn u(m: usize, y: f64) -> f64 {
        let th = y.acos();
        ((m + 1) as f64 * th).sin() / th.sin()
    }

    /// Composite Simpson on `theta` in `[0, pi]` with `eta = d+ + d- cos(theta)`:
    /// an independent route to weighted integrals of smooth densities.
    fn simpson_theta<F: Fn(f64) -> f64>(h: F, a: f64, b: f64, panels: usize) -> f64 {
        let (dp, dm) = ((b + a) / 2.0, (b - a) / 2.0);
        let hstep = PI / panels as f64;
        let f = |th: f64| h(dp + dm * th.cos());
        let mut s = f(0.0) + f(PI);
        for i in 1..panels {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * hstep);
        }
        s * hstep / 3.0
    }

    #[test]
    fn gauss_cheb_constant_is_pi() {
        assert!((gauss_cheb(|_| 1.0, -1.0, 1.0, 8) - PI).abs() < 1e-14);
    }

    #[test]
    fn gauss_cheb_odd_vanishes() {
        assert!(gauss_cheb(|x| x, -1.0, 1.0, 8).abs() < 1e-15);
    }

    #[test]
    fn gauss_cheb_square() {
        // int x^2 / sqrt(1 - x^2) = pi / 2
        assert!((gauss_cheb(|x| x * x, -1.0, 1.0, 8) - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_cheb_exact_to_degree_2n_minus_1() {
        let n = 10;
        let (a, b) = (0.3, 1.7);
        let p = |x: f64| (0..2 * n).map(|k| (k as f64 + 1.0) * 0.1 * x.powi(k as i32)).sum::<f64>();
        let oracle = simpson_theta(p, a, b, 4000);
        assert!((gauss_cheb(p, a, b, n) - oracle).abs() < 1e-9 * oracle.abs());
    }

    #[test]
    fn coeffs_of_t2() {
        let s = cheb_coeffs(|y| t(2, y), -1.0, 1.0, 16, 8);
        for (k, c) in s.coeffs.iter().enumerate() {
            let e = if k == 2 { 1.0 } else { 0.0 };
            assert!((c - e).abs() < 1e-14, "k={k} c={c}");
        }
    }

    #[test]
    fn coeffs_of_constant_and_cube() {
        let s = cheb_coeffs(|_| 1.0, -1.0, 1.0, 16, 8);
        assert!((s.coeffs[0] - 1.0).abs() < 1e-15);
        let s = cheb_coeffs(|y| y * y * y, -1.0, 1.0, 16, 8);
        assert!((s.coeffs[1] - 0.75).abs() < 1e-14);
        assert!((s.coeffs[3] - 0.25).abs() < 1e-14);
        assert!(s.coeffs[0].abs() < 1e-14 && s.coeffs[2].abs() < 1e-14);
    }

    #[test]
    fn singular_on_chebyshev_polynomials() {
        let s = ChebyshevSeries::new(-1.0, 1.0, vec![0.0, 1.0]);
        for x in [-0.9, -0.2, 0.0, 0.5, 0.77] {
            assert!((s.singular_on(x) - PI).abs() < 1e-14);
        }
        let s = ChebyshevSeries::new(-1.0, 1.0, vec![1.0]);
        assert_eq!(s.singular_on(0.3), 0.0);
        for m in 1..12 {
            let mut c = vec![0.0; m + 1];
            c[m] = 1.0;
            let s = ChebyshevSeries::new(-1.0, 1.0, c);
            for x in [-0.8, 0.1, 0.6] {
                assert!((s.singular_on(x) - PI * u(m - 1, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_on_square() {
        let s = cheb_coeffs(|y| y * y, -1.0, 1.0, 16, 16);
        assert!((s.singular_on(0.5) - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn cauchy_off_constant_at_two() {
        let s = ChebyshevSeries::new(-1.0, 1.0, vec![1.0]);
        let v = s.cauchy_off(C64::new(2.0, 0.0));
        assert!((v.re + PI / 3f64.sqrt()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        // direct quadrature of the regular integrand
        let q = gauss_cheb(|y| 1.0 / (y - 2.0), -1.0, 1.0, 256);
        assert!((q - v.re).abs() < 1e-13);
    }

    #[test]
    fn cauchy_off_far_field() {
        let s = ChebyshevSeries::new(-1.0, 1.0, vec![1.0]);
        let z = C64::new(1e6, 0.0);
        let v = s.cauchy_off(z);
        assert!(((v * z / -PI) - 1.0).norm() < 1e-5);
    }

    #[test]
    fn cauchy_off_matches_quadrature_on_shifted_interval() {
        let (a, b) = (0.2, 1.4);
        let h = |x: f64| (x * 1.3).sin() + x * x;
        let s = cheb_coeffs(h, a, b, 64, 64);
        for z in [C64::new(3.0, 0.5), C64::new(-1.0, -2.0), C64::new(0.8, 0.7), C64::new(1.9, 0.0)] {
            let re = gauss_cheb(|x| (h(x) / (C64::new(x, 0.0) - z)).re, a, b, 2000);
            let im = gauss_cheb(|x| (h(x) / (C64::new(x, 0.0) - z)).im, a, b, 2000);
            let v = s.cauchy_off(z);
            assert!((v - C64::new(re, im)).norm() < 1e-10, "{z}: {v} vs {re}+{im}i");
        }
    }

    #[test]
    fn real_argument_gives_real_value() {
        let s = cheb_coeffs(|x| x.exp(), -0.5, 0.5, 32, 32);
        for x in [0.6, 2.0, -0.7, -10.0] {
            assert!(s.cauchy_off(C64::new(x, 0.0)).im.abs() < 1e-14);
        }
    }

    #[test]
    fn plemelj_average_is_principal_value() {
        let (a, b) = (-0.4, 0.9);
        let s = cheb_coeffs(|x| 1.0 + x * x * x - 0.3 * x, a, b, 32, 32);
        for xi in [-0.1, 0.3, 0.7] {
            let eps = 1e-5;
            let up = s.cauchy_off(C64::new(xi, eps));
            let dn = s.cauchy_off(C64::new(xi, -eps));
            let avg = (up + dn) / 2.0;
            assert!((avg.re - s.singular_on(xi)).abs() < 1e-3);
            // the jump is 2 pi i times the weighted density
            let w = ((xi - a) * (b - xi)).sqrt();
            assert!(((up - dn).im - 2.0 * PI * s.eval(xi) / w).abs() < 1e-3);
        }
    }

    #[test]
    fn pv_matches_subtraction_oracle() {
        let (a, b) = (0.5, 1.0);
        let h = |x: f64| 1.0 / (x + 0.3) + x;
        let s = cheb_coeffs(h, a, b, 64, 64);
        let (dp, dm) = ((b + a) / 2.0, (b - a) / 2.0);
        for xi in [0.55, 0.75, 0.93] {
            let x0 = (xi - dp) / dm;
            let th0 = x0.acos();
            let hx = h(xi);
            // PV int_0^pi dtheta / (cos theta - cos th0) = 0
            let n = 200_000;
            let mut acc = 0.0;
            for i in 0..n {
                let th = (i as f64 + 0.5) * PI / n as f64;
                let d = th.cos() - x0;
                if (th - th0).abs() > 1e-9 {
                    acc += (h(dp + dm * th.cos()) - hx) / d;
                }
            }
            let oracle = acc * PI / n as f64 / dm;
            assert!((s.singular_on(xi) - oracle).abs() < 1e-7, "{xi}");
        }
    }

    #[test]
    fn times_weight_matches_sampling() {
        let (a, b) = (0.1, 0.9);
        let h = |x: f64| (2.0 * x).cos();
        let s = cheb_coeffs(h, a, b, 40, 40).times_weight();
        for x in [0.1, 0.3, 0.55, 0.9] {
            assert!((s.eval(x) - h(x) * (x - a) * (b - x)).abs() < 1e-14);
        }
    }

    #[test]
    fn doubling_nodes_is_stable() {
        let h = |x: f64| 1.0 / (x - 1.5);
        for xi in [-0.5, 0.2] {
            let s1 = cheb_coeffs(h, -1.0, 1.0, 64, 64).singular_on(xi);
            let s2 = cheb_coeffs(h, -1.0, 1.0, 128, 128).singular_on(xi);
            assert!((s1 - s2).abs() < 1e-10);
        }
        let g1 = gauss_cheb(h, -1.0, 1.0, 64);
        let g2 = gauss_cheb(h, -1.0, 1.0, 128);
        assert!((g1 - g2).abs() < 1e-10);
    }

    #[test]
    fn lobatto_points_include_endpoints() {
        let p = cheb_lobatto(0.5, 1.0, 17);
        assert_eq!(p[0], 0.5);
        assert_eq!(p[16], 1.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn t_and_u_helpers_agree_with_recurrence() {
        assert!((t(3, 0.4) - (4.0 * 0.064 - 3.0 * 0.4)).abs() < 1e-14);
        assert!((u(1, 0.4) - 0.8).abs() < 1e-14);
    }
}
