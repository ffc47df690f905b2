//! Double-exponential (tanh-sinh) quadrature.
//!
//! The core integrator handles endpoint singularities of algebraic type. To
//! keep singular factors accurate all the way into the endpoint region, the
//! integrand receives, besides the abscissa, its exact distances to both
//! endpoints as computed from the double-exponential substitution (the
//! abscissa itself rounds onto the endpoint long before the quadrature
//! weights become negligible).
//!
//! On top of the core routine this module provides:
//!
//! * smooth finite-interval and complex-segment integration,
//! * integration over the whole real line with a prescribed set of interior
//!   singular points, where the two infinite tails are mapped to finite
//!   intervals by `u = 1/s` and softened by a damping factor `(|s|/X)^(-eps)`.

use num_complex::Complex64;
use num_traits::Zero;

/// Result of a single quadrature evaluation.
#[derive(Clone, Copy, Debug)]
pub struct QuadOutcome {
    pub value: Complex64,
    /// Difference between the last two refinement levels.
    pub err_estimate: f64,
    pub evals: usize,
}

impl QuadOutcome {
    fn zero() -> Self {
        QuadOutcome {
            value: Complex64::zero(),
            err_estimate: 0.0,
            evals: 0,
        }
    }

    fn accumulate(&mut self, other: &QuadOutcome) {
        self.value += other.value;
        self.err_estimate += other.err_estimate;
        self.evals += other.evals;
    }
}

fn ln_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (1.0 + (-2.0 * a).exp()).ln() - std::f64::consts::LN_2
}

/// Tanh-sinh integration of `f` over `(a, b)`.
///
/// `f(x, da, db)` receives the abscissa together with accurate distances
/// `da = x - a` and `db = b - x`. Integrable endpoint singularities should be
/// computed from `da` / `db`, not from `x` itself.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> QuadOutcome
where
    F: Fn(f64, f64, f64) -> Complex64,
{
    assert!(b > a, "tanh_sinh requires a nonempty interval");
    let h = 0.5 * (b - a);
    let half_pi = std::f64::consts::FRAC_PI_2;

    // Evaluate the transformed integrand at parameter t; returns f * weight.
    let eval = |t: f64| -> Option<Complex64> {
        let u = half_pi * t.sinh();
        let lw = (h * half_pi * t.cosh()).ln() - 2.0 * ln_cosh(u);
        if lw < -700.0 {
            return None;
        }
        let w = lw.exp();
        // Distances to the endpoints, stable for |u| large.
        let da = h * 2.0 / ((-2.0 * u).exp() + 1.0);
        let db = h * 2.0 / ((2.0 * u).exp() + 1.0);
        if da <= 0.0 || db <= 0.0 {
            return None;
        }
        let x = if u >= 0.0 { b - db } else { a + da };
        let v = f(x, da, db);
        if !v.re.is_finite() || !v.im.is_finite() {
            return None;
        }
        Some(v * w)
    };

    let t_cap = 6.8; // sinh(6.8)*pi/2 ~ 700: weights underflow beyond this
    let max_level = 12usize;
    let mut evals = 0usize;

    // Level 0: step 1.
    let mut sum = Complex64::zero();
    if let Some(v) = eval(0.0) {
        sum += v;
        evals += 1;
    }
    for sign in [-1.0f64, 1.0] {
        let mut k = 1;
        loop {
            let t = sign * k as f64;
            if t.abs() > t_cap {
                break;
            }
            match eval(t) {
                Some(v) => {
                    sum += v;
                    evals += 1;
                    if v.norm() < 1e-300 {
                        break;
                    }
                }
                None => break,
            }
            k += 1;
        }
    }
    let mut step = 1.0f64;
    let mut total = sum * step;
    let mut err = f64::INFINITY;

    for _level in 1..=max_level {
        step *= 0.5;
        // New points: odd multiples of the new step.
        let mut newsum = Complex64::zero();
        for sign in [-1.0f64, 1.0] {
            let mut k = 1u64;
            loop {
                let t = sign * (k as f64) * step;
                if t.abs() > t_cap {
                    break;
                }
                match eval(t) {
                    Some(v) => {
                        newsum += v;
                        evals += 1;
                        if v.norm() < 1e-300 {
                            break;
                        }
                    }
                    None => break,
                }
                k += 2;
            }
        }
        let new_total = total * 0.5 + newsum * step;
        err = (new_total - total).norm();
        total = new_total;
        if err <= tol * total.norm().max(1e-30) && _level >= 3 {
            break;
        }
    }

    QuadOutcome {
        value: total,
        err_estimate: err,
        evals,
    }
}

/// Integration of a smooth function over a finite interval.
pub fn integrate_smooth<F>(f: F, a: f64, b: f64, tol: f64) -> QuadOutcome
where
    F: Fn(f64) -> Complex64,
{
    tanh_sinh(|x, _, _| f(x), a, b, tol)
}

/// Contour integral of `f` along the straight segment from `z0` to `z1`.
pub fn integrate_segment<F>(f: F, z0: Complex64, z1: Complex64, tol: f64) -> QuadOutcome
where
    F: Fn(Complex64) -> Complex64,
{
    let dz = z1 - z0;
    let mut out = tanh_sinh(|s, _, _| f(z0 + dz * s), 0.0, 1.0, tol);
    out.value *= dz;
    out.err_estimate *= dz.norm();
    out
}

/// Integration of `g` over the whole real line.
///
/// `points` lists the interior singular points of `g` (sorted ascending,
/// distinct). The integrand receives the abscissa and a slice of *signed*
/// distances `s - points[j]`, accurate near each singular point. The two
/// tails `|s| > cutoff` are mapped to finite intervals by `u = 1/s` and
/// multiplied by the damping factor `(|s|/cutoff)^(-damp_eps)`.
///
/// Returns the outcome together with the tail cutoff used.
pub fn real_line_integral<G>(g: &G, points: &[f64], damp_eps: f64, tol: f64) -> (QuadOutcome, f64)
where
    G: Fn(f64, &[f64]) -> Complex64,
{
    assert!(!points.is_empty(), "need at least one singular point");
    assert!(
        points.windows(2).all(|w| w[0] < w[1]),
        "singular points must be sorted and distinct"
    );
    let maxabs = points.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let cutoff = 2.0 * maxabs.max(1.0);

    let npts = points.len();
    let mut out = QuadOutcome::zero();

    // Distances helper: plain differences everywhere, overridden for the
    // endpoints adjacent to the current segment.
    let fill_dists = |s: f64, dists: &mut [f64]| {
        for (d, p) in dists.iter_mut().zip(points) {
            *d = s - p;
        }
    };

    // Interior segments between consecutive singular points.
    for (ia, w) in points.windows(2).enumerate() {
        let (pa, pb) = (w[0], w[1]);
        let ib = ia + 1;
        let seg = tanh_sinh(
            |s, da, db| {
                let mut d = vec![0.0f64; npts];
                fill_dists(s, &mut d);
                d[ia] = da;
                d[ib] = -db;
                g(s, &d)
            },
            pa,
            pb,
            tol,
        );
        out.accumulate(&seg);
    }

    // Finite outer segments [-cutoff, p_first] and [p_last, cutoff].
    {
        let p0 = points[0];
        let seg = tanh_sinh(
            |s, _da, db| {
                let mut d = vec![0.0f64; npts];
                fill_dists(s, &mut d);
                d[0] = -db;
                g(s, &d)
            },
            -cutoff,
            p0,
            tol,
        );
        out.accumulate(&seg);
        let pl = points[npts - 1];
        let seg = tanh_sinh(
            |s, da, _db| {
                let mut d = vec![0.0f64; npts];
                fill_dists(s, &mut d);
                d[npts - 1] = da;
                g(s, &d)
            },
            pl,
            cutoff,
            tol,
        );
        out.accumulate(&seg);
    }

    // Damped tails via u = 1/s (right) and u = -1/s (left).
    for sign in [1.0f64, -1.0] {
        let seg = tanh_sinh(
            |_u, du, _db| {
                // du is the accurate distance to u = 0 (i.e. s = sign*inf).
                let s = sign / du;
                let mut d = vec![0.0f64; npts];
                fill_dists(s, &mut d);
                let damp = (-damp_eps * (s.abs() / cutoff).ln()).exp();
                g(s, &d) * damp / (du * du)
            },
            0.0,
            1.0 / cutoff,
            tol,
        );
        out.accumulate(&seg);
    }

    (out, cutoff)
}

/// Three-point Richardson extrapolation in the damping parameter.
///
/// `values = [I(e0), I(e0/2), I(e0/4)]`; assuming `I(e) = I + A e + B e^2`,
/// returns the extrapolated value, which is exact through second order.
pub fn richardson_eps(values: [Complex64; 3]) -> Complex64 {
    let r1 = 2.0 * values[1] - values[0];
    let r2 = 2.0 * values[2] - values[1];
    (4.0 * r2 - r1) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;
    use std::f64::consts::PI;

    #[test]
    fn smooth_polynomial() {
        let r = integrate_smooth(|x| c64(x * x, 0.0), 0.0, 1.0, 1e-12);
        assert!((r.value.re - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2, singular at the left endpoint.
        let r = tanh_sinh(|_x, da, _db| c64(1.0 / da.sqrt(), 0.0), 0.0, 1.0, 1e-12);
        assert!((r.value.re - 2.0).abs() < 1e-11, "got {}", r.value.re);
        // int_0^1 (x(1-x))^{-1/2} dx = pi.
        let r2 = tanh_sinh(
            |_x, da, db| c64(1.0 / (da * db).sqrt(), 0.0),
            0.0,
            1.0,
            1e-12,
        );
        assert!((r2.value.re - PI).abs() < 1e-11);
    }

    #[test]
    fn oscillatory_endpoint() {
        // int_0^1 x^{i w - 1/2} dx = 1/(iw + 1/2).
        let w = 0.7;
        let r = tanh_sinh(
            |_x, da, _db| {
                let ln = da.ln();
                let phase = c64(0.0, w * ln).exp();
                phase / da.sqrt()
            },
            0.0,
            1.0,
            1e-12,
        );
        let expect = 1.0 / c64(0.5, w);
        assert!((r.value - expect).norm() < 1e-10);
    }

    #[test]
    fn segment_contour() {
        // int of z^2 from 0 to 1+i equals (1+i)^3/3.
        let z1 = c64(1.0, 1.0);
        let r = integrate_segment(|z| z * z, c64(0.0, 0.0), z1, 1e-12);
        let expect = z1 * z1 * z1 / 3.0;
        assert!((r.value - expect).norm() < 1e-12);
    }

    #[test]
    fn real_line_gaussian() {
        // A smooth rapidly decaying integrand; singular-point list is just
        // {0}; zero damping (the undamped tails already converge).
        let g = |s: f64, _d: &[f64]| c64((-s * s).exp(), 0.0);
        let (out, _x) = real_line_integral(&g, &[0.0], 0.0, 1e-12);
        assert!((out.value.re - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn real_line_beta_like() {
        // int_R |s|^{a-1} |1-s|^{b-1} ds for (a,b) = (1/4, 1/4):
        // = B(1/4,1/4) + 2 B(1/4, 1/2) (pieces (0,1), and the two outer ones).
        // Evaluated: gamma-based reference value.
        let a = 0.25;
        let b = 0.25;
        let g = move |_s: f64, d: &[f64]| {
            let ds0 = d[0].abs();
            let ds1 = d[1].abs();
            c64(ds0.powf(a - 1.0) * ds1.powf(b - 1.0), 0.0)
        };
        // Reference from the classical beta function:
        // B(1/4,1/4) = Gamma(1/4)^2/Gamma(1/2), B(1/4,1/2) = Gamma(1/4)Gamma(1/2)/Gamma(3/4).
        let g14 = 3.6256099082219083119_f64;
        let g12 = PI.sqrt();
        let g34 = 1.2254167024651776451_f64;
        let reference = g14 * g14 / g12 + 2.0 * g14 * g12 / g34;
        let mut vals = [c64(0.0, 0.0); 3];
        let eps0 = 0.01;
        for (k, v) in vals.iter_mut().enumerate() {
            let (out, _) = real_line_integral(&g, &[0.0, 1.0], eps0 / (1 << k) as f64, 1e-12);
            *v = out.value;
        }
        let extrap = richardson_eps(vals);
        assert!(
            (extrap.re - reference).abs() < 5e-7 * reference,
            "got {} want {reference}",
            extrap.re
        );
    }

    #[test]
    fn richardson_kills_linear_and_quadratic() {
        let f = |e: f64| c64(5.0 + 3.0 * e + 7.0 * e * e, 0.0);
        let vals = [f(0.1), f(0.05), f(0.025)];
        let r = richardson_eps(vals);
        assert!((r.re - 5.0).abs() < 1e-12);
    }
}

