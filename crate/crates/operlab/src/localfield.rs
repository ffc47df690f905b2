//! Special functions attached to the archimedean local fields: gamma factors
//! satisfying `Γ(a)Γ(1-a) = 1`, beta integrals in closed form and by
//! regularized quadrature, and the three-singular-point hypergeometric
//! integral with its two-term asymptotics at large argument.

use crate::quad::{real_line_integral, richardson_eps};
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

/// Which archimedean field the norm `‖·‖` refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldTag {
    /// `‖z‖ = |z|`.
    Real,
    /// `‖z‖ = |z|²`.
    Complex,
}

/// Norm of a scalar in the chosen field convention.
pub fn local_norm(z: Complex64, field: FieldTag) -> f64 {
    match field {
        FieldTag::Real => z.norm(),
        FieldTag::Complex => z.norm_sqr(),
    }
}

/// Outcome of an ε-regularized quadrature.
#[derive(Clone, Copy, Debug)]
pub struct RegularizedIntegral {
    pub value: Complex64,
    /// Smallest damping parameter actually used.
    pub eps_used: f64,
    /// Observed change under the last halving of ε; bounds the further
    /// change if ε were halved again (the convergence is at least linear).
    pub tail_estimate: f64,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LocalFieldError {
    #[error("gamma factor has a pole at {location}")]
    Pole { location: Complex64 },
    #[error("regularized integral failed to stabilize: successive eps-halving changes {last_change:.3e} vs {previous_change:.3e} (ratio {ratio:.3})")]
    NonConvergence {
        previous_change: f64,
        last_change: f64,
        ratio: f64,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
}

// ---------------------------------------------------------------------------
// Complex gamma function (Lanczos approximation, g = 7, n = 9).
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex gamma function.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection: Γ(z) = π / (sin(πz) Γ(1−z)).
        let pi = std::f64::consts::PI;
        let s = (pi * z).sin();
        if s.norm() == 0.0 {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        Complex64::new(pi, 0.0) / (s * gamma(Complex64::new(1.0, 0.0) - z))
    } else {
        let z = z - 1.0;
        let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        let sqrt2pi = (2.0 * std::f64::consts::PI).sqrt();
        sqrt2pi * t.powc(z + 0.5) * (-t).exp() * x
    }
}

fn near_integer(z: Complex64, tol: f64) -> Option<i64> {
    let n = z.re.round();
    if (z.re - n).abs() <= tol && z.im.abs() <= tol {
        Some(n as i64)
    } else {
        None
    }
}

/// `Γ(a) · cos(πa/2)`, evaluated in the pole-safe ratio form
/// `√π · 2^{a−1} · Γ(a/2) / Γ((1−a)/2)`. This is the un-normalized cosine
/// gamma product used by the twisted interval machinery; zeros at odd
/// positive integers, poles at even integers ≤ 0.
pub fn gamma_cos(a: Complex64) -> Complex64 {
    let half = Complex64::new(0.5, 0.0);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let two = Complex64::new(2.0, 0.0);
    sqrt_pi * two.powc(a - 1.0) * gamma(a * half) / gamma((1.0 - a) * half)
}

/// Normalized gamma factor of the field: satisfies `Γ^F(a) Γ^F(1−a) = 1`.
///
/// * Real: `Γ^ℝ(a) = 2 (2π)^{−a} Γ(a) cos(πa/2)`, computed as the
///   pole-safe ratio `π^{1/2−a} Γ(a/2)/Γ((1−a)/2)`; poles at even
///   integers ≤ 0, zeros at odd integers ≥ 1.
/// * Complex: `Γ^ℂ(a) = (2π)^{1−2a} Γ(a)/Γ(1−a)`; poles at integers ≤ 0,
///   zeros at integers ≥ 1.
pub fn gamma_local(a: Complex64, field: FieldTag) -> Result<Complex64, LocalFieldError> {
    const POLE_TOL: f64 = 1e-12;
    match field {
        FieldTag::Real => {
            if let Some(n) = near_integer(a, POLE_TOL) {
                if n <= 0 && n % 2 == 0 {
                    return Err(LocalFieldError::Pole {
                        location: Complex64::new(n as f64, 0.0),
                    });
                }
                if n >= 1 && n % 2 != 0 {
                    // Structural zero (the denominator gamma has a pole).
                    return Ok(Complex64::zero());
                }
            }
            let pi = std::f64::consts::PI;
            let pi_c = Complex64::new(pi, 0.0);
            let half = Complex64::new(0.5, 0.0);
            Ok(pi_c.powc(half - a) * gamma(a * half) / gamma((1.0 - a) * half))
        }
        FieldTag::Complex => {
            if let Some(n) = near_integer(a, POLE_TOL) {
                if n <= 0 {
                    return Err(LocalFieldError::Pole {
                        location: Complex64::new(n as f64, 0.0),
                    });
                }
                // Structural zero at positive integers.
                return Ok(Complex64::zero());
            }
            let two_pi = Complex64::new(2.0 * std::f64::consts::PI, 0.0);
            Ok(two_pi.powc(Complex64::new(1.0, 0.0) - 2.0 * a) * gamma(a)
                / gamma(Complex64::new(1.0, 0.0) - a))
        }
    }
}

/// Whether `Γ^F` has a zero at `a` (which makes the beta ratio singular).
fn gamma_local_zero(a: Complex64, field: FieldTag) -> bool {
    const TOL: f64 = 1e-12;
    match near_integer(a, TOL) {
        Some(n) => match field {
            FieldTag::Real => n >= 1 && n % 2 != 0,
            FieldTag::Complex => n >= 1,
        },
        None => false,
    }
}

/// Closed-form beta: `B^F(α,β) = Γ^F(α)Γ^F(β)/Γ^F(α+β)`.
///
/// Symmetric in `(α, β)` and invariant under `β ↦ 1−α−β`.
pub fn beta_closed(
    alpha: Complex64,
    beta: Complex64,
    field: FieldTag,
) -> Result<Complex64, LocalFieldError> {
    if gamma_local_zero(alpha + beta, field) {
        return Err(LocalFieldError::Pole {
            location: alpha + beta,
        });
    }
    let ga = gamma_local(alpha, field)?;
    let gb = gamma_local(beta, field)?;
    let gs = gamma_local(alpha + beta, field)?;
    Ok(ga * gb / gs)
}

// ---------------------------------------------------------------------------
// Regularized quadrature drivers.
// ---------------------------------------------------------------------------

/// Complex power of a positive real: `p^c = exp(c ln p)`.
fn cpow(p: f64, c: Complex64) -> Complex64 {
    (c * p.ln()).exp()
}

/// Evaluate a damped real-line integral for the ε-schedule
/// `ε, ε/2, ε/4`, Richardson-extrapolate, and package the result.
///
/// `make_integrand(shift)` builds the integrand for interior exponent shift
/// `shift` (zero when no interior regularization is needed); the damping of
/// the tails always follows the schedule.
fn eps_schedule<F, G>(
    points: &[f64],
    eps0: f64,
    needs_shift: bool,
    make_integrand: F,
    tol: f64,
) -> Result<RegularizedIntegral, LocalFieldError>
where
    F: Fn(f64) -> G,
    G: Fn(f64, &[f64]) -> Complex64,
{
    assert!(eps0 > 0.0, "eps must be positive");
    let mut vals = [Complex64::zero(); 3];
    let mut worst_rel_quad_err = 0.0f64;
    for (k, v) in vals.iter_mut().enumerate() {
        let eps = eps0 / (1u32 << k) as f64;
        let shift = if needs_shift { eps } else { 0.0 };
        let g = make_integrand(shift);
        let (out, _cutoff) = real_line_integral(&g, points, eps, tol);
        *v = out.value;
        worst_rel_quad_err =
            worst_rel_quad_err.max(out.err_estimate / out.value.norm().max(1.0));
    }
    let d1 = (vals[1] - vals[0]).norm();
    let d2 = (vals[2] - vals[1]).norm();
    let scale = vals[2].norm().max(1.0);
    let floor = 1e-11 * scale;
    if d1 > floor && d2 > floor {
        let ratio = d2 / d1;
        if ratio > 0.75 {
            return Err(LocalFieldError::NonConvergence {
                previous_change: d1,
                last_change: d2,
                ratio,
            });
        }
    }
    if worst_rel_quad_err > 1e-3 {
        // The inner quadrature itself never stabilized: the integrand is not
        // integrable at one of its singularities even after damping.
        return Err(LocalFieldError::NonConvergence {
            previous_change: worst_rel_quad_err,
            last_change: worst_rel_quad_err,
            ratio: 1.0,
        });
    }
    Ok(RegularizedIntegral {
        value: richardson_eps(vals),
        eps_used: eps0 / 4.0,
        tail_estimate: d2,
    })
}

/// Real-line beta integral `∫ ‖s‖^{α−1} ‖s−1‖^{β−1} ds` with tails damped by
/// `(|s|/X)^{−ε}` and Richardson extrapolation in ε.
///
/// Convergence requires `0 < Re α`, `0 < Re β`, `Re(α+β) < 1`; outside that
/// strip the interior exponents are ε-shifted as well, and a genuinely
/// divergent integral surfaces as `NonConvergence`.
pub fn beta_quadrature(
    alpha: Complex64,
    beta: Complex64,
    eps: f64,
) -> Result<RegularizedIntegral, LocalFieldError> {
    // Interior singularities outside the convergence strip get their
    // exponents lifted by the running ε; a tail divergence (Re(α+β) ≥ 1) is
    // left to the damping factor and surfaces through the ratio test.
    let interior_divergent = alpha.re <= 0.0 || beta.re <= 0.0;
    eps_schedule(
        &[0.0, 1.0],
        eps,
        interior_divergent,
        move |shift| {
            move |_s: f64, d: &[f64]| {
                let d0 = d[0].abs();
                let d1 = d[1].abs();
                cpow(d0, alpha - 1.0 + shift) * cpow(d1, beta - 1.0 + shift)
            }
        },
        1e-12,
    )
}

/// Hypergeometric integral
/// `Φ(α,β,γ;x) = ∫ ‖s‖^{α−γ} ‖s−1‖^{γ−1} ‖s−x‖^{β−1} ds` over the real
/// line, with `Re α = 0` (and `α ≠ 0`), `0 < Re β < 1`, `0 < Re γ < 1`,
/// `x ∉ {0,1}`.
pub fn hypergeom_phi(
    alpha: Complex64,
    beta: Complex64,
    gamma_p: Complex64,
    x: f64,
    eps: f64,
) -> Result<RegularizedIntegral, LocalFieldError> {
    if alpha.norm() == 0.0 {
        return Err(LocalFieldError::PreconditionViolation(
            "α = 0 is excluded: the multiplicative character ‖s‖^α degenerates to 1".into(),
        ));
    }
    if alpha.re.abs() > 1e-12 {
        return Err(LocalFieldError::PreconditionViolation(format!(
            "Re α must vanish (principal series); got Re α = {}",
            alpha.re
        )));
    }
    if !(beta.re > 0.0 && beta.re < 1.0) {
        return Err(LocalFieldError::PreconditionViolation(format!(
            "need 0 < Re β < 1; got Re β = {}",
            beta.re
        )));
    }
    if !(gamma_p.re > 0.0 && gamma_p.re < 1.0) {
        return Err(LocalFieldError::PreconditionViolation(format!(
            "need 0 < Re γ < 1; got Re γ = {}",
            gamma_p.re
        )));
    }
    if x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12 {
        return Err(LocalFieldError::PreconditionViolation(
            "x must avoid the fixed singular points {0, 1}".into(),
        ));
    }

    let mut pts = vec![0.0f64, 1.0, x];
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Index of each role after sorting.
    let i0 = pts.iter().position(|&p| p == 0.0).unwrap();
    let i1 = pts.iter().position(|&p| p == 1.0).unwrap();
    let ix = pts.iter().position(|&p| p == x).unwrap();

    eps_schedule(
        &pts,
        eps,
        false,
        move |_shift| {
            move |_s: f64, d: &[f64]| {
                let d0 = d[i0].abs();
                let d1 = d[i1].abs();
                let dx = d[ix].abs();
                cpow(d0, alpha - gamma_p) * cpow(d1, gamma_p - 1.0) * cpow(dx, beta - 1.0)
            }
        },
        1e-12,
    )
}

/// Two-term large-`x` prediction for [`hypergeom_phi`]:
/// `B^ℝ(−α,γ)·|x|^{β−1} + B^ℝ(α,β)·|x|^{α+β−1}`.
pub fn phi_asymptotic(
    alpha: Complex64,
    beta: Complex64,
    gamma_p: Complex64,
    x: f64,
) -> Result<Complex64, LocalFieldError> {
    let b1 = beta_closed(-alpha, gamma_p, FieldTag::Real)?;
    let b2 = beta_closed(alpha, beta, FieldTag::Real)?;
    let ax = x.abs();
    Ok(b1 * cpow(ax, beta - 1.0) + b2 * cpow(ax, alpha + beta - 1.0))
}
