//! Monodromy of the second-order operators by adaptive Runge–Kutta
//! transport of the companion 2×2 system, loop generators around each
//! singular point, classification of the representation (trivial in PGL₂,
//! unipotent, solvable, preserving a Hermitian form), and principal-value
//! continuation through real singular points.

use crate::linalg::M2;
use crate::oper::Oper;
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

#[derive(Clone, Debug, Error)]
pub enum MonodromyError {
    #[error("path approaches a singular point: distance {distance:.3e} < margin {margin:.3e}")]
    SingularityTooClose { distance: f64, margin: f64 },
    #[error("step size collapsed to {step:.3e} near {position} without meeting the error target")]
    StepFailure { position: Complex64, step: f64 },
    #[error("local series did not converge within its radius (term ratio {ratio:.3e})")]
    SeriesDivergence { ratio: f64 },
    #[error("no admissible local gauge phase at crossing {crossing}")]
    GaugeUnsolvable { crossing: usize },
}

/// A smooth path segment in the complex plane.
#[derive(Clone, Debug)]
pub enum PathSeg {
    Line { from: Complex64, to: Complex64 },
    /// Circular arc `center + radius·e^{iθ}`, θ from `from_angle` to
    /// `to_angle` (counterclockwise when increasing).
    Arc {
        center: Complex64,
        radius: f64,
        from_angle: f64,
        to_angle: f64,
    },
}

impl PathSeg {
    fn point(&self, s: f64) -> Complex64 {
        match self {
            PathSeg::Line { from, to } => from + (to - from) * s,
            PathSeg::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            } => {
                let th = from_angle + (to_angle - from_angle) * s;
                center + Complex64::from_polar(*radius, th)
            }
        }
    }

    fn velocity(&self, s: f64) -> Complex64 {
        match self {
            PathSeg::Line { from, to } => to - from,
            PathSeg::Arc {
                radius,
                from_angle,
                to_angle,
                ..
            } => {
                let th = from_angle + (to_angle - from_angle) * s;
                Complex64::new(0.0, to_angle - from_angle) * Complex64::from_polar(*radius, th)
            }
        }
    }

    /// Distance from the segment to a point.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match self {
            PathSeg::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let t = ((p - from) * d.conj()).re / len2;
                let t = t.clamp(0.0, 1.0);
                (p - (from + d * t)).norm()
            }
            PathSeg::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            } => {
                let rel = p - center;
                let ang = rel.im.atan2(rel.re);
                let (lo, hi) = if from_angle <= to_angle {
                    (*from_angle, *to_angle)
                } else {
                    (*to_angle, *from_angle)
                };
                let tau = std::f64::consts::TAU;
                // Shift ang by multiples of 2π looking for a hit in [lo, hi].
                let mut inside = false;
                let mut k = ((lo - ang) / tau).floor();
                for _ in 0..4 {
                    let a = ang + k * tau;
                    if a >= lo - 1e-12 && a <= hi + 1e-12 {
                        inside = true;
                        break;
                    }
                    k += 1.0;
                }
                if inside {
                    (rel.norm() - radius).abs()
                } else {
                    let e0 = center + Complex64::from_polar(*radius, *from_angle);
                    let e1 = center + Complex64::from_polar(*radius, *to_angle);
                    (p - e0).norm().min((p - e1).norm())
                }
            }
        }
    }
}

/// Right-hand side of the transport: `M' = x'(s)·[[0,1],[v(x),0]]·M`.
fn transport_rhs(pot: &dyn Fn(Complex64) -> Complex64, seg: &PathSeg, s: f64, m: &M2) -> M2 {
    let x = seg.point(s);
    let xp = seg.velocity(s);
    let v = pot(x);
    M2::new(xp * m.c, xp * m.d, xp * v * m.a, xp * v * m.b)
}

fn m2_axpy(a: &M2, c: f64, b: &M2) -> M2 {
    M2::new(a.a + c * b.a, a.b + c * b.b, a.c + c * b.c, a.d + c * b.d)
}

fn m2_max_abs(m: &M2) -> f64 {
    m.a.norm().max(m.b.norm()).max(m.c.norm()).max(m.d.norm())
}

/// Transport across one segment by adaptive Dormand–Prince RK5(4), for an
/// arbitrary potential function.
fn rk_segment(
    pot: &dyn Fn(Complex64) -> Complex64,
    seg: &PathSeg,
    tol: f64,
    mut m: M2,
) -> Result<M2, MonodromyError> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut s = 0.0f64;
    let mut h = 0.05f64;
    let mut k = [M2::identity(); 7];
    while s < 1.0 {
        if h > 1.0 - s {
            h = 1.0 - s;
        }
        k[0] = transport_rhs(pot, seg, s, &m);
        for stage in 1..7 {
            let mut y = m;
            for j in 0..stage.min(6) {
                let w = A[stage - 1][j];
                if w != 0.0 {
                    y = m2_axpy(&y, h * w, &k[j]);
                }
            }
            k[stage] = transport_rhs(pot, seg, s + C[stage] * h, &y);
        }
        let mut y5 = m;
        let mut y4 = m;
        for j in 0..7 {
            if B5[j] != 0.0 {
                y5 = m2_axpy(&y5, h * B5[j], &k[j]);
            }
            if B4[j] != 0.0 {
                y4 = m2_axpy(&y4, h * B4[j], &k[j]);
            }
        }
        let err = m2_max_abs(&y5.sub(&y4));
        let scale = m2_max_abs(&m).max(1.0);
        if err.is_finite() && err <= tol * scale {
            m = y5;
            s += h;
            let grow = if err > 0.0 {
                0.9 * (tol * scale / err).powf(0.2)
            } else {
                5.0
            };
            h *= grow.clamp(0.2, 5.0);
        } else {
            let shrink = if err.is_finite() && err > 0.0 {
                (0.9 * (tol * scale / err).powf(0.2)).clamp(0.05, 0.9)
            } else {
                0.1
            };
            h *= shrink;
            if h < 1e-13 {
                return Err(MonodromyError::StepFailure {
                    position: seg.point(s),
                    step: h,
                });
            }
        }
    }
    Ok(m)
}

fn transport_segment(
    oper: &Oper<Complex64>,
    seg: &PathSeg,
    tol: f64,
    m: M2,
) -> Result<M2, MonodromyError> {
    rk_segment(&|x| oper.potential(x), seg, tol, m)
}

/// Transport the fundamental 2×2 solution of `ψ″ = v(x)ψ` along a sequence
/// of segments; the result maps `(ψ, ψ′)` data at the start to the end.
pub fn transport_path(
    oper: &Oper<Complex64>,
    segs: &[PathSeg],
    tol: f64,
    margin: f64,
) -> Result<M2, MonodromyError> {
    for seg in segs {
        for t in &oper.points {
            let d = seg.distance_to(*t);
            if d < margin {
                return Err(MonodromyError::SingularityTooClose {
                    distance: d,
                    margin,
                });
            }
        }
    }
    let mut m = M2::identity();
    for seg in segs {
        m = transport_segment(oper, seg, tol, m)?;
    }
    Ok(m)
}

/// Transport along a polyline given by its vertices.
pub fn transport(
    oper: &Oper<Complex64>,
    path: &[Complex64],
    tol: f64,
    margin: f64,
) -> Result<M2, MonodromyError> {
    let segs: Vec<PathSeg> = path
        .windows(2)
        .map(|w| PathSeg::Line {
            from: w[0],
            to: w[1],
        })
        .collect();
    transport_path(oper, &segs, tol, margin)
}

/// Monodromy generators around each finite singular point plus the loop
/// around infinity, all expressed at a common basepoint.
#[derive(Clone, Debug)]
pub struct MonodromyData {
    pub basepoint: Complex64,
    /// Loops around `t_0..t_m`, counterclockwise, det-normalized to SL₂.
    pub generators: Vec<M2>,
    /// Determinants before normalization (≈ 1 by Wronskian constancy).
    pub raw_dets: Vec<Complex64>,
    /// Loop around ∞ (inverse of the big counterclockwise circle),
    /// det-normalized.
    pub m_infinity: M2,
    /// `‖M_∞ · M_m ⋯ M_0 − Id‖` — the defining relation of the punctured
    /// sphere's fundamental group in this frame.
    pub relation_residual: f64,
}

/// Compute loop generators. The default basepoint is
/// `centroid + i·diameter`; each loop goes straight to the circle of radius
/// `radius_factor · (minimal gap)` around `t_i`, once around
/// counterclockwise, and straight back.
pub fn monodromy_generators(
    oper: &Oper<Complex64>,
    basepoint: Option<Complex64>,
    radius_factor: f64,
    tol: f64,
) -> Result<MonodromyData, MonodromyError> {
    let t = &oper.points;
    let np = t.len();
    let centroid = t.iter().sum::<Complex64>() / np as f64;
    let diameter = t
        .iter()
        .flat_map(|a| t.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max)
        .max(1.0);
    let base = basepoint.unwrap_or(centroid + Complex64::new(0.0, diameter));
    let mut min_gap = f64::INFINITY;
    for (i, a) in t.iter().enumerate() {
        for b in &t[i + 1..] {
            min_gap = min_gap.min((a - b).norm());
        }
    }
    let radius = radius_factor * min_gap;
    let margin = 0.5 * radius;

    let tau = std::f64::consts::TAU;
    let mut generators = Vec::with_capacity(np);
    let mut raw_dets = Vec::with_capacity(np);
    for ti in t {
        let theta = {
            let rel = base - ti;
            rel.im.atan2(rel.re)
        };
        let attach = ti + Complex64::from_polar(radius, theta);
        let segs = vec![
            PathSeg::Line {
                from: base,
                to: attach,
            },
            PathSeg::Arc {
                center: *ti,
                radius,
                from_angle: theta,
                to_angle: theta + tau,
            },
            PathSeg::Line {
                from: attach,
                to: base,
            },
        ];
        // Margin check skips the encircled point itself (its distance to
        // its own circle is exactly the radius).
        for seg in &segs {
            for tk in t {
                let d = seg.distance_to(*tk);
                let limit = if (tk - ti).norm() < 1e-14 {
                    0.5 * margin
                } else {
                    margin
                };
                if d < limit {
                    return Err(MonodromyError::SingularityTooClose {
                        distance: d,
                        margin: limit,
                    });
                }
            }
        }
        let mut m = M2::identity();
        for seg in &segs {
            m = transport_segment(oper, seg, tol, m)?;
        }
        raw_dets.push(m.det());
        generators.push(m.det_normalized());
    }

    // Big counterclockwise circle enclosing every finite singular point.
    let big_r = 2.0
        * t.iter()
            .map(|z| (z - centroid).norm())
            .fold(0.0, f64::max)
            .max(diameter);
    let theta0 = {
        let rel = base - centroid;
        rel.im.atan2(rel.re)
    };
    let attach = centroid + Complex64::from_polar(big_r, theta0);
    let segs = vec![
        PathSeg::Line {
            from: base,
            to: attach,
        },
        PathSeg::Arc {
            center: centroid,
            radius: big_r,
            from_angle: theta0,
            to_angle: theta0 + tau,
        },
        PathSeg::Line {
            from: attach,
            to: base,
        },
    ];
    let mut big = M2::identity();
    for seg in &segs {
        big = transport_segment(oper, seg, tol, big)?;
    }
    let m_infinity = big.det_normalized().inverse();

    let mut prod = M2::identity();
    for g in &generators {
        prod = g.mul(&prod);
    }
    let relation_residual = m_infinity.mul(&prod).sub(&M2::identity()).norm();

    Ok(MonodromyData {
        basepoint: base,
        generators,
        raw_dets,
        m_infinity,
        relation_residual,
    })
}

/// One classification flag together with the margin it was decided by.
#[derive(Clone, Debug)]
pub struct Flag {
    pub set: bool,
    /// Decision residual compared against the tolerance.
    pub margin: f64,
    /// True when the margin falls within a factor of 10 of the tolerance,
    /// so both readings are defensible.
    pub ambiguous: bool,
}

fn flag(residual: f64, tol: f64) -> Flag {
    Flag {
        set: residual < tol,
        margin: residual,
        ambiguous: residual >= tol / 10.0 && residual <= tol * 10.0,
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    /// Per generator: distance to ±Id.
    pub trivial_per_generator: Vec<Flag>,
    /// Per generator: trace pinned at ±2 while the matrix is not ±Id.
    pub unipotent_per_generator: Vec<Flag>,
    pub trivial_pgl2: Flag,
    pub solvable: Flag,
    /// Set when a nondegenerate Hermitian form is preserved by every
    /// generator.
    pub real_form: Flag,
    /// `(positive, negative)` eigenvalue counts of the preserved form.
    pub signature: Option<(usize, usize)>,
    pub generic: bool,
}

fn dist_to_pm_identity(m: &M2) -> f64 {
    let id = M2::identity();
    m.sub(&id).norm().min(m.add(&id).norm())
}

/// Smallest max-residual over candidate common eigenlines: for a candidate
/// unit vector `v` with unit normal `v⊥`, the residuals are the lower-left
/// entries `v⊥ᴴ M_i v` of the generators in the `[v, v⊥]` frame.
fn common_eigenline_residual(gens: &[M2]) -> f64 {
    let mut candidates: Vec<[Complex64; 2]> = Vec::new();
    for g in gens {
        for v in g.eigenvectors() {
            candidates.push(v);
        }
    }
    if gens.len() >= 2 {
        for v in gens[0].mul(&gens[1]).eigenvectors() {
            candidates.push(v);
        }
    }
    let mut best = f64::INFINITY;
    for v in &candidates {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n == 0.0 {
            continue;
        }
        let v0 = [v[0] / n, v[1] / n];
        let vperp = [-v0[1].conj(), v0[0].conj()];
        let mut worst = 0.0f64;
        for g in gens {
            let gv = g.mul_vec(v0);
            let off = (vperp[0].conj() * gv[0] + vperp[1].conj() * gv[1]).norm();
            worst = worst.max(off / g.norm().max(1.0));
        }
        best = best.min(worst);
    }
    best
}

/// Find a Hermitian form `h` with `M_iᴴ h M_i = h` for all generators:
/// assemble the real-linear constraint system over the 4 real parameters of
/// `h` and take the smallest singular pair. Returns `(residual, h)`.
fn invariant_hermitian_form(gens: &[M2]) -> (f64, M2) {
    let basis = [
        M2::new(
            Complex64::new(1.0, 0.0),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::new(1.0, 0.0),
        ),
        M2::new(
            Complex64::new(1.0, 0.0),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::new(-1.0, 0.0),
        ),
        M2::new(
            Complex64::zero(),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::zero(),
        ),
        M2::new(
            Complex64::zero(),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::zero(),
        ),
    ];
    // Rows: per generator the Hermitian difference `MᴴhM − h` contributes 4
    // real components: re(0,0), re(1,1), re(0,1), im(0,1).
    let nrows = gens.len() * 4;
    let mut a = crate::linalg::Mat::<Complex64>::zeros(nrows, 4);
    for (gi, g) in gens.iter().enumerate() {
        let gh = g.conj_transpose();
        for (bi, sigma) in basis.iter().enumerate() {
            let d = gh.mul(&sigma.mul(g)).sub(sigma);
            let rows = [d.a.re, d.d.re, d.b.re, d.b.im];
            for (ri, val) in rows.iter().enumerate() {
                *a.at_mut(gi * 4 + ri, bi) = Complex64::new(*val, 0.0);
            }
        }
    }
    let (vec, sv) = a.smallest_singular_pair();
    // The system is real, so rotate the null vector's global phase away.
    let phase = vec
        .iter()
        .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
        .map(|z| z / z.norm().max(1e-300))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let coef: Vec<f64> = vec.iter().map(|z| (z / phase).re).collect();
    let mut h = M2::new(
        Complex64::zero(),
        Complex64::zero(),
        Complex64::zero(),
        Complex64::zero(),
    );
    for (c, sigma) in coef.iter().zip(&basis) {
        h = h.add(&sigma.scale(Complex64::new(*c, 0.0)));
    }
    let scale: f64 = gens.iter().map(|g| g.norm().powi(2)).fold(1.0, f64::max);
    (sv / scale, h)
}

/// Classify the representation generated by the loop matrices.
pub fn classify(mono: &MonodromyData, tol: f64) -> Classification {
    let gens = &mono.generators;
    let trivial_per: Vec<Flag> = gens
        .iter()
        .map(|g| flag(dist_to_pm_identity(g), tol))
        .collect();
    let unipotent_per: Vec<Flag> = gens
        .iter()
        .map(|g| {
            let tr = g.trace();
            let tr_dist = (tr - Complex64::new(2.0, 0.0))
                .norm()
                .min((tr + Complex64::new(2.0, 0.0)).norm());
            let not_pm = dist_to_pm_identity(g);
            if not_pm < tol {
                // Scalar within tolerance: not unipotent; the decision
                // margin is the distance to ±Id.
                Flag {
                    set: false,
                    margin: not_pm,
                    ambiguous: not_pm >= tol / 10.0 && not_pm <= tol * 10.0,
                }
            } else {
                flag(tr_dist, tol)
            }
        })
        .collect();
    let trivial_residual = gens.iter().map(dist_to_pm_identity).fold(0.0, f64::max);
    let trivial_pgl2 = flag(trivial_residual, tol);

    let solvable = flag(common_eigenline_residual(gens), tol);

    let (form_res, h) = invariant_hermitian_form(gens);
    let det_h = h.det();
    let mut real_form = flag(form_res, tol);
    real_form.set = real_form.set && det_h.norm() > 1e-6;
    let signature = if real_form.set {
        let tr = h.trace().re;
        let d = det_h.re;
        let disc = (tr * tr / 4.0 - d).max(0.0).sqrt();
        let pos = [tr / 2.0 + disc, tr / 2.0 - disc]
            .iter()
            .filter(|&&e| e > 0.0)
            .count();
        Some((pos, 2 - pos))
    } else {
        None
    };
    let generic = !trivial_pgl2.set && !solvable.set && !real_form.set;
    Classification {
        trivial_per_generator: trivial_per,
        unipotent_per_generator: unipotent_per,
        trivial_pgl2,
        solvable,
        real_form,
        signature,
        generic,
    }
}

/// Principal-value continuation across one real singular point lying
/// strictly between the real endpoints `a < b`: minus the half-sum of the
/// upper and the lower semicircle continuations.
pub fn pv_crossing(
    oper: &Oper<Complex64>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<M2, MonodromyError> {
    assert!(a < b);
    let crossing: Vec<Complex64> = oper
        .points
        .iter()
        .filter(|t| t.im.abs() < 1e-12 && t.re > a && t.re < b)
        .cloned()
        .collect();
    assert_eq!(
        crossing.len(),
        1,
        "pv_crossing expects exactly one singular point inside the interval"
    );
    let t = crossing[0];
    let r = 0.5 * (t.re - a).min(b - t.re);
    let za = Complex64::new(a, 0.0);
    let zb = Complex64::new(b, 0.0);
    let left = Complex64::new(t.re - r, 0.0);
    let right = Complex64::new(t.re + r, 0.0);
    let pi = std::f64::consts::PI;
    let mut tu = M2::identity();
    for seg in [
        PathSeg::Line { from: za, to: left },
        PathSeg::Arc {
            center: t,
            radius: r,
            from_angle: pi,
            to_angle: 0.0,
        },
        PathSeg::Line {
            from: right,
            to: zb,
        },
    ] {
        tu = transport_segment(oper, &seg, tol, tu)?;
    }
    let mut td = M2::identity();
    for seg in [
        PathSeg::Line { from: za, to: left },
        PathSeg::Arc {
            center: t,
            radius: r,
            from_angle: pi,
            to_angle: 2.0 * pi,
        },
        PathSeg::Line {
            from: right,
            to: zb,
        },
    ] {
        td = transport_segment(oper, &seg, tol, td)?;
    }
    Ok(tu.add(&td).scale(Complex64::new(-0.5, 0.0)))
}

// ===========================================================================
// Balanced real opers: local Frobenius bases, interval transfer chain,
// balance data, and the one-parameter 4-point balanced scan.
// ===========================================================================

const NSER: usize = 40;

/// Translation-centred real configuration for the interval chain: points
/// sorted ascending and shifted so the unbounded interval straddles the
/// origin (needed for the reciprocal chart through ∞).
struct RealChain {
    t: Vec<f64>,
    shift: f64,
    a_loc: Vec<f64>,
    mu: Vec<f64>,
    c: Vec<Complex64>,
}

fn real_chain(oper: &Oper<Complex64>) -> RealChain {
    let n = oper.points.len();
    assert!(n >= 3, "interval chain needs at least three real points");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        oper.points[i]
            .re
            .partial_cmp(&oper.points[j].re)
            .unwrap()
    });
    let mut t = Vec::with_capacity(n);
    let mut a_loc = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for &i in &idx {
        let p = oper.points[i];
        assert!(p.im.abs() < 1e-10, "chain points must be real");
        let lam = oper.weights[i];
        let tw = lam + Complex64::new(1.0, 0.0);
        assert!(
            tw.re.abs() < 1e-10,
            "chain weights must be −1 + c with imaginary twist c"
        );
        let a = lam * (lam + 2.0) / 4.0;
        assert!(a.im.abs() < 1e-10);
        let m = oper.mu[i];
        assert!(m.im.abs() < 1e-10, "chain residues must be real");
        t.push(p.re);
        a_loc.push(a.re);
        mu.push(m.re);
        c.push(Complex64::new(0.0, tw.im));
    }
    let shift = 0.5 * (t[0] + t[n - 1]);
    for x in &mut t {
        *x -= shift;
    }
    // Regularity at ∞: the potential must decay like x^{-4}.
    let scale = mu.iter().map(|m| m.abs()).fold(1.0, f64::max);
    let r0: f64 = mu.iter().sum();
    let r1: f64 = t
        .iter()
        .zip(a_loc.iter().zip(&mu))
        .map(|(ti, (ai, mi))| ai + ti * mi)
        .sum();
    let r2: f64 = t
        .iter()
        .zip(a_loc.iter().zip(&mu))
        .map(|(ti, (ai, mi))| 2.0 * ti * ai + ti * ti * mi)
        .sum();
    assert!(
        r0.abs() < 1e-7 * scale && r1.abs() < 1e-7 * scale && r2.abs() < 1e-7 * scale,
        "configuration is not regular at infinity: residuals ({r0:.2e}, {r1:.2e}, {r2:.2e})"
    );
    RealChain {
        t,
        shift,
        a_loc,
        mu,
        c,
    }
}

/// How far the potential fails to be regular at ∞: the absolute values of
/// the x⁻¹, x⁻², x⁻³ expansion coefficients at infinity.
pub fn infinity_regular_residuals(oper: &Oper<Complex64>) -> (f64, f64, f64) {
    let n = oper.points.len();
    let mut r0 = Complex64::zero();
    let mut r1 = Complex64::zero();
    let mut r2 = Complex64::zero();
    for i in 0..n {
        let t = oper.points[i];
        let lam = oper.weights[i];
        let a = lam * (lam + 2.0) / 4.0;
        let m = oper.mu[i];
        r0 += m;
        r1 += a + t * m;
        r2 += 2.0 * t * a + t * t * m;
    }
    (r0.norm(), r1.norm(), r2.norm())
}

fn chain_potential(ch: &RealChain, x: Complex64) -> Complex64 {
    let mut acc = Complex64::zero();
    for i in 0..ch.t.len() {
        let d = x - ch.t[i];
        acc += ch.a_loc[i] / (d * d) + ch.mu[i] / d;
    }
    acc
}

/// Potential in the reciprocal chart `u = −1/x` for `χ = u·ψ`: `χ″ = W χ`.
/// The closed form below resums `v(−1/u)/u⁴` and is finite at `u = 0`
/// precisely because of the three ∞-regularity constraints.
fn chain_w_chart(ch: &RealChain, u: Complex64) -> Complex64 {
    let mut acc = Complex64::zero();
    for i in 0..ch.t.len() {
        let t = ch.t[i];
        let denom = 1.0 + t * u;
        acc += ch.a_loc[i] * t * t * (3.0 + 2.0 * t * u) / (denom * denom)
            + ch.mu[i] * t * t * t / denom;
    }
    acc
}

fn local_s0(t: &[f64], j: usize) -> f64 {
    let d = t
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, x)| (x - t[j]).abs())
        .fold(f64::INFINITY, f64::min);
    0.18 * d
}

/// Endpoint data of the two-dimensional local solution basis at `t[j]`,
/// evaluated at local coordinate `s0 > 0` on side `d` (+1: `s = x − t_j`,
/// −1: `s = t_j − x`). Returns `[[v₁, v₂], [v₁′, v₂′]]` with d/ds
/// derivatives. Untwisted: column 1 is `φ_log = φ₀ ln s + …`, column 2 is
/// `φ₀ = √s(1 + …)`. Twisted `c ≠ 0`: columns are `s^{(1∓c)/2}(1 + …)`.
fn frob_eval(ch: &RealChain, j: usize, d: f64, s0: f64) -> Result<M2, MonodromyError> {
    let n = ch.t.len();
    let dmu = d * ch.mu[j];
    let mut v = [0.0f64; NSER + 1];
    for (p, vp) in v.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let dist = ch.t[k] - ch.t[j];
            acc += (p as f64 + 1.0) * ch.a_loc[k] / dist.powi(p as i32 + 2)
                - ch.mu[k] / dist.powi(p as i32 + 1);
        }
        *vp = d.powi(p as i32) * acc;
    }
    let c = ch.c[j];
    if c.norm() < 1e-12 {
        // Logarithmic pair at a double indicial root 1/2.
        let mut e = [0.0f64; NSER + 1];
        let mut h = [0.0f64; NSER + 1];
        e[0] = 1.0;
        for q in 1..=NSER {
            let mut ae = dmu * e[q - 1];
            let mut ah = dmu * h[q - 1];
            for p in 0..q.saturating_sub(1) {
                ae += v[p] * e[q - 2 - p];
                ah += v[p] * h[q - 2 - p];
            }
            let q2 = (q * q) as f64;
            e[q] = ae / q2;
            h[q] = (ah - 2.0 * (q as f64) * e[q]) / q2;
        }
        let mut es = e[0];
        let mut hs = h[0];
        let mut des = 0.0;
        let mut dhs = 0.0;
        let mut pow = 1.0;
        for q in 1..=NSER {
            let powm1 = pow;
            pow *= s0;
            es += e[q] * pow;
            hs += h[q] * pow;
            des += (q as f64) * e[q] * powm1;
            dhs += (q as f64) * h[q] * powm1;
        }
        let tail = (e[NSER].abs() + h[NSER].abs()) * pow;
        let ratio = tail / (es.abs() + hs.abs() + 1.0);
        if ratio > 1e-10 {
            return Err(MonodromyError::SeriesDivergence { ratio });
        }
        let r = s0.sqrt();
        let phi0 = r * es;
        let dphi0 = (0.5 * es + s0 * des) / r;
        let ln = s0.ln();
        let plog = phi0 * ln + r * hs;
        let dplog = dphi0 * ln + phi0 / s0 + (0.5 * hs + s0 * dhs) / r;
        Ok(M2::new(
            Complex64::new(plog, 0.0),
            Complex64::new(phi0, 0.0),
            Complex64::new(dplog, 0.0),
            Complex64::new(dphi0, 0.0),
        ))
    } else {
        // Power pair with exponents (1 ∓ c)/2 and pivots q(q ∓ c).
        let one = Complex64::new(1.0, 0.0);
        let mut em = vec![Complex64::zero(); NSER + 1];
        let mut ep = vec![Complex64::zero(); NSER + 1];
        em[0] = one;
        ep[0] = one;
        for q in 1..=NSER {
            let qf = q as f64;
            let piv_m = qf * (Complex64::new(qf, 0.0) - c);
            let piv_p = qf * (Complex64::new(qf, 0.0) + c);
            if piv_m.norm() < 1e-8 * qf || piv_p.norm() < 1e-8 * qf {
                return Err(MonodromyError::SeriesDivergence {
                    ratio: piv_m.norm().min(piv_p.norm()),
                });
            }
            let mut am = dmu * em[q - 1];
            let mut ap = dmu * ep[q - 1];
            for p in 0..q.saturating_sub(1) {
                am += v[p] * em[q - 2 - p];
                ap += v[p] * ep[q - 2 - p];
            }
            em[q] = am / piv_m;
            ep[q] = ap / piv_p;
        }
        let mut es_m = em[0];
        let mut es_p = ep[0];
        let mut des_m = Complex64::zero();
        let mut des_p = Complex64::zero();
        let mut pow = 1.0;
        for q in 1..=NSER {
            let powm1 = pow;
            pow *= s0;
            es_m += em[q] * pow;
            es_p += ep[q] * pow;
            des_m += (q as f64) * em[q] * powm1;
            des_p += (q as f64) * ep[q] * powm1;
        }
        let tail = (em[NSER].norm() + ep[NSER].norm()) * pow;
        let ratio = tail / (es_m.norm() + es_p.norm() + 1.0);
        if ratio > 1e-10 {
            return Err(MonodromyError::SeriesDivergence { ratio });
        }
        let rho_m = (one - c) / 2.0;
        let rho_p = (one + c) / 2.0;
        let ln = s0.ln();
        let smu_m = (rho_m * ln).exp();
        let smu_p = (rho_p * ln).exp();
        let v1 = smu_m * es_m;
        let v2 = smu_p * es_p;
        let dv1 = smu_m / s0 * (rho_m * es_m + s0 * des_m);
        let dv2 = smu_p / s0 * (rho_p * es_p + s0 * des_p);
        Ok(M2::new(v1, v2, dv1, dv2))
    }
}

/// Transfer matrix of interval `j`: maps local-basis coefficient data at
/// the left endpoint `t_j+` to data at the right endpoint `t_{j+1}−`. The
/// final interval wraps through the (regular) point at infinity via the
/// reciprocal chart.
fn interval_transfer(ch: &RealChain, j: usize, tol: f64) -> Result<M2, MonodromyError> {
    let n = ch.t.len();
    let jr = (j + 1) % n;
    let wrap = j == n - 1;
    let s0l = local_s0(&ch.t, j);
    let s0r = local_s0(&ch.t, jr);
    let y0 = frob_eval(ch, j, 1.0, s0l)?;
    let br = frob_eval(ch, jr, -1.0, s0r)?;
    let xa = Complex64::new(ch.t[j] + s0l, 0.0);
    let y = if !wrap {
        let xb = Complex64::new(ch.t[jr] - s0r, 0.0);
        rk_segment(
            &|x| chain_potential(ch, x),
            &PathSeg::Line { from: xa, to: xb },
            tol,
            y0,
        )?
    } else {
        let hs = ch.t[n - 1].max(-ch.t[0]);
        let xbig = 4.0 * hs + 1.0;
        let y1 = rk_segment(
            &|x| chain_potential(ch, x),
            &PathSeg::Line {
                from: xa,
                to: Complex64::new(xbig, 0.0),
            },
            tol,
            y0,
        )?;
        // Chart switch at x = X: χ = uψ, dχ/du = ψ + ψ′ₓ/u with u = −1/x.
        let ux = Complex64::new(-1.0 / xbig, 0.0);
        let c0 = M2::new(ux * y1.a, ux * y1.b, y1.a + y1.c / ux, y1.b + y1.d / ux);
        let xb = ch.t[0] - s0r;
        assert!(xb < 0.0, "outer interval must straddle the centred origin");
        let ue = Complex64::new(-1.0 / xb, 0.0);
        let c1 = rk_segment(
            &|u| chain_w_chart(ch, u),
            &PathSeg::Line { from: ux, to: ue },
            tol,
            c0,
        )?;
        // Back: ψ = χ/u, ψ′ₓ = u(dχ/du − ψ).
        M2::new(
            c1.a / ue,
            c1.b / ue,
            ue * (c1.c - c1.a / ue),
            ue * (c1.d - c1.b / ue),
        )
    };
    // Right-endpoint basis in (ψ, ψ′ₓ): s̃ = t_{j+1} − x flips the
    // derivative sign.
    let mr = M2::new(br.a, br.b, -br.c, -br.d);
    Ok(mr.inverse().mul(&y))
}

/// The full interval chain of a real configuration: transfer matrices,
/// locally solved gauges, chained arrival gauges, and per-crossing defects.
#[derive(Clone, Debug)]
pub struct BalanceChain {
    pub transfers: Vec<M2>,
    /// +1 on bounded intervals, −1 on the wrap interval.
    pub eps: Vec<f64>,
    /// Gauge of the interval's distinguished solution solved locally so it
    /// arrives with coefficient `eps` on the distinguished component.
    pub alpha_local: Vec<Complex64>,
    /// Gauge arriving at each left endpoint chained from the previous
    /// interval.
    pub alpha_arrived: Vec<Complex64>,
    /// `alpha_arrived − alpha_local` at each crossing; all vanish together
    /// exactly when the configuration is balanced.
    pub defects: Vec<Complex64>,
}

fn chain_transfers(ch: &RealChain, tol: f64) -> Result<Vec<M2>, MonodromyError> {
    let n = ch.t.len();
    let mut transfers = Vec::with_capacity(n);
    for j in 0..n {
        transfers.push(interval_transfer(ch, j, tol)?);
    }
    Ok(transfers)
}

fn chain_eps(n: usize) -> Vec<f64> {
    (0..n).map(|j| if j + 1 == n { -1.0 } else { 1.0 }).collect()
}

pub fn balance_chain(oper: &Oper<Complex64>, tol: f64) -> Result<BalanceChain, MonodromyError> {
    let ch = real_chain(oper);
    let n = ch.t.len();
    let transfers = chain_transfers(&ch, tol)?;
    let eps = chain_eps(n);
    let alpha_local: Vec<Complex64> = transfers
        .iter()
        .zip(&eps)
        .map(|(t, e)| (t.a + *e) / t.b)
        .collect();
    let mut alpha_arrived = vec![Complex64::zero(); n];
    for j in 0..n {
        let t = &transfers[j];
        let q = -t.c + alpha_local[j] * t.d;
        alpha_arrived[(j + 1) % n] = -q / eps[j];
    }
    let defects: Vec<Complex64> = (0..n)
        .map(|j| alpha_arrived[(j + 1) % n] - alpha_local[(j + 1) % n])
        .collect();
    Ok(BalanceChain {
        transfers,
        eps,
        alpha_local,
        alpha_arrived,
        defects,
    })
}

/// Γ(c)·cos(πc/2): the normalisation carried by the distinguished power
/// component of a twisted local solution.
fn gp(c: Complex64) -> Complex64 {
    crate::localfield::gamma_cos(c)
}

/// Left-endpoint data of the twisted distinguished solution with free real
/// phase `th` in the power basis `(φ₋, φ₊)`.
fn f_data_twisted(th: f64, c: Complex64) -> [Complex64; 2] {
    let e = Complex64::new(0.0, th).exp();
    [e * gp(c), e.conj() * gp(-c)]
}

/// Companion data with phase-independent Wronskian `W(f, ĝ) = π`.
fn ghat_data_twisted(th: f64, c: Complex64) -> [Complex64; 2] {
    let e = Complex64::new(0.0, -th).exp();
    [
        Complex64::zero(),
        Complex64::new(std::f64::consts::PI, 0.0) * e / (c * gp(c)),
    ]
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = (x + std::f64::consts::PI) % two_pi;
    if y < 0.0 {
        y += two_pi;
    }
    y - std::f64::consts::PI
}

/// Phases `th` solving `|R₋(th)| = |Γ(c₊)cos(πc₊/2)|` where
/// `R₋ = T₀₀·e^{i th}gp(c) + T₀₁·e^{−i th}gp(−c)` is the distinguished
/// arrival component: reduces to `cos(2·th + φ) = K`, up to four roots.
fn theta_candidates(t: &M2, c_here: Complex64, c_next: Complex64) -> Vec<f64> {
    let a = t.a * gp(c_here);
    let b = t.b * gp(-c_here);
    let tgt = gp(c_next).norm_sqr();
    let den = 2.0 * (a * b.conj()).norm();
    if den == 0.0 {
        return Vec::new();
    }
    let k = (tgt - a.norm_sqr() - b.norm_sqr()) / den;
    if k.abs() > 1.0 {
        return Vec::new();
    }
    let phi = (a * b.conj()).arg();
    let base = k.clamp(-1.0, 1.0).acos();
    let mut out = Vec::with_capacity(4);
    for sgn in [1.0, -1.0] {
        let th2 = sgn * base - phi;
        for kk in 0..2 {
            out.push(wrap_angle(th2 / 2.0 + kk as f64 * std::f64::consts::PI));
        }
    }
    out
}

/// Among the phase candidates, keep those whose arrival log-component sign
/// continues the untwisted chain (`eps·γ₊·Im R₋ > 0`) and pick the one
/// minimising `|Re R₋|`.
fn pick_theta(
    t: &M2,
    c_here: Complex64,
    c_next: Complex64,
    gam_next: f64,
    eps: f64,
) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for th in theta_candidates(t, c_here, c_next) {
        let fd = f_data_twisted(th, c_here);
        let r = t.a * fd[0] + t.b * fd[1];
        if eps * gam_next * r.im <= 0.0 {
            continue;
        }
        let score = r.re.abs();
        if best.map_or(true, |(s, _)| score < s) {
            best = Some((score, th));
        }
    }
    best.map(|(_, th)| th)
}

/// Half-monodromy crossing matrix for twist eigenvalue `Λ`; `Λ = 1` gives
/// `[[i, 0], [1, i]]`.
pub fn j_matrix(lambda: Complex64) -> M2 {
    let li = 1.0 / lambda;
    let lp = lambda + li;
    let lm = lambda - li;
    let i = Complex64::new(0.0, 1.0);
    M2::new(i * lp / 2.0, -(lm * lm) / (2.0 * lp), lp / 2.0, i * lp / 2.0)
}

#[derive(Clone, Debug)]
pub struct BalancedData {
    pub lambda: Vec<Complex64>,
    /// Scale defects; all equal to 1 exactly on balanced configurations.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub b_matrices: Vec<M2>,
    pub j_matrices: Vec<M2>,
    /// Scalar gauge mismatch of the chain (zero at balance).
    pub closure_defect: Complex64,
    /// `‖Π_j (J_j B_j) − (−1)^{n−1} Id‖`.
    pub residual: f64,
}

/// Evaluate the balance data of a real configuration for the given
/// per-point twist eigenvalues `Λ_j` (in ascending point order).
pub fn balance_check(
    oper: &Oper<Complex64>,
    lambdas: &[Complex64],
    tol: f64,
) -> Result<BalancedData, MonodromyError> {
    let chain = balance_chain(oper, tol)?;
    let n = chain.transfers.len();
    assert_eq!(lambdas.len(), n, "one Λ per marked point");
    let pi = std::f64::consts::PI;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for j in 0..n {
        let t = &chain.transfers[j];
        let p = -t.a + chain.alpha_arrived[j] * t.b;
        a.push(chain.eps[j] / p);
        b.push(t.b * pi / p);
    }
    let mut b_matrices = Vec::with_capacity(n);
    let mut j_matrices = Vec::with_capacity(n);
    let mut prod = M2::identity();
    for j in 0..n {
        let jm = j_matrix(lambdas[j]);
        let bm = M2::new(
            Complex64::new(1.0, 0.0),
            b[j],
            Complex64::zero(),
            -a[j],
        );
        prod = prod.mul(&jm.mul(&bm));
        j_matrices.push(jm);
        b_matrices.push(bm);
    }
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let target = M2::identity().scale(Complex64::new(sign, 0.0));
    let residual = prod.sub(&target).norm();
    Ok(BalancedData {
        lambda: lambdas.to_vec(),
        a,
        b,
        b_matrices,
        j_matrices,
        closure_defect: chain.defects[0],
        residual,
    })
}

/// The affine family of residue vectors compatible with regularity at ∞
/// for the given real points and weights: returns `(μ_particular, ν)` with
/// the general member `μ_particular + σ·ν`. The particular solution pins
/// `μ_k = 0` for `k ≥ 3`; `ν` spans the kernel (zero when `n = 3`).
pub fn balanced_mu_family(points: &[f64], weights: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    assert!(n >= 3);
    assert!(weights.len() >= n);
    let a: Vec<f64> = weights[..n]
        .iter()
        .map(|&l| (l * (l + 2.0) / 4.0).re)
        .collect();
    let r1: f64 = -a.iter().sum::<f64>();
    let r2: f64 = -2.0 * points.iter().zip(&a).map(|(t, ai)| t * ai).sum::<f64>();
    let m = crate::linalg::Mat::<Complex64>::from_rows(vec![
        vec![Complex64::new(1.0, 0.0); 3],
        points[..3].iter().map(|&t| Complex64::new(t, 0.0)).collect(),
        points[..3]
            .iter()
            .map(|&t| Complex64::new(t * t, 0.0))
            .collect(),
    ]);
    let rhs = crate::linalg::Mat::<Complex64>::col_vec(&[
        Complex64::zero(),
        Complex64::new(r1, 0.0),
        Complex64::new(r2, 0.0),
    ]);
    let sol = m.solve(&rhs, 1e-12).expect("distinct points");
    let mut mu_p = vec![0.0; n];
    for i in 0..3 {
        mu_p[i] = sol.at(i, 0).re;
    }
    let mut nu = vec![0.0; n];
    if n >= 4 {
        for j in 0..n {
            let mut prod = 1.0;
            for k in 0..n {
                if k != j {
                    prod *= points[j] - points[k];
                }
            }
            nu[j] = 1.0 / prod;
        }
    }
    (mu_p, nu)
}

#[derive(Clone, Debug)]
pub struct BalancedHit {
    pub sigma: f64,
    pub mu: Vec<f64>,
    pub data: BalancedData,
}

/// Scan the one-parameter residue family of a 4-point real configuration
/// for balanced members: bracket sign changes of `a_0 − 1` on a σ-grid,
/// bisect each bracket, and keep roots whose full balance data verifies
/// `a_j = 1` within `1e−6`. An empty result is a valid outcome.
pub fn find_balanced_4pt(
    points: &[f64],
    weights: &[Complex64],
    lambdas: &[Complex64],
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> Result<Vec<BalancedHit>, MonodromyError> {
    assert_eq!(points.len(), 4);
    assert!(steps >= 2 && hi > lo);
    let (mu_p, nu) = balanced_mu_family(points, weights);
    let assemble = |sigma: f64| -> Oper<Complex64> {
        let mu: Vec<Complex64> = mu_p
            .iter()
            .zip(&nu)
            .map(|(p, v)| Complex64::new(p + sigma * v, 0.0))
            .collect();
        let mut w: Vec<Complex64> = weights[..4].to_vec();
        w.push(Complex64::zero());
        Oper {
            points: points.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            weights: w,
            mu,
        }
    };
    let eval = |sigma: f64| -> Option<f64> {
        let oper = assemble(sigma);
        match balance_check(&oper, lambdas, tol) {
            Ok(d) => {
                let v = d.a[0] - Complex64::new(1.0, 0.0);
                if v.re.is_finite() && v.norm() < 1e6 {
                    Some(v.re)
                } else {
                    None
                }
            }
            Err(_) => None,
        }
    };
    let mut hits: Vec<BalancedHit> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let s = lo + (hi - lo) * k as f64 / steps as f64;
        let f = eval(s);
        if let (Some((s0, f0)), Some(f1)) = (prev, f) {
            if f0 * f1 < 0.0 {
                let (mut lo_b, mut hi_b, mut f_lo) = (s0, s, f0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo_b + hi_b);
                    match eval(mid) {
                        Some(fm) => {
                            if f_lo * fm <= 0.0 {
                                hi_b = mid;
                            } else {
                                lo_b = mid;
                                f_lo = fm;
                            }
                        }
                        None => break,
                    }
                }
                let sstar = 0.5 * (lo_b + hi_b);
                let oper = assemble(sstar);
                if let Ok(data) = balance_check(&oper, lambdas, tol) {
                    let worst = data
                        .a
                        .iter()
                        .map(|aj| (aj - Complex64::new(1.0, 0.0)).norm())
                        .fold(0.0, f64::max);
                    if worst < 1e-6
                        && hits.iter().all(|h| (h.sigma - sstar).abs() > 1e-9)
                    {
                        let mu = mu_p
                            .iter()
                            .zip(&nu)
                            .map(|(p, v)| p + sstar * v)
                            .collect();
                        hits.push(BalancedHit {
                            sigma: sstar,
                            mu,
                            data,
                        });
                    }
                }
            }
        }
        prev = f.map(|fv| (s, fv));
    }
    Ok(hits)
}

/// The distinguished real solution pair on a bounded interval
/// `(t_j, t_{j+1})`: `f_j` normalised by its distinguished component at
/// both endpoints, `ĝ_j` with Wronskian `W(f, g) = π`, and
/// `g_j = ĝ_j + iξ_j f_j` with `ξ = (Λ − Λ⁻¹)/(Λ + Λ⁻¹)`.
#[derive(Clone, Debug)]
pub struct IntervalSolution {
    pub interval: usize,
    pub lambda: Complex64,
    pub xi: Complex64,
    /// Left-frame coefficient data of `f_j` (log component, power
    /// component in the untwisted case).
    pub f_data: (Complex64, Complex64),
    pub ghat_data: (Complex64, Complex64),
    /// Sampled `W(f, g)` at the interval midpoint (≈ π).
    pub wronskian: Complex64,
    /// `(x, f(x), g(x))` at interior sample points.
    pub samples: Vec<(f64, Complex64, Complex64)>,
}

pub fn interval_solutions(
    oper: &Oper<Complex64>,
    j: usize,
    lambda_j: Complex64,
    tol: f64,
) -> Result<IntervalSolution, MonodromyError> {
    let ch = real_chain(oper);
    let n = ch.t.len();
    assert!(j + 1 < n, "interval solutions cover the bounded intervals");
    assert!(
        ch.c[j].norm() < 1e-12,
        "twisted interval data requires the twisted chain"
    );
    let pi = std::f64::consts::PI;
    let s0l = local_s0(&ch.t, j);
    let s0r = local_s0(&ch.t, j + 1);
    let y0 = frob_eval(&ch, j, 1.0, s0l)?;
    let t_j = interval_transfer(&ch, j, tol)?;
    let alpha = (1.0 + t_j.a) / t_j.b;
    let f_data = (Complex64::new(-1.0, 0.0), alpha);
    let ghat_data = (Complex64::zero(), Complex64::new(pi, 0.0));
    let lam_inv = 1.0 / lambda_j;
    let xi = (lambda_j - lam_inv) / (lambda_j + lam_inv);
    let i_xi = Complex64::new(0.0, 1.0) * xi;
    let f0 = y0.mul_vec([f_data.0, f_data.1]);
    let gh0 = y0.mul_vec([ghat_data.0, ghat_data.1]);
    let g0 = [gh0[0] + i_xi * f0[0], gh0[1] + i_xi * f0[1]];
    // March across the interval, sampling both solutions.
    let xa = ch.t[j] + s0l;
    let xb = ch.t[j + 1] - s0r;
    let nsamp = 7usize;
    let mut state = M2::new(f0[0], g0[0], f0[1], g0[1]);
    let mut samples = Vec::with_capacity(nsamp);
    let mut wronskian = Complex64::zero();
    let mut x_prev = xa;
    for k in 0..nsamp {
        let x = xa + (xb - xa) * k as f64 / (nsamp - 1) as f64;
        if k > 0 {
            state = rk_segment(
                &|z| chain_potential(&ch, z),
                &PathSeg::Line {
                    from: Complex64::new(x_prev, 0.0),
                    to: Complex64::new(x, 0.0),
                },
                tol,
                state,
            )?;
        }
        samples.push((x + ch.shift, state.a, state.b));
        if k == nsamp / 2 {
            wronskian = state.a * state.d - state.c * state.b;
        }
        x_prev = x;
    }
    Ok(IntervalSolution {
        interval: j,
        lambda: lambda_j,
        xi,
        f_data,
        ghat_data,
        wronskian,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::{solve_bae, BetheRoots};
    use crate::oper::{miura, oper_from_mu};
    use crate::repspace::GaudinConfig;
    use crate::scalar::c64;

    fn free_oper() -> Oper<Complex64> {
        let cfg = GaudinConfig::new(
            vec![c64(0.0, 0.0), c64(1.0, 0.0)],
            vec![c64(0.0, 0.0); 3],
            0,
        )
        .unwrap();
        oper_from_mu(&cfg, &[Complex64::zero(), Complex64::zero()], 1e-12).unwrap()
    }

    fn cfg_111() -> GaudinConfig<Complex64> {
        GaudinConfig::new(
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)],
            vec![c64(1.0, 0.0); 4],
            1,
        )
        .unwrap()
    }

    #[test]
    fn free_equation_translation() {
        let oper = free_oper();
        let ell = c64(0.7, 1.3);
        let start = c64(5.0, 5.0);
        let m = transport(&oper, &[start, start + ell], 1e-12, 0.1).unwrap();
        assert!((m.a - c64(1.0, 0.0)).norm() < 1e-10);
        assert!((m.b - ell).norm() < 1e-10);
        assert!(m.c.norm() < 1e-10);
        assert!((m.d - c64(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn contractible_loop_identity_and_det() {
        let cfg = cfg_111();
        let s3 = 3.0f64.sqrt();
        let mu = vec![
            c64(0.75 - s3 / 2.0, 0.0),
            c64(s3, 0.0),
            c64(-0.75 - s3 / 2.0, 0.0),
        ];
        let oper = oper_from_mu(&cfg, &mu, 1e-10).unwrap();
        let path = [
            c64(-1.0, 0.5),
            c64(3.0, 0.5),
            c64(3.0, 2.5),
            c64(-1.0, 2.5),
            c64(-1.0, 0.5),
        ];
        let m = transport(&oper, &path, 1e-11, 0.2).unwrap();
        assert!(
            m.dist_identity() < 1e-8,
            "loop residual {}",
            m.dist_identity()
        );
        assert!((m.det() - c64(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn margin_violation_detected() {
        let oper = free_oper();
        match transport(&oper, &[c64(-1.0, 0.01), c64(1.0, 0.01)], 1e-10, 0.05) {
            Err(MonodromyError::SingularityTooClose { distance, margin }) => {
                assert!(distance < margin);
            }
            other => panic!("expected SingularityTooClose, got {other:?}"),
        }
    }

    #[test]
    fn step_failure_near_singularity() {
        let cfg = cfg_111();
        let s3 = 3.0f64.sqrt();
        let mu = vec![
            c64(0.75 - s3 / 2.0, 0.0),
            c64(s3, 0.0),
            c64(-0.75 - s3 / 2.0, 0.0),
        ];
        let oper = oper_from_mu(&cfg, &mu, 1e-10).unwrap();
        let r = transport(&oper, &[c64(-1.0, 1e-13), c64(3.0, 1e-13)], 1e-10, 0.0);
        assert!(
            matches!(r, Err(MonodromyError::StepFailure { .. })),
            "got {r:?}"
        );
    }

    #[test]
    fn spectral_oper_trivial_monodromy() {
        let cfg = cfg_111();
        let w = c64(1.0 + 1.0 / 3.0f64.sqrt(), 0.0);
        let oper = miura(&cfg, &[w]);
        let mono = monodromy_generators(&oper, None, 0.25, 1e-10).unwrap();
        for (g, det) in mono.generators.iter().zip(&mono.raw_dets) {
            assert!((det - c64(1.0, 0.0)).norm() < 1e-9);
            let d = g.add(&M2::identity()).norm();
            assert!(d < 1e-6, "generator distance to −Id: {d:.3e}");
        }
        assert!(
            mono.relation_residual < 1e-7,
            "relation residual {:.3e}",
            mono.relation_residual
        );
        let cls = classify(&mono, 1e-5);
        assert!(cls.trivial_pgl2.set);
        assert!(!cls.generic);
    }

    #[test]
    fn zero_weights_identity_generators() {
        let oper = free_oper();
        let mono = monodromy_generators(&oper, None, 0.25, 1e-11).unwrap();
        for g in &mono.generators {
            assert!(g.dist_identity() < 1e-9);
        }
        assert!(mono.relation_residual < 1e-8);
    }

    #[test]
    fn non_spectral_oper_generic() {
        let cfg = cfg_111();
        let mu = vec![c64(1.5, 0.0), c64(-1.5, 0.0), c64(0.0, 0.0)];
        let oper = oper_from_mu(&cfg, &mu, 1e-10).unwrap();
        let mono = monodromy_generators(&oper, None, 0.25, 1e-10).unwrap();
        let worst = mono
            .generators
            .iter()
            .map(dist_to_pm_identity)
            .fold(0.0, f64::max);
        assert!(
            worst > 1e-2,
            "expected non-trivial generator, got {worst:.3e}"
        );
        assert!(mono.relation_residual < 1e-7);
    }

    #[test]
    fn discrete_series_solvable() {
        let cfg = GaudinConfig::new(
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)],
            vec![
                c64(-1.0, 0.0),
                c64(-1.0, 0.0),
                c64(-1.0, 0.0),
                c64(-7.0, 0.0),
            ],
            2,
        )
        .unwrap();
        let sols = solve_bae(&cfg, 1e-10, 0).unwrap();
        let h = 0.5 * 2.0f64.sqrt();
        let sol = BetheRoots {
            roots: vec![c64(1.0 - h, 0.0), c64(1.0 + h, 0.0)],
        };
        assert!(sols
            .iter()
            .any(|s| (s.roots[0] - sol.roots[0]).norm() < 1e-7));
        let oper = miura(&cfg, &sol.roots);
        let mono = monodromy_generators(&oper, None, 0.25, 1e-10).unwrap();
        let cls = classify(&mono, 1e-6);
        assert!(
            cls.solvable.set,
            "solvable residual {:.3e}",
            cls.solvable.margin
        );
        assert!(!cls.trivial_pgl2.set);
    }

    #[test]
    fn su11_form_detected_with_signature() {
        // Generators conjugated from SU(1,1) preserve Cᴴ·diag(1,−1)·C.
        let a = c64(1.25, 0.3);
        let b = c64(0.6, -0.45);
        let nrm = (a.norm_sqr() - b.norm_sqr()).sqrt();
        let (a, b) = (a / nrm, b / nrm);
        let m1 = M2::new(a, b, b.conj(), a.conj());
        let a2 = c64(0.9, -0.7);
        let b2 = c64(0.2, 0.5);
        let nrm2 = (a2.norm_sqr() - b2.norm_sqr()).sqrt();
        let (a2, b2) = (a2 / nrm2, b2 / nrm2);
        let m2 = M2::new(a2, b2, b2.conj(), a2.conj());
        let c = M2::new(c64(1.0, 0.2), c64(0.3, -0.1), c64(-0.2, 0.4), c64(1.1, 0.0))
            .det_normalized();
        let cinv = c.inverse();
        let gens = vec![cinv.mul(&m1.mul(&c)), cinv.mul(&m2.mul(&c))];
        let mono = MonodromyData {
            basepoint: Complex64::zero(),
            generators: gens,
            raw_dets: vec![c64(1.0, 0.0); 2],
            m_infinity: M2::identity(),
            relation_residual: 0.0,
        };
        let cls = classify(&mono, 1e-8);
        assert!(
            cls.real_form.set,
            "form residual {:.3e}",
            cls.real_form.margin
        );
        assert_eq!(cls.signature, Some((1, 1)));
        assert!(!cls.trivial_pgl2.set);
    }

    #[test]
    fn unipotent_generators_flagged() {
        let gens = vec![
            M2::new(c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)),
            M2::new(c64(1.0, 0.0), c64(0.0, 0.0), c64(3.0, 0.0), c64(1.0, 0.0)),
        ];
        let mono = MonodromyData {
            basepoint: Complex64::zero(),
            generators: gens,
            raw_dets: vec![c64(1.0, 0.0); 2],
            m_infinity: M2::identity(),
            relation_residual: 0.0,
        };
        let cls = classify(&mono, 1e-8);
        assert!(cls.unipotent_per_generator.iter().all(|f| f.set));
        assert!(!cls.trivial_pgl2.set);
        assert!(
            !cls.solvable.set,
            "upper and lower unipotents share no eigenline"
        );
    }

    #[test]
    fn classification_conjugation_invariant() {
        let cfg = cfg_111();
        let w = c64(1.0 - 1.0 / 3.0f64.sqrt(), 0.0);
        let oper = miura(&cfg, &[w]);
        let mono = monodromy_generators(&oper, None, 0.25, 1e-10).unwrap();
        let c = M2::new(c64(0.8, 0.1), c64(-0.4, 0.6), c64(0.2, -0.3), c64(1.2, 0.2))
            .det_normalized();
        let cinv = c.inverse();
        let conj_gens: Vec<M2> = mono
            .generators
            .iter()
            .map(|g| cinv.mul(&g.mul(&c)))
            .collect();
        let mono2 = MonodromyData {
            basepoint: mono.basepoint,
            generators: conj_gens,
            raw_dets: mono.raw_dets.clone(),
            m_infinity: cinv.mul(&mono.m_infinity.mul(&c)),
            relation_residual: mono.relation_residual,
        };
        let c1 = classify(&mono, 1e-5);
        let c2 = classify(&mono2, 1e-5);
        assert_eq!(c1.trivial_pgl2.set, c2.trivial_pgl2.set);
        assert_eq!(c1.solvable.set, c2.solvable.set);
        assert_eq!(c1.generic, c2.generic);
    }

    #[test]
    fn pv_crossing_free_equation_sign() {
        // For v = 0 both half-circle continuations are the plain
        // translation, so the principal value is minus that translation.
        let oper = free_oper();
        let m = pv_crossing(&oper, -0.5, 0.5, 1e-11).unwrap();
        assert!((m.a + c64(1.0, 0.0)).norm() < 1e-9);
        assert!((m.b + c64(1.0, 0.0)).norm() < 1e-9);
        assert!(m.c.norm() < 1e-9);
        assert!((m.d + c64(1.0, 0.0)).norm() < 1e-9);
    }

    // -- balanced real configurations ------------------------------------

    fn chain_oper(t: &[f64], mu: &[f64]) -> Oper<Complex64> {
        let n = t.len();
        let mut weights = vec![c64(-1.0, 0.0); n];
        weights.push(Complex64::zero());
        Oper {
            points: t.iter().map(|&x| c64(x, 0.0)).collect(),
            weights,
            mu: mu.iter().map(|&m| c64(m, 0.0)).collect(),
        }
    }

    #[test]
    fn three_point_chain_is_balanced() {
        // With three marked points the residue family is rigid and already
        // balanced: a = (1, 1, 1), b = (−1, −1, −1), product +Id.
        let points = [-1.0, 0.0, 1.0];
        let weights = vec![c64(-1.0, 0.0); 3];
        let (mu, nu) = balanced_mu_family(&points, &weights);
        assert!((mu[0] + 0.375).abs() < 1e-12);
        assert!(mu[1].abs() < 1e-12);
        assert!((mu[2] - 0.375).abs() < 1e-12);
        assert!(nu.iter().all(|&v| v == 0.0));
        let oper = chain_oper(&points, &mu);
        let lambdas = vec![c64(1.0, 0.0); 3];
        let data = balance_check(&oper, &lambdas, 1e-11).unwrap();
        for j in 0..3 {
            assert!(
                (data.a[j] - c64(1.0, 0.0)).norm() < 1e-7,
                "a[{j}] = {}",
                data.a[j]
            );
            assert!(
                (data.b[j] + c64(1.0, 0.0)).norm() < 1e-7,
                "b[{j}] = {}",
                data.b[j]
            );
        }
        assert!(data.closure_defect.norm() < 1e-7);
        assert!(data.residual < 1e-7, "residual {}", data.residual);
    }

    #[test]
    fn four_point_balanced_scan_and_stability() {
        let points = [-1.5, -0.5, 0.5, 1.5];
        let weights = vec![c64(-1.0, 0.0); 4];
        let lambdas = vec![c64(1.0, 0.0); 4];
        let hits = find_balanced_4pt(&points, &weights, &lambdas, 2.0, 2.8, 16, 1e-10)
            .unwrap();
        assert_eq!(hits.len(), 1, "expected a single balanced member");
        let h = &hits[0];
        assert!(
            (h.sigma - 2.380424149994).abs() < 1e-6,
            "sigma = {}",
            h.sigma
        );
        let b_expect = [-0.65211273, -3.06695439, -0.65211273, -3.06695439];
        for j in 0..4 {
            assert!((h.data.a[j] - c64(1.0, 0.0)).norm() < 1e-7);
            assert!(
                (h.data.b[j] - c64(b_expect[j], 0.0)).norm() < 1e-6,
                "b[{j}] = {}",
                h.data.b[j]
            );
        }
        assert!(h.data.residual < 1e-8, "residual {}", h.data.residual);
        // Halving the scan step must find the same root.
        let fine = find_balanced_4pt(&points, &weights, &lambdas, 2.0, 2.8, 32, 1e-10)
            .unwrap();
        assert_eq!(fine.len(), 1);
        assert!((fine[0].sigma - h.sigma).abs() < 1e-9);
    }

    #[test]
    fn unbalanced_member_has_large_defect() {
        let points = [-1.5, -0.5, 0.5, 1.5];
        let weights = vec![c64(-1.0, 0.0); 4];
        let (mu_p, nu) = balanced_mu_family(&points, &weights);
        let sigma = 1.0; // far from the balanced value
        let mu: Vec<f64> = mu_p
            .iter()
            .zip(&nu)
            .map(|(p, v)| p + sigma * v)
            .collect();
        let oper = chain_oper(&points, &mu);
        let lambdas = vec![c64(1.0, 0.0); 4];
        let data = balance_check(&oper, &lambdas, 1e-10).unwrap();
        let worst = data
            .a
            .iter()
            .map(|aj| (aj - c64(1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(worst > 1e-2, "worst |a − 1| = {worst}");
    }

    #[test]
    fn interval_solution_wronskian_is_pi() {
        let points = [-1.0, 0.0, 1.0];
        let weights = vec![c64(-1.0, 0.0); 3];
        let (mu, _) = balanced_mu_family(&points, &weights);
        let oper = chain_oper(&points, &mu);
        for j in 0..2 {
            let sol = interval_solutions(&oper, j, c64(1.0, 0.0), 1e-11).unwrap();
            assert!(sol.xi.norm() < 1e-14, "ξ(Λ=1) must vanish");
            let pi = std::f64::consts::PI;
            assert!(
                (sol.wronskian - c64(pi, 0.0)).norm() < 1e-8,
                "W = {}",
                sol.wronskian
            );
            assert_eq!(sol.samples.len(), 7);
            // Interior samples of the distinguished solution stay real.
            for (x, f, _) in &sol.samples {
                assert!(points[j] < *x && *x < points[j + 1]);
                assert!(f.im.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn infinity_residuals_detect_irregular_data() {
        let points = [-1.0, 0.0, 1.0];
        let weights = vec![c64(-1.0, 0.0); 3];
        let (mu, _) = balanced_mu_family(&points, &weights);
        let oper = chain_oper(&points, &mu);
        let (r0, r1, r2) = infinity_regular_residuals(&oper);
        assert!(r0 < 1e-12 && r1 < 1e-12 && r2 < 1e-12);
        let bad = chain_oper(&points, &[0.5, -0.25, -0.25]);
        let (s0, s1, s2) = infinity_regular_residuals(&bad);
        assert!(s0.max(s1).max(s2) > 0.1);
    }
}
