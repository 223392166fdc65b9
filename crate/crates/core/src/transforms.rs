//! Position-space evaluation: the position probability amplitude psi(t, x),
//! the Klein-Gordon scalar amplitude phi(t, x), and the Newton-Wigner
//! localized-state profile with its nascent-delta probe.

use crate::error::{Error, Result};
use crate::quadrature::{
    axisym_fourier3d_boxed, integrate_adaptive, radial_fourier3d, regulated_oscillatory,
    CutoffPolicy, QuadratureSpec, RegulatorSpec, FRAC_1_SQRT_2PI,
};
use crate::specfun::bessel_j0;
use crate::states::{
    perp_of, AmplitudeKind, MomentumAmplitude, Particle, ScalarMomentumAmplitude, SupportBox,
};
use crate::vec3::Vec3;
use num_complex::Complex64;
use std::f64::consts::PI;

/// One evaluated point of a position-space amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionSample {
    pub t: f64,
    pub x: Vec3,
    pub value: Complex64,
    pub est_error: f64,
}

fn support_cutoff(spec: &QuadratureSpec, p_max: f64) -> QuadratureSpec {
    match spec.cutoff {
        CutoffPolicy::FixedCutoff(_) => *spec,
        CutoffPolicy::TailEstimate => QuadratureSpec {
            cutoff: CutoffPolicy::FixedCutoff(p_max),
            ..*spec
        },
    }
}

/// psi(t, x) = (2 pi)^{-3/2} Int d^3p e^{-i omega t} e^{i p.x} Psi(p),
/// by radial reduction for isotropic states and cylindrical reduction for
/// states with a symmetry axis.
pub fn position_amplitude(
    psi: &MomentumAmplitude,
    t: f64,
    x: Vec3,
    spec: &QuadratureSpec,
) -> Result<PositionSample> {
    // a momentum phase e^{-i p.a} is exactly a translation by a
    if let AmplitudeKind::PhaseShifted { inner, shift } = &psi.kind {
        let mut s = position_amplitude(inner, t, x - *shift, spec)?;
        s.x = x;
        return Ok(s);
    }
    let particle = psi.particle;
    let sup = psi.support();
    match psi.symmetry_axis() {
        None => {
            let spec = support_cutoff(spec, sup.perp_max);
            let res = radial_fourier3d(
                |p| {
                    let omega = particle.omega(p * p);
                    psi.value(Vec3::z_axis(p)) * Complex64::from_polar(1.0, -omega * t)
                },
                x.norm(),
                &spec,
            )?;
            Ok(PositionSample { t, x, value: res.value, est_error: res.est_error })
        }
        Some(axis) => {
            let (x_par, x_perp) = x.split_along(axis);
            let e_perp = perp_of(axis);
            let res = axisym_fourier3d_boxed(
                |pp, pl| {
                    let p = axis.scale(pl) + e_perp.scale(pp);
                    let omega = particle.omega(p.norm_sq());
                    psi.value(p) * Complex64::from_polar(1.0, -omega * t)
                },
                x_perp,
                x_par,
                sup.par_min,
                sup.par_max,
                sup.perp_max,
                spec,
            )?;
            Ok(PositionSample { t, x, value: res.value, est_error: res.est_error })
        }
    }
}

/// phi(t, x) = (2 pi)^{-3/2} Int (d^3p / omega) e^{-i omega t} e^{i p.x} Phi(p).
pub fn scalar_amplitude(
    phi: &ScalarMomentumAmplitude,
    t: f64,
    x: Vec3,
    spec: &QuadratureSpec,
) -> Result<PositionSample> {
    let particle = phi.particle;
    let sup = phi.support();
    match phi.symmetry_axis() {
        None => {
            let spec = support_cutoff(spec, sup.perp_max);
            let res = radial_fourier3d(
                |p| {
                    let omega = particle.omega(p * p);
                    phi.value(Vec3::z_axis(p)) * Complex64::from_polar(1.0 / omega, -omega * t)
                },
                x.norm(),
                &spec,
            )?;
            Ok(PositionSample { t, x, value: res.value, est_error: res.est_error })
        }
        Some(axis) => {
            let (x_par, x_perp) = x.split_along(axis);
            let e_perp = perp_of(axis);
            let res = axisym_fourier3d_boxed(
                |pp, pl| {
                    let p = axis.scale(pl) + e_perp.scale(pp);
                    let omega = particle.omega(p.norm_sq());
                    phi.value(p) * Complex64::from_polar(1.0 / omega, -omega * t)
                },
                x_perp,
                x_par,
                sup.par_min,
                sup.par_max,
                sup.perp_max,
                spec,
            )?;
            Ok(PositionSample { t, x, value: res.value, est_error: res.est_error })
        }
    }
}

/// The scalar profile of the Newton-Wigner localized state at the origin,
///   phi_0(0, r) = (1 / 2 pi^2 r) * lim Int_0^inf p sin(pr) / sqrt(omega) dp,
/// with the divergent integral Abel-regulated. The profile is proportional
/// to (m/r)^{5/4} K_{5/4}(m r); the constant is never asserted, only the
/// shape.
pub fn nw_localized_scalar(
    particle: &Particle,
    r: f64,
    reg: &RegulatorSpec,
    spec: &QuadratureSpec,
) -> Result<PositionSample> {
    if !(r > 0.0) {
        return Err(Error::Domain("profile radius must be positive".into()));
    }
    let m = particle.mass;
    let res = regulated_oscillatory(
        |p| Complex64::new((p * p + m * m).powf(-0.25), 0.0),
        r,
        reg,
        spec,
    )?;
    let pref = 1.0 / (2.0 * PI * PI * r);
    Ok(PositionSample {
        t: 0.0,
        x: Vec3::z_axis(r),
        value: res.value * pref,
        est_error: res.est_error * pref,
    })
}

/// Pair the sharp-momentum-cutoff localized state
///   psi_{0,P}(0, r) = (sin(Pr) - Pr cos(Pr)) / (2 pi^2 r^3)
/// with an isotropic Gaussian test function g of width w and unit height:
///   Int d^3x psi_{0,P}(x) g(|x|) -> g(0) = 1 as P -> inf.
pub fn nw_delta_smeared(w: f64, p_cutoff: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Domain("test-function width must be positive".into()));
    }
    if !(p_cutoff > 0.0) || !p_cutoff.is_finite() {
        return Err(Error::Domain("momentum cutoff must be positive".into()));
    }
    // Int d^3x reduces to (2/pi) Int_0^inf (sin(Pr) - Pr cos(Pr)) g(r) / r dr,
    // summed one oscillation at a time.
    let r_max = 13.0 * w;
    let period = PI / p_cutoff;
    let chunk_spec = QuadratureSpec {
        abs_tol: (spec.abs_tol).min(1e-13),
        ..*spec
    };
    let integrand = |r: f64| {
        if r == 0.0 {
            return Complex64::default();
        }
        let z = p_cutoff * r;
        let kernel = (z.sin() - z * z.cos()) / r;
        Complex64::new(kernel * (-r * r / (2.0 * w * w)).exp(), 0.0)
    };
    let mut a = 0.0;
    let mut total = 0.0;
    while a < r_max {
        let b = (a + period).min(r_max);
        total += integrate_adaptive(integrand, a, b, &chunk_spec)?.value.re;
        a = b;
    }
    Ok(total * 2.0 / PI)
}

fn grid_node_count(span: f64, x_max: f64) -> usize {
    let n = 64.0 + 0.8 * span * x_max;
    (n.ceil() as usize).next_multiple_of(16).min(6000)
}

/// Tensor-product Gauss evaluation of the cylindrical reduction on a whole
/// (x_perp, x_par) grid at once. `f(p_perp, p_par)` must already include any
/// time phase or measure factor; the result matches `axisym_fourier3d_boxed`
/// point by point but shares the inner Hankel sums across the grid.
pub fn axisym_grid_transform<F>(
    f: F,
    sup: &SupportBox,
    x_perps: &[f64],
    x_pars: &[f64],
) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(f64, f64) -> Complex64,
{
    if !(sup.par_max > sup.par_min) || !(sup.perp_max > 0.0) {
        return Err(Error::Domain("empty momentum support box".into()));
    }
    if x_perps.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain("x_perp grid must be >= 0".into()));
    }
    let xl_max = x_pars.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let xp_max = x_perps.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let n_par = grid_node_count(sup.par_max - sup.par_min, xl_max);
    let n_perp = grid_node_count(sup.perp_max, xp_max);

    let map_rule = |n: usize, a: f64, b: f64| {
        let rule = crate::gauss::gauss_legendre(n);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let nodes: Vec<f64> = rule.nodes.iter().map(|&u| c + h * u).collect();
        let weights: Vec<f64> = rule.weights.iter().map(|&w| w * h).collect();
        (nodes, weights)
    };
    let (pl, wl) = map_rule(n_par, sup.par_min, sup.par_max);
    let (pp, wp) = map_rule(n_perp, 0.0, sup.perp_max);

    // momentum samples, indexed [par][perp]
    let fm: Vec<Vec<Complex64>> = pl
        .iter()
        .map(|&l| pp.iter().map(|&q| f(q, l)).collect())
        .collect();
    for row in &fm {
        for v in row {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Domain("non-finite integrand sample".into()));
            }
        }
    }

    // weighted outgoing phases, indexed [x_par][par]
    let phases: Vec<Vec<Complex64>> = x_pars
        .iter()
        .map(|&xl| {
            pl.iter()
                .zip(&wl)
                .map(|(&l, &w)| Complex64::from_polar(w, l * xl))
                .collect()
        })
        .collect();

    let mut out = vec![vec![Complex64::default(); x_pars.len()]; x_perps.len()];
    let mut inner = vec![Complex64::default(); pl.len()];
    for (i, &xp) in x_perps.iter().enumerate() {
        let j0w: Vec<f64> = pp
            .iter()
            .zip(&wp)
            .map(|(&q, &w)| bessel_j0(q * xp).map(|r| r.value * q * w))
            .collect::<Result<_>>()?;
        for (j, row) in fm.iter().enumerate() {
            let mut acc = Complex64::default();
            for (v, &k) in row.iter().zip(&j0w) {
                acc += v * k;
            }
            inner[j] = acc;
        }
        for (j2, ph) in phases.iter().enumerate() {
            let mut acc = Complex64::default();
            for (p, v) in ph.iter().zip(&inner) {
                acc += p * v;
            }
            out[i][j2] = acc * FRAC_1_SQRT_2PI;
        }
    }
    Ok(out)
}

/// Gauss-Legendre nodes and weights mapped onto [a, b]; the shared axis
/// discretization for grid transforms and grid moments.
pub fn grid_axis(a: f64, b: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = crate::gauss::gauss_legendre(points);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let nodes = rule.nodes.iter().map(|&u| c + h * u).collect();
    let weights = rule.weights.iter().map(|&w| w * h).collect();
    (nodes, weights)
}

/// 12-significant-digit float formatting used by every CSV artifact.
pub fn fmt_sig12(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Radial profile CSV: header `r,re,im,abs2`.
pub fn profile_csv_radial(samples: &[PositionSample]) -> String {
    let mut out = String::from("r,re,im,abs2\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig12(s.x.norm()),
            fmt_sig12(s.value.re),
            fmt_sig12(s.value.im),
            fmt_sig12(s.value.norm_sqr()),
        ));
    }
    out
}

/// Axisymmetric profile CSV: header `x_perp,x_par,re,im,abs2`, rows in
/// lexicographic grid order (x_perp outer, x_par inner).
pub fn profile_csv_axisym(x_perps: &[f64], x_pars: &[f64], grid: &[Vec<Complex64>]) -> String {
    let mut out = String::from("x_perp,x_par,re,im,abs2\n");
    for (i, &xp) in x_perps.iter().enumerate() {
        for (j, &xl) in x_pars.iter().enumerate() {
            let v = grid[i][j];
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig12(xp),
                fmt_sig12(xl),
                fmt_sig12(v.re),
                fmt_sig12(v.im),
                fmt_sig12(v.norm_sqr()),
            ));
        }
    }
    out
}
