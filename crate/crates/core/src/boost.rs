//! The Lorentz-contraction experiment: exact boosted position amplitudes by
//! quadrature, the narrow-packet Gaussian closed forms, second-moment width
//! measurement, and the approximation-error report.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::states::{AmplitudeKind, BoostParams, MomentumAmplitude, Particle};
use crate::transforms::{axisym_grid_transform, grid_axis, position_amplitude, PositionSample};
use crate::vec3::Vec3;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Outcome of one contraction experiment. `max_pointwise_rel_err` is the
/// largest deviation between the exact and closed-form amplitudes on a
/// +-4-width grid, scaled by the closed form's peak value.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub sigma_x_unboosted: f64,
    pub predicted_parallel: f64,
    pub measured_parallel: f64,
    pub measured_perp: f64,
    pub validity_ratio: f64,
    pub max_pointwise_rel_err: f64,
}

/// Second-moment widths of a nonnegative density on the (x_perp, x_par)
/// plane, with x_perp treated as an even coordinate.
#[derive(Debug, Clone, Copy)]
pub struct Widths {
    pub sigma_perp: f64,
    pub sigma_par: f64,
    pub par_mean: f64,
    /// plane integral of the density, before normalization
    pub plane_norm: f64,
}

/// Rectangular measurement window and per-axis resolution.
#[derive(Debug, Clone, Copy)]
pub struct PlaneGrid {
    pub perp_max: f64,
    pub par_min: f64,
    pub par_max: f64,
    pub points: usize,
}

impl PlaneGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.perp_max > 0.0) || !(self.par_max > self.par_min) {
            return Err(Error::Domain("measurement window is empty".into()));
        }
        if self.points < 8 {
            return Err(Error::Domain("grid needs at least 8 points per axis".into()));
        }
        Ok(())
    }
}

fn require_gaussian(psi: &MomentumAmplitude) -> Result<f64> {
    match &psi.kind {
        AmplitudeKind::IsotropicGaussian { sigma_p } => Ok(*sigma_p),
        _ => Err(Error::Domain(
            "closed forms exist only for the isotropic Gaussian family".into(),
        )),
    }
}

/// Exact boosted position amplitude at t = 0, by cylindrical quadrature of
/// the boosted momentum amplitude. No approximations beyond the quadrature
/// tolerance.
pub fn boosted_position_exact(
    psi: &MomentumAmplitude,
    boost: &BoostParams,
    x_perp: f64,
    x_par: f64,
    spec: &QuadratureSpec,
) -> Result<PositionSample> {
    if boost.speed() == 0.0 {
        return position_amplitude(psi, 0.0, Vec3::z_axis((x_perp * x_perp + x_par * x_par).sqrt()), spec);
    }
    let boosted = psi.clone().boosted(*boost)?;
    let axis = boost.axis().expect("nonzero boost");
    let e_perp = crate::states::perp_of(axis);
    position_amplitude(
        &boosted,
        0.0,
        axis.scale(x_par) + e_perp.scale(x_perp),
        spec,
    )
}

/// The narrow-packet closed form of the boosted Gaussian at t = 0:
/// carrier e^{i m gamma0 beta0 x_par}, perpendicular width sigma_x,
/// parallel width sigma_x / gamma0, prefactor sqrt(gamma0) so the
/// position-space norm stays 1.
pub fn boosted_position_gaussian(
    psi: &MomentumAmplitude,
    boost: &BoostParams,
    x_perp: f64,
    x_par: f64,
) -> Result<PositionSample> {
    let sigma_p = require_gaussian(psi)?;
    let m = psi.particle.mass;
    let g0 = boost.gamma0;
    let b0 = boost.speed();
    let sx = 1.0 / (2.0 * sigma_p);
    let env = (-(x_perp * x_perp) / (4.0 * sx * sx)
        - g0 * g0 * x_par * x_par / (4.0 * sx * sx))
        .exp();
    let amp = g0.sqrt() * (2.0 * PI * sx * sx).powf(-0.75) * env;
    let value = Complex64::from_polar(amp, m * g0 * b0 * x_par);
    Ok(PositionSample {
        t: 0.0,
        x: Vec3::new(x_perp, 0.0, x_par),
        value,
        est_error: 0.0,
    })
}

/// The scalar-amplitude closed form: the position form above with the slow
/// 1/omega measure replaced by its value 1/(m gamma0) at the packet's peak.
pub fn boosted_scalar_gaussian(
    psi: &MomentumAmplitude,
    boost: &BoostParams,
    x_perp: f64,
    x_par: f64,
) -> Result<PositionSample> {
    let mut s = boosted_position_gaussian(psi, boost, x_perp, x_par)?;
    let scale = 1.0 / (psi.particle.mass * boost.gamma0);
    s.value *= scale;
    s.est_error *= scale;
    Ok(s)
}

/// Plane second moments from tabulated density values on Gauss axes.
pub(crate) fn widths_from_grid(
    x_perps: &[f64],
    w_perps: &[f64],
    x_pars: &[f64],
    w_pars: &[f64],
    abs2: &[Vec<f64>],
) -> Result<Widths> {
    let mut norm = 0.0;
    let mut m_par = 0.0;
    let mut m_par2 = 0.0;
    let mut m_perp2 = 0.0;
    for (i, (&xp, &wp)) in x_perps.iter().zip(w_perps).enumerate() {
        for (j, (&xl, &wl)) in x_pars.iter().zip(w_pars).enumerate() {
            let f = abs2[i][j];
            if !(f >= 0.0) {
                return Err(Error::Domain("density sampler produced a negative value".into()));
            }
            let w = wp * wl;
            norm += w * f;
            m_par += w * f * xl;
            m_par2 += w * f * xl * xl;
            m_perp2 += w * f * xp * xp;
        }
    }
    if !(norm > 0.0) {
        return Err(Error::Domain("density integrates to zero on the window".into()));
    }
    let mean = m_par / norm;
    let var_par = (m_par2 / norm - mean * mean).max(0.0);
    let var_perp = (m_perp2 / norm).max(0.0);
    Ok(Widths {
        sigma_perp: var_perp.sqrt(),
        sigma_par: var_par.sqrt(),
        par_mean: mean,
        plane_norm: norm,
    })
}

/// Second-moment widths of `abs2_sampler` measured by Gauss quadrature on
/// the window. The perpendicular moment is taken about 0 (even coordinate);
/// the parallel moment is central.
pub fn measure_widths<F>(abs2_sampler: F, grid: &PlaneGrid) -> Result<Widths>
where
    F: Fn(f64, f64) -> f64,
{
    grid.validate()?;
    let (xp, wp) = grid_axis(0.0, grid.perp_max, grid.points);
    let (xl, wl) = grid_axis(grid.par_min, grid.par_max, grid.points);
    let abs2: Vec<Vec<f64>> = xp
        .iter()
        .map(|&a| xl.iter().map(|&b| abs2_sampler(a, b)).collect())
        .collect();
    widths_from_grid(&xp, &wp, &xl, &wl, &abs2)
}

/// Int d^3x of an azimuthally symmetric density tabulated on Gauss axes:
/// 2 pi Int x_perp dx_perp dx_par.
pub fn cylindrical_norm(
    x_perps: &[f64],
    w_perps: &[f64],
    x_pars: &[f64],
    w_pars: &[f64],
    abs2: &[Vec<f64>],
) -> f64 {
    let mut total = 0.0;
    for (i, (&xp, &wp)) in x_perps.iter().zip(w_perps).enumerate() {
        for (&_xl, (&f, &wl)) in x_pars.iter().zip(abs2[i].iter().zip(w_pars)) {
            total += 2.0 * PI * xp * wp * wl * f;
        }
    }
    total
}

/// Exact amplitude of the boosted Gaussian on the whole position grid at
/// once (tensor Gauss evaluation of the cylindrical transform).
pub fn boosted_grid_exact(
    psi: &MomentumAmplitude,
    boost: &BoostParams,
    x_perps: &[f64],
    x_pars: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    let boosted = psi.clone().boosted(*boost)?;
    let axis = boost.axis().ok_or_else(|| {
        Error::Domain("grid evaluation needs a nonzero boost".into())
    })?;
    let e_perp = crate::states::perp_of(axis);
    let sup = boosted.support();
    axisym_grid_transform(
        |pp, pl| boosted.value(axis.scale(pl) + e_perp.scale(pp)),
        &sup,
        x_perps,
        x_pars,
    )
}

/// Run the full contraction experiment for one (sigma_p, beta0) pair.
pub fn contraction_experiment(
    particle: &Particle,
    sigma_p: f64,
    beta0: f64,
    _spec: &QuadratureSpec,
) -> Result<ContractionReport> {
    if !(beta0 > 0.0 && beta0 < 1.0) {
        return Err(Error::Domain(format!(
            "boost speed must be in (0, 1), got {beta0}"
        )));
    }
    let validity_ratio = sigma_p / (particle.mass * beta0);
    if validity_ratio > 0.1 {
        return Err(Error::Domain(format!(
            "narrow-packet condition sigma_p / (m beta0) < 0.1 violated: {validity_ratio:.4}"
        )));
    }
    let psi = MomentumAmplitude::gaussian(*particle, sigma_p)?;
    let boost = BoostParams::along_z(beta0)?;
    let sx = 1.0 / (2.0 * sigma_p);
    let predicted = sx / boost.gamma0;

    // measurement window: +-8 predicted widths per axis
    let points = 257;
    let (xp, wp) = grid_axis(0.0, 8.0 * sx, points);
    let (xl, wl) = grid_axis(-8.0 * predicted, 8.0 * predicted, points);
    let exact = boosted_grid_exact(&psi, &boost, &xp, &xl)?;
    let abs2: Vec<Vec<f64>> = exact
        .iter()
        .map(|row| row.iter().map(|v| v.norm_sqr()).collect())
        .collect();
    let widths = widths_from_grid(&xp, &wp, &xl, &wl, &abs2)?;

    // approximation error on a +-4-width grid, scaled by the peak
    let points_err = 65;
    let (exp, _) = grid_axis(0.0, 4.0 * sx, points_err);
    let (exl, _) = grid_axis(-4.0 * predicted, 4.0 * predicted, points_err);
    let exact_err = boosted_grid_exact(&psi, &boost, &exp, &exl)?;
    let peak = boosted_position_gaussian(&psi, &boost, 0.0, 0.0)?
        .value
        .norm();
    let mut max_err = 0.0f64;
    for (i, &a) in exp.iter().enumerate() {
        for (j, &b) in exl.iter().enumerate() {
            let approx = boosted_position_gaussian(&psi, &boost, a, b)?.value;
            let d = (exact_err[i][j] - approx).norm() / peak;
            max_err = max_err.max(d);
        }
    }

    Ok(ContractionReport {
        sigma_x_unboosted: sx,
        predicted_parallel: predicted,
        measured_parallel: widths.sigma_par,
        measured_perp: widths.sigma_perp,
        validity_ratio,
        max_pointwise_rel_err: max_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn particle() -> Particle {
        Particle::new(1.0).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn closed_form_reduces_to_rest_frame_gaussian() {
        let sp = 0.4;
        let psi = MomentumAmplitude::gaussian(particle(), sp).unwrap();
        let still = BoostParams::along_z(0.0).unwrap();
        let sx = 1.0 / (2.0 * sp);
        for &(a, b) in &[(0.0, 0.0), (0.5, 0.0), (0.0, 0.8), (0.3, -0.4)] {
            let got = boosted_position_gaussian(&psi, &still, a, b).unwrap().value;
            let r2 = a * a + b * b;
            let want = (-r2 / (4.0 * sx * sx)).exp() / (2.0 * PI * sx * sx).powf(0.75);
            assert_relative_eq!(got.re, want, max_relative = 1e-14);
            assert_eq!(got.im, 0.0);
        }
        // scalar version divides by m gamma0 = m
        let got = boosted_scalar_gaussian(&psi, &still, 0.0, 0.0).unwrap().value;
        let want = boosted_position_gaussian(&psi, &still, 0.0, 0.0).unwrap().value;
        assert_relative_eq!(got.re, want.re / particle().mass, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_rejects_non_gaussian_input() {
        let psi = MomentumAmplitude::gaussian(particle(), 0.3)
            .unwrap()
            .phase_shifted(Vec3::z_axis(1.0))
            .unwrap();
        let boost = BoostParams::along_z(0.5).unwrap();
        assert!(boosted_position_gaussian(&psi, &boost, 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_matches_unboosted_at_zero_speed() {
        let psi = MomentumAmplitude::gaussian(particle(), 0.5).unwrap();
        let still = BoostParams::along_z(0.0).unwrap();
        let got = boosted_position_exact(&psi, &still, 0.3, 0.4, &spec()).unwrap();
        let want = position_amplitude(&psi, 0.0, Vec3::z_axis(0.5), &spec()).unwrap();
        assert!((got.value - want.value).norm() < 1e-8);
    }

    #[test]
    fn exact_agrees_with_closed_form_in_validity_regime() {
        let sp = 0.01;
        let psi = MomentumAmplitude::gaussian(particle(), sp).unwrap();
        let boost = BoostParams::along_z(0.8).unwrap();
        let sx = 50.0;
        let peak = boosted_position_gaussian(&psi, &boost, 0.0, 0.0)
            .unwrap()
            .value
            .norm();
        for &(a, b) in &[(0.0, 0.0), (sx, 0.0), (0.0, sx * 0.6), (sx * 0.5, -sx * 0.3)] {
            let exact = boosted_position_exact(&psi, &boost, a, b, &spec()).unwrap().value;
            let approx = boosted_position_gaussian(&psi, &boost, a, b).unwrap().value;
            assert!(
                (exact - approx).norm() < 0.02 * peak,
                "mismatch at ({a}, {b}): {exact} vs {approx}"
            );
        }
        // at the peak itself the agreement is much tighter
        let exact = boosted_position_exact(&psi, &boost, 0.0, 0.0, &spec()).unwrap().value;
        assert!((exact.norm() - peak).abs() < 1e-3 * peak);
    }

    #[test]
    fn carrier_wavenumber_is_m_gamma_beta() {
        let sp = 0.01;
        let psi = MomentumAmplitude::gaussian(particle(), sp).unwrap();
        let boost = BoostParams::along_z(0.9).unwrap();
        let d = 0.05;
        let a = boosted_position_exact(&psi, &boost, 0.0, 0.0, &spec()).unwrap().value;
        let b = boosted_position_exact(&psi, &boost, 0.0, d, &spec()).unwrap().value;
        let k = (b / a).arg() / d;
        let want = boost.gamma0 * 0.9;
        assert_relative_eq!(k, want, max_relative = 1e-2);
    }

    #[test]
    fn boosted_norm_is_one() {
        let sp = 0.01;
        let psi = MomentumAmplitude::gaussian(particle(), sp).unwrap();
        let boost = BoostParams::along_z(0.8).unwrap();
        let sx = 50.0;
        let pred = sx / boost.gamma0;
        let points = 257;
        let (xp, wp) = grid_axis(0.0, 8.0 * sx, points);
        let (xl, wl) = grid_axis(-8.0 * pred, 8.0 * pred, points);
        let grid = boosted_grid_exact(&psi, &boost, &xp, &xl).unwrap();
        let abs2: Vec<Vec<f64>> = grid
            .iter()
            .map(|row| row.iter().map(|v| v.norm_sqr()).collect())
            .collect();
        let norm = cylindrical_norm(&xp, &wp, &xl, &wl, &abs2);
        assert_relative_eq!(norm, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn width_measurement_on_known_densities() {
        // Gaussian of width sigma per axis
        let s = 0.7;
        let grid = PlaneGrid {
            perp_max: 8.0 * s,
            par_min: -8.0 * s,
            par_max: 8.0 * s,
            points: 129,
        };
        let w = measure_widths(
            |a, b| (-(a * a + b * b) / (2.0 * s * s)).exp(),
            &grid,
        )
        .unwrap();
        assert_relative_eq!(w.sigma_perp, s, max_relative = 1e-6);
        assert_relative_eq!(w.sigma_par, s, max_relative = 1e-6);
        assert!(w.par_mean.abs() < 1e-9);

        // contracted closed form: parallel / perpendicular = 3/5 at gamma0 = 5/3
        let psi = MomentumAmplitude::gaussian(particle(), 0.01).unwrap();
        let boost = BoostParams::along_z(0.8).unwrap();
        let sx = 50.0;
        let grid = PlaneGrid {
            perp_max: 8.0 * sx,
            par_min: -8.0 * sx,
            par_max: 8.0 * sx,
            points: 257,
        };
        let w = measure_widths(
            |a, b| {
                boosted_position_gaussian(&psi, &boost, a, b)
                    .unwrap()
                    .value
                    .norm_sqr()
            },
            &grid,
        )
        .unwrap();
        assert_relative_eq!(w.sigma_par / w.sigma_perp, 0.6, max_relative = 1e-9);

        // uniform box of half-width a
        let a = 1.3;
        let grid = PlaneGrid { perp_max: a, par_min: -a, par_max: a, points: 65 };
        let w = measure_widths(|_, _| 1.0, &grid).unwrap();
        assert_relative_eq!(w.sigma_perp, a / 3.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(w.sigma_par, a / 3.0f64.sqrt(), max_relative = 1e-12);

        // zero density is rejected
        assert!(measure_widths(|_, _| 0.0, &grid).is_err());
    }

    #[test]
    fn contraction_experiment_recovers_the_prediction() {
        let report = contraction_experiment(&particle(), 0.01, 0.8, &spec()).unwrap();
        assert_relative_eq!(report.sigma_x_unboosted, 50.0, max_relative = 1e-12);
        assert_relative_eq!(report.predicted_parallel, 30.0, max_relative = 1e-12);
        assert_relative_eq!(
            report.measured_parallel,
            report.predicted_parallel,
            max_relative = 1e-2
        );
        assert_relative_eq!(report.measured_perp, 50.0, max_relative = 5e-3);
        assert_relative_eq!(report.validity_ratio, 0.0125, max_relative = 1e-12);
        assert!(report.max_pointwise_rel_err < 0.05);
    }

    #[test]
    fn experiment_refuses_wide_packets() {
        let err = contraction_experiment(&particle(), 0.2, 0.5, &spec());
        assert!(matches!(err, Err(Error::Domain(_))));
        let err = contraction_experiment(&particle(), 0.01, 0.0, &spec());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn approximation_error_shrinks_with_validity_ratio() {
        let beta0 = 0.8;
        let mut last = f64::INFINITY;
        for &ratio in &[0.05, 0.02, 0.01] {
            let sp = ratio * beta0;
            let report = contraction_experiment(&particle(), sp, beta0, &spec()).unwrap();
            assert!(
                report.max_pointwise_rel_err < last,
                "error did not shrink at ratio {ratio}: {} >= {last}",
                report.max_pointwise_rel_err
            );
            last = report.max_pointwise_rel_err;
        }
    }

    #[test]
    fn scalar_norm_is_not_boost_invariant() {
        // closed forms: the scalar norm scales as 1 / gamma0^2
        let sp = 0.01;
        let psi = MomentumAmplitude::gaussian(particle(), sp).unwrap();
        let sx = 50.0;
        let norm_of = |beta0: f64| {
            let boost = BoostParams::along_z(beta0).unwrap();
            let pred = sx / boost.gamma0;
            let (xp, wp) = grid_axis(0.0, 8.0 * sx, 257);
            let (xl, wl) = grid_axis(-8.0 * pred, 8.0 * pred, 257);
            let abs2: Vec<Vec<f64>> = xp
                .iter()
                .map(|&a| {
                    xl.iter()
                        .map(|&b| {
                            boosted_scalar_gaussian(&psi, &boost, a, b)
                                .unwrap()
                                .value
                                .norm_sqr()
                        })
                        .collect()
                })
                .collect();
            cylindrical_norm(&xp, &wp, &xl, &wl, &abs2)
        };
        let rest = norm_of(0.0);
        let fast = norm_of(0.866); // gamma0 = 2
        let gamma0 = BoostParams::along_z(0.866).unwrap().gamma0;
        assert_relative_eq!(fast / rest, 1.0 / (gamma0 * gamma0), max_relative = 1e-6);
        assert!((fast / rest - 1.0).abs() > 0.1);
    }
}
