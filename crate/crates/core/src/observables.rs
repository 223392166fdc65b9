//! Expectation values (norm, four-momentum, position mean and variance) and
//! the Newton-Wigner operator identity relating the scalar-amplitude and
//! probability-amplitude forms of the position matrix element.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, CutoffPolicy, QuadratureSpec};
use crate::states::{
    axisym_momentum_integral, perp_of, MomentumAmplitude, ScalarKind, ScalarMomentumAmplitude,
    SupportBox,
};
use crate::transforms::{axisym_grid_transform, grid_axis, position_amplitude};
use crate::vec3::Vec3;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationReport {
    pub norm: f64,
    /// (energy, p_x, p_y, p_z)
    pub four_momentum: [f64; 4],
    pub position_mean: [f64; 3],
    pub position_variance_per_axis: [f64; 3],
}

/// Initial spatial width estimate used to size position-side windows.
fn sigma_x0_estimate(psi: &MomentumAmplitude) -> f64 {
    match psi.base_sigma_p() {
        Some(sp) => 1.0 / (2.0 * sp),
        None => 7.0 / psi.support().perp_max,
    }
}

/// Momentum-side and position-side expectation values of a probability
/// amplitude at time t. The position mean is evaluated on the momentum side
/// (<x(t)> = <i d/dp> + <beta> t); the per-axis variance by position-grid
/// quadrature of |psi(t, x)|^2.
pub fn expectation_report(
    psi: &MomentumAmplitude,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<ExpectationReport> {
    let part = psi.particle;
    let sup = psi.support();
    let sx0 = sigma_x0_estimate(psi);
    let half = 10.0 * (sx0 * sx0 + t * t).sqrt();
    let points = 257;

    match psi.symmetry_axis() {
        None => {
            // all vector means vanish by isotropy
            let mspec = QuadratureSpec {
                rel_tol: (spec.rel_tol).min(1e-9),
                cutoff: CutoffPolicy::FixedCutoff(sup.perp_max),
                ..*spec
            };
            let moment = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
                let res = integrate_adaptive(
                    |p| {
                        let v = psi.value(Vec3::z_axis(p)).norm_sqr();
                        Complex64::new(4.0 * PI * p * p * v * f(p), 0.0)
                    },
                    0.0,
                    f64::INFINITY,
                    &mspec,
                )?;
                Ok(res.value.re)
            };
            let norm = moment(&|_| 1.0)?;
            let energy = moment(&|p| part.omega(p * p))? / norm;

            // <r^2>/3 per axis from the radial profile at time t
            let (r_nodes, r_w) = grid_axis(0.0, half, points);
            let inner_spec = QuadratureSpec {
                rel_tol: 1e-8,
                ..*spec
            };
            let mut pos_norm = 0.0;
            let mut r2 = 0.0;
            for (&r, &w) in r_nodes.iter().zip(&r_w) {
                let v = position_amplitude(psi, t, Vec3::z_axis(r), &inner_spec)?
                    .value
                    .norm_sqr();
                let shell = 4.0 * PI * r * r * v * w;
                pos_norm += shell;
                r2 += shell * r * r;
            }
            if !(pos_norm > 0.0) {
                return Err(Error::Domain("position density integrates to zero".into()));
            }
            let var = r2 / pos_norm / 3.0;
            Ok(ExpectationReport {
                norm,
                four_momentum: [energy, 0.0, 0.0, 0.0],
                position_mean: [0.0, 0.0, 0.0],
                position_variance_per_axis: [var, var, var],
            })
        }
        Some(axis) => {
            let e_perp = perp_of(axis);
            let at = |pp: f64, pl: f64| axis.scale(pl) + e_perp.scale(pp);
            let mspec = QuadratureSpec {
                rel_tol: (spec.rel_tol).min(1e-9),
                ..*spec
            };
            let moment = |f: &dyn Fn(Vec3) -> Complex64| -> Result<Complex64> {
                axisym_momentum_integral(|pp, pl| f(at(pp, pl)), &sup, &mspec)
            };
            let norm = moment(&|p| Complex64::new(psi.value(p).norm_sqr(), 0.0))?.re;
            let energy = moment(&|p| {
                Complex64::new(psi.value(p).norm_sqr() * part.omega(p.norm_sq()), 0.0)
            })?
            .re / norm;
            let p_par = moment(&|p| Complex64::new(psi.value(p).norm_sqr() * p.dot(axis), 0.0))?
                .re
                / norm;
            let beta_par = moment(&|p| {
                Complex64::new(
                    psi.value(p).norm_sqr() * p.dot(axis) / part.omega(p.norm_sq()),
                    0.0,
                )
            })?
            .re / norm;
            // <i d/dp> along the axis; the transverse components vanish by
            // azimuthal symmetry
            let x0_par = moment(&|p| {
                let g = psi.grad(p);
                let g_par = g[0] * axis.x + g[1] * axis.y + g[2] * axis.z;
                psi.value(p).conj() * g_par * Complex64::i()
            })?
            .re / norm;
            let mean_par = x0_par + beta_par * t;

            // position grid moments about the predicted center
            let (xp, wp) = grid_axis(0.0, half, points);
            let (xl, wl) = grid_axis(mean_par - half, mean_par + half, points);
            let grid = axisym_grid_transform(
                |pp, pl| {
                    let p = at(pp, pl);
                    let omega = part.omega(p.norm_sq());
                    psi.value(p) * Complex64::from_polar(1.0, -omega * t)
                },
                &sup,
                &xp,
                &xl,
            )?;
            let mut pos_norm = 0.0;
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            let mut mp2 = 0.0;
            for (i, (&a, &wa)) in xp.iter().zip(&wp).enumerate() {
                for (j, (&b, &wb)) in xl.iter().zip(&wl).enumerate() {
                    let f = grid[i][j].norm_sqr() * 2.0 * PI * a * wa * wb;
                    pos_norm += f;
                    m1 += f * b;
                    m2 += f * b * b;
                    mp2 += f * a * a;
                }
            }
            if !(pos_norm > 0.0) {
                return Err(Error::Domain("position density integrates to zero".into()));
            }
            let mu = m1 / pos_norm;
            let var_par = (m2 / pos_norm - mu * mu).max(0.0);
            // each transverse Cartesian axis carries half of <x_perp^2>
            let var_perp = (mp2 / pos_norm / 2.0).max(0.0);
            let mean = axis.scale(mean_par);
            let p_mean = axis.scale(p_par);
            let axis_frac = |k: usize| -> f64 { [axis.x, axis.y, axis.z][k] };
            let mut variance = [0.0; 3];
            for (k, v) in variance.iter_mut().enumerate() {
                let c = axis_frac(k);
                *v = c * c * var_par + (1.0 - c * c) * var_perp;
            }
            Ok(ExpectationReport {
                norm,
                four_momentum: [energy, p_mean.x, p_mean.y, p_mean.z],
                position_mean: [mean.x, mean.y, mean.z],
                position_variance_per_axis: variance,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct NwIdentityCheck {
    pub lhs: [Complex64; 3],
    pub rhs: [Complex64; 3],
    pub max_abs_diff: f64,
    /// magnitude scale of the compared integrals, for relative judgements
    pub scale: f64,
}

fn union_box(a: &SupportBox, b: &SupportBox) -> SupportBox {
    SupportBox {
        par_min: a.par_min.min(b.par_min),
        par_max: a.par_max.max(b.par_max),
        perp_max: a.perp_max.max(b.perp_max),
    }
}

fn common_axis(a: Option<Vec3>, b: Option<Vec3>) -> Result<Vec3> {
    match (a, b) {
        (None, None) => Ok(Vec3::z_axis(1.0)),
        (Some(n), None) | (None, Some(n)) => Ok(n),
        (Some(n), Some(m)) => {
            if (n - m).norm() < 1e-12 || (n + m).norm() < 1e-12 {
                Ok(n)
            } else {
                Err(Error::Domain(
                    "identity check needs states sharing a symmetry axis".into(),
                ))
            }
        }
    }
}

/// Both sides of the position matrix element between two states given as
/// scalar amplitudes built from probability amplitudes:
/// lhs with the Klein-Gordon measure and the operator i d/dp - i p / 2 omega^2,
/// rhs with the flat measure and i d/dp on the probability amplitudes.
pub fn nw_identity_check(
    phi1: &ScalarMomentumAmplitude,
    phi2: &ScalarMomentumAmplitude,
    spec: &QuadratureSpec,
) -> Result<NwIdentityCheck> {
    let (psi1, psi2) = match (&phi1.kind, &phi2.kind) {
        (ScalarKind::FromProbability { psi: a }, ScalarKind::FromProbability { psi: b }) => (a, b),
        _ => {
            return Err(Error::Domain(
                "identity check needs scalar amplitudes paired with probability amplitudes".into(),
            ))
        }
    };
    let part = phi1.particle;
    if (part.mass - phi2.particle.mass).abs() > 0.0 {
        return Err(Error::Domain("states must share one particle".into()));
    }
    let axis = common_axis(psi1.symmetry_axis(), psi2.symmetry_axis())?;
    let e_perp = perp_of(axis);
    let sup = union_box(&psi1.support(), &psi2.support());
    let mspec = QuadratureSpec {
        rel_tol: (spec.rel_tol).min(1e-10),
        ..*spec
    };

    // only the axis component survives azimuthal symmetry
    let na = [axis.x, axis.y, axis.z];
    let lhs_par = axisym_momentum_integral(
        |pp, pl| {
            let p = axis.scale(pl) + e_perp.scale(pp);
            let omega = part.omega(p.norm_sq());
            let g = phi2.grad(p);
            let g_par = g[0] * axis.x + g[1] * axis.y + g[2] * axis.z;
            let op = (g_par - phi2.value(p) * (p.dot(axis) / (2.0 * omega * omega)))
                * Complex64::i();
            phi1.value(p).conj() * op / omega
        },
        &sup,
        &mspec,
    )?;
    let rhs_par = axisym_momentum_integral(
        |pp, pl| {
            let p = axis.scale(pl) + e_perp.scale(pp);
            let g = psi2.grad(p);
            let g_par = g[0] * axis.x + g[1] * axis.y + g[2] * axis.z;
            psi1.value(p).conj() * g_par * Complex64::i()
        },
        &sup,
        &mspec,
    )?;
    let lhs = [
        lhs_par * na[0],
        lhs_par * na[1],
        lhs_par * na[2],
    ];
    let rhs = [
        rhs_par * na[0],
        rhs_par * na[1],
        rhs_par * na[2],
    ];
    let max_abs_diff = (lhs_par - rhs_par).norm();
    let scale = lhs_par.norm().max(rhs_par.norm()).max(1.0);
    Ok(NwIdentityCheck { lhs, rhs, max_abs_diff, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_gaussian, BoostParams, Particle};
    use approx::assert_relative_eq;

    fn particle() -> Particle {
        Particle::new(1.0).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn pair(
        a: &MomentumAmplitude,
        b: &MomentumAmplitude,
    ) -> (ScalarMomentumAmplitude, ScalarMomentumAmplitude) {
        (
            ScalarMomentumAmplitude::from_probability(a.clone()),
            ScalarMomentumAmplitude::from_probability(b.clone()),
        )
    }

    #[test]
    fn isotropic_gaussian_report() {
        let sp = 0.2;
        let psi = make_gaussian(particle(), sp).unwrap();
        let rep = expectation_report(&psi, 0.0, &spec()).unwrap();
        assert_relative_eq!(rep.norm, 1.0, epsilon = 1e-8);
        assert!(rep.four_momentum[0] >= 1.0);
        assert_eq!(rep.position_mean, [0.0, 0.0, 0.0]);
        let sx = 2.5;
        for v in rep.position_variance_per_axis {
            assert_relative_eq!(v, sx * sx, max_relative = 1e-6);
        }
        // narrow packet: <omega> = m + 3 sigma_p^2 / 2m to leading order
        let narrow = make_gaussian(particle(), 0.01).unwrap();
        let rep = expectation_report(&narrow, 0.0, &spec()).unwrap();
        assert!((rep.four_momentum[0] - 1.00015).abs() < 1e-7);
    }

    #[test]
    fn translated_packet_reports_its_center() {
        let a = 1.5;
        let psi = make_gaussian(particle(), 0.5)
            .unwrap()
            .phase_shifted(Vec3::z_axis(a))
            .unwrap();
        let rep = expectation_report(&psi, 0.0, &spec()).unwrap();
        assert_relative_eq!(rep.position_mean[2], a, max_relative = 1e-8);
        assert!(rep.position_mean[0].abs() < 1e-12);
        // width unchanged by translation
        let sx = 1.0;
        assert_relative_eq!(rep.position_variance_per_axis[2], sx * sx, max_relative = 1e-6);
        assert_relative_eq!(rep.position_variance_per_axis[0], sx * sx, max_relative = 1e-6);
    }

    #[test]
    fn boosted_packet_moves_at_beta() {
        let psi = make_gaussian(particle(), 0.01)
            .unwrap()
            .boosted(BoostParams::along_z(0.8).unwrap())
            .unwrap();
        let t = 1.0;
        let rep = expectation_report(&psi, t, &spec()).unwrap();
        assert_relative_eq!(rep.position_mean[2], 0.8 * t, max_relative = 1e-3);
        assert!(rep.four_momentum[3] > 0.0);
        assert_relative_eq!(rep.four_momentum[3], 4.0 / 3.0, max_relative = 1e-3);
    }

    #[test]
    fn momentum_and_position_means_agree() {
        // the report's mean is momentum-side; recompute position-side from
        // the same grid moments by shifting the window off-center
        let a = 1.5;
        let psi = make_gaussian(particle(), 0.5)
            .unwrap()
            .phase_shifted(Vec3::z_axis(a))
            .unwrap();
        let rep = expectation_report(&psi, 0.0, &spec()).unwrap();
        // position-side oracle: first moment of |psi(0, x)|^2 along z
        let (xp, wp) = grid_axis(0.0, 8.0, 129);
        let (xl, wl) = grid_axis(a - 8.0, a + 8.0, 129);
        let axis = Vec3::z_axis(1.0);
        let e_perp = perp_of(axis);
        let sup = psi.support();
        let grid = axisym_grid_transform(
            |pp, pl| psi.value(axis.scale(pl) + e_perp.scale(pp)),
            &sup,
            &xp,
            &xl,
        )
        .unwrap();
        let mut norm = 0.0;
        let mut m1 = 0.0;
        for (i, (&q, &wa)) in xp.iter().zip(&wp).enumerate() {
            for ((&b, &wb), v) in xl.iter().zip(&wl).zip(&grid[i]) {
                let f = v.norm_sqr() * q * wa * wb;
                norm += f;
                m1 += f * b;
            }
        }
        assert_relative_eq!(m1 / norm, rep.position_mean[2], epsilon = 1e-6);
    }

    #[test]
    fn identity_on_constructed_pairs() {
        let s = spec();
        // real even state: both sides vanish
        let g = make_gaussian(particle(), 0.6).unwrap();
        let (p1, p2) = pair(&g, &g);
        let chk = nw_identity_check(&p1, &p2, &s).unwrap();
        assert!(chk.lhs[2].norm() < 1e-10 && chk.rhs[2].norm() < 1e-10);
        assert!(chk.max_abs_diff / chk.scale < 1e-8);

        // translated state: both sides equal the shift
        let a = 0.8;
        let shifted = g.clone().phase_shifted(Vec3::z_axis(a)).unwrap();
        let (p1, p2) = pair(&shifted, &shifted);
        let chk = nw_identity_check(&p1, &p2, &s).unwrap();
        assert_relative_eq!(chk.lhs[2].re, a, max_relative = 1e-8);
        assert_relative_eq!(chk.rhs[2].re, a, max_relative = 1e-8);
        assert!(chk.max_abs_diff / chk.scale < 1e-8);

        // mixed pair: value unconstrained, identity still holds
        let boosted = g
            .clone()
            .boosted(BoostParams::along_z(0.5).unwrap())
            .unwrap();
        let (p1, p2) = pair(&g, &boosted);
        let chk = nw_identity_check(&p1, &p2, &s).unwrap();
        assert!(
            chk.max_abs_diff / chk.scale < 1e-8,
            "diff {} at scale {}",
            chk.max_abs_diff,
            chk.scale
        );
    }

    #[test]
    fn identity_on_randomized_pairs() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let s = spec();
        for trial in 0..10 {
            let sp1: f64 = rng.random_range(0.3..1.2);
            let sp2: f64 = rng.random_range(0.3..1.2);
            let mut a = make_gaussian(particle(), sp1).unwrap();
            let mut b = make_gaussian(particle(), sp2).unwrap();
            if rng.random_bool(0.5) {
                a = a.phase_shifted(Vec3::z_axis(rng.random_range(-1.5..1.5))).unwrap();
            }
            if rng.random_bool(0.5) {
                b = b.boosted(BoostParams::along_z(rng.random_range(-0.6..0.6)).unwrap()).unwrap();
            }
            if rng.random_bool(0.5) {
                b = b.phase_shifted(Vec3::z_axis(rng.random_range(-1.5..1.5))).unwrap();
            }
            let (p1, p2) = pair(&a, &b);
            let chk = nw_identity_check(&p1, &p2, &s).unwrap();
            assert!(
                chk.max_abs_diff / chk.scale < 1e-8,
                "trial {trial}: diff {} at scale {}",
                chk.max_abs_diff,
                chk.scale
            );
        }
    }

    #[test]
    fn identity_rejects_unpaired_scalars() {
        let s = spec();
        let chooser = crate::states::make_scalar_choice(particle(), 0.5).unwrap();
        let g = ScalarMomentumAmplitude::from_probability(make_gaussian(particle(), 0.5).unwrap());
        assert!(nw_identity_check(&chooser, &g, &s).is_err());
    }
}
