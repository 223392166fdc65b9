//! Wavepacket spreading: velocity moments of the momentum density, the
//! exact quadratic-in-time variance law, spreading velocity, and the
//! small-initial-width limit with per-axis rate 1/sqrt(3).

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, CutoffPolicy, QuadratureSpec};
use crate::states::{axisym_momentum_integral, perp_of, MomentumAmplitude, Particle};
use crate::transforms::fmt_sig12;
use crate::vec3::Vec3;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// First and second moments of the relativistic velocity beta = p / omega
/// over the momentum density |Psi(p)|^2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaMoments {
    pub mean_beta: Vec3,
    pub mean_beta_sq: f64,
}

impl BetaMoments {
    pub fn validate(&self) -> Result<()> {
        let b2 = self.mean_beta.norm_sq();
        if !(b2 <= self.mean_beta_sq && self.mean_beta_sq < 1.0) {
            return Err(Error::Invariant(format!(
                "velocity moments violate |<beta>|^2 <= <beta^2> < 1: {b2} vs {}",
                self.mean_beta_sq
            )));
        }
        Ok(())
    }

    /// The coefficient of t^2 in the variance law.
    pub fn spread_rate_sq(&self) -> f64 {
        self.mean_beta_sq - self.mean_beta.norm_sq()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpreadingReport {
    /// total (3-axis) position variance at t = 0
    pub sigma_sq_initial: f64,
    /// (t, sigma_sq(t), v_sp(t)) rows
    pub trajectory: Vec<(f64, f64, f64)>,
    pub asymptotic_rate_total: f64,
    pub asymptotic_rate_per_axis: f64,
}

/// <beta> and <beta^2> by momentum quadrature.
pub fn beta_moments(psi: &MomentumAmplitude, spec: &QuadratureSpec) -> Result<BetaMoments> {
    let part = psi.particle;
    let sup = psi.support();
    let mspec = QuadratureSpec {
        rel_tol: (spec.rel_tol).min(1e-10),
        ..*spec
    };
    let moments = match psi.symmetry_axis() {
        None => {
            let radial = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
                let res = integrate_adaptive(
                    |p| {
                        let v = psi.value(Vec3::z_axis(p)).norm_sqr();
                        Complex64::new(4.0 * PI * p * p * v * f(p), 0.0)
                    },
                    0.0,
                    f64::INFINITY,
                    &QuadratureSpec {
                        cutoff: CutoffPolicy::FixedCutoff(sup.perp_max),
                        ..mspec
                    },
                )?;
                Ok(res.value.re)
            };
            let norm = radial(&|_| 1.0)?;
            let b2 = radial(&|p| {
                let w = part.omega(p * p);
                p * p / (w * w)
            })? / norm;
            BetaMoments { mean_beta: Vec3::ZERO, mean_beta_sq: b2 }
        }
        Some(axis) => {
            let e_perp = perp_of(axis);
            let m = |f: &dyn Fn(Vec3, f64) -> f64| -> Result<f64> {
                let res = axisym_momentum_integral(
                    |pp, pl| {
                        let p = axis.scale(pl) + e_perp.scale(pp);
                        let w = part.omega(p.norm_sq());
                        Complex64::new(psi.value(p).norm_sqr() * f(p, w), 0.0)
                    },
                    &sup,
                    &mspec,
                )?;
                Ok(res.re)
            };
            let norm = m(&|_, _| 1.0)?;
            let b_par = m(&|p, w| p.dot(axis) / w)? / norm;
            let b2 = m(&|p, w| p.norm_sq() / (w * w))? / norm;
            BetaMoments { mean_beta: axis.scale(b_par), mean_beta_sq: b2 }
        }
    };
    moments.validate()?;
    Ok(moments)
}

/// The exact variance law sigma^2(t) = sigma^2(0) + {<beta^2> - <beta>^2} t^2
/// evaluated on a time grid, with the spreading velocity
/// v_sp(t) = d sigma / dt = {<beta^2> - <beta>^2} t / sigma(t) (0 at t = 0).
pub fn variance_evolution(
    moments: &BetaMoments,
    sigma_sq_initial: f64,
    times: &[f64],
) -> Result<SpreadingReport> {
    moments.validate()?;
    if !(sigma_sq_initial > 0.0) {
        return Err(Error::Domain("initial variance must be positive".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("times must be nonnegative and sorted".into()));
    }
    let rate_sq = moments.spread_rate_sq();
    let trajectory = times
        .iter()
        .map(|&t| {
            let s2 = sigma_sq_initial + rate_sq * t * t;
            let v = if t == 0.0 { 0.0 } else { rate_sq * t / s2.sqrt() };
            (t, s2, v)
        })
        .collect();
    let total = rate_sq.sqrt();
    Ok(SpreadingReport {
        sigma_sq_initial,
        trajectory,
        asymptotic_rate_total: total,
        asymptotic_rate_per_axis: total / 3.0f64.sqrt(),
    })
}

/// Run the variance law for a list of Gaussian widths and assert strict
/// sub-luminality of the spreading velocity on the whole grid.
pub fn causality_scan(
    particle: &Particle,
    sigma_p_list: &[f64],
    t_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<SpreadingReport>> {
    let mut out = Vec::with_capacity(sigma_p_list.len());
    for &sp in sigma_p_list {
        let psi = MomentumAmplitude::gaussian(*particle, sp)?;
        let moments = beta_moments(&psi, spec)?;
        let sx = 1.0 / (2.0 * sp);
        let report = variance_evolution(&moments, 3.0 * sx * sx, t_grid)?;
        for &(t, _, v) in &report.trajectory {
            if !(v < 1.0) {
                return Err(Error::Invariant(format!(
                    "superluminal spreading velocity {v} at t = {t}, sigma_p = {sp}"
                )));
            }
        }
        out.push(report);
    }
    Ok(out)
}

/// Trajectory CSV: header `t,sigma_sq,v_sp`.
pub fn spreading_csv(report: &SpreadingReport) -> String {
    let mut out = String::from("t,sigma_sq,v_sp\n");
    for &(t, s2, v) in &report.trajectory {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_sig12(t),
            fmt_sig12(s2),
            fmt_sig12(v)
        ));
    }
    out
}
