//! Momentum-space states: the isotropic Gaussian family, boosted and
//! phase-shifted variants, tabulated radial profiles, and the scalar
//! (Klein-Gordon-measure) amplitudes.
//!
//! Every probability amplitude is checked at construction against the
//! normalization Int d^3p |Psi|^2 = 1 by quadrature; construction fails if
//! the norm is off by more than `NORM_TOL`.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, CutoffPolicy, QuadratureSpec};
use crate::vec3::Vec3;
use num_complex::Complex64;

pub const NORM_TOL: f64 = 1e-6;

/// A free massive spinless particle; the mass anchors the unit system
/// (hbar = c = 1), with Compton wavelength 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub mass: f64,
}

impl Particle {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Domain(format!("mass must be positive, got {mass}")));
        }
        Ok(Particle { mass })
    }

    pub fn lambda_c(&self) -> f64 {
        1.0 / self.mass
    }

    /// omega(p) = sqrt(p^2 + m^2)
    pub fn omega(&self, p_norm_sq: f64) -> f64 {
        (p_norm_sq + self.mass * self.mass).sqrt()
    }

    pub fn momentum_point(&self, p: Vec3) -> MomentumPoint {
        let omega = self.omega(p.norm_sq());
        MomentumPoint {
            p,
            omega,
            beta: p.scale(1.0 / omega),
        }
    }
}

/// An on-shell momentum with its energy and relativistic velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPoint {
    pub p: Vec3,
    pub omega: f64,
    pub beta: Vec3,
}

/// Boost velocity and the derived Lorentz factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub beta0: Vec3,
    pub gamma0: f64,
}

impl BoostParams {
    pub fn new(beta0: Vec3) -> Result<Self> {
        let b2 = beta0.norm_sq();
        if !(b2 < 1.0) {
            return Err(Error::Domain(format!(
                "boost speed must satisfy |beta0| < 1, got {}",
                b2.sqrt()
            )));
        }
        Ok(BoostParams {
            beta0,
            gamma0: 1.0 / (1.0 - b2).sqrt(),
        })
    }

    pub fn along_z(beta0: f64) -> Result<Self> {
        BoostParams::new(Vec3::z_axis(beta0))
    }

    pub fn inverse(&self) -> BoostParams {
        BoostParams {
            beta0: -self.beta0,
            gamma0: self.gamma0,
        }
    }

    pub fn axis(&self) -> Option<Vec3> {
        self.beta0.unit()
    }

    pub fn speed(&self) -> f64 {
        self.beta0.norm()
    }
}

/// The inverse-boost momentum map p -> Lambda^{-1} p:
/// p'_perp = p_perp, p'_par = gamma0 (p_par - beta0 omega),
/// omega' = gamma0 (omega - beta0 . p).
pub fn lorentz_inverse_map(
    point: &MomentumPoint,
    boost: &BoostParams,
    particle: &Particle,
) -> MomentumPoint {
    match boost.axis() {
        None => *point,
        Some(n) => {
            let par = point.p.dot(n);
            let perp = point.p - n.scale(par);
            let b0 = boost.speed();
            let par_new = boost.gamma0 * (par - b0 * point.omega);
            particle.momentum_point(perp + n.scale(par_new))
        }
    }
}

/// Natural cubic spline through (t_i, y_i), used for tabulated profiles.
#[derive(Debug, Clone)]
struct CubicSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

impl CubicSpline {
    fn new(t: Vec<f64>, y: Vec<f64>) -> Self {
        let n = t.len();
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (t[i] - t[i - 1]) / (t[i + 1] - t[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (y[i + 1] - y[i]) / (t[i + 1] - t[i]) - (y[i] - y[i - 1]) / (t[i] - t[i - 1]);
            u[i] = (6.0 * d / (t[i + 1] - t[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        CubicSpline { t, y, y2 }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let j = match self.t.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(j) => j.min(n - 2),
            Err(j) => j.saturating_sub(1).min(n - 2),
        };
        let h = self.t[j + 1] - self.t[j];
        let a = (self.t[j + 1] - x) / h;
        let b = (x - self.t[j]) / h;
        a * self.y[j]
            + b * self.y[j + 1]
            + ((a * a * a - a) * self.y2[j] + (b * b * b - b) * self.y2[j + 1]) * h * h / 6.0
    }

    fn deriv(&self, x: f64) -> f64 {
        let n = self.t.len();
        let j = match self.t.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(j) => j.min(n - 2),
            Err(j) => j.saturating_sub(1).min(n - 2),
        };
        let h = self.t[j + 1] - self.t[j];
        let a = (self.t[j + 1] - x) / h;
        let b = (x - self.t[j]) / h;
        (self.y[j + 1] - self.y[j]) / h
            + ((3.0 * b * b - 1.0) * self.y2[j + 1] - (3.0 * a * a - 1.0) * self.y2[j]) * h / 6.0
    }
}

/// Radial table of a complex profile, interpolated cubically in ln p.
/// Momenta outside the tabulated range evaluate to zero.
#[derive(Debug, Clone)]
pub struct RadialTable {
    p_min: f64,
    p_max: f64,
    re: CubicSpline,
    im: CubicSpline,
}

impl RadialTable {
    pub fn new(p: Vec<f64>, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if p.len() < 4 || p.len() != re.len() || p.len() != im.len() {
            return Err(Error::Parse("table needs >= 4 rows of equal length".into()));
        }
        if p.windows(2).any(|w| !(w[1] > w[0])) || p[0] <= 0.0 {
            return Err(Error::Parse("p column must be positive, strictly increasing".into()));
        }
        let t: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        Ok(RadialTable {
            p_min: p[0],
            p_max: *p.last().unwrap(),
            re: CubicSpline::new(t.clone(), re),
            im: CubicSpline::new(t, im),
        })
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        if p < self.p_min || p > self.p_max {
            return Complex64::default();
        }
        let t = p.ln();
        Complex64::new(self.re.eval(t), self.im.eval(t))
    }

    /// d/dp of the tabulated profile.
    pub fn deriv(&self, p: f64) -> Complex64 {
        if p < self.p_min || p > self.p_max {
            return Complex64::default();
        }
        let t = p.ln();
        Complex64::new(self.re.deriv(t), self.im.deriv(t)) / p
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }
}

/// Parse the tabulated-amplitude CSV format: header `p,re,im`, momenta in
/// units of the particle mass, strictly increasing.
pub fn parse_amplitude_csv(text: &str, particle: &Particle) -> Result<RadialTable> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty table".into()))?;
    if header.trim() != "p,re,im" {
        return Err(Error::Parse(format!("expected header 'p,re,im', got '{header}'")));
    }
    let (mut p, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new());
    for (ln, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("row {}: expected 3 columns", ln + 2)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", ln + 2)))
        };
        p.push(parse(cols[0])? * particle.mass);
        re.push(parse(cols[1])?);
        im.push(parse(cols[2])?);
    }
    RadialTable::new(p, re, im)
}

/// Axis-aligned bounding box of a state's momentum support, expressed
/// relative to the symmetry axis (or any axis, for isotropic states).
#[derive(Debug, Clone, Copy)]
pub struct SupportBox {
    pub par_min: f64,
    pub par_max: f64,
    pub perp_max: f64,
}

#[derive(Debug, Clone)]
pub enum AmplitudeKind {
    IsotropicGaussian { sigma_p: f64 },
    Boosted { inner: Box<MomentumAmplitude>, boost: BoostParams },
    PhaseShifted { inner: Box<MomentumAmplitude>, shift: Vec3 },
    Tabulated { table: RadialTable },
}

/// A normalized momentum probability amplitude Psi(p).
#[derive(Debug, Clone)]
pub struct MomentumAmplitude {
    pub kind: AmplitudeKind,
    pub particle: Particle,
    norm: f64,
}

fn collinear(a: Vec3, b: Vec3) -> bool {
    let cross = Vec3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    );
    cross.norm() < 1e-12
}

impl MomentumAmplitude {
    /// The Gaussian family: Psi(p) = e^{-|p|^2/4 sigma_p^2} / (2 pi sigma_p^2)^{3/4}.
    pub fn gaussian(particle: Particle, sigma_p: f64) -> Result<Self> {
        if !(sigma_p > 0.0) || !sigma_p.is_finite() {
            return Err(Error::Domain(format!("sigma_p must be positive, got {sigma_p}")));
        }
        let state = MomentumAmplitude {
            kind: AmplitudeKind::IsotropicGaussian { sigma_p },
            particle,
            norm: 1.0,
        };
        state.checked()
    }

    /// Boost by beta0: Psi'(p) = sqrt(gamma0 (1 - beta0.beta)) Psi(Lambda^{-1} p).
    pub fn boosted(self, boost: BoostParams) -> Result<Self> {
        if let (Some(a), Some(b)) = (self.symmetry_axis(), boost.axis()) {
            if !collinear(a, b) {
                return Err(Error::Domain(
                    "boost axis must be collinear with the state's symmetry axis".into(),
                ));
            }
        }
        if boost.speed() == 0.0 {
            return Ok(self);
        }
        let particle = self.particle;
        let state = MomentumAmplitude {
            kind: AmplitudeKind::Boosted { inner: Box::new(self), boost },
            particle,
            norm: 1.0,
        };
        state.checked()
    }

    /// Psi(p) e^{-i p.a}: a pure position translation by `a`.
    pub fn phase_shifted(self, shift: Vec3) -> Result<Self> {
        if let (Some(a), Some(b)) = (self.symmetry_axis(), shift.unit()) {
            if !collinear(a, b) {
                return Err(Error::Domain(
                    "shift must be collinear with the state's symmetry axis".into(),
                ));
            }
        }
        if shift == Vec3::ZERO {
            return Ok(self);
        }
        let particle = self.particle;
        let state = MomentumAmplitude {
            kind: AmplitudeKind::PhaseShifted { inner: Box::new(self), shift },
            particle,
            norm: 1.0,
        };
        state.checked()
    }

    /// Tabulated radial profile from the CSV wire format.
    pub fn tabulated_from_csv(text: &str, particle: Particle) -> Result<Self> {
        let table = parse_amplitude_csv(text, &particle)?;
        let state = MomentumAmplitude {
            kind: AmplitudeKind::Tabulated { table },
            particle,
            norm: 1.0,
        };
        state.checked()
    }

    fn checked(mut self) -> Result<Self> {
        let norm = self.compute_norm()?;
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!(
                "momentum norm is {norm:.9}, expected 1 within {NORM_TOL:e}"
            )));
        }
        self.norm = norm;
        Ok(self)
    }

    /// The cached Int d^3p |Psi|^2 from construction time.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn value(&self, p: Vec3) -> Complex64 {
        match &self.kind {
            AmplitudeKind::IsotropicGaussian { sigma_p } => {
                let s2 = sigma_p * sigma_p;
                let amp = (-p.norm_sq() / (4.0 * s2)).exp()
                    / (2.0 * std::f64::consts::PI * s2).powf(0.75);
                Complex64::new(amp, 0.0)
            }
            AmplitudeKind::Boosted { inner, boost } => {
                let point = self.particle.momentum_point(p);
                let slow = (boost.gamma0 * (1.0 - boost.beta0.dot(point.beta))).sqrt();
                let mapped = lorentz_inverse_map(&point, boost, &self.particle);
                inner.value(mapped.p) * slow
            }
            AmplitudeKind::PhaseShifted { inner, shift } => {
                inner.value(p) * Complex64::from_polar(1.0, -p.dot(*shift))
            }
            AmplitudeKind::Tabulated { table } => table.eval(p.norm()),
        }
    }

    /// Analytic gradient d Psi / d p (finite differences only for tables,
    /// where the spline supplies the radial derivative directly).
    pub fn grad(&self, p: Vec3) -> [Complex64; 3] {
        match &self.kind {
            AmplitudeKind::IsotropicGaussian { sigma_p } => {
                let v = self.value(p);
                let c = -1.0 / (2.0 * sigma_p * sigma_p);
                [v * (c * p.x), v * (c * p.y), v * (c * p.z)]
            }
            AmplitudeKind::PhaseShifted { inner, shift } => {
                let phase = Complex64::from_polar(1.0, -p.dot(*shift));
                let g = inner.grad(p);
                let v = inner.value(p);
                let i = Complex64::i();
                [
                    (g[0] - i * shift.x * v) * phase,
                    (g[1] - i * shift.y * v) * phase,
                    (g[2] - i * shift.z * v) * phase,
                ]
            }
            AmplitudeKind::Boosted { inner, boost } => {
                let point = self.particle.momentum_point(p);
                let omega = point.omega;
                let slow_sq = boost.gamma0 * (1.0 - boost.beta0.dot(point.beta));
                let slow = slow_sq.sqrt();
                let mapped = lorentz_inverse_map(&point, boost, &self.particle);
                let inner_v = inner.value(mapped.p);
                let inner_g = inner.grad(mapped.p);
                // d slow / d p_i = -(gamma0 / 2 slow) * beta0 . d beta / d p_i,
                // d beta_j / d p_i = delta_ij / omega - p_i p_j / omega^3
                let pa = p.as_array();
                let b0 = [boost.beta0.x, boost.beta0.y, boost.beta0.z];
                let b0_dot_p = boost.beta0.dot(p);
                let mut out = [Complex64::default(); 3];
                let n = boost.axis().expect("boosted state has nonzero velocity");
                let na = [n.x, n.y, n.z];
                let b0n = boost.speed();
                for i in 0..3 {
                    let dslow = -(boost.gamma0 / (2.0 * slow))
                        * (b0[i] / omega - pa[i] * b0_dot_p / (omega * omega * omega));
                    // Jacobian of p' = p + ((gamma0 - 1)(p.n) - gamma0 b0 omega) n
                    // d p'_j / d p_i = delta_ij + ((gamma0 - 1) n_i - gamma0 b0 p_i / omega) n_j
                    let coeff = (boost.gamma0 - 1.0) * na[i] - boost.gamma0 * b0n * pa[i] / omega;
                    let mut chain = Complex64::default();
                    for j in 0..3 {
                        let jac = if i == j { 1.0 } else { 0.0 } + coeff * na[j];
                        chain += inner_g[j] * jac;
                    }
                    out[i] = inner_v * dslow + chain * slow;
                }
                out
            }
            AmplitudeKind::Tabulated { table } => {
                let r = p.norm();
                if r == 0.0 {
                    return [Complex64::default(); 3];
                }
                let d = table.deriv(r);
                [d * (p.x / r), d * (p.y / r), d * (p.z / r)]
            }
        }
    }

    /// Symmetry axis of |Psi| and phase structure; None means fully isotropic.
    pub fn symmetry_axis(&self) -> Option<Vec3> {
        match &self.kind {
            AmplitudeKind::IsotropicGaussian { .. } | AmplitudeKind::Tabulated { .. } => None,
            AmplitudeKind::Boosted { inner, boost } => boost.axis().or_else(|| inner.symmetry_axis()),
            AmplitudeKind::PhaseShifted { inner, shift } => {
                shift.unit().or_else(|| inner.symmetry_axis())
            }
        }
    }

    /// The innermost Gaussian width, if this state is built from one.
    pub fn base_sigma_p(&self) -> Option<f64> {
        match &self.kind {
            AmplitudeKind::IsotropicGaussian { sigma_p } => Some(*sigma_p),
            AmplitudeKind::Boosted { inner, .. } | AmplitudeKind::PhaseShifted { inner, .. } => {
                inner.base_sigma_p()
            }
            AmplitudeKind::Tabulated { .. } => None,
        }
    }

    /// Accumulated boost, if any, from the outermost boosted layer.
    pub fn outer_boost(&self) -> Option<&BoostParams> {
        match &self.kind {
            AmplitudeKind::Boosted { boost, .. } => Some(boost),
            AmplitudeKind::PhaseShifted { inner, .. } => inner.outer_boost(),
            _ => None,
        }
    }

    pub fn support(&self) -> SupportBox {
        match &self.kind {
            AmplitudeKind::IsotropicGaussian { sigma_p } => {
                let r = 14.0 * sigma_p;
                SupportBox { par_min: -r, par_max: r, perp_max: r }
            }
            AmplitudeKind::Tabulated { table } => {
                let r = table.p_max();
                SupportBox { par_min: -r, par_max: r, perp_max: r }
            }
            AmplitudeKind::PhaseShifted { inner, .. } => inner.support(),
            AmplitudeKind::Boosted { inner, boost } => {
                let s = inner.support();
                let m = self.particle.mass;
                let r = s.par_max.max(s.perp_max);
                let omega_hi = (m * m + 2.0 * r * r).sqrt();
                let b0 = boost.speed();
                SupportBox {
                    par_min: boost.gamma0 * (s.par_min + b0 * m).min(s.par_min),
                    par_max: boost.gamma0 * (s.par_max + b0 * omega_hi),
                    perp_max: s.perp_max,
                }
            }
        }
    }

    /// Int d^3p |Psi(p)|^2 by quadrature (radial for isotropic states,
    /// cylindrical otherwise; phase shifts do not change the modulus).
    pub fn compute_norm(&self) -> Result<f64> {
        let spec = QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            cutoff: CutoffPolicy::TailEstimate,
        };
        let stripped = self.strip_phases();
        match stripped.symmetry_axis() {
            None => {
                let sup = stripped.support();
                let res = integrate_adaptive(
                    |p| {
                        let v = stripped.value(Vec3::z_axis(p));
                        Complex64::new(4.0 * std::f64::consts::PI * p * p * v.norm_sqr(), 0.0)
                    },
                    0.0,
                    sup.perp_max,
                    &spec,
                )?;
                Ok(res.value.re)
            }
            Some(axis) => {
                let sup = stripped.support();
                let res = axisym_momentum_integral(
                    |pp, pl| {
                        let p = axis.scale(pl) + perp_of(axis).scale(pp);
                        Complex64::new(stripped.value(p).norm_sqr(), 0.0)
                    },
                    &sup,
                    &spec,
                )?;
                Ok(res.re)
            }
        }
    }

    fn strip_phases(&self) -> &MomentumAmplitude {
        match &self.kind {
            AmplitudeKind::PhaseShifted { inner, .. } => inner.strip_phases(),
            _ => self,
        }
    }
}

/// Any unit vector perpendicular to `axis`.
pub fn perp_of(axis: Vec3) -> Vec3 {
    let trial = if axis.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let proj = trial - axis.scale(trial.dot(axis));
    proj.unit().expect("axis is a unit vector")
}

/// 2 pi Int dp_par Int_0^perp_max p_perp g(p_perp, p_par) dp_perp over the
/// support box, for azimuthally symmetric g.
pub fn axisym_momentum_integral<G>(
    g: G,
    sup: &SupportBox,
    spec: &QuadratureSpec,
) -> Result<Complex64>
where
    G: Fn(f64, f64) -> Complex64,
{
    let inner_spec = QuadratureSpec {
        rel_tol: spec.rel_tol * 0.1,
        abs_tol: spec.abs_tol * 0.1,
        ..*spec
    };
    let fail: std::cell::Cell<Option<Error>> = std::cell::Cell::new(None);
    // presplit the parallel range so a narrow boosted bump cannot slip
    // between the nodes of the first coarse rule
    let n_pre = 8;
    let breaks: Vec<f64> = (0..=n_pre)
        .map(|k| sup.par_min + (sup.par_max - sup.par_min) * k as f64 / n_pre as f64)
        .collect();
    let outer = crate::quadrature::adaptive_on_segments(
        &mut |pl| {
            match integrate_adaptive(|pp| g(pp, pl) * pp, 0.0, sup.perp_max, &inner_spec) {
                Ok(res) => res.value,
                Err(e) => {
                    fail.set(Some(e));
                    Complex64::default()
                }
            }
        },
        &breaks,
        spec,
    );
    if let Some(e) = fail.take() {
        return Err(e);
    }
    Ok(outer?.value * (2.0 * std::f64::consts::PI))
}

/// Free-function constructor, convenient for the binary and bindings.
pub fn make_gaussian(particle: Particle, sigma_p: f64) -> Result<MomentumAmplitude> {
    MomentumAmplitude::gaussian(particle, sigma_p)
}

pub fn boost_amplitude(psi: MomentumAmplitude, boost: BoostParams) -> Result<MomentumAmplitude> {
    psi.boosted(boost)
}

#[derive(Debug, Clone)]
pub enum ScalarKind {
    /// Phi(p) = N (omega / sqrt m) e^{-|p|^2/4 sigma_p^2} / (2 pi sigma_p^2)^{3/4}
    GaussianChoice { sigma_p: f64 },
    /// Phi(p) = sqrt(omega) Psi(p)
    FromProbability { psi: MomentumAmplitude },
}

/// A Klein-Gordon scalar weight Phi(p), normalized so that
/// Int (d^3p / omega) |Phi|^2 = 1.
#[derive(Debug, Clone)]
pub struct ScalarMomentumAmplitude {
    pub kind: ScalarKind,
    pub particle: Particle,
    /// The dimensionless factor N; 1 exactly for the sqrt(omega) Psi pairing.
    pub norm_factor: f64,
}

impl ScalarMomentumAmplitude {
    /// The sub-minimal-width choice: Phi = N (omega / sqrt m) x Gaussian,
    /// with N fixed by the Klein-Gordon-measure norm.
    pub fn gaussian_choice(particle: Particle, sigma_p: f64) -> Result<Self> {
        if !(sigma_p > 0.0) || !sigma_p.is_finite() {
            return Err(Error::Domain(format!("sigma_p must be positive, got {sigma_p}")));
        }
        let mut state = ScalarMomentumAmplitude {
            kind: ScalarKind::GaussianChoice { sigma_p },
            particle,
            norm_factor: 1.0,
        };
        // with N = 1 the KG norm is <omega>/m, so N = sqrt(m / <omega>)
        let raw = state.kg_norm()?;
        state.norm_factor = (1.0 / raw).sqrt();
        let check = state.kg_norm()?;
        if (check - 1.0).abs() > NORM_TOL {
            return Err(Error::Invariant(format!("KG norm {check:.9} after fixing N")));
        }
        Ok(state)
    }

    /// The pairing Phi = sqrt(omega) Psi used by the localization identity.
    pub fn from_probability(psi: MomentumAmplitude) -> Self {
        let particle = psi.particle;
        ScalarMomentumAmplitude {
            kind: ScalarKind::FromProbability { psi },
            particle,
            norm_factor: 1.0,
        }
    }

    pub fn value(&self, p: Vec3) -> Complex64 {
        let omega = self.particle.omega(p.norm_sq());
        match &self.kind {
            ScalarKind::GaussianChoice { sigma_p } => {
                let s2 = sigma_p * sigma_p;
                let g = (-p.norm_sq() / (4.0 * s2)).exp()
                    / (2.0 * std::f64::consts::PI * s2).powf(0.75);
                Complex64::new(self.norm_factor * omega / self.particle.mass.sqrt() * g, 0.0)
            }
            ScalarKind::FromProbability { psi } => psi.value(p) * omega.sqrt(),
        }
    }

    pub fn grad(&self, p: Vec3) -> [Complex64; 3] {
        let omega = self.particle.omega(p.norm_sq());
        match &self.kind {
            ScalarKind::GaussianChoice { sigma_p } => {
                let v = self.value(p).re;
                // d/dp_i [omega G] = (p_i/omega) G + omega (-p_i / 2 sigma^2) G
                let c = 1.0 / (omega * omega) - 1.0 / (2.0 * sigma_p * sigma_p);
                [
                    Complex64::new(v * c * p.x, 0.0),
                    Complex64::new(v * c * p.y, 0.0),
                    Complex64::new(v * c * p.z, 0.0),
                ]
            }
            ScalarKind::FromProbability { psi } => {
                let v = psi.value(p);
                let g = psi.grad(p);
                let sq = omega.sqrt();
                let pref = 1.0 / (2.0 * omega * sq);
                [
                    g[0] * sq + v * (pref * p.x),
                    g[1] * sq + v * (pref * p.y),
                    g[2] * sq + v * (pref * p.z),
                ]
            }
        }
    }

    pub fn symmetry_axis(&self) -> Option<Vec3> {
        match &self.kind {
            ScalarKind::GaussianChoice { .. } => None,
            ScalarKind::FromProbability { psi } => psi.symmetry_axis(),
        }
    }

    pub fn support(&self) -> SupportBox {
        match &self.kind {
            ScalarKind::GaussianChoice { sigma_p } => {
                let r = 14.0 * sigma_p;
                SupportBox { par_min: -r, par_max: r, perp_max: r }
            }
            ScalarKind::FromProbability { psi } => psi.support(),
        }
    }

    /// Int (d^3p / omega) |Phi|^2.
    pub fn kg_norm(&self) -> Result<f64> {
        let spec = QuadratureSpec {
            rel_tol: 1e-10,
            ..Default::default()
        };
        match self.symmetry_axis() {
            None => {
                let sup = self.support();
                let res = integrate_adaptive(
                    |p| {
                        let v = self.value(Vec3::z_axis(p));
                        let omega = self.particle.omega(p * p);
                        Complex64::new(
                            4.0 * std::f64::consts::PI * p * p * v.norm_sqr() / omega,
                            0.0,
                        )
                    },
                    0.0,
                    sup.perp_max,
                    &spec,
                )?;
                Ok(res.value.re)
            }
            Some(axis) => {
                let sup = self.support();
                let res = axisym_momentum_integral(
                    |pp, pl| {
                        let p = axis.scale(pl) + perp_of(axis).scale(pp);
                        let omega = self.particle.omega(p.norm_sq());
                        Complex64::new(self.value(p).norm_sqr() / omega, 0.0)
                    },
                    &sup,
                    &spec,
                )?;
                Ok(res.re)
            }
        }
    }
}

pub fn make_scalar_choice(particle: Particle, sigma_p: f64) -> Result<ScalarMomentumAmplitude> {
    ScalarMomentumAmplitude::gaussian_choice(particle, sigma_p)
}
