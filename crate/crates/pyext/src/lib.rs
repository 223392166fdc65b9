//! Python bindings: thin wrappers over the relwave core types plus the
//! headline experiments. Tuples stand in for Vec3, dicts for the reports.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use relwave::boost::{boosted_position_gaussian, boosted_scalar_gaussian, contraction_experiment};
use relwave::observables::{expectation_report, nw_identity_check};
use relwave::quadrature::{QuadratureSpec, RegulatorSpec};
use relwave::spreading::{beta_moments, variance_evolution};
use relwave::states::{BoostParams, Particle};
use relwave::transforms::{
    nw_delta_smeared as core_nw_delta_smeared, nw_localized_scalar, position_amplitude,
    scalar_amplitude,
};
use relwave::vec3::Vec3;
use relwave::Error;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn vec3(t: (f64, f64, f64)) -> Vec3 {
    Vec3::new(t.0, t.1, t.2)
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[pyclass(name = "Particle", frozen, from_py_object)]
#[derive(Clone)]
struct PyParticle {
    inner: Particle,
}

#[pymethods]
impl PyParticle {
    #[new]
    fn new(mass: f64) -> PyResult<Self> {
        Ok(PyParticle { inner: Particle::new(mass).map_err(to_py_err)? })
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    #[getter]
    fn lambda_c(&self) -> f64 {
        self.inner.lambda_c()
    }

    /// Relativistic energy at momentum p.
    fn omega(&self, p: (f64, f64, f64)) -> f64 {
        self.inner.omega(vec3(p).norm_sq())
    }

    fn __repr__(&self) -> String {
        format!("Particle(mass={})", self.inner.mass)
    }
}

/// Momentum-space probability amplitude; |value|^2 integrates to 1 over
/// the flat d^3p measure.
#[pyclass(name = "MomentumAmplitude", from_py_object)]
#[derive(Clone)]
struct PyMomentumAmplitude {
    inner: relwave::states::MomentumAmplitude,
}

#[pymethods]
impl PyMomentumAmplitude {
    #[staticmethod]
    fn gaussian(particle: PyParticle, sigma_p: f64) -> PyResult<Self> {
        Ok(PyMomentumAmplitude {
            inner: relwave::states::make_gaussian(particle.inner, sigma_p).map_err(to_py_err)?,
        })
    }

    /// Translate the position-space packet by `shift`.
    fn phase_shifted(&self, shift: (f64, f64, f64)) -> PyResult<Self> {
        Ok(PyMomentumAmplitude {
            inner: self.inner.clone().phase_shifted(vec3(shift)).map_err(to_py_err)?,
        })
    }

    /// Apply the unitary boost law along z.
    fn boosted(&self, beta0: f64) -> PyResult<Self> {
        let boost = BoostParams::along_z(beta0).map_err(to_py_err)?;
        Ok(PyMomentumAmplitude {
            inner: self.inner.clone().boosted(boost).map_err(to_py_err)?,
        })
    }

    fn value(&self, p: (f64, f64, f64)) -> Complex64 {
        self.inner.value(vec3(p))
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn compute_norm(&self) -> PyResult<f64> {
        self.inner.compute_norm().map_err(to_py_err)
    }

    /// psi(t, x), the position probability amplitude.
    fn position_amplitude(&self, t: f64, x: (f64, f64, f64)) -> PyResult<Complex64> {
        Ok(position_amplitude(&self.inner, t, vec3(x), &spec())
            .map_err(to_py_err)?
            .value)
    }

    /// Norm, four-momentum, position mean and per-axis variance at time t.
    fn expectation_report<'py>(&self, py: Python<'py>, t: f64) -> PyResult<Bound<'py, PyDict>> {
        let rep = expectation_report(&self.inner, t, &spec()).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("norm", rep.norm)?;
        d.set_item("four_momentum", rep.four_momentum)?;
        d.set_item("position_mean", rep.position_mean)?;
        d.set_item("position_variance_per_axis", rep.position_variance_per_axis)?;
        Ok(d)
    }

    /// Velocity moments driving the spreading law.
    fn beta_moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = beta_moments(&self.inner, &spec()).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("mean_beta", m.mean_beta.as_array())?;
        d.set_item("mean_beta_sq", m.mean_beta_sq)?;
        d.set_item("spread_rate_sq", m.spread_rate_sq())?;
        Ok(d)
    }

    /// (t, sigma^2(t), v_sp(t)) along `times` from initial total variance.
    fn spreading_trajectory(
        &self,
        sigma_sq_initial: f64,
        times: Vec<f64>,
    ) -> PyResult<Vec<(f64, f64, f64)>> {
        let m = beta_moments(&self.inner, &spec()).map_err(to_py_err)?;
        let rep = variance_evolution(&m, sigma_sq_initial, &times).map_err(to_py_err)?;
        Ok(rep.trajectory)
    }

    /// Closed-form boosted Gaussian at t = 0, cylindrical coordinates.
    fn boosted_gaussian_closed_form(
        &self,
        beta0: f64,
        x_perp: f64,
        x_par: f64,
    ) -> PyResult<Complex64> {
        let boost = BoostParams::along_z(beta0).map_err(to_py_err)?;
        Ok(boosted_position_gaussian(&self.inner, &boost, x_perp, x_par)
            .map_err(to_py_err)?
            .value)
    }
}

/// Klein-Gordon-measure amplitude; its norm uses d^3p / omega.
#[pyclass(name = "ScalarAmplitude", from_py_object)]
#[derive(Clone)]
struct PyScalarAmplitude {
    inner: relwave::states::ScalarMomentumAmplitude,
}

#[pymethods]
impl PyScalarAmplitude {
    /// The sub-minimal-width choice Phi = N (omega / sqrt m) Gaussian.
    #[staticmethod]
    fn gaussian_choice(particle: PyParticle, sigma_p: f64) -> PyResult<Self> {
        Ok(PyScalarAmplitude {
            inner: relwave::states::make_scalar_choice(particle.inner, sigma_p)
                .map_err(to_py_err)?,
        })
    }

    /// The pairing Phi = sqrt(omega) Psi.
    #[staticmethod]
    fn from_probability(psi: PyMomentumAmplitude) -> Self {
        PyScalarAmplitude {
            inner: relwave::states::ScalarMomentumAmplitude::from_probability(psi.inner),
        }
    }

    fn value(&self, p: (f64, f64, f64)) -> Complex64 {
        self.inner.value(vec3(p))
    }

    fn kg_norm(&self) -> PyResult<f64> {
        self.inner.kg_norm().map_err(to_py_err)
    }

    #[getter]
    fn norm_factor(&self) -> f64 {
        self.inner.norm_factor
    }

    /// phi(t, x), the scalar amplitude with the invariant measure.
    fn scalar_amplitude(&self, t: f64, x: (f64, f64, f64)) -> PyResult<Complex64> {
        Ok(scalar_amplitude(&self.inner, t, vec3(x), &spec())
            .map_err(to_py_err)?
            .value)
    }
}

/// Regulated scalar profile of the Newton-Wigner localized state at radius r.
#[pyfunction]
#[pyo3(name = "nw_localized_scalar")]
fn py_nw_localized_scalar(mass: f64, r: f64) -> PyResult<f64> {
    let part = Particle::new(mass).map_err(to_py_err)?;
    let reg = RegulatorSpec::fine().scaled_by_mass(mass);
    Ok(nw_localized_scalar(&part, r, &reg, &spec())
        .map_err(to_py_err)?
        .value
        .re)
}

/// Nascent-delta probe of a Gaussian g of width w at momentum cutoff P;
/// approaches g(0) = 1 as P grows.
#[pyfunction]
fn nw_delta_smeared(w: f64, p_cutoff: f64) -> PyResult<f64> {
    core_nw_delta_smeared(w, p_cutoff, &spec()).map_err(to_py_err)
}

/// Lorentz-contraction experiment for a narrow Gaussian packet.
#[pyfunction]
#[pyo3(name = "contraction_experiment")]
fn py_contraction_experiment<'py>(
    py: Python<'py>,
    particle: PyParticle,
    sigma_p: f64,
    beta0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = contraction_experiment(&particle.inner, sigma_p, beta0, &spec())
        .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("sigma_x_unboosted", rep.sigma_x_unboosted)?;
    d.set_item("predicted_parallel", rep.predicted_parallel)?;
    d.set_item("measured_parallel", rep.measured_parallel)?;
    d.set_item("measured_perp", rep.measured_perp)?;
    d.set_item("validity_ratio", rep.validity_ratio)?;
    d.set_item("max_pointwise_rel_err", rep.max_pointwise_rel_err)?;
    Ok(d)
}

/// Closed-form boosted scalar amplitude at t = 0.
#[pyfunction]
#[pyo3(name = "boosted_scalar_gaussian")]
fn py_boosted_scalar_gaussian(
    psi: PyMomentumAmplitude,
    beta0: f64,
    x_perp: f64,
    x_par: f64,
) -> PyResult<Complex64> {
    let boost = BoostParams::along_z(beta0).map_err(to_py_err)?;
    Ok(boosted_scalar_gaussian(&psi.inner, &boost, x_perp, x_par)
        .map_err(to_py_err)?
        .value)
}

/// Check the localization identity on a pair of sqrt(omega)-paired states;
/// returns the scaled maximum deviation.
#[pyfunction]
#[pyo3(name = "nw_identity_check")]
fn py_nw_identity_check(phi1: PyScalarAmplitude, phi2: PyScalarAmplitude) -> PyResult<f64> {
    let chk = nw_identity_check(&phi1.inner, &phi2.inner, &spec()).map_err(to_py_err)?;
    Ok(chk.max_abs_diff / chk.scale)
}

#[pymodule]
fn relwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParticle>()?;
    m.add_class::<PyMomentumAmplitude>()?;
    m.add_class::<PyScalarAmplitude>()?;
    m.add_function(wrap_pyfunction!(py_nw_localized_scalar, m)?)?;
    m.add_function(wrap_pyfunction!(nw_delta_smeared, m)?)?;
    m.add_function(wrap_pyfunction!(py_contraction_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(py_boosted_scalar_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(py_nw_identity_check, m)?)?;
    Ok(())
}
