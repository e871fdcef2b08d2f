//! Python module `talbot_sim`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use talbot_core::constants::AMU;
use talbot_core::optics::oracle::oracle_pattern;
use talbot_core::optics::talbot::bare_pattern;
use talbot_core::scan::scan_offsets;
use talbot_core::units::mev_nm3_to_si;
use talbot_core::{
    de_broglie_wavelength, fit_counts, fit_fringe, load_config, parse_grid, predict, run_sweep, simulate_scan,
    validate_config, ChannelSet, Error, FringeFit, FringePattern, Grating, GratingKind, InterferometerConfig,
    MoleculeSpecies, OracleGrid, Scenario, SweepKind, Truncation, VelocitySample,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Convergence(_) | Error::Truncation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn truncation(harmonics: Option<usize>) -> Truncation {
    match harmonics {
        Some(m) => Truncation::new(m, 4 * m.max(16)),
        None => Truncation::visibility(),
    }
}

#[pyclass(name = "Molecule", module = "talbot_sim", frozen)]
struct PyMolecule {
    inner: MoleculeSpecies,
}

#[pymethods]
impl PyMolecule {
    #[new]
    #[pyo3(signature = (mass_da, n_atoms))]
    fn new(mass_da: f64, n_atoms: u32) -> PyResult<Self> {
        let inner = MoleculeSpecies::new(mass_da * AMU, n_atoms).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn mass_kg(&self) -> f64 {
        self.inner.mass
    }

    #[getter]
    fn n_atoms(&self) -> u32 {
        self.inner.n_atoms
    }

    fn de_broglie_wavelength(&self, velocity: f64) -> PyResult<f64> {
        de_broglie_wavelength(&self.inner, velocity).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Molecule(mass_da={}, n_atoms={})", self.inner.mass / AMU, self.inner.n_atoms)
    }
}

#[pyclass(name = "Grating", module = "talbot_sim", frozen, from_py_object)]
#[derive(Clone)]
struct PyGrating {
    inner: Grating,
}

#[pymethods]
impl PyGrating {
    /// Material grating; `period` and `thickness` in metres, `c3_mev_nm3` in meV nm^3.
    #[staticmethod]
    #[pyo3(signature = (period, open_fraction, thickness=0.0, c3_mev_nm3=0.0))]
    fn material(period: f64, open_fraction: f64, thickness: f64, c3_mev_nm3: f64) -> PyResult<Self> {
        let inner = Grating::material(period, open_fraction, thickness, mev_nm3_to_si(c3_mev_nm3)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn ideal(period: f64, open_fraction: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Grating::ideal(period, open_fraction).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn optical(period: f64, phase_amplitude: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Grating::optical(period, phase_amplitude).map_err(to_py)?,
        })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            GratingKind::Material => "material",
            GratingKind::OpticalPhase => "optical",
        }
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period
    }

    #[getter]
    fn open_fraction(&self) -> f64 {
        self.inner.open_fraction
    }
}

#[pyclass(name = "Interferometer", module = "talbot_sim", frozen)]
struct PyInterferometer {
    inner: InterferometerConfig,
}

#[pymethods]
impl PyInterferometer {
    #[new]
    fn new(gratings: Vec<PyGrating>, separation: f64) -> PyResult<Self> {
        let [a, b, c]: [PyGrating; 3] = gratings
            .try_into()
            .map_err(|_| PyValueError::new_err("exactly three gratings are required"))?;
        let inner = InterferometerConfig::new([a.inner, b.inner, c.inner], separation).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    #[getter]
    fn separation(&self) -> f64 {
        self.inner.separation
    }

    /// Bare pattern for one velocity.
    #[pyo3(signature = (molecule, velocity, harmonics=None))]
    fn pattern(&self, molecule: &PyMolecule, velocity: f64, harmonics: Option<usize>) -> PyResult<PyFringePattern> {
        let p = bare_pattern(&self.inner, &molecule.inner, velocity, &truncation(harmonics)).map_err(to_py)?;
        Ok(PyFringePattern { inner: p })
    }

    /// Wave-propagation reference pattern for one velocity.
    #[pyo3(signature = (molecule, velocity, samples_per_period=128, periods=512, sources=128, harmonics=4))]
    fn oracle_pattern(
        &self,
        py: Python<'_>,
        molecule: &PyMolecule,
        velocity: f64,
        samples_per_period: usize,
        periods: usize,
        sources: usize,
        harmonics: usize,
    ) -> PyResult<PyFringePattern> {
        let grid = OracleGrid::new(samples_per_period, periods, sources);
        let sample = VelocitySample::monochromatic(velocity);
        let scan_points = (2 * harmonics + 1).max(32);
        let p = py
            .detach(|| oracle_pattern(&self.inner, &molecule.inner, &sample, &grid, scan_points, harmonics))
            .map_err(to_py)?;
        Ok(PyFringePattern { inner: p })
    }
}

#[pyclass(name = "FringePattern", module = "talbot_sim", frozen)]
struct PyFringePattern {
    inner: FringePattern,
}

#[pymethods]
impl PyFringePattern {
    #[getter]
    fn visibility(&self) -> f64 {
        self.inner.visibility()
    }

    #[getter]
    fn phase(&self) -> f64 {
        self.inner.phase()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period
    }

    /// `c_0 ... c_M`.
    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.coefficients().to_vec()
    }

    fn evaluate(&self, x: f64) -> f64 {
        self.inner.evaluate(x)
    }

    fn __repr__(&self) -> String {
        format!(
            "FringePattern(visibility={:.6}, phase={:.6}, harmonics={})",
            self.inner.visibility(),
            self.inner.phase(),
            self.inner.harmonics()
        )
    }
}

#[pyclass(name = "FringeFit", module = "talbot_sim", frozen, get_all)]
struct PyFringeFit {
    visibility: f64,
    visibility_error: f64,
    phase: f64,
    phase_error: f64,
    mean_rate: f64,
    chi2_reduced: f64,
    covariance: [[f64; 3]; 3],
}

impl From<FringeFit> for PyFringeFit {
    fn from(f: FringeFit) -> Self {
        Self {
            visibility: f.visibility,
            visibility_error: f.visibility_error(),
            phase: f.phase,
            phase_error: f.phase_error(),
            mean_rate: f.mean_rate,
            chi2_reduced: f.chi2_reduced,
            covariance: f.covariance,
        }
    }
}

#[pyclass(name = "Scenario", module = "talbot_sim", frozen)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: load_config(path).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: validate_config(text).map_err(to_py)?,
        })
    }

    #[getter]
    fn molecule(&self) -> PyMolecule {
        PyMolecule {
            inner: self.inner.molecule.clone(),
        }
    }

    #[getter]
    fn interferometer(&self) -> PyInterferometer {
        PyInterferometer {
            inner: self.inner.interferometer.clone(),
        }
    }

    /// Velocity-averaged pattern with every enabled channel, and the count survival.
    fn predict(&self, py: Python<'_>) -> PyResult<(PyFringePattern, f64)> {
        let sc = &self.inner;
        let pred = py
            .detach(|| {
                let sample = sc.velocity_sample()?;
                predict(&sc.interferometer, &sc.molecule, &sample, &sc.channels, &sc.truncation)
            })
            .map_err(to_py)?;
        Ok((PyFringePattern { inner: pred.pattern }, pred.survival))
    }

    /// Same without any channel.
    fn predict_bare(&self, py: Python<'_>) -> PyResult<PyFringePattern> {
        let sc = &self.inner;
        let pred = py
            .detach(|| {
                let sample = sc.velocity_sample()?;
                predict(&sc.interferometer, &sc.molecule, &sample, &ChannelSet::none(), &sc.truncation)
            })
            .map_err(to_py)?;
        Ok(PyFringePattern { inner: pred.pattern })
    }

    /// Rows `(value, visibility, phase, rate)`; `grid` is a list or a `start:stop:count` string.
    fn sweep(&self, py: Python<'_>, kind: &str, grid: &Bound<'_, PyAny>) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        let kind: SweepKind = kind.parse().map_err(to_py)?;
        let grid: Vec<f64> = match grid.extract::<String>() {
            Ok(spec) => parse_grid(&spec).map_err(to_py)?,
            Err(_) => grid.extract()?,
        };
        let rows = py.detach(|| run_sweep(kind, &self.inner, &grid)).map_err(to_py)?;
        Ok(rows.into_iter().map(|r| (r.value, r.visibility, r.phase, r.rate)).collect())
    }

    /// One Poisson scan of the predicted pattern: `(offsets, counts, fit)`.
    #[pyo3(signature = (seed=None))]
    fn scan(&self, py: Python<'_>, seed: Option<u64>) -> PyResult<(Vec<f64>, Vec<u64>, PyFringeFit)> {
        let sc = &self.inner;
        let (scan, fit) = py
            .detach(|| {
                let sample = sc.velocity_sample()?;
                let pred = predict(&sc.interferometer, &sc.molecule, &sample, &sc.channels, &sc.truncation)?;
                let d = sc.interferometer.period();
                let offsets = scan_offsets(d, sc.scan.periods, sc.scan.points);
                let s = &sc.scan;
                let scan = simulate_scan(
                    &pred.pattern,
                    &offsets,
                    s.flux,
                    s.integration_time,
                    pred.survival,
                    seed.unwrap_or(s.seed),
                )?;
                let fit = fit_fringe(&scan, d)?;
                Ok::<_, Error>((scan, fit))
            })
            .map_err(to_py)?;
        Ok((scan.offsets, scan.counts, fit.into()))
    }
}

/// Weighted sinusoid fit of counts (or expected counts) against offsets.
#[pyfunction]
fn fit_scan(offsets: Vec<f64>, counts: Vec<f64>, integration_time: f64, period: f64) -> PyResult<PyFringeFit> {
    Ok(fit_counts(&offsets, &counts, integration_time, period).map_err(to_py)?.into())
}

/// de Broglie wavelength [m] of a particle of `mass_da` at `velocity` m/s.
#[pyfunction]
fn wavelength(mass_da: f64, velocity: f64) -> PyResult<f64> {
    // The atom count only enters the heat capacity, which plays no role here.
    let mol = MoleculeSpecies::new(mass_da * AMU, 2).map_err(to_py)?;
    de_broglie_wavelength(&mol, velocity).map_err(to_py)
}

#[pyfunction]
fn talbot_length(period: f64, wavelength: f64) -> f64 {
    talbot_core::talbot_length(period, wavelength)
}

#[pymodule]
fn talbot_sim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMolecule>()?;
    m.add_class::<PyGrating>()?;
    m.add_class::<PyInterferometer>()?;
    m.add_class::<PyFringePattern>()?;
    m.add_class::<PyFringeFit>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(fit_scan, m)?)?;
    m.add_function(wrap_pyfunction!(wavelength, m)?)?;
    m.add_function(wrap_pyfunction!(talbot_length, m)?)?;
    Ok(())
}
