//! Python bindings for the DCT-domain block filter.
//!
//! Blocks cross the boundary as lists of row lists of floats; images as
//! `GrayImage` objects or PGM bytes.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use blockdct_core as core;
use blockdct_core::verify::VerifyConfig;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn padding(name: &str) -> PyResult<core::PaddingMode> {
    name.parse().map_err(PyValueError::new_err)
}

fn domain(name: &str) -> PyResult<core::Domain> {
    name.parse().map_err(PyValueError::new_err)
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<core::BlockMatrix> {
    core::BlockMatrix::from_rows(&rows).map_err(err)
}

fn to_rows(m: &core::BlockMatrix) -> Vec<Vec<f64>> {
    (0..m.n()).map(|i| m.row(i).to_vec()).collect()
}

#[pyclass(name = "Mask", module = "blockdct", frozen)]
struct PyMask {
    inner: core::Mask,
}

#[pymethods]
impl PyMask {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: core::Mask::from_rows(&rows).map_err(err)?,
        })
    }

    /// One of "gaussian3", "average3", "identity", "magic3".
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        core::Mask::preset(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: text.parse().map_err(err)?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.k())
            .map(|r| self.inner.row(r).to_vec())
            .collect()
    }

    fn is_row_symmetric(&self) -> bool {
        self.inner.is_row_symmetric()
    }

    fn fingerprint(&self) -> u64 {
        self.inner.fingerprint()
    }

    fn __repr__(&self) -> String {
        format!("Mask(k={}, rows={:?})", self.inner.k(), self.rows())
    }
}

/// A mask compiled once into DCT-domain operators.
#[pyclass(name = "FilterPlan", module = "blockdct", frozen)]
struct PyFilterPlan {
    inner: core::FilterPlan,
}

#[pymethods]
impl PyFilterPlan {
    #[new]
    #[pyo3(signature = (mask, n = 8, padding = "replicate"))]
    fn new(mask: &PyMask, n: usize, padding: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::FilterPlan::new(&mask.inner, n, self::padding(padding)?).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn padding(&self) -> &'static str {
        self.inner.padding().as_str()
    }

    #[getter]
    fn construction(&self) -> &'static str {
        self.inner.dct_set().construction.as_str()
    }

    #[getter]
    fn symmetric_merged(&self) -> bool {
        self.inner.dct_set().symmetric_merged
    }

    /// (filtering pairs, border correction pairs)
    fn pair_counts(&self) -> (usize, usize) {
        let set = self.inner.dct_set();
        (set.pairs.len(), set.correction.len())
    }

    fn forward(&self, block: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(to_rows(
            &self
                .inner
                .basis()
                .forward2d(&to_matrix(block)?)
                .map_err(err)?,
        ))
    }

    fn inverse(&self, coeffs: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(to_rows(
            &self
                .inner
                .basis()
                .inverse2d(&to_matrix(coeffs)?)
                .map_err(err)?,
        ))
    }

    /// DCT coefficients in, filtered DCT coefficients out.
    fn filter_dct(&self, coeffs: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(to_rows(
            &self
                .inner
                .filter_block_dct(&to_matrix(coeffs)?)
                .map_err(err)?,
        ))
    }

    /// Pixels in, filtered pixels out (unquantized), through the DCT domain.
    fn filter_block(&self, block: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(to_rows(
            &self
                .inner
                .filter_block_spatial_roundtrip(&to_matrix(block)?)
                .map_err(err)?,
        ))
    }

    fn filter_image(&self, image: &PyGrayImage) -> PyResult<PyGrayImage> {
        let inner = core::image::filter_image_with_plan(&image.inner, &self.inner).map_err(err)?;
        Ok(PyGrayImage { inner })
    }
}

#[pyclass(name = "GrayImage", module = "blockdct", frozen)]
struct PyGrayImage {
    inner: core::GrayImage,
}

#[pymethods]
impl PyGrayImage {
    #[new]
    fn new(width: usize, height: usize, samples: Vec<u8>) -> PyResult<Self> {
        Ok(Self {
            inner: core::GrayImage::new(width, height, samples).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_pgm(data: &[u8]) -> PyResult<Self> {
        Ok(Self {
            inner: core::load_pgm(data).map_err(err)?,
        })
    }

    fn to_pgm<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &core::save_pgm(&self.inner))
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn samples(&self) -> Vec<u8> {
        self.inner.samples().to_vec()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("GrayImage({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Direct spatial filtering of one block.
#[pyfunction]
#[pyo3(signature = (block, mask, padding = "replicate"))]
fn convolve(block: Vec<Vec<f64>>, mask: &PyMask, padding: &str) -> PyResult<Vec<Vec<f64>>> {
    let out =
        core::convolve(&to_matrix(block)?, &mask.inner, self::padding(padding)?).map_err(err)?;
    Ok(to_rows(&out))
}

/// Round half away from zero and clamp to 0..=255.
#[pyfunction]
fn quantize(block: Vec<Vec<f64>>) -> PyResult<Vec<Vec<u8>>> {
    let m = to_matrix(block)?;
    let flat = core::quantize_u8(&m).map_err(err)?;
    Ok(flat.chunks(m.n()).map(<[u8]>::to_vec).collect())
}

#[pyfunction]
#[pyo3(signature = (image, mask, padding = "replicate", path = "dct", n = 8))]
fn filter_image(
    image: &PyGrayImage,
    mask: &PyMask,
    padding: &str,
    path: &str,
    n: usize,
) -> PyResult<PyGrayImage> {
    let inner = core::filter_image(
        &image.inner,
        &mask.inner,
        self::padding(padding)?,
        domain(path)?,
        n,
    )
    .map_err(err)?;
    Ok(PyGrayImage { inner })
}

/// Operator dump text for the spatial and DCT sets of a mask.
#[pyfunction]
#[pyo3(signature = (mask, n = 8, padding = "replicate"))]
fn build_operators(mask: &PyMask, n: usize, padding: &str) -> PyResult<String> {
    let mask = &mask.inner;
    let opts = core::PlanOptions::for_padding(mask, self::padding(padding)?);
    let mut spatial = core::build_set(mask, n, opts.construction).map_err(err)?;
    if mask.is_row_symmetric() {
        spatial = core::merge_symmetric(&spatial).map_err(err)?;
    }
    let basis = core::DctBasis::new(n).map_err(err)?;
    let dct = core::to_dct_domain(&spatial, &basis).map_err(err)?;
    Ok(core::write_dump(&[
        core::OperatorDump {
            mask: mask.clone(),
            set: spatial,
        },
        core::OperatorDump {
            mask: mask.clone(),
            set: dct,
        },
    ]))
}

/// (name, cases, max_float_error, u8_mismatches)
type SuiteRow = (String, usize, f64, usize);

/// Runs the randomized equivalence suites and returns (passed, suites).
#[pyfunction]
#[pyo3(signature = (trials = 100, seed = 42, n = 8))]
fn verify(trials: usize, seed: u64, n: usize) -> PyResult<(bool, Vec<SuiteRow>)> {
    let report = core::verify::run(&VerifyConfig {
        trials,
        seed,
        n,
        corrupt: false,
    })
    .map_err(err)?;
    let rows = report
        .suites
        .iter()
        .map(|s| (s.name.clone(), s.cases, s.max_float_error, s.u8_mismatches))
        .collect();
    Ok((report.passed(), rows))
}

#[pymodule]
fn blockdct(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMask>()?;
    m.add_class::<PyFilterPlan>()?;
    m.add_class::<PyGrayImage>()?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(filter_image, m)?)?;
    m.add_function(wrap_pyfunction!(build_operators, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
