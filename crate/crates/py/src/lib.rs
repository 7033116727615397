//! Python bindings for the tail-risk toolkit.

use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tailrisk::distributions::{BaselineModel, Family, GpdParams, Seed};
use tailrisk::estimators::{estimate_bmh, estimate_ipbmh, estimate_mh, MethodId};
use tailrisk::harness::log_returns as harness_log_returns;
use tailrisk::mcmc::ChainConfig;
use tailrisk::risk;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model(family: &str, params: Vec<f64>) -> PyResult<BaselineModel> {
    let family = Family::from_str(family).map_err(value_err)?;
    BaselineModel::from_params(family, &params).map_err(value_err)
}

fn gpd(xi: f64, sigma: f64) -> PyResult<GpdParams> {
    GpdParams::new(xi, sigma).map_err(value_err)
}

fn check_level(name: &str, p: f64) -> PyResult<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!(
            "{name} must lie in (0, 1), got {p}"
        )))
    }
}

/// Density of a baseline family at x.
#[pyfunction]
fn pdf(family: &str, params: Vec<f64>, x: f64) -> PyResult<f64> {
    Ok(model(family, params)?.pdf(x))
}

/// Distribution function of a baseline family at x.
#[pyfunction]
fn cdf(family: &str, params: Vec<f64>, x: f64) -> PyResult<f64> {
    Ok(model(family, params)?.cdf(x))
}

/// p-quantile of a baseline family.
#[pyfunction]
fn quantile(family: &str, params: Vec<f64>, p: f64) -> PyResult<f64> {
    model(family, params)?.quantile(p).map_err(value_err)
}

/// n seeded i.i.d. draws from a baseline family.
#[pyfunction]
fn sample(family: &str, params: Vec<f64>, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    Ok(model(family, params)?.sample(n, Seed(seed)))
}

/// Sum of log densities; -inf if any point is outside the support.
#[pyfunction]
fn log_likelihood(family: &str, params: Vec<f64>, data: Vec<f64>) -> PyResult<f64> {
    Ok(model(family, params)?.log_likelihood(&data))
}

/// GPD distribution function.
#[pyfunction]
fn gpd_cdf(xi: f64, sigma: f64, x: f64) -> PyResult<f64> {
    Ok(gpd(xi, sigma)?.cdf(x))
}

/// n seeded draws from a GPD (inverse-CDF sampling).
#[pyfunction]
fn gpd_sample(xi: f64, sigma: f64, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    Ok(gpd(xi, sigma)?.sample(n, Seed(seed)))
}

/// GPD log-likelihood of an exceedance sample.
#[pyfunction]
fn gpd_log_likelihood(xi: f64, sigma: f64, data: Vec<f64>) -> PyResult<f64> {
    Ok(gpd(xi, sigma)?.log_likelihood(&data))
}

/// VaR of a GPD at level p.
#[pyfunction]
fn var_gpd(xi: f64, sigma: f64, p: f64) -> PyResult<f64> {
    check_level("p", p)?;
    Ok(risk::var_gpd(&gpd(xi, sigma)?, p))
}

/// CVaR of a GPD at level p; raises for shapes with infinite tail mean.
#[pyfunction]
fn cvar_gpd(xi: f64, sigma: f64, p: f64) -> PyResult<f64> {
    check_level("p", p)?;
    risk::cvar_gpd(&gpd(xi, sigma)?, p).map_err(value_err)
}

/// Exact (VaR, CVaR) of a baseline family; CVaR is None where the tail
/// mean does not exist (cauchy).
#[pyfunction]
fn risk_exact(family: &str, params: Vec<f64>, p: f64) -> PyResult<(f64, Option<f64>)> {
    check_level("p", p)?;
    let model = model(family, params)?;
    Ok(match model {
        BaselineModel::Exponential { rate } => {
            let r = risk::risk_exponential(rate, p);
            (r.var, r.cvar)
        }
        BaselineModel::Gamma { shape, rate } => (
            model.quantile(p).map_err(value_err)?,
            Some(risk::cvar_gamma(shape, rate, p)),
        ),
        BaselineModel::Normal { mean, sd } => {
            let r = risk::risk_normal(mean, sd, p);
            (r.var, r.cvar)
        }
        BaselineModel::Cauchy { location, scale } => {
            (risk::var_cauchy(location, scale, p), None)
        }
    })
}

/// Map tail-level GPD measures to the baseline scale through the threshold
/// u at probability p_u. Returns (VaR, CVaR-or-None).
#[pyfunction]
fn threshold_transfer(
    u: f64,
    p: f64,
    p_u: f64,
    xi: f64,
    sigma: f64,
) -> PyResult<(f64, Option<f64>)> {
    let measures = risk::threshold_transfer(u, p, p_u, &gpd(xi, sigma)?).map_err(value_err)?;
    Ok((measures.var, measures.cvar))
}

/// CVaR by the independent quadrature oracle.
#[pyfunction]
fn cvar_numeric(family: &str, params: Vec<f64>, p: f64) -> PyResult<f64> {
    check_level("p", p)?;
    risk::cvar_numeric_oracle(&model(family, params)?, p).map_err(value_err)
}

/// Log returns of a price path.
#[pyfunction]
fn log_returns(prices: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(harness_log_returns(&prices).map_err(value_err)?.returns)
}

/// Point estimate and 2.5%/97.5% posterior bounds for VaR and CVaR.
#[pyclass(name = "RiskEstimate")]
struct PyRiskEstimate {
    #[pyo3(get)]
    var: f64,
    #[pyo3(get)]
    var_lo: f64,
    #[pyo3(get)]
    var_hi: f64,
    #[pyo3(get)]
    cvar: Option<f64>,
    #[pyo3(get)]
    cvar_lo: Option<f64>,
    #[pyo3(get)]
    cvar_hi: Option<f64>,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    p: f64,
    #[pyo3(get)]
    p_u: f64,
    #[pyo3(get)]
    n: usize,
}

#[pymethods]
impl PyRiskEstimate {
    fn __repr__(&self) -> String {
        format!(
            "RiskEstimate(method='{}', var={}, cvar={:?}, p={}, p_u={}, n={})",
            self.method, self.var, self.cvar, self.p, self.p_u, self.n
        )
    }
}

/// Estimate VaR/CVaR from a sample with one of the three methods
/// ('mh', 'bmh', 'ipbmh'); bmh/ipbmh need a declared baseline family.
#[pyfunction]
#[pyo3(signature = (sample, method, family=None, p=0.95, p_u=0.9,
                    chain_length=10_000, burn_in=3_000, thin=50, seed=0))]
#[allow(clippy::too_many_arguments)]
fn estimate(
    sample: Vec<f64>,
    method: &str,
    family: Option<&str>,
    p: f64,
    p_u: f64,
    chain_length: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> PyResult<PyRiskEstimate> {
    let method = MethodId::from_str(method).map_err(value_err)?;
    let family = family.map(Family::from_str).transpose().map_err(value_err)?;
    if method.requires_family() && family.is_none() {
        return Err(PyValueError::new_err(format!(
            "family is required for method {method}"
        )));
    }
    let cfg = ChainConfig {
        length: chain_length,
        burn_in,
        thin,
        proposal_scale: Vec::new(),
        seed: Seed(seed),
    };
    let est = match method {
        MethodId::Mh => estimate_mh(&sample, p, p_u, &cfg),
        MethodId::Bmh => estimate_bmh(&sample, family.unwrap(), p, p_u, &cfg),
        MethodId::Ipbmh => estimate_ipbmh(&sample, family.unwrap(), p, p_u, &cfg),
    }
    .map_err(value_err)?;
    Ok(PyRiskEstimate {
        var: est.var_point,
        var_lo: est.var_lo,
        var_hi: est.var_hi,
        cvar: est.cvar_point,
        cvar_lo: est.cvar_lo,
        cvar_hi: est.cvar_hi,
        method: est.method.to_string(),
        p: est.p,
        p_u: est.p_u,
        n: est.n,
    })
}

#[pymodule]
fn tailrisk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(pdf, m)?)?;
    m.add_function(wrap_pyfunction!(cdf, m)?)?;
    m.add_function(wrap_pyfunction!(quantile, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(gpd_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(gpd_sample, m)?)?;
    m.add_function(wrap_pyfunction!(gpd_log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(var_gpd, m)?)?;
    m.add_function(wrap_pyfunction!(cvar_gpd, m)?)?;
    m.add_function(wrap_pyfunction!(risk_exact, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(cvar_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(log_returns, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_class::<PyRiskEstimate>()?;
    Ok(())
}
