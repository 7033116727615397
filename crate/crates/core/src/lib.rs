//! Tail-risk estimation toolkit.
//!
//! Computes Value at Risk (VaR) and Conditional Value at Risk (CVaR)
//! exactly for Exponential, Gamma, Normal, Cauchy and Generalized Pareto
//! baselines, and estimates both measures from data with three
//! Metropolis-Hastings schemes:
//!
//! * `MH` — random-walk MH on the threshold exceedances only, with
//!   non-informative priors on the tail GPD parameters.
//! * `BMH` — random-walk MH on the full sample under a declared baseline
//!   family, mapping posterior draws through the closed-form risk measures.
//! * `IPBMH` — two-stage scheme: BMH fits the baseline, the fit seeds
//!   highly informative normal priors on the GPD tail parameters, and a
//!   second chain runs on the exceedances.
//!
//! The [`harness`] module reproduces the Monte Carlo simulation study and
//! the expanding-window historical backtest on log returns; `tailrisk-cli`
//! exposes everything as a command-line tool.

// `!(x > 0.0)` is the validation idiom throughout: unlike `x <= 0.0` it
// also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod estimators;
pub mod harness;
pub mod mcmc;
pub mod numfmt;
pub mod priors;
pub mod risk;
pub mod special;

pub use distributions::{BaselineModel, DistError, Family, GpdParams, Seed};
pub use estimators::{EstimError, ExceedanceSet, MethodId, RiskEstimate};
pub use mcmc::{Chain, ChainConfig, McmcError};
pub use risk::{RiskError, RiskMeasures, RiskQuery};
