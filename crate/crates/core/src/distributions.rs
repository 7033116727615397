//! Baseline distribution families (Exponential, Gamma, Normal, Cauchy) and
//! the Generalized Pareto distribution: densities, CDFs, quantiles,
//! log-likelihoods, and seeded samplers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution as _;

use crate::special;

/// Seed for a reproducible sample stream.
///
/// The same seed with the same call sequence yields bit-identical draws.
/// Parallel work items derive disjoint child seeds with [`Seed::derive`] so
/// results do not depend on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    /// Child seed for sub-stream `stream` (splitmix64 finalizer).
    pub fn derive(self, stream: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }

    pub(crate) fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// The four baseline families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Exponential,
    Gamma,
    Normal,
    Cauchy,
}

impl Family {
    /// Number of parameters of the family.
    pub fn arity(self) -> usize {
        match self {
            Family::Exponential => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Exponential => "exponential",
            Family::Gamma => "gamma",
            Family::Normal => "normal",
            Family::Cauchy => "cauchy",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = DistError;

    fn from_str(s: &str) -> Result<Self, DistError> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(Family::Exponential),
            "gamma" => Ok(Family::Gamma),
            "normal" | "norm" => Ok(Family::Normal),
            "cauchy" => Ok(Family::Cauchy),
            other => Err(DistError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{family} takes {expected} parameter(s), got {got}")]
    WrongArity {
        family: Family,
        expected: usize,
        got: usize,
    },
    #[error("probability must lie strictly in (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("unknown family `{0}` (expected exp, gamma, normal or cauchy)")]
    UnknownFamily(String),
}

impl fmt::Display for BaselineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineModel::Exponential { rate } => write!(f, "Exp(λ={rate})"),
            BaselineModel::Gamma { shape, rate } => write!(f, "Gamma(α={shape}, β={rate})"),
            BaselineModel::Normal { mean, sd } => write!(f, "N(μ={mean}, σ={sd})"),
            BaselineModel::Cauchy { location, scale } => write!(f, "C(γ={location}, δ={scale})"),
        }
    }
}

/// A fully parameterized baseline distribution.
///
/// Construction validates positivity of every scale/shape/rate parameter, so
/// a value of this type always describes a proper distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineModel {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Normal { mean: f64, sd: f64 },
    Cauchy { location: f64, scale: f64 },
}

impl BaselineModel {
    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        require_positive("rate λ", rate)?;
        Ok(BaselineModel::Exponential { rate })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self, DistError> {
        require_positive("shape α", shape)?;
        require_positive("rate β", rate)?;
        Ok(BaselineModel::Gamma { shape, rate })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self, DistError> {
        require_finite("mean μ", mean)?;
        require_positive("standard deviation σ", sd)?;
        Ok(BaselineModel::Normal { mean, sd })
    }

    pub fn cauchy(location: f64, scale: f64) -> Result<Self, DistError> {
        require_finite("location γ", location)?;
        require_positive("scale δ", scale)?;
        Ok(BaselineModel::Cauchy { location, scale })
    }

    /// Build a model from a family tag and a parameter vector, checking arity.
    pub fn from_params(family: Family, params: &[f64]) -> Result<Self, DistError> {
        if params.len() != family.arity() {
            return Err(DistError::WrongArity {
                family,
                expected: family.arity(),
                got: params.len(),
            });
        }
        match family {
            Family::Exponential => Self::exponential(params[0]),
            Family::Gamma => Self::gamma(params[0], params[1]),
            Family::Normal => Self::normal(params[0], params[1]),
            Family::Cauchy => Self::cauchy(params[0], params[1]),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            BaselineModel::Exponential { .. } => Family::Exponential,
            BaselineModel::Gamma { .. } => Family::Gamma,
            BaselineModel::Normal { .. } => Family::Normal,
            BaselineModel::Cauchy { .. } => Family::Cauchy,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            BaselineModel::Exponential { rate } => vec![rate],
            BaselineModel::Gamma { shape, rate } => vec![shape, rate],
            BaselineModel::Normal { mean, sd } => vec![mean, sd],
            BaselineModel::Cauchy { location, scale } => vec![location, scale],
        }
    }

    /// Density at `x`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            BaselineModel::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            BaselineModel::Gamma { shape, rate } => {
                if x < 0.0 {
                    return 0.0;
                }
                if x == 0.0 {
                    // Limit of the density at the left endpoint.
                    return match shape {
                        s if s < 1.0 => f64::INFINITY,
                        s if s > 1.0 => 0.0,
                        _ => rate,
                    };
                }
                (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - special::ln_gamma(shape))
                    .exp()
            }
            BaselineModel::Normal { mean, sd } => special::normal_pdf((x - mean) / sd) / sd,
            BaselineModel::Cauchy { location, scale } => {
                let z = (x - location) / scale;
                1.0 / (PI * scale * (1.0 + z * z))
            }
        }
    }

    /// Distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            BaselineModel::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            BaselineModel::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    special::gamma_p(shape, rate * x)
                }
            }
            BaselineModel::Normal { mean, sd } => special::normal_cdf((x - mean) / sd),
            BaselineModel::Cauchy { location, scale } => {
                0.5 + ((x - location) / scale).atan() / PI
            }
        }
    }

    /// The p-quantile, closed form where one exists and numeric inversion of
    /// the regularized incomplete gamma for the Gamma family.
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::ProbabilityOutOfRange(p));
        }
        Ok(match *self {
            BaselineModel::Exponential { rate } => -(-p).ln_1p() / rate,
            BaselineModel::Gamma { shape, rate } => gamma_quantile(shape, rate, p),
            BaselineModel::Normal { mean, sd } => mean + sd * special::normal_quantile(p),
            BaselineModel::Cauchy { location, scale } => {
                location + scale * (PI * (p - 0.5)).tan()
            }
        })
    }

    /// `n` i.i.d. draws, reproducible under `seed`.
    pub fn sample(&self, n: usize, seed: Seed) -> Vec<f64> {
        let mut rng = seed.rng();
        match *self {
            BaselineModel::Exponential { rate } => {
                let d = rand_distr::Exp::new(rate).expect("validated rate");
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            BaselineModel::Gamma { shape, rate } => {
                let d = rand_distr::Gamma::new(shape, 1.0 / rate).expect("validated params");
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            BaselineModel::Normal { mean, sd } => {
                let d = rand_distr::Normal::new(mean, sd).expect("validated params");
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            BaselineModel::Cauchy { location, scale } => {
                let d = rand_distr::Cauchy::new(location, scale).expect("validated params");
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
        }
    }

    /// Sum of log densities; −∞ as soon as any point falls outside the
    /// support.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        match *self {
            BaselineModel::Exponential { rate } => {
                let mut sum = 0.0;
                for &x in data {
                    if x < 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    sum += x;
                }
                data.len() as f64 * rate.ln() - rate * sum
            }
            BaselineModel::Gamma { shape, rate } => {
                let mut sum_x = 0.0;
                let mut sum_ln = 0.0;
                for &x in data {
                    if x <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    sum_x += x;
                    sum_ln += x.ln();
                }
                let n = data.len() as f64;
                n * (shape * rate.ln() - special::ln_gamma(shape)) + (shape - 1.0) * sum_ln
                    - rate * sum_x
            }
            BaselineModel::Normal { mean, sd } => {
                let n = data.len() as f64;
                let ss: f64 = data.iter().map(|&x| (x - mean) * (x - mean)).sum();
                -n * (sd.ln() + 0.5 * (2.0 * PI).ln()) - 0.5 * ss / (sd * sd)
            }
            BaselineModel::Cauchy { location, scale } => {
                let n = data.len() as f64;
                let sum: f64 = data
                    .iter()
                    .map(|&x| {
                        let z = (x - location) / scale;
                        (1.0 + z * z).ln()
                    })
                    .sum();
                -n * (PI * scale).ln() - sum
            }
        }
    }
}

/// Shape/scale pair of a Generalized Pareto distribution.
///
/// Support is x ≥ 0 for ξ ≥ 0 and 0 ≤ x ≤ −σ/ξ for ξ < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdParams {
    xi: f64,
    sigma: f64,
}

impl GpdParams {
    pub fn new(xi: f64, sigma: f64) -> Result<Self, DistError> {
        require_finite("shape ξ", xi)?;
        require_positive("scale σ", sigma)?;
        Ok(GpdParams { xi, sigma })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Upper endpoint of the support, −σ/ξ, when ξ < 0.
    pub fn upper_bound(&self) -> Option<f64> {
        (self.xi < 0.0).then(|| -self.sigma / self.xi)
    }

    /// Distribution function; arguments outside the support clamp to 0 or 1.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if let Some(ub) = self.upper_bound() {
            if x >= ub {
                return 1.0;
            }
        }
        let z = x / self.sigma;
        if self.xi == 0.0 {
            -(-z).exp_m1()
        } else {
            // 1 − (1 + ξ x/σ)^{−1/ξ}, written so the ξ→0 limit is exact.
            -(-(self.xi * z).ln_1p() / self.xi).exp_m1()
        }
    }

    /// Density; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if let Some(ub) = self.upper_bound() {
            if x >= ub {
                return 0.0;
            }
        }
        let z = x / self.sigma;
        if self.xi == 0.0 {
            (-z).exp() / self.sigma
        } else {
            (-(1.0 + 1.0 / self.xi) * (self.xi * z).ln_1p()).exp() / self.sigma
        }
    }

    /// The p-quantile, σ/ξ [(1−p)^{−ξ} − 1] with the exponential limit at
    /// ξ = 0.
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::ProbabilityOutOfRange(p));
        }
        Ok(self.inv_cdf_unchecked(p))
    }

    fn inv_cdf_unchecked(&self, p: f64) -> f64 {
        let ln_tail = (-p).ln_1p(); // ln(1−p)
        if self.xi == 0.0 {
            -self.sigma * ln_tail
        } else {
            self.sigma / self.xi * (-self.xi * ln_tail).exp_m1()
        }
    }

    /// `n` i.i.d. draws by inverse-CDF sampling.
    pub fn sample(&self, n: usize, seed: Seed) -> Vec<f64> {
        let mut rng = seed.rng();
        (0..n)
            .map(|_| self.inv_cdf_unchecked(rng.random::<f64>()))
            .collect()
    }

    /// Sum of log densities; −∞ if any point violates the support, in
    /// particular whenever 1 + ξx/σ ≤ 0.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        gpd_log_likelihood(self.xi, self.sigma, data)
    }
}

/// GPD log-likelihood on raw (ξ, σ); usable for proposed parameter pairs
/// that have not been validated into a [`GpdParams`].
pub(crate) fn gpd_log_likelihood(xi: f64, sigma: f64, data: &[f64]) -> f64 {
    if !(sigma > 0.0) {
        return f64::NEG_INFINITY;
    }
    let m = data.len() as f64;
    if xi == 0.0 {
        let mut sum = 0.0;
        for &x in data {
            if x < 0.0 {
                return f64::NEG_INFINITY;
            }
            sum += x;
        }
        return -m * sigma.ln() - sum / sigma;
    }
    let mut sum = 0.0;
    for &x in data {
        let t = xi * x / sigma;
        if x < 0.0 || t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        sum += t.ln_1p();
    }
    -m * sigma.ln() - (1.0 + 1.0 / xi) * sum
}

/// Invert P(shape, rate·x) = p by bracketed bisection refined with secant
/// steps. The initial bracket is [0, α/β + 20 √α/β], doubled until it
/// contains the root.
fn gamma_quantile(shape: f64, rate: f64, p: f64) -> f64 {
    let f = |x: f64| special::gamma_p(shape, rate * x) - p;
    let mut lo = 0.0;
    let mut f_lo = -p;
    let mut hi = shape / rate + 20.0 * shape.sqrt() / rate;
    let mut f_hi = f(hi);
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi);
    }
    let mut x = 0.5 * (lo + hi);
    for iter in 0..300 {
        // Alternate bisection with secant steps; pure secant through the
        // bracket endpoints stalls on the flat parts of the CDF.
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        x = if iter % 2 == 0 && secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let fx = f(x);
        if fx.abs() <= 1e-13 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if hi - lo <= 1e-10 * x.max(1e-300) {
            return 0.5 * (lo + hi);
        }
    }
    x
}

fn require_positive(name: &str, value: f64) -> Result<(), DistError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DistError::InvalidParameter(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}

fn require_finite(name: &str, value: f64) -> Result<(), DistError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(DistError::InvalidParameter(format!(
            "{name} must be finite, got {value}"
        )))
    }
}
