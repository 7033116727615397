//! Highly informative normal priors for the GPD tail parameters (ξ, σ),
//! built from the fitted baseline parameters: calibrated coefficient
//! formulas for the stable families (Normal, Cauchy), empirical
//! relationships for Gamma, and σ = 1/λ for the exponential.

use std::f64::consts::PI;

use crate::distributions::Family;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PriorError {
    #[error("{0}")]
    Domain(String),
}

/// A normal prior N(mean, sd) on one GPD parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformativePrior {
    pub mean: f64,
    pub sd: f64,
}

impl InformativePrior {
    pub fn new(mean: f64, sd: f64) -> Result<Self, PriorError> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(PriorError::Domain(format!(
                "prior sd must be finite and > 0, got {sd}"
            )));
        }
        Ok(InformativePrior { mean, sd })
    }

    /// Prior with the default spread for families where none is calibrated:
    /// sd = 0.1·|mean| floored at 1e-3. These spreads only steer chain
    /// initialization and proposal scaling; the acceptance ratios that use
    /// them drop the prior term entirely.
    pub fn with_default_spread(mean: f64) -> InformativePrior {
        InformativePrior {
            mean,
            sd: (0.1 * mean.abs()).max(1e-3),
        }
    }
}

/// Calibrated GPD tail coefficients for a standard stable family at
/// threshold probability `p_u`: prior means (ξ_Z, σ_Z) and prior spreads
/// (b₁, b₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableTailCoefficients {
    pub xi_z: f64,
    pub sigma_z: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Coefficient range the stable formulas were calibrated on; values of
/// `p_u` outside it are accepted with a warning.
const CALIBRATED_P_U: (f64, f64) = (0.85, 0.99);

/// Tail coefficients for N(0,1) or C(0,1) exceedances over the
/// p_u-quantile.
///
/// Normal: ξ_Z = −0.7 + 0.61 p_u, σ_Z = 0.34 + 3.18(1−p_u) − 12.4(1−p_u)²,
/// b₁ = 0.03. Cauchy: ξ_Z = 1, σ_Z = (1/π)(1−p_u)^{−1}, b₁ = 0.065.
/// Both: b₂ = exp{c₁ p_u² + c₂ p_u + c₃} with family-specific (c₁, c₂, c₃).
pub fn stable_tail_params(
    family: Family,
    p_u: f64,
) -> Result<StableTailCoefficients, PriorError> {
    if !(p_u > 0.0 && p_u < 1.0) {
        return Err(PriorError::Domain(format!(
            "p_u must lie in (0, 1), got {p_u}"
        )));
    }
    if !(CALIBRATED_P_U.0..=CALIBRATED_P_U.1).contains(&p_u) {
        log::warn!(
            "p_u = {p_u} is outside the calibrated range [{}, {}] of the stable tail coefficients",
            CALIBRATED_P_U.0,
            CALIBRATED_P_U.1
        );
    }
    let t = 1.0 - p_u;
    let (xi_z, sigma_z, b1, c) = match family {
        Family::Normal => (
            -0.7 + 0.61 * p_u,
            0.34 + 3.18 * t - 12.4 * t * t,
            0.03,
            (-46.24, 83.55, -41.58),
        ),
        Family::Cauchy => (1.0, 1.0 / (PI * t), 0.065, (323.57, -588.51, 266.13)),
        other => {
            return Err(PriorError::Domain(format!(
                "stable tail coefficients exist only for normal and cauchy, not {other}"
            )))
        }
    };
    if !(sigma_z > 0.0) {
        return Err(PriorError::Domain(format!(
            "σ_Z = {sigma_z} is not positive at p_u = {p_u}; the coefficient formulas do not \
             apply there"
        )));
    }
    let b2 = (c.0 * p_u * p_u + c.1 * p_u + c.2).exp();
    Ok(StableTailCoefficients {
        xi_z,
        sigma_z,
        b1,
        b2,
    })
}

/// Informative priors for (ξ, σ) of a stable family's tail:
/// ξ ~ N(ξ_Z, b₁) and σ ~ N(â·σ_Z, b₂), where â is the fitted scale of the
/// stable baseline (σ for Normal, δ for Cauchy).
pub fn stable_priors(
    family: Family,
    p_u: f64,
    a_hat: f64,
) -> Result<(InformativePrior, InformativePrior), PriorError> {
    if !(a_hat > 0.0) {
        return Err(PriorError::Domain(format!(
            "fitted scale must be > 0, got {a_hat}"
        )));
    }
    let coef = stable_tail_params(family, p_u)?;
    Ok((
        InformativePrior::new(coef.xi_z, coef.b1)?,
        InformativePrior::new(a_hat * coef.sigma_z, coef.b2)?,
    ))
}

/// Empirical GPD prior means for a Gamma(α, β) baseline:
/// μ_ξ = −0.032 + 0.014 α^{−1} and μ_σ = ½ β^{−1} (1 + √α).
pub fn gamma_tail_params(shape: f64, rate: f64) -> Result<(f64, f64), PriorError> {
    if !(shape > 0.0 && rate > 0.0) {
        return Err(PriorError::Domain(format!(
            "gamma parameters must be > 0, got α={shape}, β={rate}"
        )));
    }
    let mu_xi = -0.032 + 0.014 / shape;
    let mu_sigma = 0.5 * (1.0 + shape.sqrt()) / rate;
    Ok((mu_xi, mu_sigma))
}

/// Informative priors for (ξ, σ) of a Gamma baseline's tail, with the
/// default spread rule (the joint acceptance ratio carries no prior term).
pub fn gamma_priors(
    shape: f64,
    rate: f64,
) -> Result<(InformativePrior, InformativePrior), PriorError> {
    let (mu_xi, mu_sigma) = gamma_tail_params(shape, rate)?;
    Ok((
        InformativePrior::with_default_spread(mu_xi),
        InformativePrior::with_default_spread(mu_sigma),
    ))
}

/// Informative prior for σ of an Exp(λ) baseline's tail: the exceedances
/// are again Exp(λ), so μ_σ = 1/λ.
pub fn exponential_tail_prior(rate: f64) -> Result<InformativePrior, PriorError> {
    if !(rate > 0.0) {
        return Err(PriorError::Domain(format!(
            "rate must be > 0, got {rate}"
        )));
    }
    Ok(InformativePrior::with_default_spread(1.0 / rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_coefficients_at_p_u_09() {
        let c = stable_tail_params(Family::Normal, 0.9).unwrap();
        assert!((c.xi_z - (-0.151)).abs() < 1e-12);
        assert!((c.sigma_z - 0.534).abs() < 1e-12);
        assert!((c.b1 - 0.03).abs() < 1e-15);
        let b2_expected = (-46.24 * 0.81_f64 + 83.55 * 0.9 - 41.58).exp();
        assert!((c.b2 - b2_expected).abs() < 1e-12);
        assert!((c.b2 - 0.021_506_5).abs() < 1e-6);
    }

    #[test]
    fn cauchy_coefficients_at_p_u_09() {
        let c = stable_tail_params(Family::Cauchy, 0.9).unwrap();
        assert_eq!(c.xi_z, 1.0);
        assert!((c.sigma_z - 10.0 / PI).abs() < 1e-12);
        assert!((c.sigma_z - 3.183_098_861_837_907).abs() < 1e-12);
        assert!((c.b1 - 0.065).abs() < 1e-15);
    }

    #[test]
    fn cauchy_sigma_identity_holds_for_all_p_u() {
        for i in 1..100 {
            let p_u = i as f64 / 100.0;
            if let Ok(c) = stable_tail_params(Family::Cauchy, p_u) {
                assert!((c.sigma_z * PI * (1.0 - p_u) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normal_sigma_positive_on_calibrated_grid() {
        let mut p_u = 0.85;
        while p_u <= 0.99 + 1e-12 {
            let c = stable_tail_params(Family::Normal, p_u).unwrap();
            assert!(c.sigma_z > 0.0, "σ_Z not positive at p_u={p_u}");
            assert!(c.b1 > 0.0 && c.b2 > 0.0);
            p_u += 0.005;
        }
    }

    #[test]
    fn stable_tail_params_rejects_other_families() {
        assert!(stable_tail_params(Family::Exponential, 0.9).is_err());
        assert!(stable_tail_params(Family::Gamma, 0.9).is_err());
        assert!(stable_tail_params(Family::Normal, 1.2).is_err());
    }

    #[test]
    fn stable_priors_scale_with_a_hat() {
        let (xi, sigma) = stable_priors(Family::Normal, 0.9, 1.0).unwrap();
        assert!((sigma.mean - 0.534).abs() < 1e-12);
        assert!((xi.mean - (-0.151)).abs() < 1e-12);
        assert!((xi.sd - 0.03).abs() < 1e-15);

        let (_, sigma2) = stable_priors(Family::Cauchy, 0.9, 2.0).unwrap();
        assert!((sigma2.mean - 20.0 / PI).abs() < 1e-12);
        assert!((sigma2.mean - 6.366_197_723_675_814).abs() < 1e-12);
    }

    #[test]
    fn gamma_relationships() {
        let (mu_xi, mu_sigma) = gamma_tail_params(1.0, 1.0).unwrap();
        assert!((mu_xi - (-0.018)).abs() < 1e-12);
        assert!((mu_sigma - 1.0).abs() < 1e-12);

        let (mu_xi, mu_sigma) = gamma_tail_params(4.0, 1.0).unwrap();
        assert!((mu_xi - (-0.0285)).abs() < 1e-12);
        assert!((mu_sigma - 1.5).abs() < 1e-12);

        let (_, mu_sigma) = gamma_tail_params(1.0, 2.0).unwrap();
        assert!((mu_sigma - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gamma_sigma_scales_inversely_with_rate() {
        for &shape in &[0.25, 1.0, 3.0] {
            let (_, base) = gamma_tail_params(shape, 1.0).unwrap();
            for &c in &[0.5, 2.0, 8.0] {
                let (_, scaled) = gamma_tail_params(shape, c).unwrap();
                assert!((scaled - base / c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exponential_prior_mean_is_reciprocal_rate() {
        assert!((exponential_tail_prior(2.0).unwrap().mean - 0.5).abs() < 1e-15);
        assert!((exponential_tail_prior(1.0).unwrap().mean - 1.0).abs() < 1e-15);
        assert!((exponential_tail_prior(0.5).unwrap().mean - 2.0).abs() < 1e-15);
        assert!(exponential_tail_prior(0.0).is_err());
    }

    #[test]
    fn emitted_spreads_are_positive() {
        assert!(exponential_tail_prior(1e6).unwrap().sd >= 1e-3);
        let (xi, sigma) = gamma_priors(2.0, 1.0).unwrap();
        assert!(xi.sd > 0.0 && sigma.sd > 0.0);
        assert!(InformativePrior::new(0.0, 0.0).is_err());
    }
}
