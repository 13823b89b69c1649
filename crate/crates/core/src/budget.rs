//! Conditional-preparation purity scalars and the detection-efficiency
//! budget.
//!
//! Widths enter only through their ratios, so any consistent unit (sigma,
//! FWHM, GHz, momentum) works as long as numerator and denominator match.

use crate::error::{Error, Result};

/// Gaussian widths of the trigger filters and of the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    /// Trigger spectral filter width (GHz).
    pub sigma_f: f64,
    /// Pump spectral width (GHz).
    pub sigma_p: f64,
    /// Idler spatial-filter momentum width.
    pub kappa_i: f64,
    /// Pump momentum width.
    pub kappa_p: f64,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("sigma_f", self.sigma_f),
            ("sigma_p", self.sigma_p),
            ("kappa_i", self.kappa_i),
            ("kappa_p", self.kappa_p),
        ] {
            if !(v > 0.0) {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(())
    }
}

/// Multiplicative decomposition of the total detection efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyBudget {
    /// Homodyne detector efficiency (including PBS losses).
    pub eta_hd: f64,
    /// Trigger dark-count efficiency.
    pub eta_dc: f64,
    /// Experimental mode-matching factor.
    pub eta_exp: f64,
    /// Spatial purity parameter.
    pub p_s: f64,
    /// Spectral purity parameter.
    pub p_t: f64,
}

impl EfficiencyBudget {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("eta_hd", self.eta_hd),
            ("eta_dc", self.eta_dc),
            ("eta_exp", self.eta_exp),
            ("p_s", self.p_s),
            ("p_t", self.p_t),
        ] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(())
    }
}

/// Spectral purity of the conditionally prepared state:
/// 1 / sqrt(1 + sigma_f^2 / sigma_p^2).
pub fn spectral_purity(sigma_f: f64, sigma_p: f64) -> Result<f64> {
    check_width("sigma_f", sigma_f)?;
    check_width("sigma_p", sigma_p)?;
    let r = sigma_f / sigma_p;
    Ok(1.0 / libm::sqrt(1.0 + r * r))
}

/// Spatial purity: 1 / (1 + kappa_i^2 / kappa_p^2).
pub fn spatial_purity(kappa_i: f64, kappa_p: f64) -> Result<f64> {
    check_width("kappa_i", kappa_i)?;
    check_width("kappa_p", kappa_p)?;
    let r = kappa_i / kappa_p;
    Ok(1.0 / (1.0 + r * r))
}

/// Total detection efficiency:
/// eta_hd * eta_dc * eta_exp * sqrt(p_s * p_t).
pub fn total_efficiency(budget: &EfficiencyBudget) -> Result<f64> {
    budget.validate()?;
    Ok(budget.eta_hd * budget.eta_dc * budget.eta_exp * libm::sqrt(budget.p_s * budget.p_t))
}

fn check_width(what: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::Domain { what, value: v });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_purity_limits() {
        // perfect filtering limit
        assert!((spectral_purity(1e-9, 430.0).unwrap() - 1.0).abs() < 1e-12);
        // symmetry point
        let half = spectral_purity(430.0, 430.0).unwrap();
        assert!((half - 1.0 / libm::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn spectral_purity_at_the_experimental_widths() {
        // 50 GHz filter, 430 GHz pump
        let p = spectral_purity(50.0, 430.0).unwrap();
        assert!((p - 0.99331).abs() < 1e-5, "got {p}");
    }

    #[test]
    fn spatial_purity_values() {
        assert!((spatial_purity(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((spatial_purity(1e-9, 1.0).unwrap() - 1.0).abs() < 1e-12);
        // inverse query: purity 0.86 corresponds to a width ratio
        // sqrt(1/0.86 - 1)
        let ratio = libm::sqrt(1.0 / 0.86 - 1.0);
        assert!((ratio - 0.4035).abs() < 1e-4);
        assert!((spatial_purity(ratio, 1.0).unwrap() - 0.86).abs() < 1e-12);
    }

    #[test]
    fn widths_must_be_positive() {
        assert!(matches!(spectral_purity(0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(spectral_purity(1.0, -2.0), Err(Error::Domain { .. })));
        assert!(matches!(spatial_purity(-1.0, 1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn total_efficiency_trivial_points() {
        let all_one =
            EfficiencyBudget { eta_hd: 1.0, eta_dc: 1.0, eta_exp: 1.0, p_s: 1.0, p_t: 1.0 };
        assert_eq!(total_efficiency(&all_one).unwrap(), 1.0);
        let dead = EfficiencyBudget { eta_exp: 0.0, ..all_one };
        assert_eq!(total_efficiency(&dead).unwrap(), 0.0);
    }

    #[test]
    fn total_efficiency_at_the_experimental_budget() {
        let budget =
            EfficiencyBudget { eta_hd: 0.90, eta_dc: 0.99, eta_exp: 0.7, p_s: 0.86, p_t: 0.98 };
        let eta = total_efficiency(&budget).unwrap();
        assert!((eta - 0.5726).abs() < 1e-4, "got {eta}");
    }

    #[test]
    fn budget_fields_outside_unit_interval_are_rejected() {
        let bad =
            EfficiencyBudget { eta_hd: 1.2, eta_dc: 0.99, eta_exp: 0.7, p_s: 0.86, p_t: 0.98 };
        assert!(total_efficiency(&bad).is_err());
    }

    #[test]
    fn monotonicity_in_width_ratios_and_factors() {
        let mut prev = f64::INFINITY;
        for sf in [10.0, 50.0, 100.0, 400.0] {
            let p = spectral_purity(sf, 430.0).unwrap();
            assert!(p < prev);
            prev = p;
        }
        let base =
            EfficiencyBudget { eta_hd: 0.9, eta_dc: 0.99, eta_exp: 0.7, p_s: 0.86, p_t: 0.98 };
        let more = EfficiencyBudget { eta_exp: 0.75, ..base };
        assert!(total_efficiency(&more).unwrap() > total_efficiency(&base).unwrap());
    }
}
