//! Coupling rules tying the coarse scale ε to the mesh size h.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonRule {
    /// ε = C₁ (h² |ln h|)^{1/(2+α)}, matched to C^{2,α} regularity.
    C2 { c1: f64, alpha: f64 },
    /// ε = C₂ (h² |ln h|)^{1/(3+α)}, matched to C^{3,α} regularity.
    C3 { c2: f64, alpha: f64 },
    /// ε independent of h.
    Fixed { epsilon: f64 },
    /// ε = C·h·ln(1/h), the convergence-theory lower bound with equality.
    LowerBound { c: f64 },
}

impl EpsilonRule {
    /// True for the rules whose sweeps must keep ε > h (two-scale
    /// ordering) with ε/h → ∞ under refinement.
    pub fn is_two_scale(&self) -> bool {
        !matches!(self, EpsilonRule::Fixed { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            EpsilonRule::C2 { .. } => "c2",
            EpsilonRule::C3 { .. } => "c3",
            EpsilonRule::Fixed { .. } => "fixed",
            EpsilonRule::LowerBound { .. } => "lower-bound",
        }
    }
}

/// Evaluates the coupling rule at mesh size h ∈ (0, 1).
pub fn epsilon_rule(h: f64, rule: &EpsilonRule) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::EpsilonRuleRange(h));
    }
    let ln_inv = (1.0 / h).ln();
    Ok(match *rule {
        EpsilonRule::C2 { c1, alpha } => c1 * (h * h * ln_inv).powf(1.0 / (2.0 + alpha)),
        EpsilonRule::C3 { c2, alpha } => c2 * (h * h * ln_inv).powf(1.0 / (3.0 + alpha)),
        EpsilonRule::Fixed { epsilon } => epsilon,
        EpsilonRule::LowerBound { c } => c * h * ln_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn c3_rule_formula() {
        let h = 1.0 / 64.0;
        let rule = EpsilonRule::C3 { c2: 1.0, alpha: 1.0 };
        let eps = epsilon_rule(h, &rule).unwrap();
        assert_relative_eq!(eps, (h * h * 64.0f64.ln()).powf(0.25), max_relative = 1e-14);
        assert!(eps > h);
    }

    #[test]
    fn fixed_rule_ignores_h() {
        let rule = EpsilonRule::Fixed { epsilon: 0.2 };
        assert_eq!(epsilon_rule(0.5, &rule).unwrap(), 0.2);
        assert_eq!(epsilon_rule(0.01, &rule).unwrap(), 0.2);
        assert!(!rule.is_two_scale());
    }

    #[test]
    fn lower_bound_rule_with_equality() {
        let h = 0.125;
        let rule = EpsilonRule::LowerBound { c: 1.0 };
        let eps = epsilon_rule(h, &rule).unwrap();
        assert_relative_eq!(eps, h * (1.0f64 / h).ln(), max_relative = 1e-15);
        assert!(eps >= h * (1.0f64 / h).ln());
    }

    #[test]
    fn rejects_h_outside_unit_interval() {
        for rule in [
            EpsilonRule::C2 { c1: 1.0, alpha: 0.5 },
            EpsilonRule::Fixed { epsilon: 0.1 },
        ] {
            assert!(epsilon_rule(1.0, &rule).is_err());
            assert!(epsilon_rule(-0.5, &rule).is_err());
        }
    }
}
