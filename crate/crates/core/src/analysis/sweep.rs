use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero of the slope curve `β(α)`, located by linear interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaStar {
    pub alpha_values: Vec<f64>,
    pub betas: Vec<f64>,
    pub alpha_star: f64,
    pub bracket: (f64, f64),
}

/// Interpolates the first sign change of `β` from positive to non-positive
/// along increasing `α`.
pub fn sweep_beta_of_alpha(table: &[(f64, f64)]) -> Result<AlphaStar> {
    let mut t = table.to_vec();
    t.sort_by(|a, b| a.0.total_cmp(&b.0));
    if t.len() < 2 {
        return Err(Error::InsufficientData("need slopes at two or more α values".into()));
    }
    if t.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::domain("non-finite entry in the α/β table"));
    }
    let alpha_values: Vec<f64> = t.iter().map(|p| p.0).collect();
    let betas: Vec<f64> = t.iter().map(|p| p.1).collect();
    for w in t.windows(2) {
        let ((a0, b0), (a1, b1)) = (w[0], w[1]);
        if b0 > 0.0 && b1 <= 0.0 {
            let alpha_star = a0 + b0 / (b0 - b1) * (a1 - a0);
            return Ok(AlphaStar {
                alpha_values,
                betas,
                alpha_star,
                bracket: (a0, a1),
            });
        }
    }
    let pattern: String = betas.iter().map(|&b| if b > 0.0 { '+' } else { '-' }).collect();
    Err(Error::BoundaryOutsideGrid(format!(
        "no sign change of β over α ∈ [{}, {}] (signs {pattern})",
        alpha_values[0],
        alpha_values[alpha_values.len() - 1]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_examples() {
        let s = sweep_beta_of_alpha(&[(3.0, 0.33), (4.0, 0.02), (5.0, -0.15)]).unwrap();
        assert_eq!(s.bracket, (4.0, 5.0));
        assert!((s.alpha_star - (4.0 + 0.02 / 0.17)).abs() < 1e-12);
        let s = sweep_beta_of_alpha(&[(5.0, -0.2), (4.0, 0.2)]).unwrap();
        assert!((s.alpha_star - 4.5).abs() < 1e-15);
        assert_eq!(s.alpha_values, vec![4.0, 5.0]);
    }

    #[test]
    fn no_sign_change() {
        let e = sweep_beta_of_alpha(&[(2.0, -0.1), (3.0, -0.2)]).unwrap_err();
        assert!(matches!(e, Error::BoundaryOutsideGrid(ref m) if m.contains("--")), "{e}");
    }

    #[test]
    fn linear_beta_is_recovered() {
        // β(α) = 0.9 − 0.25 α has its zero at 3.6.
        let t: Vec<(f64, f64)> = (2..=8).map(|a| (a as f64, 0.9 - 0.25 * a as f64)).collect();
        let s = sweep_beta_of_alpha(&t).unwrap();
        assert!((s.alpha_star - 3.6).abs() < 1e-12);
    }
}
