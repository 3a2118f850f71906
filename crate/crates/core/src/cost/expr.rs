use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form scalar functions of one point, used as factors of separable costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", rename_all = "snake_case")]
pub enum Expr {
    Constant { value: f64 },
    /// `p[axis]`.
    Coordinate { axis: usize },
    /// `a . p + b`.
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `|p - center|^2`, center defaulting to the origin.
    SquaredNorm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// `|p - center|`.
    Norm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// `exp(a . p)`.
    Exp { coeffs: Vec<f64> },
    /// `exp(-|p - center|^2 / (2 width^2))`.
    Gaussian { center: Vec<f64>, width: f64 },
}

fn dist2(p: &[f64], c: Option<&Vec<f64>>) -> f64 {
    match c {
        Some(c) => p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum(),
        None => p.iter().map(|a| a * a).sum(),
    }
}

fn dot(a: &[f64], p: &[f64]) -> f64 {
    a.iter().zip(p).map(|(x, y)| x * y).sum()
}

impl Expr {
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Expr::Constant { value } => *value,
            Expr::Coordinate { axis } => p[*axis],
            Expr::Linear { coeffs, offset } => dot(coeffs, p) + offset,
            Expr::SquaredNorm { center } => dist2(p, center.as_ref()),
            Expr::Norm { center } => dist2(p, center.as_ref()).sqrt(),
            Expr::Exp { coeffs } => dot(coeffs, p).exp(),
            Expr::Gaussian { center, width } => (-dist2(p, Some(center)) / (2.0 * width * width)).exp(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("expression {what} does not fit dimension {dim}")));
        match self {
            Expr::Constant { value } if !value.is_finite() => bad("constant"),
            Expr::Coordinate { axis } if *axis >= dim => bad("coordinate axis"),
            Expr::Linear { coeffs, offset } if coeffs.len() != dim || !offset.is_finite() => bad("linear coefficients"),
            Expr::Exp { coeffs } if coeffs.len() != dim => bad("exponential coefficients"),
            Expr::SquaredNorm { center: Some(c) } | Expr::Norm { center: Some(c) } if c.len() != dim => bad("center"),
            Expr::Gaussian { center, width } if center.len() != dim || !(*width > 0.0) => bad("gaussian parameters"),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        let p = [3.0, 4.0];
        assert_eq!(Expr::Norm { center: None }.eval(&p), 5.0);
        assert_eq!(Expr::SquaredNorm { center: Some(vec![3.0, 0.0]) }.eval(&p), 16.0);
        assert_eq!(Expr::Linear { coeffs: vec![1.0, -1.0], offset: 2.0 }.eval(&p), 1.0);
        assert_eq!(Expr::Coordinate { axis: 1 }.eval(&p), 4.0);
        assert_eq!(Expr::Gaussian { center: p.to_vec(), width: 0.3 }.eval(&p), 1.0);
        assert!(Expr::Coordinate { axis: 2 }.validate(2).is_err());
        let parsed: Expr = serde_json::from_str(r#"{"expr":"exp","coeffs":[0.0,1.0]}"#).unwrap();
        assert!((parsed.eval(&p) - 4f64.exp()).abs() < 1e-12);
    }
}
