//! Refinement studies.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log spacing`.
    pub order: f64,
    /// Fitted constant `C` in `error ≈ C·Δ^order`.
    pub constant: f64,
    /// Observed orders between consecutive refinements.
    pub pairwise: Vec<f64>,
}

pub fn fit_order(spacings: &[f64], errors: &[f64]) -> Result<OrderFit> {
    if spacings.len() != errors.len() || spacings.len() < 2 {
        return Err(Error::InvalidParameter(
            "an order fit needs at least two (spacing, error) pairs".into(),
        ));
    }
    if spacings.iter().chain(errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("spacings and errors must be positive".into()));
    }
    let x: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("spacings must not all coincide".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let order = sxy / sxx;
    let pairwise = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (ys[0] - ys[1]) / (xs[0] - xs[1]))
        .collect();
    Ok(OrderFit {
        spacings: spacings.to_vec(),
        errors: errors.to_vec(),
        order,
        constant: (my - order * mx).exp(),
        pairwise,
    })
}
