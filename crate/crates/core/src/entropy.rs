//! Von Neumann and linear entropies of a spectrum, in bits where relevant.

use serde::Serialize;

use crate::error::{Error, Result};

const PROB_TOL: f64 = 1e-10;
const LOG_CUTOFF: f64 = 1e-15;

/// Rejects empty, non-finite, negative (beyond 1e-10) or non-normalized vectors.
pub fn check_probability_vector(lambda: &[f64]) -> Result<()> {
    if lambda.is_empty() {
        return Err(Error::NotAProbabilityVector("empty".into()));
    }
    if let Some(x) = lambda.iter().find(|x| !x.is_finite() || **x < -PROB_TOL) {
        return Err(Error::NotAProbabilityVector(format!("entry {x}")));
    }
    let s: f64 = lambda.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::NotAProbabilityVector(format!("sum {s}")));
    }
    Ok(())
}

/// `-Σ λ log2 λ`; entries below 1e-15 contribute nothing.
pub fn von_neumann(lambda: &[f64]) -> Result<f64> {
    check_probability_vector(lambda)?;
    Ok(von_neumann_unchecked(lambda))
}

pub(crate) fn von_neumann_unchecked(lambda: &[f64]) -> f64 {
    let s: f64 = lambda
        .iter()
        .filter(|&&x| x >= LOG_CUTOFF)
        .map(|&x| -x * x.log2())
        .sum();
    s.max(0.0)
}

/// `1 - Σ λ²`.
pub fn linear_entropy(lambda: &[f64]) -> Result<f64> {
    check_probability_vector(lambda)?;
    Ok(linear_entropy_unchecked(lambda))
}

pub(crate) fn linear_entropy_unchecked(lambda: &[f64]) -> f64 {
    (1.0 - lambda.iter().map(|x| x * x).sum::<f64>()).max(0.0)
}

/// Von Neumann entropy divided by `log2 d`.
pub fn von_neumann_normalized(lambda: &[f64]) -> Result<f64> {
    let d = lambda.len();
    if d < 2 {
        return Ok(0.0);
    }
    Ok(von_neumann(lambda)? / (d as f64).log2())
}

/// Linear entropy divided by `(d-1)/d`.
pub fn linear_entropy_normalized(lambda: &[f64]) -> Result<f64> {
    let d = lambda.len() as f64;
    if lambda.len() < 2 {
        return Ok(0.0);
    }
    Ok(linear_entropy(lambda)? * d / (d - 1.0))
}

/// Information gained on learning which purification is realized:
/// `log2 d_RA - (log2 d_A - S)`.
pub fn delta_information(d_a: usize, d_ra: usize, s_vn: f64) -> Result<f64> {
    if d_a == 0 || d_ra == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let max = (d_a as f64).log2();
    if !(s_vn >= -1e-12 && s_vn <= max + 1e-12) {
        return Err(Error::OutOfRangeEntropy { value: s_vn, max });
    }
    Ok((d_ra as f64).log2() - max + s_vn)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub s_vn: f64,
    pub s_lin: f64,
    pub s_vn_norm: f64,
    pub s_lin_norm: f64,
    pub v_norm: Option<f64>,
    pub delta_i: Option<f64>,
}

impl EntropyReport {
    /// Entropies of `lambda`; `delta_i` assumes a doubled space of dimension `d²`.
    pub fn from_spectrum(lambda: &[f64], v_norm: Option<f64>) -> Result<Self> {
        let d = lambda.len();
        let s_vn = von_neumann(lambda)?;
        Ok(Self {
            s_vn,
            s_lin: linear_entropy(lambda)?,
            s_vn_norm: von_neumann_normalized(lambda)?,
            s_lin_norm: linear_entropy_normalized(lambda)?,
            v_norm,
            delta_i: Some(delta_information(d, d * d, s_vn.min((d as f64).log2()))?),
        })
    }
}
