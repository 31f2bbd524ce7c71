//! SO(N) volume along the pure-to-uniform family of spectra.
//!
//! The family is `λ = (λ1, r, …, r)` with `r = (1 - λ1)/(N - 1)` and
//! `λ1 ∈ [1/N, 1]`. Volumes are products over `N(N-1)/2` pair sums and
//! underflow quickly, so everything here is computed in log space.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::von_neumann_unchecked;
use crate::error::{Error, Result};
use crate::metric::log_so_n_volume;
use crate::quadrature::{adaptive_gauss_legendre, CompensatedSum};

/// Normalized-volume level defining `λ1*`.
pub const CUTOFF: f64 = 1e-4;
/// Required accuracy of `V_norm(λ1*)`.
pub const ROOT_TOL: f64 = 1e-10;
/// Absolute tolerance of the adaptive integrals.
pub const INTEGRAL_TOL: f64 = 1e-12;
/// Grid size for the tail entropy average.
pub const TAIL_GRID: usize = 10_000;
const DOMAIN_SLACK: f64 = 1e-12;

fn check_domain(n: usize, lambda1: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "family needs N >= 2, got {n}"
        )));
    }
    let lo = 1.0 / n as f64;
    if !(lambda1 >= lo - DOMAIN_SLACK && lambda1 <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::OutOfDomain {
            value: lambda1,
            lo,
            hi: 1.0,
        });
    }
    Ok(())
}

/// `ln V_norm(λ1)` from the reduced form
/// `(λ1 + r)^{(N-1)/2} (2r)^{(N-1)(N-2)/4} / (2/N)^{N(N-1)/4}`.
pub fn log_v_norm_family(n: usize, lambda1: f64) -> Result<f64> {
    check_domain(n, lambda1)?;
    let nf = n as f64;
    let l1 = lambda1.clamp(1.0 / nf, 1.0);
    let r = (1.0 - l1) / (nf - 1.0);
    let mut acc = 0.5 * (nf - 1.0) * (l1 + r).ln();
    let pair_exp = (nf - 1.0) * (nf - 2.0) / 4.0;
    if pair_exp > 0.0 {
        acc += pair_exp * (2.0 * r).ln();
    }
    acc -= nf * (nf - 1.0) / 4.0 * (2.0 / nf).ln();
    Ok(acc)
}

/// Normalized SO(N) volume at `λ1`.
pub fn v_norm_family(n: usize, lambda1: f64) -> Result<f64> {
    Ok(log_v_norm_family(n, lambda1)?.exp())
}

/// The same quantity from the pairwise product over the full spectrum.
pub fn v_norm_family_by_pairs(n: usize, lambda1: f64) -> Result<f64> {
    check_domain(n, lambda1)?;
    let spectrum = family_spectrum(n, lambda1);
    let uniform = vec![1.0 / n as f64; n];
    Ok((log_so_n_volume(&spectrum) - log_so_n_volume(&uniform)).exp())
}

/// `(λ1, r, …, r)`.
pub fn family_spectrum(n: usize, lambda1: f64) -> Vec<f64> {
    let r = (1.0 - lambda1) / (n as f64 - 1.0);
    let mut v = vec![r; n];
    v[0] = lambda1;
    v
}

/// Normalized von Neumann entropy along the family.
pub fn family_svn_norm(n: usize, lambda1: f64) -> f64 {
    von_neumann_unchecked(&family_spectrum(n, lambda1)) / (n as f64).log2()
}

/// `λ1*` with `V_norm(λ1*) = 1e-4` on the decreasing branch.
pub fn find_lambda_star(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "cutoff search needs N >= 3, got {n}"
        )));
    }
    let lo0 = 1.0 / n as f64;
    let probe = 2000;
    let values: Vec<f64> = (0..=probe)
        .map(|i| log_v_norm_family(n, lo0 + (1.0 - lo0) * i as f64 / probe as f64))
        .collect::<Result<_>>()?;
    let argmax = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if values[argmax..].windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "normalized volume is not monotone right of its maximum for N = {n}"
        )));
    }
    let target = CUTOFF.ln();
    let mut lo = lo0 + (1.0 - lo0) * argmax as f64 / probe as f64;
    let mut hi = 1.0;
    if log_v_norm_family(n, lo)? < target || log_v_norm_family(n, hi)? > target {
        return Err(Error::NoRoot(n));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_v_norm_family(n, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dlo = (v_norm_family(n, lo)? - CUTOFF).abs();
    let dhi = (v_norm_family(n, hi)? - CUTOFF).abs();
    Ok(if dlo <= dhi { lo } else { hi })
}

/// `∫_{1/N}^{λ1*} V_norm / ∫_{1/N}^{1} V_norm`.
pub fn integral_ratio(n: usize, lambda1_star: f64) -> Result<f64> {
    check_domain(n, lambda1_star)?;
    let lo = 1.0 / n as f64;
    let f = |x: f64| v_norm_family(n, x).unwrap_or(0.0);
    let (num, _) = adaptive_gauss_legendre(f, lo, lambda1_star, INTEGRAL_TOL);
    let (den, _) = adaptive_gauss_legendre(f, lo, 1.0, INTEGRAL_TOL);
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TailWeighting {
    /// Each λ1 grid point weighted by `V_norm(λ1)`.
    #[default]
    Volume,
    /// Plain average over the λ1 grid.
    Uniform,
}

/// Average normalized von Neumann entropy over a uniform 10⁴-point λ1 grid
/// on `[1/N, λ1*]`.
pub fn mean_tail_entropy(n: usize, lambda1_star: f64, weighting: TailWeighting) -> Result<f64> {
    check_domain(n, lambda1_star)?;
    let lo = 1.0 / n as f64;
    let step = (lambda1_star - lo) / (TAIL_GRID - 1) as f64;
    let mut num = CompensatedSum::default();
    let mut den = CompensatedSum::default();
    for i in 0..TAIL_GRID {
        let x = if i == TAIL_GRID - 1 {
            lambda1_star
        } else {
            lo + step * i as f64
        };
        let w = match weighting {
            TailWeighting::Volume => v_norm_family(n, x)?,
            TailWeighting::Uniform => 1.0,
        };
        num.add(w * family_svn_norm(n, x));
        den.add(w);
    }
    Ok(num.value() / den.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub lambda1_star: f64,
    pub v_norm_at_star: f64,
    pub integral_ratio: f64,
    /// Volume-weighted tail mean.
    pub mean_svn_norm: f64,
    pub mean_svn_norm_unweighted: f64,
}

pub fn scaling_point(n: usize) -> Result<ScalingPoint> {
    let star = find_lambda_star(n)?;
    Ok(ScalingPoint {
        n,
        lambda1_star: star,
        v_norm_at_star: v_norm_family(n, star)?,
        integral_ratio: integral_ratio(n, star)?,
        mean_svn_norm: mean_tail_entropy(n, star, TailWeighting::Volume)?,
        mean_svn_norm_unweighted: mean_tail_entropy(n, star, TailWeighting::Uniform)?,
    })
}

/// One scaling point per dimension, evaluated in parallel.
pub fn scaling_points(ns: &[usize]) -> Result<Vec<ScalingPoint>> {
    ns.par_iter().map(|&n| scaling_point(n)).collect()
}

/// `count` evenly spaced samples `(λ1, V_norm)` over `[1/N, 1]`.
pub fn curve_samples(n: usize, count: usize) -> Result<Vec<(f64, f64)>> {
    if count < 2 {
        return Err(Error::InvalidArgument(
            "curve needs at least two samples".into(),
        ));
    }
    let lo = 1.0 / n as f64;
    (0..count)
        .map(|i| {
            let x = if i == count - 1 {
                1.0
            } else {
                lo + (1.0 - lo) * i as f64 / (count - 1) as f64
            };
            Ok((x, v_norm_family(n, x)?))
        })
        .collect()
}
