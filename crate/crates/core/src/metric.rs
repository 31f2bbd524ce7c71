//! Induced metric on a fiber, its volume element and total volume.
//!
//! `g_ij = ⟨Γ̄_,i|Γ̄_,j⟩` is kept as the full Hermitian Gram matrix; for
//! complex parameterizations its off-diagonal entries are imaginary and the
//! determinant of the Hermitian matrix is what yields the volume.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityOperator, StateVector};
use crate::montecarlo;
use crate::purification::Fiber;
use crate::quadrature::{self, Rule1d};

/// Largest parameter count accepted by tensor-product quadrature.
pub const MAX_QUADRATURE_PARAMS: usize = 12;
/// Default Gauss–Legendre order per axis for up to three parameters.
pub const DEFAULT_QUADRATURE_ORDER: usize = 48;
const DET_IMAG_TOL: f64 = 1e-10;
const DET_FAIL: f64 = -1e-9;
const DET_UNDERFLOW: f64 = 1e-300;
/// Determinants below this fraction of the Hadamard bound `Π g_ii` are
/// elimination noise of a singular metric.
const DET_NOISE: f64 = 1e3 * f64::EPSILON;

#[derive(Clone, Debug)]
pub struct GramMetric {
    xi: Vec<f64>,
    g: ComplexMatrix,
}

impl GramMetric {
    /// Pairwise inner products of the tangent vectors.
    pub fn from_tangents(tangents: &[StateVector], xi: &[f64]) -> Self {
        let n = tangents.len();
        let mut g = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = tangents[i].inner(&tangents[j]);
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        Self { xi: xi.to_vec(), g }
    }

    pub fn n(&self) -> usize {
        self.g.rows()
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.g
    }

    /// Real determinant; fails if the LU determinant carries an imaginary
    /// part above 1e-10.
    pub fn determinant(&self) -> Result<f64> {
        let det = self.g.determinant()?;
        if det.im.abs() > DET_IMAG_TOL * det.re.abs().max(1.0) {
            return Err(Error::ComplexDeterminant(det.im));
        }
        Ok(det.re)
    }

    /// `√det g`, with small negative rounding clamped to zero.
    pub fn volume_element(&self) -> Result<f64> {
        let det = self.determinant()?;
        let bound: f64 = (0..self.n()).map(|i| self.g[(i, i)].re.max(0.0)).product();
        if det.abs() <= DET_NOISE * bound {
            return Ok(0.0);
        }
        density_from_determinant(det)
    }
}

fn density_from_determinant(det: f64) -> Result<f64> {
    if det < DET_FAIL {
        return Err(Error::NegativeDeterminant(det));
    }
    if det < DET_UNDERFLOW {
        return Ok(0.0);
    }
    Ok(det.sqrt())
}

pub fn gram_metric(f: &Fiber, xi: &[f64]) -> Result<GramMetric> {
    let t = f.tangent_vectors(xi)?;
    Ok(GramMetric::from_tangents(&t, xi))
}

/// `√det g(ξ)`.
pub fn volume_density(f: &Fiber, xi: &[f64]) -> Result<f64> {
    gram_metric(f, xi)?.volume_element()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeMethod {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

impl VolumeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte-carlo",
            Self::ClosedForm => "closed-form",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeResult {
    /// `∫ √det g` over the parameter box (closed form: the bare formula).
    pub raw: f64,
    /// `raw` divided by the same quantity for the maximally mixed state.
    pub normalized: f64,
    pub estimator_error: f64,
    pub method: VolumeMethod,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integration {
    /// Gauss–Legendre tensor product; the order per axis is derived from the budget.
    Quadrature,
    MonteCarlo {
        seed: u64,
    },
}

/// Order per axis for a quadrature budget: `⌊budget^{1/n}⌋`, capped at 64.
pub fn quadrature_order(param_count: usize, budget: usize) -> usize {
    let mut q = (budget as f64).powf(1.0 / param_count as f64).floor() as usize;
    while (q + 1)
        .checked_pow(param_count as u32)
        .is_some_and(|t| t <= budget)
    {
        q += 1;
    }
    while q > 1 && q.checked_pow(param_count as u32).is_none_or(|t| t > budget) {
        q -= 1;
    }
    q.clamp(2, 64)
}

/// Integrates `√det g` over the fiber's parameter box. Returns `(value, error estimate)`.
///
/// The quadrature error estimate is the gap to a rule of roughly half the order.
pub fn integrate_raw(f: &Fiber, method: Integration, budget: usize) -> Result<(f64, f64)> {
    if budget < 1000 {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} below the minimum of 1000"
        )));
    }
    let p = f.param();
    let n = p.param_count();
    let bounds: Vec<(f64, f64)> = p.params().iter().map(|q| q.domain).collect();
    let density = |xi: &[f64]| volume_density(f, xi);
    match method {
        Integration::Quadrature => {
            if n > MAX_QUADRATURE_PARAMS {
                return Err(Error::UnsupportedDimension(n));
            }
            let order = quadrature_order(n, budget);
            let rule = |q: usize| -> Vec<Rule1d> {
                bounds
                    .iter()
                    .map(|&(a, b)| Rule1d::on_interval(q, a, b))
                    .collect()
            };
            let fine = quadrature::tensor_product(&rule(order), density)?;
            let coarse = quadrature::tensor_product(&rule((order / 2).max(1)), density)?;
            Ok((fine, (fine - coarse).abs()))
        }
        Integration::MonteCarlo { seed } => {
            let e = montecarlo::integrate_box(&bounds, budget, seed, density)?;
            Ok((e.value, e.std_error))
        }
    }
}

/// Raw and normalized volume of the fiber. The maximally mixed reference is
/// integrated with the same method, budget and seed.
pub fn integrate_volume(f: &Fiber, method: Integration, budget: usize) -> Result<VolumeResult> {
    let (raw, err) = integrate_raw(f, method, budget)?;
    let reference = Fiber::new(DensityOperator::maximally_mixed(f.dim()), f.param().clone())?;
    let (ref_raw, ref_err) = integrate_raw(&reference, method, budget)?;
    let normalized = raw / ref_raw;
    let rel = if raw > 0.0 {
        (err / raw).hypot(ref_err / ref_raw)
    } else {
        err / ref_raw
    };
    Ok(VolumeResult {
        raw,
        normalized,
        estimator_error: if raw > 0.0 { normalized * rel } else { rel },
        method: match method {
            Integration::Quadrature => VolumeMethod::Quadrature,
            Integration::MonteCarlo { .. } => VolumeMethod::MonteCarlo,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormGroup {
    So3,
    Su2,
    SoN,
}

/// Closed-form fiber volumes (without the constant angular prefactor).
///
/// * SO(3): `√((λ1+λ2)(λ1+λ3)(λ2+λ3))`
/// * SU(2): `√(λ1(1-λ1))`
/// * SO(N): `Π_{i<j} √(λi+λj)`
pub fn closed_form_volume(group: ClosedFormGroup, lambda: &[f64]) -> Result<f64> {
    crate::entropy::check_probability_vector(lambda)?;
    let need = match group {
        ClosedFormGroup::So3 => Some(3),
        ClosedFormGroup::Su2 => Some(2),
        ClosedFormGroup::SoN => None,
    };
    if let Some(d) = need {
        if lambda.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: lambda.len(),
            });
        }
    }
    Ok(match group {
        ClosedFormGroup::So3 => {
            let (a, b, c) = (lambda[0], lambda[1], lambda[2]);
            ((a + b) * (a + c) * (b + c)).sqrt()
        }
        ClosedFormGroup::Su2 => (lambda[0] * (1.0 - lambda[0])).max(0.0).sqrt(),
        ClosedFormGroup::SoN => log_so_n_volume(lambda).exp(),
    })
}

/// `Σ_{i<j} ½ ln(λi+λj)`; `-∞` when a pair sum vanishes.
pub fn log_so_n_volume(lambda: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..lambda.len() {
        for j in i + 1..lambda.len() {
            acc += 0.5 * (lambda[i] + lambda[j]).ln();
        }
    }
    acc
}

/// SO(3) volume written with the unit-trace constraint substituted:
/// `√((1-λ1)(1-λ2)(λ1+λ2))`.
pub fn so3_volume_unit_trace(lambda: &[f64; 3]) -> f64 {
    ((1.0 - lambda[0]) * (1.0 - lambda[1]) * (lambda[0] + lambda[1]))
        .max(0.0)
        .sqrt()
}

/// Closed-form volume divided by its value at the uniform spectrum.
pub fn normalized_closed_form(group: ClosedFormGroup, lambda: &[f64]) -> Result<f64> {
    let d = lambda.len();
    let uniform = vec![1.0 / d as f64; d];
    Ok(closed_form_volume(group, lambda)? / closed_form_volume(group, &uniform)?)
}

/// Reference metric tables in closed form.
pub mod reference {
    use crate::linalg::{ComplexMatrix, C64};
    use std::f64::consts::FRAC_PI_2;

    /// Printed SO(3) component table `g(φ12, φ13, φ23; λ)`.
    ///
    /// These are the Gram components of the plane-rotation fiber evaluated
    /// in a shifted chart; see [`so3_table_chart`].
    pub fn so3_table(lambda: &[f64; 3], xi: &[f64; 3]) -> [[f64; 3]; 3] {
        let [l1, l2, _] = *lambda;
        let [_, b, c] = *xi;
        let s = l1 + l2;
        let d = l1 - l2;
        let g11 = c.sin().powi(2)
            + 0.25 * (s + 3.0 * s * (2.0 * c).cos() + 2.0 * d * (2.0 * b).cos() * c.sin().powi(2));
        let g22 = s;
        let g33 = 0.5 * (2.0 - s - d * (2.0 * b).cos());
        let g12 = s * c.cos();
        let g13 = -d * b.cos() * c.sin() * b.sin();
        [[g11, g12, g13], [g12, g22, 0.0], [g13, 0.0, g33]]
    }

    /// Point and spectrum at which the plane-rotation fiber's Gram matrix
    /// equals [`so3_table`]: `φ23 ↦ φ23 + π/2` and `λ2 ↔ λ3`.
    pub fn so3_table_chart(lambda: &[f64; 3], xi: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
        (
            [lambda[0], lambda[2], lambda[1]],
            [xi[0], xi[1], xi[2] + FRAC_PI_2],
        )
    }

    /// Determinant of the SO(3) Gram matrix in the plane-rotation chart:
    /// `(1-λ1)(1-λ2)(λ1+λ2) cos²φ23` for a unit-trace spectrum.
    pub fn so3_determinant(lambda: &[f64; 3], xi: &[f64; 3]) -> f64 {
        let [l1, l2, _] = *lambda;
        (1.0 - l1) * (1.0 - l2) * (l1 + l2) * xi[2].cos().powi(2)
    }

    /// SU(2) components at `(φ, ψ, χ)`, laid out with `g_φψ = g_φχ =
    /// i(λ1-λ2) cosφ sinφ`. This layout is the transpose (equivalently the
    /// complex conjugate) of `⟨Γ̄_,i|Γ̄_,j⟩`.
    pub fn su2_table(lambda: &[f64; 2], xi: &[f64; 3]) -> ComplexMatrix {
        let [l1, l2] = *lambda;
        let (s, c) = xi[0].sin_cos();
        let off = C64::new(0.0, (l1 - l2) * c * s);
        let t = l1 + l2;
        ComplexMatrix::new(
            3,
            3,
            vec![
                C64::new(t, 0.0),
                off,
                off,
                off.conj(),
                C64::new(t * c * c, 0.0),
                C64::new(0.0, 0.0),
                off.conj(),
                C64::new(0.0, 0.0),
                C64::new(t * s * s, 0.0),
            ],
        )
        .expect("finite entries")
    }
}
