//! Purifications of a density operator and their tangent directions.
//!
//! With `|Γ^ρ⟩ = Σ_i |λ_i⟩|λ_i⟩` the fiber over ρ is the set
//! `(U_R(ξ) ⊗ √ρ)|Γ^ρ⟩`; every point reduces to ρ on the A factor.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityOperator, StateVector, C64};
use crate::unitary::{
    DerivativeMode, PlaneRotationFactory, UnitaryFactory, UnitaryParameterization,
};

/// Unnormalized `Σ_i |λ_i⟩ ⊗ |λ_i⟩` over the eigenbasis of `rho`.
pub fn bell_state(rho: &DensityOperator) -> StateVector {
    let d = rho.dim();
    let v = rho.eigenvectors();
    let amps = (0..d * d)
        .map(|flat| {
            let (r, a) = (flat / d, flat % d);
            (0..d).map(|i| v[(r, i)] * v[(a, i)]).sum::<C64>()
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// `(1_R ⊗ √ρ)|Γ^ρ⟩`.
pub fn canonical_purification(rho: &DensityOperator) -> StateVector {
    let d = rho.dim();
    ComplexMatrix::identity(d)
        .kron(&rho.sqrt())
        .mul_vec(&bell_state(rho))
}

/// The purification fiber of ρ under a unitary family acting on R.
#[derive(Clone, Debug)]
pub struct Fiber {
    rho: DensityOperator,
    param: UnitaryParameterization,
    factory: PlaneRotationFactory,
    // ψ_k = M_k · K reshaped as (R, A) with K = V diag(√λ) Vᵀ.
    kernel: ComplexMatrix,
    sqrt_rho: ComplexMatrix,
    bell: StateVector,
}

impl Fiber {
    pub fn new(rho: DensityOperator, param: UnitaryParameterization) -> Result<Self> {
        if rho.dim() != param.dim() {
            return Err(Error::DimensionMismatch {
                expected: param.dim(),
                found: rho.dim(),
            });
        }
        let d = rho.dim();
        let v = rho.eigenvectors();
        let lam = rho.eigenvalues();
        let kernel = ComplexMatrix::from_fn(d, d, |r, a| {
            (0..d).map(|i| v[(r, i)] * lam[i].sqrt() * v[(a, i)]).sum()
        });
        let sqrt_rho = rho.sqrt();
        let bell = bell_state(&rho);
        Ok(Self {
            rho,
            param,
            factory: PlaneRotationFactory::default(),
            kernel,
            sqrt_rho,
            bell,
        })
    }

    /// Fiber of `σ = U_A ρ U_A†`, whose eigenbasis is `U_A |λ_i⟩` on both
    /// factors. Volumes do not depend on `u_a`.
    pub fn with_basis_rotation(
        rho: &DensityOperator,
        param: UnitaryParameterization,
        u_a: &ComplexMatrix,
    ) -> Result<Self> {
        if u_a.unitarity_error() > 1e-10 {
            return Err(Error::InvalidArgument(
                "basis rotation is not unitary".into(),
            ));
        }
        Self::new(rho.rotated(u_a)?, param)
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.factory = PlaneRotationFactory { mode };
        self
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn param(&self) -> &UnitaryParameterization {
        &self.param
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `|Γ̄^ρ(ξ)⟩ = (U_R(ξ) ⊗ √ρ)|Γ^ρ⟩`.
    pub fn point(&self, xi: &[f64]) -> Result<StateVector> {
        let u = self.factory.unitary(&self.param, xi)?;
        Ok(u.kron(&self.sqrt_rho).mul_vec(&self.bell))
    }

    /// `(∂U_R/∂ξ_k ⊗ √ρ)|Γ^ρ⟩` for every parameter.
    pub fn tangent_vectors(&self, xi: &[f64]) -> Result<Vec<StateVector>> {
        let derivs = self.factory.derivatives(&self.param, xi)?;
        Ok(self.tangents_from(&derivs))
    }

    /// Maps R-side operators `M_k` to `(M_k ⊗ √ρ)|Γ^ρ⟩`.
    pub fn tangents_from(&self, ops: &[ComplexMatrix]) -> Vec<StateVector> {
        ops.iter()
            .map(|m| {
                let prod = m * &self.kernel;
                StateVector::from_amplitudes(prod.as_slice().to_vec())
            })
            .collect()
    }
}

pub fn fiber_point(f: &Fiber, xi: &[f64]) -> Result<StateVector> {
    f.point(xi)
}

pub fn tangent_vectors(f: &Fiber, xi: &[f64]) -> Result<Vec<StateVector>> {
    f.tangent_vectors(xi)
}
