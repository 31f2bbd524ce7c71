//! Unitaries built as ordered products of plane rotations.
//!
//! `E^(i,j)(φ, ψ, χ)` acts on the `(i, j)` plane. The blocks are grouped as
//! `E_1 = E^(1,2)` and `E_m = E^(m,m+1) E^(m-1,m+1) … E^(1,m+1)`, and the
//! full unitary is `U = e^{iα} E_1 E_2 … E_{N-1}` multiplied left to right.
//! χ angles live only on the `E^(1,m)` factors.
//!
//! Parameter vectors are ordered: every φ ascending by `(j, i)`, then the ψ
//! angles in the same order, then the χ angles by `j`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

const TAU: f64 = 2.0 * PI;

/// Default step of the central finite-difference derivative.
pub const FD_STEP: f64 = 1e-5;

/// Rotation of the `(i, j)` plane, with 1-based `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneRotation {
    pub i: usize,
    pub j: usize,
    pub phi: f64,
    pub psi: f64,
    pub chi: f64,
}

/// Which of the three angles of a plane rotation a parameter drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AngleKind {
    Phi,
    Psi,
    Chi,
}

impl PlaneRotation {
    pub fn new(i: usize, j: usize, phi: f64, psi: f64, chi: f64) -> Self {
        assert!(1 <= i && i < j, "plane indices must satisfy 1 <= i < j");
        Self {
            i,
            j,
            phi,
            psi,
            chi,
        }
    }

    /// The `(ii, ij, ji, jj)` entries of the rotation block.
    pub fn block(&self) -> [C64; 4] {
        let (s, c) = self.phi.sin_cos();
        let e_psi = C64::from_polar(1.0, self.psi);
        let e_chi = C64::from_polar(1.0, self.chi);
        [e_psi * c, e_chi * s, -e_chi.conj() * s, e_psi.conj() * c]
    }

    /// Derivative of the block with respect to one angle.
    pub fn block_derivative(&self, kind: AngleKind) -> [C64; 4] {
        let (s, c) = self.phi.sin_cos();
        let e_psi = C64::from_polar(1.0, self.psi);
        let e_chi = C64::from_polar(1.0, self.chi);
        let i = C64::i();
        match kind {
            AngleKind::Phi => [-e_psi * s, e_chi * c, -e_chi.conj() * c, -e_psi.conj() * s],
            AngleKind::Psi => [i * e_psi * c, ZERO, ZERO, -i * e_psi.conj() * c],
            AngleKind::Chi => [ZERO, i * e_chi * s, i * e_chi.conj() * s, ZERO],
        }
    }

    /// The full `dim × dim` matrix.
    pub fn matrix(&self, dim: usize) -> ComplexMatrix {
        embed(dim, self.i - 1, self.j - 1, self.block(), true)
    }

    /// `∂E/∂angle` as a `dim × dim` matrix; zero outside the rotation block.
    pub fn derivative(&self, dim: usize, kind: AngleKind) -> ComplexMatrix {
        embed(
            dim,
            self.i - 1,
            self.j - 1,
            self.block_derivative(kind),
            false,
        )
    }
}

fn embed(dim: usize, p: usize, q: usize, b: [C64; 4], identity_elsewhere: bool) -> ComplexMatrix {
    let mut m = if identity_elsewhere {
        ComplexMatrix::identity(dim)
    } else {
        ComplexMatrix::zeros(dim, dim)
    };
    m[(p, p)] = b[0];
    m[(p, q)] = b[1];
    m[(q, p)] = b[2];
    m[(q, q)] = b[3];
    m
}

/// Symmetry group whose orbit generates the fiber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    /// Real rotations: only φ angles.
    SpecialOrthogonal(usize),
    /// Qubit unitaries `(φ, ψ, χ)` with α = 0.
    SpecialUnitary2,
    /// All φ, ψ and χ angles; α is a fixed global phase.
    Unitary(usize),
}

/// One named angle and its integration interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub kind: AngleKind,
    pub plane: (usize, usize),
    pub domain: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
struct FactorSlot {
    i: usize,
    j: usize,
    phi: usize,
    psi: Option<usize>,
    chi: Option<usize>,
}

/// Descriptor of a factored unitary family.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryParameterization {
    group: Group,
    dim: usize,
    params: Vec<Param>,
    alpha: f64,
    factors: Vec<FactorSlot>,
}

fn planes_by_column(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (2..=n).flat_map(|j| (1..j).map(move |i| (i, j)))
}

impl UnitaryParameterization {
    /// SO(N): `N(N-1)/2` φ angles. `φ_{1j} ∈ [0, 2π]`, the rest `∈ [0, π]`.
    pub fn special_orthogonal(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "SO(N) needs N >= 2, got {n}"
            )));
        }
        let params = planes_by_column(n)
            .map(|(i, j)| Param {
                name: format!("phi{i}{j}"),
                kind: AngleKind::Phi,
                plane: (i, j),
                domain: (0.0, if i == 1 { TAU } else { PI }),
            })
            .collect();
        Ok(Self::assemble(Group::SpecialOrthogonal(n), n, params, 0.0))
    }

    /// SU(2) with `φ ∈ [0, π/2]`, `ψ, χ ∈ [0, 2π]`.
    pub fn special_unitary_2() -> Self {
        let params = vec![
            Param {
                name: "phi".into(),
                kind: AngleKind::Phi,
                plane: (1, 2),
                domain: (0.0, FRAC_PI_2),
            },
            Param {
                name: "psi".into(),
                kind: AngleKind::Psi,
                plane: (1, 2),
                domain: (0.0, TAU),
            },
            Param {
                name: "chi".into(),
                kind: AngleKind::Chi,
                plane: (1, 2),
                domain: (0.0, TAU),
            },
        ];
        Self::assemble(Group::SpecialUnitary2, 2, params, 0.0)
    }

    /// U(N) with fixed global phase `alpha`; `N² - 1` angles.
    pub fn unitary(n: usize, alpha: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "U(N) needs N >= 2, got {n}"
            )));
        }
        let mut params: Vec<Param> = planes_by_column(n)
            .map(|(i, j)| Param {
                name: format!("phi{i}{j}"),
                kind: AngleKind::Phi,
                plane: (i, j),
                domain: (0.0, FRAC_PI_2),
            })
            .collect();
        params.extend(planes_by_column(n).map(|(i, j)| Param {
            name: format!("psi{i}{j}"),
            kind: AngleKind::Psi,
            plane: (i, j),
            domain: (0.0, TAU),
        }));
        params.extend((2..=n).map(|j| Param {
            name: format!("chi1{j}"),
            kind: AngleKind::Chi,
            plane: (1, j),
            domain: (0.0, TAU),
        }));
        Ok(Self::assemble(Group::Unitary(n), n, params, alpha))
    }

    fn assemble(group: Group, dim: usize, params: Vec<Param>, alpha: f64) -> Self {
        let find = |kind: AngleKind, plane: (usize, usize)| {
            params
                .iter()
                .position(|p| p.kind == kind && p.plane == plane)
        };
        let mut factors = Vec::new();
        for m in 1..dim {
            for i in (1..=m).rev() {
                let plane = (i, m + 1);
                factors.push(FactorSlot {
                    i,
                    j: m + 1,
                    phi: find(AngleKind::Phi, plane).expect("every plane has a φ angle"),
                    psi: find(AngleKind::Psi, plane),
                    chi: find(AngleKind::Chi, plane),
                });
            }
        }
        Self {
            group,
            dim,
            params,
            alpha,
            factors,
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Product of the parameter interval lengths.
    pub fn domain_volume(&self) -> f64 {
        self.params
            .iter()
            .map(|p| p.domain.1 - p.domain.0)
            .product()
    }

    /// Indices of components lying outside their interval. Such points are
    /// still valid inputs since every angle is periodic.
    pub fn out_of_domain(&self, xi: &[f64]) -> Vec<usize> {
        self.params
            .iter()
            .zip(xi)
            .enumerate()
            .filter(|(_, (p, &x))| x < p.domain.0 || x > p.domain.1)
            .map(|(k, _)| k)
            .collect()
    }

    fn check_len(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.params.len() {
            return Err(Error::BadParameterCount {
                expected: self.params.len(),
                found: xi.len(),
            });
        }
        Ok(())
    }

    /// Plane rotations in product order.
    pub fn rotations(&self, xi: &[f64]) -> Result<Vec<PlaneRotation>> {
        self.check_len(xi)?;
        Ok(self
            .factors
            .iter()
            .map(|f| {
                PlaneRotation::new(
                    f.i,
                    f.j,
                    xi[f.phi],
                    f.psi.map_or(0.0, |k| xi[k]),
                    f.chi.map_or(0.0, |k| xi[k]),
                )
            })
            .collect())
    }

    /// `U(ξ)`.
    pub fn build(&self, xi: &[f64]) -> Result<ComplexMatrix> {
        let mats: Vec<ComplexMatrix> = self
            .rotations(xi)?
            .iter()
            .map(|r| r.matrix(self.dim))
            .collect();
        let mut u = ComplexMatrix::identity(self.dim);
        for m in &mats {
            u = &u * m;
        }
        Ok(self.apply_phase(u))
    }

    fn apply_phase(&self, u: ComplexMatrix) -> ComplexMatrix {
        if self.alpha == 0.0 {
            u
        } else {
            u.scale(C64::from_polar(1.0, self.alpha))
        }
    }

    fn factor_of(&self, k: usize) -> (usize, AngleKind) {
        let slot = self
            .factors
            .iter()
            .position(|f| f.phi == k || f.psi == Some(k) || f.chi == Some(k))
            .expect("every parameter belongs to a factor");
        (slot, self.params[k].kind)
    }

    /// Analytic `∂U/∂ξ_k`: the factor holding `ξ_k` is differentiated, all
    /// others stay fixed.
    pub fn derivative(&self, xi: &[f64], k: usize) -> Result<ComplexMatrix> {
        self.check_len(xi)?;
        if k >= self.params.len() {
            return Err(Error::BadParameterIndex {
                index: k,
                count: self.params.len(),
            });
        }
        let rots = self.rotations(xi)?;
        let (slot, kind) = self.factor_of(k);
        let mut out = ComplexMatrix::identity(self.dim);
        for (s, r) in rots.iter().enumerate() {
            let m = if s == slot {
                r.derivative(self.dim, kind)
            } else {
                r.matrix(self.dim)
            };
            out = &out * &m;
        }
        Ok(self.apply_phase(out))
    }

    /// All analytic derivatives at once, sharing prefix and suffix products.
    pub fn derivatives(&self, xi: &[f64]) -> Result<Vec<ComplexMatrix>> {
        let rots = self.rotations(xi)?;
        let mats: Vec<ComplexMatrix> = rots.iter().map(|r| r.matrix(self.dim)).collect();
        let f = mats.len();
        let mut prefix = Vec::with_capacity(f + 1);
        prefix.push(ComplexMatrix::identity(self.dim));
        for m in &mats {
            let next = prefix.last().expect("non-empty") * m;
            prefix.push(next);
        }
        let mut suffix = vec![ComplexMatrix::identity(self.dim); f + 1];
        for s in (0..f).rev() {
            suffix[s] = &mats[s] * &suffix[s + 1];
        }
        (0..self.params.len())
            .map(|k| {
                let (slot, kind) = self.factor_of(k);
                let d = rots[slot].derivative(self.dim, kind);
                let out = &(&prefix[slot] * &d) * &suffix[slot + 1];
                Ok(self.apply_phase(out))
            })
            .collect()
    }

    /// Central difference `(U(ξ + h e_k) - U(ξ - h e_k)) / 2h`.
    pub fn finite_difference(&self, xi: &[f64], k: usize, h: f64) -> Result<ComplexMatrix> {
        self.check_len(xi)?;
        if k >= self.params.len() {
            return Err(Error::BadParameterIndex {
                index: k,
                count: self.params.len(),
            });
        }
        let mut plus = xi.to_vec();
        let mut minus = xi.to_vec();
        plus[k] += h;
        minus[k] -= h;
        let up = self.build(&plus)?;
        let down = self.build(&minus)?;
        let n = self.dim;
        Ok(ComplexMatrix::from_fn(n, n, |i, j| {
            (up[(i, j)] - down[(i, j)]) / (2.0 * h)
        }))
    }
}

/// How tangent directions are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum DerivativeMode {
    #[default]
    Analytic,
    /// Central differences with the given step; kept as a self-check.
    FiniteDifference { step: f64 },
}

/// Source of `U(ξ)` and its parameter derivatives.
pub trait UnitaryFactory: Sync {
    fn unitary(&self, p: &UnitaryParameterization, xi: &[f64]) -> Result<ComplexMatrix>;
    fn derivatives(&self, p: &UnitaryParameterization, xi: &[f64]) -> Result<Vec<ComplexMatrix>>;
}

/// The plane-rotation product with the chosen derivative mode.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlaneRotationFactory {
    pub mode: DerivativeMode,
}

impl UnitaryFactory for PlaneRotationFactory {
    fn unitary(&self, p: &UnitaryParameterization, xi: &[f64]) -> Result<ComplexMatrix> {
        p.build(xi)
    }

    fn derivatives(&self, p: &UnitaryParameterization, xi: &[f64]) -> Result<Vec<ComplexMatrix>> {
        match self.mode {
            DerivativeMode::Analytic => p.derivatives(xi),
            DerivativeMode::FiniteDifference { step } => (0..p.param_count())
                .map(|k| p.finite_difference(xi, k, step))
                .collect(),
        }
    }
}

/// `U(ξ)` for the given parameterization.
pub fn build_unitary(p: &UnitaryParameterization, xi: &[f64]) -> Result<ComplexMatrix> {
    p.build(xi)
}

/// Analytic `∂U/∂ξ_k`.
pub fn unitary_derivative(
    p: &UnitaryParameterization,
    xi: &[f64],
    k: usize,
) -> Result<ComplexMatrix> {
    p.derivative(xi, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(m: &ComplexMatrix) -> bool {
        m.as_slice().iter().all(|z| z.im.abs() <= 1e-14)
    }

    /// Closed-form SO(3) matrix written out entry by entry.
    fn so3_explicit(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let (sc, cc) = c.sin_cos();
        [
            [ca * cb - sa * sb * sc, cc * sa, ca * sb + cb * sa * sc],
            [-cb * sa - ca * sb * sc, ca * cc, -sa * sb + ca * cb * sc],
            [-cc * sb, -sc, cb * cc],
        ]
    }

    #[test]
    fn so3_parameter_layout() {
        let p = UnitaryParameterization::special_orthogonal(3).unwrap();
        let names: Vec<&str> = p.params().iter().map(|q| q.name.as_str()).collect();
        assert_eq!(names, ["phi12", "phi13", "phi23"]);
        let domains: Vec<(f64, f64)> = p.params().iter().map(|q| q.domain).collect();
        assert_eq!(domains, [(0.0, TAU), (0.0, TAU), (0.0, PI)]);
        assert_eq!(p.alpha(), 0.0);
        let p5 = UnitaryParameterization::special_orthogonal(5).unwrap();
        assert_eq!(p5.param_count(), 10);
    }

    #[test]
    fn unitary_parameter_counts() {
        for n in 2..6 {
            let p = UnitaryParameterization::unitary(n, 0.3).unwrap();
            assert_eq!(p.param_count(), n * n - 1);
        }
        let su2 = UnitaryParameterization::special_unitary_2();
        let names: Vec<&str> = su2.params().iter().map(|q| q.name.as_str()).collect();
        assert_eq!(names, ["phi", "psi", "chi"]);
    }

    #[test]
    fn so3_zero_is_identity() {
        let p = UnitaryParameterization::special_orthogonal(3).unwrap();
        let u = build_unitary(&p, &[0.0; 3]).unwrap();
        assert_eq!(u, ComplexMatrix::identity(3));
    }

    #[test]
    fn so3_matches_explicit_matrix() {
        let p = UnitaryParameterization::special_orthogonal(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let xi = [
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.0..PI),
            ];
            let u = build_unitary(&p, &xi).unwrap();
            let e = so3_explicit(xi[0], xi[1], xi[2]);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((u[(i, j)] - C64::new(e[i][j], 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn su2_quarter_turn() {
        let p = UnitaryParameterization::special_unitary_2();
        let u = build_unitary(&p, &[FRAC_PI_2, 0.0, 0.0]).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn plane_rotation_entries() {
        let r = PlaneRotation::new(2, 4, 0.4, 0.9, -1.3);
        let m = r.matrix(5);
        let (s, c) = 0.4f64.sin_cos();
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(2, 2)], C64::new(1.0, 0.0));
        assert_eq!(m[(4, 4)], C64::new(1.0, 0.0));
        assert!((m[(1, 1)] - C64::from_polar(c, 0.9)).norm() < 1e-15);
        assert!((m[(1, 3)] - C64::from_polar(s, -1.3)).norm() < 1e-15);
        assert!((m[(3, 1)] + C64::from_polar(s, 1.3)).norm() < 1e-15);
        assert!((m[(3, 3)] - C64::from_polar(c, -0.9)).norm() < 1e-15);
        assert!(m.unitarity_error() < 1e-12);
    }

    #[test]
    fn so2_generator() {
        let p = UnitaryParameterization::special_orthogonal(2).unwrap();
        let d = unitary_derivative(&p, &[0.0], 0).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(d.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn su2_psi_derivative() {
        let p = UnitaryParameterization::special_unitary_2();
        let (phi, psi) = (0.3f64, 0.2f64);
        let d = unitary_derivative(&p, &[phi, psi, 0.1], 1).unwrap();
        let i = C64::i();
        assert!((d[(0, 0)] - i * C64::from_polar(phi.cos(), psi)).norm() < 1e-15);
        assert!((d[(1, 1)] + i * C64::from_polar(phi.cos(), -psi)).norm() < 1e-15);
        assert_eq!(d[(0, 1)], ZERO);
        assert_eq!(d[(1, 0)], ZERO);
    }

    #[test]
    fn derivative_errors() {
        let p = UnitaryParameterization::special_orthogonal(3).unwrap();
        assert!(matches!(
            p.derivative(&[0.0; 3], 3),
            Err(Error::BadParameterIndex { index: 3, count: 3 })
        ));
        assert!(matches!(
            build_unitary(&p, &[0.0; 2]),
            Err(Error::BadParameterCount {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn out_of_domain_is_flagged_not_rejected() {
        let p = UnitaryParameterization::special_orthogonal(3).unwrap();
        let xi = [7.0, 1.0, 4.0];
        assert_eq!(p.out_of_domain(&xi), vec![0, 2]);
        assert!(build_unitary(&p, &xi).unwrap().unitarity_error() < 1e-12);
    }

    #[test]
    fn batched_derivatives_match_single() {
        let p = UnitaryParameterization::unitary(4, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi: Vec<f64> = (0..p.param_count())
            .map(|_| rng.gen_range(0.0..TAU))
            .collect();
        let all = p.derivatives(&xi).unwrap();
        for (k, d) in all.iter().enumerate() {
            assert!(d.max_abs_diff(&p.derivative(&xi, k).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn so_n_is_real_with_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..7 {
            let p = UnitaryParameterization::special_orthogonal(n).unwrap();
            let xi: Vec<f64> = (0..p.param_count())
                .map(|_| rng.gen_range(-4.0..4.0))
                .collect();
            let u = build_unitary(&p, &xi).unwrap();
            assert!(real(&u));
            assert!((u.determinant().unwrap() - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }
}
