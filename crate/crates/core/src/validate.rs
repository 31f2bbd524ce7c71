//! Cross-checks between independent routes: metric vs closed-form tables,
//! analytic vs finite-difference derivatives, fiber round trips, numeric vs
//! closed-form volumes and the SO(4) product law.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{partial_trace_r, DensityOperator};
use crate::metric::{
    closed_form_volume, integrate_raw, integrate_volume, normalized_closed_form, reference,
    ClosedFormGroup, GramMetric, Integration,
};
use crate::purification::Fiber;
use crate::unitary::{PlaneRotationFactory, UnitaryFactory, UnitaryParameterization, FD_STEP};

pub const METRIC_TOL: f64 = 1e-9;
pub const DERIVATIVE_TOL: f64 = 5e-9;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const VOLUME_REL_TOL: f64 = 1e-3;
pub const SO4_SPREAD_TOL: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Metric,
    Derivatives,
    PartialTrace,
    Volume,
    So4Proportionality,
}

impl Suite {
    pub const DEFAULT: [Suite; 4] = [
        Suite::Metric,
        Suite::Derivatives,
        Suite::PartialTrace,
        Suite::Volume,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Metric => "metric",
            Self::Derivatives => "derivatives",
            Self::PartialTrace => "partial-trace",
            Self::Volume => "volume",
            Self::So4Proportionality => "so4-proportionality",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub checks: usize,
}

impl SuiteOutcome {
    fn new(suite: Suite, max_error: f64, tolerance: f64, checks: usize) -> Self {
        Self {
            suite,
            passed: max_error.is_finite() && max_error <= tolerance,
            max_error,
            tolerance,
            checks,
        }
    }
}

/// Flat Dirichlet sample of length `d`.
pub fn random_spectrum<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let mut v: Vec<f64> = e.iter().map(|x| x / s).collect();
    // absorb rounding so the entries sum to one
    let drift: f64 = 1.0 - v.iter().sum::<f64>();
    v[0] += drift;
    v
}

/// Uniform point of the parameterization's box.
pub fn random_point<R: Rng>(rng: &mut R, p: &UnitaryParameterization) -> Vec<f64> {
    p.params()
        .iter()
        .map(|q| rng.gen_range(q.domain.0..q.domain.1))
        .collect()
}

fn gram_with(factory: &dyn UnitaryFactory, f: &Fiber, xi: &[f64]) -> Result<GramMetric> {
    let derivs = factory.derivatives(f.param(), xi)?;
    Ok(GramMetric::from_tangents(&f.tangents_from(&derivs), xi))
}

/// Largest entrywise gap between computed Gram matrices and the closed-form
/// SO(3) and SU(2) tables over `samples` random `(λ, ξ)` each.
pub fn metric_max_error(factory: &dyn UnitaryFactory, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let so3 = UnitaryParameterization::special_orthogonal(3)?;
    let su2 = UnitaryParameterization::special_unitary_2();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let l = random_spectrum(&mut rng, 3);
        let lam = [l[0], l[1], l[2]];
        let x = random_point(&mut rng, &so3);
        let xi = [x[0], x[1], x[2]];
        let (lam_c, xi_c) = reference::so3_table_chart(&lam, &xi);
        let fiber = Fiber::new(DensityOperator::from_spectrum(&lam_c)?, so3.clone())?;
        let g = gram_with(factory, &fiber, &xi_c)?;
        let table = reference::so3_table(&lam, &xi);
        for (i, row) in table.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                worst = worst.max((g.matrix()[(i, j)] - want).norm());
            }
        }

        let l = random_spectrum(&mut rng, 2);
        let lam = [l[0], l[1]];
        let xi = random_point(&mut rng, &su2);
        let fiber = Fiber::new(DensityOperator::from_spectrum(&lam)?, su2.clone())?;
        let g = gram_with(factory, &fiber, &xi)?;
        let table = reference::su2_table(&lam, &[xi[0], xi[1], xi[2]]);
        worst = worst.max(g.matrix().transpose().max_abs_diff(&table));
    }
    Ok(worst)
}

/// Analytic vs central-difference derivatives for SO(N) and U(N), N ≤ 6.
pub fn derivative_max_error(samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let n = 2 + s % 5;
        let p = if s % 2 == 0 {
            UnitaryParameterization::special_orthogonal(n)?
        } else {
            UnitaryParameterization::unitary(n, rng.gen_range(0.0..2.0 * PI))?
        };
        let xi = random_point(&mut rng, &p);
        let analytic = p.derivatives(&xi)?;
        for (k, a) in analytic.iter().enumerate() {
            worst = worst.max(a.max_abs_diff(&p.finite_difference(&xi, k, FD_STEP)?));
        }
    }
    Ok(worst)
}

/// `max |Tr_R |Γ̄⟩⟨Γ̄| - ρ|` over random ρ (rotated eigenbases included) and ξ.
pub fn round_trip_max_error(samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let d = 2 + s % 3;
        let p = UnitaryParameterization::unitary(d, 0.0)?;
        let spectrum = random_spectrum(&mut rng, d);
        let basis = p.build(&random_point(&mut rng, &p))?;
        let rho = DensityOperator::from_spectrum(&spectrum)?.rotated(&basis)?;
        let group = if s % 2 == 0 {
            UnitaryParameterization::special_orthogonal(d)?
        } else {
            p.clone()
        };
        let f = Fiber::new(rho.clone(), group)?;
        let xi = random_point(&mut rng, f.param());
        let point = f.point(&xi)?;
        worst = worst.max((point.norm_sqr() - 1.0).abs());
        worst = worst.max(partial_trace_r(&point, d, d)?.max_abs_diff(rho.matrix()));
    }
    Ok(worst)
}

/// Relative gap between normalized quadrature volume and the normalized
/// closed form, for SO(3) and SU(2).
pub fn volume_max_rel_error(spectra: usize, budget: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let cases = [
        (
            UnitaryParameterization::special_orthogonal(3)?,
            ClosedFormGroup::So3,
        ),
        (
            UnitaryParameterization::special_unitary_2(),
            ClosedFormGroup::Su2,
        ),
    ];
    for (param, group) in cases {
        let d = param.dim();
        let reference = integrate_raw(
            &Fiber::new(DensityOperator::maximally_mixed(d), param.clone())?,
            Integration::Quadrature,
            budget,
        )?
        .0;
        for _ in 0..spectra {
            let spectrum = random_spectrum(&mut rng, d);
            let f = Fiber::new(DensityOperator::from_spectrum(&spectrum)?, param.clone())?;
            let numeric = integrate_raw(&f, Integration::Quadrature, budget)?.0 / reference;
            let exact = normalized_closed_form(group, &spectrum)?;
            worst = worst.max((numeric - exact).abs() / exact);
        }
    }
    Ok(worst)
}

/// Monte Carlo raw SO(4) volume divided by the pairwise product formula,
/// one independent seed per spectrum.
pub fn so4_ratios(spectra: usize, budget: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let param = UnitaryParameterization::special_orthogonal(4)?;
    (0..spectra)
        .map(|s| {
            let spectrum = random_spectrum(&mut rng, 4);
            let f = Fiber::new(DensityOperator::from_spectrum(&spectrum)?, param.clone())?;
            let (raw, _) = integrate_raw(
                &f,
                Integration::MonteCarlo {
                    seed: seed.wrapping_add(s as u64 + 1),
                },
                budget,
            )?;
            Ok(raw / closed_form_volume(ClosedFormGroup::SoN, &spectrum)?)
        })
        .collect()
}

/// `(max - min) / mean`.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean
}

#[derive(Clone, Copy, Debug)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Monte Carlo samples per spectrum for the SO(4) suite.
    pub so4_budget: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 20240917,
            so4_budget: 1_000_000,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &ValidateOptions) -> Result<SuiteOutcome> {
    run_suite_with(suite, opts, &PlaneRotationFactory::default())
}

/// Runs one suite; the metric suite draws its unitaries from `factory`.
pub fn run_suite_with(
    suite: Suite,
    opts: &ValidateOptions,
    factory: &dyn UnitaryFactory,
) -> Result<SuiteOutcome> {
    Ok(match suite {
        Suite::Metric => SuiteOutcome::new(
            suite,
            metric_max_error(factory, 100, opts.seed)?,
            METRIC_TOL,
            200,
        ),
        Suite::Derivatives => SuiteOutcome::new(
            suite,
            derivative_max_error(1000, opts.seed)?,
            DERIVATIVE_TOL,
            1000,
        ),
        Suite::PartialTrace => SuiteOutcome::new(
            suite,
            round_trip_max_error(100, opts.seed)?,
            ROUND_TRIP_TOL,
            100,
        ),
        Suite::Volume => SuiteOutcome::new(
            suite,
            volume_max_rel_error(5, 32 * 32 * 32, opts.seed)?,
            VOLUME_REL_TOL,
            10,
        ),
        Suite::So4Proportionality => {
            let ratios = so4_ratios(10, opts.so4_budget, opts.seed)?;
            SuiteOutcome::new(
                suite,
                relative_spread(&ratios),
                SO4_SPREAD_TOL,
                ratios.len(),
            )
        }
    })
}

/// Quadrature volume of a fiber next to its closed form, both normalized.
pub fn compare_volume(f: &Fiber, group: ClosedFormGroup, budget: usize) -> Result<(f64, f64)> {
    let numeric = integrate_volume(f, Integration::Quadrature, budget)?.normalized;
    Ok((
        numeric,
        normalized_closed_form(group, f.rho().eigenvalues())?,
    ))
}
