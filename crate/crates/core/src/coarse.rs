//! Coarse-graining of the qutrit eigenvalue simplex.
//!
//! The simplex is sampled on an `ℓ × ℓ` grid in `(η1, η2) ∈ [0,1]²` through
//! `λ1 = 1 - √η1`, `λ2 = √η1 (1 - η2)`, `λ3 = √η1 η2`, an equal-area map.
//! Each cell center is scored by a normalized measure, the unit interval is
//! cut into `k` bins and every bin reports its share of cells and the mean
//! normalized von Neumann entropy of its members.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{linear_entropy_unchecked, von_neumann_unchecked};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridCell {
    pub eta: [f64; 2],
    pub lambda: [f64; 3],
    pub in_weyl_chamber: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexGrid {
    ell: usize,
    cells: Vec<GridCell>,
}

/// `(λ1, λ2, λ3)` for a point of the η square.
pub fn eta_to_lambda(eta1: f64, eta2: f64) -> [f64; 3] {
    let r = eta1.sqrt();
    [1.0 - r, r * (1.0 - eta2), r * eta2]
}

/// `η1 ∈ (1/4, 1]` and `η2 ∈ (1/2, 1]`.
pub fn in_weyl_chamber(eta1: f64, eta2: f64) -> bool {
    eta1 > 0.25 && eta1 <= 1.0 && eta2 > 0.5 && eta2 <= 1.0
}

/// Cell centers `((a + ½)/ℓ, (b + ½)/ℓ)`, row-major in `a`.
pub fn build_grid(ell: usize) -> Result<SimplexGrid> {
    if ell < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs ell >= 2, got {ell}"
        )));
    }
    let l = ell as f64;
    let cells = (0..ell * ell)
        .map(|idx| {
            let (a, b) = (idx / ell, idx % ell);
            let eta = [(a as f64 + 0.5) / l, (b as f64 + 0.5) / l];
            GridCell {
                eta,
                lambda: eta_to_lambda(eta[0], eta[1]),
                in_weyl_chamber: in_weyl_chamber(eta[0], eta[1]),
            }
        })
        .collect();
    Ok(SimplexGrid { ell, cells })
}

impl SimplexGrid {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Volume,
    Linear,
    VonNeumann,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Volume, Measure::Linear, Measure::VonNeumann];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Volume => "volume",
            Self::Linear => "linear",
            Self::VonNeumann => "von-neumann",
        }
    }

    /// Measure normalized to 1 at the uniform qutrit spectrum.
    pub fn evaluate(self, lambda: &[f64; 3]) -> f64 {
        match self {
            Self::Volume => {
                let [a, b, c] = *lambda;
                ((a + b) * (a + c) * (b + c)).max(0.0).sqrt() / (2.0f64 / 3.0).powf(1.5)
            }
            Self::Linear => linear_entropy_unchecked(lambda) * 1.5,
            Self::VonNeumann => svn_norm(lambda),
        }
    }
}

fn svn_norm(lambda: &[f64; 3]) -> f64 {
    von_neumann_unchecked(lambda) / 3f64.log2()
}

/// Bin of `x ∈ [0, 1]` among `k` half-open bins, the last one closed.
/// Returned index is 1-based.
pub fn bin_index(x: f64, k: usize) -> usize {
    let raw = (x * k as f64).floor();
    if raw < 0.0 {
        1
    } else {
        (raw as usize).min(k - 1) + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinSummary {
    /// 1-based.
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub fraction: f64,
    /// `None` for empty bins.
    pub mean_svn_norm: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub eta1: f64,
    pub eta2: f64,
    pub lambda: [f64; 3],
    pub measure_value: f64,
    pub svn_norm: f64,
    pub bin_index: usize,
    pub in_chamber: bool,
    pub counted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoarseGrainReport {
    pub measure: Measure,
    pub k: usize,
    pub ell: usize,
    pub weyl_only: bool,
    pub counted: usize,
    pub bins: Vec<BinSummary>,
    pub cells: Vec<CellRecord>,
}

/// Top bins that together reach a coverage threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coverage {
    /// 1-based indices, highest first.
    pub bins: Vec<usize>,
    pub coverage: f64,
    /// Mean normalized von Neumann entropy over the cells of those bins.
    pub mean_svn_norm: f64,
}

pub fn run_experiment(
    grid: &SimplexGrid,
    measure: Measure,
    k: usize,
    weyl_only: bool,
) -> Result<CoarseGrainReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("bin count must be positive".into()));
    }
    let cells: Vec<CellRecord> = grid
        .cells()
        .par_iter()
        .map(|c| {
            let value = measure.evaluate(&c.lambda);
            CellRecord {
                eta1: c.eta[0],
                eta2: c.eta[1],
                lambda: c.lambda,
                measure_value: value,
                svn_norm: svn_norm(&c.lambda),
                bin_index: bin_index(value, k),
                in_chamber: c.in_weyl_chamber,
                counted: !weyl_only || c.in_weyl_chamber,
            }
        })
        .collect();

    let mut counts = vec![0usize; k];
    let mut sums = vec![crate::quadrature::CompensatedSum::default(); k];
    for c in cells.iter().filter(|c| c.counted) {
        counts[c.bin_index - 1] += 1;
        sums[c.bin_index - 1].add(c.svn_norm);
    }
    let counted: usize = counts.iter().sum();
    let bins = (0..k)
        .map(|a| BinSummary {
            index: a + 1,
            lo: a as f64 / k as f64,
            hi: (a + 1) as f64 / k as f64,
            count: counts[a],
            fraction: if counted > 0 {
                counts[a] as f64 / counted as f64
            } else {
                0.0
            },
            mean_svn_norm: (counts[a] > 0).then(|| sums[a].value() / counts[a] as f64),
        })
        .collect();
    Ok(CoarseGrainReport {
        measure,
        k,
        ell: grid.ell(),
        weyl_only,
        counted,
        bins,
        cells,
    })
}

impl CoarseGrainReport {
    /// Smallest run of top bins whose fractions reach `threshold`.
    pub fn top_bins_covering(&self, threshold: f64) -> Coverage {
        let mut chosen = Vec::new();
        let mut coverage = 0.0;
        let mut count = 0usize;
        let mut weighted = crate::quadrature::CompensatedSum::default();
        for b in self.bins.iter().rev() {
            chosen.push(b.index);
            coverage += b.fraction;
            if let Some(m) = b.mean_svn_norm {
                count += b.count;
                weighted.add(m * b.count as f64);
            }
            if coverage >= threshold {
                break;
            }
        }
        Coverage {
            bins: chosen,
            coverage,
            mean_svn_norm: if count > 0 {
                weighted.value() / count as f64
            } else {
                0.0
            },
        }
    }

    /// Share of counted cells in bins whose mean entropy exceeds `level`.
    pub fn fraction_above(&self, level: f64) -> f64 {
        self.bins
            .iter()
            .filter(|b| b.mean_svn_norm.is_some_and(|m| m > level))
            .map(|b| b.fraction)
            .sum()
    }

    pub fn fraction_total(&self) -> f64 {
        self.bins.iter().map(|b| b.fraction).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = build_grid(5).unwrap();
        assert_eq!(g.cells().len(), 25);
        for c in g.cells() {
            assert!((c.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(c.lambda.iter().all(|&x| x >= 0.0));
        }
        assert_eq!(g.cells()[0].eta, [0.1, 0.1]);
        let last = g.cells()[24];
        assert!((last.eta[0] - 0.9).abs() < 1e-15 && (last.eta[1] - 0.9).abs() < 1e-15);
        let want = [
            1.0 - 0.9f64.sqrt(),
            0.9f64.sqrt() * 0.1,
            0.9f64.sqrt() * 0.9,
        ];
        for (a, b) in last.lambda.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((last.lambda[0] - 0.05132).abs() < 1e-5);
        assert!((last.lambda[1] - 0.09487).abs() < 1e-5);
        assert!((last.lambda[2] - 0.85381).abs() < 1e-5);
        assert!(matches!(build_grid(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn chamber_bounds_are_open_below() {
        assert!(!in_weyl_chamber(0.25, 0.75));
        assert!(!in_weyl_chamber(0.5, 0.5));
        assert!(in_weyl_chamber(0.2500001, 0.5000001));
        assert!(in_weyl_chamber(1.0, 1.0));
    }

    #[test]
    fn bin_edges() {
        assert_eq!(bin_index(0.0, 10), 1);
        assert_eq!(bin_index(0.1, 10), 2);
        assert_eq!(bin_index(0.0999, 10), 1);
        assert_eq!(bin_index(1.0, 10), 10);
        assert_eq!(bin_index(0.95, 10), 10);
        assert_eq!(bin_index(-1e-16, 10), 1);
    }

    #[test]
    fn single_bin() {
        let g = build_grid(20).unwrap();
        let r = run_experiment(&g, Measure::Volume, 1, false).unwrap();
        assert_eq!(r.bins.len(), 1);
        assert_eq!(r.bins[0].fraction, 1.0);
        let mean: f64 = r.cells.iter().map(|c| c.svn_norm).sum::<f64>() / r.cells.len() as f64;
        assert!((r.bins[0].mean_svn_norm.unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn fractions_sum_to_one() {
        let g = build_grid(40).unwrap();
        for m in Measure::ALL {
            for weyl in [false, true] {
                let r = run_experiment(&g, m, 7, weyl).unwrap();
                assert!((r.fraction_total() - 1.0).abs() < 1e-12);
                let n = r.cells.iter().filter(|c| c.counted).count();
                assert_eq!(n, r.counted);
            }
        }
    }

    #[test]
    fn measures_are_one_at_uniform() {
        let u = [1.0 / 3.0; 3];
        for m in Measure::ALL {
            assert!((m.evaluate(&u) - 1.0).abs() < 1e-14, "{m:?}");
        }
        for m in Measure::ALL {
            assert!(m.evaluate(&[1.0, 0.0, 0.0]).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic() {
        let g = build_grid(30).unwrap();
        let a = run_experiment(&g, Measure::Volume, 10, true).unwrap();
        let b = run_experiment(&g, Measure::Volume, 10, true).unwrap();
        assert_eq!(a, b);
    }
}
