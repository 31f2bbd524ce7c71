//! Gauss–Legendre rules, tensor-product cubature over boxes and a
//! deterministic parallel reduction.

use rayon::prelude::*;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// found by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss–Legendre rule mapped onto `[a, b]`.
#[derive(Clone, Debug)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn on_interval(order: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(order);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|t| half * t).collect(),
        }
    }
}

const CHUNK: usize = 4096;

/// Sums `f(i)` for `i in 0..count` in fixed-size chunks. Chunk partials
/// are combined in index order, so the result does not depend on how many
/// threads evaluate the chunks.
pub fn deterministic_sum<F>(count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            (lo..hi).map(&f).collect::<CompensatedSum>().value()
        })
        .collect();
    partials.into_iter().collect::<CompensatedSum>().value()
}

/// Tensor-product cubature of `f` over the box described by one rule per axis.
///
/// Evaluation errors abort the sum and are returned.
pub fn tensor_product<F, E>(rules: &[Rule1d], f: F) -> Result<f64, E>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Send,
{
    let sizes: Vec<usize> = rules.iter().map(|r| r.nodes.len()).collect();
    let total: usize = sizes.iter().product();
    let chunks = total.div_ceil(CHUNK);
    let partials: Vec<Result<f64, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut point = vec![0.0; rules.len()];
            let mut acc = CompensatedSum::default();
            for flat in lo..hi {
                let mut rem = flat;
                let mut w = 1.0;
                for axis in (0..rules.len()).rev() {
                    let k = rem % sizes[axis];
                    rem /= sizes[axis];
                    point[axis] = rules[axis].nodes[k];
                    w *= rules[axis].weights[k];
                }
                acc.add(w * f(&point)?);
            }
            Ok(acc.value())
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for p in partials {
        acc.add(p?);
    }
    Ok(acc.value())
}

/// Adaptive Gauss–Legendre integration of a scalar function.
///
/// Each panel is integrated with a 15-point rule and compared with the sum
/// over its two halves; panels are bisected until the difference is below
/// their share of `abs_tol`. Returns `(integral, error estimate)`.
pub fn adaptive_gauss_legendre<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> (f64, f64) {
    let (x, w) = gauss_legendre(15);
    let panel = |lo: f64, hi: f64| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        x.iter()
            .zip(&w)
            .map(|(t, wt)| wt * f(mid + half * t))
            .collect::<CompensatedSum>()
            .value()
            * half
    };
    let mut total = CompensatedSum::default();
    let mut err = 0.0;
    let mut stack = vec![(a, b, panel(a, b), abs_tol, 0u32)];
    while let Some((lo, hi, whole, tol, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        let diff = (left + right - whole).abs();
        if diff <= tol || depth >= 60 || mid <= lo || mid >= hi {
            total.add(left + right);
            err += diff;
        } else {
            stack.push((mid, hi, right, 0.5 * tol, depth + 1));
            stack.push((lo, mid, left, 0.5 * tol, depth + 1));
        }
    }
    (total.value(), err)
}
