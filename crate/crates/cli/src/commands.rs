use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use fibervol::coarse::{build_grid, run_experiment, Measure};
use fibervol::entropy::EntropyReport;
use fibervol::metric::{
    closed_form_volume, gram_metric, integrate_volume, normalized_closed_form, ClosedFormGroup,
    Integration, DEFAULT_QUADRATURE_ORDER,
};
use fibervol::report::{
    fmt_f64, write_bins_csv, write_cells_csv, write_curve_csv, write_scaling_csv,
};
use fibervol::scaling::{curve_samples, scaling_points, ScalingPoint};
use fibervol::validate::{run_suite, Suite, ValidateOptions};
use fibervol::{Fiber, UnitaryParameterization};
use serde::Serialize;

use crate::input::{load_state, parse_list};
use crate::{
    CliError, CoarseArgs, EntropyArgs, Format, GroupArg, MeasureArg, MethodArg, MetricArgs,
    OutArgs, ScalingArgs, SuiteArg, ValidateArgs, VolumeArgs,
};

const MC_DEFAULT_BUDGET: usize = 1_000_000;

fn group_for(
    g: GroupArg,
    d: usize,
) -> Result<(UnitaryParameterization, ClosedFormGroup), CliError> {
    let need = |n: usize| {
        if d == n {
            Ok(())
        } else {
            Err(CliError::mismatch(format!(
                "group {g:?} needs a {n}-level state, got d = {d}"
            )))
        }
    };
    Ok(match g {
        GroupArg::So3 => {
            need(3)?;
            (
                UnitaryParameterization::special_orthogonal(3)?,
                ClosedFormGroup::So3,
            )
        }
        GroupArg::Su2 => {
            need(2)?;
            (
                UnitaryParameterization::special_unitary_2(),
                ClosedFormGroup::Su2,
            )
        }
        GroupArg::Son => (
            UnitaryParameterization::special_orthogonal(d)?,
            ClosedFormGroup::SoN,
        ),
    })
}

fn group_name(g: GroupArg) -> &'static str {
    match g {
        GroupArg::So3 => "so3",
        GroupArg::Su2 => "su2",
        GroupArg::Son => "son",
    }
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s += &r.join(",");
        s.push('\n');
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::unwritable(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::unwritable(format!("{}: {e}", path.display())))
}

/// Creates `path`, lets `body` fill it and reports it on stderr.
fn write_with(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut w = create(path)?;
    body(&mut w)?;
    w.flush()
        .map_err(|e| CliError::unwritable(format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_text(w: &mut BufWriter<File>, text: &str) -> Result<(), CliError> {
    w.write_all(text.as_bytes())
        .map_err(|e| CliError::unwritable(e.to_string()))
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes the rendered text to `--output` or stdout.
fn emit(
    out: &OutArgs,
    csv: impl FnOnce() -> String,
    value: &impl Serialize,
) -> Result<(), CliError> {
    let text = match out.format {
        Format::Csv => csv(),
        Format::Json => json(value),
    };
    match &out.output {
        Some(p) => write_with(p, |w| write_text(w, &text)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct VolumeOutput {
    group: &'static str,
    dim: usize,
    method: &'static str,
    raw: f64,
    normalized: f64,
    estimator_error: f64,
    closed_form: f64,
    /// `raw / closed_form`, the constant angular prefactor.
    prefactor: Option<f64>,
}

pub fn volume(a: &VolumeArgs) -> Result<(), CliError> {
    let rho = load_state(a.state.spectrum.as_deref(), a.state.matrix.as_deref())?;
    let (param, cf) = group_for(a.group, rho.dim())?;
    let n = param.param_count();
    let method = a.method.unwrap_or(if n <= 3 {
        MethodArg::Quadrature
    } else {
        MethodArg::MonteCarlo
    });
    let closed = closed_form_volume(cf, rho.eigenvalues())?;
    let dim = rho.dim();
    let out = match method {
        MethodArg::ClosedForm => VolumeOutput {
            group: group_name(a.group),
            dim,
            method: "closed-form",
            raw: closed,
            normalized: normalized_closed_form(cf, rho.eigenvalues())?,
            estimator_error: 0.0,
            closed_form: closed,
            prefactor: None,
        },
        MethodArg::Quadrature | MethodArg::MonteCarlo => {
            let (integration, budget) = if method == MethodArg::Quadrature {
                let default = if n <= 3 {
                    DEFAULT_QUADRATURE_ORDER.pow(n as u32)
                } else {
                    MC_DEFAULT_BUDGET
                };
                (Integration::Quadrature, a.budget.unwrap_or(default))
            } else {
                (
                    Integration::MonteCarlo { seed: a.seed },
                    a.budget.unwrap_or(MC_DEFAULT_BUDGET),
                )
            };
            let r = integrate_volume(&Fiber::new(rho, param)?, integration, budget)?;
            VolumeOutput {
                group: group_name(a.group),
                dim,
                method: r.method.as_str(),
                raw: r.raw,
                normalized: r.normalized,
                estimator_error: r.estimator_error,
                closed_form: closed,
                prefactor: (closed > 0.0).then(|| r.raw / closed),
            }
        }
    };
    emit(
        &a.out,
        || {
            csv_table(
                &[
                    "group",
                    "dim",
                    "method",
                    "raw",
                    "normalized",
                    "estimator_error",
                    "closed_form",
                    "prefactor",
                ],
                &[vec![
                    out.group.into(),
                    out.dim.to_string(),
                    out.method.into(),
                    fmt_f64(out.raw),
                    fmt_f64(out.normalized),
                    fmt_f64(out.estimator_error),
                    fmt_f64(out.closed_form),
                    opt(out.prefactor),
                ]],
            )
        },
        &out,
    )
}

#[derive(Serialize)]
struct MetricOutput {
    group: &'static str,
    params: Vec<String>,
    point: Vec<f64>,
    g_re: Vec<Vec<f64>>,
    g_im: Vec<Vec<f64>>,
    determinant: f64,
    volume_element: f64,
}

pub fn metric(a: &MetricArgs) -> Result<(), CliError> {
    let rho = load_state(a.state.spectrum.as_deref(), a.state.matrix.as_deref())?;
    let (param, _) = group_for(a.group, rho.dim())?;
    let xi = match &a.point {
        Some(s) => parse_list::<f64>(s, "point").map_err(|e| CliError {
            code: CliError::FAILED,
            message: e,
        })?,
        None => vec![0.0; param.param_count()],
    };
    let names: Vec<String> = param.params().iter().map(|p| p.name.clone()).collect();
    for k in param.out_of_domain(&xi) {
        eprintln!(
            "fibervol: warning: {} = {} lies outside its integration interval",
            names[k], xi[k]
        );
    }
    let g = gram_metric(&Fiber::new(rho, param)?, &xi)?;
    let n = g.n();
    let m = g.matrix();
    let out = MetricOutput {
        group: group_name(a.group),
        params: names,
        point: xi.clone(),
        g_re: (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].re).collect())
            .collect(),
        g_im: (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].im).collect())
            .collect(),
        determinant: g.determinant()?,
        volume_element: g.volume_element()?,
    };
    emit(
        &a.out,
        || {
            let mut rows = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    rows.push(vec![
                        "g".into(),
                        out.params[i].clone(),
                        out.params[j].clone(),
                        fmt_f64(out.g_re[i][j]),
                        fmt_f64(out.g_im[i][j]),
                    ]);
                }
            }
            for (q, v) in [
                ("determinant", out.determinant),
                ("volume_element", out.volume_element),
            ] {
                rows.push(vec![
                    q.into(),
                    String::new(),
                    String::new(),
                    fmt_f64(v),
                    fmt_f64(0.0),
                ]);
            }
            csv_table(&["quantity", "row", "col", "re", "im"], &rows)
        },
        &out,
    )
}

pub fn entropy(a: &EntropyArgs) -> Result<(), CliError> {
    let rho = load_state(a.state.spectrum.as_deref(), a.state.matrix.as_deref())?;
    let d = rho.dim();
    let g = a
        .group
        .unwrap_or(if d == 2 { GroupArg::Su2 } else { GroupArg::Son });
    let (_, cf) = group_for(g, d)?;
    let lambda = rho.eigenvalues();
    let r = EntropyReport::from_spectrum(lambda, Some(normalized_closed_form(cf, lambda)?))?;
    emit(
        &a.out,
        || {
            csv_table(
                &[
                    "s_vn",
                    "s_lin",
                    "s_vn_norm",
                    "s_lin_norm",
                    "v_norm",
                    "delta_i",
                ],
                &[vec![
                    fmt_f64(r.s_vn),
                    fmt_f64(r.s_lin),
                    fmt_f64(r.s_vn_norm),
                    fmt_f64(r.s_lin_norm),
                    opt(r.v_norm),
                    opt(r.delta_i),
                ]],
            )
        },
        &r,
    )
}

pub fn coarse_grain(a: &CoarseArgs) -> Result<(), CliError> {
    let grid = build_grid(a.ell)?;
    let measures: Vec<Measure> = match a.measure {
        MeasureArg::All => Measure::ALL.to_vec(),
        MeasureArg::Volume => vec![Measure::Volume],
        MeasureArg::Linear => vec![Measure::Linear],
        MeasureArg::VonNeumann => vec![Measure::VonNeumann],
    };
    fs::create_dir_all(&a.output)
        .map_err(|e| CliError::unwritable(format!("{}: {e}", a.output.display())))?;

    // the entropy level comes from the volume measure's top bins
    let volume = run_experiment(&grid, Measure::Volume, a.k, a.weyl_only)?;
    let cov = volume.top_bins_covering(0.6);
    for m in measures {
        let report = if m == Measure::Volume {
            volume.clone()
        } else {
            run_experiment(&grid, m, a.k, a.weyl_only)?
        };
        let tag = m.as_str().replace('-', "_");
        match a.format {
            Format::Csv => {
                write_with(&a.output.join(format!("bins_{tag}.csv")), |w| {
                    Ok(write_bins_csv(&report, w)?)
                })?;
                write_with(&a.output.join(format!("cells_{tag}.csv")), |w| {
                    Ok(write_cells_csv(&report, w)?)
                })?;
            }
            Format::Json => {
                write_with(&a.output.join(format!("coarse_{tag}.json")), |w| {
                    write_text(w, &json(&report))
                })?;
            }
        }
        if m == Measure::Volume {
            println!(
                "volume: top bins {:?} cover {:.1}% of {} counted cells (>= 60%), mean normalized von Neumann entropy {:.4}",
                cov.bins,
                100.0 * cov.coverage,
                report.counted,
                cov.mean_svn_norm
            );
        } else {
            println!(
                "{}: {:.1}% of counted cells lie in bins with mean normalized von Neumann entropy above {:.4}",
                m.as_str(),
                100.0 * report.fraction_above(cov.mean_svn_norm),
                cov.mean_svn_norm
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Curve {
    n: usize,
    samples: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct ScalingOutput<'a> {
    points: &'a [ScalingPoint],
    curves: Vec<Curve>,
}

pub fn scaling(a: &ScalingArgs) -> Result<(), CliError> {
    let ns: Vec<usize> = parse_list(&a.n_list, "N").map_err(|e| CliError {
        code: CliError::FAILED,
        message: e,
    })?;
    let points = scaling_points(&ns)?;
    let curves = ns
        .iter()
        .map(|&n| Ok((n, curve_samples(n, a.curve_samples)?)))
        .collect::<fibervol::Result<Vec<_>>>()?;
    fs::create_dir_all(&a.output)
        .map_err(|e| CliError::unwritable(format!("{}: {e}", a.output.display())))?;
    match a.format {
        Format::Csv => {
            write_with(&a.output.join("scaling.csv"), |w| {
                Ok(write_scaling_csv(&points, w)?)
            })?;
            write_with(&a.output.join("vnorm_curve.csv"), |w| {
                Ok(write_curve_csv(&curves, w)?)
            })?;
        }
        Format::Json => {
            let out = ScalingOutput {
                points: &points,
                curves: curves
                    .into_iter()
                    .map(|(n, samples)| Curve { n, samples })
                    .collect(),
            };
            write_with(&a.output.join("scaling.json"), |w| {
                write_text(w, &json(&out))
            })?;
        }
    }
    println!(
        "{:>4} {:>14} {:>16} {:>14} {:>14}",
        "N", "lambda1_star", "integral_ratio", "S_norm(vol)", "S_norm(flat)"
    );
    for p in &points {
        println!(
            "{:>4} {:>14.10} {:>16.12} {:>14.6} {:>14.6}",
            p.n, p.lambda1_star, p.integral_ratio, p.mean_svn_norm, p.mean_svn_norm_unweighted
        );
    }
    Ok(())
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let suites: Vec<Suite> = if a.suite.is_empty() {
        Suite::DEFAULT.to_vec()
    } else {
        a.suite
            .iter()
            .map(|s| match s {
                SuiteArg::Metric => Suite::Metric,
                SuiteArg::Derivatives => Suite::Derivatives,
                SuiteArg::PartialTrace => Suite::PartialTrace,
                SuiteArg::Volume => Suite::Volume,
                SuiteArg::So4Proportionality => Suite::So4Proportionality,
            })
            .collect()
    };
    let mut opts = ValidateOptions {
        so4_budget: a.budget,
        ..ValidateOptions::default()
    };
    if let Some(seed) = a.seed {
        opts.seed = seed;
    }
    let outcomes = suites
        .iter()
        .map(|&s| run_suite(s, &opts))
        .collect::<fibervol::Result<Vec<_>>>()?;
    match a.format {
        Format::Json => print!("{}", json(&outcomes)),
        Format::Csv => {
            for o in &outcomes {
                println!(
                    "{:<20} {}  max error {:.3e}  tolerance {:.0e}  checks {}",
                    o.suite.as_str(),
                    if o.passed { "PASS" } else { "FAIL" },
                    o.max_error,
                    o.tolerance,
                    o.checks
                );
            }
        }
    }
    if outcomes.iter().all(|o| o.passed) {
        Ok(())
    } else {
        Err(CliError {
            code: CliError::FAILED,
            message: "validation failed".into(),
        })
    }
}
