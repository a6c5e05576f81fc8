use std::collections::BTreeMap;

use qckit::almost_periodic::{decompose, estimate_density, find_almost_periods};
use qckit::entire_fn::{
    eval_F, eval_f, eval_g, eval_logderiv_direct, eval_logderiv_spectral, ComplexPoint, EvalConfig,
};
use qckit::generators::GeneratorSpec;
use qckit::grid::GridSpec;
use qckit::poisson::{poisson_residual, GaussianTest};
use qckit::spectrum::{combination_candidates, empirical_spectrum};
use qckit::{Complex64, PointMultiset, Spectrum, Window};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{csv_with_header, emit, read_input, to_json, CliError, Format};
use crate::{Cli, Command, Function, Verify};

/// Named residuals and the truncation settings that produced them.
#[derive(Debug, Serialize)]
struct ResidualReport {
    residuals: BTreeMap<&'static str, f64>,
    config: EvalConfig,
}

#[derive(Debug, Serialize)]
struct GridRow {
    x: f64,
    y: f64,
    re: f64,
    im: f64,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Evaluate { .. } | Command::Decompose { .. }) {
        return Err(CliError::Usage("csv output is available for evaluate and decompose only".into()));
    }
    let (body, gate) = match &cli.command {
        Command::Generate(input) => (generate(&input.input)?, None),
        Command::Density { input, lengths } => {
            let a = load_multiset(&input.input)?;
            (to_json(&estimate_density(&a, lengths)?)?, None)
        }
        Command::Decompose { input, density } => decompose_cmd(cli, &input.input, *density)?,
        Command::AlmostPeriods {
            input,
            epsilon,
            tau_range,
            tau_step,
        } => {
            let a = load_multiset(&input.input)?;
            let (lo, hi) = parse_range(tau_range)?;
            let scan = find_almost_periods(&a, *epsilon, Window::closed(lo, hi)?, *tau_step)?;
            (to_json(&scan)?, None)
        }
        Command::Spectrum {
            input,
            band,
            freqs,
            order,
        } => (spectrum_cmd(&input.input, band, freqs, *order)?, None),
        Command::Evaluate {
            function,
            input,
            spectrum,
        } => evaluate(cli, *function, input.as_deref(), spectrum.as_deref())?,
        Command::Verify(Verify::Poisson {
            input,
            spectrum,
            scale,
            center,
            lambda_cutoff,
            gamma_cutoff,
            tail_tolerance,
        }) => {
            let a = load_multiset(&input.input)?;
            let s = load_spectrum(spectrum)?;
            let h = GaussianTest::new(*scale, *center)?;
            let report = poisson_residual(
                &a,
                &s,
                &h,
                *lambda_cutoff,
                gamma_cutoff.unwrap_or(*lambda_cutoff),
                *tail_tolerance,
            )?;
            let body = json!({
                "lhs": complex(report.lhs),
                "rhs": complex(report.rhs),
                "residual": report.residual,
                "tail_bounds": report.tail_bounds,
                "lambda_cutoff": report.lambda_cutoff,
                "gamma_cutoff": report.gamma_cutoff,
                "test_function": h,
            });
            let gate = cli.tolerance.unwrap_or(1e-8);
            (to_json(&body)?, Some((report.residual, gate)))
        }
        Command::Verify(Verify::Identity { input, spectrum }) => identity(cli, &input.input, spectrum)?,
    };
    emit(cli.output.as_deref(), &body)?;
    match gate {
        Some((residual, tolerance)) if !(residual <= tolerance) => Err(CliError::Gate { residual, tolerance }),
        _ => Ok(()),
    }
}

fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("range must look like lo:hi, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn load_multiset(arg: &str) -> Result<PointMultiset, CliError> {
    Ok(PointMultiset::from_json(&read_input(arg)?)?)
}

fn load_spectrum(arg: &str) -> Result<Spectrum, CliError> {
    Ok(Spectrum::from_json(&read_input(arg)?)?)
}

fn eval_config(cli: &Cli) -> Result<EvalConfig, CliError> {
    let mut cfg = EvalConfig::default();
    if let Some(n) = cli.truncation {
        cfg.truncation = n;
    }
    if let Some(z) = cli.include_zero_atom {
        cfg.include_zero_atom = z;
    }
    if let Some(t) = cli.tolerance {
        cfg.abs_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn require_grid(cli: &Cli) -> Result<GridSpec, CliError> {
    cli.grid
        .ok_or_else(|| CliError::Usage("this command needs --grid x0:x1:step@y".into()))
}

fn generate(input: &str) -> Result<String, CliError> {
    let spec = GeneratorSpec::from_json(&read_input(input)?)?;
    let a = spec.generate()?;
    to_json(&a.to_doc())
}

fn decompose_cmd(cli: &Cli, input: &str, density: Option<f64>) -> Result<(String, Option<(f64, f64)>), CliError> {
    let a = load_multiset(input)?;
    let d = match density {
        Some(d) => d,
        None => estimate_density(&a, &[0.5 * a.window().length()])?.d,
    };
    let dec = decompose(&a, d)?;
    let (n_min, n_max) = dec.index_range();
    let body = match cli.format {
        Format::Json => to_json(&json!({
            "density": d,
            "n_min": n_min,
            "n_max": n_max,
            "sup_phi": dec.sup_phi(),
            "phi": dec.series().map(|(_, p)| p).collect::<Vec<_>>(),
        }))?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                n: i64,
                phi: f64,
            }
            let rows: Vec<Row> = dec.series().map(|(n, phi)| Row { n, phi }).collect();
            csv_with_header(&json!({"density": d, "sup_phi": dec.sup_phi()}), &rows)?
        }
    };
    Ok((body, None))
}

fn spectrum_cmd(input: &str, band: &str, freqs: &[f64], order: u32) -> Result<String, CliError> {
    let (lo, hi) = parse_range(band)?;
    let band = Window::closed(lo, hi)?;
    let text = read_input(input)?;
    let value: Value = serde_json::from_str(&text).map_err(qckit::Error::from)?;
    let spectrum = if value.get("kind").is_some() {
        GeneratorSpec::from_json(&text)?.analytic_spectrum(band)?
    } else {
        if freqs.is_empty() {
            return Err(CliError::Usage("an empirical spectrum needs --freqs".into()));
        }
        let a = PointMultiset::from_json(&text)?;
        let candidates = combination_candidates(freqs, order, band);
        // probes on an irrational stride, kept away from every candidate
        let probes: Vec<f64> = (1..2000)
            .map(|k| (k as f64 * 0.618_033_988_749_895).fract() * hi.max(1.0))
            .filter(|p| candidates.iter().all(|c| (c - p).abs() > 0.05))
            .take(16)
            .collect();
        let w = a.window();
        let t_max = 0.5 * (w.hi - w.lo) - 0.5 * (w.hi + w.lo).abs();
        let t_max = t_max.min(w.hi).min(-w.lo);
        if !(t_max > 0.0) {
            return Err(CliError::Numeric(qckit::Error::WindowTooSmall(
                "the window must contain an interval [-T, T]".into(),
            )));
        }
        empirical_spectrum(&a, &candidates, &probes, &[0.5 * t_max, t_max], band)?
    };
    to_json(&spectrum.to_doc())
}

fn evaluate(
    cli: &Cli,
    function: Function,
    input: Option<&str>,
    spectrum: Option<&str>,
) -> Result<(String, Option<(f64, f64)>), CliError> {
    let cfg = eval_config(cli)?;
    let grid = require_grid(cli)?;
    let a = match function {
        Function::Product | Function::LogderivDirect | Function::Corrected => Some(load_multiset(need(input, "input")?)?),
        _ => None,
    };
    let s = match function {
        Function::LogderivSpectral | Function::G | Function::Corrected => Some(load_spectrum(need(spectrum, "spectrum")?)?),
        _ => None,
    };
    let points: Vec<ComplexPoint> = grid.xs().into_iter().map(|x| ComplexPoint::new(x, grid.y)).collect();

    // (value, residual) per point
    let values: Vec<(Complex64, f64)> = points
        .par_iter()
        .map(|&p| -> qckit::Result<(Complex64, f64)> {
            match function {
                Function::Product => Ok((eval_f(a.as_ref().unwrap(), p, &cfg)?, 0.0)),
                Function::LogderivDirect => {
                    let r = eval_logderiv_direct(a.as_ref().unwrap(), p, &cfg)?;
                    Ok((r.value, r.defect))
                }
                Function::LogderivSpectral => {
                    let r = eval_logderiv_spectral(s.as_ref().unwrap(), p, &cfg)?;
                    Ok((r.value, r.tail_bound))
                }
                Function::G => Ok((eval_g(s.as_ref().unwrap(), p)?, 0.0)),
                Function::Corrected => Ok((eval_F(a.as_ref().unwrap(), s.as_ref().unwrap(), p, &cfg)?, 0.0)),
            }
        })
        .collect::<qckit::Result<_>>()?;

    let worst = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let mut residuals = BTreeMap::new();
    match function {
        Function::LogderivDirect => {
            residuals.insert("max_convergence_defect", worst);
        }
        Function::LogderivSpectral => {
            residuals.insert("max_tail_bound", worst);
        }
        _ => {}
    }
    let header = json!({
        "function": function_name(function),
        "grid": grid,
        "report": ResidualReport { residuals, config: cfg },
    });
    let rows: Vec<GridRow> = points
        .iter()
        .zip(&values)
        .map(|(p, (v, _))| GridRow {
            x: p.x,
            y: p.y,
            re: v.re,
            im: v.im,
        })
        .collect();
    let body = match cli.format {
        Format::Csv => csv_with_header(&header, &rows)?,
        Format::Json => {
            let mut doc = header;
            doc["values"] = serde_json::to_value(&rows).map_err(|e| CliError::Io(e.to_string()))?;
            to_json(&doc)?
        }
    };
    let gate = match function {
        Function::LogderivDirect | Function::LogderivSpectral => cli.tolerance.map(|t| (worst, t)),
        _ => None,
    };
    Ok((body, gate))
}

fn need<'a>(arg: Option<&'a str>, what: &str) -> Result<&'a str, CliError> {
    arg.ok_or_else(|| CliError::Usage(format!("this function needs --{what}")))
}

fn function_name(f: Function) -> &'static str {
    match f {
        Function::Product => "f",
        Function::LogderivDirect => "logderiv-direct",
        Function::LogderivSpectral => "logderiv-spectral",
        Function::G => "g",
        Function::Corrected => "F",
    }
}

fn identity(cli: &Cli, input: &str, spectrum: &str) -> Result<(String, Option<(f64, f64)>), CliError> {
    let cfg = eval_config(cli)?;
    let grid = require_grid(cli)?;
    let a = load_multiset(input)?;
    let s = load_spectrum(spectrum)?;
    let defects: Vec<f64> = grid
        .xs()
        .par_iter()
        .map(|&x| -> qckit::Result<f64> {
            let p = ComplexPoint::new(x, grid.y);
            let d = eval_logderiv_direct(&a, p, &cfg)?.value;
            let sp = eval_logderiv_spectral(&s, p, &cfg)?.value;
            Ok((d - sp).norm())
        })
        .collect::<qckit::Result<_>>()?;
    let worst = defects.iter().copied().fold(0.0, f64::max);
    let mut residuals = BTreeMap::new();
    residuals.insert("max_identity_defect", worst);
    let body = to_json(&json!({
        "grid": grid,
        "points": defects.len(),
        "report": ResidualReport { residuals, config: cfg },
    }))?;
    Ok((body, Some((worst, cli.tolerance.unwrap_or(1e-8)))))
}
