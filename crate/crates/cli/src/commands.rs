//! Command bodies. Each writes its report to the supplied writer so the
//! binary and the tests share one code path.

use std::io::Write;
use std::path::{Path, PathBuf};

use hinf_energy::models::{self, BeamParams};
use hinf_energy::{
    compute_energy_with, eval_energy, hjb_residual, EnergyKind, EnergyOptions, EnergyPolynomial, EnergyReport,
};

use crate::coeff_file;
use crate::error::{CliError, CliResult};
use crate::grid::{self, AxisSpec};
use crate::model_file::{self, Metadata, ModelFile};

#[derive(Debug, Clone, Copy, Default)]
pub struct OutputStyle {
    pub csv: bool,
    pub quiet: bool,
}

/// Where evaluation points come from.
#[derive(Debug, Clone)]
pub enum PointSource {
    Grid(Vec<AxisSpec>),
    File(PathBuf),
    /// `ε·direction` for each `ε` in the range.
    Ray { direction: Vec<f64>, eps: AxisSpec },
}

impl PointSource {
    fn points(&self, n: usize) -> CliResult<Vec<Vec<f64>>> {
        match self {
            PointSource::Grid(specs) => grid::grid_points(specs, n),
            PointSource::File(path) => grid::read_points(path, n),
            PointSource::Ray { direction, eps } => {
                if direction.len() != n {
                    return Err(CliError::parse(format!("ray has {} entries, model has {n}", direction.len())));
                }
                Ok(eps.values().iter().map(|&e| direction.iter().map(|d| d * e).collect()).collect())
            }
        }
    }
}

pub fn cmd_energy(
    model: &Path,
    degree: usize,
    eta: f64,
    kind: EnergyKind,
    out: &Path,
    opts: &EnergyOptions,
    style: OutputStyle,
    w: &mut dyn Write,
) -> CliResult<(EnergyPolynomial, EnergyReport)> {
    let sys = model_file::read_model(model)?;
    let (poly, report) = compute_energy_with(&sys, degree, eta, kind, opts)?;
    coeff_file::save(out, &poly)?;
    if !style.quiet {
        write_energy_report(&report, style, w)?;
    }
    Ok((poly, report))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:e}"))
}

pub fn write_energy_report(report: &EnergyReport, style: OutputStyle, w: &mut dyn Write) -> CliResult<()> {
    let mut rows = vec![[
        "2".to_string(),
        format!("{:.6}", report.are_seconds),
        String::new(),
        "riccati".to_string(),
        format!("{:e}", report.are.residual_norm),
        String::new(),
    ]];
    for d in &report.degrees {
        let status = if d.skipped { "skipped (zero RHS)" } else { "solved" };
        rows.push([
            d.k.to_string(),
            format!("{:.6}", d.seconds),
            format!("{:e}", d.rhs_norm),
            status.to_string(),
            opt(d.solve_residual),
            opt(d.imag_residue),
        ]);
    }
    let header = ["k", "seconds", "rhs_norm", "status", "residual", "imag_residue"];
    if style.csv {
        writeln!(w, "{}", header.join(","))?;
        for r in &rows {
            writeln!(w, "{}", r.join(","))?;
        }
    } else {
        writeln!(w, "{:>3} {:>10} {:>12} {:<20} {:>12} {:>12}", header[0], header[1], header[2], header[3], header[4], header[5])?;
        for r in &rows {
            writeln!(w, "{:>3} {:>10} {:>12} {:<20} {:>12} {:>12}", r[0], r[1], r[2], r[3], r[4], r[5])?;
        }
        writeln!(w, "total {:.3} s", report.total_seconds())?;
    }
    Ok(())
}

fn write_point_rows(w: &mut dyn Write, n: usize, last: &str, rows: &[(Vec<f64>, f64)]) -> CliResult<()> {
    let head: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain([last.to_string()]).collect();
    writeln!(w, "{}", head.join(","))?;
    for (x, v) in rows {
        let line: Vec<String> = x.iter().chain([v]).map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Writes `x₁,…,x_n,energy` rows.
pub fn cmd_eval(coeffs: &Path, source: &PointSource, w: &mut dyn Write) -> CliResult<Vec<(Vec<f64>, f64)>> {
    let poly = coeff_file::load(coeffs)?;
    let rows: Vec<_> = source
        .points(poly.n)?
        .into_iter()
        .map(|x| {
            let e = eval_energy(&poly, &x);
            (x, e)
        })
        .collect();
    write_point_rows(w, poly.n, "energy", &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ResidualOutput {
    pub rows: Vec<(Vec<f64>, f64)>,
    /// Log-log slope of `|RES|` along the ray, in ray mode.
    pub slope: Option<f64>,
}

/// Writes `x₁,…,x_n,residual` rows, or `eps,residual` and the fitted slope
/// along a ray.
pub fn cmd_residual(model: &Path, coeffs: &Path, source: &PointSource, w: &mut dyn Write) -> CliResult<ResidualOutput> {
    let sys = model_file::read_model(model)?;
    let poly = coeff_file::load(coeffs)?;
    if poly.n != sys.n {
        return Err(CliError::parse(format!("coefficients have n={}, model has n={}", poly.n, sys.n)));
    }
    let rows: Vec<(Vec<f64>, f64)> = source
        .points(sys.n)?
        .into_iter()
        .map(|x| {
            let r = hjb_residual(&sys, &poly, poly.eta, &x);
            (x, r)
        })
        .collect();
    let PointSource::Ray { eps, .. } = source else {
        write_point_rows(w, sys.n, "residual", &rows)?;
        return Ok(ResidualOutput { rows, slope: None });
    };
    let eps = eps.values();
    let abs: Vec<f64> = rows.iter().map(|r| r.1.abs()).collect();
    writeln!(w, "eps,residual")?;
    for (e, r) in eps.iter().zip(&rows) {
        writeln!(w, "{e},{}", r.1)?;
    }
    let slope = grid::loglog_slope(&eps, &abs);
    writeln!(w)?;
    writeln!(w, "fitted_slope,{}", slope.map_or_else(|| "nan".into(), |s| s.to_string()))?;
    Ok(ResidualOutput { rows, slope })
}

pub fn cmd_beam(params: &BeamParams, out: &Path, style: OutputStyle, w: &mut dyn Write) -> CliResult<ModelFile> {
    let sys = models::beam_system(params)?;
    let meta = Metadata {
        name: Some(format!("cantilever beam, {} elements", params.num_elements)),
        provenance: Some(format!("{params:?}")),
    };
    let model = ModelFile::from_system(&sys, Some(meta));
    model_file::write_model(out, &model)?;
    if !style.quiet {
        if style.csv {
            writeln!(w, "elements,n,path\n{},{},{}", params.num_elements, sys.n, out.display())?;
        } else {
            writeln!(w, "wrote beam model with n = {} to {}", sys.n, out.display())?;
        }
    }
    Ok(model)
}
