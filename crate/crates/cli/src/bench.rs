//! Scaling harness: times `compute_energy` over a list of state dimensions
//! and fits the log-log growth rate.

use std::io::Write;
use std::str::FromStr;

use hinf_energy::models::{self, BeamParams};
use hinf_energy::{compute_energy_with, EnergyKind, EnergyOptions, PolynomialSystem};

use crate::error::{CliError, CliResult};
use crate::grid::loglog_slope;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Finite element beam; `n` must be a multiple of 6.
    Beam,
    /// Quadratic-drift random system with one input and one output.
    Random,
}

impl FromStr for Family {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "beam" => Ok(Family::Beam),
            "random" => Ok(Family::Random),
            _ => Err(CliError::parse(format!("unknown model family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub family: Family,
    pub n_list: Vec<usize>,
    pub degree: usize,
    pub repeats: usize,
    pub eta: f64,
    /// Stiffness-proportional damping of the beam family.
    pub beta: f64,
    pub seed: u64,
    pub options: EnergyOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            family: Family::Beam,
            n_list: vec![24, 48],
            degree: 3,
            repeats: 1,
            eta: 0.5,
            beta: 1e-4,
            seed: 1,
            options: EnergyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    /// `None` for the whole computation.
    pub k: Option<usize>,
    /// Fastest of the repeats.
    pub seconds: f64,
    pub bytes: u64,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    /// Slope of total time against `n`.
    pub slope: Option<f64>,
    /// Slope of each stage `k` (2 is the Riccati stage) against `n`. The
    /// top stage carries the leading `n^{d+1}` cost; the total also contains
    /// the lower-order stages, which dominate at small `n`.
    pub slope_by_k: Vec<(usize, Option<f64>)>,
    /// Coefficients were bitwise identical across repeats at every `n`.
    pub deterministic: bool,
    /// Peak resident set size in KiB, where the platform reports it.
    pub peak_rss_kib: Option<u64>,
}

pub fn bench_system(cfg: &BenchConfig, n: usize) -> CliResult<PolynomialSystem> {
    match cfg.family {
        Family::Beam => {
            if n == 0 || n % 6 != 0 {
                return Err(CliError::parse(format!("beam dimensions are multiples of 6, got {n}")));
            }
            Ok(models::beam_system(&BeamParams { beta: cfg.beta, ..BeamParams::with_elements(n / 6) })?)
        }
        Family::Random => {
            if n == 0 {
                return Err(CliError::parse("n must be positive"));
            }
            Ok(models::random_system(n, 1, 1, 2, cfg.seed, 0.5))
        }
    }
}

/// Model construction is outside the timed region.
pub fn run_bench(cfg: &BenchConfig) -> CliResult<BenchResult> {
    if cfg.n_list.is_empty() || cfg.repeats == 0 {
        return Err(CliError::parse("need at least one n and one repeat"));
    }
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    let mut deterministic = true;
    for &n in &cfg.n_list {
        let sys = bench_system(cfg, n)?;
        let mut best: Option<Vec<f64>> = None;
        let mut first: Option<Vec<Vec<u64>>> = None;
        for _ in 0..cfg.repeats {
            let (poly, report) = compute_energy_with(&sys, cfg.degree, cfg.eta, EnergyKind::Future, &cfg.options)?;
            let bits: Vec<Vec<u64>> = poly.coeffs.iter().map(|c| c.data.iter().map(|v| v.to_bits()).collect()).collect();
            match &first {
                None => first = Some(bits),
                Some(f) => deterministic &= *f == bits,
            }
            let times: Vec<f64> = std::iter::once(report.are_seconds)
                .chain(report.degrees.iter().map(|d| d.seconds))
                .chain([report.total_seconds()])
                .collect();
            best = Some(match best {
                None => times,
                Some(b) => b.iter().zip(&times).map(|(a, t)| a.min(*t)).collect(),
            });
        }
        let best = best.expect("at least one repeat");
        let mut total_bytes = 0;
        for (i, &t) in best[..best.len() - 1].iter().enumerate() {
            let k = i + 2;
            let bytes = 8 * (n as u64).pow(k as u32);
            total_bytes += bytes;
            rows.push(BenchRow { n, k: Some(k), seconds: t, bytes });
        }
        let total = *best.last().expect("total column");
        rows.push(BenchRow { n, k: None, seconds: total, bytes: total_bytes });
        totals.push(total);
    }
    let ns: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
    let slope_by_k = (2..=cfg.degree)
        .map(|k| {
            let ts: Vec<f64> = rows.iter().filter(|r| r.k == Some(k)).map(|r| r.seconds).collect();
            (k, loglog_slope(&ns, &ts))
        })
        .collect();
    Ok(BenchResult { rows, slope: loglog_slope(&ns, &totals), slope_by_k, deterministic, peak_rss_kib: peak_rss_kib() })
}

impl BenchResult {
    /// Slope of the highest-degree stage.
    pub fn top_slope(&self) -> Option<f64> {
        self.slope_by_k.last().and_then(|s| s.1)
    }
}

pub fn write_bench(res: &BenchResult, w: &mut dyn Write) -> CliResult<()> {
    writeln!(w, "n,k,seconds,bytes")?;
    for r in &res.rows {
        let k = r.k.map_or_else(|| "total".to_string(), |k| k.to_string());
        writeln!(w, "{},{k},{:.6},{}", r.n, r.seconds, r.bytes)?;
    }
    writeln!(w)?;
    let show = |s: Option<f64>| s.map_or_else(|| "nan".to_string(), |s| s.to_string());
    writeln!(w, "fitted_slope_total,{}", show(res.slope))?;
    for (k, s) in &res.slope_by_k {
        writeln!(w, "fitted_slope_k{k},{}", show(*s))?;
    }
    writeln!(w, "deterministic,{}", res.deterministic)?;
    let rss = res.peak_rss_kib.map_or_else(|| "unknown".into(), |k| (k * 1024).to_string());
    writeln!(w, "peak_rss_bytes,{rss}")?;
    Ok(())
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}
