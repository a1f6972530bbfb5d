//! Evaluation point sets: axis grids `min:max:count` and point files.

use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || CliError::parse(format!("grid {text:?}, expected min:max:count"));
        let [lo, hi, count] = parts.as_slice() else { return Err(bad()) };
        let min: f64 = lo.trim().parse().map_err(|_| bad())?;
        let max: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if count == 0 || !min.is_finite() || !max.is_finite() || (count == 1 && min != max) {
            return Err(bad());
        }
        Ok(AxisSpec { min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }
}

/// Tensor grid in `n ≤ 2` variables. A single axis is reused for every
/// axis; the last axis varies fastest.
pub fn grid_points(specs: &[AxisSpec], n: usize) -> CliResult<Vec<Vec<f64>>> {
    if n > 2 {
        return Err(CliError::parse(format!("grids support at most 2 variables, model has {n}; use a points file")));
    }
    let axes: Vec<Vec<f64>> = match specs.len() {
        1 => vec![specs[0].values(); n],
        k if k == n => specs.iter().map(AxisSpec::values).collect(),
        k => return Err(CliError::parse(format!("{k} grid axes for {n} variables"))),
    };
    let mut pts = vec![Vec::new()];
    for axis in &axes {
        pts = pts.into_iter().flat_map(|p| axis.iter().map(move |&v| [p.clone(), vec![v]].concat())).collect();
    }
    Ok(pts)
}

/// One state per line, entries separated by commas or whitespace. Blank lines
/// and lines starting with `#` are ignored.
pub fn parse_points(text: &str, n: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut pts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::parse(format!("points line {}: {e}", lineno + 1)))?;
        if row.len() != n {
            return Err(CliError::parse(format!("points line {}: {} values, expected {n}", lineno + 1, row.len())));
        }
        pts.push(row);
    }
    Ok(pts)
}

pub fn read_points(path: &Path, n: usize) -> CliResult<Vec<Vec<f64>>> {
    parse_points(&std::fs::read_to_string(path)?, n)
}

/// Comma-separated vector of length `n`.
pub fn parse_vector(text: &str, n: usize) -> CliResult<Vec<f64>> {
    parse_points(text, n)?.pop().ok_or_else(|| CliError::parse("empty vector"))
}

/// Least-squares slope of `log y` against `log x`, skipping nonpositive `y`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pairs.len() < 2 {
        return None;
    }
    let len = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pairs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_specs() {
        let a = AxisSpec::parse("-6:6:241").unwrap();
        let v = a.values();
        assert_eq!(v.len(), 241);
        assert_eq!((v[0], v[120], v[240]), (-6.0, 0.0, 6.0));
        for bad in ["1:2", "a:1:3", "0:1:0", "0:1:1", "0:inf:3"] {
            assert!(AxisSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grids_and_points() {
        let a = AxisSpec::parse("0:1:3").unwrap();
        let g = grid_points(&[a], 2).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[1], vec![0.0, 0.5]);
        assert!(grid_points(&[a], 3).is_err());
        let p = parse_points("# header\n1, 2\n\n3 4\n", 2).unwrap();
        assert_eq!(p, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(parse_points("1,2,3", 2).is_err());
    }

    #[test]
    fn slope_of_a_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(4)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 4.0).abs() < 1e-12);
    }
}
