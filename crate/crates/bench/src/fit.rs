//! Log-log least-squares fits of cost against problem size.

use std::collections::BTreeMap;

use crate::csvout::Record;
use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals in log space.
    pub residual: f64,
    pub points: usize,
}

impl Record for Fit {
    const HEADER: &'static [&'static str] = &["slope", "intercept", "residual", "points"];

    fn fields(&self) -> Vec<String> {
        vec![self.slope.to_string(), self.intercept.to_string(), self.residual.to_string(), self.points.to_string()]
    }
}

/// Fits `ln cost = slope · ln n + intercept` over `(n, cost)` pairs.
pub fn fit_exponent(rows: &[(f64, f64)]) -> Result<Fit> {
    if rows.iter().any(|&(n, c)| !(n > 0.0 && n.is_finite() && c > 0.0 && c.is_finite())) {
        return config("sizes and costs must be positive and finite");
    }
    let mut distinct: Vec<f64> = rows.iter().map(|r| r.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return config(format!("need at least 3 distinct sizes, got {}", distinct.len()));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(n, c)| (n.ln(), c.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>().sqrt();
    Ok(Fit { slope, intercept, residual, points: pts.len() })
}

/// Mean cost per distinct size, in ascending size order.
pub fn mean_by_size(rows: impl IntoIterator<Item = (usize, f64)>) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (n, c) in rows {
        let e = acc.entry(n).or_default();
        e.0 += c;
        e.1 += 1;
    }
    acc.into_iter().map(|(n, (sum, count))| (n as f64, sum / count as f64)).collect()
}

/// Reads `(x, y)` columns by name from CSV text.
pub fn read_columns(text: &str, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let col = |name: &str| match header.iter().position(|h| h == name) {
        Some(i) => Ok(i),
        None => config(format!("no column `{name}` in input")),
    };
    let (xi, yi) = (col(x)?, col(y)?);
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| {
            rec.get(i).and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| {
                crate::error::BenchError::Config(format!("row {}: column {i} is not a number", row + 1))
            })
        };
        out.push((get(xi)?, get(yi)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = [16.0, 64.0, 256.0, 1024.0].iter().map(|&n: &f64| (n, n.powf(1.5))).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!(f.residual < 1e-9);
        let sq: Vec<(f64, f64)> = [3.0, 10.0, 50.0].iter().map(|&n: &f64| (n, 7.0 * n * n)).collect();
        let f = fit_exponent(&sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (1.0, 2.0), (2.0, 3.0), (2.0, 1.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)]).is_err());
    }

    #[test]
    fn means_and_columns() {
        let m = mean_by_size([(4, 1.0), (2, 5.0), (4, 3.0)]);
        assert_eq!(m, vec![(2.0, 5.0), (4.0, 2.0)]);
        let cols = read_columns("n,steps\n4,2\n16,4\n", "n", "steps").unwrap();
        assert_eq!(cols, vec![(4.0, 2.0), (16.0, 4.0)]);
        assert!(read_columns("n\n1\n", "n", "steps").is_err());
    }
}
