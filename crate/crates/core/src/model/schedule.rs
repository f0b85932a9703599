use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DOMAIN_EPS: f64 = 1e-9;

/// Synthetic default tabulation: A falls from 10 GHz to 0, B rises from 0 to 10 GHz.
pub const DEFAULT_SCHEDULE_CSV: &str = include_str!("../../data/default_schedule.csv");

/// Tabulated transverse and Ising energy scales A(s), B(s) in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    s_grid: Vec<f64>,
    a_values: Vec<f64>,
    b_values: Vec<f64>,
    #[serde(skip)]
    a_slopes: Vec<f64>,
    #[serde(skip)]
    b_slopes: Vec<f64>,
}

impl AnnealSchedule {
    pub fn new(s_grid: Vec<f64>, a_values: Vec<f64>, b_values: Vec<f64>) -> Result<Self> {
        let n = s_grid.len();
        if n < 2 || a_values.len() != n || b_values.len() != n {
            return Err(Error::Validation(format!(
                "schedule needs matching columns with at least 2 rows (s={}, A={}, B={})",
                n,
                a_values.len(),
                b_values.len()
            )));
        }
        if s_grid.iter().chain(&a_values).chain(&b_values).any(|v| !v.is_finite()) {
            return Err(Error::Validation("schedule contains non-finite values".into()));
        }
        if s_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("s grid must be strictly increasing".into()));
        }
        if s_grid[0] > DOMAIN_EPS || s_grid[n - 1] < 1.0 - DOMAIN_EPS {
            return Err(Error::Validation(format!(
                "s grid [{}, {}] must cover [0, 1]",
                s_grid[0],
                s_grid[n - 1]
            )));
        }
        if a_values.iter().chain(&b_values).any(|&v| v < 0.0) {
            return Err(Error::Validation("energy scales must be non-negative".into()));
        }
        if a_values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Validation("A(s) must be non-increasing".into()));
        }
        if b_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Validation("B(s) must be non-decreasing".into()));
        }
        let a_slopes = pchip_slopes(&s_grid, &a_values);
        let b_slopes = pchip_slopes(&s_grid, &b_values);
        Ok(Self { s_grid, a_values, b_values, a_slopes, b_slopes })
    }

    /// Parse `s, A, B` rows after a required header line. Commas or whitespace separate fields.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = parse_table(text, 3)?;
        let mut s = Vec::with_capacity(rows.len());
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        for r in rows {
            s.push(r[0]);
            a.push(r[1]);
            b.push(r[2]);
        }
        Self::new(s, a, b)
    }

    /// Build from two two-column files `(s, A)` and `(s, B)`; B is resampled onto the A grid
    /// when the grids differ.
    pub fn parse_pair(a_text: &str, b_text: &str) -> Result<Self> {
        let a_rows = parse_table(a_text, 2)?;
        let b_rows = parse_table(b_text, 2)?;
        let s: Vec<f64> = a_rows.iter().map(|r| r[0]).collect();
        let a: Vec<f64> = a_rows.iter().map(|r| r[1]).collect();
        let bs: Vec<f64> = b_rows.iter().map(|r| r[0]).collect();
        let bv: Vec<f64> = b_rows.iter().map(|r| r[1]).collect();
        let b = if bs == s {
            bv
        } else {
            let probe = Self::new(bs.clone(), vec![0.0; bs.len()], bv)?;
            s.iter().map(|&x| probe.b(x)).collect::<Result<Vec<_>>>()?
        };
        Self::new(s, a, b)
    }

    pub fn default_synthetic() -> Self {
        Self::parse(DEFAULT_SCHEDULE_CSV).expect("bundled schedule is valid")
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a_values
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b_values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.s_grid[0], self.s_grid[self.s_grid.len() - 1])
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(s >= lo - DOMAIN_EPS && s <= hi + DOMAIN_EPS) {
            return Err(Error::Domain(format!("anneal parameter {s} outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn a(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(pchip_eval(&self.s_grid, &self.a_values, &self.a_slopes, s).max(0.0))
    }

    pub fn b(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(pchip_eval(&self.s_grid, &self.b_values, &self.b_slopes, s).max(0.0))
    }

    /// Smallest s with A(s) = `value`, by bisection on the monotone interpolant.
    pub fn solve_a(&self, value: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let (a_lo, a_hi) = (self.a(lo)?, self.a(hi)?);
        if !(value <= a_lo && value >= a_hi) {
            return Err(Error::Range(format!("A = {value} GHz not reachable in [{a_hi}, {a_lo}]")));
        }
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (l + h);
            if self.a(m)? > value {
                l = m;
            } else {
                h = m;
            }
            if h - l < 1e-15 {
                break;
            }
        }
        Ok(0.5 * (l + h))
    }
}

fn parse_table(text: &str, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("schedule file is empty".into()))?;
    if header.split(|c: char| c == ',' || c.is_whitespace()).any(|f| f.parse::<f64>().is_ok()) {
        return Err(Error::Parse("schedule file needs a header line".into()));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != columns {
            return Err(Error::Parse(format!(
                "row {}: expected {columns} fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        let row = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", lineno + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Fritsch-Carlson derivative estimates for monotone piecewise-cubic Hermite interpolation.
pub(crate) fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

pub(crate) fn pchip_eval(x: &[f64], y: &[f64], d: &[f64], s: f64) -> f64 {
    let n = x.len();
    let k = match x.partition_point(|&v| v <= s) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let h = x[k + 1] - x[k];
    let t = ((s - x[k]) / h).clamp(0.0, 1.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y[k] + h10 * h * d[k] + h01 * y[k + 1] + h11 * h * d[k + 1]
}
