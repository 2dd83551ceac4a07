use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Tabulated annealing schedule A(s), B(s) with a shape-preserving
/// monotone piecewise-cubic interpolant.
///
/// A and B are angular frequencies (1e9 rad/s). The file format is CSV
/// with header `s,A,B`; lines starting with `#` are comments. Loading
/// validates monotonicity (A non-increasing, B non-decreasing), strict
/// ordering of s covering [0, 1], and the endpoint dominance ratios
/// A(1)/B(1) < 1e-2, B(0)/A(0) < 1e-2.
#[derive(Debug, Clone)]
pub struct AnnealSchedule {
    a: MonotoneCubic,
    b: MonotoneCubic,
}

impl AnnealSchedule {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut samples: Vec<(f64, f64, f64)> = Vec::new();
        let mut saw_header = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                let cols: Vec<_> = line.split(',').map(str::trim).collect();
                if cols != ["s", "A", "B"] {
                    return Err(Error::ScheduleFormat {
                        path: path.to_string(),
                        reason: format!("expected header `s,A,B`, found `{line}`"),
                    });
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<_> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::ScheduleRow {
                    path: path.to_string(),
                    row: lineno + 1,
                    reason: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            let mut vals = [0.0_f64; 3];
            for (k, c) in cols.iter().enumerate() {
                vals[k] = c.parse::<f64>().map_err(|e| Error::ScheduleRow {
                    path: path.to_string(),
                    row: lineno + 1,
                    reason: format!("bad number `{c}`: {e}"),
                })?;
                if !vals[k].is_finite() {
                    return Err(Error::ScheduleRow {
                        path: path.to_string(),
                        row: lineno + 1,
                        reason: "non-finite value".into(),
                    });
                }
            }
            samples.push((vals[0], vals[1], vals[2]));
        }
        if !saw_header {
            return Err(Error::ScheduleFormat {
                path: path.to_string(),
                reason: "missing `s,A,B` header".into(),
            });
        }
        Self::from_samples(samples, path)
    }

    /// Build from in-memory (s, A, B) triples; validation as for files.
    pub fn from_samples(samples: Vec<(f64, f64, f64)>, origin: &str) -> Result<Self> {
        let fail = |row: usize, reason: String| Error::ScheduleRow {
            path: origin.to_string(),
            row,
            reason,
        };
        if samples.len() < 2 {
            return Err(Error::ScheduleFormat {
                path: origin.to_string(),
                reason: "need at least two samples".into(),
            });
        }
        for (i, win) in samples.windows(2).enumerate() {
            if win[1].0 <= win[0].0 {
                return Err(fail(i + 2, format!("s not strictly increasing at s={}", win[1].0)));
            }
            if win[1].1 > win[0].1 + 1e-12 {
                return Err(fail(i + 2, format!("A increases at s={}", win[1].0)));
            }
            if win[1].2 < win[0].2 - 1e-12 {
                return Err(fail(i + 2, format!("B decreases at s={}", win[1].0)));
            }
        }
        let first = samples[0];
        let last = *samples.last().unwrap();
        if first.0.abs() > 1e-9 || (last.0 - 1.0).abs() > 1e-9 {
            return Err(Error::ScheduleFormat {
                path: origin.to_string(),
                reason: format!("s must cover [0, 1], found [{}, {}]", first.0, last.0),
            });
        }
        if first.1 <= 0.0 || last.2 <= 0.0 {
            return Err(Error::ScheduleFormat {
                path: origin.to_string(),
                reason: "A(0) and B(1) must be positive".into(),
            });
        }
        if last.1 / last.2 >= 1e-2 {
            return Err(Error::ScheduleFormat {
                path: origin.to_string(),
                reason: format!("A(1)/B(1) = {:.3e} >= 1e-2", last.1 / last.2),
            });
        }
        if first.2 / first.1 >= 1e-2 {
            return Err(Error::ScheduleFormat {
                path: origin.to_string(),
                reason: format!("B(0)/A(0) = {:.3e} >= 1e-2", first.2 / first.1),
            });
        }
        let s: Vec<f64> = samples.iter().map(|t| t.0).collect();
        let a: Vec<f64> = samples.iter().map(|t| t.1).collect();
        let b: Vec<f64> = samples.iter().map(|t| t.2).collect();
        Ok(Self {
            a: MonotoneCubic::new(s.clone(), a),
            b: MonotoneCubic::new(s, b),
        })
    }

    /// (A(s), B(s)) at s in [0, 1].
    pub fn eval(&self, s: f64) -> (f64, f64) {
        (self.a.eval(s), self.b.eval(s))
    }

    /// (A'(s), B'(s)) from the interpolant.
    pub fn eval_derivative(&self, s: f64) -> (f64, f64) {
        (self.a.derivative(s), self.b.derivative(s))
    }
}

/// Shape-preserving piecewise-cubic Hermite interpolant (PCHIP).
///
/// Node derivatives follow the Fritsch-Carlson weighted harmonic mean,
/// with the usual three-point edge rule clipped for monotonicity, so the
/// interpolant never overshoots monotone data and its derivative is
/// available analytically.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            for i in 1..n - 1 {
                if m[i - 1] * m[i] <= 0.0 {
                    d[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / m[i - 1] + w2 / m[i]);
                }
            }
            d[0] = edge_derivative(h[0], h[1], m[0], m[1]);
            d[n - 1] = edge_derivative(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Self { x, y, d }
    }

    fn segment(&self, s: f64) -> usize {
        let n = self.x.len();
        if s <= self.x[0] {
            return 0;
        }
        if s >= self.x[n - 1] {
            return n - 2;
        }
        // binary search for the interval containing s
        match self
            .x
            .binary_search_by(|probe| probe.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self.segment(s);
        let h = self.x[i + 1] - self.x[i];
        let t = (s - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let i = self.segment(s);
        let h = self.x[i + 1] - self.x[i];
        let t = (s - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let t2 = t * t;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
    }
}

/// Three-point edge derivative with the standard monotonicity clamps.
fn edge_derivative(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let mut d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d * m0 <= 0.0 {
        d = 0.0;
    } else if m0 * m1 <= 0.0 && d.abs() > 3.0 * m0.abs() {
        d = 3.0 * m0;
    }
    d
}
