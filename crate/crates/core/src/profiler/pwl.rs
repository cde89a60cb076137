//! Continuous piecewise-linear least-squares fits.
//!
//! Fitting uses the linear-spline basis {1, x, (x-k)+} over candidate
//! knots taken from the sample grid, solved by normal equations; the knot
//! subset is chosen by exhaustive search over subsets up to the segment
//! budget, preferring fewer segments when residuals tie.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuous piecewise-linear function of batch size, nonnegative on its
/// domain; the last segment extrapolates beyond the fitted range, the
/// first below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    /// Segment start abscissas, ascending; `segments[0].start` is the
    /// domain start.
    pub segments: Vec<Segment>,
    /// Root-mean-square residual of the fit that produced this model.
    pub rms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl PiecewiseLinear {
    /// A constant model, handy for synthetic scenarios.
    pub fn constant(value: f64) -> Self {
        Self {
            segments: vec![Segment {
                start: 1.0,
                slope: 0.0,
                intercept: value,
            }],
            rms: 0.0,
        }
    }

    /// A single affine segment `intercept + slope * b`.
    pub fn affine(intercept: f64, slope: f64) -> Self {
        Self {
            segments: vec![Segment {
                start: 1.0,
                slope,
                intercept,
            }],
            rms: 0.0,
        }
    }

    pub fn eval(&self, b: f64) -> f64 {
        let mut seg = &self.segments[0];
        for s in &self.segments[1..] {
            if b >= s.start {
                seg = s;
            } else {
                break;
            }
        }
        (seg.intercept + seg.slope * b).max(0.0)
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.start)
    }
}

/// Least-squares continuous piecewise-linear fit with at most
/// `max_segments` segments. Returns the fitted model; its `rms` field
/// reports the residual.
pub fn fit_piecewise_linear(samples: &[(f64, f64)], max_segments: usize) -> Result<PiecewiseLinear> {
    let mut xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 2 {
        return Err(Error::Degenerate(
            "piecewise fit needs >= 2 distinct abscissas".into(),
        ));
    }
    if max_segments == 0 {
        return Err(Error::InvalidArgument("max_segments must be >= 1".into()));
    }
    // candidate knots: interior sample abscissas
    let candidates: Vec<f64> = xs[1..xs.len() - 1].to_vec();
    let max_knots = (max_segments - 1).min(candidates.len());

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None; // (rms, knots, coeffs)
    for k in 0..=max_knots {
        for combo in combinations(&candidates, k) {
            if let Some((coeffs, rms)) = solve_spline(samples, &combo) {
                let improved = match &best {
                    None => true,
                    Some((best_rms, _, _)) => rms < best_rms - 1e-9 * (1.0 + best_rms),
                };
                if improved {
                    best = Some((rms, combo.clone(), coeffs));
                }
            }
        }
    }
    let (rms, knots, coeffs) = best.ok_or_else(|| {
        Error::Degenerate("piecewise fit failed on all knot subsets".into())
    })?;
    Ok(to_segments(xs[0], &knots, &coeffs, rms))
}

fn combinations(items: &[f64], k: usize) -> Vec<Vec<f64>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + items.len() - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Least squares over the basis {1, x, (x-k_j)+}; returns coefficients
/// and RMS residual, or None for a singular system.
fn solve_spline(samples: &[(f64, f64)], knots: &[f64]) -> Option<(Vec<f64>, f64)> {
    let m = 2 + knots.len();
    let mut ata = vec![0.0f64; m * m];
    let mut aty = vec![0.0f64; m];
    let mut basis = vec![0.0f64; m];
    for &(x, y) in samples {
        basis[0] = 1.0;
        basis[1] = x;
        for (j, &k) in knots.iter().enumerate() {
            basis[2 + j] = (x - k).max(0.0);
        }
        for i in 0..m {
            aty[i] += basis[i] * y;
            for j in 0..m {
                ata[i * m + j] += basis[i] * basis[j];
            }
        }
    }
    let coeffs = solve_linear(&mut ata, &mut aty, m)?;
    let mut ss = 0.0;
    for &(x, y) in samples {
        let mut pred = coeffs[0] + coeffs[1] * x;
        for (j, &k) in knots.iter().enumerate() {
            pred += coeffs[2 + j] * (x - k).max(0.0);
        }
        let r = y - pred;
        ss += r * r;
    }
    Some((coeffs, (ss / samples.len() as f64).sqrt()))
}

/// Gaussian elimination with partial pivoting on an m×m system.
fn solve_linear(a: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for col in 0..m {
        let mut pivot = col;
        for row in col + 1..m {
            if a[row * m + col].abs() > a[pivot * m + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * m + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for j in 0..m {
                a.swap(col * m + j, pivot * m + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * m + col];
        for row in col + 1..m {
            let f = a[row * m + col] / diag;
            if f == 0.0 {
                continue;
            }
            for j in col..m {
                a[row * m + j] -= f * a[col * m + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0f64; m];
    for col in (0..m).rev() {
        let mut acc = b[col];
        for j in col + 1..m {
            acc -= a[col * m + j] * x[j];
        }
        x[col] = acc / a[col * m + col];
    }
    Some(x)
}

fn to_segments(domain_start: f64, knots: &[f64], coeffs: &[f64], rms: f64) -> PiecewiseLinear {
    let mut knots = knots.to_vec();
    knots.sort_by(f64::total_cmp);
    let mut segments = Vec::with_capacity(knots.len() + 1);
    let mut slope = coeffs[1];
    let mut intercept = coeffs[0];
    segments.push(Segment {
        start: domain_start,
        slope,
        intercept,
    });
    for (j, &k) in knots.iter().enumerate() {
        slope += coeffs[2 + j];
        intercept -= coeffs[2 + j] * k;
        segments.push(Segment {
            start: k,
            slope,
            intercept,
        });
    }
    PiecewiseLinear { segments, rms }
}
