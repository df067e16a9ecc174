use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Least-squares line `y = intercept + slope·x` with its coefficient of determination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateFit("x and y lengths differ".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 points, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("x values do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

/// Power-law fit of `log value` against `log t` over a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// `-slope`: the decay exponent.
    pub exponent: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Fits `log v = a + b log t` over `t ∈ [t0, t1]`, skipping floor values and `t ≤ 0`.
pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64), floor: f64) -> Result<ExponentFit> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(Error::DegenerateFit(format!("empty window [{t0}, {t1}]")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t > 0.0 && t >= t0 - 1e-12 && t <= t1 + 1e-12 && v >= floor)
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .unzip();
    let f = fit_line(&xs, &ys)?;
    Ok(ExponentFit {
        exponent: -f.slope,
        slope: f.slope,
        intercept: f.intercept,
        r_squared: f.r_squared,
        window,
        points: f.points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15);
        assert!((f.intercept - 2.0).abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn power_law_exponent() {
        let t: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-4.5)).collect();
        let f = fit_decay(&t, &v, (2.0, 15.0), 1e-14).unwrap();
        assert!((f.exponent - 4.5).abs() < 1e-12);
        assert_eq!(f.points, 14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_decay(&[1.0, 2.0], &[0.0, 0.0], (0.5, 3.0), 1e-14).is_err());
        assert!(fit_decay(&[1.0, 2.0], &[1.0, 0.5], (3.0, 3.0), 1e-14).is_err());
    }
}
