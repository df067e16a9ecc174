use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::operators::BoxGeometry;
use crate::{Error, Result};

/// Spatial frequency of the quasiperiodic drive.
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Time-dependent real diagonal potential `V(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSchedule {
    Zero,
    Static {
        values: Vec<f64>,
    },
    /// I.i.d. uniform on `[-amplitude, amplitude]` per site, redrawn every `interval`.
    PiecewiseRandom {
        amplitude: f64,
        #[serde(default = "default_interval")]
        interval: f64,
        seed: u64,
    },
    /// `(A/J) Σ_j cos(2πβ Σᵢxᵢ + ω_j t + θ_j)` with β the golden mean.
    Quasiperiodic {
        amplitude: f64,
        frequencies: Vec<f64>,
        phases: Vec<f64>,
    },
    /// Piecewise cubic Hermite interpolation of site values and time derivatives.
    Tabulated {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
        slopes: Vec<Vec<f64>>,
    },
    Superposed {
        parts: Vec<PotentialSchedule>,
    },
}

fn default_interval() -> f64 {
    0.1
}

/// Uniform draws on `[-amplitude, amplitude]` for refresh period `k`.
///
/// Stream `k` of a ChaCha8 generator keyed by `seed`; site `i` uses the
/// `i`-th 64-bit word, so values depend only on `(seed, k, i)`.
pub fn random_piece(seed: u64, k: u64, amplitude: f64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng.set_word_pos(0);
    for v in out.iter_mut() {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        *v = amplitude * (2.0 * u - 1.0);
    }
}

impl PotentialSchedule {
    /// Declared sup-norm bound over all `t` and sites.
    pub fn bound(&self) -> f64 {
        match self {
            PotentialSchedule::Zero => 0.0,
            PotentialSchedule::Static { values } => values.iter().fold(0.0, |m, v| f64::max(m, v.abs())),
            PotentialSchedule::PiecewiseRandom { amplitude, .. } => amplitude.abs(),
            PotentialSchedule::Quasiperiodic { amplitude, .. } => amplitude.abs(),
            PotentialSchedule::Tabulated { values, slopes, times } => {
                // Hermite slope basis functions are bounded by 4/27 each on a piece.
                let knot = values
                    .iter()
                    .flatten()
                    .fold(0.0, |m: f64, v| m.max(v.abs()));
                let h = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                let s = slopes.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()));
                knot + 8.0 / 27.0 * h * s
            }
            PotentialSchedule::Superposed { parts } => parts.iter().map(|p| p.bound()).sum(),
        }
    }

    pub fn validate(&self, geometry: &BoxGeometry) -> Result<()> {
        let n = geometry.site_count();
        match self {
            PotentialSchedule::Zero => Ok(()),
            PotentialSchedule::Static { values } => {
                if values.len() != n {
                    return Err(Error::param("values", format!("expected {n} entries, got {}", values.len())));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("values", "non-finite potential"));
                }
                Ok(())
            }
            PotentialSchedule::PiecewiseRandom { amplitude, interval, .. } => {
                if !(*amplitude >= 0.0) {
                    return Err(Error::param("amplitude", "must be nonnegative"));
                }
                if !(*interval > 0.0) {
                    return Err(Error::param("interval", "must be positive"));
                }
                Ok(())
            }
            PotentialSchedule::Quasiperiodic {
                amplitude,
                frequencies,
                phases,
            } => {
                if frequencies.is_empty() || frequencies.len() != phases.len() {
                    return Err(Error::param(
                        "frequencies",
                        "need at least one frequency and one phase per frequency",
                    ));
                }
                if !amplitude.is_finite() {
                    return Err(Error::param("amplitude", "must be finite"));
                }
                Ok(())
            }
            PotentialSchedule::Tabulated { times, values, slopes } => {
                if times.len() < 2 || values.len() != times.len() || slopes.len() != times.len() {
                    return Err(Error::Interpolation(
                        "table needs at least two knots with values and slopes at each".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Interpolation("knot times must increase strictly".into()));
                }
                if values.iter().chain(slopes).any(|row| row.len() != n) {
                    return Err(Error::Interpolation(format!("every knot needs {n} site values")));
                }
                Ok(())
            }
            PotentialSchedule::Superposed { parts } => parts.iter().try_for_each(|p| p.validate(geometry)),
        }
    }

    /// True when `V` is constant between consecutive breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        match self {
            PotentialSchedule::Zero | PotentialSchedule::Static { .. } | PotentialSchedule::PiecewiseRandom { .. } => {
                true
            }
            PotentialSchedule::Quasiperiodic { .. } | PotentialSchedule::Tabulated { .. } => false,
            PotentialSchedule::Superposed { parts } => parts.iter().all(|p| p.is_piecewise_constant()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSchedule::Zero => true,
            PotentialSchedule::Superposed { parts } => parts.iter().all(|p| p.is_zero()),
            _ => false,
        }
    }

    /// Times in `(t0, t1)` where `V` may fail to be smooth, sorted.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(t0, t1, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
        out
    }

    fn collect_breakpoints(&self, t0: f64, t1: f64, out: &mut Vec<f64>) {
        match self {
            PotentialSchedule::PiecewiseRandom { interval, .. } => {
                let mut k = (t0 / interval).floor() as i64 + 1;
                loop {
                    let t = k as f64 * interval;
                    if t >= t1 {
                        break;
                    }
                    if t > t0 {
                        out.push(t);
                    }
                    k += 1;
                }
            }
            PotentialSchedule::Tabulated { times, .. } => {
                out.extend(times.iter().copied().filter(|&t| t > t0 && t < t1));
            }
            PotentialSchedule::Superposed { parts } => {
                for p in parts {
                    p.collect_breakpoints(t0, t1, out);
                }
            }
            _ => {}
        }
    }

    /// Writes `V(t)` into `out`. `segment_mid` is a time strictly inside the
    /// smooth segment that contains `t`, selecting the piece at a breakpoint.
    pub fn fill(&self, t: f64, segment_mid: f64, geometry: &BoxGeometry, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.accumulate(t, segment_mid, geometry, out);
    }

    fn accumulate(&self, t: f64, mid: f64, geometry: &BoxGeometry, out: &mut [f64]) {
        match self {
            PotentialSchedule::Zero => {}
            PotentialSchedule::Static { values } => {
                for (o, v) in out.iter_mut().zip(values) {
                    *o += v;
                }
            }
            PotentialSchedule::PiecewiseRandom {
                amplitude,
                interval,
                seed,
            } => {
                let k = (mid / interval).floor().max(0.0) as u64;
                let mut piece = vec![0.0; out.len()];
                random_piece(*seed, k, *amplitude, &mut piece);
                for (o, v) in out.iter_mut().zip(piece) {
                    *o += v;
                }
            }
            PotentialSchedule::Quasiperiodic {
                amplitude,
                frequencies,
                phases,
            } => {
                let scale = amplitude / frequencies.len() as f64;
                for (i, o) in out.iter_mut().enumerate() {
                    let s: i64 = (0..geometry.dimension).map(|a| geometry.coord(i, a)).sum();
                    let base = 2.0 * std::f64::consts::PI * GOLDEN * s as f64;
                    *o += scale
                        * frequencies
                            .iter()
                            .zip(phases)
                            .map(|(w, p)| (base + w * t + p).cos())
                            .sum::<f64>();
                }
            }
            PotentialSchedule::Tabulated { times, values, slopes } => {
                let j = match times.partition_point(|&x| x <= mid) {
                    0 => 0,
                    p => (p - 1).min(times.len() - 2),
                };
                let (t0, t1) = (times[j], times[j + 1]);
                let h = t1 - t0;
                let s = ((t - t0) / h).clamp(0.0, 1.0);
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                for (i, o) in out.iter_mut().enumerate() {
                    *o += h00 * values[j][i] + h10 * h * slopes[j][i] + h01 * values[j + 1][i] + h11 * h * slopes[j + 1][i];
                }
            }
            PotentialSchedule::Superposed { parts } => {
                for p in parts {
                    p.accumulate(t, mid, geometry, out);
                }
            }
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match self {
            PotentialSchedule::Zero => "zero".into(),
            PotentialSchedule::Static { .. } => format!("static(|V|<={:.3})", self.bound()),
            PotentialSchedule::PiecewiseRandom {
                amplitude,
                interval,
                seed,
            } => format!("random(W={amplitude}, dt={interval}, seed={seed})"),
            PotentialSchedule::Quasiperiodic {
                amplitude, frequencies, ..
            } => format!("quasiperiodic(A={amplitude}, {} freqs)", frequencies.len()),
            PotentialSchedule::Tabulated { times, .. } => format!("tabulated({} knots)", times.len()),
            PotentialSchedule::Superposed { parts } => {
                let inner: Vec<String> = parts.iter().map(|p| p.describe()).collect();
                format!("sum[{}]", inner.join(" + "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> BoxGeometry {
        BoxGeometry::cube(1, 10).unwrap()
    }

    #[test]
    fn random_pieces_are_reproducible_and_bounded() {
        let g = geom();
        let v = PotentialSchedule::PiecewiseRandom {
            amplitude: 5.0,
            interval: 0.1,
            seed: 7,
        };
        let mut a = vec![0.0; g.site_count()];
        let mut b = vec![0.0; g.site_count()];
        v.fill(0.33, 0.35, &g, &mut a);
        v.fill(0.31, 0.35, &g, &mut b);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.abs() <= 5.0));
        v.fill(0.45, 0.45, &g, &mut b);
        assert_ne!(a, b);
        let mut c = vec![0.0; 3];
        random_piece(7, 3, 5.0, &mut c);
        assert_eq!(&a[..3], &c[..]);
    }

    #[test]
    fn random_values_look_uniform() {
        let mut v = vec![0.0; 20000];
        random_piece(1, 0, 1.0, &mut v);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn breakpoints_of_random_schedule() {
        let v = PotentialSchedule::PiecewiseRandom {
            amplitude: 1.0,
            interval: 0.25,
            seed: 0,
        };
        assert_eq!(v.breakpoints(0.0, 1.0), vec![0.25, 0.5, 0.75]);
        assert_eq!(v.breakpoints(0.3, 0.6), vec![0.5]);
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let g = BoxGeometry::cube(1, 1).unwrap();
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let times = vec![0.0, 0.5, 1.5];
        let v = PotentialSchedule::Tabulated {
            values: times.iter().map(|&t| vec![f(t); 3]).collect(),
            slopes: times.iter().map(|&t| vec![df(t); 3]).collect(),
            times,
        };
        v.validate(&g).unwrap();
        let mut out = vec![0.0; 3];
        for &t in &[0.1, 0.5, 0.9, 1.3] {
            v.fill(t, t, &g, &mut out);
            assert!((out[0] - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn quasiperiodic_within_bound() {
        let g = geom();
        let v = PotentialSchedule::Quasiperiodic {
            amplitude: 2.0,
            frequencies: vec![1.0, 1.618],
            phases: vec![0.0, 0.5],
        };
        v.validate(&g).unwrap();
        let mut out = vec![0.0; g.site_count()];
        for k in 0..50 {
            v.fill(k as f64 * 0.37, k as f64 * 0.37, &g, &mut out);
            assert!(out.iter().all(|x| x.abs() <= v.bound() + 1e-12));
        }
    }

    #[test]
    fn superposition_adds() {
        let g = BoxGeometry::cube(1, 1).unwrap();
        let v = PotentialSchedule::Superposed {
            parts: vec![
                PotentialSchedule::Static {
                    values: vec![1.0, 2.0, 3.0],
                },
                PotentialSchedule::Static {
                    values: vec![0.5, 0.5, 0.5],
                },
            ],
        };
        let mut out = vec![0.0; 3];
        v.fill(0.0, 0.0, &g, &mut out);
        assert_eq!(out, vec![1.5, 2.5, 3.5]);
        assert_eq!(v.bound(), 3.5);
        assert!(v.is_piecewise_constant());
    }
}
