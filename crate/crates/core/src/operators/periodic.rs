use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};

/// `(-Δ)^s` of periodic samples on `[0, period)` via the Fourier symbol `|ξ|^{2s}`.
pub fn fraclap_periodic(samples: &[f64], period: f64, s: f64) -> Result<Vec<f64>> {
    let n = samples.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !(period > 0.0) || !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("need period > 0 and s in (0,1), got {period}, {s}")));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let base = 2.0 * std::f64::consts::PI / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if k <= n / 2 { k as f64 } else { n as f64 - k as f64 };
        *c *= (base * freq).powf(2.0 * s) / n as f64;
    }
    inv.process(&mut buf);
    Ok(buf.into_iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_maps_to_zero() {
        let v = fraclap_periodic(&[3.0; 64], 2.0 * PI, 0.75).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn cosine_modes() {
        let n = 256;
        let xs: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        for s in [0.6, 0.75, 0.9] {
            for k in [1.0f64, 2.0, 4.0] {
                let u: Vec<f64> = xs.iter().map(|x| (k * x).cos()).collect();
                let v = fraclap_periodic(&u, 2.0 * PI, s).unwrap();
                let sym = k.powf(2.0 * s);
                for (a, b) in v.iter().zip(&u) {
                    assert!((a - sym * b).abs() < 1e-10 * sym);
                }
            }
        }
        assert!((2f64.powf(1.5) - 2.828_427_124_746_19).abs() < 1e-12);
    }
}
