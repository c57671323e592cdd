use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// First-derivative approximation along one grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// Second-order central differences, one-sided 3-point ends.
    Central2,
    /// Fourth-order central differences, one-sided 5-point ends.
    Central4,
    /// FFT differentiation; assumes the samples are one period.
    Spectral,
}

impl DerivativeScheme {
    pub fn from_order(order: u32) -> Option<Self> {
        match order {
            2 => Some(DerivativeScheme::Central2),
            4 => Some(DerivativeScheme::Central4),
            0 => Some(DerivativeScheme::Spectral),
            _ => None,
        }
    }

    pub fn min_points(self) -> usize {
        match self {
            DerivativeScheme::Central2 => 3,
            DerivativeScheme::Central4 => 5,
            DerivativeScheme::Spectral => 2,
        }
    }

    /// A cheaper or different scheme used to estimate the derivative error.
    pub(crate) fn companion(self) -> Self {
        match self {
            DerivativeScheme::Central4 => DerivativeScheme::Central2,
            _ => DerivativeScheme::Central4,
        }
    }
}

/// `d/dx` of uniformly spaced samples with spacing `h`.
pub fn differentiate_line(f: &[Complex64], h: f64, scheme: DerivativeScheme) -> Vec<Complex64> {
    let n = f.len();
    assert!(n >= scheme.min_points(), "too few points for {scheme:?}");
    match scheme {
        DerivativeScheme::Central2 => {
            let s = 1.0 / (2.0 * h);
            let mut d = vec![Complex64::new(0.0, 0.0); n];
            d[0] = (f[0] * -3.0 + f[1] * 4.0 - f[2]) * s;
            d[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * s;
            for i in 1..n - 1 {
                d[i] = (f[i + 1] - f[i - 1]) * s;
            }
            d
        }
        DerivativeScheme::Central4 => {
            let s = 1.0 / (12.0 * h);
            let mut d = vec![Complex64::new(0.0, 0.0); n];
            d[0] = (f[0] * -25.0 + f[1] * 48.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) * s;
            d[1] = (f[0] * -3.0 - f[1] * 10.0 + f[2] * 18.0 - f[3] * 6.0 + f[4]) * s;
            d[n - 1] = (f[n - 1] * 25.0 - f[n - 2] * 48.0 + f[n - 3] * 36.0 - f[n - 4] * 16.0 + f[n - 5] * 3.0) * s;
            d[n - 2] = (f[n - 1] * 3.0 + f[n - 2] * 10.0 - f[n - 3] * 18.0 + f[n - 4] * 6.0 - f[n - 5]) * s;
            for i in 2..n - 2 {
                d[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * s;
            }
            d
        }
        DerivativeScheme::Spectral => {
            let mut planner = FftPlanner::<f64>::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            let mut buf = f.to_vec();
            fwd.process(&mut buf);
            let period = n as f64 * h;
            for (m, c) in buf.iter_mut().enumerate() {
                let k = if 2 * m < n {
                    m as f64
                } else if 2 * m == n {
                    0.0
                } else {
                    m as f64 - n as f64
                };
                *c *= Complex64::new(0.0, 2.0 * PI * k / period);
            }
            inv.process(&mut buf);
            let norm = 1.0 / n as f64;
            buf.iter_mut().for_each(|c| *c *= norm);
            buf
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(n: usize, h: f64, k: f64) -> Vec<Complex64> {
        (0..n).map(|i| Complex64::from_polar(1.0, k * i as f64 * h)).collect()
    }

    #[test]
    fn polynomials_are_exact() {
        let h = 0.1;
        let cubic: Vec<Complex64> = (0..12)
            .map(|i| {
                let x = i as f64 * h;
                Complex64::new(x * x * x - 2.0 * x, x * x)
            })
            .collect();
        let d = differentiate_line(&cubic, h, DerivativeScheme::Central4);
        for (i, v) in d.iter().enumerate() {
            let x = i as f64 * h;
            assert!((v - Complex64::new(3.0 * x * x - 2.0, 2.0 * x)).norm() < 1e-11, "i={i}");
        }
        let quad: Vec<Complex64> = (0..6).map(|i| Complex64::new((i as f64 * h).powi(2), 0.0)).collect();
        let d = differentiate_line(&quad, h, DerivativeScheme::Central2);
        for (i, v) in d.iter().enumerate() {
            assert!((v.re - 2.0 * i as f64 * h).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_exact_on_periodic_modes() {
        let n = 32;
        let h = 2.0 * PI / n as f64;
        let f = plane(n, h, 3.0);
        let d = differentiate_line(&f, h, DerivativeScheme::Spectral);
        for (a, b) in d.iter().zip(&f) {
            assert!((a - b * Complex64::new(0.0, 3.0)).norm() < 1e-12);
        }
    }
}
