use crate::assembly::gauss_legendre;
use crate::error::{Error, Result};

/// Field flatness `(eta1, eta2)` of per-cell peak values.
///
/// `eta1 = (1 - (max|E| - min|E|)) / mean|E|`,
/// `eta2 = 1 - std(E) / mean|E|` with the population standard deviation.
/// Pass peaks normalized by their mean for the usual flatness fraction.
pub fn field_flatness(peaks: &[f64]) -> Result<(f64, f64)> {
    if peaks.is_empty() {
        return Err(Error::validation("field flatness needs at least one cell"));
    }
    let n = peaks.len() as f64;
    let abs: Vec<f64> = peaks.iter().map(|v| v.abs()).collect();
    let mean_abs = abs.iter().sum::<f64>() / n;
    if mean_abs == 0.0 {
        return Err(Error::validation("field flatness is undefined for zero peaks"));
    }
    let max = abs.iter().copied().fold(f64::MIN, f64::max);
    let min = abs.iter().copied().fold(f64::MAX, f64::min);
    let mean = peaks.iter().sum::<f64>() / n;
    let std = (peaks.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(((1.0 - (max - min)) / mean_abs, 1.0 - std / mean_abs))
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.x[1] - self.x[0]) * (self.y[1] - self.y[0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientMetrics {
    /// Mean of `tau = d|B|/dx` over the region.
    pub tau_av: f64,
    /// RMS of `tau / tau_av - 1` over the region.
    pub eps: f64,
}

/// Average gradient and inhomogeneity of `|B|` over a beam region.
///
/// `tau` comes from a fourth-order central difference of `b_norm`; the
/// region integrals use a `density x density` Gauss-Legendre rule.
pub fn gradient_metrics(
    b_norm: impl Fn([f64; 2]) -> Result<f64>,
    region: Rect,
    density: usize,
) -> Result<GradientMetrics> {
    if !(region.area() > 0.0) || density == 0 {
        return Err(Error::validation("beam region must have positive area and density"));
    }
    let h = 1e-3 * (region.x[1] - region.x[0]);
    let tau = |x: f64, y: f64| -> Result<f64> {
        let f = |dx: f64| b_norm([x + dx, y]);
        Ok((f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h))
    };
    let (gx, gw) = gauss_legendre(density);
    let map = |r: [f64; 2]| -> Vec<(f64, f64)> {
        gx.iter().zip(&gw).map(|(x, w)| (r[0] + (r[1] - r[0]) * x, (r[1] - r[0]) * w)).collect()
    };
    let (xs, ys) = (map(region.x), map(region.y));
    let mut samples = Vec::with_capacity(xs.len() * ys.len());
    for &(y, wy) in &ys {
        for &(x, wx) in &xs {
            samples.push((tau(x, y)?, wx * wy));
        }
    }
    let area = region.area();
    let tau_av = samples.iter().map(|(t, w)| t * w).sum::<f64>() / area;
    if tau_av == 0.0 {
        return Err(Error::validation("average gradient is zero, inhomogeneity is undefined"));
    }
    let eps = (samples.iter().map(|(t, w)| w * (t / tau_av - 1.0).powi(2)).sum::<f64>() / area).sqrt();
    Ok(GradientMetrics { tau_av, eps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_peaks_are_flat() {
        assert_eq!(field_flatness(&[1.0; 9]).unwrap(), (1.0, 1.0));
        assert_eq!(field_flatness(&[0.7]).unwrap().1, 1.0);
        assert!(field_flatness(&[]).is_err());
        assert!(field_flatness(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn flatness_hand_arithmetic() {
        let (e1, e2) = field_flatness(&[1.0, 1.0, 1.0, 0.9]).unwrap();
        let mean = 3.9 / 4.0;
        let var = (3.0 * (1.0f64 - mean).powi(2) + (0.9f64 - mean).powi(2)) / 4.0;
        assert!((e1 - 0.9 / mean).abs() < 1e-15);
        assert!((e2 - (1.0 - var.sqrt() / mean)).abs() < 1e-15);
    }

    #[test]
    fn linear_norm_is_homogeneous() {
        let m = gradient_metrics(|x| Ok(x[0]), Rect { x: [0.0, 1.0], y: [-1.0, 1.0] }, 4).unwrap();
        assert!((m.tau_av - 1.0).abs() < 1e-10);
        assert!(m.eps < 1e-8);
    }

    #[test]
    fn quadratic_norm() {
        let r = Rect { x: [1.0, 2.0], y: [0.0, 0.5] };
        let m = gradient_metrics(|x| Ok(x[0] * x[0]), r, 6).unwrap();
        assert!((m.tau_av - 3.0).abs() < 1e-9);
        assert!((m.eps - 1.0 / 27f64.sqrt()).abs() < 1e-9);
        let finer = gradient_metrics(|x| Ok(x[0] * x[0]), r, 12).unwrap();
        assert!((finer.eps - m.eps).abs() < 1e-8);
    }

    #[test]
    fn constant_norm_has_no_gradient() {
        assert!(gradient_metrics(|_| Ok(2.0), Rect { x: [0.0, 1.0], y: [0.0, 1.0] }, 3).is_err());
    }
}
