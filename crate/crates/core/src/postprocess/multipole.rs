use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Normal multipole coefficients on a reference circle.
///
/// Normalization: a field with `B_r(r0, phi) = C sin(n phi)` has `B_n = C`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleSet {
    pub r0: f64,
    /// `normal[n - 1]` is `B_n`.
    pub normal: Vec<f64>,
}

impl MultipoleSet {
    /// `B_n` for `n >= 1`.
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.normal.get(i).copied())
    }
}

/// `B_1..B_N` of a planar field sampled on the circle of radius `r0`
/// around `center`, by the trapezoidal rule with `4N + 16` points.
pub fn multipole_coeffs(
    field: impl Fn([f64; 2]) -> Result<[f64; 2]>,
    center: [f64; 2],
    r0: f64,
    n_max: usize,
) -> Result<MultipoleSet> {
    if !(r0 > 0.0) {
        return Err(Error::validation("reference radius must be positive"));
    }
    if n_max == 0 {
        return Err(Error::validation("need at least one multipole order"));
    }
    let m = 4 * n_max + 16;
    let mut normal = vec![0.0; n_max];
    for j in 0..m {
        let phi = 2.0 * PI * j as f64 / m as f64;
        let (s, c) = phi.sin_cos();
        let b = field([center[0] + r0 * c, center[1] + r0 * s])?;
        let br = b[0] * c + b[1] * s;
        for (n, bn) in normal.iter_mut().enumerate() {
            *bn += br * ((n + 1) as f64 * phi).sin();
        }
    }
    for bn in &mut normal {
        *bn *= 2.0 / m as f64;
        if !bn.is_finite() {
            return Err(Error::solver("multipole coefficient is not finite"));
        }
    }
    Ok(MultipoleSet { r0, normal })
}

/// Quadrupole gradient `g = 2 B_2 / r0^2`.
pub fn quadrupole_gradient(m: &MultipoleSet) -> Result<f64> {
    let b2 = m.get(2).ok_or_else(|| Error::validation("quadrupole gradient needs N >= 2"))?;
    Ok(2.0 * b2 / (m.r0 * m.r0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dipole() {
        let m = multipole_coeffs(|_| Ok([0.0, 1.7]), [0.0, 0.0], 0.3, 6).unwrap();
        assert!((m.normal[0] - 1.7).abs() < 1e-12);
        assert!(m.normal[1..].iter().all(|b| b.abs() < 1e-12));
    }

    #[test]
    fn quadrupole() {
        let g = 3.5;
        let r0 = 0.4;
        let m = multipole_coeffs(|x| Ok([g * x[1], g * x[0]]), [0.0, 0.0], r0, 8).unwrap();
        assert!((m.get(2).unwrap() - g * r0).abs() < 1e-12);
        for n in [1, 3, 4, 5, 6, 7, 8] {
            assert!(m.get(n).unwrap().abs() < 1e-12);
        }
        assert!((quadrupole_gradient(&m).unwrap() - 2.0 * g / r0).abs() < 1e-10);
    }

    #[test]
    fn pure_sextupole_is_orthogonal() {
        // B_r = sin(3 phi) on r = r0
        let r0 = 2.0;
        let f = |x: [f64; 2]| {
            let phi = x[1].atan2(x[0]);
            let br = (3.0 * phi).sin();
            Ok([br * phi.cos(), br * phi.sin()])
        };
        let m = multipole_coeffs(f, [0.0, 0.0], r0, 10).unwrap();
        for n in 1..=10 {
            let want = if n == 3 { 1.0 } else { 0.0 };
            assert!((m.get(n).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_field_and_formula() {
        let m = multipole_coeffs(|_| Ok([0.0, 0.0]), [1.0, 1.0], 1.0, 3).unwrap();
        assert!(m.normal.iter().all(|&b| b == 0.0));
        let unit = MultipoleSet { r0: 1.0, normal: vec![0.0, 1.0] };
        assert_eq!(quadrupole_gradient(&unit).unwrap(), 2.0);
        assert!(quadrupole_gradient(&MultipoleSet { r0: 1.0, normal: vec![1.0] }).is_err());
    }

    #[test]
    fn gradient_scales_inversely_with_radius() {
        let f = |x: [f64; 2]| Ok([x[1], x[0]]);
        let g1 = quadrupole_gradient(&multipole_coeffs(f, [0.0, 0.0], 0.5, 4).unwrap()).unwrap();
        let g2 = quadrupole_gradient(&multipole_coeffs(f, [0.0, 0.0], 1.0, 4).unwrap()).unwrap();
        assert!((g1 - 2.0 * g2).abs() < 1e-8);
    }
}
