use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{fd_gradient, minimize_bounded, MinimizeOptions, Objective};
use crate::error::{Error, Result};

const MAX_ENUMERATED: usize = 6;
const RANDOM_CORNERS: usize = 64;
const INTERIOR_STARTS: usize = 2;

fn check_radius(s: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::validation("perturbation magnitude must be positive"));
    }
    Ok(())
}

fn perturbation_box(x0: &[f64], s: f64) -> Vec<[f64; 2]> {
    x0.iter().map(|v| [v - s, v + s]).collect()
}

/// First-order worst case `s * ||grad obj(x0)||_1` over `|dx_i| <= s`.
pub fn worst_case_linear(obj: &dyn Objective, x0: &[f64], s: f64) -> Result<f64> {
    check_radius(s)?;
    let g = fd_gradient(obj, x0, &perturbation_box(x0, s), None)?;
    Ok(s * g.iter().map(|v| v.abs()).sum::<f64>())
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase {
    /// Largest `|obj(x0 + dx) - obj(x0)|` found.
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Corners probed directly, with their deviations.
    pub corners: Vec<(Vec<f64>, f64)>,
}

/// Worst case over the box `||dx||_inf <= s` by bounded maximization of
/// `+-(obj - obj(x0))` from the box corners (all of them up to 6 entries,
/// 64 random ones above) and interior starts.
pub fn worst_case_direct(obj: &dyn Objective, x0: &[f64], s: f64, seed: u64) -> Result<WorstCase> {
    check_radius(s)?;
    let n = x0.len();
    let bounds = perturbation_box(x0, s);
    let f0 = obj.eval(x0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signs: Vec<Vec<bool>> = if n <= MAX_ENUMERATED {
        (0..1usize << n).map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect()
    } else {
        (0..RANDOM_CORNERS).map(|_| (0..n).map(|_| rng.random::<bool>()).collect()).collect()
    };
    let corner_points: Vec<Vec<f64>> =
        signs.iter().map(|sg| sg.iter().zip(x0).map(|(&up, v)| if up { v + s } else { v - s }).collect()).collect();
    let mut starts = corner_points.clone();
    starts.push(x0.to_vec());
    for _ in 0..INTERIOR_STARTS {
        starts.push(x0.iter().map(|v| v + s * rng.random_range(-0.5..0.5)).collect());
    }
    let corners =
        corner_points.par_iter().map(|c| Ok((c.clone(), (obj.eval(c)? - f0).abs()))).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = (0..starts.len()).flat_map(|i| [(i, 1.0), (i, -1.0)]).collect();
    let opts = MinimizeOptions::default();
    let found = jobs
        .par_iter()
        .map(|&(i, sign)| {
            let neg = |x: &[f64]| -> Result<f64> { Ok(-sign * (obj.eval(x)? - f0)) };
            let m = minimize_bounded(&neg, &starts[i], &bounds, &opts)?;
            Ok((m.x, m.f.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax, value) = corners
        .iter()
        .chain(&found)
        .filter(|(_, v)| v.is_finite())
        .fold((x0.to_vec(), 0.0), |best, (x, v)| if *v > best.1 { (x.clone(), *v) } else { best });
    Ok(WorstCase { value, argmax, corners })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_formula() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x[0] - 2.0 * x[1] + 5.0) };
        assert!((worst_case_linear(&f, &[0.3, 0.1], 0.1).unwrap() - 0.3).abs() < 1e-10);
        let c = |_: &[f64]| -> Result<f64> { Ok(4.0) };
        assert_eq!(worst_case_linear(&c, &[0.0], 0.1).unwrap(), 0.0);
        assert!(worst_case_linear(&c, &[0.0], 0.0).is_err());
    }

    #[test]
    fn linear_direct_equals_taylor() {
        let f = |x: &[f64]| -> Result<f64> { Ok(0.5 * x[0] - 1.5 * x[1] + 0.25 * x[2]) };
        let x0 = [0.2, -0.4, 1.0];
        let lin = worst_case_linear(&f, &x0, 0.1).unwrap();
        let direct = worst_case_direct(&f, &x0, 0.1, 1).unwrap();
        assert!((lin - direct.value).abs() < 1e-6, "{lin} {}", direct.value);
    }

    #[test]
    fn square_at_origin() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x[0] * x[0]) };
        let w = worst_case_direct(&f, &[0.0], 0.1, 0).unwrap();
        assert!((w.value - 0.01).abs() < 1e-12);
        assert!((w.argmax[0].abs() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn cubic_dominates_probed_corners() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x[0].powi(3) - x[0] * x[1] + 0.3 * x[1].powi(2)) };
        let w = worst_case_direct(&f, &[0.1, 0.2], 0.5, 7).unwrap();
        assert_eq!(w.corners.len(), 4);
        assert!(w.corners.iter().all(|(_, v)| w.value >= *v));
    }

    #[test]
    fn many_entries_use_random_corners() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x.iter().sum()) };
        let w = worst_case_direct(&f, &[0.0; 8], 0.1, 3).unwrap();
        assert_eq!(w.corners.len(), 64);
        assert!((w.value - 0.8).abs() < 1e-6);
    }
}
