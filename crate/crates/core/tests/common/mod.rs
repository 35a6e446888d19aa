//! Shared strategies and checks for the spline property suites.

use igakit::splines::KnotVector;
use proptest::prelude::*;

/// Open knot vectors of degree 1..=6 whose interior knots sit on a 1/64
/// grid, so repeated knots show up often. Multiplicities are capped at the
/// degree.
pub fn open_knot_vector() -> impl Strategy<Value = KnotVector> {
    (1usize..=6, prop::collection::vec(1u32..64, 0..10)).prop_map(|(p, mut interior)| {
        interior.sort_unstable();
        let mut knots = vec![0.0; p + 1];
        let mut last = (0, 0);
        for k in interior {
            last = if k == last.0 { (k, last.1 + 1) } else { (k, 1) };
            if last.1 <= p {
                knots.push(k as f64 / 64.0);
            }
        }
        knots.extend(std::iter::repeat_n(1.0, p + 1));
        KnotVector::new(knots, p).expect("valid open knot vector")
    })
}

pub fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 16)
}

pub fn check_partition_of_unity(kv: &KnotVector, xs: &[f64]) -> Result<(), String> {
    for &xi in xs.iter().chain(&[0.0, 1.0]) {
        let sum: f64 = kv.eval(xi, 0).map_err(|e| e.to_string())?.ders[0].iter().sum();
        if (sum - 1.0).abs() >= 1e-13 {
            return Err(format!("basis sums to {sum} at {xi}"));
        }
    }
    Ok(())
}

pub fn check_non_negative(kv: &KnotVector, xs: &[f64]) -> Result<(), String> {
    for &xi in xs {
        if kv.eval(xi, 0).map_err(|e| e.to_string())?.ders[0].iter().any(|&v| v < 0.0) {
            return Err(format!("negative basis value at {xi}"));
        }
    }
    Ok(())
}

pub fn check_local_support(kv: &KnotVector, xs: &[f64]) -> Result<(), String> {
    let (t, p, n) = (kv.knots(), kv.degree(), kv.num_basis());
    for &xi in xs {
        let row = kv.eval(xi, 0).map_err(|e| e.to_string())?.dense_row(0, n);
        for (i, v) in row.iter().enumerate() {
            let inside = t[i] <= xi && (xi < t[i + p + 1] || (xi == 1.0 && t[i + p + 1] == 1.0));
            if !inside && *v != 0.0 {
                return Err(format!("B{i} is {v} at {xi}, outside its support"));
            }
        }
        if row.iter().filter(|v| **v != 0.0).count() > p + 1 {
            return Err(format!("more than p + 1 functions active at {xi}"));
        }
    }
    Ok(())
}

/// Derivatives of order `< p - m + 1` match across a knot of multiplicity
/// `m`; order `p - m + 1` jumps.
pub fn check_knot_continuity(kv: &KnotVector) -> Result<(), String> {
    let (t, p, n) = (kv.knots(), kv.degree(), kv.num_basis());
    for u in kv.breakpoints().into_iter().filter(|&u| u > 0.0 && u < 1.0) {
        let m = kv.multiplicity(u);
        let right = kv.find_span(u).map_err(|e| e.to_string())?;
        let left = t.iter().position(|&k| k == u).expect("breakpoint is a knot") - 1;
        let (l, r) = (kv.eval_in_span(left, u, p), kv.eval_in_span(right, u, p));
        for k in 0..=p {
            let (lk, rk) = (l.dense_row(k, n), r.dense_row(k, n));
            let scale = lk.iter().chain(&rk).fold(1.0f64, |a, v| a.max(v.abs()));
            let jump = lk.iter().zip(&rk).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let tol = 1e-9 * scale;
            if k + m <= p && jump >= tol {
                return Err(format!("order {k} jumps by {jump} at {u} (multiplicity {m})"));
            }
            if k == p + 1 - m && jump <= tol {
                return Err(format!("order {k} is continuous at {u} (multiplicity {m})"));
            }
        }
    }
    Ok(())
}
