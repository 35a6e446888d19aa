//! Univariate and tensor-product B-spline / NURBS bases on the reference
//! interval `[0, 1]`.
//!
//! Knot vectors are always open (end knots repeated `p + 1` times). Basis
//! evaluation reports only the `p + 1` functions that are active on the knot
//! span containing the evaluation point; every other function is zero there.
//! Spans are half open, `[xi_i, xi_{i+1})`, except the last non-empty span
//! which also owns `xi = 1`.

mod refine;
mod tensor;

pub use refine::{refine_knots, TransferMatrix};
pub use tensor::{eval_tensor, TensorBasisSpec, TensorValues};

use crate::error::{Error, Result};

/// Largest polynomial degree accepted by [`KnotVector::new`].
pub const MAX_DEGREE: usize = 10;

/// Open knot vector together with its polynomial degree.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

/// Values and derivatives of the active basis functions at one point.
///
/// `ders[k][j]` is the `k`-th derivative of basis function `first + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisValues {
    pub first: usize,
    pub ders: Vec<Vec<f64>>,
}

impl BasisValues {
    pub fn degree(&self) -> usize {
        self.ders[0].len() - 1
    }

    /// Value (`order = 0`) or derivative of the `j`-th active function.
    #[inline]
    pub fn get(&self, order: usize, j: usize) -> f64 {
        self.ders.get(order).map_or(0.0, |row| row[j])
    }

    /// Scatters row `order` into a dense vector of length `n`.
    pub fn dense_row(&self, order: usize, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        if let Some(row) = self.ders.get(order) {
            for (j, v) in row.iter().enumerate() {
                out[self.first + j] = *v;
            }
        }
        out
    }
}

pub(crate) fn check_param(xi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::Domain { value: xi })
    }
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::validation(format!("degree {degree} exceeds the supported maximum {MAX_DEGREE}")));
        }
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::validation(format!(
                "degree {p} needs at least {} knots, got {}",
                2 * (p + 1),
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::validation("knot values must be finite"));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::validation("knots must be non-decreasing"));
        }
        let len = knots.len();
        if knots[0] != 0.0 || knots[len - 1] != 1.0 {
            return Err(Error::validation("knot vectors must start at 0 and end at 1"));
        }
        if knots[p] != 0.0 || knots[p + 1] == 0.0 {
            return Err(Error::validation(format!("first knot must have multiplicity exactly {}", p + 1)));
        }
        if knots[len - 1 - p] != 1.0 || knots[len - 2 - p] == 1.0 {
            return Err(Error::validation(format!("last knot must have multiplicity exactly {}", p + 1)));
        }
        let mut run = 1;
        for w in knots.windows(2) {
            run = if w[1] == w[0] { run + 1 } else { 1 };
            if run > p + 1 {
                return Err(Error::validation(format!("knot {} repeated more than {} times", w[0], p + 1)));
            }
        }
        Ok(Self { knots, degree })
    }

    /// Open knot vector with `elements` equal spans and maximal smoothness.
    pub fn uniform(degree: usize, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::validation("at least one element is required"));
        }
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..elements).map(|i| i as f64 / elements as f64));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `len(knots) - p - 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    pub fn multiplicity(&self, value: f64) -> usize {
        self.knots.iter().filter(|&&k| k == value).count()
    }

    /// Indices `i` of the non-empty spans `[knots[i], knots[i+1])`.
    pub fn element_spans(&self) -> Vec<usize> {
        (self.degree..self.num_basis()).filter(|&i| self.knots[i + 1] > self.knots[i]).collect()
    }

    pub fn num_elements(&self) -> usize {
        self.element_spans().len()
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.num_basis()).map(|i| 0.5 * (self.knots[i] + self.knots[i + 1])).collect();
        }
        (0..self.num_basis()).map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64).collect()
    }

    /// Knot vector of the derivative space: first and last knot removed and
    /// degree lowered by one.
    pub fn derivative_space(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::validation("cannot differentiate a degree-0 spline space"));
        }
        let len = self.knots.len();
        Self::new(self.knots[1..len - 1].to_vec(), self.degree - 1)
    }

    /// Knots to insert so that every element is split into `count` equal
    /// parts.
    pub fn subdivision_knots(&self, count: usize) -> Vec<f64> {
        let bp = self.breakpoints();
        let mut out = Vec::new();
        for w in bp.windows(2) {
            for k in 1..count {
                out.push(w[0] + (w[1] - w[0]) * k as f64 / count as f64);
            }
        }
        out
    }

    /// Knot vector of degree `degree` on the same breakpoints, each element
    /// split into `refine` equal parts.
    ///
    /// Interior knots of `self` keep their continuity (capped at
    /// `degree - 1`); the new knots get maximal continuity.
    pub fn discretization(&self, degree: usize, refine: usize) -> Result<Self> {
        if refine == 0 {
            return Err(Error::validation("refinement count must be at least 1"));
        }
        let bp = self.breakpoints();
        let mut knots = vec![0.0; degree + 1];
        for (e, w) in bp.windows(2).enumerate() {
            if e > 0 {
                let m = self.multiplicity(w[0]);
                let regularity = self.degree.saturating_sub(m);
                let mult = degree - regularity.min(degree.saturating_sub(1));
                knots.extend(std::iter::repeat_n(w[0], mult.max(1)));
            }
            for k in 1..refine {
                knots.push(w[0] + (w[1] - w[0]) * k as f64 / refine as f64);
            }
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(knots, degree)
    }

    pub fn find_span(&self, xi: f64) -> Result<usize> {
        check_param(xi)?;
        let n = self.num_basis();
        if xi >= self.knots[n] {
            return Ok(n - 1);
        }
        let count = self.knots[..n].partition_point(|&k| k <= xi);
        Ok((count - 1).max(self.degree))
    }

    /// Active basis functions and their derivatives up to `max_deriv`.
    pub fn eval(&self, xi: f64, max_deriv: usize) -> Result<BasisValues> {
        let span = self.find_span(xi)?;
        Ok(self.eval_in_span(span, xi, max_deriv))
    }

    /// Like [`KnotVector::eval`] with a caller-chosen span; used by element
    /// loops that already know which element they are in.
    pub fn eval_in_span(&self, span: usize, xi: f64, max_deriv: usize) -> BasisValues {
        BasisValues {
            first: span - self.degree,
            ders: basis_derivatives(&self.knots, self.degree, span, xi, max_deriv),
        }
    }
}

/// Cox-de Boor triangle with derivatives (Piegl & Tiller, A2.3).
fn basis_derivatives(knots: &[f64], p: usize, span: usize, xi: f64, nd: usize) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = xi - knots[span + 1 - j];
        right[j] = knots[span + j] - xi;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = if ndu[j][r] == 0.0 { 0.0 } else { ndu[r][j - 1] / ndu[j][r] };
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let top = nd.min(p);
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0, 1);
        a[0][0] = 1.0;
        for k in 1..=top {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let rk = rk as usize;
                a[s2][0] = div(a[s1][0], ndu[pk + 1][rk]);
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r <= pk + 1 { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = div(a[s1][j] - a[s1][j - 1], ndu[pk + 1][idx]);
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = div(-a[s1][k - 1], ndu[pk + 1][r]);
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=top {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Free-function form of [`KnotVector::find_span`].
pub fn find_span(kv: &KnotVector, xi: f64) -> Result<usize> {
    kv.find_span(xi)
}

/// B-spline basis values and derivatives at `xi`.
pub fn eval_bspline(kv: &KnotVector, xi: f64, max_deriv: usize) -> Result<BasisValues> {
    kv.eval(xi, max_deriv)
}

/// Rational basis `N_i = w_i B_i / sum_j w_j B_j` and its derivatives.
pub fn eval_nurbs(kv: &KnotVector, weights: &[f64], xi: f64, max_deriv: usize) -> Result<BasisValues> {
    if weights.len() != kv.num_basis() {
        return Err(Error::validation(format!("expected {} weights, got {}", kv.num_basis(), weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::validation(format!("weights must be positive, got {w}")));
    }
    let b = kv.eval(xi, max_deriv)?;
    Ok(rationalize(&b, &weights[b.first..b.first + b.degree() + 1]))
}

/// Applies the quotient rule to B-spline values; `w` holds the weights of the
/// active functions only.
pub(crate) fn rationalize(b: &BasisValues, w: &[f64]) -> BasisValues {
    let nd = b.ders.len() - 1;
    let np = w.len();
    let wder: Vec<f64> = (0..=nd).map(|k| (0..np).map(|j| w[j] * b.ders[k][j]).sum()).collect();
    let mut out = vec![vec![0.0; np]; nd + 1];
    for k in 0..=nd {
        for j in 0..np {
            let mut v = w[j] * b.ders[k][j];
            let mut binom = 1.0;
            for i in 1..=k {
                binom = binom * (k - i + 1) as f64 / i as f64;
                v -= binom * wder[i] * out[k - i][j];
            }
            out[k][j] = v / wder[0];
        }
    }
    BasisValues { first: b.first, ders: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook recursion, with 0/0 taken as 0; independent of the triangle
    /// scheme used by `eval`.
    fn cox_de_boor(knots: &[f64], i: usize, p: usize, xi: f64, last: bool) -> f64 {
        if p == 0 {
            let inside = knots[i] <= xi && xi < knots[i + 1];
            let closing = last && xi == 1.0 && knots[i + 1] == 1.0 && knots[i] < 1.0;
            return if inside || closing { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 != 0.0 {
            v += (xi - knots[i]) / d1 * cox_de_boor(knots, i, p - 1, xi, last);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 != 0.0 {
            v += (knots[i + p + 1] - xi) / d2 * cox_de_boor(knots, i + 1, p - 1, xi, last);
        }
        v
    }

    fn fig2() -> KnotVector {
        KnotVector::new(vec![0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0], 1).unwrap()
    }

    #[test]
    fn span_of_midpoint_is_middle_element() {
        let kv = fig2();
        let s = kv.find_span(0.5).unwrap();
        assert_eq!(s, 2);
        assert!(kv.knots()[s] <= 0.5 && 0.5 < kv.knots()[s + 1]);
    }

    #[test]
    fn span_closure_at_one() {
        let kv = fig2();
        assert_eq!(kv.find_span(0.0).unwrap(), 1);
        assert_eq!(kv.find_span(1.0).unwrap(), kv.find_span(1.0 - 1e-15).unwrap());
    }

    #[test]
    fn out_of_range_parameter_is_domain_error() {
        let kv = fig2();
        assert!(matches!(kv.find_span(1.5), Err(Error::Domain { .. })));
        assert!(matches!(kv.eval(-0.1, 0), Err(Error::Domain { .. })));
        assert!(kv.eval(f64::NAN, 0).is_err());
    }

    #[test]
    fn hat_function_peaks_at_its_knot() {
        let kv = fig2();
        let row = kv.eval(1.0 / 3.0, 0).unwrap().dense_row(0, 4);
        assert_eq!(row, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn left_endpoint_interpolates() {
        let kv = KnotVector::new(vec![0., 0., 0., 0.2, 0.4, 0.4, 0.6, 0.8, 1., 1., 1.], 2).unwrap();
        let row = kv.eval(0.0, 0).unwrap().dense_row(0, kv.num_basis());
        assert_eq!(row[0], 1.0);
        assert!(row[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_naive_recursion() {
        let kv = KnotVector::new(vec![0., 0., 0., 0.2, 0.4, 0.4, 0.6, 0.8, 1., 1., 1.], 2).unwrap();
        for s in 0..=200 {
            let xi = s as f64 / 200.0;
            let row = kv.eval(xi, 0).unwrap().dense_row(0, kv.num_basis());
            for (i, v) in row.iter().enumerate() {
                let reference = cox_de_boor(kv.knots(), i, 2, xi, true);
                assert!((v - reference).abs() < 1e-14, "xi={xi} i={i}");
            }
        }
    }

    #[test]
    fn invalid_knot_vectors_rejected() {
        assert!(KnotVector::new(vec![0., 0., 1.], 1).is_err());
        assert!(KnotVector::new(vec![0., 0., 0., 1., 1.], 1).is_err());
        assert!(KnotVector::new(vec![0., 0., 0.6, 0.4, 1., 1.], 1).is_err());
        assert!(KnotVector::new(vec![0., 0., 0.5, 0.5, 0.5, 1., 1.], 1).is_err());
        assert!(KnotVector::uniform(11, 2).is_err());
        assert!(KnotVector::new(vec![0., 0., 0.5, 0.5, 1., 1.], 1).is_ok());
    }

    #[test]
    fn nurbs_with_unit_weights_is_bspline() {
        let kv = KnotVector::uniform(3, 4).unwrap();
        let w = vec![1.0; kv.num_basis()];
        for s in 0..50 {
            let xi = s as f64 / 49.0;
            let b = kv.eval(xi, 2).unwrap();
            let n = eval_nurbs(&kv, &w, xi, 2).unwrap();
            for k in 0..=2 {
                for j in 0..4 {
                    assert!((b.ders[k][j] - n.ders[k][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn quarter_circle_nurbs_by_hand() {
        let kv = KnotVector::uniform(2, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let n = eval_nurbs(&kv, &[1.0, h, 1.0], 0.5, 0).unwrap();
        // Bernstein values at 1/2 are (1/4, 1/2, 1/4).
        let denom = 0.25 + h * 0.5 + 0.25;
        let expected = [0.25 / denom, h * 0.5 / denom, 0.25 / denom];
        for j in 0..3 {
            assert!((n.ders[0][j] - expected[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn nurbs_rejects_nonpositive_weight() {
        let kv = KnotVector::uniform(2, 1).unwrap();
        assert!(matches!(eval_nurbs(&kv, &[1.0, 0.0, 1.0], 0.3, 0), Err(Error::Validation(_))));
    }

    #[test]
    fn derivatives_beyond_degree_vanish() {
        let kv = KnotVector::uniform(1, 3).unwrap();
        let b = kv.eval(0.4, 3).unwrap();
        assert!(b.ders[2].iter().chain(&b.ders[3]).all(|&v| v == 0.0));
    }

    #[test]
    fn discretization_keeps_geometry_kinks() {
        let geo = KnotVector::new(vec![0., 0., 0., 0.5, 0.5, 1., 1., 1.], 2).unwrap();
        let kv = geo.discretization(3, 2).unwrap();
        assert_eq!(kv.multiplicity(0.5), 3);
        assert_eq!(kv.multiplicity(0.25), 1);
        assert_eq!(kv.num_elements(), 4);
        let smooth = KnotVector::uniform(2, 1).unwrap().discretization(3, 4).unwrap();
        assert_eq!(smooth, KnotVector::uniform(3, 4).unwrap());
    }

    #[test]
    fn greville_of_uniform_quadratic() {
        let kv = KnotVector::uniform(2, 2).unwrap();
        assert_eq!(kv.greville(), vec![0.0, 0.25, 0.75, 1.0]);
    }
}
