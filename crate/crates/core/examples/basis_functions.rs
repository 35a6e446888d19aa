//! B-spline basis on a knot vector with a repeated interior knot.
//!
//! The double knot at 0.4 drops the continuity there to C0, which shows up
//! as a kink in one basis function.

use igakit::splines::KnotVector;

fn main() -> igakit::Result<()> {
    let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 0.2, 0.4, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0], 2)?;
    let n = kv.num_basis();
    println!("degree {} with {n} functions, multiplicity at 0.4 = {}", kv.degree(), kv.multiplicity(0.4));
    for i in 0..=10 {
        let xi = i as f64 / 10.0;
        let row = kv.eval(xi, 0)?.dense_row(0, n);
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("xi={xi:.1}  sum={:.15}  [{}]", row.iter().sum::<f64>(), cells.join(" "));
    }
    // one-sided slopes of the function peaking at the double knot
    let h = 1e-7;
    let left = kv.eval(0.4 - h, 1)?.dense_row(1, n)[3];
    let right = kv.eval(0.4 + h, 1)?.dense_row(1, n)[3];
    println!("B4' jumps from {left:.4} to {right:.4} at xi=0.4");
    Ok(())
}
