//! Exact circles from rational splines, before and after refinement.

use igakit::geometry::conics::{arc, disc};
use igakit::geometry::refine_patch;

fn max_radius_error(p: &igakit::geometry::Patch, r: f64) -> igakit::Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let x = p.eval_map(&[i as f64 / 1000.0])?;
        worst = worst.max((x[0].hypot(x[1]) - r).abs());
    }
    Ok(worst)
}

fn main() -> igakit::Result<()> {
    let quarter = arc([0.0, 0.0], 2.0, 0.0, std::f64::consts::FRAC_PI_2)?;
    println!("quarter arc: {} control points, weights {:?}", quarter.num_points(), quarter.weights());
    println!("radius error: {:.2e}", max_radius_error(&quarter, 2.0)?);
    let fine = refine_patch(&quarter, &[8])?;
    println!(
        "after x8 refinement: {} control points, radius error {:.2e}",
        fine.num_points(),
        max_radius_error(&fine, 2.0)?
    );

    let d = disc(1.0)?;
    println!("disc: {} patches, {} interfaces", d.patches().len(), d.interfaces().len());
    for (k, side) in d.boundary_sides() {
        let p = &d.patches()[k];
        let mut worst = 0.0f64;
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let mut xi = [t, t];
            xi[side.dir] = if side.max { 1.0 } else { 0.0 };
            let x = p.eval_map(&xi)?;
            worst = worst.max((x[0].hypot(x[1]) - 1.0).abs());
        }
        println!("  patch {k} side {side}: |r - 1| <= {worst:.2e}");
    }
    Ok(())
}
