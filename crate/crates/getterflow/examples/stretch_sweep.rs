//! Takes one measured-style height grid and rescales its depth axis through
//! a range of side-to-depth ratios, simulating each variant. This mirrors
//! asking how much deeper an etched structure must go before extra depth
//! stops paying off.
//!
//! Run with `cargo run --release --example stretch_sweep`.

use getterflow::geometry::rasterize_polygon_pocket;
use getterflow::sweep::{heightmap_stretch_sweep, run_sweep, sweep_csv};
use getterflow::{EmissionModel, PolygonPocketSpec, Result, SurfaceAngle};

fn main() -> Result<()> {
    // Stand-in for a profilometer scan: a rasterized 20-degree pocket.
    let scanned = rasterize_polygon_pocket(
        &PolygonPocketSpec::new(6, 1.0, SurfaceAngle::from_degrees(20.0)?, 0.1)?,
        0.02,
    )?;
    println!(
        "source grid: {} (hexagon side 1, depth {:.4})",
        scanned.label(),
        scanned.total_depth()
    );

    // side_to_depth = hexagon side / total depth; smaller means deeper.
    let ratios = [2.0, 1.0, 0.5, 0.25, 0.1, 0.05];
    let cases = heightmap_stretch_sweep(&scanned, &ratios)?;
    let rows = run_sweep(&cases, &[EmissionModel::CosineLaw], 40_000, 99);
    print!("{}", sweep_csv(&rows));

    println!();
    println!("ratio  mean collisions");
    for row in &rows {
        if let (Some(r), Some(m)) = (row.side_to_depth, row.mean_collisions) {
            println!("{:>5.2}  {:.3}", r, m);
        }
    }
    Ok(())
}
