//! Simulates one hexagonal pocket under both re-emission models and prints
//! the collision histogram plus capture statistics for a few sticking
//! probabilities.
//!
//! Run with `cargo run --release --example hex_pocket`.

use getterflow::stats::capture_table;
use getterflow::{
    run_simulation, EmissionModel, PolygonPocketSpec, Result, SurfaceAngle,
};

fn main() -> Result<()> {
    let spec = PolygonPocketSpec::new(
        6,                              // hexagonal mouth
        1.0,                            // side length, any unit
        SurfaceAngle::from_degrees(20.0)?, // flank angle against the normal
        0.2,                            // floor occupies 20% of the mouth scale
    )?;
    let geom = spec.build()?;
    println!("geometry: {}", geom.label());
    println!(
        "wetted area over mouth area: {:.4} (mean collisions under the cosine law)",
        spec.wetted_area_ratio()
    );
    println!();

    for model in [EmissionModel::CosineLaw, EmissionModel::IsotropicHalfSpace] {
        let hist = run_simulation(&geom, model, 200_000, 42);
        let mean = hist.mean_collisions().unwrap();
        let sem = hist.stderr().unwrap();
        println!(
            "{}: mean collisions {:.4} +/- {:.4} ({} particles, {} trapped, {} faults)",
            model.label(),
            mean,
            sem,
            hist.n_particles,
            hist.trapped,
            hist.faults
        );

        // Low-n part of the histogram.
        let exited = hist.exited() as f64;
        print!("  collisions 1..8:");
        for n in 1..=8u32 {
            let frac = *hist.counts.get(&n).unwrap_or(&0) as f64 / exited;
            print!(" {:.3}", frac);
        }
        println!();

        // A molecule needs to stick on one of its wall visits to be pumped.
        // Capture at sticking probability alpha rises from alpha (flat
        // surface) toward 1 as the structure forces repeat visits.
        println!("  sticking  capture  gain over flat");
        for row in capture_table(&hist, 5)? {
            println!(
                "  {:>8.4}  {:.5}  {:.3} +/- {:.3}",
                row.sticking, row.capture, row.enhancement, row.enhancement_stderr
            );
        }
        println!();
    }
    Ok(())
}
