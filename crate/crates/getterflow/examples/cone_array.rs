//! Simulates a periodic lattice of truncated cones. The simulation cell is a
//! single lattice cell with wrap-around boundaries, so one cell stands in
//! for an unbounded array; a brute-force tiled replica is run alongside to
//! show the two agree.
//!
//! Run with `cargo run --release --example cone_array`.

use getterflow::{run_simulation, ConeArraySpec, EmissionModel, Result, SurfaceAngle};

fn main() -> Result<()> {
    let spec = ConeArraySpec::new(
        1.0,                               // lattice pitch
        SurfaceAngle::from_degrees(30.0)?, // flank angle against the normal
        0.2,                               // top 20% of each cone removed
        0.45,                              // base radius, cones nearly touch
    )?;
    println!(
        "cone array: pitch {}, theta {} deg, base radius {}, truncation {}",
        spec.pitch,
        spec.theta.degrees(),
        spec.base_radius,
        spec.truncation_ratio
    );
    println!("closed-form mean collisions (cosine law): {:.4}", spec.wetted_area_ratio());
    println!();

    let wrapped = spec.build()?;
    let tiled = spec.build_tiled(5, 5)?;
    for model in [EmissionModel::CosineLaw, EmissionModel::IsotropicHalfSpace] {
        let a = run_simulation(&wrapped, model, 150_000, 7);
        let b = run_simulation(&tiled, model, 150_000, 8);
        println!(
            "{}: wrapped cell {:.4} +/- {:.4}, 5x5 tiled replica {:.4} +/- {:.4}",
            model.label(),
            a.mean_collisions().unwrap(),
            a.stderr().unwrap(),
            b.mean_collisions().unwrap(),
            b.stderr().unwrap()
        );
    }
    Ok(())
}
