//! Builds the same pocket twice: once from the exact analytic surface and
//! once from a rasterized height grid of the kind a profilometer scan or a
//! CSV export produces, then checks that both agree and writes the meshed
//! grid out as an ASCII STL for inspection in a CAD viewer.
//!
//! Run with `cargo run --release --example heightmap_pocket`.

use getterflow::geometry::{rasterize_polygon_pocket, stl::write_ascii_stl};
use getterflow::{run_simulation, EmissionModel, PolygonPocketSpec, Result, SurfaceAngle};

fn main() -> Result<()> {
    let spec =
        PolygonPocketSpec::new(6, 1.0, SurfaceAngle::from_degrees(30.0)?, 0.2)?;

    // Sample the pocket depth on a fine square grid over the mouth hexagon.
    let map = rasterize_polygon_pocket(&spec, 0.02)?;
    println!("height map: {}", map.label());
    println!("grid max depth: {:.6}, analytic ratio {:.4}", map.total_depth(), spec.wetted_area_ratio());

    let analytic = spec.build()?;
    let gridded = map.build()?;
    let model = EmissionModel::CosineLaw;
    let a = run_simulation(&analytic, model, 150_000, 11);
    let g = run_simulation(&gridded, model, 150_000, 12);
    println!(
        "analytic mesh: {:.4} +/- {:.4} mean collisions",
        a.mean_collisions().unwrap(),
        a.stderr().unwrap()
    );
    println!(
        "gridded mesh:  {:.4} +/- {:.4} mean collisions",
        g.mean_collisions().unwrap(),
        g.stderr().unwrap()
    );

    let out = std::path::Path::new("heightmap_pocket.stl");
    write_ascii_stl(&gridded, out)?;
    println!("wrote {} ({} facets)", out.display(), gridded.facets().len());
    Ok(())
}
