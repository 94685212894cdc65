//! Scans the pocket flank angle and plots mean collisions per molecule for
//! both re-emission models. Shallow flanks (small angle against the normal)
//! make deep pockets and many wall visits; at 90 degrees the surface is flat
//! and every molecule escapes after exactly one collision.
//!
//! Run with `cargo run --release --example theta_sweep`.

use getterflow::plot::{write_svg, PlotSpec, Series};
use getterflow::sweep::{pocket_theta_sweep, run_sweep, sweep_csv};
use getterflow::{EmissionModel, PolygonPocketSpec, Result, SurfaceAngle};

fn main() -> Result<()> {
    let base = PolygonPocketSpec::new(6, 1.0, SurfaceAngle::from_degrees(45.0)?, 0.0)?;
    let angles = [5.0, 10.0, 15.0, 20.0, 30.0, 45.0, 60.0, 75.0, 90.0];
    let cases = pocket_theta_sweep(&base, &angles)?;
    let models = [EmissionModel::CosineLaw, EmissionModel::IsotropicHalfSpace];
    let rows = run_sweep(&cases, &models, 50_000, 2024);

    print!("{}", sweep_csv(&rows));
    std::fs::write("theta_sweep.csv", sweep_csv(&rows))?;

    let mut series: Vec<Series> = models
        .iter()
        .map(|m| Series { label: m.label().to_string(), points: Vec::new() })
        .collect();
    for row in &rows {
        let (Some(theta), Some(mean)) = (row.theta_deg, row.mean_collisions) else {
            continue;
        };
        let slot = series.iter_mut().find(|s| s.label == row.model).unwrap();
        slot.points.push((theta, mean));
    }
    let spec = PlotSpec {
        title: "hexagonal pocket, collisions vs flank angle".to_string(),
        x_label: "surface angle (deg)".to_string(),
        y_label: "mean collisions per molecule".to_string(),
        log_x: false,
        log_y: true,
    };
    write_svg(std::path::Path::new("theta_sweep.svg"), &spec, &series)?;
    println!("wrote theta_sweep.csv and theta_sweep.svg");
    Ok(())
}
