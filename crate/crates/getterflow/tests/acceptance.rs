//! Acceptance gate. One test per numbered criterion; each prints a single
//! `criterion NN: PASS/FAIL` line (shown with --nocapture, or automatically
//! when the criterion fails) and then asserts its stated tolerance.
//!
//! Heavy Monte Carlo runs are shared between criteria through OnceLock
//! caches. Determinism-sensitive runs are executed inside explicit rayon
//! pools so the worker count is pinned regardless of the test harness.

use std::sync::OnceLock;
use std::time::Instant;

use getterflow::analysis::{
    analyze, enhancement_from_rates, synthesize_decay_log, AnalysisOptions, AreaBudget, AreaMode,
    Measured, PressureSeries,
};
use getterflow::geometry::{
    rasterize_polygon_pocket, ConeArraySpec, Geometry, PolygonPocketSpec, SurfaceAngle,
};
use getterflow::sampler::{sample_emission, stream_rng};
use getterflow::stats::{capture_probability, enhancement, StickingProbability};
use getterflow::sweep::{pocket_theta_sweep, run_sweep, SweepRow};
use getterflow::tracer::{run_simulation, HistogramReport};
use getterflow::{EmissionModel, Vec3};

const PARTICLES: u64 = 100_000;

fn hex_pocket(theta_deg: f64, tau: f64) -> Geometry {
    PolygonPocketSpec::new(6, 1.0, SurfaceAngle::from_degrees(theta_deg).unwrap(), tau)
        .unwrap()
        .build()
        .unwrap()
}

fn cone_spec() -> ConeArraySpec {
    ConeArraySpec::new(1.0, SurfaceAngle::from_degrees(30.0).unwrap(), 0.2, 0.45).unwrap()
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap()
}

fn report_json(geom: &Geometry, model: EmissionModel, seed: u64) -> (HistogramReport, String) {
    let hist = run_simulation(geom, model, PARTICLES, seed);
    let report = HistogramReport::new(geom, model, &hist);
    let json = serde_json::to_string(&report).unwrap();
    (report, json)
}

fn verdict(name: &str, ok: bool, detail: &str) {
    // Written straight to the stdout handle so the line survives the test
    // harness capture and every criterion's verdict shows in a plain
    // `cargo test` run, not only the failing ones.
    use std::io::Write;
    let line = format!("criterion {name}: {} - {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(ok, "criterion {name}: {detail}");
}

/// Criterion 1 data: the 10-degree hexagonal pocket under both models, run
/// once on one worker (timed) and once on eight (shared with criterion 13).
struct TenDegreeRuns {
    cos8: HistogramReport,
    iso8: HistogramReport,
    json1: [String; 2],
    json8: [String; 2],
    one_worker_secs: f64,
}

fn ten_degree() -> &'static TenDegreeRuns {
    static CACHE: OnceLock<TenDegreeRuns> = OnceLock::new();
    CACHE.get_or_init(|| {
        let geom = hex_pocket(10.0, 0.0);
        let started = Instant::now();
        let (_, cj1) = pool(1).install(|| report_json(&geom, EmissionModel::CosineLaw, 101));
        let (_, ij1) =
            pool(1).install(|| report_json(&geom, EmissionModel::IsotropicHalfSpace, 102));
        let one_worker_secs = started.elapsed().as_secs_f64();
        let (cos8, cj8) = pool(8).install(|| report_json(&geom, EmissionModel::CosineLaw, 101));
        let (iso8, ij8) =
            pool(8).install(|| report_json(&geom, EmissionModel::IsotropicHalfSpace, 102));
        TenDegreeRuns { cos8, iso8, json1: [cj1, ij1], json8: [cj8, ij8], one_worker_secs }
    })
}

/// Criterion 2 data: the 1-degree pocket under both models.
fn one_degree() -> &'static [HistogramReport; 2] {
    static CACHE: OnceLock<[HistogramReport; 2]> = OnceLock::new();
    CACHE.get_or_init(|| {
        let geom = hex_pocket(1.0, 0.0);
        let (cos, _) = report_json(&geom, EmissionModel::CosineLaw, 201);
        let (iso, _) = report_json(&geom, EmissionModel::IsotropicHalfSpace, 202);
        [cos, iso]
    })
}

/// Criterion 4 data: the angle sweep on one and on eight workers.
struct SweepRuns {
    rows8: Vec<SweepRow>,
    json1: String,
    json8: String,
}

fn angle_sweep() -> &'static SweepRuns {
    static CACHE: OnceLock<SweepRuns> = OnceLock::new();
    CACHE.get_or_init(|| {
        let base =
            PolygonPocketSpec::new(6, 1.0, SurfaceAngle::from_degrees(10.0).unwrap(), 0.0)
                .unwrap();
        let cases =
            pocket_theta_sweep(&base, &[1.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0, 80.0]).unwrap();
        let models = EmissionModel::all();
        let rows1 = pool(1).install(|| run_sweep(&cases, &models, PARTICLES, 400));
        let rows8 = pool(8).install(|| run_sweep(&cases, &models, PARTICLES, 400));
        let json1 = serde_json::to_string(&rows1).unwrap();
        let json8 = serde_json::to_string(&rows8).unwrap();
        SweepRuns { rows8, json1, json8 }
    })
}

/// Criterion 5/6/7 data: truncation trio, side-count scan, and the
/// raster-vs-analytic pair, all cosine-law.
fn truncation_trio() -> &'static [HistogramReport; 3] {
    static CACHE: OnceLock<[HistogramReport; 3]> = OnceLock::new();
    CACHE.get_or_init(|| {
        [0.0, 0.05, 0.6].map(|tau| {
            let geom = hex_pocket(20.0, tau);
            let seed = 501 + (tau * 100.0) as u64;
            report_json(&geom, EmissionModel::CosineLaw, seed).0
        })
    })
}

fn side_scan() -> &'static Vec<HistogramReport> {
    static CACHE: OnceLock<Vec<HistogramReport>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (3..=8u32)
            .map(|sides| {
                let geom = PolygonPocketSpec::new(
                    sides,
                    1.0,
                    SurfaceAngle::from_degrees(20.0).unwrap(),
                    0.2,
                )
                .unwrap()
                .build()
                .unwrap();
                report_json(&geom, EmissionModel::CosineLaw, 600 + sides as u64).0
            })
            .collect()
    })
}

fn raster_pair() -> &'static [HistogramReport; 2] {
    static CACHE: OnceLock<[HistogramReport; 2]> = OnceLock::new();
    CACHE.get_or_init(|| {
        let spec =
            PolygonPocketSpec::new(6, 1.0, SurfaceAngle::from_degrees(30.0).unwrap(), 0.2)
                .unwrap();
        let analytic = spec.build().unwrap();
        let raster = rasterize_polygon_pocket(&spec, 0.02).unwrap().build().unwrap();
        let (a, _) = report_json(&analytic, EmissionModel::CosineLaw, 701);
        let (r, _) = report_json(&raster, EmissionModel::CosineLaw, 702);
        [a, r]
    })
}

/// Criterion 8 data: cone cell vs explicit tiling, one and eight workers.
struct ConeRuns {
    single8: HistogramReport,
    tiled8: HistogramReport,
    json1: [String; 2],
    json8: [String; 2],
}

fn cone_pair() -> &'static ConeRuns {
    static CACHE: OnceLock<ConeRuns> = OnceLock::new();
    CACHE.get_or_init(|| {
        let spec = cone_spec();
        let single = spec.build().unwrap();
        let tiled = spec.build_tiled(5, 5).unwrap();
        let (_, sj1) = pool(1).install(|| report_json(&single, EmissionModel::CosineLaw, 801));
        let (_, tj1) = pool(1).install(|| report_json(&tiled, EmissionModel::CosineLaw, 802));
        let (single8, sj8) =
            pool(8).install(|| report_json(&single, EmissionModel::CosineLaw, 801));
        let (tiled8, tj8) = pool(8).install(|| report_json(&tiled, EmissionModel::CosineLaw, 802));
        ConeRuns { single8, tiled8, json1: [sj1, tj1], json8: [sj8, tj8] }
    })
}

fn mean_se(r: &HistogramReport) -> (f64, f64) {
    (r.mean_collisions.unwrap(), r.stderr.unwrap())
}

#[test]
fn criterion_01_ten_degree_pocket_band() {
    let runs = ten_degree();
    let (cm, cs) = mean_se(&runs.cos8);
    let (im, is) = mean_se(&runs.iso8);
    let in_band = |m: f64| (5.2..=6.0).contains(&m);
    let ok = in_band(cm) && in_band(im) && runs.one_worker_secs < 60.0;
    verdict(
        "01",
        ok,
        &format!(
            "cosine {cm:.4}+/-{cs:.4}, isotropic {im:.4}+/-{is:.4}, band [5.2, 6.0], \
             one-worker runtime {:.1}s (limit 60s)",
            runs.one_worker_secs
        ),
    );
}

#[test]
fn criterion_02_one_degree_plateau() {
    let [cos, iso] = one_degree();
    let (cm, cs) = mean_se(cos);
    let (im, is) = mean_se(iso);
    let ok = (7.5..=8.5).contains(&cm) && (6.5..=7.5).contains(&im);
    verdict(
        "02",
        ok,
        &format!(
            "cosine {cm:.2}+/-{cs:.2} vs [7.5, 8.5], isotropic {im:.2}+/-{is:.2} vs [6.5, 7.5]; \
             closed-cell flux balance puts the cosine mean at wetted/mouth area = \
             1/sin(1 deg) = {:.2} for this geometry, so no plateau near 8 exists",
            1.0 / (1.0f64.to_radians()).sin()
        ),
    );
}

#[test]
fn criterion_03_flat_identity() {
    let started = Instant::now();
    let geom = hex_pocket(90.0, 0.0);
    // One worker: the run is microseconds of real work, and grabbing the
    // shared pool here would time other tests' contention instead.
    let hist = pool(1).install(|| run_simulation(&geom, EmissionModel::CosineLaw, 20_000, 301));
    let single_bin = hist.counts.len() == 1 && hist.counts.get(&1) == Some(&20_000);

    let mut capture_exact = true;
    let mut enhancement_one = true;
    for k in 0..=40 {
        let p = 10f64.powf(-4.0 + 4.0 * k as f64 / 40.0).min(1.0);
        let ps = StickingProbability::new(p).unwrap();
        let cap = capture_probability(&hist, ps).unwrap();
        let enh = enhancement(&hist, ps).unwrap();
        capture_exact &= (cap.value - p).abs() <= 1e-15 * p;
        enhancement_one &= (enh.value - 1.0).abs() <= 1e-15;
    }
    let secs = started.elapsed().as_secs_f64();
    let ok = single_bin && capture_exact && enhancement_one && secs < 1.0;
    verdict(
        "03",
        ok,
        &format!(
            "P(n) mass at n=1: {single_bin}, P_e == p_s to machine precision: {capture_exact}, \
             enhancement == 1: {enhancement_one}, runtime {secs:.3}s"
        ),
    );
}

#[test]
fn criterion_04_angle_monotonicity() {
    let rows = &angle_sweep().rows8;
    let mut ok = true;
    let mut detail = String::new();
    for model in EmissionModel::all() {
        let mut pts: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r.model == model.label())
            .map(|r| {
                assert!(r.error.is_none(), "sweep row failed: {:?}", r.error);
                (r.theta_deg.unwrap(), r.mean_collisions.unwrap(), r.stderr.unwrap())
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(pts.len(), 8);
        for w in pts.windows(2) {
            let ((t0, m0, s0), (t1, m1, s1)) = (w[0], w[1]);
            if m1 > m0 + 3.0 * (s0 * s0 + s1 * s1).sqrt() {
                ok = false;
                detail.push_str(&format!(
                    "{} rises from {m0:.3} at {t0} deg to {m1:.3} at {t1} deg; ",
                    model.label()
                ));
            }
        }
    }
    if detail.is_empty() {
        detail = "means non-increasing over {1,5,10,20,30,45,60,80} deg for both models".into();
    }
    verdict("04", ok, &detail);
}

#[test]
fn criterion_05_truncation_behavior() {
    let [full, slight, heavy] = truncation_trio();
    let (m0, s0) = mean_se(full);
    let (m5, s5) = mean_se(slight);
    let (m60, s60) = mean_se(heavy);
    let slight_close = (m5 - m0).abs() <= 0.05 * m0;
    let heavy_lower = m0 - m60 > 3.0 * (s0 * s0 + s60 * s60).sqrt();
    let ok = slight_close && heavy_lower;
    verdict(
        "05",
        ok,
        &format!(
            "t/h=0: {m0:.4}+/-{s0:.4}; t/h=0.05: {m5:.4}+/-{s5:.4} (within 5%: {slight_close}); \
             t/h=0.6: {m60:.4}+/-{s60:.4} (lower by >3 sigma: {heavy_lower})"
        ),
    );
}

#[test]
fn criterion_06_polygon_side_insensitivity() {
    let scans = side_scan();
    let means: Vec<f64> = scans.iter().map(|r| r.mean_collisions.unwrap()).collect();
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    let spread = means.iter().cloned().fold(f64::MIN, f64::max)
        - means.iter().cloned().fold(f64::MAX, f64::min);
    let ok = spread < 0.15 * mean;
    verdict(
        "06",
        ok,
        &format!("means over 3..8 sides: {means:?}; spread {spread:.4} vs 15% of mean {:.4}", 0.15 * mean),
    );
}

#[test]
fn criterion_07_raster_matches_analytic() {
    let [analytic, raster] = raster_pair();
    let (ma, sa) = mean_se(analytic);
    let (mr, sr) = mean_se(raster);
    let combined = (sa * sa + sr * sr).sqrt();
    let ok = (ma - mr).abs() <= 3.0 * combined;
    verdict(
        "07",
        ok,
        &format!(
            "analytic {ma:.4}+/-{sa:.4} vs raster {mr:.4}+/-{sr:.4}, \
             |diff| {:.4} <= 3*combined {:.4}",
            (ma - mr).abs(),
            3.0 * combined
        ),
    );
}

#[test]
fn criterion_08_wrapped_cell_matches_tiling() {
    let runs = cone_pair();
    let (ms, ss) = mean_se(&runs.single8);
    let (mt, st) = mean_se(&runs.tiled8);
    let combined = (ss * ss + st * st).sqrt();
    let ok = (ms - mt).abs() <= 3.0 * combined;
    verdict(
        "08",
        ok,
        &format!(
            "single cell {ms:.4}+/-{ss:.4} vs 5x5 tiling {mt:.4}+/-{st:.4}, \
             |diff| {:.4} <= 3*combined {:.4}",
            (ms - mt).abs(),
            3.0 * combined
        ),
    );
}

#[test]
fn criterion_09_sampler_moments() {
    let n = 1_000_000u64;
    let normal = Vec3::new(0.0, 0.0, 1.0);
    let mut sums = [0.0f64; 2];
    for (slot, model) in EmissionModel::all().into_iter().enumerate() {
        let mut rng = stream_rng(901 + slot as u64, 0);
        for _ in 0..n {
            sums[slot] += sample_emission(model, normal, &mut rng).z;
        }
    }
    let cos_mean = sums[0] / n as f64;
    let iso_mean = sums[1] / n as f64;
    // Var(cos angle) is 1/18 under the cosine law and 1/12 under isotropic.
    let cos_tol = 3.0 * (1.0 / 18.0f64).sqrt() / (n as f64).sqrt();
    let iso_tol = 3.0 * (1.0 / 12.0f64).sqrt() / (n as f64).sqrt();
    let ok = (cos_mean - 2.0 / 3.0).abs() <= cos_tol && (iso_mean - 0.5).abs() <= iso_tol;
    verdict(
        "09",
        ok,
        &format!(
            "cosine mean {cos_mean:.6} vs 2/3 (tol {cos_tol:.6}), \
             isotropic mean {iso_mean:.6} vs 1/2 (tol {iso_tol:.6})"
        ),
    );
}

#[test]
fn criterion_10_fit_pipeline() {
    let gamma = 1e-2;
    let intake = 1e-8;
    let opts = AnalysisOptions { threshold: 1e-5, grid_points: 40 };

    // Noise-free: tight time steps keep the finite-difference bias below
    // the 1e-10 gate while leaving the subtraction noise well under it.
    let log = synthesize_decay_log("exact", gamma, intake, 3e-5, 1.3e-3, 92_000).unwrap();
    let fit = analyze(&log, None, &opts).unwrap().fit;
    let gamma_rel = (fit.gamma - gamma).abs() / gamma;
    let intake_rel = (fit.intake - intake).abs() / intake;
    let exact_ok = gamma_rel <= 1e-10 && intake_rel <= 1e-10;

    // Noisy: 1% multiplicative gauge noise, 1000 seeded trials, both fitted
    // parameters must sit within 3 fitted standard errors >= 99% of the time.
    // The tail runs ~20% below the threshold so per-sample noise cannot lift
    // every below-threshold sample back above it.
    let clean = synthesize_decay_log("noisy", gamma, intake, 3e-5, 1.3, 112).unwrap();
    let mut gamma_hits = 0u32;
    let mut intake_hits = 0u32;
    for trial in 0..1000u64 {
        let mut rng = stream_rng(10_000, trial);
        let noisy: Vec<f64> = clean
            .pressures
            .iter()
            .map(|&p| {
                let g: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                p * (1.0 + 0.01 * g)
            })
            .collect();
        let series = PressureSeries::new("trial", clean.times.clone(), noisy).unwrap();
        let fit = analyze(&series, None, &opts).unwrap().fit;
        if (fit.gamma - gamma).abs() <= 3.0 * fit.gamma_stderr {
            gamma_hits += 1;
        }
        if (fit.intake - intake).abs() <= 3.0 * fit.intake_stderr {
            intake_hits += 1;
        }
    }
    let coverage_ok = gamma_hits >= 990 && intake_hits >= 990;
    let ok = exact_ok && coverage_ok;
    verdict(
        "10",
        ok,
        &format!(
            "noise-free rel err: gamma {gamma_rel:.2e}, intake {intake_rel:.2e} (gate 1e-10); \
             3-sigma coverage over 1000 noisy trials: gamma {gamma_hits}, intake {intake_hits} \
             (gate 990)"
        ),
    );
}

#[test]
fn criterion_11_area_attribution_table() {
    let started = Instant::now();
    let budget =
        AreaBudget { reference: 1134.0, structured: 726.0, mouths: 508.0, spillover: 354.0 };
    let reference = Measured { value: 1.10e-3, stderr: 0.0 };
    let pockets = Measured { value: 2.50e-3, stderr: 0.0 };
    let cones = Measured { value: 3.27e-3, stderr: 0.0 };

    let checks = [
        ("gamma2/gamma1", pockets.value / reference.value, 2.3),
        ("gamma3/gamma1", cones.value / reference.value, 3.0),
        (
            "eta2",
            enhancement_from_rates(pockets, reference, AreaMode::StructuredRegion, &budget)
                .unwrap()
                .value,
            3.0,
        ),
        (
            "eta2*",
            enhancement_from_rates(pockets, reference, AreaMode::PocketMouths, &budget)
                .unwrap()
                .value,
            3.8,
        ),
        (
            "eta3 min",
            enhancement_from_rates(cones, reference, AreaMode::SpilloverStructured, &budget)
                .unwrap()
                .value,
            2.7,
        ),
        (
            "eta3 max",
            enhancement_from_rates(cones, reference, AreaMode::SpilloverFlat, &budget)
                .unwrap()
                .value,
            3.6,
        ),
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (name, value, target) in checks {
        let hit = (value - target).abs() <= 0.05;
        ok &= hit;
        detail.push_str(&format!("{name} {value:.3} vs {target} ({hit}); "));
    }
    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    detail.push_str(&format!("runtime {secs:.3}s"));
    verdict("11", ok, &detail);
}

#[test]
fn criterion_12_flux_conservation() {
    // (label, trapped, faults, particles) for every geometry criteria 1-8 ran.
    let mut runs: Vec<(String, u64, u64, u64)> = Vec::new();
    let mut push = |label: String, r: &HistogramReport| {
        runs.push((label, r.trapped, r.faults, r.n_particles));
    };
    let ten = ten_degree();
    push("10 deg cosine".into(), &ten.cos8);
    push("10 deg isotropic".into(), &ten.iso8);
    let [c2c, c2i] = one_degree();
    push("1 deg cosine".into(), c2c);
    push("1 deg isotropic".into(), c2i);
    for r in truncation_trio() {
        push(r.geometry.clone(), r);
    }
    for r in side_scan() {
        push(r.geometry.clone(), r);
    }
    for r in raster_pair() {
        push(r.geometry.clone(), r);
    }
    let cones = cone_pair();
    push("cone single".into(), &cones.single8);
    push("cone tiled".into(), &cones.tiled8);
    for row in &angle_sweep().rows8 {
        runs.push((
            format!("sweep {} deg {}", row.theta_deg.unwrap(), row.model),
            row.trapped,
            row.faults,
            row.n_particles,
        ));
    }

    let mut ok = true;
    let mut worst = ("none".to_string(), 0.0f64);
    for (label, trapped, faults, n) in runs {
        let frac = trapped as f64 / n as f64;
        if faults > 0 || frac >= 1e-4 {
            ok = false;
        }
        if frac > worst.1 {
            worst = (label, frac);
        }
    }
    verdict(
        "12",
        ok,
        &format!(
            "max trapped fraction {:.1e} ({}) across all criterion 1-8 geometries, gate 1e-4, \
             zero trace faults",
            worst.1, worst.0
        ),
    );
}

#[test]
fn criterion_13_worker_count_determinism() {
    let ten = ten_degree();
    let sweep = angle_sweep();
    let cones = cone_pair();
    let c1 = ten.json1 == ten.json8;
    let c4 = sweep.json1 == sweep.json8;
    let c8 = cones.json1 == cones.json8;
    let ok = c1 && c4 && c8;
    verdict(
        "13",
        ok,
        &format!(
            "byte-identical 1 vs 8 workers: ten-degree pair {c1}, angle sweep {c4}, \
             cone pair {c8}"
        ),
    );
}
