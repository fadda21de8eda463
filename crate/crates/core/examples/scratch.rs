use arbcheck_core::model::MarketModel;
use arbcheck_core::simulate::*;
use std::time::Instant;
fn main() {
    let run = |name: &str, m: &MarketModel, cfg: SimConfig| {
        let t = Instant::now();
        let e = simulate_exit(m, &cfg).unwrap();
        let v: Vec<_> = e.per_radius.iter().map(|r| (r.radius, r.p_hat, r.ci.1 - r.ci.0)).collect();
        println!("{name}: {:?} trend={:?} {:.1}s", v, classify_trend(&e), t.elapsed().as_secs_f64());
    };
    let radii = vec![4.0, 16.0, 64.0, 256.0];
    for d in [1.0, 1.5] {
        let a = format!("(max(abs(x1),1))^{d}");
        let m = MarketModel::from_sources(1, 1.0, vec![1.0], vec![1.0], &["0"], &[&[&a]], &[]).unwrap();
        run(&format!("pow{d}"), &m, SimConfig { paths: 20_000, steps_per_unit_time: 256, radii: radii.clone(), drift_mode: DriftMode::QShift(1), ..SimConfig::default() });
        run(&format!("pow{d} Q"), &m, SimConfig { paths: 20_000, steps_per_unit_time: 256, radii: radii.clone(), drift_mode: DriftMode::Q, ..SimConfig::default() });
    }
    let f = "(max(norm,1))^3";
    let m = MarketModel::from_sources(2, 1.0, vec![1.0, 0.0], vec![1.0; 2], &["0"; 2], &[&[f, "0"], &["0", f]], &[]).unwrap();
    run("radial2", &m, SimConfig { paths: 20_000, steps_per_unit_time: 256, radii: radii.clone(), drift_mode: DriftMode::Q, ..SimConfig::default() });
    let m = MarketModel::from_sources(1, 1.0, vec![1.0], vec![1.0], &["0"], &[&[f]], &[]).unwrap();
    run("radial1", &m, SimConfig { paths: 20_000, steps_per_unit_time: 256, radii: radii.clone(), drift_mode: DriftMode::Q, ..SimConfig::default() });
}
