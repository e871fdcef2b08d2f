//! Regression values for the shipped scenario files.

use std::path::PathBuf;

use talbot_core::decoherence::thermal::which_path_separation;
use talbot_core::optics::oracle::oracle_pattern;
use talbot_core::*;

fn config(name: &str) -> Scenario {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    load_config(&path).unwrap()
}

#[test]
fn c70_oracle_visibility_near_observed() {
    let mut sc = config("c70.toml");
    sc.sampling.samples = 12;
    let sample = sc.velocity_sample().unwrap();
    let p = oracle_pattern(&sc.interferometer, &sc.molecule, &sample, &sc.oracle, 32, 4).unwrap();
    assert!((p.visibility() - 0.42).abs() <= 0.10, "oracle V = {}", p.visibility());
    let analytic = predict(&sc.interferometer, &sc.molecule, &sample, &ChannelSet::none(), &sc.truncation).unwrap();
    assert!((analytic.visibility() - p.visibility()).abs() < 0.02);
}

#[test]
fn c70_zero_pressure_intercept() {
    let sc = config("c70.toml");
    let rows = run_sweep(SweepKind::Pressure, &sc, &[0.0]).unwrap();
    assert!((rows[0].visibility - 0.4257).abs() < 5e-4, "V0 = {}", rows[0].visibility);
}

#[test]
fn c70_velocity_narrowing() {
    let sc = config("c70.toml");
    let grid = [0.001, 0.005, 0.01, 0.02, 0.03, 0.05];
    let rows = run_sweep(SweepKind::VelocitySpread, &sc, &grid).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].visibility < w[0].visibility, "{w:?}");
    }
    // Regression values; the relative loss over this range is about 18%.
    let (narrow, wide) = (rows[0].visibility, rows[5].visibility);
    assert!((narrow - 0.44247).abs() < 5e-5, "{narrow}");
    assert!((wide - 0.36097).abs() < 5e-5, "{wide}");
    assert!((1.0 - wide / narrow - 0.1842).abs() < 1e-3);
}

#[test]
fn c70_cooling_from_3000_k() {
    let sc = config("c70.toml");
    let coarse = radiative_cooling(&sc.molecule, 3000.0, 6e-3, 400).unwrap();
    let fine = radiative_cooling(&sc.molecule, 3000.0, 6e-3, 800).unwrap();
    let t6 = coarse.final_temperature();
    assert!((t6 - 2719.6563).abs() < 1e-3, "T(6 ms) = {t6}");
    assert!((t6 - fine.final_temperature()).abs() < 1e-6 * t6);
    let ts: Vec<f64> = (0..=60).map(|i| coarse.temperature_at(i as f64 * 1e-4)).collect();
    assert!(ts.windows(2).all(|w| w[1] < w[0]));
    assert!(ts.windows(3).all(|w| w[0] - w[1] >= w[1] - w[2]));
}

#[test]
fn lumi_which_path_separation() {
    let sc = config("lumi.toml");
    let l = sc.interferometer.separation;
    let v = sc.beam.v0;
    let dx = which_path_separation(&sc.interferometer, &sc.molecule, v, l / v).unwrap();
    let lambda = de_broglie_wavelength(&sc.molecule, v).unwrap();
    assert!((dx - lambda * l / 266e-9).abs() < 1e-12 * dx);
    assert!((dx - 10.209e-6).abs() < 1e-9, "{dx}");
}

#[test]
fn ideal_config_matches_oracle() {
    let sc = config("ideal.toml");
    let sample = sc.velocity_sample().unwrap();
    let p = oracle_pattern(&sc.interferometer, &sc.molecule, &sample, &sc.oracle, 32, 4).unwrap();
    let a = predict(&sc.interferometer, &sc.molecule, &sample, &ChannelSet::none(), &sc.truncation).unwrap();
    assert!((p.visibility() - a.visibility()).abs() < 0.02);
    let dphi = (p.c(1) * a.pattern.c(1).conj()).arg().abs();
    assert!(dphi < 0.05, "{dphi}");
}
