//! Shared helpers for the integration suites.

use angulate::{RelativeGeometry, Vec3};
use rand::rngs::StdRng;
use rand::Rng;

/// Random two-view geometry: a forward scene point observed with ~1 degree
/// of direction jitter, skipping degenerate baselines and epipoles.
pub fn random_geometry(rng: &mut StdRng) -> RelativeGeometry {
    loop {
        let c0 = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let c1 = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let p = Vec3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(2.0..6.0),
        );
        let mut jitter = |scale: f64| {
            Vec3::new(
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
            )
        };
        let m0 = (p - c0).normalize() + jitter(0.02);
        let m1 = (p - c1).normalize() + jitter(0.02);
        let Ok(g) = RelativeGeometry::new(c0, c1, m0, m1) else {
            continue;
        };
        if g.t.norm() < 0.2 {
            continue;
        }
        let sin0 = g.m0.cross(&g.t).norm() / (g.m0.norm() * g.t.norm());
        let sin1 = g.m1.cross(&g.t).norm() / (g.m1.norm() * g.t.norm());
        if sin0 > 1e-3 && sin1 > 1e-3 {
            return g;
        }
    }
}

/// Prints one pass/fail line for an acceptance criterion, then enforces it.
pub fn report(number: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {number:02} {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        pass,
        "acceptance criterion {number} ({name}) failed: {detail}"
    );
}
