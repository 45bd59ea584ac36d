//! Cross-validation of the three area routes (radial, quadtree,
//! Monte-Carlo) over every region of the built-in configurations.

mod common;

use common::pass;
use gapdist::config::{BuiltinKind, FordConfig};
use gapdist::theory::{
    build_regions, limiting_f, mc_area, pair_classes, quasi_area, region_area,
};

const BUILTINS: [BuiltinKind; 3] = [BuiltinKind::Classical, BuiltinKind::Ap3, BuiltinKind::Ap9];

#[test]
fn quadtree_vs_monte_carlo_on_every_region() {
    let tol = 1e-4;
    for kind in BUILTINS {
        let cfg = FordConfig::<f64>::builtin(kind);
        for pc in pair_classes(&cfg) {
            for s in [0.5, 1.0, 2.0, 5.0] {
                for (branch, region) in build_regions(&cfg, pc.i, pc.j, s)
                    .unwrap()
                    .iter()
                    .enumerate()
                {
                    let quad = region_area(region, tol).unwrap();
                    let (mc, sigma) = mc_area(region, 200_000, 17 + branch as u64);
                    assert!(
                        (quad - mc).abs() <= 3.0 * (tol + 3.0 * sigma),
                        "{kind} pair ({}, {}) branch {branch} s={s}: quadtree {quad} vs MC {mc} (sigma {sigma})",
                        pc.i,
                        pc.j
                    );
                }
            }
        }
    }
    pass("quadrature vs Monte-Carlo", "agreement within 3·(tol + 3σ) on every region");
}

#[test]
fn radial_mass_against_quasi_random_oracle() {
    for kind in BUILTINS {
        let cfg = FordConfig::<f64>::builtin(kind);
        let s = 1.0e4;
        let exact = limiting_f(&cfg, &[s], 1e-7).unwrap()[0];
        let mut sum = 0.0;
        for pc in pair_classes(&cfg) {
            for region in build_regions(&cfg, pc.i, pc.j, s).unwrap() {
                sum += pc.weight as f64 * quasi_area(&region, 10_000_000);
            }
        }
        let oracle = 2.0 / cfg.d_total() * sum;
        assert!(
            (exact - oracle).abs() <= 2e-3,
            "{kind}: F({s}) = {exact} vs quasi-random {oracle}"
        );
        assert!(oracle >= 0.999 - 2e-3, "{kind}: oracle mass {oracle}");
    }
    pass(
        "mass oracle",
        "F(10^4) agrees with 10^7-sample quasi-random areas within 2e-3",
    );
}
