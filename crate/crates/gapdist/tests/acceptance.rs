//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test -p gapdist --test acceptance -- --nocapture`.

#![allow(clippy::type_complexity)]

mod common;

use std::time::Instant;

use common::{assert_close, farey, linspace, pass, totient_sum};
use gapdist::config::{BuiltinKind, FordConfig, PairKind};
use gapdist::enumerate::{count_asymptotic_check, enumerate_tangencies};
use gapdist::geom::{GeneralizedCircle, MobiusMap};
use gapdist::groups::{good_census, normality_report};
use gapdist::stats::{conformal_pushforward, gap_cdf, ks_distance, normalized_gaps};
use gapdist::theory::{
    build_regions, limiting_f, pair_classes, region_area, support_threshold,
};
use gapdist::Interval;

const BUILTINS: [BuiltinKind; 3] = [BuiltinKind::Classical, BuiltinKind::Ap3, BuiltinKind::Ap9];

fn cfg(kind: BuiltinKind) -> FordConfig<f64> {
    FordConfig::builtin(kind)
}

fn pi2() -> f64 {
    std::f64::consts::PI.powi(2)
}

#[test]
fn criterion_01_exact_constants() {
    let c = cfg(BuiltinKind::Classical).constants().unwrap();
    assert_close(c.d, 3.0, 1e-12, "classical D");
    assert_close(c.c, 3.0 / (2.0 * pi2()), 1e-12, "classical c");

    let a3 = cfg(BuiltinKind::Ap3).constants().unwrap();
    assert_close(a3.d, 4.0 * 2f64.sqrt(), 1e-12, "ap3 D");
    assert_close(a3.c, 2f64.sqrt() / pi2(), 1e-12, "ap3 c");

    let a9 = cfg(BuiltinKind::Ap9).constants().unwrap();
    assert_close(a9.c, 5.0 * (5f64.sqrt() + 1.0) / (12.0 * pi2()), 1e-12, "ap9 c");
    assert_close(a9.d, 5.0 * (5f64.sqrt() + 1.0) / 2.0, 1e-12, "ap9 D");
    pass("criterion 1", "D and c match closed forms to 1e-12");
}

#[test]
fn criterion_02_repulsion_thresholds() {
    let closed = [
        3.0 / pi2(),
        2.0 * 2f64.sqrt() / pi2(),
        5.0 * (1.0 + 5f64.sqrt()) / (6.0 * pi2()),
    ];
    let printed: [(f64, f64); 3] = [(0.303964, 5e-7), (0.28658, 5e-6), (0.273235, 5e-7)];
    for ((kind, expect), (decimal, slack)) in BUILTINS.iter().zip(closed).zip(printed) {
        let cfg = cfg(*kind);
        let delta = support_threshold(&cfg).unwrap();
        assert_close(delta, expect, 1e-9, "support threshold closed form");
        assert_close(delta, decimal, slack, "printed decimal");
        let grid = linspace(0.0, delta, 50);
        let f = limiting_f(&cfg, &grid, 1e-6).unwrap();
        for (s, v) in grid.iter().zip(&f) {
            assert!(
                *v <= 1e-9,
                "{kind}: F({s}) = {v} must vanish up to the threshold"
            );
        }
    }
    pass(
        "criterion 2",
        "support thresholds match 3/π², 2√2/π², 5(1+√5)/(6π²) and F vanishes below them",
    );
}

#[test]
fn criterion_03_farey_oracle_equivalence() {
    let cfg = cfg(BuiltinKind::Classical);
    for q in [50u64, 150, 300] {
        let started = Instant::now();
        let got = enumerate_tangencies(
            &cfg,
            2.0 * (q * q) as f64,
            Interval::new(0.0, 1.0),
            &Default::default(),
        )
        .unwrap();
        let oracle = farey(q);
        assert_eq!(got.len(), oracle.len(), "cardinality at order {q}");
        for (t, (p, den)) in got.iter().zip(&oracle) {
            assert!(
                (t.alpha - *p as f64 / *den as f64).abs() <= 1e-12,
                "position {} vs {p}/{den}",
                t.alpha
            );
        }
        let elapsed = started.elapsed();
        if q == 300 {
            assert!(
                elapsed.as_secs_f64() <= 10.0,
                "order-300 run took {elapsed:?}"
            );
        }
    }
    pass("criterion 3", "exact Farey set match at orders 50/150/300 within time budget");
}

#[test]
fn criterion_04_counting_asymptotics() {
    let classical = cfg(BuiltinKind::Classical);
    let (count, ratio) = count_asymptotic_check(
        &classical,
        180_000.0,
        Interval::new(0.0, 2.0),
        &Default::default(),
    )
    .unwrap();
    let oracle = 2 * totient_sum(300);
    assert_eq!(count as u64, oracle, "count equals twice the totient sum");
    assert!(
        (ratio - 1.0).abs() <= 0.01,
        "classical ratio {ratio} off by more than 1%"
    );

    for kind in [BuiltinKind::Ap3, BuiltinKind::Ap9] {
        let cfg = cfg(kind);
        let iv = Interval::new(0.0, cfg.period());
        let (_, r1) = count_asymptotic_check(&cfg, 1.0e5, iv, &Default::default()).unwrap();
        let (_, r2) = count_asymptotic_check(&cfg, 2.0e5, iv, &Default::default()).unwrap();
        assert!(
            (r1 / r2 - 1.0).abs() <= 0.01,
            "{kind}: ratios {r1} vs {r2} disagree by more than 1%"
        );
    }
    pass("criterion 4", "linear counting law verified against totient oracle and self-consistency");
}

#[test]
fn criterion_05_empirical_theoretical_convergence() {
    let grid = linspace(0.0, 6.0, 600);
    for (kind, (t_max, bound)) in BUILTINS
        .iter()
        .zip([(180_000.0, 0.02), (1.0e5, 0.03), (1.0e5, 0.03)])
    {
        let started = Instant::now();
        let cfg = cfg(*kind);
        let iv = if *kind == BuiltinKind::Classical {
            Interval::new(0.0, 2.0)
        } else {
            Interval::new(0.0, cfg.period())
        };
        let pts = enumerate_tangencies(&cfg, t_max, iv, &Default::default()).unwrap();
        let cdf = gap_cdf(&pts, iv, &grid).unwrap();
        let f = limiting_f(&cfg, &grid, 1e-6).unwrap();
        let ks = ks_distance(&grid, &cdf.values, &grid, &f).unwrap();
        assert!(
            ks <= bound,
            "{kind}: KS(empirical @T={t_max}, theory) = {ks} > {bound}"
        );
        let elapsed = started.elapsed();
        assert!(
            elapsed.as_secs_f64() <= 300.0,
            "{kind}: run took {elapsed:?}, over the five-minute budget"
        );
        println!("[acceptance] criterion 5 ({kind}): KS = {ks:.5} in {elapsed:?}");
    }
    pass("criterion 5", "empirical gap distributions converge to F within KS bounds");
}

#[test]
fn criterion_06_mass_normalization() {
    for kind in BUILTINS {
        let cfg = cfg(kind);
        let f_tail = limiting_f(&cfg, &[1.0e4], 1e-6).unwrap()[0];
        assert!(
            (0.999..=1.0005).contains(&f_tail),
            "{kind}: F(10^4) = {f_tail} outside [0.999, 1.0005]"
        );
        let grid = linspace(0.0, 6.0, 600);
        let f = limiting_f(&cfg, &grid, 1e-6).unwrap();
        for w in f.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{kind}: F must be non-decreasing");
        }
    }
    // quadtree value of the classical first branch with the cutoff dropped
    let region = &build_regions(&cfg(BuiltinKind::Classical), 1, 2, f64::INFINITY).unwrap()[0];
    let area = region_area(region, 1e-6).unwrap();
    assert_close(area, 0.25, 1e-6, "corner-cut square area");
    pass("criterion 6", "mass normalization and quadtree reference area hold");
}

#[test]
fn criterion_07_hecke_symmetry_of_components() {
    let grid = linspace(0.0, 6.0, 121);
    let tol = 1e-6;
    let classes: [(BuiltinKind, Vec<Vec<(usize, usize)>>); 3] = [
        (
            BuiltinKind::Classical,
            vec![vec![(1, 2), (1, 3), (2, 3)]],
        ),
        (
            BuiltinKind::Ap3,
            vec![
                vec![(1, 2), (2, 3), (3, 4), (1, 4)],
                vec![(1, 3), (2, 4)],
            ],
        ),
        (
            BuiltinKind::Ap9,
            vec![
                vec![(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)],
                vec![(1, 3), (2, 5), (1, 4), (3, 5), (2, 4)],
            ],
        ),
    ];
    for (kind, groups) in classes {
        let cfg = cfg(kind);
        for class in groups {
            let components: Vec<Vec<f64>> = class
                .iter()
                .map(|(i, j)| gapdist::theory::pair_component_f(&cfg, *i, *j, &grid, tol).unwrap())
                .collect();
            for (k, comp) in components.iter().enumerate().skip(1) {
                for (a, b) in components[0].iter().zip(comp) {
                    assert!(
                        (a - b).abs() <= 2.0 * tol,
                        "{kind}: component {:?} deviates from {:?} by {}",
                        class[k],
                        class[0],
                        (a - b).abs()
                    );
                }
            }
        }
    }
    pass("criterion 7", "pair components agree within equivalence classes to 2×tol");
}

#[test]
fn criterion_08_matrix_identities() {
    for kind in BUILTINS {
        let report = normality_report::<f64>(kind);
        for check in &report.checks {
            assert!(
                check.ok && check.residual <= 1e-12,
                "{kind}: {} residual {:e}",
                check.name,
                check.residual
            );
        }
    }
    pass("criterion 8", "all published conjugation/word identities and Hecke relations hold to 1e-12");
}

#[test]
fn criterion_09_curvature_transformation_law() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut max_rel = 0.0f64;
    for _ in 0..1000 {
        let (a, b, c, d) = loop {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            let c: f64 = rng.gen_range(-2.0..2.0);
            let d: f64 = rng.gen_range(-2.0..2.0);
            if (a * d - b * c).abs() > 0.1 {
                break (a, b, c, d);
            }
        };
        let m = MobiusMap::from_real(a, b, c, d).unwrap();
        let [_, _, mc, md] = m.entries().map(|z| z.re);
        let x: f64 = rng.gen_range(-3.0..3.0);
        let y: f64 = rng.gen_range(0.05..2.0);
        if (mc * x + md).abs() < 0.05 {
            continue;
        }
        let k = GeneralizedCircle::circle(num_complex::Complex::new(x, y), y);
        let kappa_lib = m.apply_circle(&k).curvature();
        let kappa_formula = (mc * x + md).powi(2) / y;
        // oracle: three-point fit through mapped points of the circle
        let pts = [
            num_complex::Complex::new(x, 0.0),
            num_complex::Complex::new(x, 2.0 * y),
            num_complex::Complex::new(x + y, y),
        ];
        let imgs = pts.map(|z| m.apply_complex(z));
        let fit = GeneralizedCircle::from_points(&imgs[0], &imgs[1], &imgs[2]).unwrap();
        let kappa_fit = fit.curvature().abs();
        max_rel = max_rel
            .max((kappa_lib - kappa_fit).abs() / kappa_fit)
            .max((kappa_formula - kappa_fit).abs() / kappa_fit);
    }
    assert!(max_rel <= 1e-9, "max relative error {max_rel:e}");
    pass("criterion 9", "curvature law matches three-point-fit oracle on 1000 samples");
}

#[test]
fn criterion_10_conformal_invariance() {
    let cfg = cfg(BuiltinKind::Classical);
    let m = MobiusMap::from_real(1.0, 0.0, 1.0, 1.0).unwrap();
    let arc = Interval::new(0.05, 0.45);
    let pts = conformal_pushforward(&cfg, &m, 1.0e5, arc, 0.25, &Default::default()).unwrap();
    let grid = linspace(0.0, 6.0, 600);
    let cdf = gap_cdf(&pts, arc, &grid).unwrap();
    let f = limiting_f(&cfg, &grid, 1e-6).unwrap();
    let ks = ks_distance(&grid, &cdf.values, &grid, &f).unwrap();
    assert!(ks <= 0.03, "KS(transported, theory) = {ks}");
    pass(
        "criterion 10",
        &format!("transported gaps match F with KS = {ks:.5}"),
    );
}

#[test]
fn criterion_11_uniform_distribution() {
    for kind in BUILTINS {
        let cfg = cfg(kind);
        let t = cfg.period();
        let all =
            enumerate_tangencies(&cfg, 1.0e5, Interval::new(0.0, t), &Default::default())
                .unwrap();
        let total = all.len() as f64;
        let mut bins = [0usize; 8];
        for x in &all {
            bins[((x.alpha / t * 8.0).floor() as usize).min(7)] += 1;
        }
        for (i, b) in bins.iter().enumerate() {
            let dev = (*b as f64 - total / 8.0).abs() / (total / 8.0);
            assert!(
                dev <= 0.02,
                "{kind}: bin {i} deviates by {dev:.4} from the uniform share"
            );
        }
    }
    pass("criterion 11", "eight-bin tangency counts uniform within 2%");
}

/// Diagnostic criterion: lattice-point census against the equidistribution
/// prediction, plus approximate linearity in the height bound.
#[test]
fn criterion_12_good_census_diagnostic() {
    let theta = Interval::new(0.0, std::f64::consts::PI);
    let at50 = good_census::<f64>(
        BuiltinKind::Classical,
        50.0,
        Interval::new(0.0, 1.0),
        theta,
        10,
    )
    .unwrap();
    assert!(
        (0.8..=1.2).contains(&at50.ratio),
        "census ratio {} outside [0.8, 1.2]",
        at50.ratio
    );
    let at25 = good_census::<f64>(
        BuiltinKind::Classical,
        25.0,
        Interval::new(0.0, 1.0),
        theta,
        10,
    )
    .unwrap();
    let growth = at50.count as f64 / at25.count as f64;
    assert!(
        (1.6..=2.4).contains(&growth),
        "doubling the bound grew the count by {growth}"
    );
    pass(
        "criterion 12 (diagnostic)",
        &format!("census ratio {:.4}, growth factor {growth:.2}", at50.ratio),
    );
}

/// The classical density against the empirical histogram of normalized
/// Farey gaps (the figure-level gate accompanying criterion 5).
#[test]
fn density_matches_farey_histogram() {
    let cfg = cfg(BuiltinKind::Classical);
    let iv = Interval::new(0.0, 1.0);
    let pts = enumerate_tangencies(&cfg, 2.0 * 300.0 * 300.0, iv, &Default::default()).unwrap();
    let gaps = normalized_gaps(&pts, iv).unwrap();

    let bins = 60usize;
    let (lo, hi) = (0.0f64, 6.0f64);
    let width = (hi - lo) / bins as f64;
    let mut hist = vec![0.0f64; bins];
    for g in &gaps {
        if *g >= lo && *g < hi {
            hist[(((*g - lo) / width) as usize).min(bins - 1)] += 1.0;
        }
    }
    let n = gaps.len() as f64;
    for h in &mut hist {
        *h /= n * width;
    }
    // bin-averaged theoretical density: difference quotient of F over bin edges
    let edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let f_edges = limiting_f(&cfg, &edges, 1e-7).unwrap();
    let mut sup = 0.0f64;
    for (k, h) in hist.iter().enumerate() {
        let d = (f_edges[k + 1] - f_edges[k]) / width;
        sup = sup.max((h - d).abs());
    }
    assert!(sup <= 0.05, "histogram deviation {sup}");
    pass(
        "density gate",
        &format!("classical histogram matches F' with sup deviation {sup:.4}"),
    );
}

/// The three-point normalization map applied to a randomly transported
/// triple recovers the built-in strip model.
#[test]
fn ford_normalization_recovers_strip_model() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let m = loop {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            let c: f64 = rng.gen_range(-2.0..2.0);
            let d: f64 = rng.gen_range(-2.0..2.0);
            if (a * d - b * c).abs() > 0.2 {
                break MobiusMap::from_real(a, b, c, d).unwrap();
            }
        };
        let base = GeneralizedCircle::real_axis();
        let top = GeneralizedCircle::horizontal_line(1.0);
        let k2 = GeneralizedCircle::circle(num_complex::Complex::new(0.0, 0.5), 0.5);
        let (b1, b2, b3) = (
            m.apply_circle(&base),
            m.apply_circle(&top),
            m.apply_circle(&k2),
        );
        let norm = gapdist::geom::ford_normalize(&b1, &b2, &b3, 1e-7).unwrap();
        let back1 = norm.apply_circle(&b1);
        let back2 = norm.apply_circle(&b2);
        let back3 = norm.apply_circle(&b3);
        assert!(back1.approx_eq(&base, 1e-7), "base not recovered");
        assert!(back2.approx_eq(&top, 1e-7), "top line not recovered");
        assert!(back3.approx_eq(&k2, 1e-7), "strip circle not recovered");
    }
    pass("normalization", "transported triples return to the strip model");
}

/// Disjoint pairs never admit a pair reflection; tangent pairs always do.
#[test]
fn pair_reflection_consistency() {
    for kind in BUILTINS {
        let cfg = cfg(kind);
        for pc in pair_classes(&cfg) {
            let refl = cfg.pair_reflection(pc.i, pc.j);
            match pc.kind {
                PairKind::Tangent => assert!(
                    refl.is_ok(),
                    "{kind}: tangent pair ({}, {}) lacks a reflection",
                    pc.i,
                    pc.j
                ),
                PairKind::Disjoint => assert!(
                    refl.is_err(),
                    "{kind}: disjoint pair ({}, {}) produced a reflection",
                    pc.i,
                    pc.j
                ),
            }
        }
    }
    pass("pair reflections", "dual-circle reflections exist exactly for tangent pairs");
}
