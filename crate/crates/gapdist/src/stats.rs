//! Empirical nearest-neighbour gap statistics on the base line.
//!
//! Gaps are differences of consecutive tangency positions inside the
//! interval (the two boundary gaps are not wrapped and not counted),
//! normalized by the mean spacing `l(I)/n` where `n` is the number of
//! tangencies. The empirical distribution function is sampled on a fixed
//! grid so distinct data sets can be compared by a sup-norm distance.

use thiserror::Error;

use crate::config::FordConfig;
use crate::enumerate::{enumerate_tangencies, EnumerateError, EnumerateParams, Tangency};
use crate::geom::{base_point, tangency_on_base, GeneralizedCircle, GeomError, MobiusMap};
use crate::{real, Interval, Scalar};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least two tangencies")]
    TooFewPoints,
    #[error("sample grids cannot be aligned")]
    GridMismatch,
    #[error("the image arc passes through the image of infinity")]
    ArcThroughInfinity,
    #[error("curvature margin exhausted (correction {corr:e} vs budget {budget:e}); retry with a larger margin")]
    MarginExhausted { corr: f64, budget: f64 },
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Empirical distribution function sampled on an increasing grid.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    /// Number of tangencies behind the sample.
    pub n: usize,
}

/// Consecutive gaps divided by the mean spacing `l(I)/n`.
pub fn normalized_gaps<T: Scalar>(
    tangencies: &[Tangency<T>],
    interval: Interval<T>,
) -> Result<Vec<T>, StatsError> {
    if tangencies.len() < 2 {
        return Err(StatsError::TooFewPoints);
    }
    let mut alphas: Vec<T> = tangencies.iter().map(|t| t.alpha).collect();
    alphas.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = real::<T>(alphas.len() as f64);
    let mean = interval.len() / n;
    Ok(alphas.windows(2).map(|w| (w[1] - w[0]) / mean).collect())
}

/// Distribution function of the normalized gaps on the given grid.
pub fn gap_cdf<T: Scalar>(
    tangencies: &[Tangency<T>],
    interval: Interval<T>,
    grid: &[T],
) -> Result<EmpiricalCdf<T>, StatsError> {
    let mut gaps = normalized_gaps(tangencies, interval)?;
    gaps.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let m = real::<T>(gaps.len() as f64);
    let mut values = Vec::with_capacity(grid.len());
    let mut idx = 0usize;
    for &s in grid {
        while idx < gaps.len() && gaps[idx] <= s {
            idx += 1;
        }
        values.push(real::<T>(idx as f64) / m);
    }
    Ok(EmpiricalCdf {
        grid: grid.to_vec(),
        values,
        n: tangencies.len(),
    })
}

/// Sup-norm distance between two functions sampled on the same grid.
pub fn ks_distance<T: Scalar>(
    grid_a: &[T],
    values_a: &[T],
    grid_b: &[T],
    values_b: &[T],
) -> Result<T, StatsError> {
    if grid_a.len() != grid_b.len()
        || grid_a.len() != values_a.len()
        || grid_b.len() != values_b.len()
    {
        return Err(StatsError::GridMismatch);
    }
    let tol = real::<T>(1e-12);
    let mut sup = T::zero();
    for k in 0..grid_a.len() {
        if (grid_a[k] - grid_b[k]).abs() > tol * (T::one() + grid_a[k].abs()) {
            return Err(StatsError::GridMismatch);
        }
        sup = sup.max((values_a[k] - values_b[k]).abs());
    }
    Ok(sup)
}

impl<T: Scalar> EmpiricalCdf<T> {
    pub fn ks_distance_to(&self, grid: &[T], values: &[T]) -> Result<T, StatsError> {
        ks_distance(&self.grid, &self.values, grid, values)
    }
}

/// Smallest normalized gap.
pub fn min_normalized_gap<T: Scalar>(
    tangencies: &[Tangency<T>],
    interval: Interval<T>,
) -> Result<T, StatsError> {
    let gaps = normalized_gaps(tangencies, interval)?;
    Ok(gaps
        .into_iter()
        .fold(T::infinity(), |acc, g| acc.min(g)))
}

/// Tangencies of the transported packing `M(P)` on the base `M(ℝ)`, with
/// image curvature at most `t_max` and image position inside `image_arc`
/// (positions are parameters on the image base: coordinates for a line, arc
/// length for a circle).
///
/// The Ford model is enumerated up to `t_max · sup|M'| · (1 + margin)` over
/// the preimage of the arc, every circle is mapped exactly, and the exact
/// image curvature is used for the final cut. If the observed deviation of
/// image curvatures from `κ/|M'(α)|` comes close to the slack the margin
/// provides, the transport aborts so it can be retried with a larger margin.
pub fn conformal_pushforward<T: Scalar>(
    cfg: &FordConfig<T>,
    m: &MobiusMap<T>,
    t_max: T,
    image_arc: Interval<T>,
    margin: T,
    params: &EnumerateParams,
) -> Result<Vec<Tangency<T>>, StatsError> {
    let base = GeneralizedCircle::real_axis();
    let image_base = m.apply_circle(&base);
    let minv = m.inverse();

    // preimage of the arc on the real line
    let mut pre = [T::zero(); 2];
    for (k, param) in [image_arc.lo, image_arc.hi].into_iter().enumerate() {
        let z = base_point(&image_base, param);
        let w = minv
            .apply_complex(z)
            .to_complex()
            .ok_or(StatsError::ArcThroughInfinity)?;
        pre[k] = w.re;
    }
    let (p_lo, p_hi) = if pre[0] < pre[1] {
        (pre[0], pre[1])
    } else {
        (pre[1], pre[0])
    };

    // the preimage interval must avoid the pole of M
    let [_, _, mc, md] = m.entries();
    if mc.norm() > real(1e-300) {
        let pole = -md / mc;
        if pole.im.abs() <= real(1e-9) && pole.re > p_lo && pole.re < p_hi {
            return Err(StatsError::ArcThroughInfinity);
        }
    }
    // and must actually map into the arc (not around the far side)
    let mid_param = image_param(m, &image_base, (p_lo + p_hi) / real(2.0))?;
    if !image_arc.contains(mid_param) {
        return Err(StatsError::ArcThroughInfinity);
    }

    // sup |M'| on the preimage: |c·x + d|⁻² is unimodal in x
    let mut sup_deriv = m.derivative_norm(p_lo).max(m.derivative_norm(p_hi));
    if mc.norm_sqr() > T::zero() {
        let x_star = -(mc.conj() * md).re / mc.norm_sqr();
        if x_star > p_lo && x_star < p_hi {
            sup_deriv = sup_deriv.max(m.derivative_norm(x_star));
        }
    }

    let t_enum = t_max * sup_deriv * (T::one() + margin);
    let pre_interval = Interval::new(p_lo, p_hi);
    let enumerated = enumerate_tangencies(cfg, t_enum, pre_interval, params)?;

    let mut out = Vec::new();
    let mut worst_corr = T::zero();
    // tangency residuals of mapped circles grow like eps·kappa², while the
    // discrimination margin against non-tangent pairs stays order one
    let tol = real::<T>(1e-4);
    for t in &enumerated {
        let circle = GeneralizedCircle::circle(
            num_complex::Complex::new(t.alpha, t.kappa.recip()),
            t.kappa.recip(),
        );
        let img = m.apply_circle(&circle);
        let (pos, kappa_img) = tangency_on_base(&img, &image_base, tol)?;
        let first_term = t.kappa / m.derivative_norm(t.alpha);
        worst_corr = worst_corr.max((kappa_img - first_term).abs());
        if kappa_img <= t_max && image_arc.contains(pos) {
            out.push(Tangency {
                alpha: pos,
                kappa: kappa_img,
                depth: t.depth,
            });
        }
    }
    let budget = t_max * margin;
    if worst_corr + worst_corr > budget {
        return Err(StatsError::MarginExhausted {
            corr: worst_corr.to_f64().unwrap_or(f64::NAN),
            budget: budget.to_f64().unwrap_or(f64::NAN),
        });
    }
    out.sort_unstable_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
    Ok(out)
}

fn image_param<T: Scalar>(
    m: &MobiusMap<T>,
    image_base: &GeneralizedCircle<T>,
    x: T,
) -> Result<T, StatsError> {
    let z = m
        .apply_complex(num_complex::Complex::new(x, T::zero()))
        .to_complex()
        .ok_or(StatsError::ArcThroughInfinity)?;
    Ok(crate::geom::base_parameter(image_base, z)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{BuiltinKind, FordConfig};
    use crate::test_util::assert_close;

    fn tangency(alpha: f64) -> Tangency<f64> {
        Tangency {
            alpha,
            kappa: 1.0,
            depth: 0,
        }
    }

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn equally_spaced_is_a_unit_step() {
        let pts: Vec<Tangency<f64>> = (0..40).map(|k| tangency(k as f64 * 0.25)).collect();
        let g = grid(0.0, 3.0, 61);
        let cdf = gap_cdf(&pts, Interval::new(0.0, 10.0), &g).unwrap();
        for (s, v) in g.iter().zip(&cdf.values) {
            if *s < 1.0 - 1e-12 {
                assert_eq!(*v, 0.0, "below the step at s={s}");
            } else {
                assert_eq!(*v, 1.0, "above the step at s={s}");
            }
        }
        assert_eq!(cdf.n, 40);
    }

    #[test]
    fn two_points_single_gap() {
        let pts = vec![tangency(0.2), tangency(0.5)];
        let l = 1.2;
        let g = min_normalized_gap(&pts, Interval::new(0.0, l)).unwrap();
        assert_close(g, 0.3 * 2.0 / l, 1e-15, "d·n/l");
    }

    #[test]
    fn too_few_points() {
        let pts = vec![tangency(0.2)];
        assert!(matches!(
            min_normalized_gap(&pts, Interval::new(0.0, 1.0)),
            Err(StatsError::TooFewPoints)
        ));
    }

    #[test]
    fn ks_examples() {
        let g = grid(0.0, 3.0, 31);
        let step_at = |x: f64| -> Vec<f64> {
            g.iter().map(|&s| if s >= x { 1.0 } else { 0.0 }).collect()
        };
        let f1 = step_at(1.0);
        let f2 = step_at(2.0);
        assert_eq!(ks_distance(&g, &f1, &g, &f1).unwrap(), 0.0);
        assert_eq!(ks_distance(&g, &f1, &g, &f2).unwrap(), 1.0);

        let g2 = grid(0.0, 4.0, 31);
        assert!(matches!(
            ks_distance(&g, &f1, &g2, &f2),
            Err(StatsError::GridMismatch)
        ));
        let g3 = grid(0.0, 3.0, 30);
        assert!(matches!(
            ks_distance(&g, &f1, &g3, &f2[..30]),
            Err(StatsError::GridMismatch)
        ));
    }

    #[test]
    fn cdf_invariant_under_reversal_and_scaling() {
        let pts: Vec<Tangency<f64>> = [0.03, 0.2, 0.21, 0.5, 0.77, 0.9]
            .iter()
            .map(|&x| tangency(x))
            .collect();
        let g = grid(0.0, 6.0, 100);
        let base = gap_cdf(&pts, Interval::new(0.0, 1.0), &g).unwrap();

        let mut rev = pts.clone();
        rev.reverse();
        let again = gap_cdf(&rev, Interval::new(0.0, 1.0), &g).unwrap();
        assert_eq!(base.values, again.values);

        let lam = 7.3;
        let scaled: Vec<Tangency<f64>> = pts
            .iter()
            .map(|t| Tangency {
                alpha: t.alpha * lam,
                ..*t
            })
            .collect();
        let scaled_cdf = gap_cdf(&scaled, Interval::new(0.0, lam), &g).unwrap();
        assert_eq!(base.values, scaled_cdf.values);
    }

    #[test]
    fn classical_min_gap_respects_repulsion() {
        let cfg = FordConfig::<f64>::builtin(BuiltinKind::Classical);
        let iv = Interval::new(0.0, 1.0);
        let pts = enumerate_tangencies(&cfg, 2.0 * 50.0 * 50.0, iv, &Default::default()).unwrap();
        let min_gap = min_normalized_gap(&pts, iv).unwrap();
        let delta = 3.0 / std::f64::consts::PI.powi(2);
        assert!(
            min_gap >= 0.95 * delta,
            "min normalized gap {min_gap} below 0.95·δ = {}",
            0.95 * delta
        );
        // and the CDF vanishes below the threshold
        let g = grid(0.0, 6.0, 400);
        let cdf = gap_cdf(&pts, iv, &g).unwrap();
        for (s, v) in g.iter().zip(&cdf.values) {
            if *s <= 0.95 * delta {
                assert_eq!(*v, 0.0, "CDF must vanish at s={s}");
            }
        }
    }

    #[test]
    fn pushforward_identity_matches_enumeration() {
        let cfg = FordConfig::<f64>::builtin(BuiltinKind::Classical);
        let iv = Interval::new(0.1, 0.8);
        let m = MobiusMap::identity();
        let via_transport =
            conformal_pushforward(&cfg, &m, 3000.0, iv, 0.25, &Default::default()).unwrap();
        let direct = enumerate_tangencies(&cfg, 3000.0, iv, &Default::default()).unwrap();
        assert_eq!(via_transport.len(), direct.len());
        for (a, b) in via_transport.iter().zip(&direct) {
            assert!((a.alpha - b.alpha).abs() <= 1e-12);
            assert!((a.kappa - b.kappa).abs() <= 1e-9 * b.kappa);
        }
    }

    /// Exact image curvatures (Hermitian transform) against the first-order
    /// law `κ(M(C)) ≈ κ(C)/|M'(α)|`; the correction stays bounded.
    #[test]
    fn pushforward_curvatures_match_derivative_law() {
        let cfg = FordConfig::<f64>::builtin(BuiltinKind::Classical);
        let m = MobiusMap::from_real(1.0, 0.0, 1.0, 1.0).unwrap();
        let pre = enumerate_tangencies(
            &cfg,
            4.0e4,
            Interval::new(0.05, 0.85),
            &Default::default(),
        )
        .unwrap();
        assert!(pre.len() > 1000, "want at least 10³ circles, got {}", pre.len());
        let mut worst = 0.0f64;
        for t in pre.iter().take(1000) {
            let circle = GeneralizedCircle::circle(
                num_complex::Complex::new(t.alpha, 1.0 / t.kappa),
                1.0 / t.kappa,
            );
            let kappa_img = m.apply_circle(&circle).curvature();
            let first_term = t.kappa / m.derivative_norm(t.alpha);
            worst = worst.max((kappa_img - first_term).abs());
        }
        // |M''/M'²| = 2(x+1) ≤ 3.7 on the interval; allow a factor of two
        assert!(worst <= 8.0, "correction {worst} out of range");
    }

    #[test]
    fn pushforward_rejects_arc_through_infinity() {
        let cfg = FordConfig::<f64>::builtin(BuiltinKind::Classical);
        // z ↦ 1/(2−z) has a real pole at 2; an image arc whose preimage
        // straddles it must be rejected
        let m = MobiusMap::from_real(0.0, 1.0, -1.0, 2.0).unwrap();
        let lo: f64 = 1.0 / (2.0 - 1.5);
        let hi: f64 = 1.0 / (2.0 - 2.5);
        let arc = Interval::new(hi.min(lo), hi.max(lo));
        let err = conformal_pushforward(&cfg, &m, 100.0, arc, 0.25, &Default::default());
        assert!(matches!(err, Err(StatsError::ArcThroughInfinity)));
    }
}
