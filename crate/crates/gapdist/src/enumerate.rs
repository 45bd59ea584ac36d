//! Enumeration of the tangencies on the base line with curvature up to `T`.
//!
//! The packing restricted to circles tangent to the base is generated from
//! the configuration chain by the gap reflections, and it is periodic under
//! translation by `t`. The walk below seeds every period overlapping the
//! requested interval with the chain circles and their mirror image in the
//! far gap wall, then refines each triangular gap: reflecting the initial
//! configuration into a gap produces the next generation of circles inside
//! it and splits it into smaller gaps. A gap whose bounding circles already
//! have curvature `≥ T` is pruned, which is sound because every circle
//! strictly inside a triangular gap is strictly smaller than both circles
//! bounding it.

use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

use crate::config::{ConfigError, FordConfig};
use crate::geom::{GeneralizedCircle, MobiusMap, Motion};
use crate::{real, Interval, Scalar};

#[derive(Debug, Error)]
pub enum EnumerateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("node budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("interval is empty")]
    EmptyInterval,
    #[error("curvature bound must be positive and finite")]
    BadBound,
}

/// A tangency point of the packing on the base line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangency<T> {
    /// Position on the base.
    pub alpha: T,
    /// Curvature of the tangent circle.
    pub kappa: T,
    /// Reflection word length that produced the circle (diagnostic).
    pub depth: u32,
}

#[derive(Debug, Clone)]
pub struct EnumerateParams {
    /// Hard cap on processed gap frames.
    pub node_cap: u64,
    /// Absolute merge tolerance for duplicate suppression on `alpha`.
    pub merge_tol: f64,
    /// Process seed subtrees through the rayon pool.
    pub parallel: bool,
}

impl Default for EnumerateParams {
    fn default() -> Self {
        EnumerateParams {
            node_cap: 100_000_000,
            merge_tol: 1e-9,
            parallel: false,
        }
    }
}

/// One triangular gap of the subdivision tree: the anti-Möbius word carrying
/// the initial configuration into the gap, and the data of the two bounding
/// circles.
#[derive(Debug, Clone)]
pub struct GapFrame<T: Scalar> {
    /// Word `w`; the gap is bounded by `w(C_g)` and `w(C_{g+1})` and filled
    /// by the `w(C_l)` with `l` outside `{g, g+1}`.
    motion: Motion<T>,
    /// Root gap index `g` in `1..=h` (cyclic).
    gap: usize,
    /// Curvatures of the two bounding circles.
    bound_kappa: (T, T),
    depth: u32,
}

impl<T: Scalar> GapFrame<T> {
    pub fn min_bound(&self) -> T {
        self.bound_kappa.0.min(self.bound_kappa.1)
    }

    pub fn max_bound(&self) -> T {
        self.bound_kappa.0.max(self.bound_kappa.1)
    }
}

/// Tangency position and curvature of a circle tangent to the real axis.
fn foot<T: Scalar>(k: &GeneralizedCircle<T>) -> (T, T) {
    let (a, b, _) = k.coefficients();
    debug_assert!(a > T::zero(), "gap member must be a proper circle");
    (-b.re / a, a)
}

struct Walk<'a, T: Scalar> {
    cfg: &'a FordConfig<T>,
    reflections: Vec<Motion<T>>,
    t_max: T,
    interval: Interval<T>,
    nodes: &'a AtomicU64,
    node_cap: u64,
}

impl<'a, T: Scalar> Walk<'a, T> {
    /// Depth-first refinement of one seed gap. The optional trace hook
    /// receives `(parent_min_bound, parent_max_bound, emitted_kappa)`.
    fn subtree(
        &self,
        root: GapFrame<T>,
        out: &mut Vec<Tangency<T>>,
        mut trace: Option<&mut Vec<(T, T, T)>>,
    ) -> Result<(), EnumerateError> {
        let h = self.cfg.h();
        let mut stack = vec![root];
        let mut imgs: Vec<(T, T)> = Vec::with_capacity(h);
        while let Some(frame) = stack.pop() {
            if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.node_cap {
                return Err(EnumerateError::BudgetExceeded(self.node_cap));
            }
            imgs.clear();
            for l in 1..=h {
                imgs.push(foot(&frame.motion.apply_circle(&self.cfg.circle(l))));
            }
            let g = frame.gap;
            let g_next = if g == h { 1 } else { g + 1 };
            for l in 1..=h {
                if l == g || l == g_next {
                    continue;
                }
                let (alpha, kappa) = imgs[l - 1];
                if let Some(tr) = trace.as_deref_mut() {
                    if tr.len() < 100_000 {
                        tr.push((frame.min_bound(), frame.max_bound(), kappa));
                    }
                }
                if kappa <= self.t_max && self.interval.contains(alpha) {
                    out.push(Tangency {
                        alpha,
                        kappa,
                        depth: frame.depth,
                    });
                }
            }
            for j in 1..=h {
                if j == g {
                    continue;
                }
                let j_next = if j == h { 1 } else { j + 1 };
                let (a1, k1) = imgs[j - 1];
                let (a2, k2) = imgs[j_next - 1];
                if k1.max(k2) >= self.t_max {
                    continue;
                }
                let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
                if hi <= self.interval.lo || lo >= self.interval.hi {
                    continue;
                }
                stack.push(GapFrame {
                    motion: frame.motion.compose(&self.reflections[j - 1]),
                    gap: j,
                    bound_kappa: (k1, k2),
                    depth: frame.depth + 1,
                });
            }
        }
        Ok(())
    }
}

fn seed_frames<T: Scalar>(
    cfg: &FordConfig<T>,
    reflections: &[Motion<T>],
    t_max: T,
    interval: Interval<T>,
) -> (Vec<Tangency<T>>, Vec<GapFrame<T>>) {
    let h = cfg.h();
    let t = cfg.period();
    let n_lo = (interval.lo / t).floor().to_f64().unwrap() as i64;
    let n_hi = (interval.hi / t).floor().to_f64().unwrap() as i64;

    let mut circles = Vec::new();
    let mut frames = Vec::new();
    for n in n_lo..=n_hi {
        let offset = t * real::<T>(n as f64);
        let shift = Motion::Mobius(MobiusMap::translation(offset));
        for l in 2..=h {
            let alpha = offset + cfg.alpha(l).unwrap();
            let kappa = cfg.radius(l).unwrap().recip();
            if kappa <= t_max && interval.contains(alpha) {
                circles.push(Tangency {
                    alpha,
                    kappa,
                    depth: 0,
                });
            }
        }
        // mirror images of the interior chain in the far gap wall fill (t/2, t)
        for l in 3..h {
            let alpha = offset + t - cfg.alpha(l).unwrap();
            let kappa = cfg.radius(l).unwrap().recip();
            if kappa <= t_max && interval.contains(alpha) {
                circles.push(Tangency {
                    alpha,
                    kappa,
                    depth: 0,
                });
            }
        }
        let far = shift.compose(&reflections[h - 1]);
        for g in 2..h {
            for motion in [shift.compose(&reflections[g - 1]), far.compose(&reflections[g - 1])] {
                let b1 = foot(&motion.apply_circle(&cfg.circle(g)));
                let b2 = foot(&motion.apply_circle(&cfg.circle(g + 1)));
                if b1.1.max(b2.1) >= t_max {
                    continue;
                }
                let (lo, hi) = if b1.0 < b2.0 { (b1.0, b2.0) } else { (b2.0, b1.0) };
                if hi <= interval.lo || lo >= interval.hi {
                    continue;
                }
                frames.push(GapFrame {
                    motion,
                    gap: g,
                    bound_kappa: (b1.1, b2.1),
                    depth: 1,
                });
            }
        }
    }
    (circles, frames)
}

fn run<T: Scalar>(
    cfg: &FordConfig<T>,
    t_max: T,
    interval: Interval<T>,
    params: &EnumerateParams,
    trace: Option<&mut Vec<(T, T, T)>>,
) -> Result<Vec<Tangency<T>>, EnumerateError> {
    cfg.ensure_valid(real(crate::DEFAULT_TOL))?;
    if interval.is_empty() {
        return Err(EnumerateError::EmptyInterval);
    }
    if !(t_max > T::zero()) || !t_max.is_finite() {
        return Err(EnumerateError::BadBound);
    }
    let reflections: Vec<Motion<T>> = cfg
        .gap_reflections()?
        .into_iter()
        .map(Motion::Anti)
        .collect();
    let (mut out, seeds) = seed_frames(cfg, &reflections, t_max, interval);
    let nodes = AtomicU64::new(0);
    let walk = Walk {
        cfg,
        reflections,
        t_max,
        interval,
        nodes: &nodes,
        node_cap: params.node_cap,
    };
    if params.parallel && trace.is_none() {
        let chunks: Result<Vec<Vec<Tangency<T>>>, EnumerateError> = seeds
            .into_par_iter()
            .map(|seed| {
                let mut local = Vec::new();
                walk.subtree(seed, &mut local, None)?;
                Ok(local)
            })
            .collect();
        for chunk in chunks? {
            out.extend(chunk);
        }
    } else {
        let mut trace = trace;
        for seed in seeds {
            walk.subtree(seed, &mut out, trace.as_deref_mut())?;
        }
    }
    out.sort_unstable_by(|x, y| x.alpha.partial_cmp(&y.alpha).expect("finite positions"));
    let merge = real::<T>(params.merge_tol);
    out.dedup_by(|b, a| (b.alpha - a.alpha).abs() <= merge);
    Ok(out)
}

/// All tangencies of the packing in `interval` whose circles have curvature
/// at most `t_max`, sorted by position, duplicates merged.
pub fn enumerate_tangencies<T: Scalar>(
    cfg: &FordConfig<T>,
    t_max: T,
    interval: Interval<T>,
    params: &EnumerateParams,
) -> Result<Vec<Tangency<T>>, EnumerateError> {
    run(cfg, t_max, interval, params, None)
}

/// Trace sample: parent min bound, parent max bound, emitted curvature.
#[doc(hidden)]
pub type TraceSample<T> = (T, T, T);

/// Enumeration with a trace of pruning-soundness samples.
#[doc(hidden)]
#[allow(clippy::type_complexity)]
pub fn enumerate_tangencies_traced<T: Scalar>(
    cfg: &FordConfig<T>,
    t_max: T,
    interval: Interval<T>,
    params: &EnumerateParams,
) -> Result<(Vec<Tangency<T>>, Vec<TraceSample<T>>), EnumerateError> {
    let mut trace = Vec::new();
    let out = run(cfg, t_max, interval, params, Some(&mut trace))?;
    Ok((out, trace))
}

/// Tangency count against the linear prediction `l(I)·c·T`.
pub fn count_asymptotic_check<T: Scalar>(
    cfg: &FordConfig<T>,
    t_max: T,
    interval: Interval<T>,
    params: &EnumerateParams,
) -> Result<(usize, T), EnumerateError> {
    let tangencies = enumerate_tangencies(cfg, t_max, interval, params)?;
    let count = tangencies.len();
    let predicted = interval.len() * cfg.density_constant() * t_max;
    let ratio = if count == 0 {
        T::zero()
    } else {
        real::<T>(count as f64) / predicted
    };
    Ok((count, ratio))
}
