//! The limiting gap distribution `F(s)`.
//!
//! Two circles of the initial chain stay adjacent in the truncated packing
//! exactly when the lower row `(c, d)` of the group element moving them lies
//! in a region of the half-plane `c ≥ 0` cut out by finitely many
//! constraints, each a product of at most two linear forms in `(c, d)`
//! compared against a threshold: two curvature upper bounds, curvature lower
//! bounds excluding every circle that would land between the pair, and a
//! bilinear cutoff encoding the normalized gap size. `F(s)` is then a
//! weighted sum of the areas of these regions, one or two per (unordered)
//! pair of chain circles, with disjoint pairs counted twice.
//!
//! All constraint forms are homogeneous, so a region meets each ray from the
//! origin in a radial interval; areas are computed exactly as one-dimensional
//! integrals over the angle. The generic quadtree quadrature
//! ([`region_area`]) is kept alongside as an independent route and as the
//! area oracle for arbitrary (non-homogeneous) regions.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, FordConfig, PairKind};
use crate::{real, Scalar};

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid circle pair ({0}, {1})")]
    InvalidPair(usize, usize),
    #[error("cell budget of {0} exceeded before reaching tolerance")]
    BudgetExceeded(u64),
    #[error("region constraints are not homogeneous")]
    NotHomogeneous,
    #[error("no pair contributes support")]
    NoSupport,
}

/// Affine form `u·c + v·d + w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearForm<T> {
    pub u: T,
    pub v: T,
    pub w: T,
}

impl<T: Scalar> LinearForm<T> {
    pub fn new(u: T, v: T, w: T) -> Self {
        LinearForm { u, v, w }
    }

    /// The constant form `1`, used as the second factor of linear constraints.
    pub fn one() -> Self {
        LinearForm {
            u: T::zero(),
            v: T::zero(),
            w: T::one(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.u == T::zero() && self.v == T::zero() && self.w == T::one()
    }

    pub fn eval(&self, c: T, d: T) -> T {
        self.u * c + self.v * d + self.w
    }

    fn is_homogeneous(&self) -> bool {
        self.w == T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
}

/// Constraint `f1(c,d) · f2(c,d) REL rhs`; linear constraints set `f2 ≡ 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BilinearConstraint<T> {
    pub f1: LinearForm<T>,
    pub f2: LinearForm<T>,
    pub rel: Relation,
    pub rhs: T,
}

impl<T: Scalar> BilinearConstraint<T> {
    pub fn satisfied(&self, c: T, d: T) -> bool {
        let lhs = self.f1.eval(c, d) * self.f2.eval(c, d);
        match self.rel {
            Relation::Le => lhs <= self.rhs,
            Relation::Lt => lhs < self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Gt => lhs > self.rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rect<T> {
    pub c_min: T,
    pub c_max: T,
    pub d_min: T,
    pub d_max: T,
}

/// Region of the `(c, d)` half-plane: conjunction of bilinear constraints,
/// together with a box guaranteed to contain it.
#[derive(Debug, Clone, Serialize)]
pub struct Region<T> {
    pub constraints: Vec<BilinearConstraint<T>>,
    pub bounding_box: Rect<T>,
}

/// Unordered pair of chain circles with its multiplicity in `F`.
#[derive(Debug, Clone, Copy)]
pub struct PairClass {
    pub i: usize,
    pub j: usize,
    pub kind: PairKind,
    /// 1 for tangent pairs, 2 for disjoint pairs.
    pub weight: u32,
}

/// All unordered pairs from the chain (indices `1..=h`), classified.
pub fn pair_classes<T: Scalar>(cfg: &FordConfig<T>) -> Vec<PairClass> {
    let h = cfg.h();
    let mut out = Vec::new();
    for i in 1..=h {
        for j in (i + 1)..=h {
            let kind = cfg.pair_kind(i, j);
            out.push(PairClass {
                i,
                j,
                kind,
                weight: match kind {
                    PairKind::Tangent => 1,
                    PairKind::Disjoint => 2,
                },
            });
        }
    }
    out
}

/// Curvature form of chain circle `k`: the image curvature under a group
/// element with lower row `(c, d)` is the square of this form.
fn curvature_form<T: Scalar>(cfg: &FordConfig<T>, k: usize) -> LinearForm<T> {
    if k == 1 {
        LinearForm::new(real::<T>(2.0).sqrt(), T::zero(), T::zero())
    } else {
        let rs = cfg.radius(k).unwrap().sqrt();
        LinearForm::new(cfg.alpha(k).unwrap() / rs, rs.recip(), T::zero())
    }
}

/// Plain tangency form `c·α_k + d` (finite `k` only).
fn plain_form<T: Scalar>(cfg: &FordConfig<T>, k: usize) -> LinearForm<T> {
    LinearForm::new(cfg.alpha(k).unwrap(), T::one(), T::zero())
}

/// Curvature form of a reflected chain circle.
fn reflected_form<T: Scalar>(
    cfg: &FordConfig<T>,
    refl: &crate::geom::AntiMobiusMap<T>,
    k: usize,
) -> LinearForm<T> {
    let img = refl.apply_circle(&cfg.circle(k));
    let (a, b, _) = img.coefficients();
    debug_assert!(a > T::zero(), "reflected chain member is a proper circle");
    let alpha = -b.re / a;
    let rs = a.recip().sqrt();
    LinearForm::new(alpha / rs, rs.recip(), T::zero())
}

struct RegionBuilder<T: Scalar> {
    constraints: Vec<BilinearConstraint<T>>,
    box_forms: (LinearForm<T>, LinearForm<T>),
}

impl<T: Scalar> RegionBuilder<T> {
    fn new(fi: LinearForm<T>, fj: LinearForm<T>) -> Self {
        let mut b = RegionBuilder {
            constraints: Vec::new(),
            box_forms: (fi, fj),
        };
        // right half plane
        b.constraints.push(BilinearConstraint {
            f1: LinearForm::new(T::one(), T::zero(), T::zero()),
            f2: LinearForm::one(),
            rel: Relation::Ge,
            rhs: T::zero(),
        });
        for f in [fi, fj] {
            b.constraints.push(BilinearConstraint {
                f1: f,
                f2: f,
                rel: Relation::Le,
                rhs: T::one(),
            });
        }
        b
    }

    fn exclude(&mut self, f: LinearForm<T>) {
        self.constraints.push(BilinearConstraint {
            f1: f,
            f2: f,
            rel: Relation::Gt,
            rhs: T::one(),
        });
    }

    fn gate_product(&mut self, f: LinearForm<T>, g: LinearForm<T>, positive: bool) {
        self.constraints.push(BilinearConstraint {
            f1: f,
            f2: g,
            rel: if positive { Relation::Gt } else { Relation::Lt },
            rhs: T::zero(),
        });
    }

    fn gate_sign(&mut self, f: LinearForm<T>, positive: bool) {
        self.constraints.push(BilinearConstraint {
            f1: f,
            f2: LinearForm::one(),
            rel: if positive { Relation::Gt } else { Relation::Lt },
            rhs: T::zero(),
        });
    }

    fn cutoff(&mut self, q1: LinearForm<T>, q2: LinearForm<T>, tau: T, positive: bool) {
        self.constraints.push(BilinearConstraint {
            f1: q1,
            f2: q2,
            rel: if positive { Relation::Ge } else { Relation::Le },
            rhs: if positive { tau } else { -tau },
        });
    }

    fn finish(self) -> Region<T> {
        let (fi, fj) = self.box_forms;
        let det = fi.u * fj.v - fi.v * fj.u;
        let mut c_min = T::infinity();
        let mut c_max = T::neg_infinity();
        let mut d_min = T::infinity();
        let mut d_max = T::neg_infinity();
        for si in [-T::one(), T::one()] {
            for sj in [-T::one(), T::one()] {
                let c = (si * fj.v - sj * fi.v) / det;
                let d = (fi.u * sj - fj.u * si) / det;
                c_min = c_min.min(c);
                c_max = c_max.max(c);
                d_min = d_min.min(d);
                d_max = d_max.max(d);
            }
        }
        Region {
            constraints: self.constraints,
            bounding_box: Rect {
                c_min: c_min.max(T::zero()),
                c_max: c_max.max(T::zero()),
                d_min,
                d_max,
            },
        }
    }
}

/// The one or two sign-branch regions whose points make the images of chain
/// circles `i` and `j` adjacent with normalized gap at most `s`, at
/// truncation level 1.
///
/// Index 1 denotes the top line. Values `s ≤ 0` produce structurally empty
/// regions (the cutoff threshold becomes infinite); `s = ∞` drops the
/// cutoff.
pub fn build_regions<T: Scalar>(
    cfg: &FordConfig<T>,
    i: usize,
    j: usize,
    s: T,
) -> Result<Vec<Region<T>>, TheoryError> {
    let h = cfg.h();
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    if i == j || i < 1 || j > h {
        return Err(TheoryError::InvalidPair(i, j));
    }
    let c_const = cfg.density_constant();
    let kind = cfg.pair_kind(i, j);
    let tau_of = |thresh: T| {
        if s > T::zero() {
            thresh / s
        } else {
            T::infinity()
        }
    };

    let mut out = Vec::with_capacity(2);
    if i == 1 {
        // partner circle p against the top line
        let p = j;
        let fp = plain_form(cfg, p);
        let q1 = LinearForm::new(T::one(), T::zero(), T::zero());
        let tau = tau_of(c_const);
        let alpha_p = cfg.alpha(p).unwrap();
        for positive in [true, false] {
            let mut b = RegionBuilder::new(curvature_form(cfg, 1), curvature_form(cfg, p));
            b.gate_sign(fp, positive);
            match kind {
                PairKind::Tangent => {
                    // circles on the chosen side land between the image pair;
                    // circles on the far side do so after reflecting through
                    // the gap the pair bounds
                    let refl = cfg
                        .pair_reflection(1, p)
                        .map_err(|_| TheoryError::InvalidPair(i, j))?;
                    for k in 2..=h {
                        if k == p {
                            continue;
                        }
                        let side = cfg.alpha(k).unwrap() > alpha_p;
                        if side == positive {
                            b.exclude(curvature_form(cfg, k));
                        } else {
                            b.exclude(reflected_form(cfg, &refl, k));
                        }
                    }
                }
                PairKind::Disjoint => {
                    for k in 2..=h {
                        if k == p {
                            continue;
                        }
                        let side = cfg.alpha(k).unwrap() > alpha_p;
                        if side == positive {
                            b.exclude(curvature_form(cfg, k));
                        }
                    }
                }
            }
            b.cutoff(q1, fp, tau, positive);
            out.push(b.finish());
        }
    } else {
        let (fi, fj) = (plain_form(cfg, i), plain_form(cfg, j));
        let (ai, aj) = (cfg.alpha(i).unwrap(), cfg.alpha(j).unwrap());
        let tau = tau_of((ai - aj).abs() * c_const);
        for positive in [true, false] {
            let mut b = RegionBuilder::new(curvature_form(cfg, i), curvature_form(cfg, j));
            b.gate_product(fi, fj, positive);
            match kind {
                PairKind::Tangent => {
                    if positive {
                        // nothing of the chain sits between a tangent pair, so
                        // the gap is filled by the reflected configuration
                        let refl = cfg
                            .pair_reflection(i, j)
                            .map_err(|_| TheoryError::InvalidPair(i, j))?;
                        for k in 1..=h {
                            if k != i && k != j {
                                b.exclude(reflected_form(cfg, &refl, k));
                            }
                        }
                    } else {
                        for k in 1..=h {
                            if k != i && k != j {
                                b.exclude(curvature_form(cfg, k));
                            }
                        }
                    }
                }
                PairKind::Disjoint => {
                    for k in 1..=h {
                        if k == i || k == j {
                            continue;
                        }
                        let between = k != 1 && {
                            let ak = cfg.alpha(k).unwrap();
                            (ak - ai) * (ak - aj) < T::zero()
                        };
                        if between == positive {
                            b.exclude(curvature_form(cfg, k));
                        }
                    }
                }
            }
            b.cutoff(fi, fj, tau, positive);
            out.push(b.finish());
        }
    }
    Ok(out)
}

/// Conservative bounds of `f1·f2` over the cell `[c0, c0+w] × [d0, d0+h]`
/// (exact linear ranges, interval product for genuine bilinears).
fn constraint_range<T: Scalar>(
    k: &BilinearConstraint<T>,
    c0: T,
    d0: T,
    w: T,
    h: T,
) -> (T, T) {
    let half = real::<T>(0.5);
    let form_range = |f: &LinearForm<T>| {
        let center = f.eval(c0 + w * half, d0 + h * half);
        let radius = f.u.abs() * w * half + f.v.abs() * h * half;
        (center - radius, center + radius)
    };
    let (l1, h1) = form_range(&k.f1);
    if k.f2.is_one() {
        (l1, h1)
    } else if k.f1 == k.f2 {
        if l1 <= T::zero() && h1 >= T::zero() {
            (T::zero(), (l1 * l1).max(h1 * h1))
        } else {
            let a = l1 * l1;
            let b = h1 * h1;
            (a.min(b), a.max(b))
        }
    } else {
        let (l2, h2) = form_range(&k.f2);
        let products = [l1 * l2, l1 * h2, h1 * l2, h1 * h2];
        (
            products.iter().fold(T::infinity(), |m, &x| m.min(x)),
            products.iter().fold(T::neg_infinity(), |m, &x| m.max(x)),
        )
    }
}

enum CellClass {
    Inside,
    Outside,
    Mixed,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, c: T, d: T) -> bool {
        self.constraints.iter().all(|k| k.satisfied(c, d))
    }

    /// Conservative classification of a cell: `Inside` and `Outside` are
    /// certain, everything else stays `Mixed`.
    fn classify_cell(&self, c0: T, d0: T, w: T, h: T) -> CellClass {
        let mut all_inside = true;
        for k in &self.constraints {
            let (lo, hi) = constraint_range(k, c0, d0, w, h);
            let (sure_true, sure_false) = match k.rel {
                Relation::Le => (hi <= k.rhs, lo > k.rhs),
                Relation::Lt => (hi < k.rhs, lo >= k.rhs),
                Relation::Ge => (lo >= k.rhs, hi < k.rhs),
                Relation::Gt => (lo > k.rhs, hi <= k.rhs),
            };
            if sure_false {
                return CellClass::Outside;
            }
            all_inside &= sure_true;
        }
        if all_inside {
            CellClass::Inside
        } else {
            CellClass::Mixed
        }
    }

    /// Area by adaptive quadtree subdivision of the bounding box with
    /// conservative cell classification: a cell counts as inside/outside
    /// only when interval bounds on every constraint prove it, and splits
    /// otherwise, to a maximum depth of 24. The unresolved boundary band is
    /// driven below `tol` and contributes half its measure, so the result is
    /// within `tol` of the true area.
    ///
    /// Subdivision is depth-first to a stop depth that is deepened until the
    /// boundary band is small enough; reruns cost at most as much as the
    /// final pass.
    pub fn area_quadtree(&self, tol: T, cell_budget: u64) -> Result<T, TheoryError> {
        let bb = self.bounding_box;
        let (w, h) = (bb.c_max - bb.c_min, bb.d_max - bb.d_min);
        if !(w > T::zero()) || !(h > T::zero()) {
            return Ok(T::zero());
        }
        let mut processed: u64 = 0;
        for stop_depth in 4..=24u32 {
            let mut accepted = T::zero();
            let mut unresolved = T::zero();
            let mut stack = vec![(bb.c_min, bb.d_min, w, h, 0u32)];
            while let Some((c0, d0, cw, ch, depth)) = stack.pop() {
                processed += 1;
                if processed > cell_budget {
                    return Err(TheoryError::BudgetExceeded(cell_budget));
                }
                match self.classify_cell(c0, d0, cw, ch) {
                    CellClass::Inside => accepted += cw * ch,
                    CellClass::Outside => {}
                    CellClass::Mixed => {
                        if depth >= stop_depth {
                            unresolved += cw * ch;
                        } else {
                            let hw = cw / real(2.0);
                            let hh = ch / real(2.0);
                            for (sc, sd) in [
                                (T::zero(), T::zero()),
                                (hw, T::zero()),
                                (T::zero(), hh),
                                (hw, hh),
                            ] {
                                stack.push((c0 + sc, d0 + sd, hw, hh, depth + 1));
                            }
                        }
                    }
                }
            }
            if unresolved <= tol {
                return Ok(accepted + unresolved / real(2.0));
            }
        }
        Err(TheoryError::BudgetExceeded(cell_budget))
    }

    /// Radial reduction: every constraint is homogeneous of degree ≤ 2, so
    /// the section along each ray is an interval in `ρ²`.
    pub(crate) fn radial_profile(&self) -> Result<RadialProfile<T>, TheoryError> {
        let mut p = RadialProfile {
            upper: Vec::new(),
            lower: Vec::new(),
            gates: Vec::new(),
            cutoff: None,
        };
        for k in &self.constraints {
            if !k.f1.is_homogeneous() || !(k.f2.is_one() || k.f2.is_homogeneous()) {
                return Err(TheoryError::NotHomogeneous);
            }
            if k.f2.is_one() {
                // pure sign condition on the direction
                if k.rhs != T::zero() {
                    return Err(TheoryError::NotHomogeneous);
                }
                p.gates.push(RadialGate {
                    f: (k.f1.u, k.f1.v),
                    g: None,
                    positive: matches!(k.rel, Relation::Ge | Relation::Gt),
                });
            } else if k.f1 == k.f2 {
                match k.rel {
                    Relation::Le | Relation::Lt => p.upper.push((k.f1.u, k.f1.v)),
                    Relation::Ge | Relation::Gt => p.lower.push((k.f1.u, k.f1.v)),
                }
            } else if k.rhs == T::zero() {
                p.gates.push(RadialGate {
                    f: (k.f1.u, k.f1.v),
                    g: Some((k.f2.u, k.f2.v)),
                    positive: matches!(k.rel, Relation::Ge | Relation::Gt),
                });
            } else {
                if p.cutoff.is_some() {
                    return Err(TheoryError::NotHomogeneous);
                }
                p.cutoff = Some(Cutoff {
                    q1: (k.f1.u, k.f1.v),
                    q2: (k.f2.u, k.f2.v),
                    tau: k.rhs.abs(),
                });
            }
        }
        Ok(p)
    }

    /// Area via the radial route when the region is homogeneous, otherwise
    /// via the quadtree.
    pub fn area(&self, tol: T) -> Result<T, TheoryError> {
        match self.radial_profile() {
            Ok(p) => Ok(p.area(T::one(), tol)),
            Err(TheoryError::NotHomogeneous) => {
                self.area_quadtree(tol, DEFAULT_CELL_BUDGET)
            }
            Err(e) => Err(e),
        }
    }
}

pub const DEFAULT_CELL_BUDGET: u64 = 50_000_000;

/// Area by adaptive quadtree subdivision (see [`Region::area_quadtree`]).
pub fn region_area<T: Scalar>(region: &Region<T>, tol: T) -> Result<T, TheoryError> {
    region.area_quadtree(tol, DEFAULT_CELL_BUDGET)
}

#[derive(Debug, Clone, Copy)]
struct RadialGate<T> {
    f: (T, T),
    g: Option<(T, T)>,
    positive: bool,
}

#[derive(Debug, Clone, Copy)]
struct Cutoff<T> {
    q1: (T, T),
    q2: (T, T),
    tau: T,
}

#[derive(Debug, Clone)]
pub(crate) struct RadialProfile<T> {
    upper: Vec<(T, T)>,
    lower: Vec<(T, T)>,
    gates: Vec<RadialGate<T>>,
    cutoff: Option<Cutoff<T>>,
}

fn angular<T: Scalar>(f: (T, T), sin_t: T, cos_t: T) -> T {
    f.0 * sin_t + f.1 * cos_t
}

/// Root of `u·sin θ + v·cos θ` in `[0, π)`.
fn form_root<T: Scalar>(u: T, v: T) -> Option<T> {
    if u == T::zero() && v == T::zero() {
        return None;
    }
    let mut t = (-v).atan2(u);
    if t < T::zero() {
        t += T::PI();
    }
    if t >= T::PI() {
        t -= T::PI();
    }
    Some(t)
}

/// Real roots of `a·t² + b·t + c`.
fn quadratic_roots<T: Scalar>(a: T, b: T, c: T) -> Vec<T> {
    let eps = real::<T>(1e-14);
    if a.abs() <= eps * (b.abs() + c.abs()) {
        if b.abs() <= eps * c.abs() {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - real::<T>(4.0) * a * c;
    if disc < T::zero() {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // numerically stable pairing
    let q = -(b + b.signum() * sq) / real(2.0);
    if q == T::zero() {
        return vec![T::zero()];
    }
    vec![q / a, c / q]
}

impl<T: Scalar> RadialProfile<T> {
    /// Length of the `ρ²` section along direction θ, with the cutoff
    /// threshold scaled by `1/s` (`s = ∞` drops it, `s ≤ 0` empties it).
    fn section(&self, theta: T, inv_s: T) -> T {
        let sin_t = theta.sin();
        let cos_t = theta.cos();
        for gate in &self.gates {
            let mut val = angular(gate.f, sin_t, cos_t);
            if let Some(g) = gate.g {
                val *= angular(g, sin_t, cos_t);
            }
            if gate.positive != (val > T::zero()) {
                return T::zero();
            }
        }
        let mut ub = T::infinity();
        for &f in &self.upper {
            let l = angular(f, sin_t, cos_t);
            ub = ub.min((l * l).recip());
        }
        let mut lb = T::zero();
        for &f in &self.lower {
            let l = angular(f, sin_t, cos_t);
            lb = lb.max((l * l).recip());
        }
        if let Some(cut) = self.cutoff {
            let q = angular(cut.q1, sin_t, cos_t) * angular(cut.q2, sin_t, cos_t);
            lb = lb.max(cut.tau * inv_s / q.abs());
        }
        let len = ub - lb;
        if len > T::zero() && len.is_finite() {
            len
        } else {
            T::zero()
        }
    }

    /// Angles where the radial section can switch structure: form roots,
    /// crossings between any two constraint forms (these are where the active
    /// bound changes and where exclusion bounds meet the upper bound), and
    /// the angles where the cutoff bound crosses an upper bound (support
    /// edges, solved as a quadratic in tan θ).
    fn breakpoints(&self, inv_s: T) -> Vec<T> {
        let mut pts = vec![T::zero(), T::PI() / real(2.0), T::PI()];
        let mut push = |f: (T, T)| {
            if let Some(t) = form_root(f.0, f.1) {
                pts.push(t);
            }
        };
        for &f in self.upper.iter().chain(&self.lower) {
            push(f);
        }
        for g in &self.gates {
            push(g.f);
            if let Some(f) = g.g {
                push(f);
            }
        }
        if let Some(cut) = self.cutoff {
            push(cut.q1);
            push(cut.q2);
        }
        // crossings L_a² = L_b² between any two bound forms
        let forms: Vec<(T, T)> = self.upper.iter().chain(&self.lower).cloned().collect();
        for a in 0..forms.len() {
            for b in (a + 1)..forms.len() {
                let (fa, fb) = (forms[a], forms[b]);
                push((fa.0 - fb.0, fa.1 - fb.1));
                push((fa.0 + fb.0, fa.1 + fb.1));
            }
        }
        // edges and kinks involving the cutoff: τ/s · L² = ±q1·q2 for every
        // bound form L, quadratic in tan θ
        if let Some(cut) = self.cutoff {
            if inv_s > T::zero() {
                let tau = cut.tau * inv_s;
                for &(u1, v1) in self.upper.iter().chain(&self.lower) {
                    for sigma in [T::one(), -T::one()] {
                        let a = tau * u1 * u1 - sigma * cut.q1.0 * cut.q2.0;
                        let b = real::<T>(2.0) * tau * u1 * v1
                            - sigma * (cut.q1.0 * cut.q2.1 + cut.q2.0 * cut.q1.1);
                        let c = tau * v1 * v1 - sigma * cut.q1.1 * cut.q2.1;
                        for t in quadratic_roots(a, b, c) {
                            let mut th = t.atan();
                            if th < T::zero() {
                                th += T::PI();
                            }
                            pts.push(th);
                        }
                    }
                }
            }
        }
        pts.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup_by(|b, a| (*b - *a).abs() <= real(1e-14));
        pts.retain(|&t| t >= T::zero() && t <= T::PI());
        pts
    }

    /// Area of the region with the cutoff scaled to level `s`.
    pub(crate) fn area(&self, s: T, tol: T) -> T {
        let inv_s = if s == T::infinity() {
            T::zero()
        } else if s > T::zero() {
            s.recip()
        } else {
            return T::zero();
        };
        let pts = self.breakpoints(inv_s);
        let total_len = T::PI();
        let mut area = T::zero();
        // a few fixed panels per segment guard against support that the
        // first Simpson probes would miss entirely; the error budget is kept
        // well below the requested tolerance because the Simpson estimate is
        // heuristic on integrands with high curvature
        let panels = 8;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let eps = tol * ((b - a) / total_len).max(real(1e-3)) / real(panels as f64 * 16.0);
            let step = (b - a) / real(panels as f64);
            for k in 0..panels {
                let pa = a + step * real(k as f64);
                let pb = if k + 1 == panels { b } else { pa + step };
                area += adaptive_simpson(
                    &|t| self.section(t, inv_s) / real::<T>(2.0),
                    pa,
                    pb,
                    eps,
                    40,
                );
            }
        }
        area
    }

    /// Supremum of `|q₁·q₂|` over the region without its cutoff (the largest
    /// bilinear value the gap condition can attain).
    pub(crate) fn max_abs_q(&self) -> T {
        let cut = match self.cutoff {
            Some(c) => c,
            None => return T::zero(),
        };
        let value = |theta: T| -> T {
            let sin_t = theta.sin();
            let cos_t = theta.cos();
            for gate in &self.gates {
                let mut val = angular(gate.f, sin_t, cos_t);
                if let Some(g) = gate.g {
                    val *= angular(g, sin_t, cos_t);
                }
                if gate.positive != (val > T::zero()) {
                    return T::zero();
                }
            }
            let mut ub = T::infinity();
            for &f in &self.upper {
                let l = angular(f, sin_t, cos_t);
                ub = ub.min((l * l).recip());
            }
            let mut lb = T::zero();
            for &f in &self.lower {
                let l = angular(f, sin_t, cos_t);
                lb = lb.max((l * l).recip());
            }
            if !(lb < ub) || !ub.is_finite() {
                return T::zero();
            }
            let q = angular(cut.q1, sin_t, cos_t) * angular(cut.q2, sin_t, cos_t);
            ub * q.abs()
        };
        let pts = self.breakpoints(T::zero());
        let mut best = T::zero();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let n = 512;
            let step = (b - a) / real(n as f64);
            let mut samples = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let t = a + step * real(k as f64);
                samples.push(value(t));
            }
            for k in 0..=n {
                let is_peak = (k == 0 || samples[k] >= samples[k - 1])
                    && (k == n || samples[k] >= samples[k + 1]);
                if !is_peak || samples[k] <= best * real(0.999999) {
                    continue;
                }
                let lo = if k == 0 { a } else { a + step * real((k - 1) as f64) };
                let hi = if k == n { b } else { a + step * real((k + 1) as f64) };
                best = best.max(golden_max(&value, lo, hi, real(1e-13)));
            }
        }
        best
    }
}

fn adaptive_simpson<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, eps: T, depth: u32) -> T {
    let m = (a + b) / real(2.0);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / real(6.0) * (fa + real::<T>(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, eps, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    eps: T,
    depth: u32,
) -> T {
    let m = (a + b) / real(2.0);
    let lm = (a + m) / real(2.0);
    let rm = (m + b) / real(2.0);
    let flm = f(lm);
    let frm = f(rm);
    let six = real::<T>(6.0);
    let four = real::<T>(4.0);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= real::<T>(15.0) * eps {
        left + right + delta / real(15.0)
    } else {
        let half = eps / real(2.0);
        simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)
    }
}

fn golden_max<T: Scalar, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T, tol: T) -> T {
    let phi = (real::<T>(5.0).sqrt() - T::one()) / real(2.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Monte-Carlo area estimate over the bounding box with an embedded
/// xorshift generator: the same seed always reproduces the same estimate.
/// Returns the estimate and its standard error.
pub fn mc_area<T: Scalar>(region: &Region<T>, samples: u64, seed: u64) -> (T, T) {
    let bb = region.bounding_box;
    let (w, h) = (bb.c_max - bb.c_min, bb.d_max - bb.d_min);
    if !(w > T::zero()) || !(h > T::zero()) || samples == 0 {
        return (T::zero(), T::zero());
    }
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
    let mut next = move || -> f64 {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    };
    let mut hits = 0u64;
    for _ in 0..samples {
        let c = bb.c_min + w * real(next());
        let d = bb.d_min + h * real(next());
        if region.contains(c, d) {
            hits += 1;
        }
    }
    let box_area = w * h;
    let p = hits as f64 / samples as f64;
    let sigma = (p * (1.0 - p) / samples as f64).sqrt();
    (box_area * real(p), box_area * real(sigma))
}

/// Quasi-random (two-dimensional additive recurrence) area estimate.
pub fn quasi_area<T: Scalar>(region: &Region<T>, samples: u64) -> T {
    let bb = region.bounding_box;
    let (w, h) = (bb.c_max - bb.c_min, bb.d_max - bb.d_min);
    if !(w > T::zero()) || !(h > T::zero()) || samples == 0 {
        return T::zero();
    }
    // inverse powers of the plastic constant
    const A1: f64 = 0.754_877_666_246_693;
    const A2: f64 = 0.569_840_290_998_053;
    let mut hits = 0u64;
    let (mut x, mut y) = (0.5f64, 0.5f64);
    for _ in 0..samples {
        x += A1;
        if x >= 1.0 {
            x -= 1.0;
        }
        y += A2;
        if y >= 1.0 {
            y -= 1.0;
        }
        let c = bb.c_min + w * real(x);
        let d = bb.d_min + h * real(y);
        if region.contains(c, d) {
            hits += 1;
        }
    }
    w * h * real(hits as f64 / samples as f64)
}

/// Monte-Carlo estimate of `F(s)` from the weighted branch regions.
pub fn limiting_f_mc<T: Scalar>(
    cfg: &FordConfig<T>,
    s: T,
    samples_per_region: u64,
    seed: u64,
) -> Result<T, TheoryError> {
    let d = cfg.d_total();
    let mut sum = T::zero();
    let mut k = 0u64;
    for pc in pair_classes(cfg) {
        for region in build_regions(cfg, pc.i, pc.j, s)? {
            let (a, _) = mc_area(&region, samples_per_region, seed.wrapping_add(k));
            sum += real::<T>(pc.weight as f64) * a;
            k += 1;
        }
    }
    Ok(real::<T>(2.0) / d * sum)
}

struct BranchEntry<T> {
    weight: T,
    profile: RadialProfile<T>,
}

fn branch_entries<T: Scalar>(cfg: &FordConfig<T>) -> Result<Vec<BranchEntry<T>>, TheoryError> {
    let mut entries = Vec::new();
    for pc in pair_classes(cfg) {
        for region in build_regions(cfg, pc.i, pc.j, T::one())? {
            entries.push(BranchEntry {
                weight: real(pc.weight as f64),
                profile: region.radial_profile()?,
            });
        }
    }
    Ok(entries)
}

/// The limiting gap distribution sampled on `grid`.
pub fn limiting_f<T: Scalar>(
    cfg: &FordConfig<T>,
    grid: &[T],
    tol: T,
) -> Result<Vec<T>, TheoryError> {
    cfg.ensure_valid(real(crate::DEFAULT_TOL))?;
    let entries = branch_entries(cfg)?;
    let d = cfg.d_total();
    let w_total = entries.iter().fold(T::zero(), |acc, e| acc + e.weight);
    let per_tol = tol * d / (real::<T>(4.0) * w_total);
    let two_over_d = real::<T>(2.0) / d;
    Ok(grid
        .par_iter()
        .map(|&s| {
            if !(s > T::zero()) {
                return T::zero();
            }
            let sum = entries
                .iter()
                .fold(T::zero(), |acc, e| acc + e.weight * e.profile.area(s, per_tol));
            two_over_d * sum
        })
        .collect())
}

/// The contribution of a single pair, `(2/D)·m(Ω^{i,j}(s))`, sampled on
/// `grid` (multiplicity for disjoint pairs is up to the caller).
pub fn pair_component_f<T: Scalar>(
    cfg: &FordConfig<T>,
    i: usize,
    j: usize,
    grid: &[T],
    tol: T,
) -> Result<Vec<T>, TheoryError> {
    let regions = build_regions(cfg, i, j, T::one())?;
    let profiles: Vec<RadialProfile<T>> = regions
        .iter()
        .map(|r| r.radial_profile())
        .collect::<Result<_, _>>()?;
    let d = cfg.d_total();
    let per_tol = tol * d / real::<T>(8.0);
    let two_over_d = real::<T>(2.0) / d;
    Ok(grid
        .par_iter()
        .map(|&s| {
            if !(s > T::zero()) {
                return T::zero();
            }
            let sum = profiles
                .iter()
                .fold(T::zero(), |acc, p| acc + p.area(s, per_tol));
            two_over_d * sum
        })
        .collect())
}

/// The largest `δ` with `F(s) = 0` for all `s ≤ δ`: minimum over pairs and
/// sign branches of (cutoff threshold) / (maximum of the bilinear form over
/// the branch region without its cutoff).
pub fn support_threshold<T: Scalar>(cfg: &FordConfig<T>) -> Result<T, TheoryError> {
    let mut best = T::infinity();
    for pc in pair_classes(cfg) {
        for region in build_regions(cfg, pc.i, pc.j, T::one())? {
            let profile = region.radial_profile()?;
            let tau = match profile.cutoff {
                Some(c) => c.tau,
                None => continue,
            };
            let max_q = profile.max_abs_q();
            if max_q > T::zero() {
                best = best.min(tau / max_q);
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(TheoryError::NoSupport)
    }
}

/// Derivative of the limiting distribution by central differences
/// (one-sided at the endpoints).
pub fn density<T: Scalar>(
    cfg: &FordConfig<T>,
    grid: &[T],
    tol: T,
) -> Result<Vec<T>, TheoryError> {
    let f = limiting_f(cfg, grid, tol)?;
    Ok(sampled_derivative(grid, &f))
}

/// Central differences on a sampled function; one-sided at the ends.
pub fn sampled_derivative<T: Scalar>(grid: &[T], values: &[T]) -> Vec<T> {
    let n = grid.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = if k == 0 {
            (k, k + 1)
        } else if k == n - 1 {
            (k - 1, k)
        } else {
            (k - 1, k + 1)
        };
        out.push((values[b] - values[a]) / (grid[b] - grid[a]));
    }
    out
}
