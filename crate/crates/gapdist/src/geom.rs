//! Inversive geometry of generalized circles and the maps acting on them.
//!
//! A generalized circle is the locus of `A·|z|² + 2·Re(conj(B)·z) + C = 0`
//! with `A, C` real and `B` complex, normalized so `|B|² − A·C = 1`. With
//! `A > 0` this is the circle of center `−B/A` and radius `1/A`; with
//! `A = 0` it is a line with unit normal `B`. Lines and circles share one
//! type, so Möbius images of either can be computed uniformly as a matrix
//! congruence of the Hermitian form. Points at infinity are kept projective
//! (a homogeneous pair), never as floating sentinels.

use num_complex::Complex;
use thiserror::Error;

use crate::{real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("circles are not mutually tangent (worst residual {residual:e})")]
    NotMutuallyTangent { residual: f64 },
    #[error("circle is not tangent to the base")]
    NotTangent,
    #[error("point does not lie on the circle")]
    PointOffCircle,
    #[error("points do not determine a circle")]
    DegeneratePoints,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("coefficients do not define a real circle")]
    NotACircle,
}

/// Threshold on the normalized `A` coefficient below which a generalized
/// circle is treated as a line.
const LINE_EPS: f64 = 1e-12;

/// Point of the Riemann sphere in homogeneous coordinates `num/den`.
#[derive(Debug, Clone, Copy)]
pub struct ProjPoint<T: Scalar> {
    num: Complex<T>,
    den: Complex<T>,
}

impl<T: Scalar> ProjPoint<T> {
    pub fn new(num: Complex<T>, den: Complex<T>) -> Self {
        // rescale only at extreme magnitudes, so ordinary values stay exact
        let m = num.norm().max(den.norm());
        if m > real(1e100) || (m < real(1e-100) && m > T::zero()) {
            ProjPoint {
                num: num / m,
                den: den / m,
            }
        } else {
            ProjPoint { num, den }
        }
    }

    pub fn finite(z: Complex<T>) -> Self {
        ProjPoint::new(z, Complex::new(T::one(), T::zero()))
    }

    pub fn from_real(x: T) -> Self {
        ProjPoint::finite(Complex::new(x, T::zero()))
    }

    pub fn infinity() -> Self {
        ProjPoint {
            num: Complex::new(T::one(), T::zero()),
            den: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.den.norm() <= real::<T>(1e-13) * self.num.norm()
    }

    /// Affine value; `None` for the point at infinity.
    pub fn to_complex(&self) -> Option<Complex<T>> {
        if self.is_infinity() {
            None
        } else {
            Some(self.num / self.den)
        }
    }
}

/// Circle or line in Hermitian-form coordinates.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizedCircle<T: Scalar> {
    a: T,
    b: Complex<T>,
    c: T,
}

impl<T: Scalar> GeneralizedCircle<T> {
    /// Builds from raw coefficients, rescaling to `|B|² − A·C = 1` and fixing
    /// the sign conventions (`A ≥ 0`; for lines, normal in the closed upper
    /// half plane with `Re B > 0` on the real axis boundary case).
    pub fn from_coefficients(a: T, b: Complex<T>, c: T) -> Result<Self, GeomError> {
        let q = b.norm_sqr() - a * c;
        if !(q > T::zero()) || !q.is_finite() {
            return Err(GeomError::NotACircle);
        }
        let s = q.sqrt().recip();
        let mut a = a * s;
        let mut b = b * s;
        let mut c = c * s;
        let flip = if a.abs() <= real(LINE_EPS) {
            a = T::zero();
            // canonical sign for lines
            b.im < T::zero() || (b.im == T::zero() && b.re < T::zero())
        } else {
            a < T::zero()
        };
        if flip {
            a = -a;
            b = -b;
            c = -c;
        }
        Ok(GeneralizedCircle { a, b, c })
    }

    /// Proper circle from center and radius.
    pub fn circle(center: Complex<T>, radius: T) -> Self {
        let r = radius;
        GeneralizedCircle {
            a: r.recip(),
            b: -center / r,
            c: (center.norm_sqr() - r * r) / r,
        }
    }

    /// The real axis.
    pub fn real_axis() -> Self {
        GeneralizedCircle {
            a: T::zero(),
            b: Complex::new(T::zero(), T::one()),
            c: T::zero(),
        }
    }

    /// The horizontal line `Im z = y`.
    pub fn horizontal_line(y: T) -> Self {
        GeneralizedCircle {
            a: T::zero(),
            b: Complex::new(T::zero(), T::one()),
            c: -(y + y),
        }
    }

    /// Circle through three distinct points of the Riemann sphere.
    pub fn from_points(
        p1: &ProjPoint<T>,
        p2: &ProjPoint<T>,
        p3: &ProjPoint<T>,
    ) -> Result<Self, GeomError> {
        // Each point imposes one homogeneous linear condition on (A, Re B, Im B, C):
        //   A·|num|² + 2·Re(B̄·w) + C·|den|² = 0,  w = num·conj(den).
        let row = |p: &ProjPoint<T>| -> [T; 4] {
            let w = p.num * p.den.conj();
            let two = real::<T>(2.0);
            [p.num.norm_sqr(), two * w.re, two * w.im, p.den.norm_sqr()]
        };
        let r = [row(p1), row(p2), row(p3)];
        // Null vector components are the signed 3x3 minors.
        let det3 = |c0: usize, c1: usize, c2: usize| -> T {
            r[0][c0] * (r[1][c1] * r[2][c2] - r[1][c2] * r[2][c1])
                - r[0][c1] * (r[1][c0] * r[2][c2] - r[1][c2] * r[2][c0])
                + r[0][c2] * (r[1][c0] * r[2][c1] - r[1][c1] * r[2][c0])
        };
        let n = [det3(1, 2, 3), -det3(0, 2, 3), det3(0, 1, 3), -det3(0, 1, 2)];
        let scale = n.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if scale == T::zero() || !scale.is_finite() {
            return Err(GeomError::DegeneratePoints);
        }
        GeneralizedCircle::from_coefficients(
            n[0] / scale,
            Complex::new(n[1] / scale, n[2] / scale),
            n[3] / scale,
        )
        .map_err(|_| GeomError::DegeneratePoints)
    }

    pub fn coefficients(&self) -> (T, Complex<T>, T) {
        (self.a, self.b, self.c)
    }

    pub fn is_line(&self) -> bool {
        self.a == T::zero()
    }

    /// Curvature; zero for a line.
    pub fn curvature(&self) -> T {
        self.a
    }

    pub fn radius(&self) -> Option<T> {
        if self.is_line() {
            None
        } else {
            Some(self.a.recip())
        }
    }

    pub fn center(&self) -> Option<Complex<T>> {
        if self.is_line() {
            None
        } else {
            Some(-self.b / self.a)
        }
    }

    /// For a line: unit normal and signed offset so the locus is
    /// `2·Re(conj(normal)·z) + offset = 0`.
    pub fn line_normal_offset(&self) -> Option<(Complex<T>, T)> {
        if self.is_line() {
            Some((self.b, self.c))
        } else {
            None
        }
    }

    /// Value of the defining form at `z`; vanishes on the locus and grows
    /// like twice the distance near it.
    pub fn eval(&self, z: Complex<T>) -> T {
        self.a * z.norm_sqr() + real::<T>(2.0) * (self.b.conj() * z).re + self.c
    }

    pub fn contains_point(&self, z: Complex<T>, tol: T) -> bool {
        self.eval(z).abs() <= tol * (T::one() + z.norm_sqr())
    }

    /// Polarization of the normalizing form `|B|² − A·C`. Equals `∓1` for
    /// externally/internally tangent circles and `0` for orthogonal ones.
    pub fn inversive_product(&self, other: &Self) -> T {
        (self.b.conj() * other.b).re
            - (self.a * other.c + self.c * other.a) / real::<T>(2.0)
    }

    pub fn tangency_residual(&self, other: &Self) -> T {
        (self.inversive_product(other).abs() - T::one()).abs()
    }

    pub fn is_tangent_to(&self, other: &Self, tol: T) -> bool {
        self.tangency_residual(other) <= tol
    }

    /// Point of tangency of two tangent generalized circles.
    ///
    /// The pencil `K₁ − s·K₂` with `s = ±1` the sign of the inversive product
    /// degenerates to a point circle exactly at the tangency.
    pub fn tangency_point(&self, other: &Self, tol: T) -> Result<ProjPoint<T>, GeomError> {
        if !self.is_tangent_to(other, tol) {
            return Err(GeomError::NotTangent);
        }
        let s = if self.inversive_product(other) >= T::zero() {
            T::one()
        } else {
            -T::one()
        };
        let da = self.a - s * other.a;
        let db = self.b - other.b * s;
        let dc = self.c - s * other.c;
        let scale = da.abs().max(db.norm()).max(dc.abs());
        if scale <= real(1e-13) {
            // identical circles: no single point of tangency
            return Err(GeomError::NotTangent);
        }
        if da.abs() <= real::<T>(1e-11) * scale {
            Ok(ProjPoint::infinity())
        } else {
            Ok(ProjPoint::finite(-db / da))
        }
    }

    /// Approximate equality after canonical normalization.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.b - other.b).norm() <= tol
            && (self.c - other.c).abs() <= tol
    }
}

/// Orientation-preserving fractional-linear map, determinant normalized to 1.
#[derive(Debug, Clone, Copy)]
pub struct MobiusMap<T: Scalar> {
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
}

impl<T: Scalar> MobiusMap<T> {
    pub fn new(
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        d: Complex<T>,
    ) -> Result<Self, GeomError> {
        let det = a * d - b * c;
        if det.norm() <= real(1e-300) || !det.norm().is_finite() {
            return Err(GeomError::SingularMatrix);
        }
        let s = det.sqrt();
        Ok(MobiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn from_real(a: T, b: T, c: T, d: T) -> Result<Self, GeomError> {
        let z = |x| Complex::new(x, T::zero());
        MobiusMap::new(z(a), z(b), z(c), z(d))
    }

    pub fn identity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        MobiusMap {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    pub fn translation(t: T) -> Self {
        MobiusMap {
            a: Complex::new(T::one(), T::zero()),
            b: Complex::new(t, T::zero()),
            c: Complex::new(T::zero(), T::zero()),
            d: Complex::new(T::one(), T::zero()),
        }
    }

    pub fn entries(&self) -> [Complex<T>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn inverse(&self) -> Self {
        MobiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Self {
        MobiusMap::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
        .expect("product of invertible maps")
    }

    pub fn apply_point(&self, p: &ProjPoint<T>) -> ProjPoint<T> {
        ProjPoint::new(
            self.a * p.num + self.b * p.den,
            self.c * p.num + self.d * p.den,
        )
    }

    pub fn apply_complex(&self, z: Complex<T>) -> ProjPoint<T> {
        self.apply_point(&ProjPoint::finite(z))
    }

    /// Image circle via the Hermitian congruence `H ↦ (M⁻¹)* H M⁻¹`.
    pub fn apply_circle(&self, k: &GeneralizedCircle<T>) -> GeneralizedCircle<T> {
        let n = self.inverse();
        apply_congruence(k.a, k.b, k.c, [n.a, n.b, n.c, n.d])
    }

    /// `|M'(x)|` at a real point.
    pub fn derivative_norm(&self, x: T) -> T {
        let den = self.c * Complex::new(x, T::zero()) + self.d;
        den.norm_sqr().recip()
    }

    /// The unique map sending `p1 ↦ ∞`, `p2 ↦ 0`, `p3 ↦ i`.
    pub fn to_normal_form(
        p1: &ProjPoint<T>,
        p2: &ProjPoint<T>,
        p3: &ProjPoint<T>,
    ) -> Result<Self, GeomError> {
        // i · (z − p2)(p3 − p1) / ((z − p1)(p3 − p2)) in homogeneous form.
        let i = Complex::new(T::zero(), T::one());
        let k1 = p3.num * p1.den - p1.num * p3.den;
        let k2 = p3.num * p2.den - p2.num * p3.den;
        MobiusMap::new(
            i * k1 * p2.den,
            -(i * k1 * p2.num),
            k2 * p1.den,
            -(k2 * p1.num),
        )
    }
}

/// Shared congruence kernel: transforms the Hermitian form [[A,B],[B̄,C]] by
/// the matrix `n` and renormalizes.
fn apply_congruence<T: Scalar>(
    a: T,
    b: Complex<T>,
    c: T,
    n: [Complex<T>; 4],
) -> GeneralizedCircle<T> {
    let [na, nb, nc, nd] = n;
    let az = Complex::new(a, T::zero());
    let cz = Complex::new(c, T::zero());
    // H·N
    let h00 = az * na + b * nc;
    let h01 = az * nb + b * nd;
    let h10 = b.conj() * na + cz * nc;
    let h11 = b.conj() * nb + cz * nd;
    // N*·(H·N)
    let a2 = (na.conj() * h00 + nc.conj() * h10).re;
    let b2 = na.conj() * h01 + nc.conj() * h11;
    let c2 = (nb.conj() * h01 + nd.conj() * h11).re;
    GeneralizedCircle::from_coefficients(a2, b2, c2)
        .expect("congruence of a circle by an invertible map is a circle")
}

/// Orientation-reversing map `z ↦ M(conj z)`, determinant normalized to −1.
#[derive(Debug, Clone, Copy)]
pub struct AntiMobiusMap<T: Scalar> {
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
}

impl<T: Scalar> AntiMobiusMap<T> {
    pub fn new(
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        d: Complex<T>,
    ) -> Result<Self, GeomError> {
        let det = a * d - b * c;
        if det.norm() <= real(1e-300) || !det.norm().is_finite() {
            return Err(GeomError::SingularMatrix);
        }
        let s = (-det).sqrt();
        Ok(AntiMobiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    /// Inversion in a generalized circle. In normalized Hermitian
    /// coordinates this is `z ↦ (−B·conj(z) − C)/(A·conj(z) + conj(B))`,
    /// with determinant `−(|B|² − AC) = −1` already in place.
    pub fn inversion_in(k: &GeneralizedCircle<T>) -> Self {
        AntiMobiusMap {
            a: -k.b,
            b: Complex::new(-k.c, T::zero()),
            c: Complex::new(k.a, T::zero()),
            d: k.b.conj(),
        }
    }

    pub fn entries(&self) -> [Complex<T>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn apply_point(&self, p: &ProjPoint<T>) -> ProjPoint<T> {
        let num = p.num.conj();
        let den = p.den.conj();
        ProjPoint::new(self.a * num + self.b * den, self.c * num + self.d * den)
    }

    pub fn apply_complex(&self, z: Complex<T>) -> ProjPoint<T> {
        self.apply_point(&ProjPoint::finite(z))
    }

    /// Image circle: conjugation sends `B ↦ conj B`, then the congruence.
    pub fn apply_circle(&self, k: &GeneralizedCircle<T>) -> GeneralizedCircle<T> {
        // adjugate works projectively as the inverse
        let n = [self.d, -self.b, -self.c, self.a];
        apply_congruence(k.a, k.b.conj(), k.c, n)
    }

    /// `self ∘ self` as a Möbius map; the identity for an involution.
    pub fn squared(&self) -> MobiusMap<T> {
        let m = Motion::Anti(*self).compose(&Motion::Anti(*self));
        match m {
            Motion::Mobius(m) => m,
            Motion::Anti(_) => unreachable!("two reflections compose to a Möbius map"),
        }
    }
}

/// A Möbius or anti-Möbius map; composition tracks parity.
#[derive(Debug, Clone, Copy)]
pub enum Motion<T: Scalar> {
    Mobius(MobiusMap<T>),
    Anti(AntiMobiusMap<T>),
}

impl<T: Scalar> Motion<T> {
    pub fn identity() -> Self {
        Motion::Mobius(MobiusMap::identity())
    }

    pub fn is_orientation_reversing(&self) -> bool {
        matches!(self, Motion::Anti(_))
    }

    /// `self ∘ rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Self {
        let conj4 = |m: [Complex<T>; 4]| m.map(|z| z.conj());
        let mul = |x: [Complex<T>; 4], y: [Complex<T>; 4]| {
            [
                x[0] * y[0] + x[1] * y[2],
                x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2],
                x[2] * y[1] + x[3] * y[3],
            ]
        };
        match (self, rhs) {
            (Motion::Mobius(p), Motion::Mobius(q)) => {
                Motion::Mobius(p.compose(q))
            }
            (Motion::Mobius(p), Motion::Anti(q)) => {
                let m = mul(p.entries(), q.entries());
                Motion::Anti(AntiMobiusMap::new(m[0], m[1], m[2], m[3]).expect("invertible"))
            }
            (Motion::Anti(p), Motion::Mobius(q)) => {
                let m = mul(p.entries(), conj4(q.entries()));
                Motion::Anti(AntiMobiusMap::new(m[0], m[1], m[2], m[3]).expect("invertible"))
            }
            (Motion::Anti(p), Motion::Anti(q)) => {
                let m = mul(p.entries(), conj4(q.entries()));
                Motion::Mobius(MobiusMap::new(m[0], m[1], m[2], m[3]).expect("invertible"))
            }
        }
    }

    pub fn apply_point(&self, p: &ProjPoint<T>) -> ProjPoint<T> {
        match self {
            Motion::Mobius(m) => m.apply_point(p),
            Motion::Anti(m) => m.apply_point(p),
        }
    }

    pub fn apply_circle(&self, k: &GeneralizedCircle<T>) -> GeneralizedCircle<T> {
        match self {
            Motion::Mobius(m) => m.apply_circle(k),
            Motion::Anti(m) => m.apply_circle(k),
        }
    }
}

/// Circle through the three pairwise tangency points of a mutually tangent
/// triple; inversion in it reflects the packing into the triangular gap.
pub fn dual_circle<T: Scalar>(
    k1: &GeneralizedCircle<T>,
    k2: &GeneralizedCircle<T>,
    k3: &GeneralizedCircle<T>,
    tol: T,
) -> Result<GeneralizedCircle<T>, GeomError> {
    let worst = k1
        .tangency_residual(k2)
        .max(k1.tangency_residual(k3))
        .max(k2.tangency_residual(k3));
    if worst > tol {
        return Err(GeomError::NotMutuallyTangent {
            residual: worst.to_f64().unwrap_or(f64::NAN),
        });
    }
    let p12 = k1.tangency_point(k2, tol).map_err(not_mutually(worst))?;
    let p13 = k1.tangency_point(k3, tol).map_err(not_mutually(worst))?;
    let p23 = k2.tangency_point(k3, tol).map_err(not_mutually(worst))?;
    GeneralizedCircle::from_points(&p12, &p13, &p23)
}

fn not_mutually<T: Scalar>(worst: T) -> impl Fn(GeomError) -> GeomError {
    move |_| GeomError::NotMutuallyTangent {
        residual: worst.to_f64().unwrap_or(f64::NAN),
    }
}

/// Location and curvature of a circle tangent to the base.
///
/// The location is the real coordinate when the base is a line, and the
/// arc-length parameter (relative to the rightmost point, counterclockwise)
/// when the base is a circle. A tangency at infinity is rejected.
pub fn tangency_on_base<T: Scalar>(
    k: &GeneralizedCircle<T>,
    base: &GeneralizedCircle<T>,
    tol: T,
) -> Result<(T, T), GeomError> {
    let p = k.tangency_point(base, tol)?;
    let z = p.to_complex().ok_or(GeomError::NotTangent)?;
    let alpha = base_parameter(base, z)?;
    Ok((alpha, k.curvature()))
}

/// Parameter of a point on the base: coordinate along a line, arc length
/// along a circle.
pub fn base_parameter<T: Scalar>(
    base: &GeneralizedCircle<T>,
    z: Complex<T>,
) -> Result<T, GeomError> {
    if let Some((normal, offset)) = base.line_normal_offset() {
        let foot = -normal * (offset / real::<T>(2.0));
        let dir = -Complex::new(T::zero(), T::one()) * normal;
        Ok((dir.conj() * (z - foot)).re)
    } else {
        let center = base.center().expect("circle");
        let r = base.radius().expect("circle");
        let w = z - center;
        Ok(w.im.atan2(w.re) * r)
    }
}

/// Point of the base at the given parameter (inverse of [`base_parameter`]).
pub fn base_point<T: Scalar>(base: &GeneralizedCircle<T>, param: T) -> Complex<T> {
    if let Some((normal, offset)) = base.line_normal_offset() {
        let foot = -normal * (offset / real::<T>(2.0));
        let dir = -Complex::new(T::zero(), T::one()) * normal;
        foot + dir * param
    } else {
        let center = base.center().expect("circle");
        let r = base.radius().expect("circle");
        let ang = param / r;
        center + Complex::new(ang.cos(), ang.sin()) * r
    }
}

/// The Möbius map taking a mutually tangent triple `(K₁, K₂, K₃)` to the
/// normal form `(ℝ, ℝ + i, C(i/2, 1/2))`: the tangency `K₁∩K₂` goes to `∞`,
/// `K₁∩K₃` to `0` and `K₂∩K₃` to `i`.
pub fn ford_normalize<T: Scalar>(
    k1: &GeneralizedCircle<T>,
    k2: &GeneralizedCircle<T>,
    k3: &GeneralizedCircle<T>,
    tol: T,
) -> Result<MobiusMap<T>, GeomError> {
    let worst = k1
        .tangency_residual(k2)
        .max(k1.tangency_residual(k3))
        .max(k2.tangency_residual(k3));
    if worst > tol {
        return Err(GeomError::NotMutuallyTangent {
            residual: worst.to_f64().unwrap_or(f64::NAN),
        });
    }
    let a1 = k1.tangency_point(k2, tol).map_err(not_mutually(worst))?;
    let a2 = k1.tangency_point(k3, tol).map_err(not_mutually(worst))?;
    let beta = k2.tangency_point(k3, tol).map_err(not_mutually(worst))?;
    MobiusMap::to_normal_form(&a1, &a2, &beta)
}

/// Arc-length distance between two points of the base (straight distance for
/// a line, shorter-arc length for a circle).
pub fn arc_distance<T: Scalar>(
    base: &GeneralizedCircle<T>,
    p: Complex<T>,
    q: Complex<T>,
    tol: T,
) -> Result<T, GeomError> {
    if !base.contains_point(p, tol) || !base.contains_point(q, tol) {
        return Err(GeomError::PointOffCircle);
    }
    if base.is_line() {
        Ok((p - q).norm())
    } else {
        let r = base.radius().expect("circle");
        let sp = base_parameter(base, p)? / r;
        let sq = base_parameter(base, q)? / r;
        let mut d = (sp - sq).abs();
        let two_pi = T::PI() + T::PI();
        if d > T::PI() {
            d = two_pi - d;
        }
        Ok(d * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::assert_close;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn strip_circle(x: f64, r: f64) -> GeneralizedCircle<f64> {
        GeneralizedCircle::circle(c(x, r), r)
    }

    #[test]
    fn apply_point_examples() {
        let id = MobiusMap::identity();
        assert_eq!(id.apply_complex(c(3.0, 4.0)).to_complex(), Some(c(3.0, 4.0)));

        let s = MobiusMap::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        let fixed = s.apply_complex(c(0.0, 1.0)).to_complex().unwrap();
        assert!((fixed - c(0.0, 1.0)).norm() < 1e-15);

        let t = MobiusMap::from_real(1.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(t.apply_complex(c(0.0, 0.0)).to_complex(), Some(c(2.0, 0.0)));

        // infinity handled projectively
        let img = s.apply_point(&ProjPoint::infinity()).to_complex().unwrap();
        assert!((img - c(0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_circle_examples() {
        let k = strip_circle(0.0, 0.5);
        let s = MobiusMap::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        let img = s.apply_circle(&k);
        assert!(img.approx_eq(&GeneralizedCircle::horizontal_line(1.0), 1e-12));

        let m = MobiusMap::from_real(1.0, 0.0, 2.0, 1.0).unwrap();
        let img = m.apply_circle(&k);
        assert!(img.approx_eq(&k, 1e-12));
        let z = m.apply_complex(c(0.0, 1.0)).to_complex().unwrap();
        assert!((z - c(0.4, 0.2)).norm() < 1e-15);
        assert!(k.contains_point(z, 1e-12));

        let id = MobiusMap::identity();
        assert!(id.apply_circle(&k).approx_eq(&k, 1e-15));
    }

    #[test]
    fn reflect_circle_examples() {
        // reflection in the line Re z = 0
        let mirror = AntiMobiusMap::inversion_in(
            &GeneralizedCircle::from_coefficients(0.0, c(1.0, 0.0), 0.0).unwrap(),
        );
        let img = mirror.apply_circle(&strip_circle(1.0, 0.5));
        assert!(img.approx_eq(&strip_circle(-1.0, 0.5), 1e-12));

        let r2 = 2f64.sqrt();
        let img = mirror.apply_circle(&strip_circle(r2 / 2.0, 0.25));
        assert!(img.approx_eq(&strip_circle(-r2 / 2.0, 0.25), 1e-12));

        // involution
        let inv = AntiMobiusMap::inversion_in(&strip_circle(0.5, 0.5));
        let k = strip_circle(0.3, 0.07);
        let back = inv.apply_circle(&inv.apply_circle(&k));
        assert!(back.approx_eq(&k, 1e-12));
        let sq = inv.squared().entries();
        assert!((sq[0] - sq[3]).norm() < 1e-12);
        assert!(sq[1].norm() < 1e-12 && sq[2].norm() < 1e-12);
    }

    #[test]
    fn dual_circle_examples() {
        let base = GeneralizedCircle::real_axis();
        let top = GeneralizedCircle::horizontal_line(1.0);
        let k2 = strip_circle(0.0, 0.5);
        let k3 = strip_circle(1.0, 0.5);

        let d = dual_circle(&base, &top, &k2, 1e-9).unwrap();
        // the line Re z = 0
        assert!(d.approx_eq(
            &GeneralizedCircle::from_coefficients(0.0, c(1.0, 0.0), 0.0).unwrap(),
            1e-12
        ));

        let d = dual_circle(&base, &k2, &k3, 1e-9).unwrap();
        assert!(d.approx_eq(&GeneralizedCircle::circle(c(0.5, 0.0), 0.5), 1e-12));

        let far = GeneralizedCircle::horizontal_line(2.0);
        let err = dual_circle(&base, &far, &k2, 1e-9);
        assert!(matches!(err, Err(GeomError::NotMutuallyTangent { .. })));
    }

    #[test]
    fn dual_circle_orthogonal_and_through_tangencies() {
        let base = GeneralizedCircle::real_axis();
        let k2 = strip_circle(0.3, 0.22);
        // make k3 tangent to k2 and the base: tangency position from radii
        let r3 = 0.11;
        let x3 = 0.3 + 2.0 * (0.22f64 * r3).sqrt();
        let k3 = strip_circle(x3, r3);
        let d = dual_circle(&base, &k2, &k3, 1e-9).unwrap();
        for (p, q) in [(&base, &k2), (&base, &k3), (&k2, &k3)] {
            let t = p.tangency_point(q, 1e-9).unwrap().to_complex().unwrap();
            assert!(d.contains_point(t, 1e-9));
        }
        // orthogonality: inversive product vanishes
        for k in [&base, &k2, &k3] {
            assert!(d.inversive_product(k).abs() < 1e-9);
        }
    }

    #[test]
    fn tangency_on_base_examples() {
        let base = GeneralizedCircle::real_axis();
        let (alpha, kappa) = tangency_on_base(&strip_circle(0.0, 0.5), &base, 1e-9).unwrap();
        assert_close(alpha, 0.0, 1e-15, "alpha");
        assert_close(kappa, 2.0, 1e-15, "kappa");

        let (alpha, kappa) = tangency_on_base(&strip_circle(1.0, 0.125), &base, 1e-9).unwrap();
        assert_close(alpha, 1.0, 1e-15, "alpha");
        assert_close(kappa, 8.0, 1e-12, "kappa");

        let top = GeneralizedCircle::horizontal_line(1.0);
        assert!(matches!(
            tangency_on_base(&top, &base, 1e-9),
            Err(GeomError::NotTangent)
        ));
    }

    #[test]
    fn ford_normalize_examples() {
        // already normalized: identity up to sign, so points are fixed
        let base = GeneralizedCircle::real_axis();
        let top = GeneralizedCircle::horizontal_line(1.0);
        let k2 = strip_circle(0.0, 0.5);
        let m = ford_normalize(&base, &top, &k2, 1e-9).unwrap();
        for z in [c(0.7, 0.0), c(0.0, 1.0), c(2.0, 3.0)] {
            let w = m.apply_complex(z).to_complex().unwrap();
            assert!((w - z).norm() < 1e-12, "{z} moved to {w}");
        }

        // unit circle + two half-circles: -1 -> inf, 1 -> 0, 0 -> i
        let k1 = GeneralizedCircle::circle(c(0.0, 0.0), 1.0);
        let k2 = GeneralizedCircle::circle(c(-0.5, 0.0), 0.5);
        let k3 = GeneralizedCircle::circle(c(0.5, 0.0), 0.5);
        let m = ford_normalize(&k1, &k2, &k3, 1e-9).unwrap();
        assert!(m.apply_complex(c(-1.0, 0.0)).is_infinity());
        let w0 = m.apply_complex(c(1.0, 0.0)).to_complex().unwrap();
        assert!(w0.norm() < 1e-12);
        let wi = m.apply_complex(c(0.0, 0.0)).to_complex().unwrap();
        assert!((wi - c(0.0, 1.0)).norm() < 1e-12);
        // image circles land on the normal form
        assert!(m
            .apply_circle(&k1)
            .approx_eq(&GeneralizedCircle::real_axis(), 1e-12));
        assert!(m
            .apply_circle(&k2)
            .approx_eq(&GeneralizedCircle::horizontal_line(1.0), 1e-12));
        assert!(m.apply_circle(&k3).approx_eq(&strip_circle(0.0, 0.5), 1e-12));

        // disjoint circles are rejected
        let far = GeneralizedCircle::circle(c(5.0, 0.0), 0.5);
        assert!(matches!(
            ford_normalize(&k1, &k2, &far, 1e-9),
            Err(GeomError::NotMutuallyTangent { .. })
        ));
    }

    #[test]
    fn arc_distance_examples() {
        let base = GeneralizedCircle::real_axis();
        assert_close(
            arc_distance(&base, c(0.0, 0.0), c(1.5, 0.0), 1e-9).unwrap(),
            1.5,
            1e-15,
            "line distance",
        );

        let unit = GeneralizedCircle::circle(c(0.0, 0.0), 1.0);
        assert_close(
            arc_distance(&unit, c(1.0, 0.0), c(-1.0, 0.0), 1e-9).unwrap(),
            std::f64::consts::PI,
            1e-12,
            "half circumference",
        );
        assert_close(
            arc_distance(&unit, c(1.0, 0.0), c(1.0, 0.0), 1e-9).unwrap(),
            0.0,
            1e-15,
            "same point",
        );
        assert!(matches!(
            arc_distance(&unit, c(2.0, 0.0), c(1.0, 0.0), 1e-9),
            Err(GeomError::PointOffCircle)
        ));
    }

    fn random_det1(rng: &mut ChaCha8Rng) -> MobiusMap<f64> {
        loop {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            let c0: f64 = rng.gen_range(-2.0..2.0);
            let d: f64 = rng.gen_range(-2.0..2.0);
            if (a * d - b * c0).abs() > 0.1 {
                return MobiusMap::from_real(a, b, c0, d).unwrap();
            }
        }
    }

    #[test]
    fn mobius_roundtrip_on_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let m = random_det1(&mut rng);
            let k = GeneralizedCircle::circle(
                c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
                rng.gen_range(0.05..2.0),
            );
            let back = m.inverse().apply_circle(&m.apply_circle(&k));
            let (a, b, c2) = k.coefficients();
            let scale = 1.0 + a.abs().max(b.norm()).max(c2.abs());
            assert!(back.approx_eq(&k, 1e-9 * scale), "roundtrip failed for {k:?}");
        }
    }

    /// Image curvature of a strip circle under a real map, against a
    /// three-point-fit oracle: map three points of K and fit a circle.
    #[test]
    fn curvature_formula_against_three_point_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut max_rel = 0.0f64;
        for _ in 0..1000 {
            let m = random_det1(&mut rng);
            let [_, _, cc, d] = m.entries().map(|z| z.re);
            let x = rng.gen_range(-3.0..3.0);
            let y = rng.gen_range(0.05..2.0);
            if (cc * x + d).abs() < 0.05 {
                continue;
            }
            let k = strip_circle(x, y);
            // formula route
            let kappa_formula = (cc * x + d).powi(2) / y;
            // production route (Hermitian congruence)
            let kappa_lib = m.apply_circle(&k).curvature();
            // oracle: fit through the images of three points of K
            let pts = [c(x, 0.0), c(x, 2.0 * y), c(x + y, y)];
            let imgs = pts.map(|z| m.apply_complex(z));
            let fit = GeneralizedCircle::from_points(&imgs[0], &imgs[1], &imgs[2]).unwrap();
            let kappa_fit = fit.curvature();
            max_rel = max_rel
                .max((kappa_lib - kappa_fit).abs() / kappa_fit)
                .max((kappa_formula - kappa_fit).abs() / kappa_fit);
            // check b inside: a/c formula for the image of the top line
            let top_img = m.apply_circle(&GeneralizedCircle::horizontal_line(1.0));
            let kappa_top = 2.0 * cc * cc;
            if kappa_top > 1e-6 {
                assert_close(top_img.curvature(), kappa_top, 1e-9 * kappa_top, "2c^2 law");
            }
        }
        assert!(max_rel <= 1e-9, "max relative error {max_rel:e}");
    }

    #[test]
    fn tangency_is_mobius_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let m = random_det1(&mut rng);
            let base = GeneralizedCircle::real_axis();
            let x = rng.gen_range(-2.0..2.0);
            let k = strip_circle(x, rng.gen_range(0.05..1.0));
            let (alpha, _) = tangency_on_base(&k, &base, 1e-9).unwrap();
            let kb = m.apply_circle(&base);
            let kk = m.apply_circle(&k);
            let img = m.apply_complex(c(alpha, 0.0));
            if img.is_infinity() {
                continue;
            }
            match tangency_on_base(&kk, &kb, 1e-7) {
                Ok((beta, _)) => {
                    let expect = base_parameter(&kb, img.to_complex().unwrap()).unwrap();
                    assert_close(beta, expect, 1e-9 * (1.0 + expect.abs()), "covariance");
                }
                Err(_) => panic!("tangency lost under Möbius map"),
            }
        }
    }

    #[test]
    fn parallel_lines_touch_only_at_infinity() {
        let base = GeneralizedCircle::real_axis();
        let top = GeneralizedCircle::horizontal_line(1.0);
        let p = base.tangency_point(&top, 1e-9).unwrap();
        assert!(p.is_infinity());
    }
}
