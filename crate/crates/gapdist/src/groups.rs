//! Matrix-group support for the packings: published generators of the
//! base-fixing groups, Hecke triangle groups, conjugation and word
//! identities, Iwasawa and Bruhat-type coordinates, and a desk-scale
//! lattice-point census against the equidistribution prediction.

use std::collections::HashSet;
use thiserror::Error;

use crate::config::{BuiltinKind, FordConfig};
use crate::{real, Interval, Scalar};

#[derive(Debug, Error)]
pub enum GroupsError {
    #[error("q must be at least 3")]
    InvalidQ,
    #[error("identity checks failed: {0}")]
    IdentityFailed(String),
    #[error("matrix is upper triangular; Bruhat coordinates undefined")]
    UpperTriangular,
    #[error("census ball not saturated at word length {0}; increase max_word_len")]
    BallNotSaturated(u32),
    #[error("census ball exceeds the cap of {0} elements")]
    BallTooLarge(u64),
}

/// Row-major 2×2 real matrix `[a, b, c, d]` with determinant 1, considered
/// projectively (`γ ≡ −γ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T>(pub [T; 4]);

impl<T: Scalar> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2([a, b, c, d])
    }

    pub fn identity() -> Self {
        Mat2([T::one(), T::zero(), T::zero(), T::one()])
    }

    pub fn det(&self) -> T {
        let [a, b, c, d] = self.0;
        a * d - b * c
    }

    pub fn mul(&self, o: &Self) -> Self {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Mat2([
            a * e + b * g,
            a * f + b * h,
            c * e + d * g,
            c * f + d * h,
        ])
    }

    /// Inverse of a determinant-1 matrix.
    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([d, -b, -c, a])
    }

    pub fn neg(&self) -> Self {
        Mat2(self.0.map(|x| -x))
    }

    /// Integer power (negative exponents use the inverse).
    pub fn powi(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut out = Mat2::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// Sign normalization for projective comparison: first entry that is not
    /// numerically zero made positive.
    pub fn sign_normalized(&self) -> Self {
        let first = self
            .0
            .iter()
            .cloned()
            .find(|x| x.abs() > real(1e-9))
            .unwrap_or(T::one());
        if first < T::zero() {
            self.neg()
        } else {
            *self
        }
    }

    /// Sup-norm distance up to the projective sign.
    pub fn projective_distance(&self, o: &Self) -> T {
        let diff = |s: &Mat2<T>, o: &Mat2<T>, sign: T| {
            s.0.iter()
                .zip(&o.0)
                .fold(T::zero(), |m, (x, y)| m.max((*x - sign * *y).abs()))
        };
        diff(self, o, T::one()).min(diff(self, o, -T::one()))
    }
}

/// Group element: projective determinant-1 matrix plus an optional word in
/// the generators (1-based index, negative for inverses).
#[derive(Debug, Clone)]
pub struct GroupElement<T> {
    pub matrix: Mat2<T>,
    pub word: Option<Vec<i32>>,
}

/// Published generator matrices of the orientation-preserving base-fixing
/// group for each built-in configuration.
pub fn gamma_generators<T: Scalar>(kind: BuiltinKind) -> Vec<GroupElement<T>> {
    let mats: Vec<Mat2<T>> = match kind {
        BuiltinKind::Classical => {
            let two = real::<T>(2.0);
            vec![
                Mat2::new(T::one(), two, T::zero(), T::one()),
                Mat2::new(T::one(), T::zero(), two, T::one()),
            ]
        }
        BuiltinKind::Ap3 => {
            let s = real::<T>(2.0).sqrt() * real::<T>(2.0);
            let three = real::<T>(3.0);
            vec![
                Mat2::new(T::one(), s, T::zero(), T::one()),
                Mat2::new(T::one(), T::zero(), s, T::one()),
                Mat2::new(three, -s, -s, three),
            ]
        }
        BuiltinKind::Ap9 => {
            let r5 = real::<T>(5.0).sqrt();
            let p1 = T::one() + r5;
            let p2 = real::<T>(2.0) + r5;
            let p3 = real::<T>(3.0) + r5;
            vec![
                Mat2::new(T::one(), p1, T::zero(), T::one()),
                Mat2::new(T::one(), T::zero(), p1, T::one()),
                Mat2::new(p2, p3, p1, p2),
                Mat2::new(p2, p1, p3, p2),
            ]
        }
    };
    mats.into_iter()
        .enumerate()
        .map(|(k, matrix)| GroupElement {
            matrix,
            word: Some(vec![k as i32 + 1]),
        })
        .collect()
}

/// The two generators of the Hecke triangle group: the inversion
/// `z ↦ −1/z` and the translation by `λ_q = 2·cos(π/q)`.
pub fn hecke_generators<T: Scalar>(q: u32) -> Result<(Mat2<T>, Mat2<T>), GroupsError> {
    if q < 3 {
        return Err(GroupsError::InvalidQ);
    }
    let lambda = real::<T>(2.0) * (T::PI() / real(q as f64)).cos();
    Ok((
        Mat2::new(T::zero(), -T::one(), T::one(), T::zero()),
        Mat2::new(T::one(), lambda, T::zero(), T::one()),
    ))
}

#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct NormalityReport {
    pub kind: BuiltinKind,
    pub checks: Vec<IdentityCheck>,
}

impl NormalityReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failed_names(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| c.name.clone())
            .collect()
    }
}

const IDENTITY_TOL: f64 = 1e-12;

/// Verifies that conjugating each group generator by each Hecke generator
/// lands back in the group, by checking the published word identities, plus
/// the membership words of the non-translation generators and the Hecke
/// relation `(S·T_q)^q = ±1`.
pub fn normality_report<T: Scalar>(kind: BuiltinKind) -> NormalityReport {
    let q = match kind {
        BuiltinKind::Classical => 3,
        BuiltinKind::Ap3 => 4,
        BuiltinKind::Ap9 => 5,
    };
    let (s, t) = hecke_generators::<T>(q).expect("q >= 3");
    let g: Vec<Mat2<T>> = gamma_generators(kind).into_iter().map(|e| e.matrix).collect();
    let conj = |h: &Mat2<T>, x: &Mat2<T>| h.mul(x).mul(&h.inverse());

    let mut checks: Vec<(String, Mat2<T>, Mat2<T>)> = Vec::new();
    match kind {
        BuiltinKind::Classical => {
            checks.push(("S g1 S^-1 = g2^-1".into(), conj(&s, &g[0]), g[1].inverse()));
            checks.push(("S g2 S^-1 = g1^-1".into(), conj(&s, &g[1]), g[0].inverse()));
            checks.push(("T3 g1 T3^-1 = g1".into(), conj(&t, &g[0]), g[0]));
            checks.push((
                "T3 g2 T3^-1 = g1 g2^-1".into(),
                conj(&t, &g[1]),
                g[0].mul(&g[1].inverse()),
            ));
        }
        BuiltinKind::Ap3 => {
            checks.push(("S g1 S^-1 = g2^-1".into(), conj(&s, &g[0]), g[1].inverse()));
            checks.push(("S g2 S^-1 = g1^-1".into(), conj(&s, &g[1]), g[0].inverse()));
            checks.push(("S g3 S^-1 = g3^-1".into(), conj(&s, &g[2]), g[2].inverse()));
            checks.push(("T4 g1 T4^-1 = g1".into(), conj(&t, &g[0]), g[0]));
            checks.push((
                "T4 g2 T4^-1 = g1 g3".into(),
                conj(&t, &g[1]),
                g[0].mul(&g[2]),
            ));
            checks.push((
                "T4 g3 T4^-1 = g2 g1^-1".into(),
                conj(&t, &g[2]),
                g[1].mul(&g[0].inverse()),
            ));
            checks.push((
                "g3 = T4^-1 S T4^-2 S T4^-1".into(),
                g[2],
                t.powi(-1).mul(&s).mul(&t.powi(-2)).mul(&s).mul(&t.powi(-1)),
            ));
        }
        BuiltinKind::Ap9 => {
            checks.push(("S g1 S^-1 = g2^-1".into(), conj(&s, &g[0]), g[1].inverse()));
            checks.push(("S g2 S^-1 = g1^-1".into(), conj(&s, &g[1]), g[0].inverse()));
            checks.push(("S g3 S^-1 = g4^-1".into(), conj(&s, &g[2]), g[3].inverse()));
            checks.push(("S g4 S^-1 = g3^-1".into(), conj(&s, &g[3]), g[2].inverse()));
            checks.push(("T5 g1 T5^-1 = g1".into(), conj(&t, &g[0]), g[0]));
            checks.push((
                "T5 g2 T5^-1 = g1 g3^-1".into(),
                conj(&t, &g[1]),
                g[0].mul(&g[2].inverse()),
            ));
            checks.push((
                "T5 g3 T5^-1 = g1 g2^-1".into(),
                conj(&t, &g[2]),
                g[0].mul(&g[1].inverse()),
            ));
            checks.push((
                "T5 g4 T5^-1 = g1 g4^-1".into(),
                conj(&t, &g[3]),
                g[0].mul(&g[3].inverse()),
            ));
            checks.push(("g1 = T5^2".into(), g[0], t.powi(2)));
            checks.push((
                "g2 = S T5^-2 S^-1".into(),
                g[1],
                s.mul(&t.powi(-2)).mul(&s.inverse()),
            ));
            checks.push((
                "g3 = T5 S T5^2 S T5".into(),
                g[2],
                t.mul(&s).mul(&t.powi(2)).mul(&s).mul(&t),
            ));
            checks.push((
                "g4 = S T5^-1 S T5^-2 S T5^-1 S^-1".into(),
                g[3],
                s.mul(&t.powi(-1))
                    .mul(&s)
                    .mul(&t.powi(-2))
                    .mul(&s)
                    .mul(&t.powi(-1))
                    .mul(&s.inverse()),
            ));
        }
    }
    // Hecke relation
    let st = s.mul(&t);
    checks.push((
        format!("(S T{q})^{q} = ±1"),
        st.powi(q as i32),
        Mat2::identity(),
    ));

    let checks = checks
        .into_iter()
        .map(|(name, lhs, rhs)| {
            let residual = lhs.projective_distance(&rhs).to_f64().unwrap_or(f64::NAN);
            IdentityCheck {
                name,
                ok: residual <= IDENTITY_TOL,
                residual,
            }
        })
        .collect();
    NormalityReport { kind, checks }
}

/// As [`normality_report`], but an error if any identity fails.
pub fn normality_check<T: Scalar>(kind: BuiltinKind) -> Result<NormalityReport, GroupsError> {
    let report = normality_report::<T>(kind);
    if report.all_ok() {
        Ok(report)
    } else {
        Err(GroupsError::IdentityFailed(
            report.failed_names().join(", "),
        ))
    }
}

/// Coordinates of the `N⁺ A K` factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwasawaCoords<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

/// `(y^{1/2}, θ)` are polar coordinates of the bottom row `(d, c)`.
pub fn iwasawa_decompose<T: Scalar>(g: &Mat2<T>) -> IwasawaCoords<T> {
    let [a, b, c, d] = g.0;
    let y = c * c + d * d;
    let mut theta = c.atan2(d);
    if theta < T::zero() {
        theta += T::PI();
    }
    if theta >= T::PI() {
        theta -= T::PI();
    }
    IwasawaCoords {
        x: (a * c + b * d) / y,
        y,
        theta,
    }
}

pub fn iwasawa_recompose<T: Scalar>(co: &IwasawaCoords<T>) -> Mat2<T> {
    let ys = co.y.sqrt();
    let (sin_t, cos_t) = (co.theta.sin(), co.theta.cos());
    Mat2::new(
        cos_t / ys + co.x * ys * sin_t,
        -sin_t / ys + co.x * ys * cos_t,
        ys * sin_t,
        ys * cos_t,
    )
}

/// Coordinates of the Bruhat-type factorization
/// `±N⁺(θ₁)·(0, −ν^{−1/2}; ν^{1/2}, 0)·N⁺(θ₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodCoords<T> {
    pub theta1: T,
    pub theta2: T,
    pub nu: T,
}

pub fn good_decompose<T: Scalar>(g: &Mat2<T>) -> Result<GoodCoords<T>, GroupsError> {
    let [a, _, c, d] = g.0;
    if c.abs() <= real(1e-12) {
        return Err(GroupsError::UpperTriangular);
    }
    Ok(GoodCoords {
        theta1: a / c,
        theta2: d / c,
        nu: c * c,
    })
}

pub fn good_recompose<T: Scalar>(co: &GoodCoords<T>) -> Mat2<T> {
    let ns = co.nu.sqrt();
    Mat2::new(
        co.theta1 * ns,
        co.theta1 * co.theta2 * ns - ns.recip(),
        ns,
        co.theta2 * ns,
    )
}

#[derive(Debug, Clone)]
pub struct CensusResult<T> {
    pub count: u64,
    pub predicted: T,
    pub ratio: T,
    /// Distinct group elements visited up to `max_word_len + 2`.
    pub ball_size: u64,
    pub max_word_len: u32,
}

const CENSUS_BALL_CAP: u64 = 20_000_000;

/// Counts group elements with `x(γ) ∈ I`, `y(γ) < T`, `θ(γ) ∈ J` on a
/// breadth-first ball in the published generators, against the prediction
/// `l(I)·l(J)·T / (π·area)`. Elements are deduplicated by rounded matrix
/// entries under projective sign normalization. The count must agree between
/// word lengths `max_word_len` and `max_word_len + 2`, otherwise the ball is
/// declared unsaturated.
pub fn good_census<T: Scalar>(
    kind: BuiltinKind,
    t_max: T,
    x_interval: Interval<T>,
    theta_interval: Interval<T>,
    max_word_len: u32,
) -> Result<CensusResult<T>, GroupsError> {
    let gens: Vec<Mat2<T>> = gamma_generators(kind).into_iter().map(|e| e.matrix).collect();
    let mut letters = Vec::with_capacity(gens.len() * 2);
    for g in &gens {
        letters.push(*g);
        letters.push(g.inverse());
    }
    let hits = |m: &Mat2<T>| -> bool {
        let co = iwasawa_decompose(m);
        co.y < t_max && x_interval.contains(co.x) && theta_interval.contains(co.theta)
    };
    let key = |m: &Mat2<T>| -> [i128; 4] {
        let n = m.sign_normalized();
        n.0.map(|x| {
            let v = (x * real::<T>(1e12)).to_f64().unwrap_or(f64::NAN);
            if v.is_finite() && v.abs() < 1.6e38 {
                v.round() as i128
            } else {
                i128::MAX
            }
        })
    };

    let mut seen: HashSet<[i128; 4]> = HashSet::new();
    seen.insert(key(&Mat2::identity()));
    let mut count_inner: u64 = u64::from(hits(&Mat2::identity()));
    let mut count_outer = count_inner;
    // frontier carries the index of the last letter so words stay reduced
    let mut frontier: Vec<(Mat2<T>, usize)> = vec![(Mat2::identity(), usize::MAX)];
    let mut ball: u64 = 1;
    for depth in 1..=(max_word_len + 2) {
        let mut next = Vec::new();
        for (m, last) in &frontier {
            for (idx, letter) in letters.iter().enumerate() {
                if *last != usize::MAX && idx == *last ^ 1 {
                    continue;
                }
                let prod = m.mul(letter);
                if !seen.insert(key(&prod)) {
                    continue;
                }
                ball += 1;
                if ball > CENSUS_BALL_CAP {
                    return Err(GroupsError::BallTooLarge(CENSUS_BALL_CAP));
                }
                if hits(&prod) {
                    count_outer += 1;
                    if depth <= max_word_len {
                        count_inner += 1;
                    }
                }
                next.push((prod, idx));
            }
        }
        frontier = next;
    }
    if count_inner != count_outer {
        return Err(GroupsError::BallNotSaturated(max_word_len));
    }
    let h = FordConfig::<T>::builtin(kind).h();
    let area = real::<T>(2.0) * T::PI() * real::<T>((h - 2) as f64);
    let predicted = x_interval.len() * theta_interval.len() / T::PI() * t_max / area;
    Ok(CensusResult {
        count: count_inner,
        predicted,
        ratio: real::<T>(count_inner as f64) / predicted,
        ball_size: ball,
        max_word_len,
    })
}
