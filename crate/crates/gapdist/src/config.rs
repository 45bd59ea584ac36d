//! Initial configurations in generalized Ford normal form.
//!
//! A configuration holds the base line `ℝ`, the top line `ℝ + i`, and a
//! chain of circles pinched between them with tangencies
//! `0 = α₂ < α₃ < … < α_h = t/2`. The two end circles have radius `1/2`
//! (tangent to both lines) and consecutive circles are tangent, so every gap
//! along the base is a curvilinear triangle. Indexing follows the chain
//! around the point at infinity: index 1 is the top line (tangency `α₁ = ∞`),
//! indices `2..=h` are the chain circles, and index 0 is reserved for the
//! base itself.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::geom::{dual_circle, AntiMobiusMap, GeneralizedCircle, GeomError};
use crate::{real, theory, Scalar};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid circle pair ({0}, {1})")]
    InvalidPair(usize, usize),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// One circle of the chain: tangency position and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePlacement<T> {
    pub alpha: T,
    pub radius: T,
}

/// A generalized Ford configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FordConfig<T> {
    pub name: String,
    pub period_t: T,
    pub circles: Vec<CirclePlacement<T>>,
}

/// The three built-in configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinKind {
    Classical,
    Ap3,
    Ap9,
}

impl FromStr for BuiltinKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classical" => Ok(BuiltinKind::Classical),
            "ap3" => Ok(BuiltinKind::Ap3),
            "ap9" => Ok(BuiltinKind::Ap9),
            other => Err(format!("unknown configuration `{other}`")),
        }
    }
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BuiltinKind::Classical => "classical",
            BuiltinKind::Ap3 => "ap3",
            BuiltinKind::Ap9 => "ap9",
        })
    }
}

/// Violated configuration invariant. Violations are data, not errors: the
/// validator returns all of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Fewer than two chain circles.
    TooFewCircles,
    /// `period_t` not positive, end tangencies not at `0` and `t/2`, or end
    /// radii not `1/2`.
    Period(String),
    /// Tangencies not strictly increasing at chain position `i`.
    Order(usize),
    /// Circle leaves the strip `0 ≤ Im z ≤ 1` (radius out of `(0, 1/2]`).
    Strip(usize),
    /// Consecutive circles `i`, `i+1` not tangent (residual in distance).
    Tangency(usize, usize, f64),
    /// Non-adjacent circles overlap.
    Overlap(usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewCircles => write!(f, "need at least two chain circles"),
            Violation::Period(s) => write!(f, "period violation: {s}"),
            Violation::Order(i) => write!(f, "tangencies out of order at C_{i}"),
            Violation::Strip(i) => write!(f, "C_{i} leaves the unit strip"),
            Violation::Tangency(i, j, r) => {
                write!(f, "C_{i} and C_{j} not tangent (residual {r:e})")
            }
            Violation::Overlap(i, j) => write!(f, "C_{i} and C_{j} overlap"),
        }
    }
}

/// Constants attached to a configuration: the per-circle areas `D_i`, their
/// sum `D`, the tangency density `c = D / (2π²(h−2))`, the group covolume,
/// and the repulsion threshold `δ` below which the limiting gap distribution
/// vanishes.
#[derive(Debug, Clone)]
pub struct PackingConstants<T> {
    pub d_parts: Vec<T>,
    pub d: T,
    pub c: T,
    pub area_gamma: T,
    pub delta: T,
}

/// Tangent or disjoint pair of configuration circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Tangent,
    Disjoint,
}

impl<T: Scalar> FordConfig<T> {
    pub fn builtin(kind: BuiltinKind) -> Self {
        let half = real::<T>(0.5);
        match kind {
            BuiltinKind::Classical => FordConfig {
                name: "classical".into(),
                period_t: real(2.0),
                circles: vec![
                    CirclePlacement {
                        alpha: T::zero(),
                        radius: half,
                    },
                    CirclePlacement {
                        alpha: T::one(),
                        radius: half,
                    },
                ],
            },
            BuiltinKind::Ap3 => {
                let r2 = real::<T>(2.0).sqrt();
                FordConfig {
                    name: "ap3".into(),
                    period_t: r2 + r2,
                    circles: vec![
                        CirclePlacement {
                            alpha: T::zero(),
                            radius: half,
                        },
                        CirclePlacement {
                            alpha: r2 / real(2.0),
                            radius: real(0.25),
                        },
                        CirclePlacement {
                            alpha: r2,
                            radius: half,
                        },
                    ],
                }
            }
            BuiltinKind::Ap9 => {
                let r5 = real::<T>(5.0).sqrt();
                let one = T::one();
                let small = (real::<T>(3.0) - r5) / real(4.0);
                FordConfig {
                    name: "ap9".into(),
                    period_t: one + r5,
                    circles: vec![
                        CirclePlacement {
                            alpha: T::zero(),
                            radius: half,
                        },
                        CirclePlacement {
                            alpha: (r5 - one) / real(2.0),
                            radius: small,
                        },
                        CirclePlacement {
                            alpha: one,
                            radius: small,
                        },
                        CirclePlacement {
                            alpha: (r5 + one) / real(2.0),
                            radius: half,
                        },
                    ],
                }
            }
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, ConfigError>
    where
        T: serde::de::DeserializeOwned,
    {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String, ConfigError>
    where
        T: Serialize,
    {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Number of circles tangent to the base in the initial configuration,
    /// counting the top line.
    pub fn h(&self) -> usize {
        self.circles.len() + 1
    }

    pub fn period(&self) -> T {
        self.period_t
    }

    /// Tangency `α_k`; `None` for `k = 1` (the top line meets the base at
    /// infinity).
    pub fn alpha(&self, k: usize) -> Option<T> {
        if k == 1 {
            None
        } else {
            Some(self.circles[k - 2].alpha)
        }
    }

    /// Radius of circle `k`; `None` for the top line.
    pub fn radius(&self, k: usize) -> Option<T> {
        if k == 1 {
            None
        } else {
            Some(self.circles[k - 2].radius)
        }
    }

    pub fn base(&self) -> GeneralizedCircle<T> {
        GeneralizedCircle::real_axis()
    }

    /// Circle by chain index: `0` is the base line, `1` the top line,
    /// `2..=h` the chain.
    pub fn circle(&self, k: usize) -> GeneralizedCircle<T> {
        match k {
            0 => GeneralizedCircle::real_axis(),
            1 => GeneralizedCircle::horizontal_line(T::one()),
            _ => {
                let p = self.circles[k - 2];
                GeneralizedCircle::circle(Complex::new(p.alpha, p.radius), p.radius)
            }
        }
    }

    /// Checks every structural invariant; empty iff the configuration is a
    /// valid generalized Ford configuration within `tol`.
    pub fn validate(&self, tol: T) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.circles.len() < 2 {
            out.push(Violation::TooFewCircles);
            return out;
        }
        let h = self.h();
        let t = self.period_t;
        let half = real::<T>(0.5);
        if !(t > T::zero()) {
            out.push(Violation::Period("period_t must be positive".into()));
        }
        let first = self.circles[0];
        let last = *self.circles.last().unwrap();
        if first.alpha.abs() > tol || (first.radius - half).abs() > tol {
            out.push(Violation::Period(
                "chain must start with tangency 0 and radius 1/2".into(),
            ));
        }
        if (last.alpha - t / real(2.0)).abs() > tol || (last.radius - half).abs() > tol {
            out.push(Violation::Period(
                "chain must end with tangency t/2 and radius 1/2".into(),
            ));
        }
        for k in 2..=h {
            let r = self.radius(k).unwrap();
            if !(r > T::zero()) || r > half + tol {
                out.push(Violation::Strip(k));
            }
            if k < h && !(self.alpha(k).unwrap() < self.alpha(k + 1).unwrap()) {
                out.push(Violation::Order(k));
            }
        }
        for k in 2..h {
            let res = self.pair_gap(k, k + 1).abs();
            if res > tol {
                out.push(Violation::Tangency(k, k + 1, res.to_f64().unwrap_or(f64::NAN)));
            }
        }
        for i in 2..=h {
            for j in (i + 2)..=h {
                if self.pair_gap(i, j) < -tol {
                    out.push(Violation::Overlap(i, j));
                }
            }
        }
        out
    }

    /// Signed distance excess between circles `i` and `j` (zero iff tangent,
    /// negative iff overlapping).
    fn pair_gap(&self, i: usize, j: usize) -> T {
        let (ai, ri) = (self.alpha(i).unwrap(), self.radius(i).unwrap());
        let (aj, rj) = (self.alpha(j).unwrap(), self.radius(j).unwrap());
        let dx = ai - aj;
        let dy = ri - rj;
        (dx * dx + dy * dy).sqrt() - (ri + rj)
    }

    pub fn ensure_valid(&self, tol: T) -> Result<(), ConfigError> {
        let v = self.validate(tol);
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    /// Whether circles `i` and `j` of the chain (indices in `1..=h`) are
    /// tangent or disjoint.
    pub fn pair_kind(&self, i: usize, j: usize) -> PairKind {
        let tol = real::<T>(1e-9);
        if self.circle(i).is_tangent_to(&self.circle(j), tol) {
            // parallel lines count as tangent (at infinity) but never occur
            // here since i != j and only index 1 is a line
            PairKind::Tangent
        } else {
            PairKind::Disjoint
        }
    }

    /// The per-circle areas `D_k`. `D₁ = α_h`; for chain circles
    /// `D_k = 2·r_k·|(α_{k+1} − α_{k−1}) / ((α_{k+1} − α_k)(α_{k−1} − α_k))|`
    /// with the explicit limit `2·r_k / |α_neighbor − α_k|` when the other
    /// neighbor is the top line.
    pub fn d_parts(&self) -> Vec<T> {
        let h = self.h();
        let two = real::<T>(2.0);
        let mut out = Vec::with_capacity(h);
        out.push(self.alpha(h).unwrap());
        for k in 2..=h {
            let r = self.radius(k).unwrap();
            let a = self.alpha(k).unwrap();
            let prev = if k == 2 { None } else { self.alpha(k - 1) };
            let next = if k == h { None } else { self.alpha(k + 1) };
            let d = match (prev, next) {
                (Some(p), Some(n)) => two * r * ((n - p) / ((n - a) * (p - a))).abs(),
                (None, Some(n)) => two * r / (n - a).abs(),
                (Some(p), None) => two * r / (p - a).abs(),
                (None, None) => unreachable!("h >= 3"),
            };
            out.push(d);
        }
        out
    }

    pub fn d_total(&self) -> T {
        self.d_parts().into_iter().fold(T::zero(), |s, x| s + x)
    }

    /// The tangency density constant `c = D / (2π²(h−2))`.
    pub fn density_constant(&self) -> T {
        let h = real::<T>((self.h() - 2) as f64);
        self.d_total() / (real::<T>(2.0) * T::PI() * T::PI() * h)
    }

    /// Covolume `2π(h−2)` of the orientation-preserving stabilizer of the
    /// base.
    pub fn area_gamma(&self) -> T {
        real::<T>(2.0) * T::PI() * real::<T>((self.h() - 2) as f64)
    }

    /// All constants, including the repulsion threshold.
    pub fn constants(&self) -> Result<PackingConstants<T>, ConfigError> {
        self.ensure_valid(real(crate::DEFAULT_TOL))?;
        let d_parts = self.d_parts();
        let d = self.d_total();
        let c = self.density_constant();
        let delta = theory::support_threshold(self)
            .map_err(|_| ConfigError::InvalidPair(0, 0))?;
        Ok(PackingConstants {
            d_parts,
            d,
            c,
            area_gamma: self.area_gamma(),
            delta,
        })
    }

    /// One reflection per triangular gap along the base. Gap `g` (for `g` in
    /// `1..=h`) is bounded by the base and the circles `g`, `g+1` (cyclic, so
    /// gap `h` is bounded by the last chain circle and the top line); the
    /// reflection is the inversion in the dual circle of that triple.
    pub fn gap_reflections(&self) -> Result<Vec<AntiMobiusMap<T>>, ConfigError> {
        let h = self.h();
        let tol = real::<T>(1e-7);
        let base = self.base();
        (1..=h)
            .map(|g| {
                let next = if g == h { 1 } else { g + 1 };
                let d = dual_circle(&base, &self.circle(g), &self.circle(next), tol)?;
                Ok(AntiMobiusMap::inversion_in(&d))
            })
            .collect()
    }

    /// The reflection in the dual circle of the triangle formed by circles
    /// `i`, `j` and the base; defined for tangent pairs only.
    pub fn pair_reflection(&self, i: usize, j: usize) -> Result<AntiMobiusMap<T>, ConfigError> {
        if i == j || i == 0 || j == 0 || i > self.h() || j > self.h() {
            return Err(ConfigError::InvalidPair(i, j));
        }
        let d = dual_circle(&self.base(), &self.circle(i), &self.circle(j), real(1e-7))
            .map_err(|_| ConfigError::InvalidPair(i, j))?;
        Ok(AntiMobiusMap::inversion_in(&d))
    }
}
