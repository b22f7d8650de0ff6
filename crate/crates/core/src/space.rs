//! Base spaces: finite-dimensional ℓp spaces and finite metric spaces given
//! by an explicit distance matrix.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance for the triangle inequality check on distance matrices.
pub const TRIANGLE_TOL: f64 = 1e-12;

/// Exponent of an ℓp norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormP {
    Finite(f64),
    Inf,
}

impl NormP {
    pub fn is_euclidean(self) -> bool {
        self == NormP::Finite(2.0)
    }

    /// ℓp norm of a coordinate vector.
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormP::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            NormP::Finite(p) if p == 1.0 => v.iter().map(|x| x.abs()).sum(),
            NormP::Finite(p) if p == 2.0 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormP::Finite(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

impl fmt::Display for NormP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormP::Finite(p) => write!(f, "{p}"),
            NormP::Inf => write!(f, "inf"),
        }
    }
}

/// A base metric space.
#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    /// ℝ^dim with the ℓp norm.
    Normed { dim: usize, p: NormP },
    /// `{0, …, n-1}` with an explicit distance matrix.
    Finite { dist: Vec<Vec<f64>> },
}

/// A point of a [`Space`]: coordinates for normed spaces, an index for
/// finite metric spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Coords(Vec<f64>),
    Index(usize),
}

impl Point {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Index(_) => None,
        }
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Coords(v)
    }
}

impl From<usize> for Point {
    fn from(i: usize) -> Self {
        Point::Index(i)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "x{i}"),
            Point::Coords(c) => {
                write!(f, "(")?;
                for (k, x) in c.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Space {
    pub fn normed(dim: usize, p: NormP) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidNorm("dimension must be at least 1".into()));
        }
        if let NormP::Finite(p) = p {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidNorm(format!("exponent {p} must be >= 1")));
            }
        }
        Ok(Space::Normed { dim, p })
    }

    pub fn euclidean(dim: usize) -> Self {
        Space::Normed {
            dim,
            p: NormP::Finite(2.0),
        }
    }

    /// Validates a distance matrix and builds a finite metric space.
    pub fn finite(dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::Malformed("distance matrix is empty".into()));
        }
        for (row, r) in dist.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NonSquareMatrix {
                    rows: n,
                    row,
                    len: r.len(),
                });
            }
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(Error::NonzeroDiagonal {
                    i,
                    value: dist[i][i],
                });
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = dist[i][j];
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidOffDiagonal { i, j, value: v });
                }
                if dist[i][j] != dist[j][i] {
                    return Err(Error::AsymmetricMatrix {
                        i,
                        j,
                        a: dist[i][j],
                        b: dist[j][i],
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let detour = dist[i][j] + dist[j][k];
                    if dist[i][k] > detour + TRIANGLE_TOL {
                        return Err(Error::TriangleViolation {
                            i,
                            j,
                            k,
                            direct: dist[i][k],
                            detour,
                        });
                    }
                }
            }
        }
        Ok(Space::Finite { dist })
    }

    pub fn is_normed(&self) -> bool {
        matches!(self, Space::Normed { .. })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Space::Normed { dim, .. } => Some(*dim),
            Space::Finite { .. } => None,
        }
    }

    pub fn norm_p(&self) -> Option<NormP> {
        match self {
            Space::Normed { p, .. } => Some(*p),
            Space::Finite { .. } => None,
        }
    }

    /// Number of points of a finite metric space.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            Space::Finite { dist } => Some(dist.len()),
            Space::Normed { .. } => None,
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        match (self, x) {
            (Space::Normed { dim, .. }, Point::Coords(c)) => {
                if c.len() != *dim {
                    return Err(Error::PointMismatch(format!(
                        "expected {dim} coordinates, got {}",
                        c.len()
                    )));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::PointMismatch("non-finite coordinate".into()));
                }
                Ok(())
            }
            (Space::Finite { dist }, Point::Index(i)) => {
                if *i >= dist.len() {
                    return Err(Error::PointMismatch(format!(
                        "index {i} out of range for {} points",
                        dist.len()
                    )));
                }
                Ok(())
            }
            (Space::Normed { .. }, Point::Index(_)) => Err(Error::PointMismatch(
                "index given for a normed space".into(),
            )),
            (Space::Finite { .. }, Point::Coords(_)) => Err(Error::PointMismatch(
                "coordinates given for a finite metric space".into(),
            )),
        }
    }

    /// Distance between two points, validating both.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.dist_unchecked(a, b))
    }

    /// Distance between two points already known to belong to the space.
    pub(crate) fn dist_unchecked(&self, a: &Point, b: &Point) -> f64 {
        match (self, a, b) {
            (Space::Normed { p, .. }, Point::Coords(x), Point::Coords(y)) => {
                let diff: Vec<f64> = x.iter().zip(y).map(|(u, v)| u - v).collect();
                p.norm(&diff)
            }
            (Space::Finite { dist }, Point::Index(i), Point::Index(j)) => dist[*i][*j],
            _ => unreachable!("point kind checked at construction"),
        }
    }

    /// The same space with every distance multiplied by `factor`.
    ///
    /// Normed spaces have no scale parameter, so callers scale coordinates
    /// instead; this is only defined for finite metric spaces.
    pub fn scaled_matrix(&self, factor: f64) -> Result<Space> {
        match self {
            Space::Finite { dist } => Ok(Space::Finite {
                dist: dist
                    .iter()
                    .map(|r| r.iter().map(|v| v * factor).collect())
                    .collect(),
            }),
            Space::Normed { .. } => Err(Error::InvalidParameter(
                "matrix scaling needs a finite metric space".into(),
            )),
        }
    }
}

/// Parses the space JSON description.
pub fn parse_space(description: &str) -> Result<Space> {
    let raw: SpaceJson =
        serde_json::from_str(description).map_err(|e| Error::Malformed(e.to_string()))?;
    raw.into_space()
}

// JSON representation -------------------------------------------------------

/// A real number in JSON: a number, `"inf"`, or a fraction string `"a/b"`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Real(v)),
            Repr::Text(s) => parse_real(&s).map(Real).map_err(de::Error::custom),
        }
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| format!("bad fraction {s:?}"))?;
        let d: f64 = den.trim().parse().map_err(|_| format!("bad fraction {s:?}"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(n / d);
    }
    t.parse().map_err(|_| format!("bad number {s:?}"))
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub(crate) enum SpaceJson {
    Normed { dim: usize, p: Real },
    Finite { dist: Vec<Vec<Real>> },
}

impl SpaceJson {
    pub(crate) fn into_space(self) -> Result<Space> {
        match self {
            SpaceJson::Normed { dim, p } => {
                let p = if p.0.is_infinite() && p.0 > 0.0 {
                    NormP::Inf
                } else {
                    NormP::Finite(p.0)
                };
                Space::normed(dim, p)
            }
            SpaceJson::Finite { dist } => {
                Space::finite(dist.into_iter().map(|r| r.into_iter().map(|v| v.0).collect()).collect())
            }
        }
    }
}

impl Serialize for Space {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(3))?;
        match self {
            Space::Normed { dim, p } => {
                m.serialize_entry("type", "normed")?;
                m.serialize_entry("dim", dim)?;
                match p {
                    NormP::Finite(v) => m.serialize_entry("p", v)?,
                    NormP::Inf => m.serialize_entry("p", "inf")?,
                }
            }
            Space::Finite { dist } => {
                m.serialize_entry("type", "finite")?;
                m.serialize_entry("dist", dist)?;
            }
        }
        m.end()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Coords(c) => c.serialize(s),
            Point::Index(i) => i.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Index(usize),
            Coords(Vec<f64>),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Index(i) => Point::Index(i),
            Repr::Coords(c) => Point::Coords(c),
        })
    }
}
