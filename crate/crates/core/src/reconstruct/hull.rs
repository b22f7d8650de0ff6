//! Convex-hull vertices and exposing rays.
//!
//! Both rely on one linear program: maximize the margin `m` subject to
//! `f·(x̂ − x_j) ≥ m` for every other point, with `f` in the unit box. A
//! positive margin separates `x̂` from the hull of the others, so `x̂` is a
//! vertex, and `f` is a separating functional.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::space::{NormP, Point, Space};

/// Margin below which a point counts as inside the hull of the others.
pub const HULL_TOL: f64 = 1e-9;

/// Number of grid points on `(0, RAY_CHECK_EXTENT]` used to verify a ray.
pub const RAY_CHECK_POINTS: usize = 32;
pub const RAY_CHECK_EXTENT: f64 = 2.0;

/// Half-line `origin + t·direction`, `t ≥ 0`, along which `origin` is the
/// strictly nearest of a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposingRay {
    pub origin: Vec<f64>,
    /// Unit vector in the norm of the space.
    pub direction: Vec<f64>,
    /// Separating functional, when the LP fallback produced the ray.
    pub functional: Option<Vec<f64>>,
}

impl ExposingRay {
    pub fn at(&self, t: f64) -> Point {
        Point::Coords(
            self.origin
                .iter()
                .zip(&self.direction)
                .map(|(o, u)| o + t * u)
                .collect(),
        )
    }
}

fn coords<'a>(space: &Space, p: &'a Point) -> Result<&'a [f64]> {
    space.check_point(p)?;
    p.coords().ok_or(Error::NotNormed)
}

/// Largest separation margin of `apex` from `others` over functionals in
/// the unit box. Returns `None` when there are no other points.
pub fn separation_margin(apex: &[f64], others: &[&[f64]]) -> Result<Option<(Vec<f64>, f64)>> {
    if others.is_empty() {
        return Ok(None);
    }
    let dim = apex.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let f: Vec<_> = (0..dim).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    // The margin can be negative when apex is inside the hull; it is bounded
    // by the box on f, so a finite range keeps the LP bounded.
    let bound = 1.0
        + others
            .iter()
            .map(|o| apex.iter().zip(*o).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let margin = lp.add_var(1.0, (-bound, bound));
    for o in others {
        let mut row: Vec<_> = f
            .iter()
            .zip(apex.iter().zip(*o))
            .map(|(&v, (a, b))| (v, a - b))
            .collect();
        row.push((margin, -1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?
        .into_solution()
        .map_err(|_| Error::LinearProgram("solver interrupted".into()))?;
    let fv = f.iter().map(|&v| sol.var_value(v)).collect();
    Ok(Some((fv, sol.var_value(margin))))
}

/// Indices of the points that are not convex combinations of the others.
pub fn hull_vertex_indices(space: &Space, points: &[Point]) -> Result<Vec<usize>> {
    if !space.is_normed() {
        return Err(Error::NotNormed);
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("no points".into()));
    }
    let cs: Vec<&[f64]> = points.iter().map(|p| coords(space, p)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, apex) in cs.iter().enumerate() {
        // A coinciding copy of the apex makes it a non-vertex.
        let others: Vec<&[f64]> = cs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| *c)
            .collect();
        match separation_margin(apex, &others)? {
            None => out.push(i),
            Some((_, m)) if m > HULL_TOL => out.push(i),
            Some(_) => {}
        }
    }
    Ok(out)
}

/// The points that are vertices of the convex hull, in input order.
pub fn hull_vertices(space: &Space, points: &[Point]) -> Result<Vec<Point>> {
    Ok(hull_vertex_indices(space, points)?
        .into_iter()
        .map(|i| points[i].clone())
        .collect())
}

/// Checks `t < ‖x̂ + t·u − k‖` for every `k` on the verification grid.
pub fn verify_ray(space: &Space, ray: &ExposingRay, others: &[Point]) -> bool {
    let Some(p) = space.norm_p() else {
        return false;
    };
    if (p.norm(&ray.direction) - 1.0).abs() > 1e-12 {
        return false;
    }
    (1..=RAY_CHECK_POINTS).all(|k| {
        let t = RAY_CHECK_EXTENT * k as f64 / RAY_CHECK_POINTS as f64;
        let probe = ray.at(t);
        others
            .iter()
            .all(|o| space.dist_unchecked(&probe, o) > t * (1.0 + 1e-12))
    })
}

/// Unit vector `u` maximizing `f(u)` over the unit ball of the ℓp norm.
fn dual_direction(f: &[f64], p: NormP) -> Vec<f64> {
    let raw: Vec<f64> = match p {
        NormP::Inf => f
            .iter()
            .map(|v| if v.abs() > HULL_TOL { v.signum() } else { 0.0 })
            .collect(),
        NormP::Finite(p) if p == 1.0 => {
            let imax = (0..f.len())
                .max_by(|&a, &b| f[a].abs().total_cmp(&f[b].abs()))
                .unwrap_or(0);
            (0..f.len())
                .map(|i| if i == imax { f[i].signum() } else { 0.0 })
                .collect()
        }
        NormP::Finite(p) => {
            let q = p / (p - 1.0);
            f.iter().map(|v| v.signum() * v.abs().powf(q - 1.0)).collect()
        }
    };
    let n = p.norm(&raw);
    raw.iter().map(|v| v / n).collect()
}

/// Finds a verified exposing ray for `apex` against `others`.
///
/// Fails unless `apex` is a hull vertex. First tries the direction away
/// from the centroid of `others`; if that fails verification, uses the
/// norm-dual direction of a maximum-margin separating functional. Only
/// verified rays are returned.
pub fn exposing_direction(space: &Space, apex: &Point, others: &[Point]) -> Result<ExposingRay> {
    let p = space.norm_p().ok_or(Error::NotNormed)?;
    let a = coords(space, apex)?.to_vec();
    let oc: Vec<&[f64]> = others.iter().map(|o| coords(space, o)).collect::<Result<_>>()?;
    if oc.is_empty() {
        let mut u = vec![0.0; a.len()];
        u[0] = 1.0;
        return Ok(ExposingRay {
            origin: a,
            direction: u,
            functional: None,
        });
    }

    let (f, margin) = separation_margin(&a, &oc)?.expect("others nonempty");
    if margin <= HULL_TOL {
        return Err(Error::ExposingRayFailure);
    }

    let dim = a.len();
    let mut centroid = vec![0.0; dim];
    for o in &oc {
        for (c, v) in centroid.iter_mut().zip(*o) {
            *c += v / oc.len() as f64;
        }
    }
    let away: Vec<f64> = a.iter().zip(&centroid).map(|(x, c)| x - c).collect();
    let len = p.norm(&away);
    if len > HULL_TOL {
        let ray = ExposingRay {
            origin: a.clone(),
            direction: away.iter().map(|v| v / len).collect(),
            functional: None,
        };
        if verify_ray(space, &ray, others) {
            return Ok(ray);
        }
    }

    let ray = ExposingRay {
        origin: a,
        direction: dual_direction(&f, p),
        functional: Some(f),
    };
    if verify_ray(space, &ray, others) {
        Ok(ray)
    } else {
        Err(Error::ExposingRayFailure)
    }
}
