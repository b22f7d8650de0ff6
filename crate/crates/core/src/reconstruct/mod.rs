//! Reconstruction of a hidden finitely supported measure from distance
//! queries, by peeling atoms off the vertices of the convex hull of its
//! support.
//!
//! Each stage picks a hull vertex `x_i` of the not-yet-peeled support, finds
//! a ray exposing it, and reads its relative weight off the plateau of the
//! residual witness along that ray. The residual witness of the undetected
//! part is computed from the full hidden measure with the `η_r` construction
//! in [`peel`], so every stage only ever asks the oracle for `π(ν, ϑ)`.

pub mod hull;
pub mod oracle;
pub mod peel;
pub mod profile;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{make_measure, Atom, DiscreteMeasure, DEFAULT_SUPPORT_CAP};
use crate::space::{Point, Space};

pub use hull::{exposing_direction, hull_vertex_indices, hull_vertices, verify_ray, ExposingRay};
pub use oracle::{DistanceOracle, HiddenMeasureOracle};
pub use peel::{build_eta, is_pr, pr_chain, residual_witness, PeelState, ResidualWitness, Ring};
pub use profile::{
    locate_plateau, plateau_weight, witness_profile, KnownWitness, OracleWitness, Plateau,
    ProfileGrid, ResidualOracleWitness, WitnessProfile, WitnessSource,
};

/// Allowed deviation of the final residual check and of the total weight.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    pub support_cap: usize,
    pub tolerance: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            support_cap: DEFAULT_SUPPORT_CAP,
            tolerance: RECONSTRUCTION_TOL,
        }
    }
}

/// One plateau extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelStage {
    pub point: Point,
    /// Undetected mass before this stage; the scale of the witness used.
    pub residual_before: f64,
    pub lambda_hat: f64,
    pub weight: f64,
    pub ray: ExposingRay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub measure: DiscreteMeasure,
    pub stages: Vec<PeelStage>,
    pub oracle_calls: u64,
}

/// Per-atom comparison with the true measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomError {
    pub point: Point,
    pub recovered: f64,
    pub truth: f64,
    pub error: f64,
}

impl Reconstruction {
    pub fn errors_against(&self, truth: &DiscreteMeasure) -> Vec<AtomError> {
        self.measure
            .atoms()
            .iter()
            .map(|a| {
                let t = truth.mass_at(&a.point);
                AtomError {
                    point: a.point.clone(),
                    recovered: a.weight,
                    truth: t,
                    error: (a.weight - t).abs(),
                }
            })
            .collect()
    }

    pub fn max_error_against(&self, truth: &DiscreteMeasure) -> f64 {
        self.errors_against(truth)
            .iter()
            .map(|e| e.error)
            .fold(0.0, f64::max)
    }
}

fn centroid(points: &[&Point]) -> Vec<f64> {
    let dim = points[0].coords().map_or(0, <[f64]>::len);
    let mut c = vec![0.0; dim];
    for p in points {
        for (ci, v) in c.iter_mut().zip(p.coords().unwrap_or(&[])) {
            *ci += v / points.len() as f64;
        }
    }
    c
}

/// Picks the next vertex to peel: candidates by decreasing distance from the
/// centroid of the remaining points, first one with a verified exposing ray.
fn next_vertex(space: &Space, remaining: &[Point]) -> Result<(usize, ExposingRay)> {
    let refs: Vec<&Point> = remaining.iter().collect();
    let c = Point::Coords(centroid(&refs));
    let mut order: Vec<(usize, f64)> = remaining
        .iter()
        .enumerate()
        .map(|(i, p)| (i, space.dist_unchecked(p, &c)))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut last_err = Error::ExposingRayFailure;
    for (i, _) in order {
        let others: Vec<Point> = remaining
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        match exposing_direction(space, &remaining[i], &others) {
            Ok(ray) => return Ok((i, ray)),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Recovers the weights of the hidden measure on a known support.
pub fn peel_reconstruct<O: DistanceOracle>(oracle: &O, support: &[Point]) -> Result<Reconstruction> {
    peel_reconstruct_with(oracle, support, &ReconstructOptions::default())
}

pub fn peel_reconstruct_with<O: DistanceOracle>(
    oracle: &O,
    support: &[Point],
    opts: &ReconstructOptions,
) -> Result<Reconstruction> {
    let space = oracle.space().clone();
    if !space.is_normed() {
        return Err(Error::NotNormed);
    }
    if support.is_empty() {
        return Err(Error::InvalidParameter("empty support".into()));
    }
    if support.len() > opts.support_cap {
        return Err(Error::SupportCapExceeded {
            size: support.len(),
            cap: opts.support_cap,
        });
    }
    for p in support {
        space.check_point(p)?;
    }
    let calls_before = oracle.calls();

    let mut remaining: Vec<Point> = support.to_vec();
    let mut detected: Vec<Atom> = Vec::new();
    let mut stages = Vec::new();
    let mut residual = 1.0;

    while remaining.len() > 1 {
        let (idx, ray) = next_vertex(&space, &remaining)?;
        let source = ResidualOracleWitness {
            oracle,
            detected: &detected,
            residual,
        };
        let lambda_hat = plateau_weight(&source, &ray)?;
        let weight = residual * lambda_hat;
        if !(weight > opts.tolerance) {
            return Err(Error::Reconstruction(format!(
                "no mass detected at {} (λ̂ = {lambda_hat})",
                remaining[idx]
            )));
        }
        let point = remaining.remove(idx);
        stages.push(PeelStage {
            point: point.clone(),
            residual_before: residual,
            lambda_hat,
            weight,
            ray,
        });
        detected.push(Atom::new(point, weight));
        residual -= weight;
    }

    // The last point carries the remaining mass. With a single atom left the
    // residual witness must vanish there.
    let last = remaining.pop().expect("support nonempty");
    if residual < opts.tolerance {
        return Err(Error::Reconstruction(format!(
            "no mass left for the last atom {last} (residual {residual})"
        )));
    }
    let check = ResidualOracleWitness {
        oracle,
        detected: &detected,
        residual,
    }
    .witness_at(&last)?;
    if check > opts.tolerance {
        return Err(Error::Reconstruction(format!(
            "residual witness at the last atom is {check}, expected 0"
        )));
    }
    detected.push(Atom::new(last, residual));

    let total: f64 = detected.iter().map(|a| a.weight).sum();
    if (total - 1.0).abs() > opts.tolerance {
        return Err(Error::Reconstruction(format!("weights sum to {total}")));
    }
    let measure = make_measure(space, detected, false)?;
    Ok(Reconstruction {
        measure,
        stages,
        oracle_calls: oracle.calls() - calls_before,
    })
}

/// Experimental support search: local minima of the witness on a regular
/// grid over the box `[lo, hi]^dim` (dimensions 1 and 2). Adjacent minima
/// are merged into their centroid, snapped back to the nearest grid node:
/// the witness is flat on a ball around each atom, and rounding at the rim
/// makes the flat set slightly lopsided. No accuracy guarantee.
pub fn search_support<O: DistanceOracle>(oracle: &O, lo: f64, hi: f64, per_axis: usize) -> Result<Vec<Point>> {
    let space = oracle.space();
    let dim = space.dim().ok_or(Error::NotNormed)?;
    if !(1..=2).contains(&dim) || per_axis < 2 || !(hi > lo) {
        return Err(Error::InvalidParameter(
            "support search needs dim 1 or 2, at least 2 points per axis and lo < hi".into(),
        ));
    }
    let step = (hi - lo) / (per_axis - 1) as f64;
    let ny = if dim == 2 { per_axis } else { 1 };
    let coord = |i: usize, j: usize| -> Vec<f64> {
        if dim == 1 {
            vec![lo + i as f64 * step]
        } else {
            vec![lo + i as f64 * step, lo + j as f64 * step]
        }
    };
    let src = OracleWitness { oracle };
    let mut w = vec![vec![0.0; ny]; per_axis];
    for (i, row) in w.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = src.witness_at(&Point::Coords(coord(i, j)))?;
        }
    }
    let neighbors = |i: usize, j: usize| {
        let mut out = Vec::new();
        for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let (a, b) = (i as i64 + di, j as i64 + dj);
            if a >= 0 && b >= 0 && (a as usize) < per_axis && (b as usize) < ny {
                out.push((a as usize, b as usize));
            }
        }
        out
    };
    let mut is_min = vec![vec![false; ny]; per_axis];
    for i in 0..per_axis {
        for j in 0..ny {
            is_min[i][j] = w[i][j] < 1.0 && neighbors(i, j).iter().all(|&(a, b)| w[i][j] <= w[a][b]);
        }
    }
    let mut seen = vec![vec![false; ny]; per_axis];
    let mut found = Vec::new();
    for i in 0..per_axis {
        for j in 0..ny {
            if !is_min[i][j] || seen[i][j] {
                continue;
            }
            let mut stack = vec![(i, j)];
            seen[i][j] = true;
            let mut members = Vec::new();
            while let Some((a, b)) = stack.pop() {
                members.push(coord(a, b));
                for (c, d) in neighbors(a, b) {
                    if is_min[c][d] && !seen[c][d] && (w[c][d] - w[a][b]).abs() <= 1e-12 {
                        seen[c][d] = true;
                        stack.push((c, d));
                    }
                }
            }
            let mut c = vec![0.0; dim];
            for m in &members {
                for (ci, v) in c.iter_mut().zip(m) {
                    *ci += v / members.len() as f64;
                }
            }
            for ci in &mut c {
                *ci = lo + ((*ci - lo) / step).round() * step;
            }
            found.push(Point::Coords(c));
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(atoms: &[(&[f64], f64)]) -> DiscreteMeasure {
        let dim = atoms[0].0.len();
        DiscreteMeasure::new(
            Space::euclidean(dim),
            atoms.iter().map(|(p, w)| Atom::new(p.to_vec(), *w)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn three_atoms_in_plane() {
        let hidden = measure(&[(&[0.0, 0.0], 0.2), (&[1.0, 0.0], 0.3), (&[0.0, 1.0], 0.5)]);
        let oracle = HiddenMeasureOracle::new(hidden.clone());
        let support: Vec<Point> = hidden.points().cloned().collect();
        let rec = peel_reconstruct(&oracle, &support).unwrap();
        assert!(rec.max_error_against(&hidden) <= 1e-6, "{:?}", rec.errors_against(&hidden));
        assert_eq!(rec.stages.len(), 2);
        assert!(rec.oracle_calls > 0);
    }

    #[test]
    fn dirac_is_exact() {
        let hidden = measure(&[(&[0.3, -0.2], 1.0)]);
        let oracle = HiddenMeasureOracle::new(hidden.clone());
        let rec = peel_reconstruct(&oracle, &[Point::Coords(vec![0.3, -0.2])]).unwrap();
        assert_eq!(rec.measure, hidden);
        assert!(rec.stages.is_empty());
    }

    #[test]
    fn two_atoms() {
        let hidden = measure(&[(&[0.0], 0.35), (&[0.4], 0.65)]);
        let oracle = HiddenMeasureOracle::new(hidden.clone());
        let support: Vec<Point> = hidden.points().cloned().collect();
        let rec = peel_reconstruct(&oracle, &support).unwrap();
        assert!(rec.max_error_against(&hidden) <= 1e-6);
    }

    #[test]
    fn wrong_support_is_reported() {
        let hidden = measure(&[(&[0.0, 0.0], 0.5), (&[1.0, 0.0], 0.5)]);
        let oracle = HiddenMeasureOracle::new(hidden);
        let support = vec![Point::Coords(vec![0.0, 0.0]), Point::Coords(vec![0.0, 3.0])];
        assert!(peel_reconstruct(&oracle, &support).is_err());
    }

    #[test]
    fn finite_spaces_are_rejected() {
        let s = Space::finite(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let oracle = HiddenMeasureOracle::new(DiscreteMeasure::dirac(s, 0usize).unwrap());
        assert_eq!(
            peel_reconstruct(&oracle, &[Point::Index(0)]).unwrap_err(),
            Error::NotNormed
        );
    }

    #[test]
    fn support_search_finds_separated_atoms() {
        let hidden = measure(&[(&[-1.0], 0.5), (&[1.0], 0.5)]);
        let oracle = HiddenMeasureOracle::new(hidden);
        let found = search_support(&oracle, -2.0, 2.0, 41).unwrap();
        assert!(!found.is_empty());
    }
}
