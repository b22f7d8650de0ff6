//! Affine isometries of a normed base space and their push-forward action on
//! measures. Push-forward by an isometry preserves LP distances; this module
//! builds, validates and checks such maps.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpmetric::{lp_distance_with, LpOptions, Method};
use crate::measure::{make_measure, Atom, DiscreteMeasure};
use crate::random::{gaussian_vector, rng};
use crate::space::{NormP, Point, Space};

/// Tolerance on the linear-part invariant and on distance preservation.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// Largest residual accepted by [`fit_affine_isometry`].
pub const FIT_TOL: f64 = 1e-8;
/// Largest pairwise deviation accepted by [`check_invariance`].
pub const INVARIANCE_TOL: f64 = 1e-9;
const SPOT_CHECKS: usize = 100;

/// `x ↦ Ax + b`, not validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMap {
    pub linear: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        AffineMap {
            linear: (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            translation: vec![0.0; dim],
        }
    }

    /// `x ↦ c·x`; an isometry only for `|c| = 1`.
    pub fn scaling(dim: usize, c: f64) -> Self {
        let mut m = Self::identity(dim);
        m.linear.iter_mut().enumerate().for_each(|(i, row)| row[i] = c);
        m
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    fn check_shape(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || self.linear.len() != d || self.linear.iter().any(|r| r.len() != d) {
            return Err(Error::Malformed(format!(
                "affine map needs a {d}×{d} linear part for a translation of length {d}"
            )));
        }
        if self.linear.iter().flatten().chain(&self.translation).any(|v| !v.is_finite()) {
            return Err(Error::Malformed("affine map has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.linear
            .iter()
            .zip(&self.translation)
            .map(|(row, b)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    pub fn apply_point(&self, x: &Point) -> Result<Point> {
        let c = x.coords().ok_or(Error::NotNormed)?;
        if c.len() != self.dim() {
            return Err(Error::PointMismatch(format!(
                "point of dimension {} for a map of dimension {}",
                c.len(),
                self.dim()
            )));
        }
        Ok(Point::Coords(self.apply(c)))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: AffineMap = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        m.check_shape()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// An affine map validated to be an isometry of a normed space.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineIsometry {
    space: Space,
    map: AffineMap,
}

fn is_signed_permutation(a: &[Vec<f64>]) -> bool {
    let d = a.len();
    let entries_ok = a
        .iter()
        .flatten()
        .all(|&v| [-1.0, 0.0, 1.0].iter().any(|t| (v - t).abs() <= ISOMETRY_TOL));
    let nz = |v: f64| v.abs() > 0.5;
    entries_ok
        && a.iter().all(|r| r.iter().filter(|&&v| nz(v)).count() == 1)
        && (0..d).all(|j| a.iter().filter(|r| nz(r[j])).count() == 1)
}

fn orthogonality_defect(a: &[Vec<f64>]) -> f64 {
    let d = a.len();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|k| a[k][i] * a[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

impl AffineIsometry {
    /// Validates the linear part (orthogonal for ℓ2, a signed permutation
    /// otherwise) and spot-checks distance preservation on random pairs.
    pub fn new(space: Space, map: AffineMap) -> Result<Self> {
        let (dim, p) = match &space {
            Space::Normed { dim, p } => (*dim, *p),
            Space::Finite { .. } => return Err(Error::NotNormed),
        };
        map.check_shape()?;
        if map.dim() != dim {
            return Err(Error::PointMismatch(format!(
                "map of dimension {} on a space of dimension {dim}",
                map.dim()
            )));
        }
        if p.is_euclidean() {
            let defect = orthogonality_defect(&map.linear);
            if defect > ISOMETRY_TOL {
                return Err(Error::NotIsometry(format!(
                    "linear part is not orthogonal (defect {defect:e})"
                )));
            }
        } else if !is_signed_permutation(&map.linear) {
            return Err(Error::NotIsometry(format!(
                "linear part is not a signed permutation, as required under the ℓ{p} norm"
            )));
        }
        let mut r = rng(0x5eed);
        for _ in 0..SPOT_CHECKS {
            let x: Vec<f64> = (0..dim).map(|_| r.random_range(-10.0..10.0)).collect();
            let y: Vec<f64> = (0..dim).map(|_| r.random_range(-10.0..10.0)).collect();
            let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u - v).collect() };
            let before = p.norm(&diff(&x, &y));
            let after = p.norm(&diff(&map.apply(&x), &map.apply(&y)));
            if (after - before).abs() > ISOMETRY_TOL * before.max(1.0) {
                return Err(Error::NotIsometry(format!(
                    "distance {before} mapped to {after}"
                )));
            }
        }
        Ok(AffineIsometry { space, map })
    }

    pub fn identity(space: Space) -> Result<Self> {
        let d = space.dim().ok_or(Error::NotNormed)?;
        Self::new(space, AffineMap::identity(d))
    }

    pub fn from_json(space: Space, text: &str) -> Result<Self> {
        Self::new(space, AffineMap::from_json(text)?)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.space.check_point(x)?;
        self.map.apply_point(x)
    }

    /// Both admissible linear parts are orthogonal, so the inverse is
    /// `x ↦ Aᵀ(x − b)`.
    pub fn inverse(&self) -> AffineIsometry {
        let d = self.map.dim();
        let at: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| self.map.linear[j][i]).collect()).collect();
        let translation = at
            .iter()
            .map(|row| -row.iter().zip(&self.map.translation).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        AffineIsometry {
            space: self.space.clone(),
            map: AffineMap { linear: at, translation },
        }
    }
}

/// Push-forward `ψ#μ`: atoms moved by `ψ`, weights unchanged.
pub fn pushforward(mu: &DiscreteMeasure, psi: &AffineIsometry) -> Result<DiscreteMeasure> {
    if mu.space() != psi.space() {
        return Err(Error::SpaceMismatch);
    }
    pushforward_by(mu, &psi.map)
}

/// Push-forward by an arbitrary affine map. Atoms sent to the same point are
/// merged.
pub fn pushforward_by(mu: &DiscreteMeasure, map: &AffineMap) -> Result<DiscreteMeasure> {
    let atoms = mu
        .atoms()
        .iter()
        .map(|a| Ok(Atom::new(map.apply_point(&a.point)?, a.weight)))
        .collect::<Result<Vec<_>>>()?;
    make_measure(mu.space().clone(), atoms, true)
}

/// Reads the point map `x ↦ ψ(x)` off an action on Dirac measures over
/// `space`; fails on any image that is not a Dirac.
pub fn induced_point_map<F>(space: &Space, dirac_action: F) -> impl Fn(&Point) -> Result<Point>
where
    F: Fn(&DiscreteMeasure) -> Result<DiscreteMeasure>,
{
    let space = space.clone();
    move |x: &Point| {
        let image = dirac_action(&DiscreteMeasure::dirac(space.clone(), x.clone())?)?;
        if image.len() != 1 {
            return Err(Error::NonDiracImage(image.len()));
        }
        Ok(image.atoms()[0].point.clone())
    }
}

/// `φ_ψ(μ) = ψ⁻¹#φ(μ)`, i.e. `φ_ψ(μ)(A) = φ(μ)(ψ[A])`.
pub fn conjugate<'a, F>(phi: F, psi: &'a AffineIsometry) -> impl Fn(&DiscreteMeasure) -> Result<DiscreteMeasure> + 'a
where
    F: Fn(&DiscreteMeasure) -> Result<DiscreteMeasure> + 'a,
{
    let inv = psi.inverse();
    move |mu: &DiscreteMeasure| pushforward(&phi(mu)?, &inv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub measures: usize,
    pub pairs: usize,
    pub max_deviation: f64,
    /// Indices of a pair attaining the maximum.
    pub worst_pair: Option<(usize, usize)>,
    pub passed: bool,
}

/// Largest `|π(μ_i, μ_j) − π(ψ#μ_i, ψ#μ_j)|` over all pairs, via the flow
/// algorithm. `threads = None` uses rayon's default pool; the report does not
/// depend on the thread count.
pub fn check_invariance(psi: &AffineIsometry, measures: &[DiscreteMeasure], threads: Option<usize>) -> Result<InvarianceReport> {
    for m in measures {
        if m.space() != psi.space() {
            return Err(Error::SpaceMismatch);
        }
    }
    check_invariance_by(&psi.map, measures, threads)
}

/// Same harness for an unvalidated map, so that non-isometries can be fed
/// through it.
pub fn check_invariance_by(map: &AffineMap, measures: &[DiscreteMeasure], threads: Option<usize>) -> Result<InvarianceReport> {
    let images: Vec<DiscreteMeasure> = measures.iter().map(|m| pushforward_by(m, map)).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..measures.len())
        .flat_map(|i| (i + 1..measures.len()).map(move |j| (i, j)))
        .collect();
    let opts = LpOptions {
        support_cap: usize::MAX,
        ..LpOptions::default()
    };
    let work = || -> Result<Vec<f64>> {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let before = lp_distance_with(&measures[i], &measures[j], Method::Flow, &opts)?.value;
                let after = lp_distance_with(&images[i], &images[j], Method::Flow, &opts)?.value;
                Ok((before - after).abs())
            })
            .collect()
    };
    let devs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let mut worst: Option<(usize, f64)> = None;
    for (k, &d) in devs.iter().enumerate() {
        if worst.is_none_or(|(_, w)| d > w) {
            worst = Some((k, d));
        }
    }
    let max_deviation = worst.map_or(0.0, |(_, d)| d);
    Ok(InvarianceReport {
        measures: measures.len(),
        pairs: pairs.len(),
        max_deviation,
        worst_pair: worst.map(|(k, _)| pairs[k]),
        passed: max_deviation <= INVARIANCE_TOL,
    })
}

/// Least-squares affine fit to `(x, ψ(x))` pairs, accepted only if it is an
/// isometry reproducing every pair within [`FIT_TOL`].
pub fn fit_affine_isometry(space: &Space, pairs: &[(Point, Point)]) -> Result<AffineIsometry> {
    let d = space.dim().ok_or(Error::NotNormed)?;
    if pairs.len() < d + 1 {
        return Err(Error::DegenerateConfiguration(format!(
            "{} pairs; at least {} needed",
            pairs.len(),
            d + 1
        )));
    }
    let n = pairs.len();
    let mut x = DMatrix::<f64>::zeros(n, d + 1);
    let mut y = DMatrix::<f64>::zeros(n, d);
    for (r, (a, b)) in pairs.iter().enumerate() {
        space.check_point(a)?;
        space.check_point(b)?;
        let (a, b) = (a.coords().expect("normed"), b.coords().expect("normed"));
        for k in 0..d {
            x[(r, k)] = a[k];
            y[(r, k)] = b[k];
        }
        x[(r, d)] = 1.0;
    }
    // Affine independence: the centered sources must span all of ℝ^d.
    let mean = x.columns(0, d).row_mean();
    let mut centered = x.columns(0, d).into_owned();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let sv = centered.clone().svd(false, false).singular_values;
    let scale = sv.max().max(1.0);
    if sv.len() < d || sv.min() <= 1e-9 * scale {
        return Err(Error::DegenerateConfiguration(
            "source points are not affinely independent".into(),
        ));
    }
    let coef = x
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::DegenerateConfiguration(e.to_string()))?;
    let linear: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| coef[(j, i)]).collect()).collect();
    let translation: Vec<f64> = (0..d).map(|i| coef[(d, i)]).collect();
    let map = AffineMap { linear, translation };
    let residual = pairs
        .iter()
        .map(|(a, b)| {
            let fa = map.apply(a.coords().expect("normed"));
            fa.iter()
                .zip(b.coords().expect("normed"))
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    if residual > FIT_TOL {
        return Err(Error::NotIsometry(format!("fit residual {residual:e}")));
    }
    AffineIsometry::new(space.clone(), map)
}

/// Deterministic random isometry: orthonormalized Gaussian matrix under ℓ2,
/// a random signed permutation under other norms; Gaussian translation.
pub fn random_affine_isometry(space: &Space, seed: u64) -> Result<AffineIsometry> {
    let (dim, p) = match space {
        Space::Normed { dim, p } => (*dim, *p),
        Space::Finite { .. } => return Err(Error::NotNormed),
    };
    let mut r = rng(seed);
    let linear: Vec<Vec<f64>> = if p == NormP::Finite(2.0) {
        let g = DMatrix::from_column_slice(dim, dim, &gaussian_vector(&mut r, dim * dim));
        let qr = g.qr();
        let (q, rr) = (qr.q(), qr.r());
        // Fix the sign ambiguity so the result is Haar distributed.
        let signs = DVector::from_fn(dim, |i, _| if rr[(i, i)] < 0.0 { -1.0 } else { 1.0 });
        (0..dim).map(|i| (0..dim).map(|j| q[(i, j)] * signs[j]).collect()).collect()
    } else {
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(&mut r);
        (0..dim)
            .map(|i| {
                let sign = if r.random_bool(0.5) { -1.0 } else { 1.0 };
                (0..dim).map(|j| if j == perm[i] { sign } else { 0.0 }).collect()
            })
            .collect()
    };
    let translation = gaussian_vector(&mut r, dim);
    AffineIsometry::new(space.clone(), AffineMap { linear, translation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_measure;

    fn rot90_plus_e1() -> AffineIsometry {
        AffineIsometry::new(
            Space::euclidean(2),
            AffineMap {
                linear: vec![vec![0.0, -1.0], vec![1.0, 0.0]],
                translation: vec![1.0, 0.0],
            },
        )
        .unwrap()
    }

    #[test]
    fn rotation_pushforward() {
        let s = Space::euclidean(2);
        let mu = DiscreteMeasure::new(s.clone(), vec![Atom::new(vec![0.0, 0.0], 0.5), Atom::new(vec![1.0, 0.0], 0.5)]).unwrap();
        let img = pushforward(&mu, &rot90_plus_e1()).unwrap();
        let want = DiscreteMeasure::new(s, vec![Atom::new(vec![1.0, 0.0], 0.5), Atom::new(vec![1.0, 1.0], 0.5)]).unwrap();
        assert!(img.same_measure(&want));
    }

    #[test]
    fn identity_leaves_measure_alone() {
        let s = Space::euclidean(3);
        let mu = random_measure(&mut rng(3), &s, 4, 1.0);
        let id = AffineIsometry::identity(s).unwrap();
        assert_eq!(pushforward(&mu, &id).unwrap(), mu);
        let rep = check_invariance(&id, &[mu.clone(), mu], None).unwrap();
        assert_eq!(rep.max_deviation, 0.0);
    }

    #[test]
    fn inverse_restores() {
        let s = Space::euclidean(3);
        let psi = random_affine_isometry(&s, 11).unwrap();
        let mu = random_measure(&mut rng(4), &s, 5, 1.0);
        let back = pushforward(&pushforward(&mu, &psi).unwrap(), &psi.inverse()).unwrap();
        for (a, b) in mu.atoms().iter().zip(back.atoms()) {
            let (x, y) = (a.point.coords().unwrap(), b.point.coords().unwrap());
            assert!(x.iter().zip(y).all(|(u, v)| (u - v).abs() < 1e-12));
            assert_eq!(a.weight, b.weight);
        }
    }

    #[test]
    fn scaling_is_rejected_and_detected() {
        let s = Space::euclidean(1);
        let err = AffineIsometry::new(s.clone(), AffineMap::scaling(1, 2.0)).unwrap_err();
        assert!(matches!(err, Error::NotIsometry(_)));
        let mu = DiscreteMeasure::dirac(s.clone(), vec![0.0]).unwrap();
        let nu = DiscreteMeasure::dirac(s, vec![0.4]).unwrap();
        let rep = check_invariance_by(&AffineMap::scaling(1, 2.0), &[mu, nu], None).unwrap();
        assert!((rep.max_deviation - 0.4).abs() < 1e-12);
        assert!(!rep.passed);
    }

    #[test]
    fn random_isometries() {
        let l2 = Space::euclidean(3);
        assert_eq!(random_affine_isometry(&l2, 5).unwrap(), random_affine_isometry(&l2, 5).unwrap());
        let linf = Space::normed(2, NormP::Inf).unwrap();
        let psi = random_affine_isometry(&linf, 7).unwrap();
        assert!(is_signed_permutation(&psi.map().linear));
        assert!(psi.map().linear.iter().flatten().all(|v| [-1.0, 0.0, 1.0].contains(v)));
        assert_eq!(
            random_affine_isometry(&Space::finite(vec![vec![0.0]]).unwrap(), 1).unwrap_err(),
            Error::NotNormed
        );
    }

    #[test]
    fn invariance_is_thread_independent() {
        let s = Space::euclidean(2);
        let psi = random_affine_isometry(&s, 42).unwrap();
        let mut r = rng(8);
        let ms: Vec<_> = (0..6).map(|_| random_measure(&mut r, &s, 3, 1.0)).collect();
        let a = check_invariance(&psi, &ms, Some(1)).unwrap();
        let b = check_invariance(&psi, &ms, Some(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.passed);
    }

    #[test]
    fn fitting() {
        let s = Space::euclidean(2);
        let psi = random_affine_isometry(&s, 3).unwrap();
        let pts: Vec<Point> = (0..5).map(|k| Point::Coords(vec![k as f64 * 0.3, (k * k) as f64 * 0.1])).collect();
        let pairs: Vec<_> = pts.iter().map(|p| (p.clone(), psi.apply(p).unwrap())).collect();
        let fit = fit_affine_isometry(&s, &pairs).unwrap();
        for (a, b) in fit.map().linear.iter().flatten().zip(psi.map().linear.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }

        let shear = AffineMap {
            linear: vec![vec![1.0, 0.5], vec![0.0, 1.0]],
            translation: vec![0.0, 0.0],
        };
        let pairs: Vec<_> = pts.iter().map(|p| (p.clone(), shear.apply_point(p).unwrap())).collect();
        assert!(matches!(fit_affine_isometry(&s, &pairs).unwrap_err(), Error::NotIsometry(_)));

        let same = Point::Coords(vec![1.0, 1.0]);
        let pairs = vec![(same.clone(), same.clone()); 4];
        assert!(matches!(fit_affine_isometry(&s, &pairs).unwrap_err(), Error::DegenerateConfiguration(_)));
    }

    #[test]
    fn induced_map_and_conjugation() {
        let s = Space::euclidean(2);
        let psi = random_affine_isometry(&s, 9).unwrap();
        let action = |m: &DiscreteMeasure| pushforward(m, &psi);
        let f = induced_point_map(&s, action);
        let x = Point::Coords(vec![0.3, -0.7]);
        assert_eq!(f(&x).unwrap(), psi.apply(&x).unwrap());

        let splitter = |m: &DiscreteMeasure| {
            let x = m.atoms()[0].point.coords().unwrap()[0];
            DiscreteMeasure::new(
                Space::euclidean(1),
                vec![Atom::new(vec![x], 0.5), Atom::new(vec![x + 1.0], 0.5)],
            )
        };
        let g = induced_point_map(&Space::euclidean(1), splitter);
        assert_eq!(g(&Point::Coords(vec![0.0])).unwrap_err(), Error::NonDiracImage(2));

        let conj = conjugate(action, &psi);
        let mu = random_measure(&mut rng(2), &s, 3, 1.0);
        let back = conj(&mu).unwrap();
        for (a, b) in mu.atoms().iter().zip(back.atoms()) {
            let (x, y) = (a.point.coords().unwrap(), b.point.coords().unwrap());
            assert!(x.iter().zip(y).all(|(u, v)| (u - v).abs() <= 1e-12));
        }
    }

    #[test]
    fn json_round_trip() {
        let psi = rot90_plus_e1();
        let back = AffineIsometry::from_json(Space::euclidean(2), &psi.map().to_json()).unwrap();
        assert_eq!(back, psi);
        assert!(AffineMap::from_json(r#"{"linear": [[1]], "translation": [0, 1]}"#).is_err());
    }
}
