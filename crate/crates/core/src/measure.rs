//! Finitely supported probability measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Point, Space, SpaceJson};

/// Allowed deviation of the total weight from 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Default cap on the support size for exponential-time algorithms.
pub const DEFAULT_SUPPORT_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

impl Atom {
    pub fn new(point: impl Into<Point>, weight: f64) -> Self {
        Atom {
            point: point.into(),
            weight,
        }
    }
}

/// A finite convex combination of Dirac measures on a [`Space`].
///
/// Construction validates positivity of the weights, the unit total mass and
/// pairwise distinctness of the atoms; values are immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    space: Space,
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    /// Builds a measure, rejecting duplicate atoms.
    pub fn new(space: Space, atoms: Vec<Atom>) -> Result<Self> {
        make_measure(space, atoms, false)
    }

    pub fn dirac(space: Space, x: impl Into<Point>) -> Result<Self> {
        make_measure(space, vec![Atom::new(x, 1.0)], false)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_dirac(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.atoms.iter().map(|a| &a.point)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    /// Mass of the atom located at `x`, zero if `x` is not an atom.
    pub fn mass_at(&self, x: &Point) -> f64 {
        self.atoms
            .iter()
            .find(|a| &a.point == x)
            .map_or(0.0, |a| a.weight)
    }

    /// Exact equality as measures (atom order ignored).
    pub fn same_measure(&self, other: &DiscreteMeasure) -> bool {
        self.space == other.space
            && self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .all(|a| other.atoms.iter().any(|b| b.point == a.point && b.weight == a.weight))
    }

    pub(crate) fn ensure_same_space(&self, other: &DiscreteMeasure) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        raw.into_measure()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MeasureOut {
            space: &self.space,
            atoms: &self.atoms,
        })
        .expect("measure serializes")
    }
}

/// Validates atoms and builds a measure. With `merge`, atoms at coinciding
/// points are combined by summing their weights; otherwise duplicates are an
/// error.
pub fn make_measure(space: Space, atoms: Vec<Atom>, merge: bool) -> Result<DiscreteMeasure> {
    if atoms.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let mut kept: Vec<Atom> = Vec::with_capacity(atoms.len());
    for (idx, atom) in atoms.into_iter().enumerate() {
        space.check_point(&atom.point)?;
        if !(atom.weight > 0.0) || !atom.weight.is_finite() {
            return Err(Error::NonPositiveWeight(atom.weight));
        }
        match kept
            .iter_mut()
            .find(|k| space.dist_unchecked(&k.point, &atom.point) == 0.0)
        {
            Some(existing) if merge => existing.weight += atom.weight,
            Some(_) => return Err(Error::DuplicateAtom(idx)),
            None => kept.push(atom),
        }
    }
    let total: f64 = kept.iter().map(|a| a.weight).sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::WeightSum(total));
    }
    Ok(DiscreteMeasure { space, atoms: kept })
}

/// Smallest distance between an atom of `mu` and an atom of `nu`.
pub fn support_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    mu.ensure_same_space(nu)?;
    let space = mu.space();
    Ok(mu
        .points()
        .flat_map(|x| nu.points().map(move |y| space.dist_unchecked(x, y)))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    point: Point,
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureJson {
    space: SpaceJson,
    atoms: Vec<AtomJson>,
}

impl MeasureJson {
    fn into_measure(self) -> Result<DiscreteMeasure> {
        let space = self.space.into_space()?;
        DiscreteMeasure::new(
            space,
            self.atoms
                .into_iter()
                .map(|a| Atom::new(a.point, a.weight))
                .collect(),
        )
    }
}

#[derive(Serialize)]
struct MeasureOut<'a> {
    space: &'a Space,
    atoms: &'a [Atom],
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Space {
        Space::euclidean(1)
    }

    fn three_point() -> Space {
        let t = 1.0 / 3.0;
        Space::finite(vec![vec![0.0, t, t], vec![t, 0.0, t], vec![t, t, 0.0]]).unwrap()
    }

    #[test]
    fn two_atom_measure() {
        let m = make_measure(
            line(),
            vec![Atom::new(vec![0.0], 0.5), Atom::new(vec![1.0], 0.5)],
            false,
        )
        .unwrap();
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn rejects_bad_sum_and_weights() {
        let e = make_measure(
            line(),
            vec![Atom::new(vec![0.0], 0.5), Atom::new(vec![1.0], 0.6)],
            false,
        )
        .unwrap_err();
        assert!(matches!(e, Error::WeightSum(_)));
        let e = make_measure(
            line(),
            vec![Atom::new(vec![0.0], 1.5), Atom::new(vec![1.0], -0.5)],
            false,
        )
        .unwrap_err();
        assert!(matches!(e, Error::NonPositiveWeight(_)));
        assert!(matches!(
            make_measure(line(), vec![], false).unwrap_err(),
            Error::EmptyMeasure
        ));
    }

    #[test]
    fn duplicates_rejected_or_merged() {
        let atoms = vec![Atom::new(vec![0.0], 0.5), Atom::new(vec![0.0], 0.5)];
        assert!(matches!(
            make_measure(line(), atoms.clone(), false).unwrap_err(),
            Error::DuplicateAtom(1)
        ));
        let m = make_measure(line(), atoms, true).unwrap();
        assert_eq!(m.atoms(), &[Atom::new(vec![0.0], 1.0)]);
        let again = make_measure(line(), m.atoms().to_vec(), true).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn finite_space_points_are_indices() {
        assert!(DiscreteMeasure::dirac(three_point(), 2usize).is_ok());
        assert!(DiscreteMeasure::dirac(three_point(), 3usize).is_err());
        assert!(DiscreteMeasure::dirac(three_point(), vec![0.0]).is_err());
    }

    #[test]
    fn support_distances() {
        let d0 = DiscreteMeasure::dirac(line(), vec![0.0]).unwrap();
        let d3 = DiscreteMeasure::dirac(line(), vec![3.0]).unwrap();
        assert_eq!(support_distance(&d0, &d3).unwrap(), 3.0);

        let mu = DiscreteMeasure::new(
            line(),
            vec![Atom::new(vec![0.0], 0.5), Atom::new(vec![1.0], 0.5)],
        )
        .unwrap();
        let d1 = DiscreteMeasure::dirac(line(), vec![1.0]).unwrap();
        assert_eq!(support_distance(&mu, &d1).unwrap(), 0.0);

        let s = three_point();
        let mu = DiscreteMeasure::new(s.clone(), vec![Atom::new(0usize, 0.5), Atom::new(1usize, 0.5)])
            .unwrap();
        let nu = DiscreteMeasure::new(s, vec![Atom::new(1usize, 0.5), Atom::new(2usize, 0.5)]).unwrap();
        assert_eq!(support_distance(&mu, &nu).unwrap(), 0.0);

        let other = DiscreteMeasure::dirac(Space::euclidean(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(support_distance(&d0, &other).unwrap_err(), Error::SpaceMismatch);
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let text = r#"{"space":{"type":"normed","dim":1,"p":2},
                       "atoms":[{"point":[0],"weight":0.5},{"point":[1],"weight":0.5}]}"#;
        let m = DiscreteMeasure::from_json(text).unwrap();
        assert_eq!(DiscreteMeasure::from_json(&m.to_json()).unwrap(), m);

        let bad = r#"{"space":{"type":"normed","dim":1,"p":2},
                      "atoms":[{"point":[0],"weight":1,"label":"a"}]}"#;
        assert!(matches!(DiscreteMeasure::from_json(bad), Err(Error::Malformed(_))));
        let bad = r#"{"space":{"type":"normed","dim":1,"p":2},"atoms":[],"note":1}"#;
        assert!(DiscreteMeasure::from_json(bad).is_err());

        let fin = r#"{"space":{"type":"finite","dist":[[0,1],[1,0]]},
                      "atoms":[{"point":1,"weight":1}]}"#;
        let m = DiscreteMeasure::from_json(fin).unwrap();
        assert_eq!(m.atoms()[0].point, Point::Index(1));
    }
}
