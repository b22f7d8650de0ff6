//! Seeded random instances: spaces, measures and configurations used by the
//! self-test harness, the CLI and the tests.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::measure::{Atom, DiscreteMeasure};
use crate::space::{NormP, Point, Space};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive weights summing to one (up to rounding), bounded away from zero.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // Put the rounding residue on the largest weight so the sum is as close
    // to 1 as floating point allows.
    let rest: f64 = w.iter().sum::<f64>() - 1.0;
    let imax = (0..n).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0);
    w[imax] -= rest;
    w
}

pub fn random_norm<R: Rng>(rng: &mut R) -> NormP {
    *[NormP::Finite(1.0), NormP::Finite(2.0), NormP::Inf]
        .choose(rng)
        .expect("nonempty")
}

/// Coordinates uniform in `[-spread, spread]^dim`.
pub fn random_coords<R: Rng>(rng: &mut R, dim: usize, spread: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-spread..spread)).collect()
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// A measure with `n` distinct random atoms on a normed space.
pub fn random_normed_measure<R: Rng>(rng: &mut R, space: &Space, n: usize, spread: f64) -> DiscreteMeasure {
    let dim = space.dim().expect("normed space");
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    while points.len() < n {
        let c = random_coords(rng, dim, spread);
        if points.iter().all(|q| q != &c) {
            points.push(c);
        }
    }
    let w = random_weights(rng, n);
    DiscreteMeasure::new(
        space.clone(),
        points.into_iter().zip(w).map(|(p, w)| Atom::new(p, w)).collect(),
    )
    .expect("generated measure is valid")
}

/// A measure whose atoms are a random subset (of size `n`) of a finite space.
pub fn random_finite_measure<R: Rng>(rng: &mut R, space: &Space, n: usize) -> DiscreteMeasure {
    let card = space.cardinality().expect("finite space");
    let mut idx: Vec<usize> = (0..card).collect();
    idx.shuffle(rng);
    idx.truncate(n.min(card));
    let w = random_weights(rng, idx.len());
    DiscreteMeasure::new(
        space.clone(),
        idx.into_iter().zip(w).map(|(i, w)| Atom::new(i, w)).collect(),
    )
    .expect("generated measure is valid")
}

pub fn random_measure<R: Rng>(rng: &mut R, space: &Space, n: usize, spread: f64) -> DiscreteMeasure {
    match space {
        Space::Normed { .. } => random_normed_measure(rng, space, n, spread),
        Space::Finite { .. } => random_finite_measure(rng, space, n),
    }
}

/// A valid finite metric space on `n` points: shortest-path closure of random
/// positive edge lengths in `(0, max_len]`.
pub fn random_finite_space<R: Rng>(rng: &mut R, n: usize, max_len: f64) -> Space {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.05 * max_len..=max_len);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    Space::finite(d).expect("shortest-path metric is valid")
}

/// Random point of a space.
pub fn random_point<R: Rng>(rng: &mut R, space: &Space, spread: f64) -> Point {
    match space {
        Space::Normed { dim, .. } => Point::Coords(random_coords(rng, *dim, spread)),
        Space::Finite { dist } => Point::Index(rng.random_range(0..dist.len())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let s = Space::euclidean(3);
        let a = random_measure(&mut rng(5), &s, 4, 1.0);
        let b = random_measure(&mut rng(5), &s, 4, 1.0);
        assert_eq!(a, b);
        let fs = random_finite_space(&mut rng(9), 6, 1.0);
        assert_eq!(fs, random_finite_space(&mut rng(9), 6, 1.0));
    }

    #[test]
    fn weights_are_valid() {
        let mut r = rng(1);
        for n in 1..10 {
            let w = random_weights(&mut r, n);
            assert!(w.iter().all(|&v| v > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}
