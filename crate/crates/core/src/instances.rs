//! Constructed instances with known answers, shared by the self-test harness
//! and the acceptance suite.

use rand::Rng;

use crate::measure::{Atom, DiscreteMeasure};
use crate::random::{random_finite_space, random_measure, random_norm, random_normed_measure, random_weights};
use crate::reconstruct::Ring;
use crate::space::{NormP, Point, Space};

/// Random pair of measures: 20% on a random finite metric space with at
/// most 6 points, otherwise on ℝ^d (d ≤ 4) under ℓ1, ℓ2 or ℓ∞, with at most
/// `max_atoms` atoms per side.
pub fn lp_pair<R: Rng>(rng: &mut R, max_atoms: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    if rng.random_bool(0.2) {
        finite_pair(rng)
    } else {
        let dim = rng.random_range(1..=4);
        let p = random_norm(rng);
        normed_pair(rng, dim, p, max_atoms)
    }
}

pub fn normed_pair<R: Rng>(rng: &mut R, dim: usize, p: NormP, max_atoms: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let space = Space::normed(dim, p).expect("valid norm");
    let spread = [0.3, 0.6, 1.0][rng.random_range(0..3)];
    let a = rng.random_range(1..=max_atoms);
    let b = rng.random_range(1..=max_atoms);
    (
        random_measure(rng, &space, a, spread),
        random_measure(rng, &space, b, spread),
    )
}

pub fn finite_pair<R: Rng>(rng: &mut R) -> (DiscreteMeasure, DiscreteMeasure) {
    let n = rng.random_range(2..=6);
    let space = random_finite_space(rng, n, 1.2);
    let a = rng.random_range(1..=n);
    let b = rng.random_range(1..=n);
    (random_measure(rng, &space, a, 1.0), random_measure(rng, &space, b, 1.0))
}

/// The same pair with every distance divided by `s`.
pub fn rescaled(mu: &DiscreteMeasure, nu: &DiscreteMeasure, s: f64) -> (DiscreteMeasure, DiscreteMeasure) {
    match mu.space() {
        Space::Normed { .. } => {
            let f = |m: &DiscreteMeasure| {
                let atoms = m
                    .atoms()
                    .iter()
                    .map(|a| Atom::new(a.point.coords().expect("normed").iter().map(|v| v / s).collect::<Vec<_>>(), a.weight))
                    .collect();
                DiscreteMeasure::new(m.space().clone(), atoms).expect("scaling keeps atoms distinct")
            };
            (f(mu), f(nu))
        }
        Space::Finite { .. } => {
            let space = mu.space().scaled_matrix(1.0 / s).expect("positive factor");
            let f = |m: &DiscreteMeasure| DiscreteMeasure::new(space.clone(), m.atoms().to_vec()).expect("same atoms");
            (f(mu), f(nu))
        }
    }
}

/// A pair with a prescribed support gap, plus an upper bound for `π` when
/// the gap is below one: moving `m = min(μ(x), ν(y))` from the closest pair
/// `(x, y)` gives `π ≤ max(gap, 1 − m)`.
#[derive(Debug, Clone)]
pub struct GapPair {
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub gap: f64,
    pub bound: f64,
}

pub fn gap_pair<R: Rng>(rng: &mut R, far: bool) -> GapPair {
    let dim = rng.random_range(1..=3);
    let space = Space::normed(dim, random_norm(rng)).expect("valid norm");
    let p = space.norm_p().expect("normed");
    let n_mu = rng.random_range(1..=4);
    let mu = random_normed_measure(rng, &space, n_mu, 1.0);
    let n_nu = rng.random_range(1..=4);
    let target_gap: f64 = if far { rng.random_range(1.0..2.0) } else { rng.random_range(0.0..0.95) };

    // Far: rejection sampling keeps every ν atom at distance ≥ target_gap.
    // Near: additionally one ν atom sits exactly target_gap away from a μ
    // atom along a coordinate axis (a unit vector in every ℓp).
    let mut nu_pts: Vec<Vec<f64>> = Vec::new();
    if !far {
        let mut c = mu.atoms()[rng.random_range(0..mu.len())].point.coords().expect("normed").to_vec();
        c[rng.random_range(0..dim)] += target_gap.max(1e-3);
        if mu.points().all(|x| x.coords() != Some(&c[..])) {
            nu_pts.push(c);
        }
    }
    while nu_pts.len() < n_nu {
        let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect();
        let ok = mu.points().all(|x| {
            let d: Vec<f64> = x.coords().expect("normed").iter().zip(&c).map(|(a, b)| a - b).collect();
            p.norm(&d) >= target_gap
        });
        if ok && !nu_pts.contains(&c) {
            nu_pts.push(c);
        }
    }
    let w = random_weights(rng, n_nu);
    let nu = DiscreteMeasure::new(
        space.clone(),
        nu_pts.into_iter().zip(w).map(|(c, w)| Atom::new(c, w)).collect(),
    )
    .expect("distinct atoms");

    let mut gap = f64::INFINITY;
    let mut bound: f64 = 1.0;
    for a in mu.atoms() {
        for b in nu.atoms() {
            let d = space.distance(&a.point, &b.point).expect("same space");
            if d < gap {
                gap = d;
            }
        }
    }
    for a in mu.atoms() {
        for b in nu.atoms() {
            let d = space.distance(&a.point, &b.point).expect("same space");
            if d == gap {
                bound = bound.min(d.max(1.0 - a.weight.min(b.weight)));
            }
        }
    }
    GapPair { mu, nu, gap, bound }
}

/// Ring configuration around a probe for the residual-witness identity.
#[derive(Debug, Clone)]
pub struct RingInstance {
    pub space: Space,
    pub probe: Point,
    pub rings: Vec<Ring>,
    /// Normalized undetected part `ϑ̃`.
    pub residual: DiscreteMeasure,
    /// Its mass `w̃` inside the hidden measure.
    pub residual_weight: f64,
    pub hidden: DiscreteMeasure,
}

fn on_sphere<R: Rng>(rng: &mut R, x: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = x.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = NormP::Finite(2.0).norm(&v);
        if n > 1e-3 {
            return x.iter().zip(&v).map(|(a, b)| a + radius * b / n).collect();
        }
    }
}

/// 1–3 rings of 1–3 atoms each (at most 2 on the line) around a random
/// probe in ℝ^d (d ≤ 3, ℓ2), and an undetected part of 1–4 atoms.
pub fn ring_instance<R: Rng>(rng: &mut R) -> RingInstance {
    let dim = rng.random_range(1..=3);
    let space = Space::euclidean(dim);
    let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = rng.random_range(1..=3);
    let mut radii: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.5)).collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-3);

    let per_ring = if dim == 1 { 2 } else { 3 };
    let counts: Vec<usize> = radii.iter().map(|_| rng.random_range(1..=per_ring)).collect();
    let n_residual = rng.random_range(1..=4);
    let weights = random_weights(rng, counts.iter().sum::<usize>() + n_residual);
    let mut w = weights.into_iter();

    let mut rings = Vec::new();
    let mut all: Vec<Atom> = Vec::new();
    for (&radius, &c) in radii.iter().zip(&counts) {
        let mut atoms: Vec<Atom> = Vec::new();
        while atoms.len() < c {
            let p = Point::Coords(on_sphere(rng, &x, radius));
            if atoms.iter().all(|a| a.point != p) {
                atoms.push(Atom::new(p, w.next().expect("enough weights")));
            }
        }
        all.extend(atoms.iter().cloned());
        rings.push(Ring { radius, atoms });
    }

    let rest: Vec<f64> = w.collect();
    let residual_weight: f64 = rest.iter().sum();
    let mut residual_atoms: Vec<Atom> = Vec::new();
    for (i, wt) in rest.into_iter().enumerate() {
        let p = if i == 0 && rng.random_bool(0.2) {
            Point::Coords(x.clone())
        } else {
            Point::Coords((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        };
        all.push(Atom::new(p.clone(), wt));
        residual_atoms.push(Atom::new(p, wt / residual_weight));
    }
    let fix = |atoms: &mut Vec<Atom>| {
        let sum: f64 = atoms.iter().map(|a| a.weight).sum();
        let last = atoms.len() - 1;
        atoms[last].weight -= sum - 1.0;
    };
    fix(&mut residual_atoms);
    fix(&mut all);

    RingInstance {
        probe: Point::Coords(x),
        residual: DiscreteMeasure::new(space.clone(), residual_atoms).expect("valid residual"),
        hidden: DiscreteMeasure::new(space.clone(), all).expect("valid hidden measure"),
        space,
        rings,
        residual_weight,
    }
}

/// Random measure on ℝ² or ℝ³ (ℓ2) with 2–5 atoms, together with a hull
/// vertex (the atom farthest from the centroid) and its weight.
pub fn vertex_instance<R: Rng>(rng: &mut R) -> (DiscreteMeasure, Point, f64) {
    let dim = rng.random_range(2..=3);
    let space = Space::euclidean(dim);
    let n = rng.random_range(2..=5);
    let m = random_normed_measure(rng, &space, n, 1.0);
    let c: Vec<f64> = (0..dim)
        .map(|k| m.points().map(|p| p.coords().expect("normed")[k]).sum::<f64>() / n as f64)
        .collect();
    let c = Point::Coords(c);
    let far = m
        .atoms()
        .iter()
        .max_by(|a, b| {
            space
                .distance(&a.point, &c)
                .expect("same space")
                .total_cmp(&space.distance(&b.point, &c).expect("same space"))
        })
        .expect("nonempty");
    let (p, w) = (far.point.clone(), far.weight);
    (m, p, w)
}

/// Three points at mutual distance 1/3 with `μ = ½δ₀ + ½δ₁` and
/// `ν = ½δ₁ + ½δ₂`.
pub fn three_point_example() -> (Space, DiscreteMeasure, DiscreteMeasure) {
    let t = 1.0 / 3.0;
    let space = Space::finite(vec![vec![0.0, t, t], vec![t, 0.0, t], vec![t, t, 0.0]]).expect("valid metric");
    let mu = DiscreteMeasure::new(space.clone(), vec![Atom::new(0usize, 0.5), Atom::new(1usize, 0.5)]).expect("valid");
    let nu = DiscreteMeasure::new(space.clone(), vec![Atom::new(1usize, 0.5), Atom::new(2usize, 0.5)]).expect("valid");
    (space, mu, nu)
}
