use levy_prokhorov::random::{random_normed_measure, random_weights, rng, InstanceRng};
use levy_prokhorov::reconstruct::{
    exposing_direction, peel_reconstruct, plateau_weight, pr_chain, residual_witness, witness_profile,
    HiddenMeasureOracle, KnownWitness, OracleWitness, PeelState, ProfileGrid, Ring,
};
use levy_prokhorov::{s_witness, Atom, DiscreteMeasure, NormP, Point, Space};
use rand::Rng;

/// Point at distance `r` from `x` in a random direction (ℓ2).
fn on_sphere(r: &mut InstanceRng, x: &[f64], radius: f64) -> Vec<f64> {
    let (v, n) = loop {
        let v: Vec<f64> = x.iter().map(|_| r.random_range(-1.0..1.0)).collect();
        let n = NormP::Finite(2.0).norm(&v);
        if n > 1e-3 {
            break (v, n);
        }
    };
    x.iter().zip(&v).map(|(a, b)| a + radius * b / n).collect()
}

struct Config {
    space: Space,
    probe: Point,
    rings: Vec<Ring>,
    residual: DiscreteMeasure,
    residual_weight: f64,
    hidden: DiscreteMeasure,
}

fn ring_config(seed: u64) -> Config {
    let mut r = rng(seed);
    let dim = r.random_range(1..=3);
    let space = Space::euclidean(dim);
    let x: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
    let k = r.random_range(1..=3);
    let mut radii: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.5)).collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-3);

    let n_residual = r.random_range(1..=4);
    let max_per_ring = if dim == 1 { 2 } else { 3 };
    let counts: Vec<usize> = radii.iter().map(|_| r.random_range(1..=max_per_ring)).collect();
    let total_atoms: usize = counts.iter().sum::<usize>() + n_residual;
    let weights = random_weights(&mut r, total_atoms);

    let mut w = weights.into_iter();
    let mut rings = Vec::new();
    let mut all = Vec::new();
    for (&rad, &c) in radii.iter().zip(&counts) {
        let mut atoms = Vec::new();
        for _ in 0..c {
            let p = loop {
                let p = on_sphere(&mut r, &x, rad);
                if atoms.iter().all(|a: &Atom| a.point != Point::Coords(p.clone())) {
                    break p;
                }
            };
            let a = Atom::new(p, w.next().unwrap());
            all.push(a.clone());
            atoms.push(a);
        }
        rings.push(Ring { radius: rad, atoms });
    }
    let rest: Vec<f64> = w.collect();
    let residual_weight: f64 = rest.iter().sum();
    let mut residual_atoms = Vec::new();
    for (i, wt) in rest.into_iter().enumerate() {
        // Occasionally put residual mass on the probe itself.
        let p = if i == 0 && r.random_bool(0.2) {
            x.clone()
        } else {
            (0..dim).map(|_| r.random_range(-2.0..2.0)).collect()
        };
        all.push(Atom::new(p.clone(), wt));
        residual_atoms.push(Atom::new(p, wt / residual_weight));
    }
    // Renormalize exactly: the residual measure must be a probability.
    let sum: f64 = residual_atoms.iter().map(|a| a.weight).sum();
    let last = residual_atoms.len() - 1;
    residual_atoms[last].weight -= sum - 1.0;
    let total: f64 = all.iter().map(|a| a.weight).sum();
    let last = all.len() - 1;
    all[last].weight -= total - 1.0;

    Config {
        probe: Point::Coords(x),
        residual: DiscreteMeasure::new(space.clone(), residual_atoms).unwrap(),
        hidden: DiscreteMeasure::new(space.clone(), all).unwrap(),
        space,
        rings,
        residual_weight,
    }
}

#[test]
fn residual_witness_matches_direct_value() {
    let mut checked = 0;
    for seed in 0..600 {
        let c = ring_config(seed);
        let state = PeelState::new(c.space.clone(), c.probe.clone(), c.rings.clone()).unwrap();
        let oracle = HiddenMeasureOracle::new(c.hidden.clone());
        let rw = residual_witness(&oracle, &state).unwrap();
        let direct = s_witness(&c.residual, &c.probe, c.residual_weight).unwrap();
        assert!(
            (rw.value - direct).abs() <= 1e-9,
            "seed {seed}: oracle-only {} vs direct {direct}",
            rw.value
        );
        let chain = pr_chain(&oracle, &state).unwrap();
        for r in 1..chain.len() {
            assert!(!chain[r] || chain[r - 1], "seed {seed}: (P_r) chain {chain:?}");
        }
        checked += 1;
    }
    assert!(checked >= 500);
}

fn vertex_measure(seed: u64) -> (DiscreteMeasure, Point, f64) {
    let mut r = rng(seed);
    let dim = r.random_range(2..=3);
    let space = Space::euclidean(dim);
    let n = r.random_range(2..=5);
    let m = random_normed_measure(&mut r, &space, n, 1.0);
    // The atom farthest from the centroid is always a hull vertex.
    let c: Vec<f64> = (0..dim)
        .map(|k| m.points().map(|p| p.coords().unwrap()[k]).sum::<f64>() / n as f64)
        .collect();
    let cp = Point::Coords(c);
    let far = m
        .atoms()
        .iter()
        .max_by(|a, b| {
            space
                .distance(&a.point, &cp)
                .unwrap()
                .total_cmp(&space.distance(&b.point, &cp).unwrap())
        })
        .unwrap();
    (m.clone(), far.point.clone(), far.weight)
}

#[test]
fn plateau_recovers_vertex_weight() {
    for seed in 0..60 {
        let (m, vertex, weight) = vertex_measure(seed);
        let others: Vec<Point> = m.points().filter(|p| **p != vertex).cloned().collect();
        let ray = exposing_direction(m.space(), &vertex, &others).unwrap();
        let oracle = HiddenMeasureOracle::new(m.clone());
        let lam = plateau_weight(&OracleWitness { oracle: &oracle }, &ray).unwrap();
        assert!((lam - weight).abs() <= 1e-6, "seed {seed}: {lam} vs {weight}");

        let prof = witness_profile(&KnownWitness { measure: &m, s: 1.0 }, &ray, ProfileGrid::for_scale(1.0)).unwrap();
        assert!((prof.lambda_hat - weight).abs() <= 1e-6);
    }
}

#[test]
fn reconstruction_round_trip() {
    for seed in 0..40 {
        let mut r = rng(1000 + seed);
        let dim = r.random_range(2..=3);
        let n = r.random_range(1..=6);
        let hidden = random_normed_measure(&mut r, &Space::euclidean(dim), n, 1.0);
        let oracle = HiddenMeasureOracle::new(hidden.clone());
        let support: Vec<Point> = hidden.points().cloned().collect();
        let rec = peel_reconstruct(&oracle, &support).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(rec.max_error_against(&hidden) <= 1e-6, "seed {seed}");
        assert_eq!(rec.stages.len(), n - 1);
    }
}
