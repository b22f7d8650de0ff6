//! Empirical measures drawn from a discrete target.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::measure::{make_measure, Atom, DiscreteMeasure};
use crate::random::rng;

/// `n` i.i.d. draws from `target`, each of weight `1/n`, duplicates merged.
/// Atoms appear in the target's order.
pub fn empirical_measure(target: &DiscreteMeasure, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    let dist = WeightedIndex::new(target.weights()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut r = rng(seed);
    let mut counts = vec![0usize; target.len()];
    for _ in 0..n {
        counts[dist.sample(&mut r)] += 1;
    }
    let atoms = target
        .atoms()
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(a, &c)| Atom::new(a.point.clone(), c as f64 / n as f64))
        .collect();
    make_measure(target.space().clone(), atoms, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpmetric::{lp_distance, witness, Method};
    use crate::space::Space;

    fn coin() -> DiscreteMeasure {
        DiscreteMeasure::new(
            Space::euclidean(1),
            vec![Atom::new(vec![0.0], 0.5), Atom::new(vec![1.0], 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn single_draw_is_a_dirac() {
        let t = coin();
        let e = empirical_measure(&t, 1, 3).unwrap();
        assert!(e.is_dirac());
        let d = lp_distance(&e, &t, Method::Brute).unwrap().value;
        assert_eq!(d, witness(&t, &e.atoms()[0].point).unwrap());
    }

    #[test]
    fn deterministic_and_valid() {
        let t = coin();
        assert_eq!(empirical_measure(&t, 50, 9).unwrap(), empirical_measure(&t, 50, 9).unwrap());
        assert!(empirical_measure(&t, 0, 1).is_err());
        let e = empirical_measure(&t, 1000, 1).unwrap();
        assert!(lp_distance(&e, &t, Method::Flow).unwrap().value < 0.1);
    }
}
