//! Exact Lévy–Prokhorov distances between finitely supported measures.
//!
//! Two independent algorithms compute the same quantity:
//!
//! * [`lp_distance_bruteforce`] enumerates every nonempty subset `A` of the
//!   support of `mu` and finds the smallest `ε_A` with
//!   `μ(A) ≤ ν({y : d(y, A) ≤ ε_A}) + ε_A` by scanning the sorted levels
//!   `d(y_j, A)`. The distance is `max_A ε_A`.
//! * [`lp_distance_flow`] sweeps the pairwise distances as thresholds. Between
//!   two consecutive thresholds the bipartite edge set is fixed, and the
//!   smallest feasible radius there is `max(t_k, 1 − maxflow_k)`.
//!
//! The `s`-scaled distance `π_s` uses the constraint
//! `s·μ(A) ≤ s·ν(A^ε) + ε`; both algorithms take the scale as a parameter,
//! with `s = 1` giving the ordinary metric.
//!
//! Normed spaces use closed neighborhoods; finite metric spaces use the open
//! neighborhoods of the defining infimum. The two give the same infimum, but
//! [`lp_feasible_at`] answers differently exactly at the boundary.

mod flow;

pub use flow::{FeasibilityNetwork, Neighborhood, FEASIBILITY_TOL};

use crate::error::{Error, Result};
use crate::measure::{support_distance, DiscreteMeasure, DEFAULT_SUPPORT_CAP};
use crate::space::{Point, Space};

/// Distances closer than this are merged into one level of the sweep.
pub const LEVEL_DEDUP_TOL: f64 = 1e-12;

/// Maximum allowed disagreement between the two algorithms under
/// [`Method::Both`].
pub const CROSS_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Brute,
    Flow,
    Both,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "brute" => Ok(Method::Brute),
            "flow" => Ok(Method::Flow),
            "both" => Ok(Method::Both),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    /// `Brute` or `Flow`; `Both` results report the brute value.
    pub method: Method,
    /// Indices into the atoms of `mu` of a subset attaining the maximum
    /// constraint (brute method only).
    pub witness_subset: Option<Vec<usize>>,
    /// The flow value when both algorithms ran.
    pub flow_value: Option<f64>,
}

/// Tunables shared by the distance routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub support_cap: usize,
    pub cross_check_tol: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            support_cap: DEFAULT_SUPPORT_CAP,
            cross_check_tol: CROSS_CHECK_TOL,
        }
    }
}

fn neighborhood(space: &Space) -> Neighborhood {
    if space.is_normed() {
        Neighborhood::Closed
    } else {
        Neighborhood::Open
    }
}

fn check_scale(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("scale s = {s} must be positive")));
    }
    Ok(())
}

/// Sorted distance levels with cumulative mass: `(r_k, ν({d ≤ r_k}))`.
/// Levels within [`LEVEL_DEDUP_TOL`] of each other are merged, keeping the
/// largest distance as the representative.
fn cumulative_levels(mut pairs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    let mut mass = 0.0;
    for (d, w) in pairs {
        mass += w;
        match levels.last_mut() {
            Some(last) if d - last.0 <= LEVEL_DEDUP_TOL => *last = (d, mass),
            _ => levels.push((d, mass)),
        }
    }
    levels
}

/// Smallest `ε ≥ 0` with `s·m ≤ s·c(ε) + ε`, where `c` is the step function
/// given by `levels`. Never exceeds `s·m`.
fn min_radius(levels: &[(f64, f64)], m: f64, s: f64) -> f64 {
    levels
        .iter()
        .map(|&(r, c)| r.max(s * (m - c)))
        .fold(s * m, f64::min)
}

/// Subset enumeration. `s` is the scale of `π_s`.
fn brute_scaled(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    s: f64,
    cap: usize,
) -> Result<DistanceResult> {
    mu.ensure_same_space(nu)?;
    let n = mu.len();
    if n > cap {
        return Err(Error::SupportCapExceeded { size: n, cap });
    }
    if mu.same_measure(nu) {
        return Ok(DistanceResult {
            value: 0.0,
            method: Method::Brute,
            witness_subset: None,
            flow_value: None,
        });
    }
    let space = mu.space();
    let dist: Vec<Vec<f64>> = mu
        .points()
        .map(|x| nu.points().map(|y| space.dist_unchecked(x, y)).collect())
        .collect();
    let nu_w: Vec<f64> = nu.weights().collect();
    let mu_w: Vec<f64> = mu.weights().collect();

    let mut best = (f64::NEG_INFINITY, 0usize);
    for mask in 1usize..(1 << n) {
        let members = (0..n).filter(|i| mask >> i & 1 == 1);
        let m: f64 = members.clone().map(|i| mu_w[i]).sum();
        let pairs: Vec<(f64, f64)> = (0..nu_w.len())
            .map(|j| {
                let d = members.clone().map(|i| dist[i][j]).fold(f64::INFINITY, f64::min);
                (d, nu_w[j])
            })
            .collect();
        let eps = min_radius(&cumulative_levels(pairs), m, s);
        if eps > best.0 {
            best = (eps, mask);
        }
    }
    let subset = (0..n).filter(|i| best.1 >> i & 1 == 1).collect();
    Ok(DistanceResult {
        value: best.0.min(s),
        method: Method::Brute,
        witness_subset: Some(subset),
        flow_value: None,
    })
}

/// Threshold sweep with max-flow feasibility. `s` is the scale of `π_s`.
fn flow_scaled(mu: &DiscreteMeasure, nu: &DiscreteMeasure, s: f64) -> Result<DistanceResult> {
    mu.ensure_same_space(nu)?;
    let done = |value: f64| DistanceResult {
        value,
        method: Method::Flow,
        witness_subset: None,
        flow_value: None,
    };
    if mu.same_measure(nu) {
        return Ok(done(0.0));
    }
    let space = mu.space();
    let dist: Vec<Vec<f64>> = mu
        .points()
        .map(|x| nu.points().map(|y| space.dist_unchecked(x, y)).collect())
        .collect();

    let mut raw: Vec<f64> = dist.iter().flatten().copied().collect();
    raw.push(0.0);
    let thresholds: Vec<f64> = cumulative_levels(raw.into_iter().map(|d| (d, 0.0)).collect())
        .into_iter()
        .map(|(d, _)| d)
        .collect();

    // Edges present on the interval starting at thresholds[k]: d ≤ t_k.
    // For open neighborhoods the same edge set holds on (t_k, t_{k+1}].
    let scaled_deficiency = |k: usize| {
        s * flow::deficiency(mu, nu, &dist, thresholds[k], Neighborhood::Closed)
    };

    // s·D_k is nonincreasing and t_k increasing: find the first crossing.
    // With every edge present the flow saturates, so the last index crosses.
    let (mut lo, mut hi) = (0usize, thresholds.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if scaled_deficiency(mid) <= thresholds[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let value = if lo == 0 {
        thresholds[0]
    } else {
        thresholds[lo].min(scaled_deficiency(lo - 1))
    };
    Ok(done(value.min(s)))
}

/// Lévy–Prokhorov distance by the requested method.
pub fn lp_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure, method: Method) -> Result<DistanceResult> {
    lp_distance_with(mu, nu, method, &LpOptions::default())
}

pub fn lp_distance_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    method: Method,
    opts: &LpOptions,
) -> Result<DistanceResult> {
    scaled_with(mu, nu, 1.0, method, opts)
}

fn scaled_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    s: f64,
    method: Method,
    opts: &LpOptions,
) -> Result<DistanceResult> {
    match method {
        Method::Brute => brute_scaled(mu, nu, s, opts.support_cap),
        Method::Flow => flow_scaled(mu, nu, s),
        Method::Both => {
            let brute = brute_scaled(mu, nu, s, opts.support_cap)?;
            let flow = flow_scaled(mu, nu, s)?;
            // A negative tolerance fails every comparison (used by self-test
            // fault injection).
            if !((brute.value - flow.value).abs() <= opts.cross_check_tol) {
                return Err(Error::CrossCheckDivergence {
                    brute: brute.value,
                    flow: flow.value,
                });
            }
            Ok(DistanceResult {
                flow_value: Some(flow.value),
                ..brute
            })
        }
    }
}

/// Subset-enumeration algorithm with the default support cap.
pub fn lp_distance_bruteforce(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DistanceResult> {
    brute_scaled(mu, nu, 1.0, DEFAULT_SUPPORT_CAP)
}

/// Polynomial threshold-sweep algorithm.
pub fn lp_distance_flow(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DistanceResult> {
    flow_scaled(mu, nu, 1.0)
}

/// Decision form: does every subset constraint hold at radius `eps`?
pub fn lp_feasible_at(mu: &DiscreteMeasure, nu: &DiscreteMeasure, eps: f64) -> Result<bool> {
    mu.ensure_same_space(nu)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {eps} must be positive")));
    }
    let space = mu.space();
    let dist: Vec<Vec<f64>> = mu
        .points()
        .map(|x| nu.points().map(|y| space.dist_unchecked(x, y)).collect())
        .collect();
    let flow = FeasibilityNetwork::new(mu, nu, &dist, eps, neighborhood(space)).max_flow();
    Ok(flow >= 1.0 - eps - FEASIBILITY_TOL)
}

/// `π_s(μ, ν)`; subset enumeration when the support of `mu` is within the
/// default cap, max-flow sweep otherwise.
pub fn s_lp_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure, s: f64) -> Result<f64> {
    check_scale(s)?;
    let method = if mu.len() <= DEFAULT_SUPPORT_CAP {
        Method::Brute
    } else {
        Method::Flow
    };
    Ok(scaled_with(mu, nu, s, method, &LpOptions::default())?.value)
}

pub fn s_lp_distance_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    s: f64,
    method: Method,
    opts: &LpOptions,
) -> Result<DistanceResult> {
    check_scale(s)?;
    scaled_with(mu, nu, s, method, opts)
}

/// Witness function `W_μ(x) = π(δ_x, μ)`.
pub fn witness(mu: &DiscreteMeasure, x: &Point) -> Result<f64> {
    s_witness(mu, x, 1.0)
}

/// `s`-witness function `W_{s,μ}(x) = π_s(δ_x, μ)`.
///
/// Only the subset `{x}` constrains a Dirac measure, so this is one level
/// scan over the distances from `x`; it performs the same arithmetic as the
/// brute-force algorithm on `(δ_x, μ)`.
pub fn s_witness(mu: &DiscreteMeasure, x: &Point, s: f64) -> Result<f64> {
    check_scale(s)?;
    let space = mu.space();
    space.check_point(x)?;
    if mu.is_dirac() && &mu.atoms()[0].point == x {
        return Ok(0.0);
    }
    let pairs = mu
        .atoms()
        .iter()
        .map(|a| (space.dist_unchecked(x, &a.point), a.weight))
        .collect();
    Ok(min_radius(&cumulative_levels(pairs), 1.0, s).min(s))
}

/// `π(δ_x, δ_y) = min(1, d(x, y))`.
pub fn dirac_distance(space: &Space, x: &Point, y: &Point) -> Result<f64> {
    Ok(space.distance(x, y)?.min(1.0))
}

/// Whether the supports are at distance at least one, which characterizes
/// `π(μ, ν) = 1`.
pub fn is_unit_distant(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<bool> {
    Ok(support_distance(mu, nu)? >= 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    fn line() -> Space {
        Space::euclidean(1)
    }

    fn pt(x: f64) -> Point {
        Point::Coords(vec![x])
    }

    fn dirac(x: f64) -> DiscreteMeasure {
        DiscreteMeasure::dirac(line(), pt(x)).unwrap()
    }

    fn half_half() -> DiscreteMeasure {
        DiscreteMeasure::new(line(), vec![Atom::new(pt(0.0), 0.5), Atom::new(pt(1.0), 0.5)]).unwrap()
    }

    fn three_point() -> Space {
        let t = 1.0 / 3.0;
        Space::finite(vec![vec![0.0, t, t], vec![t, 0.0, t], vec![t, t, 0.0]]).unwrap()
    }

    /// Independent check of a radius: every subset constraint, closed balls.
    fn all_subsets_hold(mu: &DiscreteMeasure, nu: &DiscreteMeasure, eps: f64) -> bool {
        let sp = mu.space();
        let n = mu.len();
        (1usize..1 << n).all(|mask| {
            let a: Vec<&Atom> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &mu.atoms()[i]).collect();
            let m: f64 = a.iter().map(|x| x.weight).sum();
            let hood: f64 = nu
                .atoms()
                .iter()
                .filter(|y| a.iter().any(|x| sp.dist_unchecked(&x.point, &y.point) <= eps))
                .map(|y| y.weight)
                .sum();
            m <= hood + eps + 1e-12
        })
    }

    #[test]
    fn identity_is_zero() {
        let mu = half_half();
        for method in [Method::Brute, Method::Flow, Method::Both] {
            assert_eq!(lp_distance(&mu, &mu, method).unwrap().value, 0.0);
        }
    }

    #[test]
    fn half_half_versus_dirac() {
        let r = lp_distance(&half_half(), &dirac(0.0), Method::Both).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.flow_value, Some(0.5));
        let subset = r.witness_subset.unwrap();
        assert!(!subset.is_empty());
        // The reported subset attains the maximum.
        let b = lp_distance_bruteforce(&half_half(), &dirac(0.0)).unwrap();
        assert_eq!(b.value, 0.5);
        assert_eq!(lp_distance_flow(&half_half(), &dirac(0.0)).unwrap().value, 0.5);
        assert_eq!(lp_distance_bruteforce(&dirac(0.0), &half_half()).unwrap().value, 0.5);
    }

    #[test]
    fn far_supports_give_one() {
        let r = lp_distance(&dirac(0.0), &dirac(1.0), Method::Both).unwrap();
        assert_eq!(r.value, 1.0);
        let r = lp_distance(&dirac(0.0), &dirac(7.5), Method::Both).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn uniform_three_point_example() {
        let s = three_point();
        let mu = DiscreteMeasure::new(s.clone(), vec![Atom::new(0usize, 0.5), Atom::new(1usize, 0.5)])
            .unwrap();
        let d0 = DiscreteMeasure::dirac(s, 0usize).unwrap();
        let r = lp_distance_bruteforce(&d0, &mu).unwrap();
        assert_eq!(r.value, 1.0 / 3.0);
        assert_eq!(lp_distance_flow(&d0, &mu).unwrap().value, 1.0 / 3.0);
    }

    #[test]
    fn cap_enforced() {
        let atoms: Vec<Atom> = (0..13).map(|i| Atom::new(pt(i as f64), 1.0 / 13.0)).collect();
        let mu = DiscreteMeasure::new(line(), atoms).unwrap();
        assert!(matches!(
            lp_distance_bruteforce(&mu, &dirac(0.0)),
            Err(Error::SupportCapExceeded { size: 13, cap: 12 })
        ));
        let opts = LpOptions {
            support_cap: 13,
            ..LpOptions::default()
        };
        let r = lp_distance_with(&mu, &dirac(0.0), Method::Both, &opts).unwrap();
        assert!((r.value - lp_distance_flow(&mu, &dirac(0.0)).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn space_mismatch() {
        let other = DiscreteMeasure::dirac(Space::euclidean(2), vec![0.0, 0.0]).unwrap();
        for method in [Method::Brute, Method::Flow] {
            assert_eq!(lp_distance(&dirac(0.0), &other, method).unwrap_err(), Error::SpaceMismatch);
        }
    }

    #[test]
    fn feasibility_matches_subset_checking() {
        let mu = half_half();
        let nu = dirac(0.0);
        assert!(!lp_feasible_at(&mu, &nu, 0.4).unwrap());
        assert!(!all_subsets_hold(&mu, &nu, 0.4));
        assert!(lp_feasible_at(&mu, &nu, 0.5).unwrap());
        assert!(all_subsets_hold(&mu, &nu, 0.5));
        assert!(lp_feasible_at(&mu, &nu, 1.0).unwrap());
        assert!(lp_feasible_at(&dirac(0.0), &dirac(9.0), 1.0).unwrap());
        assert!(lp_feasible_at(&mu, &nu, 0.0).is_err());
    }

    #[test]
    fn open_neighborhoods_on_finite_spaces() {
        let s = three_point();
        let d0 = DiscreteMeasure::dirac(s.clone(), 0usize).unwrap();
        let d1 = DiscreteMeasure::dirac(s, 1usize).unwrap();
        // The infimum 1/3 is not attained with open balls.
        assert!(!lp_feasible_at(&d0, &d1, 1.0 / 3.0).unwrap());
        assert!(lp_feasible_at(&d0, &d1, 1.0 / 3.0 + 1e-9).unwrap());
        assert_eq!(lp_distance(&d0, &d1, Method::Both).unwrap().value, 1.0 / 3.0);
    }

    #[test]
    fn witness_values() {
        let mu = half_half();
        assert_eq!(witness(&mu, &pt(0.0)).unwrap(), 0.5);
        assert!((witness(&mu, &pt(-0.7)).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(witness(&mu, &pt(-1.2)).unwrap(), 1.0);
        assert_eq!(witness(&dirac(2.0), &pt(2.0)).unwrap(), 0.0);
        for x in [-1.2, -0.7, 0.0, 0.3, 0.5, 2.0] {
            let b = lp_distance_bruteforce(&dirac(x), &mu).unwrap().value;
            assert_eq!(witness(&mu, &pt(x)).unwrap(), b);
        }
    }

    #[test]
    fn three_point_witnesses() {
        let s = three_point();
        let mu = DiscreteMeasure::new(s.clone(), vec![Atom::new(0usize, 0.5), Atom::new(1usize, 0.5)])
            .unwrap();
        for i in 0..3usize {
            assert_eq!(witness(&mu, &Point::Index(i)).unwrap(), 1.0 / 3.0);
        }
    }

    #[test]
    fn scaled_distances() {
        assert_eq!(s_lp_distance(&dirac(0.0), &dirac(2.0), 0.5).unwrap(), 0.5);
        assert_eq!(s_lp_distance(&dirac(0.0), &dirac(0.2), 0.5).unwrap(), 0.2);
        let r = s_lp_distance_with(&dirac(0.0), &dirac(0.2), 0.5, Method::Both, &LpOptions::default())
            .unwrap();
        assert_eq!(r.value, 0.2);
        assert!(s_lp_distance(&dirac(0.0), &dirac(1.0), 0.0).is_err());
        assert!(s_lp_distance(&dirac(0.0), &dirac(1.0), -1.0).is_err());
        assert_eq!(
            s_lp_distance(&half_half(), &dirac(0.0), 1.0).unwrap(),
            lp_distance_bruteforce(&half_half(), &dirac(0.0)).unwrap().value
        );
    }

    #[test]
    fn scaled_witness() {
        let mu = half_half();
        assert_eq!(s_witness(&mu, &pt(0.0), 0.75).unwrap(), 0.375);
        assert_eq!(s_witness(&dirac(1.0), &pt(1.0), 0.3).unwrap(), 0.0);
        assert_eq!(s_witness(&mu, &pt(-0.8), 0.75).unwrap(), 0.75);
        assert_eq!(s_witness(&mu, &pt(5.0), 0.25).unwrap(), 0.25);
    }

    #[test]
    fn unit_distance_and_dirac_formula() {
        assert!(is_unit_distant(&dirac(0.0), &dirac(1.5)).unwrap());
        assert!(!is_unit_distant(&dirac(0.0), &dirac(0.99)).unwrap());
        assert!((lp_distance_flow(&dirac(0.0), &dirac(0.99)).unwrap().value - 0.99).abs() < 1e-15);
        assert!(is_unit_distant(&dirac(0.0), &dirac(1.0)).unwrap());
        assert_eq!(lp_distance_flow(&dirac(0.0), &dirac(1.0)).unwrap().value, 1.0);

        let sp = line();
        assert_eq!(dirac_distance(&sp, &pt(0.0), &pt(0.0)).unwrap(), 0.0);
        assert_eq!(dirac_distance(&sp, &pt(0.0), &pt(0.4)).unwrap(), 0.4);
        assert_eq!(dirac_distance(&sp, &pt(0.0), &pt(3.0)).unwrap(), 1.0);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("BOTH".parse::<Method>().unwrap(), Method::Both);
        assert!("exact".parse::<Method>().is_err());
    }
}
