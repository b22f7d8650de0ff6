//! Partially peeled measures and the residual witness.
//!
//! Around a probe point `x`, the atoms already detected are grouped into
//! rings of equal distance `ρ_1 > ρ_2 > … > ρ_k > 0`. The measure `η_r` keeps
//! the atoms of the outer `r` rings and parks the remaining mass at `x`.
//! Property `(P_r)` is `π(η_{r−1}, ϑ) ≤ ρ_r`. The `w̃`-witness of the
//! undetected remainder at `x` is then `π(η_r, ϑ)` for the last `r` such that
//! `x` satisfies `(P_1), …, (P_r)` (with `η_0 = δ_x`), so it is available from
//! distance queries alone.

use crate::error::{Error, Result};
use crate::measure::{make_measure, Atom, DiscreteMeasure};
use crate::space::{Point, Space};

use super::oracle::DistanceOracle;

/// Detected atoms at distances within this of each other share a ring.
pub const RING_TOL: f64 = 1e-12;

/// Slack on the `(P_r)` comparison.
pub const PR_TOL: f64 = 1e-12;

/// Residual weights at or below this count as empty.
pub const EMPTY_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    pub radius: f64,
    pub atoms: Vec<Atom>,
}

impl Ring {
    pub fn weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

/// Detected atoms grouped by distance from a probe point.
#[derive(Debug, Clone, PartialEq)]
pub struct PeelState {
    space: Space,
    probe: Point,
    rings: Vec<Ring>,
    residual: f64,
}

impl PeelState {
    /// Validates explicitly given rings.
    pub fn new(space: Space, probe: Point, rings: Vec<Ring>) -> Result<Self> {
        space.check_point(&probe)?;
        for (j, ring) in rings.iter().enumerate() {
            if !(ring.radius > 0.0) {
                return Err(Error::InvalidPeelState(format!("ring {j} has radius {}", ring.radius)));
            }
            if j > 0 && !(ring.radius < rings[j - 1].radius) {
                return Err(Error::InvalidPeelState("ring radii must strictly decrease".into()));
            }
            if ring.atoms.is_empty() {
                return Err(Error::InvalidPeelState(format!("ring {j} is empty")));
            }
            for a in &ring.atoms {
                space.check_point(&a.point)?;
                if !(a.weight > 0.0) {
                    return Err(Error::NonPositiveWeight(a.weight));
                }
                let d = space.dist_unchecked(&probe, &a.point);
                if (d - ring.radius).abs() > RING_TOL {
                    return Err(Error::InvalidPeelState(format!(
                        "atom {} lies at {d}, not on ring radius {}",
                        a.point, ring.radius
                    )));
                }
            }
        }
        let detected: f64 = rings.iter().map(Ring::weight).sum();
        let residual = 1.0 - detected;
        if residual < -1e-9 {
            return Err(Error::InvalidPeelState(format!("detected mass {detected} exceeds 1")));
        }
        Ok(PeelState {
            space,
            probe,
            rings,
            residual: residual.max(0.0),
        })
    }

    /// Groups `detected` atoms into rings around `probe`.
    pub fn around(space: &Space, probe: &Point, detected: &[Atom]) -> Result<Self> {
        space.check_point(probe)?;
        let mut by_dist: Vec<(f64, &Atom)> = detected
            .iter()
            .map(|a| (space.dist_unchecked(probe, &a.point), a))
            .collect();
        by_dist.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut rings: Vec<Ring> = Vec::new();
        for (d, a) in by_dist {
            if d <= 0.0 {
                return Err(Error::InvalidPeelState(format!(
                    "probe coincides with detected atom {}",
                    a.point
                )));
            }
            match rings.last_mut() {
                Some(r) if r.radius - d <= RING_TOL => r.atoms.push(a.clone()),
                _ => rings.push(Ring {
                    radius: d,
                    atoms: vec![a.clone()],
                }),
            }
        }
        PeelState::new(space.clone(), probe.clone(), rings)
    }

    pub fn probe(&self) -> &Point {
        &self.probe
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    /// Number of rings `k`.
    pub fn depth(&self) -> usize {
        self.rings.len()
    }

    /// Undetected mass `w̃ = 1 − Σ w_j`.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// `η_r`: atoms of the outer `r` rings plus the remaining mass at the probe.
pub fn build_eta(state: &PeelState, r: usize) -> Result<DiscreteMeasure> {
    let k = state.depth();
    if r > k {
        return Err(Error::InvalidParameter(format!("r = {r} exceeds ring count {k}")));
    }
    let mut atoms: Vec<Atom> = state.rings[..r].iter().flat_map(|g| g.atoms.iter().cloned()).collect();
    let kept: f64 = atoms.iter().map(|a| a.weight).sum();
    let coefficient = 1.0 - kept;
    if coefficient <= EMPTY_RESIDUAL_TOL {
        return Err(Error::DegenerateEta);
    }
    atoms.push(Atom::new(state.probe.clone(), coefficient));
    make_measure(state.space.clone(), atoms, false)
}

/// `(P_r)`: `π(η_{r−1}, ϑ) ≤ ρ_r`.
pub fn is_pr<O: DistanceOracle>(oracle: &O, state: &PeelState, r: usize) -> Result<bool> {
    let k = state.depth();
    if r == 0 || r > k {
        return Err(Error::InvalidParameter(format!("r = {r} outside 1..={k}")));
    }
    let radius = state.rings[r - 1].radius;
    if radius >= 1.0 {
        return Ok(true);
    }
    let value = oracle.distance(&build_eta(state, r - 1)?)?;
    Ok(value <= radius + PR_TOL)
}

/// Outcome of [`residual_witness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualWitness {
    pub value: f64,
    /// Largest `r` with `(P_1) … (P_r)`; the value is `π(η_r, ϑ)`.
    pub branch: usize,
    /// Set when `w̃ = 0`; the value is then 0 by convention.
    pub empty_residual: bool,
}

/// `W_{w̃, ϑ̃}(x)` from distance queries only.
pub fn residual_witness<O: DistanceOracle>(oracle: &O, state: &PeelState) -> Result<ResidualWitness> {
    if state.residual <= EMPTY_RESIDUAL_TOL {
        return Ok(ResidualWitness {
            value: 0.0,
            branch: state.depth(),
            empty_residual: true,
        });
    }
    let k = state.depth();
    for r in 0..=k {
        let value = oracle.distance(&build_eta(state, r)?)?;
        if r == k || value > state.rings[r].radius + PR_TOL {
            return Ok(ResidualWitness {
                value,
                branch: r,
                empty_residual: false,
            });
        }
    }
    unreachable!("loop returns at r = k")
}

/// Truth values of `(P_1), …, (P_k)`, evaluated independently of each other.
pub fn pr_chain<O: DistanceOracle>(oracle: &O, state: &PeelState) -> Result<Vec<bool>> {
    (1..=state.depth()).map(|r| is_pr(oracle, state, r)).collect()
}
