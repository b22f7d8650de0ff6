//! Witness profiles along exposing rays.
//!
//! If `x̂` is a vertex atom of weight `λ̂` and the ray exposes it, the
//! `s`-witness along the ray is
//!
//! ```text
//! W(t) = s            for t ≥ s
//!        t            for s(1 − λ̂) < t < s
//!        s(1 − λ̂)     on a plateau ending at t = s(1 − λ̂)
//! ```
//!
//! so the breakpoint `t*` where `W(t) = t` begins reveals `λ̂ = 1 − t*/s`.

use crate::error::{Error, Result};
use crate::lpmetric::s_witness;
use crate::measure::{Atom, DiscreteMeasure};
use crate::space::Point;

use super::hull::ExposingRay;
use super::oracle::DistanceOracle;
use super::peel::{residual_witness, PeelState};

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_TOL_T: f64 = 1e-8;
/// `W(t) − t` at or below this counts as zero.
pub const BISECTION_TOL_G: f64 = 1e-10;

/// Something that can evaluate an `s`-witness function pointwise.
pub trait WitnessSource {
    fn scale(&self) -> f64;
    fn witness_at(&self, x: &Point) -> Result<f64>;
}

/// Witness of a known measure (`s`-scaled).
#[derive(Debug, Clone)]
pub struct KnownWitness<'a> {
    pub measure: &'a DiscreteMeasure,
    pub s: f64,
}

impl WitnessSource for KnownWitness<'_> {
    fn scale(&self) -> f64 {
        self.s
    }

    fn witness_at(&self, x: &Point) -> Result<f64> {
        s_witness(self.measure, x, self.s)
    }
}

/// `W_ϑ(x) = π(δ_x, ϑ)` through a distance oracle.
pub struct OracleWitness<'a, O: DistanceOracle> {
    pub oracle: &'a O,
}

impl<O: DistanceOracle> WitnessSource for OracleWitness<'_, O> {
    fn scale(&self) -> f64 {
        1.0
    }

    fn witness_at(&self, x: &Point) -> Result<f64> {
        let dirac = DiscreteMeasure::dirac(self.oracle.space().clone(), x.clone())?;
        self.oracle.distance(&dirac)
    }
}

/// `w̃`-witness of the undetected part of the hidden measure, evaluated with
/// distance queries only. The rings are rebuilt for every probe point.
pub struct ResidualOracleWitness<'a, O: DistanceOracle> {
    pub oracle: &'a O,
    pub detected: &'a [Atom],
    pub residual: f64,
}

impl<O: DistanceOracle> WitnessSource for ResidualOracleWitness<'_, O> {
    fn scale(&self) -> f64 {
        self.residual
    }

    fn witness_at(&self, x: &Point) -> Result<f64> {
        let state = PeelState::around(self.oracle.space(), x, self.detected)?;
        Ok(residual_witness(self.oracle, &state)?.value)
    }
}

/// Sampling grid for a profile: `t = 0, step, 2·step, …` up to `extent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub step: f64,
    pub extent: f64,
}

impl ProfileGrid {
    /// 200 steps covering `[0, 1.25·s]`.
    pub fn for_scale(s: f64) -> Self {
        ProfileGrid {
            step: 1.25 * s / 200.0,
            extent: 1.25 * s,
        }
    }

    fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.extent > 0.0) || self.extent / self.step > 1e6 {
            return Err(Error::InvalidParameter(format!(
                "bad profile grid step {} extent {}",
                self.step, self.extent
            )));
        }
        let n = (self.extent / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| k as f64 * self.step).collect())
    }
}

/// Sampled witness along a ray with the fitted plateau.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessProfile {
    pub ray: ExposingRay,
    pub s: f64,
    pub samples: Vec<(f64, f64)>,
    pub plateau_value: f64,
    pub breakpoint: f64,
    pub lambda_hat: f64,
    /// Length of the sampled plateau ending at the breakpoint; a lower bound
    /// for the true plateau length, zero if it falls between grid points.
    pub plateau_length: f64,
}

impl WitnessProfile {
    /// Model value `min(s, max(t, s(1 − λ̂)))`, valid from
    /// `breakpoint − plateau_length` upwards.
    pub fn model(&self, t: f64) -> f64 {
        self.s.min(t.max(self.plateau_value))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,W\n");
        for (t, w) in &self.samples {
            out.push_str(&format!("{},{}\n", crate::fmt_sig(*t), crate::fmt_sig(*w)));
        }
        out
    }
}

/// Samples the witness along `ray` and fits the three-piece shape.
pub fn witness_profile<W: WitnessSource>(
    source: &W,
    ray: &ExposingRay,
    grid: ProfileGrid,
) -> Result<WitnessProfile> {
    let s = source.scale();
    let ts = grid.points()?;
    let samples: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| Ok((t, source.witness_at(&ray.at(t))?)))
        .collect::<Result<_>>()?;

    // The breakpoint comes from the bisection; the sampled profile must
    // follow min(s, t) above it and sit on the plateau just below it. Further
    // down, other atoms may pull the witness lower, so no shape is imposed.
    let plateau = locate_plateau(source, ray)?;
    let tol = grid.step.max(1e-8);
    let mut plateau_length: f64 = 0.0;
    for &(t, w) in samples.iter().rev() {
        if t >= plateau.breakpoint {
            let expected = s.min(t);
            if (w - expected).abs() > tol {
                return Err(Error::ProfileShape(format!("W({t}) = {w}, expected {expected}")));
            }
        } else if (w - plateau.plateau_value).abs() <= tol {
            plateau_length = plateau.breakpoint - t;
        } else {
            break;
        }
    }
    Ok(WitnessProfile {
        ray: ray.clone(),
        s,
        samples,
        plateau_value: plateau.plateau_value,
        breakpoint: plateau.breakpoint,
        lambda_hat: plateau.lambda_hat,
        plateau_length,
    })
}

/// Plateau breakpoint located by bisection on `g(t) = W(t) − t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    /// Infimum of `{t : g(t) = 0}`, to within [`BISECTION_TOL_T`].
    pub breakpoint: f64,
    /// Witness value on the plateau just below the breakpoint.
    pub plateau_value: f64,
    pub lambda_hat: f64,
}

/// Locates the breakpoint on `(0, s]` and reads `λ̂` off the plateau.
///
/// The bisection fixes `t*` to within `1e-8`; `λ̂` is then computed from the
/// witness value at the lower bracket end, which lies on the plateau, and
/// checked against `1 − t*/s`.
pub fn locate_plateau<W: WitnessSource>(source: &W, ray: &ExposingRay) -> Result<Plateau> {
    let s = source.scale();
    let g = |t: f64| -> Result<(f64, f64)> {
        let w = source.witness_at(&ray.at(t))?;
        Ok((w - t, w))
    };
    let (g_top, _) = g(s)?;
    if g_top.abs() > BISECTION_TOL_G {
        return Err(Error::ProfileShape(format!("W(s) − s = {g_top}, expected 0")));
    }
    let (g0, w0) = g(0.0)?;
    if g0 < -BISECTION_TOL_G {
        return Err(Error::ProfileShape(format!("W(0) = {w0} is negative")));
    }
    if g0 <= BISECTION_TOL_G {
        return Ok(Plateau {
            breakpoint: 0.0,
            plateau_value: w0,
            lambda_hat: 1.0,
        });
    }
    let (mut lo, mut hi) = (0.0, s);
    let mut w_lo = w0;
    while hi - lo > BISECTION_TOL_T {
        let mid = 0.5 * (lo + hi);
        let (gm, wm) = g(mid)?;
        if gm > BISECTION_TOL_G {
            lo = mid;
            w_lo = wm;
        } else {
            hi = mid;
        }
    }
    if (w_lo - hi).abs() > 2.0 * BISECTION_TOL_T {
        return Err(Error::ProfileShape(format!(
            "plateau value {w_lo} does not meet the diagonal at t* = {hi}"
        )));
    }
    Ok(Plateau {
        breakpoint: hi,
        plateau_value: w_lo,
        lambda_hat: 1.0 - w_lo / s,
    })
}

/// Weight `λ̂` of the exposed vertex atom.
pub fn plateau_weight<W: WitnessSource>(source: &W, ray: &ExposingRay) -> Result<f64> {
    Ok(locate_plateau(source, ray)?.lambda_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruct::hull::exposing_direction;
    use crate::reconstruct::oracle::HiddenMeasureOracle;
    use crate::space::Space;

    fn quarter_at_origin() -> DiscreteMeasure {
        DiscreteMeasure::new(
            Space::euclidean(2),
            vec![Atom::new(vec![0.0, 0.0], 0.25), Atom::new(vec![2.0, 0.0], 0.75)],
        )
        .unwrap()
    }

    fn left_ray() -> ExposingRay {
        ExposingRay {
            origin: vec![0.0, 0.0],
            direction: vec![-1.0, 0.0],
            functional: None,
        }
    }

    #[test]
    fn profile_of_vertex_atom() {
        let m = quarter_at_origin();
        let oracle = HiddenMeasureOracle::new(m.clone());
        let src = OracleWitness { oracle: &oracle };
        let prof = witness_profile(&src, &left_ray(), ProfileGrid { step: 0.01, extent: 1.5 }).unwrap();
        assert_eq!(prof.plateau_value, 0.75);
        assert_eq!(prof.lambda_hat, 0.25);
        for &(t, w) in &prof.samples {
            assert!((w - 1.0f64.min(t.max(0.75))).abs() <= 1e-12, "t {t}");
        }
        assert!(prof.plateau_length >= 0.74);
        assert!(prof.to_csv().starts_with("t,W\n0,0.75\n"));
    }

    #[test]
    fn profile_of_dirac() {
        let m = DiscreteMeasure::dirac(Space::euclidean(2), vec![0.0, 0.0]).unwrap();
        let src = KnownWitness { measure: &m, s: 1.0 };
        let prof = witness_profile(&src, &left_ray(), ProfileGrid::for_scale(1.0)).unwrap();
        assert_eq!(prof.lambda_hat, 1.0);
        assert_eq!(plateau_weight(&src, &left_ray()).unwrap(), 1.0);
    }

    #[test]
    fn scaled_profile() {
        let m = quarter_at_origin();
        let src = KnownWitness { measure: &m, s: 0.5 };
        let prof = witness_profile(&src, &left_ray(), ProfileGrid::for_scale(0.5)).unwrap();
        assert_eq!(prof.plateau_value, 0.375);
        assert_eq!(prof.lambda_hat, 0.25);
        let p = locate_plateau(&src, &left_ray()).unwrap();
        assert!((p.lambda_hat - 0.25).abs() <= 1e-6);
        assert!((p.breakpoint - 0.375).abs() <= 1e-8);
    }

    #[test]
    fn bisection_weights() {
        let m = quarter_at_origin();
        let oracle = HiddenMeasureOracle::new(m);
        let lam = plateau_weight(&OracleWitness { oracle: &oracle }, &left_ray()).unwrap();
        assert!((lam - 0.25).abs() <= 1e-6);

        let line = Space::euclidean(1);
        let half = DiscreteMeasure::new(line.clone(), vec![Atom::new(vec![0.0], 0.5), Atom::new(vec![1.0], 0.5)])
            .unwrap();
        let ray = exposing_direction(&line, &Point::Coords(vec![0.0]), &[Point::Coords(vec![1.0])]).unwrap();
        let lam = plateau_weight(&KnownWitness { measure: &half, s: 1.0 }, &ray).unwrap();
        assert!((lam - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn non_exposing_ray_is_rejected() {
        // Probing from an interior atom: the profile dips below the plateau.
        let line = Space::euclidean(1);
        let m = DiscreteMeasure::new(
            line,
            vec![Atom::new(vec![-0.3], 0.4), Atom::new(vec![0.0], 0.2), Atom::new(vec![0.3], 0.4)],
        )
        .unwrap();
        let ray = ExposingRay {
            origin: vec![0.0],
            direction: vec![1.0],
            functional: None,
        };
        let src = KnownWitness { measure: &m, s: 1.0 };
        assert!(matches!(
            witness_profile(&src, &ray, ProfileGrid::for_scale(1.0)),
            Err(Error::ProfileShape(_))
        ));
        assert!(matches!(locate_plateau(&src, &ray), Err(Error::ProfileShape(_))));
    }

    #[test]
    fn bad_grid() {
        let m = quarter_at_origin();
        let src = KnownWitness { measure: &m, s: 1.0 };
        assert!(witness_profile(&src, &left_ray(), ProfileGrid { step: 0.0, extent: 1.0 }).is_err());
    }
}
