//! Self-test harness: seeded property suites with per-suite counts and worst
//! deviations. Output is a pure function of the options.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{gap_pair, lp_pair, rescaled, ring_instance, three_point_example, vertex_instance};
use crate::isometry::{check_invariance, pushforward, random_affine_isometry, INVARIANCE_TOL};
use crate::lpmetric::{
    dirac_distance, lp_distance, lp_distance_with, s_lp_distance_with, s_witness, witness, LpOptions, Method,
};
use crate::random::{random_measure, random_normed_measure, random_point, rng, InstanceRng};
use crate::reconstruct::{
    exposing_direction, peel_reconstruct, plateau_weight, pr_chain, residual_witness, HiddenMeasureOracle,
    OracleWitness, PeelState,
};
use crate::space::{Point, Space};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    pub cases: usize,
    pub seed: u64,
    /// Disables the brute/flow cross-check tolerance so every comparison
    /// fails; checks that the harness reports failures.
    pub inject_fault: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            cases: 50,
            seed: 0,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub worst_deviation: f64,
    pub tolerance: f64,
    /// First failure, if any.
    pub note: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub suites: Vec<SuiteReport>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(
                f,
                "{:<22} {} cases={} failures={} worst={} tol={}",
                s.name,
                if s.passed() { "PASS" } else { "FAIL" },
                s.cases,
                s.failures,
                crate::fmt_sig(s.worst_deviation),
                crate::fmt_sig(s.tolerance),
            )?;
            if let Some(n) = &s.note {
                writeln!(f, "    first failure: {n}")?;
            }
        }
        write!(f, "{}", if self.passed() { "all suites passed" } else { "FAILED" })
    }
}

/// Accumulates one suite. A case yields a deviation or an error; errors
/// count as failures.
struct Suite {
    report: SuiteReport,
}

impl Suite {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Suite {
            report: SuiteReport {
                name,
                cases: 0,
                failures: 0,
                worst_deviation: 0.0,
                tolerance,
                note: None,
            },
        }
    }

    fn record(&mut self, case: usize, outcome: Result<f64>) {
        let r = &mut self.report;
        r.cases += 1;
        let failure = match outcome {
            Ok(dev) => {
                r.worst_deviation = r.worst_deviation.max(dev);
                (!(dev <= r.tolerance)).then(|| format!("case {case}: deviation {}", crate::fmt_sig(dev)))
            }
            Err(e) => Some(format!("case {case}: {e}")),
        };
        if let Some(msg) = failure {
            r.failures += 1;
            r.note.get_or_insert(msg);
        }
    }

    fn finish(self) -> SuiteReport {
        self.report
    }
}

fn case_rng(opts: &SelftestOptions, suite: u64, case: usize) -> InstanceRng {
    rng(opts.seed.wrapping_mul(1_000_003).wrapping_add(suite << 32).wrapping_add(case as u64))
}

pub fn run_selftest(opts: &SelftestOptions) -> Result<SelftestReport> {
    if opts.cases == 0 {
        return Err(Error::InvalidParameter("need at least one case".into()));
    }
    let lp_opts = LpOptions {
        cross_check_tol: if opts.inject_fault { -1.0 } else { LpOptions::default().cross_check_tol },
        ..LpOptions::default()
    };
    let n = opts.cases;
    let mut suites = Vec::new();

    // Brute force and max-flow agree.
    let mut s = Suite::new("oracle-equivalence", lp_opts.cross_check_tol.max(0.0));
    for c in 0..n {
        let (mu, nu) = lp_pair(&mut case_rng(opts, 1, c), 8);
        s.record(
            c,
            lp_distance_with(&mu, &nu, Method::Both, &lp_opts)
                .map(|r| (r.value - r.flow_value.expect("both methods ran")).abs()),
        );
    }
    suites.push(s.finish());

    // Symmetry and triangle inequality.
    let mut s = Suite::new("metric-axioms", 1e-9);
    for c in 0..n {
        let mut r = case_rng(opts, 2, c);
        let (mu, nu) = lp_pair(&mut r, 5);
        let rho = random_measure(&mut r, mu.space(), 3, 1.0);
        s.record(c, (|| {
            let d = |a, b| lp_distance(a, b, Method::Flow).map(|r| r.value);
            let (mn, nm) = (d(&mu, &nu)?, d(&nu, &mu)?);
            let (mr, rn) = (d(&mu, &rho)?, d(&rho, &nu)?);
            Ok((mn - nm).abs().max(mn - mr - rn).max(0.0))
        })());
    }
    suites.push(s.finish());

    // Dirac distance formula.
    let mut s = Suite::new("dirac-formula", 1e-12);
    for c in 0..n {
        let mut r = case_rng(opts, 3, c);
        let (mu, _) = lp_pair(&mut r, 1);
        let space = mu.space().clone();
        let (x, y) = (random_point(&mut r, &space, 1.0), random_point(&mut r, &space, 1.0));
        s.record(c, (|| {
            let want = dirac_distance(&space, &x, &y)?;
            let dx = crate::measure::DiscreteMeasure::dirac(space.clone(), x.clone())?;
            let dy = crate::measure::DiscreteMeasure::dirac(space.clone(), y.clone())?;
            Ok((lp_distance(&dx, &dy, Method::Brute)?.value - want).abs())
        })());
    }
    suites.push(s.finish());

    // Support gap ≥ 1 ⟺ distance 1.
    let mut s = Suite::new("unit-distance", 1e-12);
    for c in 0..n {
        let far = c % 2 == 0;
        let g = gap_pair(&mut case_rng(opts, 4, c), far);
        s.record(c, (|| {
            let d = lp_distance(&g.mu, &g.nu, Method::Flow)?.value;
            Ok(if far { (d - 1.0).abs() } else if d < 1.0 { (d - g.bound).max(0.0) } else { 1.0 })
        })());
    }
    suites.push(s.finish());

    // The three-point example: every witness value is 1/3.
    let mut s = Suite::new("three-point-example", 0.0);
    let (space, mu, nu) = three_point_example();
    for (c, x) in (0..3usize).map(Point::Index).enumerate() {
        s.record(c, (|| {
            let (a, b) = (witness(&mu, &x)?, witness(&nu, &x)?);
            let third = space.distance(&Point::Index(0), &Point::Index(1))?;
            Ok((a - third).abs().max((b - third).abs()))
        })());
    }
    suites.push(s.finish());

    // π_s(μ, ν) = s·π(μ, ν) under the 1/s-scaled metric.
    let mut s = Suite::new("scaling-identity", 1e-9);
    for c in 0..n {
        let mut r = case_rng(opts, 6, c);
        let (mu, nu) = lp_pair(&mut r, 6);
        let sc = [0.25, 0.5, 2.0][c % 3];
        s.record(c, (|| {
            let lhs = s_lp_distance_with(&mu, &nu, sc, Method::Flow, &lp_opts)?.value;
            let (a, b) = rescaled(&mu, &nu, sc);
            let rhs = sc * lp_distance(&a, &b, Method::Flow)?.value;
            Ok((lhs - rhs).abs())
        })());
    }
    suites.push(s.finish());

    // Oracle-only residual witness equals the direct value; (P_r) chain is
    // monotone.
    let mut s = Suite::new("residual-witness", 1e-9);
    for c in 0..n {
        let inst = ring_instance(&mut case_rng(opts, 7, c));
        s.record(c, (|| {
            let state = PeelState::new(inst.space.clone(), inst.probe.clone(), inst.rings.clone())?;
            let oracle = HiddenMeasureOracle::new(inst.hidden.clone());
            let got = residual_witness(&oracle, &state)?.value;
            let want = s_witness(&inst.residual, &inst.probe, inst.residual_weight)?;
            let chain = pr_chain(&oracle, &state)?;
            if chain.windows(2).any(|w| w[1] && !w[0]) {
                return Err(Error::InvalidPeelState(format!("(P_r) chain not monotone: {chain:?}")));
            }
            Ok((got - want).abs())
        })());
    }
    suites.push(s.finish());

    // Vertex weights read off the plateau.
    let mut s = Suite::new("plateau-extraction", 1e-6);
    for c in 0..n {
        let (m, vertex, weight) = vertex_instance(&mut case_rng(opts, 8, c));
        s.record(c, (|| {
            let others: Vec<Point> = m.points().filter(|p| **p != vertex).cloned().collect();
            let ray = exposing_direction(m.space(), &vertex, &others)?;
            let oracle = HiddenMeasureOracle::new(m.clone());
            Ok((plateau_weight(&OracleWitness { oracle: &oracle }, &ray)? - weight).abs())
        })());
    }
    suites.push(s.finish());

    // Known-support reconstruction round trip.
    let mut s = Suite::new("reconstruction", 1e-6);
    for c in 0..n.min(20) {
        let mut r = case_rng(opts, 9, c);
        let dim = 2 + c % 2;
        let hidden = random_normed_measure(&mut r, &Space::euclidean(dim), 1 + c % 6, 1.0);
        s.record(c, (|| {
            let oracle = HiddenMeasureOracle::new(hidden.clone());
            let support: Vec<Point> = hidden.points().cloned().collect();
            Ok(peel_reconstruct(&oracle, &support)?.max_error_against(&hidden))
        })());
    }
    suites.push(s.finish());

    // Push-forward by random isometries preserves distances.
    let mut s = Suite::new("isometry-invariance", INVARIANCE_TOL);
    for c in 0..n.min(20) {
        let mut r = case_rng(opts, 10, c);
        let (mu, nu) = lp_pair(&mut r, 5);
        if !mu.space().is_normed() {
            continue;
        }
        s.record(c, (|| {
            let psi = random_affine_isometry(mu.space(), opts.seed.wrapping_add(c as u64))?;
            let rho = pushforward(&mu, &psi)?;
            Ok(check_invariance(&psi, &[mu.clone(), nu.clone(), rho], Some(1))?.max_deviation)
        })());
    }
    suites.push(s.finish());

    Ok(SelftestReport { suites })
}
