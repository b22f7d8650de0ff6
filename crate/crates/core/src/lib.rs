//! Exact Lévy–Prokhorov distances on finitely supported probability
//! measures, witness functions, and reconstruction of a hidden measure from
//! a distance oracle by peeling atoms off the vertices of its convex hull.

pub mod error;
pub mod instances;
pub mod isometry;
pub mod lpmetric;
pub mod measure;
pub mod random;
pub mod reconstruct;
pub mod sampling;
pub mod selftest;
pub mod space;

pub use error::{Error, Result};
pub use lpmetric::{
    dirac_distance, is_unit_distant, lp_distance, lp_distance_bruteforce, lp_distance_flow,
    lp_feasible_at, s_lp_distance, s_lp_distance_with, s_witness, witness, DistanceResult, LpOptions, Method,
};
pub use measure::{make_measure, support_distance, Atom, DiscreteMeasure, DEFAULT_SUPPORT_CAP};
pub use space::{parse_space, NormP, Point, Space};

/// Formats a number with 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&mag) {
        let s = format!("{:.11e}", x);
        let (m, e) = s.split_once('e').expect("exponent");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        return format!("{m}e{e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" { "0".into() } else { s }
}

#[cfg(test)]
mod fmt_tests {
    use super::fmt_sig;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.0), "2");
        assert_eq!(fmt_sig(-0.25), "-0.25");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(0.1 + 0.2), "0.3");
    }
}
