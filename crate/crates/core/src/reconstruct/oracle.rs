use std::cell::Cell;

use crate::error::Result;
use crate::lpmetric::{lp_distance_with, LpOptions, Method};
use crate::measure::{DiscreteMeasure, DEFAULT_SUPPORT_CAP};
use crate::space::Space;

/// Black-box access to `ν ↦ π(ν, ϑ)` for a fixed hidden measure `ϑ`.
pub trait DistanceOracle {
    fn space(&self) -> &Space;

    fn distance(&self, nu: &DiscreteMeasure) -> Result<f64>;

    /// Number of distance queries answered so far.
    fn calls(&self) -> u64;
}

/// Oracle backed by a known measure. Used in test mode, where the
/// reconstruction can be compared with the truth.
#[derive(Debug)]
pub struct HiddenMeasureOracle {
    hidden: DiscreteMeasure,
    calls: Cell<u64>,
}

impl HiddenMeasureOracle {
    pub fn new(hidden: DiscreteMeasure) -> Self {
        HiddenMeasureOracle {
            hidden,
            calls: Cell::new(0),
        }
    }

    pub fn hidden(&self) -> &DiscreteMeasure {
        &self.hidden
    }
}

impl DistanceOracle for HiddenMeasureOracle {
    fn space(&self) -> &Space {
        self.hidden.space()
    }

    fn distance(&self, nu: &DiscreteMeasure) -> Result<f64> {
        self.calls.set(self.calls.get() + 1);
        let method = if nu.len() <= DEFAULT_SUPPORT_CAP {
            Method::Brute
        } else {
            Method::Flow
        };
        Ok(lp_distance_with(nu, &self.hidden, method, &LpOptions::default())?.value)
    }

    fn calls(&self) -> u64 {
        self.calls.get()
    }
}

impl<O: DistanceOracle + ?Sized> DistanceOracle for &O {
    fn space(&self) -> &Space {
        (**self).space()
    }

    fn distance(&self, nu: &DiscreteMeasure) -> Result<f64> {
        (**self).distance(nu)
    }

    fn calls(&self) -> u64 {
        (**self).calls()
    }
}
