use serde::{Deserialize, Serialize};

/// Closeness test `|value - target| <= max(abs, rel * |target|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn bound(&self, target: f64) -> f64 {
        self.abs.max(self.rel * target.abs())
    }

    pub fn is_close(&self, value: f64, target: f64) -> bool {
        (value - target).abs() <= self.bound(target)
    }
}
