//! Hölder triples `(p, q, r′)` with `1/p + 1/q + 1/r′ = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderTriple {
    pub p: f64,
    pub q: f64,
    pub r_dual: f64,
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

impl HolderTriple {
    pub fn new(p: f64, q: f64, r_dual: f64) -> Result<Self> {
        for e in [p, q, r_dual] {
            if e.is_nan() || e < 1.0 {
                return Err(LabError::InvalidExponent(e));
            }
        }
        let sum = inv(p) + inv(q) + inv(r_dual);
        if (sum - 1.0).abs() > 1e-12 {
            return Err(LabError::HolderViolated(sum));
        }
        Ok(HolderTriple { p, q, r_dual })
    }

    /// The triple at barycentric point `(1/p, 1/q, 1/r′)`.
    pub fn from_reciprocals(a: f64, b: f64, c: f64) -> Result<Self> {
        let e = |x: f64| if x == 0.0 { f64::INFINITY } else { 1.0 / x };
        HolderTriple::new(e(a), e(b), e(c))
    }

    pub fn reciprocals(&self) -> (f64, f64, f64) {
        (inv(self.p), inv(self.q), inv(self.r_dual))
    }

    /// `(2, 2, ∞)`, the L² point.
    pub fn l2_point() -> Self {
        HolderTriple {
            p: 2.0,
            q: 2.0,
            r_dual: f64::INFINITY,
        }
    }
}
