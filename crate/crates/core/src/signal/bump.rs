//! Smooth compactly supported bumps built from the `exp(-1/u)` factor.

use super::{Multiplier, C64};

/// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`, C^∞ in between.
#[inline]
pub(crate) fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Annular bump in `|x|`: zero for `|x| <= inner0`, ramps (in `log|x|`) up to
/// 1 at `inner1`, equals 1 on `[inner1, outer1]`, ramps down to zero at `outer0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub inner0: f64,
    pub inner1: f64,
    pub outer1: f64,
    pub outer0: f64,
    /// When false the bump vanishes for `x < 0`.
    pub even: bool,
}

impl Annulus {
    pub fn new(inner0: f64, inner1: f64, outer1: f64, outer0: f64) -> Self {
        assert!(0.0 < inner0 && inner0 < inner1 && inner1 <= outer1 && outer1 < outer0);
        Annulus {
            inner0,
            inner1,
            outer1,
            outer0,
            even: true,
        }
    }

    pub fn one_sided(self) -> Self {
        Annulus { even: false, ..self }
    }

    /// Plateau `[a, b]` with support `(a/ratio, b·ratio)`.
    pub fn with_ratio(a: f64, b: f64, ratio: f64) -> Self {
        Annulus::new(a / ratio, a, b, b * ratio)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        if !self.even && x < 0.0 {
            return 0.0;
        }
        let t = x.abs();
        if t <= self.inner0 || t >= self.outer0 {
            0.0
        } else if t < self.inner1 {
            smooth_step((t / self.inner0).ln() / (self.inner1 / self.inner0).ln())
        } else if t <= self.outer1 {
            1.0
        } else {
            smooth_step((self.outer0 / t).ln() / (self.outer0 / self.outer1).ln())
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.inner0, self.outer0)
    }
}

impl Multiplier for Annulus {
    fn eval(&self, xi: f64) -> C64 {
        C64::new(self.value(xi), 0.0)
    }
}

/// Even bump equal to 1 on `|x| <= r1`, vanishing for `|x| >= r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub r1: f64,
    pub r0: f64,
}

impl Plateau {
    pub fn new(r1: f64, r0: f64) -> Self {
        assert!(0.0 < r1 && r1 < r0);
        Plateau { r1, r0 }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let t = x.abs();
        if t <= self.r1 {
            1.0
        } else if t >= self.r0 {
            0.0
        } else {
            smooth_step((self.r0 - t) / (self.r0 - self.r1))
        }
    }
}

impl Multiplier for Plateau {
    fn eval(&self, xi: f64) -> C64 {
        C64::new(self.value(xi), 0.0)
    }
}

/// The Littlewood–Paley bump: even, 1 on `1/5 <= |x| <= 5`, supported in
/// `1/10 < |x| < 10`.
pub fn bump_phi() -> Annulus {
    Annulus::new(0.1, 0.2, 5.0, 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_plateau_support_and_parity() {
        let phi = bump_phi();
        assert_eq!(phi.value(1.0), 1.0);
        assert_eq!(phi.value(0.2), 1.0);
        assert_eq!(phi.value(5.0), 1.0);
        assert_eq!(phi.value(1.0 / 20.0), 0.0);
        assert_eq!(phi.value(0.1), 0.0);
        assert_eq!(phi.value(10.0), 0.0);
        assert!(phi.value(0.15) > 0.0 && phi.value(0.15) < 1.0);
        for i in 0..2000 {
            let x = i as f64 * 0.0061;
            assert_eq!(phi.value(x), phi.value(-x));
        }
    }

    #[test]
    fn smooth_step_is_monotone() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = smooth_step(i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(smooth_step(0.5), 0.5);
    }

    #[test]
    fn one_sided_and_plateau() {
        let nu = Annulus::new(0.5, 0.6, 1.6, 2.0).one_sided();
        assert_eq!(nu.value(-1.0), 0.0);
        assert_eq!(nu.value(1.0), 1.0);
        let p = Plateau::new(10.0, 20.0);
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(-10.0), 1.0);
        assert_eq!(p.value(20.0), 0.0);
        assert!(p.value(15.0) > 0.0);
    }
}
