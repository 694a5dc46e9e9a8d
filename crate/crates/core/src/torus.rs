//! Points, displacements and lift bookkeeping on the unit torus (R/Z)^2.
//!
//! Wrapped coordinates always live in [0,1). Minimum-image displacement
//! components live in [-0.5, 0.5) with ties broken toward -0.5, so every
//! operation here is deterministic.

use crate::error::{Error, Result};

/// A point on the torus; both coordinates in [0,1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

/// A point in the universal cover R^2 tracking a continuous trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftedPoint {
    pub x: f64,
    pub y: f64,
}

#[inline]
fn reduce_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[inline]
fn reduce_half(v: f64) -> f64 {
    let r = (v + 0.5).rem_euclid(1.0);
    let r = if r >= 1.0 { 0.0 } else { r };
    r - 0.5
}

impl TorusPoint {
    /// Wrap arbitrary coordinates into the fundamental domain.
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x: reduce_unit(x),
            y: reduce_unit(y),
        }
    }
}

impl LiftedPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<TorusPoint> for LiftedPoint {
    fn from(p: TorusPoint) -> Self {
        Self { x: p.x, y: p.y }
    }
}

/// Canonical projection R^2 -> T^2: coordinates reduced mod 1 into [0,1).
pub fn wrap(p: LiftedPoint) -> TorusPoint {
    TorusPoint::new(p.x, p.y)
}

/// Minimum-image displacement d with each component in [-0.5, 0.5) and
/// wrap(r + d) = p.
pub fn min_image_diff(p: TorusPoint, r: TorusPoint) -> [f64; 2] {
    [reduce_half(p.x - r.x), reduce_half(p.y - r.y)]
}

/// Torus distance (euclidean norm of the minimum-image displacement).
pub fn torus_distance(p: TorusPoint, r: TorusPoint) -> f64 {
    let d = min_image_diff(p, r);
    d[0].hypot(d[1])
}

/// The unique lifted representative of `next_wrapped` within half a period
/// of `prev` in each coordinate. Errors with [`Error::StepTooLarge`] when the
/// wrapped points are a quarter period or more apart, which signals that an
/// integrator step was unsafe.
pub fn lift_step(prev: LiftedPoint, next_wrapped: TorusPoint) -> Result<LiftedPoint> {
    let dist = torus_distance(wrap(prev), next_wrapped);
    if dist >= 0.25 {
        return Err(Error::StepTooLarge { dist });
    }
    // next + round(prev - next) is exact, so wrap(result) == next_wrapped bit
    // for bit.
    let kx = (prev.x - next_wrapped.x).round();
    let ky = (prev.y - next_wrapped.y).round();
    Ok(LiftedPoint::new(next_wrapped.x + kx, next_wrapped.y + ky))
}

/// 2N vortex positions with degrees, the lifted trajectory representatives,
/// and the lifted momentum parameter q.
///
/// Invariants checked on construction:
/// - sum of degrees is zero,
/// - every degree is +1 or -1,
/// - q - 2*pi*sum_j d_j a_j lies within 1e-9 of a point of 2*pi*Z^2,
/// - wrap(lifted_j) == positions_j.
#[derive(Clone, Debug)]
pub struct VortexConfiguration {
    pub positions: Vec<TorusPoint>,
    pub lifted: Vec<LiftedPoint>,
    pub degrees: Vec<i32>,
    /// Lifted momentum parameter; evolves continuously along a trajectory.
    pub q: [f64; 2],
}

impl VortexConfiguration {
    pub fn new(positions: Vec<TorusPoint>, degrees: Vec<i32>, q: [f64; 2]) -> Result<Self> {
        let lifted = positions.iter().map(|&p| LiftedPoint::from(p)).collect();
        Self::with_lift(positions, lifted, degrees, q)
    }

    pub fn with_lift(
        positions: Vec<TorusPoint>,
        lifted: Vec<LiftedPoint>,
        degrees: Vec<i32>,
        q: [f64; 2],
    ) -> Result<Self> {
        if positions.is_empty() || positions.len() != degrees.len() || positions.len() != lifted.len()
        {
            return Err(Error::InvalidParameter(
                "positions, lifted and degrees must have equal nonzero length".into(),
            ));
        }
        if degrees.iter().any(|&d| d != 1 && d != -1) {
            return Err(Error::InvalidParameter("degrees must be +1 or -1".into()));
        }
        if degrees.iter().sum::<i32>() != 0 {
            return Err(Error::InvalidParameter(
                "degrees must sum to zero on the torus".into(),
            ));
        }
        for (&p, &l) in positions.iter().zip(&lifted) {
            let w = wrap(l);
            if (w.x - p.x).abs() > 1e-12 || (w.y - p.y).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "lifted points do not project onto positions".into(),
                ));
            }
        }
        let cfg = Self {
            positions,
            lifted,
            degrees,
            q,
        };
        let defect = cfg.q_coset_defect();
        if defect > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "q violates the coset constraint q - 2 pi sum d_j a_j in 2 pi Z^2 (defect {defect:.3e})"
            )));
        }
        Ok(cfg)
    }

    /// Number of vortices (2N).
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Componentwise distance of q - 2 pi sum_j d_j a_j to the nearest point
    /// of 2 pi Z^2 (max over components, in q units).
    pub fn q_coset_defect(&self) -> f64 {
        let mut s = [0.0f64; 2];
        for (&l, &d) in self.lifted.iter().zip(&self.degrees) {
            s[0] += d as f64 * l.x;
            s[1] += d as f64 * l.y;
        }
        let two_pi = std::f64::consts::TAU;
        let cx = (self.q[0] - two_pi * s[0]) / two_pi;
        let cy = (self.q[1] - two_pi * s[1]) / two_pi;
        let fx = (cx - cx.round()).abs() * two_pi;
        let fy = (cy - cy.round()).abs() * two_pi;
        fx.max(fy)
    }

    /// Smallest pairwise torus distance.
    pub fn min_pair_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for j in 0..self.len() {
            for k in (j + 1)..self.len() {
                best = best.min(torus_distance(self.positions[j], self.positions[k]));
            }
        }
        best
    }

    /// r(a) = (1/4) min_{j<k} |a_j - a_k|.
    pub fn min_pair_separation(&self) -> f64 {
        0.25 * self.min_pair_distance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        let p = wrap(LiftedPoint::new(1.25, -0.5));
        assert_eq!((p.x, p.y), (0.25, 0.5));
        let p = wrap(LiftedPoint::new(0.0, 0.999));
        assert_eq!((p.x, p.y), (0.0, 0.999));
        let p = wrap(LiftedPoint::new(-3.0, 7.0));
        assert_eq!((p.x, p.y), (0.0, 0.0));
    }

    #[test]
    fn wrap_never_returns_one() {
        let p = wrap(LiftedPoint::new(-1e-18, 1.0 - 1e-17));
        assert!(p.x < 1.0 && p.y < 1.0);
        assert!(p.x >= 0.0 && p.y >= 0.0);
    }

    #[test]
    fn min_image_examples() {
        let d = min_image_diff(TorusPoint::new(0.1, 0.1), TorusPoint::new(0.9, 0.9));
        assert!((d[0] - 0.2).abs() < 1e-15 && (d[1] - 0.2).abs() < 1e-15);
        let p = TorusPoint::new(0.37, 0.81);
        assert_eq!(min_image_diff(p, p), [0.0, 0.0]);
        // half-period convention: ties go to -0.5
        let d = min_image_diff(TorusPoint::new(0.75, 0.5), TorusPoint::new(0.25, 0.5));
        assert_eq!(d, [-0.5, 0.0]);
    }

    #[test]
    fn lift_step_examples() {
        let l = lift_step(LiftedPoint::new(0.98, 0.0), TorusPoint::new(0.02, 0.0)).unwrap();
        assert_eq!((l.x, l.y), (1.02, 0.0));
        let l = lift_step(LiftedPoint::new(0.5, 0.5), TorusPoint::new(0.5, 0.5)).unwrap();
        assert_eq!((l.x, l.y), (0.5, 0.5));
        let l = lift_step(LiftedPoint::new(3.98, 0.0), TorusPoint::new(0.02, 0.0)).unwrap();
        assert_eq!((l.x, l.y), (4.02, 0.0));
    }

    #[test]
    fn lift_step_rejects_large_steps() {
        let err = lift_step(LiftedPoint::new(0.0, 0.0), TorusPoint::new(0.5, 0.5));
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn min_pair_separation_examples() {
        let c = VortexConfiguration::new(
            vec![TorusPoint::new(0.25, 0.5), TorusPoint::new(0.75, 0.5)],
            vec![1, -1],
            [-std::f64::consts::TAU * 0.5, 0.0],
        )
        .unwrap();
        assert!((c.min_pair_separation() - 0.125).abs() < 1e-15);

        // four vortices at corners of a square with side 0.5
        let c = VortexConfiguration::new(
            vec![
                TorusPoint::new(0.25, 0.25),
                TorusPoint::new(0.75, 0.75),
                TorusPoint::new(0.75, 0.25),
                TorusPoint::new(0.25, 0.75),
            ],
            vec![1, 1, -1, -1],
            [0.0, 0.0],
        )
        .unwrap();
        assert!((c.min_pair_separation() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn coincident_pair_is_zero_separation() {
        let p = TorusPoint::new(0.3, 0.3);
        assert_eq!(torus_distance(p, p), 0.0);
    }

    #[test]
    fn configuration_rejects_nonzero_degree_sum() {
        let r = VortexConfiguration::new(
            vec![TorusPoint::new(0.2, 0.2), TorusPoint::new(0.8, 0.8)],
            vec![1, 1],
            [0.0, 0.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn configuration_rejects_coset_violation() {
        let r = VortexConfiguration::new(
            vec![TorusPoint::new(0.25, 0.5), TorusPoint::new(0.75, 0.5)],
            vec![1, -1],
            [1.0, 0.0], // not in 2 pi (-0.5, 0) + 2 pi Z^2
        );
        assert!(r.is_err());
    }

    proptest! {
        #[test]
        fn wrap_lift_roundtrip(px in -10.0..10.0f64, py in -10.0..10.0f64,
                               dx in -0.17..0.17f64, dy in -0.17..0.17f64) {
            let prev = LiftedPoint::new(px, py);
            let next = TorusPoint::new(px + dx, py + dy);
            let lifted = lift_step(prev, next).unwrap();
            let w = wrap(lifted);
            // identity on the wrapped component, exactly
            prop_assert_eq!(w.x, next.x);
            prop_assert_eq!(w.y, next.y);
            // continuity: within half a period of prev
            prop_assert!((lifted.x - prev.x).abs() <= 0.5);
            prop_assert!((lifted.y - prev.y).abs() <= 0.5);
        }

        #[test]
        fn min_image_antisymmetry(ax in 0.0..1.0f64, ay in 0.0..1.0f64,
                                  bx in 0.0..1.0f64, by in 0.0..1.0f64) {
            let p = TorusPoint::new(ax, ay);
            let r = TorusPoint::new(bx, by);
            let d = min_image_diff(p, r);
            let e = min_image_diff(r, p);
            for c in 0..2 {
                // antisymmetric except at the -0.5 boundary where the
                // convention is one-sided
                if d[c] != -0.5 && e[c] != -0.5 {
                    prop_assert!((d[c] + e[c]).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn min_image_in_range(ax in -5.0..5.0f64, ay in -5.0..5.0f64,
                              bx in -5.0..5.0f64, by in -5.0..5.0f64) {
            let d = min_image_diff(TorusPoint::new(ax, ay), TorusPoint::new(bx, by));
            prop_assert!(d[0] >= -0.5 && d[0] < 0.5);
            prop_assert!(d[1] >= -0.5 && d[1] < 0.5);
        }

        #[test]
        fn separation_translation_invariant(tx in 0.0..1.0f64, ty in 0.0..1.0f64) {
            let base = [(0.12, 0.34), (0.56, 0.78), (0.9, 0.1), (0.3, 0.65)];
            let degrees = [1i32, 1, -1, -1];
            let mk = |shift: (f64, f64)| {
                let pos: Vec<TorusPoint> = base
                    .iter()
                    .map(|&(x, y)| TorusPoint::new(x + shift.0, y + shift.1))
                    .collect();
                let mut s = [0.0f64; 2];
                for (p, &d) in pos.iter().zip(&degrees) {
                    s[0] += d as f64 * p.x;
                    s[1] += d as f64 * p.y;
                }
                let q = [std::f64::consts::TAU * s[0], std::f64::consts::TAU * s[1]];
                VortexConfiguration::new(pos, degrees.to_vec(), q).unwrap()
            };
            let c0 = mk((0.0, 0.0));
            let c1 = mk((tx, ty));
            prop_assert!((c0.min_pair_separation() - c1.min_pair_separation()).abs() < 1e-12);
        }
    }
}
