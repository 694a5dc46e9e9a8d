//! The renormalized energy W(a; q), its per-vortex gradient, the core-size
//! expansion W_eps, and lift bookkeeping for the momentum parameter q.
//!
//! W(a; q) = -pi sum_{j != k} d_j d_k F(a_j - a_k) + |q|^2 / 2,
//! grad_{a_j} W = 2 pi d_j ( -sum_{k != j} d_k grad F(a_j - a_k) + q ).
//!
//! q is state, not gauge: it is stored explicitly and evolved by `lift_q`
//! along a trajectory, never recomputed from wrapped positions (which would
//! be ambiguous by 2 pi Z^2).

use crate::error::{Error, Result};
use crate::green::GreenTable;
use crate::torus::{TorusPoint, VortexConfiguration};

const COLLISION_EPS: f64 = 1e-10;

/// Decomposed value of the renormalized energy.
#[derive(Clone, Copy, Debug)]
pub struct EnergyReport {
    /// W = interaction_part + momentum_part.
    pub w: f64,
    /// -pi sum_{j != k} d_j d_k F(a_j - a_k).
    pub interaction_part: f64,
    /// |q|^2 / 2.
    pub momentum_part: f64,
    pub w_eps: Option<f64>,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
}

fn check_no_collision(c: &VortexConfiguration) -> Result<()> {
    let sep = c.min_pair_distance();
    if sep < COLLISION_EPS {
        return Err(Error::Collision {
            sep,
            limit: COLLISION_EPS,
        });
    }
    Ok(())
}

/// W(a; q) with its interaction and momentum parts.
pub fn renormalized_w(c: &VortexConfiguration, t: &GreenTable) -> Result<EnergyReport> {
    check_no_collision(c)?;
    let m = c.len();
    let mut interaction = 0.0;
    for j in 0..m {
        for k in (j + 1)..m {
            let d = [
                c.lifted[j].x - c.lifted[k].x,
                c.lifted[j].y - c.lifted[k].y,
            ];
            let f = t.eval_f(d)?;
            // both ordered pairs (j,k) and (k,j)
            interaction += -2.0 * std::f64::consts::PI * (c.degrees[j] * c.degrees[k]) as f64 * f;
        }
    }
    let momentum = 0.5 * (c.q[0] * c.q[0] + c.q[1] * c.q[1]);
    Ok(EnergyReport {
        w: interaction + momentum,
        interaction_part: interaction,
        momentum_part: momentum,
        w_eps: None,
        epsilon: None,
        gamma: None,
    })
}

/// grad_{a_j} W(a; q).
pub fn grad_w(c: &VortexConfiguration, t: &GreenTable, j: usize) -> Result<[f64; 2]> {
    check_no_collision(c)?;
    grad_w_unchecked(c, t, j)
}

pub(crate) fn grad_w_unchecked(
    c: &VortexConfiguration,
    t: &GreenTable,
    j: usize,
) -> Result<[f64; 2]> {
    let mut s = [0.0f64; 2];
    for k in 0..c.len() {
        if k == j {
            continue;
        }
        let d = [
            c.lifted[j].x - c.lifted[k].x,
            c.lifted[j].y - c.lifted[k].y,
        ];
        let g = t.eval_grad_f(d)?;
        let dk = c.degrees[k] as f64;
        s[0] += dk * g[0];
        s[1] += dk * g[1];
    }
    let dj = c.degrees[j] as f64;
    Ok([
        std::f64::consts::TAU * dj * (-s[0] + c.q[0]),
        std::f64::consts::TAU * dj * (-s[1] + c.q[1]),
    ])
}

/// W_eps(a; q) = 2N (pi log(1/eps) + gamma) + W(a; q).
pub fn w_eps(
    c: &VortexConfiguration,
    t: &GreenTable,
    eps: f64,
    gamma: f64,
) -> Result<EnergyReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0,1), got {eps}"
        )));
    }
    let mut rep = renormalized_w(c, t)?;
    let two_n = c.len() as f64;
    rep.w_eps = Some(two_n * (std::f64::consts::PI * (1.0 / eps).ln() + gamma) + rep.w);
    rep.epsilon = Some(eps);
    rep.gamma = Some(gamma);
    Ok(rep)
}

/// Advance q along per-vortex lifted increments:
/// q += 2 pi sum_j d_j delta_j.
pub fn lift_q(q: [f64; 2], degrees: &[i32], displacements: &[[f64; 2]]) -> [f64; 2] {
    let mut out = q;
    for (&d, inc) in degrees.iter().zip(displacements) {
        out[0] += std::f64::consts::TAU * d as f64 * inc[0];
        out[1] += std::f64::consts::TAU * d as f64 * inc[1];
    }
    out
}

/// The minimal-Euclidean-norm representative of the coset
/// 2 pi sum_j d_j a_j + 2 pi Z^2; ties broken toward the lexicographically
/// smallest lattice offset.
pub fn default_q0(positions: &[TorusPoint], degrees: &[i32]) -> [f64; 2] {
    let mut base = [0.0f64; 2];
    for (p, &d) in positions.iter().zip(degrees) {
        base[0] += d as f64 * p.x;
        base[1] += d as f64 * p.y;
    }
    let mx = -base[0].round() as i64;
    let my = -base[1].round() as i64;
    let mut best: Option<(f64, (i64, i64))> = None;
    for ox in (mx - 1)..=(mx + 1) {
        for oy in (my - 1)..=(my + 1) {
            let cx = base[0] + ox as f64;
            let cy = base[1] + oy as f64;
            let norm2 = cx * cx + cy * cy;
            let better = match best {
                None => true,
                Some((bn, bo)) => {
                    norm2 < bn - 1e-12 || (norm2 <= bn + 1e-12 && (ox, oy) < bo)
                }
            };
            if better {
                best = Some((norm2, (ox, oy)));
            }
        }
    }
    let (_, (ox, oy)) = best.unwrap();
    [
        std::f64::consts::TAU * (base[0] + ox as f64),
        std::f64::consts::TAU * (base[1] + oy as f64),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::LiftedPoint;

    fn table() -> &'static GreenTable {
        use std::sync::OnceLock;
        static T: OnceLock<GreenTable> = OnceLock::new();
        T.get_or_init(|| GreenTable::build(256, 0.25).unwrap())
    }

    fn pair_config() -> VortexConfiguration {
        VortexConfiguration::new(
            vec![TorusPoint::new(0.25, 0.5), TorusPoint::new(0.75, 0.5)],
            vec![1, -1],
            [std::f64::consts::TAU * -0.5, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn w_of_the_half_separated_pair() {
        // W = 2 pi F(0.5, 0) + |q|^2/2 with F(0.5,0) = ln(2)/4 and q = 2 pi (-1/2, 0)
        let rep = renormalized_w(&pair_config(), table()).unwrap();
        let want_interaction = std::f64::consts::TAU * 0.25 * std::f64::consts::LN_2;
        let want_momentum = 0.5 * std::f64::consts::PI * std::f64::consts::PI;
        assert!((rep.interaction_part - want_interaction).abs() < 1e-7);
        assert!((rep.momentum_part - want_momentum).abs() < 1e-14);
        assert_eq!(rep.w, rep.interaction_part + rep.momentum_part);
    }

    #[test]
    fn interaction_is_translation_invariant() {
        let t = table();
        let shift = (0.173, 0.281);
        let a = renormalized_w(&pair_config(), t).unwrap();
        let c2 = VortexConfiguration::new(
            vec![
                TorusPoint::new(0.25 + shift.0, 0.5 + shift.1),
                TorusPoint::new(0.75 + shift.0, 0.5 + shift.1),
            ],
            vec![1, -1],
            [std::f64::consts::TAU * -0.5, 0.0],
        )
        .unwrap();
        let b = renormalized_w(&c2, t).unwrap();
        assert!((a.interaction_part - b.interaction_part).abs() < 1e-9);
    }

    #[test]
    fn w_invariant_under_same_degree_relabeling() {
        let t = table();
        let pos = vec![
            TorusPoint::new(0.2, 0.3),
            TorusPoint::new(0.7, 0.6),
            TorusPoint::new(0.4, 0.8),
            TorusPoint::new(0.9, 0.1),
        ];
        let q = default_q0(&pos, &[1, 1, -1, -1]);
        let c1 = VortexConfiguration::new(pos.clone(), vec![1, 1, -1, -1], q).unwrap();
        let mut swapped = pos;
        swapped.swap(0, 1);
        let c2 = VortexConfiguration::new(swapped, vec![1, 1, -1, -1], q).unwrap();
        let a = renormalized_w(&c1, t).unwrap().w;
        let b = renormalized_w(&c2, t).unwrap().w;
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_sums_to_zero() {
        let t = table();
        let pos = vec![
            TorusPoint::new(0.21, 0.34),
            TorusPoint::new(0.66, 0.52),
            TorusPoint::new(0.44, 0.81),
            TorusPoint::new(0.88, 0.13),
        ];
        let q = default_q0(&pos, &[1, 1, -1, -1]);
        let c = VortexConfiguration::new(pos, vec![1, 1, -1, -1], q).unwrap();
        let mut s = [0.0f64; 2];
        for j in 0..4 {
            let g = grad_w(&c, t, j).unwrap();
            s[0] += g[0];
            s[1] += g[1];
        }
        assert!(s[0].abs() < 1e-8 && s[1].abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn gradient_matches_lift_consistent_finite_differences() {
        let t = table();
        let pos = vec![TorusPoint::new(0.31, 0.42), TorusPoint::new(0.67, 0.55)];
        let q = default_q0(&pos, &[1, -1]);
        let c = VortexConfiguration::new(pos, vec![1, -1], q).unwrap();
        let h = 1e-6;
        for j in 0..2 {
            let g = grad_w(&c, t, j).unwrap();
            for axis in 0..2 {
                let mut cp = c.clone();
                let mut cm = c.clone();
                let d = c.degrees[j] as f64;
                // perturb the lifted coordinate and update q per the lift
                if axis == 0 {
                    cp.lifted[j].x += h;
                    cm.lifted[j].x -= h;
                    cp.q[0] += std::f64::consts::TAU * d * h;
                    cm.q[0] -= std::f64::consts::TAU * d * h;
                } else {
                    cp.lifted[j].y += h;
                    cm.lifted[j].y -= h;
                    cp.q[1] += std::f64::consts::TAU * d * h;
                    cm.q[1] -= std::f64::consts::TAU * d * h;
                }
                cp.positions[j] = crate::torus::wrap(cp.lifted[j]);
                cm.positions[j] = crate::torus::wrap(cm.lifted[j]);
                let wp = renormalized_w(&cp, t).unwrap().w;
                let wm = renormalized_w(&cm, t).unwrap().w;
                let fd = (wp - wm) / (2.0 * h);
                let rel = (fd - g[axis]).abs() / g[axis].abs().max(1.0);
                assert!(rel < 1e-5, "j={j} axis={axis}: fd={fd} grad={}", g[axis]);
            }
        }
    }

    #[test]
    fn w_eps_log_slope() {
        let t = table();
        let c = pair_config();
        let gamma = 1.2;
        let a = w_eps(&c, t, 0.1, gamma).unwrap().w_eps.unwrap();
        let b = w_eps(&c, t, 0.05, gamma).unwrap().w_eps.unwrap();
        // halving eps adds 2N pi log 2 exactly
        let want = 2.0 * std::f64::consts::PI * std::f64::consts::LN_2;
        assert!((b - a - want).abs() < 1e-12);
        // eps = 1, gamma = 0 degenerates to W
        let w = renormalized_w(&c, t).unwrap().w;
        let we = w_eps(&c, t, 1.0 - 1e-15, 0.0).unwrap().w_eps.unwrap();
        assert!((we - w).abs() < 1e-10);
    }

    #[test]
    fn lift_q_examples() {
        let q = [0.0, 0.0];
        // stationary
        assert_eq!(lift_q(q, &[1, -1], &[[0.0, 0.0], [0.0, 0.0]]), [0.0, 0.0]);
        // vortex 1 moves by (0.1, 0)
        let q2 = lift_q(q, &[1, -1], &[[0.1, 0.0], [0.0, 0.0]]);
        assert!((q2[0] - 0.2 * std::f64::consts::PI).abs() < 1e-15);
        // seam crossing: increment is the lifted +0.02, not -0.98
        let q3 = lift_q(q, &[1, -1], &[[0.02, 0.0], [0.0, 0.0]]);
        assert!((q3[0] - std::f64::consts::TAU * 0.02).abs() < 1e-15);
    }

    #[test]
    fn default_q0_tie_break() {
        // coset base 2 pi (-0.5, 0): candidates 2 pi (-0.5,0) and 2 pi (0.5,0)
        // tie in norm; lattice offset (0,0) < (1,0) lexicographically
        let q = default_q0(
            &[TorusPoint::new(0.25, 0.5), TorusPoint::new(0.75, 0.5)],
            &[1, -1],
        );
        assert!((q[0] + std::f64::consts::PI).abs() < 1e-12 && q[1].abs() < 1e-12);
    }

    #[test]
    fn default_q0_zero_sum() {
        let q = default_q0(
            &[
                TorusPoint::new(0.25, 0.75),
                TorusPoint::new(0.75, 0.25),
                TorusPoint::new(0.75, 0.75),
                TorusPoint::new(0.25, 0.25),
            ],
            &[1, 1, -1, -1],
        );
        assert_eq!(q, [0.0, 0.0]);
    }

    #[test]
    fn default_q0_period_shift_invariant() {
        let a = default_q0(
            &[TorusPoint::new(0.1, 0.2), TorusPoint::new(0.4, 0.9)],
            &[1, -1],
        );
        // shifting one vortex by a full period leaves the wrapped position,
        // hence the coset and the choice, unchanged
        let b = default_q0(
            &[TorusPoint::new(1.1, 0.2), TorusPoint::new(0.4, 0.9)],
            &[1, -1],
        );
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn collision_detected() {
        let c = VortexConfiguration::with_lift(
            vec![TorusPoint::new(0.3, 0.3), TorusPoint::new(0.3, 0.3)],
            vec![LiftedPoint::new(0.3, 0.3), LiftedPoint::new(0.3, 0.3)],
            vec![1, -1],
            [0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            renormalized_w(&c, table()),
            Err(Error::Collision { .. })
        ));
    }
}
