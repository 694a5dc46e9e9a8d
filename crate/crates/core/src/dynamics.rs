//! The reduced vortex law (I - lambda d_j J) da_j/dt = -(1/pi) grad_j W,
//! integrated with classical RK4 on lifted coordinates.
//!
//! The momentum parameter q is the continuous lift of 2 pi sum_j d_j a_j:
//! along any path it satisfies q(t) = q(0) + 2 pi sum_j d_j (a~_j(t) -
//! a~_j(0)) on lifted coordinates, which is how every stage evaluates it.
//!
//! Step control: a step is retried at half size when any vortex would move
//! more than a quarter period (the lift safety margin) or more than a
//! fraction of the current minimal pair distance; the latter keeps the
//! integrator from jumping across a collision. Near-collision speeds grow
//! like 1/r, so resolving the default stop radius of 1e-3 takes up to ~10
//! halvings from dt = 1e-4.

use std::io::Write;

use crate::energy::{grad_w_unchecked, renormalized_w};
use crate::error::{Error, Result};
use crate::green::GreenTable;
use crate::torus::{lift_step, wrap, LiftedPoint, TorusPoint, VortexConfiguration};

/// J = [[0, 1], [-1, 0]].
#[inline]
fn j_mul(v: [f64; 2]) -> [f64; 2] {
    [v[1], -v[0]]
}

#[derive(Clone, Copy, Debug)]
pub struct OdeParams {
    pub lambda: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Stop radius for the collision time T (the continuum law uses exact
    /// coincidence; a numerical stop radius is unavoidable).
    pub collision_stop_radius: f64,
    /// Record every this many accepted steps.
    pub sample_stride: usize,
}

impl OdeParams {
    pub fn new(lambda: f64, dt: f64, t_max: f64) -> Self {
        Self {
            lambda,
            dt,
            t_max,
            collision_stop_radius: 1e-3,
            sample_stride: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    ReachedTmax,
    Collision,
    StepFailure,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::ReachedTmax => write!(f, "tmax"),
            StopReason::Collision => write!(f, "collision"),
            StopReason::StepFailure => write!(f, "stepfailure"),
        }
    }
}

/// Sampled trajectory of the reduced law.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub configurations: Vec<VortexConfiguration>,
    pub w_series: Vec<f64>,
    pub xi_series: Vec<[f64; 2]>,
    /// Per sample, per vortex: |da_j/dt| from the analytic velocity.
    pub speed_series: Vec<Vec<f64>>,
    pub stop_reason: StopReason,
    /// Pairs (0-based) within twice the stop radius at the stopping sample.
    pub colliding_pairs: Vec<(usize, usize)>,
}

impl TrajectoryRecord {
    pub fn final_config(&self) -> &VortexConfiguration {
        self.configurations.last().expect("record is never empty")
    }
}

/// Velocity of vortex j: -(1/(pi (1+lambda^2))) (I + lambda d_j J) grad_j W.
pub fn velocity(
    c: &VortexConfiguration,
    t: &GreenTable,
    lambda: f64,
    j: usize,
) -> Result<[f64; 2]> {
    let g = crate::energy::grad_w(c, t, j)?;
    Ok(apply_mobility(g, lambda, c.degrees[j]))
}

#[inline]
fn apply_mobility(g: [f64; 2], lambda: f64, degree: i32) -> [f64; 2] {
    let ld = lambda * degree as f64;
    let jg = j_mul(g);
    let s = -1.0 / (std::f64::consts::PI * (1.0 + lambda * lambda));
    [s * (g[0] + ld * jg[0]), s * (g[1] + ld * jg[1])]
}

/// All velocities at once (one gradient pass).
pub fn velocities(
    c: &VortexConfiguration,
    t: &GreenTable,
    lambda: f64,
) -> Result<Vec<[f64; 2]>> {
    (0..c.len())
        .map(|j| {
            let g = grad_w_unchecked(c, t, j)?;
            Ok(apply_mobility(g, lambda, c.degrees[j]))
        })
        .collect()
}

/// xi = sum_j a~_j - lambda J sum_j d_j a~_j on lifted coordinates; a first
/// integral of the flow.
pub fn first_integral_xi(c: &VortexConfiguration, lambda: f64) -> [f64; 2] {
    let mut s = [0.0f64; 2];
    let mut sd = [0.0f64; 2];
    for (l, &d) in c.lifted.iter().zip(&c.degrees) {
        s[0] += l.x;
        s[1] += l.y;
        sd[0] += d as f64 * l.x;
        sd[1] += d as f64 * l.y;
    }
    let jsd = j_mul(sd);
    [s[0] - lambda * jsd[0], s[1] - lambda * jsd[1]]
}

/// Max over samples of |pi int_0^t sum_j |da_j|^2 ds + W(t) - W(0)|,
/// trapezoid quadrature on the recorded samples.
pub fn dissipation_residual(rec: &TrajectoryRecord) -> f64 {
    let w0 = rec.w_series[0];
    let mut acc = 0.0;
    let mut worst = 0.0f64;
    let speed2 = |s: &Vec<f64>| -> f64 { s.iter().map(|v| v * v).sum() };
    for i in 1..rec.times.len() {
        let dt = rec.times[i] - rec.times[i - 1];
        acc += 0.5 * dt * (speed2(&rec.speed_series[i]) + speed2(&rec.speed_series[i - 1]));
        let resid = (std::f64::consts::PI * acc + rec.w_series[i] - w0).abs();
        worst = worst.max(resid);
    }
    worst
}

struct State {
    lifted: Vec<LiftedPoint>,
    q: [f64; 2],
}

impl State {
    fn config(&self, degrees: &[i32]) -> VortexConfiguration {
        let positions: Vec<TorusPoint> = self.lifted.iter().map(|&l| wrap(l)).collect();
        VortexConfiguration {
            positions,
            lifted: self.lifted.clone(),
            degrees: degrees.to_vec(),
            q: self.q,
        }
    }
}

fn stage_config(
    base: &State,
    degrees: &[i32],
    k: &[[f64; 2]],
    scale: f64,
) -> VortexConfiguration {
    let mut lifted = base.lifted.clone();
    let mut q = base.q;
    for (i, l) in lifted.iter_mut().enumerate() {
        let dx = scale * k[i][0];
        let dy = scale * k[i][1];
        l.x += dx;
        l.y += dy;
        let d = degrees[i] as f64;
        q[0] += std::f64::consts::TAU * d * dx;
        q[1] += std::f64::consts::TAU * d * dy;
    }
    let positions = lifted.iter().map(|&l| wrap(l)).collect();
    VortexConfiguration {
        positions,
        lifted,
        degrees: degrees.to_vec(),
        q,
    }
}

fn min_pair_distance(lifted: &[LiftedPoint]) -> (f64, Vec<(usize, usize)>) {
    let pts: Vec<TorusPoint> = lifted.iter().map(|&l| wrap(l)).collect();
    let mut best = f64::INFINITY;
    for j in 0..pts.len() {
        for k in (j + 1)..pts.len() {
            best = best.min(crate::torus::torus_distance(pts[j], pts[k]));
        }
    }
    (best, vec![])
}

fn pairs_within(lifted: &[LiftedPoint], radius: f64) -> Vec<(usize, usize)> {
    let pts: Vec<TorusPoint> = lifted.iter().map(|&l| wrap(l)).collect();
    let mut out = vec![];
    for j in 0..pts.len() {
        for k in (j + 1)..pts.len() {
            if crate::torus::torus_distance(pts[j], pts[k]) < radius {
                out.push((j, k));
            }
        }
    }
    out
}

/// Integrate the reduced law from `c0` until t_max, collision, or step
/// failure.
pub fn integrate(
    c0: &VortexConfiguration,
    t: &GreenTable,
    p: &OdeParams,
) -> Result<TrajectoryRecord> {
    if !(p.dt > 0.0 && p.t_max > 0.0) {
        return Err(Error::InvalidParameter("dt and t_max must be positive".into()));
    }
    if c0.min_pair_distance() <= p.collision_stop_radius {
        return Err(Error::Collision {
            sep: c0.min_pair_distance(),
            limit: p.collision_stop_radius,
        });
    }
    let degrees = c0.degrees.clone();
    let mut state = State {
        lifted: c0.lifted.clone(),
        q: c0.q,
    };
    let mut time = 0.0f64;
    let mut rec = TrajectoryRecord {
        times: vec![],
        configurations: vec![],
        w_series: vec![],
        xi_series: vec![],
        speed_series: vec![],
        stop_reason: StopReason::ReachedTmax,
        colliding_pairs: vec![],
    };
    let stride = p.sample_stride.max(1);

    let sample =
        |rec: &mut TrajectoryRecord, state: &State, time: f64| -> Result<()> {
            let cfg = state.config(&degrees);
            let vels = velocities(&cfg, t, p.lambda)?;
            rec.times.push(time);
            rec.w_series.push(renormalized_w(&cfg, t)?.w);
            rec.xi_series.push(first_integral_xi(&cfg, p.lambda));
            rec.speed_series
                .push(vels.iter().map(|v| v[0].hypot(v[1])).collect());
            rec.configurations.push(cfg);
            Ok(())
        };

    sample(&mut rec, &state, time)?;
    let mut steps_since_sample = 0usize;

    loop {
        if time >= p.t_max - 1e-15 {
            rec.stop_reason = StopReason::ReachedTmax;
            break;
        }
        let (mind, _) = min_pair_distance(&state.lifted);
        if mind < p.collision_stop_radius {
            rec.stop_reason = StopReason::Collision;
            rec.colliding_pairs = pairs_within(&state.lifted, 2.0 * p.collision_stop_radius);
            break;
        }
        let mut h = p.dt.min(p.t_max - time);
        let mut accepted: Option<Vec<[f64; 2]>> = None;
        for _ in 0..24 {
            let cfg = state.config(&degrees);
            let k1 = velocities(&cfg, t, p.lambda)?;
            let k2 = velocities(&stage_config(&state, &degrees, &k1, 0.5 * h), t, p.lambda)?;
            let k3 = velocities(&stage_config(&state, &degrees, &k2, 0.5 * h), t, p.lambda)?;
            let k4 = velocities(&stage_config(&state, &degrees, &k3, h), t, p.lambda)?;
            let m = degrees.len();
            let mut inc = vec![[0.0f64; 2]; m];
            let mut max_inc = 0.0f64;
            for i in 0..m {
                inc[i][0] = h / 6.0 * (k1[i][0] + 2.0 * k2[i][0] + 2.0 * k3[i][0] + k4[i][0]);
                inc[i][1] = h / 6.0 * (k1[i][1] + 2.0 * k2[i][1] + 2.0 * k3[i][1] + k4[i][1]);
                max_inc = max_inc.max(inc[i][0].hypot(inc[i][1]));
            }
            if max_inc < 0.25 && max_inc <= 0.15 * mind.max(p.collision_stop_radius) {
                accepted = Some(inc);
                break;
            }
            h *= 0.5;
        }
        let Some(inc) = accepted else {
            rec.stop_reason = StopReason::StepFailure;
            break;
        };
        // advance through lift_step so the wrapped component stays exact
        let mut disp = Vec::with_capacity(degrees.len());
        for (i, l) in state.lifted.iter_mut().enumerate() {
            let target = wrap(LiftedPoint::new(l.x + inc[i][0], l.y + inc[i][1]));
            let lifted = lift_step(*l, target)?;
            disp.push([lifted.x - l.x, lifted.y - l.y]);
            *l = lifted;
        }
        state.q = crate::energy::lift_q(state.q, &degrees, &disp);
        time += h;
        steps_since_sample += 1;
        if steps_since_sample >= stride {
            sample(&mut rec, &state, time)?;
            steps_since_sample = 0;
        }
    }
    if steps_since_sample > 0 || rec.times.len() == 1 {
        let last = *rec.times.last().unwrap();
        if (time - last).abs() > 1e-15 {
            sample(&mut rec, &state, time)?;
        }
    }
    if rec.stop_reason == StopReason::Collision && rec.colliding_pairs.is_empty() {
        rec.colliding_pairs = pairs_within(&state.lifted, 2.0 * p.collision_stop_radius);
    }
    Ok(rec)
}

/// Initial configuration of the symmetric two-vortex family:
/// a_1 = (1/2 + alpha, 1/2 + beta), a_2 = (1/2 - alpha, 1/2 + beta) with
/// degrees (+1, -1) and q = 2 pi (2 alpha, 0).
pub fn symmetric_2v_config(alpha0: f64, beta0: f64) -> Result<VortexConfiguration> {
    if alpha0 == 0.0 {
        return Err(Error::InvalidParameter("alpha0 must be nonzero".into()));
    }
    let lifted = vec![
        LiftedPoint::new(0.5 + alpha0, 0.5 + beta0),
        LiftedPoint::new(0.5 - alpha0, 0.5 + beta0),
    ];
    let positions = lifted.iter().map(|&l| wrap(l)).collect();
    VortexConfiguration::with_lift(
        positions,
        lifted,
        vec![1, -1],
        [std::f64::consts::TAU * 2.0 * alpha0, 0.0],
    )
}

/// Initial configuration of the symmetric four-vortex family with degrees
/// (+1, +1, -1, -1) and q = (0, 0).
pub fn symmetric_4v_config(alpha0: f64, beta0: f64) -> Result<VortexConfiguration> {
    let c = 0.5;
    let lifted = vec![
        LiftedPoint::new(c + alpha0, c + beta0),
        LiftedPoint::new(c - alpha0, c - beta0),
        LiftedPoint::new(c - alpha0, c + beta0),
        LiftedPoint::new(c + alpha0, c - beta0),
    ];
    let positions = lifted.iter().map(|&l| wrap(l)).collect();
    VortexConfiguration::with_lift(positions, lifted, vec![1, 1, -1, -1], [0.0, 0.0])
}

/// Scalar reduction of the symmetric two-vortex family:
/// alpha' = -2 (dF_x(2 alpha, 0) + 4 pi alpha) / (1 + lambda^2),
/// beta'  = +2 lambda (dF_x(2 alpha, 0) + 4 pi alpha) / (1 + lambda^2),
/// reconstructed onto the full configuration. The two paths are straight
/// lines with slopes d beta/d alpha = -lambda (vortex 1) and +lambda
/// (vortex 2).
pub fn symmetric_2v(
    alpha0: f64,
    beta0: f64,
    lambda: f64,
    p: &OdeParams,
    t: &GreenTable,
) -> Result<TrajectoryRecord> {
    if alpha0 == 0.0 {
        return Err(Error::InvalidParameter("alpha0 must be nonzero".into()));
    }
    let force = |alpha: f64| -> Result<f64> {
        let g = t.eval_grad_f([2.0 * alpha, 0.0])?;
        Ok(g[0] + 2.0 * std::f64::consts::TAU * alpha)
    };
    let rhs = |ab: [f64; 2]| -> Result<[f64; 2]> {
        let f = force(ab[0])?;
        let den = 1.0 + lambda * lambda;
        Ok([-2.0 * f / den, 2.0 * lambda * f / den])
    };
    scalar_reduction(
        [alpha0, beta0],
        rhs,
        |ab| symmetric_2v_config(ab[0], ab[1]),
        |ab| {
            // pair distance is the minimum image of (2 alpha, 0)
            let d = (2.0 * ab[0]) - (2.0 * ab[0]).round();
            d.abs()
        },
        p,
        t,
        lambda,
    )
}

/// Scalar reduction of the symmetric four-vortex family:
/// (alpha', beta') = (2/(1+lambda^2)) [[1, lambda], [-lambda, 1]] *
/// (dF_x(2a, 2b) - dF_x(2a, 0), dF_y(2a, 2b) - dF_y(0, 2b)).
pub fn symmetric_4v(
    alpha0: f64,
    beta0: f64,
    lambda: f64,
    p: &OdeParams,
    t: &GreenTable,
) -> Result<TrajectoryRecord> {
    let rhs = |ab: [f64; 2]| -> Result<[f64; 2]> {
        let (a2, b2) = (2.0 * ab[0], 2.0 * ab[1]);
        let gab = t.eval_grad_f([a2, b2])?;
        let ga0 = t.eval_grad_f([a2, 0.0])?;
        let g0b = t.eval_grad_f([0.0, b2])?;
        let gx = gab[0] - ga0[0];
        let gy = gab[1] - g0b[1];
        let den = 1.0 + lambda * lambda;
        Ok([
            2.0 * (gx + lambda * gy) / den,
            2.0 * (-lambda * gx + gy) / den,
        ])
    };
    scalar_reduction(
        [alpha0, beta0],
        rhs,
        |ab| symmetric_4v_config(ab[0], ab[1]),
        |ab| {
            let da = (2.0 * ab[0]) - (2.0 * ab[0]).round();
            let db = (2.0 * ab[1]) - (2.0 * ab[1]).round();
            // closest pair among the four is along one coordinate axis
            da.abs().min(db.abs()).min(da.hypot(db))
        },
        p,
        t,
        lambda,
    )
}

fn scalar_reduction<R, C, D>(
    ab0: [f64; 2],
    rhs: R,
    make_config: C,
    pair_dist: D,
    p: &OdeParams,
    t: &GreenTable,
    lambda: f64,
) -> Result<TrajectoryRecord>
where
    R: Fn([f64; 2]) -> Result<[f64; 2]>,
    C: Fn([f64; 2]) -> Result<VortexConfiguration>,
    D: Fn([f64; 2]) -> f64,
{
    let mut ab = ab0;
    let mut time = 0.0f64;
    let mut rec = TrajectoryRecord {
        times: vec![],
        configurations: vec![],
        w_series: vec![],
        xi_series: vec![],
        speed_series: vec![],
        stop_reason: StopReason::ReachedTmax,
        colliding_pairs: vec![],
    };
    let stride = p.sample_stride.max(1);
    let sample = |rec: &mut TrajectoryRecord, ab: [f64; 2], time: f64| -> Result<()> {
        let cfg = make_config(ab)?;
        let vels = velocities(&cfg, t, lambda)?;
        rec.times.push(time);
        rec.w_series.push(renormalized_w(&cfg, t)?.w);
        rec.xi_series.push(first_integral_xi(&cfg, lambda));
        rec.speed_series
            .push(vels.iter().map(|v| v[0].hypot(v[1])).collect());
        rec.configurations.push(cfg);
        Ok(())
    };
    if pair_dist(ab) <= p.collision_stop_radius {
        return Err(Error::Collision {
            sep: pair_dist(ab),
            limit: p.collision_stop_radius,
        });
    }
    sample(&mut rec, ab, time)?;
    let mut since = 0usize;
    loop {
        if time >= p.t_max - 1e-15 {
            rec.stop_reason = StopReason::ReachedTmax;
            break;
        }
        let mind = pair_dist(ab);
        if mind < p.collision_stop_radius {
            rec.stop_reason = StopReason::Collision;
            break;
        }
        let mut h = p.dt.min(p.t_max - time);
        let mut accepted: Option<[f64; 2]> = None;
        for _ in 0..24 {
            let k1 = rhs(ab)?;
            let k2 = rhs([ab[0] + 0.5 * h * k1[0], ab[1] + 0.5 * h * k1[1]])?;
            let k3 = rhs([ab[0] + 0.5 * h * k2[0], ab[1] + 0.5 * h * k2[1]])?;
            let k4 = rhs([ab[0] + h * k3[0], ab[1] + h * k3[1]])?;
            let inc = [
                h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            // vortex displacement equals the (alpha, beta) increment
            let m = inc[0].hypot(inc[1]);
            if m < 0.25 && m <= 0.15 * mind.max(p.collision_stop_radius) {
                accepted = Some(inc);
                break;
            }
            h *= 0.5;
        }
        let Some(inc) = accepted else {
            rec.stop_reason = StopReason::StepFailure;
            break;
        };
        ab[0] += inc[0];
        ab[1] += inc[1];
        time += h;
        since += 1;
        if since >= stride {
            sample(&mut rec, ab, time)?;
            since = 0;
        }
    }
    if since > 0 || rec.times.len() == 1 {
        let last = *rec.times.last().unwrap();
        if (time - last).abs() > 1e-15 {
            sample(&mut rec, ab, time)?;
        }
    }
    if rec.stop_reason == StopReason::Collision {
        let cfg = rec.configurations.last().unwrap();
        rec.colliding_pairs = pairs_within(&cfg.lifted, 2.0 * p.collision_stop_radius)
            .into_iter()
            .collect();
        if rec.colliding_pairs.is_empty() {
            // the stopping pair is the argmin pair even if slightly above 2r
            let mut best = (f64::INFINITY, (0usize, 1usize));
            for j in 0..cfg.len() {
                for k in (j + 1)..cfg.len() {
                    let d = crate::torus::torus_distance(cfg.positions[j], cfg.positions[k]);
                    if d < best.0 {
                        best = (d, (j, k));
                    }
                }
            }
            rec.colliding_pairs.push(best.1);
        }
    }
    Ok(rec)
}

/// Write the trajectory CSV: header t,j,x,y,lx,ly,qx,qy,W,xix,xiy,speed and
/// one row per sample and vortex, 17 significant digits, vortex index j
/// 1-based.
pub fn write_trajectory_csv<W: Write>(rec: &TrajectoryRecord, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "t,j,x,y,lx,ly,qx,qy,W,xix,xiy,speed")?;
    for (i, &t) in rec.times.iter().enumerate() {
        let cfg = &rec.configurations[i];
        for j in 0..cfg.len() {
            writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t,
                j + 1,
                cfg.positions[j].x,
                cfg.positions[j].y,
                cfg.lifted[j].x,
                cfg.lifted[j].y,
                cfg.q[0],
                cfg.q[1],
                rec.w_series[i],
                rec.xi_series[i][0],
                rec.xi_series[i][1],
                rec.speed_series[i][j],
            )?;
        }
    }
    Ok(())
}
