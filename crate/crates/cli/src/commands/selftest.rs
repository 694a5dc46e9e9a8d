use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use torus_vortex::dynamics::{
    dissipation_residual, integrate, symmetric_2v, symmetric_4v, symmetric_2v_config,
    symmetric_4v_config, velocity, OdeParams,
};
use torus_vortex::energy::{grad_w, renormalized_w};
use torus_vortex::field::{harmonic_current, ring_energy};
use torus_vortex::green::{oracle, GreenTable};
use torus_vortex::torus::wrap;

use super::Outcome;

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.measured <= self.tolerance
    }
}

/// Deterministic xorshift points for the random-sample checks.
fn sample_points(count: usize, min_lattice_dist: f64) -> Vec<[f64; 2]> {
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = [next(), next()];
        let dx = p[0] - p[0].round();
        let dy = p[1] - p[1].round();
        if dx.hypot(dy) >= min_lattice_dist {
            out.push(p);
        }
    }
    out
}

pub fn run(quick: bool, green_cache: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let n_table = if quick { 256 } else { 1024 };
    let ring_n = if quick { 256 } else { 1024 };
    let oracle_k = if quick { 128 } else { 256 };
    let mut checks: Vec<Check> = Vec::new();

    let table = match green_cache {
        Some(path) if path.exists() => match GreenTable::read_cache(path) {
            Ok(t) => t,
            Err(e) => {
                println!("FAIL green_cache_load: {e}");
                return Ok(ExitCode::from(1));
            }
        },
        _ => GreenTable::build(n_table, 0.25)?,
    };

    // symmetry group of F at random points
    let pts = sample_points(if quick { 30 } else { 100 }, 0.02);
    let mut sym = 0.0f64;
    for &p in &pts {
        let a = table.eval_f(p)?;
        for q in [
            [-p[0], p[1]],
            [p[0], -p[1]],
            [p[1], p[0]],
            [p[0] + 1.0, p[1] - 1.0],
        ] {
            sym = sym.max((table.eval_f(q)? - a).abs());
        }
    }
    checks.push(Check { name: "green_symmetry_group", measured: sym, tolerance: 1e-9 });

    // table vs oracle
    let mut worst = 0.0f64;
    for &p in pts.iter().take(if quick { 8 } else { 24 }) {
        if p[0].hypot(p[1]).min((p[0] - p[0].round()).hypot(p[1] - p[1].round())) < 0.05 {
            continue;
        }
        worst = worst.max((table.eval_f(p)? - oracle::oracle_f(p, oracle_k)?).abs());
    }
    checks.push(Check { name: "green_vs_oracle", measured: worst, tolerance: 1e-7 });

    // gradient odd + stationary symmetry lines
    let mut odd = 0.0f64;
    for &p in pts.iter().take(20) {
        let g = table.eval_grad_f(p)?;
        let h = table.eval_grad_f([-p[0], -p[1]])?;
        odd = odd.max((g[0] + h[0]).abs().max((g[1] + h[1]).abs()));
    }
    checks.push(Check { name: "green_gradient_odd", measured: odd, tolerance: 1e-9 });
    let mut lines = 0.0f64;
    for y in [0.07, 0.19, 0.33, 0.48] {
        lines = lines.max(table.eval_grad_f([0.5, y])?[0].abs());
        lines = lines.max(table.eval_grad_f([0.0, y])?[0].abs());
        lines = lines.max(table.eval_grad_f([y, 0.5])?[1].abs());
        lines = lines.max(table.eval_grad_f([y, 0.0])?[1].abs());
    }
    checks.push(Check { name: "green_stationary_lines", measured: lines, tolerance: 1e-8 });

    // gradient of W vs lift-consistent finite differences
    let cfg = symmetric_4v_config(-0.17, 0.22)?;
    let mut fd_rel = 0.0f64;
    let h = 1e-6;
    for j in 0..cfg.len() {
        let g = grad_w(&cfg, &table, j)?;
        for axis in 0..2 {
            let mut cp = cfg.clone();
            let mut cm = cfg.clone();
            let d = cfg.degrees[j] as f64;
            let bump = std::f64::consts::TAU * d * h;
            if axis == 0 {
                cp.lifted[j].x += h;
                cm.lifted[j].x -= h;
                cp.q[0] += bump;
                cm.q[0] -= bump;
            } else {
                cp.lifted[j].y += h;
                cm.lifted[j].y -= h;
                cp.q[1] += bump;
                cm.q[1] -= bump;
            }
            cp.positions[j] = wrap(cp.lifted[j]);
            cm.positions[j] = wrap(cm.lifted[j]);
            let fd = (renormalized_w(&cp, &table)?.w - renormalized_w(&cm, &table)?.w) / (2.0 * h);
            fd_rel = fd_rel.max((fd - g[axis]).abs() / g[axis].abs().max(1.0));
        }
    }
    checks.push(Check { name: "gradW_vs_finite_diff", measured: fd_rel, tolerance: 1e-5 });

    let mut gsum = [0.0f64; 2];
    for j in 0..cfg.len() {
        let g = grad_w(&cfg, &table, j)?;
        gsum[0] += g[0];
        gsum[1] += g[1];
    }
    checks.push(Check {
        name: "gradW_sum_zero",
        measured: gsum[0].abs().max(gsum[1].abs()),
        tolerance: 1e-8,
    });

    // first integral and dissipation identity along a trajectory
    let mut p = OdeParams::new(1.0, 1e-4, if quick { 0.01 } else { 0.03 });
    p.sample_stride = 1;
    let rec = integrate(&symmetric_4v_config(-0.15, 0.2)?, &table, &p)?;
    let xi0 = rec.xi_series[0];
    let drift = rec
        .xi_series
        .iter()
        .map(|xi| (xi[0] - xi0[0]).abs().max((xi[1] - xi0[1]).abs()))
        .fold(0.0f64, f64::max);
    checks.push(Check { name: "xi_conservation", measured: drift, tolerance: 1e-8 });
    let resid = dissipation_residual(&rec);
    checks.push(Check {
        name: "dissipation_identity",
        measured: resid,
        tolerance: 1e-5 * (1.0 + rec.w_series[0].abs()),
    });

    // scalar reductions against the full integrator
    let horizon = if quick { 0.01 } else { 0.05 };
    let p2 = OdeParams::new(1.0, 1e-4, horizon);
    let red = symmetric_2v(-0.15, 0.25, 1.0, &p2, &table)?;
    let full = integrate(&symmetric_2v_config(-0.15, 0.25)?, &table, &p2)?;
    let mut dev2 = 0.0f64;
    for i in 0..red.times.len().min(full.times.len()) {
        for j in 0..2 {
            let a = red.configurations[i].lifted[j];
            let b = full.configurations[i].lifted[j];
            dev2 = dev2.max((a.x - b.x).abs().max((a.y - b.y).abs()));
        }
    }
    checks.push(Check { name: "reduction_2v_consistency", measured: dev2, tolerance: 1e-7 });
    let p4 = OdeParams::new(1.0, 1e-4, if quick { 0.008 } else { 0.02 });
    let red = symmetric_4v(-0.15, 0.1, 1.0, &p4, &table)?;
    let full = integrate(&symmetric_4v_config(-0.15, 0.1)?, &table, &p4)?;
    let mut dev4 = 0.0f64;
    for i in 0..red.times.len().min(full.times.len()) {
        for j in 0..4 {
            let a = red.configurations[i].lifted[j];
            let b = full.configurations[i].lifted[j];
            dev4 = dev4.max((a.x - b.x).abs().max((a.y - b.y).abs()));
        }
    }
    checks.push(Check { name: "reduction_4v_consistency", measured: dev4, tolerance: 1e-7 });

    // equilibrium of the last Figure-2 pattern
    let eq = symmetric_4v_config(-0.25, 0.25)?;
    let mut vmax = 0.0f64;
    for j in 0..4 {
        let v = velocity(&eq, &table, 1.0, j)?;
        vmax = vmax.max(v[0].hypot(v[1]));
    }
    checks.push(Check { name: "equilibrium_velocity", measured: vmax, tolerance: 1e-7 });

    // ring energy against the renormalized energy (core constant included)
    let cur = harmonic_current(&eq, &table, ring_n)?;
    let w = renormalized_w(cur.config(), &table)?.w;
    let two_n_pi = 4.0 * std::f64::consts::PI;
    let c_f = table.core_constant();
    let mut ring_dev = 0.0f64;
    // the quadratic-in-rho allowance absorbs the jagged disk boundary,
    // which is coarser on the quick grid
    let c_rho = if quick { 60.0 } else { 25.0 };
    for rho in [0.05, 0.1] {
        let ring = ring_energy(&cur, rho)?;
        let resid = (ring + two_n_pi * rho.ln() + two_n_pi * c_f - w).abs();
        ring_dev = ring_dev.max(resid - c_rho * rho * rho);
    }
    checks.push(Check { name: "ring_energy_fit", measured: ring_dev, tolerance: 0.05 });
    let inc = ring_energy(&cur, 0.05)? - ring_energy(&cur, 0.1)?;
    checks.push(Check {
        name: "ring_energy_log_slope",
        measured: (inc / (two_n_pi * std::f64::consts::LN_2) - 1.0).abs(),
        tolerance: 0.02,
    });

    println!("{:<28} {:>13} {:>13}  result", "check", "measured", "tolerance");
    let mut ok = true;
    for c in &checks {
        ok &= c.pass();
        println!(
            "{:<28} {:>13.3e} {:>13.3e}  {}",
            c.name,
            c.measured,
            c.tolerance,
            if c.pass() { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "selftest {} in {:.1} s",
        if ok { "passed" } else { "FAILED" },
        started.elapsed().as_secs_f64()
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
