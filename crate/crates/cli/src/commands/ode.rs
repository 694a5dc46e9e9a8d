use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use torus_vortex::dynamics::{integrate, write_trajectory_csv, OdeParams};

use crate::config::{self, OdeConfig};
use crate::manifest::Manifest;
use crate::{svg, write_atomic};

use super::{ensure_dir, Outcome};

pub fn run(config_path: &Path, out: Option<&Path>, green_cache: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let raw = config::load_json(config_path)?;
    let cfg: OdeConfig = config::parse(&raw, "ode")?;
    let vortex_cfg = config::build_configuration(&cfg.vortices, &cfg.q0)?;
    if !(cfg.dt > 0.0 && cfg.t_max > 0.0) {
        return Err(Box::new(config::ConfigError(
            "at 'dt'/'t_max': must be positive".into(),
        )));
    }
    let out_dir = out.unwrap_or(&cfg.output_dir);
    ensure_dir(out_dir)?;
    let table = config::obtain_table(&cfg.green, green_cache)?;

    let mut params = OdeParams::new(cfg.lambda, cfg.dt, cfg.t_max);
    if let Some(r) = cfg.collision_stop_radius {
        params.collision_stop_radius = r;
    }
    let rec = integrate(&vortex_cfg, &table, &params)?;

    let mut csv = Vec::new();
    write_trajectory_csv(&rec, &mut csv)?;
    write_atomic(&out_dir.join("trajectory.csv"), &csv)?;
    write_atomic(&out_dir.join("trajectory.svg"), svg::trajectory_svg(&rec).as_bytes())?;

    let mut man = Manifest::new(&raw);
    man.record_trajectory(&rec);
    man.finish(started.elapsed().as_secs_f64(), &out_dir.join("manifest.json"))?;
    println!(
        "ode: {} samples, stop: {}, outputs in {}",
        rec.times.len(),
        rec.stop_reason,
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}
