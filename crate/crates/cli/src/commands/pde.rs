use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::json;
use torus_vortex::dynamics::{integrate, OdeParams};
use torus_vortex::field::initial_data;
use torus_vortex::pde::{run as run_pde, write_energy_csv, write_tracking_csv, PdeParams};

use crate::config::{self, PdeConfig};
use crate::manifest::Manifest;
use crate::{svg, write_atomic};

use super::{ensure_dir, Outcome};

pub fn run(config_path: &Path, out: Option<&Path>, green_cache: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let raw = config::load_json(config_path)?;
    let cfg: PdeConfig = config::parse(&raw, "pde")?;
    let vortex_cfg = config::build_configuration(&cfg.vortices, &cfg.q0)?;
    if cfg.epsilon < 2.0 / cfg.grid_n as f64 {
        return Err(Box::new(config::ConfigError(format!(
            "at 'epsilon': core unresolved, need epsilon >= 2/grid_n = {}",
            2.0 / cfg.grid_n as f64
        ))));
    }
    let out_dir = out.unwrap_or(&cfg.output_dir);
    ensure_dir(out_dir)?;
    let table = config::obtain_table(&cfg.green, green_cache)?;

    let (u0, nudged) = initial_data(&vortex_cfg, &table, cfg.epsilon, cfg.grid_n)?;
    u0.write_snapshot(&out_dir.join("initial.tvf"), cfg.epsilon)?;

    let params = PdeParams::new(cfg.epsilon, cfg.lambda, cfg.grid_n, cfg.dt, cfg.t_max)?;
    let pde_run = run_pde(&u0, &params);
    pde_run
        .final_field
        .write_snapshot(&out_dir.join("final.tvf"), cfg.epsilon)?;

    let mut csv = Vec::new();
    write_tracking_csv(&pde_run, &mut csv)?;
    write_atomic(&out_dir.join("tracking.csv"), &csv)?;
    let mut csv = Vec::new();
    write_energy_csv(&pde_run, &mut csv)?;
    write_atomic(&out_dir.join("energy.csv"), &csv)?;

    // reduced-law prediction from the nudged configuration for the overlay
    let mut op = OdeParams::new(cfg.lambda, 1e-4, cfg.t_max);
    op.sample_stride = 1;
    let rec = integrate(&nudged, &table, &op)?;
    write_atomic(
        &out_dir.join("overlay.svg"),
        svg::overlay_svg(&rec, &pde_run).as_bytes(),
    )?;

    let mut man = Manifest::new(&raw);
    man.insert("k_eps", json!(params.k_eps()));
    man.insert(
        "energy_initial",
        json!(pde_run.energy_series.first().map(|&(_, e)| e)),
    );
    man.insert(
        "energy_final",
        json!(pde_run.energy_series.last().map(|&(_, e)| e)),
    );
    if let Some(t) = pde_run.tracking_lost_at {
        man.insert("tracking_lost_at", json!(t));
    }
    man.finish(started.elapsed().as_secs_f64(), &out_dir.join("manifest.json"))?;
    println!(
        "pde: {} steps, {} tracked vortices, outputs in {}",
        (cfg.t_max / cfg.dt).round() as usize,
        pde_run.tracks.len(),
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}
