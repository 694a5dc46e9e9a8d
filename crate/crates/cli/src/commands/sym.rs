use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::json;
use torus_vortex::dynamics::{
    integrate, symmetric_2v, symmetric_2v_config, symmetric_4v, symmetric_4v_config,
    write_trajectory_csv, OdeParams,
};

use crate::config::{self, SymConfig};
use crate::manifest::Manifest;
use crate::{svg, write_atomic};

use super::{ensure_dir, Outcome};

pub fn run(
    config_path: &Path,
    check_full: bool,
    out: Option<&Path>,
    green_cache: Option<&Path>,
) -> Outcome {
    let started = Instant::now();
    let raw = config::load_json(config_path)?;
    let cfg: SymConfig = config::parse(&raw, "sym")?;
    if cfg.mode != "2v" && cfg.mode != "4v" {
        return Err(Box::new(config::ConfigError(format!(
            "at 'mode': expected \"2v\" or \"4v\", got \"{}\"",
            cfg.mode
        ))));
    }
    let out_dir = out.unwrap_or(&cfg.output_dir);
    ensure_dir(out_dir)?;
    let table = config::obtain_table(&cfg.green, green_cache)?;

    let mut params = OdeParams::new(cfg.lambda, cfg.dt, cfg.t_max);
    if let Some(r) = cfg.collision_stop_radius {
        params.collision_stop_radius = r;
    }
    let rec = if cfg.mode == "2v" {
        symmetric_2v(cfg.alpha0, cfg.beta0, cfg.lambda, &params, &table)?
    } else {
        symmetric_4v(cfg.alpha0, cfg.beta0, cfg.lambda, &params, &table)?
    };

    let mut csv = Vec::new();
    write_trajectory_csv(&rec, &mut csv)?;
    write_atomic(&out_dir.join("trajectory.csv"), &csv)?;
    write_atomic(&out_dir.join("trajectory.svg"), svg::trajectory_svg(&rec).as_bytes())?;

    let mut man = Manifest::new(&raw);
    man.record_trajectory(&rec);

    if check_full {
        let full_cfg = if cfg.mode == "2v" {
            symmetric_2v_config(cfg.alpha0, cfg.beta0)?
        } else {
            symmetric_4v_config(cfg.alpha0, cfg.beta0)?
        };
        let full = integrate(&full_cfg, &table, &params)?;
        let mut csv = Vec::new();
        write_trajectory_csv(&full, &mut csv)?;
        write_atomic(&out_dir.join("trajectory_full.csv"), &csv)?;
        let m = rec.times.len().min(full.times.len());
        let mut dev = 0.0f64;
        for i in 0..m {
            for j in 0..rec.configurations[i].len() {
                let a = rec.configurations[i].lifted[j];
                let b = full.configurations[i].lifted[j];
                dev = dev.max((a.x - b.x).abs().max((a.y - b.y).abs()));
            }
        }
        man.insert("max_deviation_vs_full", json!(dev));
        println!("sym: reduction vs full-system max deviation {dev:.3e}");
    }
    man.finish(started.elapsed().as_secs_f64(), &out_dir.join("manifest.json"))?;
    println!(
        "sym {}: {} samples, stop: {}, outputs in {}",
        cfg.mode,
        rec.times.len(),
        rec.stop_reason,
        out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}
