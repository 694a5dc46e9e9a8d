use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::json;
use torus_vortex::pde::compare_to_ode;

use crate::config::{self, CompareConfig};
use crate::manifest::Manifest;
use crate::write_atomic;

use super::{ensure_dir, Outcome};

pub fn run(config_path: &Path, out: Option<&Path>, green_cache: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let raw = config::load_json(config_path)?;
    let cfg: CompareConfig = config::parse(&raw, "compare")?;
    let vortex_cfg = config::build_configuration(&cfg.vortices, &cfg.q0)?;
    if cfg.epsilons.is_empty() {
        return Err(Box::new(config::ConfigError(
            "at 'epsilons': list must be nonempty".into(),
        )));
    }
    for &e in &cfg.epsilons {
        if e < 2.0 / cfg.grid_n as f64 {
            return Err(Box::new(config::ConfigError(format!(
                "at 'epsilons': {e} unresolved on grid_n = {}",
                cfg.grid_n
            ))));
        }
    }
    let out_dir = out.unwrap_or(&cfg.output_dir);
    ensure_dir(out_dir)?;
    let table = config::obtain_table(&cfg.green, green_cache)?;

    let rows = compare_to_ode(
        &vortex_cfg,
        &table,
        cfg.lambda,
        &cfg.epsilons,
        cfg.t_max,
        cfg.grid_n,
        cfg.dt,
    )?;

    let mut csv = String::from("eps,n,dt,max_err\n");
    for r in &rows {
        csv.push_str(&format!(
            "{:.16e},{},{:.16e},{:.16e}\n",
            r.epsilon, r.n, r.dt, r.max_err
        ));
    }
    write_atomic(&out_dir.join("compare.csv"), csv.as_bytes())?;

    let mut man = Manifest::new(&raw);
    man.insert(
        "rows",
        json!(rows
            .iter()
            .map(|r| json!({"eps": r.epsilon, "n": r.n, "dt": r.dt, "max_err": r.max_err}))
            .collect::<Vec<_>>()),
    );
    man.finish(started.elapsed().as_secs_f64(), &out_dir.join("manifest.json"))?;
    for r in &rows {
        println!("eps = {:9.5}: max tracked-vs-predicted error {:.5}", r.epsilon, r.max_err);
    }
    Ok(ExitCode::SUCCESS)
}
