use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::json;
use torus_vortex::green::{oracle, GreenTable};

use crate::config::{self, GreenConfig};
use crate::manifest::Manifest;

use super::{ensure_dir, Outcome};

/// Build a table cache, or inspect an existing one (symmetry and oracle
/// spot checks).
pub fn run(config_path: &Path, out: Option<&Path>, green_cache: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let raw = config::load_json(config_path)?;
    let cfg: GreenConfig = config::parse(&raw, "green")?;
    let out_dir = out.unwrap_or(&cfg.output_dir);
    ensure_dir(out_dir)?;
    let cache = green_cache
        .map(Path::to_path_buf)
        .or(cfg.green.cache_path.clone())
        .unwrap_or_else(|| out_dir.join("green.tgf"));

    let (table, action) = if cache.exists() {
        (GreenTable::read_cache(&cache)?, "inspected")
    } else {
        let t = GreenTable::build(cfg.green.n_table, cfg.green.cutoff_radius)?;
        t.write_cache(&cache)?;
        (t, "built")
    };

    // spot checks against the oracle and the symmetry group
    let pts = [[0.3, 0.15], [0.12, 0.41], [0.27, 0.33], [0.45, 0.08]];
    let mut worst_oracle = 0.0f64;
    for p in pts {
        let got = table.eval_f(p)?;
        let want = oracle::oracle_f(p, 128)?;
        worst_oracle = worst_oracle.max((got - want).abs());
    }
    let mut worst_sym = 0.0f64;
    for p in pts {
        let a = table.eval_f(p)?;
        for q in [[-p[0], p[1]], [p[0], -p[1]], [p[1], p[0]]] {
            worst_sym = worst_sym.max((table.eval_f(q)? - a).abs());
        }
    }
    println!(
        "green table {}: n = {}, cutoff = {}, core constant = {:.9}",
        action,
        table.n_table(),
        table.cutoff_radius(),
        table.core_constant()
    );
    println!("  |eval - oracle| <= {worst_oracle:.3e} (spot), symmetry defect <= {worst_sym:.3e}");

    let mut man = Manifest::new(&raw);
    man.insert("action", json!(action));
    man.insert("cache", json!(cache.display().to_string()));
    man.insert("n_table", json!(table.n_table()));
    man.insert("cutoff_radius", json!(table.cutoff_radius()));
    man.insert("core_constant", json!(table.core_constant()));
    man.insert("oracle_spot_error", json!(worst_oracle));
    man.insert("symmetry_spot_defect", json!(worst_sym));
    man.finish(started.elapsed().as_secs_f64(), &out_dir.join("manifest.json"))?;

    if worst_oracle > 1e-7 || worst_sym > 1e-9 {
        eprintln!("green table failed spot checks");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
