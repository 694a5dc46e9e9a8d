//! Run manifests: everything needed to replay an experiment exactly.

use serde_json::{json, Value};
use std::path::Path;

use torus_vortex::dynamics::TrajectoryRecord;

/// Best-effort source description from git.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

pub struct Manifest {
    body: Value,
}

impl Manifest {
    pub fn new(config_echo: &Value) -> Self {
        Self {
            body: json!({
                "config": config_echo,
                "git_describe": git_describe(),
            }),
        }
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.body[key] = value;
    }

    pub fn record_trajectory(&mut self, rec: &TrajectoryRecord) {
        self.insert("stop_reason", json!(rec.stop_reason.to_string()));
        self.insert("t_final", json!(rec.times.last().copied().unwrap_or(0.0)));
        if !rec.colliding_pairs.is_empty() {
            // vortex indices are 1-based in every user-facing output
            let pairs: Vec<[usize; 2]> = rec
                .colliding_pairs
                .iter()
                .map(|&(a, b)| [a + 1, b + 1])
                .collect();
            self.insert("colliding_pairs", json!(pairs));
            let cfg = rec.final_config();
            let bearings: Vec<f64> = rec
                .colliding_pairs
                .iter()
                .map(|&(a, b)| {
                    let d = torus_vortex::torus::min_image_diff(
                        cfg.positions[a],
                        cfg.positions[b],
                    );
                    d[1].atan2(d[0]).to_degrees()
                })
                .collect();
            self.insert("approach_bearing_deg", json!(bearings));
        }
    }

    pub fn finish(mut self, wall_time_seconds: f64, path: &Path) -> std::io::Result<()> {
        self.insert("wall_time_seconds", json!(wall_time_seconds));
        let text = serde_json::to_string_pretty(&self.body).expect("manifest is valid JSON");
        crate::write_atomic(path, text.as_bytes())
    }
}
