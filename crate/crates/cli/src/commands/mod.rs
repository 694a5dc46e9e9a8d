pub mod compare;
pub mod green;
pub mod ode;
pub mod pde;
pub mod selftest;
pub mod sym;

use std::path::Path;

pub type Outcome = Result<std::process::ExitCode, Box<dyn std::error::Error>>;

pub fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)
}
