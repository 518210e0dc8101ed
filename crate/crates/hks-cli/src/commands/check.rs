//! `hks check`: evaluate every oracle on a configuration without simulating.

use crate::commands::run::load_and_resolve;
use crate::config::Overrides;
use crate::exit_code;
use crate::report::to_pretty;
use crate::theory::theory_summary;
use std::path::Path;

pub fn check_command(config_path: &Path, overrides: &Overrides) -> i32 {
    let resolved = match load_and_resolve(config_path, overrides) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return exit_code::CONFIG;
        }
    };
    let summary = match theory_summary(&resolved) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code::CONFIG;
        }
    };
    let report = to_pretty(&summary.to_value());
    print!("{report}");
    if let Some(dir) = &resolved.out_dir {
        if let Err(e) = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(dir.join("check.json"), &report))
        {
            eprintln!("error: writing report: {e}");
            return exit_code::CONFIG;
        }
    }
    exit_code::OK
}
