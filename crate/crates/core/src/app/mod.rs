//! Configuration, scenario presets, sweeps and the output layout used by
//! the `slfem` command-line tool.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_str, PathConfig, RunConfig, RunPoint, Scenario};
pub use run::{all_converged, manifest_text, run, RunManifest, RunStatus};

/// Preset names with their parameter bindings, one per line.
pub fn list_scenarios() -> String {
    let defaults = "sigma_t = 0.1, alpha = 1, beta = 1, mu = 1, lambda = 1, gamma = 0.5, mesh 64x32 graded 1.15";
    format!(
        "fiber-x  fiber_angle = 0 (M = e1 (x) e1); {defaults}\n\
         fiber-y  fiber_angle = pi/2 (M = e2 (x) e2); {defaults}\n\
         custom   fiber_angle from the config file; {defaults}\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_listing() {
        let s = list_scenarios();
        assert!(s.contains("fiber-x") && s.contains("fiber-y"));
        assert!(s.lines().all(|l| l.contains("sigma_t = 0.1")));
        assert_eq!(s, list_scenarios());
    }
}
