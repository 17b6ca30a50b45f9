//! Scenario files, metrics and CSV output.

mod bundled;
mod check;
mod file;
pub mod metrics;
pub mod output;

pub use file::{load_scenario, parse_scenario, save_scenario, scenario_to_string, scenario_warnings, LoadedScenario};
pub use bundled::{bundled, bundled_source, example, BUNDLED};
pub use check::{graph_report, GraphReport};
