//! Case files, result tables, run summaries and plots.

mod case;
pub mod plot;
mod results;

pub use case::{case_to_toml, load_case, parse_case, save_case, CaseError};
pub use results::{write_results, ResultsError};
