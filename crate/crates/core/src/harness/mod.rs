//! Verification cases, inclusion checks and report rendering.
pub mod cases;
pub mod corpus;
pub mod inclusion;
mod op_cases;
pub mod svg;

pub use cases::{run_case, CaseId, CaseReport, CaseSpec, Check, DEFAULT_SEED};
pub use corpus::{random_corpus, CorpusItem, CorpusRecipe, Ingredient};
pub use inclusion::{check_inclusion, InclusionReport, Tolerance, Violation};
pub use svg::{inclusion_svg, render_wf_svg, wf_svg, PlotSource};
