//! File format, generators, named systems, parameter sampling and reports.

mod bench;
mod builtins;
mod generators;
mod parser;
mod printer;
mod qe;
mod report;

pub use bench::{run_bench, BenchError, Suite};
pub use builtins::{builtin_problem, orthant, rom, swe, BuiltinError, RomVariant};
pub use generators::{gen_s1, gen_s2, random_symmetric, GenError, COEFF_BOUND, RNG_NAME};
pub use parser::{parse_system, ParseError};
pub use printer::{print_reduced, print_system};
pub use qe::{format_value, parse_grid, qe_sample, GridAxis, QeRow, QeTable};
pub use report::{replay_report, BenchReport, BenchRow, Meta, QeReport, SolveReport, SystemInfo, SCHEMA_VERSION};
