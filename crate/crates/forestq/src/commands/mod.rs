pub mod bench;
pub mod query;
pub mod replay;
pub mod validate;

pub use bench::{bench_graph, run_bench, BenchArgs, BenchRow};
pub use query::{run_query, QueryArgs, QueryResult};
pub use replay::{run_replay, ReplayArgs, ReplayReport};
pub use validate::{run_validate, ValidateArgs, ValidateReport};
