//! Problem representation: graphs, objective, QUBO and Ising encodings,
//! instance generation, file I/O and the exhaustive oracle.

mod generate;
mod graph;
mod io;
mod oracle;
mod qubo;

pub use generate::{generate, GeneratorConfig};
pub(crate) use graph::cut_unchecked;
pub use graph::{cut_value, CutAssignment, Edge, WeightedGraph};
pub use io::{format_graph, parse_graph, read_graph, write_graph};
pub use oracle::{brute_force_optimum, BRUTE_FORCE_LIMIT};
pub use qubo::{build_dense_hamiltonian, build_qubo, QuboMatrix, DENSE_QUBIT_LIMIT};
