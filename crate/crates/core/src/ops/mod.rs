//! Offline transducer algorithms and the path-enumeration oracle.

pub mod compose;
pub mod connect;
pub mod determinize;
pub mod epsilon;
pub mod minimize;
pub mod paths;
pub mod push;
pub mod replace;

pub use compose::{clear_input_labels, compose, compose_sorted};
pub use connect::{connect, is_connected};
pub use determinize::{determinize, determinize_with_budget, is_deterministic_modulo_chains};
pub use epsilon::rm_epsilon_local;
pub use minimize::minimize;
pub use paths::{
    distance_from_start, distance_to_final, enumerate_paths, path_set_labeled, shortest_path,
    PathSet,
};
pub use push::{push_labels, push_weights};
pub use replace::{replace, ReplaceSpec};
