//! Problem generators, MatrixMarket files, right-hand sides and convergence
//! histories.

mod generators;
mod history;
mod matrix_market;
mod rhs;

pub use generators::{
    gen_ones_rhs, gen_synth1, gen_synth3, linspace, random_rhs, random_rhs_list, random_spd, random_sqd,
    synth1_matrix, synth3_matrix, Problem,
};
pub use history::{parse_history_csv, read_history_csv, render_history_csv, write_history_csv, HISTORY_HEADER};
pub use matrix_market::{parse_matrix_market, read_matrix_market, write_matrix_market};
pub use rhs::{parse_rhs_text, read_rhs_file};
