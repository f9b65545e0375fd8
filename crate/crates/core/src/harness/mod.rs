//! Monte Carlo BER experiments, figure presets and rate tables.

mod config;
mod figures;
mod output;
mod rate_table;
mod sim;

pub use config::{
    mean_frame_energy, ChannelSpec, Derived, InterleaverSpec, LedSpec, PhotonSpec, Prepared, SchemeSpec,
    SearchBudgetSpec, SimConfig, Sweep,
};
pub use figures::{
    fig8_rate_csv, figure_configs, reproduce_figure, Curve, FigureOptions, FigureOutput, FIG4_P0, FIG6_SIGMA,
    FIG6_NLOS_SIGMA, FIG6_TAU, FIG7_SIGMA, FIG7_TAU, FIG8_OVERLAP, FIG8_P0, FIG8_T_LED, FIGURES, PATH_ENERGY,
};
pub use output::{points_to_csv, CSV_HEADER};
pub use rate_table::{rate_table, rate_table_csv, RateRow};
pub use sim::{point_seed, run_ber, simulate_point, BerPoint, RunOptions, ROUND_BLOCKS};
