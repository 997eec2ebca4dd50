//! Batch runs behind the `uvnlos` command-line tool: the text configuration
//! format, the sweeps, and their CSV/SVG rendering.
//!
//! Output depends only on the configuration (and seed). Sweep points may be
//! evaluated in parallel but rows are always emitted in a fixed order.

mod config;
mod sweeps;
mod table;

pub use config::{GeometryConfig, LinkBudget, RunConfig, Turbulence};
pub use sweeps::{run_ber_sweep, run_channel, run_geometry_sweep, run_mc, run_pdf, run_penalty, RunOutput};
pub use table::{Cell, PlotSpec, Table};
