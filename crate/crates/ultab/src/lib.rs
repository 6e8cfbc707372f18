//! File formats, Graphviz export, reproduction targets and the command-line
//! runner built on [`ultab_core`].

pub mod caps;
pub mod cli;
pub mod dot;
pub mod io;
pub mod repro;
