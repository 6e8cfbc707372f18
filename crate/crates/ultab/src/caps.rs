//! Search caps, with optional overrides from the environment.
//!
//! | variable | default |
//! |---|---|
//! | `ULTAB_VALUATION_CAP` | valuations enumerated by frame validity |
//! | `ULTAB_SEARCH_CAP` | nodes visited by p-morphism searches |
//! | `ULTAB_FRAME_SIZE_CAP` | largest generator accepted by frame closures |
//!
//! Unset variables keep the library defaults.

use ultab_core::morphism::DEFAULT_SEARCH_CAP;
use ultab_core::semantics::DEFAULT_VALUATION_CAP;
use ultab_core::uniformity::DEFAULT_FRAME_SIZE_CAP;

pub const VALUATION_VAR: &str = "ULTAB_VALUATION_CAP";
pub const SEARCH_VAR: &str = "ULTAB_SEARCH_CAP";
pub const FRAME_SIZE_VAR: &str = "ULTAB_FRAME_SIZE_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub valuations: u64,
    pub search_nodes: u64,
    pub frame_size: usize,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps { valuations: DEFAULT_VALUATION_CAP, search_nodes: DEFAULT_SEARCH_CAP, frame_size: DEFAULT_FRAME_SIZE_CAP }
    }
}

impl Caps {
    pub fn from_env() -> Result<Caps, String> {
        Caps::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Caps, String> {
        let mut caps = Caps::default();
        let num = |var: &str| -> Result<Option<u64>, String> {
            match get(var) {
                None => Ok(None),
                Some(s) => s.trim().parse().map(Some).map_err(|_| format!("{var}: `{s}` is not a number")),
            }
        };
        if let Some(v) = num(VALUATION_VAR)? {
            caps.valuations = v;
        }
        if let Some(v) = num(SEARCH_VAR)? {
            caps.search_nodes = v;
        }
        if let Some(v) = num(FRAME_SIZE_VAR)? {
            caps.frame_size = v as usize;
        }
        Ok(caps)
    }
}
