//! Turning config values into core objects: graphs, covariance models and
//! constellations.

use std::path::Path;

use algdiv_core::equalize::Cost;
use algdiv_core::signals::{Constellation, CovModel, Graph};
use algdiv_core::{Error, Result};

use crate::config::ExperimentConfig;

/// `K<n>`, `C<n>` and `petersen` are built in; anything else is read as an
/// edge-list file.
pub fn load_graph(spec: &str) -> Result<Graph> {
    let builtin_n = |prefix: char| spec.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok());
    if spec == "petersen" {
        return Ok(Graph::petersen());
    }
    if let Some(n) = builtin_n('K') {
        return Ok(Graph::complete(n));
    }
    if let Some(n) = builtin_n('C') {
        return Graph::cycle(n);
    }
    let text = std::fs::read_to_string(Path::new(spec))
        .map_err(|e| Error::Parse(format!("cannot read graph file {spec}: {e}")))?;
    Graph::parse_edge_list(&text, None)
}

/// Builds the covariance model named by `model`, reading its parameters
/// from the config. A `graph` key with no explicit model means diffusion.
pub fn model_from_config(cfg: &mut ExperimentConfig) -> Result<CovModel> {
    let default = if cfg.get("graph").is_some() { "graph" } else { "ar1" };
    let kind = cfg.take_str("model", default);
    let graph_models = ["graph", "heat"];
    let m = if graph_models.contains(&kind.as_str()) { 0 } else { cfg.take_usize("M", 8) };
    let model = match kind.as_str() {
        "white" => CovModel::white(m, 1.0),
        "ar1" => CovModel::ar1(m, cfg.take_f64("rho", 0.9)),
        "ar" => CovModel::ar(m, cfg.take_list("coeffs", &[0.9]), 1.0),
        "tones" | "chirp" => {
            let f = cfg.take_list("freqs", &[3.0, 11.0]);
            let a = cfg.take_list("amps", &vec![1.0; f.len()]);
            let noise = cfg.take_f64("noise_var", 0.01);
            if kind == "tones" {
                CovModel::tones(m, f, a, noise)
            } else {
                CovModel::chirp(m, f, a, noise, cfg.take_f64("mu", 1.0))
            }
        }
        "multipath" => CovModel::multipath_default(m),
        "graph" => CovModel::graph_diffusion(load_graph(&cfg.take_str("graph", "C6"))?),
        "heat" => {
            let g = load_graph(&cfg.take_str("graph", "C6"))?;
            CovModel::heat(g, cfg.take_f64("t", 1.0))
        }
        other => return Err(Error::Parse(format!("unknown model '{other}'"))),
    };
    Ok(model)
}

pub fn parse_constellation(s: &str) -> Result<Constellation> {
    match s.to_ascii_lowercase().as_str() {
        "bpsk" => Ok(Constellation::Mpsk(2)),
        "qpsk" => Ok(Constellation::Mpsk(4)),
        "16qam" | "qam16" => Ok(Constellation::Qam16),
        other => other
            .strip_suffix("psk")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 2)
            .map(Constellation::Mpsk)
            .ok_or_else(|| Error::Parse(format!("unknown constellation '{s}'"))),
    }
}

/// `cma`, `mma`, `ad<M>` (`ad4`, `ad8`, ...).
pub fn parse_cost(s: &str) -> Result<Cost> {
    match s.to_ascii_lowercase().as_str() {
        "cma" => Ok(Cost::Cma),
        "mma" => Ok(Cost::Mma),
        other => other
            .strip_prefix("ad")
            .map(|n| n.trim_start_matches('-').trim_start_matches('z'))
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .map(Cost::AdZm)
            .ok_or_else(|| Error::Parse(format!("unknown cost '{s}'"))),
    }
}

/// Residual-phase cell count: 4 for QAM and QPSK, M for M-PSK.
pub fn phase_grid(c: Constellation) -> usize {
    match c {
        Constellation::Mpsk(m) => m,
        Constellation::Qam16 => 4,
    }
}
