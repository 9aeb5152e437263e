//! Blind equalization costs (CMA, MMA, AD-ℤ_M), a symbol-spaced SGD
//! equalizer, residual phase against the ℤ_M grid and the ensemble harness.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::rng::trial_rng;
use crate::signals::{channel_apply_with, symbols_from, ChannelModel, Constellation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cost {
    /// E[(|y|² − R²)²].
    Cma,
    /// E[(y_R² − R_R²)²] + E[(y_I² − R_I²)²].
    Mma,
    /// E[|y^M − C_M|²] with C_M = E[s^M].
    AdZm(usize),
}

impl Cost {
    pub fn label(self) -> String {
        match self {
            Cost::Cma => "cma".into(),
            Cost::Mma => "mma".into(),
            Cost::AdZm(m) => format!("ad_z{m}"),
        }
    }
}

/// Dispersion constants computed from the exact point set.
#[derive(Clone, Debug, PartialEq)]
pub struct CostConstants {
    /// E|s|⁴ / E|s|².
    pub r2: f64,
    /// E s_R⁴ / E s_R² and the same for the imaginary axis.
    pub r2_re: f64,
    pub r2_im: f64,
    /// E s^M for the AD cost order (zero when the cost is not AD).
    pub c_m: C64,
    pub m: usize,
}

impl CostConstants {
    pub fn new(cost: Cost, constellation: Constellation) -> Self {
        let pts = constellation.points();
        let n = pts.len() as f64;
        let mean = |f: &dyn Fn(C64) -> f64| pts.iter().map(|&s| f(s)).sum::<f64>() / n;
        let r2 = mean(&|s| s.norm_sqr().powi(2)) / mean(&|s| s.norm_sqr());
        let r2_re = mean(&|s| s.re.powi(4)) / mean(&|s| s.re.powi(2)).max(f64::MIN_POSITIVE);
        let r2_im = mean(&|s| s.im.powi(4)) / mean(&|s| s.im.powi(2)).max(f64::MIN_POSITIVE);
        let m = match cost {
            Cost::AdZm(m) => m,
            _ => 0,
        };
        let c_m = if m > 0 { pts.iter().map(|s| s.powu(m as u32)).sum::<C64>() / n } else { C64::new(0.0, 0.0) };
        Self { r2, r2_re, r2_im, c_m, m }
    }
}

/// Per-sample cost J and its conjugate Wirtinger derivative ∂J/∂ȳ.
pub fn cost_and_gradient(cost: Cost, y: C64, k: &CostConstants) -> (f64, C64) {
    match cost {
        Cost::Cma => {
            let e = y.norm_sqr() - k.r2;
            (e * e, y * (2.0 * e))
        }
        Cost::Mma => {
            let er = y.re * y.re - k.r2_re;
            let ei = y.im * y.im - k.r2_im;
            (er * er + ei * ei, C64::new(2.0 * er * y.re, 2.0 * ei * y.im))
        }
        Cost::AdZm(m) => {
            let e = y.powu(m as u32) - k.c_m;
            (e.norm_sqr(), e * y.conj().powu(m as u32 - 1) * m as f64)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EqualizerConfig {
    pub constellation: Constellation,
    pub cost: Cost,
    /// Odd, so the center-spike start is defined.
    pub n_taps: usize,
    pub step: f64,
    pub n_symbols: usize,
    pub channel: ChannelModel,
    /// None for a noiseless channel.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl EqualizerConfig {
    pub fn new(constellation: Constellation, cost: Cost, channel: ChannelModel) -> Self {
        Self { constellation, cost, n_taps: 11, step: 1e-3, n_symbols: 20_000, channel, snr_db: Some(25.0), seed: 0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidParameter("step must be positive".into()));
        }
        if self.n_taps % 2 == 0 {
            return Err(Error::InvalidParameter("n_taps must be odd".into()));
        }
        if self.n_symbols < 4 * self.n_taps {
            return Err(Error::InvalidParameter("n_symbols must be at least four times n_taps".into()));
        }
        if let Cost::AdZm(m) = self.cost {
            if m == 0 {
                return Err(Error::InvalidParameter("AD cost order must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EqualizerRun {
    pub taps: Vec<C64>,
    /// Last quarter of the outputs.
    pub outputs: Vec<C64>,
    /// Transmitted symbols aligned with `outputs` by the center-tap delay.
    pub symbols: Vec<C64>,
    /// Mean per-sample cost over the output window.
    pub converged_cost: f64,
}

/// Runs with an RNG drawn from `cfg.seed`.
pub fn run_equalizer(cfg: &EqualizerConfig) -> Result<EqualizerRun> {
    let mut rng = crate::rng::seeded_rng(cfg.seed);
    run_equalizer_with(cfg, &mut rng)
}

/// y[n] = Σ_k w_k r[n−k]; w ← w − μ·(∂J/∂ȳ)·conj(r-window).
pub fn run_equalizer_with<R: Rng + ?Sized>(cfg: &EqualizerConfig, rng: &mut R) -> Result<EqualizerRun> {
    cfg.validate()?;
    let s = symbols_from(cfg.constellation, cfg.n_symbols, rng)?;
    let r = channel_apply_with(&cfg.channel, &s, cfg.snr_db, rng);
    run_on_received(cfg, &s, &r)
}

fn run_on_received(cfg: &EqualizerConfig, s: &[C64], r: &[C64]) -> Result<EqualizerRun> {
    let k = CostConstants::new(cfg.cost, cfg.constellation);
    let t = cfg.n_taps;
    let center = t / 2;
    let mut w = vec![C64::new(0.0, 0.0); t];
    w[center] = C64::new(1.0, 0.0);
    let n = r.len();
    let start = n - n / 4;
    let mut outputs = Vec::with_capacity(n - start);
    let mut cost_acc = 0.0;
    for i in 0..n {
        let tap = |j: usize| if i >= j { r[i - j] } else { C64::new(0.0, 0.0) };
        let y: C64 = (0..t).map(|j| w[j] * tap(j)).sum();
        let (j_cost, g) = cost_and_gradient(cfg.cost, y, &k);
        for (j, wj) in w.iter_mut().enumerate() {
            *wj -= g * tap(j).conj() * cfg.step;
        }
        let norm2: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        if !norm2.is_finite() || norm2 > 1e12 {
            return Err(Error::Divergence { step: cfg.step });
        }
        if i >= start {
            outputs.push(y);
            cost_acc += j_cost;
        }
    }
    let symbols = (start..n).map(|i| if i >= center { s[i - center] } else { C64::new(0.0, 0.0) }).collect();
    Ok(EqualizerRun { taps: w, converged_cost: cost_acc / outputs.len() as f64, outputs, symbols })
}

/// (1/M)·arg(Σ y^M · conj(C_M)) wrapped into (−π/M, π/M]; C_M is replaced by
/// 1 when it vanishes.
pub fn residual_phase(y: &[C64], m_grid: usize, constellation: Constellation) -> Result<f64> {
    if m_grid == 0 {
        return Err(Error::InvalidParameter("grid order must be positive".into()));
    }
    if y.is_empty() || y.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::ZeroOutputs);
    }
    let pts = constellation.points();
    let c: C64 = pts.iter().map(|s| s.powu(m_grid as u32)).sum::<C64>() / pts.len() as f64;
    let reference = if c.norm() > 1e-12 { c.conj() } else { C64::new(1.0, 0.0) };
    let acc: C64 = y.iter().map(|v| v.powu(m_grid as u32) * reference).sum();
    Ok(wrap_cell(acc.arg() / m_grid as f64, m_grid))
}

/// Wraps into (−π/M, π/M].
pub fn wrap_cell(phi: f64, m_grid: usize) -> f64 {
    let cell = 2.0 * PI / m_grid as f64;
    let half = cell / 2.0;
    let mut v = num_traits::Euclid::rem_euclid(&(phi + half), &cell) - half;
    if v <= -half {
        v += cell;
    }
    v
}

/// Mean squared distance to the nearest constellation point.
pub fn symbol_mse(y: &[C64], constellation: Constellation) -> f64 {
    let pts = constellation.points();
    let total: f64 = y.iter().map(|&v| pts.iter().map(|&p| (v - p).norm_sqr()).fold(f64::INFINITY, f64::min)).sum();
    total / y.len().max(1) as f64
}

/// Largest gap between the empirical CDF of `x` and the uniform law on (−a, a].
pub fn ks_uniform(x: &[f64], a: f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let f = ((xi + a) / (2.0 * a)).clamp(0.0, 1.0);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// One ensemble member: a fresh Rayleigh channel, symbols and noise, all from
/// the (seed, trial) stream.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrial {
    pub trial: u64,
    pub seed: u64,
    pub residual: f64,
    pub converged_cost: f64,
    pub symbol_mse: f64,
}

pub const ENSEMBLE_TAPS: usize = 5;
pub const ENSEMBLE_DECAY_DB: f64 = 3.0;

pub fn phase_trial(template: &EqualizerConfig, m_grid: usize, seed: u64, trial: u64) -> Result<PhaseTrial> {
    let mut rng = trial_rng(seed, trial);
    let channel = ChannelModel::rayleigh_from(ENSEMBLE_TAPS, ENSEMBLE_DECAY_DB, seed, &mut rng)?;
    let cfg = EqualizerConfig { channel, seed, ..template.clone() };
    let run = run_equalizer_with(&cfg, &mut rng)?;
    Ok(PhaseTrial {
        trial,
        seed,
        residual: residual_phase(&run.outputs, m_grid, cfg.constellation)?,
        converged_cost: run.converged_cost,
        symbol_mse: symbol_mse(&run.outputs, cfg.constellation),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseStats {
    /// Radians, each in (−π/M, π/M].
    pub residuals: Vec<f64>,
    /// Sample standard deviation of the pooled residuals, in degrees.
    pub std_deg: f64,
    /// 180/(M√3): the standard deviation of a uniform law on the cell.
    pub predicted_deg: f64,
    pub ks: f64,
    pub mean_symbol_mse: f64,
    pub failures: usize,
    pub trials: Vec<PhaseTrial>,
}

/// Aggregates trial outcomes; errors are counted and excluded.
pub fn phase_stats(outcomes: Vec<Result<PhaseTrial>>, m_grid: usize) -> Result<PhaseStats> {
    let total = outcomes.len();
    let trials: Vec<PhaseTrial> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    let failures = total - trials.len();
    if trials.len() < 2 {
        return Err(Error::Infeasible(format!("only {} of {total} equalizer trials succeeded", trials.len())));
    }
    let residuals: Vec<f64> = trials.iter().map(|t| t.residual).collect();
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(PhaseStats {
        std_deg: var.sqrt().to_degrees(),
        predicted_deg: 180.0 / (m_grid as f64 * 3f64.sqrt()),
        ks: ks_uniform(&residuals, PI / m_grid as f64),
        mean_symbol_mse: trials.iter().map(|t| t.symbol_mse).sum::<f64>() / n,
        residuals,
        failures,
        trials,
    })
}

pub fn phase_ensemble(template: &EqualizerConfig, m_grid: usize, n_trials: usize, seed: u64) -> Result<PhaseStats> {
    if n_trials < 50 {
        return Err(Error::InvalidParameter("phase ensemble needs at least 50 trials".into()));
    }
    let outcomes = (0..n_trials as u64).map(|t| phase_trial(template, m_grid, seed, t)).collect();
    phase_stats(outcomes, m_grid)
}
