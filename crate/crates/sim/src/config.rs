//! Experiment configuration: flat `key = value` text with scenario presets.
//!
//! ```text
//! # comments start with '#'
//! scenario = fig9
//! sweep = bf_hz
//! grid = 100e3, 200e3, 500e3
//! models = baseline; parafac:512x2:1; parafac:auto10:1
//! trials = 100
//! ```
//!
//! `scenario` selects a preset; every other key overrides it regardless of order.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use irsfac::decomposition::DEFAULT_EPSILON;
use irsfac::pipeline::Scheme;
use irsfac::system::TuckerBitAccounting;

use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10_12,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Fig5,
        Scenario::Fig6,
        Scenario::Fig7,
        Scenario::Fig8,
        Scenario::Fig9,
        Scenario::Fig10_12,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
            Self::Fig9 => "fig9",
            Self::Fig10_12 => "fig10_12",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| SimError::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    RicianKDb,
    N,
    BfHz,
    PfDbm,
    PhaseBits,
    Rank,
    Antennas,
}

impl SweepVar {
    const ALL: [SweepVar; 7] = [
        SweepVar::RicianKDb,
        SweepVar::N,
        SweepVar::BfHz,
        SweepVar::PfDbm,
        SweepVar::PhaseBits,
        SweepVar::Rank,
        SweepVar::Antennas,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RicianKDb => "rician_k_db",
            Self::N => "n",
            Self::BfHz => "bf_hz",
            Self::PfDbm => "pf_dbm",
            Self::PhaseBits => "phase_bits",
            Self::Rank => "rank",
            Self::Antennas => "antennas",
        }
    }
}

impl FromStr for SweepVar {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| SimError::Config(format!("unknown sweep variable `{s}`")))
    }
}

/// Factor sizes, either explicit or `[N/2^(P−1), 2, …, 2]` for the current `N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sizes {
    Explicit(Vec<usize>),
    Auto(usize),
}

impl Sizes {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>, SimError> {
        let sizes = match self {
            Self::Explicit(v) => v.clone(),
            Self::Auto(p) => {
                let tail = 1usize << (p - 1);
                if !n.is_multiple_of(tail) || n / tail < 1 {
                    return Err(SimError::Config(format!("N = {n} is not divisible by 2^{}", p - 1)));
                }
                let mut v = vec![n / tail];
                v.extend(std::iter::repeat_n(2, p - 1));
                v
            }
        };
        if sizes.iter().product::<usize>() != n {
            return Err(SimError::Config(format!(
                "factor sizes {sizes:?} do not multiply to N = {n}"
            )));
        }
        Ok(sizes)
    }
}

/// One model of the comparison, as written in the config.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModelSpec {
    Baseline,
    Parafac { sizes: Sizes, rank: usize },
    Tucker { sizes: Sizes, ranks: Vec<usize> },
}

fn parse_dims(s: &str) -> Result<Vec<usize>, SimError> {
    s.split(['x', ','])
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| SimError::Config(format!("bad dimension `{d}` in `{s}`")))
        })
        .collect()
}

fn parse_sizes(s: &str) -> Result<Sizes, SimError> {
    match s.strip_prefix("auto") {
        Some(p) => {
            let p: usize = p.parse().map_err(|_| SimError::Config(format!("bad order in `{s}`")))?;
            if !(1..=15).contains(&p) {
                return Err(SimError::Config(format!("order in `{s}` must lie in 1..=15")));
            }
            Ok(Sizes::Auto(p))
        }
        None => Ok(Sizes::Explicit(parse_dims(s)?)),
    }
}

impl FromStr for ModelSpec {
    type Err = SimError;

    /// `baseline`, `parafac:<sizes>:<R>` or `tucker:<sizes>:<R1xR2x…>`, with sizes
    /// like `64x4x4` or `auto3`.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["baseline"] => Ok(Self::Baseline),
            ["parafac", sizes, rank] => Ok(Self::Parafac {
                sizes: parse_sizes(sizes)?,
                rank: rank
                    .parse()
                    .ok()
                    .filter(|&r| r > 0)
                    .ok_or_else(|| SimError::Config(format!("bad rank in `{s}`")))?,
            }),
            ["tucker", sizes, ranks] => Ok(Self::Tucker {
                sizes: parse_sizes(sizes)?,
                ranks: parse_dims(ranks)?,
            }),
            _ => Err(SimError::Config(format!("bad model `{s}`"))),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes = |s: &Sizes| match s {
            Sizes::Explicit(v) => join(v),
            Sizes::Auto(p) => format!("auto{p}"),
        };
        match self {
            Self::Baseline => f.write_str("baseline"),
            Self::Parafac { sizes: s, rank } => write!(f, "parafac:{}:{rank}", sizes(s)),
            Self::Tucker { sizes: s, ranks } => write!(f, "tucker:{}:{}", sizes(s), join(ranks)),
        }
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

impl ModelSpec {
    /// Concrete scheme for `N` elements, with an optional PARAFAC rank override.
    pub fn scheme(&self, n: usize, rank_override: Option<usize>) -> Result<Scheme, SimError> {
        Ok(match self {
            Self::Baseline => Scheme::Baseline,
            Self::Parafac { sizes, rank } => Scheme::Parafac {
                sizes: sizes.resolve(n)?,
                rank: rank_override.unwrap_or(*rank),
            },
            Self::Tucker { sizes, ranks } => {
                let sizes = sizes.resolve(n)?;
                if ranks.len() != sizes.len() {
                    return Err(SimError::Config(format!(
                        "model `{self}` has {} ranks for {} factors",
                        ranks.len(),
                        sizes.len()
                    )));
                }
                Scheme::Tucker {
                    sizes,
                    ranks: ranks.clone(),
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub sweep: SweepVar,
    pub grid: Vec<f64>,
    pub models: Vec<ModelSpec>,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub n: usize,
    pub m_t: usize,
    pub m_r: usize,
    pub rician_k_db: f64,
    /// Pathloss of both links and of the feedback channel, dB (positive = loss).
    pub pathloss_db: f64,
    pub b_f_hz: f64,
    pub p_f_dbm: f64,
    pub phase_bits: u8,
    pub weight_bits: u8,
    /// `false` skips quantization and feedback (continuous phases and weights).
    pub quantized: bool,
    pub include_preamble: bool,
    pub accounting: TuckerBitAccounting,
    /// Only evaluate payloads; no channels are drawn.
    pub payload_only: bool,
    pub als_max_iters: usize,
    pub als_epsilon: f64,
    /// Fill the `elapsed_s` column; off by default so output is reproducible.
    pub record_timing: bool,
}

pub const DEFAULT_TRIALS: usize = 200;
pub const QUICK_TRIALS: usize = 20;

fn models(list: &str) -> Vec<ModelSpec> {
    list.split(';').map(|m| m.parse().expect("preset model")).collect()
}

impl ExperimentConfig {
    /// Preset for a scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let base = Self {
            scenario,
            sweep: SweepVar::RicianKDb,
            grid: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0],
            models: vec![ModelSpec::Baseline],
            trials: DEFAULT_TRIALS,
            seed: 1,
            output: None,
            n: 1024,
            m_t: 2,
            m_r: 2,
            rician_k_db: 10.0,
            pathloss_db: 0.0,
            b_f_hz: irsfac::system::SystemParams::DEFAULT_B_F,
            p_f_dbm: irsfac::system::SystemParams::DEFAULT_P_F_DBM,
            phase_bits: 3,
            weight_bits: 3,
            quantized: true,
            include_preamble: true,
            accounting: TuckerBitAccounting::Literal,
            payload_only: false,
            als_max_iters: 500,
            als_epsilon: DEFAULT_EPSILON,
            record_timing: false,
        };
        match scenario {
            // rate vs K, PARAFAC against Tucker on 64x4x4, continuous
            Scenario::Fig5 => Self {
                quantized: false,
                models: models(
                    "baseline; parafac:64x4x4:1; parafac:64x4x4:2; parafac:64x4x4:4; parafac:64x4x4:16; \
                     tucker:64x4x4:4x4x4; tucker:64x4x4:8x4x4; tucker:64x4x4:16x4x4",
                ),
                ..base
            },
            // payload ratio vs the order P, N = 1024, no preamble
            Scenario::Fig6 => Self {
                sweep: SweepVar::N,
                grid: vec![1024.0],
                trials: 1,
                payload_only: true,
                include_preamble: false,
                models: models(
                    "baseline; parafac:auto2:1; parafac:256x4:1; parafac:auto3:1; parafac:auto4:1; \
                     parafac:auto5:1; parafac:auto6:1; parafac:auto7:1; parafac:auto8:1; parafac:auto9:1; parafac:auto10:1",
                ),
                ..base
            },
            // rate vs K for P = 2, 3, 4, 10 at R = 1
            Scenario::Fig7 => Self {
                models: models("baseline; parafac:auto2:1; parafac:auto3:1; parafac:auto4:1; parafac:auto10:1"),
                ..base
            },
            // payload bits vs N for P = 2, 3, 4
            Scenario::Fig8 => Self {
                sweep: SweepVar::N,
                grid: vec![256.0, 512.0, 1024.0, 2048.0, 4096.0],
                trials: 1,
                payload_only: true,
                models: models("baseline; parafac:auto2:1; parafac:auto3:1; parafac:auto4:1"),
                ..base
            },
            // SE/EE vs feedback bandwidth, 16x16 antennas
            Scenario::Fig9 => Self {
                sweep: SweepVar::BfHz,
                grid: vec![50e3, 100e3, 200e3, 500e3, 1e6, 2e6],
                m_t: 16,
                m_r: 16,
                pathloss_db: 110.0,
                models: models("baseline; parafac:512x2:1; parafac:256x2x2:1; parafac:auto10:1"),
                ..base
            },
            // SE/EE vs feedback power, 2x2 antennas
            Scenario::Fig10_12 => Self {
                sweep: SweepVar::PfDbm,
                grid: vec![-30.0, -20.0, -10.0, 0.0, 10.0, 20.0],
                pathloss_db: 110.0,
                models: models("baseline; parafac:512x2:1; parafac:256x2x2:1; parafac:auto10:1"),
                ..base
            },
        }
    }

    /// CI profile: fewer trials.
    pub fn quick(mut self) -> Self {
        self.trials = self.trials.min(QUICK_TRIALS);
        self
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SimError::Config(format!("line {}: expected `key = value`", no + 1)))?;
            pairs.push((no + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let scenario = match pairs.iter().find(|(_, k, _)| k == "scenario") {
            Some((_, _, v)) => v.parse()?,
            None => return Err(SimError::Config("missing key `scenario`".into())),
        };
        let mut cfg = Self::preset(scenario);
        for (no, k, v) in &pairs {
            cfg.set(k, v).map_err(|e| match e {
                SimError::Config(m) => SimError::Config(format!("line {no}: {m}")),
                e => SimError::Config(format!("line {no}: {e}")),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SimError> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, SimError> {
            v.parse()
                .map_err(|_| SimError::Config(format!("bad value `{v}` for `{key}`")))
        }
        fn flag(key: &str, v: &str) -> Result<bool, SimError> {
            match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(SimError::Config(format!("bad boolean `{v}` for `{key}`"))),
            }
        }
        match key {
            "scenario" => self.scenario = value.parse()?,
            "sweep" => self.sweep = value.parse()?,
            "grid" => {
                self.grid = value
                    .split(',')
                    .map(|x| num::<f64>(key, x.trim()))
                    .collect::<Result<_, _>>()?
            }
            "models" => {
                self.models = value
                    .split(';')
                    .filter(|m| !m.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_, _>>()?
            }
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "n" => self.n = num(key, value)?,
            "m_t" => self.m_t = num(key, value)?,
            "m_r" => self.m_r = num(key, value)?,
            "antennas" => {
                self.m_t = num(key, value)?;
                self.m_r = self.m_t;
            }
            "rician_k_db" => self.rician_k_db = num(key, value)?,
            "pathloss_db" => self.pathloss_db = num(key, value)?,
            "bf_hz" => self.b_f_hz = num(key, value)?,
            "pf_dbm" => self.p_f_dbm = num(key, value)?,
            "phase_bits" => self.phase_bits = num(key, value)?,
            "weight_bits" => self.weight_bits = num(key, value)?,
            "quantized" => self.quantized = flag(key, value)?,
            "include_preamble" => self.include_preamble = flag(key, value)?,
            "tucker_accounting" => {
                self.accounting = match value {
                    "literal" => TuckerBitAccounting::Literal,
                    "core_phase_resolution" => TuckerBitAccounting::CorePhaseResolution,
                    "codec" => TuckerBitAccounting::Codec,
                    _ => return Err(SimError::Config(format!("bad tucker_accounting `{value}`"))),
                }
            }
            "payload_only" => self.payload_only = flag(key, value)?,
            "als_max_iters" => self.als_max_iters = num(key, value)?,
            "als_epsilon" => self.als_epsilon = num(key, value)?,
            "record_timing" => self.record_timing = flag(key, value)?,
            _ => return Err(SimError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: &str| Err(SimError::Config(m.to_string()));
        if self.grid.is_empty() {
            return fail("grid must not be empty");
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return fail("grid values must be finite");
        }
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.models.is_empty() {
            return fail("at least one model is required");
        }
        if !(1..=16).contains(&self.phase_bits) || !(1..=16).contains(&self.weight_bits) {
            return fail("resolutions must lie in 1..=16 bits");
        }
        if self.als_max_iters == 0 || self.als_epsilon.is_nan() || self.als_epsilon <= 0.0 {
            return fail("ALS needs at least one iteration and a positive epsilon");
        }
        let integral = matches!(
            self.sweep,
            SweepVar::N | SweepVar::PhaseBits | SweepVar::Rank | SweepVar::Antennas
        );
        if integral && self.grid.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return fail("this sweep variable takes positive integers");
        }
        for point in 0..self.grid.len() {
            let p = self.point(point);
            for m in &self.models {
                m.scheme(p.n, p.rank)?;
            }
        }
        Ok(())
    }

    /// Parameters in effect at sweep point `index`.
    pub fn point(&self, index: usize) -> SweepPoint {
        let v = self.grid[index];
        let mut p = SweepPoint {
            value: v,
            n: self.n,
            m_t: self.m_t,
            m_r: self.m_r,
            rician_k_db: self.rician_k_db,
            b_f_hz: self.b_f_hz,
            p_f_dbm: self.p_f_dbm,
            phase_bits: self.phase_bits,
            rank: None,
        };
        match self.sweep {
            SweepVar::RicianKDb => p.rician_k_db = v,
            SweepVar::N => p.n = v as usize,
            SweepVar::BfHz => p.b_f_hz = v,
            SweepVar::PfDbm => p.p_f_dbm = v,
            SweepVar::PhaseBits => p.phase_bits = v as u8,
            SweepVar::Rank => p.rank = Some(v as usize),
            SweepVar::Antennas => {
                p.m_t = v as usize;
                p.m_r = v as usize;
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub n: usize,
    pub m_t: usize,
    pub m_r: usize,
    pub rician_k_db: f64,
    pub b_f_hz: f64,
    pub p_f_dbm: f64,
    pub phase_bits: u8,
    pub rank: Option<usize>,
}
