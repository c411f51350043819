//! Experiment configuration: JSON file, flag overrides and resolution of
//! kind-specific defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use mixer_core::cm_dynamics::default_horizon;
use mixer_core::exact_oracle::MAX_KERNEL_N;
use mixer_core::phase_diagram::{beta_thresholds, xi_weight};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Experiment kinds, one per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Thresholds,
    CmExit,
    CmMix,
    PottsExit,
    PottsMix,
    SurrogateCstar,
    VerifyExact,
    SwMix,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Thresholds => "thresholds",
            Kind::CmExit => "cm-exit",
            Kind::CmMix => "cm-mix",
            Kind::PottsExit => "potts-exit",
            Kind::PottsMix => "potts-mix",
            Kind::SurrogateCstar => "surrogate-cstar",
            Kind::VerifyExact => "verify-exact",
            Kind::SwMix => "sw-mix",
        }
    }

    pub fn stochastic(self) -> bool {
        !matches!(self, Kind::Thresholds | Kind::VerifyExact)
    }

    fn random_cluster(self) -> bool {
        matches!(self, Kind::CmExit | Kind::CmMix | Kind::SwMix)
    }

    fn potts(self) -> bool {
        matches!(self, Kind::PottsExit | Kind::PottsMix)
    }

    fn needs_n(self) -> bool {
        !matches!(self, Kind::Thresholds | Kind::SurrogateCstar)
    }

    fn mixing(self) -> bool {
        matches!(self, Kind::CmMix | Kind::SwMix | Kind::PottsMix)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKeyword {
    AutoCstar,
}

/// An initialisation parameter: a number, or `"auto-cstar"` to place the
/// start at the critical offset found from the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Init {
    Value(f64),
    Keyword(InitKeyword),
}

impl Init {
    pub fn parse(field: &'static str, s: &str) -> Result<Self, ConfigError> {
        if s == "auto-cstar" {
            return Ok(Init::Keyword(InitKeyword::AutoCstar));
        }
        s.parse::<f64>()
            .map(Init::Value)
            .map_err(|_| ConfigError::invalid(field, format!("expected a number or \"auto-cstar\", got {s:?}")))
    }
}

/// Configuration as read from JSON. Every field is optional so that a file,
/// flags, or both can supply it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// CM/SW start `G(n, λ0/n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<Init>,
    /// Potts start: dominant proportion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<Init>,
    /// Offset `c` from the saddle in units of `1/√n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
    /// Target left-exit probability for `auto-cstar` and `surrogate-cstar`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cstar_replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good_set_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assert_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: field `{field}`: {message}")]
    Parse {
        path: PathBuf,
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("field `{field}` is required for kind {kind}")]
    Missing { field: &'static str, kind: Kind },
}

impl ConfigError {
    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            message: message.into(),
        }
    }
}

/// Parses a JSON config, reporting the failing field path with line and
/// column.
pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            path: path.to_path_buf(),
            field,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

impl ExperimentConfig {
    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: ExperimentConfig) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { Self { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            kind,
            q,
            beta,
            n,
            lambda0,
            m0,
            offset,
            gamma,
            replicas,
            max_steps,
            seed,
            stride,
            target,
            cstar_replicas,
            good_set_k,
            trajectories,
            assert_tol,
            out
        )
    }
}

pub const DEFAULT_GAMMA: f64 = 8.0;
pub const DEFAULT_REPLICAS: usize = 200;
pub const DEFAULT_SURROGATE_REPLICAS: usize = 20_000;
pub const DEFAULT_POTTS_CSTAR_REPLICAS: usize = 2_000;
pub const DEFAULT_GOOD_SET_K: f64 = 10.0;
pub const DEFAULT_ASSERT_TOL: f64 = 0.05;
pub const SURROGATE_MAX_STEPS: u64 = 10_000;

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub kind: Kind,
    pub q: f64,
    pub beta: f64,
    pub n: u32,
    /// `lambda0` for random-cluster kinds, `m0` for Potts kinds.
    pub init: Option<Init>,
    pub offset: Option<f64>,
    pub gamma: f64,
    pub replicas: usize,
    pub max_steps: u64,
    pub seed: u64,
    pub stride: u64,
    /// Defaults to `ξ(q)`, which exists only for `q > 2`.
    pub target: Option<f64>,
    pub cstar_replicas: usize,
    pub good_set_k: f64,
    pub trajectories: bool,
    pub assert_tol: f64,
    pub out: PathBuf,
}

fn positive(field: &'static str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(ConfigError::invalid(
            field,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

impl Resolved {
    pub fn from_config(cfg: ExperimentConfig, kind: Kind) -> Result<Self, ConfigError> {
        if let Some(k) = cfg.kind {
            if k != kind {
                return Err(ConfigError::invalid(
                    "kind",
                    format!("config says {k} but the subcommand is {kind}"),
                ));
            }
        }
        let q = cfg.q.unwrap_or(3.0);
        if !(q.is_finite() && q > 1.0) {
            return Err(ConfigError::invalid("q", format!("must exceed 1, got {q}")));
        }
        let integer_q = q.fract() == 0.0 && q >= 2.0;
        if (kind.potts() || kind == Kind::SwMix) && !integer_q {
            return Err(ConfigError::invalid(
                "q",
                format!("kind {kind} needs an integer q ≥ 2, got {q}"),
            ));
        }
        let first_order = beta_thresholds(q);
        if let Err(e) = &first_order {
            if matches!(kind, Kind::Thresholds | Kind::SurrogateCstar) || kind.potts() {
                return Err(ConfigError::invalid("q", format!("kind {kind} needs q > 2: {e}")));
            }
        }
        // For q ≤ 2 the transition is continuous and sits at β = q.
        let beta = match cfg.beta {
            Some(b) => positive("beta", b)?,
            None => first_order.map_or(q, |b| b.beta_c),
        };
        let n = match (cfg.n, kind.needs_n()) {
            (Some(n), _) => n,
            (None, true) => return Err(ConfigError::Missing { field: "n", kind }),
            (None, false) => 0,
        };
        if kind.needs_n() && n < 2 {
            return Err(ConfigError::invalid("n", format!("must be at least 2, got {n}")));
        }
        if kind == Kind::VerifyExact && n as usize > MAX_KERNEL_N {
            return Err(ConfigError::invalid(
                "n",
                format!("exact verification supports n ≤ {MAX_KERNEL_N}, got {n}"),
            ));
        }
        if kind.potts() && n < 100 {
            return Err(ConfigError::invalid("n", format!("Potts runs need n ≥ 100, got {n}")));
        }

        let init = match (cfg.lambda0, cfg.m0) {
            (Some(_), _) if !kind.random_cluster() => {
                return Err(ConfigError::invalid("lambda0", format!("not used by kind {kind}")))
            }
            (_, Some(_)) if !kind.potts() => {
                return Err(ConfigError::invalid("m0", format!("not used by kind {kind}")))
            }
            (l, m) => l.or(m),
        };
        if cfg.offset.is_some() && !(kind.random_cluster() || kind.potts() || kind == Kind::SurrogateCstar) {
            return Err(ConfigError::invalid("offset", format!("not used by kind {kind}")));
        }
        if cfg.offset.is_some() && init.is_some() {
            return Err(ConfigError::invalid(
                "offset",
                "give either an offset or an explicit initialisation, not both",
            ));
        }
        if let Some(Init::Value(x)) = init {
            if kind.random_cluster() && !(x.is_finite() && x >= 0.0) {
                return Err(ConfigError::invalid("lambda0", format!("must be nonnegative, got {x}")));
            }
            if kind.potts() && !(x > 1.0 / q && x <= 1.0) {
                return Err(ConfigError::invalid("m0", format!("must lie in (1/q, 1], got {x}")));
            }
        }
        if let Some(c) = cfg.offset {
            if !c.is_finite() {
                return Err(ConfigError::invalid("offset", "must be finite"));
            }
        }

        let gamma = positive("gamma", cfg.gamma.unwrap_or(DEFAULT_GAMMA))?;
        let default_replicas = if kind == Kind::SurrogateCstar {
            DEFAULT_SURROGATE_REPLICAS
        } else {
            DEFAULT_REPLICAS
        };
        let replicas = cfg.replicas.unwrap_or(default_replicas);
        if replicas == 0 {
            return Err(ConfigError::invalid("replicas", "must be at least 1"));
        }
        let nf = n as f64;
        let max_steps = cfg.max_steps.unwrap_or(match kind {
            k if k.random_cluster() => default_horizon(n as usize) as u64,
            k if k.potts() => (30.0 * nf * nf.ln()).ceil() as u64,
            Kind::SurrogateCstar => SURROGATE_MAX_STEPS,
            _ => 0,
        });
        let seed = match (cfg.seed, kind.stochastic()) {
            (Some(s), _) => s,
            (None, true) => return Err(ConfigError::Missing { field: "seed", kind }),
            (None, false) => 0,
        };
        let stride = cfg.stride.unwrap_or(if kind.potts() { n as u64 } else { 1 });
        if stride == 0 {
            return Err(ConfigError::invalid("stride", "must be at least 1"));
        }
        let target = cfg.target.or_else(|| xi_weight(q).ok());
        if let Some(t) = target {
            if !(t > 0.0 && t < 1.0) {
                return Err(ConfigError::invalid("target", format!("must lie in (0, 1), got {t}")));
            }
        }
        let default_cstar = if kind.potts() {
            DEFAULT_POTTS_CSTAR_REPLICAS
        } else {
            DEFAULT_SURROGATE_REPLICAS
        };
        let cstar_replicas = cfg.cstar_replicas.unwrap_or(default_cstar);
        if cstar_replicas < 2 {
            return Err(ConfigError::invalid("cstar_replicas", "must be at least 2"));
        }
        Ok(Self {
            kind,
            q,
            beta,
            n,
            init,
            offset: cfg.offset,
            gamma,
            replicas,
            max_steps,
            seed,
            stride,
            target,
            cstar_replicas,
            good_set_k: positive("good_set_k", cfg.good_set_k.unwrap_or(DEFAULT_GOOD_SET_K))?,
            trajectories: cfg.trajectories.unwrap_or(kind.mixing()),
            assert_tol: positive("assert_tol", cfg.assert_tol.unwrap_or(DEFAULT_ASSERT_TOL))?,
            out: cfg
                .out
                .unwrap_or_else(|| PathBuf::from(format!("mixer-{}", kind.name()))),
        })
    }

    /// The resolved settings as a config that reproduces this run.
    pub fn echo(&self) -> ExperimentConfig {
        let k = self.kind;
        ExperimentConfig {
            kind: Some(k),
            q: Some(self.q),
            beta: Some(self.beta),
            n: k.needs_n().then_some(self.n),
            lambda0: if k.random_cluster() { self.init } else { None },
            m0: if k.potts() { self.init } else { None },
            offset: self.offset,
            gamma: k.stochastic().then_some(self.gamma),
            replicas: k.stochastic().then_some(self.replicas),
            max_steps: k.stochastic().then_some(self.max_steps),
            seed: k.stochastic().then_some(self.seed),
            stride: k.stochastic().then_some(self.stride),
            target: self.target,
            cstar_replicas: k.stochastic().then_some(self.cstar_replicas),
            good_set_k: k.random_cluster().then_some(self.good_set_k),
            trajectories: k.stochastic().then_some(self.trajectories),
            assert_tol: Some(self.assert_tol),
            out: Some(self.out.clone()),
        }
    }

    pub fn target(&self) -> Result<f64, ConfigError> {
        self.target
            .ok_or_else(|| ConfigError::invalid("target", format!("no default at q = {}; set it", self.q)))
    }

    pub fn threads(&self) -> Option<usize> {
        std::env::var("MIXER_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&k: &usize| k > 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig, ConfigError> {
        parse_config(s, Path::new("test.json"))
    }

    #[test]
    fn unknown_field_reports_line_and_name() {
        let err = parse("{\n  \"q\": 3,\n  \"betta\": 2.7\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("betta"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_type_reports_field_path() {
        let err = parse("{\"n\": \"many\"}").unwrap_err();
        match err {
            ConfigError::Parse { field, .. } => assert_eq!(field, "n"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn init_accepts_number_or_keyword() {
        let cfg = parse(r#"{"lambda0": "auto-cstar", "m0": 0.4}"#).unwrap();
        assert_eq!(cfg.lambda0, Some(Init::Keyword(InitKeyword::AutoCstar)));
        assert_eq!(cfg.m0, Some(Init::Value(0.4)));
        assert!(Init::parse("lambda0", "nope").is_err());
    }

    #[test]
    fn overrides_win() {
        let base = ExperimentConfig {
            q: Some(3.0),
            n: Some(10),
            ..Default::default()
        };
        let over = ExperimentConfig {
            n: Some(20),
            ..Default::default()
        };
        let m = base.merge(over);
        assert_eq!(m.q, Some(3.0));
        assert_eq!(m.n, Some(20));
    }

    #[test]
    fn seed_required_for_stochastic_kinds() {
        let cfg = ExperimentConfig {
            n: Some(1000),
            ..Default::default()
        };
        assert!(matches!(
            Resolved::from_config(cfg.clone(), Kind::CmExit),
            Err(ConfigError::Missing { field: "seed", .. })
        ));
        assert!(Resolved::from_config(cfg, Kind::Thresholds).is_ok());
    }

    #[test]
    fn echo_resolves_to_itself() {
        let cfg = ExperimentConfig {
            n: Some(1000),
            seed: Some(4),
            offset: Some(-1.5),
            ..Default::default()
        };
        let r = Resolved::from_config(cfg, Kind::CmMix).unwrap();
        let again = Resolved::from_config(r.echo(), Kind::CmMix).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let cfg = ExperimentConfig {
            kind: Some(Kind::CmExit),
            ..Default::default()
        };
        assert!(Resolved::from_config(cfg, Kind::Thresholds).is_err());
    }

    #[test]
    fn potts_needs_integer_q() {
        let cfg = ExperimentConfig {
            q: Some(2.5),
            n: Some(1000),
            seed: Some(1),
            ..Default::default()
        };
        assert!(Resolved::from_config(cfg, Kind::PottsExit).is_err());
    }
}
