//! TOML scenario model: declarative descriptions of envelopes, schedules,
//! wandering bounds, checks, simulations, and sweeps.
//!
//! All sections reject unknown keys so typos fail loudly instead of being
//! silently ignored. Variant-style sections (`kind = "..."`) are plain
//! structs with optional fields, validated when built, which keeps the
//! unknown-key rejection effective.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use sgkit::dynsim::{InterconnectionModel, InvariantSet};
use sgkit::gains::{ContractionEnvelope, ScalarFn, WanderingBound};
use sgkit::smallgain::ScheduleParams;

/// Top-level scenario file.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub envelope: Option<EnvelopeSpec>,
    pub schedule: Option<ScheduleSpec>,
    pub bounds: Option<BoundsSpec>,
    pub check: Option<CheckSpec>,
    pub simulation: Option<SimulationSpec>,
    pub sweep: Option<SweepSpec>,
    pub output: Option<OutputSpec>,
}

impl Scenario {
    pub fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("failed to parse scenario TOML")
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario file {}", path.display()))?;
        Self::from_str(&text)
    }

    pub fn require_envelope(&self) -> Result<ContractionEnvelope> {
        self.envelope
            .as_ref()
            .context("scenario needs an [envelope] section")?
            .build()
    }

    pub fn require_schedule(&self) -> Result<ScheduleParams> {
        let spec = self
            .schedule
            .as_ref()
            .context("scenario needs a [schedule] section")?;
        Ok(ScheduleParams::new(spec.d, spec.kappa)?)
    }

    pub fn require_simulation(&self) -> Result<&SimulationSpec> {
        self.simulation
            .as_ref()
            .context("scenario needs a [simulation] section")
    }
}

/// Scalar comparison function selected by `kind`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnSpec {
    /// One of `identity`, `linear`, `power`, `exp_decay`, `table`.
    pub kind: String,
    /// Slope of `linear`.
    pub slope: Option<f64>,
    /// Exponent of `power`.
    pub exponent: Option<f64>,
    /// Multiplier of `power` (default 1) or initial value of `exp_decay`.
    pub scale: Option<f64>,
    /// Rate of `exp_decay`.
    pub lambda: Option<f64>,
    /// Breakpoints of `table` as `[[s, f(s)], ...]`.
    pub points: Option<Vec<(f64, f64)>>,
}

impl FnSpec {
    pub fn build(&self) -> Result<ScalarFn> {
        let need = |v: Option<f64>, name: &str| {
            v.with_context(|| format!("function kind '{}' needs field '{name}'", self.kind))
        };
        Ok(match self.kind.as_str() {
            "identity" => ScalarFn::identity(),
            "linear" => ScalarFn::linear(need(self.slope, "slope")?),
            "power" => {
                let p = need(self.exponent, "exponent")?;
                let a = self.scale.unwrap_or(1.0);
                ScalarFn::new(format!("{a}*s^{p}"), move |s| a * s.powf(p))
            }
            "exp_decay" => {
                ScalarFn::exp_decay(need(self.lambda, "lambda")?, need(self.scale, "scale")?)
            }
            "table" => ScalarFn::table(
                self.points
                    .clone()
                    .context("function kind 'table' needs field 'points'")?,
            )?,
            other => bail!(
                "unknown function kind '{other}' \
                 (expected identity, linear, power, exp_decay, or table)"
            ),
        })
    }
}

/// Contraction envelope: `kind = "exponential"` (fields `lambda`, `d_beta`)
/// or `kind = "separable"` (fields `beta_x`, `beta_t`); both need `c`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    pub kind: String,
    pub lambda: Option<f64>,
    pub d_beta: Option<f64>,
    pub c: f64,
    pub beta_x: Option<FnSpec>,
    pub beta_t: Option<FnSpec>,
}

impl EnvelopeSpec {
    pub fn build(&self) -> Result<ContractionEnvelope> {
        match self.kind.as_str() {
            "exponential" => {
                if self.beta_x.is_some() || self.beta_t.is_some() {
                    bail!("exponential envelopes take lambda/d_beta, not beta_x/beta_t");
                }
                let lambda = self.lambda.context("exponential envelope needs 'lambda'")?;
                let d_beta = self.d_beta.context("exponential envelope needs 'd_beta'")?;
                Ok(ContractionEnvelope::exponential(lambda, d_beta, self.c)?)
            }
            "separable" => {
                if self.lambda.is_some() || self.d_beta.is_some() {
                    bail!("separable envelopes take beta_x/beta_t, not lambda/d_beta");
                }
                let bx = self
                    .beta_x
                    .as_ref()
                    .context("separable envelope needs 'beta_x'")?
                    .build()?;
                let bt = self
                    .beta_t
                    .as_ref()
                    .context("separable envelope needs 'beta_t'")?
                    .build()?;
                Ok(ContractionEnvelope::separable(bx, bt, self.c)?)
            }
            other => bail!("unknown envelope kind '{other}'"),
        }
    }
}

/// Geometric schedule parameters.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub d: f64,
    pub kappa: f64,
}

/// Wandering-bound description: either a single Lipschitz constant
/// `d_gamma0`, or the four comparison functions explicitly.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub d_gamma0: Option<f64>,
    pub gamma0: Option<FnSpec>,
    pub gamma1: Option<FnSpec>,
    pub gamma01: Option<FnSpec>,
    pub gamma02: Option<FnSpec>,
}

impl BoundsSpec {
    pub fn build(&self) -> Result<WanderingBound> {
        if let Some(d) = self.d_gamma0 {
            if self.gamma0.is_some()
                || self.gamma1.is_some()
                || self.gamma01.is_some()
                || self.gamma02.is_some()
            {
                bail!("give either d_gamma0 or the explicit gamma functions, not both");
            }
            return Ok(WanderingBound::lipschitz(|_z: &[f64]| 0.0, d));
        }
        let g0 = self.gamma0.as_ref().context("bounds need 'gamma0'")?.build()?;
        let g1 = self.gamma1.as_ref().context("bounds need 'gamma1'")?.build()?;
        let g01 = self
            .gamma01
            .as_ref()
            .context("bounds need 'gamma01'")?
            .build()?;
        let g02 = self
            .gamma02
            .as_ref()
            .context("bounds need 'gamma02'")?
            .build()?;
        Ok(WanderingBound::new(|_z: &[f64]| 0.0, g0, g1, g01, g02, None))
    }
}

/// What the `check` command verifies.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Initial contracting-state norm.
    pub x0_norm: f64,
    /// Initial wandering certificate `h(z(0))`.
    pub h_z0: f64,
    /// Stages to probe with the general checker (omit to skip it).
    pub n_probe: Option<usize>,
    /// Also minimize the small-gain constant over `(d, κ)`.
    #[serde(default)]
    pub optimize: bool,
    /// Excitation Lipschitz constant: reports the admissible adaptation
    /// gain when present.
    pub d_lambda: Option<f64>,
}

/// Dynamical system selected by `kind`: one of the bundled fixtures or an
/// inline polynomial model under `[simulation.system.custom]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// `saddle_node_coupled`, `saddle_node_decoupled`, `cascade`,
    /// `linear_decay`, `linear_decay_driven`, or `custom`.
    pub kind: String,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda1: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub k: Option<f64>,
    pub u: Option<f64>,
    pub custom: Option<CustomSystem>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<InterconnectionModel> {
        use sgkit::dynsim::fixtures;
        let need = |v: Option<f64>, name: &str| {
            v.with_context(|| format!("system kind '{}' needs field '{name}'", self.kind))
        };
        Ok(match self.kind.as_str() {
            "saddle_node_coupled" => fixtures::saddle_node_coupled(
                need(self.epsilon, "epsilon")?,
                need(self.gamma, "gamma")?,
            ),
            "saddle_node_decoupled" => fixtures::saddle_node_decoupled(
                need(self.epsilon, "epsilon")?,
                need(self.gamma, "gamma")?,
            ),
            "cascade" => fixtures::cascade(
                need(self.lambda1, "lambda1")?,
                need(self.c1, "c1")?,
                need(self.c2, "c2")?,
            ),
            "linear_decay" => fixtures::linear_decay(need(self.k, "k")?),
            "linear_decay_driven" => {
                fixtures::linear_decay_driven(need(self.k, "k")?, need(self.u, "u")?)
            }
            "custom" => self
                .custom
                .as_ref()
                .context("system kind 'custom' needs a [simulation.system.custom] table")?
                .build()?,
            other => bail!("unknown system kind '{other}'"),
        })
    }
}

/// Inline autonomous polynomial model: each equation is a sum of monomial
/// terms over the joint state `[x..., z...]`, with optional absolute values
/// per factor; the certificate is affine in `z`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSystem {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub x_terms: Vec<Term>,
    #[serde(default)]
    pub z_terms: Vec<Term>,
    pub h_linear: Vec<f64>,
    pub h_const: Option<f64>,
    pub set: SetSpec,
}

/// One monomial `coeff · Π v_j^powers[j]` over the joint state, where
/// `v_j = |state_j|` when `abs[j]` is set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub target: usize,
    pub coeff: f64,
    pub powers: Vec<u32>,
    pub abs: Option<Vec<bool>>,
}

fn eval_terms(terms: &[Term], n: usize, x: &[f64], z: &[f64], out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = 0.0;
    }
    for term in terms {
        let mut val = term.coeff;
        for (j, &p) in term.powers.iter().enumerate() {
            if p == 0 {
                continue;
            }
            let base = if j < n { x[j] } else { z[j - n] };
            let base = if term.abs.as_ref().is_some_and(|a| a[j]) {
                base.abs()
            } else {
                base
            };
            val *= base.powi(p as i32);
        }
        out[term.target] += val;
    }
}

impl CustomSystem {
    fn validate(&self) -> Result<()> {
        let dim = self.n + self.m;
        for (label, terms, targets) in [
            ("x_terms", &self.x_terms, self.n),
            ("z_terms", &self.z_terms, self.m),
        ] {
            for t in terms {
                if t.target >= targets {
                    bail!("{label}: target {} out of range (< {targets})", t.target);
                }
                if t.powers.len() != dim {
                    bail!(
                        "{label}: powers must have length n + m = {dim}, got {}",
                        t.powers.len()
                    );
                }
                if let Some(a) = &t.abs {
                    if a.len() != dim {
                        bail!("{label}: abs flags must have length n + m = {dim}");
                    }
                }
            }
        }
        if self.h_linear.len() != self.m {
            bail!(
                "h_linear must have one coefficient per wandering state (m = {})",
                self.m
            );
        }
        Ok(())
    }

    pub fn build(&self) -> Result<InterconnectionModel> {
        self.validate()?;
        let set = self.set.build()?;
        let (n, m) = (self.n, self.m);
        let xt = self.x_terms.clone();
        let zt = self.z_terms.clone();
        let h_lin = self.h_linear.clone();
        let h_const = self.h_const.unwrap_or(0.0);
        Ok(InterconnectionModel::new(
            n,
            m,
            move |x, z, _t, out| eval_terms(&xt, n, x, z, out),
            move |x, z, _t, out| eval_terms(&zt, n, x, z, out),
            move |z| h_const + h_lin.iter().zip(z).map(|(c, v)| c * v).sum::<f64>(),
            set,
        ))
    }
}

/// Invariant set of the contracting substate.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    /// `origin_point`, `point`, or `ball`.
    pub kind: String,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
}

impl SetSpec {
    pub fn build(&self) -> Result<InvariantSet> {
        Ok(match self.kind.as_str() {
            "origin_point" => InvariantSet::OriginPoint,
            "point" => InvariantSet::Point {
                center: self.center.clone().context("point set needs 'center'")?,
            },
            "ball" => InvariantSet::Ball {
                center: self.center.clone().context("ball set needs 'center'")?,
                radius: self.radius.context("ball set needs 'radius'")?,
            },
            other => bail!("unknown set kind '{other}'"),
        })
    }
}

/// What the `simulate` command integrates.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub system: SystemSpec,
    pub x0: Vec<f64>,
    pub z0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    /// Verdict tolerance on the final set distance (default 1e-2).
    pub tol: Option<f64>,
    /// Escape threshold override.
    pub blowup_bound: Option<f64>,
    /// Verify the wandering sandwich with `[bounds]` after integrating.
    #[serde(default)]
    pub verify_sandwich: bool,
}

/// Parameter sweep over copies of the simulation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// `x0` or `z0`.
    pub field: String,
    /// Component index to replace.
    pub index: usize,
    /// Values to sweep.
    pub values: Vec<f64>,
}

/// Output controls.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Row stride for trajectory CSVs (default: adaptive, about 5000 rows).
    pub stride: Option<usize>,
}

/// Bundled example scenarios, embedded in the binary.
pub const FIXTURES: &[(&str, &str)] = &[
    (
        "example1-gain",
        include_str!("../fixtures/example1-gain.toml"),
    ),
    ("gstar", include_str!("../fixtures/gstar.toml")),
    ("cascade-trap", include_str!("../fixtures/cascade-trap.toml")),
    (
        "saddle-inside",
        include_str!("../fixtures/saddle-inside.toml"),
    ),
    (
        "saddle-outside",
        include_str!("../fixtures/saddle-outside.toml"),
    ),
    ("linear-decay", include_str!("../fixtures/linear-decay.toml")),
];

pub fn fixture(name: &str) -> Result<Scenario> {
    let text = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .with_context(|| {
            format!(
                "unknown fixture '{name}' (available: {})",
                FIXTURES
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })?;
    Scenario::from_str(text)
}
