//! Jump-diffusion simulation on a merged Euler grid.
//!
//! The state follows
//!
//! ```text
//! dX_t = b(X_t) dt + sigma(X_t) dW_t + a(X_{t-}) d(N_t^1 + ... + N_t^M)
//! ```
//!
//! where N is a multivariate Hawkes process. Simulation first draws the
//! event log, then runs an explicit Euler scheme on the union of a regular
//! fine grid (`substeps` refinements per observation step) and the event
//! times. Over a grid interval ending at t_k the update is
//!
//! ```text
//! X_{t_k} = X_{t_{k-1}} + dt b(X_{t_{k-1}}) + sqrt(dt) sigma(X_{t_{k-1}}) Z
//!         + a(X_{t_{k-1}}) 1{t_k is an event time}
//! ```
//!
//! with every coefficient evaluated at the left grid point, matching the
//! left-limit convention of the continuous-time equation. Only the regular
//! observation grid X_0, X_Delta, ..., X_{n Delta} is retained.
//!
//! Event randomness and Brownian randomness come from separate counter
//! streams of one seed, so the embedded event log is identical to what the
//! standalone event simulator produces for the same seed.

use crate::error::{Error, Result};
use crate::hawkes::{self, EventLog, HawkesParams};
use crate::rng::{stream_rng, BROWNIAN_STREAM};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Named coefficient set (drift, diffusion, jump size) with declared bounds.
///
/// `diffusion_bound` is the caller's sup-norm bound for sigma on the
/// estimation interval (it scales the selection penalty); `jump_bound`
/// bounds |a|. Both are declarations, not derived quantities: construction
/// probes the coefficients on a wide grid for finiteness and sign sanity
/// but deliberately does not second-guess the bounds' tightness.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    drift: Coefficient,
    diffusion: Coefficient,
    jump: Coefficient,
    diffusion_bound: f64,
    jump_bound: f64,
    ergodic: bool,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("diffusion_bound", &self.diffusion_bound)
            .field("jump_bound", &self.jump_bound)
            .field("ergodic", &self.ergodic)
            .finish()
    }
}

impl ModelSpec {
    /// Validates a coefficient set by probing x in [-10, 10] at step 1e-3:
    /// all three functions must stay finite and the diffusion nonnegative.
    pub fn new(
        name: impl Into<String>,
        drift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        jump: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion_bound: f64,
        jump_bound: f64,
        ergodic: bool,
    ) -> Result<Self> {
        if !diffusion_bound.is_finite() || diffusion_bound <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "diffusion_bound",
                reason: format!("must be positive and finite, got {diffusion_bound}"),
            });
        }
        if !jump_bound.is_finite() || jump_bound < 0.0 {
            return Err(Error::InvalidParameter {
                name: "jump_bound",
                reason: format!("must be nonnegative and finite, got {jump_bound}"),
            });
        }
        for i in 0..=20_000u32 {
            let x = -10.0 + f64::from(i) * 1e-3;
            let b = drift(x);
            let s = diffusion(x);
            let a = jump(x);
            if !b.is_finite() || !s.is_finite() || !a.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "model",
                    reason: format!("coefficient not finite at x = {x}: b={b}, sigma={s}, a={a}"),
                });
            }
            if s < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "model",
                    reason: format!("diffusion negative at x = {x}: sigma = {s}"),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            jump: Arc::new(jump),
            diffusion_bound,
            jump_bound,
            ergodic,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Drift coefficient b(x).
    pub fn drift(&self, x: f64) -> f64 {
        (self.drift)(x)
    }

    /// Diffusion coefficient sigma(x).
    pub fn diffusion(&self, x: f64) -> f64 {
        (self.diffusion)(x)
    }

    /// Jump size coefficient a(x).
    pub fn jump(&self, x: f64) -> f64 {
        (self.jump)(x)
    }

    /// Declared sup-norm bound for sigma on the estimation interval.
    pub fn diffusion_bound(&self) -> f64 {
        self.diffusion_bound
    }

    /// Declared bound for |a|.
    pub fn jump_bound(&self) -> f64 {
        self.jump_bound
    }

    /// Whether the model is expected to be ergodic (informational; the
    /// benchmark harness reports rejection rates for non-ergodic models).
    pub fn is_ergodic(&self) -> bool {
        self.ergodic
    }
}

/// The four benchmark coefficient sets.
///
/// 1. Ornstein-Uhlenbeck: b = -2x, sigma = 1, a = min(|x|, 5).
/// 2. Cubic mean reversion, non-ergodic under Euler with jumps:
///    b = -(x - 1/4)^3 - (x + 1/4)^3, sigma = 1, a = min(|x|, 5).
/// 3. Sinusoidal perturbation with state-dependent diffusion:
///    b = -2x + sin(3x), sigma = sqrt((3 + x^2)/(1 + x^2)), a = min(|x|, 5).
/// 4. Sign-changing jump size: b = -2x, sigma = 1, a = 0.2x.
pub fn builtin_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(
            "model1",
            |x| -2.0 * x,
            |_| 1.0,
            |x| x.abs().min(5.0),
            1.0,
            5.0,
            true,
        )
        .expect("model1 is valid"),
        ModelSpec::new(
            "model2",
            |x| -(x - 0.25).powi(3) - (x + 0.25).powi(3),
            |_| 1.0,
            |x| x.abs().min(5.0),
            1.0,
            5.0,
            false,
        )
        .expect("model2 is valid"),
        ModelSpec::new(
            "model3",
            |x| -2.0 * x + (3.0 * x).sin(),
            |x| ((3.0 + x * x) / (1.0 + x * x)).sqrt(),
            |x| x.abs().min(5.0),
            3.0_f64.sqrt(),
            5.0,
            true,
        )
        .expect("model3 is valid"),
        ModelSpec::new(
            "model4",
            |x| -2.0 * x,
            |_| 1.0,
            |x| 0.2 * x,
            1.0,
            0.2 * 1e6,
            true,
        )
        .expect("model4 is valid"),
    ]
}

/// Looks up a coefficient set by name.
///
/// Recognizes the four benchmark names plus two degenerate variants used
/// for calibration: "model1-nojump" (jump size forced to zero) and "zero"
/// (all coefficients zero; the declared diffusion bound stays at one, a
/// valid if untight bound, because the selection penalty requires a
/// positive value).
pub fn model_by_name(name: &str) -> Result<ModelSpec> {
    match name {
        "model1" | "model2" | "model3" | "model4" => Ok(builtin_models()
            .into_iter()
            .find(|m| m.name() == name)
            .expect("builtin registry covers the four benchmark names")),
        "model1-nojump" => ModelSpec::new(
            "model1-nojump",
            |x| -2.0 * x,
            |_| 1.0,
            |_| 0.0,
            1.0,
            0.0,
            true,
        ),
        "zero" => ModelSpec::new("zero", |_| 0.0, |_| 0.0, |_| 0.0, 1.0, 0.0, true),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Observation layout and numerical guards for one path simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of observation steps; the path has n + 1 points.
    pub n: usize,
    /// Observation time step.
    pub delta: f64,
    /// Euler refinements per observation step.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// Initial state.
    #[serde(default)]
    pub x0: f64,
    /// Seed for both the event and Brownian streams.
    pub seed: u64,
    /// Magnitude threshold treated as a numerical explosion.
    #[serde(default = "default_explosion_bound")]
    pub explosion_bound: f64,
}

fn default_substeps() -> usize {
    5
}

fn default_explosion_bound() -> f64 {
    1e6
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "need at least one observation step".into(),
            });
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must be positive and finite, got {}", self.delta),
            });
        }
        if self.substeps < 1 {
            return Err(Error::InvalidParameter {
                name: "substeps",
                reason: "need at least one Euler refinement per step".into(),
            });
        }
        if !self.explosion_bound.is_finite() || self.explosion_bound <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "explosion_bound",
                reason: format!("must be positive and finite, got {}", self.explosion_bound),
            });
        }
        if !self.x0.is_finite() || self.x0.abs() > self.explosion_bound {
            return Err(Error::InvalidParameter {
                name: "x0",
                reason: format!(
                    "must be finite with |x0| <= explosion bound {}, got {}",
                    self.explosion_bound, self.x0
                ),
            });
        }
        Ok(())
    }

    /// Total simulated horizon T = n * delta.
    pub fn horizon(&self) -> f64 {
        self.n as f64 * self.delta
    }
}

/// Regular-grid observations X_0, X_Delta, ..., X_{n Delta}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSamplePath")]
pub struct SamplePath {
    delta: f64,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSamplePath {
    delta: f64,
    values: Vec<f64>,
}

impl TryFrom<RawSamplePath> for SamplePath {
    type Error = Error;

    fn try_from(raw: RawSamplePath) -> Result<Self> {
        SamplePath::new(raw.delta, raw.values)
    }
}

impl SamplePath {
    pub fn new(delta: f64, values: Vec<f64>) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must be positive and finite, got {delta}"),
            });
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!(
                    "need X_0 and at least one step, got {} points",
                    values.len()
                ),
            });
        }
        if let Some((k, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("observation {k} is not finite: {v}"),
            });
        }
        Ok(Self { delta, values })
    }

    /// Observation time step.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of observation steps n (one less than the point count).
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Observed values X_0, ..., X_{n Delta}.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Final observation time n * delta.
    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.delta
    }

    /// Three-column CSV: step index, time, value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t,x\n");
        for (k, &x) in self.values.iter().enumerate() {
            let t = k as f64 * self.delta;
            out.push_str(&format!("{k},{t},{x}\n"));
        }
        out
    }

    /// Parses the `to_csv` format; `label` names the source in errors.
    ///
    /// The step size is recovered from the k = 1 row and every row's time
    /// is checked against k * delta to relative 1e-9, so hand-edited grids
    /// that are not actually regular are rejected.
    pub fn from_csv_str(text: &str, label: &str) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedFile {
            path: label.to_string(),
            reason,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some("k,t,x") => {}
            other => return Err(malformed(format!("expected header 'k,t,x', got {other:?}"))),
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(malformed(format!(
                    "row {row}: expected 3 fields, got {}",
                    fields.len()
                )));
            }
            let k: usize = fields[0]
                .parse()
                .map_err(|e| malformed(format!("row {row}: bad step index: {e}")))?;
            if k != row {
                return Err(malformed(format!("row {row}: step index {k} out of order")));
            }
            let t: f64 = fields[1]
                .parse()
                .map_err(|e| malformed(format!("row {row}: bad time: {e}")))?;
            let x: f64 = fields[2]
                .parse()
                .map_err(|e| malformed(format!("row {row}: bad value: {e}")))?;
            times.push(t);
            values.push(x);
        }
        if values.len() < 2 {
            return Err(malformed(format!(
                "need at least 2 observations, got {}",
                values.len()
            )));
        }
        let delta = times[1];
        if !delta.is_finite() || delta <= 0.0 {
            return Err(malformed(format!("step recovered from row 1 is {delta}")));
        }
        for (k, &t) in times.iter().enumerate() {
            let expected = k as f64 * delta;
            if (t - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(malformed(format!(
                    "row {k}: time {t} is not on the regular grid k * {delta}"
                )));
            }
        }
        Self::new(delta, values)
    }
}

/// Simulates one observed path together with the event log that drove it.
///
/// The returned log is exactly what the standalone event simulator yields
/// for the same parameters, horizon n * delta, and seed, because the two
/// randomness sources live on separate streams.
pub fn simulate_path(
    model: &ModelSpec,
    params: &HawkesParams,
    config: &SimConfig,
) -> Result<(SamplePath, EventLog)> {
    config.validate()?;
    let horizon = config.horizon();
    let log = hawkes::simulate(params, horizon, config.seed)?;
    let path = drive_path(model, &log, config)?;
    Ok((path, log))
}

/// Runs the Euler scheme against an already-realized event log.
fn drive_path(model: &ModelSpec, log: &EventLog, config: &SimConfig) -> Result<SamplePath> {
    config.validate()?;
    let fine_step = config.delta / config.substeps as f64;
    let total_fine = config.n * config.substeps;
    let merged = log.merged();
    let mut rng = stream_rng(config.seed, BROWNIAN_STREAM);
    let mut x = config.x0;
    let mut values = Vec::with_capacity(config.n + 1);
    values.push(x);
    let mut t_prev = 0.0_f64;
    let mut next_event = 0usize;

    let advance = |x: &mut f64,
                   t_prev: &mut f64,
                   t_to: f64,
                   with_jump: bool,
                   rng: &mut rand_chacha::ChaCha8Rng|
     -> Result<()> {
        let dt = t_to - *t_prev;
        let z: f64 = StandardNormal.sample(rng);
        let mut next = *x + dt * model.drift(*x) + dt.sqrt() * model.diffusion(*x) * z;
        if with_jump {
            next += model.jump(*x);
        }
        if !next.is_finite() || next.abs() > config.explosion_bound {
            return Err(Error::Explosion {
                time: t_to,
                bound: config.explosion_bound,
            });
        }
        *x = next;
        *t_prev = t_to;
        Ok(())
    };

    for i in 1..=total_fine {
        let t_i = i as f64 * fine_step;
        while next_event < merged.len() && merged[next_event].0 <= t_i {
            let s = merged[next_event].0;
            advance(&mut x, &mut t_prev, s, true, &mut rng)?;
            next_event += 1;
        }
        if t_i > t_prev {
            advance(&mut x, &mut t_prev, t_i, false, &mut rng)?;
        }
        if i % config.substeps == 0 {
            values.push(x);
        }
    }
    SamplePath::new(config.delta, values)
}
