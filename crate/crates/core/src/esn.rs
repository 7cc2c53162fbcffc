//! Echo-state reservoir, ridge readout, and the mapping of a trained
//! reservoir onto sigma-delta neurons.
//!
//! The state update is
//! `s[n+1] = (1 - α)·s[n] + α·tanh(x[n]·W_in + s[n]·W + b)`
//! with row-vector states. `w_in` is stored node-major (`n × n_in`), so the
//! input term is `w_in · x`. `w` keeps the row-vector orientation of the
//! update, so the recurrent term is `wᵀ · s`.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Error, Result};
use crate::metrics::{fit_gain_offset, nrmse, LinearFit};
use crate::neurons::{Encoder, SdNeuron, SdNeuronParams};
use crate::signals::Signal;

#[derive(Debug, Clone, PartialEq)]
pub struct EsnParams {
    /// Input weights, `n × n_in`.
    pub w_in: DMatrix<f64>,
    /// Recurrent weights, `n × n`, applied as `s · w`.
    pub w: DMatrix<f64>,
    pub bias: DVector<f64>,
    /// Retention factor, `0 < α < 1`.
    pub alpha: f64,
    pub w_out: Option<DVector<f64>>,
}

/// Recipe for a random reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsnInit {
    pub nodes: usize,
    pub inputs: usize,
    pub seed: u64,
    pub spectral_radius: f64,
    pub input_scale: f64,
    /// Probability that a recurrent connection exists.
    pub density: f64,
    pub alpha: f64,
}

impl Default for EsnInit {
    fn default() -> Self {
        Self {
            nodes: 50,
            inputs: 2,
            seed: 1,
            spectral_radius: 0.9,
            input_scale: 0.5,
            density: 0.1,
            alpha: 0.1,
        }
    }
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Samples a reservoir. Deterministic per seed.
pub fn esn_init(init: &EsnInit) -> Result<EsnParams> {
    ensure(init.nodes >= 1, || "reservoir needs at least one node".into())?;
    ensure(init.inputs >= 1, || "reservoir needs at least one input".into())?;
    ensure(init.alpha > 0.0 && init.alpha < 1.0, || {
        format!("retention factor must lie in (0, 1), got {}", init.alpha)
    })?;
    ensure((0.0..=1.0).contains(&init.density), || {
        format!("density must lie in [0, 1], got {}", init.density)
    })?;
    ensure(init.spectral_radius > 0.0, || "spectral radius must be positive".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
    let n = init.nodes;
    let mut w = DMatrix::zeros(n, n);
    for v in w.iter_mut() {
        if rng.random::<f64>() < init.density {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    let rho = spectral_radius(&w);
    if !(rho > 1e-12) {
        return Err(Error::Config(
            "recurrent matrix has zero spectral radius and cannot be rescaled".into(),
        ));
    }
    w *= init.spectral_radius / rho;
    let scale = init.input_scale;
    let w_in = DMatrix::from_fn(n, init.inputs, |_, _| rng.random_range(-scale..=scale));
    let bias = DVector::from_fn(n, |_, _| rng.random_range(-scale..=scale));
    Ok(EsnParams {
        w_in,
        w,
        bias,
        alpha: init.alpha,
        w_out: None,
    })
}

impl EsnParams {
    pub fn nodes(&self) -> usize {
        self.w.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.w_in.ncols()
    }

    fn validate(&self) -> Result<()> {
        let n = self.nodes();
        ensure(self.w.ncols() == n, || "recurrent matrix is not square".into())?;
        ensure(self.w_in.nrows() == n, || "input matrix row count differs from node count".into())?;
        ensure(self.bias.len() == n, || "bias length differs from node count".into())?;
        if let Some(w_out) = &self.w_out {
            ensure(w_out.len() == n, || "readout length differs from node count".into())?;
        }
        ensure(self.alpha > 0.0 && self.alpha < 1.0, || {
            format!("retention factor must lie in (0, 1), got {}", self.alpha)
        })
    }

    /// Pre-activation `x·W_in + s·W + b`.
    pub fn drive(&self, state: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        &self.w_in * x + self.w.tr_mul(state) + &self.bias
    }

    /// States after each input of the sequence, from a zero start.
    pub fn run(&self, inputs: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let mut s = EsnState::zeros(self.nodes());
        inputs
            .iter()
            .map(|x| {
                s = esn_step(&s, x, self);
                s.s.clone()
            })
            .collect()
    }

    pub fn readout(&self, state: &DVector<f64>) -> f64 {
        self.w_out.as_ref().map_or(0.0, |w| w.dot(state))
    }

    /// Writes the flat text format: a dims header, then each matrix as a
    /// `name rows cols` line followed by its rows.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "esn nodes={} inputs={} alpha={}", self.nodes(), self.inputs(), self.alpha)?;
        write_block(&mut out, "w_in", &self.w_in)?;
        write_block(&mut out, "w", &self.w)?;
        write_block(&mut out, "bias", &DMatrix::from_column_slice(1, self.nodes(), self.bias.as_slice()))?;
        if let Some(w_out) = &self.w_out {
            write_block(&mut out, "w_out", &DMatrix::from_column_slice(1, self.nodes(), w_out.as_slice()))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l))),
            Err(e) => Some(Err(Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })),
        });
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })??;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("esn") {
            return Err(Error::Parse {
                line,
                msg: "expected `esn` header".into(),
            });
        }
        let mut dims = [None::<f64>; 3];
        for f in fields {
            let (k, v) = f.split_once('=').ok_or(Error::Parse {
                line,
                msg: format!("malformed header field `{f}`"),
            })?;
            let idx = match k {
                "nodes" => 0,
                "inputs" => 1,
                "alpha" => 2,
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown header field `{k}`"),
                    })
                }
            };
            dims[idx] = Some(v.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad value `{v}`"),
            })?);
        }
        let [Some(n), Some(n_in), Some(alpha)] = dims else {
            return Err(Error::Parse {
                line,
                msg: "header needs nodes, inputs and alpha".into(),
            });
        };
        let (n, n_in) = (n as usize, n_in as usize);
        let mut blocks: Vec<(String, DMatrix<f64>)> = Vec::new();
        while let Some(item) = lines.next() {
            let (line, head) = item?;
            let parts: Vec<&str> = head.split_whitespace().collect();
            let [name, rows, cols] = parts[..] else {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `name rows cols`, got `{head}`"),
                });
            };
            let parse_dim = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad dimension `{s}`"),
                })
            };
            let (rows, cols) = (parse_dim(rows)?, parse_dim(cols)?);
            let mut m = DMatrix::zeros(rows, cols);
            for r in 0..rows {
                let (line, row) = lines.next().ok_or(Error::Parse {
                    line,
                    msg: format!("block `{name}` truncated"),
                })??;
                let vals: Vec<f64> = row
                    .split_whitespace()
                    .map(|v| v.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Parse {
                        line,
                        msg: "bad number".into(),
                    })?;
                if vals.len() != cols {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected {cols} values, got {}", vals.len()),
                    });
                }
                for (c, v) in vals.into_iter().enumerate() {
                    m[(r, c)] = v;
                }
            }
            blocks.push((name.to_string(), m));
        }
        let take = |name: &str| blocks.iter().find(|(k, _)| k == name).map(|(_, m)| m.clone());
        let missing = |name: &str| Error::Parse {
            line: 0,
            msg: format!("missing block `{name}`"),
        };
        let w_in = take("w_in").ok_or_else(|| missing("w_in"))?;
        let w = take("w").ok_or_else(|| missing("w"))?;
        let bias = take("bias").ok_or_else(|| missing("bias"))?;
        let p = EsnParams {
            w_in,
            w,
            bias: DVector::from_row_slice(bias.as_slice()),
            alpha,
            w_out: take("w_out").map(|m| DVector::from_row_slice(m.as_slice())),
        };
        if p.nodes() != n || p.inputs() != n_in {
            return Err(Error::Parse {
                line: 0,
                msg: "block shapes disagree with the header".into(),
            });
        }
        p.validate()?;
        Ok(p)
    }
}

fn write_block<W: Write>(out: &mut W, name: &str, m: &DMatrix<f64>) -> std::io::Result<()> {
    writeln!(out, "{name} {} {}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsnState {
    pub s: DVector<f64>,
}

impl EsnState {
    pub fn zeros(n: usize) -> Self {
        Self { s: DVector::zeros(n) }
    }
}

pub fn esn_step(state: &EsnState, x: &DVector<f64>, p: &EsnParams) -> EsnState {
    let act = p.drive(&state.s, x).map(f64::tanh);
    EsnState {
        s: &state.s * (1.0 - p.alpha) + act * p.alpha,
    }
}

/// Ridge regression `argmin ‖S·w - y‖² + λ‖w‖²` over the collected states.
pub fn train_readout(states: &[DVector<f64>], targets: &[f64], ridge: f64) -> Result<DVector<f64>> {
    ensure(!states.is_empty(), || "no states to train on".into())?;
    ensure(states.len() == targets.len(), || {
        format!("{} states but {} targets", states.len(), targets.len())
    })?;
    ensure(ridge >= 0.0, || format!("ridge must be non-negative, got {ridge}"))?;
    let n = states[0].len();
    let mut gram = DMatrix::<f64>::identity(n, n) * ridge;
    let mut rhs = DVector::<f64>::zeros(n);
    for (s, &y) in states.iter().zip(targets) {
        ensure(s.len() == n, || "states differ in length".into())?;
        gram.syger(1.0, s, s, 1.0);
        rhs.axpy(y, s, 1.0);
    }
    let chol = gram.cholesky().ok_or_else(|| {
        Error::Solver(format!(
            "normal equations are singular at ridge {ridge}; use a ridge > 0"
        ))
    })?;
    Ok(chol.solve(&rhs))
}

// ---------------------------------------------------------------------------
// Spiking mapping

/// How node commands reach the other nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeChannel {
    /// Encoded by a sigma-delta neuron, decoded from its feedback current.
    SigmaDelta,
    /// Ideal transmission; isolates wiring from encoder error.
    PassThrough,
}

/// A reservoir whose nodes communicate through sigma-delta neurons.
///
/// Node `j` holds a real-valued command `v_j`, updated once per tick by the
/// reservoir equation. The neuron is driven with `offset + gain·v_j`, and
/// the tick-averaged feedback current, mapped back through the calibration,
/// is the state the rest of the network sees.
#[derive(Debug, Clone)]
pub struct SpikingEsnConfig {
    pub esn: EsnParams,
    pub neuron: SdNeuronParams,
    pub tick_hz: f64,
    /// Neuron time step.
    pub dt: f64,
    /// Drive representing a zero node state, nA.
    pub offset: f64,
    /// Drive per unit of node state, nA.
    pub gain: f64,
    /// Tick-averaged feedback as a function of node state.
    pub calibration: LinearFit,
    pub channel: NodeChannel,
    /// Pre-run at the zero-state drive so the run starts settled.
    pub settle_s: f64,
}

impl SpikingEsnConfig {
    pub fn steps_per_tick(&self) -> usize {
        (1.0 / (self.tick_hz * self.dt)).round() as usize
    }

    pub fn with_channel(mut self, channel: NodeChannel) -> Self {
        self.channel = channel;
        self
    }
}

/// Neuron time step used by the mapping.
pub const SPIKING_DT: f64 = 1e-6;

/// Maps a trained reservoir onto sigma-delta nodes ticking at `rate_hz`.
///
/// Node states live in `[-1, 1]` and the encoders are unipolar, so each
/// state is carried on a bias of half the neuron's full-scale feedback:
/// drive = `offset·(1 + scale·v)`. A `scale` above 1 would produce negative
/// drive for `v = -1`.
pub fn map_to_spiking(
    p: &EsnParams,
    neuron: &SdNeuronParams,
    rate_hz: f64,
    scale: f64,
) -> Result<SpikingEsnConfig> {
    p.validate()?;
    neuron.validate(SPIKING_DT)?;
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::Config(format!(
            "scale {scale} outside (0, 1]: node drive would go negative or vanish"
        )));
    }
    ensure(rate_hz > 0.0 && rate_hz * SPIKING_DT <= 1.0, || {
        format!("tick rate {rate_hz} Hz not representable at dt = {SPIKING_DT} s")
    })?;
    let offset = 0.5 * neuron.full_scale();
    if !(offset > 0.0) {
        return Err(Error::Config("neuron has no feedback range".into()));
    }
    let gain = scale * offset;
    let mut cfg = SpikingEsnConfig {
        esn: p.clone(),
        neuron: *neuron,
        tick_hz: rate_hz,
        dt: SPIKING_DT,
        offset,
        gain,
        calibration: LinearFit {
            gain: 1.0,
            offset: 0.0,
        },
        channel: NodeChannel::SigmaDelta,
        settle_s: 10.0 * neuron.fb_filter.tau,
    };
    cfg.calibration = calibrate(&cfg)?;
    Ok(cfg)
}

/// Fits tick-averaged feedback against node state over a DC sweep.
fn calibrate(cfg: &SpikingEsnConfig) -> Result<LinearFit> {
    let steps = cfg.steps_per_tick();
    let settle = (cfg.settle_s / cfg.dt).round() as usize;
    let levels: Vec<f64> = (-4..=4).map(|k| k as f64 / 4.0).collect();
    let mut means = Vec::with_capacity(levels.len());
    for &v in &levels {
        let mut n = SdNeuron::new(cfg.neuron, cfg.dt)?;
        let drive = cfg.offset + cfg.gain * v;
        n.settle(drive, settle);
        let ticks = 20;
        let mut acc = 0.0;
        for _ in 0..ticks * steps {
            n.step(drive);
            acc += n.feedback();
        }
        means.push(acc / (ticks * steps) as f64);
    }
    let fit = fit_gain_offset(&levels, &means);
    if !(fit.gain > 0.0) {
        return Err(Error::Config("neuron feedback does not respond to its drive".into()));
    }
    Ok(fit)
}

#[derive(Debug, Clone)]
pub struct SpikingEsnRun {
    /// Readout per tick.
    pub readout: Signal,
    /// Decoded node states per tick.
    pub node_states: Vec<DVector<f64>>,
    /// Fraction of node-ticks with the feedback pulse held on throughout.
    pub pegged_fraction: f64,
    /// Some node was pegged in more than 1% of ticks.
    pub saturated: bool,
}

/// Samples each input signal at the tick instants.
pub fn sample_inputs(inputs: &[Signal], tick_hz: f64, ticks: usize) -> Vec<DVector<f64>> {
    (0..ticks)
        .map(|n| {
            let t = n as f64 / tick_hz;
            DVector::from_iterator(
                inputs.len(),
                inputs.iter().map(|sig| {
                    let k = ((t * sig.sample_rate()) + 1e-9).floor() as usize;
                    sig.samples()[k.min(sig.len() - 1)]
                }),
            )
        })
        .collect()
}

/// Runs the spiking reservoir for `duration` seconds.
///
/// Ticks are synchronous: every node update in tick `n` reads the decoded
/// states produced by tick `n - 1`.
pub fn run_spiking_esn(cfg: &SpikingEsnConfig, inputs: &[Signal], duration: f64) -> Result<SpikingEsnRun> {
    let esn = &cfg.esn;
    ensure(inputs.len() == esn.inputs(), || {
        format!("reservoir takes {} inputs, got {}", esn.inputs(), inputs.len())
    })?;
    ensure(duration > 0.0, || "duration must be positive".into())?;
    let ticks = (duration * cfg.tick_hz + 1e-9).floor() as usize;
    ensure(ticks >= 1, || "duration shorter than one tick".into())?;
    let xs = sample_inputs(inputs, cfg.tick_hz, ticks);
    let n = esn.nodes();
    let steps = cfg.steps_per_tick();

    let mut template = SdNeuron::new(cfg.neuron, cfg.dt)?;
    template.settle(cfg.offset, (cfg.settle_s / cfg.dt).round() as usize);
    let mut neurons = vec![template; n];

    let mut command = DVector::<f64>::zeros(n);
    let mut decoded = DVector::<f64>::zeros(n);
    let mut pegged = vec![0usize; n];
    let mut readout = Vec::with_capacity(ticks);
    let mut node_states = Vec::with_capacity(ticks);
    for x in &xs {
        let act = esn.drive(&decoded, x).map(f64::tanh);
        command = &command * (1.0 - esn.alpha) + act * esn.alpha;
        for j in 0..n {
            let drive = cfg.offset + cfg.gain * command[j];
            if drive < 0.0 {
                return Err(Error::Config(format!(
                    "node {j} drive {drive} nA is negative; reduce the scale"
                )));
            }
            decoded[j] = match cfg.channel {
                NodeChannel::PassThrough => (drive - cfg.offset) / cfg.gain,
                NodeChannel::SigmaDelta => {
                    let neuron = &mut neurons[j];
                    let mut acc = 0.0;
                    let mut lit = 0usize;
                    for _ in 0..steps {
                        if neuron.step(drive).pulse_level > 0.0 {
                            lit += 1;
                        }
                        acc += neuron.feedback();
                    }
                    if lit == steps {
                        pegged[j] += 1;
                    }
                    (acc / steps as f64 - cfg.calibration.offset) / cfg.calibration.gain
                }
            };
        }
        readout.push(esn.readout(&decoded));
        node_states.push(decoded.clone());
    }
    let limit = ticks as f64 * 0.01;
    Ok(SpikingEsnRun {
        readout: Signal::new(readout, cfg.tick_hz)?,
        node_states,
        pegged_fraction: pegged.iter().sum::<usize>() as f64 / (n * ticks) as f64,
        saturated: pegged.iter().any(|&c| c as f64 > limit),
    })
}

/// Memory task for the reservoir demo: reproduce a delayed, smoothed copy
/// of a band-limited random input.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoTask {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl DemoTask {
    pub const DELAY: usize = 5;
    pub const SMOOTHING: usize = 5;

    pub fn generate(seed: u64, ticks: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let burn_in = 100;
        let mut u = 0.0f64;
        let mut raw = Vec::with_capacity(ticks);
        for k in 0..ticks + burn_in {
            let noise: f64 = rng.sample(StandardNormal);
            u = 0.97 * u + 0.18 * noise;
            if k >= burn_in {
                raw.push(u);
            }
        }
        let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let input: Vec<f64> = raw.iter().map(|v| 0.8 * v / peak.max(1e-12)).collect();
        let target = (0..ticks)
            .map(|k| {
                if k < Self::DELAY {
                    return 0.0;
                }
                let end = k - Self::DELAY;
                let start = end.saturating_sub(Self::SMOOTHING - 1);
                input[start..=end].iter().sum::<f64>() / (end - start + 1) as f64
            })
            .collect();
        Self { input, target }
    }

    /// Input rows `[u, 1]` (signal plus constant bias node).
    pub fn rows(&self) -> Vec<DVector<f64>> {
        self.input.iter().map(|&u| DVector::from_vec(vec![u, 1.0])).collect()
    }

    pub fn signals(&self, tick_hz: f64) -> Result<Vec<Signal>> {
        Ok(vec![
            Signal::new(self.input.clone(), tick_hz)?,
            Signal::dc(1.0, self.input.len() as f64 / tick_hz, tick_hz)?,
        ])
    }
}

/// Settings for the floating-point vs spiking reservoir comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsnDemoConfig {
    pub init: EsnInit,
    pub neuron: SdNeuronParams,
    pub task_seed: u64,
    pub ticks: usize,
    /// Leading ticks excluded from training and scoring.
    pub washout: usize,
    pub ridge: f64,
    pub tick_hz: f64,
    pub scale: f64,
}

impl Default for EsnDemoConfig {
    fn default() -> Self {
        Self {
            init: EsnInit::default(),
            neuron: SdNeuronParams {
                threshold: 0.1,
                ..SdNeuronParams::default()
            },
            task_seed: 7,
            ticks: 2000,
            washout: 200,
            ridge: 1e-2,
            tick_hz: 1000.0,
            scale: 0.6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EsnDemoOutcome {
    /// Reservoir with its trained readout.
    pub network: EsnParams,
    pub task: DemoTask,
    pub readout_float: Vec<f64>,
    pub readout_spiking: Vec<f64>,
    pub readout_passthrough: Vec<f64>,
    /// Spiking vs floating-point readout after the washout.
    pub nrmse: f64,
    /// Floating-point readout vs task target after the washout.
    pub task_nrmse: f64,
    /// Largest pass-through deviation from the floating-point readout.
    pub passthrough_error: f64,
    pub pegged_fraction: f64,
    pub saturated: bool,
}

/// Trains a readout on the floating-point reservoir, then replays the
/// same network through sigma-delta nodes and through the ideal channel.
pub fn run_esn_demo(cfg: &EsnDemoConfig) -> Result<EsnDemoOutcome> {
    ensure(cfg.washout < cfg.ticks, || {
        format!("washout {} must be shorter than the run ({} ticks)", cfg.washout, cfg.ticks)
    })?;
    ensure(cfg.init.inputs == 2, || "the demo task feeds two inputs (signal and bias)".into())?;
    let task = DemoTask::generate(cfg.task_seed, cfg.ticks);
    let mut network = esn_init(&cfg.init)?;
    let states = network.run(&task.rows());
    let w_out = train_readout(&states[cfg.washout..], &task.target[cfg.washout..], cfg.ridge)?;
    network.w_out = Some(w_out);
    let readout_float: Vec<f64> = states.iter().map(|s| network.readout(s)).collect();

    let spiking = map_to_spiking(&network, &cfg.neuron, cfg.tick_hz, cfg.scale)?;
    let inputs = task.signals(cfg.tick_hz)?;
    let duration = cfg.ticks as f64 / cfg.tick_hz;
    let ideal = run_spiking_esn(&spiking.clone().with_channel(NodeChannel::PassThrough), &inputs, duration)?;
    let run = run_spiking_esn(&spiking, &inputs, duration)?;
    let readout_spiking = run.readout.into_samples();
    let readout_passthrough = ideal.readout.into_samples();
    let w = cfg.washout;
    Ok(EsnDemoOutcome {
        nrmse: nrmse(&readout_spiking[w..], &readout_float[w..]),
        task_nrmse: nrmse(&readout_float[w..], &task.target[w..]),
        passthrough_error: readout_passthrough
            .iter()
            .zip(&readout_float)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        pegged_fraction: run.pegged_fraction,
        saturated: run.saturated,
        network,
        task,
        readout_float,
        readout_spiking,
        readout_passthrough,
    })
}
