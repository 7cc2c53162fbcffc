//! Experiment configuration: a TOML file with one table per module plus
//! `--set section.key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sdneuro::esn::{EsnDemoConfig, EsnInit};
use sdneuro::filters::FilterParams;
use sdneuro::neurons::{AdexParams, SdNeuronParams};
use sdneuro::{NeuronModel, SineSpec};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub simulation: SimulationConfig,
    pub neuron: NeuronConfig,
    pub adex: AdexConfig,
    pub reconstruction: FilterConfig,
    pub signal: SignalConfig,
    pub dc_sweep: DcSweepConfig,
    pub sine_sweep: SineSweepConfig,
    pub slew: SlewConfig,
    pub esn: EsnConfig,
    pub codec: CodecConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            simulation: SimulationConfig::default(),
            neuron: NeuronConfig::default(),
            adex: AdexConfig::default(),
            reconstruction: FilterConfig::default(),
            signal: SignalConfig::default(),
            dc_sweep: DcSweepConfig::default(),
            sine_sweep: SineSweepConfig::default(),
            slew: SlewConfig::default(),
            esn: EsnConfig::default(),
            codec: CodecConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub sample_rate_hz: f64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: sdneuro::signals::DEFAULT_SAMPLE_RATE,
            seed: 1,
        }
    }
}

/// Sigma-delta neuron parameters, currents in nA and times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronConfig {
    pub err_gain: f64,
    pub err_tau_s: f64,
    pub fb_gain: f64,
    pub fb_tau_s: f64,
    pub threshold_na: f64,
    pub pulse_width_s: f64,
    pub pulse_amplitude_na: f64,
    pub reset_na: f64,
}

impl Default for NeuronConfig {
    fn default() -> Self {
        Self::from_params(&SdNeuronParams::default())
    }
}

impl NeuronConfig {
    pub fn from_params(p: &SdNeuronParams) -> Self {
        Self {
            err_gain: p.err_filter.gain,
            err_tau_s: p.err_filter.tau,
            fb_gain: p.fb_filter.gain,
            fb_tau_s: p.fb_filter.tau,
            threshold_na: p.threshold,
            pulse_width_s: p.pulse_width,
            pulse_amplitude_na: p.pulse_amplitude,
            reset_na: p.reset,
        }
    }

    pub fn params(&self) -> SdNeuronParams {
        SdNeuronParams {
            err_filter: FilterParams {
                gain: self.err_gain,
                tau: self.err_tau_s,
            },
            fb_filter: FilterParams {
                gain: self.fb_gain,
                tau: self.fb_tau_s,
            },
            threshold: self.threshold_na,
            pulse_width: self.pulse_width_s,
            pulse_amplitude: self.pulse_amplitude_na,
            reset: self.reset_na,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdexConfig {
    pub alpha_l: f64,
    pub i_leak_na: f64,
    pub slope_na: f64,
    pub threshold_na: f64,
    pub tau_mem_s: f64,
    pub alpha_s: f64,
    pub tau_w_s: f64,
    pub reset_na: f64,
    pub fb_gain: f64,
    pub pulse_amplitude_na: f64,
    pub kick_width_s: f64,
}

impl Default for AdexConfig {
    fn default() -> Self {
        let p = AdexParams::default();
        Self {
            alpha_l: p.alpha_l,
            i_leak_na: p.i_leak,
            slope_na: p.slope,
            threshold_na: p.threshold,
            tau_mem_s: p.tau_mem,
            alpha_s: p.alpha_s,
            tau_w_s: p.tau_w,
            reset_na: p.reset,
            fb_gain: p.fb_gain,
            pulse_amplitude_na: p.pulse_amplitude,
            kick_width_s: p.kick_width,
        }
    }
}

impl AdexConfig {
    pub fn params(&self) -> AdexParams {
        AdexParams {
            alpha_l: self.alpha_l,
            i_leak: self.i_leak_na,
            slope: self.slope_na,
            threshold: self.threshold_na,
            tau_mem: self.tau_mem_s,
            alpha_s: self.alpha_s,
            tau_w: self.tau_w_s,
            reset: self.reset_na,
            fb_gain: self.fb_gain,
            pulse_amplitude: self.pulse_amplitude_na,
            kick_width: self.kick_width_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub gain: f64,
    pub tau_s: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            gain: 1.0,
            tau_s: 0.01,
        }
    }
}

impl FilterConfig {
    pub fn params(&self) -> FilterParams {
        FilterParams {
            gain: self.gain,
            tau: self.tau_s,
        }
    }
}

/// Test sinusoid used by `codec` when no input file is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    pub amplitude_na: f64,
    pub freq_hz: f64,
    pub offset_na: f64,
    pub phase_rad: f64,
    pub duration_s: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            amplitude_na: 50.0,
            freq_hz: 5.0,
            offset_na: 50.0,
            phase_rad: 0.0,
            duration_s: 0.27,
        }
    }
}

impl SignalConfig {
    pub fn spec(&self) -> SineSpec {
        SineSpec {
            amplitude: self.amplitude_na,
            freq: self.freq_hz,
            offset: self.offset_na,
            phase: self.phase_rad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lif,
    Sd,
    Adex,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lif => "lif",
            ModelKind::Sd => "sd",
            ModelKind::Adex => "adex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcSweepConfig {
    pub model: ModelKind,
    pub start_na: f64,
    pub stop_na: f64,
    pub points: usize,
    pub duration_s: f64,
    /// Also write the cumulative energy of the strongest point.
    pub energy_trace: bool,
}

impl Default for DcSweepConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Lif,
            start_na: 5.0,
            stop_na: 50.0,
            points: 10,
            duration_s: 0.2,
            energy_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SineSweepConfig {
    pub models: Vec<ModelKind>,
    pub freqs_hz: Vec<f64>,
    pub fb_gains: Vec<f64>,
    pub amplitude_na: f64,
    pub offset_na: f64,
    /// Shortest simulated span; longer runs are used when ten cycles
    /// after the transient need it.
    pub min_duration_s: f64,
}

impl Default for SineSweepConfig {
    fn default() -> Self {
        Self {
            models: vec![ModelKind::Sd, ModelKind::Adex],
            freqs_hz: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0],
            fb_gains: vec![1.0, 2.0, 4.0],
            amplitude_na: 50.0,
            offset_na: 50.0,
            min_duration_s: 0.27,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlewConfig {
    pub amplitude_na: f64,
    pub offset_na: f64,
    pub freq_hz: f64,
    /// Analysis span after the transient.
    pub duration_s: f64,
    /// Span of the exported waveforms.
    pub trace_s: f64,
    pub trace_stride: usize,
}

impl Default for SlewConfig {
    fn default() -> Self {
        Self {
            amplitude_na: 50.0,
            offset_na: 50.0,
            freq_hz: 5.0,
            duration_s: 2.0,
            trace_s: 0.27,
            trace_stride: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsnConfig {
    pub nodes: usize,
    pub spectral_radius: f64,
    pub input_scale: f64,
    pub density: f64,
    pub alpha: f64,
    pub task_seed: u64,
    pub ticks: usize,
    pub washout: usize,
    pub ridge: f64,
    pub tick_hz: f64,
    pub scale: f64,
    /// Comparator threshold of the node neurons; the remaining neuron
    /// parameters come from `[neuron]`.
    pub neuron_threshold_na: f64,
}

impl Default for EsnConfig {
    fn default() -> Self {
        let d = EsnDemoConfig::default();
        Self {
            nodes: d.init.nodes,
            spectral_radius: d.init.spectral_radius,
            input_scale: d.init.input_scale,
            density: d.init.density,
            alpha: d.init.alpha,
            task_seed: d.task_seed,
            ticks: d.ticks,
            washout: d.washout,
            ridge: d.ridge,
            tick_hz: d.tick_hz,
            scale: d.scale,
            neuron_threshold_na: d.neuron.threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodecAction {
    Encode,
    Decode,
    Roundtrip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecConfig {
    pub action: CodecAction,
    pub model: ModelKind,
    /// Signal CSV for encode/roundtrip; the `[signal]` sinusoid when empty.
    pub signal_path: Option<PathBuf>,
    /// Spike CSV for decode.
    pub spikes_path: Option<PathBuf>,
    /// Span of the decoded waveform; the last spike time when unset.
    pub duration_s: Option<f64>,
    pub trace: bool,
    pub trace_stride: usize,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            action: CodecAction::Roundtrip,
            model: ModelKind::Sd,
            signal_path: None,
            spikes_path: None,
            duration_s: None,
            trace: false,
            trace_stride: 1,
        }
    }
}

impl Config {
    /// Parses a config file, applies overrides and validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let origin = path.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string());
        Self::from_text(&text, &origin, overrides)
    }

    pub fn from_text(text: &str, origin: &str, overrides: &[String]) -> Result<Self, CliError> {
        // Deserialising the file on its own keeps its line numbers in
        // the diagnostics.
        let _: Config = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Config = table
            .try_into()
            .map_err(|e| CliError::Config(format!("after --set overrides: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn sd_params(&self) -> SdNeuronParams {
        self.neuron.params()
    }

    pub fn model(&self, kind: ModelKind) -> NeuronModel {
        match kind {
            ModelKind::Lif => NeuronModel::Lif(self.sd_params().lif()),
            ModelKind::Sd => NeuronModel::SigmaDelta(self.sd_params()),
            ModelKind::Adex => NeuronModel::Adex(self.adex.params()),
        }
    }

    pub fn esn_demo(&self) -> EsnDemoConfig {
        let e = &self.esn;
        EsnDemoConfig {
            init: EsnInit {
                nodes: e.nodes,
                inputs: 2,
                seed: self.simulation.seed,
                spectral_radius: e.spectral_radius,
                input_scale: e.input_scale,
                density: e.density,
                alpha: e.alpha,
            },
            neuron: SdNeuronParams {
                threshold: e.neuron_threshold_na,
                ..self.sd_params()
            },
            task_seed: e.task_seed,
            ticks: e.ticks,
            washout: e.washout,
            ridge: e.ridge,
            tick_hz: e.tick_hz,
            scale: e.scale,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let dt = 1.0 / self.simulation.sample_rate_hz;
        let field = |name: &str, ok: bool, why: &str| -> Result<(), CliError> {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name}: {why}")))
            }
        };
        let core = |section: &str, r: sdneuro::Result<()>| -> Result<(), CliError> {
            r.map_err(|e| CliError::Config(format!("[{section}]: {e}")))
        };
        field(
            "simulation.sample_rate_hz",
            self.simulation.sample_rate_hz.is_finite() && self.simulation.sample_rate_hz > 0.0,
            "must be a positive rate",
        )?;
        core("neuron", self.sd_params().validate(dt))?;
        core("adex", self.adex.params().validate(dt))?;
        core("reconstruction", self.reconstruction.params().validate())?;
        field("signal.duration_s", self.signal.duration_s > 0.0, "must be positive")?;
        field("signal.freq_hz", self.signal.freq_hz >= 0.0, "must be non-negative")?;

        let d = &self.dc_sweep;
        field("dc_sweep.points", d.points >= 2, "need at least two points")?;
        field(
            "dc_sweep.start_na",
            d.start_na >= 0.0 && d.start_na < d.stop_na,
            "need 0 <= start_na < stop_na",
        )?;
        field("dc_sweep.duration_s", d.duration_s > 0.0, "must be positive")?;

        let s = &self.sine_sweep;
        field("sine_sweep.models", !s.models.is_empty(), "list at least one model")?;
        field(
            "sine_sweep.models",
            !s.models.contains(&ModelKind::Lif),
            "lif has no feedback to sweep; use sd or adex",
        )?;
        field(
            "sine_sweep.freqs_hz",
            !s.freqs_hz.is_empty() && s.freqs_hz.iter().all(|&f| f > 0.0),
            "list positive frequencies",
        )?;
        field(
            "sine_sweep.fb_gains",
            !s.fb_gains.is_empty() && s.fb_gains.iter().all(|&g| g > 0.0),
            "list positive gains",
        )?;
        field(
            "sine_sweep.offset_na",
            s.offset_na >= s.amplitude_na && s.amplitude_na > 0.0,
            "offset must be at least the (positive) amplitude",
        )?;
        field("sine_sweep.min_duration_s", s.min_duration_s > 0.0, "must be positive")?;

        let w = &self.slew;
        field(
            "slew.offset_na",
            w.offset_na >= w.amplitude_na && w.amplitude_na > 0.0,
            "offset must be at least the (positive) amplitude",
        )?;
        field("slew.freq_hz", w.freq_hz > 0.0, "must be positive")?;
        field("slew.duration_s", w.duration_s > 0.0, "must be positive")?;
        field("slew.trace_s", w.trace_s > 0.0, "must be positive")?;
        field("slew.trace_stride", w.trace_stride >= 1, "must be at least 1")?;

        let e = &self.esn;
        field("esn.nodes", e.nodes >= 1, "need at least one node")?;
        field("esn.alpha", e.alpha > 0.0 && e.alpha < 1.0, "must lie in (0, 1)")?;
        field("esn.density", (0.0..=1.0).contains(&e.density), "must lie in [0, 1]")?;
        field("esn.spectral_radius", e.spectral_radius > 0.0, "must be positive")?;
        field("esn.washout", e.washout < e.ticks, "must be shorter than esn.ticks")?;
        field("esn.ridge", e.ridge >= 0.0, "must be non-negative")?;
        field("esn.scale", e.scale > 0.0 && e.scale <= 1.0, "must lie in (0, 1]")?;
        field(
            "esn.tick_hz",
            e.tick_hz > 0.0 && e.tick_hz <= 1.0 / sdneuro::esn::SPIKING_DT,
            "must be positive and at most the 1 MHz neuron rate",
        )?;
        field("esn.neuron_threshold_na", e.neuron_threshold_na > 0.0, "must be positive")?;

        let c = &self.codec;
        field("codec.trace_stride", c.trace_stride >= 1, "must be at least 1")?;
        if c.action == CodecAction::Decode {
            field("codec.spikes_path", c.spikes_path.is_some(), "decode needs a spike CSV")?;
        }
        if let Some(d) = c.duration_s {
            field("codec.duration_s", d > 0.0, "must be positive")?;
        }
        Ok(())
    }
}

/// Parses `section.key=value`. The value is read as a TOML value, falling
/// back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set {spec}: expected section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| CliError::Config(format!("--set {spec}: key must be section.key")))?;
    let raw = raw.trim();
    let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(CliError::Config(format!("--set {spec}: `{section}` is not a section"))),
    }
}
