//! Single-photon Mach–Zehnder interferometer with recoiling beam splitters.
//!
//! The photon enters port 1 or 2, is split into internal arms `b1`, `b2` by
//! the input beam splitter, picks up the phase `e^{iφ}` on `b1`, and is
//! recombined into output ports 3 and 4. Each beam splitter is a quantum body
//! with a momentum wavepacket; a reflection translates that packet. The
//! matrices (rows: incoming mode, columns: outgoing mode) are
//!
//! ```text
//! input BS:   [ t1*                −r1·exp(−δp∇1) ]     output BS:  [ t2*                −r2·exp(+δp∇2) ]
//!             [ r1*·exp(+δp∇1)      t1            ]                 [ r2*·exp(−δp∇2)      t2            ]
//! ```
//!
//! where `exp(−δp∇)` maps `ψ(p)` to `ψ(p − δp)`. An optional which-way
//! detector couples one arm to a two-level pointer: the pointer starts in
//! `|unfired⟩` and is rotated to `|fired⟩` with `⟨unfired|fired⟩ = gamma`.
//!
//! Two evolution routes exist. [`evolve`] tracks a handful of branches, each
//! carrying a path amplitude, packet offsets and a pointer flag; overlaps are
//! computed on demand. [`evolve_dense`] applies every stage as an operator on
//! the full dense product space and is only practical on small grids.
//! [`path_coefficients`] is the closed-form operator-valued route.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::tensor::{CompositeState, Layout, SubsystemSpec, TensorError};
use crate::tolerance;
use crate::wavepacket::{self, MomentumGrid, Wavepacket, WavepacketError};

pub const PATH: &str = "path";
pub const BS_IN: &str = "bs_in";
pub const BS_OUT: &str = "bs_out";
pub const POINTER: &str = "ww";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterferometerError {
    #[error("{which} beam splitter is not unitary: |t|² + |r|² = {weight}")]
    NonUnitary { which: &'static str, weight: f64 },
    #[error("detector pointer overlap must lie in [0, 1], got {0}")]
    InvalidGamma(f64),
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("phase sweep needs at least 8 points, got {0}")]
    TooFewPhases(usize),
    #[error("dense composite dimension {dimension} exceeds the cap {cap}")]
    TooLarge { dimension: usize, cap: usize },
    #[error(transparent)]
    Wavepacket(#[from] WavepacketError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, InterferometerError>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gaussian packet parameters of one beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
    /// Grid half-width in units of `width`.
    pub span_widths: f64,
    pub points: usize,
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self {
            center: 0.0,
            width: 1.0,
            span_widths: wavepacket::DEFAULT_SPAN_WIDTHS,
            points: wavepacket::DEFAULT_POINTS,
        }
    }
}

impl PacketSpec {
    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn grid(&self) -> Result<MomentumGrid> {
        Ok(MomentumGrid::symmetric(
            self.center,
            self.span_widths * self.width,
            self.points,
        )?)
    }

    pub fn build(&self) -> Result<Wavepacket> {
        Ok(Wavepacket::gaussian(self.grid()?, self.center, self.width)?)
    }
}

/// Transmission and reflection amplitudes plus the recoil carried by a reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub t: Complex64,
    pub r: Complex64,
    pub recoil: f64,
    pub packet: PacketSpec,
}

impl BeamSplitterSpec {
    pub fn new(t: Complex64, r: Complex64) -> Self {
        Self {
            t,
            r,
            recoil: 0.0,
            packet: PacketSpec::default(),
        }
    }

    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(c(h, 0.0), c(h, 0.0))
    }

    /// Stand-in for a missing beam splitter: `t = 1`, `r = 0`.
    pub fn absent() -> Self {
        Self::new(c(1.0, 0.0), c(0.0, 0.0))
    }

    pub fn with_recoil(mut self, recoil: f64) -> Self {
        self.recoil = recoil;
        self
    }

    pub fn with_packet(mut self, packet: PacketSpec) -> Self {
        self.packet = packet;
        self
    }

    fn validate(&self, which: &'static str) -> Result<()> {
        let weight = self.t.norm_sqr() + self.r.norm_sqr();
        if !weight.is_finite() || (weight - 1.0).abs() > tolerance::NORM {
            return Err(InterferometerError::NonUnitary { which, weight });
        }
        if !self.recoil.is_finite() {
            return Err(InterferometerError::NotFinite {
                name: "recoil",
                value: self.recoil,
            });
        }
        Ok(())
    }
}

/// Which internal arm, relative to the input port, the detector watches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Reflected,
    Transmitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhichWayDetectorSpec {
    pub arm: Arm,
    /// `⟨unfired|fired⟩`; 0 marks the path perfectly, 1 not at all.
    pub gamma: f64,
}

impl WhichWayDetectorSpec {
    pub fn new(arm: Arm, gamma: f64) -> Self {
        Self { arm, gamma }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(InterferometerError::InvalidGamma(self.gamma));
        }
        Ok(())
    }

    fn fired(&self) -> [Complex64; 2] {
        [c(self.gamma, 0.0), c((1.0 - self.gamma * self.gamma).max(0.0).sqrt(), 0.0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputPort {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl InputPort {
    fn index(self) -> usize {
        match self {
            Self::One => 0,
            Self::Two => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig {
    pub bs_in: BeamSplitterSpec,
    /// `None` removes the output beam splitter.
    pub bs_out: Option<BeamSplitterSpec>,
    pub phase: f64,
    pub ww: Option<WhichWayDetectorSpec>,
    pub input_port: InputPort,
}

impl InterferometerConfig {
    pub fn new(bs_in: BeamSplitterSpec, bs_out: Option<BeamSplitterSpec>) -> Self {
        Self {
            bs_in,
            bs_out,
            phase: 0.0,
            ww: None,
            input_port: InputPort::One,
        }
    }

    /// Two balanced beam splitters with real amplitudes, no recoil.
    pub fn balanced() -> Self {
        Self::new(BeamSplitterSpec::balanced(), Some(BeamSplitterSpec::balanced()))
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_detector(mut self, ww: WhichWayDetectorSpec) -> Self {
        self.ww = Some(ww);
        self
    }

    pub fn with_input_port(mut self, port: InputPort) -> Self {
        self.input_port = port;
        self
    }

    /// Same recoil at both beam splitters.
    pub fn with_recoil(mut self, recoil: f64) -> Self {
        self.bs_in.recoil = recoil;
        if let Some(bs) = self.bs_out.as_mut() {
            bs.recoil = recoil;
        }
        self
    }

    pub fn with_packet(mut self, packet: PacketSpec) -> Self {
        self.bs_in.packet = packet;
        if let Some(bs) = self.bs_out.as_mut() {
            bs.packet = packet;
        }
        self
    }

    /// The output beam splitter, or the `t = 1`, `r = 0` stand-in when it is
    /// absent. The stand-in keeps the input splitter's packet parameters.
    pub fn output_splitter(&self) -> BeamSplitterSpec {
        self.bs_out.unwrap_or_else(|| {
            BeamSplitterSpec::absent().with_packet(self.bs_in.packet)
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.bs_in.validate("input")?;
        self.output_splitter().validate("output")?;
        if !self.phase.is_finite() {
            return Err(InterferometerError::NotFinite {
                name: "phase",
                value: self.phase,
            });
        }
        if let Some(ww) = &self.ww {
            ww.validate()?;
        }
        Ok(())
    }

    fn pointer_overlap(&self) -> f64 {
        self.ww.map_or(1.0, |w| w.gamma)
    }

    /// Internal arm index (0 = b1, 1 = b2) the detector watches.
    fn monitored_arm(&self) -> Option<usize> {
        let input = self.input_port.index();
        self.ww.map(|w| match w.arm {
            Arm::Transmitted => input,
            Arm::Reflected => 1 - input,
        })
    }
}

/// One beam-splitter stage in the single-photon sector.
struct Stage {
    /// `amplitude[i][o]` for incoming mode `i` to outgoing mode `o`.
    amplitude: [[Complex64; 2]; 2],
    /// Momentum offset applied to the splitter's packet on each transition.
    offset: [[f64; 2]; 2],
}

impl Stage {
    /// `recoil_sign` is +1 for the input splitter and −1 for the output one.
    fn new(bs: &BeamSplitterSpec, recoil_sign: f64) -> Self {
        let kick = recoil_sign * bs.recoil;
        Self {
            amplitude: [[bs.t.conj(), -bs.r], [bs.r.conj(), bs.t]],
            offset: [[0.0, kick], [-kick, 0.0]],
        }
    }
}

/// Photon sits in `mode` with the packets displaced by the given offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    /// Internal arm during evolution; output port (0 = port 3, 1 = port 4) afterwards.
    pub mode: usize,
    pub amplitude: Complex64,
    pub bs_in_offset: f64,
    pub bs_out_offset: f64,
    pub fired: bool,
}

/// Factorized final state on `(path, bs_in, bs_out, ww)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedState {
    branches: Vec<Branch>,
    bs_in_packet: Wavepacket,
    bs_out_packet: Wavepacket,
    gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputProbabilities {
    pub p3: f64,
    pub p4: f64,
}

impl OutputProbabilities {
    pub fn total(&self) -> f64 {
        self.p3 + self.p4
    }
}

/// Translated copies of one packet, keyed by offset.
struct ShiftCache<'a> {
    base: &'a Wavepacket,
    shifted: Vec<(f64, Wavepacket)>,
}

impl<'a> ShiftCache<'a> {
    fn new(base: &'a Wavepacket) -> Self {
        Self {
            base,
            shifted: Vec::new(),
        }
    }

    fn get(&mut self, offset: f64) -> Result<&Wavepacket> {
        if let Some(i) = self.shifted.iter().position(|(o, _)| *o == offset) {
            return Ok(&self.shifted[i].1);
        }
        let packet = self.base.shift(offset)?;
        self.shifted.push((offset, packet));
        Ok(&self.shifted.last().expect("just pushed").1)
    }
}

/// Inner products between branches, decomposed by factor.
struct Gram {
    bs_in: Vec<Vec<Complex64>>,
    bs_out: Vec<Vec<Complex64>>,
    pointer: Vec<Vec<Complex64>>,
}

impl Gram {
    fn environment(&self, k: usize, l: usize) -> Complex64 {
        self.bs_in[k][l] * self.bs_out[k][l] * self.pointer[k][l]
    }
}

impl EvolvedState {
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn bs_in_packet(&self) -> &Wavepacket {
        &self.bs_in_packet
    }

    pub fn bs_out_packet(&self) -> &Wavepacket {
        &self.bs_out_packet
    }

    pub fn pointer_overlap(&self) -> f64 {
        self.gamma
    }

    /// Multiply every amplitude by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let factor = Complex64::from_polar(1.0, theta);
        let mut out = self.clone();
        for b in &mut out.branches {
            b.amplitude *= factor;
        }
        out
    }

    fn pointer_product(&self, a: bool, b: bool) -> Complex64 {
        if a == b {
            c(1.0, 0.0)
        } else {
            c(self.gamma, 0.0)
        }
    }

    fn gram(&self) -> Result<Gram> {
        let mut cache_in = ShiftCache::new(&self.bs_in_packet);
        let mut cache_out = ShiftCache::new(&self.bs_out_packet);
        let n = self.branches.len();
        let mut gram = Gram {
            bs_in: vec![vec![c(0.0, 0.0); n]; n],
            bs_out: vec![vec![c(0.0, 0.0); n]; n],
            pointer: vec![vec![c(0.0, 0.0); n]; n],
        };
        for (k, bk) in self.branches.iter().enumerate() {
            for (l, bl) in self.branches.iter().enumerate() {
                let a = cache_in.get(bk.bs_in_offset)?.clone();
                gram.bs_in[k][l] = a.overlap(cache_in.get(bl.bs_in_offset)?)?;
                let a = cache_out.get(bk.bs_out_offset)?.clone();
                gram.bs_out[k][l] = a.overlap(cache_out.get(bl.bs_out_offset)?)?;
                gram.pointer[k][l] = self.pointer_product(bk.fired, bl.fired);
            }
        }
        Ok(gram)
    }

    fn port_weight(&self, gram: &Gram, port: usize) -> f64 {
        let mut acc = c(0.0, 0.0);
        for (k, bk) in self.branches.iter().enumerate() {
            for (l, bl) in self.branches.iter().enumerate() {
                if bk.mode == port && bl.mode == port {
                    acc += bk.amplitude.conj() * bl.amplitude * gram.environment(k, l);
                }
            }
        }
        acc.re
    }

    /// Probability of finding the photon in each output port, summed over
    /// every packet and pointer configuration.
    pub fn probabilities(&self) -> Result<OutputProbabilities> {
        let gram = self.gram()?;
        Ok(OutputProbabilities {
            p3: self.port_weight(&gram, 0),
            p4: self.port_weight(&gram, 1),
        })
    }

    pub fn norm_sqr(&self) -> Result<f64> {
        Ok(self.probabilities()?.total())
    }

    /// Mean momentum of one beam splitter's reduced state, optionally
    /// conditioned on an output port. `None` when the port is never reached.
    fn reduced_mean(&self, gram: &Gram, which: Splitter, port: Option<usize>) -> Result<Option<f64>> {
        let (base, offsets): (&Wavepacket, Vec<f64>) = match which {
            Splitter::Input => (
                &self.bs_in_packet,
                self.branches.iter().map(|b| b.bs_in_offset).collect(),
            ),
            Splitter::Output => (
                &self.bs_out_packet,
                self.branches.iter().map(|b| b.bs_out_offset).collect(),
            ),
        };
        let mut cache = ShiftCache::new(base);
        let mut weight = c(0.0, 0.0);
        let mut moment = c(0.0, 0.0);
        for (k, bk) in self.branches.iter().enumerate() {
            for (l, bl) in self.branches.iter().enumerate() {
                if bk.mode != bl.mode || port.is_some_and(|p| p != bk.mode) {
                    continue;
                }
                let env = gram.environment(k, l);
                let rest = gram.pointer[k][l]
                    * match which {
                        Splitter::Input => gram.bs_out[k][l],
                        Splitter::Output => gram.bs_in[k][l],
                    };
                let a = cache.get(offsets[k])?.clone();
                let b = cache.get(offsets[l])?;
                let coeff = bk.amplitude.conj() * bl.amplitude;
                weight += coeff * env;
                moment += coeff * a.momentum_element(b)? * rest;
            }
        }
        if weight.re < tolerance::DEGENERATE_PROBABILITY {
            return Ok(None);
        }
        Ok(Some(moment.re / weight.re))
    }

    /// Dense amplitudes on `(path, bs_in, bs_out, ww)`, refusing composites
    /// larger than `cap`.
    pub fn to_dense_capped(&self, cap: usize) -> Result<CompositeState> {
        let n_in = self.bs_in_packet.samples().len();
        let n_out = self.bs_out_packet.samples().len();
        let subsystems = dense_space(n_in, n_out, cap)?;
        let layout = Layout::of(&subsystems);
        let mut amps = vec![c(0.0, 0.0); layout.total()];
        // √Δp per packet factor turns grid samples into unit-norm amplitudes
        let measure = (self.bs_in_packet.grid().spacing() * self.bs_out_packet.grid().spacing()).sqrt();
        let fired = WhichWayDetectorSpec::new(Arm::Reflected, self.gamma).fired();
        let unfired = [c(1.0, 0.0), c(0.0, 0.0)];
        for b in &self.branches {
            let a = self.bs_in_packet.shift(b.bs_in_offset)?;
            let o = self.bs_out_packet.shift(b.bs_out_offset)?;
            let pointer = if b.fired { fired } else { unfired };
            for (i, x) in a.samples().iter().enumerate() {
                for (j, y) in o.samples().iter().enumerate() {
                    for (w, z) in pointer.iter().enumerate() {
                        amps[layout.flatten(&[b.mode, i, j, w])] += b.amplitude * x * y * z * measure;
                    }
                }
            }
        }
        Ok(CompositeState::new(subsystems, amps)?)
    }

    pub fn to_dense(&self) -> Result<CompositeState> {
        self.to_dense_capped(tolerance::MAX_DENSE_DIMENSION)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Splitter {
    Input,
    Output,
}

fn dense_space(n_in: usize, n_out: usize, cap: usize) -> Result<Vec<SubsystemSpec>> {
    let dimension = 4 * n_in * n_out;
    if dimension > cap {
        return Err(InterferometerError::TooLarge { dimension, cap });
    }
    Ok(vec![
        SubsystemSpec::new(PATH, 2)?,
        SubsystemSpec::new(BS_IN, n_in)?,
        SubsystemSpec::new(BS_OUT, n_out)?,
        SubsystemSpec::new(POINTER, 2)?,
    ])
}

fn propagate(branches: Vec<Branch>, stage: &Stage, input_side: bool) -> Vec<Branch> {
    let mut out = Vec::with_capacity(branches.len() * 2);
    for b in branches {
        for o in 0..2 {
            let amp = stage.amplitude[b.mode][o];
            if amp == c(0.0, 0.0) {
                continue;
            }
            let kick = stage.offset[b.mode][o];
            let mut next = Branch {
                mode: o,
                amplitude: b.amplitude * amp,
                ..b
            };
            if input_side {
                next.bs_in_offset += kick;
            } else {
                next.bs_out_offset += kick;
            }
            out.push(next);
        }
    }
    out
}

/// Run the photon through the interferometer, tracking branches.
pub fn evolve(config: &InterferometerConfig) -> Result<EvolvedState> {
    config.validate()?;
    let bs_out = config.output_splitter();
    let bs_in_packet = config.bs_in.packet.build()?;
    let bs_out_packet = bs_out.packet.build()?;

    let start = Branch {
        mode: config.input_port.index(),
        amplitude: c(1.0, 0.0),
        bs_in_offset: 0.0,
        bs_out_offset: 0.0,
        fired: false,
    };
    let mut branches = propagate(vec![start], &Stage::new(&config.bs_in, 1.0), true);
    if let Some(arm) = config.monitored_arm() {
        for b in &mut branches {
            b.fired = b.mode == arm;
        }
    }
    let phase = Complex64::from_polar(1.0, config.phase);
    for b in &mut branches {
        if b.mode == 0 {
            b.amplitude *= phase;
        }
    }
    let branches = propagate(branches, &Stage::new(&bs_out, -1.0), false);

    Ok(EvolvedState {
        branches,
        bs_in_packet,
        bs_out_packet,
        gamma: config.pointer_overlap(),
    })
}

/// Stage-by-stage evolution on the dense product space. Only feasible on
/// small grids; used as a reference for [`evolve`].
pub fn evolve_dense(config: &InterferometerConfig, cap: usize) -> Result<CompositeState> {
    config.validate()?;
    let bs_out = config.output_splitter();
    let psi_in = config.bs_in.packet.build()?;
    let psi_out = bs_out.packet.build()?;
    let n_in = psi_in.samples().len();
    let n_out = psi_out.samples().len();
    let subsystems = dense_space(n_in, n_out, cap)?;
    let layout = Layout::of(&subsystems);

    let mut state = vec![c(0.0, 0.0); layout.total()];
    let port = config.input_port.index();
    let measure = (psi_in.grid().spacing() * psi_out.grid().spacing()).sqrt();
    for (i, x) in psi_in.samples().iter().enumerate() {
        for (j, y) in psi_out.samples().iter().enumerate() {
            state[layout.flatten(&[port, i, j, 0])] = x * y * measure;
        }
    }

    state = apply_splitter(&state, &layout, &Stage::new(&config.bs_in, 1.0), 1, psi_in.grid());

    if let (Some(arm), Some(ww)) = (config.monitored_arm(), config.ww) {
        let g = ww.gamma;
        let s = (1.0 - g * g).max(0.0).sqrt();
        for base in layout.offsets(&[1, 2]) {
            let i0 = arm * layout.stride(0) + base;
            let i1 = i0 + layout.stride(3);
            let (u, f) = (state[i0], state[i1]);
            state[i0] = u * g - f * s;
            state[i1] = u * s + f * g;
        }
    }

    let phase = Complex64::from_polar(1.0, config.phase);
    for amp in state.iter_mut().take(layout.stride(0)) {
        *amp *= phase;
    }

    state = apply_splitter(&state, &layout, &Stage::new(&bs_out, -1.0), 2, psi_out.grid());
    Ok(CompositeState::new(subsystems, state)?)
}

/// Apply a beam-splitter stage whose recoil acts along `axis`.
fn apply_splitter(
    state: &[Complex64],
    layout: &Layout,
    stage: &Stage,
    axis: usize,
    grid: &MomentumGrid,
) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); state.len()];
    let other_axes: Vec<usize> = [1, 2, 3].into_iter().filter(|&a| a != axis).collect();
    let fibers = layout.offsets(&other_axes);
    let stride = layout.stride(axis);
    let n = layout.dims()[axis];
    for i in 0..2 {
        for o in 0..2 {
            let amp = stage.amplitude[i][o];
            if amp == c(0.0, 0.0) {
                continue;
            }
            let kick = stage.offset[i][o];
            for &base in &fibers {
                let src = i * layout.stride(0) + base;
                let dst = o * layout.stride(0) + base;
                let fiber: Vec<Complex64> = (0..n).map(|k| state[src + k * stride]).collect();
                let moved = if kick == 0.0 {
                    fiber
                } else {
                    wavepacket::spectral_shift(&fiber, grid.span(), kick)
                };
                for (k, v) in moved.into_iter().enumerate() {
                    out[dst + k * stride] += amp * v;
                }
            }
        }
    }
    out
}

/// Port probabilities read off a dense `(path, bs_in, bs_out, ww)` state.
pub fn dense_probabilities(state: &CompositeState) -> OutputProbabilities {
    let half = state.dimension() / 2;
    let amps = state.amplitudes();
    OutputProbabilities {
        p3: amps[..half].iter().map(|a| a.norm_sqr()).sum(),
        p4: amps[half..].iter().map(|a| a.norm_sqr()).sum(),
    }
}

pub fn output_probabilities(config: &InterferometerConfig) -> Result<OutputProbabilities> {
    evolve(config)?.probabilities()
}

/// One term of an operator-valued path coefficient: a scalar times recoil
/// translations `exp(e·δp∇)` on each splitter, possibly carrying the
/// detector interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    scalar: Complex64,
    bs_in_exponent: f64,
    bs_out_exponent: f64,
    reflected_at_input: bool,
}

impl Term {
    fn adjoint(self) -> Self {
        Self {
            scalar: self.scalar.conj(),
            bs_in_exponent: -self.bs_in_exponent,
            bs_out_exponent: -self.bs_out_exponent,
            ..self
        }
    }

    fn offsets(&self, recoil_in: f64, recoil_out: f64) -> (f64, f64) {
        // exp(e·δp∇) maps ψ(p) to ψ(p + e·δp), i.e. a translation by −e·δp
        (-self.bs_in_exponent * recoil_in, -self.bs_out_exponent * recoil_out)
    }
}

/// Closed-form path coefficients with the recoil operators reduced to
/// expectation values over the splitter packets.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCoefficients {
    /// `e^{iφ/2}⟨C⟩` for output port 3.
    pub c1: Complex64,
    /// `e^{iφ/2}⟨C⟩` for output port 4.
    pub c2: Complex64,
    p3: f64,
    p4: f64,
    interference: [f64; 2],
}

impl PathCoefficients {
    /// Port probabilities `⟨C†C⟩`, including the cross terms weighted by the
    /// recoil and pointer overlaps.
    pub fn probabilities(&self) -> OutputProbabilities {
        OutputProbabilities {
            p3: self.p3,
            p4: self.p4,
        }
    }

    /// Cross-term contribution to the port 3 and port 4 probabilities.
    pub fn interference_terms(&self) -> [f64; 2] {
        self.interference
    }

    /// `|c1|² + |c2|²` from the scalar-reduced amplitudes.
    pub fn scalar_weight(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }
}

pub fn path_coefficients(config: &InterferometerConfig) -> Result<PathCoefficients> {
    config.validate()?;
    let bs_out = config.output_splitter();
    let (t1, r1) = (config.bs_in.t, config.bs_in.r);
    let (t2, r2) = (bs_out.t, bs_out.r);
    let half = Complex64::from_polar(1.0, config.phase / 2.0);

    let c1 = [
        Term {
            scalar: t1.conj() * t2.conj() * half,
            bs_in_exponent: 0.0,
            bs_out_exponent: 0.0,
            reflected_at_input: false,
        },
        Term {
            scalar: -r1 * r2.conj() * half.conj(),
            bs_in_exponent: -1.0,
            bs_out_exponent: -1.0,
            reflected_at_input: true,
        },
    ];
    let c2 = [
        Term {
            scalar: -t1.conj() * r2 * half,
            bs_in_exponent: 0.0,
            bs_out_exponent: 1.0,
            reflected_at_input: false,
        },
        Term {
            scalar: -r1 * t2 * half.conj(),
            bs_in_exponent: -1.0,
            bs_out_exponent: 0.0,
            reflected_at_input: true,
        },
    ];
    // a1† = e^{iφ/2}(C1 a3† + C2 a4†),  a2† = e^{iφ/2}(−C2† a3† + C1† a4†)
    let (port3, port4): (Vec<Term>, Vec<Term>) = match config.input_port {
        InputPort::One => (c1.to_vec(), c2.to_vec()),
        InputPort::Two => (
            c2.iter()
                .map(|t| {
                    let mut a = t.adjoint();
                    a.scalar = -a.scalar;
                    a
                })
                .collect(),
            c1.iter().map(|t| t.adjoint()).collect(),
        ),
    };

    let psi_in = config.bs_in.packet.build()?;
    let psi_out = bs_out.packet.build()?;
    let recoil_in = config.bs_in.recoil;
    let recoil_out = bs_out.recoil;
    let gamma = config.pointer_overlap();
    let marked = |t: &Term| match config.ww.map(|w| w.arm) {
        None => false,
        Some(Arm::Reflected) => t.reflected_at_input,
        Some(Arm::Transmitted) => !t.reflected_at_input,
    };

    let mut reduced = [c(0.0, 0.0); 2];
    let mut probability = [0.0; 2];
    let mut interference = [0.0; 2];
    for (port, terms) in [port3, port4].iter().enumerate() {
        for t in terms {
            let (o_in, o_out) = t.offsets(recoil_in, recoil_out);
            let pointer = if marked(t) { gamma } else { 1.0 };
            reduced[port] += half
                * t.scalar
                * psi_in.recoil_overlap(o_in)?
                * psi_out.recoil_overlap(o_out)?
                * pointer;
        }
        for (k, a) in terms.iter().enumerate() {
            for (l, b) in terms.iter().enumerate() {
                let (a_in, a_out) = a.offsets(recoil_in, recoil_out);
                let (b_in, b_out) = b.offsets(recoil_in, recoil_out);
                // ⟨ψ(x)|ψ(y)⟩ = ⟨ψ|ψ(y − x)⟩
                let env = psi_in.recoil_overlap(b_in - a_in)?
                    * psi_out.recoil_overlap(b_out - a_out)?
                    * if marked(a) == marked(b) { 1.0 } else { gamma };
                let term = (a.scalar.conj() * b.scalar * env).re;
                probability[port] += term;
                if k != l {
                    interference[port] += term;
                }
            }
        }
    }

    Ok(PathCoefficients {
        c1: reduced[0],
        c2: reduced[1],
        p3: probability[0],
        p4: probability[1],
        interference,
    })
}

/// `(max p3 − min p3)/(max p3 + min p3)` over `n_phase` phases evenly spaced
/// in `[0, 2π)`. The configured phase is ignored.
pub fn visibility(config: &InterferometerConfig, n_phase: usize) -> Result<f64> {
    if n_phase < 8 {
        return Err(InterferometerError::TooFewPhases(n_phase));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n_phase {
        let phase = 2.0 * PI * k as f64 / n_phase as f64;
        let p3 = output_probabilities(&config.with_phase(phase))?.p3;
        lo = lo.min(p3);
        hi = hi.max(p3);
    }
    Ok(fringe_visibility(lo, hi))
}

/// `(hi − lo)/(hi + lo)`, or 0 when both vanish.
pub fn fringe_visibility(lo: f64, hi: f64) -> f64 {
    if hi + lo < 1e-12 {
        0.0
    } else {
        (hi - lo) / (hi + lo)
    }
}

/// Recoil bookkeeping for one beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitterMomentum {
    pub recoil: f64,
    /// `|⟨ψ|exp(−δp·∇)|ψ⟩|` for this splitter's packet.
    pub overlap_magnitude: f64,
    pub initial_mean: f64,
    /// Change of `⟨p⟩` in the reduced packet state after the photon passes.
    pub mean_shift: f64,
    /// Same, conditioned on detection in port 3 (`None` if never detected there).
    pub mean_shift_port3: Option<f64>,
    pub mean_shift_port4: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumTransferReport {
    pub bs_in: SplitterMomentum,
    pub bs_out: SplitterMomentum,
    pub probabilities: OutputProbabilities,
}

pub fn momentum_transfer_report(config: &InterferometerConfig) -> Result<MomentumTransferReport> {
    let state = evolve(config)?;
    let gram = state.gram()?;
    let probabilities = OutputProbabilities {
        p3: state.port_weight(&gram, 0),
        p4: state.port_weight(&gram, 1),
    };
    let splitter = |which: Splitter, recoil: f64| -> Result<SplitterMomentum> {
        let packet = match which {
            Splitter::Input => &state.bs_in_packet,
            Splitter::Output => &state.bs_out_packet,
        };
        let untouched = state.branches.iter().all(|b| match which {
            Splitter::Input => b.bs_in_offset == 0.0,
            Splitter::Output => b.bs_out_offset == 0.0,
        });
        let initial_mean = packet.mean_momentum();
        let shift = |port: Option<usize>| -> Result<Option<f64>> {
            let mean = state.reduced_mean(&gram, which, port)?;
            Ok(mean.map(|m| if untouched { 0.0 } else { m - initial_mean }))
        };
        Ok(SplitterMomentum {
            recoil,
            overlap_magnitude: packet.recoil_overlap(recoil)?.norm(),
            initial_mean,
            mean_shift: shift(None)?.unwrap_or(0.0),
            mean_shift_port3: shift(Some(0))?,
            mean_shift_port4: shift(Some(1))?,
        })
    };
    Ok(MomentumTransferReport {
        bs_in: splitter(Splitter::Input, config.bs_in.recoil)?,
        bs_out: splitter(Splitter::Output, config.output_splitter().recoil)?,
        probabilities,
    })
}
