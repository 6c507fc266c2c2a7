// Copyright 2026 The nvreg Authors
// SPDX-License-Identifier: Apache-2.0

//! The electron ⊗ ¹⁴N ⊗ ¹³C₁ ⊗ ¹³C₂ register, its hyperfine lines and the
//! ideal frequency-selective gates built on them.
//!
//! Subsystem order is electron, nitrogen, carbon 1, carbon 2. The electron is
//! the `m_S = 0 ↔ -1` qubit (logical 0 is `m_S = 0`). The nitrogen is either a
//! full spin-1 (`m_I ∈ {+1, 0, -1}`) or the `m_I ∈ {0, -1}` qubit.
//!
//! Offset convention: nitrogen contributes `m_I · a_N` (so logical 1 of the
//! qubit subspace sits at `-a_N`), each carbon contributes `+A/2` for logical 0
//! and `-A/2` for logical 1. Only differences between lines are observable.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gates::{embed, flat_index, rotation, Axis};
use crate::linalg::{tensor, ComplexMatrix, ONE};
use crate::state::{apply_channel, apply_unitary, partial_trace, DensityMatrix, KrausChannel};

pub const ELECTRON: usize = 0;
pub const NITROGEN: usize = 1;
pub const CARBON1: usize = 2;
pub const CARBON2: usize = 3;
pub const NUCLEI: [usize; 3] = [NITROGEN, CARBON1, CARBON2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NitrogenMode {
    FullTriplet,
    QubitSubspace,
}

impl NitrogenMode {
    pub fn nitrogen_dim(self) -> usize {
        match self {
            NitrogenMode::FullTriplet => 3,
            NitrogenMode::QubitSubspace => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegisterConfig {
    pub a_n_hz: f64,
    pub a_c1_hz: f64,
    pub a_c2_hz: f64,
    pub linewidth_hz: f64,
    pub nitrogen_mode: NitrogenMode,
}

impl Default for RegisterConfig {
    fn default() -> Self {
        Self {
            a_n_hz: 2.16e6,
            a_c1_hz: 413e3,
            a_c2_hz: 89e3,
            linewidth_hz: 50e3,
            nitrogen_mode: NitrogenMode::QubitSubspace,
        }
    }
}

impl RegisterConfig {
    pub fn with_mode(mut self, mode: NitrogenMode) -> Self {
        self.nitrogen_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let couplings = [self.a_n_hz, self.a_c1_hz, self.a_c2_hz];
        if couplings.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter(format!("couplings must be positive, got {couplings:?}")));
        }
        if couplings[0] == couplings[1] || couplings[0] == couplings[2] || couplings[1] == couplings[2] {
            return Err(Error::InvalidParameter(format!("couplings must be distinct, got {couplings:?}")));
        }
        if !(self.linewidth_hz > 0.0 && self.linewidth_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!("linewidth must be positive, got {}", self.linewidth_hz)));
        }
        Ok(())
    }

    /// Subsystem dimensions: electron, nitrogen, carbon 1, carbon 2.
    pub fn dims(&self) -> [usize; 4] {
        [2, self.nitrogen_mode.nitrogen_dim(), 2, 2]
    }

    pub fn nuclear_dim(&self) -> usize {
        self.nitrogen_mode.nitrogen_dim() * 4
    }

    pub fn dim(&self) -> usize {
        2 * self.nuclear_dim()
    }

    /// Every nuclear configuration, in register index order.
    pub fn labels(&self) -> Vec<NuclearLabel> {
        let ns: &[i8] = match self.nitrogen_mode {
            NitrogenMode::FullTriplet => &[1, 0, -1],
            NitrogenMode::QubitSubspace => &[0, 1],
        };
        let mut out = Vec::with_capacity(self.nuclear_dim());
        for &n in ns {
            for c1 in 0..2 {
                for c2 in 0..2 {
                    out.push(NuclearLabel { n, c1, c2 });
                }
            }
        }
        out
    }

    /// Labels satisfying `pred`.
    pub fn labels_where(&self, pred: impl Fn(&NuclearLabel) -> bool) -> Vec<NuclearLabel> {
        self.labels().into_iter().filter(|l| pred(l)).collect()
    }

    /// Smallest separation between any two spectral lines.
    pub fn min_line_separation(&self) -> f64 {
        let lines = spectrum(self);
        lines.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::INFINITY, f64::min)
    }

    /// True when the linewidth is at least the closest line separation, i.e.
    /// selective addressing is questionable.
    pub fn linewidth_warning(&self) -> bool {
        self.linewidth_hz >= self.min_line_separation()
    }
}

/// Nuclear configuration. In qubit-subspace mode `n` is the logical nitrogen
/// value (0 ↔ `m_I = 0`, 1 ↔ `m_I = -1`); in full-triplet mode it is `m_I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NuclearLabel {
    pub n: i8,
    pub c1: u8,
    pub c2: u8,
}

impl NuclearLabel {
    pub const fn new(n: i8, c1: u8, c2: u8) -> Self {
        Self { n, c1, c2 }
    }

    /// Qubit-subspace label from three bits written `|n c1 c2⟩`.
    pub const fn bits(bits: u8) -> Self {
        Self { n: ((bits >> 2) & 1) as i8, c1: (bits >> 1) & 1, c2: bits & 1 }
    }

    /// Logical value of a nuclear qubit (subsystem index 1, 2 or 3).
    pub fn value(&self, subsystem: usize) -> i8 {
        match subsystem {
            NITROGEN => self.n,
            CARBON1 => self.c1 as i8,
            CARBON2 => self.c2 as i8,
            _ => panic!("subsystem {subsystem} is not nuclear"),
        }
    }

    fn nitrogen_index(&self, mode: NitrogenMode) -> Result<usize> {
        if self.c1 > 1 || self.c2 > 1 {
            return Err(Error::LabelModeMismatch(format!("carbon values must be 0 or 1: {self:?}")));
        }
        match (mode, self.n) {
            (NitrogenMode::FullTriplet, 1) => Ok(0),
            (NitrogenMode::FullTriplet, 0) => Ok(1),
            (NitrogenMode::FullTriplet, -1) => Ok(2),
            (NitrogenMode::QubitSubspace, 0) => Ok(0),
            (NitrogenMode::QubitSubspace, 1) => Ok(1),
            _ => Err(Error::LabelModeMismatch(format!("{self:?} in {mode:?}"))),
        }
    }

    /// Index within the nuclear subspace (nitrogen most significant).
    pub fn index(&self, cfg: &RegisterConfig) -> Result<usize> {
        let n = self.nitrogen_index(cfg.nitrogen_mode)?;
        Ok(flat_index(&[n, self.c1 as usize, self.c2 as usize], &[cfg.nitrogen_mode.nitrogen_dim(), 2, 2]))
    }
}

/// Offset of the electron `m_S = 0 ↔ -1` line for a nuclear configuration,
/// relative to the bare transition.
pub fn transition_offset(cfg: &RegisterConfig, label: NuclearLabel) -> Result<f64> {
    label.nitrogen_index(cfg.nitrogen_mode)?;
    let m_n = match cfg.nitrogen_mode {
        NitrogenMode::FullTriplet => label.n as f64,
        NitrogenMode::QubitSubspace => -(label.n as f64),
    };
    let carbon = |bit: u8, a: f64| if bit == 0 { a / 2.0 } else { -a / 2.0 };
    Ok(m_n * cfg.a_n_hz + carbon(label.c1, cfg.a_c1_hz) + carbon(label.c2, cfg.a_c2_hz))
}

/// All lines sorted by ascending offset.
pub fn spectrum(cfg: &RegisterConfig) -> Vec<(NuclearLabel, f64)> {
    let mut lines: Vec<(NuclearLabel, f64)> = cfg
        .labels()
        .into_iter()
        .map(|l| (l, transition_offset(cfg, l).expect("labels come from the config")))
        .collect();
    lines.sort_by(|a, b| a.1.total_cmp(&b.1));
    lines
}

fn condition_mask(cfg: &RegisterConfig, condition: &[NuclearLabel]) -> Result<Vec<bool>> {
    if condition.is_empty() {
        return Err(Error::EmptyCondition);
    }
    let mut mask = vec![false; cfg.nuclear_dim()];
    for label in condition {
        mask[label.index(cfg)?] = true;
    }
    Ok(mask)
}

/// Ideal rotation of the electron conditioned on the nuclear configuration
/// being any of `condition`; identity on every other line.
pub fn conditional_electron_rotation(
    cfg: &RegisterConfig,
    condition: &[NuclearLabel],
    angle: f64,
    axis: Axis,
) -> Result<ComplexMatrix> {
    if !angle.is_finite() {
        return Err(Error::InvalidParameter(format!("angle {angle} is not finite")));
    }
    let mask = condition_mask(cfg, condition)?;
    let nuc = cfg.nuclear_dim();
    let r = rotation(axis, angle);
    let mut u = ComplexMatrix::zeros(2 * nuc, 2 * nuc);
    for (k, &hit) in mask.iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                let amp = if hit {
                    r[(a, b)]
                } else if a == b {
                    ONE
                } else {
                    continue;
                };
                u[(a * nuc + k, b * nuc + k)] = amp;
            }
        }
    }
    Ok(u)
}

/// Controlled phase: a conditional 2π_x electron rotation, which is `-1` on
/// the conditioned nuclear configurations whatever the electron state.
pub fn cphase(cfg: &RegisterConfig, condition: &[NuclearLabel]) -> Result<ComplexMatrix> {
    conditional_electron_rotation(cfg, condition, 2.0 * PI, Axis::X)
}

/// Electron NOT conditioned on nuclear configurations (π_x rotation).
pub fn cn_not_e(cfg: &RegisterConfig, condition: &[NuclearLabel]) -> Result<ComplexMatrix> {
    conditional_electron_rotation(cfg, condition, PI, Axis::X)
}

/// Rotation of one nuclear qubit conditioned on the electron state.
pub fn electron_conditional_nuclear_rotation(
    cfg: &RegisterConfig,
    target: usize,
    electron_value: usize,
    angle: f64,
    axis: Axis,
) -> Result<ComplexMatrix> {
    let dims = cfg.dims();
    require_nuclear_qubit(cfg, target)?;
    if electron_value > 1 {
        return Err(Error::InvalidParameter(format!("electron value {electron_value}")));
    }
    let nuclear_dims = &dims[1..];
    let r = embed(&rotation(axis, angle), target - 1, nuclear_dims)?;
    let mut proj_on = ComplexMatrix::zeros(2, 2);
    proj_on[(electron_value, electron_value)] = ONE;
    let mut proj_off = ComplexMatrix::zeros(2, 2);
    proj_off[(1 - electron_value, 1 - electron_value)] = ONE;
    Ok(&tensor(&proj_on, &r) + &tensor(&proj_off, &ComplexMatrix::identity(cfg.nuclear_dim())))
}

fn require_nuclear_qubit(cfg: &RegisterConfig, subsystem: usize) -> Result<()> {
    match subsystem {
        CARBON1 | CARBON2 => Ok(()),
        NITROGEN if cfg.nitrogen_mode == NitrogenMode::QubitSubspace => Ok(()),
        NITROGEN => Err(Error::LabelModeMismatch("nitrogen is not a qubit in full-triplet mode".into())),
        _ => Err(Error::InvalidSubsystems(format!("subsystem {subsystem} is not a nuclear spin"))),
    }
}

/// One step of a register circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    /// Rotation of a single subsystem (electron or nuclear qubit).
    LocalRotation { target: usize, axis: Axis, angle: f64 },
    ConditionalElectronRotation { condition: Vec<NuclearLabel>, axis: Axis, angle: f64 },
    CPhase { condition: Vec<NuclearLabel> },
    CnNotE { condition: Vec<NuclearLabel> },
    /// Nuclear rotation selective on the electron state (`CₑNOTₙ` at angle π).
    ElectronConditionalNuclearRotation { target: usize, electron_value: usize, axis: Axis, angle: f64 },
    /// Nuclear CNOT, expanded into local rotations and a CPhase when applied.
    NuclearCnot { control: usize, target: usize, control_value: u8 },
    /// Single-subsystem noise channel.
    Noise { target: usize, channel: KrausChannel },
    /// Non-selective computational-basis measurement of one subsystem.
    Measurement { target: usize },
}

impl GateOp {
    /// Full-register action: a unitary, or a channel for the non-unitary kinds.
    pub fn action(&self, cfg: &RegisterConfig) -> Result<Action> {
        let dims = cfg.dims();
        Ok(match self {
            GateOp::LocalRotation { target, axis, angle } => {
                if *target != ELECTRON {
                    require_nuclear_qubit(cfg, *target)?;
                }
                if !angle.is_finite() {
                    return Err(Error::InvalidParameter(format!("angle {angle} is not finite")));
                }
                Action::Unitary(embed(&rotation(*axis, *angle), *target, &dims)?)
            }
            GateOp::ConditionalElectronRotation { condition, axis, angle } => {
                Action::Unitary(conditional_electron_rotation(cfg, condition, *angle, *axis)?)
            }
            GateOp::CPhase { condition } => Action::Unitary(cphase(cfg, condition)?),
            GateOp::CnNotE { condition } => Action::Unitary(cn_not_e(cfg, condition)?),
            GateOp::ElectronConditionalNuclearRotation { target, electron_value, axis, angle } => {
                Action::Unitary(electron_conditional_nuclear_rotation(cfg, *target, *electron_value, *angle, *axis)?)
            }
            GateOp::NuclearCnot { control, target, control_value } => {
                Action::Unitary(nuclear_cnot(cfg, *control, *target, *control_value)?.unitary(cfg)?)
            }
            GateOp::Noise { target, channel } => {
                if *target >= dims.len() {
                    return Err(Error::InvalidSubsystems(format!("subsystem {target} out of range")));
                }
                Action::Channel(channel.on_subsystem(*target, &dims)?)
            }
            GateOp::Measurement { target } => {
                if *target >= dims.len() {
                    return Err(Error::InvalidSubsystems(format!("subsystem {target} out of range")));
                }
                Action::Channel(KrausChannel::dephase(dims[*target]).on_subsystem(*target, &dims)?)
            }
        })
    }
}

pub enum Action {
    Unitary(ComplexMatrix),
    Channel(KrausChannel),
}

/// An ordered gate list, applied first to last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub ops: Vec<GateOp>,
    /// Diagonal phase matrix `D` on the nuclear subspace with
    /// `U_net = D · U_ideal`, recorded for composite gates.
    pub phase_correction: Option<ComplexMatrix>,
}

impl Circuit {
    pub fn new(ops: Vec<GateOp>) -> Self {
        Self { ops, phase_correction: None }
    }

    pub fn push(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    pub fn extend(&mut self, other: Circuit) {
        self.ops.extend(other.ops);
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn apply(&self, cfg: &RegisterConfig, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != cfg.dim() {
            return Err(Error::DimensionMismatch { expected: cfg.dim(), found: rho.dim() });
        }
        let mut state = rho.clone();
        for op in &self.ops {
            state = match op.action(cfg)? {
                Action::Unitary(u) => apply_unitary(&state, &u)?,
                Action::Channel(ch) => apply_channel(&state, &ch)?,
            };
        }
        Ok(state)
    }

    /// Net unitary; fails if the circuit contains a non-unitary step.
    pub fn unitary(&self, cfg: &RegisterConfig) -> Result<ComplexMatrix> {
        let mut u = ComplexMatrix::identity(cfg.dim());
        for op in &self.ops {
            match op.action(cfg)? {
                Action::Unitary(g) => u = g.matmul(&u),
                Action::Channel(_) => {
                    return Err(Error::InvalidParameter(format!("{op:?} is not unitary")));
                }
            }
        }
        Ok(u)
    }
}

/// Nuclear NOT on `target` controlled by several nuclear qubits, built as
/// `Ry(π/2) · CPhase · Ry(-π/2)` on the target.
pub fn nuclear_controlled_not(cfg: &RegisterConfig, controls: &[(usize, u8)], target: usize) -> Result<Circuit> {
    require_nuclear_qubit(cfg, target)?;
    for &(c, v) in controls {
        require_nuclear_qubit(cfg, c)?;
        if c == target {
            return Err(Error::InvalidSubsystems(format!("control {c} equals target")));
        }
        if v > 1 {
            return Err(Error::InvalidParameter(format!("control value {v}")));
        }
    }
    let condition = cfg.labels_where(|l| {
        l.value(target) == 1 && controls.iter().all(|&(c, v)| l.value(c) == v as i8)
    });
    Ok(Circuit::new(vec![
        GateOp::LocalRotation { target, axis: Axis::Y, angle: -PI / 2.0 },
        GateOp::CPhase { condition },
        GateOp::LocalRotation { target, axis: Axis::Y, angle: PI / 2.0 },
    ]))
}

/// Textbook (multi-)controlled NOT on the nuclear subspace, tensored with the
/// electron identity.
fn ideal_nuclear_controlled_not(cfg: &RegisterConfig, controls: &[(usize, u8)], target: usize) -> ComplexMatrix {
    let labels = cfg.labels();
    let nuc = cfg.nuclear_dim();
    let mut m = ComplexMatrix::zeros(nuc, nuc);
    for (i, l) in labels.iter().enumerate() {
        let hit = controls.iter().all(|&(c, v)| l.value(c) == v as i8);
        let mut out = *l;
        if hit {
            match target {
                NITROGEN => out.n ^= 1,
                CARBON1 => out.c1 ^= 1,
                _ => out.c2 ^= 1,
            }
        }
        m[(out.index(cfg).expect("flipped label stays valid"), i)] = ONE;
    }
    tensor(&ComplexMatrix::identity(2), &m)
}

/// CNOT between two nuclear spins mediated by the electron. The circuit
/// carries the diagonal phase matrix relating it to the textbook CNOT.
pub fn nuclear_cnot(cfg: &RegisterConfig, control: usize, target: usize, control_value: u8) -> Result<Circuit> {
    let mut circuit = nuclear_controlled_not(cfg, &[(control, control_value)], target)?;
    let net = circuit.unitary(cfg)?;
    let ideal = ideal_nuclear_controlled_not(cfg, &[(control, control_value)], target);
    let d = net.matmul(&ideal.dagger());
    let nuc = cfg.nuclear_dim();
    // electron |0⟩ block of D
    let block = ComplexMatrix::from_fn(nuc, nuc, |r, c| d[(r, c)]);
    let off_diagonal = (0..nuc)
        .flat_map(|r| (0..nuc).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| block[(r, c)].norm())
        .fold(0.0, f64::max);
    if off_diagonal > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "composite CNOT differs from ideal by a non-diagonal factor ({off_diagonal:e})"
        )));
    }
    circuit.phase_correction = Some(block);
    Ok(circuit)
}

/// Polarization transfer: for every nucleus, reset the electron, swap the
/// nuclear state onto it with a `CₙNOTₑ`/`CₑNOTₙ` pair, then reset again.
pub fn swap_init_circuit(cfg: &RegisterConfig) -> Result<Circuit> {
    let mut circuit = Circuit::default();
    for &k in &NUCLEI {
        require_nuclear_qubit(cfg, k)?;
        circuit.push(GateOp::Noise { target: ELECTRON, channel: KrausChannel::reset() });
        circuit.push(GateOp::CnNotE { condition: cfg.labels_where(|l| l.value(k) == 1) });
        circuit.push(GateOp::ElectronConditionalNuclearRotation {
            target: k,
            electron_value: 1,
            axis: Axis::X,
            angle: PI,
        });
    }
    circuit.push(GateOp::Noise { target: ELECTRON, channel: KrausChannel::reset() });
    Ok(circuit)
}

/// `|0⟩⟨0|ₑ ⊗ ρ_nuclear`
pub fn with_electron_ground(nuclear: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::basis(2, 0).tensor(nuclear)
}

/// Reduced nuclear state (electron traced out).
pub fn nuclear_state(cfg: &RegisterConfig, rho: &DensityMatrix) -> Result<DensityMatrix> {
    partial_trace(rho, &[NITROGEN, CARBON1, CARBON2], &cfg.dims())
}

/// Reduced electron state.
pub fn electron_state(cfg: &RegisterConfig, rho: &DensityMatrix) -> Result<DensityMatrix> {
    partial_trace(rho, &[ELECTRON], &cfg.dims())
}
