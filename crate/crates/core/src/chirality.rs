//! Beam handedness, propagation direction, and the coupling kind they induce.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Handedness {
    #[serde(rename = "R")]
    Rhcp,
    #[serde(rename = "L")]
    Lhcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+z")]
    PlusZ,
    #[serde(rename = "-z")]
    MinusZ,
}

impl Handedness {
    pub fn sign(self) -> i8 {
        match self {
            Handedness::Rhcp => 1,
            Handedness::Lhcp => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Handedness::Rhcp => Handedness::Lhcp,
            Handedness::Lhcp => Handedness::Rhcp,
        }
    }
}

impl Direction {
    pub fn sign(self) -> i8 {
        match self {
            Direction::PlusZ => 1,
            Direction::MinusZ => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::PlusZ => Direction::MinusZ,
            Direction::MinusZ => Direction::PlusZ,
        }
    }
}

/// One circularly polarized control beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub handedness: Handedness,
    pub direction: Direction,
    /// Field amplitude, arbitrary units, `≥ 0`.
    pub amplitude: f64,
    /// Wavenumber magnitude (rad per unit length), `> 0`.
    pub wavenumber: f64,
    /// Detuning from two-photon resonance, rad/s.
    pub detuning: f64,
}

impl BeamConfig {
    pub fn new(handedness: Handedness, direction: Direction) -> Self {
        BeamConfig {
            handedness,
            direction,
            amplitude: 1.0,
            wavenumber: crate::eit::RB87_D1_WAVENUMBER,
            detuning: 0.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_wavenumber(mut self, k: f64) -> Self {
        self.wavenumber = k;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.amplitude >= 0.0) {
            return Err(crate::Error::invalid("beam amplitude must be >= 0"));
        }
        if !(self.wavenumber > 0.0) {
            return Err(crate::Error::invalid("beam wavenumber must be > 0"));
        }
        Ok(())
    }
}

/// Effective inter-channel coupling produced by a pair of control beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplingKind {
    /// Dissipative beamsplitter: passive exchange, vacuum-preserving.
    #[serde(rename = "DBS")]
    Dbs,
    /// Non-Hermitian parametric amplifier: dissipative two-mode squeezing.
    #[serde(rename = "NHPA")]
    Nhpa,
}

impl std::fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingKind::Dbs => "DBS",
            CouplingKind::Nhpa => "NHPA",
        })
    }
}

/// Real transverse field `(Ex, Ey)` at position `z`, time dependence dropped.
///
/// A beam travelling along `-z` is written with the `+z` wavevector and
/// `z → -z`, which turns `sin kz` into `-sin kz`.
pub fn circular_field(beam: &BeamConfig, z: f64) -> (f64, f64) {
    let phase = beam.wavenumber * z;
    let ex = beam.amplitude * phase.cos();
    let ey = beam.amplitude * phase.sin() * f64::from(effective_chirality(beam));
    (ex, ey)
}

/// Handedness as perceived by atoms referenced to the `+z` axis:
/// `+1` for RHCP-like, `-1` for LHCP-like.
pub fn effective_chirality(beam: &BeamConfig) -> i8 {
    beam.handedness.sign() * beam.direction.sign()
}

/// DBS when the atoms see the same chirality in both channels, NHPA otherwise.
pub fn coupling_kind(beam1: &BeamConfig, beam2: &BeamConfig) -> CouplingKind {
    if effective_chirality(beam1) == effective_chirality(beam2) {
        CouplingKind::Dbs
    } else {
        CouplingKind::Nhpa
    }
}
