//! Human-readable labels for state, input, and output channels.
//!
//! Scenario files reference states by these labels (for sensors and
//! monitors), so the `Display`/`parse` pair is part of the external format:
//! `omega:<gen>`, `pmech:<gen>`, `line:<from>-<to>`, `gas:<from>-<to>:<1..4>`,
//! `water:<from>-<to>`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which infrastructure a channel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Infrastructure {
    Power,
    Gas,
    Water,
}

impl fmt::Display for Infrastructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infrastructure::Power => write!(f, "power"),
            Infrastructure::Gas => write!(f, "gas"),
            Infrastructure::Water => write!(f, "water"),
        }
    }
}

/// One row of the state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateLabel {
    /// Generator speed deviation omega_i.
    GeneratorSpeed { gen: String },
    /// Mechanical input power P_m_i.
    GeneratorMechPower { gen: String },
    /// Line power flow P_ij.
    LineFlow { from: String, to: String },
    /// One of the four gas pipeline states (component 1..=4).
    GasPipeline { from: String, to: String, comp: u8 },
    /// Water pipeline friction state r_ij.
    WaterFriction { from: String, to: String },
}

impl StateLabel {
    pub fn infrastructure(&self) -> Infrastructure {
        match self {
            StateLabel::GeneratorSpeed { .. }
            | StateLabel::GeneratorMechPower { .. }
            | StateLabel::LineFlow { .. } => Infrastructure::Power,
            StateLabel::GasPipeline { .. } => Infrastructure::Gas,
            StateLabel::WaterFriction { .. } => Infrastructure::Water,
        }
    }

    /// Parse the textual form used by scenario files.
    pub fn parse(s: &str) -> Option<StateLabel> {
        let mut parts = s.split(':');
        let kind = parts.next()?;
        match kind {
            "omega" => Some(StateLabel::GeneratorSpeed { gen: parts.next()?.to_string() }),
            "pmech" => Some(StateLabel::GeneratorMechPower { gen: parts.next()?.to_string() }),
            "line" => {
                let (from, to) = split_edge(parts.next()?)?;
                Some(StateLabel::LineFlow { from, to })
            }
            "gas" => {
                let (from, to) = split_edge(parts.next()?)?;
                let comp: u8 = parts.next()?.parse().ok()?;
                if !(1..=4).contains(&comp) {
                    return None;
                }
                Some(StateLabel::GasPipeline { from, to, comp })
            }
            "water" => {
                let (from, to) = split_edge(parts.next()?)?;
                Some(StateLabel::WaterFriction { from, to })
            }
            _ => None,
        }
    }
}

fn split_edge(s: &str) -> Option<(String, String)> {
    let (a, b) = s.split_once('-')?;
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some((a.to_string(), b.to_string()))
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::GeneratorSpeed { gen } => write!(f, "omega:{gen}"),
            StateLabel::GeneratorMechPower { gen } => write!(f, "pmech:{gen}"),
            StateLabel::LineFlow { from, to } => write!(f, "line:{from}-{to}"),
            StateLabel::GasPipeline { from, to, comp } => write!(f, "gas:{from}-{to}:{comp}"),
            StateLabel::WaterFriction { from, to } => write!(f, "water:{from}-{to}"),
        }
    }
}

/// One column of the input matrix B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputLabel {
    /// Electric power demand P_e_i at a generator bus.
    PowerDemand { gen: String },
    /// Gas junction setpoint pressure g^def.
    GasSetpoint { junction: String },
    /// Gas junction flow demand.
    GasDemand { junction: String },
    /// Water junction setpoint pressure w^def.
    WaterSetpoint { junction: String },
    /// Water junction flow demand.
    WaterDemand { junction: String },
}

impl fmt::Display for InputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputLabel::PowerDemand { gen } => write!(f, "pdemand:{gen}"),
            InputLabel::GasSetpoint { junction } => write!(f, "gset:{junction}"),
            InputLabel::GasDemand { junction } => write!(f, "gdemand:{junction}"),
            InputLabel::WaterSetpoint { junction } => write!(f, "wset:{junction}"),
            InputLabel::WaterDemand { junction } => write!(f, "wdemand:{junction}"),
        }
    }
}

impl InputLabel {
    /// Parse the textual form used by scenario demand overrides.
    pub fn parse(s: &str) -> Option<InputLabel> {
        let (kind, id) = s.split_once(':')?;
        let id = id.to_string();
        match kind {
            "pdemand" => Some(InputLabel::PowerDemand { gen: id }),
            "gset" => Some(InputLabel::GasSetpoint { junction: id }),
            "gdemand" => Some(InputLabel::GasDemand { junction: id }),
            "wset" => Some(InputLabel::WaterSetpoint { junction: id }),
            "wdemand" => Some(InputLabel::WaterDemand { junction: id }),
            _ => None,
        }
    }
}

/// One row of a partial model's coupling output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputLabel {
    /// Gas flow demanded by a gas-fed generator (y^eg).
    GasFuelDemand { gen: String },
    /// Water flow demanded by a water-fed generator (y^ew).
    WaterFuelDemand { gen: String },
    /// Electric power demanded by a junction compressor (y^ge).
    CompressorPower { junction: String },
    /// Electric power demanded by a junction pump (y^we).
    PumpPower { junction: String },
}

impl fmt::Display for OutputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputLabel::GasFuelDemand { gen } => write!(f, "yeg:{gen}"),
            OutputLabel::WaterFuelDemand { gen } => write!(f, "yew:{gen}"),
            OutputLabel::CompressorPower { junction } => write!(f, "yge:{junction}"),
            OutputLabel::PumpPower { junction } => write!(f, "ywe:{junction}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_labels_round_trip() {
        let labels = [
            StateLabel::GeneratorSpeed { gen: "g1".into() },
            StateLabel::GeneratorMechPower { gen: "g10".into() },
            StateLabel::LineFlow { from: "g1".into(), to: "g2".into() },
            StateLabel::GasPipeline { from: "j1".into(), to: "j2".into(), comp: 3 },
            StateLabel::WaterFriction { from: "w4".into(), to: "w5".into() },
        ];
        for l in labels {
            assert_eq!(StateLabel::parse(&l.to_string()).unwrap(), l);
        }
    }

    #[test]
    fn rejects_malformed_labels() {
        assert!(StateLabel::parse("omega").is_none());
        assert!(StateLabel::parse("gas:j1-j2:5").is_none());
        assert!(StateLabel::parse("line:g1").is_none());
        assert!(StateLabel::parse("volt:g1").is_none());
    }
}
