//! Identifiers shared across the pipeline stages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Fingertip sensor identity; one unit is mounted on each gripper finger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SensorUnit {
    A,
    B,
}

impl SensorUnit {
    pub fn letter(self) -> char {
        match self {
            SensorUnit::A => 'A',
            SensorUnit::B => 'B',
        }
    }
}

impl fmt::Display for SensorUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Material classes the pipeline sorts objects into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Plastic,
    Cardboard,
    Glass,
    Metal,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 4] = [
        ObjectClass::Cardboard,
        ObjectClass::Plastic,
        ObjectClass::Metal,
        ObjectClass::Glass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Plastic => "plastic",
            ObjectClass::Cardboard => "cardboard",
            ObjectClass::Glass => "glass",
            ObjectClass::Metal => "metal",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plastic" => Ok(ObjectClass::Plastic),
            "cardboard" => Ok(ObjectClass::Cardboard),
            "glass" => Ok(ObjectClass::Glass),
            "metal" => Ok(ObjectClass::Metal),
            other => Err(format!("unknown object class `{other}`")),
        }
    }
}
