use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Actor class. The derived ordering is the fixed class order used for
/// probability columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Gambling,
    Random,
    Ransom,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Gambling, Class::Random, Class::Ransom];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Gambling => "gambling",
            Class::Random => "random",
            Class::Ransom => "ransom",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gambling" => Ok(Class::Gambling),
            "random" => Ok(Class::Random),
            "ransom" | "ransomware" => Ok(Class::Ransom),
            other => Err(Error::InvalidArgument(format!("unknown class {other:?}"))),
        }
    }
}
