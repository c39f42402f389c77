use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The nine complex modular observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ObservableId {
    A,
    B,
    C,
    LowerA,
    LowerB,
    LowerC,
    Alpha,
    Beta,
    Gamma,
}

impl ObservableId {
    pub const ALL: [ObservableId; 9] = [
        ObservableId::A,
        ObservableId::B,
        ObservableId::C,
        ObservableId::LowerA,
        ObservableId::LowerB,
        ObservableId::LowerC,
        ObservableId::Alpha,
        ObservableId::Beta,
        ObservableId::Gamma,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ObservableId::A => "A",
            ObservableId::B => "B",
            ObservableId::C => "C",
            ObservableId::LowerA => "a",
            ObservableId::LowerB => "b",
            ObservableId::LowerC => "c",
            ObservableId::Alpha => "α",
            ObservableId::Beta => "β",
            ObservableId::Gamma => "γ",
        }
    }
}

impl fmt::Display for ObservableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObservableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let id = match s {
            "A" => ObservableId::A,
            "B" => ObservableId::B,
            "C" => ObservableId::C,
            "a" => ObservableId::LowerA,
            "b" => ObservableId::LowerB,
            "c" => ObservableId::LowerC,
            "α" | "alpha" => ObservableId::Alpha,
            "β" | "beta" => ObservableId::Beta,
            "γ" | "gamma" => ObservableId::Gamma,
            other => return Err(Error::UnknownObservable(other.to_string())),
        };
        Ok(id)
    }
}

impl From<ObservableId> for String {
    fn from(id: ObservableId) -> String {
        id.name().to_string()
    }
}

impl TryFrom<String> for ObservableId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

/// Real or imaginary part of a complex observable, e.g. `C′` or `C″`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RealObservable {
    pub parent: ObservableId,
    pub imaginary: bool,
}

impl RealObservable {
    pub fn pair(parent: ObservableId) -> [RealObservable; 2] {
        [
            RealObservable { parent, imaginary: false },
            RealObservable { parent, imaginary: true },
        ]
    }

    pub fn label(&self) -> String {
        let primes = if self.imaginary { "''" } else { "'" };
        format!("{}{}", self.parent.name(), primes)
    }
}

/// The six measurement contexts, each a triple of mutually commuting
/// complex observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ContextId {
    ABC,
    LowerAbc,
    AlphaBetaGamma,
    AaAlpha,
    BbBeta,
    CcGamma,
}

impl ContextId {
    pub const ALL: [ContextId; 6] = [
        ContextId::ABC,
        ContextId::LowerAbc,
        ContextId::AlphaBetaGamma,
        ContextId::AaAlpha,
        ContextId::BbBeta,
        ContextId::CcGamma,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn members(self) -> [ObservableId; 3] {
        use ObservableId::*;
        match self {
            ContextId::ABC => [A, B, C],
            ContextId::LowerAbc => [LowerA, LowerB, LowerC],
            ContextId::AlphaBetaGamma => [Alpha, Beta, Gamma],
            ContextId::AaAlpha => [A, LowerA, Alpha],
            ContextId::BbBeta => [B, LowerB, Beta],
            ContextId::CcGamma => [C, LowerC, Gamma],
        }
    }

    /// Sign of the context in the S statistic, and of its operator product.
    pub fn sign(self) -> i8 {
        match self {
            ContextId::CcGamma => -1,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ContextId::ABC => "ABC",
            ContextId::LowerAbc => "abc",
            ContextId::AlphaBetaGamma => "αβγ",
            ContextId::AaAlpha => "Aaα",
            ContextId::BbBeta => "Bbβ",
            ContextId::CcGamma => "Ccγ",
        }
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ContextId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let ctx = match s {
            "ABC" => ContextId::ABC,
            "abc" => ContextId::LowerAbc,
            "αβγ" | "alpha-beta-gamma" => ContextId::AlphaBetaGamma,
            "Aaα" | "Aa-alpha" => ContextId::AaAlpha,
            "Bbβ" | "Bb-beta" => ContextId::BbBeta,
            "Ccγ" | "Cc-gamma" => ContextId::CcGamma,
            other => return Err(Error::UnknownContext(other.to_string())),
        };
        Ok(ctx)
    }
}

impl From<ContextId> for String {
    fn from(id: ContextId) -> String {
        id.name().to_string()
    }
}

impl TryFrom<String> for ContextId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in ObservableId::ALL {
            assert_eq!(id.name().parse::<ObservableId>().unwrap(), id);
        }
        for ctx in ContextId::ALL {
            assert_eq!(ctx.name().parse::<ContextId>().unwrap(), ctx);
        }
        assert!("delta".parse::<ObservableId>().is_err());
    }

    #[test]
    fn every_observable_in_two_contexts() {
        for id in ObservableId::ALL {
            let n = ContextId::ALL.iter().filter(|c| c.members().contains(&id)).count();
            assert_eq!(n, 2, "{id}");
        }
    }

    #[test]
    fn one_negative_context() {
        let negatives: Vec<_> = ContextId::ALL.iter().filter(|c| c.sign() < 0).collect();
        assert_eq!(negatives, vec![&ContextId::CcGamma]);
    }
}
