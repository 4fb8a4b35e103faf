//! Strategy identifiers for the data-selection grid.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid_input, Error, Result};

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $ident:literal, $code:literal;)+ }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant,)+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant,)+];

            /// Canonical upper-case identifier.
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $ident,)+
                }
            }

            /// One-letter code used in the summary table.
            pub fn code(self) -> &'static str {
                match self {
                    $($name::$variant => $code,)+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($ident => Ok($name::$variant),)+
                    other => Err(invalid_input(format!(
                        concat!("unknown ", stringify!($name), " `{}`"),
                        other
                    ))),
                }
            }
        }
    };
}

named_enum! {
    /// Which arriving samples enter the basket.
    InclusionRule {
        AddAll => "ADD_ALL", "a";
        OnlyMisclassified => "ONLY_MISCLASSIFIED", "m";
        OnlyWithinMargin => "ONLY_WITHIN_MARGIN", "w";
    }
}

named_enum! {
    /// Which stored sample leaves a full basket.
    ExclusionRule {
        RemoveOldest => "REMOVE_OLDEST", "o";
        RemoveFarthest => "REMOVE_FARTHEST", "f";
        RemoveNonBorder => "REMOVE_NON_BORDER", "n";
    }
}

named_enum! {
    /// Class restriction applied before the exclusion rule.
    BalanceRule {
        DontHandle => "DONT_HANDLE_RATIO", "n";
        KeepRatio => "KEEP_RATIO_AS_IT_IS", "k";
        BalancedRatio => "BALANCED_RATIO", "b";
    }
}

/// One cell of the strategy grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StrategyConfig {
    pub include: InclusionRule,
    pub exclude: ExclusionRule,
    pub balance: BalanceRule,
    pub keep_only_sv: bool,
    pub relabel: bool,
    pub capacity: usize,
}

impl StrategyConfig {
    pub fn new(
        include: InclusionRule,
        exclude: ExclusionRule,
        balance: BalanceRule,
        keep_only_sv: bool,
        relabel: bool,
        capacity: usize,
    ) -> Result<Self> {
        let cfg = Self {
            include,
            exclude,
            balance,
            keep_only_sv,
            relabel,
            capacity,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.capacity < 2 {
            return Err(invalid_input(format!(
                "basket capacity must be at least 2, got {}",
                self.capacity
            )));
        }
        Ok(())
    }

    /// Sliding window: add everything, drop the oldest, no extras.
    pub fn sliding_window(capacity: usize) -> Self {
        Self {
            include: InclusionRule::AddAll,
            exclude: ExclusionRule::RemoveOldest,
            balance: BalanceRule::DontHandle,
            keep_only_sv: false,
            relabel: false,
            capacity,
        }
    }
}

pub(crate) fn bool_code(v: bool) -> &'static str {
    if v {
        "t"
    } else {
        "f"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_round_trip() {
        for r in InclusionRule::ALL {
            assert_eq!(r.as_str().parse::<InclusionRule>().unwrap(), *r);
        }
        for r in ExclusionRule::ALL {
            assert_eq!(r.as_str().parse::<ExclusionRule>().unwrap(), *r);
        }
        for r in BalanceRule::ALL {
            assert_eq!(r.as_str().parse::<BalanceRule>().unwrap(), *r);
        }
        assert_eq!(BalanceRule::KeepRatio.as_str(), "KEEP_RATIO_AS_IT_IS");
        assert_eq!(BalanceRule::DontHandle.as_str(), "DONT_HANDLE_RATIO");
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        assert!("REMOVE_NONEXISTENT".parse::<ExclusionRule>().is_err());
    }

    #[test]
    fn capacity_must_allow_two_entries() {
        assert!(StrategyConfig::new(
            InclusionRule::AddAll,
            ExclusionRule::RemoveOldest,
            BalanceRule::DontHandle,
            false,
            false,
            1
        )
        .is_err());
    }
}
