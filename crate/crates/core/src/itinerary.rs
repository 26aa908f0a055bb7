//! Elements of the sequence space used to label inverse branches: finite
//! integer words (prepoles), eventually periodic infinite words (periodic
//! and preperiodic Julia points), and the lone infinity symbol.
//!
//! Text form: comma-separated integers with `|` separating the preperiod
//! from the period, e.g. `1,2|0` for preperiod (1,2) and period (0);
//! a word without `|` is finite; the literal `∞` (or `inf`) is the
//! infinity symbol.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Itinerary {
    pub preperiod: Vec<i64>,
    pub period: Vec<i64>,
    pub is_infinity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItineraryKind {
    /// Finite word: names a prepole of order `len`.
    Finite,
    /// Purely periodic word: names a repelling periodic point.
    Periodic,
    /// Preperiod then period: names an eventually periodic point.
    Preperiodic,
    /// The symbol for the essential singularity.
    Infinity,
}

impl Itinerary {
    pub fn finite(word: impl Into<Vec<i64>>) -> Self {
        Itinerary {
            preperiod: word.into(),
            period: Vec::new(),
            is_infinity: false,
        }
    }

    pub fn periodic(word: impl Into<Vec<i64>>) -> Self {
        Itinerary {
            preperiod: Vec::new(),
            period: word.into(),
            is_infinity: false,
        }
    }

    pub fn preperiodic(pre: impl Into<Vec<i64>>, per: impl Into<Vec<i64>>) -> Self {
        Itinerary {
            preperiod: pre.into(),
            period: per.into(),
            is_infinity: false,
        }
    }

    pub fn infinity() -> Self {
        Itinerary {
            preperiod: Vec::new(),
            period: Vec::new(),
            is_infinity: true,
        }
    }

    pub fn kind(&self) -> ItineraryKind {
        if self.is_infinity {
            ItineraryKind::Infinity
        } else if self.period.is_empty() {
            ItineraryKind::Finite
        } else if self.preperiod.is_empty() {
            ItineraryKind::Periodic
        } else {
            ItineraryKind::Preperiodic
        }
    }

    pub fn is_valid(&self) -> bool {
        if self.is_infinity {
            self.preperiod.is_empty() && self.period.is_empty()
        } else {
            !self.preperiod.is_empty() || !self.period.is_empty()
        }
    }

    /// First `n` symbols of the (possibly unrolled) word.
    pub fn prefix(&self, n: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            if i < self.preperiod.len() {
                out.push(self.preperiod[i]);
            } else if !self.period.is_empty() {
                out.push(self.period[(i - self.preperiod.len()) % self.period.len()]);
            } else {
                break;
            }
        }
        out
    }

    /// The shift: drops the leading symbol. The shift of a length-one
    /// finite word is the infinity symbol.
    pub fn shift(&self) -> Itinerary {
        if self.is_infinity {
            return Itinerary::infinity();
        }
        if !self.preperiod.is_empty() {
            let rest = self.preperiod[1..].to_vec();
            if rest.is_empty() && self.period.is_empty() {
                return Itinerary::infinity();
            }
            return Itinerary {
                preperiod: rest,
                period: self.period.clone(),
                is_infinity: false,
            };
        }
        if self.period.is_empty() {
            return Itinerary::infinity();
        }
        // Purely periodic: rotate the period word.
        let mut rotated = self.period[1..].to_vec();
        rotated.push(self.period[0]);
        Itinerary::periodic(rotated)
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity {
            return write!(f, "∞");
        }
        let join = |w: &[i64]| {
            w.iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        if self.period.is_empty() {
            write!(f, "{}", join(&self.preperiod))
        } else {
            write!(f, "{}|{}", join(&self.preperiod), join(&self.period))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseItineraryError(pub String);

impl fmt::Display for ParseItineraryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid itinerary: {}", self.0)
    }
}

impl std::error::Error for ParseItineraryError {}

fn parse_word(text: &str) -> Result<Vec<i64>, ParseItineraryError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<i64>()
                .map_err(|_| ParseItineraryError(format!("bad symbol `{tok}`")))
        })
        .collect()
}

impl FromStr for Itinerary {
    type Err = ParseItineraryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "∞" || s.eq_ignore_ascii_case("inf") {
            return Ok(Itinerary::infinity());
        }
        let parts: Vec<&str> = s.split('|').collect();
        let it = match parts.as_slice() {
            [word] => Itinerary::finite(parse_word(word)?),
            [pre, per] => {
                let period = parse_word(per)?;
                if period.is_empty() {
                    return Err(ParseItineraryError(format!("empty period in `{s}`")));
                }
                Itinerary {
                    preperiod: parse_word(pre)?,
                    period,
                    is_infinity: false,
                }
            }
            _ => return Err(ParseItineraryError(format!("too many `|` in `{s}`"))),
        };
        if !it.is_valid() {
            return Err(ParseItineraryError(format!("empty word `{s}`")));
        }
        Ok(it)
    }
}
