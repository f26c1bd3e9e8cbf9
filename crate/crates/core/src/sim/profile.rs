//! Tapped-delay-line power delay profiles.
//!
//! The built-in ETU, EVA and PedA tables live in `profiles/*.profile` and are
//! compiled in; the same plain-text format loads custom profiles:
//!
//! ```text
//! # comment
//! name = ETU
//! tap = 0, -1.0        # delay in ns, mean power in dB
//! tap = 50, -1.0
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::SimError;

const ETU_TABLE: &str = include_str!("../../profiles/etu.profile");
const EVA_TABLE: &str = include_str!("../../profiles/eva.profile");
const PEDA_TABLE: &str = include_str!("../../profiles/peda.profile");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProfileName {
    Etu,
    Eva,
    PedA,
    Custom(String),
}

impl ProfileName {
    pub const BUILTIN: [ProfileName; 3] = [ProfileName::Etu, ProfileName::Eva, ProfileName::PedA];

    pub fn as_str(&self) -> &str {
        match self {
            ProfileName::Etu => "ETU",
            ProfileName::Eva => "EVA",
            ProfileName::PedA => "PedA",
            ProfileName::Custom(name) => name,
        }
    }

    fn from_label(label: &str) -> Self {
        match label.to_ascii_lowercase().as_str() {
            "etu" => ProfileName::Etu,
            "eva" => ProfileName::Eva,
            "peda" => ProfileName::PedA,
            _ => ProfileName::Custom(label.to_string()),
        }
    }
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Excess delay in seconds.
    pub delay: f64,
    /// Mean power in dB.
    pub power_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    name: ProfileName,
    taps: Vec<Tap>,
}

impl TapProfile {
    pub fn new(name: ProfileName, taps: Vec<Tap>) -> Result<Self, SimError> {
        let Some(first) = taps.first() else {
            return Err(SimError::InvalidProfile("profile has no taps".into()));
        };
        if first.delay != 0.0 {
            return Err(SimError::InvalidProfile(format!(
                "first tap delay must be 0, got {} s",
                first.delay
            )));
        }
        for (i, tap) in taps.iter().enumerate() {
            if !tap.delay.is_finite() || !tap.power_db.is_finite() {
                return Err(SimError::InvalidProfile(format!("tap {i} is not finite")));
            }
        }
        if let Some(i) = taps.windows(2).position(|w| w[1].delay < w[0].delay) {
            return Err(SimError::InvalidProfile(format!(
                "tap delays must be non-decreasing (tap {} < tap {})",
                i + 1,
                i
            )));
        }
        let total: f64 = taps.iter().map(|t| db_to_linear(t.power_db)).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(SimError::InvalidProfile(
                "total tap power is not finite and positive".into(),
            ));
        }
        Ok(Self { name, taps })
    }

    pub fn builtin(name: &ProfileName) -> Option<Self> {
        let table = match name {
            ProfileName::Etu => ETU_TABLE,
            ProfileName::Eva => EVA_TABLE,
            ProfileName::PedA => PEDA_TABLE,
            ProfileName::Custom(_) => return None,
        };
        Some(table.parse().expect("built-in profile tables are valid"))
    }

    pub fn etu() -> Self {
        Self::builtin(&ProfileName::Etu).unwrap()
    }

    pub fn eva() -> Self {
        Self::builtin(&ProfileName::Eva).unwrap()
    }

    pub fn ped_a() -> Self {
        Self::builtin(&ProfileName::PedA).unwrap()
    }

    /// Looks up a built-in profile by case-insensitive name.
    pub fn by_name(name: &str) -> Option<Self> {
        match ProfileName::from_label(name) {
            ProfileName::Custom(_) => None,
            builtin => Self::builtin(&builtin),
        }
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    pub fn name(&self) -> &ProfileName {
        &self.name
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Linear tap powers scaled to sum to one.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let linear: Vec<f64> = self.taps.iter().map(|t| db_to_linear(t.power_db)).collect();
        let total: f64 = linear.iter().sum();
        linear.into_iter().map(|p| p / total).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("name = {}\n", self.name);
        for tap in &self.taps {
            out.push_str(&format!("tap = {}, {}\n", tap.delay * 1e9, tap.power_db));
        }
        out
    }
}

impl FromStr for TapProfile {
    type Err = SimError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut name = None;
        let mut taps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| SimError::InvalidProfile(format!("line {}: {what}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            match key.trim() {
                "name" => name = Some(ProfileName::from_label(value.trim())),
                "tap" => {
                    let (delay, power) = value
                        .split_once(',')
                        .ok_or_else(|| bad("expected `tap = delay_ns, power_dB`"))?;
                    let delay_ns: f64 = delay.trim().parse().map_err(|_| bad("bad delay"))?;
                    let power_db: f64 = power.trim().parse().map_err(|_| bad("bad power"))?;
                    taps.push(Tap {
                        delay: delay_ns * 1e-9,
                        power_db,
                    });
                }
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let name = name.ok_or_else(|| SimError::InvalidProfile("missing `name`".into()))?;
        TapProfile::new(name, taps)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
