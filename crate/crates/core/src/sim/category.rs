//! Data categories, their security requirements, and the protection each
//! one is dispatched to.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataCategory {
    V2xPrivate,
    TrafficControl,
    PublicTraffic,
    PublicInfotainment,
    SubscriptionInfotainment,
    PrivateInfotainment,
}

impl DataCategory {
    pub const ALL: [DataCategory; 6] = [
        DataCategory::V2xPrivate,
        DataCategory::TrafficControl,
        DataCategory::PublicTraffic,
        DataCategory::PublicInfotainment,
        DataCategory::SubscriptionInfotainment,
        DataCategory::PrivateInfotainment,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DataCategory::V2xPrivate => "v2x-private",
            DataCategory::TrafficControl => "traffic-control",
            DataCategory::PublicTraffic => "public-traffic",
            DataCategory::PublicInfotainment => "public-infotainment",
            DataCategory::SubscriptionInfotainment => "subscription-infotainment",
            DataCategory::PrivateInfotainment => "private-infotainment",
        }
    }

    pub fn code(&self) -> u8 {
        *self as u8 + 1
    }

    pub fn from_code(code: u8) -> Option<DataCategory> {
        DataCategory::ALL.get(code.checked_sub(1)? as usize).copied()
    }

    pub fn profile(&self) -> QossProfile {
        use QossLevel::*;
        let (row, cells) = match self {
            DataCategory::V2xPrivate => (
                "V2X private information exchange",
                ["Highly critical", "Highly critical", "Critical", "Critical"],
            ),
            DataCategory::TrafficControl => (
                "Traffic control messages",
                ["Moderate", "Highly critical", "Highly critical", "Highly critical"],
            ),
            DataCategory::PublicTraffic => (
                "Public traffic data",
                ["Not applicable", "Highly critical", "Critical", "Moderate"],
            ),
            DataCategory::PublicInfotainment => (
                "Publicly accessible infotainment data",
                [
                    "Not applicable",
                    "Highly Critical",
                    "Important for user experience",
                    "Important for user experience",
                ],
            ),
            DataCategory::SubscriptionInfotainment => (
                "Subscription-based infotainment data",
                [
                    "Confidential against non-subscriber",
                    "Highly Critical",
                    "Important for user experience",
                    "Important for user experience",
                ],
            ),
            DataCategory::PrivateInfotainment => (
                "Private infotainment data",
                [
                    "Highly Critical",
                    "Highly Critical",
                    "Important for user experience",
                    "Important for user experience",
                ],
            ),
        };
        let level = |text: &str| match text.to_ascii_lowercase().as_str() {
            "not applicable" => NotApplicable,
            "moderate" => Moderate,
            "important for user experience" => Important,
            "critical" => Critical,
            "highly critical" => HighlyCritical,
            "confidential against non-subscriber" => Conditional,
            other => unreachable!("unmapped level {other}"),
        };
        QossProfile {
            row,
            cells,
            confidentiality: level(cells[0]),
            integrity: level(cells[1]),
            long_term_availability: level(cells[2]),
            short_term_availability: level(cells[3]),
        }
    }
}

impl fmt::Display for DataCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown data category {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QossLevel {
    NotApplicable,
    Moderate,
    Important,
    Critical,
    HighlyCritical,
    /// Required only against a class of parties, e.g. non-subscribers.
    Conditional,
}

/// Quality-of-security-service requirements of one data category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QossProfile {
    /// Category label as printed in the requirements table.
    pub row: &'static str,
    /// Cell text in column order: confidentiality, integrity, long-term and
    /// short-term availability.
    pub cells: [&'static str; 4],
    pub confidentiality: QossLevel,
    pub integrity: QossLevel,
    pub long_term_availability: QossLevel,
    pub short_term_availability: QossLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protection {
    /// Plain content checked against a signed directory entry.
    SignedDirectory,
    /// Content sealed under the attribute- and time-bound scheme.
    Envelope,
    /// Point-to-point authenticated channel; never cached.
    AuthenticatedChannel,
}

impl Protection {
    pub fn name(&self) -> &'static str {
        match self {
            Protection::SignedDirectory => "signed-directory",
            Protection::Envelope => "envelope",
            Protection::AuthenticatedChannel => "authenticated-channel",
        }
    }

    /// Whether intermediate nodes may keep a copy.
    pub fn cacheable(&self) -> bool {
        !matches!(self, Protection::AuthenticatedChannel)
    }
}

impl fmt::Display for Protection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn dispatch_protection(cat: DataCategory) -> Protection {
    match cat {
        DataCategory::PublicTraffic | DataCategory::PublicInfotainment => Protection::SignedDirectory,
        DataCategory::SubscriptionInfotainment => Protection::Envelope,
        DataCategory::V2xPrivate | DataCategory::TrafficControl | DataCategory::PrivateInfotainment => {
            Protection::AuthenticatedChannel
        }
    }
}
