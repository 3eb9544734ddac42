//! Link budget and MODCOD selection: SNR from a free-space budget, then the
//! highest modulation and coding scheme feasible at that SNR sets the edge
//! data rate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Boltzmann constant in dBW/K/Hz.
pub const BOLTZMANN_DBW: f64 = -228.6;

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("free-space path loss requires positive distance and frequency, got d={distance_km} km f={frequency_ghz} GHz")]
    NonPositiveInput {
        distance_km: f64,
        frequency_ghz: f64,
    },
    #[error("MODCOD table is empty")]
    EmptyTable,
    #[error("MODCOD table invalid: {0}")]
    InvalidTable(String),
}

/// Inputs to the Es/N0 link budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudgetParams {
    pub tx_power_dbw: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub frequency_ghz: f64,
    pub symbol_rate_baud: f64,
    pub noise_temperature_k: f64,
    /// Implementation margin and miscellaneous losses, dB.
    #[serde(default)]
    pub losses_misc_db: f64,
}

impl LinkBudgetParams {
    pub fn validate(&self) -> Result<(), LinkError> {
        if !(self.symbol_rate_baud > 0.0) {
            return Err(LinkError::InvalidTable(
                "symbol_rate_baud must be > 0".into(),
            ));
        }
        if !(self.noise_temperature_k > 0.0) {
            return Err(LinkError::InvalidTable(
                "noise_temperature_k must be > 0".into(),
            ));
        }
        if !(self.frequency_ghz > 0.0) {
            return Err(LinkError::InvalidTable("frequency_ghz must be > 0".into()));
        }
        Ok(())
    }
}

/// One modulation-and-coding operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModcodRow {
    pub name: String,
    /// Bits per symbol.
    pub spectral_efficiency: f64,
    /// Minimum Es/N0 at which this row is usable, dB.
    pub required_snr_db: f64,
}

/// Ordered MODCOD table, ascending in both required SNR and efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModcodRow>", into = "Vec<ModcodRow>")]
pub struct ModcodTable {
    rows: Vec<ModcodRow>,
}

impl TryFrom<Vec<ModcodRow>> for ModcodTable {
    type Error = LinkError;
    fn try_from(rows: Vec<ModcodRow>) -> Result<Self, LinkError> {
        ModcodTable::new(rows)
    }
}

impl From<ModcodTable> for Vec<ModcodRow> {
    fn from(t: ModcodTable) -> Vec<ModcodRow> {
        t.rows
    }
}

impl ModcodTable {
    pub fn new(rows: Vec<ModcodRow>) -> Result<Self, LinkError> {
        if rows.is_empty() {
            return Err(LinkError::EmptyTable);
        }
        for row in &rows {
            if !(row.spectral_efficiency > 0.0) {
                return Err(LinkError::InvalidTable(format!(
                    "row {} has non-positive spectral efficiency",
                    row.name
                )));
            }
        }
        for pair in rows.windows(2) {
            if pair[1].required_snr_db <= pair[0].required_snr_db {
                return Err(LinkError::InvalidTable(format!(
                    "required_snr_db not strictly increasing at row {}",
                    pair[1].name
                )));
            }
            if pair[1].spectral_efficiency <= pair[0].spectral_efficiency {
                return Err(LinkError::InvalidTable(format!(
                    "spectral_efficiency not strictly increasing at row {}",
                    pair[1].name
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[ModcodRow] {
        &self.rows
    }

    /// Row with the largest required SNR not exceeding `snr_db` (inclusive
    /// threshold), or `None` when the link is infeasible.
    pub fn select(&self, snr_db: f64) -> Option<&ModcodRow> {
        self.rows
            .iter()
            .rev()
            .find(|row| row.required_snr_db <= snr_db)
    }
}

/// Free-space path loss 92.45 + 20 log10(d_km) + 20 log10(f_GHz), dB.
pub fn free_space_path_loss(distance_km: f64, frequency_ghz: f64) -> Result<f64, LinkError> {
    if !(distance_km > 0.0) || !(frequency_ghz > 0.0) {
        return Err(LinkError::NonPositiveInput {
            distance_km,
            frequency_ghz,
        });
    }
    Ok(92.45 + 20.0 * distance_km.log10() + 20.0 * frequency_ghz.log10())
}

/// Es/N0 in dB over a link of the given length. Noise bandwidth equals the
/// symbol rate.
pub fn link_snr(params: &LinkBudgetParams, distance_km: f64) -> Result<f64, LinkError> {
    let fspl = free_space_path_loss(distance_km, params.frequency_ghz)?;
    let noise_dbw = BOLTZMANN_DBW
        + 10.0 * params.noise_temperature_k.log10()
        + 10.0 * params.symbol_rate_baud.log10();
    Ok(
        params.tx_power_dbw + params.tx_gain_dbi + params.rx_gain_dbi
            - fspl
            - params.losses_misc_db
            - noise_dbw,
    )
}

/// Edge rate in bit/s for a MODCOD row at the given symbol rate.
pub fn edge_data_rate(row: &ModcodRow, symbol_rate_baud: f64) -> f64 {
    row.spectral_efficiency * symbol_rate_baud
}

/// Rate of the best feasible MODCOD at the given distance, or `None` when no
/// row is feasible.
pub fn feasible_rate(
    params: &LinkBudgetParams,
    table: &ModcodTable,
    distance_km: f64,
) -> Option<f64> {
    let snr = link_snr(params, distance_km).ok()?;
    table
        .select(snr)
        .map(|row| edge_data_rate(row, params.symbol_rate_baud))
}

/// Default 8-row table spanning QPSK-1/4 through 32APSK operating points.
pub fn default_modcod_table() -> ModcodTable {
    let rows = [
        ("QPSK-1/4", 0.49, -2.35),
        ("QPSK-1/2", 0.989, 1.0),
        ("QPSK-3/4", 1.487, 4.03),
        ("8PSK-2/3", 1.98, 6.62),
        ("8PSK-5/6", 2.479, 9.35),
        ("16APSK-3/4", 2.967, 10.21),
        ("16APSK-8/9", 3.523, 12.89),
        ("32APSK-3/4", 4.45, 13.05),
    ]
    .into_iter()
    .map(|(name, eff, snr)| ModcodRow {
        name: name.to_string(),
        spectral_efficiency: eff,
        required_snr_db: snr,
    })
    .collect();
    ModcodTable::new(rows).expect("default table is valid")
}
