use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CountRecord;
use crate::error::{Error, Result};
use crate::polarization::{AnalyzerSetting, ArmSetting};

/// Column order of count-record CSVs. Angles are in degrees; an empty
/// polarizer cell means that arm has no analyzer, an empty plate cell means
/// the plate is out of the beam.
pub const COUNT_COLUMNS: [&str; 16] = [
    "signal_qwp_deg",
    "signal_hwp_deg",
    "signal_polarizer_deg",
    "idler_qwp_deg",
    "idler_hwp_deg",
    "idler_polarizer_deg",
    "pump_power_mw",
    "integration_time_s",
    "singles_signal_hz",
    "singles_idler_hz",
    "coincidences_hz",
    "accidentals_hz",
    "raw_singles_signal",
    "raw_singles_idler",
    "raw_coincidences",
    "raw_accidentals",
];

#[derive(Serialize, Deserialize)]
struct Row {
    signal_qwp_deg: Option<f64>,
    signal_hwp_deg: Option<f64>,
    signal_polarizer_deg: Option<f64>,
    idler_qwp_deg: Option<f64>,
    idler_hwp_deg: Option<f64>,
    idler_polarizer_deg: Option<f64>,
    pump_power_mw: f64,
    integration_time_s: f64,
    singles_signal_hz: f64,
    singles_idler_hz: f64,
    coincidences_hz: f64,
    accidentals_hz: f64,
    raw_singles_signal: u64,
    raw_singles_idler: u64,
    raw_coincidences: u64,
    raw_accidentals: u64,
}

type ArmDegrees = (Option<f64>, Option<f64>, Option<f64>);

fn arm_to_deg(arm: Option<ArmSetting>) -> ArmDegrees {
    match arm {
        Some(a) => (a.qwp.map(f64::to_degrees), a.hwp.map(f64::to_degrees), Some(a.polarizer.to_degrees())),
        None => (None, None, None),
    }
}

fn arm_from_deg((qwp, hwp, pol): ArmDegrees, row: usize) -> Result<Option<ArmSetting>> {
    match pol {
        Some(p) => Ok(Some(ArmSetting::new(qwp.map(f64::to_radians), hwp.map(f64::to_radians), p.to_radians()))),
        None if qwp.is_none() && hwp.is_none() => Ok(None),
        None => Err(Error::parse(
            format!("count record row {row}"),
            "waveplate angle given without a polarizer angle",
        )),
    }
}

impl From<&CountRecord> for Row {
    fn from(r: &CountRecord) -> Self {
        let (signal_qwp_deg, signal_hwp_deg, signal_polarizer_deg) = arm_to_deg(r.setting.signal);
        let (idler_qwp_deg, idler_hwp_deg, idler_polarizer_deg) = arm_to_deg(r.setting.idler);
        Row {
            signal_qwp_deg,
            signal_hwp_deg,
            signal_polarizer_deg,
            idler_qwp_deg,
            idler_hwp_deg,
            idler_polarizer_deg,
            pump_power_mw: r.pump_power_mw,
            integration_time_s: r.integration_time_s,
            singles_signal_hz: r.singles_signal_hz,
            singles_idler_hz: r.singles_idler_hz,
            coincidences_hz: r.coincidences_hz,
            accidentals_hz: r.accidentals_hz,
            raw_singles_signal: r.raw_singles_signal,
            raw_singles_idler: r.raw_singles_idler,
            raw_coincidences: r.raw_coincidences,
            raw_accidentals: r.raw_accidentals,
        }
    }
}

pub fn write_count_records(path: &Path, records: &[CountRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if records.is_empty() {
        w.write_record(COUNT_COLUMNS)?;
    }
    for r in records {
        w.serialize(Row::from(r))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_count_records(path: &Path) -> Result<Vec<CountRecord>> {
    if !path.exists() {
        return Err(Error::MissingDependency {
            path: path.to_path_buf(),
            hint: "count records are written by `epsim simulate`".into(),
        });
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(COUNT_COLUMNS) {
        return Err(Error::parse(
            path.display().to_string(),
            format!("expected columns {}", COUNT_COLUMNS.join(",")),
        ));
    }
    rdr.deserialize::<Row>()
        .enumerate()
        .map(|(k, row)| {
            let row = row?;
            let setting = AnalyzerSetting {
                signal: arm_from_deg((row.signal_qwp_deg, row.signal_hwp_deg, row.signal_polarizer_deg), k + 1)?,
                idler: arm_from_deg((row.idler_qwp_deg, row.idler_hwp_deg, row.idler_polarizer_deg), k + 1)?,
            };
            Ok(CountRecord {
                setting,
                pump_power_mw: row.pump_power_mw,
                integration_time_s: row.integration_time_s,
                singles_signal_hz: row.singles_signal_hz,
                singles_idler_hz: row.singles_idler_hz,
                coincidences_hz: row.coincidences_hz,
                accidentals_hz: row.accidentals_hz,
                raw_singles_signal: row.raw_singles_signal,
                raw_singles_idler: row.raw_singles_idler,
                raw_coincidences: row.raw_coincidences,
                raw_accidentals: row.raw_accidentals,
            })
        })
        .collect()
}
