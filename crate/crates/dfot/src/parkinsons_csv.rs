//! Reader for the UCI telemonitoring CSV layout.

use std::path::Path;

use dfot_core::experiments::Record;

use crate::AppError;

const SUBJECT: &str = "subject#";
const AGE: &str = "age";
const TEST_TIME: &str = "test_time";
const MOTOR: &str = "motor_UPDRS";
const TOTAL: &str = "total_UPDRS";
const PPE: &str = "PPE";

/// Parses records, locating the needed columns by header name.
pub fn parse_records<R: std::io::Read>(reader: R) -> Result<Vec<Record>, AppError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| AppError::input(format!("unreadable CSV header: {e}")))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AppError::input(format!("missing column `{name}`")))
    };
    let idx = [col(SUBJECT)?, col(AGE)?, col(TEST_TIME)?, col(MOTOR)?, col(TOTAL)?, col(PPE)?];
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AppError::input(format!("CSV row {}: {e}", line + 2)))?;
        let field = |k: usize| -> Result<f64, AppError> {
            let raw = rec.get(idx[k]).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| AppError::input(format!("CSV row {}: cannot parse `{raw}` as a number", line + 2)))
        };
        let subject = field(0)?;
        if subject < 0.0 || subject.fract() != 0.0 {
            return Err(AppError::input(format!("CSV row {}: subject id must be a nonnegative integer", line + 2)));
        }
        out.push(Record {
            subject: subject as u32,
            age: field(1)?,
            test_time: field(2)?,
            motor_updrs: field(3)?,
            total_updrs: field(4)?,
            ppe: field(5)?,
        });
    }
    if out.is_empty() {
        return Err(AppError::input("CSV has no data rows"));
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<Record>, AppError> {
    let file = std::fs::File::open(path).map_err(|e| AppError::input(format!("cannot open {}: {e}", path.display())))?;
    parse_records(file)
}
