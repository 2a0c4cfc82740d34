//! `entity_id,period,return` files with `YYYY-MM` periods.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::ranking::{Period, ReturnSeries};
use crate::ingest::{csv_error, csv_reader, expect_header, line_of, open, parse_number};

pub const RETURNS_HEADER: [&str; 3] = ["entity_id", "period", "return"];

/// One series per entity (first-appearance order), sorted by period.
pub fn read_returns<R: Read>(input: R, path: &Path) -> Result<Vec<ReturnSeries>> {
    let mut reader = csv_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    expect_header(path, &headers, &RETURNS_HEADER)?;

    let mut order: Vec<String> = Vec::new();
    let mut by_entity: HashMap<String, HashMap<Period, f64>> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        let entity = record[0].to_string();
        let period: Period = record[1].parse().map_err(|()| Error::BadPeriodFormat {
            path: path.to_path_buf(),
            line,
            value: record[1].to_string(),
        })?;
        let value = parse_number(path, line, "return", &record[2])?;
        if !by_entity.contains_key(&entity) {
            order.push(entity.clone());
        }
        let series = by_entity.entry(entity.clone()).or_default();
        if series.insert(period, value).is_some() {
            return Err(Error::DuplicatePeriod {
                path: path.to_path_buf(),
                line,
                entity,
                period: period.to_string(),
            });
        }
    }
    order
        .into_iter()
        .map(|entity| {
            let mut obs: Vec<(Period, f64)> = by_entity
                .remove(&entity)
                .expect("ordered entity exists")
                .into_iter()
                .collect();
            obs.sort_by_key(|o| o.0);
            ReturnSeries::new(entity, obs)
        })
        .collect()
}

pub fn load_returns(path: &Path) -> Result<Vec<ReturnSeries>> {
    read_returns(open(path)?, path)
}

/// Values use the shortest exact decimal form so that reading back is lossless.
pub fn write_returns<W: Write>(series: &[ReturnSeries], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RETURNS_HEADER)?;
    for s in series {
        for (period, value) in s.observations() {
            w.write_record([s.entity(), &period.to_string(), &value.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
