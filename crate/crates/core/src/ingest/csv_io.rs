use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use chrono::NaiveDate;

use super::ohlcv::{ohlcv_to_series, OhlcvField, OhlcvRecord};
use crate::error::{Error, Result};
use crate::series::{AnnualSeries, TimeSeries};

/// Layout of a daily CSV file. The first column always holds the date.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CsvSchema {
    /// One column per series, named by its header.
    Wide,
    /// Open/High/Low/Close/Adj Close/Volume columns of one instrument.
    Ohlcv { instrument: String },
}

/// Annual target with any non-fatal findings from loading it.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetIndex {
    pub series: AnnualSeries,
    pub warnings: Vec<String>,
}

struct Table {
    headers: Vec<String>,
    /// (line number, date, raw cells after the date column)
    rows: Vec<(u64, NaiveDate, Vec<String>)>,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::parse(path, "file is empty"));
    }
    if headers.len() < 2 {
        return Err(Error::parse(
            path,
            "expected a date column and at least one value column",
        ));
    }
    let mut rows = Vec::new();
    let mut seen: HashMap<NaiveDate, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.get(0).unwrap_or_default();
        let date = parse_date(raw)
            .ok_or_else(|| Error::parse(path, format!("line {line}: invalid date `{raw}`")))?;
        if let Some(first) = seen.insert(date, line) {
            return Err(Error::parse(
                path,
                format!("line {line}: duplicate date {date} (first seen on line {first})"),
            ));
        }
        rows.push((
            line,
            date,
            record.iter().skip(1).map(str::to_string).collect(),
        ));
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "file has a header but no rows"));
    }
    rows.sort_by_key(|r| r.1);
    Ok(Table { headers, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        _ => Error::parse(path, e.to_string()),
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

/// Blank and `NA`-style cells are missing; anything else must be a finite number.
fn parse_cell(path: &Path, line: u64, column: &str, cell: &str) -> Result<Option<f64>> {
    if cell.is_empty()
        || ["na", "nan", "null", "n/a"]
            .iter()
            .any(|m| cell.eq_ignore_ascii_case(m))
    {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::parse(
            path,
            format!("line {line}: column `{column}` has invalid number `{cell}`"),
        )),
    }
}

/// Reads daily series from a CSV file.
pub fn read_csv_series(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<TimeSeries>> {
    let path = path.as_ref();
    let table = read_table(path)?;
    let dates: Vec<NaiveDate> = table.rows.iter().map(|r| r.1).collect();
    match schema {
        CsvSchema::Wide => {
            let mut ids = BTreeSet::new();
            let mut out = Vec::new();
            for (col, id) in table.headers.iter().enumerate().skip(1) {
                if id.is_empty() {
                    return Err(Error::parse(
                        path,
                        format!("column {} has no name", col + 1),
                    ));
                }
                if !ids.insert(id.as_str()) {
                    return Err(Error::parse(path, format!("duplicate column `{id}`")));
                }
                let values = table
                    .rows
                    .iter()
                    .map(|(line, _, cells)| {
                        parse_cell(path, *line, id, cells.get(col - 1).map_or("", |s| s))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.push(TimeSeries::new(id.clone(), dates.clone(), values)?);
            }
            Ok(out)
        }
        CsvSchema::Ohlcv { instrument } => {
            let mut columns: Vec<(usize, OhlcvField)> = Vec::new();
            for (col, header) in table.headers.iter().enumerate().skip(1) {
                match OhlcvField::from_header(header) {
                    Some(f) if columns.iter().any(|(_, g)| *g == f) => {
                        return Err(Error::parse(path, format!("duplicate column `{header}`")));
                    }
                    Some(f) => columns.push((col, f)),
                    None => log::warn!("{}: ignoring column `{header}`", path.display()),
                }
            }
            if columns.is_empty() {
                return Err(Error::parse(path, "no OHLCV columns found"));
            }
            let mut records = Vec::with_capacity(table.rows.len());
            for (line, date, cells) in &table.rows {
                let mut rec = OhlcvRecord {
                    date: *date,
                    open: None,
                    high: None,
                    low: None,
                    close: None,
                    adj_close: None,
                    volume: None,
                };
                for &(col, field) in &columns {
                    let v = parse_cell(
                        path,
                        *line,
                        &table.headers[col],
                        cells.get(col - 1).map_or("", |s| s),
                    )?;
                    match field {
                        OhlcvField::Open => rec.open = v,
                        OhlcvField::High => rec.high = v,
                        OhlcvField::Low => rec.low = v,
                        OhlcvField::Close => rec.close = v,
                        OhlcvField::AdjClose => rec.adj_close = v,
                        OhlcvField::Volume => rec.volume = v,
                    }
                }
                rec.validate()
                    .map_err(|e| Error::parse(path, format!("line {line}: {e}")))?;
                records.push(rec);
            }
            ohlcv_to_series(instrument, &records)
        }
    }
}

/// Renders series as a wide CSV over the union of their dates.
///
/// Values use the shortest representation that parses back exactly;
/// missing cells are left blank.
pub fn wide_csv_string(series: &[TimeSeries]) -> Result<String> {
    let mut ids = BTreeSet::new();
    for s in series {
        if s.id().contains([',', '"', '\n']) {
            return Err(Error::InvalidArgument(format!(
                "series id `{}` cannot be written as a CSV header",
                s.id()
            )));
        }
        if !ids.insert(s.id()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate series id `{}`",
                s.id()
            )));
        }
    }
    let mut grid: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
    for (j, s) in series.iter().enumerate() {
        for (d, v) in s.dates().iter().zip(s.values()) {
            grid.entry(*d).or_insert_with(|| vec![None; series.len()])[j] = *v;
        }
    }
    let mut out = String::from("date");
    for s in series {
        out.push(',');
        out.push_str(s.id());
    }
    out.push('\n');
    for (date, cells) in grid {
        out.push_str(&date.format("%Y-%m-%d").to_string());
        for c in cells {
            out.push(',');
            if let Some(v) = c {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_wide_csv(path: impl AsRef<Path>, series: &[TimeSeries]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, wide_csv_string(series)?).map_err(|e| Error::io(path, e))
}

/// Reads a `year,value` CSV into an annual series sorted by year.
pub fn read_target_index(path: impl AsRef<Path>) -> Result<TargetIndex> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::parse(path, "file is empty"));
    }
    if headers != ["year", "value"] {
        return Err(Error::parse(
            path,
            format!(
                "expected header `year,value`, found `{}`",
                headers.join(",")
            ),
        ));
    }
    let mut rows: BTreeMap<i32, f64> = BTreeMap::new();
    let mut id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "target".into());
    if id.is_empty() {
        id = "target".into();
    }
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let year: i32 = record[0].parse().map_err(|_| {
            Error::parse(path, format!("line {line}: invalid year `{}`", &record[0]))
        })?;
        let value = parse_cell(path, line, "value", &record[1])?
            .ok_or_else(|| Error::parse(path, format!("line {line}: missing value for {year}")))?;
        if rows.insert(year, value).is_some() {
            return Err(Error::parse(
                path,
                format!("line {line}: duplicate year {year}"),
            ));
        }
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "file has a header but no rows"));
    }
    let (years, values): (Vec<i32>, Vec<f64>) = rows.into_iter().unzip();
    let mut warnings = Vec::new();
    if let Some(w) = years.windows(2).find(|w| w[1] != w[0] + 1) {
        let msg = format!(
            "{}: years are not consecutive ({} is followed by {})",
            path.display(),
            w[0],
            w[1]
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(TargetIndex {
        series: AnnualSeries::new(id, years, values)?,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn wide_two_columns() {
        let f = file("date,v\n2020-01-01,1\n2020-01-02,2\n2020-01-03,3\n");
        let s = read_csv_series(f.path(), &CsvSchema::Wide).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id(), "v");
        assert_eq!(s[0].len(), 3);
    }

    #[test]
    fn blank_is_missing() {
        let f = file("date,a,b\n2020-01-01,1,\n2020-01-02,,2\n2020-01-03,3,NA\n2020-01-04,4,5\n");
        let s = read_csv_series(f.path(), &CsvSchema::Wide).unwrap();
        assert_eq!(s[0].values()[1], None);
        assert_eq!(s[1].values()[0], None);
        assert_eq!(s[1].values()[2], None);
        assert_eq!(s[1].values()[3], Some(5.0));
    }

    #[test]
    fn ohlcv_expands_six_fields() {
        let f = file(
            "Date,Open,High,Low,Close,Adj Close,Volume\n\
             2020-01-02,1,3,0.5,2,2,100\n\
             2020-01-03,2,4,1.5,3,3,200\n",
        );
        let schema = CsvSchema::Ohlcv {
            instrument: "Brent".into(),
        };
        let s = read_csv_series(f.path(), &schema).unwrap();
        let ids: Vec<&str> = s.iter().map(|x| x.id()).collect();
        assert_eq!(
            ids,
            [
                "Open_Brent",
                "High_Brent",
                "Low_Brent",
                "Close_Brent",
                "Adj_Close_Brent",
                "Volume_Brent"
            ]
        );
    }

    #[test]
    fn bad_dates_name_the_line() {
        let f = file("date,v\n2020-01-01,1\n01/02/2020,2\n");
        let err = read_csv_series(f.path(), &CsvSchema::Wide).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn duplicate_dates_rejected() {
        let f = file("date,v\n2020-01-01,1\n2020-01-01,2\n");
        let err = read_csv_series(f.path(), &CsvSchema::Wide).unwrap_err();
        assert!(err.to_string().contains("duplicate date"), "{err}");
    }

    #[test]
    fn empty_file_rejected() {
        let f = file("");
        assert!(read_csv_series(f.path(), &CsvSchema::Wide).is_err());
        let f = file("date,v\n");
        assert!(read_csv_series(f.path(), &CsvSchema::Wide).is_err());
    }

    #[test]
    fn unsorted_rows_sorted() {
        let f = file("date,v\n2020-01-03,3\n2020-01-01,1\n2020-01-02,2\n");
        let s = read_csv_series(f.path(), &CsvSchema::Wide).unwrap();
        assert_eq!(s[0].values(), &[Some(1.0), Some(2.0), Some(3.0)]);
    }

    #[test]
    fn target_index() {
        let mut text = String::from("year,value\n");
        for y in (2011..=2023).rev() {
            text.push_str(&format!("{y},{}\n", y - 2000));
        }
        let t = read_target_index(file(&text).path()).unwrap();
        assert_eq!(t.series.len(), 13);
        assert_eq!(t.series.years()[0], 2011);
        assert!(t.warnings.is_empty());

        let t = read_target_index(file("year,value\n2015,1.0\n").path()).unwrap();
        assert_eq!(t.series.len(), 1);
        assert!(t.warnings.is_empty());

        let t = read_target_index(file("year,value\n2015,1\n2017,2\n").path()).unwrap();
        assert_eq!(t.warnings.len(), 1);

        assert!(read_target_index(file("year,value\n2015,1\n2015,2\n").path()).is_err());
        assert!(read_target_index(file("yr,v\n2015,1\n").path()).is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_target_index("/nonexistent/target.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/target.csv"));
    }
}
