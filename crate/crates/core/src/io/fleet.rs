//! Fleet CSV files, either raw inspection data or a ready performance table.
//!
//! The mode is read from the header: a `type` column means raw records, a
//! column per criterion (id or code) means performances.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::parse_exact;
use crate::framework::CriteriaFramework;
use crate::risk::{Deficiencies, PerformanceRecord, RawShipRecord};

pub const RAW_COLUMNS: [&str; 8] = [
    "ship",
    "type",
    "age",
    "deficiencies",
    "detentions",
    "ism_company",
    "flag",
    "recognised_organisation",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FleetMode {
    Raw,
    Performance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Unknown columns are an error.
    #[default]
    Strict,
    /// Unknown columns are ignored.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fleet {
    Raw(Vec<RawShipRecord>),
    Performance(Vec<PerformanceRecord>),
}

impl Fleet {
    pub fn mode(&self) -> FleetMode {
        match self {
            Fleet::Raw(_) => FleetMode::Raw,
            Fleet::Performance(_) => FleetMode::Performance,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Fleet::Raw(r) => r.len(),
            Fleet::Performance(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn parse_error(line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn header_key(h: &str) -> String {
    h.trim().to_lowercase().replace([' ', '-'], "_")
}

/// Column index for each expected column, in order.
struct Layout {
    indices: Vec<usize>,
}

fn layout(header: &[String], expected: &[String], strictness: Strictness) -> Result<Layout> {
    let mut indices = Vec::with_capacity(expected.len());
    for name in expected {
        let matches: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| *h == name)
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [] => return Err(parse_error(1, name, "missing column")),
            [i] => indices.push(*i),
            _ => return Err(parse_error(1, name, "duplicate column")),
        }
    }
    if strictness == Strictness::Strict {
        if let Some(extra) = header.iter().find(|h| !expected.contains(h)) {
            return Err(parse_error(1, extra, "unknown column"));
        }
    }
    Ok(Layout { indices })
}

/// Reads a fleet file. `mode` forces a mode; `None` detects it from the header.
pub fn parse_fleet<R: Read>(
    input: R,
    mode: Option<FleetMode>,
    framework: &CriteriaFramework,
    strictness: Strictness,
) -> Result<Fleet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_error(1, "", e.to_string()))?
        .iter()
        .map(header_key)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(parse_error(1, "", "header row is mandatory"));
    }
    let mode = mode.unwrap_or(if header.iter().any(|h| h == "type") {
        FleetMode::Raw
    } else {
        FleetMode::Performance
    });
    match mode {
        FleetMode::Raw => parse_raw(&mut reader, &header, strictness).map(Fleet::Raw),
        FleetMode::Performance => {
            parse_performance(&mut reader, &header, framework, strictness).map(Fleet::Performance)
        }
    }
}

fn records<R: Read>(
    reader: &mut csv::Reader<R>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord)>> + '_ {
    reader.records().map(|r| {
        r.map(|rec| (rec.position().map(|p| p.line()).unwrap_or(0), rec))
            .map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_error(line, "", e.to_string())
            })
    })
}

fn parse_raw<R: Read>(
    reader: &mut csv::Reader<R>,
    header: &[String],
    strictness: Strictness,
) -> Result<Vec<RawShipRecord>> {
    let expected: Vec<String> = RAW_COLUMNS.iter().map(|s| s.to_string()).collect();
    let layout = layout(header, &expected, strictness)?;
    let mut out = Vec::new();
    for row in records(reader) {
        let (line, rec) = row?;
        let cell = |i: usize| rec.get(layout.indices[i]).unwrap_or("").to_string();
        let ship = cell(0);
        if ship.is_empty() {
            return Err(parse_error(line, "ship", "empty ship id"));
        }
        let age = parse_exact(&cell(2)).map_err(|e| parse_error(line, "age", e.to_string()))?;
        if age < num_traits::Zero::zero() {
            return Err(parse_error(line, "age", format!("age {} is below 0", cell(2))));
        }
        let defc = cell(3);
        let deficiencies = match defc.to_lowercase().as_str() {
            "ne" | "not-eligible" | "not eligible" => Deficiencies::NotEligible,
            _ => Deficiencies::Count(
                defc.parse()
                    .map_err(|_| parse_error(line, "deficiencies", format!("not a count: {defc:?}")))?,
            ),
        };
        let detentions = cell(4)
            .parse()
            .map_err(|_| parse_error(line, "detentions", format!("not a count: {:?}", cell(4))))?;
        out.push(RawShipRecord {
            ship,
            ship_type: cell(1),
            age,
            deficiencies,
            detentions,
            ism_company: cell(5),
            flag: cell(6),
            recognised_organisation: cell(7),
        });
    }
    Ok(out)
}

fn parse_performance<R: Read>(
    reader: &mut csv::Reader<R>,
    header: &[String],
    framework: &CriteriaFramework,
    strictness: Strictness,
) -> Result<Vec<PerformanceRecord>> {
    // Criterion columns may be named by id (g2) or code (AGES).
    let criteria: Vec<_> = framework.criteria().collect();
    let mut expected = vec!["ship".to_string()];
    for c in &criteria {
        let id = header_key(&c.id);
        let code = header_key(&c.code);
        expected.push(if header.contains(&code) && !header.contains(&id) { code } else { id });
    }
    let layout = layout(header, &expected, strictness)?;
    let mut out = Vec::new();
    for row in records(reader) {
        let (line, rec) = row?;
        let ship = rec.get(layout.indices[0]).unwrap_or("").to_string();
        if ship.is_empty() {
            return Err(parse_error(line, "ship", "empty ship id"));
        }
        let mut perf = PerformanceRecord::new(ship);
        for (i, c) in criteria.iter().enumerate() {
            let token = rec.get(layout.indices[i + 1]).unwrap_or("");
            let p = c
                .parse_performance(token)
                .map_err(|e| parse_error(line, &expected[i + 1], e.to_string()))?;
            perf = perf.with(&c.id, p);
        }
        out.push(perf);
    }
    Ok(out)
}

/// Writes a performance table in the layout [`parse_fleet`] reads back.
pub fn write_performance_fleet(fleet: &[PerformanceRecord], framework: &CriteriaFramework) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let criteria: Vec<_> = framework.criteria().collect();
    let mut header = vec!["ship".to_string()];
    header.extend(criteria.iter().map(|c| c.id.clone()));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for perf in fleet {
        let mut row = vec![perf.ship.clone()];
        for c in &criteria {
            row.push(perf.get(&c.id).map(|p| p.to_string()).unwrap_or_default());
        }
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::scale::Performance;

    fn psc() -> CriteriaFramework {
        CriteriaFramework::port_state_control()
    }

    const RAW: &str = "ship,type,age,deficiencies,detentions,ism_company,flag,recognised_organisation\n\
a1,Refrigerated cargo,18,2,0,ISM 12,Italy,RINA\n\
a9,General cargo,28,NE,1,ISM 24,Barbados,BV\n";

    #[test]
    fn raw_mode_is_detected() {
        let fleet = parse_fleet(RAW.as_bytes(), None, &psc(), Strictness::Strict).unwrap();
        let Fleet::Raw(rows) = fleet else { panic!("expected raw") };
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].age, int(18));
        assert_eq!(rows[0].deficiencies, Deficiencies::Count(2));
        assert_eq!(rows[1].deficiencies, Deficiencies::NotEligible);
        assert_eq!(rows[1].detentions, 1);
    }

    #[test]
    fn header_only_is_empty_fleet() {
        let header = RAW.lines().next().unwrap();
        let fleet = parse_fleet(header.as_bytes(), None, &psc(), Strictness::Strict).unwrap();
        assert!(fleet.is_empty());
        assert_eq!(fleet.mode(), FleetMode::Raw);
    }

    #[test]
    fn negative_age_is_located() {
        let text = RAW.replace(",28,", ",-3,");
        let err = parse_fleet(text.as_bytes(), None, &psc(), Strictness::Strict).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "age");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_number_is_located() {
        let text = RAW.replace(",2,0,", ",two,0,");
        let err = parse_fleet(text.as_bytes(), None, &psc(), Strictness::Strict).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, ref column, .. } if column == "deficiencies"));
    }

    #[test]
    fn unknown_column_depends_on_strictness() {
        let text = RAW.replacen("recognised_organisation", "recognised_organisation,notes", 1)
            .replace("RINA\n", "RINA,x\n")
            .replace("BV\n", "BV,y\n");
        assert!(matches!(
            parse_fleet(text.as_bytes(), None, &psc(), Strictness::Strict),
            Err(Error::Parse { ref column, .. }) if column == "notes"
        ));
        assert_eq!(parse_fleet(text.as_bytes(), None, &psc(), Strictness::Lenient).unwrap().len(), 2);
    }

    #[test]
    fn missing_column_is_reported() {
        let text = "ship,type,age\na1,x,3\n";
        assert!(matches!(
            parse_fleet(text.as_bytes(), Some(FleetMode::Raw), &psc(), Strictness::Lenient),
            Err(Error::Parse { line: 1, ref column, .. }) if column == "deficiencies"
        ));
    }

    #[test]
    fn performance_table_accepts_codes_and_round_trips() {
        let text = "ship,ACCI,AGES,DEFC,DETN,COPF,FLPF,FLIA,ROPF,RORE\n\
a4,High,2,Low,No,High,High,Yes,High,Yes\n";
        let Fleet::Performance(rows) = parse_fleet(text.as_bytes(), None, &psc(), Strictness::Strict).unwrap() else {
            panic!("expected performance")
        };
        assert_eq!(rows[0].get("g2"), Some(&Performance::Numeric(int(2))));
        assert_eq!(rows[0].get("g7"), Some(&Performance::level("yes")));
        let written = write_performance_fleet(&rows, &psc()).unwrap();
        let Fleet::Performance(again) = parse_fleet(written.as_bytes(), None, &psc(), Strictness::Strict).unwrap() else {
            panic!("expected performance")
        };
        assert_eq!(again, rows);
    }

    #[test]
    fn unknown_level_token_is_located() {
        let text = "ship,g1,g2,g3,g4,g5,g6,g7,g8,g9\na4,huge,2,low,no,high,high,yes,high,yes\n";
        assert!(matches!(
            parse_fleet(text.as_bytes(), None, &psc(), Strictness::Strict),
            Err(Error::Parse { line: 2, ref column, .. }) if column == "g1"
        ));
    }
}
