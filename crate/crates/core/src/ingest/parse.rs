use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::frame::{Column, Table};
use crate::manifest::{DatasetAnnotation, FileFormat};

use super::RawArtifact;

pub const DEFAULT_NA_TOKENS: &[&str] = &["", "NA", "?"];

#[derive(Debug, Clone, PartialEq)]
pub struct ParserConfig {
    pub format: FileFormat,
    pub delimiter: u8,
    pub has_header: bool,
    pub colnames: Option<Vec<String>>,
    pub field_widths: Vec<usize>,
    pub na_tokens: Vec<String>,
    /// Strip surrounding whitespace from every field.
    pub trim: bool,
}

impl Default for ParserConfig {
    fn default() -> Self {
        Self {
            format: FileFormat::Delimited,
            delimiter: b',',
            has_header: true,
            colnames: None,
            field_widths: Vec::new(),
            na_tokens: DEFAULT_NA_TOKENS.iter().map(|s| s.to_string()).collect(),
            trim: true,
        }
    }
}

impl ParserConfig {
    pub fn delimited(delimiter: u8) -> Self {
        Self {
            delimiter,
            ..Self::default()
        }
    }

    pub fn fixed_width(field_widths: Vec<usize>, colnames: Vec<String>) -> Self {
        Self {
            format: FileFormat::FixedWidth,
            has_header: false,
            colnames: Some(colnames),
            field_widths,
            ..Self::default()
        }
    }

    pub fn headerless(mut self, colnames: Vec<String>) -> Self {
        self.has_header = false;
        self.colnames = Some(colnames);
        self
    }

    pub fn with_na_tokens<S: Into<String>>(mut self, tokens: impl IntoIterator<Item = S>) -> Self {
        self.na_tokens = tokens.into_iter().map(Into::into).collect();
        self
    }

    /// Derives the parser settings from an annotation: a file has a header
    /// row unless the annotation supplies column names.
    pub fn from_annotation(a: &DatasetAnnotation) -> Self {
        let mut cfg = match a.format {
            FileFormat::Delimited => {
                let mut c = Self::delimited(a.delimiter.map(|d| d as u8).unwrap_or(b','));
                if let Some(names) = &a.colnames {
                    c = c.headerless(names.clone());
                }
                c
            }
            FileFormat::FixedWidth => Self::fixed_width(
                a.field_widths.clone().unwrap_or_default(),
                a.colnames.clone().unwrap_or_default(),
            ),
        };
        if let Some(tokens) = &a.na_tokens {
            cfg.na_tokens = tokens.clone();
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if !self.has_header && self.colnames.is_none() {
            return Err(Error::ParserConfig(
                "column names are required when the file has no header".into(),
            ));
        }
        if self.format == FileFormat::FixedWidth {
            if self.field_widths.is_empty() || self.field_widths.contains(&0) {
                return Err(Error::ParserConfig(
                    "fixed-width parsing needs positive field widths".into(),
                ));
            }
            let names = self.colnames.as_ref().map(Vec::len).unwrap_or(0);
            if names != self.field_widths.len() {
                return Err(Error::ParserConfig(format!(
                    "{} field widths for {} column names",
                    self.field_widths.len(),
                    names
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_table(artifact: &RawArtifact, config: &ParserConfig) -> Result<Table> {
    parse_bytes(&artifact.bytes, config)
}

/// Parses delimited (RFC 4180 quoting) or fixed-width text into a typed
/// table. Column types are inferred per column.
pub fn parse_bytes(bytes: &[u8], config: &ParserConfig) -> Result<Table> {
    config.validate()?;
    let (names, rows) = match config.format {
        FileFormat::Delimited => read_delimited(bytes, config)?,
        FileFormat::FixedWidth => read_fixed_width(bytes, config)?,
    };
    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(n.as_str()) {
            return Err(Error::DuplicateColumn(n.clone()));
        }
    }
    let na: HashSet<&str> = config.na_tokens.iter().map(String::as_str).collect();
    let n_rows = rows.len();
    let mut columns = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let raw: Vec<Option<&str>> = rows
            .iter()
            .map(|r| {
                let v = r[j].as_str();
                (!na.contains(v)).then_some(v)
            })
            .collect();
        columns.push(infer_column(name, &raw));
    }
    Table::with_rows(columns, n_rows)
}

type RawRows = (Vec<String>, Vec<Vec<String>>);

fn read_delimited(bytes: &[u8], config: &ParserConfig) -> Result<RawRows> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(if config.trim {
            csv::Trim::All
        } else {
            csv::Trim::None
        })
        .from_reader(bytes);
    let mut names = config.colnames.clone();
    let mut header_pending = config.has_header;
    let mut rows = Vec::new();
    let mut record = csv::ByteRecord::new();
    loop {
        let more = reader.read_byte_record(&mut record).map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let fields: Vec<String> = record
            .iter()
            .map(|f| String::from_utf8_lossy(f).into_owned())
            .collect();
        if header_pending {
            header_pending = false;
            if names.is_none() {
                names = Some(fields);
            }
            continue;
        }
        let expected = names.as_ref().map(Vec::len).unwrap_or(0);
        if fields.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        rows.push(fields);
    }
    Ok((names.unwrap_or_default(), rows))
}

fn read_fixed_width(bytes: &[u8], config: &ParserConfig) -> Result<RawRows> {
    let text = String::from_utf8_lossy(bytes);
    let names = config.colnames.clone().unwrap_or_default();
    let widths = &config.field_widths;
    let last_start: usize = widths[..widths.len() - 1].iter().sum();
    let mut rows = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        if config.has_header && rows.is_empty() && i == 0 {
            continue;
        }
        let chars: Vec<char> = raw_line.chars().collect();
        if chars.len() <= last_start {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "line has {} characters, fields need at least {}",
                    chars.len(),
                    last_start + 1
                ),
            });
        }
        let mut start = 0;
        let mut fields = Vec::with_capacity(widths.len());
        for w in widths {
            let end = (start + w).min(chars.len());
            let s: String = chars[start..end].iter().collect();
            fields.push(if config.trim { s.trim().to_string() } else { s });
            start += w;
        }
        rows.push(fields);
    }
    Ok((names, rows))
}

fn is_bool_token(s: &str) -> bool {
    matches!(s, "0" | "1") || s.eq_ignore_ascii_case("true") || s.eq_ignore_ascii_case("false")
}

fn parse_bool(s: &str) -> bool {
    s == "1" || s.eq_ignore_ascii_case("true")
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Picks the narrowest of bool, int, float, categorical that holds every
/// non-missing value, falling back to text. String columns are categorical
/// when each distinct value occurs twice on average.
pub(crate) fn infer_column(name: &str, raw: &[Option<&str>]) -> Column {
    let present: Vec<&str> = raw.iter().flatten().copied().collect();
    if present.is_empty() {
        return Column::text(name, raw);
    }
    if present.iter().all(|s| is_bool_token(s)) {
        return Column::bool(name, raw.iter().map(|v| v.map(parse_bool)).collect());
    }
    if present.iter().all(|s| s.parse::<i64>().is_ok()) {
        return Column::int(name, raw.iter().map(|v| v.map(|s| s.parse().unwrap())).collect());
    }
    if present.iter().all(|s| parse_finite(s).is_some()) {
        return Column::float(name, raw.iter().map(|v| v.and_then(parse_finite)).collect());
    }
    let distinct: BTreeSet<&str> = present.iter().copied().collect();
    if distinct.len() * 2 <= present.len() {
        Column::categorical(name, raw)
    } else {
        Column::text(name, raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Cell, DType};

    #[test]
    fn header_csv_ints() {
        let t = parse_bytes(b"a,b\n1,2\n3,4", &ParserConfig::default()).unwrap();
        assert_eq!((t.n_rows(), t.n_cols()), (2, 2));
        assert_eq!(t.column("a").unwrap().dtype(), DType::Int);
        assert_eq!(t.column("b").unwrap().dtype(), DType::Int);
    }

    #[test]
    fn headerless_with_na_token() {
        let cfg = ParserConfig::default()
            .headerless(vec!["x".into(), "y".into()])
            .with_na_tokens(["?"]);
        let t = parse_bytes(b"1,?\n2,5", &cfg).unwrap();
        assert_eq!(t.column("y").unwrap().n_missing(), 1);
        assert_eq!(t.column("x").unwrap().n_missing(), 0);
    }

    #[test]
    fn fixed_width_slices() {
        let cfg = ParserConfig::fixed_width(vec![2, 3], vec!["a".into(), "b".into()]);
        let t = parse_bytes(b"AB 1\nCD12", &cfg).unwrap();
        let a = t.column("a").unwrap();
        let b = t.column("b").unwrap();
        assert_eq!(a.dtype(), DType::Text);
        assert_eq!(b.dtype(), DType::Int);
        assert_eq!(a.rendered(), vec![Some("AB".into()), Some("CD".into())]);
        assert_eq!(b.cell(0), Cell::Int(1));
        assert_eq!(b.cell(1), Cell::Int(12));
    }

    #[test]
    fn fixed_width_short_line() {
        let cfg = ParserConfig::fixed_width(vec![2, 3], vec!["a".into(), "b".into()]);
        match parse_bytes(b"AB 1\nC", &cfg) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_field_count_reports_line() {
        match parse_bytes(b"a,b\n1,2\n3\n", &ParserConfig::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_header_rejected() {
        assert!(matches!(
            parse_bytes(b"a,a\n1,2", &ParserConfig::default()),
            Err(Error::DuplicateColumn(_))
        ));
    }

    #[test]
    fn quoted_fields() {
        let t = parse_bytes(b"name,n\n\"Smith, J\",1\n\"He said \"\"hi\"\"\",2\n", &ParserConfig::default())
            .unwrap();
        assert_eq!(
            t.column("name").unwrap().render(0).as_deref(),
            Some("Smith, J")
        );
        assert_eq!(
            t.column("name").unwrap().render(1).as_deref(),
            Some("He said \"hi\"")
        );
    }

    #[test]
    fn inference_ladder() {
        let t = parse_bytes(
            b"b,i,f,c,s\n1,1,1.5,x,p\n0,-2,2,x,q\nTRUE,3,NA,y,r\nfalse,4,1e3,y,s\n",
            &ParserConfig::default(),
        )
        .unwrap();
        let types: Vec<DType> = t.columns().iter().map(|c| c.dtype()).collect();
        assert_eq!(
            types,
            [DType::Bool, DType::Int, DType::Float, DType::Categorical, DType::Text]
        );
    }

    #[test]
    fn missing_config_rejected() {
        let cfg = ParserConfig {
            has_header: false,
            ..ParserConfig::default()
        };
        assert!(matches!(parse_bytes(b"1", &cfg), Err(Error::ParserConfig(_))));
    }
}
