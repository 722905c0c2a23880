use std::collections::BTreeMap;

use thiserror::Error;

use super::Label;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("labels file is missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("row {row}: label {value:?} is not 0 or 1")]
    NonBinaryLabel { row: usize, value: String },
    #[error("row {row}: session {session_id:?} listed twice")]
    DuplicateSession { row: usize, session_id: String },
    #[error("labels file is not readable CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Session labels with class counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelTable {
    labels: BTreeMap<String, Label>,
}

impl LabelTable {
    pub fn get(&self, session_id: &str) -> Option<Label> {
        self.labels.get(session_id).copied()
    }

    pub fn insert(&mut self, session_id: impl Into<String>, label: Label) -> Option<Label> {
        self.labels.insert(session_id.into(), label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.values().filter(|&&l| l == Label::Depressed).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Label)> {
        self.labels.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Renders the table as `session_id,phq8_binary` CSV in id order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("session_id,phq8_binary\n");
        for (id, label) in self.iter() {
            out.push_str(&format!("{id},{}\n", label.bit()));
        }
        out
    }
}

impl FromIterator<(String, Label)> for LabelTable {
    fn from_iter<I: IntoIterator<Item = (String, Label)>>(iter: I) -> Self {
        Self { labels: iter.into_iter().collect() }
    }
}

/// Reads a `session_id,phq8_binary[,...]` CSV. Header names match
/// case-insensitively and `participant_id` is accepted for `session_id`;
/// extra columns are ignored. Rows are numbered from 1 after the header.
pub fn load_labels(raw: &[u8]) -> Result<LabelTable, LabelError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(raw);
    let headers = reader.headers()?.clone();
    let find = |name: &'static str, alias: &'static str| {
        headers
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}'))
            .position(|h| h.eq_ignore_ascii_case(name) || h.eq_ignore_ascii_case(alias))
            .ok_or(LabelError::MissingColumn(name))
    };
    let id_col = find("session_id", "participant_id")?;
    let label_col = find("phq8_binary", "phq8_binary")?;

    let mut table = LabelTable::default();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let value = record.get(label_col).unwrap_or("");
        let label = value
            .parse::<u8>()
            .ok()
            .and_then(Label::from_bit)
            .ok_or_else(|| LabelError::NonBinaryLabel { row, value: value.to_string() })?;
        if table.labels.contains_key(&id) {
            return Err(LabelError::DuplicateSession { row, session_id: id });
        }
        table.labels.insert(id, label);
    }
    Ok(table)
}
