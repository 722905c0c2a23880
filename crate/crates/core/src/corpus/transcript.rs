use std::fmt::Write as _;

use thiserror::Error;

use super::{Session, Speaker, Utterance};

const COLUMNS: [&str; 4] = ["start_time", "stop_time", "speaker", "value"];

/// Transcript parse failures. Row numbers are 1-based and count data lines
/// only, so the first line after the header is row 1.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("transcript is not valid UTF-8")]
    InvalidUtf8,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("row {row}: unknown speaker {speaker:?}")]
    UnknownSpeaker { row: usize, speaker: String },
    #[error("row {row}: bad timestamp {detail}")]
    BadTimestamp { row: usize, detail: String },
    #[error("row {row}: expected at least {expected} fields, found {found}")]
    MalformedRow { row: usize, expected: usize, found: usize },
}

impl ParseError {
    pub fn row(&self) -> Option<usize> {
        match self {
            ParseError::UnknownSpeaker { row, .. }
            | ParseError::BadTimestamp { row, .. }
            | ParseError::MalformedRow { row, .. } => Some(*row),
            _ => None,
        }
    }
}

struct Layout {
    index: [usize; 4],
    width: usize,
}

fn parse_header(line: &str) -> Result<Layout, ParseError> {
    let names: Vec<String> = line.split('\t').map(|c| c.trim().to_ascii_lowercase()).collect();
    let mut index = [0; 4];
    for (slot, want) in index.iter_mut().zip(COLUMNS) {
        *slot = names
            .iter()
            .position(|n| n == want)
            .ok_or_else(|| ParseError::MalformedHeader(format!("missing column {want:?}")))?;
    }
    Ok(Layout { index, width: names.len() })
}

fn parse_time(cell: &str, row: usize) -> Result<f64, ParseError> {
    match cell.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(ParseError::BadTimestamp { row, detail: format!("{cell:?}") }),
    }
}

fn parse_row(line: &str, row: usize, layout: &Layout) -> Result<Utterance, ParseError> {
    let cells: Vec<&str> = line.split('\t').collect();
    let [start_ix, stop_ix, speaker_ix, value_ix] = layout.index;
    // A missing trailing value cell means an empty utterance.
    let required = start_ix.max(stop_ix).max(speaker_ix) + 1;
    if cells.len() < required {
        return Err(ParseError::MalformedRow { row, expected: layout.width, found: cells.len() });
    }
    let start = parse_time(cells[start_ix], row)?;
    let stop = parse_time(cells[stop_ix], row)?;
    if stop < start {
        return Err(ParseError::BadTimestamp { row, detail: format!("stop {stop} precedes start {start}") });
    }
    let speaker = Speaker::from_label(cells[speaker_ix])
        .ok_or_else(|| ParseError::UnknownSpeaker { row, speaker: cells[speaker_ix].to_string() })?;
    let text = cells.get(value_ix).copied().unwrap_or("");
    Ok(Utterance::new(start, stop, speaker, text))
}

fn parse_impl(raw: &[u8], session_id: &str, strict: bool) -> Result<(Session, Vec<ParseError>), ParseError> {
    let text = std::str::from_utf8(raw).map_err(|_| ParseError::InvalidUtf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines
        .next()
        .filter(|h| !h.trim().is_empty())
        .ok_or_else(|| ParseError::MalformedHeader("empty input".into()))?;
    let layout = parse_header(header)?;

    let mut utterances = Vec::new();
    let mut skipped = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_row(line, i + 1, &layout) {
            Ok(u) => utterances.push(u),
            Err(e) if strict => return Err(e),
            Err(e) => skipped.push(e),
        }
    }
    Ok((Session::new(session_id, utterances), skipped))
}

/// Parses a tab-separated transcript with a `start_time, stop_time, speaker, value`
/// header. Any bad row fails the whole transcript.
pub fn parse_transcript(raw: &[u8], session_id: &str) -> Result<Session, ParseError> {
    parse_impl(raw, session_id, true).map(|(s, _)| s)
}

/// Like [`parse_transcript`] but drops bad rows and returns them alongside the
/// session. Only header and encoding problems are fatal.
pub fn parse_transcript_lenient(raw: &[u8], session_id: &str) -> Result<(Session, Vec<ParseError>), ParseError> {
    parse_impl(raw, session_id, false)
}

/// Serialises a session in the transcript format read by [`parse_transcript`].
pub fn write_transcript(session: &Session) -> String {
    let mut out = COLUMNS.join("\t");
    out.push('\n');
    for u in &session.utterances {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", u.start_time, u.stop_time, u.speaker.as_label(), u.text);
    }
    out
}
