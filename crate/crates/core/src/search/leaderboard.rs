use serde::{Deserialize, Serialize};

use super::{format_assignment, parse_assignment, ConfigFailure, Confusion, EvalResult, SearchError};

pub const LEADERBOARD_HEADER: [&str; 9] = ["rank", "ordinal", "accuracy", "tp", "fp", "tn", "fn", "features", "params"];

/// Evaluated configurations ranked by accuracy (descending), then ordinal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    results: Vec<EvalResult>,
    failures: Vec<ConfigFailure>,
    spec_digest: String,
}

fn rank_order(a: &EvalResult, b: &EvalResult) -> std::cmp::Ordering {
    b.accuracy.total_cmp(&a.accuracy).then(a.ordinal.cmp(&b.ordinal))
}

impl Leaderboard {
    pub fn new(mut results: Vec<EvalResult>, failures: Vec<ConfigFailure>, spec_digest: String) -> Self {
        results.sort_by(rank_order);
        Self { results, failures, spec_digest }
    }

    pub fn results(&self) -> &[EvalResult] {
        &self.results
    }

    pub fn failures(&self) -> &[ConfigFailure] {
        &self.failures
    }

    pub fn spec_digest(&self) -> &str {
        &self.spec_digest
    }

    pub fn best(&self) -> Option<&EvalResult> {
        self.results.first()
    }

    /// The first `k` entries, or all of them when `k` is larger.
    pub fn top(&self, k: usize) -> &[EvalResult] {
        &self.results[..k.min(self.results.len())]
    }

    pub fn to_csv(&self) -> String {
        write_csv(&self.results)
    }

    /// Aligned plain-text table of the top `k` entries.
    pub fn top_k_table(&self, k: usize) -> String {
        let mut rows =
            vec![["rank", "accuracy", "tp", "fp", "tn", "fn", "features", "params"].map(String::from).to_vec()];
        for (i, r) in self.top(k).iter().enumerate() {
            let c = r.confusion;
            rows.push(vec![
                (i + 1).to_string(),
                r.accuracy.to_string(),
                c.tp.to_string(),
                c.fp.to_string(),
                c.tn.to_string(),
                c.fn_.to_string(),
                r.feature_subset.join(", "),
                format_assignment(&r.params),
            ]);
        }
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row.iter().zip(&widths).map(|(cell, &w)| format!("{cell:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn write_csv(results: &[EvalResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LEADERBOARD_HEADER).expect("in-memory write");
    for (i, r) in results.iter().enumerate() {
        let c = r.confusion;
        w.write_record([
            (i + 1).to_string(),
            r.ordinal.to_string(),
            r.accuracy.to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
            r.feature_subset.join(";"),
            format_assignment(&r.params),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// Reads results back from [`Leaderboard::to_csv`] output, in file order.
pub fn parse_leaderboard_csv(text: &str) -> Result<Vec<EvalResult>, SearchError> {
    let err = |line: usize, detail: String| SearchError::Csv { line, detail };
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?;
    if headers.iter().ne(LEADERBOARD_HEADER) {
        return Err(err(1, format!("header must be {}", LEADERBOARD_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| err(line, e.to_string()))?;
        let num = |idx: usize| -> Result<usize, SearchError> {
            record[idx]
                .parse()
                .map_err(|_| err(line, format!("{} {:?} is not a count", LEADERBOARD_HEADER[idx], &record[idx])))
        };
        if num(0)? != i + 1 {
            return Err(err(line, format!("rank {} out of sequence", &record[0])));
        }
        let confusion = Confusion { tp: num(3)?, fp: num(4)?, tn: num(5)?, fn_: num(6)? };
        out.push(EvalResult {
            ordinal: num(1)? as u64,
            accuracy: record[2].parse().map_err(|_| err(line, format!("bad accuracy {:?}", &record[2])))?,
            confusion,
            feature_subset: if record[7].is_empty() {
                Vec::new()
            } else {
                record[7].split(';').map(str::to_string).collect()
            },
            params: parse_assignment(&record[8]).map_err(|d| err(line, d))?,
        });
    }
    Ok(out)
}
