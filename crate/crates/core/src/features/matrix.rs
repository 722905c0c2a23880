use std::collections::BTreeSet;

use super::{FeatureError, FeatureVector};
use crate::corpus::LabelTable;
use crate::models::Matrix;

/// Labelled rows of feature values, one row per session.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    session_ids: Vec<String>,
    feature_keys: Vec<String>,
    values: Vec<f64>,
    labels: Vec<u8>,
}

/// Assembles the `selected_keys` columns for every vector, rows in input order.
pub fn build_matrix(
    vectors: &[FeatureVector],
    labels: &LabelTable,
    selected_keys: &[String],
) -> Result<FeatureMatrix, FeatureError> {
    let Some(first) = vectors.first() else {
        return Ok(FeatureMatrix::empty(selected_keys.to_vec()));
    };
    let columns: Vec<usize> = selected_keys
        .iter()
        .map(|k| first.keys().iter().position(|x| x == k).ok_or_else(|| FeatureError::UnknownFeatureKey(k.clone())))
        .collect::<Result<_, _>>()?;

    let mut m = FeatureMatrix::empty(selected_keys.to_vec());
    for v in vectors {
        if v.keys() != first.keys() {
            return Err(FeatureError::KeyMismatch(v.session_id.clone()));
        }
        let label = labels.get(&v.session_id).ok_or_else(|| FeatureError::UnlabeledSession(v.session_id.clone()))?;
        m.session_ids.push(v.session_id.clone());
        m.values.extend(columns.iter().map(|&c| v.values()[c]));
        m.labels.push(label.bit());
    }
    Ok(m)
}

impl FeatureMatrix {
    fn empty(feature_keys: Vec<String>) -> Self {
        Self { session_ids: Vec::new(), feature_keys, values: Vec::new(), labels: Vec::new() }
    }

    pub fn n_rows(&self) -> usize {
        self.session_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_keys.len()
    }

    pub fn feature_keys(&self) -> &[String] {
        &self.feature_keys
    }

    pub fn session_ids(&self) -> &[String] {
        &self.session_ids
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_cols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn column_index(&self, key: &str) -> Result<usize, FeatureError> {
        self.feature_keys.iter().position(|k| k == key).ok_or_else(|| FeatureError::UnknownFeatureKey(key.to_string()))
    }

    pub fn column(&self, key: &str) -> Result<Vec<f64>, FeatureError> {
        let c = self.column_index(key)?;
        Ok((0..self.n_rows()).map(|i| self.row(i)[c]).collect())
    }

    /// Dense model input holding the named columns in the given order.
    pub fn select<S: AsRef<str>>(&self, keys: &[S]) -> Result<Matrix, FeatureError> {
        let cols: Vec<usize> = keys.iter().map(|k| self.column_index(k.as_ref())).collect::<Result<_, _>>()?;
        self.select_indices(&cols)
    }

    pub fn select_indices(&self, cols: &[usize]) -> Result<Matrix, FeatureError> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols()) {
            return Err(FeatureError::UnknownFeatureKey(format!("#{bad}")));
        }
        let mut data = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Matrix::new(self.n_rows(), cols.len(), data).expect("sizes agree by construction"))
    }

    /// Rows whose session id is in `ids`, keeping the current row order.
    pub fn restrict_rows(&self, ids: &BTreeSet<String>) -> FeatureMatrix {
        let mut m = FeatureMatrix::empty(self.feature_keys.clone());
        for i in 0..self.n_rows() {
            if ids.contains(&self.session_ids[i]) {
                m.session_ids.push(self.session_ids[i].clone());
                m.values.extend_from_slice(self.row(i));
                m.labels.push(self.labels[i]);
            }
        }
        m
    }

    /// `session_id,label,<feature keys...>` with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = ["session_id", "label"].into_iter().chain(self.feature_keys.iter().map(String::as_str));
        w.write_record(header).expect("in-memory write");
        for i in 0..self.n_rows() {
            let mut record = vec![self.session_ids[i].clone(), self.labels[i].to_string()];
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, FeatureError> {
        let err = |line: usize, detail: String| FeatureError::Csv { line, detail };
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
        if headers.get(0) != Some("session_id") || headers.get(1) != Some("label") {
            return Err(err(1, "header must start with session_id,label".into()));
        }
        let mut m = FeatureMatrix::empty(headers.iter().skip(2).map(str::to_string).collect());
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| err(line, e.to_string()))?;
            if record.len() != m.n_cols() + 2 {
                return Err(err(line, format!("expected {} fields, found {}", m.n_cols() + 2, record.len())));
            }
            let label = match &record[1] {
                "0" => 0,
                "1" => 1,
                other => return Err(err(line, format!("label {other:?} is not 0 or 1"))),
            };
            for cell in record.iter().skip(2) {
                let v: f64 = cell.parse().map_err(|_| err(line, format!("bad value {cell:?}")))?;
                if !v.is_finite() {
                    return Err(err(line, format!("non-finite value {cell:?}")));
                }
                m.values.push(v);
            }
            m.session_ids.push(record[0].to_string());
            m.labels.push(label);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{clean_session, generate_synthetic_corpus, CleaningPolicy, SynthSpec};
    use crate::features::FeatureExtractor;

    fn vectors(n: usize) -> (Vec<FeatureVector>, LabelTable, FeatureExtractor) {
        let fx = FeatureExtractor::english();
        let sc = generate_synthetic_corpus(&SynthSpec::new(n, 0.4, 1.0, 5)).unwrap();
        let policy = CleaningPolicy::default();
        let vs = sc
            .corpus
            .sessions()
            .iter()
            .map(|s| {
                let mut s = s.clone();
                clean_session(&mut s, &policy);
                fx.extract(&s)
            })
            .collect();
        (vs, sc.labels, fx)
    }

    fn keys(k: &[&str]) -> Vec<String> {
        k.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn shape_and_unknown_keys() {
        let (vs, labels, _) = vectors(5);
        let sel = keys(&["avg_response_time", "speech_speed", "q_dream_job", "fp_avg"]);
        let m = build_matrix(&vs, &labels, &sel).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (5, 4));
        assert_eq!(
            build_matrix(&vs, &labels, &keys(&["avg_respnse_time"])),
            Err(FeatureError::UnknownFeatureKey("avg_respnse_time".into()))
        );
    }

    #[test]
    fn columns_match_per_session_values() {
        let (vs, labels, fx) = vectors(8);
        let m = build_matrix(&vs, &labels, fx.feature_keys()).unwrap();
        for key in fx.feature_keys() {
            let col = m.column(key).unwrap();
            let direct: Vec<f64> = vs.iter().map(|v| v.get(key).unwrap()).collect();
            assert_eq!(col, direct, "{key}");
        }
        assert_eq!(m.labels(), vs.iter().map(|v| labels.get(&v.session_id).unwrap().bit()).collect::<Vec<_>>());
    }

    #[test]
    fn unlabeled_rows_are_refused() {
        let (vs, _, fx) = vectors(3);
        assert!(matches!(
            build_matrix(&vs, &LabelTable::default(), fx.feature_keys()),
            Err(FeatureError::UnlabeledSession(_))
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let (vs, labels, fx) = vectors(6);
        let m = build_matrix(&vs, &labels, fx.feature_keys()).unwrap();
        let text = m.to_csv();
        let back = FeatureMatrix::from_csv(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn restrict_and_select() {
        let (vs, labels, fx) = vectors(6);
        let m = build_matrix(&vs, &labels, fx.feature_keys()).unwrap();
        let ids: BTreeSet<String> = [m.session_ids()[1].clone(), m.session_ids()[4].clone()].into();
        let sub = m.restrict_rows(&ids);
        assert_eq!(sub.session_ids(), [m.session_ids()[1].clone(), m.session_ids()[4].clone()]);
        let x = sub.select(&["fp_avg", "avg_nouns"]).unwrap();
        assert_eq!(x.row(1), [m.column("fp_avg").unwrap()[4], m.column("avg_nouns").unwrap()[4]]);
    }
}
