//! Tabular CSV ingestion: schema-driven feature expansion, min-max scaling,
//! and the train/test split that keeps the training set purely normal.
//!
//! A schema file declares the feature columns, one per line:
//!
//! ```text
//! duration continuous
//! proto    categorical tcp udp icmp
//! ```
//!
//! Categorical columns expand to one-hot groups named `col=level`. Continuous
//! columns are min-max scaled to [0, 1] over the rows they are fit on; a
//! constant column maps to 0. One-hot columns are never rescaled. The label
//! column (0 normal, 1 anomalous) lives in the CSV but not in the schema.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seeds::{stream_rng, streams};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub enum ColKind {
    Continuous,
    /// Allowed level names, in declaration order (fixes one-hot layout).
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColKind,
}

/// Feature-column declarations in the order features are laid out.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Schema> {
        let mut columns: Vec<ColumnSpec> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            let name = tok.next().expect("non-empty line").to_string();
            let err = |msg: String| Error::Config(format!("schema line {}: {msg}", lineno + 1));
            if columns.iter().any(|c| c.name == name) {
                return Err(err(format!("duplicate column {name:?}")));
            }
            let kind = match tok.next() {
                Some("continuous") => {
                    if tok.next().is_some() {
                        return Err(err("continuous takes no arguments".into()));
                    }
                    ColKind::Continuous
                }
                Some("categorical") => {
                    let levels: Vec<String> = tok.map(str::to_string).collect();
                    if levels.is_empty() {
                        return Err(err(format!("categorical {name:?} needs levels")));
                    }
                    for (i, l) in levels.iter().enumerate() {
                        if levels[..i].contains(l) {
                            return Err(err(format!("duplicate level {l:?} in {name:?}")));
                        }
                    }
                    ColKind::Categorical(levels)
                }
                other => {
                    return Err(err(format!(
                        "column {name:?} needs `continuous` or `categorical`, got {other:?}"
                    )))
                }
            };
            columns.push(ColumnSpec { name, kind });
        }
        if columns.is_empty() {
            return Err(Error::Config("schema declares no columns".into()));
        }
        Ok(Schema { columns })
    }

    pub fn load(path: &Path) -> Result<Schema> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse(&text)
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    /// Width after one-hot expansion.
    pub fn expanded_dim(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.kind {
                ColKind::Continuous => 1,
                ColKind::Categorical(levels) => levels.len(),
            })
            .sum()
    }

    /// Expanded feature names: `col` for continuous, `col=level` for one-hot.
    pub fn expanded_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.expanded_dim());
        for c in &self.columns {
            match &c.kind {
                ColKind::Continuous => out.push(c.name.clone()),
                ColKind::Categorical(levels) => {
                    out.extend(levels.iter().map(|l| format!("{}={l}", c.name)));
                }
            }
        }
        out
    }
}

/// Per-expanded-column affine scaling: `Some((min, range))` for scaled
/// continuous columns (range 0 means the column was constant and maps to 0),
/// `None` for one-hot columns that pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    cols: Vec<Option<(f64, f64)>>,
}

impl Scaler {
    /// Fit min/range per continuous column over `rows` (expanded, unscaled).
    fn fit(schema: &Schema, rows: &[Vec<f64>]) -> Scaler {
        let dim = schema.expanded_dim();
        let mut cols = Vec::with_capacity(dim);
        let mut j = 0;
        for c in &schema.columns {
            match &c.kind {
                ColKind::Continuous => {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for r in rows {
                        lo = lo.min(r[j]);
                        hi = hi.max(r[j]);
                    }
                    cols.push(Some((lo, hi - lo)));
                    j += 1;
                }
                ColKind::Categorical(levels) => {
                    for _ in levels {
                        cols.push(None);
                        j += 1;
                    }
                }
            }
        }
        Scaler { cols }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.cols)
            .map(|(&v, c)| match c {
                Some((min, range)) if *range > 0.0 => (v - min) / range,
                Some(_) => 0.0,
                None => v,
            })
            .collect()
    }

    /// Inverse of `apply_row` for non-constant columns; constant columns
    /// recover their fitted minimum.
    pub fn unscale_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.cols)
            .map(|(&v, c)| match c {
                Some((min, range)) if *range > 0.0 => v * range + min,
                Some((min, _)) => *min,
                None => v,
            })
            .collect()
    }
}

/// A loaded tabular dataset: expanded raw rows, the scaler fit on them, the
/// scaled feature matrix, and binary labels in file order.
#[derive(Debug, Clone)]
pub struct TabularDataset {
    schema: Schema,
    raw: Vec<Vec<f64>>,
    labels: Vec<u8>,
    scaler: Scaler,
    features: Tensor,
}

impl TabularDataset {
    fn from_raw(schema: Schema, raw: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<TabularDataset> {
        if raw.is_empty() {
            return Err(Error::Config("dataset has no rows".into()));
        }
        let scaler = Scaler::fit(&schema, &raw);
        let dim = schema.expanded_dim();
        let mut data = Vec::with_capacity(raw.len() * dim);
        for r in &raw {
            data.extend(scaler.apply_row(r));
        }
        let features = Tensor::new(vec![raw.len(), dim], data)?;
        Ok(TabularDataset {
            schema,
            raw,
            labels,
            scaler,
            features,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schema.expanded_dim()
    }

    /// Scaled features, rows in input order.
    pub fn features(&self) -> &Tensor {
        &self.features
    }

    /// Expanded but unscaled rows.
    pub fn raw_rows(&self) -> &[Vec<f64>] {
        &self.raw
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn n_anomalous(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

/// Load a CSV with a header row against a schema. Every schema column and
/// `label_col` must appear in the header; other CSV columns are rejected so
/// typos fail loudly. Scaling is fit over all loaded rows.
pub fn load_csv(path: &Path, schema: &Schema, label_col: &str) -> Result<TabularDataset> {
    if schema.columns.iter().any(|c| c.name == label_col) {
        return Err(Error::Config(format!(
            "label column {label_col:?} must not be declared in the schema"
        )));
    }
    let mut reader = open_csv(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();

    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| malformed(path, 1, format!("missing column {name:?} in header")))
    };
    let label_idx = col_index(label_col)?;
    let mut field_idx = Vec::with_capacity(schema.columns.len());
    for c in &schema.columns {
        field_idx.push(col_index(&c.name)?);
    }
    for (i, h) in headers.iter().enumerate() {
        if i != label_idx && !field_idx.contains(&i) {
            return Err(malformed(
                path,
                1,
                format!("column {h:?} is not in the schema"),
            ));
        }
    }

    let dim = schema.expanded_dim();
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let rec = rec.map_err(|e| malformed(path, line, e.to_string()))?;
        if rec.len() != headers.len() {
            return Err(malformed(
                path,
                line,
                format!("expected {} fields, got {}", headers.len(), rec.len()),
            ));
        }
        let mut row = Vec::with_capacity(dim);
        for (c, &fi) in schema.columns.iter().zip(&field_idx) {
            let field = rec.get(fi).expect("length checked").trim();
            match &c.kind {
                ColKind::Continuous => {
                    let v: f64 = field.parse().map_err(|_| {
                        malformed(
                            path,
                            line,
                            format!("column {:?}: expected a number, got {field:?}", c.name),
                        )
                    })?;
                    if !v.is_finite() {
                        return Err(malformed(
                            path,
                            line,
                            format!("column {:?}: non-finite value {field:?}", c.name),
                        ));
                    }
                    row.push(v);
                }
                ColKind::Categorical(levels) => {
                    let hit = levels.iter().position(|l| l == field).ok_or_else(|| {
                        Error::UnknownCategory {
                            column: c.name.clone(),
                            value: field.to_string(),
                        }
                    })?;
                    for k in 0..levels.len() {
                        row.push(if k == hit { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        let label_field = rec.get(label_idx).expect("length checked").trim();
        let label = match label_field {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(malformed(
                    path,
                    line,
                    format!("label must be 0 or 1, got {other:?}"),
                ))
            }
        };
        raw.push(row);
        labels.push(label);
    }
    TabularDataset::from_raw(schema.clone(), raw, labels)
}

fn malformed(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Shuffled train/test split for anomaly detection. After shuffling with the
/// split stream of `seed`, the first `floor(train_fraction * n)` rows are the
/// training candidates; anomalous candidates are moved to the test side so
/// training data is purely normal, while the test side keeps both classes.
/// Scaling is refit on the training rows and applied to both sides.
pub fn split(
    ds: &TabularDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(TabularDataset, TabularDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, streams::SPLIT));
    let n_train = (train_fraction * n as f64).floor() as usize;

    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos < n_train && ds.labels[i] == 0 {
            train_idx.push(i);
        } else {
            test_idx.push(i);
        }
    }
    if train_idx.is_empty() {
        return Err(Error::Infeasible(
            "split produced an empty training set (no normal rows drawn)".into(),
        ));
    }
    if test_idx.is_empty() {
        return Err(Error::Infeasible("split produced an empty test set".into()));
    }

    let take = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>) {
        (
            idx.iter().map(|&i| ds.raw[i].clone()).collect(),
            idx.iter().map(|&i| ds.labels[i]).collect(),
        )
    };
    let (train_raw, train_labels) = take(&train_idx);
    let (test_raw, test_labels) = take(&test_idx);

    // Refit on training rows only, then impose that scaler on the test side.
    let train = TabularDataset::from_raw(ds.schema.clone(), train_raw, train_labels)?;
    let scaler = train.scaler.clone();
    let dim = ds.dim();
    let mut data = Vec::with_capacity(test_raw.len() * dim);
    for r in &test_raw {
        data.extend(scaler.apply_row(r));
    }
    let features = Tensor::new(vec![test_raw.len(), dim], data)?;
    let test = TabularDataset {
        schema: ds.schema.clone(),
        raw: test_raw,
        labels: test_labels,
        scaler,
        features,
    };
    Ok((train, test))
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => malformed(path, 1, format!("{other:?}")),
        })
}

/// Read a plain numeric CSV whose header names a `label` column; every other
/// column is parsed as f64 feature data in header order.
pub fn load_numeric_csv(path: &Path) -> Result<(Tensor, Vec<u8>)> {
    let mut reader = open_csv(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| malformed(path, 1, "missing `label` column"))?;
    let dim = headers.len() - 1;
    if dim == 0 {
        return Err(malformed(path, 1, "no feature columns"));
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut nrows = 0;
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| malformed(path, line, e.to_string()))?;
        if rec.len() != headers.len() {
            return Err(malformed(
                path,
                line,
                format!("expected {} fields, got {}", headers.len(), rec.len()),
            ));
        }
        for (j, field) in rec.iter().enumerate() {
            if j == label_idx {
                labels.push(match field.trim() {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(malformed(
                            path,
                            line,
                            format!("label must be 0 or 1, got {other:?}"),
                        ))
                    }
                });
            } else {
                let v: f64 = field.trim().parse().map_err(|_| {
                    malformed(path, line, format!("expected a number, got {field:?}"))
                })?;
                data.push(v);
            }
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(malformed(path, 1, "no data rows"));
    }
    Ok((Tensor::new(vec![nrows, dim], data)?, labels))
}

/// Write features + labels as a numeric CSV with header `x0..x{d-1},label`.
pub fn write_numeric_csv(path: &Path, x: &Tensor, labels: &[u8]) -> Result<()> {
    if x.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} rows vs {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    let mut out = String::new();
    for j in 0..x.ncols() {
        out.push_str(&format!("x{j},"));
    }
    out.push_str("label\n");
    for (i, &label) in labels.iter().enumerate() {
        for v in x.row(i) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{label}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA_TEXT: &str = "\
# feature declarations
amount continuous
proto categorical tcp udp icmp
flag continuous
";

    fn write_temp(content: &str, name: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn schema_parses_and_expands() {
        let s = Schema::parse(SCHEMA_TEXT).unwrap();
        assert_eq!(s.columns().len(), 3);
        assert_eq!(s.expanded_dim(), 5);
        assert_eq!(
            s.expanded_names(),
            vec!["amount", "proto=tcp", "proto=udp", "proto=icmp", "flag"]
        );
    }

    #[test]
    fn schema_rejects_bad_declarations() {
        assert!(Schema::parse("").is_err());
        assert!(Schema::parse("a continuous\na continuous\n").is_err());
        assert!(Schema::parse("a categorical\n").is_err());
        assert!(Schema::parse("a categorical x x\n").is_err());
        assert!(Schema::parse("a numeric\n").is_err());
        assert!(Schema::parse("a continuous extra\n").is_err());
    }

    #[test]
    fn load_scales_minmax_and_one_hot() {
        // amount spans {2, 4, 6} -> scaled {0, 0.5, 1}; flag is constant -> 0.
        let csv = "\
amount,proto,flag,label
2,tcp,7,0
4,udp,7,0
6,icmp,7,1
";
        let (_d, path) = write_temp(csv, "t.csv");
        let schema = Schema::parse(SCHEMA_TEXT).unwrap();
        let ds = load_csv(&path, &schema, "label").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 5);
        assert_eq!(ds.labels(), &[0, 0, 1]);
        assert_eq!(ds.features().row(0), &[0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(ds.features().row(1), &[0.5, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(ds.features().row(2), &[1.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn scaling_round_trips() {
        let csv = "\
amount,proto,flag,label
-3.25,tcp,1.5,0
17.75,udp,-2.5,0
4.125,icmp,0.75,1
";
        let (_d, path) = write_temp(csv, "t.csv");
        let schema = Schema::parse(SCHEMA_TEXT).unwrap();
        let ds = load_csv(&path, &schema, "label").unwrap();
        for (i, raw) in ds.raw_rows().iter().enumerate() {
            let back = ds.scaler().unscale_row(ds.features().row(i));
            for (a, b) in back.iter().zip(raw) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn load_reports_precise_errors() {
        let schema = Schema::parse(SCHEMA_TEXT).unwrap();

        let (_d1, p1) = write_temp("amount,proto,flag,label\n1,bogus,2,0\n", "t.csv");
        match load_csv(&p1, &schema, "label") {
            Err(Error::UnknownCategory { column, value }) => {
                assert_eq!(column, "proto");
                assert_eq!(value, "bogus");
            }
            other => panic!("expected unknown category, got {other:?}"),
        }

        let (_d2, p2) = write_temp("amount,proto,flag,label\nxyz,tcp,2,0\n", "t.csv");
        match load_csv(&p2, &schema, "label") {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed, got {other:?}"),
        }

        // Ragged row.
        let (_d3, p3) = write_temp("amount,proto,flag,label\n1,tcp,2,0\n1,tcp\n", "t.csv");
        match load_csv(&p3, &schema, "label") {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed, got {other:?}"),
        }

        // Header problems are line-1 errors.
        let (_d4, p4) = write_temp("amount,proto,label\n1,tcp,0\n", "t.csv");
        match load_csv(&p4, &schema, "label") {
            Err(Error::Malformed { line, msg, .. }) => {
                assert_eq!(line, 1);
                assert!(msg.contains("flag"), "{msg}");
            }
            other => panic!("expected malformed header, got {other:?}"),
        }
        let (_d5, p5) = write_temp("amount,proto,flag,extra,label\n1,tcp,2,9,0\n", "t.csv");
        match load_csv(&p5, &schema, "label") {
            Err(Error::Malformed { line, msg, .. }) => {
                assert_eq!(line, 1);
                assert!(msg.contains("extra"), "{msg}");
            }
            other => panic!("expected malformed header, got {other:?}"),
        }

        let (_d6, p6) = write_temp("amount,proto,flag,label\n1,tcp,2,7\n", "t.csv");
        assert!(matches!(
            load_csv(&p6, &schema, "label"),
            Err(Error::Malformed { .. })
        ));

        // Missing file surfaces as an io error.
        let bogus = Path::new("/nonexistent/nope.csv");
        assert!(matches!(
            load_csv(bogus, &schema, "label"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn header_order_does_not_matter() {
        let csv = "\
label,flag,proto,amount
0,7,tcp,2
1,8,udp,4
";
        let (_d, path) = write_temp(csv, "t.csv");
        let schema = Schema::parse(SCHEMA_TEXT).unwrap();
        let ds = load_csv(&path, &schema, "label").unwrap();
        // Feature order follows the schema, not the file.
        assert_eq!(ds.raw_rows()[0], vec![2.0, 1.0, 0.0, 0.0, 7.0]);
        assert_eq!(ds.labels(), &[0, 1]);
    }

    fn synthetic_dataset(n: usize, n_anomalous: usize) -> TabularDataset {
        let schema = Schema::parse("a continuous\nb continuous\n").unwrap();
        let mut raw = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            raw.push(vec![i as f64, (i * i % 17) as f64]);
            labels.push(u8::from(i < n_anomalous));
        }
        TabularDataset::from_raw(schema, raw, labels).unwrap()
    }

    #[test]
    fn split_moves_anomalies_to_test() {
        let ds = synthetic_dataset(100, 15);
        let (train, test) = split(&ds, 0.8, 7).unwrap();
        // Partition: nothing lost, nothing duplicated.
        assert_eq!(train.len() + test.len(), 100);
        assert_eq!(train.n_anomalous(), 0);
        assert_eq!(test.n_anomalous(), 15);
        // All 15 anomalies land in test, so test has at least 20 rows
        // (the 20 non-train slots, plus any anomalous train candidates).
        assert!(test.len() >= 20);
        let mut seen: Vec<Vec<u64>> = Vec::new();
        for r in train.raw_rows().iter().chain(test.raw_rows()) {
            let key: Vec<u64> = r.iter().map(|v| v.to_bits()).collect();
            assert!(!seen.contains(&key), "row duplicated across the split");
            seen.push(key);
        }
    }

    #[test]
    fn split_on_all_normal_keeps_exact_sizes() {
        let ds = synthetic_dataset(100, 0);
        let (train, test) = split(&ds, 0.8, 3).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
    }

    #[test]
    fn split_is_seeded_and_refits_scaler() {
        let ds = synthetic_dataset(60, 10);
        let (tr1, te1) = split(&ds, 0.7, 11).unwrap();
        let (tr2, te2) = split(&ds, 0.7, 11).unwrap();
        assert_eq!(tr1.raw_rows(), tr2.raw_rows());
        assert_eq!(te1.features().data(), te2.features().data());
        let (tr3, _) = split(&ds, 0.7, 12).unwrap();
        assert_ne!(tr1.raw_rows(), tr3.raw_rows());
        // Scaler is fit on the training side: train features stay in [0, 1],
        // test features may exceed it where test values leave the train range.
        assert!(tr1.features().data().iter().all(|v| (0.0..=1.0).contains(v)));
        // Test rows are scaled with the train scaler, not their own.
        let back = te1.scaler().unscale_row(te1.features().row(0));
        for (a, b) in back.iter().zip(&te1.raw_rows()[0]) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert_eq!(te1.scaler(), tr1.scaler());
    }

    #[test]
    fn split_validates_fraction_and_degenerate_outcomes() {
        let ds = synthetic_dataset(10, 0);
        assert!(split(&ds, 0.0, 1).is_err());
        assert!(split(&ds, 1.0, 1).is_err());
        // Every row anomalous: training side empties out.
        let all_anom = synthetic_dataset(10, 10);
        assert!(split(&all_anom, 0.8, 1).is_err());
    }

    #[test]
    fn numeric_csv_round_trips() {
        let x = Tensor::from_rows(&[vec![0.125, -3.5], vec![2.25, 0.0625]]).unwrap();
        let labels = vec![0u8, 1];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("n.csv");
        write_numeric_csv(&path, &x, &labels).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "x0,x1,label");
        let (x2, l2) = load_numeric_csv(&path).unwrap();
        assert_eq!(x2.data(), x.data());
        assert_eq!(l2, labels);
    }

    #[test]
    fn numeric_csv_rejects_bad_input() {
        let (_d1, p1) = write_temp("x0,x1\n1,2\n", "n.csv");
        assert!(matches!(
            load_numeric_csv(&p1),
            Err(Error::Malformed { line: 1, .. })
        ));
        let (_d2, p2) = write_temp("x0,label\nfoo,0\n", "n.csv");
        assert!(matches!(
            load_numeric_csv(&p2),
            Err(Error::Malformed { line: 2, .. })
        ));
        let (_d3, p3) = write_temp("x0,label\n", "n.csv");
        assert!(load_numeric_csv(&p3).is_err());
    }
}
