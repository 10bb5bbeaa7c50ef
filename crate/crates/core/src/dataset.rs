//! Label-encoded categorical datasets.
//!
//! Every feature column is mapped to dense codes `0..cardinality` in order of
//! first appearance. Categories seen fewer than `uncommon_threshold` times are
//! folded into a reserved `others` code that sits after every retained code.
//! Numeric columns can be quantile-binned before encoding.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the code that absorbs uncommon categories.
pub const OTHERS: &str = "others";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedDataset {
    n_features: usize,
    codes: Vec<u32>,
    labels: Vec<ClassId>,
    class_names: Vec<String>,
    class_index: Vec<Vec<usize>>,
    cardinalities: Vec<u32>,
    feature_names: Vec<String>,
    category_names: Vec<Vec<String>>,
    label_name: String,
}

impl EncodedDataset {
    /// Assembles a dataset from already-encoded rows. Class identifiers are
    /// indices into `class_names`; category names default to the code itself.
    pub fn from_codes(
        feature_names: Vec<String>,
        rows: &[Vec<u32>],
        labels: &[u32],
        class_names: Vec<String>,
    ) -> Result<Self> {
        let p = feature_names.len();
        let mut cardinalities = vec![0u32; p];
        let mut codes = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: p,
                    found: row.len(),
                });
            }
            for (j, &c) in row.iter().enumerate() {
                cardinalities[j] = cardinalities[j].max(c + 1);
            }
            codes.extend_from_slice(row);
        }
        let category_names = cardinalities
            .iter()
            .map(|&k| (0..k).map(|c| c.to_string()).collect())
            .collect();
        let labels: Vec<ClassId> = labels.iter().map(|&c| ClassId(c)).collect();
        Self::assemble(
            feature_names,
            codes,
            labels,
            class_names,
            cardinalities,
            category_names,
            "class".to_string(),
        )
    }

    /// Replaces the category names of `feature`, one per code.
    pub fn set_category_names(&mut self, feature: u32, names: Vec<String>) -> Result<()> {
        let j = feature as usize;
        if j >= self.n_features {
            return Err(Error::param(format!("feature {feature} out of range")));
        }
        if names.len() != self.cardinalities[j] as usize {
            return Err(Error::param(format!(
                "feature {feature} has {} codes, got {} names",
                self.cardinalities[j],
                names.len()
            )));
        }
        self.category_names[j] = names;
        Ok(())
    }

    fn assemble(
        feature_names: Vec<String>,
        codes: Vec<u32>,
        labels: Vec<ClassId>,
        class_names: Vec<String>,
        cardinalities: Vec<u32>,
        category_names: Vec<Vec<String>>,
        label_name: String,
    ) -> Result<Self> {
        let p = feature_names.len();
        if labels.is_empty() {
            return Err(Error::EmptyInput("dataset has no rows".into()));
        }
        if codes.len() != labels.len() * p {
            return Err(Error::param("code matrix does not match label count"));
        }
        let mut class_index = vec![Vec::new(); class_names.len()];
        for (i, c) in labels.iter().enumerate() {
            class_index
                .get_mut(c.index())
                .ok_or_else(|| Error::UnknownClass(c.0.to_string()))?
                .push(i);
        }
        // drop class names that never occur so every class is non-empty
        if class_index.iter().any(Vec::is_empty) {
            let keep: Vec<usize> = (0..class_names.len())
                .filter(|&c| !class_index[c].is_empty())
                .collect();
            let mut remap = vec![u32::MAX; class_names.len()];
            for (new, &old) in keep.iter().enumerate() {
                remap[old] = new as u32;
            }
            let labels = labels.iter().map(|c| ClassId(remap[c.index()])).collect();
            let class_names = keep.iter().map(|&c| class_names[c].clone()).collect();
            return Self::assemble(
                feature_names,
                codes,
                labels,
                class_names,
                cardinalities,
                category_names,
                label_name,
            );
        }
        Ok(EncodedDataset {
            n_features: p,
            codes,
            labels,
            class_names,
            class_index,
            cardinalities,
            feature_names,
            category_names,
            label_name,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.codes[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn label(&self, i: usize) -> ClassId {
        self.labels[i]
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> {
        (0..self.class_names.len() as u32).map(ClassId)
    }

    pub fn class_name(&self, c: ClassId) -> &str {
        &self.class_names[c.index()]
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.class_names
            .iter()
            .position(|n| n == name)
            .map(|i| ClassId(i as u32))
    }

    /// Sorted row indices `I^(c)`.
    pub fn class_rows(&self, c: ClassId) -> Result<&[usize]> {
        self.class_index
            .get(c.index())
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownClass(c.0.to_string()))
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn category_names(&self, feature: u32) -> &[String] {
        &self.category_names[feature as usize]
    }

    pub fn category_name(&self, feature: u32, code: u32) -> &str {
        self.category_names
            .get(feature as usize)
            .and_then(|names| names.get(code as usize))
            .map(String::as_str)
            .unwrap_or("?")
    }

    pub fn code_of(&self, feature: u32, name: &str) -> Option<u32> {
        self.category_names
            .get(feature as usize)?
            .iter()
            .position(|n| n == name)
            .map(|c| c as u32)
    }

    pub fn priors(&self) -> ClassPrior {
        let n = self.n_rows() as f64;
        ClassPrior {
            priors: self.class_index.iter().map(|r| r.len() as f64 / n).collect(),
        }
    }

    /// Writes the encoded form: integer codes per feature plus the class name.
    pub fn write_encoded_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.feature_names.clone();
        header.push(self.label_name.clone());
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            rec.push(self.class_name(self.label(i)).to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<encoded csv>", e))?;
        Ok(())
    }

    /// Reads the form produced by [`EncodedDataset::write_encoded_csv`],
    /// taking the integer codes verbatim.
    pub fn read_encoded_csv<R: Read>(input: R, label_column: &str) -> Result<Self> {
        let table = Table::read(input)?;
        let label_col = table.column(label_column)?;
        let feature_cols: Vec<usize> = (0..table.header.len()).filter(|&j| j != label_col).collect();
        let mut rows = Vec::with_capacity(table.records.len());
        let mut label_names = Vec::with_capacity(table.records.len());
        for (i, rec) in table.records.iter().enumerate() {
            let row = feature_cols
                .iter()
                .map(|&j| {
                    rec[j].trim().parse::<u32>().map_err(|_| Error::BadValue {
                        row: i + 1,
                        column: table.header[j].clone(),
                        message: format!("`{}` is not a code", rec[j]),
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            rows.push(row);
            label_names.push(rec[label_col].clone());
        }
        let (labels, class_names) = encode_labels(&label_names);
        let mut ds = Self::from_codes(
            feature_cols.iter().map(|&j| table.header[j].clone()).collect(),
            &rows,
            &labels,
            class_names,
        )?;
        ds.label_name = label_column.to_string();
        Ok(ds)
    }
}

/// Class proportions `|I^(c)| / N`, indexed by [`ClassId`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassPrior {
    pub priors: Vec<f64>,
}

impl ClassPrior {
    pub fn get(&self, c: ClassId) -> f64 {
        self.priors[c.index()]
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }
}

/// Options for [`ingest_csv_with`].
#[derive(Clone, Debug, Default)]
pub struct IngestOptions {
    pub label_column: String,
    /// Categories with fewer occurrences are merged into `others`; 0 disables.
    pub uncommon_threshold: usize,
    /// Numeric columns to quantile-bin, with the requested bin count.
    pub bin_numeric: Vec<(String, usize)>,
}

/// What happened to one binned column.
#[derive(Clone, Debug, PartialEq)]
pub struct BinReport {
    pub column: String,
    pub requested_bins: usize,
    pub effective_bins: usize,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub dataset: EncodedDataset,
    pub bins: Vec<BinReport>,
}

pub fn ingest_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    uncommon_threshold: usize,
) -> Result<EncodedDataset> {
    let opts = IngestOptions {
        label_column: label_column.to_string(),
        uncommon_threshold,
        bin_numeric: Vec::new(),
    };
    ingest_csv_with(path, &opts).map(|ing| ing.dataset)
}

pub fn ingest_csv_with(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, opts)
}

pub fn ingest_reader<R: Read>(input: R, opts: &IngestOptions) -> Result<Ingested> {
    let table = Table::read(input)?;
    let label_col = table.column(&opts.label_column)?;

    let mut binned: HashMap<usize, usize> = HashMap::new();
    for (name, n_bins) in &opts.bin_numeric {
        let j = table.column(name)?;
        if j == label_col {
            return Err(Error::param(format!("cannot bin the label column `{name}`")));
        }
        binned.insert(j, *n_bins);
    }

    let feature_cols: Vec<usize> = (0..table.header.len()).filter(|&j| j != label_col).collect();
    let n = table.records.len();
    let p = feature_cols.len();
    let mut codes = vec![0u32; n * p];
    let mut cardinalities = Vec::with_capacity(p);
    let mut category_names = Vec::with_capacity(p);
    let mut bins = Vec::new();

    for (fj, &j) in feature_cols.iter().enumerate() {
        let column: Vec<&str> = table.records.iter().map(|r| r[j].as_str()).collect();
        let (col_codes, names) = match binned.get(&j) {
            Some(&n_bins) => {
                let values = column
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.trim().parse::<f64>().map_err(|_| Error::BadValue {
                            row: i + 1,
                            column: table.header[j].clone(),
                            message: format!("`{v}` is not numeric"),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let b = bin_numeric(&values, n_bins)?;
                if b.effective_bins < n_bins {
                    log::warn!(
                        "column `{}`: {} bins requested, {} effective",
                        table.header[j],
                        n_bins,
                        b.effective_bins
                    );
                }
                bins.push(BinReport {
                    column: table.header[j].clone(),
                    requested_bins: n_bins,
                    effective_bins: b.effective_bins,
                });
                let names = b.labels(&values);
                (b.codes, names)
            }
            None => encode_categorical(&column, opts.uncommon_threshold),
        };
        for (i, c) in col_codes.into_iter().enumerate() {
            codes[i * p + fj] = c;
        }
        cardinalities.push(names.len() as u32);
        category_names.push(names);
    }

    let label_names: Vec<String> = table.records.iter().map(|r| r[label_col].clone()).collect();
    let (labels, class_names) = encode_labels(&label_names);
    let dataset = EncodedDataset::assemble(
        feature_cols.iter().map(|&j| table.header[j].clone()).collect(),
        codes,
        labels.into_iter().map(ClassId).collect(),
        class_names,
        cardinalities,
        category_names,
        opts.label_column.clone(),
    )?;
    Ok(Ingested { dataset, bins })
}

struct Table {
    header: Vec<String>,
    records: Vec<Vec<String>>,
}

impl Table {
    fn read<R: Read>(input: R) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = rdr.records();
        let header: Vec<String> = match records.next() {
            Some(h) => h?.iter().map(str::to_string).collect(),
            None => return Err(Error::EmptyInput("no header row".into())),
        };
        let mut rows = Vec::new();
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: header.len(),
                    found: rec.len(),
                });
            }
            rows.push(rec.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput("header present but no data rows".into()));
        }
        Ok(Table {
            header,
            records: rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }
}

fn encode_labels(names: &[String]) -> (Vec<u32>, Vec<String>) {
    let mut lookup: HashMap<&str, u32> = HashMap::new();
    let mut classes = Vec::new();
    let labels = names
        .iter()
        .map(|n| {
            *lookup.entry(n.as_str()).or_insert_with(|| {
                classes.push(n.clone());
                (classes.len() - 1) as u32
            })
        })
        .collect();
    (labels, classes)
}

/// First-appearance label encoding with uncommon categories folded into a
/// trailing `others` code.
fn encode_categorical(column: &[&str], uncommon_threshold: usize) -> (Vec<u32>, Vec<String>) {
    let mut order: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for &v in column {
        let e = counts.entry(v).or_insert(0);
        if *e == 0 {
            order.push(v);
        }
        *e += 1;
    }
    let mut names = Vec::new();
    let mut code_of: HashMap<&str, u32> = HashMap::new();
    let mut merged = Vec::new();
    for &v in &order {
        if counts[v] >= uncommon_threshold {
            code_of.insert(v, names.len() as u32);
            names.push(v.to_string());
        } else {
            merged.push(v);
        }
    }
    if !merged.is_empty() {
        let others = names.len() as u32;
        names.push(OTHERS.to_string());
        for v in merged {
            code_of.insert(v, others);
        }
    }
    (column.iter().map(|v| code_of[v]).collect(), names)
}

/// Result of equal-frequency binning.
#[derive(Clone, Debug, PartialEq)]
pub struct Binned {
    pub codes: Vec<u32>,
    pub effective_bins: usize,
}

impl Binned {
    /// `[min,max]` of the values that landed in each bin.
    pub fn labels(&self, values: &[f64]) -> Vec<String> {
        let mut lo = vec![f64::INFINITY; self.effective_bins];
        let mut hi = vec![f64::NEG_INFINITY; self.effective_bins];
        for (&c, &v) in self.codes.iter().zip(values) {
            lo[c as usize] = lo[c as usize].min(v);
            hi[c as usize] = hi[c as usize].max(v);
        }
        lo.iter().zip(&hi).map(|(l, h)| format!("[{l},{h}]")).collect()
    }
}

/// Equal-frequency quantile binning. Equal values always share a bin; when
/// ties or too few distinct values leave bins empty, the codes are compacted
/// and `effective_bins` reports how many remain.
pub fn bin_numeric(values: &[f64], n_bins: usize) -> Result<Binned> {
    if n_bins < 2 {
        return Err(Error::param("n_bins must be at least 2"));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to bin".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::param(format!("cannot bin non-finite value {bad}")));
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    // A value's bin is decided by the rank of its first occurrence.
    let mut raw = vec![0usize; n];
    let mut start = 0;
    while start < n {
        let v = values[order[start]];
        let mut end = start;
        while end < n && values[order[end]] == v {
            end += 1;
        }
        let bin = start * n_bins / n;
        for &i in &order[start..end] {
            raw[i] = bin;
        }
        start = end;
    }

    let mut used = vec![false; n_bins];
    for &b in &raw {
        used[b] = true;
    }
    let mut compact = vec![0u32; n_bins];
    let mut next = 0u32;
    for b in 0..n_bins {
        if used[b] {
            compact[b] = next;
            next += 1;
        }
    }
    Ok(Binned {
        codes: raw.iter().map(|&b| compact[b]).collect(),
        effective_bins: next as usize,
    })
}

/// Uniform draw from `I^(c)`, with replacement across calls.
pub fn sample_row<R: Rng + ?Sized>(ds: &EncodedDataset, class: ClassId, rng: &mut R) -> Result<usize> {
    let rows = ds.class_rows(class)?;
    Ok(rows[rng.gen_range(0..rows.len())])
}
