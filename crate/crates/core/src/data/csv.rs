//! CSV encodings of the domain types.
//!
//! All files are UTF-8, comma separated, with a header row and the label in
//! the first column. Numbers are written with Rust's shortest round-trip
//! formatting, so a save/load cycle reproduces every value exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use super::{Configuration, DissimilarityMatrix, FeatureMatrix};
use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

fn records<R: Read>(reader: R) -> Result<Vec<(usize, StringRecord)>> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::MalformedCsv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        // skip blank lines and `#` comments
        if rec.is_empty() || (rec.len() == 1 && rec[0].is_empty()) || rec[0].starts_with('#') {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_number<T: Scalar>(cell: &str, line: usize) -> Result<T> {
    cell.parse::<T>().map_err(|_| Error::MalformedCsv {
        line,
        message: format!("`{cell}` is not a number"),
    })
}

fn expect_width(rec: &StringRecord, width: usize, line: usize) -> Result<()> {
    if rec.len() != width {
        return Err(Error::MalformedCsv {
            line,
            message: format!("expected {width} fields, found {}", rec.len()),
        });
    }
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Parses a labelled square grid: header `label,<l1>,…,<ln>`, then one row
/// per stimulus in the same order as the header.
pub fn read_dissimilarity_csv<T: Scalar, R: Read>(reader: R) -> Result<DissimilarityMatrix<T>> {
    let recs = records(reader)?;
    let (header_line, header) = recs.first().ok_or(Error::EmptyInput)?;
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    if recs.len() - 1 != n {
        return Err(Error::MalformedCsv {
            line: *header_line,
            message: format!("header names {n} stimuli but {} data rows follow", recs.len() - 1),
        });
    }
    let mut values = Matrix::zeros(n, n);
    for (i, (line, rec)) in recs[1..].iter().enumerate() {
        expect_width(rec, n + 1, *line)?;
        if rec[0] != labels[i] {
            return Err(Error::MalformedCsv {
                line: *line,
                message: format!("row label `{}` does not match column label `{}`", &rec[0], labels[i]),
            });
        }
        for j in 0..n {
            values[(i, j)] = parse_number(&rec[j + 1], *line)?;
        }
    }
    DissimilarityMatrix::new(labels, values)
}

pub fn load_dissimilarity_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<DissimilarityMatrix<T>> {
    read_dissimilarity_csv(open(path.as_ref())?)
}

pub fn save_dissimilarity_csv<T: Scalar>(matrix: &DissimilarityMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = WriterBuilder::new().from_writer(create(path)?);
    let wrap = |e: csv::Error| Error::io(path, e.into());
    let mut header = vec!["label".to_string()];
    header.extend(matrix.labels().iter().cloned());
    w.write_record(&header).map_err(wrap)?;
    for (i, label) in matrix.labels().iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..matrix.n()).map(|j| matrix.get(i, j).to_string()));
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses `label,dim_1,…,dim_t`.
pub fn read_configuration_csv<T: Scalar, R: Read>(reader: R) -> Result<Configuration<T>> {
    let recs = records(reader)?;
    let (_, header) = recs.first().ok_or(Error::EmptyInput)?;
    let width = header.len();
    if width < 2 {
        return Err(Error::MalformedCsv {
            line: 1,
            message: "configuration needs a label column and at least one dimension".into(),
        });
    }
    let mut labels = Vec::with_capacity(recs.len() - 1);
    let mut data = Vec::with_capacity((recs.len() - 1) * (width - 1));
    for (line, rec) in &recs[1..] {
        expect_width(rec, width, *line)?;
        labels.push(rec[0].to_string());
        for cell in rec.iter().skip(1) {
            data.push(parse_number(cell, *line)?);
        }
    }
    let coords = Matrix::from_vec(labels.len(), width - 1, data)?;
    Configuration::new(labels, coords)
}

pub fn load_configuration_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Configuration<T>> {
    read_configuration_csv(open(path.as_ref())?)
}

pub fn write_configuration_csv<T: Scalar, W: Write>(config: &Configuration<T>, writer: W) -> csv::Result<()> {
    let mut w = WriterBuilder::new().from_writer(writer);
    let mut header = vec!["label".to_string()];
    header.extend((1..=config.dims()).map(|d| format!("dim_{d}")));
    w.write_record(&header)?;
    for (i, label) in config.labels().iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(config.point(i).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_configuration_csv<T: Scalar>(config: &Configuration<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_configuration_csv(config, create(path)?).map_err(|e| Error::io(path, e.into()))
}

/// Parses `sample_id,group_id,f_1,…,f_k`.
pub fn read_feature_csv<T: Scalar, R: Read>(reader: R) -> Result<FeatureMatrix<T>> {
    let recs = records(reader)?;
    let (line, header) = recs.first().ok_or(Error::EmptyInput)?;
    if header.len() < 3 || &header[0] != "sample_id" || &header[1] != "group_id" {
        return Err(Error::MalformedCsv {
            line: *line,
            message: "feature header must start with `sample_id,group_id` followed by features".into(),
        });
    }
    let width = header.len();
    let rows = recs.len() - 1;
    let mut samples = Vec::with_capacity(rows);
    let mut groups = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * (width - 2));
    for (line, rec) in &recs[1..] {
        expect_width(rec, width, *line)?;
        samples.push(rec[0].to_string());
        groups.push(rec[1].to_string());
        for cell in rec.iter().skip(2) {
            data.push(parse_number(cell, *line)?);
        }
    }
    FeatureMatrix::new(samples, groups, Matrix::from_vec(rows, width - 2, data)?)
}

pub fn load_feature_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<FeatureMatrix<T>> {
    read_feature_csv(open(path.as_ref())?)
}

pub fn save_feature_csv<T: Scalar>(features: &FeatureMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = WriterBuilder::new().from_writer(create(path)?);
    let wrap = |e: csv::Error| Error::io(path, e.into());
    let mut header = vec!["sample_id".to_string(), "group_id".to_string()];
    header.extend((1..=features.k()).map(|k| format!("f_{k}")));
    w.write_record(&header).map_err(wrap)?;
    for i in 0..features.rows() {
        let mut row = vec![features.sample_ids()[i].clone(), features.group_ids()[i].clone()];
        row.extend(features.values().row(i).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_dissimilarity_grid() {
        let d: DissimilarityMatrix<f64> = read_dissimilarity_csv("label,a,b\na,0,3\nb,3,0\n".as_bytes()).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.get(0, 1), 3.0);
        assert_eq!(d.labels(), &["a", "b"]);
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let text = "label,a,b\na,0,3\nb,3.000000000001,0\n";
        let d: DissimilarityMatrix<f64> = read_dissimilarity_csv(text.as_bytes()).unwrap();
        assert!((d.get(0, 1) - 3.0).abs() < 1e-11);
        assert_eq!(d.get(0, 1), d.get(1, 0));
    }

    #[test]
    fn malformed_grids_are_rejected() {
        let bad = |t: &str| read_dissimilarity_csv::<f64, _>(t.as_bytes()).unwrap_err();
        assert!(matches!(
            bad("label,a,b\na,1,3\nb,3,0\n"),
            Error::NonzeroDiagonal { index: 0 }
        ));
        assert!(matches!(
            bad("label,a,b\na,0,x\nb,3,0\n"),
            Error::MalformedCsv { line: 2, .. }
        ));
        assert!(matches!(bad("label,a,b\na,0,3\nb,3\n"), Error::MalformedCsv { .. }));
        assert!(matches!(
            bad("label,a,b\na,0,3\nb,2,0\n"),
            Error::AsymmetricMatrix { .. }
        ));
        assert!(matches!(
            bad("label,a,b\na,0,-3\nb,-3,0\n"),
            Error::NegativeEntry { .. }
        ));
        assert!(matches!(bad("label,a,b\nb,0,3\na,3,0\n"), Error::MalformedCsv { .. }));
    }

    #[test]
    fn configuration_file_layout() {
        let c = Configuration::new(vec!["s1".into()], Matrix::from_rows(&[[0.0, 0.0]]).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_configuration_csv(&c, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "label,dim_1,dim_2\ns1,0,0\n");
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let c = Configuration::new(vec!["s1".into()], Matrix::from_rows(&[[1.0]]).unwrap()).unwrap();
        let err = save_configuration_csv(&c, "/nonexistent-dir/x/cfg.csv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(!err.is_validation());
    }

    #[test]
    fn feature_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let f = FeatureMatrix::new(
            vec!["a_0".into(), "a_1".into(), "b_0".into()],
            vec!["a".into(), "a".into(), "b".into()],
            Matrix::from_rows(&[[0.1f32, 2.0], [1e-7, -3.5], [0.0, 1.0 / 3.0]]).unwrap(),
        )
        .unwrap();
        save_feature_csv(&f, &path).unwrap();
        let back: FeatureMatrix<f32> = load_feature_csv(&path).unwrap();
        assert_eq!(back, f);
    }

    proptest! {
        #[test]
        fn configuration_round_trip(
            rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..12)
        ) {
            let labels = (0..rows.len()).map(|i| format!("stim {i}")).collect();
            let c = Configuration::new(labels, Matrix::from_rows(&rows).unwrap()).unwrap();
            let mut buf = Vec::new();
            write_configuration_csv(&c, &mut buf).unwrap();
            let back: Configuration<f64> = read_configuration_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.labels(), c.labels());
            for (a, b) in back.coords().as_slice().iter().zip(c.coords().as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
