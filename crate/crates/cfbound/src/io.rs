//! On-disk formats: model JSON, dataset CSV, and the run artifact that the
//! command-line workflow passes between `fit`, `query`, and `credible`.
//!
//! Writes are atomic (temp file + rename) so a crashed process never leaves
//! a half-written artifact behind. JSON map fields use order-preserving maps
//! and all serialization is deterministic: the same data always produces the
//! same bytes.

use std::path::Path;

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::emcc::{
    EmConfig, ExogenousAssignment, FitSet, Interval, RunDiagnostics, RunFailure, RunSet,
};
use crate::error::{Error, Result};
use crate::inference::CounterfactualQuery;
use crate::scm::{Scm, ScmBuilder};

// ---------------------------------------------------------------------------
// model document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndogenousDecl {
    pub name: String,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousDecl {
    pub name: String,
    pub cardinality: usize,
    /// Absent for partially specified models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationDecl {
    pub parents: Vec<String>,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorDecl {
    #[serde(default = "default_selector_name")]
    pub name: String,
    pub parents: Vec<String>,
    pub table: Vec<usize>,
}

fn default_selector_name() -> String {
    "S".into()
}

/// JSON shape of a model file. Declaration order is meaningful and survives
/// a round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub endogenous: Vec<EndogenousDecl>,
    pub exogenous: Vec<ExogenousDecl>,
    /// Keyed by child variable name.
    pub equations: IndexMap<String, EquationDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selector: Option<SelectorDecl>,
}

impl ModelDoc {
    pub fn to_scm(&self) -> Result<Scm> {
        let mut b = ScmBuilder::new();
        for v in &self.endogenous {
            b.endogenous(&v.name, v.cardinality);
        }
        for v in &self.exogenous {
            b.exogenous(&v.name, v.cardinality);
        }
        for (child, eq) in &self.equations {
            let parents: Vec<&str> = eq.parents.iter().map(String::as_str).collect();
            b.equation(child, &parents, eq.table.clone());
        }
        for v in &self.exogenous {
            if let Some(pmf) = &v.pmf {
                b.pmf(&v.name, pmf.clone());
            }
        }
        if let Some(sel) = &self.selector {
            let parents: Vec<&str> = sel.parents.iter().map(String::as_str).collect();
            b.selector(&sel.name, &parents, sel.table.clone());
        }
        b.build()
    }

    pub fn from_scm(scm: &Scm) -> Self {
        let endogenous = scm
            .observable_ids()
            .into_iter()
            .map(|id| EndogenousDecl {
                name: scm.var(id).name.clone(),
                cardinality: scm.cardinality(id),
            })
            .collect();
        let exogenous = scm
            .exogenous_ids()
            .into_iter()
            .map(|id| ExogenousDecl {
                name: scm.var(id).name.clone(),
                cardinality: scm.cardinality(id),
                pmf: scm.pmf(id).map(<[f64]>::to_vec),
            })
            .collect();
        let mut equations = IndexMap::new();
        for id in scm.observable_ids() {
            let eq = scm.equation(id).expect("endogenous variable has an equation");
            equations.insert(
                scm.var(id).name.clone(),
                EquationDecl {
                    parents: eq.parents.iter().map(|&p| scm.var(p).name.clone()).collect(),
                    table: eq.table.clone(),
                },
            );
        }
        let selector = scm.selector().map(|s| {
            let eq = scm.equation(s).expect("selector has an equation");
            SelectorDecl {
                name: scm.var(s).name.clone(),
                parents: eq.parents.iter().map(|&p| scm.var(p).name.clone()).collect(),
                table: eq.table.clone(),
            }
        });
        ModelDoc {
            endogenous,
            exogenous,
            equations,
            selector,
        }
    }
}

pub fn read_model(path: &Path) -> Result<Scm> {
    let doc: ModelDoc = read_json(path)?;
    doc.to_scm()
}

pub fn write_model(path: &Path, scm: &Scm) -> Result<()> {
    write_json(path, &ModelDoc::from_scm(scm))
}

// ---------------------------------------------------------------------------
// dataset CSV

/// Read a dataset whose header names the model's observable variables in
/// declaration order; each row holds state indices.
pub fn read_dataset_csv(path: &Path, scm: &Scm) -> Result<Vec<Vec<usize>>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let want: Vec<String> = scm
        .observable_ids()
        .into_iter()
        .map(|id| scm.var(id).name.clone())
        .collect();
    let csv_err = |line: u64, msg: String| Error::Csv {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(1, e.to_string()))?
        .iter()
        .map(str::trim)
        .map(str::to_string)
        .collect();
    if header != want {
        return Err(csv_err(
            1,
            format!("header [{}] does not match the model's observables [{}]",
                header.join(","), want.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| csv_err(line, e.to_string()))?;
        if record.len() != want.len() {
            return Err(csv_err(
                line,
                format!("expected {} fields, found {}", want.len(), record.len()),
            ));
        }
        let mut row = Vec::with_capacity(want.len());
        for (field, name) in record.iter().zip(&want) {
            let value: usize = field.trim().parse().map_err(|_| {
                csv_err(line, format!("'{}' is not a state index for {}", field, name))
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_dataset_csv(path: &Path, names: &[String], rows: &[Vec<usize>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

// ---------------------------------------------------------------------------
// run artifacts

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub d0: u64,
    pub d1: u64,
}

/// Everything a fitting run leaves behind: enough to re-query the fitted
/// models or to reproduce the run bit-for-bit from the recorded seed/config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunArtifact {
    pub tool: String,
    pub version: String,
    /// Model file the fit ran against, as given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub seed: u64,
    pub config: EmConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<CounterfactualQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    pub assignments: Vec<ExogenousAssignment>,
    pub diagnostics: Vec<RunDiagnostics>,
    pub failures: Vec<RunFailure>,
}

impl RunArtifact {
    pub fn new(version_tool: &str, seed: u64, config: EmConfig) -> Self {
        RunArtifact {
            tool: "cfbound".into(),
            version: version_tool.into(),
            model: None,
            seed,
            config,
            partition: None,
            query: None,
            values: None,
            interval: None,
            assignments: Vec::new(),
            diagnostics: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn with_fit(mut self, fit: FitSet) -> Self {
        self.assignments = fit.assignments;
        self.diagnostics = fit.diagnostics;
        self.failures = fit.failures;
        self
    }

    /// The fitted models, for re-querying.
    pub fn fitset(&self) -> FitSet {
        FitSet {
            assignments: self.assignments.clone(),
            diagnostics: self.diagnostics.clone(),
            failures: self.failures.clone(),
        }
    }

    /// The full run set; requires that a query has been evaluated.
    pub fn runset(&self) -> Result<RunSet> {
        let values = self.values.clone().ok_or_else(|| {
            Error::InvalidQuery(
                "artifact holds no query values; evaluate a query over the fitted runs first"
                    .into(),
            )
        })?;
        let interval = self.interval.ok_or_else(|| {
            Error::InvalidQuery("artifact holds query values but no interval".into())
        })?;
        Ok(RunSet {
            values,
            interval,
            assignments: self.assignments.clone(),
            diagnostics: self.diagnostics.clone(),
            failures: self.failures.clone(),
        })
    }
}

/// Interval answer for one query over a fitted run set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub query: CounterfactualQuery,
    pub values: Vec<f64>,
    pub interval: Interval,
    pub runs_used: usize,
}

// ---------------------------------------------------------------------------
// primitives

/// Write through a sibling temp file and rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| io_err(std::io::Error::other("path has no file name")))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp-{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes).map_err(|source| Error::Io {
        path: tmp.display().to_string(),
        source,
    })?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{self, build_conservative};

    fn drug_model() -> Scm {
        let mut scm =
            build_conservative(&scm::binary_skeleton(&[("Z", &[]), ("X", &["Z"]), ("Y", &["Z", "X"])]), "U_")
                .unwrap();
        let n = scm.pmf(scm.id_of("U_Z").unwrap());
        assert!(n.is_none());
        let uz = scm.id_of("U_Z").unwrap();
        scm.set_pmf(uz, vec![0.5, 0.5]).unwrap();
        scm
    }

    #[test]
    fn model_document_round_trips() {
        let scm = drug_model()
            .embed_selector("S", &["Z", "X"], vec![0, 1, 1, 0])
            .unwrap();
        let doc = ModelDoc::from_scm(&scm);
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let parsed: ModelDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(doc, parsed);
        let rebuilt = parsed.to_scm().unwrap();
        let doc2 = ModelDoc::from_scm(&rebuilt);
        assert_eq!(doc, doc2);
        assert_eq!(rebuilt.selector().map(|s| rebuilt.var(s).name.clone()), Some("S".into()));
    }

    #[test]
    fn partial_pmfs_survive_the_round_trip() {
        let scm = drug_model();
        let doc = ModelDoc::from_scm(&scm);
        // exactly one PMF was set above
        let with: Vec<&str> = doc
            .exogenous
            .iter()
            .filter(|e| e.pmf.is_some())
            .map(|e| e.name.as_str())
            .collect();
        assert_eq!(with, vec!["U_Z"]);
        let rebuilt = doc.to_scm().unwrap();
        assert!(rebuilt.pmf(rebuilt.id_of("U_Z").unwrap()).is_some());
        assert!(rebuilt.pmf(rebuilt.id_of("U_X").unwrap()).is_none());
    }

    #[test]
    fn dataset_round_trip_and_header_check() {
        let scm = drug_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let names: Vec<String> = ["Z", "X", "Y"].iter().map(|s| s.to_string()).collect();
        let rows = vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 0, 0]];
        write_dataset_csv(&path, &names, &rows).unwrap();
        let back = read_dataset_csv(&path, &scm).unwrap();
        assert_eq!(back, rows);

        // wrong header order is refused with a line-1 CSV error
        std::fs::write(&path, "X,Z,Y\n0,0,0\n").unwrap();
        match read_dataset_csv(&path, &scm) {
            Err(Error::Csv { line: 1, .. }) => {}
            other => panic!("expected header error, got {other:?}"),
        }

        // non-numeric cell reports its line
        std::fs::write(&path, "Z,X,Y\n0,0,0\n0,?,1\n").unwrap();
        match read_dataset_csv(&path, &scm) {
            Err(Error::Csv { line: 3, .. }) => {}
            other => panic!("expected line-3 error, got {other:?}"),
        }
    }

    #[test]
    fn artifact_runset_requires_query_values() {
        let artifact = RunArtifact::new("0.0.0", 7, EmConfig::default());
        assert!(artifact.runset().is_err());
        let mut artifact = artifact;
        artifact.values = Some(vec![0.1, 0.2]);
        artifact.interval = Some(Interval {
            lower: 0.1,
            upper: 0.2,
        });
        let rs = artifact.runset().unwrap();
        assert_eq!(rs.values.len(), 2);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        // no temp files left behind
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().contains("tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
