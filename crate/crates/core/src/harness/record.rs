use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::RatioStats;

/// One CSV row. Sample rows carry the two norms; aggregate rows
/// (`max`, `median`, `min`, `spread`, `drift`, ...) carry only the ratio.
/// A sample whose solve failed has no norms and no ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub config_hash: String,
    pub sample_id: String,
    pub norm_src: Option<f64>,
    pub norm_tgt: Option<f64>,
    pub ratio: Option<f64>,
    pub pass: bool,
    pub seconds: f64,
}

impl ExperimentRecord {
    pub fn is_excluded(&self) -> bool {
        self.ratio.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub config_hash: String,
    pub samples: Vec<ExperimentRecord>,
    pub aggregates: Vec<ExperimentRecord>,
    /// Messages of excluded samples.
    pub notes: Vec<String>,
}

impl ExperimentOutput {
    pub fn new(experiment: &str, config_hash: &str) -> Self {
        ExperimentOutput {
            experiment: experiment.to_string(),
            config_hash: config_hash.to_string(),
            samples: Vec::new(),
            aggregates: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn record(&self, sample_id: String, src: Option<f64>, tgt: Option<f64>, ratio: Option<f64>, pass: bool, seconds: f64) -> ExperimentRecord {
        ExperimentRecord {
            experiment: self.experiment.clone(),
            config_hash: self.config_hash.clone(),
            sample_id,
            norm_src: src,
            norm_tgt: tgt,
            ratio,
            pass,
            seconds,
        }
    }

    /// A sample passes when its ratio is a finite number.
    pub fn push_sample(&mut self, sample_id: String, src: f64, tgt: f64, ratio: f64, seconds: f64) {
        let r = self.record(sample_id, Some(src), Some(tgt), Some(ratio), ratio.is_finite(), seconds);
        self.samples.push(r);
    }

    pub fn push_excluded(&mut self, sample_id: String, err: &Error, seconds: f64) {
        self.notes.push(format!("{sample_id}: {err}"));
        let r = self.record(sample_id, None, None, None, false, seconds);
        self.samples.push(r);
    }

    pub fn push_aggregate(&mut self, name: &str, value: f64, pass: bool) {
        let r = self.record(name.to_string(), None, None, Some(value), pass, 0.0);
        self.aggregates.push(r);
    }

    /// Ratios of the included samples whose id starts with `prefix`.
    pub fn ratios(&self, prefix: &str) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|r| r.sample_id.starts_with(prefix))
            .filter_map(|r| r.ratio)
            .collect()
    }

    /// Appends `max`, `median`, `min` of the ratios with the given prefix
    /// (names suffixed by `label`), plus the share of excluded samples.
    pub fn push_stats(&mut self, prefix: &str, label: &str) -> Option<RatioStats> {
        let rows: Vec<&ExperimentRecord> = self.samples.iter().filter(|r| r.sample_id.starts_with(prefix)).collect();
        let excluded = rows.iter().filter(|r| r.is_excluded()).count() as f64 / rows.len().max(1) as f64;
        let stats = RatioStats::from_values(&self.ratios(prefix));
        let finite = stats.is_some_and(|s| s.max.is_finite());
        if let Some(s) = stats {
            for (name, v) in [("max", s.max), ("median", s.median), ("min", s.min)] {
                self.push_aggregate(&format!("{name}{label}"), v, finite);
            }
        }
        self.push_aggregate(&format!("excluded{label}"), excluded, excluded <= 0.5 && stats.is_some());
        stats
    }

    /// All included samples and all aggregates pass.
    pub fn pass(&self) -> bool {
        self.samples.iter().filter(|r| !r.is_excluded()).all(|r| r.pass) && self.aggregates.iter().all(|r| r.pass)
    }

    pub fn aggregate(&self, name: &str) -> Option<&ExperimentRecord> {
        self.aggregates.iter().find(|r| r.sample_id == name)
    }

    pub fn records(&self) -> impl Iterator<Item = &ExperimentRecord> {
        self.samples.iter().chain(&self.aggregates)
    }

    /// The same output with every timing field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for r in out.samples.iter_mut().chain(out.aggregates.iter_mut()) {
            r.seconds = 0.0;
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for r in self.records() {
            wr.serialize(r).map_err(|e| Error::Input(format!("csv: {e}")))?;
        }
        wr.flush().map_err(|e| Error::Input(format!("csv: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    /// A JSON array with one object per CSV row.
    pub fn to_json_string(&self) -> String {
        let rows: Vec<&ExperimentRecord> = self.records().collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv_string(),
            OutputFormat::Json => self.to_json_string(),
        }
    }

    pub fn save(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format)).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }
}

/// Reads back a CSV written by [`ExperimentOutput::write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<ExperimentRecord>, _>>()
        .map_err(|e| Error::Input(format!("csv: {e}")))
}
