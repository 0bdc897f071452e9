use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{cpe, fce, mse, ple};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    Mse,
    Ple,
    Fce,
    Cpe,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::Mse, MetricKind::Ple, MetricKind::Fce, MetricKind::Cpe];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mse => "MSE",
            MetricKind::Ple => "PLE",
            MetricKind::Fce => "FCE",
            MetricKind::Cpe => "CPE",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub mse: f64,
    pub ple: f64,
    pub fce: f64,
    pub cpe: f64,
}

impl MetricSet {
    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Mse => self.mse,
            MetricKind::Ple => self.ple,
            MetricKind::Fce => self.fce,
            MetricKind::Cpe => self.cpe,
        }
    }

    fn from_fn(mut f: impl FnMut(MetricKind) -> f64) -> Self {
        MetricSet {
            mse: f(MetricKind::Mse),
            ple: f(MetricKind::Ple),
            fce: f(MetricKind::Fce),
            cpe: f(MetricKind::Cpe),
        }
    }
}

/// Metrics of one reconstructed profile against its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetrics {
    pub id: String,
    pub values: MetricSet,
}

impl ProfileMetrics {
    pub fn compute(id: impl Into<String>, generated: &[f64], truth: &[f64], rdp_epsilon: Option<f64>) -> Result<Self> {
        Ok(ProfileMetrics {
            id: id.into(),
            values: MetricSet {
                mse: mse(generated, truth)?,
                ple: ple(generated, truth)?,
                fce: fce(generated, truth)?,
                cpe: cpe(generated, truth, rdp_epsilon)?,
            },
        })
    }
}

/// Per-profile metrics of one method over a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResults {
    pub method: String,
    pub profiles: Vec<ProfileMetrics>,
    /// Mean per-axis `W1` of spectral features against the ground truth.
    pub wasserstein: Option<f64>,
}

impl MethodResults {
    pub fn new(method: impl Into<String>, profiles: Vec<ProfileMetrics>) -> Self {
        MethodResults { method: method.into(), profiles, wasserstein: None }
    }

    pub fn means(&self) -> MetricSet {
        let n = self.profiles.len().max(1) as f64;
        MetricSet::from_fn(|k| self.profiles.iter().map(|p| p.values.get(k)).sum::<f64>() / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub means: MetricSet,
    /// `(baseline - method) / baseline` per metric.
    pub gains: MetricSet,
    pub wasserstein: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub baseline: String,
    pub summaries: Vec<MethodSummary>,
    pub methods: Vec<MethodResults>,
}

/// Gain as a whole percentage, rounded half away from zero.
pub fn rounded_percent(gain: f64) -> i64 {
    (gain * 100.0).round() as i64
}

fn gain(baseline: f64, method: f64) -> f64 {
    if baseline == method {
        0.0
    } else {
        (baseline - method) / baseline
    }
}

/// Summarizes every method against the named baseline. All methods must cover
/// the same profile ids in the same order.
pub fn build_report(methods: Vec<MethodResults>, baseline: &str) -> Result<MetricReport> {
    let base = methods
        .iter()
        .find(|m| m.method == baseline)
        .ok_or_else(|| invalid(format!("baseline method `{baseline}` not among results")))?;
    if base.profiles.is_empty() {
        return Err(invalid("empty test set"));
    }
    let ids: Vec<&str> = base.profiles.iter().map(|p| p.id.as_str()).collect();
    for m in &methods {
        let other: Vec<&str> = m.profiles.iter().map(|p| p.id.as_str()).collect();
        if other != ids {
            return Err(invalid(format!(
                "method `{}` was evaluated on a different test set than `{baseline}`",
                m.method
            )));
        }
    }
    let base_means = base.means();
    let summaries = methods
        .iter()
        .map(|m| {
            let means = m.means();
            MethodSummary {
                method: m.method.clone(),
                means,
                gains: MetricSet::from_fn(|k| gain(base_means.get(k), means.get(k))),
                wasserstein: m.wasserstein,
            }
        })
        .collect();
    Ok(MetricReport { baseline: baseline.to_string(), summaries, methods })
}

impl MetricReport {
    pub fn summary(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// `method,metric,mean,gain_vs_lerp` rows; Wasserstein rows carry an empty gain.
    pub fn write_summary_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "metric", "mean", "gain_vs_lerp"]).map_err(csv_err)?;
        for s in &self.summaries {
            for k in MetricKind::ALL {
                w.write_record([
                    s.method.clone(),
                    k.name().to_string(),
                    s.means.get(k).to_string(),
                    s.gains.get(k).to_string(),
                ])
                .map_err(csv_err)?;
            }
            if let Some(wd) = s.wasserstein {
                w.write_record([s.method.clone(), "W1".into(), wd.to_string(), String::new()])
                    .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Long format `method,profile,metric,value`.
    pub fn write_profiles_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "profile", "metric", "value"]).map_err(csv_err)?;
        for m in &self.methods {
            for p in &m.profiles {
                for k in MetricKind::ALL {
                    w.write_record([&m.method, &p.id, k.name(), &p.values.get(k).to_string()])
                        .map_err(csv_err)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_summary_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes `summary.csv`, `profiles.csv` and `report.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?)?;
        self.write_profiles_csv(std::fs::File::create(dir.join("profiles.csv"))?)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        Ok(())
    }

    /// Fixed-width table with means and rounded gains.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<6}", "metric");
        for s in &self.summaries {
            out.push_str(&format!(" {:>16}", s.method));
        }
        out.push('\n');
        for k in MetricKind::ALL {
            out.push_str(&format!("{:<6}", k.name()));
            for s in &self.summaries {
                let cell = if s.method == self.baseline {
                    format!("{:.4}", s.means.get(k))
                } else {
                    format!("{:.4} ({:+}%)", s.means.get(k), rounded_percent(s.gains.get(k)))
                };
                out.push_str(&format!(" {cell:>16}"));
            }
            out.push('\n');
        }
        if self.summaries.iter().any(|s| s.wasserstein.is_some()) {
            out.push_str(&format!("{:<6}", "W1"));
            for s in &self.summaries {
                let cell = s.wasserstein.map(|w| format!("{w:.4}")).unwrap_or_default();
                out.push_str(&format!(" {cell:>16}"));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    invalid(format!("csv write: {e}"))
}
