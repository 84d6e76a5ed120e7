use serde::{Deserialize, Serialize};

use crate::error::{Result, TpsError};

/// How a reported scalar was aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// One value over all entries.
    Global,
    /// Computed per channel over flattened batch and time, then averaged.
    ChannelMean,
    /// Computed per (sample, channel) sequence, then averaged.
    SampleChannelMean,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Global => "global",
            Aggregation::ChannelMean => "channel-mean",
            Aggregation::SampleChannelMean => "sample-channel-mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub name: String,
    pub value: f64,
    pub aggregation: Aggregation,
}

/// Ordered list of named metric values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metrics: Vec<MetricValue>,
}

impl MetricsReport {
    pub fn push(&mut self, name: impl Into<String>, value: f64, aggregation: Aggregation) -> Result<()> {
        let name = name.into();
        if !value.is_finite() {
            return Err(TpsError::Data(format!("metric {name} is not finite: {value}")));
        }
        self.metrics.push(MetricValue {
            name,
            value,
            aggregation,
        });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let width = self
            .metrics
            .iter()
            .map(|m| m.name.len())
            .max()
            .unwrap_or(0)
            .max("metric".len());
        let mut out = format!("{:<width$}  {:>14}  aggregation\n", "metric", "value");
        for m in &self.metrics {
            out.push_str(&format!(
                "{:<width$}  {:>14.6}  {}\n",
                m.name,
                m.value,
                m.aggregation.name()
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
