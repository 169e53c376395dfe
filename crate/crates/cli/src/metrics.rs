//! JSON records emitted by `run` and `bench`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    pub c_lambda: f64,
    pub c: f64,
    pub lambda_override: Option<usize>,
    pub mstar_override: Option<usize>,
    pub max_m: usize,
    pub scheduler: String,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateRecord {
    pub index: u64,
    pub kind: String,
    /// Updates applied by this step (1 unless batched).
    pub count: usize,
    pub live_m: usize,
    pub sparsifier_size: usize,
    pub level_rebuilt: Option<usize>,
    pub moved: usize,
    pub recourse: usize,
    pub us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSummary {
    pub mode: String,
    pub eps: f64,
    pub trials: usize,
    pub violations: usize,
    pub worst_ratio_low: f64,
    pub worst_ratio_high: f64,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMetrics {
    pub config: ConfigEcho,
    pub updates: u64,
    pub adds: u64,
    pub deletes: u64,
    pub live_m: usize,
    pub sparsifier_size: usize,
    /// The sparsifier is a sub-hypergraph, so its size never exceeds `live_m`.
    pub size_bound: usize,
    pub i_last: usize,
    pub rebuilds: Vec<u64>,
    pub moved_total: u64,
    pub recourse_total: u64,
    pub elapsed_us: f64,
    pub amortized_us: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_update: Option<Vec<UpdateRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSummary>,
}

impl RunMetrics {
    /// Copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut m = self.clone();
        m.elapsed_us = 0.0;
        m.amortized_us = 0.0;
        if let Some(rows) = &mut m.per_update {
            for r in rows {
                r.us = 0.0;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub updates: usize,
    pub runs: usize,
    pub scheduler: String,
    pub batch_size: usize,
    pub amortized_us: f64,
    pub live_m: usize,
    pub sparsifier_size: usize,
    pub i_last: usize,
    pub recourse_total: u64,
    pub rebuilds_total: u64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "n,m,r,updates,runs,scheduler,batch_size,amortized_us,live_m,sparsifier_size,i_last,recourse_total,rebuilds_total";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3},{},{},{},{},{}",
            self.n,
            self.m,
            self.r,
            self.updates,
            self.runs,
            self.scheduler,
            self.batch_size,
            self.amortized_us,
            self.live_m,
            self.sparsifier_size,
            self.i_last,
            self.recourse_total,
            self.rebuilds_total
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let row = BenchRow {
            n: 4,
            m: 8,
            r: 2,
            updates: 10,
            runs: 1,
            scheduler: "seq".into(),
            batch_size: 1,
            amortized_us: 1.5,
            live_m: 8,
            sparsifier_size: 8,
            i_last: 1,
            recourse_total: 3,
            rebuilds_total: 5,
        };
        let mut v = serde_json::to_value(&row).unwrap();
        assert_eq!(serde_json::from_value::<BenchRow>(v.clone()).unwrap(), row);
        v["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<BenchRow>(v).is_err());
    }

    #[test]
    fn csv_matches_header() {
        let cols = BenchRow::CSV_HEADER.split(',').count();
        let row = BenchRow {
            n: 1,
            m: 1,
            r: 1,
            updates: 0,
            runs: 1,
            scheduler: "par".into(),
            batch_size: 4,
            amortized_us: 0.0,
            live_m: 0,
            sparsifier_size: 0,
            i_last: 1,
            recourse_total: 0,
            rebuilds_total: 0,
        };
        assert_eq!(row.csv().split(',').count(), cols);
    }
}
