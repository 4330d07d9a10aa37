//! Per-job timing records and the aggregate report.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

/// One pipeline run. Durations arrive at different times, so every field is
/// optional; records sharing a `job_id` are merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct MetricsRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub job_id: Option<String>,
    pub detection_ms: Option<u64>,
    pub conversion_ms: Option<u64>,
    pub simplify_ms: Option<u64>,
    pub export_ms: Option<u64>,
    pub load_render_ms: Option<u64>,
    /// Reported by the backend; stored and averaged, never interpreted.
    pub gpu_util_pct: Option<f64>,
    pub gpu_mem_gb: Option<f64>,
}

impl MetricsRecord {
    fn merge(&mut self, other: &MetricsRecord) {
        fn take<T: Copy>(dst: &mut Option<T>, src: Option<T>) {
            if src.is_some() {
                *dst = src;
            }
        }
        take(&mut self.detection_ms, other.detection_ms);
        take(&mut self.conversion_ms, other.conversion_ms);
        take(&mut self.simplify_ms, other.simplify_ms);
        take(&mut self.export_ms, other.export_ms);
        take(&mut self.load_render_ms, other.load_render_ms);
        take(&mut self.gpu_util_pct, other.gpu_util_pct);
        take(&mut self.gpu_mem_gb, other.gpu_mem_gb);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FieldStats {
    pub count: usize,
    pub mean: Option<f64>,
    pub p50: Option<f64>,
    pub p95: Option<f64>,
}

/// Nearest-rank percentile over an ascending slice.
fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

impl FieldStats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().collect();
        v.sort_by(f64::total_cmp);
        let mean = (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        Self { count: v.len(), mean, p50: percentile(&v, 50.0), p95: percentile(&v, 95.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TableRow {
    pub metric: &'static str,
    pub unit: &'static str,
    /// Mean in `unit`; absent without samples.
    pub value: Option<f64>,
    pub display: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub records: usize,
    pub detection_ms: FieldStats,
    pub conversion_ms: FieldStats,
    pub simplify_ms: FieldStats,
    pub export_ms: FieldStats,
    pub load_render_ms: FieldStats,
    pub gpu_util_pct: FieldStats,
    pub gpu_mem_gb: FieldStats,
    /// Means in the units of the published performance table.
    pub table: Vec<TableRow>,
}

fn seconds_row(metric: &'static str, stats: &FieldStats) -> TableRow {
    let value = stats.mean.map(|ms| ms / 1000.0);
    TableRow { metric, unit: "s", value, display: value.map(|s| format!("{s:.1}")) }
}

#[derive(Debug, Default)]
pub struct MetricsStore {
    inner: Mutex<Inner>,
}

#[derive(Debug, Default)]
struct Inner {
    records: Vec<MetricsRecord>,
    by_job: HashMap<String, usize>,
}

impl MetricsStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends, or merges into the record with the same `job_id`.
    pub fn upsert(&self, record: MetricsRecord) {
        let mut inner = self.inner.lock().unwrap();
        if let Some(job) = &record.job_id {
            if let Some(&i) = inner.by_job.get(job) {
                inner.records[i].merge(&record);
                return;
            }
            let i = inner.records.len();
            inner.by_job.insert(job.clone(), i);
        }
        inner.records.push(record);
    }

    pub fn get(&self, job_id: &str) -> Option<MetricsRecord> {
        let inner = self.inner.lock().unwrap();
        inner.by_job.get(job_id).map(|&i| inner.records[i].clone())
    }

    pub fn report(&self) -> MetricsReport {
        let records = self.inner.lock().unwrap().records.clone();
        let ms = |f: fn(&MetricsRecord) -> Option<u64>| FieldStats::of(records.iter().filter_map(f).map(|v| v as f64));
        let fl = |f: fn(&MetricsRecord) -> Option<f64>| FieldStats::of(records.iter().filter_map(f));
        let detection_ms = ms(|r| r.detection_ms);
        let conversion_ms = ms(|r| r.conversion_ms);
        let simplify_ms = ms(|r| r.simplify_ms);
        let load_render_ms = ms(|r| r.load_render_ms);
        let gpu_util_pct = fl(|r| r.gpu_util_pct);
        let gpu_mem_gb = fl(|r| r.gpu_mem_gb);
        let table = vec![
            seconds_row("Image Processing for Object Detection Time (s)", &detection_ms),
            seconds_row("Image-to-3D Conversion Time (s)", &conversion_ms),
            seconds_row("Model Simplification Time (s)", &simplify_ms),
            seconds_row("Load and Render Time (s)", &load_render_ms),
            TableRow {
                metric: "Average GPU Utilization (%)",
                unit: "%",
                value: gpu_util_pct.mean,
                display: gpu_util_pct.mean.map(|p| format!("{p:.0}%")),
            },
            TableRow {
                metric: "GPU Memory Consumption (GB)",
                unit: "GB",
                value: gpu_mem_gb.mean,
                display: gpu_mem_gb.mean.map(|g| format!("{g:.1}")),
            },
        ];
        MetricsReport {
            records: records.len(),
            detection_ms,
            conversion_ms,
            simplify_ms,
            export_ms: ms(|r| r.export_ms),
            load_render_ms,
            gpu_util_pct,
            gpu_mem_gb,
            table,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report() {
        let r = MetricsStore::new().report();
        assert_eq!(r.records, 0);
        for s in [&r.detection_ms, &r.conversion_ms, &r.simplify_ms, &r.load_render_ms, &r.gpu_mem_gb] {
            assert_eq!(s.count, 0);
            assert!(s.mean.is_none() && s.p50.is_none());
        }
        assert!(r.table.iter().all(|row| row.display.is_none()));
    }

    #[test]
    fn two_records_average() {
        let store = MetricsStore::new();
        store.upsert(MetricsRecord { detection_ms: Some(100), conversion_ms: Some(1000), ..Default::default() });
        store.upsert(MetricsRecord { detection_ms: Some(300), conversion_ms: Some(2000), ..Default::default() });
        let r = store.report();
        assert_eq!(r.detection_ms.mean, Some(200.0));
        assert_eq!(r.conversion_ms.mean, Some(1500.0));
        assert_eq!(r.detection_ms.p50, Some(100.0));
        assert_eq!(r.detection_ms.p95, Some(300.0));
        assert_eq!(r.simplify_ms.count, 0);
    }

    #[test]
    fn job_records_merge() {
        let store = MetricsStore::new();
        let job = Some("j".to_string());
        store.upsert(MetricsRecord { job_id: job.clone(), conversion_ms: Some(10), ..Default::default() });
        store.upsert(MetricsRecord { job_id: job.clone(), load_render_ms: Some(30), ..Default::default() });
        let rec = store.get("j").unwrap();
        assert_eq!((rec.conversion_ms, rec.load_render_ms), (Some(10), Some(30)));
        assert_eq!(store.report().records, 1);
    }

    #[test]
    fn nearest_rank() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(percentile(&v, 50.0), Some(10.0));
        assert_eq!(percentile(&v, 95.0), Some(19.0));
        assert_eq!(percentile(&[7.0], 95.0), Some(7.0));
    }
}
