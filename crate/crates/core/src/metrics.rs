//! Framing metrics computed from run-log records alone.

use serde::Serialize;

use crate::simulator::TickRecord;
use crate::world::wrap_angle;

/// Screen error counted for a subject behind the camera.
pub const BEHIND_ERROR: f64 = 2.0;
/// A plan has settled once the screen error stays below this...
pub const SETTLE_THRESHOLD: f64 = 0.1;
/// ...for this long, s.
pub const SETTLE_HOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanMetrics {
    pub plan_id: u32,
    pub start: f64,
    pub end: f64,
    pub ticks: usize,
    pub mean_screen_error: f64,
    pub max_screen_error: f64,
    /// Seconds after the plan started; `None` if it never settled.
    pub settling_time: Option<f64>,
    pub frustum_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub plans: Vec<PlanMetrics>,
    /// Distance from the true drone to the plan target on the last tick that
    /// had one, m.
    pub final_position_error: Option<f64>,
    pub final_course_error_deg: Option<f64>,
    pub path_length: f64,
}

/// Mean over subjects of the distance between where each appears and where
/// the plan wants it. `None` without subjects.
pub fn screen_error(record: &TickRecord) -> Option<f64> {
    if record.subjects.is_empty() {
        return None;
    }
    let sum: f64 = record
        .subjects
        .iter()
        .map(|s| s.screen.map_or(BEHIND_ERROR, |p| (p - s.requested).norm()))
        .sum();
    Some(sum / record.subjects.len() as f64)
}

/// Horizontal screen error of subject `k`.
pub fn screen_x_error(record: &TickRecord, k: usize) -> Option<f64> {
    let s = record.subjects.get(k)?;
    Some(s.screen.map_or(BEHIND_ERROR, |p| (p.x - s.requested.x).abs()))
}

fn settling_time(segment: &[TickRecord], errors: &[f64]) -> Option<f64> {
    let start = segment.first()?.time;
    let mut below_since: Option<f64> = None;
    for (rec, e) in segment.iter().zip(errors) {
        if *e < SETTLE_THRESHOLD {
            let since = *below_since.get_or_insert(rec.time);
            if rec.time - since >= SETTLE_HOLD - 1e-9 {
                return Some(since - start);
            }
        } else {
            below_since = None;
        }
    }
    None
}

pub fn compute(records: &[TickRecord]) -> MetricsReport {
    let mut plans = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let id = records[i].plan_id;
        let mut j = i;
        while j < records.len() && records[j].plan_id == id {
            j += 1;
        }
        let segment: Vec<TickRecord> = records[i..j].iter().filter(|r| !r.subjects.is_empty()).cloned().collect();
        if id > 0 && !segment.is_empty() {
            let errors: Vec<f64> = segment.iter().filter_map(screen_error).collect();
            plans.push(PlanMetrics {
                plan_id: id,
                start: segment[0].time,
                end: segment[segment.len() - 1].time,
                ticks: segment.len(),
                mean_screen_error: errors.iter().sum::<f64>() / errors.len() as f64,
                max_screen_error: errors.iter().copied().fold(0.0, f64::max),
                settling_time: settling_time(&segment, &errors),
                frustum_violations: segment.iter().filter(|r| r.subjects.iter().any(|s| s.out_of_frame)).count(),
            });
        }
        i = j;
    }

    let last_target = records.iter().rev().find_map(|r| r.target.map(|t| (r, t)));
    let path_length = records
        .windows(2)
        .map(|w| (w[1].truth.pose.position - w[0].truth.pose.position).norm())
        .sum();
    MetricsReport {
        plans,
        final_position_error: last_target.map(|(r, t)| (r.truth.pose.position - t.position).norm()),
        final_course_error_deg: last_target.map(|(r, t)| wrap_angle(r.truth.pose.course - t.course).abs().to_degrees()),
        path_length,
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl std::fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "plan  start    end      mean err  max err   settle   violations")?;
        for p in &self.plans {
            let settle = p.settling_time.map_or("-".to_string(), |s| format!("{s:.2}"));
            writeln!(
                f,
                "{:<5} {:<8.2} {:<8.2} {:<9.4} {:<9.4} {:<8} {}",
                p.plan_id, p.start, p.end, p.mean_screen_error, p.max_screen_error, settle, p.frustum_violations
            )?;
        }
        match (self.final_position_error, self.final_course_error_deg) {
            (Some(d), Some(c)) => writeln!(f, "final pose error: {d:.3} m, {c:.2} deg")?,
            _ => writeln!(f, "final pose error: -")?,
        }
        write!(f, "path length: {:.2} m", self.path_length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{bundled, run_scenario, RunLog};

    #[test]
    fn recomputation_from_csv_is_identical() {
        let log = run_scenario(&bundled("front_to_backright").unwrap());
        let direct = compute(&log.records);
        let parsed = compute(&RunLog::from_csv(&log.to_csv()).unwrap());
        assert_eq!(direct, parsed);
        assert_eq!(direct.to_json(), parsed.to_json());
    }

    #[test]
    fn static_shot_is_tracked_closely() {
        let mut s = bundled("front_to_backright").unwrap();
        s.commands.truncate(1);
        s.noise.measurement_sigma = 0.0;
        s.duration = 6.0;
        let report = compute(&run_scenario(&s).records);
        assert_eq!(report.plans.len(), 1);
        let p = &report.plans[0];
        assert!(p.mean_screen_error < 1e-3, "{p:?}");
        assert_eq!(p.frustum_violations, 0);
        assert_eq!(p.settling_time, Some(0.0));
    }

    #[test]
    fn no_plan_no_rows() {
        let mut s = bundled("front_to_backright").unwrap();
        s.commands.clear();
        s.duration = 1.0;
        let report = compute(&run_scenario(&s).records);
        assert!(report.plans.is_empty());
        assert_eq!(report.final_position_error, None);
    }
}
