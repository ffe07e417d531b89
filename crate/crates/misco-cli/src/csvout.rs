//! CSV emission. Fixed headers, floats at nine significant digits,
//! newline-terminated UTF-8, so identical inputs produce byte-identical
//! files.

use std::io::Write;
use std::path::Path;

use misco_core::game::GameOutcome;
use misco_core::renewal::RenewalTrace;

use crate::sweep::ResultRow;

pub const RESULT_HEADER: &str = "scenario_id,policy,sweep_value,system_cost,mean_aoi_s,\
mean_energy_w,sense_time_share,process_time_share,inner_iterations,outer_iterations,seed,status";

/// Nine significant digits, locale-free.
fn fmt_f64(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn render_results(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 128);
    out.push_str(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario_id,
            r.policy,
            fmt_f64(r.sweep_value),
            fmt_f64(r.system_cost),
            fmt_f64(r.mean_aoi_s),
            fmt_f64(r.mean_energy_w),
            fmt_f64(r.sense_time_share),
            fmt_f64(r.process_time_share),
            r.inner_iterations,
            r.outer_iterations,
            r.seed,
            r.status,
        ));
    }
    out
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(render_results(rows).as_bytes())
}

/// Flat table of a renewal trace: cycle index, inter-generation gap, system
/// time, attempts.
pub fn write_renewal_trace(trace: &RenewalTrace, path: &Path) -> std::io::Result<()> {
    let mut out = String::from("cycle,inter_generation_s,system_time_s,attempts\n");
    for (i, c) in trace.cycles.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i,
            fmt_f64(c.inter_generation_s),
            fmt_f64(c.system_time_s),
            c.attempts
        ));
    }
    std::fs::write(path, out)
}

/// Flat table of offload dynamics: slot, updater, own-cost change, the
/// potential on both sides of the flip, and the pattern as a bitmask.
pub fn write_game_trace(game: &GameOutcome, path: &Path) -> std::io::Result<()> {
    let mut out =
        String::from("slot,device,cost_delta,potential_before,potential_after,offload_mask\n");
    for s in &game.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{:#x}\n",
            s.slot,
            s.device,
            fmt_f64(s.cost_delta),
            fmt_f64(s.potential_before),
            fmt_f64(s.potential_after),
            s.offload_mask
        ));
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            scenario_id: "device_count=10/rep0".into(),
            policy: "misco",
            sweep_value: 10.0,
            system_cost: 12.345678901,
            mean_aoi_s: 1.5,
            mean_energy_w: 0.014,
            sense_time_share: 0.25,
            process_time_share: 0.75,
            inner_iterations: 17,
            outer_iterations: 4,
            seed: 42,
            status: "ok".into(),
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        let text = render_results(&[]);
        assert_eq!(text, format!("{RESULT_HEADER}\n"));
    }

    #[test]
    fn one_row_gives_two_lines() {
        let text = render_results(&[row()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(text.ends_with('\n'));
        assert_eq!(lines[0], RESULT_HEADER);
        assert!(lines[1].starts_with("device_count=10/rep0,misco,1.00000000e1,1.23456789e1,"));
        assert!(lines[1].ends_with(",17,4,42,ok"));
    }

    #[test]
    fn floats_carry_nine_significant_digits() {
        assert_eq!(fmt_f64(12.345678901), "1.23456789e1");
        assert_eq!(fmt_f64(0.5), "5.00000000e-1");
        assert_eq!(fmt_f64(2.56e-6), "2.56000000e-6");
    }
}
