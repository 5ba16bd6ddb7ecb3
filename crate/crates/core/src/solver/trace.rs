use std::io::Write;

use crate::error::Result;

/// Column header of the trace CSV.
pub const TRACE_HEADER: [&str; 8] = [
    "iter",
    "obj",
    "subgrad_norm",
    "ws_size",
    "alpha",
    "sweeps",
    "flops_cum",
    "time_s",
];

/// One row per outer iteration; row 0 describes the starting point.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub subgrad_norm: f64,
    pub ws_size: usize,
    pub alpha: f64,
    pub sweeps: usize,
    pub flops_cum: u64,
    pub time_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
}

impl SolverTrace {
    pub fn push(&mut self, record: IterationRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Writes the trace as CSV. With `with_time = false` the `time_s` column
    /// is left out, which makes the output reproducible byte for byte.
    pub fn write_csv<W: Write>(&self, out: W, with_time: bool) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let cols = if with_time { 8 } else { 7 };
        wtr.write_record(&TRACE_HEADER[..cols])?;
        for r in &self.records {
            let mut row = vec![
                r.iter.to_string(),
                format!("{:e}", r.objective),
                format!("{:e}", r.subgrad_norm),
                r.ws_size.to_string(),
                format!("{}", r.alpha),
                r.sweeps.to_string(),
                r.flops_cum.to_string(),
            ];
            if with_time {
                row.push(format!("{:.6}", r.time_s));
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = SolverTrace::default();
        t.push(IterationRecord {
            iter: 0,
            objective: 0.5,
            subgrad_norm: 1.25,
            ws_size: 0,
            alpha: 0.0,
            sweeps: 0,
            flops_cum: 0,
            time_s: 0.001,
        });
        let mut buf = Vec::new();
        t.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iter,obj,subgrad_norm,ws_size,alpha,sweeps,flops_cum,time_s"
        );
        assert_eq!(lines.next().unwrap(), "0,5e-1,1.25e0,0,0,0,0,0.001000");
    }
}
