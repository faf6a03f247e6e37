//! Runs a plan sequentially or on a small thread pool.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::config::RunPlan;
use crate::error::CliError;
use crate::experiments;
use crate::verdict::VerdictRecord;

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub parallel: usize,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { parallel: 1, timings: false }
    }
}

/// Validate every experiment, run them, and return verdicts ordered by
/// experiment name (config order breaks ties).
pub fn run_plan(plan: &RunPlan, opts: RunOptions) -> Result<Vec<VerdictRecord>, CliError> {
    for e in &plan.experiments {
        experiments::validate(e)?;
    }
    let n = plan.experiments.len();
    let slots: Vec<Mutex<Option<Result<VerdictRecord, CliError>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= n {
            break;
        }
        let start = Instant::now();
        let mut res = experiments::run(&plan.experiments[i]);
        if let Ok(r) = &mut res {
            if opts.timings {
                r.runtime_ms = Some(start.elapsed().as_millis() as u64);
            }
        }
        *slots[i].lock().expect("slot lock") = Some(res);
    };
    let workers = opts.parallel.clamp(1, n.max(1));
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }
    let mut out: Vec<(usize, VerdictRecord)> = Vec::with_capacity(n);
    for (i, slot) in slots.into_iter().enumerate() {
        let res = slot.into_inner().expect("slot lock").expect("every slot is filled");
        out.push((i, res?));
    }
    out.sort_by(|(i, a), (j, b)| a.experiment.cmp(&b.experiment).then(i.cmp(j)));
    Ok(out.into_iter().map(|(_, r)| r).collect())
}

/// JSON-lines text for a list of verdicts.
pub fn json_lines(records: &[VerdictRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_json_line());
        s.push('\n');
    }
    s
}
