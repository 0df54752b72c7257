use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use super::HarnessError;
use crate::model::{split_name_list, ILL_FORMED, WELL_FORMED};
use crate::storage::Database;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub total: usize,
    pub hits: usize,
}

impl Tally {
    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += usize::from(hit);
    }

    pub fn fraction(&self) -> Option<f64> {
        (self.total > 0).then(|| self.hits as f64 / self.total as f64)
    }

    fn percent(&self) -> String {
        match self.fraction() {
            Some(f) => format!("{:.1}%", f * 100.0),
            None => "n/a".to_string(),
        }
    }
}

/// Coverage (accepted well-formed), overgeneration (accepted ill-formed) and
/// unanalyzed (flagged unanalyzed or failed) tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhenomenonFigures {
    pub wellformed: Tally,
    pub illformed: Tally,
    pub unanalyzed: Tally,
}

impl PhenomenonFigures {
    pub fn coverage(&self) -> Option<f64> {
        self.wellformed.fraction()
    }

    pub fn overgeneration(&self) -> Option<f64> {
        self.illformed.fraction()
    }

    pub fn unanalyzed(&self) -> Option<f64> {
        self.unanalyzed.fraction()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub run_id: i64,
    pub totals: PhenomenonFigures,
    /// Keyed by phenomenon name.
    pub phenomena: BTreeMap<String, PhenomenonFigures>,
}

impl RunReport {
    pub fn coverage(&self) -> Option<f64> {
        self.totals.coverage()
    }

    pub fn overgeneration(&self) -> Option<f64> {
        self.totals.overgeneration()
    }

    pub fn unanalyzed(&self) -> Option<f64> {
        self.totals.unanalyzed()
    }
}

fn is_unanalyzed(flags: &str) -> bool {
    split_name_list(flags)
        .iter()
        .any(|f| matches!(f.as_str(), "unanalyzed" | "timeout" | "crash" | "protocol"))
}

fn check_run(db: &Database, run_id: i64) -> Result<(), HarnessError> {
    if db.runs().iter().any(|r| r.run_id == run_id) {
        Ok(())
    } else {
        Err(HarnessError::UnknownRun(run_id))
    }
}

pub fn compute_report(db: &Database, run_id: i64) -> Result<RunReport, HarnessError> {
    check_run(db, run_id)?;
    let wf: HashMap<i64, i64> = db.items().into_iter().map(|i| (i.item_id, i.wellformedness)).collect();
    let names: HashMap<i64, String> = db.phenomena().into_iter().map(|p| (p.phenomenon_id, p.name)).collect();
    let mut linked: HashMap<i64, BTreeSet<&String>> = HashMap::new();
    for l in db.links() {
        if let Some(name) = names.get(&l.phenomenon_id) {
            linked.entry(l.item_id).or_default().insert(name);
        }
    }
    let mut report = RunReport {
        run_id,
        totals: PhenomenonFigures::default(),
        phenomena: BTreeMap::new(),
    };
    for r in db.results_of(run_id) {
        let accepted = r.accepted == 1;
        let unanalyzed = is_unanalyzed(&r.flags);
        let tally = |f: &mut PhenomenonFigures| {
            match wf.get(&r.item_id) {
                Some(&WELL_FORMED) => f.wellformed.add(accepted),
                Some(&ILL_FORMED) => f.illformed.add(accepted),
                _ => {}
            }
            f.unanalyzed.add(unanalyzed);
        };
        tally(&mut report.totals);
        for name in linked.get(&r.item_id).into_iter().flatten() {
            tally(report.phenomena.entry((*name).clone()).or_default());
        }
    }
    Ok(report)
}

fn aligned(rows: &[Vec<String>]) -> String {
    let mut widths = vec![0; rows.iter().map(Vec::len).max().unwrap_or(0)];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let pad = widths[i] - cell.chars().count();
            if i == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn render_report(report: &RunReport) -> String {
    let t = &report.totals;
    let mut out = String::new();
    let _ = writeln!(out, "run {}", report.run_id);
    let _ = writeln!(
        out,
        "coverage {} ({}/{} well-formed accepted)",
        t.wellformed.percent(),
        t.wellformed.hits,
        t.wellformed.total
    );
    let _ = writeln!(
        out,
        "overgeneration {} ({}/{} ill-formed accepted)",
        t.illformed.percent(),
        t.illformed.hits,
        t.illformed.total
    );
    let _ = writeln!(
        out,
        "unanalyzed {} ({}/{} items)",
        t.unanalyzed.percent(),
        t.unanalyzed.hits,
        t.unanalyzed.total
    );
    if !report.phenomena.is_empty() {
        out.push('\n');
        let mut rows = vec![vec![
            "phenomenon".to_string(),
            "wf".to_string(),
            "coverage".to_string(),
            "if".to_string(),
            "overgeneration".to_string(),
            "unanalyzed".to_string(),
        ]];
        for (name, f) in &report.phenomena {
            rows.push(vec![
                name.clone(),
                f.wellformed.total.to_string(),
                f.wellformed.percent(),
                f.illformed.total.to_string(),
                f.illformed.percent(),
                f.unanalyzed.percent(),
            ]);
        }
        out.push_str(&aligned(&rows));
    }
    out
}

/// Item-level changes between two runs over the items both contain.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDiff {
    pub run_a: i64,
    pub run_b: i64,
    pub newly_accepted_wellformed: Vec<i64>,
    pub newly_rejected_wellformed: Vec<i64>,
    pub newly_rejected_illformed: Vec<i64>,
    pub newly_accepted_illformed: Vec<i64>,
    /// Mean of `b - a` over common items timed in both runs; `None` when
    /// there are none.
    pub mean_time_delta: Option<f64>,
}

impl RunDiff {
    pub fn is_empty(&self) -> bool {
        self.newly_accepted_wellformed.is_empty()
            && self.newly_rejected_wellformed.is_empty()
            && self.newly_rejected_illformed.is_empty()
            && self.newly_accepted_illformed.is_empty()
    }
}

pub fn diff_runs(db: &Database, run_a: i64, run_b: i64) -> Result<RunDiff, HarnessError> {
    check_run(db, run_a)?;
    check_run(db, run_b)?;
    let wf: HashMap<i64, i64> = db.items().into_iter().map(|i| (i.item_id, i.wellformedness)).collect();
    let a: HashMap<i64, (bool, i64)> = db
        .results_of(run_a)
        .into_iter()
        .map(|r| (r.item_id, (r.accepted == 1, r.time_ms)))
        .collect();
    let mut diff = RunDiff {
        run_a,
        run_b,
        newly_accepted_wellformed: Vec::new(),
        newly_rejected_wellformed: Vec::new(),
        newly_rejected_illformed: Vec::new(),
        newly_accepted_illformed: Vec::new(),
        mean_time_delta: None,
    };
    let (mut delta_sum, mut timed) = (0i64, 0i64);
    let mut b = db.results_of(run_b);
    b.sort_by_key(|r| r.item_id);
    for r in b {
        let Some(&(was, time_a)) = a.get(&r.item_id) else { continue };
        let now = r.accepted == 1;
        if time_a >= 0 && r.time_ms >= 0 {
            delta_sum += r.time_ms - time_a;
            timed += 1;
        }
        let list = match (wf.get(&r.item_id), was, now) {
            (Some(&WELL_FORMED), false, true) => &mut diff.newly_accepted_wellformed,
            (Some(&WELL_FORMED), true, false) => &mut diff.newly_rejected_wellformed,
            (Some(&ILL_FORMED), true, false) => &mut diff.newly_rejected_illformed,
            (Some(&ILL_FORMED), false, true) => &mut diff.newly_accepted_illformed,
            _ => continue,
        };
        list.push(r.item_id);
    }
    diff.mean_time_delta = (timed > 0).then(|| delta_sum as f64 / timed as f64);
    Ok(diff)
}

pub fn render_diff(diff: &RunDiff) -> String {
    let ids = |v: &[i64]| {
        if v.is_empty() {
            "-".to_string()
        } else {
            v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, "run {} -> run {}", diff.run_a, diff.run_b);
    let _ = writeln!(out, "newly accepted well-formed (progress): {}", ids(&diff.newly_accepted_wellformed));
    let _ = writeln!(out, "newly rejected well-formed (regression): {}", ids(&diff.newly_rejected_wellformed));
    let _ = writeln!(out, "newly rejected ill-formed (progress): {}", ids(&diff.newly_rejected_illformed));
    let _ = writeln!(out, "newly accepted ill-formed (regression): {}", ids(&diff.newly_accepted_illformed));
    match diff.mean_time_delta {
        Some(d) => {
            let _ = writeln!(out, "mean time delta: {d:+.1} ms");
        }
        None => out.push_str("mean time delta: n/a (no common timed items)\n"),
    }
    out
}
