use crate::cutoff::{CutoffState, RaisePlan};
use crate::market::{CollegeId, Market, ResourceId};

use super::{MechanismKind, MechanismRun, Move, RunTrace, Schedule, Sequencer};

struct Run<'m> {
    m: &'m Market,
    state: CutoffState<'m>,
    moves: Vec<Move>,
}

impl<'m> Run<'m> {
    fn new(m: &'m Market) -> Self {
        Run {
            m,
            state: CutoffState::new(m),
            moves: Vec::new(),
        }
    }

    fn entry(&self, key: usize) -> (CollegeId, ResourceId) {
        let ids = self.m.n_resource_ids();
        (CollegeId((key / ids) as u32), ResourceId((key % ids) as u32))
    }

    fn n_entries(&self) -> usize {
        self.m.n_colleges() * self.m.n_resource_ids()
    }

    fn apply(&mut self, plan: RaisePlan) {
        self.state.apply(&plan);
        self.moves.push(Move::Raise {
            college: plan.college,
            resources: plan.resources,
        });
    }

    fn finish(self, kind: MechanismKind, schedule: &Schedule) -> MechanismRun {
        let (profile, matching) = self.state.into_parts();
        MechanismRun {
            trace: RunTrace {
                mechanism: kind,
                schedule: schedule.clone(),
                moves: self.moves,
                matching: matching.clone(),
            },
            matching,
            profile: Some(profile),
        }
    }
}

/// Increasing random cutoffs: raise a uniformly drawn non-maximal entry when
/// the induced matching stays feasible, until no entry can move.
///
/// A rejected entry is only retried after the matching or its own college's
/// row has changed, since until then it would be rejected again.
pub fn run_irc(m: &Market, schedule: &Schedule) -> MechanismRun {
    let mut run = Run::new(m);
    let mut seq = schedule.sequencer();
    let ids = m.n_resource_ids();
    let mut rejected = vec![false; run.n_entries()];
    let mut candidates = Vec::with_capacity(run.n_entries());
    loop {
        candidates.clear();
        candidates.extend((0..run.n_entries()).filter(|&e| {
            let (c, r) = run.entry(e);
            !rejected[e] && !run.state.profile().is_maximal(c, r)
        }));
        if candidates.is_empty() {
            break;
        }
        let e = candidates[seq.pick(&candidates)];
        let (c, r) = run.entry(e);
        match run.state.plan_increment(c, r) {
            Some(plan) => {
                if plan.switch.is_some() {
                    rejected.fill(false);
                } else {
                    rejected[c.index() * ids..(c.index() + 1) * ids].fill(false);
                }
                run.apply(plan);
            }
            None => rejected[e] = true,
        }
    }
    run.finish(MechanismKind::Irc, schedule)
}

/// Increasing deep cutoffs: walk all entries in a fresh order each pass and
/// raise each one as far as feasibility allows.
pub fn run_idc(m: &Market, schedule: &Schedule) -> MechanismRun {
    let mut run = Run::new(m);
    let mut seq = schedule.sequencer();
    let mut keys: Vec<usize> = (0..run.n_entries()).collect();
    loop {
        let mut changed = false;
        seq.permute(&mut keys);
        for &e in &keys {
            let (c, r) = run.entry(e);
            while let Some(plan) = run.state.plan_increment(c, r) {
                run.apply(plan);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    run.finish(MechanismKind::Idc, schedule)
}

/// Subsets of `items` of size `k`, in lexicographic order of positions.
fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let n = items.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One college step of IMC. Among the entries that can move on their own,
/// take those at the lowest value and raise the largest subset of them that
/// keeps the induced matching feasible.
fn imc_step(run: &mut Run<'_>, seq: &mut Sequencer, c: CollegeId) -> bool {
    let movable: Vec<ResourceId> = run
        .m
        .resources()
        .filter(|&r| run.state.plan_increment(c, r).is_some())
        .collect();
    let Some(low) = movable.iter().map(|&r| run.state.profile().get(c, r)).min() else {
        return false;
    };
    let level: Vec<ResourceId> = movable
        .into_iter()
        .filter(|&r| run.state.profile().get(c, r) == low)
        .collect();
    for size in (1..=level.len()).rev() {
        let mut subsets = combinations(&level, size);
        if seq.is_random() {
            let mut order: Vec<usize> = (0..subsets.len()).collect();
            seq.permute(&mut order);
            subsets = order.into_iter().map(|i| subsets[i].clone()).collect();
        }
        for subset in subsets {
            if let Some(plan) = run.state.plan(c, &subset) {
                run.apply(plan);
                return true;
            }
        }
    }
    unreachable!("a movable entry can always be raised on its own")
}

/// Increasing minimal cutoffs: for each college in a fresh order, raise the
/// largest feasible set of its lowest movable cutoffs by one.
pub fn run_imc(m: &Market, schedule: &Schedule) -> MechanismRun {
    let mut run = Run::new(m);
    let mut seq = schedule.sequencer();
    let mut colleges: Vec<usize> = (0..m.n_colleges()).collect();
    loop {
        let mut changed = false;
        seq.permute(&mut colleges);
        for &c in &colleges {
            changed |= imc_step(&mut run, &mut seq, CollegeId(c as u32));
        }
        if !changed {
            break;
        }
    }
    run.finish(MechanismKind::Imc, schedule)
}

/// Increasing uniform cutoffs: every college keeps one common cutoff for all
/// its resources and advances it by one when feasible.
pub fn run_iuc(m: &Market, schedule: &Schedule) -> MechanismRun {
    let mut run = Run::new(m);
    let mut seq = schedule.sequencer();
    let all: Vec<ResourceId> = m.resources().collect();
    let mut level = vec![0u32; m.n_colleges()];
    let mut colleges: Vec<usize> = (0..m.n_colleges()).collect();
    loop {
        let mut changed = false;
        seq.permute(&mut colleges);
        for &c in &colleges {
            if level[c] as usize == m.n_students() {
                continue;
            }
            if let Some(plan) = run.state.plan(CollegeId(c as u32), &all) {
                run.apply(plan);
                level[c] += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    debug_assert!(m
        .colleges()
        .all(|c| m.resources().all(|r| run.state.profile().get(c, r) == level[c.index()])));
    run.finish(MechanismKind::Iuc, schedule)
}
