use crate::market::{Contract, Loads, Market, Matching, Pair, StudentId};

use super::{MechanismKind, MechanismRun, Move, RunTrace, Schedule};

fn best_feasible(m: &Market, loads: &Loads, s: StudentId) -> Option<Pair> {
    m.preferences(s)
        .iter()
        .copied()
        .find(|&pair| loads.admits(m, pair, &[]))
}

fn finish(kind: MechanismKind, schedule: &Schedule, matching: Matching, moves: Vec<Move>) -> MechanismRun {
    MechanismRun {
        trace: RunTrace {
            mechanism: kind,
            schedule: schedule.clone(),
            moves,
            matching: matching.clone(),
        },
        matching,
        profile: None,
    }
}

/// Random serial dictatorship: students in schedule order each take their
/// best acceptable pair that still fits.
pub fn run_rsd(m: &Market, schedule: &Schedule) -> MechanismRun {
    let mut seq = schedule.sequencer();
    let mut order: Vec<usize> = (0..m.n_students()).collect();
    seq.permute(&mut order);
    let mut matching = Matching::empty(m.n_students());
    let mut loads = Loads::of(m, &matching);
    let mut moves = Vec::new();
    for s in order.into_iter().map(|s| StudentId(s as u32)) {
        if let Some(pair) = best_feasible(m, &loads, s) {
            loads.add(pair);
            matching.assign(s, Some(pair));
            moves.push(Move::Assign(Contract::from_pair(s, pair)));
        }
    }
    finish(MechanismKind::Rsd, schedule, matching, moves)
}

/// College-priority serial dictatorship: among the students still waiting,
/// the one ranked highest by the college of their best fitting pair goes
/// next. Students with nothing left that fits drop out.
pub fn run_csd(m: &Market, schedule: &Schedule) -> MechanismRun {
    let mut seq = schedule.sequencer();
    let mut matching = Matching::empty(m.n_students());
    let mut loads = Loads::of(m, &matching);
    let mut moves = Vec::new();
    let mut waiting: Vec<StudentId> = m.students().collect();
    loop {
        let mut options: Vec<(StudentId, Pair)> = Vec::with_capacity(waiting.len());
        waiting.retain(|&s| match best_feasible(m, &loads, s) {
            Some(pair) => {
                options.push((s, pair));
                true
            }
            None => false,
        });
        let Some(best) = options.iter().map(|&(s, (c, _))| m.rank(c, s)).min() else {
            break;
        };
        let tied: Vec<(StudentId, Pair)> = options
            .into_iter()
            .filter(|&(s, (c, _))| m.rank(c, s) == best)
            .collect();
        let keys: Vec<usize> = tied.iter().map(|(s, _)| s.index()).collect();
        let (s, pair) = tied[if keys.len() == 1 { 0 } else { seq.pick(&keys) }];
        loads.add(pair);
        matching.assign(s, Some(pair));
        moves.push(Move::Assign(Contract::from_pair(s, pair)));
        waiting.retain(|&w| w != s);
    }
    finish(MechanismKind::Csd, schedule, matching, moves)
}
