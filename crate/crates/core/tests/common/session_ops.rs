//! Random session operations for phase-machine properties.

use std::collections::BTreeSet;

use codeedu_core::session::{Phase, Session, SessionError};
use proptest::prelude::*;

use super::{passing_stub, Harness};

/// Every transition the session phase machine may take.
pub fn legal_transitions() -> BTreeSet<(Phase, Phase)> {
    [
        (Phase::Intake, Phase::Studying),
        (Phase::Studying, Phase::Exercising),
        (Phase::Exercising, Phase::Studying),
        (Phase::Studying, Phase::Reporting),
        (Phase::Exercising, Phase::Reporting),
        (Phase::Reporting, Phase::Closed),
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Clone)]
pub enum Op {
    Material,
    Ask(bool),
    Begin,
    Resume,
    Submit { exercise: usize, step_offset: usize, pass: bool },
    Report,
    Close,
    StopCheck,
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::Material),
        any::<bool>().prop_map(Op::Ask),
        Just(Op::Begin),
        Just(Op::Resume),
        (0usize..10, prop_oneof![Just(0usize), Just(0), Just(1)], any::<bool>())
            .prop_map(|(exercise, step_offset, pass)| Op::Submit { exercise, step_offset, pass }),
        Just(Op::Report),
        Just(Op::Close),
        Just(Op::StopCheck),
    ]
}

pub fn apply(h: &Harness, s: &mut Session, op: &Op) -> Result<(), SessionError> {
    match op {
        Op::Material => h.engine.generate_material(s).map(drop),
        Op::Ask(empty) => h
            .engine
            .answer_question(s, if *empty { " " } else { "What is a base case?" })
            .map(drop),
        Op::Begin => h.engine.begin_exercises(s),
        Op::Resume => h.engine.resume_studying(s),
        Op::Submit { exercise, step_offset, pass } => {
            let ex = &s.exercises()[exercise % s.exercises().len()];
            let id = ex.exercise_id.clone();
            let step = s.progress(&id).map_or(0, |p| p.current_step) + step_offset;
            let source = if *pass { passing_stub(&id) } else { "print(0)".to_string() };
            h.engine.submit_code(s, &id, step, &source).map(drop)
        }
        Op::Report => h.engine.generate_report(s).map(drop),
        Op::Close => h.engine.close_session(s),
        Op::StopCheck => {
            h.engine.should_stop_early(s);
            Ok(())
        }
    }
}
