//! Proptest generators for plans, agents and plan mutations.

use std::collections::BTreeSet;

use codeedu_core::agents::AgentProfile;
use codeedu_core::planner::{PlanState, TaskSpec, TaskType};
use proptest::prelude::*;

pub const TOOLS: [&str; 4] = ["web_crawler", "file_io", "code_interpreter", "deep_research"];

pub fn task_type() -> impl Strategy<Value = TaskType> {
    (0usize..6).prop_map(|i| TaskType::ALL[i])
}

/// A DAG over `n` tasks: task j may depend on any i < j. Ids are shuffled so
/// that id order and topological order disagree.
pub fn dag() -> impl Strategy<Value = Vec<TaskSpec>> {
    (1usize..=20)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), n),
                proptest::collection::vec(task_type(), n),
                proptest::collection::vec(-3i32..3, n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_map(|(adj, types, prios, perm)| {
            let n = types.len();
            let id = |i: usize| format!("n{:02}", perm[i]);
            (0..n)
                .map(|j| {
                    let deps: Vec<String> = (0..j).filter(|i| adj[j][*i]).map(id).collect();
                    TaskSpec::new(id(j), types[j], "d")
                        .after(deps)
                        .with_priority(prios[j])
                })
                .collect()
        })
}

pub fn agent() -> impl Strategy<Value = AgentProfile> {
    (
        "[a-e]{1,3}",
        proptest::collection::btree_set(task_type(), 0..4),
        proptest::collection::btree_set(0usize..4, 0..3),
    )
        .prop_map(|(id, caps, tools)| {
            AgentProfile::new(id, "tutor", "p")
                .with_capabilities(caps)
                .with_tools(tools.into_iter().map(|t| TOOLS[t]))
        })
}

pub fn agents() -> impl Strategy<Value = Vec<AgentProfile>> {
    proptest::collection::vec(agent(), 1..6).prop_map(|v| {
        let mut seen = BTreeSet::new();
        v.into_iter().filter(|a| seen.insert(a.agent_id.clone())).collect()
    })
}

#[derive(Debug, Clone)]
pub enum Op {
    AddTask { ty: TaskType, deps: Vec<usize> },
    AddDependency(usize, usize),
    Complete(usize),
    Fail(usize),
    Start(usize),
    UserMessage,
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (task_type(), proptest::collection::vec(0usize..64, 0..3))
            .prop_map(|(ty, deps)| Op::AddTask { ty, deps }),
        (0usize..64, 0usize..64).prop_map(|(a, b)| Op::AddDependency(a, b)),
        (0usize..64).prop_map(Op::Complete),
        (0usize..64).prop_map(Op::Fail),
        (0usize..64).prop_map(Op::Start),
        Just(Op::UserMessage),
    ]
}

pub fn ids(plan: &PlanState) -> Vec<String> {
    plan.tasks().map(|t| t.task_id.clone()).collect()
}
