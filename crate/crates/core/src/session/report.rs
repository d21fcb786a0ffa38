//! Learning report: a Markdown document rendered from the event log.
//!
//! Headings are fixed: Summary (with a timeline), Materials, Q&A,
//! Submissions, Recommendations. Everything except the `Generated:` line is
//! a function of the event log and the recommendations text.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Event, EventKind, Phase, Session};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub phase: Phase,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionSummary {
    pub exercise_id: String,
    pub step_index: usize,
    pub source: String,
    pub passed: usize,
    pub total: usize,
    pub all_passed: bool,
    pub next_action: String,
    pub suggestions: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningReport {
    pub session_id: String,
    pub summary: String,
    pub timeline: Vec<TimelineEntry>,
    pub questions: Vec<String>,
    pub submissions: Vec<SubmissionSummary>,
    pub recommendations: String,
    pub generated_at: String,
    /// Path of the written file inside the session workspace.
    pub path: PathBuf,
    pub content: String,
}

fn text_of<'a>(e: &'a Event, key: &str) -> &'a str {
    e.payload.get(key).and_then(Value::as_str).unwrap_or_default()
}

fn usize_of(e: &Event, key: &str) -> usize {
    e.payload.get(key).and_then(Value::as_u64).unwrap_or_default() as usize
}

fn quote(text: &str) -> String {
    if text.is_empty() {
        return ">\n".into();
    }
    text.lines()
        .map(|l| if l.is_empty() { ">".to_string() } else { format!("> {l}") })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

fn fence_for(source: &str) -> String {
    let mut longest = 0;
    let mut run = 0;
    for c in source.chars() {
        if c == '`' {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    "`".repeat((longest + 1).max(3))
}

fn timeline_label(e: &Event, q: &mut usize, s: &mut usize) -> String {
    match e.kind {
        EventKind::Intake => "intake".into(),
        EventKind::Material => format!("material: {}", text_of(e, "topic")),
        EventKind::Question => {
            *q += 1;
            format!("question {q}")
        }
        EventKind::Answer => format!("answer {q}"),
        EventKind::Submission => {
            *s += 1;
            format!(
                "submission {s} ({}, step {})",
                text_of(e, "exercise_id"),
                usize_of(e, "step_index") + 1
            )
        }
        EventKind::Feedback => format!("feedback {s}: {}", text_of(e, "next_action")),
        EventKind::Report => "report".into(),
    }
}

/// Collects report data from the session and renders the document.
pub(crate) fn build(session: &Session, recommendations: &str, generated_at: &str) -> LearningReport {
    let events = session.events();
    let (mut q, mut s) = (0, 0);
    let timeline: Vec<TimelineEntry> = events
        .iter()
        .map(|e| TimelineEntry {
            phase: e.phase().unwrap_or(session.phase),
            label: timeline_label(e, &mut q, &mut s),
        })
        .collect();

    let mut qa: Vec<(String, Option<String>)> = Vec::new();
    let mut submissions: Vec<SubmissionSummary> = Vec::new();
    for e in events {
        match e.kind {
            EventKind::Question => qa.push((text_of(e, "text").to_string(), None)),
            EventKind::Answer => {
                if let Some(last) = qa.last_mut().filter(|(_, a)| a.is_none()) {
                    last.1 = Some(text_of(e, "text").to_string());
                }
            }
            EventKind::Submission => submissions.push(SubmissionSummary {
                exercise_id: text_of(e, "exercise_id").into(),
                step_index: usize_of(e, "step_index"),
                source: text_of(e, "source").into(),
                passed: 0,
                total: 0,
                all_passed: false,
                next_action: String::new(),
                suggestions: String::new(),
            }),
            EventKind::Feedback => {
                if let Some(last) = submissions.last_mut() {
                    last.passed = usize_of(e, "passed");
                    last.total = usize_of(e, "total");
                    last.all_passed = e.payload.get("all_passed").and_then(Value::as_bool).unwrap_or(false);
                    last.next_action = text_of(e, "next_action").into();
                    last.suggestions = text_of(e, "suggestions").into();
                }
            }
            _ => {}
        }
    }

    let profile = session.profile();
    let passing = submissions.iter().filter(|s| s.all_passed).count();
    let completed: Vec<&str> = session
        .progress
        .iter()
        .filter(|(_, p)| p.completed)
        .map(|(id, _)| id.as_str())
        .collect();
    let summary = format!(
        "Session: {}\nBackground: {}\nGoals: {}\nLevel: {}\nQuestions asked: {}\nCode submissions: {} ({} passing all cases)\nExercises completed: {}\nTurns used: {} of {}\n",
        session.id(),
        profile.background,
        profile.goals,
        profile.self_reported_level,
        qa.len(),
        submissions.len(),
        passing,
        if completed.is_empty() { "none".to_string() } else { completed.join(", ") },
        session.turn_count(),
        session.max_turns(),
    );

    let mut md = format!("# Learning Report\n\nGenerated: {generated_at}\n\n## Summary\n\n{summary}\n### Timeline\n\n");
    for (i, t) in timeline.iter().enumerate() {
        md.push_str(&format!("{}. [{}] {}\n", i + 1, t.phase, t.label));
    }

    md.push_str("\n## Materials\n\n");
    match session.material() {
        Some(m) => {
            md.push_str(&format!("### {}\n\n", m.topic));
            for sec in &m.sections {
                md.push_str(&format!("- {} (sources: {})\n", sec.heading, sec.source_refs.join(", ")));
            }
        }
        None => md.push_str("No material was generated.\n"),
    }

    md.push_str("\n## Q&A\n");
    if qa.is_empty() {
        md.push_str("\nNo questions were asked.\n");
    }
    for (i, (question, answer)) in qa.iter().enumerate() {
        md.push_str(&format!("\n### Question {}\n\n{}", i + 1, quote(question)));
        md.push_str("\n**Answer:**\n\n");
        md.push_str(&quote(answer.as_deref().unwrap_or("(no answer recorded)")));
    }

    md.push_str("\n## Submissions\n");
    if submissions.is_empty() {
        md.push_str("\nNo code was submitted.\n");
    }
    for (i, sub) in submissions.iter().enumerate() {
        let fence = fence_for(&sub.source);
        md.push_str(&format!(
            "\n### Submission {}: {}, step {}\n\nVerdict: {}/{} cases passed{}\nNext action: {}\n\n{fence}python\n{}\n{fence}\n",
            i + 1,
            sub.exercise_id,
            sub.step_index + 1,
            sub.passed,
            sub.total,
            if sub.all_passed { " (all passed)" } else { "" },
            sub.next_action,
            sub.source.trim_end_matches('\n'),
        ));
        if !sub.suggestions.is_empty() {
            md.push_str(&format!("\nSuggestions:\n\n{}", quote(&sub.suggestions)));
        }
    }

    md.push_str("\n## Recommendations\n\n");
    md.push_str(recommendations.trim());
    md.push('\n');

    LearningReport {
        session_id: session.id().to_string(),
        summary,
        timeline,
        questions: qa.into_iter().map(|(q, _)| q).collect(),
        submissions,
        recommendations: recommendations.trim().to_string(),
        generated_at: generated_at.to_string(),
        path: PathBuf::new(),
        content: md,
    }
}

/// Questions and submitted sources recovered from a rendered report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportItems {
    pub questions: Vec<String>,
    pub submissions: Vec<String>,
}

fn unquote(lines: &[&str]) -> String {
    lines
        .iter()
        .map(|l| l.strip_prefix("> ").unwrap_or(l.strip_prefix('>').unwrap_or(l)))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_report_items(markdown: &str) -> ReportItems {
    let lines: Vec<&str> = markdown.lines().collect();
    let mut items = ReportItems::default();
    let mut section = "";
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        if let Some(h) = line.strip_prefix("## ") {
            section = h;
            i += 1;
            continue;
        }
        if section == "Q&A" && line.starts_with("### Question ") {
            i += 1;
            while i < lines.len() && lines[i].is_empty() {
                i += 1;
            }
            let start = i;
            while i < lines.len() && lines[i].starts_with('>') {
                i += 1;
            }
            items.questions.push(unquote(&lines[start..i]));
            continue;
        }
        if section == "Submissions" && line.starts_with("### Submission ") {
            i += 1;
            while i < lines.len() && !lines[i].starts_with("```") {
                i += 1;
            }
            if i < lines.len() {
                let fence: String = lines[i].chars().take_while(|c| *c == '`').collect();
                i += 1;
                let start = i;
                while i < lines.len() && lines[i] != fence {
                    i += 1;
                }
                items.submissions.push(lines[start..i.min(lines.len())].join("\n"));
            }
            continue;
        }
        i += 1;
    }
    items
}
