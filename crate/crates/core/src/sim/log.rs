//! Run records: per-round planned trajectories and solver stats, the final
//! outcome, and the line-delimited serialization used by the CLI.
//!
//! A log is self-contained: its first line embeds the scenario, so safety
//! checks and plots need no extra input. Remaining lines hold one round
//! each, then the outcome.

use super::scenario::ScenarioFile;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("log is missing its {0} record")]
    Missing(&'static str),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RobotRecord {
    /// Executed state at the start of the round.
    pub anchor_position: Vec<f64>,
    pub anchor_velocity: Vec<f64>,
    /// Planned positions `p_1 ... p_K`.
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    /// Band intrusion per neighbor id.
    pub w: Vec<(usize, f64)>,
    pub eta: f64,
    pub terminal_overlap: bool,
    pub used_fallback: bool,
    pub solve_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RoundRecord {
    pub t: f64,
    pub robots: Vec<RobotRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed { t: f64 },
    Timeout,
    InvariantBreach { round: usize, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunLog {
    pub scenario: ScenarioFile,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Outcome,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Line {
    Header { scenario: ScenarioFile },
    Round(RoundRecord),
    Outcome(Outcome),
}

impl RunLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |l: &Line| {
            out.push_str(&serde_json::to_string(l).expect("log serializes"));
            out.push('\n');
        };
        push(&Line::Header { scenario: self.scenario.clone() });
        for r in &self.rounds {
            push(&Line::Round(r.clone()));
        }
        push(&Line::Outcome(self.outcome.clone()));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut scenario = None;
        let mut rounds = Vec::new();
        let mut outcome = None;
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line: Line = serde_json::from_str(raw)
                .map_err(|e| LogError::Parse { line: i + 1, message: e.to_string() })?;
            match line {
                Line::Header { scenario: s } => scenario = Some(s),
                Line::Round(r) => rounds.push(r),
                Line::Outcome(o) => outcome = Some(o),
            }
        }
        Ok(Self {
            scenario: scenario.ok_or(LogError::Missing("header"))?,
            rounds,
            outcome: outcome.ok_or(LogError::Missing("outcome"))?,
        })
    }

    /// Executed trajectory samples as CSV:
    /// `t,robot,px,py[,pz],vx,vy[,vz]`, one row per robot per sampling
    /// step, starting at the initial states.
    pub fn trajectories_csv(&self) -> String {
        let dim = self.scenario.dim;
        let mut out = String::from("t,robot");
        for c in ["px", "py", "pz"].iter().take(dim) {
            out.push(',');
            out.push_str(c);
        }
        for c in ["vx", "vy", "vz"].iter().take(dim) {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        use std::fmt::Write;
        let h = self.scenario.params.h;
        for (ri, round) in self.rounds.iter().enumerate() {
            for (id, robot) in round.robots.iter().enumerate() {
                write!(out, "{:.3},{id}", round.t).unwrap();
                for v in robot.anchor_position.iter().chain(&robot.anchor_velocity) {
                    write!(out, ",{v}").unwrap();
                }
                out.push('\n');
                // The final round also emits the state its first step
                // produces, closing the executed trace.
                if ri + 1 == self.rounds.len() {
                    write!(out, "{:.3},{id}", round.t + h).unwrap();
                    for v in robot.positions[0].iter().chain(&robot.velocities[0]) {
                        write!(out, ",{v}").unwrap();
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}
