//! Machine-independent execution cost: one unit per arithmetic operation,
//! logical operation, comparison, conditional jump and assignment.

use std::fmt;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostReport {
    pub arith: u64,
    pub logic: u64,
    pub compare: u64,
    pub jump: u64,
    pub assign: u64,
    /// Graph edges (original program) or fragment steps (aggregated program).
    pub steps: u64,
}

impl CostReport {
    pub fn total(&self) -> u64 {
        self.arith + self.logic + self.compare + self.jump + self.assign
    }
}

impl AddAssign for CostReport {
    fn add_assign(&mut self, rhs: Self) {
        self.arith += rhs.arith;
        self.logic += rhs.logic;
        self.compare += rhs.compare;
        self.jump += rhs.jump;
        self.assign += rhs.assign;
        self.steps += rhs.steps;
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total={} arith={} logic={} compare={} jump={} assign={} steps={}",
            self.total(),
            self.arith,
            self.logic,
            self.compare,
            self.jump,
            self.assign,
            self.steps
        )
    }
}
