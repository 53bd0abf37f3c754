//! Decision rules: deterministic joint-action choices or stochastic rows
//! over the joint action set.

use std::fmt::Write as _;

use crate::error::{MdpError, Result};
use crate::space::{ActionSpace, StateSpace};

const ROW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// One joint action (canonical flat index) per state.
    Deterministic(Vec<usize>),
    /// One probability row over joint actions per state.
    Stochastic(Vec<Vec<f64>>),
}

impl Policy {
    pub fn uniform(space: &StateSpace, aspace: &ActionSpace) -> Self {
        let n = aspace.total();
        Policy::Stochastic(vec![vec![1.0 / n as f64; n]; space.total()])
    }

    pub fn validate(&self, space: &StateSpace, aspace: &ActionSpace) -> Result<()> {
        match self {
            Policy::Deterministic(choices) => {
                if choices.len() != space.total() {
                    return Err(MdpError::InvalidPolicy(format!(
                        "covers {} of {} states",
                        choices.len(),
                        space.total()
                    )));
                }
                if let Some(&bad) = choices.iter().find(|&&a| a >= aspace.total()) {
                    return Err(MdpError::InvalidPolicy(format!(
                        "action index {bad} outside joint action set of size {}",
                        aspace.total()
                    )));
                }
            }
            Policy::Stochastic(rows) => {
                if rows.len() != space.total() {
                    return Err(MdpError::InvalidPolicy(format!(
                        "covers {} of {} states",
                        rows.len(),
                        space.total()
                    )));
                }
                for (s, row) in rows.iter().enumerate() {
                    if row.len() != aspace.total() {
                        return Err(MdpError::InvalidPolicy(format!(
                            "state {s} row has {} entries for {} actions",
                            row.len(),
                            aspace.total()
                        )));
                    }
                    let sum: f64 = row.iter().sum();
                    if row.iter().any(|p| !p.is_finite() || *p < -ROW_TOL)
                        || (sum - 1.0).abs() > ROW_TOL
                    {
                        return Err(MdpError::InvalidPolicy(format!(
                            "state {s} row is not a distribution (sum {sum})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn action_at(&self, state: usize) -> Option<usize> {
        match self {
            Policy::Deterministic(c) => Some(c[state]),
            Policy::Stochastic(_) => None,
        }
    }

    /// CSV dump of a deterministic policy: state coordinates, then the
    /// per-layer `(a_l, b_l)` digits of the chosen joint action.
    pub fn to_csv(&self, space: &StateSpace, aspace: &ActionSpace) -> Result<String> {
        let choices = match self {
            Policy::Deterministic(c) => c,
            Policy::Stochastic(_) => {
                return Err(MdpError::InvalidPolicy(
                    "only deterministic policies are serialized".into(),
                ))
            }
        };
        let mut out = String::new();
        for l in 0..space.layers() {
            let _ = write!(out, "s{},", l + 1);
        }
        for l in 0..aspace.layers() {
            let _ = write!(out, "a{},b{},", l + 1, l + 1);
        }
        out.pop();
        out.push('\n');
        for (s, &aidx) in choices.iter().enumerate() {
            for c in space.coords(s) {
                let _ = write!(out, "{c},");
            }
            let pairs = aspace.pairs(aidx);
            for (l, (a, b)) in pairs.iter().enumerate() {
                let sep = if l + 1 == pairs.len() { "" } else { "," };
                let _ = write!(out, "{a},{b}{sep}");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_csv(text: &str, space: &StateSpace, aspace: &ActionSpace) -> Result<Self> {
        let lines = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .skip(1);
        let ns = space.layers();
        let na = aspace.layers();
        let mut choices = vec![usize::MAX; space.total()];
        for line in lines {
            let fields: Vec<usize> = line
                .split(',')
                .map(|f| f.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| MdpError::InvalidPolicy(format!("bad policy row '{line}': {e}")))?;
            if fields.len() != ns + 2 * na {
                return Err(MdpError::InvalidPolicy(format!(
                    "policy row '{line}' has {} fields, expected {}",
                    fields.len(),
                    ns + 2 * na
                )));
            }
            let state = space.index(&fields[..ns]);
            let pairs: Vec<(usize, usize)> = fields[ns..]
                .chunks(2)
                .map(|c| (c[0], c[1]))
                .collect();
            choices[state] = aspace.index(&pairs);
        }
        if choices.iter().any(|&c| c == usize::MAX) {
            return Err(MdpError::InvalidPolicy(
                "policy file does not cover every state".into(),
            ));
        }
        let policy = Policy::Deterministic(choices);
        policy.validate(space, aspace)?;
        Ok(policy)
    }
}
