//! Optimal frontiers: the non-dominated subset of a layer's reachable QoS
//! levels, each tagged with the internal-action profile that produces it.

use std::fmt::Write as _;

use mdp_core::fmt_real;

use crate::error::{LayeredError, Result};
use crate::qos::{dominates, QosTriple};

/// The internal-action profile `b_{1..l}` that realizes a QoS level.
pub type Provenance = Vec<u16>;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierElement {
    pub qos: QosTriple,
    pub provenance: Provenance,
}

/// A set of mutually non-dominated QoS levels, ordered by provenance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frontier {
    elements: Vec<FrontierElement>,
}

impl Frontier {
    pub fn elements(&self) -> &[FrontierElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FrontierElement> {
        self.elements.iter()
    }

    /// Pairwise non-domination check.
    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                if i != j && dominates(&a.qos, &b.qos) {
                    return Err(LayeredError::ModelContract(format!(
                        "frontier element {:?} dominates {:?}",
                        a.qos, b.qos
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV dump: `state_prefix..., loss, time_s, cost, provenance` with the
    /// provenance as a dash-joined action-index list.
    pub fn to_csv(&self, prefix: &[usize]) -> String {
        let mut out = String::new();
        for l in 0..prefix.len() {
            let _ = write!(out, "s{},", l + 1);
        }
        out.push_str("loss,time_s,cost,provenance\n");
        for e in &self.elements {
            for c in prefix {
                let _ = write!(out, "{c},");
            }
            let prov = e
                .provenance
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join("-");
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_real(e.qos.loss),
                fmt_real(e.qos.time_s),
                fmt_real(e.qos.cost),
                prov
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut elements = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 4 {
                return Err(LayeredError::ModelContract(format!(
                    "bad frontier csv row: {line}"
                )));
            }
            let n = fields.len();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| LayeredError::ModelContract(format!("bad real '{s}': {e}")))
            };
            let qos = QosTriple {
                loss: parse(fields[n - 4])?,
                time_s: parse(fields[n - 3])?,
                cost: parse(fields[n - 2])?,
            };
            let provenance = if fields[n - 1].is_empty() {
                Vec::new()
            } else {
                fields[n - 1]
                    .split('-')
                    .map(|p| {
                        p.parse::<u16>().map_err(|e| {
                            LayeredError::ModelContract(format!("bad provenance '{p}': {e}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            elements.push(FrontierElement { qos, provenance });
        }
        Ok(Frontier { elements })
    }

    pub(crate) fn from_sorted(elements: Vec<FrontierElement>) -> Self {
        Frontier { elements }
    }
}

/// Keeps exactly the non-dominated candidates. Duplicate triples keep the
/// lexicographically smallest provenance; output is provenance-ordered.
pub fn prune_to_frontier(candidates: Vec<FrontierElement>) -> Result<Frontier> {
    if candidates.is_empty() {
        return Err(LayeredError::EmptyCandidates);
    }
    let mut sorted = candidates;
    sorted.sort_by(|a, b| a.provenance.cmp(&b.provenance));
    // drop exact-duplicate triples, keeping the first (lex-smallest) one
    let mut deduped: Vec<FrontierElement> = Vec::with_capacity(sorted.len());
    for cand in sorted {
        if !deduped.iter().any(|kept| kept.qos == cand.qos) {
            deduped.push(cand);
        }
    }
    let kept: Vec<FrontierElement> = deduped
        .iter()
        .filter(|cand| !deduped.iter().any(|other| dominates(&other.qos, &cand.qos)))
        .cloned()
        .collect();
    Ok(Frontier::from_sorted(kept))
}

/// Coarsened pruning: a candidate is discarded when an already-kept one is
/// within `epsilon` of dominating it in every component. `epsilon = 0`
/// reduces to exact pruning. Off by default and excluded from the acceptance
/// runs.
pub fn prune_with_epsilon(candidates: Vec<FrontierElement>, epsilon: f64) -> Result<Frontier> {
    if epsilon == 0.0 {
        return prune_to_frontier(candidates);
    }
    if candidates.is_empty() {
        return Err(LayeredError::EmptyCandidates);
    }
    let exact = prune_to_frontier(candidates)?;
    let mut kept: Vec<FrontierElement> = Vec::new();
    for cand in exact.elements() {
        let covered = kept.iter().any(|k| {
            k.qos.loss <= cand.qos.loss + epsilon
                && k.qos.time_s <= cand.qos.time_s + epsilon
                && k.qos.cost <= cand.qos.cost + epsilon
        });
        if !covered {
            kept.push(cand.clone());
        }
    }
    Ok(Frontier::from_sorted(kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(l: f64, t: f64, c: f64, prov: &[u16]) -> FrontierElement {
        FrontierElement {
            qos: QosTriple {
                loss: l,
                time_s: t,
                cost: c,
            },
            provenance: prov.to_vec(),
        }
    }

    #[test]
    fn single_candidate_survives() {
        let f = prune_to_frontier(vec![el(0.2, 1.0, 0.0, &[0])]).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn dominance_chain_collapses() {
        let f = prune_to_frontier(vec![
            el(0.1, 1.0, 1.0, &[0]),
            el(0.2, 2.0, 2.0, &[1]),
            el(0.3, 3.0, 3.0, &[2]),
        ])
        .unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.elements()[0].provenance, vec![0]);
    }

    #[test]
    fn duplicates_keep_lowest_provenance() {
        let f = prune_to_frontier(vec![el(0.1, 1.0, 1.0, &[3]), el(0.1, 1.0, 1.0, &[1])]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.elements()[0].provenance, vec![1]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            prune_to_frontier(Vec::new()),
            Err(LayeredError::EmptyCandidates)
        ));
    }

    #[test]
    fn csv_round_trip() {
        let f = prune_to_frontier(vec![
            el(0.1, 1.0, 1.0, &[0, 2]),
            el(0.2, 2.0, 0.0, &[1, 0]),
        ])
        .unwrap();
        let back = Frontier::from_csv(&f.to_csv(&[3, 1])).unwrap();
        assert_eq!(f, back);
    }
}
