//! QoS triples and the dominance relations between them.

use crate::error::{LayeredError, Result};

/// The service summary a layer exports upward: packet loss ratio, average
/// per-packet transmission time, and the accumulated weighted internal cost
/// of every layer below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosTriple {
    pub loss: f64,
    pub time_s: f64,
    pub cost: f64,
}

impl QosTriple {
    pub fn new(loss: f64, time_s: f64, cost: f64) -> Result<Self> {
        let z = Self { loss, time_s, cost };
        z.validate()?;
        Ok(z)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.loss.is_finite() || !(0.0..=1.0).contains(&self.loss) {
            return Err(LayeredError::ModelContract(format!(
                "loss ratio {} outside [0, 1]",
                self.loss
            )));
        }
        if !self.time_s.is_finite() || (self.loss < 1.0 && self.time_s <= 0.0) || self.time_s < 0.0 {
            return Err(LayeredError::ModelContract(format!(
                "per-packet time {} s invalid for loss {}",
                self.time_s, self.loss
            )));
        }
        if !self.cost.is_finite() {
            return Err(LayeredError::ModelContract(format!(
                "accumulated cost {} not finite",
                self.cost
            )));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.loss, self.time_s, self.cost]
    }
}

/// Componentwise less-or-equal with strict inequality somewhere: smaller is
/// better in every component.
pub fn dominates(z: &QosTriple, w: &QosTriple) -> bool {
    z.loss <= w.loss && z.time_s <= w.time_s && z.cost <= w.cost && z != w
}

/// Neither triple dominates the other.
pub fn pareto_equivalent(z: &QosTriple, w: &QosTriple) -> bool {
    !dominates(z, w) && !dominates(w, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(l: f64, t: f64, c: f64) -> QosTriple {
        QosTriple {
            loss: l,
            time_s: t,
            cost: c,
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&z(0.1, 1.0e-3, 2.0), &z(0.2, 1.5e-3, 2.0)));
        let a = z(0.3, 2.0e-3, 0.5);
        assert!(!dominates(&a, &a), "a triple never dominates itself");
        let b = z(0.1, 2.0e-3, 1.0);
        let c = z(0.2, 1.0e-3, 1.0);
        assert!(!dominates(&b, &c) && !dominates(&c, &b));
        assert!(pareto_equivalent(&b, &c));
    }

    #[test]
    fn pareto_equivalence_examples() {
        let a = z(0.4, 1.0e-3, 0.0);
        assert!(pareto_equivalent(&a, &a));
        assert!(!pareto_equivalent(&z(0.0, 1e-3, 0.0), &z(1.0, 1e-3, 0.0)));
    }

    #[test]
    fn validation_rejects_zero_time_with_loss_below_one() {
        assert!(QosTriple::new(0.5, 0.0, 0.0).is_err());
        assert!(QosTriple::new(1.0, 0.1, 0.0).is_ok());
        assert!(QosTriple::new(1.2, 0.1, 0.0).is_err());
        assert!(QosTriple::new(0.2, 0.1, f64::NAN).is_err());
    }
}
