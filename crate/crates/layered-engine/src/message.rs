//! The two inter-layer message channels.
//!
//! Upward messages carry a layer's optimal frontier to the layer above;
//! downward messages carry expected-future-value tables over the lower
//! layers' next-state prefixes, one table per candidate decision still open
//! at the sending layer. All solver data flow between layers passes through
//! these payloads.

use mdp_core::ValueTable;

use crate::frontier::Frontier;

#[derive(Debug, Clone, PartialEq)]
pub struct UpwardMessage {
    pub from_layer: usize,
    pub to_layer: usize,
    /// Frontier of layers `1..=from_layer` at the current state prefix.
    pub frontier: Frontier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownwardMessage {
    pub from_layer: usize,
    pub to_layer: usize,
    /// Expected future reward over the receiving layers' next-state prefix,
    /// one table per candidate decision tuple of the layers above.
    pub tables: Vec<(u32, ValueTable)>,
}

/// One state's worth of message traffic within a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageExchange {
    upward: Vec<UpwardMessage>,
    downward: Vec<DownwardMessage>,
}

impl MessageExchange {
    pub fn new(upward: Vec<UpwardMessage>, downward: Vec<DownwardMessage>) -> Self {
        Self { upward, downward }
    }

    pub fn upward(&self) -> &[UpwardMessage] {
        &self.upward
    }

    pub fn downward(&self) -> &[DownwardMessage] {
        &self.downward
    }

    /// Upward message sent by `layer` (1-based), if the layer has one.
    /// The top layer sends none.
    pub fn upward_from(&self, layer: usize) -> Option<&UpwardMessage> {
        self.upward.iter().find(|m| m.from_layer == layer)
    }

    /// Downward message sent by `layer` (1-based), if the layer has one.
    /// The bottom layer sends none.
    pub fn downward_from(&self, layer: usize) -> Option<&DownwardMessage> {
        self.downward.iter().find(|m| m.from_layer == layer)
    }
}

pub use crate::sweep::exchange_messages;
