//! Latest-value snapshot cell connecting sensor producers to the controller.
//!
//! Producers overwrite the slot; the consumer reads the freshest value. A
//! read never waits for a producer to publish and producers never observe
//! consumer state, which is the whole concurrency contract of the control
//! loops.

use std::sync::{Arc, Mutex};

use crate::image::TactileFrame;

use super::{FrameSource, SourceError};

#[derive(Debug, Default)]
pub struct SnapshotCell<T> {
    slot: Mutex<Option<T>>,
}

impl<T: Clone> SnapshotCell<T> {
    pub fn new() -> Self {
        Self {
            slot: Mutex::new(None),
        }
    }

    /// Replaces the stored value with a fresher one.
    pub fn publish(&self, value: T) {
        *self.slot.lock().expect("snapshot lock poisoned") = Some(value);
    }

    /// Clones out the freshest value, if any was ever published.
    pub fn latest(&self) -> Option<T> {
        self.slot.lock().expect("snapshot lock poisoned").clone()
    }
}

/// Frame source backed by a shared snapshot cell.
#[derive(Clone)]
pub struct SnapshotFrameSource {
    cell: Arc<SnapshotCell<TactileFrame>>,
}

impl SnapshotFrameSource {
    pub fn new(cell: Arc<SnapshotCell<TactileFrame>>) -> Self {
        Self { cell }
    }
}

impl FrameSource for SnapshotFrameSource {
    fn latest(&mut self) -> Result<TactileFrame, SourceError> {
        self.cell.latest().ok_or(SourceError::Empty)
    }
}
