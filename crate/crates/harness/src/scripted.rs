//! Scripted controller inputs: flat frames whose timestamps index into
//! recorded score tables, used by `grasp-sim` and the controller tests.

use vtgrasp_core::common::SensorUnit;
use vtgrasp_core::controller::{FrameSource, PoseSource, SourceError, Waypoint};
use vtgrasp_core::image::TactileFrame;

/// Emits featureless frames with timestamp = call index; pair it with an
/// indexed oracle provider to replay a recorded score stream.
pub struct ScriptedFrameSource {
    unit: SensorUnit,
    next: u64,
}

impl ScriptedFrameSource {
    pub fn new(unit: SensorUnit) -> Self {
        Self { unit, next: 0 }
    }
}

impl FrameSource for ScriptedFrameSource {
    fn latest(&mut self) -> Result<TactileFrame, SourceError> {
        let frame = TactileFrame::filled(8, 8, [0; 3], self.next, self.unit);
        self.next += 1;
        Ok(frame)
    }
}

/// Walks a fixed waypoint list one tag per poll, holding the last tag.
pub struct ScriptedPose {
    tags: Vec<String>,
    next: usize,
}

impl ScriptedPose {
    pub fn new(tags: Vec<String>) -> Self {
        assert!(!tags.is_empty(), "waypoint script must not be empty");
        Self { tags, next: 0 }
    }
}

impl PoseSource for ScriptedPose {
    fn current_waypoint(&mut self) -> Waypoint {
        let tag = self.tags[self.next.min(self.tags.len() - 1)].clone();
        self.next += 1;
        Waypoint::new(tag)
    }
}
