use std::ops::{AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Construction instrumentation. Monotone within a session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildCounters {
    pub nodes_built: u64,
    pub leaves_built: u64,
    pub stats_from_scratch: u64,
    pub stats_aggregated: u64,
    pub objects_scanned: u64,
}

impl AddAssign for BuildCounters {
    fn add_assign(&mut self, o: Self) {
        self.nodes_built += o.nodes_built;
        self.leaves_built += o.leaves_built;
        self.stats_from_scratch += o.stats_from_scratch;
        self.stats_aggregated += o.stats_aggregated;
        self.objects_scanned += o.objects_scanned;
    }
}

impl Sub for BuildCounters {
    type Output = BuildCounters;

    fn sub(self, o: Self) -> Self {
        BuildCounters {
            nodes_built: self.nodes_built - o.nodes_built,
            leaves_built: self.leaves_built - o.leaves_built,
            stats_from_scratch: self.stats_from_scratch - o.stats_from_scratch,
            stats_aggregated: self.stats_aggregated - o.stats_aggregated,
            objects_scanned: self.objects_scanned - o.objects_scanned,
        }
    }
}
