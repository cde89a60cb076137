//! Rolling runtime statistics for drift detection.
//!
//! Counters accumulate per batch and roll atomically once the window
//! fills (a window may end a few requests past its nominal size so that
//! batches are never split across windows).

/// Snapshot of one completed window.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeStats {
    pub window: usize,
    pub requests: usize,
    pub mean_hitrate: f64,
    pub slo_attainment: f64,
    pub cluster_counts: Vec<u64>,
    pub window_seq: u64,
}

/// Accumulating window state.
#[derive(Debug)]
pub struct StatsWindow {
    window: usize,
    count: usize,
    hit_sum: f64,
    attained: usize,
    cluster_counts: Vec<u64>,
    last: Option<RuntimeStats>,
    completed: u64,
}

impl StatsWindow {
    pub fn new(window: usize, n_clusters: usize) -> Self {
        Self {
            window: window.max(1),
            count: 0,
            hit_sum: 0.0,
            attained: 0,
            cluster_counts: vec![0; n_clusters],
            last: None,
            completed: 0,
        }
    }

    pub fn record_request(&mut self, hit_rate: f64, slo_ok: bool) {
        self.count += 1;
        self.hit_sum += hit_rate;
        if slo_ok {
            self.attained += 1;
        }
    }

    pub fn record_access(&mut self, cluster: u32) {
        self.cluster_counts[cluster as usize] += 1;
    }

    /// Rolls the window if it has filled. Call once per batch, after all
    /// of the batch's requests are recorded.
    pub fn maybe_roll(&mut self) {
        if self.count >= self.window {
            self.completed += 1;
            self.last = Some(RuntimeStats {
                window: self.window,
                requests: self.count,
                mean_hitrate: self.hit_sum / self.count as f64,
                slo_attainment: self.attained as f64 / self.count as f64,
                cluster_counts: self.cluster_counts.clone(),
                window_seq: self.completed,
            });
            self.reset_window();
        }
    }

    /// Clears the accumulating counters (window boundary or placement
    /// change).
    pub fn reset_window(&mut self) {
        self.count = 0;
        self.hit_sum = 0.0;
        self.attained = 0;
        self.cluster_counts.iter_mut().for_each(|c| *c = 0);
    }

    pub fn last_completed(&self) -> Option<RuntimeStats> {
        self.last.clone()
    }
}
