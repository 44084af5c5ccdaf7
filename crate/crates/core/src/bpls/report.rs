use std::time::Duration;

/// Wall time spent in one named phase of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTime {
    pub name: String,
    pub elapsed: Duration,
}

/// What a training run did.
///
/// For classification runs `miss_counts[τ]` is the number of misclassified
/// training samples after iteration `τ` (`τ = 0` is the initial pass), so
/// `miss_counts.len() == iterations_used + 1`. Regression runs leave
/// `miss_counts` empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub seed: u64,
    pub iterations_used: usize,
    pub miss_counts: Vec<usize>,
    /// Iteration whose weights were returned.
    pub best_iteration: usize,
    pub metric_name: &'static str,
    pub metric_history: Vec<f64>,
    /// Layer least-squares solves performed, refits included.
    pub layer_solves: usize,
    /// Hidden-target back-propagations performed.
    pub target_backprops: usize,
    pub phases: Vec<PhaseTime>,
    pub total_time: Duration,
}

impl TrainReport {
    pub(crate) fn phase(&mut self, name: impl Into<String>, elapsed: Duration) {
        self.phases.push(PhaseTime {
            name: name.into(),
            elapsed,
        });
    }

    /// Total time of all phases whose name starts with `prefix`.
    pub fn time_in(&self, prefix: &str) -> Duration {
        self.phases
            .iter()
            .filter(|p| p.name.starts_with(prefix))
            .map(|p| p.elapsed)
            .sum()
    }

    pub fn best_miss_count(&self) -> Option<usize> {
        self.miss_counts.get(self.best_iteration).copied()
    }
}
