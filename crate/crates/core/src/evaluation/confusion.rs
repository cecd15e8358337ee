/// Square confusion matrix; rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    classes: usize,
    cells: Vec<u64>,
    total: u64,
}

impl ConfusionCounts {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            cells: vec![0; classes * classes],
            total: 0,
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.cells[truth * self.classes + predicted]
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.cells[truth * self.classes + predicted] += 1;
        self.total += 1;
    }

    /// Undoes an earlier [`add`](Self::add).
    pub fn remove(&mut self, truth: usize, predicted: usize) {
        let cell = &mut self.cells[truth * self.classes + predicted];
        debug_assert!(*cell > 0, "removing an outcome that was never added");
        *cell -= 1;
        self.total -= 1;
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    pub fn row_total(&self, truth: usize) -> u64 {
        (0..self.classes).map(|p| self.get(truth, p)).sum()
    }

    pub fn column_total(&self, predicted: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, predicted)).sum()
    }

    pub fn clear(&mut self) {
        self.cells.fill(0);
        self.total = 0;
    }

    /// Fraction of correct predictions; `None` when empty.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct() as f64 / self.total as f64)
    }

    /// Cohen's kappa; `None` when empty, 0 when chance agreement is 1.
    pub fn kappa(&self) -> Option<f64> {
        let p_o = self.accuracy()?;
        let n = self.total as f64;
        let p_e: f64 = (0..self.classes)
            .map(|k| self.row_total(k) as f64 * self.column_total(k) as f64)
            .sum::<f64>()
            / (n * n);
        if p_e >= 1.0 {
            Some(0.0)
        } else {
            Some((p_o - p_e) / (1.0 - p_e))
        }
    }
}
