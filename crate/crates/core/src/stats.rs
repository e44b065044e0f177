use crate::scalar::{cmp_real, Real};

/// Two-sided Kolmogorov-Smirnov distance `sup |F_n(x) - F(x)|` between the
/// empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: Real>(samples: &[F], cdf: impl Fn(F) -> F) -> F {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(cmp_real);
    ks_distance_sorted(&xs, cdf)
}

/// As [`ks_distance`] for samples already sorted ascending.
pub fn ks_distance_sorted<F: Real>(sorted: &[F], cdf: impl Fn(F) -> F) -> F {
    let n = F::of_usize(sorted.len());
    let mut worst = F::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let below = f - F::of_usize(i) / n;
        let above = F::of_usize(i + 1) / n - f;
        worst = worst.max(below).max(above);
    }
    worst
}

/// Sample mean and standard error of the mean (sample variance, `n - 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMean {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn finish(&self) -> MeanEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        MeanEstimate {
            mean: self.mean,
            std_error: (var / self.count.max(1) as f64).sqrt(),
            count: self.count,
        }
    }
}

impl FromIterator<f64> for RunningMean {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = RunningMean::default();
        iter.into_iter().for_each(|x| acc.push(x));
        acc
    }
}
