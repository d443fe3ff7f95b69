use std::fmt;

/// Evidence categories for a BIC difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BicCategory {
    ExtremelyNegative,
    StronglyNegative,
    Negative,
    Neutral,
    Positive,
    StronglyPositive,
    ExtremelyPositive,
}

impl BicCategory {
    /// Boundaries sit at ±2, ±6 and ±10; a value on a boundary belongs to
    /// the category farther from zero.
    pub fn of(delta: f64) -> Self {
        let magnitude = delta.abs();
        let level = if magnitude >= 10.0 {
            3
        } else if magnitude >= 6.0 {
            2
        } else if magnitude >= 2.0 {
            1
        } else {
            0
        };
        match (level, delta > 0.0) {
            (0, _) => BicCategory::Neutral,
            (1, true) => BicCategory::Positive,
            (2, true) => BicCategory::StronglyPositive,
            (_, true) => BicCategory::ExtremelyPositive,
            (1, false) => BicCategory::Negative,
            (2, false) => BicCategory::StronglyNegative,
            (_, false) => BicCategory::ExtremelyNegative,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BicCategory::ExtremelyNegative => "extremely negative",
            BicCategory::StronglyNegative => "strongly negative",
            BicCategory::Negative => "negative",
            BicCategory::Neutral => "neutral",
            BicCategory::Positive => "positive",
            BicCategory::StronglyPositive => "strongly positive",
            BicCategory::ExtremelyPositive => "extremely positive",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        [
            BicCategory::ExtremelyNegative,
            BicCategory::StronglyNegative,
            BicCategory::Negative,
            BicCategory::Neutral,
            BicCategory::Positive,
            BicCategory::StronglyPositive,
            BicCategory::ExtremelyPositive,
        ]
        .into_iter()
        .find(|c| c.label() == label)
    }
}

impl fmt::Display for BicCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaBicReport {
    pub score_before: f64,
    pub score_after: f64,
    pub delta: f64,
    pub category: BicCategory,
}

pub fn delta_bic(before: f64, after: f64) -> DeltaBicReport {
    let delta = after - before;
    DeltaBicReport {
        score_before: before,
        score_after: after,
        delta,
        category: BicCategory::of(delta),
    }
}

impl fmt::Display for DeltaBicReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "score before {:.6}, after {:.6}, delta BIC {:.6} ({})",
            self.score_before, self.score_after, self.delta, self.category
        )
    }
}
