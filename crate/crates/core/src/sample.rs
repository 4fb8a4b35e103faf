use std::fmt;

/// Binary class tag. `Negative` is the majority class C1, `Positive` the
/// minority (target) class C2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// The label as y ∈ {−1, +1}.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    /// Label predicted by a decision value; ties at zero go to the positive class.
    #[inline]
    pub fn from_decision(value: f64) -> Self {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    pub fn as_int(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn from_int(v: i64) -> Option<Self> {
        match v {
            -1 | 0 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_int())
    }
}

/// One observation of a stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Label,
    /// Position in the stream; strictly increasing and unique.
    pub arrival_index: u64,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: Label, arrival_index: u64) -> Self {
        Self {
            features,
            label,
            arrival_index,
        }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Anything the solver can train on: a feature vector with a (possibly
/// relabeled) class tag.
pub trait LabeledPoint {
    fn features(&self) -> &[f64];
    fn label(&self) -> Label;

    /// Diagonal entry of the augmented Gram matrix, ⟨x, x⟩ + 1.
    fn diag(&self) -> f64 {
        dot(self.features(), self.features()) + 1.0
    }
}

impl LabeledPoint for Sample {
    fn features(&self) -> &[f64] {
        &self.features
    }

    fn label(&self) -> Label {
        self.label
    }
}

impl<T: LabeledPoint> LabeledPoint for &T {
    fn features(&self) -> &[f64] {
        (*self).features()
    }

    fn label(&self) -> Label {
        (*self).label()
    }

    fn diag(&self) -> f64 {
        (*self).diag()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
