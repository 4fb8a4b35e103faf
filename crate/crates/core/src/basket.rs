//! Bounded training set and the per-criterion selection rules.

use std::collections::VecDeque;

use crate::model::LinearModel;
use crate::sample::{Label, LabeledPoint, Sample};
use crate::strategy::{BalanceRule, ExclusionRule, InclusionRule, StrategyConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct BasketEntry {
    pub sample: Sample,
    /// Dual weight from the last fit; zero until the entry takes part in one.
    pub alpha: f64,
    /// Label used for training. Differs from `sample.label` only after relabeling.
    pub current_label: Label,
    diag: f64,
}

impl BasketEntry {
    pub fn new(sample: Sample) -> Self {
        let diag = sample.diag();
        Self {
            current_label: sample.label,
            sample,
            alpha: 0.0,
            diag,
        }
    }

    pub fn arrival_index(&self) -> u64 {
        self.sample.arrival_index
    }
}

impl LabeledPoint for BasketEntry {
    fn features(&self) -> &[f64] {
        &self.sample.features
    }

    fn label(&self) -> Label {
        self.current_label
    }

    fn diag(&self) -> f64 {
        self.diag
    }
}

/// Per-class entry counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub negative: usize,
    pub positive: usize,
}

impl ClassCounts {
    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Negative => self.negative,
            Label::Positive => self.positive,
        }
    }

    fn bump(&mut self, label: Label) {
        match label {
            Label::Negative => self.negative += 1,
            Label::Positive => self.positive += 1,
        }
    }
}

/// Training entries in arrival order, bounded by `capacity`.
///
/// Backed by a ring buffer of twice the capacity that is kept contiguous:
/// evicting the oldest entry is amortized O(1) and [`Basket::entries`] is a
/// single slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Basket {
    entries: VecDeque<BasketEntry>,
    capacity: usize,
}

impl Basket {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(2 * capacity + 2),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn entries(&self) -> &[BasketEntry] {
        let (front, back) = self.entries.as_slices();
        debug_assert!(back.is_empty());
        front
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [BasketEntry] {
        self.entries.make_contiguous()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.alpha).collect()
    }

    pub(crate) fn set_alphas(&mut self, alphas: &[f64]) {
        debug_assert_eq!(alphas.len(), self.entries.len());
        for (e, &a) in self.entries.iter_mut().zip(alphas) {
            e.alpha = a;
        }
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for e in &self.entries {
            c.bump(e.current_label);
        }
        c
    }

    /// Appends a fresh entry. Arrival indices must keep increasing.
    pub fn push(&mut self, sample: Sample) {
        debug_assert!(self
            .entries
            .back()
            .map_or(true, |e| e.arrival_index() < sample.arrival_index));
        self.entries.push_back(BasketEntry::new(sample));
        self.entries.make_contiguous();
    }

    /// Removes the entry at `index`.
    ///
    /// # Panics
    /// If `index` is out of bounds.
    pub fn remove(&mut self, index: usize) -> BasketEntry {
        let entry = self.entries.remove(index).expect("basket index out of bounds");
        self.entries.make_contiguous();
        entry
    }

    pub(crate) fn retain<F: FnMut(&BasketEntry) -> bool>(&mut self, f: F) {
        self.entries.retain(f);
        self.entries.make_contiguous();
    }
}

/// Inclusion gate on the margin value `y · f(x)`.
pub fn should_include(rule: InclusionRule, model: &LinearModel, x: &[f64], y: Label) -> bool {
    let margin = y.sign() * model.decision_unchecked(x);
    match rule {
        InclusionRule::AddAll => true,
        InclusionRule::OnlyMisclassified => margin < 0.0,
        InclusionRule::OnlyWithinMargin => margin < 1.0,
    }
}

/// Result of [`choose_removal`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Removal {
    pub index: usize,
    /// The balancing rule had no candidates and all entries were considered.
    pub fallback: bool,
}

/// Picks the entry to drop from a full basket before `incoming` is inserted.
///
/// The balancing rule first restricts the candidates by class; the exclusion
/// rule then picks among them. Class counts for `BALANCED_RATIO` include the
/// incoming sample, so the class that would be overrepresented after
/// insertion loses an entry.
pub fn choose_removal(
    config: &StrategyConfig,
    basket: &Basket,
    model: &LinearModel,
    incoming: Label,
) -> Option<Removal> {
    let entries = basket.entries();
    if entries.is_empty() {
        return None;
    }
    let restrict: Option<Label> = match config.balance {
        BalanceRule::DontHandle => None,
        BalanceRule::KeepRatio => Some(incoming),
        BalanceRule::BalancedRatio => {
            let mut counts = basket.class_counts();
            counts.bump(incoming);
            match counts.positive.cmp(&counts.negative) {
                std::cmp::Ordering::Greater => Some(Label::Positive),
                std::cmp::Ordering::Less => Some(Label::Negative),
                std::cmp::Ordering::Equal => None,
            }
        }
    };
    let mut candidates: Vec<usize> = match restrict {
        None => (0..entries.len()).collect(),
        Some(label) => (0..entries.len())
            .filter(|&i| entries[i].current_label == label)
            .collect(),
    };
    let mut fallback = false;
    if candidates.is_empty() {
        fallback = true;
        candidates = (0..entries.len()).collect();
    }

    let index = match config.exclude {
        // Entries are kept in arrival order.
        ExclusionRule::RemoveOldest => candidates[0],
        ExclusionRule::RemoveFarthest => argmax_first(&candidates, |i| {
            model.decision_unchecked(entries[i].features()).abs()
        }),
        ExclusionRule::RemoveNonBorder => {
            let scores = annulus_scores(entries);
            argmax_first(&candidates, |i| scores[i])
        }
    };
    Some(Removal { index, fallback })
}

/// First candidate attaining the maximum score; candidates are in arrival
/// order, so ties resolve to the oldest.
fn argmax_first(candidates: &[usize], mut score: impl FnMut(usize) -> f64) -> usize {
    let mut best = candidates[0];
    let mut best_score = score(best);
    for &i in &candidates[1..] {
        let s = score(i);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Distance of each entry from the median-radius ring around its class
/// centroid: `|‖x − centroid‖ − median radius|`.
pub fn annulus_scores(entries: &[BasketEntry]) -> Vec<f64> {
    let dim = entries.first().map_or(0, |e| e.features().len());
    let mut scores = vec![0.0; entries.len()];
    for label in [Label::Negative, Label::Positive] {
        let members: Vec<usize> = (0..entries.len())
            .filter(|&i| entries[i].current_label == label)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut centroid = vec![0.0; dim];
        for &i in &members {
            for (c, x) in centroid.iter_mut().zip(entries[i].features()) {
                *c += x;
            }
        }
        let n = members.len() as f64;
        centroid.iter_mut().for_each(|c| *c /= n);
        let dists: Vec<f64> = members
            .iter()
            .map(|&i| {
                entries[i]
                    .features()
                    .iter()
                    .zip(&centroid)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let radius = median(&dists);
        for (&i, d) in members.iter().zip(&dists) {
            scores[i] = (d - radius).abs();
        }
    }
    scores
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Whether a basket change can move the SVM solution: an added sample
/// inside the margin, or a removed support vector.
pub fn needs_retrain(model: &LinearModel, added: Option<(&[f64], Label)>, removed_alpha: Option<f64>) -> bool {
    let added_in_margin = added.is_some_and(|(x, y)| y.sign() * model.decision_unchecked(x) < 1.0);
    let removed_sv = removed_alpha.is_some_and(|a| a > 0.0);
    added_in_margin || removed_sv
}

/// Result of [`apply_ksv`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KsvOutcome {
    pub removed: usize,
    /// No support vector existed; the largest-α entry was kept instead.
    pub fallback: bool,
}

/// Drops every entry whose dual weight is exactly zero. The model is not
/// affected since such entries contribute nothing to `(w, b)`.
pub fn apply_ksv(basket: &mut Basket) -> KsvOutcome {
    let before = basket.len();
    if basket.entries().iter().any(|e| e.alpha > 0.0) {
        basket.retain(|e| e.alpha > 0.0);
        return KsvOutcome {
            removed: before - basket.len(),
            fallback: false,
        };
    }
    if before <= 1 {
        return KsvOutcome {
            removed: 0,
            fallback: before == 1,
        };
    }
    // All alphas are zero: keep the newest entry so the basket stays usable.
    let keep = basket.entries()[before - 1].arrival_index();
    basket.retain(|e| e.arrival_index() == keep);
    KsvOutcome {
        removed: before - 1,
        fallback: true,
    }
}

/// Overwrites every entry's training label with the model's prediction.
///
/// Entries whose label flips lose their dual weight: their contribution is
/// subtracted from the model and `α` is reset to zero, so `(w, b)` keeps
/// representing the stored alphas. Returns the number of flipped entries.
pub fn relabel_all(basket: &mut Basket, model: &mut LinearModel) -> usize {
    let mut changed = 0;
    for e in basket.entries_mut() {
        let predicted = Label::from_decision(model.decision_unchecked(e.features()));
        if predicted != e.current_label {
            if e.alpha > 0.0 {
                model.axpy(-(e.alpha * e.current_label.sign()), &e.sample.features);
                e.alpha = 0.0;
            }
            e.current_label = predicted;
            changed += 1;
        }
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClassWeights, SvmParams};

    fn params() -> SvmParams {
        SvmParams::new(1.0, ClassWeights::EQUAL).unwrap()
    }

    fn lin(w: Vec<f64>, b: f64) -> LinearModel {
        LinearModel { w, b, params: params() }
    }

    fn cfg(exclude: ExclusionRule, balance: BalanceRule, cap: usize) -> StrategyConfig {
        StrategyConfig {
            include: InclusionRule::AddAll,
            exclude,
            balance,
            keep_only_sv: false,
            relabel: false,
            capacity: cap,
        }
    }

    fn basket_of(points: &[(f64, Label, u64)]) -> Basket {
        let mut b = Basket::new(points.len());
        for &(x, y, t) in points {
            b.push(Sample::new(vec![x], y, t));
        }
        b
    }

    #[test]
    fn inclusion_gates() {
        // f(x) = x
        let m = lin(vec![1.0], 0.0);
        assert!(!should_include(InclusionRule::OnlyMisclassified, &m, &[0.5], Label::Positive));
        assert!(should_include(InclusionRule::OnlyWithinMargin, &m, &[0.5], Label::Positive));
        assert!(should_include(InclusionRule::AddAll, &m, &[100.0], Label::Positive));
        assert!(should_include(InclusionRule::OnlyMisclassified, &m, &[0.5], Label::Negative));
        assert!(!should_include(InclusionRule::OnlyWithinMargin, &m, &[1.0], Label::Positive));
    }

    #[test]
    fn remove_oldest_takes_minimum_arrival() {
        // Basket order is arrival order; index 1 holds arrival 3 after sorting.
        let b = basket_of(&[(0.0, Label::Positive, 3), (1.0, Label::Negative, 17), (2.0, Label::Positive, 42)]);
        let r = choose_removal(&cfg(ExclusionRule::RemoveOldest, BalanceRule::DontHandle, 3), &b, &lin(vec![1.0], 0.0), Label::Positive)
            .unwrap();
        assert_eq!(b.entries()[r.index].arrival_index(), 3);
        assert!(!r.fallback);
    }

    #[test]
    fn remove_farthest_takes_max_abs_decision() {
        let b = basket_of(&[(0.2, Label::Positive, 0), (-3.5, Label::Negative, 1), (1.1, Label::Positive, 2)]);
        let r = choose_removal(&cfg(ExclusionRule::RemoveFarthest, BalanceRule::DontHandle, 3), &b, &lin(vec![1.0], 0.0), Label::Positive)
            .unwrap();
        assert_eq!(r.index, 1);
    }

    #[test]
    fn remove_farthest_ties_go_to_oldest() {
        let b = basket_of(&[(0.2, Label::Positive, 0), (-2.0, Label::Negative, 1), (2.0, Label::Positive, 2)]);
        let r = choose_removal(&cfg(ExclusionRule::RemoveFarthest, BalanceRule::DontHandle, 3), &b, &lin(vec![1.0], 0.0), Label::Positive)
            .unwrap();
        assert_eq!(r.index, 1);
    }

    #[test]
    fn balanced_ratio_restricts_to_majority() {
        use Label::{Negative as N, Positive as P};
        let b = basket_of(&[
            (1.0, P, 1),
            (2.0, P, 2),
            (9.0, N, 9),
            (10.0, N, 10),
            (11.0, N, 11),
            (12.0, N, 12),
            (13.0, N, 13),
        ]);
        let counts = b.class_counts();
        assert_eq!((counts.negative, counts.positive), (5, 2));
        let c = cfg(ExclusionRule::RemoveOldest, BalanceRule::BalancedRatio, 7);

        // Exhaustive oracle: oldest entry of the class with more members.
        let expected = (0..7)
            .filter(|&i| b.entries()[i].current_label == N)
            .min_by_key(|&i| b.entries()[i].arrival_index())
            .unwrap();
        assert_eq!(b.entries()[expected].arrival_index(), 9);
        for incoming in [N, P] {
            let r = choose_removal(&c, &b, &lin(vec![1.0], 0.0), incoming).unwrap();
            assert_eq!(r.index, expected);
        }
    }

    #[test]
    fn balanced_ratio_counts_the_incoming_sample() {
        use Label::{Negative as N, Positive as P};
        let b = basket_of(&[(0.0, N, 0), (0.0, P, 1), (0.0, N, 2), (0.0, P, 3)]);
        let c = cfg(ExclusionRule::RemoveOldest, BalanceRule::BalancedRatio, 4);
        let r = choose_removal(&c, &b, &lin(vec![1.0], 0.0), P).unwrap();
        assert_eq!(b.entries()[r.index].current_label, P);
        assert_eq!(b.entries()[r.index].arrival_index(), 1);
    }

    #[test]
    fn keep_ratio_falls_back_when_class_absent() {
        use Label::{Negative as N, Positive as P};
        let b = basket_of(&[(0.0, N, 0), (0.0, N, 1), (0.0, N, 2)]);
        let c = cfg(ExclusionRule::RemoveOldest, BalanceRule::KeepRatio, 3);
        let r = choose_removal(&c, &b, &lin(vec![1.0], 0.0), P).unwrap();
        assert!(r.fallback);
        assert_eq!(r.index, 0);
        let r = choose_removal(&c, &b, &lin(vec![1.0], 0.0), N).unwrap();
        assert!(!r.fallback);
    }

    #[test]
    fn non_border_removes_point_off_the_ring() {
        use Label::{Negative as N, Positive as P};
        let mut b = Basket::new(8);
        // Negatives sit on a unit ring around (−5, 0), one outlier far away.
        let neg = [(-4.0, 0.0), (-6.0, 0.0), (-5.0, 1.0), (-5.0, -1.0), (-5.0, 0.05)];
        for (t, &(x, y)) in neg.iter().enumerate() {
            b.push(Sample::new(vec![x, y], N, t as u64));
        }
        b.push(Sample::new(vec![5.0, 0.0], P, 10));
        b.push(Sample::new(vec![6.0, 0.0], P, 11));
        let scores = annulus_scores(b.entries());
        let c = cfg(ExclusionRule::RemoveNonBorder, BalanceRule::DontHandle, 7);
        let r = choose_removal(&c, &b, &lin(vec![1.0, 0.0], 0.0), N).unwrap();
        let brute = (0..b.len())
            .max_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap().then(j.cmp(&i)))
            .unwrap();
        assert_eq!(r.index, brute);
        // The centre-most negative is the one farthest from its ring.
        assert_eq!(b.entries()[r.index].arrival_index(), 4);
    }

    #[test]
    fn lazy_rule_cases() {
        let m = lin(vec![1.0], 0.0);
        assert!(!needs_retrain(&m, Some((&[2.3], Label::Positive)), Some(0.0)));
        assert!(needs_retrain(&m, Some((&[0.9], Label::Positive)), None));
        assert!(needs_retrain(&m, None, Some(0.4)));
        assert!(!needs_retrain(&m, None, None));
    }

    #[test]
    fn ksv_keeps_support_vectors() {
        let mut b = basket_of(&[(0.0, Label::Positive, 0), (1.0, Label::Positive, 1), (2.0, Label::Negative, 2), (3.0, Label::Negative, 3)]);
        b.set_alphas(&[0.0, 0.5, 0.0, 1.0]);
        let out = apply_ksv(&mut b);
        assert_eq!(out, KsvOutcome { removed: 2, fallback: false });
        let kept: Vec<u64> = b.entries().iter().map(|e| e.arrival_index()).collect();
        assert_eq!(kept, vec![1, 3]);

        let mut all = basket_of(&[(0.0, Label::Positive, 0), (1.0, Label::Negative, 1)]);
        all.set_alphas(&[0.1, 0.2]);
        let snapshot = all.clone();
        assert_eq!(apply_ksv(&mut all).removed, 0);
        assert_eq!(all, snapshot);
    }

    #[test]
    fn ksv_never_empties_the_basket() {
        let mut b = basket_of(&[(0.0, Label::Positive, 0), (1.0, Label::Negative, 1)]);
        let out = apply_ksv(&mut b);
        assert!(out.fallback);
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn relabel_follows_sign_with_positive_ties() {
        let mut b = basket_of(&[(-0.2, Label::Positive, 0), (0.0, Label::Negative, 1), (3.0, Label::Positive, 2)]);
        let mut m = lin(vec![1.0], 0.0);
        let changed = relabel_all(&mut b, &mut m);
        assert_eq!(changed, 2);
        assert_eq!(b.entries()[0].current_label, Label::Negative);
        assert_eq!(b.entries()[0].sample.label, Label::Positive);
        assert_eq!(b.entries()[1].current_label, Label::Positive);
        assert_eq!(b.entries()[2].current_label, Label::Positive);
        assert_eq!(relabel_all(&mut b, &mut m), 0);
    }

    #[test]
    fn relabel_removes_flipped_contribution() {
        let mut b = basket_of(&[(0.5, Label::Negative, 0), (-1.0, Label::Negative, 1)]);
        b.set_alphas(&[0.25, 0.5]);
        // Model represents the alphas plus an external push toward positive.
        let mut m = lin(vec![2.0], 0.3);
        let before = m.clone();
        relabel_all(&mut b, &mut m);
        assert_eq!(b.entries()[0].current_label, Label::Positive);
        assert_eq!(b.entries()[0].alpha, 0.0);
        assert!((m.w[0] - (before.w[0] + 0.25 * 0.5)).abs() < 1e-15);
        assert!((m.b - (before.b + 0.25)).abs() < 1e-15);
    }
}
