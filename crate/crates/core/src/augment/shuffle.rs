use crate::error::{Result, TpsError};
use crate::par;
use crate::patching::PatchTensor;
use crate::rng::{self, RngStream};

use super::variance::PatchScores;

/// How the `N_s` patches to shuffle are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// The `N_s` smallest scores; ties go to the lower patch index.
    LowestVariance,
    /// A uniform random subset of size `N_s`.
    Random,
}

/// Selected patch slots for one batch element and the permutation applied to
/// them: slot `selected[k]` receives the patch from `selected[permutation[k]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementPlan {
    pub selected: Vec<usize>,
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShufflePlan {
    n_patches: usize,
    elements: Vec<ElementPlan>,
}

impl ShufflePlan {
    pub fn new(n_patches: usize, elements: Vec<ElementPlan>) -> Result<Self> {
        for (b, e) in elements.iter().enumerate() {
            if e.selected.len() != e.permutation.len() {
                return Err(TpsError::PlanMismatch(format!(
                    "element {b}: {} slots but permutation of {}",
                    e.selected.len(),
                    e.permutation.len()
                )));
            }
            let mut seen = vec![false; e.selected.len()];
            for &k in &e.permutation {
                if k >= seen.len() || std::mem::replace(&mut seen[k], true) {
                    return Err(TpsError::PlanMismatch(format!(
                        "element {b}: permutation is not a bijection"
                    )));
                }
            }
            let mut slots = vec![false; n_patches];
            for &i in &e.selected {
                if i >= n_patches || std::mem::replace(&mut slots[i], true) {
                    return Err(TpsError::PlanMismatch(format!(
                        "element {b}: slot {i} repeated or out of range 0..{n_patches}"
                    )));
                }
            }
        }
        Ok(Self {
            n_patches,
            elements,
        })
    }

    pub fn n_patches(&self) -> usize {
        self.n_patches
    }

    pub fn elements(&self) -> &[ElementPlan] {
        &self.elements
    }

    pub fn elements_mut(&mut self) -> &mut [ElementPlan] {
        &mut self.elements
    }

    /// Number of selected patches per element.
    pub fn shuffled_count(&self) -> usize {
        self.elements.first().map_or(0, |e| e.selected.len())
    }

    /// True when no patch can move (`N_s ≤ 1`).
    pub fn is_noop(&self) -> bool {
        self.elements.iter().all(|e| e.selected.len() <= 1)
    }
}

/// Indices of the `count` smallest values, ascending by value, ties broken
/// by lower index first.
pub fn select_lowest(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable: equal scores keep ascending index order
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    order.truncate(count);
    order
}

/// Lowest-variance plan; element `b` draws its permutation from `stream.derive(b)`.
pub fn plan_shuffle(scores: &PatchScores, alpha: f64, stream: RngStream) -> Result<ShufflePlan> {
    let streams: Vec<RngStream> = (0..scores.batch() as u64).map(|b| stream.derive(b)).collect();
    plan_shuffle_with(scores, alpha, &streams, Selection::LowestVariance)
}

/// Builds a plan with one explicit stream per batch element.
pub fn plan_shuffle_with(
    scores: &PatchScores,
    alpha: f64,
    streams: &[RngStream],
    selection: Selection,
) -> Result<ShufflePlan> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(TpsError::Config(format!(
            "shuffle rate must lie in (0, 1], got {alpha}"
        )));
    }
    if streams.len() != scores.batch() {
        return Err(TpsError::PlanMismatch(format!(
            "{} streams for {} batch elements",
            streams.len(),
            scores.batch()
        )));
    }
    let n_patches = scores.n_patches();
    let count = super::shuffled_count(alpha, n_patches);
    let elements = par::map_range(scores.batch(), |b| {
        let mut rng = streams[b].rng();
        let selected = match selection {
            Selection::LowestVariance => select_lowest(scores.row(b), count),
            Selection::Random => rng::subset(n_patches, count, &mut rng),
        };
        let permutation = rng::permutation(count, &mut rng);
        ElementPlan {
            selected,
            permutation,
        }
    });
    Ok(ShufflePlan {
        n_patches,
        elements,
    })
}

/// `P_b[I_b] ← P_b[I_b][π_b]` for every element; unselected patches are untouched.
pub fn apply_shuffle(patches: &PatchTensor, plan: &ShufflePlan) -> Result<PatchTensor> {
    if plan.n_patches != patches.num_patches() || plan.elements.len() != patches.batch() {
        return Err(TpsError::PlanMismatch(format!(
            "plan for {} elements × {} patches, tensor has {} × {}",
            plan.elements.len(),
            plan.n_patches,
            patches.batch(),
            patches.num_patches()
        )));
    }
    let size = patches.patch_size();
    let mut out = patches.clone();
    let (element_size, data) = out.elements_mut();
    par::for_each_chunk_mut(data, element_size, |b, dst| {
        let src = patches.element(b);
        let e = &plan.elements[b];
        for (&slot, &k) in e.selected.iter().zip(&e.permutation) {
            let from = e.selected[k];
            dst[slot * size..(slot + 1) * size].copy_from_slice(&src[from * size..(from + 1) * size]);
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patching::{unfold, PatchGeometry};
    use crate::series::SeriesBatch;

    fn scores(row: &[f64]) -> PatchScores {
        PatchScores::from_raw(row.to_vec(), 1, row.len()).unwrap()
    }

    #[test]
    fn full_and_half_selection() {
        let s = scores(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let plan = plan_shuffle(&s, 1.0, RngStream::new(0)).unwrap();
        let mut sel = plan.elements()[0].selected.clone();
        sel.sort_unstable();
        assert_eq!(sel, vec![0, 1, 2, 3, 4]);
        let plan = plan_shuffle(&s, 0.5, RngStream::new(0)).unwrap();
        assert_eq!(plan.elements()[0].selected, vec![4, 3]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        assert_eq!(select_lowest(&[3.0, 1.0, 2.0, 1.0], 3), vec![1, 3, 2]);
        assert_eq!(select_lowest(&[0.0, 0.0, 0.0], 2), vec![0, 1]);
    }

    #[test]
    fn tiny_alpha_is_noop() {
        let s = scores(&[1.0, 2.0, 3.0]);
        let plan = plan_shuffle(&s, 0.2, RngStream::new(0)).unwrap();
        assert!(plan.is_noop());
        assert_eq!(plan.shuffled_count(), 0);
    }

    #[test]
    fn swap_exchanges_two_slots() {
        let x = SeriesBatch::from_fn(1, 6, 1, |_, t, _| t as f64).unwrap();
        let p = unfold(&x, 2, 1).unwrap();
        let plan = ShufflePlan::new(
            5,
            vec![ElementPlan {
                selected: vec![1, 3],
                permutation: vec![1, 0],
            }],
        )
        .unwrap();
        let out = apply_shuffle(&p, &plan).unwrap();
        assert_eq!(out.patch(0, 1), p.patch(0, 3));
        assert_eq!(out.patch(0, 3), p.patch(0, 1));
        for i in [0, 2, 4] {
            assert_eq!(out.patch(0, i), p.patch(0, i));
        }
    }

    #[test]
    fn identity_and_empty_plans() {
        let x = SeriesBatch::from_fn(2, 8, 2, |b, t, c| (b * 31 + t * 7 + c) as f64).unwrap();
        let p = unfold(&x, 3, 1).unwrap();
        let ident = ShufflePlan::new(
            6,
            vec![
                ElementPlan {
                    selected: vec![0, 2, 5],
                    permutation: vec![0, 1, 2],
                };
                2
            ],
        )
        .unwrap();
        assert_eq!(apply_shuffle(&p, &ident).unwrap(), p);
        let empty = ShufflePlan::new(
            6,
            vec![
                ElementPlan {
                    selected: vec![],
                    permutation: vec![],
                };
                2
            ],
        )
        .unwrap();
        assert_eq!(apply_shuffle(&p, &empty).unwrap(), p);
    }

    #[test]
    fn malformed_plans_rejected() {
        assert!(ShufflePlan::new(
            3,
            vec![ElementPlan {
                selected: vec![0, 3],
                permutation: vec![1, 0]
            }]
        )
        .is_err());
        assert!(ShufflePlan::new(
            3,
            vec![ElementPlan {
                selected: vec![0, 1],
                permutation: vec![1, 1]
            }]
        )
        .is_err());
        let g = PatchGeometry::new(4, 2, 1).unwrap();
        let p = PatchTensor::from_raw(vec![0.0; 6], 1, 1, g).unwrap();
        let wrong = ShufflePlan::new(4, vec![]).unwrap();
        assert!(matches!(apply_shuffle(&p, &wrong), Err(TpsError::PlanMismatch(_))));
    }

    #[test]
    fn random_selection_has_right_size() {
        let s = PatchScores::from_raw(vec![0.0; 20], 2, 10).unwrap();
        let streams = [RngStream::new(1), RngStream::new(2)];
        let plan = plan_shuffle_with(&s, 0.7, &streams, Selection::Random).unwrap();
        for e in plan.elements() {
            assert_eq!(e.selected.len(), 7);
        }
    }

    #[test]
    fn smaller_alpha_selects_prefix() {
        let row: Vec<f64> = (0..17).map(|i| ((i * 7919) % 13) as f64).collect();
        let s = scores(&row);
        let big = plan_shuffle(&s, 0.9, RngStream::new(3)).unwrap();
        for alpha in [0.1, 0.3, 0.5, 0.8] {
            let small = plan_shuffle(&s, alpha, RngStream::new(3)).unwrap();
            let sel = &small.elements()[0].selected;
            assert_eq!(sel[..], big.elements()[0].selected[..sel.len()]);
        }
    }
}
