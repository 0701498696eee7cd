//! Counter arithmetic of the inference rules.
//!
//! Every function here is pure: premises' counters in, conclusion counters
//! written to `out_passive` / `out_active`, `false` when the rule does not
//! apply. Span and node bookkeeping lives in the chart; this module only
//! decides what happens to the link-counters.

use crate::linkcounter::{raw, CounterError, LinkCounter};

/// Readings of the rules other than the default one, kept so the defaults
/// can be compared against them. All `false` is the sound configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuleVariants {
    /// Adjunction cancels the passive counter against the host's *passive*
    /// counter and the host's active counter against the adjoined active
    /// counter, instead of passive-against-active.
    pub literal_adjoin_counters: bool,
    /// Adjunction takes the host's top item as premise instead of its
    /// bottom item.
    pub adjoin_from_top: bool,
    /// When the left child dominates the foot, the right sibling's active
    /// counter must equal the left child's active counter.
    pub sibling_counter_must_match: bool,
}

/// Counters of one chart item.
#[derive(Debug, Clone, Copy)]
pub struct Counters<'a> {
    pub passive: &'a [u32],
    pub active: &'a [u32],
}

/// Binary node, one child possibly on the foot spine.
///
/// The result inherits the spine child's passive counter; the active
/// counter is the sum of both children's plus the node's own `⊤(η)`. A
/// child not on the spine must carry no passive requirements.
#[allow(clippy::too_many_arguments)]
pub fn combine_children(
    left: Counters<'_>,
    right: Counters<'_>,
    left_spine: bool,
    right_spine: bool,
    node_active: &[u32],
    variants: RuleVariants,
    out_passive: &mut [u32],
    out_active: &mut [u32],
) -> bool {
    debug_assert!(!(left_spine && right_spine));
    if !left_spine && !raw::is_zero(left.passive) {
        return false;
    }
    if !right_spine && !raw::is_zero(right.passive) {
        return false;
    }
    if left_spine && variants.sibling_counter_must_match && left.active != right.active {
        return false;
    }
    if left_spine {
        out_passive.copy_from_slice(left.passive);
    } else if right_spine {
        out_passive.copy_from_slice(right.passive);
    } else {
        out_passive.fill(0);
    }
    raw::add_into(out_active, left.active, right.active);
    for (o, x) in out_active.iter_mut().zip(node_active) {
        *o += x;
    }
    true
}

/// Unary node: counters pass through, `⊤(η)` joins the active side.
pub fn unary(
    child: Counters<'_>,
    node_active: &[u32],
    out_passive: &mut [u32],
    out_active: &mut [u32],
) {
    out_passive.copy_from_slice(child.passive);
    raw::add_into(out_active, child.active, node_active);
}

/// Adjunction of a derived auxiliary tree (`aux`) at a host node whose
/// subtree is summarized by `host`.
///
/// The adjoined material's unfulfilled passive requirements cancel against
/// the host subtree's unfulfilled active requirements. When the host
/// dominates a foot, leftover passive units flow down through that foot;
/// otherwise every passive unit must cancel now.
pub fn adjoin(
    host: Counters<'_>,
    aux: Counters<'_>,
    host_spine: bool,
    variants: RuleVariants,
    out_passive: &mut [u32],
    out_active: &mut [u32],
) -> bool {
    if !host_spine && (!raw::is_zero(host.passive) || !raw::leq(aux.passive, host.active)) {
        return false;
    }
    if variants.literal_adjoin_counters {
        raw::monus_into(out_passive, aux.passive, host.passive);
        for (o, x) in out_passive.iter_mut().zip(host.passive) {
            *o += x;
        }
        raw::monus_into(out_active, host.active, aux.active);
        for (o, x) in out_active.iter_mut().zip(aux.active) {
            *o += x;
        }
        return true;
    }
    raw::monus_into(out_passive, aux.passive, host.active);
    for (o, x) in out_passive.iter_mut().zip(host.passive) {
        *o += x;
    }
    raw::monus_into(out_active, host.active, aux.passive);
    for (o, x) in out_active.iter_mut().zip(aux.active) {
        *o += x;
    }
    true
}

/// Substitution of a derived initial tree at a slot with requirements
/// `slot_active`. The substituted tree must have no passive requirements left.
pub fn substitute(root: Counters<'_>, slot_active: &[u32], out_active: &mut [u32]) -> bool {
    if !raw::is_zero(root.passive) {
        return false;
    }
    raw::add_into(out_active, root.active, slot_active);
    true
}

/// Pruning test: keep an item unless its combined norm exceeds `c·n`.
pub fn keep(passive: &[u32], active: &[u32], max_links_per_set: usize, n: usize) -> bool {
    raw::norm(passive) + raw::norm(active) <= (max_links_per_set as u64) * (n as u64)
}

/// [`adjoin`] on owned counters.
pub fn adjoin_counters(
    host: (&LinkCounter, &LinkCounter),
    aux: (&LinkCounter, &LinkCounter),
    host_spine: bool,
    variants: RuleVariants,
) -> Result<Option<(LinkCounter, LinkCounter)>, CounterError> {
    let fp = host.0.fingerprint();
    for c in [host.1, aux.0, aux.1] {
        if c.fingerprint() != fp || c.as_slice().len() != host.0.as_slice().len() {
            return Err(CounterError::GrammarMismatch);
        }
    }
    let dim = host.0.as_slice().len();
    let (mut p, mut a) = (vec![0; dim], vec![0; dim]);
    let fired = adjoin(
        Counters {
            passive: host.0.as_slice(),
            active: host.1.as_slice(),
        },
        Counters {
            passive: aux.0.as_slice(),
            active: aux.1.as_slice(),
        },
        host_spine,
        variants,
        &mut p,
        &mut a,
    );
    Ok(fired.then(|| (LinkCounter::from_raw(fp, &p), LinkCounter::from_raw(fp, &a))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_combine(
        left: ([u32; 1], [u32; 1]),
        right: ([u32; 1], [u32; 1]),
        left_spine: bool,
        right_spine: bool,
        node: [u32; 1],
    ) -> Option<([u32; 1], [u32; 1])> {
        let (mut p, mut a) = ([0], [0]);
        combine_children(
            Counters {
                passive: &left.0,
                active: &left.1,
            },
            Counters {
                passive: &right.0,
                active: &right.1,
            },
            left_spine,
            right_spine,
            &node,
            RuleVariants::default(),
            &mut p,
            &mut a,
        )
        .then_some((p, a))
    }

    fn run_adjoin(
        host: ([u32; 1], [u32; 1]),
        aux: ([u32; 1], [u32; 1]),
        spine: bool,
    ) -> Option<([u32; 1], [u32; 1])> {
        let (mut p, mut a) = ([0], [0]);
        adjoin(
            Counters {
                passive: &host.0,
                active: &host.1,
            },
            Counters {
                passive: &aux.0,
                active: &aux.1,
            },
            spine,
            RuleVariants::default(),
            &mut p,
            &mut a,
        )
        .then_some((p, a))
    }

    #[test]
    fn left_spine_sums_active_counters() {
        assert_eq!(
            run_combine(([0], [1]), ([0], [1]), true, false, [0]),
            Some(([0], [2]))
        );
        assert_eq!(
            run_combine(([2], [0]), ([0], [0]), true, false, [0]),
            Some(([2], [0]))
        );
        // sibling carrying passive requirements blocks the rule
        assert_eq!(run_combine(([0], [1]), ([1], [1]), true, false, [0]), None);
    }

    #[test]
    fn right_spine_mirrors_left() {
        assert_eq!(
            run_combine(([0], [1]), ([0], [1]), false, true, [0]),
            Some(([0], [2]))
        );
        assert_eq!(
            run_combine(([0], [0]), ([3], [0]), false, true, [0]),
            Some(([3], [0]))
        );
    }

    #[test]
    fn footless_children_concatenate() {
        assert_eq!(
            run_combine(([0], [1]), ([0], [0]), false, false, [1]),
            Some(([0], [2]))
        );
    }

    #[test]
    fn unary_adds_node_requirements() {
        let (mut p, mut a) = ([0], [0]);
        unary(
            Counters {
                passive: &[0],
                active: &[1],
            },
            &[1],
            &mut p,
            &mut a,
        );
        assert_eq!((p, a), ([0], [2]));
    }

    #[test]
    fn adjunction_on_spine() {
        // exact cancellation
        assert_eq!(run_adjoin(([0], [1]), ([1], [0]), true), Some(([0], [0])));
        // monus remainder flows down
        assert_eq!(run_adjoin(([0], [1]), ([2], [0]), true), Some(([1], [0])));
        assert_eq!(run_adjoin(([0], [1]), ([2], [3]), true), Some(([1], [3])));
        // all zero
        assert_eq!(run_adjoin(([0], [0]), ([0], [0]), true), Some(([0], [0])));
    }

    #[test]
    fn adjunction_off_spine() {
        assert_eq!(run_adjoin(([0], [0]), ([1], [0]), false), None);
        assert_eq!(run_adjoin(([0], [1]), ([1], [4]), false), Some(([0], [4])));
        assert_eq!(run_adjoin(([0], [2]), ([0], [1]), false), Some(([0], [3])));
    }

    #[test]
    fn substitution_needs_no_passive() {
        let mut a = [0];
        assert!(substitute(
            Counters {
                passive: &[0],
                active: &[1]
            },
            &[1],
            &mut a
        ));
        assert_eq!(a, [2]);
        assert!(!substitute(
            Counters {
                passive: &[1],
                active: &[0]
            },
            &[0],
            &mut a
        ));
    }

    #[test]
    fn pruning_threshold_is_strict() {
        assert!(!keep(&[2], &[2], 1, 3));
        assert!(keep(&[1], &[2], 1, 3));
        assert!(keep(&[], &[], 0, 5));
        assert!(!keep(&[1], &[0], 0, 5));
    }

    #[test]
    fn variant_readings_differ() {
        let v = RuleVariants {
            literal_adjoin_counters: true,
            ..Default::default()
        };
        let (mut p, mut a) = ([0], [0]);
        assert!(adjoin(
            Counters {
                passive: &[0],
                active: &[1]
            },
            Counters {
                passive: &[1],
                active: &[0]
            },
            true,
            v,
            &mut p,
            &mut a
        ));
        // nothing cancels under the literal reading
        assert_eq!((p, a), ([1], [1]));
        let v = RuleVariants {
            sibling_counter_must_match: true,
            ..Default::default()
        };
        let (mut p, mut a) = ([0], [0]);
        assert!(!combine_children(
            Counters {
                passive: &[0],
                active: &[0]
            },
            Counters {
                passive: &[0],
                active: &[1]
            },
            true,
            false,
            &[0],
            v,
            &mut p,
            &mut a
        ));
    }
}
