//! Depth-indexed truncations of maps on infinite-dimensional spaces.

use serde::Serialize;

use super::{Channel, TraceConvention};
use crate::error::{Error, Result};
use crate::numerics::{c, trace_re, CMatrix};

/// One member of a user-supplied family.
#[derive(Debug, Clone)]
pub struct UserMember {
    pub depth: usize,
    pub channel: Channel,
    pub safe_horizon: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum TruncationFamily {
    /// `d` creation operators on the full Fock space over `C^d`, tensored
    /// with `C^multiplicity`.
    FreeTuple { d: usize, multiplicity: usize },
    /// The unilateral shift.
    TruncatedShift,
    /// The shift direct-summed with a fixed unitary block.
    ShiftPlusUnitary { unitary: CMatrix },
    /// Explicit channels, one per depth label.
    User { members: Vec<UserMember> },
}

impl TruncationFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            TruncationFamily::FreeTuple { .. } => "free_tuple",
            TruncationFamily::TruncatedShift => "truncated_shift",
            TruncationFamily::ShiftPlusUnitary { .. } => "shift_plus_unitary",
            TruncationFamily::User { .. } => "user",
        }
    }
}

/// A family member at a fixed depth.
#[derive(Debug, Clone)]
pub struct TruncatedChannel {
    pub channel: Channel,
    pub depth: usize,
    /// Largest `k` for which `tr(I − Θ^k(I))` equals the untruncated value.
    pub safe_horizon: usize,
    /// Basis indices touched by the truncation (the top degree).
    pub boundary: Vec<usize>,
    pub kind: &'static str,
}

impl TruncatedChannel {
    pub fn interior(&self) -> Vec<usize> {
        let mut mask = vec![true; self.channel.n()];
        for &b in &self.boundary {
            mask[b] = false;
        }
        (0..mask.len()).filter(|&i| mask[i]).collect()
    }

    /// Diagonal projection onto the interior.
    pub fn interior_projection(&self) -> CMatrix {
        let n = self.channel.n();
        let mut p = CMatrix::zeros(n, n);
        for i in self.interior() {
            p[(i, i)] = c(1.0, 0.0);
        }
        p
    }
}

/// Summary of the stabilization behaviour of a family.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyShape {
    pub dim: usize,
    pub kraus: usize,
    pub safe_horizon: usize,
}

fn word_count(d: usize, len: usize) -> usize {
    d.pow(len as u32)
}

/// Number of Fock words of length `< len`.
fn words_below(d: usize, len: usize) -> usize {
    (0..len).map(|l| word_count(d, l)).sum()
}

fn shift(dim: usize) -> CMatrix {
    let mut v = CMatrix::zeros(dim, dim);
    for i in 0..dim.saturating_sub(1) {
        v[(i + 1, i)] = c(1.0, 0.0);
    }
    v
}

/// The channel of `f` at `depth`, with its trusted horizon.
pub fn family_channel(f: &TruncationFamily, depth: usize) -> Result<TruncatedChannel> {
    if depth == 0 {
        return Err(Error::InvalidFamily("depth must be at least 1".into()));
    }
    let trace = TraceConvention::Standard;
    match f {
        TruncationFamily::FreeTuple { d, multiplicity } => {
            let (d, r) = (*d, *multiplicity);
            if d == 0 || r == 0 {
                return Err(Error::InvalidFamily(
                    "free_tuple needs d >= 1 and multiplicity >= 1".into(),
                ));
            }
            let dim = r * words_below(d, depth + 1);
            if dim > 1 << 14 {
                return Err(Error::InvalidFamily(format!(
                    "free_tuple({d},{r}) at depth {depth} has dimension {dim}"
                )));
            }
            let mut kraus = vec![CMatrix::zeros(dim, dim); d];
            for len in 0..depth {
                let base = r * words_below(d, len);
                let next = r * words_below(d, len + 1);
                for w in 0..word_count(d, len) {
                    for (letter, l) in kraus.iter_mut().enumerate() {
                        let target = letter * word_count(d, len) + w;
                        for s in 0..r {
                            l[(next + target * r + s, base + w * r + s)] = c(1.0, 0.0);
                        }
                    }
                }
            }
            let top = r * words_below(d, depth);
            Ok(TruncatedChannel {
                channel: Channel::unchecked(kraus, trace)?,
                depth,
                safe_horizon: depth,
                boundary: (top..dim).collect(),
                kind: f.kind(),
            })
        }
        TruncationFamily::TruncatedShift => Ok(TruncatedChannel {
            channel: Channel::unchecked(vec![shift(depth)], trace)?,
            depth,
            safe_horizon: depth - 1,
            boundary: vec![depth - 1],
            kind: f.kind(),
        }),
        TruncationFamily::ShiftPlusUnitary { unitary } => {
            let m = unitary.nrows();
            if m == 0 || !unitary.is_square() {
                return Err(Error::InvalidFamily(
                    "shift_plus_unitary needs a nonempty square unitary block".into(),
                ));
            }
            let residual = crate::numerics::unitarity_defect(unitary);
            if residual > 1e-8 * (m as f64).sqrt() {
                return Err(Error::NotUnitary { residual });
            }
            let k = crate::numerics::direct_sum(&shift(depth), unitary);
            Ok(TruncatedChannel {
                channel: Channel::unchecked(vec![k], trace)?,
                depth,
                safe_horizon: depth - 1,
                boundary: vec![depth - 1],
                kind: f.kind(),
            })
        }
        TruncationFamily::User { members } => user_member(members, depth),
    }
}

fn user_member(members: &[UserMember], depth: usize) -> Result<TruncatedChannel> {
    let pos = members
        .iter()
        .position(|m| m.depth == depth)
        .ok_or_else(|| {
            let labels: Vec<String> = members.iter().map(|m| m.depth.to_string()).collect();
            Error::InvalidFamily(format!(
                "no member at depth {depth} (available: {})",
                labels.join(", ")
            ))
        })?;
    let member = &members[pos];
    let safe_horizon = match member.safe_horizon {
        Some(h) => h,
        None => match members.iter().find(|m| m.depth == depth + 1) {
            Some(next) => agreement_horizon(&member.channel, &next.channel),
            None => 0,
        },
    };
    Ok(TruncatedChannel {
        channel: member.channel.clone(),
        depth,
        safe_horizon,
        boundary: Vec::new(),
        kind: "user",
    })
}

/// Largest `k` such that the defect traces of the two channels agree for
/// every `j ≤ k` (to `1e-10`).
fn agreement_horizon(a: &Channel, b: &Channel) -> usize {
    let cap = 4 * a.n().max(b.n()) + 4;
    let (mut xa, mut xb) = (
        crate::numerics::identity(a.n()),
        crate::numerics::identity(b.n()),
    );
    let mut k = 0;
    while k < cap {
        let na = a.apply_raw(&xa);
        let nb = b.apply_raw(&xb);
        let pa = a.n() as f64 - trace_re(&na);
        let pb = b.n() as f64 - trace_re(&nb);
        if (pa - pb).abs() > 1e-10 {
            break;
        }
        k += 1;
        xa = na;
        xb = nb;
    }
    k
}

/// Dimension, Kraus count and horizon of a built-in family at `depth`,
/// without building it.
pub fn family_shape(f: &TruncationFamily, depth: usize) -> Option<FamilyShape> {
    match f {
        TruncationFamily::FreeTuple { d, multiplicity } => Some(FamilyShape {
            dim: multiplicity * words_below(*d, depth + 1),
            kraus: *d,
            safe_horizon: depth,
        }),
        TruncationFamily::TruncatedShift => Some(FamilyShape {
            dim: depth,
            kraus: 1,
            safe_horizon: depth.saturating_sub(1),
        }),
        TruncationFamily::ShiftPlusUnitary { unitary } => Some(FamilyShape {
            dim: depth + unitary.nrows(),
            kraus: 1,
            safe_horizon: depth.saturating_sub(1),
        }),
        TruncationFamily::User { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{distance, identity};

    fn defect_traces(tc: &TruncatedChannel, kmax: usize) -> Vec<f64> {
        let n = tc.channel.n() as f64;
        tc.channel
            .powers_on_identity(kmax)
            .iter()
            .map(|p| n - trace_re(p))
            .collect()
    }

    #[test]
    fn free_tuple_dimensions() {
        let f = TruncationFamily::FreeTuple { d: 2, multiplicity: 1 };
        let tc = family_channel(&f, 4).unwrap();
        assert_eq!(tc.channel.n(), 31);
        assert_eq!(tc.channel.kraus().len(), 2);
        assert_eq!(tc.safe_horizon, 4);
        assert_eq!(tc.boundary.len(), 16);
        // the creation operators are isometries off the top degree
        for l in tc.channel.kraus() {
            let g = l.adjoint() * l;
            for i in 0..31 {
                let want = if i < 15 { 1.0 } else { 0.0 };
                assert_eq!(g[(i, i)].re, want);
            }
        }
        let f3 = TruncationFamily::FreeTuple { d: 3, multiplicity: 2 };
        assert_eq!(family_channel(&f3, 2).unwrap().channel.n(), 2 * 13);
    }

    #[test]
    fn shift_defects_count_steps() {
        let tc = family_channel(&TruncationFamily::TruncatedShift, 8).unwrap();
        assert_eq!(tc.channel.n(), 8);
        assert_eq!(tc.safe_horizon, 7);
        let p = defect_traces(&tc, 7);
        for (k, v) in p.iter().enumerate() {
            assert_eq!(*v, k as f64);
        }
    }

    #[test]
    fn shift_plus_unitary_limit() {
        let u = CMatrix::from_element(1, 1, c(0.0, 1.0));
        let tc = family_channel(&TruncationFamily::ShiftPlusUnitary { unitary: u }, 5).unwrap();
        assert_eq!(tc.channel.n(), 6);
        let last = tc.channel.powers_on_identity(6).pop().unwrap();
        let mut want = CMatrix::zeros(6, 6);
        want[(5, 5)] = c(1.0, 0.0);
        assert!(distance(&last, &want) < 1e-14);
    }

    #[test]
    fn families_stabilize_across_depths() {
        let fams = [
            TruncationFamily::FreeTuple { d: 2, multiplicity: 1 },
            TruncationFamily::FreeTuple { d: 3, multiplicity: 2 },
            TruncationFamily::TruncatedShift,
            TruncationFamily::ShiftPlusUnitary {
                unitary: identity(2),
            },
        ];
        for f in &fams {
            for depth in 1..5 {
                let a = family_channel(f, depth).unwrap();
                let b = family_channel(f, depth + 1).unwrap();
                let pa = defect_traces(&a, a.safe_horizon);
                let pb = defect_traces(&b, a.safe_horizon);
                for (x, y) in pa.iter().zip(&pb) {
                    assert!((x - y).abs() < 1e-10, "{} depth {depth}", f.kind());
                }
            }
        }
    }

    #[test]
    fn user_horizon_from_neighbour() {
        let members: Vec<UserMember> = (1..=3)
            .map(|depth| UserMember {
                depth,
                channel: family_channel(&TruncationFamily::TruncatedShift, depth + 1)
                    .unwrap()
                    .channel,
                safe_horizon: None,
            })
            .collect();
        let f = TruncationFamily::User { members };
        let tc = family_channel(&f, 2).unwrap();
        assert_eq!(tc.safe_horizon, 3);
        assert_eq!(family_channel(&f, 3).unwrap().safe_horizon, 0);
        assert!(family_channel(&f, 7).is_err());
    }
}
