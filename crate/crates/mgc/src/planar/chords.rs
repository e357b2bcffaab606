//! Exact chord arrangement: κ points in convex position on the unit circle
//! (rational parametrization), all pairwise chords drawn as straight
//! segments. Crossings are the interleaving index pairs; their order along
//! each chord and the local counterclockwise frame at every crossing are
//! computed in exact rational arithmetic, so the resulting rotation system
//! is a genuine disk embedding with only pairwise crossings.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

type Q = BigRational;

#[derive(Clone, Debug)]
pub(crate) struct Pt {
    pub x: Q,
    pub y: Q,
}

impl Pt {
    fn sub(&self, o: &Pt) -> Pt {
        Pt {
            x: &self.x - &o.x,
            y: &self.y - &o.y,
        }
    }
    fn add(&self, o: &Pt) -> Pt {
        Pt {
            x: &self.x + &o.x,
            y: &self.y + &o.y,
        }
    }
}

fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

fn cross(a: &Pt, b: &Pt) -> Q {
    &a.x * &b.y - &a.y * &b.x
}

/// Strict counterclockwise angular comparison of direction vectors, starting
/// just above the positive x-axis.
fn angle_less(a: &Pt, b: &Pt) -> bool {
    let half = |v: &Pt| -> u8 {
        let zero = q(0);
        if v.y > zero || (v.y == zero && v.x > zero) {
            0
        } else {
            1
        }
    };
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha < hb;
    }
    cross(a, b) > q(0)
}

/// A crossing of two chords, each stored as (low, high) index pairs.
#[derive(Clone, Debug)]
pub(crate) struct Crossing {
    pub chord1: (usize, usize),
    pub chord2: (usize, usize),
    /// True when the counterclockwise frame at the crossing reads
    /// (toward chord1.0, toward chord2.0, toward chord1.1, toward chord2.1);
    /// false when chord2's sides are swapped.
    pub ccw_c2_first: bool,
}

/// One slot in a circle vertex's counterclockwise rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CircleSlot {
    /// The outward direction (flip edge / boundary attachment).
    Out,
    /// First segment of the chord toward this partner.
    Chord(usize),
}

pub(crate) struct ChordArrangement {
    pub kappa: usize,
    pub crossings: Vec<Crossing>,
    /// Chord → ids into `crossings`, ordered from the chord's low endpoint.
    pub along: HashMap<(usize, usize), Vec<usize>>,
    /// Per circle vertex: full ccw rotation of chord starts and the outward
    /// direction.
    pub rotations: Vec<Vec<CircleSlot>>,
}

/// Whether chords (a,b) and (c,d) interleave around the circle (a<b, c<d).
pub(crate) fn interleave(a: usize, b: usize, c: usize, d: usize) -> bool {
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

pub(crate) fn chord_arrangement(kappa: usize) -> Result<ChordArrangement> {
    for attempt in 0..8u32 {
        match try_arrangement(kappa, attempt) {
            Ok(a) => return Ok(a),
            Err(_) if attempt + 1 < 8 => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

fn try_arrangement(kappa: usize, attempt: u32) -> Result<ChordArrangement> {
    // Rational points on the unit circle: t ↦ ((1−t²)/(1+t²), 2t/(1+t²)),
    // strictly increasing t gives strictly increasing polar angle, hence
    // convex position in counterclockwise index order.
    let points: Vec<Pt> = (0..kappa)
        .map(|j| {
            let t = q(j as i64 + 1)
                + q((j * j) as i64) / q(997 + 13 * attempt as i64)
                + q(attempt as i64) / q(101);
            let t2 = &t * &t;
            let den = q(1) + t2.clone();
            Pt {
                x: (q(1) - t2) / den.clone(),
                y: q(2) * t / den,
            }
        })
        .collect();

    let mut crossings = Vec::new();
    let mut along: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for a in 0..kappa {
        for b in (a + 1)..kappa {
            along.insert((a, b), Vec::new());
        }
    }
    for a in 0..kappa {
        for b in (a + 1)..kappa {
            for c in (a + 1)..kappa {
                for d in (c + 1)..kappa {
                    if (a, b) >= (c, d) || !interleave(a, b, c, d) {
                        continue;
                    }
                    let dir1 = points[b].sub(&points[a]);
                    let dir2 = points[d].sub(&points[c]);
                    let id = crossings.len();
                    crossings.push(Crossing {
                        chord1: (a, b),
                        chord2: (c, d),
                        ccw_c2_first: cross(&dir1, &dir2) > q(0),
                    });
                    along.get_mut(&(a, b)).unwrap().push(id);
                    along.get_mut(&(c, d)).unwrap().push(id);
                }
            }
        }
    }

    // Order crossings along each chord by the exact intersection parameter.
    for (&(a, b), ids) in along.iter_mut() {
        let pa = &points[a];
        let dir = points[b].sub(pa);
        let mut keyed: Vec<(Q, usize)> = Vec::with_capacity(ids.len());
        for &id in ids.iter() {
            let cr = &crossings[id];
            let (c, d) = if cr.chord1 == (a, b) {
                cr.chord2
            } else {
                cr.chord1
            };
            let pc = &points[c];
            let dcd = points[d].sub(pc);
            let denom = cross(&dir, &dcd);
            if denom == q(0) {
                return Err(Error::NotPlanar("parallel chords".into()));
            }
            let s = cross(&pc.sub(pa), &dcd) / denom;
            keyed.push((s, id));
        }
        keyed.sort_by(|x, y| x.0.cmp(&y.0));
        for w in keyed.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::NotPlanar("coincident crossings".into()));
            }
        }
        *ids = keyed.into_iter().map(|(_, id)| id).collect();
    }

    // Counterclockwise rotation at each circle vertex: outward direction
    // plus the chord directions.
    let mut rotations = Vec::with_capacity(kappa);
    for j in 0..kappa {
        let out_dir = outward_direction(&points, j);
        let mut items: Vec<(Pt, CircleSlot)> = vec![(out_dir, CircleSlot::Out)];
        for l in 0..kappa {
            if l == j {
                continue;
            }
            items.push((points[l].sub(&points[j]), CircleSlot::Chord(l)));
        }
        items.sort_by(|x, y| {
            if angle_less(&x.0, &y.0) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        rotations.push(items.into_iter().map(|(_, s)| s).collect());
    }

    Ok(ChordArrangement {
        kappa,
        crossings,
        along,
        rotations,
    })
}

fn outward_direction(points: &[Pt], j: usize) -> Pt {
    let kappa = points.len();
    if kappa == 1 {
        return Pt { x: q(1), y: q(0) };
    }
    if kappa == 2 {
        let d = points[j].sub(&points[1 - j]);
        // rotate +90°: stays off the chord line
        return Pt {
            x: q(0) - d.y.clone(),
            y: d.x.clone(),
        };
    }
    let prev = &points[(j + kappa - 1) % kappa];
    let next = &points[(j + 1) % kappa];
    points[j].sub(prev).add(&points[j].sub(next))
}

/// Geometric x-coordinate keys for a low-width left-to-right sweep: circle
/// vertices map to their own abscissa, crossings to the intersection point's
/// abscissa.
pub(crate) fn sweep_keys(kappa: usize, arr: &ChordArrangement) -> (Vec<f64>, Vec<f64>) {
    // Recompute approximate coordinates (f64 is fine for ordering keys).
    let pts: Vec<(f64, f64)> = (0..kappa)
        .map(|j| {
            let t = (j as f64 + 1.0) + (j * j) as f64 / 997.0;
            let t2 = t * t;
            ((1.0 - t2) / (1.0 + t2), 2.0 * t / (1.0 + t2))
        })
        .collect();
    let circle: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut cross_keys = Vec::with_capacity(arr.crossings.len());
    for cr in &arr.crossings {
        let (a, b) = cr.chord1;
        let (c, d) = cr.chord2;
        let (pa, pb, pc, pd) = (pts[a], pts[b], pts[c], pts[d]);
        let d1 = (pb.0 - pa.0, pb.1 - pa.1);
        let d2 = (pd.0 - pc.0, pd.1 - pc.1);
        let denom = d1.0 * d2.1 - d1.1 * d2.0;
        let s = ((pc.0 - pa.0) * d2.1 - (pc.1 - pa.1) * d2.0) / denom;
        cross_keys.push(pa.0 + s * d1.0);
    }
    (circle, cross_keys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_counts() {
        // every 4-subset of circle vertices contributes exactly one crossing
        for kappa in 2..=7usize {
            let arr = chord_arrangement(kappa).unwrap();
            let expect = if kappa >= 4 {
                (kappa * (kappa - 1) * (kappa - 2) * (kappa - 3)) / 24
            } else {
                0
            };
            assert_eq!(arr.crossings.len(), expect, "kappa={kappa}");
        }
    }

    #[test]
    fn rotations_contain_everything() {
        let arr = chord_arrangement(6).unwrap();
        for (j, rot) in arr.rotations.iter().enumerate() {
            assert_eq!(rot.len(), 6); // 5 chords + out
            assert!(rot.contains(&CircleSlot::Out));
            for l in 0..6 {
                if l != j {
                    assert!(rot.contains(&CircleSlot::Chord(l)));
                }
            }
        }
    }
}
