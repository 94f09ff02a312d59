//! Seeded random generators for distributions, channels and perturbations.
//!
//! Every randomized procedure derives an independent ChaCha stream from a
//! `(seed, index)` pair, so trials can run in any order or in parallel and
//! still reproduce bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};

use crate::channels::{Channel, ChannelFamily, Distribution};
use crate::error::Result;
use crate::info::channel_distance;

/// Independent substream for item `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform sample from the probability simplex (normalized exponentials).
pub fn simplex<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..size).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

pub fn distribution<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Distribution {
    Distribution::from_trusted(simplex(rng, size))
}

/// Channel with independent uniform-simplex rows.
pub fn channel<R: Rng + ?Sized>(rng: &mut R, inputs: usize, outputs: usize) -> Channel {
    let probs = (0..inputs).flat_map(|_| simplex(rng, outputs)).collect();
    Channel::from_trusted(inputs, outputs, probs)
}

pub fn family<R: Rng + ?Sized>(rng: &mut R, states: usize, inputs: usize, outputs: usize) -> ChannelFamily {
    let members = (0..states).map(|_| channel(rng, inputs, outputs)).collect();
    ChannelFamily::from_members(members).expect("members share alphabets")
}

/// `(1 - t) p + t r` with `r` a fresh simplex draw. The result stays on the
/// simplex and lies within `2 t` of `p` in variation distance.
pub fn mix_toward_random<R: Rng + ?Sized>(rng: &mut R, p: &[f64], t: f64) -> Vec<f64> {
    let r = simplex(rng, p.len());
    p.iter().zip(&r).map(|(a, b)| (1.0 - t) * a + t * b).collect()
}

/// Per-row mixing with a random row so that every row moves by strictly less
/// than `radius` in L1. The realized channel distance is returned alongside.
pub fn perturb_channel<R: Rng + ?Sized>(rng: &mut R, w: &Channel, radius: f64) -> (Channel, f64) {
    let mut probs = Vec::with_capacity(w.as_flat().len());
    for row in w.rows() {
        let target = simplex(rng, row.len());
        let gap: f64 = row.iter().zip(&target).map(|(a, b)| (a - b).abs()).sum();
        let u: f64 = rng.random::<f64>();
        let t = if gap > 0.0 {
            (u * radius / gap).min(1.0)
        } else {
            0.0
        };
        // Stay strictly inside the radius when t was clipped at 1.
        let t = if t * gap >= radius { 0.999 * radius / gap } else { t };
        probs.extend(row.iter().zip(&target).map(|(a, b)| (1.0 - t) * a + t * b));
    }
    let out = Channel::from_trusted(w.inputs(), w.outputs(), probs);
    let d = channel_distance(w, &out).expect("same shape");
    (out, d)
}

/// Perturbs every member of `family` by less than `radius`; both directed
/// distances between the input and the output are then below `radius`.
pub fn perturb_family<R: Rng + ?Sized>(
    rng: &mut R,
    family: &ChannelFamily,
    radius: f64,
) -> Result<ChannelFamily> {
    family.map_members(|m| Ok(perturb_channel(rng, m, radius).0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::family_distance;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<f64> = simplex(&mut substream(7, 3), 4);
        let b: Vec<f64> = simplex(&mut substream(7, 3), 4);
        let c: Vec<f64> = simplex(&mut substream(7, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturbation_stays_within_radius() {
        let mut rng = substream(1, 0);
        for _ in 0..200 {
            let w = channel(&mut rng, 3, 4);
            let radius = rng.random::<f64>() * 0.5;
            let (v, d) = perturb_channel(&mut rng, &w, radius);
            assert!(d < radius || radius == 0.0);
            assert_eq!(d, channel_distance(&w, &v).unwrap());
        }
        let fam = family(&mut rng, 3, 2, 3);
        let pert = perturb_family(&mut rng, &fam, 0.1).unwrap();
        assert!(family_distance(&fam, &pert).unwrap() < 0.1);
    }

    #[test]
    fn zero_radius_is_identity() {
        let mut rng = substream(2, 0);
        let w = channel(&mut rng, 2, 2);
        let (v, d) = perturb_channel(&mut rng, &w, 0.0);
        assert_eq!(d, 0.0);
        assert_eq!(v, w);
    }
}
