//! Entropies, mutual information and total-variation distances.
//!
//! All information quantities are in bits. The variation distance is the full
//! L1 sum `sum |p - q|` with no factor one half, so it ranges over `[0, 2]`.

use crate::channels::{Channel, ChannelFamily, Distribution, WiretapUncertainty};
use crate::error::{Error, Result};

/// `-t log2 t` with the convention `0 log 0 = 0`.
#[inline]
fn neg_t_log_t(t: f64) -> f64 {
    if t > 0.0 {
        -t * t.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a (possibly unnormalized-by-drift) probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().copied().map(neg_t_log_t).sum()
}

/// `H2(eps) = -eps log2 eps - (1 - eps) log2 (1 - eps)`.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange {
            what: "binary entropy argument",
            value: eps,
        });
    }
    Ok(neg_t_log_t(eps) + neg_t_log_t(1.0 - eps))
}

/// Joint law of a pair `(A, B)` stored row-major, rows indexed by `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("joint distribution support"));
        }
        if mass.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} entries for a {rows}x{cols} joint",
                mass.len()
            )));
        }
        Distribution::new(mass.clone())?;
        Ok(JointDistribution { rows, cols, mass })
    }

    /// `P(a, b) = p(a) W(b|a)`.
    pub fn from_input_and_channel(p: &Distribution, w: &Channel) -> Result<Self> {
        if p.len() != w.inputs() {
            return Err(Error::dims(format!(
                "input distribution of size {} for a channel with {} inputs",
                p.len(),
                w.inputs()
            )));
        }
        let mass = w
            .rows()
            .zip(p.as_slice())
            .flat_map(|(row, px)| row.iter().map(move |v| px * v))
            .collect();
        Ok(JointDistribution {
            rows: w.inputs(),
            cols: w.outputs(),
            mass,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.mass.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in self.mass.chunks(self.cols) {
            for (o, v) in out.iter_mut().zip(r) {
                *o += v;
            }
        }
        out
    }
}

/// `H(B | A)` for a joint over `(A, B)`, computed as `H(A, B) - H(A)` and
/// clamped at zero against rounding.
pub fn conditional_entropy(joint: &JointDistribution) -> f64 {
    (entropy(&joint.mass) - entropy(&joint.row_marginal())).max(0.0)
}

/// `I(A; B)` of a row-major joint table.
pub fn joint_mutual_information(rows: usize, cols: usize, mass: &[f64]) -> f64 {
    debug_assert_eq!(mass.len(), rows * cols);
    let mut pa = vec![0.0; rows];
    let mut pb = vec![0.0; cols];
    for (a, r) in mass.chunks(cols).enumerate() {
        for (b, v) in r.iter().enumerate() {
            pa[a] += v;
            pb[b] += v;
        }
    }
    let mut total = 0.0;
    for (a, r) in mass.chunks(cols).enumerate() {
        for (b, &v) in r.iter().enumerate() {
            if v > 0.0 {
                total += v * (v / (pa[a] * pb[b])).log2();
            }
        }
    }
    total.max(0.0)
}

impl JointDistribution {
    pub fn mutual_information(&self) -> f64 {
        joint_mutual_information(self.rows, self.cols, &self.mass)
    }
}

/// `I(p, W)`: mutual information of input law `p` through channel `w`.
pub fn mutual_information(p: &Distribution, w: &Channel) -> Result<f64> {
    if p.len() != w.inputs() {
        return Err(Error::dims(format!(
            "input distribution of size {} for a channel with {} inputs",
            p.len(),
            w.inputs()
        )));
    }
    Ok(mutual_information_raw(p.as_slice(), w))
}

pub(crate) fn mutual_information_raw(p: &[f64], w: &Channel) -> f64 {
    let q = w.output_distribution(p);
    let mut total = 0.0;
    for (px, row) in p.iter().zip(w.rows()) {
        if *px <= 0.0 {
            continue;
        }
        for (wy, qy) in row.iter().zip(&q) {
            if *wy > 0.0 && *qy > 0.0 {
                total += px * wy * (wy / qy).log2();
            }
        }
    }
    total.max(0.0)
}

/// `sum_i |p_i - q_i|`.
pub fn variation_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::dims(format!("supports of size {} and {}", p.len(), q.len())));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// `d(W, W') = max_x sum_y |W(y|x) - W'(y|x)|`.
pub fn channel_distance(w: &Channel, v: &Channel) -> Result<f64> {
    if !w.same_shape(v) {
        return Err(Error::dims(format!(
            "{}x{} vs {}x{}",
            w.inputs(),
            w.outputs(),
            v.inputs(),
            v.outputs()
        )));
    }
    Ok(w.rows()
        .zip(v.rows())
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Distance between two wiretap channel pairs: the larger of the two link distances.
pub fn wiretap_pair_distance(a: (&Channel, &Channel), b: (&Channel, &Channel)) -> Result<f64> {
    Ok(channel_distance(a.0, b.0)?.max(channel_distance(a.1, b.1)?))
}

/// `max_{t in b} min_{s in a} d(a_s, b_t)`: how far the worst member of `b`
/// is from its nearest member of `a`. Swapping the arguments gives the other
/// directed distance.
pub fn directed_family_distance(a: &ChannelFamily, b: &ChannelFamily) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::dims(format!(
            "families over {}x{} and {}x{}",
            a.inputs(),
            a.outputs(),
            b.inputs(),
            b.outputs()
        )));
    }
    let mut worst: f64 = 0.0;
    for t in b.members() {
        let mut nearest = f64::INFINITY;
        for s in a.members() {
            nearest = nearest.min(channel_distance(s, t)?);
        }
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Symmetric distance between families: the larger directed distance.
pub fn family_distance(a: &ChannelFamily, b: &ChannelFamily) -> Result<f64> {
    Ok(directed_family_distance(a, b)?.max(directed_family_distance(b, a)?))
}

/// Distance between two wiretap uncertainty sets: the maximum of the four
/// directed family distances (both directions, both links).
pub fn uncertainty_distance(a: &WiretapUncertainty, b: &WiretapUncertainty) -> Result<f64> {
    Ok(family_distance(a.legitimate(), b.legitimate())?
        .max(family_distance(a.eavesdropper(), b.eavesdropper())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::convex_combine;

    fn w1() -> Channel {
        Channel::new(vec![vec![1., 0., 0.], vec![0., 0., 1.]]).unwrap()
    }
    fn w2() -> Channel {
        Channel::new(vec![vec![0., 0., 1.], vec![0., 1., 0.]]).unwrap()
    }
    fn what() -> Channel {
        Channel::new(vec![vec![1., 0., 0.], vec![0., 1., 0.]]).unwrap()
    }
    fn useless() -> Channel {
        Channel::bsc(0.5).unwrap()
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(binary_entropy(1.2).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn conditional_entropy_examples() {
        let j = JointDistribution::new(2, 2, vec![0.25; 4]).unwrap();
        assert!((conditional_entropy(&j) - 1.0).abs() < 1e-15);
        let j = JointDistribution::new(2, 2, vec![0.5, 0., 0., 0.5]).unwrap();
        assert_eq!(conditional_entropy(&j), 0.0);
        let j = JointDistribution::new(2, 2, vec![0.5, 0., 0.25, 0.25]).unwrap();
        assert!((conditional_entropy(&j) - 0.5).abs() < 1e-15);
        assert!(JointDistribution::new(2, 2, vec![0.5, 0.5, 0.5, 0.0]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let u = Distribution::uniform(2);
        assert!((mutual_information(&u, &Channel::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        let p = Distribution::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(mutual_information(&p, &useless()).unwrap(), 0.0);
        let half = Channel::new(vec![vec![0.5, 0., 0.5], vec![0., 0.5, 0.5]]).unwrap();
        // erasure with probability 1/2: I = (1 - 1/2) H(X)
        assert!((mutual_information(&u, &half).unwrap() - 0.5).abs() < 1e-15);
        let j = JointDistribution::from_input_and_channel(&u, &half).unwrap();
        assert!((j.mutual_information() - 0.5).abs() < 1e-15);
        assert!(mutual_information(&Distribution::uniform(3), &half).is_err());
    }

    #[test]
    fn variation_distance_examples() {
        assert_eq!(variation_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(variation_distance(&[1., 0.], &[0., 1.]).unwrap(), 2.0);
        assert!((variation_distance(&[0.7, 0.3], &[0.5, 0.5]).unwrap() - 0.4).abs() < 1e-15);
        assert!(variation_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn channel_distance_examples() {
        assert_eq!(channel_distance(&w1(), &w1()).unwrap(), 0.0);
        assert_eq!(channel_distance(&w1(), &w2()).unwrap(), 2.0);
        let l = 0.35;
        let w1l = convex_combine(&w1(), &what(), l).unwrap();
        assert!((channel_distance(&w1l, &w1()).unwrap() - 2.0 * l).abs() < 1e-15);
    }

    #[test]
    fn wiretap_pair_examples() {
        let v = useless();
        assert_eq!(wiretap_pair_distance((&w1(), &v), (&w1(), &v)).unwrap(), 0.0);
        assert_eq!(wiretap_pair_distance((&w1(), &v), (&w2(), &v)).unwrap(), 2.0);
        let v2 = Channel::new(vec![vec![0.55, 0.45], vec![0.5, 0.5]]).unwrap();
        assert!((wiretap_pair_distance((&w1(), &v), (&w1(), &v2)).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn directed_family_examples() {
        let one = ChannelFamily::single(w1());
        let two = ChannelFamily::from_members(vec![w1(), w2()]).unwrap();
        assert_eq!(directed_family_distance(&two, &two).unwrap(), 0.0);
        assert_eq!(directed_family_distance(&one, &two).unwrap(), 2.0);
        assert_eq!(directed_family_distance(&two, &one).unwrap(), 0.0);
    }

    #[test]
    fn uncertainty_distance_examples() {
        let eve = ChannelFamily::from_members(vec![useless(), useless()]).unwrap();
        let blackwell = ChannelFamily::from_members(vec![w1(), w2()]).unwrap();
        let lam = |l: f64| {
            let legit = ChannelFamily::from_members(vec![
                convex_combine(&w1(), &what(), l).unwrap(),
                convex_combine(&w2(), &what(), l).unwrap(),
            ])
            .unwrap();
            WiretapUncertainty::new(legit, eve.clone()).unwrap()
        };
        let a = lam(0.2);
        assert_eq!(uncertainty_distance(&a, &a).unwrap(), 0.0);
        let d = uncertainty_distance(&lam(0.2), &lam(0.45)).unwrap();
        assert!((d - 0.5).abs() < 1e-12);

        let full = WiretapUncertainty::new(blackwell, eve).unwrap();
        let trivial = WiretapUncertainty::new(
            ChannelFamily::single(what()),
            ChannelFamily::single(useless()),
        )
        .unwrap();
        // d(W1, W^) = 2 (row 2), d(W2, W^) = 2 (row 1)
        assert_eq!(uncertainty_distance(&full, &trivial).unwrap(), 2.0);
        assert_eq!(uncertainty_distance(&trivial, &full).unwrap(), 2.0);
    }
}
