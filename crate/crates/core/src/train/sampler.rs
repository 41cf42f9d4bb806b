use rand::Rng;

use crate::data::InteractionMatrix;

/// One BPR training example: the user, an item they interacted with, and an
/// item they did not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub user: u32,
    pub pos: u32,
    pub neg: u32,
}

/// Reusable sampling state over a fixed training matrix.
pub(crate) struct TripleSampler<'a> {
    matrix: &'a InteractionMatrix,
    eligible: Vec<u32>,
}

impl<'a> TripleSampler<'a> {
    pub fn new(matrix: &'a InteractionMatrix) -> Self {
        let n_items = matrix.n_items();
        let mut eligible = Vec::new();
        for u in 0..matrix.n_users() as u32 {
            let deg = matrix.user_degree(u);
            if deg == 0 {
                continue;
            }
            if deg >= n_items {
                log::warn!(
                    "user {} interacted with the whole catalog; skipped from triple sampling",
                    matrix.user_map().key(u)
                );
                continue;
            }
            eligible.push(u);
        }
        TripleSampler { matrix, eligible }
    }

    pub fn has_users(&self) -> bool {
        !self.eligible.is_empty()
    }

    /// Uniform user, uniform positive from their profile, negative rejection-
    /// resampled over the catalog until it lands outside the profile.
    pub fn sample(&self, rng: &mut impl Rng) -> Triple {
        let user = self.eligible[rng.gen_range(0..self.eligible.len())];
        let row = self.matrix.row(user);
        let pos = row[rng.gen_range(0..row.len())];
        let n_items = self.matrix.n_items() as u32;
        let neg = loop {
            let candidate = rng.gen_range(0..n_items);
            if row.binary_search(&candidate).is_err() {
                break candidate;
            }
        };
        Triple { user, pos, neg }
    }

    pub fn sample_batch(&self, batch: usize, rng: &mut impl Rng) -> Vec<Triple> {
        (0..batch).map(|_| self.sample(rng)).collect()
    }
}

/// Draw `batch` BPR triples from the training matrix.
pub fn sample_triples(
    matrix: &InteractionMatrix,
    batch: usize,
    rng: &mut impl Rng,
) -> Vec<Triple> {
    let sampler = TripleSampler::new(matrix);
    if !sampler.has_users() {
        return Vec::new();
    }
    sampler.sample_batch(batch, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_matrix, InteractionRecord};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix_from(pairs: &[(&str, &str)]) -> InteractionMatrix {
        let records: Vec<InteractionRecord> = pairs
            .iter()
            .map(|(u, i)| InteractionRecord {
                user_key: (*u).into(),
                item_key: (*i).into(),
                rating: None,
                timestamp: None,
            })
            .collect();
        build_matrix(&records).unwrap()
    }

    #[test]
    fn forced_negative_when_only_one_candidate() {
        // Catalog {a,b}; the user holds only a, so b is the only negative.
        let m = matrix_from(&[("u1", "a"), ("u2", "b"), ("u2", "a")]);
        // u2 holds the whole catalog and must be skipped.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let triples = sample_triples(&m, 50, &mut rng);
        assert_eq!(triples.len(), 50);
        for t in triples {
            assert_eq!(t.user, 0);
            assert_eq!(t.pos, 0);
            assert_eq!(t.neg, 1);
        }
    }

    #[test]
    fn triples_respect_membership_invariants() {
        let pairs: Vec<(String, String)> = (0..10)
            .flat_map(|u| (0..4).map(move |i| (format!("u{u}"), format!("i{}", (u + i * 3) % 15))))
            .collect();
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(u, i)| (u.as_str(), i.as_str())).collect();
        let m = matrix_from(&refs);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in sample_triples(&m, 2000, &mut rng) {
            assert!(m.contains(t.user, t.pos));
            assert!(!m.contains(t.user, t.neg));
        }
    }

    #[test]
    fn catalog_covering_user_skipped() {
        let m = matrix_from(&[("all", "a"), ("all", "b"), ("half", "a")]);
        let sampler = TripleSampler::new(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert_eq!(sampler.sample(&mut rng).user, 1);
        }
    }
}
