use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Assignment, SearchError, SearchSpec};

/// Exact binomial coefficient `C(n, k)`.
pub fn count_subsets(n: u64, k: u64) -> Result<u128, SearchError> {
    if k > n {
        return Err(SearchError::BadArgs(format!("cannot choose {k} of {n}")));
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1): it is C(n, i) * (n - i)
        c = c.checked_mul((n - i) as u128).ok_or_else(|| SearchError::BadArgs(format!("C({n}, {k}) overflows")))?
            / (i as u128 + 1);
    }
    Ok(c)
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_subset(mut rank: u128, n: usize, k: usize) -> Result<Vec<usize>, SearchError> {
    let total = count_subsets(n as u64, k as u64)?;
    if rank >= total {
        return Err(SearchError::BadArgs(format!("rank {rank} out of range for C({n}, {k}) = {total}")));
    }
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = (k - slot - 1) as u64;
        loop {
            // subsets that put `next` in this slot
            let with = count_subsets((n - next - 1) as u64, remaining)?;
            if rank < with {
                out.push(next);
                next += 1;
                break;
            }
            rank -= with;
            next += 1;
        }
    }
    Ok(out)
}

/// One (feature subset, parameter assignment) pair and its stream position.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPoint {
    pub ordinal: u64,
    pub feature_subset: Vec<String>,
    pub params: Assignment,
}

impl SearchSpec {
    /// The configuration at `ordinal` in the unsampled stream.
    pub fn config_at(&self, ordinal: u64) -> Result<ConfigPoint, SearchError> {
        let grid = self.grid_size();
        let ord = ordinal as u128;
        let subset = unrank_subset(ord / grid, self.feature_pool.len(), self.subset_size)?;
        let mut g = ord % grid;
        let mut picks = vec![0; self.param_grid.len()];
        // odometer: the last axis varies fastest
        for (slot, axis) in self.param_grid.iter().enumerate().rev() {
            let len = axis.values.len() as u128;
            picks[slot] = (g % len) as usize;
            g /= len;
        }
        Ok(ConfigPoint {
            ordinal,
            feature_subset: subset.into_iter().map(|i| self.feature_pool[i].clone()).collect(),
            params: self
                .param_grid
                .iter()
                .zip(picks)
                .map(|(axis, i)| (axis.param.clone(), axis.values[i].clone()))
                .collect(),
        })
    }
}

enum Ordinals {
    Range(std::ops::Range<u64>),
    Sampled(std::vec::IntoIter<u64>),
}

/// Iterator over the configurations of a validated spec.
pub struct ConfigStream<'s> {
    spec: &'s SearchSpec,
    ordinals: Ordinals,
}

impl Iterator for ConfigStream<'_> {
    type Item = ConfigPoint;

    fn next(&mut self) -> Option<ConfigPoint> {
        let ord = match &mut self.ordinals {
            Ordinals::Range(r) => r.next(),
            Ordinals::Sampled(s) => s.next(),
        }?;
        Some(self.spec.config_at(ord).expect("ordinal below total"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match &self.ordinals {
            Ordinals::Range(r) => r.size_hint(),
            Ordinals::Sampled(s) => s.size_hint(),
        }
    }
}

impl ExactSizeIterator for ConfigStream<'_> {}

/// The configuration stream of `spec`. With a `sample_limit` below the total,
/// a seeded uniform sample of ordinals is drawn without replacement and
/// emitted in ascending order.
pub fn enumerate_configs(spec: &SearchSpec) -> Result<ConfigStream<'_>, SearchError> {
    spec.validate()?;
    let total = u64::try_from(spec.total_configs()?)
        .map_err(|_| SearchError::BadSpec("more configurations than fit in 64 bits".into()))?;
    let ordinals = match spec.sample_limit {
        Some(limit) if limit < total => {
            let len = usize::try_from(total)
                .map_err(|_| SearchError::BadSpec("configuration count exceeds address space".into()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut picked: Vec<u64> = sample(&mut rng, len, limit as usize).into_iter().map(|i| i as u64).collect();
            picked.sort_unstable();
            Ordinals::Sampled(picked.into_iter())
        }
        _ => Ordinals::Range(0..total),
    };
    Ok(ConfigStream { spec, ordinals })
}
