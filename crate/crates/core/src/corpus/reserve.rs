use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::post::{Partition, Post};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error(
    "cannot reserve {requested} posts: eligible pool (reddit_main + yt_targeted) has {pool_size}"
)]
pub struct ReserveError {
    pub requested: usize,
    pub pool_size: usize,
}

/// Moves `n` posts drawn uniformly without replacement from the
/// `reddit_main` and `yt_targeted` partitions into the in-the-wild
/// partition.
///
/// The pool is ordered by `post_id` before sampling so the draw depends
/// only on the pool contents and the seed. Returns `(main, wild)`; the
/// main corpus keeps its original order.
pub fn reserve_wild(
    corpus: Vec<Post>,
    n: usize,
    seed: u64,
) -> Result<(Vec<Post>, Vec<Post>), ReserveError> {
    let mut pool: Vec<(&str, usize)> = corpus
        .iter()
        .enumerate()
        .filter(|(_, p)| p.partition.is_wild_eligible())
        .map(|(i, p)| (p.post_id.as_str(), i))
        .collect();
    if n > pool.len() {
        return Err(ReserveError {
            requested: n,
            pool_size: pool.len(),
        });
    }
    pool.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![false; corpus.len()];
    for i in sample(&mut rng, pool.len(), n) {
        chosen[pool[i].1] = true;
    }

    let mut main = Vec::with_capacity(corpus.len() - n);
    let mut wild = Vec::with_capacity(n);
    for (post, pick) in corpus.into_iter().zip(chosen) {
        if pick {
            wild.push(Post {
                partition: Partition::InTheWild,
                ..post
            });
        } else {
            main.push(post);
        }
    }
    wild.sort_by(|a, b| a.post_id.cmp(&b.post_id));
    Ok((main, wild))
}
