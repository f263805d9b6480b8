use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Independent generator for `(seed, stream)`. Replicas and batches each
/// get their own stream, so results do not depend on execution order.
pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
