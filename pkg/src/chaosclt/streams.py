"""Counter-based random streams with block-granular replica indexing.

Every Monte Carlo routine in this package draws replica r from a Philox
stream keyed by (seed, stream) and positioned at a counter offset that
depends only on r // BLOCK_SIZE; inside a block, replica r owns row
r % BLOCK_SIZE of a single vectorized draw.  Two consequences:

* runs are bit-reproducible for a fixed (seed, stream), and
* parallel workers that process whole blocks produce output identical to
  a serial run, because no stream is ever shared across blocks.

BLOCK_SIZE is a fixed protocol constant; changing it changes every stream.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ValidationError

BLOCK_SIZE = 1024

# Philox has a 256-bit counter; spacing blocks 2**96 counter steps apart
# leaves each block ~5e38 draws, far beyond any realistic consumption.
_BLOCK_STRIDE_BITS = 96


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    """Generator for one replica block of the (seed, stream) Philox stream."""
    if seed < 0 or stream < 0 or block < 0:
        raise ValidationError("seed, stream and block must be nonnegative")
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    bg = np.random.Philox(key=key)
    bg.advance(block << _BLOCK_STRIDE_BITS)
    return np.random.Generator(bg)


def block_normals(seed: int, stream: int, block: int, count: int,
                  width: int) -> np.ndarray:
    """Draw a (count, width) standard normal matrix for one block.

    Row i is replica block * BLOCK_SIZE + i.  The first k rows are
    identical no matter how many rows are requested, so partial blocks
    are consistent with full ones.
    """
    return block_generator(seed, stream, block).standard_normal((count, width))


def replica_blocks(n_replicas: int):
    """Yield (block_index, start, count) triples covering 0..n_replicas."""
    block = 0
    start = 0
    while start < n_replicas:
        count = min(BLOCK_SIZE, n_replicas - start)
        yield block, start, count
        block += 1
        start += count


def run_blocks(n_replicas: int, worker, threads: int = 1) -> None:
    """Apply worker(block, start, count) over all replica blocks.

    worker must write results into preassigned slots (e.g. out[start:start+count]);
    with threads > 1 the blocks run concurrently, which is safe because each
    block owns a disjoint stream and disjoint output rows.
    """
    if threads <= 1:
        for block, start, count in replica_blocks(n_replicas):
            worker(block, start, count)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, block, start, count)
                   for block, start, count in replica_blocks(n_replicas)]
        for fut in futures:
            fut.result()
