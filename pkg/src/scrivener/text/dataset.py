"""Dataset splitting and synthetic pair-noise injection."""

import math
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from scrivener.constants import Paths
from scrivener.lib.structured_logger import get_logger
from scrivener.models.schemas import DatasetSplit, TextPair
from scrivener.text.pairs import save_pairs

logger = get_logger(__name__)

DEFAULT_RATIOS: Tuple[float, float, float] = (0.8, 0.1, 0.1)


def split_dataset(pairs: Sequence[TextPair], ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0) -> DatasetSplit:
    """Shuffle deterministically and partition into train/validation/test.

    Validation and test receive ``floor(ratio * N)`` pairs each; train gets the
    remainder.

    Raises:
        ValueError: If there are not three positive ratios summing to 1 within 1e-9
    """
    if len(ratios) != 3:
        raise ValueError(f"expected three ratios, got {len(ratios)}")
    if any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be positive, got {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")

    n = len(pairs)
    # round first: 0.35 * 180 is 62.99999999999999 in binary floating point
    n_val = math.floor(round(ratios[1] * n, 9))
    n_test = math.floor(round(ratios[2] * n, 9))

    order = np.random.default_rng(seed).permutation(n)
    val_idx = order[:n_val]
    test_idx = order[n_val : n_val + n_test]
    train_idx = order[n_val + n_test :]

    split = DatasetSplit(
        train=[pairs[i] for i in train_idx],
        validation=[pairs[i] for i in val_idx],
        test=[pairs[i] for i in test_idx],
        seed=seed,
    )
    logger.info("Split dataset", n=n, train=len(split.train), validation=len(split.validation), test=len(split.test), seed=seed)
    return split


def save_split(split: DatasetSplit, prefix: Path) -> Dict[str, Path]:
    """Write ``<prefix>.train/.val/.test`` pair files."""
    prefix = Path(prefix)
    outputs = {
        "train": prefix.with_name(prefix.name + Paths.TRAIN_SUFFIX),
        "validation": prefix.with_name(prefix.name + Paths.VAL_SUFFIX),
        "test": prefix.with_name(prefix.name + Paths.TEST_SUFFIX),
    }
    save_pairs(split.train, outputs["train"])
    save_pairs(split.validation, outputs["validation"])
    save_pairs(split.test, outputs["test"])
    return outputs


def inject_pair_noise(pairs: Sequence[TextPair], rate: float, seed: int = 0) -> List[TextPair]:
    """Replace the teacher of ``ceil(rate * N)`` pairs with the teacher of a different pair.

    The selected pairs exchange teachers along a single random cycle, so no pair
    keeps its own teacher. When only one pair is selected it borrows the teacher
    of a randomly chosen other pair. Replaced pairs are flagged ``noisy=True``.

    Raises:
        ValueError: If rate is outside [0, 1] or rate > 0 with fewer than two pairs
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"noise rate must lie in [0, 1], got {rate}")
    n = len(pairs)
    if rate == 0.0:
        return list(pairs)
    if n < 2:
        raise ValueError(f"pair-noise injection needs at least 2 pairs, got {n}")

    n_noisy = min(n, math.ceil(round(rate * n, 9)))
    rng = np.random.default_rng(seed)
    selected = rng.permutation(n)[:n_noisy]

    donors: Dict[int, int] = {}
    if n_noisy == 1:
        target = int(selected[0])
        others = [i for i in range(n) if i != target]
        donors[target] = others[int(rng.integers(len(others)))]
    else:
        cycle = [int(i) for i in rng.permutation(selected)]
        for position, target in enumerate(cycle):
            donors[target] = cycle[(position + 1) % n_noisy]

    noisy_pairs = list(pairs)
    for target, donor in donors.items():
        noisy_pairs[target] = TextPair(student=pairs[target].student, teacher=pairs[donor].teacher, noisy=True)

    logger.info("Injected pair noise", n=n, replaced=n_noisy, rate=rate, seed=seed)
    return noisy_pairs
