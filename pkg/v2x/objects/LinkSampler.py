import numpy as np

from utils import make_rng


class LinkSampler:
    """Ground-truth channel randomness, one (shadow, blocking) draw per link and routing interval.

    Streams are keyed by (seed, "link", antenna a, antenna b, interval) with the antenna ids sorted, so a link
    sees the same realization whichever way it is used and whichever method planned it.
    """

    seed:int                                        # Master seed of the run
    interval:int                                    # Current routing interval index
    _cache:dict[tuple[str, str], tuple[float, float]]   # Draws of the current interval


    def __init__(self, seed:int):
        self.seed = seed
        self.interval = 0
        self._cache = {}


    def set_interval(self, interval:int) -> None:
        """Moves to the given routing interval; draws of the previous one are dropped."""
        if interval != self.interval:
            self.interval = interval
            self._cache = {}


    def draws(self, a:str, b:str) -> tuple[float, float]:
        """Standard normal (shadow, blocking) pair of the link a-b in the current interval."""
        key:tuple[str, str] = (a, b) if a <= b else (b, a)

        if key not in self._cache:
            rng:np.random.Generator = make_rng(self.seed, 'link', key[0], key[1], self.interval)
            z:np.ndarray = rng.standard_normal(2)
            self._cache[key] = (float(z[0]), float(z[1]))

        return self._cache[key]
