import os
import orjson
import numpy as np
import datetime as dt
from hashlib import sha256


def now() -> str:
    """Returns the current time as a string for printing."""
    return dt.datetime.now().strftime('%H:%M:%S')


def now_iso() -> str:
    """Returns the current UTC time as an ISO-8601 string (metadata only, never in test mode)."""
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec='seconds')


def stable_hash(*parts) -> int:
    """Returns a 64-bit integer digest of the given parts that is stable across processes and runs (unlike hash())."""

    # Init a hash func
    h = sha256()

    # Feed each part with a separator so ("ab", "c") != ("a", "bc")
    for part in parts:
        h.update(str(part).encode('utf-8'))
        h.update(b'\x1f')

    # First 8 bytes as an unsigned int
    return int.from_bytes(h.digest()[:8], 'big')


def make_rng(seed:int, *keys) -> np.random.Generator:
    """Creates a numpy Generator from the master seed and any number of keys (ints or strings).

        Parameters:
            seed (int): the master seed of the run.
            keys: extra stream keys, e.g. ("link", "v001:0", "rsu:0", 4). Strings are mapped with stable_hash().

        Returns:
            np.random.Generator: an independent, reproducible stream for this key tuple.
    """
    entropy:list[int] = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        if isinstance(key, (int, np.integer)) and not isinstance(key, bool): entropy.append(int(key) & 0xFFFFFFFFFFFFFFFF)
        else: entropy.append(stable_hash(key))

    return np.random.default_rng(np.random.SeedSequence(entropy))


def dumps_json(obj) -> bytes:
    """Serializes the given object to canonical JSON bytes (sorted keys, 2-space indent, trailing newline)."""
    return orjson.dumps(
        obj,
        option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_APPEND_NEWLINE
    )


def write_json(path:str, obj) -> None:
    """Writes the given object as canonical JSON to the given path, creating the parent dir if needed."""

    # Create the dir if it doesn't exist
    parent:str = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)

    with open(path, 'wb') as f:
        f.write(dumps_json(obj))


def read_json(path:str):
    """Reads the JSON document at the given path."""
    with open(path, 'rb') as f:
        return orjson.loads(f.read())


def config_hash(config_dict:dict) -> str:
    """Returns the SHA-256 hex digest of the canonical JSON of the given config dict."""
    return sha256(
        orjson.dumps(config_dict, option=orjson.OPT_SORT_KEYS)
    ).hexdigest()
