import hashlib
import json
import pandas as pd

from pathlib import Path

__all__ = [
    "json_dump_stable",
    "frame_to_csv",
    "sha256_bytes",
    "sha256_file",
]


def json_dump_stable(x: dict | list) -> str:
    # Sorted keys + fixed indent: identical inputs give identical bytes
    return json.dumps(x, sort_keys=True, indent=2) + "\n"


def frame_to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, lineterminator="\n", na_rep="")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Path, chunk_size: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while chunk := fh.read(chunk_size):
            h.update(chunk)
    return h.hexdigest()
