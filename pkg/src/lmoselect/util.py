"""Shared plumbing: seed derivation, hashing, atomic writes, TSV escaping, output locking."""

from __future__ import annotations

import contextlib
import hashlib
import os
import tempfile
from pathlib import Path

MAX_SEED = 2**64 - 1


class LockError(RuntimeError):
    """Another command holds the output-directory lock."""


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit stream seed from a master seed and a label tuple.

    SHA-256 over a canonical text encoding, truncated to 8 little-endian
    bytes, so derived seeds are identical across platforms and sessions.
    """
    if not isinstance(master_seed, int) or not 0 <= master_seed <= MAX_SEED:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master_seed!r}")
    label = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def sha256_bytes(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_bytes(path: str | Path, payload: bytes) -> None:
    """Write via a temp file in the target directory, then rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(x))


def escape_field(name: str) -> str:
    """Escape a feature name for one TSV field (names may contain tabs/newlines)."""
    return (
        name.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_field(field: str) -> str:
    out = []
    it = iter(field)
    for ch in it:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(it, "")
        out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
    return "".join(out)


@contextlib.contextmanager
def output_lock(directory: str | Path):
    """Advisory per-output-directory lock; concurrent commands are refused."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lock_path = directory / ".lmoselect.lock"
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockError(
            f"output directory is locked by another command: {lock_path} "
            "(remove the file if no other command is running)"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(OSError):
            os.unlink(lock_path)
