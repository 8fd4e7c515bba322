from __future__ import annotations

import contextlib
import os
import tempfile
from pathlib import Path
from typing import IO, Iterator, Literal, overload


@overload
def atomic_write(path: str | os.PathLike[str], mode: Literal["w"] = ...) -> contextlib.AbstractContextManager[IO[str]]: ...


@overload
def atomic_write(path: str | os.PathLike[str], mode: Literal["wb"]) -> contextlib.AbstractContextManager[IO[bytes]]: ...


def atomic_write(path: str | os.PathLike[str], mode: str = "w"):  # type: ignore[no-untyped-def]
    """Write to a temporary sibling file and rename it over `path` on success."""
    return _atomic_write(Path(path), mode)


@contextlib.contextmanager
def _atomic_write(target: Path, mode: str) -> Iterator[IO]:
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        newline = "" if "b" not in mode else None
        with os.fdopen(fd, mode, newline=newline) as handle:
            yield handle
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_name)
        raise


__all__ = ["atomic_write"]
