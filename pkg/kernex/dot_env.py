# -*- coding: utf-8 -*-
"""
Loader for .env style files carrying KERNEX_* run settings
"""
import contextlib
import logging
import os
from io import BytesIO, TextIOBase
from pathlib import Path
from string import Template
from typing import BinaryIO, ContextManager, Iterator, List, MutableMapping, Union

__all__ = (
    "load_env",
    "load_stream",
    "unquote",
    "DEFAULT_ENVKEY",
    "DEFAULT_DOTENV",
)

DEFAULT_ENVKEY = "KERNEX_DOTENV"
DEFAULT_DOTENV = ".env"
DEFAULT_ENCODING = "utf-8"

logger = logging.getLogger(__file__)


def unquote(line, quotes="\"'"):
    if line and line[0] in quotes and line[-1] == line[0]:
        line = line[1:-1]
    return line


@contextlib.contextmanager
def open_env(path: Union[str, Path]) -> ContextManager[BinaryIO]:
    """same as open, allow monkeypatch"""
    fp = open(path, "rb")
    try:
        yield fp
    finally:
        fp.close()


def _candidates(env_file: str, search_path: List[Path], parents: bool) -> Iterator[Path]:
    for path in search_path:
        path = path.resolve()
        if not path.is_dir():
            path = path.parent
        for sub_path in [path] + list(path.parents):
            candidate = sub_path / env_file
            if os.access(candidate, os.R_OK):
                yield candidate
                break
            if not parents:
                break


def _parse_line(line: str) -> tuple[str | None, str | None]:
    if line.startswith("export "):
        line = line[len("export ") :].lstrip()
    key, sep, val = line.partition("=")
    key = key.strip()
    if not sep or not key:
        return None, None
    return unquote(key), unquote(val.strip())


def load_stream(
    stream: Union[BytesIO, TextIOBase],
    environ: MutableMapping[str, str],
    overwrite: bool = False,
    encoding: str = DEFAULT_ENCODING,
) -> MutableMapping[str, str]:
    if isinstance(stream, TextIOBase):
        stream.seek(0)
        stream = BytesIO(stream.read().encode(encoding))
    for line in stream.readlines():
        line = line.decode(encoding).strip()
        if not line or line[0] == "#":
            continue
        key, val = _parse_line(line)
        if key and val and (overwrite or key not in environ):
            environ[key] = val
    return environ


def _substitute(environ: MutableMapping[str, str]) -> MutableMapping[str, str]:
    """expand ${VAR} references, leaving anything unresolved as written"""
    for key, val in environ.items():
        if "${" in val and "}" in val:
            expanded = Template(val).safe_substitute(environ)
            if expanded != val:
                environ[key] = expanded
    return environ


def load_env(
    env_file: str | None = None,
    search_path: Union[None, str, Path, List[str], List[Path]] = None,
    environ: MutableMapping[str, str] | None = None,
    overwrite: bool = False,
    parents: bool = False,
    update: bool = False,
    errors: bool = False,
    encoding: str = DEFAULT_ENCODING,
) -> MutableMapping[str, str]:
    """
    Read settings files into a copy of environ

    :param env_file: file name, default $KERNEX_DOTENV or .env
    :param search_path: directories (or files, whose directory is used) in precedence order
    :param environ: base mapping, os.environ by default
    :param overwrite: let file values replace existing ones
    :param parents: search upwards until a file is found
    :param update: copy the result back into os.environ
    :param errors: raise FileNotFoundError when nothing was read
    :param encoding: text encoding
    :returns: the merged mapping
    """
    if environ is None:
        environ = os.environ
    if not env_file:
        env_file = environ.get(DEFAULT_ENVKEY, DEFAULT_DOTENV)
    if search_path is None:
        search_path = [Path.cwd()]
    elif isinstance(search_path, (str, Path)):
        search_path = [search_path]
    paths = [Path(p) for p in search_path]
    if overwrite:
        # later files lose to earlier ones
        paths.reverse()

    merged = dict(environ)
    found = False
    for candidate in _candidates(env_file, paths, parents):
        try:
            with open_env(candidate) as fp:
                data = fp.read()
                if isinstance(data, str):
                    data = data.encode(encoding)
                load_stream(BytesIO(data), merged, overwrite, encoding)
            found = True
            logger.debug(f"settings read from {candidate}")
        except FileNotFoundError:
            continue
    if errors and not found:
        raise FileNotFoundError(f"{env_file} in {[p.as_posix() for p in paths]}")
    merged = _substitute(merged)
    if update:
        for key, val in merged.items():
            if os.environ.get(key) != val:
                os.environ[key] = val
    return merged
