#!/usr/bin/env python3
"""
Versioned binary artifact codec shared by LSA and classifier model files

Layout: 8-byte magic | version byte | 4-byte header length | JSON header |
raw little-endian array payload | sha256 of everything before it.
"""

import hashlib
import json
import logging
import os
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ArtifactIoError, VersionMismatchError

logger = logging.getLogger(__name__)

MAGIC_SIZE = 8
DIGEST_SIZE = 32
_HEADER_LEN = struct.Struct(">I")
_DTYPES = {"f8": np.dtype("<f8"), "i8": np.dtype("<i8")}


def _encode_array(array: np.ndarray) -> tuple[str, np.ndarray]:
    if np.issubdtype(array.dtype, np.integer) or array.dtype == np.bool_:
        return "i8", np.ascontiguousarray(array, dtype=_DTYPES["i8"])
    return "f8", np.ascontiguousarray(array, dtype=_DTYPES["f8"])


def write_artifact(
    path: str | Path, magic: bytes, version: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]
) -> None:
    """Atomically write metadata plus named arrays"""
    if len(magic) != MAGIC_SIZE:
        raise ValueError("artifact magic must be exactly 8 bytes")
    path = Path(path)

    specs = {}
    chunks = []
    offset = 0
    for name in sorted(arrays):
        code, encoded = _encode_array(np.asarray(arrays[name]))
        raw = encoded.tobytes()
        specs[name] = {"dtype": code, "shape": list(encoded.shape), "offset": offset, "nbytes": len(raw)}
        chunks.append(raw)
        offset += len(raw)

    header = json.dumps({"meta": meta, "arrays": specs}, sort_keys=True).encode("utf-8")
    body = magic + bytes([version]) + _HEADER_LEN.pack(len(header)) + header + b"".join(chunks)
    blob = body + hashlib.sha256(body).digest()

    tmp_path = path.with_name(path.name + ".tmp")
    try:
        tmp_path.write_bytes(blob)
        os.replace(tmp_path, path)
    except OSError as e:
        raise ArtifactIoError(f"cannot write {path}: {e}") from e
    logger.debug(f"Wrote artifact {path} ({len(blob)} bytes)")


def _read_blob(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise ArtifactIoError(f"cannot read {path}: {e}") from e


def _parse_header(path: Path, blob: bytes, magic: bytes | None, version: int | None) -> tuple[bytes, int, dict[str, Any], int]:
    prefix = MAGIC_SIZE + 1 + _HEADER_LEN.size
    if len(blob) < prefix:
        raise ArtifactIoError(f"{path}: truncated artifact header")
    found_magic = blob[:MAGIC_SIZE]
    found_version = blob[MAGIC_SIZE]
    if magic is not None and found_magic != magic:
        raise VersionMismatchError(f"{path}: unexpected artifact type {found_magic!r}, expected {magic!r}")
    if version is not None and found_version != version:
        raise VersionMismatchError(f"{path}: artifact version {found_version}, expected {version}")
    (header_len,) = _HEADER_LEN.unpack(blob[MAGIC_SIZE + 1 : prefix])
    if len(blob) < prefix + header_len:
        raise ArtifactIoError(f"{path}: truncated artifact header")
    try:
        header = json.loads(blob[prefix : prefix + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ArtifactIoError(f"{path}: corrupt artifact header") from e
    return found_magic, found_version, header, prefix + header_len


def read_artifact(
    path: str | Path, magic: bytes, version: int
) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    """Read and verify an artifact; never returns partial content"""
    path = Path(path)
    blob = _read_blob(path)
    _, _, header, payload_start = _parse_header(path, blob, magic, version)

    if len(blob) < payload_start + DIGEST_SIZE:
        raise ArtifactIoError(f"{path}: truncated artifact")
    body, digest = blob[:-DIGEST_SIZE], blob[-DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise ArtifactIoError(f"{path}: checksum mismatch (truncated or corrupt)")

    arrays = {}
    payload = body[payload_start:]
    for name, spec in header["arrays"].items():
        start, size = spec["offset"], spec["nbytes"]
        if start + size > len(payload):
            raise ArtifactIoError(f"{path}: array '{name}' exceeds payload")
        raw = payload[start : start + size]
        arrays[name] = np.frombuffer(raw, dtype=_DTYPES[spec["dtype"]]).reshape(spec["shape"]).copy()
    return header["meta"], arrays


def read_artifact_header(path: str | Path) -> dict[str, Any]:
    """Magic, version and metadata of any artifact, for inspection"""
    path = Path(path)
    blob = _read_blob(path)
    found_magic, found_version, header, _ = _parse_header(path, blob, None, None)
    return {
        "magic": found_magic.rstrip(b"\x00").decode("ascii", errors="replace"),
        "version": found_version,
        **header["meta"],
    }
