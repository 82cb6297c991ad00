"""File formats: binary codes and vectors, key-value configs, CSV, PGM.

Binary code file (all little endian)::

    magic   4 bytes  b"SECC"
    version u32      1
    M, N, L_r, L_c   u64 each
    block_rows       L_r x u64
    block_cols       L_c x u64
    var              L_r*L_c x f64, row major (per-entry variances)
    F                (M-N)*M x f64, row major
    A                M*N x f64, row major

A code built from a raw matrix (no block profile) stores ``L_r = L_c = 0``
and an empty profile section.

Binary vector file::

    magic   4 bytes  b"SECV"
    version u32      1
    length  u64
    data             length x f64
"""

import json
import struct

import numpy as np

from secc.coding import CodePair, VarianceProfile
from secc.errors import ConfigurationError, RankError

CODE_MAGIC = b"SECC"
VECTOR_MAGIC = b"SECV"
VERSION = 1
_CODE_HEADER = struct.Struct("<4sIQQQQ")
_VECTOR_HEADER = struct.Struct("<4sIQ")
KERNEL_TOL = 1e-10

_F64 = np.dtype("<f8")
_U64 = np.dtype("<u8")


def save_code(path, pair):
    M, N = pair.M, pair.N
    prof = pair.profile
    L_r, L_c = (prof.L_r, prof.L_c) if prof is not None else (0, 0)
    with open(path, "wb") as fh:
        fh.write(_CODE_HEADER.pack(CODE_MAGIC, VERSION, M, N, L_r, L_c))
        if prof is not None:
            fh.write(prof.block_rows.astype(_U64).tobytes())
            fh.write(prof.block_cols.astype(_U64).tobytes())
            fh.write(prof.var.astype(_F64).tobytes())
        fh.write(np.ascontiguousarray(pair.F, dtype=_F64).tobytes())
        fh.write(np.ascontiguousarray(pair.A, dtype=_F64).tobytes())


def _take(buf, offset, dtype, count):
    size = np.dtype(dtype).itemsize * count
    if offset + size > len(buf):
        raise ConfigurationError("code file is truncated")
    return np.frombuffer(buf, dtype=dtype, count=count, offset=offset), offset + size


def load_code(path):
    """Read a code file and re-check the kernel property ``F @ A = 0``."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _CODE_HEADER.size:
        raise ConfigurationError(f"{path}: too short for a code file")
    magic, version, M, N, L_r, L_c = _CODE_HEADER.unpack_from(buf)
    if magic != CODE_MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ConfigurationError(f"{path}: unsupported version {version}")
    off = _CODE_HEADER.size
    profile = None
    if L_r and L_c:
        rows, off = _take(buf, off, _U64, L_r)
        cols, off = _take(buf, off, _U64, L_c)
        var, off = _take(buf, off, _F64, L_r * L_c)
        profile = VarianceProfile(rows.astype(np.int64), cols.astype(np.int64), var.reshape(L_r, L_c).copy())
    P = M - N
    F, off = _take(buf, off, _F64, P * M)
    A, off = _take(buf, off, _F64, M * N)
    if off != len(buf):
        raise ConfigurationError(f"{path}: {len(buf) - off} trailing bytes")
    F = F.reshape(P, M).astype(float)
    A = A.reshape(M, N).astype(float)
    scale = max(np.max(np.abs(F)), 1.0) if F.size else 1.0
    if F.size and A.size and np.max(np.abs(F @ A)) > KERNEL_TOL * scale:
        raise RankError(f"{path}: stored A is not in the kernel of F")
    return CodePair(F=F, A=A, profile=profile)


def save_vector(path, v):
    v = np.ascontiguousarray(v, dtype=_F64)
    if v.ndim != 1:
        raise ConfigurationError("only 1-d vectors can be saved")
    with open(path, "wb") as fh:
        fh.write(_VECTOR_HEADER.pack(VECTOR_MAGIC, VERSION, v.size))
        fh.write(v.tobytes())


def load_vector(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _VECTOR_HEADER.size:
        raise ConfigurationError(f"{path}: too short for a vector file")
    magic, version, n = _VECTOR_HEADER.unpack_from(buf)
    if magic != VECTOR_MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ConfigurationError(f"{path}: unsupported version {version}")
    if len(buf) != _VECTOR_HEADER.size + 8 * n:
        raise ConfigurationError(f"{path}: length field {n} does not match file size")
    return np.frombuffer(buf, dtype=_F64, count=n, offset=_VECTOR_HEADER.size).astype(float)


def _parse_value(text):
    text = text.strip()
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t.strip()]
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config(text):
    """Parse ``key = value`` lines; ``#`` starts a comment, commas make lists."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if not key:
            raise ConfigurationError(f"config line {lineno}: empty key")
        out[key] = _parse_value(value)
    return out


def read_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path_or_fh, header, rows, config=None):
    """CSV with an optional leading ``# config: {...}`` comment line."""
    lines = []
    if config is not None:
        lines.append("# config: " + json.dumps(config, sort_keys=True))
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_fh, "write"):
        path_or_fh.write(text)
    else:
        with open(path_or_fh, "w") as fh:
            fh.write(text)


def _pgm_tokens(buf):
    """Yield header tokens and the offset just past the last one."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ConfigurationError("truncated PGM header")
        tokens.append(buf[start:pos])
    return tokens, pos + 1


def read_pgm(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    tokens, off = _pgm_tokens(buf)
    if tokens[0] != b"P5":
        raise ConfigurationError(f"{path}: not a binary PGM (P5) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ConfigurationError(f"{path}: malformed PGM header") from exc
    if not 0 < maxval < 65536:
        raise ConfigurationError(f"{path}: invalid maxval {maxval}")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    count = width * height
    if len(buf) - off < count * np.dtype(dtype).itemsize:
        raise ConfigurationError(f"{path}: pixel data truncated")
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=off)
    return data.reshape(height, width).astype(float), maxval


def write_pgm(path, image, maxval=255):
    img = np.clip(np.rint(np.asarray(image, dtype=float)), 0, maxval)
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(img.astype(dtype).tobytes())
