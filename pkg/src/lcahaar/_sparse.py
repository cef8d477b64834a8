"""Sparse Z^D-indexed coefficient maps over Z/m, stored as sorted numpy arrays.

Keys are packed into single int64 codes whose numeric order equals the
lexicographic order of the exponent vectors, so sorting and grouping run in
numpy. Packing is affine: code(a + b) = code(a) + code(b) - code(0), which lets
convolution work directly on codes.
"""

from __future__ import annotations

import re

import numpy as np

from .algebra import Modulus, as_modulus

# terms processed per convolution chunk
_CHUNK_ELEMENTS = 1 << 22
# largest bounding box accumulated densely instead of sorting
_DENSE_VOLUME = 1 << 22


class ExponentOverflowError(OverflowError):
    """An exponent vector left the range representable by the packed codes."""


class ResourceLimitError(RuntimeError):
    """A configured support or enumeration limit was exceeded."""


def _bits(dim: int) -> int:
    return 62 if dim == 1 else 62 // dim


def coord_limit(dim: int) -> int:
    """Exclusive bound on |coordinate| for packed keys of dimension ``dim``."""
    return 1 << (_bits(dim) - 1)


def _check_range(keys: np.ndarray, dim: int) -> None:
    if keys.size and int(np.abs(keys).max()) >= coord_limit(dim):
        raise ExponentOverflowError(
            f"exponent coordinate exceeds +/-{coord_limit(dim)} in dimension {dim}")


def pack(keys: np.ndarray) -> np.ndarray:
    dim = keys.shape[1]
    _check_range(keys, dim)
    if dim == 1:
        return keys[:, 0].astype(np.int64, copy=True)
    bits = _bits(dim)
    bias = 1 << (bits - 1)
    codes = np.zeros(keys.shape[0], dtype=np.int64)
    for d in range(dim):
        codes = (codes << bits) + (keys[:, d] + bias)
    return codes


def pack_origin(dim: int) -> int:
    if dim == 1:
        return 0
    bits = _bits(dim)
    bias = 1 << (bits - 1)
    code = 0
    for _ in range(dim):
        code = (code << bits) + bias
    return code


def unpack(codes: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return codes.reshape(-1, 1).copy()
    bits = _bits(dim)
    bias = 1 << (bits - 1)
    mask = (1 << bits) - 1
    out = np.empty((codes.shape[0], dim), dtype=np.int64)
    c = codes.copy()
    for d in range(dim - 1, -1, -1):
        out[:, d] = (c & mask) - bias
        c >>= bits
    return out


def canonical(codes: np.ndarray, vals: np.ndarray, m: int):
    """Sort by code, sum duplicates mod m and drop zero coefficients."""
    if codes.size == 0:
        return codes.astype(np.int64), vals.astype(np.int64)
    order = np.argsort(codes)
    codes = codes[order]
    vals = vals[order]
    starts = np.flatnonzero(np.r_[True, codes[1:] != codes[:-1]])
    summed = np.add.reduceat(vals, starts) % m
    keep = summed != 0
    return codes[starts][keep], summed[keep]


def _convolve_dense(ka, va, kb, vb, lo, ext, m: int, max_terms):
    """Accumulate the product on its bounding box with bincount (exact: each chunk sum < 2^53)."""
    strides = np.ones(len(ext), dtype=np.int64)
    for d in range(len(ext) - 2, -1, -1):
        strides[d] = strides[d + 1] * ext[d + 1]
    volume = int(np.prod(ext))
    ia = (ka - ka.min(axis=0)) @ strides
    ib = (kb - kb.min(axis=0)) @ strides
    acc = np.zeros(volume, dtype=np.int64)
    step = max(1, _CHUNK_ELEMENTS // ia.size)
    for start in range(0, ib.size, step):
        idx = (ia[None, :] + ib[start:start + step, None]).ravel()
        w = (va[None, :] * vb[start:start + step, None]).ravel() % m
        acc += np.bincount(idx, weights=w, minlength=volume).astype(np.int64)
        acc %= m
    nz = np.flatnonzero(acc)
    if max_terms is not None and nz.size > max_terms:
        raise ResourceLimitError(f"support grew beyond the limit of {max_terms} terms")
    keys = np.stack(np.unravel_index(nz, tuple(int(e) for e in ext)), axis=1) + lo
    # C-order on the box is lexicographic order, which packing preserves
    return pack(keys.astype(np.int64)), acc[nz]


def convolve_codes(ca, va, cb, vb, m: int, dim: int, max_terms: int | None = None):
    """Product of two sparse maps given as (codes, values); keys add, values multiply."""
    if ca.size == 0 or cb.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    if ca.size < cb.size:
        ca, va, cb, vb = cb, vb, ca, va
    hi = np.abs(unpack(ca, dim)).max(axis=0) + np.abs(unpack(cb, dim)).max(axis=0)
    if int(hi.max()) >= coord_limit(dim):
        raise ExponentOverflowError(
            f"product exponents exceed +/-{coord_limit(dim)} in dimension {dim}")
    ka, kb = unpack(ca, dim), unpack(cb, dim)
    lo = ka.min(axis=0) + kb.min(axis=0)
    ext = ka.max(axis=0) + kb.max(axis=0) - lo + 1
    volume = int(np.prod(ext))
    if volume <= _DENSE_VOLUME and volume <= 8 * ca.size * cb.size + 4096 and m < 2**26:
        return _convolve_dense(ka, va, kb, vb, lo, ext, m, max_terms)
    origin = pack_origin(dim)
    step = max(1, _CHUNK_ELEMENTS // ca.size)
    acc_c = np.zeros(0, dtype=np.int64)
    acc_v = np.zeros(0, dtype=np.int64)
    for start in range(0, cb.size, step):
        sub_c = cb[start:start + step]
        sub_v = vb[start:start + step]
        codes = (ca[None, :] + (sub_c - origin)[:, None]).ravel()
        vals = (va[None, :] * sub_v[:, None]).ravel() % m
        if acc_c.size:
            codes = np.concatenate([acc_c, codes])
            vals = np.concatenate([acc_v, vals])
        acc_c, acc_v = canonical(codes, vals, m)
        if max_terms is not None and acc_c.size > max_terms:
            # cancellations in later chunks can only shrink the map by so much
            if acc_c.size - (cb.size - start - sub_c.size) * ca.size > max_terms:
                raise ResourceLimitError(
                    f"support grew beyond the limit of {max_terms} terms")
    if max_terms is not None and acc_c.size > max_terms:
        raise ResourceLimitError(f"support grew beyond the limit of {max_terms} terms")
    return acc_c, acc_v


_TERM = re.compile(r"\+?([+-]?\d+)@\(([^()]*)\)")


def parse_terms(text: str) -> list[tuple[tuple[int, ...], int]]:
    """Parse ``coeff@(e1,...,eD)`` terms, optionally joined by '+'.

    Whitespace is ignored everywhere. An empty string or a lone ``0`` is
    the empty term list.
    """
    s = re.sub(r"\s+", "", text)
    if s in ("", "0"):
        return []
    out = []
    pos = 0
    while pos < len(s):
        match = _TERM.match(s, pos)
        if not match:
            raise ValueError(f"cannot parse term list at {s[pos:]!r}")
        coeff = int(match.group(1))
        coords = match.group(2)
        if not coords:
            raise ValueError(f"empty exponent vector in {match.group(0)!r}")
        key = tuple(int(c) for c in coords.split(","))
        out.append((key, coeff))
        pos = match.end()
    return out


class TermMap:
    """Immutable finitely supported map Z^D -> Z/m with nonzero values.

    Subclasses give the values a meaning (polynomial coefficients or
    character exponents). Terms are kept sorted lexicographically by key with
    zeros dropped, so structural equality is mathematical equality.
    """

    __slots__ = ("modulus", "dim", "_codes", "_vals", "_keys")

    def __init__(self, terms=(), modulus=2, dim: int | None = None):
        modulus = as_modulus(modulus)
        items = list(terms.items()) if isinstance(terms, dict) else list(terms)
        keys = []
        vals = []
        for key, val in items:
            key = (int(key),) if isinstance(key, (int, np.integer)) else tuple(int(k) for k in key)
            keys.append(key)
            vals.append(int(val) % modulus.m)
        if dim is None:
            if not keys:
                raise ValueError("dimension required for an empty term map")
            dim = len(keys[0])
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        for key in keys:
            if len(key) != dim:
                raise ValueError(f"key {key} does not have dimension {dim}")
        karr = np.array(keys, dtype=np.int64).reshape(-1, dim)
        codes, vals_arr = canonical(pack(karr), np.array(vals, dtype=np.int64), modulus.m)
        self._init(modulus, dim, codes, vals_arr)

    def _init(self, modulus, dim, codes, vals):
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "dim", dim)
        codes.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "_codes", codes)
        object.__setattr__(self, "_vals", vals)
        object.__setattr__(self, "_keys", None)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def _from_codes(cls, codes, vals, modulus: Modulus, dim: int):
        obj = cls.__new__(cls)
        obj._init(modulus, dim, codes, vals)
        return obj

    @classmethod
    def parse(cls, text: str, modulus, dim: int | None = None):
        return cls(parse_terms(text), modulus, dim)

    @property
    def m(self) -> int:
        return self.modulus.m

    @property
    def keys(self) -> np.ndarray:
        if self._keys is None:
            k = unpack(self._codes, self.dim)
            k.setflags(write=False)
            object.__setattr__(self, "_keys", k)
        return self._keys

    @property
    def values(self) -> np.ndarray:
        return self._vals

    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(x) for x in k): int(v) for k, v in zip(self.keys, self._vals)}

    def support(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in k) for k in self.keys]

    def get(self, key, default: int = 0) -> int:
        key = (key,) if isinstance(key, int) else tuple(key)
        code = pack(np.array([key], dtype=np.int64))[0]
        i = np.searchsorted(self._codes, code)
        if i < self._codes.size and self._codes[i] == code:
            return int(self._vals[i])
        return default

    def __len__(self):
        return int(self._codes.size)

    def __iter__(self):
        return iter(self.terms.items())

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (self.modulus.m == other.modulus.m and self.dim == other.dim
                and np.array_equal(self._codes, other._codes)
                and np.array_equal(self._vals, other._vals))

    def __hash__(self):
        return hash((type(self).__name__, self.modulus.m, self.dim,
                     self._codes.tobytes(), self._vals.tobytes()))

    def _check_compatible(self, other: "TermMap") -> None:
        if self.modulus.m != other.modulus.m:
            raise ValueError(f"modulus mismatch: {self.m} vs {other.m}")
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def translated(self, vector):
        vector = (vector,) if isinstance(vector, int) else tuple(vector)
        if len(vector) != self.dim:
            raise ValueError(f"shift {vector} does not have dimension {self.dim}")
        keys = self.keys + np.array(vector, dtype=np.int64)
        return type(self)._from_codes(pack(keys), self._vals.copy(), self.modulus, self.dim)

    def bounding_box(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if not len(self):
            raise ValueError("empty term map has no bounding box")
        k = self.keys
        return tuple(int(x) for x in k.min(axis=0)), tuple(int(x) for x in k.max(axis=0))

    def to_text(self, sep: str = " + ") -> str:
        if not len(self):
            return "0"
        return sep.join(f"{v}@({','.join(str(x) for x in key)})" for key, v in self.terms.items())

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"{type(self).__name__}({self.to_text()!r}, m={self.m}, dim={self.dim})"
