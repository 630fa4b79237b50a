"""IPv4 address anonymization: black-marker, truncation, permutation,
pseudonyms and prefix-preserving maps.

Keyed maps use BLAKE2b as the pseudorandom function. The permutation is a
balanced four-round Feistel network on the two 16-bit halves, which is a
bijection of the 32-bit space by construction.
"""

from __future__ import annotations

import csv
import hashlib
import io
import ipaddress
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

KEY_ENV = "COLLABANON_IP_KEY"
SCHEMES = ("black-marker", "truncate", "permute", "pseudonym", "prefix-preserving")
REVERSIBLE = {"black-marker": False, "truncate": False, "permute": True, "pseudonym": True, "prefix-preserving": True}
KEEP_BITS = (8, 16, 24)
_ROUNDS = 4


def as_address(a) -> ipaddress.IPv4Address:
    if isinstance(a, ipaddress.IPv4Address):
        return a
    try:
        return ipaddress.IPv4Address(a.strip() if isinstance(a, str) else a)
    except (ipaddress.AddressValueError, ValueError) as exc:
        raise ValueError(f"not an IPv4 address: {a!r}") from exc


def _key_bytes(key) -> bytes:
    if isinstance(key, bytes):
        return key
    return str(key).encode("utf-8")


def key_from_env(default=None):
    """The address-anonymization key from the environment, or ``default``."""
    return os.environ.get(KEY_ENV, default)


def common_prefix_length(a, b) -> int:
    return 32 - (int(as_address(a)) ^ int(as_address(b))).bit_length()


def black_marker(a) -> ipaddress.IPv4Address:
    as_address(a)
    return ipaddress.IPv4Address(0)


def truncate(a, keep: int) -> ipaddress.IPv4Address:
    if keep not in KEEP_BITS:
        raise ValueError(f"keep must be one of {KEEP_BITS}, got {keep}")
    mask = (0xFFFFFFFF << (32 - keep)) & 0xFFFFFFFF
    return ipaddress.IPv4Address(int(as_address(a)) & mask)


# -- permutation --------------------------------------------------------------


@lru_cache(maxsize=16)
def _round_tables(key: bytes) -> tuple[tuple[int, ...], ...]:
    tables = []
    for r in range(_ROUNDS):
        h = hashlib.blake2b(key=key[:64], digest_size=2, person=b"feistel" + bytes([r]))
        row = []
        for x in range(1 << 16):
            hx = h.copy()
            hx.update(x.to_bytes(2, "big"))
            row.append(int.from_bytes(hx.digest(), "big"))
        tables.append(tuple(row))
    return tuple(tables)


def _feistel(x: int, key: bytes, inverse=False) -> int:
    tables = _round_tables(key)
    left, right = x >> 16, x & 0xFFFF
    if not inverse:
        for t in tables:
            left, right = right, left ^ t[right]
    else:
        for t in reversed(tables):
            left, right = right ^ t[left], left
    return (left << 16) | right


def permute(a, seed) -> ipaddress.IPv4Address:
    return ipaddress.IPv4Address(_feistel(int(as_address(a)), _key_bytes(seed)))


def unpermute(a, seed) -> ipaddress.IPv4Address:
    return ipaddress.IPv4Address(_feistel(int(as_address(a)), _key_bytes(seed), inverse=True))


# -- prefix preserving --------------------------------------------------------


class PrefixPreserving:
    """Keyed prefix-preserving bijection.

    Output bit ``i`` is input bit ``i`` flipped by a pseudorandom bit of the
    first ``i`` input bits, so two addresses agreeing on exactly ``n`` leading
    bits map to outputs agreeing on exactly ``n`` leading bits. Flip bits are
    memoized per prefix.
    """

    def __init__(self, key):
        self._key = _key_bytes(key)[:64]
        self._flip: dict[tuple[int, int], int] = {}

    def _bit(self, i: int, prefix: int) -> int:
        got = self._flip.get((i, prefix))
        if got is None:
            h = hashlib.blake2b(i.to_bytes(1, "big") + prefix.to_bytes(4, "big"), key=self._key, digest_size=1, person=b"prefix")
            got = self._flip[(i, prefix)] = h.digest()[0] & 1
        return got

    def __call__(self, a) -> ipaddress.IPv4Address:
        x = int(as_address(a))
        out = 0
        for i in range(32):
            prefix = x >> (32 - i) if i else 0
            bit = (x >> (31 - i)) & 1
            out = (out << 1) | (bit ^ self._bit(i, prefix))
        return ipaddress.IPv4Address(out)

    def inverse(self, a) -> ipaddress.IPv4Address:
        y = int(as_address(a))
        x = 0
        for i in range(32):
            bit = (y >> (31 - i)) & 1
            x = (x << 1) | (bit ^ self._bit(i, x))
        return ipaddress.IPv4Address(x)


@lru_cache(maxsize=16)
def _prefix_map(key: bytes) -> PrefixPreserving:
    return PrefixPreserving(key)


def prefix_preserving(a, key) -> ipaddress.IPv4Address:
    return _prefix_map(_key_bytes(key))(a)


def prefix_preserving_inverse(a, key) -> ipaddress.IPv4Address:
    return _prefix_map(_key_bytes(key)).inverse(a)


# -- pseudonyms ---------------------------------------------------------------


class PseudonymTable:
    """Address to opaque token, remembered in both directions.

    Tokens come from the keyed permutation, so distinct addresses never
    collide even across separately built tables with the same seed.
    """

    def __init__(self, seed=0):
        self.seed = seed
        self.forward: dict[str, str] = {}
        self.inverse: dict[str, str] = {}

    def token(self, a) -> str:
        addr = str(as_address(a))
        tok = self.forward.get(addr)
        if tok is None:
            tok = f"ip-{int(permute(addr, self.seed)):08x}"
            self.forward[addr] = tok
            self.inverse[tok] = addr
        return tok

    def address(self, token: str) -> str:
        try:
            return self.inverse[token]
        except KeyError:
            raise KeyError(f"unknown pseudonym {token!r}") from None

    def __len__(self):
        return len(self.forward)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["address", "token"])
        for addr in sorted(self.forward, key=lambda s: int(ipaddress.IPv4Address(s))):
            w.writerow([addr, self.forward[addr]])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, seed=0) -> "PseudonymTable":
        t = cls(seed)
        rows = csv.reader(io.StringIO(text))
        for i, row in enumerate(rows):
            if i == 0 and row == ["address", "token"]:
                continue
            if len(row) != 2:
                raise ValueError(f"pseudonym table row {i + 1}: expected 2 columns")
            addr, tok = str(as_address(row[0])), row[1]
            if addr in t.forward or tok in t.inverse:
                raise ValueError(f"pseudonym table row {i + 1}: duplicate entry")
            t.forward[addr] = tok
            t.inverse[tok] = addr
        return t


def pseudonymize(a, seed=0, table: PseudonymTable | None = None) -> str:
    return (table or PseudonymTable(seed)).token(a)


# -- schemes and bulk data ----------------------------------------------------


@dataclass
class AnonScheme:
    kind: str
    keep: int | None = None
    key: object = None
    table: PseudonymTable | None = None

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown scheme {self.kind!r}; choose from {', '.join(SCHEMES)}")
        if self.kind == "truncate" and self.keep not in KEEP_BITS:
            raise ValueError(f"truncate needs keep in {KEEP_BITS}")
        if self.kind in ("permute", "prefix-preserving", "pseudonym") and self.key is None:
            raise ValueError(f"scheme {self.kind} needs a key or seed")
        if self.kind == "pseudonym" and self.table is None:
            self.table = PseudonymTable(self.key)

    @property
    def reversible(self) -> bool:
        return REVERSIBLE[self.kind]

    def apply(self, a) -> str:
        if self.kind == "black-marker":
            return str(black_marker(a))
        if self.kind == "truncate":
            return str(truncate(a, self.keep))
        if self.kind == "permute":
            return str(permute(a, self.key))
        if self.kind == "prefix-preserving":
            return str(prefix_preserving(a, self.key))
        return self.table.token(a)

    def invert(self, b) -> str:
        if not self.reversible:
            raise ValueError(f"scheme {self.kind} is not reversible")
        if self.kind == "permute":
            return str(unpermute(b, self.key))
        if self.kind == "prefix-preserving":
            return str(prefix_preserving_inverse(b, self.key))
        return self.table.address(b)


def anonymize_lines(lines: Iterable[str], scheme: AnonScheme) -> list[str]:
    """One address per line; blank lines and ``#`` comments pass through."""
    out = []
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            out.append(s)
            continue
        try:
            out.append(scheme.apply(s))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


def _looks_like_address(s: str) -> bool:
    try:
        ipaddress.IPv4Address(s)
        return True
    except ValueError:
        return False


def anonymize_csv(text: str, scheme: AnonScheme, columns: Iterable[str] | None = None) -> str:
    """Rewrite the address columns of a CSV flow log with a header row.

    Without ``columns``, every column whose non-empty cells all parse as
    IPv4 addresses is treated as an address column.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return ""
    header, body = rows[0], rows[1:]
    if columns is None:
        idx = [
            j for j in range(len(header))
            if any(j < len(r) and r[j] for r in body)
            and all(_looks_like_address(r[j]) for r in body if j < len(r) and r[j])
        ]
    else:
        idx = []
        for c in columns:
            if c not in header:
                raise ValueError(f"no column named {c!r}")
            idx.append(header.index(c))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for lineno, r in enumerate(body, start=2):
        r = list(r)
        for j in idx:
            if j < len(r) and r[j]:
                try:
                    r[j] = scheme.apply(r[j])
                except ValueError as exc:
                    raise ValueError(f"row {lineno}: {exc}") from None
        w.writerow(r)
    return out.getvalue()
