"""Word-indexed family of perturbed Jordan blocks.

An ``N x N`` operator ``Q`` has zero diagonal, subdiagonal entries ``xi`` and
superdiagonal entries ``1 - xi``.  The couplings are laid out symmetrically
from both ends of the chain: position ``k`` (1-based, ``k = 1..N-1``) carries
coupling number ``min(k, N - k)``.  Coupling ``j`` follows ``t`` when letter
``j`` of the word is ``'o'`` and ``|t|`` when it is ``'e'``.  At ``t = 0``
every member collapses onto the nilpotent Jordan block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

ALPHABET = ("o", "e")

#: Sweeps default to this window; beyond it ``1 - xi`` approaches a sign change.
DEFAULT_T_RANGE = (-0.5, 0.5)


@dataclass(frozen=True)
class Word:
    """Coupling-type word over ``{o, e}``."""

    letters: tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        if not letters:
            raise DomainError("word must contain at least one letter")
        bad = [c for c in letters if c not in ALPHABET]
        if bad:
            raise DomainError(f"invalid letters {bad!r}; alphabet is 'o', 'e'")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return "".join(self.letters)

    @property
    def index(self) -> int:
        return word_index(self)


def parse_word(text: str) -> Word:
    """Parse ``'ooooe'`` style text (case-insensitive) into a :class:`Word`."""
    if not isinstance(text, str) or not text:
        raise DomainError("word text must be a non-empty string")
    lowered = text.lower()
    bad = sorted({c for c in lowered if c not in ALPHABET})
    if bad:
        raise DomainError(f"word {text!r} contains characters outside {{o,e}}: {bad}")
    return Word(tuple(lowered))


def word_index(w: Word) -> int:
    """Binary index of a word; first letter is the most significant bit, ``e = 1``."""
    k = 0
    for c in w.letters:
        k = 2 * k + (c == "e")
    return k


def word_from_index(length: int, k: int) -> Word:
    if length < 1:
        raise DomainError(f"word length must be >= 1, got {length}")
    if not 0 <= k < 2**length:
        raise DomainError(f"index {k} out of range for words of length {length}")
    bits = format(k, f"0{length}b")
    return Word(tuple("e" if b == "1" else "o" for b in bits))


def all_words(length: int) -> list[Word]:
    return [word_from_index(length, k) for k in range(2**length)]


def word_length(n: int) -> int:
    return n // 2


def coerce_word(w: Word | str, n: int | None = None) -> Word:
    if isinstance(w, str):
        w = parse_word(w)
    if n is not None and len(w) != word_length(n):
        raise DomainError(
            f"word {w} has length {len(w)} but N={n} needs length {word_length(n)}"
        )
    return w


def couplings(w: Word, t: float) -> np.ndarray:
    """Coupling vector ``xi``: ``t`` for ``'o'`` letters, ``|t|`` for ``'e'``."""
    return np.array([t if c == "o" else abs(t) for c in w.letters], dtype=float)


def position_map(n: int) -> np.ndarray:
    """0-based coupling index carried by each off-diagonal position."""
    k = np.arange(1, n)
    return np.minimum(k, n - k) - 1


@dataclass(frozen=True, eq=False)
class LatticeOperator:
    """Dense tridiagonal operator ``Q(t)`` together with its construction data.

    ``entries`` is read-only.  ``sub`` and ``sup`` give the compact tridiagonal
    view (length ``n - 1`` each).
    """

    n: int
    word: Word
    t: float
    entries: np.ndarray = field(repr=False)

    @property
    def sub(self) -> np.ndarray:
        return np.diagonal(self.entries, -1).copy()

    @property
    def sup(self) -> np.ndarray:
        return np.diagonal(self.entries, 1).copy()

    @property
    def outside_default_range(self) -> bool:
        lo, hi = DEFAULT_T_RANGE
        return not lo <= self.t <= hi

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def descriptor(self) -> dict:
        return {"n": self.n, "word": str(self.word), "t": self.t}

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def from_tridiagonal(sub, sup, *, word: Word | None = None, t: float = math.nan):
    """Wrap arbitrary zero-diagonal tridiagonal data as a :class:`LatticeOperator`.

    Used by tests and oracles; ``word`` defaults to all ``'o'``.
    """
    sub = np.asarray(sub, dtype=float)
    sup = np.asarray(sup, dtype=float)
    if sub.shape != sup.shape or sub.ndim != 1:
        raise DomainError("sub and sup must be 1-d arrays of equal length")
    n = sub.size + 1
    if n < 2:
        raise DomainError("dimension must be at least 2")
    m = np.diag(sub, -1) + np.diag(sup, 1)
    if word is None:
        word = Word(("o",) * word_length(n))
    return LatticeOperator(n=n, word=word, t=float(t), entries=_freeze(m))


def build_operator(n: int, w: Word | str, t: float) -> LatticeOperator:
    """Assemble ``Q`` of dimension ``n`` for word ``w`` at time ``t``.

    Examples
    --------
    >>> build_operator(2, "o", 0.1).entries.tolist()
    [[0.0, 0.9], [0.1, 0.0]]
    """
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    t = float(t) + 0.0  # drop negative zero
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    w = coerce_word(w, n)
    xi = couplings(w, t)[position_map(n)]
    return from_tridiagonal(xi, 1.0 - xi, word=w, t=t)


def jordan_block(n: int) -> LatticeOperator:
    """Nilpotent ``n x n`` Jordan block, i.e. any family member at ``t = 0``."""
    if int(n) != n or n < 2:
        raise DomainError(f"Jordan block needs n >= 2, got {n!r}")
    n = int(n)
    return build_operator(n, Word(("o",) * word_length(n)), 0.0)


def parity_matrix(n: int) -> np.ndarray:
    """``diag(1, -1, 1, ...)``; conjugating a zero-diagonal tridiagonal flips its sign."""
    return np.diag((-1.0) ** np.arange(n))
