from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

Number = Union[int, "LaurentPoly"]


class LaurentPoly:
    """Sparse Laurent polynomial in q with integer coefficients.

    Immutable: every operation returns a new value. Zero coefficients are
    never stored, so the zero polynomial has no terms.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[int, int]] = None) -> None:
        cleaned = {int(exp): int(coeff) for exp, coeff in (terms or {}).items() if coeff}
        self._terms: Dict[int, int] = dict(sorted(cleaned.items()))
        self._hash: Optional[int] = None

    @property
    def terms(self) -> Dict[int, int]:
        return dict(self._terms)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> "LaurentPoly":
        acc: Dict[int, int] = {}
        for exp, coeff in pairs:
            acc[exp] = acc.get(exp, 0) + coeff
        return cls(acc)

    def to_pairs(self) -> list[list[int]]:
        return [[exp, coeff] for exp, coeff in self._terms.items()]

    def items(self) -> Iterator[Tuple[int, int]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def bar(self) -> "LaurentPoly":
        return LaurentPoly({-exp: coeff for exp, coeff in self._terms.items()})

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by q^k."""
        return LaurentPoly({exp + k: coeff for exp, coeff in self._terms.items()})

    def _coerce(self, other: Number) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, int):
            return LaurentPoly({0: other})
        raise TypeError(f"Cannot combine LaurentPoly with {type(other).__name__}")

    def __add__(self, other: Number) -> "LaurentPoly":
        other = self._coerce(other)
        acc = dict(self._terms)
        for exp, coeff in other._terms.items():
            acc[exp] = acc.get(exp, 0) + coeff
        return LaurentPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({exp: -coeff for exp, coeff in self._terms.items()})

    def __sub__(self, other: Number) -> "LaurentPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> "LaurentPoly":
        return self._coerce(other) - self

    def __mul__(self, other: Number) -> "LaurentPoly":
        other = self._coerce(other)
        acc: Dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                acc[e1 + e2] = acc.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            raise ValueError("Negative powers are only defined for monomials")
        result = LaurentPoly({0: 1})
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        return render_text(self)


def monomial(coeff: int, exp: int) -> LaurentPoly:
    return LaurentPoly({exp: coeff})


def add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a + b


def mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a * b


def bar(a: LaurentPoly) -> LaurentPoly:
    return a.bar()


def quantum(k: int) -> LaurentPoly:
    """Quantum integer [k] = (q^k - q^-k) / (q - q^-1), extended by [-k] = -[k]."""
    if k == 0:
        return LaurentPoly()
    if k < 0:
        return -quantum(-k)
    return LaurentPoly({exp: 1 for exp in range(1 - k, k, 2)})


ONE = monomial(1, 0)
Q = monomial(1, 1)
Q_INV = monomial(1, -1)


def _render_term(coeff: int, exp: int) -> str:
    magnitude = abs(coeff)
    if exp == 0:
        return str(magnitude)
    power = "q" if exp == 1 else f"q^{exp}"
    if magnitude == 1:
        return power
    return f"{magnitude}*{power}"


def render_text(p: LaurentPoly) -> str:
    if p.is_zero():
        return "0"
    parts: list[str] = []
    for exp, coeff in p.items():
        body = _render_term(coeff, exp)
        if not parts:
            parts.append(f"-{body}" if coeff < 0 else body)
        else:
            parts.append(f"- {body}" if coeff < 0 else f"+ {body}")
    return " ".join(parts)
