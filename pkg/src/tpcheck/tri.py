from enum import IntEnum


class Tri(IntEnum):
    """Truth values ordered ``FALSE < UNKNOWN < TRUE``.

    Because the order is total, ``min``/``max`` give three-valued
    conjunction/disjunction directly.
    """

    FALSE = 0
    UNKNOWN = 1
    TRUE = 2

    def comp(self) -> "Tri":
        return Tri(2 - self.value)

    @property
    def definite(self) -> bool:
        return self is not Tri.UNKNOWN

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]

    @classmethod
    def parse(cls, text: str) -> "Tri":
        try:
            return _FROM_SYMBOL[text]
        except KeyError:
            raise ValueError(f"not a truth value: {text!r} (expected T, F or ?)") from None

    @classmethod
    def of(cls, value: bool) -> "Tri":
        return cls.TRUE if value else cls.FALSE

    def __str__(self):
        return self.symbol


_SYMBOLS = {Tri.FALSE: "F", Tri.UNKNOWN: "?", Tri.TRUE: "T"}
_FROM_SYMBOL = {v: k for k, v in _SYMBOLS.items()}
