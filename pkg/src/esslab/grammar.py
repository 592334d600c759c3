"""Distribution grammar used by the CLI and configs.

    dist  := "sym(" base ")" | base
    base  := name | name ":" number
    name  := exp | normal | uniform | weibull | pareto | cauchy | lognormal | logistic | expexp
"""

import re

from .distributions import DistributionSpec, Family
from .errors import DistributionError, GrammarError

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_]+)|(?P<number>[^\s:()]+)|(?P<punct>[:()]))")
_NAMES = {family.value: family for family in Family} | {"exp": Family.EXPONENTIAL}


def tokenize(text: str) -> list[str]:
    tokens = []
    position = 0
    text = text.strip()
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            raise GrammarError(f"unexpected input `{text[position:]}`", text[position:])
        tokens.append(match.group(match.lastgroup))
        position = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.position = 0

    def peek(self) -> str | None:
        return self.tokens[self.position] if self.position < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        token = self.peek()
        if token is None:
            raise GrammarError(f"unexpected end of `{self.text}`", "<end>")
        if expected is not None and token != expected:
            raise GrammarError(f"expected `{expected}` but found `{token}`", token)
        self.position += 1
        return token

    def parse(self) -> DistributionSpec:
        spec = self.parse_dist()
        trailing = self.peek()
        if trailing is not None:
            raise GrammarError(f"unexpected token `{trailing}`", trailing)
        return spec

    def parse_dist(self) -> DistributionSpec:
        if self.peek() == "sym":
            self.take()
            self.take("(")
            base = self.parse_base()
            self.take(")")
            try:
                return DistributionSpec(base.family, base.shape, symmetrized=True)
            except DistributionError as exc:
                raise GrammarError(str(exc), base.label) from None
        return self.parse_base()

    def parse_base(self) -> DistributionSpec:
        name = self.take()
        family = _NAMES.get(name.lower())
        if family is None:
            raise GrammarError(f"unknown distribution `{name}`", name)
        shape = None
        if self.peek() == ":":
            self.take()
            raw = self.take()
            try:
                shape = float(raw)
            except ValueError:
                raise GrammarError(f"`{raw}` is not a number", raw) from None
        try:
            return DistributionSpec(family, shape)
        except DistributionError as exc:
            raise GrammarError(str(exc), name if shape is None else f"{name}:{raw}") from None


def parse_distribution(text: str) -> DistributionSpec:
    if not isinstance(text, str):
        raise TypeError("distribution must be given as a string")
    return _Parser(text).parse()


def format_distribution(spec: DistributionSpec) -> str:
    return spec.label
