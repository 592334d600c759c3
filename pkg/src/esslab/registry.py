from typing import Dict

from .errors import DistributionError
from .laws import DEFAULT_LAWS, Family, Law


class FamilyRegistry:
    def __init__(self, laws: Dict[Family, Law] | None = None):
        self._laws: Dict[Family, Law] = dict(DEFAULT_LAWS if laws is None else laws)

    def get_law(self, family: Family | str) -> Law:
        try:
            return self._laws[Family(family)]
        except (KeyError, ValueError):
            raise DistributionError(f"`{family}` is not a registered family") from None

    def set_law(self, family: Family, law: Law):
        if not isinstance(law, Law):
            raise TypeError("law must be an instance of esslab.laws.Law")
        self._laws[Family(family)] = law

    def families(self) -> list[Family]:
        return list(self._laws)

    def reset(self):
        self._laws = dict(DEFAULT_LAWS)


registry = FamilyRegistry()
