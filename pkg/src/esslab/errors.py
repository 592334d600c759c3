class EssLabError(ValueError):
    pass


class DistributionError(EssLabError):
    pass


class GrammarError(DistributionError):
    def __init__(self, message: str, token: str):
        super().__init__(message)
        self.token = token


class GameError(EssLabError):
    pass


class CensusInvariantError(GameError):
    pass


class GeometryError(EssLabError):
    pass


class PlanError(EssLabError):
    pass
