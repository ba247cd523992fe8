"""Exception hierarchy shared by all stages of the pipeline."""


class ArrowRealError(Exception):
    pass


class NotAGroup(ArrowRealError):
    pass


class NotASubgroup(ArrowRealError):
    pass


class NotGenerating(ArrowRealError):
    pass


class InternalInconsistency(ArrowRealError):
    """A constructed object failed a self-check that the theory guarantees.

    Never expected in practice; seeing one means an edge rule or table was
    transcribed wrongly.
    """


class SearchBudgetExceeded(ArrowRealError):
    def __init__(self, what: str, budget: int):
        super().__init__(f"{what}: search budget of {budget} nodes exceeded")
        self.what = what
        self.budget = budget


class MorphismCheckFailed(ArrowRealError):
    pass


class ArmsNotDistinct(ArrowRealError):
    pass


class DegreeSeparationViolated(ArrowRealError):
    pass


class NotStronglyConnected(ArrowRealError):
    pass


class FewerThanTwoVertices(ArrowRealError):
    pass


class DegreeOverflow(ArrowRealError):
    pass


class MixedPresentation(ArrowRealError):
    pass


class CommutationFailed(ArrowRealError):
    pass
