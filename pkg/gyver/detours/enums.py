from collections.abc import Sequence
from enum import Enum
from typing import Any

from gyver.detours import strings
from gyver.detours.functions import lazymethod


class StrEnum(str, Enum):
    """String enum that also resolves from any spelling of a member's name or value."""

    @classmethod
    def _missing_(cls, value: object) -> Any:
        if not isinstance(value, str):
            return None
        return next((item for item in cls if value in item.aliases()), None)

    @lazymethod
    def aliases(self) -> Sequence[str]:
        return tuple(
            dict.fromkeys((*strings.spellings(self.value), *strings.spellings(self.name)))
        )

    def __str__(self) -> str:
        return self.value


class Direction(StrEnum):
    ASCENDING = 'ascending'
    DESCENDING = 'descending'

    def flipped(self) -> 'Direction':
        return Direction.DESCENDING if self is Direction.ASCENDING else Direction.ASCENDING


class DetourMode(StrEnum):
    MONGE_INDEPENDENT = 'monge-independent'
    MONGE_KNOTHE = 'monge-knothe'


class SubspaceSolver(StrEnum):
    INNER_GW_1D = 'inner-gw-1d'
    GW_SQUARE = 'gw-square'
    KANTOROVICH = 'kantorovich'


class GWLoss(StrEnum):
    SQUARE = 'square'
    INNER_PRODUCT = 'inner-product'


class Weighting(StrEnum):
    UNIT = 'unit'
    INVERSE_DISTANCE = 'inverse-distance'


class MeshFormat(StrEnum):
    OFF = 'off'
    PLY_ASCII = 'ply-ascii'


class RegistrationMethod(StrEnum):
    FIEDLER = 'fiedler'
    GW_ADJACENCY = 'gw-adjacency'
