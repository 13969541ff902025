import pytest

from gyver.detours.enums import (
    DetourMode,
    Direction,
    RegistrationMethod,
    SubspaceSolver,
    Weighting,
)


@pytest.mark.parametrize(
    'spelling', ['monge-knothe', 'monge_knothe', 'MONGE_KNOTHE', 'mongeKnothe', 'MongeKnothe']
)
def test_mode_resolves_any_spelling(spelling):
    assert DetourMode(spelling) is DetourMode.MONGE_KNOTHE


def test_unknown_spelling_raises():
    with pytest.raises(ValueError):
        Weighting('cotangent')


def test_str_is_value():
    assert str(SubspaceSolver.INNER_GW_1D) == 'inner-gw-1d'
    assert f'{RegistrationMethod.GW_ADJACENCY}' == 'gw-adjacency'


def test_direction_flipped():
    assert Direction.ASCENDING.flipped() is Direction.DESCENDING
    assert Direction.DESCENDING.flipped() is Direction.ASCENDING
