import re
import shlex
from collections.abc import Callable
from typing import TypeVar

__all__ = [
    'to_snake',
    'to_camel',
    'to_pascal',
    'to_kebab',
    'spellings',
    'make_lex_separator',
    'float_separator',
    'sentence',
]

OuterCastT = TypeVar('OuterCastT', list, tuple)

_camel_boundary = re.compile('(_|-)([a-zA-Z0-9])')
_snake_boundary = re.compile('([a-z0-9])([A-Z])')


def to_snake(string: str) -> str:
    snaked = _snake_boundary.sub(r'\1_\2', string.strip())
    return re.sub('[- ]+', '_', snaked).lower()


def to_camel(string: str) -> str:
    return _camel_boundary.sub(lambda match: match[2].upper(), to_snake(string)).rstrip(
        '_-'
    )


def to_pascal(string: str) -> str:
    camel = to_camel(string)
    return camel[:1].upper() + camel[1:]


def to_kebab(string: str) -> str:
    return to_snake(string).replace('_', '-').rstrip('-')


def spellings(name: str) -> tuple[str, ...]:
    """Every accepted spelling of an identifier, in a stable order."""
    variants = (
        name,
        name.upper(),
        name.lower(),
        to_snake(name),
        to_camel(name),
        to_pascal(name),
        to_kebab(name),
    )
    return tuple(dict.fromkeys(variants))


def make_lex_separator(
    outer_cast: type[OuterCastT], cast: Callable[[str], object] = str
) -> Callable[[str], OuterCastT]:
    """Split a comma separated value honouring shell quoting."""

    def wrapper(value: str) -> OuterCastT:
        lex = shlex.shlex(value, posix=True)
        lex.whitespace = ','
        lex.whitespace_split = True
        return outer_cast(cast(item.strip()) for item in lex if item.strip())

    return wrapper


float_separator = make_lex_separator(tuple, float)


def sentence(string: str) -> str:
    return string.rstrip('.!?') + '.'
