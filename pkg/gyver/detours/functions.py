import functools
from collections.abc import Callable
from typing import Any, Generic, TypeVar, overload

from typing_extensions import Self

T = TypeVar('T')
SelfT = TypeVar('SelfT')


class lazymethod(Generic[SelfT, T]):
    """Memoize a zero-argument method on its instance.

    The value is stored with `object.__setattr__`, so it also works on frozen
    dataclasses whose fields never change after construction.
    """

    __slots__ = ('_func', 'public_name', 'private_name')

    format_ = '_lazymethod_{method_name}_'

    def __init__(self, func: Callable[[SelfT], T]) -> None:
        self._func = func

    def __set_name__(self, owner: type[SelfT], name: str) -> None:
        self.public_name = name
        self.private_name = self.get_private(name)

    @classmethod
    def get_private(cls, name: str) -> str:
        return cls.format_.format(method_name=name)

    @overload
    def __get__(self, instance: None, owner: type[SelfT]) -> Self: ...

    @overload
    def __get__(self, instance: SelfT, owner: type[SelfT]) -> Callable[[], T]: ...

    def __get__(self, instance: SelfT | None, owner: type[SelfT]) -> Any:
        if instance is None:
            return self

        @functools.wraps(self._func)
        def _callable() -> T:
            try:
                return getattr(instance, self.private_name)
            except AttributeError:
                value = self._func(instance)
                object.__setattr__(instance, self.private_name, value)
                return value

        return _callable

    @classmethod
    def is_initialized(cls, instance: object, name: str) -> bool:
        return hasattr(instance, cls.get_private(name))
