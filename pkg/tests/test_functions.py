from dataclasses import dataclass

from gyver.detours.functions import lazymethod


def test_lazymethod():
    class Test:
        def __init__(self) -> None:
            self.counter = 0

        @lazymethod
        def calculate_name(self):
            self.counter += 1
            return 'test_' + str(self.counter)

    t = Test()
    t2 = Test()
    assert t.calculate_name() == 'test_1'
    assert t.calculate_name() == 'test_1'
    assert t.counter == 1

    assert lazymethod.is_initialized(t, 'calculate_name')
    assert not lazymethod.is_initialized(t2, 'calculate_name')

    assert t2.calculate_name() == 'test_1'


def test_lazymethod_on_frozen_dataclass():
    calls = []

    @dataclass(frozen=True)
    class Frozen:
        value: int

        @lazymethod
        def doubled(self):
            calls.append(self.value)
            return self.value * 2

    item = Frozen(3)

    assert item.doubled() == 6
    assert item.doubled() == 6
    assert calls == [3]


def test_lazymethod_on_class_returns_descriptor():
    class Test:
        @lazymethod
        def value(self):
            return 1

    assert isinstance(Test.value, lazymethod)
    assert Test.value.private_name == '_lazymethod_value_'
