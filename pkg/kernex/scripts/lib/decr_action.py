import argparse
from types import NoneType

__all__ = ("Decrement",)


# noinspection PyShadowingBuiltins
class Decrement(argparse.Action):
    """
    Counterpart of action="count": each occurrence lowers dest by one, never
    below the floor.
    """

    def __init__(
        self,
        option_strings,
        dest: str | NoneType,
        default: int = None,
        required: bool = False,
        help: str = None,
        floor: int = 0,
    ):
        self.floor = floor
        super().__init__(
            option_strings, dest, nargs=0, default=default, required=required, help=help
        )

    # noinspection PyShadowingNames
    def __call__(self, parser, namespace, values, option_string=None):
        current = getattr(namespace, self.dest, None)
        if current is None:
            current = self.default or 0
        setattr(namespace, self.dest, max(self.floor, current - 1))
