#!/usr/bin/env python
# -*- coding: utf8 -*-

"""Create static enum objects"""


class Enum(object):
    """Enum class"""

    def __init__(self): # pragma: no cover
        raise TypeError

    @classmethod
    def values(cls):
        """Returns the public values of the enum in definition order."""

        return [
            val for key, val in vars(cls).items()
            if not key.startswith("_") and not callable(val)
            and not isinstance(val, classmethod)
        ]

    @classmethod
    def check(cls, value):
        """Returns value if it is one of the enum values, else raises."""

        if value not in cls.values():
            raise ValueError("%r is not one of %s" % (
                value, ", ".join(repr(val) for val in cls.values())
            ))
        return value
