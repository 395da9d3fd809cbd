#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Defines the singleton interface to diachron command line options.

DiachronOptions is a static proxy class that stays dormant until one of
its attributes is queried.  Importing this module does not parse the
command line.  The first attribute lookup makes the metaclass parse the
usage document in libdiachron.options.doc with docopt, against sys.argv,
and populate the Options store.

Options are stored as lists, so that options given more than once keep
every value.  DiachronOptions returns the last value of an option, while
DiachronOptions.list() returns the list proxy with all values.

Option names are normalised on assignment, so '--slice' is stored as
'slice' and '--prefix-file' as 'prefix_file'.  Positional arguments are
stored without angle brackets, so '<stage>' becomes 'stage'.
"""

import re, sys

__all__ = [ "DiachronOptions" ]


class Options(object):
    """The actual class where the options data are stored."""
    __initialised = False


def _normalise(name):
    """Maps a docopt key to an attribute name."""

    name = re.sub(r'^<(.*)>$', r'\1', name)
    return re.sub(r'^_+', "", re.sub(r'-', "_", name))


class DiachronListOptionsType(type):
    """An type interface to the static DiachronListOptions class."""

    def _initialise_class(cls, argv=None):
        from docopt import docopt
        from libdiachron.options import doc
        from libdiachron import __version__

        options = docopt(
            doc.__doc__ % __version__,
            argv = sys.argv[1:] if argv is None else argv,
            version = __version__,
        )

        setattr(cls, "options", options)

        for key, val in options.items():
            setattr(cls, key, val)

    def parse(cls, argv):
        """
        Parses an explicit argument vector instead of sys.argv, replacing
        any options parsed so far.

        @param {list} argv   The arguments, without the program name.
        """
        cls.reset()
        cls._initialise_class(argv)
        Options._Options__initialised = True # pylint: disable-msg=W0212

    def reset(cls):
        """Forgets every parsed option, so the next query parses again."""

        for name in list(vars(Options)):
            if not name.startswith("_"):
                type.__delattr__(Options, name)
        Options._Options__initialised = False # pylint: disable-msg=W0212

    def __getattr__(cls, name):
        if name.startswith("__"):
            raise AttributeError(name)

        if not Options._Options__initialised: # pylint: disable-msg=W0212
            Options._Options__initialised = True # pylint: disable-msg=W0212
            cls._initialise_class()

        if not hasattr(Options, name):
            type.__setattr__(Options, name, [ None ])

        return getattr(Options, name)

    def __setattr__(cls, name, value):
        name = _normalise(name)

        if isinstance(value, list):
            listvalue = list(value) if value else [ None ]
        else:
            listvalue = [ value ]

        type.__setattr__(Options, name, listvalue)


class DiachronListOptions(object, metaclass=DiachronListOptionsType):
    """Static interface to options as lists."""


class DiachronOptionsType(DiachronListOptionsType):
    """A type interface to the static DiachronOptions class."""

    def list(cls):
        """Interface for accessing options in list form."""
        return DiachronListOptions

    def parse(cls, argv):
        DiachronListOptions.parse(argv)

    def reset(cls):
        DiachronListOptions.reset()

    def __getattr__(cls, name):
        if name.startswith("__"):
            raise AttributeError(name)

        return getattr(DiachronListOptions, name)[-1]

    def __setattr__(cls, name, value):
        setattr(DiachronListOptions, name, value)


class DiachronOptions(object, metaclass=DiachronOptionsType):
    """A singleton abstract proxy class for accessing options."""
