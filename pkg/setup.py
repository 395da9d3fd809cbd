#!/usr/bin/env python

# Copyright (C) 2026 The diachron authors.  All rights reserved.

from datetime import datetime
from setuptools import setup
from libdiachron import __version__

delim = """
=============================================================================

"""

setup(
    name = 'diachron',
    description = 'Diachron - time-sliced language model battery',
    version = __version__,
    license = 'BSD License',
    keywords = 'language-model diachronic corpus time-slice perplexity cloze',
    long_description = delim.join([
        "Diachron %s - %s" % (__version__, str(datetime.utcnow())),
        open("README.rst").read(),
        "Change history",
        open("CHANGELIST.rst").read()
    ]),
    test_suite = "tests",
    python_requires = '>=3.8',
    setup_requires = [
        'setuptools',
    ],
    install_requires = [
        'docopt >= 0.6.0',
        'httplib2 >= 0.8',
        'numpy >= 1.21',
        'python-dateutil >= 1.5',
        'rapidfuzz >= 2.0',
        'retrying >= 1.1.0',
        'safetensors >= 0.3',
        'torch >= 1.13',
        'Unidecode >= 1.1',
    ],
    extras_require = {
        'simplejson': [ 'simplejson >= 3.0' ],
    },
    packages = [
        'libdiachron',
        'libdiachron.attribution',
        'libdiachron.corpus',
        'libdiachron.decoding',
        'libdiachron.discovery',
        'libdiachron.evaluation',
        'libdiachron.model',
        'libdiachron.options',
        'libdiachron.pipeline',
        'libdiachron.tokenizer',
        'libdiachron.training',
    ],
    scripts = [
        'bin/diachron',
    ],
)
