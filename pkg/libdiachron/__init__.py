#!/usr/bin/env python
# -*- coding: utf8 -*-

"""Diachron Library version 0.1.0"""

__version__ = '0.1.0'
