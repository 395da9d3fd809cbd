#!/usr/bin/env python

# Copyright (C) 2026 The diachron authors.  All rights reserved.
