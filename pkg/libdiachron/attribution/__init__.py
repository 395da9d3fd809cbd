#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The attribution module: author linkage between a catalog and an
authority list, and dating of works through a text-generation endpoint.
"""


class AttributionError(Exception):
    """Raised for unusable attribution inputs."""

    def __init__(self, message):
        super(AttributionError, self).__init__(message)


class EndpointError(AttributionError):
    """Raised for transport failures that are worth retrying."""

    def __init__(self, url, reason):
        self.url = url
        self.reason = reason
        super(EndpointError, self).__init__(
            "Endpoint %s failed: %s" % (url, reason)
        )


class NoEndpointError(AttributionError):
    """Raised when no endpoint URL is configured."""

    def __init__(self):
        super(NoEndpointError, self).__init__(
            "No text-generation endpoint configured; set "
            "DIACHRON_ENDPOINT_URL or attribution.endpoint.url"
        )
