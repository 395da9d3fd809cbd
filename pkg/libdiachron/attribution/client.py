#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
A chat-completions client for a text-generation endpoint.

Requests are POSTed as JSON with temperature 0.  Transport failures,
rate limiting (429) and server errors (5xx) raise EndpointError and are
retried with exponential backoff; other HTTP errors fail at once.
"""

import os
import socket
import threading
import time

import httplib2
import retrying

from libdiachron.output import debug
from libdiachron.records import json
from libdiachron.attribution import AttributionError, EndpointError, \
    NoEndpointError

DEFAULT_TIMEOUT = 60
DEFAULT_ATTEMPTS = 5
DEFAULT_IN_FLIGHT = 4
BACKOFF_MULTIPLIER = 1000
BACKOFF_MAX = 60000


def _retryable(ex):
    return isinstance(ex, EndpointError)


class EndpointClient(object):
    """
    @param {str} url            The chat completions URL.
    @param {str} key            Bearer token, when the endpoint needs one.
    @param {str} model          Model name sent with each request.
    @param {int} in_flight      Concurrent requests allowed.
    @param {float} rate         Requests per second, unlimited when None.
    """
    def __init__(self, url, key=None, model=None, temperature=0.0,
            timeout=DEFAULT_TIMEOUT, max_attempts=DEFAULT_ATTEMPTS,
            in_flight=DEFAULT_IN_FLIGHT, rate=None,
            backoff_multiplier=BACKOFF_MULTIPLIER, backoff_max=BACKOFF_MAX):
        if not url:
            raise NoEndpointError()

        self.url = url
        self.key = key
        self.model = model
        self.temperature = temperature
        self.timeout = timeout
        self.in_flight = max(1, int(in_flight))
        self.rate = rate

        self._retryer = retrying.Retrying(
            stop_max_attempt_number=max_attempts,
            wait_exponential_multiplier=backoff_multiplier,
            wait_exponential_max=backoff_max,
            retry_on_exception=_retryable,
        )
        self._lock = threading.Lock()
        self._last = None

    @classmethod
    def from_config(cls, section=None, environ=None):
        """
        Builds a client from the attribution.endpoint config section, with
        DIACHRON_ENDPOINT_URL, DIACHRON_ENDPOINT_KEY and
        DIACHRON_ENDPOINT_MODEL taking precedence.
        """
        environ = os.environ if environ is None else environ
        section = dict(section or {})

        for name in ( "url", "key", "model" ):
            value = environ.get("DIACHRON_ENDPOINT_%s" % name.upper())
            if value:
                section[name] = value

        return cls(section.pop("url", None), **section)

    def _throttle(self):
        if not self.rate:
            return

        with self._lock:
            now = time.monotonic()
            if self._last is not None:
                wait = self._last + 1.0 / self.rate - now
                if wait > 0:
                    time.sleep(wait)
                    now += wait
            self._last = now

    def _payload(self, prompt):
        payload = {
            "messages": [ { "role": "user", "content": prompt } ],
            "temperature": self.temperature,
        }
        if self.model:
            payload["model"] = self.model
        return payload

    def _request(self, prompt):
        self._throttle()

        headers = { "Content-Type": "application/json" }
        if self.key:
            headers["Authorization"] = "Bearer %s" % self.key

        http = httplib2.Http(timeout=self.timeout)
        try:
            res, content = http.request(self.url, "POST",
                body=json.dumps(self._payload(prompt)), headers=headers)
        except (httplib2.HttpLib2Error, socket.error) as ex:
            raise EndpointError(self.url, str(ex))

        if res.status == 429 or res.status >= 500:
            raise EndpointError(self.url, "HTTP %d" % res.status)
        if res.status != 200:
            raise AttributionError("Endpoint %s refused the request: HTTP %d"
                % (self.url, res.status))

        return _content(json.loads(content))

    def complete(self, prompt):
        """Returns the text the endpoint generates for prompt."""

        debug("Prompting %s: %r" % (self.url, prompt))
        return self._retryer.call(self._request, prompt)


def _content(data):
    try:
        choice = data["choices"][0]
    except (KeyError, IndexError, TypeError):
        raise AttributionError("Endpoint response has no choices")

    if "message" in choice:
        return choice["message"].get("content") or ""
    return choice.get("text") or ""
