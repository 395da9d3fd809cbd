#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The pipeline module: configuration, stage manifests, the stage runner
behind the diachron command and the synthetic fixture generator.
"""

STAGES = ( "ingest", "slice", "split", "tokenize", "train-teachers",
    "distill", "eval-ppl", "eval-pairs", "build-cloze", "eval-cloze",
    "leakage", "discover", "attribute" )


class ConfigError(Exception):
    """Raised with every diagnostic found in a configuration."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super(ConfigError, self).__init__(
            "Invalid configuration:\n%s" % "\n".join(
                "  %s: %s" % item for item in self.diagnostics
            )
        )


class MissingArtifactError(Exception):
    """Raised when a stage runs before the stage producing its input."""

    def __init__(self, stage, needed_stage, path):
        self.stage = stage
        self.needed_stage = needed_stage
        self.path = path
        super(MissingArtifactError, self).__init__(
            "Stage %s needs %s; run 'diachron run %s' first" % (
                stage, path, needed_stage
            )
        )


class PipelineLockedError(Exception):
    """Raised when another pipeline holds the output directory."""

    def __init__(self, path, pid=None, stale=False):
        self.path = path
        self.pid = pid
        self.stale = stale

        if stale:
            message = "Stale lock %s left by pid %s; remove it to " \
                "continue" % (path, pid)
        else:
            message = "Output directory is locked by pid %s (%s)" % (
                pid, path
            )
        super(PipelineLockedError, self).__init__(message)


class StageError(Exception):
    """Raised when a stage cannot produce its outputs."""

    def __init__(self, stage, reason):
        self.stage = stage
        self.reason = reason
        super(StageError, self).__init__("Stage %s failed: %s" % (
            stage, reason
        ))


def main(argv=None):
    """Runs the diachron command and returns its exit status."""

    from libdiachron.pipeline.runner import main as _main
    return _main(argv)
