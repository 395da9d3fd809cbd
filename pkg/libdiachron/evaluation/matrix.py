#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Cross-time perplexity: every slice model scored on every slice's test
set.
"""

from libdiachron.output import verbose
from libdiachron.records import write_csv
from libdiachron.model.scoring import perplexity
from libdiachron.evaluation import EvaluationError


class PerplexityMatrix(object):
    """
    values[i][j] is the perplexity of the model of rows[i] on the test set
    of columns[j].
    """
    def __init__(self, rows, columns, values):
        self.rows = list(rows)
        self.columns = list(columns)
        self.values = [ list(row) for row in values ]

    def get(self, model, test_set):
        return self.values[self.rows.index(model)][
            self.columns.index(test_set)]

    def row_minimum_on_diagonal(self):
        """True when every model scores its own slice best."""

        for i, label in enumerate(self.rows):
            row = self.values[i]
            own = row[self.columns.index(label)]
            if any(value < own for value in row):
                return False
        return True

    def monotone_off_diagonal(self):
        """
        True when within each row perplexity does not decrease as the
        test slice moves away from the model's slice in either direction.
        """
        for i, label in enumerate(self.rows):
            row = self.values[i]
            diag = self.columns.index(label)
            later = row[diag:]
            earlier = row[:diag + 1][::-1]
            for side in ( later, earlier ):
                if any(b < a for a, b in zip(side, side[1:])):
                    return False
        return True

    def report_rows(self):
        for i, model in enumerate(self.rows):
            for j, test_set in enumerate(self.columns):
                yield ( model, test_set, "perplexity", self.values[i][j] )

    def save(self, path):
        """Writes the matrix as CSV, one row per model."""

        write_csv(path, [ "model" ] + self.columns, [
            [ model ] + self.values[i] for i, model in enumerate(self.rows)
        ])

    def __repr__(self):
        return "PerplexityMatrix(%d x %d)" % (len(self.rows),
            len(self.columns))


def cross_time_matrix(battery, test_sets, stride=None):
    """
    @param {Battery} battery    Slice models with their tokenizers.
    @param {dict} test_sets     Slice label to list of test texts.
    @raise {EvaluationError}    When a battery slice has no test set or a
                                test set no model.
    """
    labels = battery.labels()
    missing = [ label for label in labels if label not in test_sets ]
    missing += [ label for label in test_sets if label not in labels ]
    if missing:
        raise EvaluationError("Missing slice in cross-time matrix: %s" %
            ", ".join(missing))

    values = []
    for label, model, tokenizer in battery:
        row = [ perplexity(model, tokenizer, test_sets[column], stride)
            for column in labels ]
        verbose("Perplexity of %s: %s" % (label, ", ".join(
            "%.3f" % value for value in row)))
        values.append(row)

    return PerplexityMatrix(labels, labels, values)
