#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Two-pass author linkage.

Pass 1 accepts a looser name distance but only between authors whose life
dates can be compared and agree.  Pass 2 takes the catalog authors left
over and accepts a stricter name distance on its own.  Within a pass the
closest pairs are taken first and each catalog author is matched once.
Distances are normalized Levenshtein distances between canonical names.
"""

from rapidfuzz import process
from rapidfuzz.distance import Levenshtein

from libdiachron.output import verbose, debug
from libdiachron.records import write_csv
from libdiachron.attribution import AttributionError

PASS1_THRESHOLD = 0.25
PASS2_THRESHOLD = 0.10
DATE_TOLERANCE = 1


def name_distance(left, right):
    """Edit distance over the longer name's length, in [0, 1]."""

    return Levenshtein.normalized_distance(left, right)


def date_agreement(left, right, tolerance=DATE_TOLERANCE):
    """
    Returns None when no life date is known on both sides, otherwise
    whether every date known on both sides agrees within tolerance.
    """
    compared = False
    for field in ( "birth_year", "death_year" ):
        a, b = getattr(left, field), getattr(right, field)
        if a is None or b is None:
            continue
        compared = True
        if abs(a - b) > tolerance:
            return False
    return True if compared else None


class AuthorMatch(object):
    # pylint: disable-msg=W0622
    def __init__(self, authority_id, catalog_id, pass_number, name_distance,
            date_agreement):
        self.authority_id = authority_id
        self.catalog_id = catalog_id
        self.pass_number = pass_number
        self.name_distance = name_distance
        self.date_agreement = date_agreement

    def row(self):
        return [ self.catalog_id, self.authority_id, self.pass_number,
            self.name_distance, self.date_agreement ]

    def __repr__(self):
        return "AuthorMatch(%s -> %s, pass %d, %.3f)" % (self.catalog_id,
            self.authority_id, self.pass_number, self.name_distance)


class MatchResult(object):
    """Matches in catalog order, and the catalog authors left unmatched."""

    HEADER = [ "catalog_id", "authority_id", "pass", "name_distance",
        "date_agreement" ]

    def __init__(self, matches, unmatched):
        self.matches = matches
        self.unmatched = unmatched

    def __iter__(self):
        return iter(self.matches)

    def __len__(self):
        return len(self.matches)

    def by_catalog(self):
        return dict((match.catalog_id, match) for match in self.matches)

    def save(self, path):
        write_csv(path, self.HEADER, [ match.row() for match in self.matches ]
            + [ [ author.id, None, None, None, None ]
                for author in self.unmatched ])

    def __repr__(self):
        return "MatchResult(%d matched, %d unmatched)" % (len(self.matches),
            len(self.unmatched))


def distance_matrix(authority, catalog):
    """Catalog by authority matrix of name distances."""

    return process.cdist(
        [ author.canonical for author in catalog ],
        [ author.canonical for author in authority ],
        scorer=Levenshtein.normalized_distance,
    )


def _run_pass(pass_number, authority, catalog, pending, distances,
        threshold, date_tolerance):
    pairs = []
    for i in pending:
        for j, other in enumerate(authority):
            distance = float(distances[i][j])
            if distance > threshold:
                continue

            agreement = date_agreement(catalog[i], other, date_tolerance)
            if pass_number == 1 and not agreement:
                continue
            pairs.append(( distance, str(catalog[i].id), str(other.id), i, j,
                bool(agreement) ))

    matched = {}
    for distance, _, _, i, j, agreement in sorted(pairs):
        if i in matched:
            continue
        matched[i] = AuthorMatch(authority[j].id, catalog[i].id, pass_number,
            distance, agreement)

    debug("Pass %d matched %d of %d" % (pass_number, len(matched),
        len(pending)))
    return matched


def match_authors(authority, catalog, pass1_threshold=PASS1_THRESHOLD,
        pass2_threshold=PASS2_THRESHOLD, date_tolerance=DATE_TOLERANCE):
    """
    Links catalog authors to authority records.

    @param {list} authority     AuthorRecords from the authority file.
    @param {list} catalog       AuthorRecords from the catalog.
    @return {MatchResult}
    @raise {AttributionError}   When pass 2 is looser than pass 1.
    """
    if pass2_threshold > pass1_threshold:
        raise AttributionError("pass2_threshold %r must not exceed "
            "pass1_threshold %r" % (pass2_threshold, pass1_threshold))

    authority, catalog = list(authority), list(catalog)
    if not authority or not catalog:
        return MatchResult([], catalog)

    distances = distance_matrix(authority, catalog)
    pending = list(range(len(catalog)))

    matched = _run_pass(1, authority, catalog, pending, distances,
        pass1_threshold, date_tolerance)
    pending = [ i for i in pending if i not in matched ]
    matched.update(_run_pass(2, authority, catalog, pending, distances,
        pass2_threshold, date_tolerance))

    result = MatchResult(
        [ matched[i] for i in sorted(matched) ],
        [ catalog[i] for i in range(len(catalog)) if i not in matched ],
    )
    verbose("Author matching: %r" % result)
    return result
