#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The pipeline stages and the output directory layout they share.

    corpus/store.jsonl                  ingested documents
    corpus/rejections.json              records ingest refused
    corpus/plan.json                    the SlicePlan
    corpus/splits/<label>.json          SplitSet per slice
    corpus/vocab/<label>.json           train split WordCounts per slice
    battery/<label>/tokenizer.json      per-slice tokenizer
    battery/<label>/<kind>.safetensors  teacher-a, teacher-b and student
    battery/<label>/checkpoints/<kind>-<step>.safetensors
                                        every validation point of training
    logs/<label>-<kind>.csv             TrainingLogs
    eval/cloze.jsonl                    cloze tasks
    reports/*.csv                       metric reports
    attribution/*                       author matches, dates, cache
    manifests/<stage>[@<label>].json    stage manifests
"""

import os
import re

import torch

from libdiachron.output import verbose, debug
from libdiachron.records import read_json, write_json, read_jsonl, \
    write_csv, write_jsonl
from libdiachron.corpus import CorpusStore, ingest
from libdiachron.corpus.crawler import crawl
from libdiachron.corpus.slices import SlicePlan, SplitSet, plan_slices, \
    split_slice, Infeasibility
from libdiachron.corpus.vocab import WordCounts, word_counts, filter_in_vocab
from libdiachron.tokenizer import BpeTokenizer, train_bpe
from libdiachron.model.checkpoint import load_checkpoint, save_checkpoint
from libdiachron.model.battery import Battery
from libdiachron.model.scoring import token_stream
from libdiachron.training import train_teacher, distill_student, \
    select_best
from libdiachron.decoding import top_k_single_words
from libdiachron.evaluation.cloze import build_cloze_set, save_tasks, \
    load_tasks
from libdiachron.evaluation.metrics import rank_cloze, save_rankings, \
    load_rankings, accuracy_grid, mrr_grid, battery_leakage, write_report
from libdiachron.evaluation.pairs import load_pairs, minimal_pair_accuracy
from libdiachron.evaluation.matrix import cross_time_matrix
from libdiachron.discovery import collect_occurrences, \
    trajectory_candidates, cumulative_divergence, save_trajectories, \
    occurrence_trajectories, rank_table
from libdiachron.attribution.names import load_authors
from libdiachron.attribution.matching import match_authors
from libdiachron.attribution.client import EndpointClient
from libdiachron.attribution.dates import load_works, attribute_dates, \
    score_table, save_scores
from libdiachron.pipeline import StageError, MissingArtifactError

TEACHERS = ( ("teacher-a", 0), ("teacher-b", 1) )
STUDENT = "student"
STUDENT_SEED_OFFSET = 2

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


class Workspace(object):
    """Paths and loaders over one pipeline output directory."""

    def __init__(self, config):
        self.config = config
        self.root = config.output_dir

    def path(self, *parts):
        return os.path.join(self.root, *parts)

    @property
    def store_path(self):
        return self.path("corpus", "store.jsonl")

    @property
    def plan_path(self):
        return self.path("corpus", "plan.json")

    @property
    def cloze_path(self):
        return self.path("eval", "cloze.jsonl")

    @property
    def rankings_path(self):
        return self.report_path("cloze-rankings.csv")

    @property
    def lock_path(self):
        return self.path(".lock")

    def split_path(self, label):
        return self.path("corpus", "splits", "%s.json" % label)

    def vocab_path(self, label):
        return self.path("corpus", "vocab", "%s.json" % label)

    def tokenizer_path(self, label):
        return self.path("battery", label, "tokenizer.json")

    def checkpoint_path(self, label, kind):
        return self.path("battery", label, "%s.safetensors" % kind)

    def interval_checkpoint_path(self, label, kind, step):
        return self.path("battery", label, "checkpoints",
            "%s-%06d.safetensors" % (kind, step))

    def log_path(self, label, kind):
        return self.path("logs", "%s-%s.csv" % (label, kind))

    def report_path(self, name):
        return self.path("reports", name)

    def manifest_path(self, name):
        return self.path("manifests", name)

    def load_store(self):
        return CorpusStore.load(self.store_path, self.config.year_range())

    def load_plan(self):
        return SlicePlan.from_dict(read_json(self.plan_path))

    def load_split(self, label):
        return SplitSet.from_dict(read_json(self.split_path(label)))

    def load_vocab(self, label):
        return WordCounts.load(self.vocab_path(label))

    def load_tokenizer(self, label):
        return BpeTokenizer.load(self.tokenizer_path(label))

    def labels(self, label=None, stage=None):
        """The plan's slice labels, or just label after checking it."""

        if not os.path.exists(self.plan_path):
            raise MissingArtifactError(stage or "decode", "slice",
                self.plan_path)

        labels = self.load_plan().labels()
        if label is None:
            return labels
        if label not in labels:
            raise StageError("slice", "No slice %s in the plan (%s)" % (
                label, ", ".join(labels)))
        return [ label ]

    def load_battery(self, kind=STUDENT, labels=None):
        labels = labels or self.labels()
        return Battery.load(self.path("battery"), labels, kind)


_REGISTRY = {}


def register(cls):
    _REGISTRY[cls.name] = cls
    return cls


def get_stage(name):
    return _REGISTRY[name]


class Stage(object):
    """
    A pipeline stage.  Subclasses name the config sections and input
    files they read and the artifacts they need, and run() returns the
    paths written.
    """
    name = None
    sections = ()
    per_slice = False

    def __init__(self, workspace, label=None):
        self.workspace = workspace
        self.config = workspace.config
        self.label = label if self.per_slice else None

    def configured(self):
        return True

    def labels(self):
        return self.workspace.labels(self.label, self.name)

    def requires(self):
        """(path, producing stage) of every artifact the stage reads."""
        return []

    def input_files(self):
        """Files outside the workspace that the stage reads."""
        return []

    def run(self):
        raise NotImplementedError

    def __repr__(self):
        return "Stage(%s%s)" % (self.name,
            "@%s" % self.label if self.label else "")


@register
class IngestStage(Stage):
    name = "ingest"
    sections = ( "corpus", )

    def input_files(self):
        return list(crawl(self.config.corpus_paths()))

    def run(self):
        corpus = self.config["corpus"]
        store, report = ingest(self.config.corpus_paths(),
            corpus["schema"] or None, self.config.year_range())

        store.save(self.workspace.store_path)
        rejections = self.workspace.path("corpus", "rejections.json")
        report.save(rejections)
        return [ self.workspace.store_path, rejections ]


@register
class SliceStage(Stage):
    name = "slice"
    sections = ( "corpus", "slices" )

    def requires(self):
        return [ (self.workspace.store_path, "ingest") ]

    def run(self):
        slices = self.config["slices"]
        plan = plan_slices(self.workspace.load_store(), slices["n_slices"],
            slices["budgets"], self.config.year_range())

        write_json(self.workspace.plan_path, plan.to_dict())
        if not plan.feasible:
            raise StageError(self.name, str(plan.infeasibility))
        return [ self.workspace.plan_path ]


@register
class SplitStage(Stage):
    name = "split"
    sections = ( "seed", "slices" )
    per_slice = True

    def requires(self):
        return [ (self.workspace.plan_path, "slice"),
            (self.workspace.store_path, "ingest") ]

    def run(self):
        plan = self.workspace.load_plan()
        if not plan.feasible:
            raise StageError(self.name, "The slice plan is infeasible: %s" %
                plan.infeasibility)

        store = self.workspace.load_store()
        outputs = []
        for label in self.labels():
            result = split_slice(plan, label, self.config.seed)
            if isinstance(result, Infeasibility):
                raise StageError(self.name, str(result))

            write_json(self.workspace.split_path(label), result.to_dict())
            word_counts(store, result.train, "%s/train" % label).save(
                self.workspace.vocab_path(label))
            outputs += [ self.workspace.split_path(label),
                self.workspace.vocab_path(label) ]
        return outputs


class SplitInputStage(Stage):
    """Base of the stages that need a slice's split."""

    per_slice = True

    def requires(self):
        return [ (self.workspace.split_path(label), "split")
            for label in self.labels() ] + [
            (self.workspace.store_path, "ingest") ]

    def texts(self, store, label, split):
        return store.texts(self.workspace.load_split(label).ids(split))


class TrainingStage(SplitInputStage):
    """
    Base of the stages that train models.  Every validation point is
    saved under battery/<label>/checkpoints and the kept model is chosen
    among those files by select_best.
    """

    def checkpointer(self, label, kind, tokenizer_hash):
        """@return {tuple} (on_eval callback, list of saved Checkpoints)"""

        directory = os.path.dirname(
            self.workspace.interval_checkpoint_path(label, kind, 0))
        if os.path.isdir(directory):
            for name in os.listdir(directory):
                if name.startswith("%s-" % kind):
                    os.unlink(os.path.join(directory, name))

        saved = []

        def on_eval(model, step, epoch, val_loss):
            saved.append(save_checkpoint(model,
                self.workspace.interval_checkpoint_path(label, kind, step),
                tokenizer_hash, { "step": step, "epoch": epoch,
                    "val_loss": val_loss }))

        return on_eval, saved

    def keep(self, label, kind, saved, log):
        """Writes the selected checkpoint and the log; returns the paths."""

        best = select_best(saved)
        debug("%s %s: kept step %d of %d checkpoints" % (label, kind,
            best.metadata["step"], len(saved)))

        best.save(self.workspace.checkpoint_path(label, kind))
        log.save(self.workspace.log_path(label, kind))
        return [ self.workspace.checkpoint_path(label, kind),
            self.workspace.log_path(label, kind) ] + [
            self.workspace.interval_checkpoint_path(label, kind,
                ckpt.metadata["step"]) for ckpt in saved ]


@register
class TokenizeStage(SplitInputStage):
    name = "tokenize"
    sections = ( "tokenizer", )

    def run(self):
        store = self.workspace.load_store()
        section = self.config["tokenizer"]
        outputs = []

        for label in self.labels():
            tokenizer = train_bpe(self.texts(store, label, "train"),
                section["vocab_size"], section["byte_fallback"],
                section["min_frequency"])
            tokenizer.save(self.workspace.tokenizer_path(label))
            verbose("Tokenizer %s: %d tokens" % (label,
                tokenizer.vocab_size))
            outputs.append(self.workspace.tokenizer_path(label))
        return outputs


@register
class TrainTeachersStage(TrainingStage):
    name = "train-teachers"
    sections = ( "seed", "model", "train" )

    def requires(self):
        return super(TrainTeachersStage, self).requires() + [
            (self.workspace.tokenizer_path(label), "tokenize")
            for label in self.labels()
        ]

    def run(self):
        store = self.workspace.load_store()
        seed = self.config.seed
        outputs = []

        for label in self.labels():
            tokenizer = self.workspace.load_tokenizer(label)
            digest = tokenizer.digest()
            train_ids = token_stream(tokenizer,
                self.texts(store, label, "train"))
            val_ids = token_stream(tokenizer, self.texts(store, label, "val"))

            for kind, offset in TEACHERS:
                on_eval, saved = self.checkpointer(label, kind, digest)
                torch.manual_seed(seed + offset)
                _, log = train_teacher(
                    self.config.model_config(tokenizer.vocab_size,
                        seed + offset),
                    self.config.train_config(seed + offset),
                    train_ids, val_ids, digest, on_eval=on_eval,
                    label="%s %s" % (label, kind)
                )
                outputs += self.keep(label, kind, saved, log)
        return outputs


@register
class DistillStage(TrainingStage):
    name = "distill"
    sections = ( "seed", "model", "student", "train" )

    def requires(self):
        required = super(DistillStage, self).requires()
        for label in self.labels():
            required.append((self.workspace.tokenizer_path(label),
                "tokenize"))
            required += [ (self.workspace.checkpoint_path(label, kind),
                "train-teachers") for kind, _ in TEACHERS ]
        return required

    def run(self):
        store = self.workspace.load_store()
        seed = self.config.seed + STUDENT_SEED_OFFSET
        outputs = []

        for label in self.labels():
            tokenizer = self.workspace.load_tokenizer(label)
            digest = tokenizer.digest()
            teachers = [ load_checkpoint(
                self.workspace.checkpoint_path(label, kind), digest)
                for kind, _ in TEACHERS ]

            on_eval, saved = self.checkpointer(label, STUDENT, digest)
            torch.manual_seed(seed)
            _, log = distill_student(teachers[0], teachers[1],
                self.config.student_config(tokenizer.vocab_size, seed),
                token_stream(tokenizer, self.texts(store, label, "train")),
                token_stream(tokenizer, self.texts(store, label, "val")),
                self.config.train_config(seed), digest, on_eval=on_eval,
                label="%s %s" % (label, STUDENT))

            outputs += self.keep(label, STUDENT, saved, log)
        return outputs


class BatteryStage(Stage):
    """Base of the stages that evaluate the student battery."""

    def requires(self):
        required = []
        for label in self.labels():
            required += [
                (self.workspace.tokenizer_path(label), "tokenize"),
                (self.workspace.checkpoint_path(label, STUDENT), "distill"),
            ]
        return required

    def vocabularies(self):
        return [ self.workspace.load_vocab(label) for label in self.labels() ]


@register
class EvalPerplexityStage(BatteryStage):
    name = "eval-ppl"
    sections = ( "evaluation", )

    def requires(self):
        return super(EvalPerplexityStage, self).requires() + [
            (self.workspace.split_path(label), "split")
            for label in self.labels()
        ] + [ (self.workspace.store_path, "ingest") ]

    def run(self):
        store = self.workspace.load_store()
        labels = self.labels()
        test_sets = dict(
            (label, store.texts(self.workspace.load_split(label).test))
            for label in labels
        )

        matrix = cross_time_matrix(self.workspace.load_battery(STUDENT,
            labels), test_sets, self.config["evaluation"]["stride"])

        report = self.workspace.report_path("perplexity.csv")
        table = self.workspace.report_path("perplexity-matrix.csv")
        write_report(report, matrix.report_rows())
        matrix.save(table)
        return [ report, table ]


@register
class EvalPairsStage(BatteryStage):
    name = "eval-pairs"
    sections = ( "evaluation", )

    def configured(self):
        return self.config["evaluation"]["minimal_pairs"] is not None

    def requires(self):
        return super(EvalPairsStage, self).requires() + [
            (self.workspace.vocab_path(label), "split")
            for label in self.labels()
        ]

    def input_files(self):
        return [ self.config.evaluation_path("minimal_pairs") ]

    def run(self):
        section = self.config["evaluation"]
        pairs, skipped = load_pairs(
            self.config.evaluation_path("minimal_pairs"))
        if len(skipped):
            verbose("Skipped minimal pairs: %r" % skipped)

        retained, retention = filter_in_vocab(pairs, self.vocabularies(),
            section["min_count"])

        rows = []
        for label, model, tokenizer in self.workspace.load_battery():
            report = minimal_pair_accuracy(model, tokenizer, retained,
                section["normalize_pairs"], label)
            rows.extend(report.rows())

        report_path = self.workspace.report_path("pairs.csv")
        retention_path = self.workspace.report_path("pairs-retention.csv")
        write_report(report_path, rows)
        write_csv(retention_path, ( "subtask", "retained", "total" ),
            retention.rows())
        return [ report_path, retention_path ]


@register
class BuildClozeStage(Stage):
    name = "build-cloze"
    sections = ( "evaluation", )

    def configured(self):
        return self.config["evaluation"]["cloze_inventory"] is not None

    def requires(self):
        return [ (self.workspace.vocab_path(label), "split")
            for label in self.labels() ]

    def input_files(self):
        return [ self.config.evaluation_path("cloze_inventory") ]

    def run(self):
        section = self.config["evaluation"]
        records = read_jsonl(self.config.evaluation_path("cloze_inventory"))
        tasks, skipped = build_cloze_set(records,
            [ self.workspace.load_vocab(label) for label in self.labels() ],
            section["tail_fraction"], tuple(section["frequency_range"]),
            section["min_count"])

        skips = self.workspace.path("eval", "cloze-skipped.csv")
        save_tasks(self.workspace.cloze_path, tasks)
        write_csv(skips, ( "ref", "reason" ), list(skipped))
        return [ self.workspace.cloze_path, skips ]


@register
class EvalClozeStage(BatteryStage):
    name = "eval-cloze"
    sections = ( "evaluation", )

    def configured(self):
        return self.config["evaluation"]["cloze_inventory"] is not None

    def requires(self):
        return super(EvalClozeStage, self).requires() + [
            (self.workspace.cloze_path, "build-cloze") ]

    def run(self):
        section = self.config["evaluation"]
        k = section["k"]
        max_word_tokens = section["max_word_tokens"]

        def decoder(model, tokenizer, prefix, k, beam_width):
            return top_k_single_words(model, tokenizer, prefix, k,
                beam_width, max_word_tokens)

        tasks = load_tasks(self.workspace.cloze_path)
        rankings = rank_cloze(self.workspace.load_battery(), tasks, k,
            section["beam_width"], decoder)

        slices = self.workspace.load_plan().slices
        accuracy = self.workspace.report_path("cloze-accuracy.csv")
        save_rankings(self.workspace.rankings_path, rankings)
        write_report(accuracy, accuracy_grid(rankings, tasks, slices, k)
            + mrr_grid(rankings, tasks, slices))
        return [ self.workspace.rankings_path, accuracy ]


@register
class LeakageStage(Stage):
    name = "leakage"
    sections = ( "evaluation", )

    def configured(self):
        return self.config["evaluation"]["cloze_inventory"] is not None

    def requires(self):
        return [ (self.workspace.plan_path, "slice"),
            (self.workspace.cloze_path, "build-cloze"),
            (self.workspace.rankings_path, "eval-cloze") ]

    def run(self):
        reports = battery_leakage(load_rankings(self.workspace.rankings_path),
            load_tasks(self.workspace.cloze_path), self.workspace.load_plan(),
            self.config["evaluation"]["k"])

        path = self.workspace.report_path("leakage.csv")
        write_report(path, [ row for report in reports
            for row in report.rows() ])
        return [ path ]


def sample_sentences(store, splits, limit):
    """
    (sentence id, sentence) pairs from the test documents of each split,
    taken from the slices in turn until limit sentences are drawn.
    """
    queues = []
    for split in splits:
        queue = []
        for doc_id in split.test:
            for number, sentence in enumerate(
                    _SENTENCE_RE.split(store[doc_id].text)):
                if sentence.strip():
                    queue.append(( "%s:%d" % (doc_id, number),
                        sentence.strip() ))
        queues.append(queue)

    sample = []
    position = 0
    while len(sample) < limit and any(position < len(q) for q in queues):
        for queue in queues:
            if position < len(queue) and len(sample) < limit:
                sample.append(queue[position])
        position += 1
    return sample


def _safe_name(text):
    return re.sub(r"[^0-9A-Za-z_.-]", "_", text)


@register
class DiscoverStage(BatteryStage):
    name = "discover"
    sections = ( "discovery", "evaluation" )

    def requires(self):
        required = super(DiscoverStage, self).requires() + [
            (self.workspace.split_path(label), "split")
            for label in self.labels()
        ] + [ (self.workspace.store_path, "ingest") ]
        if self.config["discovery"]["tasks"]:
            required.append((self.workspace.rankings_path, "eval-cloze"))
        return required

    def run(self):
        section = self.config["discovery"]
        labels = self.labels()
        baseline = section["baseline"] or labels[-1]
        battery = self.workspace.load_battery(STUDENT, labels)

        sentences = sample_sentences(self.workspace.load_store(),
            [ self.workspace.load_split(label) for label in labels ],
            section["max_sentences"])
        occurrences = collect_occurrences(battery, sentences,
            self.config["evaluation"]["stride"])

        options = dict(min_occurrences=section["min_occurrences"],
            aggregate=section["aggregate"], use_raw=section["use_raw"],
            occurrences=occurrences)
        candidates = trajectory_candidates(battery, baseline, None,
            top_n=section["top_n"], epsilon=section["epsilon"], **options)
        cumulative = cumulative_divergence(battery, baseline, None,
            top_n=section["top_n"], **options)

        outputs = [ self.workspace.report_path("trajectories.csv"),
            self.workspace.report_path("cumulative.csv") ]
        save_trajectories(outputs[0], candidates, labels)
        save_trajectories(outputs[1], cumulative, labels)

        for word in section["words"]:
            table = occurrence_trajectories(battery, word, None,
                use_raw=section["use_raw"], occurrences=occurrences)
            path = self.workspace.report_path("occurrences-%s.csv" %
                _safe_name(word))
            table.save(path)
            outputs.append(path)

        if section["tasks"]:
            rankings = load_rankings(self.workspace.rankings_path)
            path = self.workspace.report_path("rank-table.csv")
            write_csv(path, ( "task_id", "model", "rank" ), [
                ( task_id, model, rank )
                for task_id in section["tasks"]
                for model, rank in rank_table(rankings, task_id)
            ])
            outputs.append(path)

        return outputs


@register
class AttributeStage(Stage):
    name = "attribute"
    sections = ( "attribution", )

    def configured(self):
        section = self.config["attribution"]
        return section["works"] is not None or (
            section["authority"] is not None and
            section["catalog"] is not None)

    def labels(self):
        return []

    def input_files(self):
        return [ self.config.attribution_path(name)
            for name in ( "works", "authority", "catalog" )
            if self.config["attribution"][name] is not None ]

    def run(self):
        section = self.config["attribution"]
        outputs = []

        if section["authority"] is not None and \
                section["catalog"] is not None:
            result = match_authors(
                load_authors(self.config.attribution_path("authority"),
                    "authority"),
                load_authors(self.config.attribution_path("catalog"),
                    "catalog"),
                section["pass1_threshold"], section["pass2_threshold"])
            path = self.workspace.path("attribution", "matches.csv")
            result.save(path)
            outputs.append(path)

        if section["works"] is not None:
            cache = self.workspace.path("attribution", "cache.jsonl")
            attributions = attribute_dates(
                load_works(self.config.attribution_path("works")),
                EndpointClient.from_config(section["endpoint"]), cache,
                tuple(section["plausible_range"]))

            dates = self.workspace.path("attribution", "dates.jsonl")
            write_jsonl(dates, [ dict(item.to_dict(),
                gold_years=item.gold_years) for item in attributions ])
            outputs.append(dates)
            if os.path.exists(cache):
                outputs.append(cache)

            if any(item.gold_labeled for item in attributions):
                path = self.workspace.report_path("attribution.csv")
                save_scores(path, score_table(attributions))
                outputs.append(path)
            else:
                debug("No gold years; attribution accuracy not scored")

        return outputs
