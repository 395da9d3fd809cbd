#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Teacher training by next-token prediction and distillation of a student
from two frozen teachers, with L = alpha * CE + (1 - alpha) * T^2 * KL.
"""

import copy, math, time

import torch
import torch.nn.functional as F

from libdiachron.output import verbose, debug, Progress
from libdiachron.enum import Enum
from libdiachron.records import write_csv
from libdiachron.model import init_model
from libdiachron.model.checkpoint import Checkpoint


class TrainingError(Exception):
    """Raised for training inputs that cannot be used."""

    def __init__(self, message):
        super(TrainingError, self).__init__(message)


class DivergenceError(TrainingError):
    """Raised when the training loss stops being finite."""

    def __init__(self, step, loss):
        self.step = step
        self.loss = loss
        super(DivergenceError, self).__init__(
            "Training diverged at step %d: loss %r; lower the learning "
            "rate or the weight decay" % (step, loss)
        )


class Schedule(Enum):
    COSINE = "cosine"
    CONSTANT = "constant"


class KlMode(Enum):
    MEAN = "mean"
    AVERAGE = "average"


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class TrainConfig(object):
    """Optimisation recipe shared by teachers and students."""

    FIELDS = ( "learning_rate", "epochs", "batch_size", "weight_decay",
        "distillation_alpha", "temperature", "seed", "eval_interval",
        "schedule", "warmup_fraction", "kl_mode", "grad_clip" )

    def __init__(self, learning_rate=7e-4, epochs=8, batch_size=128,
            weight_decay=5.0, distillation_alpha=0.5, temperature=1.0,
            seed=0, eval_interval=0, schedule=Schedule.COSINE,
            warmup_fraction=0.01, kl_mode=KlMode.MEAN, grad_clip=1.0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.weight_decay = weight_decay
        self.distillation_alpha = distillation_alpha
        self.temperature = temperature
        self.seed = seed
        self.eval_interval = eval_interval
        self.schedule = schedule
        self.warmup_fraction = warmup_fraction
        self.kl_mode = kl_mode
        self.grad_clip = grad_clip

    def errors(self):
        """
        Returns every violated constraint as a message starting with the
        field name.  A configured recipe trains for at least one epoch;
        train_teacher and distill_student still accept epochs=0 from
        callers that only want the initial model evaluated.
        """
        errors = []
        for name in ( "learning_rate", "weight_decay", "distillation_alpha",
                "temperature", "warmup_fraction" ):
            if not _is_number(getattr(self, name)):
                errors.append("%s must be a number, not %r" % (
                    name, getattr(self, name)
                ))
        for name in ( "epochs", "batch_size", "eval_interval", "seed" ):
            if not _is_int(getattr(self, name)):
                errors.append("%s must be an integer, not %r" % (
                    name, getattr(self, name)
                ))
        if self.grad_clip is not None and not _is_number(self.grad_clip):
            errors.append("grad_clip must be a number or null, not %r" % (
                self.grad_clip,
            ))

        if errors:
            return errors

        if not 0.0 <= self.distillation_alpha <= 1.0:
            errors.append("distillation_alpha must lie in [0, 1], not %r" % (
                self.distillation_alpha,
            ))
        if not self.temperature > 0:
            errors.append("temperature must be positive, not %r" % (
                self.temperature,
            ))
        if self.epochs < 1:
            errors.append("epochs must be at least 1, not %r" % (
                self.epochs,
            ))
        if self.batch_size < 1:
            errors.append("batch_size must be at least 1, not %r" % (
                self.batch_size,
            ))
        if self.eval_interval < 0:
            errors.append("eval_interval must be non-negative, not %r" % (
                self.eval_interval,
            ))
        if not self.learning_rate > 0:
            errors.append("learning_rate must be positive, not %r" % (
                self.learning_rate,
            ))
        if self.weight_decay < 0:
            errors.append("weight_decay must be non-negative, not %r" % (
                self.weight_decay,
            ))
        if self.schedule not in Schedule.values():
            errors.append("schedule must be one of %s, not %r" % (
                Schedule.values(), self.schedule
            ))
        if self.kl_mode not in KlMode.values():
            errors.append("kl_mode must be one of %s, not %r" % (
                KlMode.values(), self.kl_mode
            ))
        if not 0.0 <= self.warmup_fraction < 1.0:
            errors.append("warmup_fraction must lie in [0, 1), not %r" % (
                self.warmup_fraction,
            ))
        return errors

    def replace(self, **kwargs):
        data = self.to_dict()
        data.update(kwargs)
        return TrainConfig.from_dict(data)

    def to_dict(self):
        return dict((name, getattr(self, name)) for name in self.FIELDS)

    @classmethod
    def from_dict(cls, data):
        return cls(**dict(
            (key, val) for key, val in data.items() if key in cls.FIELDS
        ))

    def __eq__(self, other):
        return isinstance(other, TrainConfig) and \
            self.to_dict() == other.to_dict()

    def __repr__(self):
        return "TrainConfig(%s)" % ", ".join(
            "%s=%r" % (name, getattr(self, name)) for name in self.FIELDS
        )


class TrainingLog(object):
    """
    Rows of (step, loss, val_loss, time).  Steps at which validation ran
    carry a val_loss and are checkpoints; selected is the index of the
    chosen one among them.
    """
    HEADER = ( "step", "loss", "val_loss", "time" )

    def __init__(self):
        self.rows = []
        self.checkpoints = []
        self.selected = None

    def record(self, step, loss, val_loss=None, elapsed=0.0):
        self.rows.append((step, loss, val_loss, elapsed))
        if val_loss is not None:
            self.checkpoints.append((step, val_loss))

    def losses(self):
        return [ loss for _, loss, _, _ in self.rows if loss is not None ]

    def val_losses(self):
        return [ val_loss for _, val_loss in self.checkpoints ]

    def save(self, path, include_time=True):
        write_csv(path, self.HEADER, [
            (step, loss, val_loss, elapsed if include_time else None)
            for step, loss, val_loss, elapsed in self.rows
        ])

    def __repr__(self):
        return "TrainingLog(%d rows, %d checkpoints, selected=%r)" % (
            len(self.rows), len(self.checkpoints), self.selected
        )


def pack(ids, context_length):
    """
    Cuts a token stream into (n, context_length + 1) blocks, so that each
    block gives context_length inputs and their shifted targets.  A tail
    shorter than a block is kept as a final block aligned to the end of
    the stream.

    @raise {TrainingError} When the stream has fewer than two tokens.
    """
    if len(ids) < 2:
        raise TrainingError("Cannot pack a stream of %d tokens" % len(ids))

    width = context_length + 1
    if len(ids) <= width:
        return torch.as_tensor([ ids ], dtype=torch.long)

    starts = list(range(0, len(ids) - width + 1, context_length))
    if starts[-1] + width < len(ids):
        starts.append(len(ids) - width)

    return torch.as_tensor(
        [ ids[start:start + width] for start in starts ], dtype=torch.long
    )


def best_index(losses):
    """Index of the smallest loss; the earliest wins ties."""

    best = None
    for index, loss in enumerate(losses):
        if best is None or loss < losses[best]:
            best = index
    return best


def _optimizer(model, config):
    decay, no_decay = [], []
    for name, param in model.named_parameters():
        if not param.requires_grad:
            continue
        if param.dim() >= 2 and not name.startswith("embed"):
            decay.append(param)
        else:
            no_decay.append(param)

    return torch.optim.AdamW([
        { "params": decay, "weight_decay": config.weight_decay },
        { "params": no_decay, "weight_decay": 0.0 },
    ], lr=config.learning_rate)


def _schedule(optimizer, config, total_steps):
    if config.schedule == Schedule.CONSTANT or total_steps < 1:
        return torch.optim.lr_scheduler.LambdaLR(optimizer, lambda _: 1.0)

    warmup = max(1, int(round(config.warmup_fraction * total_steps)))

    def factor(step):
        if step < warmup:
            return float(step + 1) / warmup
        progress = float(step - warmup) / max(1, total_steps - warmup)
        return 0.5 * (1.0 + math.cos(math.pi * min(1.0, progress)))

    return torch.optim.lr_scheduler.LambdaLR(optimizer, factor)


def cross_entropy(model, blocks):
    """Mean next-token cross entropy of a model over packed blocks."""

    logits = model(blocks[:, :-1])
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]),
        blocks[:, 1:].reshape(-1))


def validation_loss(model, blocks, batch_size=32):
    """Token-weighted mean cross entropy over blocks, in eval mode."""

    was_training = model.training
    model.eval()

    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, blocks.shape[0], batch_size):
            batch = blocks[start:start + batch_size]
            n_tokens = batch[:, 1:].numel()
            total += float(cross_entropy(model, batch)) * n_tokens
            count += n_tokens

    model.train(was_training)
    return total / count


def _fit(model, config, train_blocks, val_blocks, loss_fn, label,
        on_eval=None):
    """
    The optimisation loop shared by teachers and students.  Validation
    runs every eval_interval steps, or at the end of each epoch when the
    interval is 0, and once before training.  The parameters with the
    lowest validation loss are kept; the earliest wins ties.

    @return {tuple} (best state dict, best metadata, TrainingLog)
    """
    log = TrainingLog()
    start_time = time.time()

    n_batches = int(math.ceil(train_blocks.shape[0] /
        float(config.batch_size)))
    total_steps = n_batches * config.epochs

    optimizer = _optimizer(model, config)
    scheduler = _schedule(optimizer, config, total_steps)
    generator = torch.Generator().manual_seed(config.seed)

    def evaluate(step, epoch, loss):
        val_loss = validation_loss(model, val_blocks)
        log.record(step, loss, val_loss, time.time() - start_time)
        debug("%s step %d epoch %d: val_loss %f" % (
            label, step, epoch, val_loss
        ))
        if on_eval is not None:
            on_eval(model, step, epoch, val_loss)
        return val_loss

    best_loss = evaluate(0, 0, None)
    best_state = copy.deepcopy(model.state_dict())
    best_meta = { "step": 0, "epoch": 0, "val_loss": best_loss }
    log.selected = 0

    progress = Progress(total_steps, enable_output=verbose.enabled(),
        label=label)

    step = 0
    model.train()
    for epoch in range(1, config.epochs + 1):
        order = torch.randperm(train_blocks.shape[0], generator=generator)

        for start in range(0, len(order), config.batch_size):
            batch = train_blocks[order[start:start + config.batch_size]]

            optimizer.zero_grad()
            loss = loss_fn(model, batch)
            value = float(loss)
            step += 1

            if not math.isfinite(value):
                raise DivergenceError(step, value)

            loss.backward()
            if config.grad_clip:
                torch.nn.utils.clip_grad_norm_(model.parameters(),
                    config.grad_clip)
            optimizer.step()
            scheduler.step()

            progress(step, batch[:, 1:].numel(), value)

            due = config.eval_interval and step % config.eval_interval == 0
            last = start + config.batch_size >= len(order)
            final = last and epoch == config.epochs
            if due or final or (last and not config.eval_interval):
                val_loss = evaluate(step, epoch, value)
                model.train()
                if val_loss < best_loss:
                    best_loss = val_loss
                    best_state = copy.deepcopy(model.state_dict())
                    best_meta = {
                        "step": step, "epoch": epoch, "val_loss": val_loss
                    }
                    log.selected = len(log.checkpoints) - 1
            else:
                log.record(step, value, None, time.time() - start_time)

    progress.complete()
    model.eval()

    verbose("%s: best val_loss %f at step %d" % (
        label, best_meta["val_loss"], best_meta["step"]
    ))
    return best_state, best_meta, log


def train_teacher(model_config, train_config, train_ids, val_ids,
        tokenizer_hash=None, on_eval=None, label="teacher"):
    """
    Trains a freshly initialised model by next-token cross entropy with
    AdamW and returns the best-validation Checkpoint and the TrainingLog.
    With zero epochs the initial model is returned.

    @param {ModelConfig} model_config
    @param {TrainConfig} train_config
    @param {list} train_ids     Training token stream.
    @param {list} val_ids       Validation token stream.
    @param {callable} on_eval   Called as on_eval(model, step, epoch,
                                val_loss) at every validation.
    """
    model = init_model(model_config)
    train_blocks = pack(train_ids, model_config.context_length)
    val_blocks = pack(val_ids, model_config.context_length)

    state, meta, log = _fit(model, train_config, train_blocks, val_blocks,
        cross_entropy, label, on_eval)

    model.load_state_dict(state)
    return Checkpoint.from_model(model, tokenizer_hash, meta), log


def select_best(checkpoints, val_ids=None):
    """
    Returns the checkpoint with the lowest validation loss, the earliest
    on ties.  Losses are read from checkpoint metadata unless val_ids is
    given, in which case every checkpoint is evaluated on it.
    """
    checkpoints = list(checkpoints)
    if not checkpoints:
        raise TrainingError("select_best needs at least one checkpoint")

    if val_ids is None:
        losses = [ ckpt.val_loss for ckpt in checkpoints ]
        if None in losses:
            raise TrainingError("A checkpoint has no recorded val_loss; "
                "pass validation tokens")
    else:
        losses = []
        for ckpt in checkpoints:
            model = ckpt.model()
            losses.append(validation_loss(model,
                pack(val_ids, model.context_length)))

    return checkpoints[best_index(losses)]


def distillation_loss(student_logits, targets, teacher_logits, alpha,
        temperature=1.0, kl_mode=KlMode.MEAN):
    """
    alpha * CE(student, targets) + (1 - alpha) * T^2 * KL(teachers || student)

    Logits are (..., vocab).  With kl_mode "mean" the KL term is the mean
    of the per-teacher KL divergences; with "average" it is the KL from
    the averaged teacher distribution.  KL is averaged over positions.
    """
    vocab = student_logits.shape[-1]
    flat = student_logits.reshape(-1, vocab)
    ce = F.cross_entropy(flat, targets.reshape(-1))

    if alpha == 1.0:
        return ce

    student_logp = F.log_softmax(flat / temperature, dim=-1)
    teacher_logps = [
        F.log_softmax(logits.reshape(-1, vocab).to(flat.dtype) /
            temperature, dim=-1)
        for logits in teacher_logits
    ]

    if kl_mode == KlMode.AVERAGE:
        mixed = torch.logsumexp(torch.stack(teacher_logps), dim=0) - \
            math.log(len(teacher_logps))
        kl = F.kl_div(student_logp, mixed, log_target=True,
            reduction="batchmean")
    else:
        kl = sum(
            F.kl_div(student_logp, logp, log_target=True,
                reduction="batchmean")
            for logp in teacher_logps
        ) / len(teacher_logps)

    return alpha * ce + (1.0 - alpha) * temperature ** 2 * kl


def distill_student(teacher_a, teacher_b, student_config, train_ids,
        val_ids, train_config, tokenizer_hash=None, on_eval=None,
        label="student"):
    """
    Trains a freshly initialised student against the gold next tokens and
    the frozen output distributions of two teachers.  Teachers are never
    updated.  The student is selected by validation cross entropy.

    @raise {TrainingError} On vocabulary mismatch or alpha outside [0, 1].
    """
    alpha = train_config.distillation_alpha
    temperature = train_config.temperature

    if not 0.0 <= alpha <= 1.0:
        raise TrainingError("distillation_alpha must lie in [0, 1], not "
            "%r" % alpha)
    if not temperature > 0:
        raise TrainingError("temperature must be positive, not %r" % (
            temperature,
        ))

    sizes = set([ teacher_a.vocab_size, teacher_b.vocab_size,
        student_config.vocab_size ])
    if len(sizes) != 1:
        raise TrainingError("Teachers and student disagree on vocabulary "
            "size: %d, %d, %d" % (teacher_a.vocab_size,
                teacher_b.vocab_size, student_config.vocab_size))

    teachers = [ teacher_a, teacher_b ]
    for teacher in teachers:
        teacher.eval()
        teacher.requires_grad_(False)

    def loss_fn(model, batch):
        inputs = batch[:, :-1]
        with torch.no_grad():
            teacher_logits = [ teacher(inputs) for teacher in teachers ]
        return distillation_loss(model(inputs), batch[:, 1:],
            teacher_logits, alpha, temperature, train_config.kl_mode)

    student = init_model(student_config)
    train_blocks = pack(train_ids, student_config.context_length)
    val_blocks = pack(val_ids, student_config.context_length)

    state, meta, log = _fit(student, train_config, train_blocks, val_blocks,
        loss_fn, label, on_eval)

    student.load_state_dict(state)
    return Checkpoint.from_model(student, tokenizer_hash, meta), log
