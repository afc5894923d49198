"""Offline leave-one-subject-out and simulated online evaluation."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from ..data import Dataset, SubjectRecord, Trial
from ..exceptions import EEGAlignError, InvariantError, PipelineError
from .metrics import accuracy, balanced_accuracy
from .pipeline import TARGET, PipelineSpec, build_transform, fit_chain
from .report import EvalReport
from .timing import StageTimer

DEFAULT_REPETITIONS = 30


@dataclass(frozen=True)
class OnlineConfig:
    """Online pool size ``m``, step ``r`` and starting batch.

    ``first_batch`` defaults to ``r``. Repetition ``k`` uses seed
    ``seed + k``.
    """

    m: int
    r: int
    first_batch: Optional[int] = None
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0

    def __post_init__(self):
        if self.first_batch is None:
            object.__setattr__(self, "first_batch", self.r)
        if self.r < 1 or self.m < 1 or self.repetitions < 1:
            raise InvariantError("m, r and repetitions must all be >= 1")
        if not self.r <= self.first_batch <= self.m:
            raise InvariantError(f"first_batch must lie in [r, m] = [{self.r}, {self.m}], got {self.first_batch}")
        if (self.m - self.first_batch) % self.r:
            raise InvariantError(
                f"m - first_batch = {self.m - self.first_batch} is not a multiple of r = {self.r}"
            )
        if not 0 <= self.seed < 2**64:
            raise InvariantError("seed must be a 64-bit unsigned integer")

    @property
    def checkpoints(self) -> list:
        return checkpoint_schedule(self.m, self.r, self.first_batch)

    def to_dict(self) -> dict:
        return asdict(self)


def checkpoint_schedule(m: int, r: int, first_batch: Optional[int] = None) -> list:
    """Numbers of labeled new-subject trials at which the classifier is rebuilt."""
    first = r if first_batch is None else first_batch
    return list(range(first, m + 1, r))


def pool_index(n0: int, i: int, N: int) -> int:
    """1-based index of the ``i``-th pool trial, rewinding past ``N``."""
    k = n0 + i
    return k - N if k > N else k


def online_pool(n0: int, m: int, N: int) -> np.ndarray:
    """0-based positions of the ``m`` pool trials following ``n0``, in arrival order."""
    if m > N:
        raise InvariantError(f"pool size m={m} exceeds the {N} trials of the subject")
    return np.array([pool_index(n0, i, N) - 1 for i in range(1, m + 1)], dtype=int)


def repetition_seed(base_seed: int, repetition: int) -> int:
    return (int(base_seed) + int(repetition)) % 2**64


def draw_n0(base_seed: int, repetition: int, subject_index: int, N: int) -> int:
    """Uniform start index in ``[1, N]`` from a Philox stream.

    The key is the repetition seed and the counter the subject's position in
    the dataset, so every (subject, repetition) pair has its own draw that
    does not depend on execution order.
    """
    bitgen = np.random.Philox(key=repetition_seed(base_seed, repetition), counter=subject_index)
    return int(np.random.Generator(bitgen).integers(1, N + 1))


def _metrics(pred, labels) -> dict:
    try:
        b = balanced_accuracy(pred, labels)
    except InvariantError:
        b = None
    return {"accuracy": accuracy(pred, labels), "bca": b}


def _run_tasks(fn, tasks, n_jobs: int) -> list:
    if n_jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, tasks))


def _resting(record: SubjectRecord):
    return record.X_resting if record.resting else None


def _timing_dict(timers: dict) -> dict:
    return {sid: t.as_dict() for sid, t in timers.items()}


def loso_eval(dataset: Dataset, pipeline: PipelineSpec, seed: int = 0, n_jobs: int = 1) -> EvalReport:
    """Leave-one-subject-out evaluation with every subject aligned on its own.

    Each subject's alignment state is estimated from an unlabeled view of
    all its trials (and resting epochs), so no test label is read before
    scoring. The held-out subject is scored on all its labeled trials.
    """
    dataset.check_evaluable()
    kind = dataset.task_kind
    spec = pipeline.resolved(kind)
    if spec.uses_labels(kind):
        raise PipelineError(
            f"{spec.name} needs labeled trials from the test subject and cannot run offline"
        )
    records = dataset.subjects
    timers = {r.subject: StageTimer() for r in records}

    def align(record):
        try:
            tf = build_transform(spec, kind, record.X, None, _resting(record),
                                 subject=record.subject, timer=timers[record.subject])
            with timers[record.subject].stage("alignment"):
                return tf(record.X), tf.nonconverged_means
        except EEGAlignError as exc:
            raise PipelineError(f"alignment of subject {record.subject}: {exc}") from exc

    aligned = _run_tasks(align, list(records), n_jobs)
    reps = [a for a, _ in aligned]
    labels = [r.y for r in records]

    def fold(t):
        sid = records[t].subject
        train = [s for s in range(len(records)) if s != t]
        R = np.concatenate([reps[s] for s in train])
        y = np.concatenate([labels[s] for s in train])
        keep = y >= 0
        try:
            with timers[sid].stage("fit"):
                model = fit_chain(spec, R[keep], y[keep], seed=seed)
            test = labels[t] >= 0
            with timers[sid].stage("predict"):
                pred = model.predict(reps[t][test])
        except EEGAlignError as exc:
            raise PipelineError(f"fold holding out subject {sid}: {exc}") from exc
        flags = model.nonconverged_means + aligned[t][1] + sum(aligned[s][1] for s in train)
        return {"subject": sid, "repetition": 0, "checkpoint": None, "n0": None,
                **_metrics(pred, labels[t][test]), "nonconverged_means": flags}

    rows = _run_tasks(fold, list(range(len(records))), n_jobs)
    return EvalReport(
        mode="offline",
        pipeline=spec.name,
        spec=spec.to_dict(),
        task_kind=kind,
        subjects=dataset.subject_ids,
        rows=rows,
        config={"seed": int(seed)},
        timing=_timing_dict(timers),
    )


@dataclass(frozen=True, eq=False)
class _Auxiliary:
    R: np.ndarray
    y: np.ndarray
    template: Optional[np.ndarray]
    nonconverged_means: int = 0


def online_eval(dataset: Dataset, pipeline: PipelineSpec, cfg: OnlineConfig, n_jobs: int = 1,
                subjects=None, repetitions=None) -> EvalReport:
    """Simulated online calibration for each subject in turn.

    For every repetition a start index ``n0`` is drawn, the ``m`` trials that
    follow it (with rewinding) form the online pool and all other trials the
    test set. At each checkpoint the new subject's alignment state is rebuilt
    from the pool trials seen so far, and the classifier is retrained on the
    auxiliary subjects plus those trials. Auxiliary subjects are aligned with
    all of their own trials.

    ``subjects`` (ids) and ``repetitions`` (indices) restrict the run to a
    subset; the draws for the remaining tasks are unaffected.
    """
    dataset.check_evaluable()
    kind = dataset.task_kind
    spec = pipeline.resolved(kind)
    records = dataset.subjects
    ids = dataset.subject_ids
    wanted = ids if subjects is None else [str(s) for s in subjects]
    for s in wanted:
        if s not in ids:
            raise KeyError(s)
    reps = list(range(cfg.repetitions)) if repetitions is None else [int(k) for k in repetitions]
    timers = {s: StageTimer() for s in wanted}
    aux_timer = StageTimer()

    def aux(record):
        try:
            tf = build_transform(spec, kind, record.X, record.y, _resting(record),
                                 subject=record.subject, timer=aux_timer)
            R = tf(record.X)
        except EEGAlignError as exc:
            raise PipelineError(f"alignment of auxiliary subject {record.subject}: {exc}") from exc
        keep = record.y >= 0
        return _Auxiliary(R[keep], record.y[keep], tf.template, tf.nonconverged_means)

    # subject i is auxiliary for every wanted subject other than itself
    aux_needed = [i for i, sid in enumerate(ids) if set(wanted) - {sid}]
    aux_list = _run_tasks(aux, [records[i] for i in aux_needed], n_jobs)
    aux_data = dict(zip(aux_needed, aux_list))

    def task(args):
        t, rep = args
        record = records[t]
        sid = record.subject
        X, y = record.X, record.y
        N = len(X)
        if np.any(y < 0):
            raise PipelineError(f"online protocol needs every trial of subject {sid} labeled")
        if cfg.m > N:
            raise PipelineError(f"pool size m={cfg.m} exceeds the {N} trials of subject {sid}")
        rest = record.X_resting if len(record.resting) == N else None
        others = [aux_data[s] for s in range(len(records)) if s != t]
        R_aux = np.concatenate([a.R for a in others])
        y_aux = np.concatenate([a.y for a in others])
        templates = [a.template for a in others if a.template is not None]
        fallback = np.mean(templates, axis=0) if templates else None
        aux_flags = sum(a.nonconverged_means for a in others)

        n0 = draw_n0(cfg.seed, rep, t, N)
        pool = online_pool(n0, cfg.m, N)
        test = np.setdiff1d(np.arange(N), pool)
        timer = timers[sid]
        out = []
        for k in cfg.checkpoints:
            seen = pool[:k]
            try:
                tf = build_transform(spec, kind, X[seen], y[seen], None if rest is None else rest[seen],
                                     fallback_template=fallback, subject=sid, timer=timer)
                with timer.stage("alignment"):
                    R_seen, R_test = tf(X[seen]), tf(X[test])
                with timer.stage("fit"):
                    model = fit_chain(spec, np.concatenate([R_aux, R_seen]), np.concatenate([y_aux, y[seen]]),
                                      seed=repetition_seed(cfg.seed, rep))
                with timer.stage("predict"):
                    pred = model.predict(R_test)
            except EEGAlignError as exc:
                raise PipelineError(f"subject {sid}, repetition {rep}, checkpoint {k}: {exc}") from exc
            flags = aux_flags + tf.nonconverged_means + model.nonconverged_means
            out.append({"subject": sid, "repetition": rep, "checkpoint": k, "n0": n0,
                        **_metrics(pred, y[test]), "nonconverged_means": flags})
        return out

    tasks = [(ids.index(s), rep) for s in wanted for rep in reps]
    rows = [row for chunk in _run_tasks(task, tasks, n_jobs) for row in chunk]
    timing = _timing_dict(timers)
    timing["auxiliary"] = aux_timer.as_dict()
    return EvalReport(
        mode="online",
        pipeline=spec.name,
        spec=spec.to_dict(),
        task_kind=kind,
        subjects=list(wanted),
        rows=rows,
        config={**cfg.to_dict(), "checkpoints": cfg.checkpoints, "repetition_list": reps},
        timing=timing,
    )


@dataclass(frozen=True)
class AuditResult:
    subject: str
    repetition: int
    checkpoint: int
    n_compared: int
    n_changed_after: int
    passed: bool


def causality_audit(dataset: Dataset, pipeline: PipelineSpec, cfg: OnlineConfig, subject,
                    repetition: int, checkpoint: int, noise_seed: int = 12345) -> AuditResult:
    """Check that results up to ``checkpoint`` ignore pool trials not yet seen.

    Every pool trial after the first ``checkpoint`` ones (and its resting
    epoch, label included) is replaced by unrelated random data. The audit
    passes when all rows at checkpoints ``<= checkpoint`` are bitwise equal
    between the original and the tampered run. ``n_changed_after`` counts
    later rows that did change, as a sanity check that the tampering bites.
    """
    ids = dataset.subject_ids
    t = ids.index(str(subject))
    record = dataset.subjects[t]
    N = record.n_trials
    n0 = draw_n0(cfg.seed, repetition, t, N)
    future = online_pool(n0, cfg.m, N)[checkpoint:]
    rng = np.random.default_rng(noise_seed)
    classes = sorted({tr.label for tr in record.trials})

    def scramble(trial: Trial, relabel: bool) -> Trial:
        data = rng.standard_normal(trial.data.shape) * (1 + rng.random()) * np.std(trial.data)
        label = int(rng.choice(classes)) if relabel else trial.label
        return Trial(data, trial.fs, label, trial.subject, trial.kind)

    trials = list(record.trials)
    resting = list(record.resting)
    for p in future:
        trials[p] = scramble(trials[p], True)
        if len(resting) == N:
            resting[p] = scramble(resting[p], False)
    tampered_record = replace(record, trials=tuple(trials), resting=tuple(resting))
    subjects = list(dataset.subjects)
    subjects[t] = tampered_record
    tampered = replace(dataset, subjects=tuple(subjects))

    a = online_eval(dataset, pipeline, cfg, subjects=[subject], repetitions=[repetition])
    b = online_eval(tampered, pipeline, cfg, subjects=[subject], repetitions=[repetition])
    early = [(x, y) for x, y in zip(a.rows, b.rows) if x["checkpoint"] <= checkpoint]
    late = [(x, y) for x, y in zip(a.rows, b.rows) if x["checkpoint"] > checkpoint]
    passed = all(x == y for x, y in early)
    return AuditResult(str(subject), repetition, checkpoint, len(early), sum(x != y for x, y in late), passed)
