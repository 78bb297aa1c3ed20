"""Domain types for multi-task MapReduce scheduling on unrelated processors.

An :class:`Instance` holds jobs whose Map and Reduce tasks each carry a
processing time for every processor of their pool.  Optional shuffle
matrices give the transfer time from every Map task of a job to every one
of its Reduce tasks.  Schedules are lists of :class:`Placement` records with
exact (integer or :class:`~fractions.Fraction`) times.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Mapping, NamedTuple, Sequence, Union

MAP = "map"
REDUCE = "reduce"
SHUFFLE = "shuffle"

Time = Union[int, Fraction]


class InstanceError(ValueError):
    """Raised when an instance document violates a model rule."""


class TaskRef(NamedTuple):
    """Identifies a task.  For shuffle tasks ``index`` is the Reduce task index
    and ``map_index`` the index of the Map task whose output is transferred."""

    phase: str
    job: int
    index: int
    map_index: int | None = None

    def __str__(self) -> str:
        if self.phase == SHUFFLE:
            return f"shuffle[j={self.job},r={self.index},k={self.map_index}]"
        return f"{self.phase}[j={self.job},k={self.index}]"


@dataclass(frozen=True)
class Task:
    job: int
    index: int
    phase: str
    proc_times: Mapping[str, int] = field(hash=False)

    @property
    def ref(self) -> TaskRef:
        return TaskRef(self.phase, self.job, self.index)


@dataclass(frozen=True)
class Job:
    id: int
    weight: Fraction
    map_tasks: tuple[Task, ...]
    reduce_tasks: tuple[Task, ...]
    shuffle_times: tuple[tuple[int, ...], ...] | None = None

    def shuffle_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Transfer times indexed ``[map k][reduce r]``; all zero when absent."""
        if self.shuffle_times is None:
            return tuple((0,) * len(self.reduce_tasks) for _ in self.map_tasks)
        return self.shuffle_times

    def shuffle_total(self, r: int) -> int:
        """Total transfer time into Reduce task ``r`` (the shuffle block size)."""
        return sum(row[r] for row in self.shuffle_matrix())


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    map_processors: tuple[str, ...]
    reduce_processors: tuple[str, ...]
    input_processors: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        _check_instance(self)

    @property
    def pools_disjoint(self) -> bool:
        return not set(self.map_processors) & set(self.reduce_processors)

    @property
    def has_shuffle(self) -> bool:
        return any(j.shuffle_times is not None for j in self.jobs)

    def job(self, job_id: int) -> Job:
        return self._job_index()[job_id]

    def _job_index(self) -> dict[int, Job]:
        idx = self.__dict__.get("_jobs_by_id")
        if idx is None:
            idx = {j.id: j for j in self.jobs}
            object.__setattr__(self, "_jobs_by_id", idx)
        return idx

    def pool(self, phase: str) -> tuple[str, ...]:
        if phase == MAP:
            return self.map_processors
        if phase == REDUCE:
            return self.reduce_processors
        raise ValueError(f"no processor pool for phase {phase!r}")

    def tasks(self, phase: str) -> list[Task]:
        if phase == MAP:
            return [t for j in self.jobs for t in j.map_tasks]
        if phase == REDUCE:
            return [t for j in self.jobs for t in j.reduce_tasks]
        raise ValueError(f"unknown phase {phase!r}")

    def task(self, ref: TaskRef) -> Task:
        job = self.job(ref.job)
        seq = job.map_tasks if ref.phase == MAP else job.reduce_tasks
        return seq[ref.index]

    def input_for(self, reduce_proc: str) -> str:
        """Input processor paired with ``reduce_proc``."""
        if self.input_processors is None:
            raise InstanceError("instance has no input processors")
        return self.input_processors[self.reduce_processors.index(reduce_proc)]

    def weight(self, job_id: int) -> Fraction:
        return self.job(job_id).weight


def _check_instance(inst: Instance) -> None:
    if not inst.jobs:
        raise InstanceError("jobs: instance must contain at least one job")
    if not inst.map_processors or not inst.reduce_processors:
        raise InstanceError("processors: map and reduce pools must be nonempty")
    for name, pool in (("map_processors", inst.map_processors),
                       ("reduce_processors", inst.reduce_processors)):
        if len(set(pool)) != len(pool):
            raise InstanceError(f"{name}: duplicate processor id")
    if inst.input_processors is not None:
        ins = inst.input_processors
        if len(ins) != len(inst.reduce_processors):
            raise InstanceError(
                "input_processors: must pair one-to-one with reduce_processors")
        if len(set(ins)) != len(ins):
            raise InstanceError("input_processors: duplicate processor id")
        if set(ins) & (set(inst.map_processors) | set(inst.reduce_processors)):
            raise InstanceError("input_processors: must be distinct from map/reduce pools")
    seen = set()
    for jpos, job in enumerate(inst.jobs):
        path = f"jobs[{jpos}]"
        if job.id in seen:
            raise InstanceError(f"{path}.id: duplicate job id {job.id}")
        seen.add(job.id)
        if not job.weight > 0:
            raise InstanceError(f"{path}.weight: weight must be positive")
        if not job.map_tasks:
            raise InstanceError(f"{path}.map_tasks: job needs at least one map task")
        if not job.reduce_tasks:
            raise InstanceError(f"{path}.reduce_tasks: job needs at least one reduce task")
        for phase, tasks, pool in ((MAP, job.map_tasks, inst.map_processors),
                                   (REDUCE, job.reduce_tasks, inst.reduce_processors)):
            for k, task in enumerate(tasks):
                tpath = f"{path}.{phase}_tasks[{k}]"
                if task.job != job.id or task.index != k or task.phase != phase:
                    raise InstanceError(f"{tpath}: inconsistent task identity")
                if set(task.proc_times) != set(pool):
                    raise InstanceError(
                        f"{tpath}.proc_times: need exactly one entry per {phase} processor")
                for pid, p in task.proc_times.items():
                    if not _is_int(p) or p <= 0:
                        raise InstanceError(
                            f"{tpath}.proc_times[{pid}]: processing times must be positive integers")
        if job.shuffle_times is not None:
            sh = job.shuffle_times
            if len(sh) != len(job.map_tasks) or any(len(row) != len(job.reduce_tasks) for row in sh):
                raise InstanceError(
                    f"{path}.shuffle_times: shuffle matrix dimension must be "
                    f"{len(job.map_tasks)}x{len(job.reduce_tasks)}")
            for row in sh:
                for t in row:
                    if not _is_int(t) or t < 0:
                        raise InstanceError(
                            f"{path}.shuffle_times: transfer times must be nonnegative integers")


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


# ---------------------------------------------------------------- schedules


@dataclass(frozen=True)
class Placement:
    task: TaskRef
    processor: str
    start: Time
    end: Time


@dataclass(frozen=True)
class PhaseSchedule:
    """Timed placement of the tasks of a single phase on its pool."""

    phase: str
    placements: tuple[Placement, ...]
    task_completion: Mapping[TaskRef, Time]
    job_completion: Mapping[int, Time]

    @classmethod
    def from_placements(cls, phase: str, placements: Iterable[Placement]) -> PhaseSchedule:
        placements = tuple(sorted(placements, key=_placement_key))
        tc = {pl.task: pl.end for pl in placements}
        jc: dict[int, Time] = {}
        for ref, end in tc.items():
            jc[ref.job] = max(jc.get(ref.job, 0), end)
        return cls(phase, placements, tc, jc)

    def processor_of(self) -> dict[TaskRef, str]:
        return {pl.task: pl.processor for pl in self.placements}

    def objective(self, inst: Instance) -> Fraction:
        return sum((inst.weight(j) * c for j, c in self.job_completion.items()), Fraction(0))


@dataclass(frozen=True)
class MergedSchedule:
    """Complete schedule: Map, Reduce and (optionally) Shuffle placements."""

    placements: tuple[Placement, ...]
    job_completion: Mapping[int, Time]
    objective: Fraction

    @classmethod
    def from_placements(cls, inst: Instance, placements: Iterable[Placement]) -> MergedSchedule:
        placements = tuple(sorted(placements, key=_placement_key))
        jc = {job.id: 0 for job in inst.jobs}
        for pl in placements:
            if pl.task.phase == REDUCE:
                jc[pl.task.job] = max(jc[pl.task.job], pl.end)
        obj = sum((inst.weight(j) * c for j, c in jc.items()), Fraction(0))
        return cls(placements, jc, obj)

    def task_completion(self) -> dict[TaskRef, Time]:
        return {pl.task: pl.end for pl in self.placements}


_PHASE_ORDER = {MAP: 0, SHUFFLE: 1, REDUCE: 2}


def _placement_key(pl: Placement):
    t = pl.task
    return (_PHASE_ORDER[t.phase], t.job, t.index, -1 if t.map_index is None else t.map_index)


# -------------------------------------------------------------- validation


MODES = ("mr", "msr-same", "msr-separate")


@dataclass
class ValidationReport:
    violations: list[str]
    job_completion: dict[int, Time]
    objective: Fraction

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return f"valid, objective {self.objective}"
        return "\n".join(self.violations)


def _overlaps(a: Placement, b: Placement) -> bool:
    # zero-length placements never overlap anything
    return a.start < b.end and b.start < a.end and a.start < a.end and b.start < b.end


def _overlap_violations(placements: Sequence[Placement], label: str, key) -> list[str]:
    out = []
    groups: dict[str, list[Placement]] = {}
    for pl in placements:
        groups.setdefault(key(pl), []).append(pl)
    for name in sorted(groups):
        seq = sorted(groups[name], key=lambda p: (p.start, p.end))
        busy: Placement | None = None
        for pl in seq:
            if pl.start == pl.end:
                continue
            if busy is not None and _overlaps(busy, pl):
                out.append(f"{label} on {name}: {busy.task} [{busy.start},{busy.end}) "
                           f"and {pl.task} [{pl.start},{pl.end})")
            if busy is None or pl.end > busy.end:
                busy = pl
    return out


def validate_phase_schedule(inst: Instance, sched: PhaseSchedule) -> ValidationReport:
    """Check a single-phase schedule: coverage, durations, pool and overlaps."""
    v: list[str] = []
    pool = set(inst.pool(sched.phase))
    expected = {t.ref: t for t in inst.tasks(sched.phase)}
    seen: dict[TaskRef, int] = {}
    for pl in sched.placements:
        seen[pl.task] = seen.get(pl.task, 0) + 1
        task = expected.get(pl.task)
        if task is None:
            v.append(f"unknown task {pl.task}")
            continue
        if pl.processor not in pool:
            v.append(f"pool: {pl.task} on {pl.processor} outside the {sched.phase} pool")
            continue
        if pl.start < 0:
            v.append(f"start: {pl.task} starts before time 0")
        if pl.end - pl.start != task.proc_times[pl.processor]:
            v.append(f"duration: {pl.task} on {pl.processor} runs {pl.end - pl.start}, "
                     f"needs {task.proc_times[pl.processor]}")
    for ref in expected:
        n = seen.get(ref, 0)
        if n == 0:
            v.append(f"missing: {ref} is not scheduled")
        elif n > 1:
            v.append(f"preemption: {ref} is split into {n} pieces")
    v += _overlap_violations(sched.placements, "overlap", lambda p: p.processor)
    jc: dict[int, Time] = {}
    for pl in sched.placements:
        jc[pl.task.job] = max(jc.get(pl.task.job, 0), pl.end)
    if dict(sched.job_completion) != jc:
        v.append("completion: stored job completion times differ from placements")
    obj = sum((inst.weight(j) * c for j, c in jc.items()), Fraction(0))
    return ValidationReport(v, jc, obj)


def validate_schedule(inst: Instance, sched: MergedSchedule, mode: str = "mr") -> ValidationReport:
    """Check every scheduling rule and re-derive job completions and the objective.

    ``mode`` is ``"mr"`` (no shuffle tasks), ``"msr-same"`` (shuffles on the
    processor of their Reduce task) or ``"msr-separate"`` (shuffles on the
    input processor paired with that Reduce processor).  Problems are
    collected, never raised.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    v: list[str] = []
    shuffled = mode != "mr"
    if mode == "msr-separate" and inst.input_processors is None:
        v.append("mode: msr-separate requires input processors")

    expected: dict[TaskRef, int | None] = {}  # ref -> fixed duration (None: processor dependent)
    for job in inst.jobs:
        for t in job.map_tasks + job.reduce_tasks:
            expected[t.ref] = None
        if shuffled:
            for k, row in enumerate(job.shuffle_matrix()):
                for r, tt in enumerate(row):
                    expected[TaskRef(SHUFFLE, job.id, r, k)] = tt

    by_ref: dict[TaskRef, Placement] = {}
    counts: dict[TaskRef, int] = {}
    for pl in sched.placements:
        counts[pl.task] = counts.get(pl.task, 0) + 1
        by_ref.setdefault(pl.task, pl)
        if pl.task not in expected:
            if pl.task.phase == SHUFFLE:
                v.append(f"mode: shuffle task {pl.task} is not part of the {mode} model")
            else:
                v.append(f"unknown task {pl.task}")
            continue
        if pl.start < 0:
            v.append(f"start: {pl.task} starts before time 0")
        if pl.task.phase == SHUFFLE:
            if pl.end - pl.start != expected[pl.task]:
                v.append(f"duration: {pl.task} runs {pl.end - pl.start}, needs {expected[pl.task]}")
            continue
        pool = inst.pool(pl.task.phase)
        if pl.processor not in pool:
            v.append(f"pool: {pl.task} on {pl.processor} outside the {pl.task.phase} pool")
            continue
        p = inst.task(pl.task).proc_times[pl.processor]
        if pl.end - pl.start != p:
            v.append(f"duration: {pl.task} on {pl.processor} runs {pl.end - pl.start}, needs {p}")
    for ref in expected:
        n = counts.get(ref, 0)
        if n == 0:
            v.append(f"missing: {ref} is not scheduled")
        elif n > 1:
            v.append(f"preemption: {ref} is split into {n} pieces")

    v += _overlap_violations(sched.placements, "overlap", lambda p: p.processor)

    for job in inst.jobs:
        maps = [by_ref.get(t.ref) for t in job.map_tasks]
        if any(m is None for m in maps):
            continue
        map_done = max(m.end for m in maps)
        for rt in job.reduce_tasks:
            red = by_ref.get(rt.ref)
            if red is None:
                continue
            if red.start < map_done:
                v.append(f"precedence: reduce starts before map completion ({rt.ref} at "
                         f"{red.start}, maps of job {job.id} done at {map_done})")
            if not shuffled:
                continue
            for k in range(len(job.map_tasks)):
                sh = by_ref.get(TaskRef(SHUFFLE, job.id, rt.index, k))
                if sh is None:
                    continue
                if sh.start < maps[k].end:
                    v.append(f"property (i): {sh.task} starts at {sh.start} before its map "
                             f"task completes at {maps[k].end}")
                if sh.end > red.start:
                    v.append(f"precedence: {sh.task} ends at {sh.end} after its reduce "
                             f"task starts at {red.start}")
                if mode == "msr-same":
                    want = red.processor
                else:
                    want = inst.input_for(red.processor) if (
                        inst.input_processors is not None
                        and red.processor in inst.reduce_processors) else None
                if want is not None and sh.processor != want:
                    v.append(f"shuffle processor: {sh.task} runs on {sh.processor}, "
                             f"expected {want}")

    if shuffled:
        # property (iv): transfers into one reduce processor are serialized
        dest = {}
        for pl in sched.placements:
            if pl.task.phase == SHUFFLE:
                red = by_ref.get(TaskRef(REDUCE, pl.task.job, pl.task.index))
                if red is not None:
                    dest[pl] = red.processor
        v += _overlap_violations(list(dest), "property (iv)", lambda p: dest[p])

    jc: dict[int, Time] = {}
    for job in inst.jobs:
        ends = [by_ref[t.ref].end for t in job.reduce_tasks if t.ref in by_ref]
        jc[job.id] = max(ends) if ends else 0
    obj = sum((inst.weight(j) * c for j, c in jc.items()), Fraction(0))
    if dict(sched.job_completion) != jc:
        v.append("completion: stored job completion times differ from placements")
    if sched.objective != obj:
        v.append(f"objective: stored {sched.objective}, recomputed {obj}")
    return ValidationReport(v, jc, obj)


# ----------------------------------------------------------- serialization


def _num_out(x: Time):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _num_in(x, path: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise InstanceError(f"{path}: floats are not allowed, use an integer or 'p/q'")
    try:
        return Fraction(x)
    except (TypeError, ValueError):
        raise InstanceError(f"{path}: not a rational number: {x!r}") from None


def _time_in(x, path: str) -> Time:
    f = _num_in(x, path)
    return f.numerator if f.denominator == 1 else f


def instance_to_dict(inst: Instance) -> dict:
    jobs = []
    for job in inst.jobs:
        d = {
            "id": job.id,
            "weight": _num_out(job.weight),
            "map_tasks": [{"proc_times": dict(t.proc_times)} for t in job.map_tasks],
            "reduce_tasks": [{"proc_times": dict(t.proc_times)} for t in job.reduce_tasks],
        }
        if job.shuffle_times is not None:
            d["shuffle_times"] = [list(row) for row in job.shuffle_times]
        jobs.append(d)
    out = {
        "jobs": jobs,
        "map_processors": list(inst.map_processors),
        "reduce_processors": list(inst.reduce_processors),
    }
    if inst.input_processors is not None:
        out["input_processors"] = list(inst.input_processors)
    return out


def instance_from_dict(doc: Mapping) -> Instance:
    if not isinstance(doc, Mapping):
        raise InstanceError("document must be a JSON object")
    try:
        mp = tuple(str(p) for p in doc["map_processors"])
        rp = tuple(str(p) for p in doc["reduce_processors"])
        raw_jobs = doc["jobs"]
    except KeyError as e:
        raise InstanceError(f"missing key {e.args[0]!r}") from None
    ip = doc.get("input_processors")
    ip = None if ip is None else tuple(str(p) for p in ip)
    jobs = []
    for jpos, jd in enumerate(raw_jobs):
        path = f"jobs[{jpos}]"
        if not isinstance(jd, Mapping):
            raise InstanceError(f"{path}: job must be an object")
        jid = jd.get("id", jpos)
        if not _is_int(jid):
            raise InstanceError(f"{path}.id: job id must be an integer")
        weight = _num_in(jd.get("weight", 1), f"{path}.weight")
        phases = {}
        for phase in (MAP, REDUCE):
            tasks = []
            for k, td in enumerate(jd.get(f"{phase}_tasks", [])):
                pt = td.get("proc_times") if isinstance(td, Mapping) else None
                if not isinstance(pt, Mapping):
                    raise InstanceError(f"{path}.{phase}_tasks[{k}].proc_times: missing")
                tasks.append(Task(jid, k, phase, {str(p): v for p, v in pt.items()}))
            phases[phase] = tuple(tasks)
        sh = jd.get("shuffle_times")
        if sh is not None:
            if not isinstance(sh, list) or any(not isinstance(row, list) for row in sh):
                raise InstanceError(f"{path}.shuffle_times: shuffle matrix dimension must be a list of rows")
            sh = tuple(tuple(row) for row in sh)
        jobs.append(Job(jid, weight, phases[MAP], phases[REDUCE], sh))
    return Instance(tuple(jobs), mp, rp, ip)


def dumps_canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def load_instance(source: IO | str | bytes) -> Instance:
    """Parse and validate an instance from a JSON stream, string or bytes."""
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as e:
        raise InstanceError(f"parse error: {e}") from None
    return instance_from_dict(doc)


def save_instance(inst: Instance) -> str:
    return dumps_canonical(instance_to_dict(inst))


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(save_instance(inst).encode()).hexdigest()[:16]


def schedule_to_dict(sched: MergedSchedule | PhaseSchedule) -> dict:
    pls = []
    for pl in sched.placements:
        d = {"phase": pl.task.phase, "job": pl.task.job, "index": pl.task.index,
             "processor": pl.processor, "start": _num_out(pl.start), "end": _num_out(pl.end)}
        if pl.task.map_index is not None:
            d["map_index"] = pl.task.map_index
        pls.append(d)
    out = {"placements": pls,
           "job_completion": {str(j): _num_out(c) for j, c in sorted(sched.job_completion.items())}}
    if isinstance(sched, MergedSchedule):
        out["objective"] = _num_out(sched.objective)
    else:
        out["phase"] = sched.phase
        out["task_completion"] = [
            {"phase": r.phase, "job": r.job, "index": r.index, "completion": _num_out(c)}
            for r, c in sorted(sched.task_completion.items())]
    return out


def schedule_from_dict(doc: Mapping) -> MergedSchedule:
    """Rebuild a :class:`MergedSchedule` exactly as stored (no recomputation)."""
    pls = []
    for n, d in enumerate(doc["placements"]):
        path = f"placements[{n}]"
        ref = TaskRef(d["phase"], int(d["job"]), int(d["index"]), d.get("map_index"))
        pls.append(Placement(ref, str(d["processor"]),
                             _time_in(d["start"], f"{path}.start"),
                             _time_in(d["end"], f"{path}.end")))
    jc = {int(j): _time_in(c, "job_completion") for j, c in doc.get("job_completion", {}).items()}
    obj = _num_in(doc.get("objective", 0), "objective")
    return MergedSchedule(tuple(pls), jc, obj)


def load_schedule(source: IO | str | bytes) -> MergedSchedule:
    if hasattr(source, "read"):
        source = source.read()
    return schedule_from_dict(json.loads(source))


def save_schedule(sched: MergedSchedule | PhaseSchedule) -> str:
    return dumps_canonical(schedule_to_dict(sched))


# -------------------------------------------------------------- generation


def generate_instance(
    seed: int,
    n_jobs: int = 3,
    n_map_tasks_range: tuple[int, int] = (1, 2),
    n_reduce_tasks_range: tuple[int, int] = (1, 2),
    m_map: int = 2,
    m_reduce: int = 2,
    p_range: tuple[int, int] = (1, 10),
    shuffle_range: tuple[int, int] | None = (0, 5),
    weight_range: tuple[int, int] = (1, 5),
    input_processors: bool = True,
    shared_pools: bool = False,
) -> Instance:
    """Draw a random instance; identical arguments give an identical instance.

    Processing times are drawn independently for each (task, processor) pair.
    ``shuffle_range=None`` omits shuffle matrices entirely.  With
    ``shared_pools`` the Reduce tasks run on the Map processors.
    """
    if n_jobs < 1:
        raise ValueError("n_jobs must be at least 1")
    if m_map < 1 or m_reduce < 1:
        raise ValueError("processor counts must be at least 1")
    ranges = {"n_map_tasks_range": n_map_tasks_range, "n_reduce_tasks_range": n_reduce_tasks_range,
              "p_range": p_range, "weight_range": weight_range}
    if shuffle_range is not None:
        ranges["shuffle_range"] = shuffle_range
    for name, (lo, hi) in ranges.items():
        if lo > hi:
            raise ValueError(f"{name}: degenerate range [{lo}, {hi}]")
    if n_map_tasks_range[0] < 1 or n_reduce_tasks_range[0] < 1:
        raise ValueError("every job needs at least one map and one reduce task")
    if p_range[0] < 1:
        raise ValueError("p_range must lie in the positive integers")
    if weight_range[0] < 1:
        raise ValueError("weight_range must lie in the positive integers")
    if shuffle_range is not None and shuffle_range[0] < 0:
        raise ValueError("shuffle_range must be nonnegative")

    rng = random.Random(seed)
    mp = tuple(f"m{i + 1}" for i in range(m_map))
    rp = mp if shared_pools else tuple(f"r{i + 1}" for i in range(m_reduce))
    ip = tuple(f"s{i + 1}" for i in range(len(rp))) if input_processors else None
    jobs = []
    for j in range(n_jobs):
        nm = rng.randint(*n_map_tasks_range)
        nr = rng.randint(*n_reduce_tasks_range)
        maps = tuple(Task(j, k, MAP, {p: rng.randint(*p_range) for p in mp}) for k in range(nm))
        reds = tuple(Task(j, k, REDUCE, {p: rng.randint(*p_range) for p in rp}) for k in range(nr))
        sh = None
        if shuffle_range is not None:
            sh = tuple(tuple(rng.randint(*shuffle_range) for _ in range(nr)) for _ in range(nm))
        w = Fraction(rng.randint(*weight_range))
        jobs.append(Job(j, w, maps, reds, sh))
    return Instance(tuple(jobs), mp, rp, ip)
