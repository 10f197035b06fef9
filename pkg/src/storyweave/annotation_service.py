"""HTTP service backing the annotation UI.

Annotators claim tasks in a deterministic order, receive the story payload
(title, segments, chosen media), and submit segment/transition/overall
ratings. Judgments persist to a single append-only log; the latest record
per task wins and earlier ones remain as the audit trail.
"""

import json
import logging
import random
import threading
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from .fileio import atomic_write_text, dumps_record
from .quality_metric import (
    JUDGMENT_VALUES,
    OVERALL_RATING_MAX,
    OVERALL_RATING_MIN,
    JudgmentSet,
    judgment_record,
)
from .story_model import Corpus, IllustratedStoryline, Storyline

logger = logging.getLogger(__name__)

PAYLOADS_FILE = "payloads.jsonl"
ANNOTATORS_FILE = "annotators.json"
JUDGMENTS_LOG = "judgments.log"


class TaskStatus(str, Enum):
    PENDING = "pending"
    IN_PROGRESS = "in_progress"
    COMPLETE = "complete"


@dataclass
class AnnotationTask:
    task_id: str
    story_id: str
    method_name: str
    annotator_id: str
    status: TaskStatus = TaskStatus.PENDING

    def as_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "story_id": self.story_id,
            "method_name": self.method_name,
            "annotator_id": self.annotator_id,
            "status": self.status.value,
        }


@dataclass(frozen=True)
class PayloadSegment:
    segment_id: str
    description: str
    media_id: Optional[str]
    media_uri: Optional[str]


@dataclass(frozen=True)
class StoryPayload:
    story_id: str
    method_name: str
    title: str
    segments: tuple[PayloadSegment, ...]

    def as_dict(self) -> dict:
        return {
            "story_id": self.story_id,
            "method_name": self.method_name,
            "title": self.title,
            "segments": [
                {
                    "segment_id": s.segment_id,
                    "description": s.description,
                    "media_id": s.media_id,
                    "media_uri": s.media_uri,
                }
                for s in self.segments
            ],
        }


class UnknownIdError(KeyError):
    """Annotator, task, or payload id not present in the store."""


class TaskNotClaimedError(RuntimeError):
    """Judgment submitted for a task the annotator has not claimed."""


class JudgmentValidationError(ValueError):
    """Carries field-level reasons for a rejected judgment."""

    def __init__(self, field_errors: dict[str, str]):
        super().__init__("; ".join(f"{k}: {v}" for k, v in sorted(field_errors.items())))
        self.field_errors = field_errors


def prepare_annotation_store(
    store_dir: Path,
    corpus: Corpus,
    storylines: list[Storyline],
    illustrated: list[IllustratedStoryline],
    annotators: list[str],
    randomize: bool = False,
    seed: int = 0,
) -> None:
    """Write the payload and annotator files a service instance loads."""
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    stories_by_id = {s.story_id: s for s in storylines}
    rows = []
    for item in sorted(illustrated, key=lambda i: (i.story_id, i.method_name)):
        storyline = stories_by_id[item.story_id]
        segments = []
        for segment, choice in zip(storyline.segments, item.choices):
            uri = None
            if choice is not None and choice in corpus.media_index:
                _, ref = corpus.media_index[choice]
                uri = ref.visual_uri() or ref.uri
            segments.append(
                {
                    "segment_id": segment.segment_id,
                    "description": segment.description,
                    "media_id": choice,
                    "media_uri": uri,
                }
            )
        rows.append(
            {
                "story_id": item.story_id,
                "method_name": item.method_name,
                "title": storyline.title,
                "segments": segments,
            }
        )
    atomic_write_text(store_dir / PAYLOADS_FILE, "".join(dumps_record(r) + "\n" for r in rows))
    atomic_write_text(
        store_dir / ANNOTATORS_FILE,
        json.dumps({"annotators": sorted(annotators), "randomize": randomize, "seed": seed},
                   indent=2, sort_keys=True) + "\n",
    )


class AnnotationStore:
    """Task queue plus append-only judgment log.

    Claims are in-memory (a restart returns unclaimed tasks to pending);
    submitted judgments replay from the log, so completed work survives
    restarts. All mutation goes through one lock.
    """

    def __init__(self, store_dir: Path):
        self.store_dir = Path(store_dir)
        self._lock = threading.Lock()
        self.payloads: dict[tuple[str, str], StoryPayload] = {}
        self._load_payloads()
        self._load_annotators()
        self.tasks: dict[str, AnnotationTask] = {}
        self.task_order: dict[str, list[str]] = {}
        self._build_tasks()
        self.latest: dict[str, JudgmentSet] = {}
        self._sequence = 0
        self._replay_log()
        self._log_handle = open(self.store_dir / JUDGMENTS_LOG, "a", encoding="utf-8")

    def _load_payloads(self) -> None:
        path = self.store_dir / PAYLOADS_FILE
        if not path.exists():
            raise FileNotFoundError(f"store is missing {PAYLOADS_FILE}: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                raw = json.loads(line)
                segments = tuple(
                    PayloadSegment(
                        segment_id=str(s["segment_id"]),
                        description=str(s["description"]),
                        media_id=s.get("media_id"),
                        media_uri=s.get("media_uri"),
                    )
                    for s in raw["segments"]
                )
                payload = StoryPayload(
                    story_id=str(raw["story_id"]),
                    method_name=str(raw["method_name"]),
                    title=str(raw["title"]),
                    segments=segments,
                )
                self.payloads[(payload.story_id, payload.method_name)] = payload

    def _load_annotators(self) -> None:
        path = self.store_dir / ANNOTATORS_FILE
        if not path.exists():
            raise FileNotFoundError(f"store is missing {ANNOTATORS_FILE}: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        self.annotators: tuple[str, ...] = tuple(raw["annotators"])
        self.randomize: bool = bool(raw.get("randomize", False))
        self.seed: int = int(raw.get("seed", 0))

    def _build_tasks(self) -> None:
        ordered_payloads = sorted(self.payloads)  # (story_id, method_name)
        counter = 0
        for annotator_id in self.annotators:
            keys = list(ordered_payloads)
            if self.randomize:
                random.Random(f"{self.seed}:{annotator_id}").shuffle(keys)
            order = []
            for story_id, method_name in keys:
                counter += 1
                task = AnnotationTask(
                    task_id=f"task-{counter:05d}",
                    story_id=story_id,
                    method_name=method_name,
                    annotator_id=annotator_id,
                )
                self.tasks[task.task_id] = task
                order.append(task.task_id)
            self.task_order[annotator_id] = order

    def _replay_log(self) -> None:
        path = self.store_dir / JUDGMENTS_LOG
        if not path.exists():
            return
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    task_id = str(raw["task_id"])
                    judgment = JudgmentSet(
                        story_id=str(raw["story_id"]),
                        annotator_id=str(raw["annotator_id"]),
                        segment_scores=tuple(int(v) for v in raw["segment_scores"]),
                        transition_scores=tuple(int(v) for v in raw["transition_scores"]),
                        overall_rating=int(raw["overall_rating"]),
                        method_name=str(raw.get("method_name", "")),
                    )
                except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
                    logger.warning("%s:%d: skipping corrupt log line: %s", path, lineno, exc)
                    continue
                self._sequence = max(self._sequence, int(raw.get("seq", 0)))
                if task_id in self.tasks:
                    self.latest[task_id] = judgment
                    self.tasks[task_id].status = TaskStatus.COMPLETE

    def next_task(self, annotator_id: str) -> Optional[AnnotationTask]:
        """The annotator's current in-progress task, or the next pending one."""
        with self._lock:
            if annotator_id not in self.task_order:
                raise UnknownIdError(annotator_id)
            for task_id in self.task_order[annotator_id]:
                task = self.tasks[task_id]
                if task.status is TaskStatus.IN_PROGRESS:
                    return task
                if task.status is TaskStatus.PENDING:
                    task.status = TaskStatus.IN_PROGRESS
                    return task
            return None

    def story_payload(self, task_id: str) -> StoryPayload:
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise UnknownIdError(task_id)
            payload = self.payloads.get((task.story_id, task.method_name))
            if payload is None:
                raise UnknownIdError(f"payload for {task.story_id}/{task.method_name}")
            return payload

    def _validate_judgment(self, task: AnnotationTask, raw: dict) -> JudgmentSet:
        payload = self.payloads.get((task.story_id, task.method_name))
        if payload is None:
            raise UnknownIdError(f"payload for {task.story_id}/{task.method_name}")
        n = len(payload.segments)
        errors: dict[str, str] = {}
        if raw.get("story_id", task.story_id) != task.story_id:
            errors["story_id"] = f"does not match task story {task.story_id!r}"
        if raw.get("annotator_id", task.annotator_id) != task.annotator_id:
            errors["annotator_id"] = f"does not match task annotator {task.annotator_id!r}"

        def check_scores(key: str, expected_length: int) -> tuple[int, ...]:
            values = raw.get(key)
            if not isinstance(values, list):
                errors[key] = "must be an array of integers"
                return ()
            if len(values) != expected_length:
                errors[key] = f"expected length {expected_length}, got {len(values)}"
                return ()
            clean = []
            for v in values:
                if not isinstance(v, int) or isinstance(v, bool) or v not in JUDGMENT_VALUES:
                    errors[key] = f"values must be integers in {sorted(JUDGMENT_VALUES)}"
                    return ()
                clean.append(v)
            return tuple(clean)

        segment_scores = check_scores("segment_scores", n)
        transition_scores = check_scores("transition_scores", n - 1)
        rating = raw.get("overall_rating")
        if (
            not isinstance(rating, int)
            or isinstance(rating, bool)
            or not OVERALL_RATING_MIN <= rating <= OVERALL_RATING_MAX
        ):
            errors["overall_rating"] = (
                f"must be an integer in [{OVERALL_RATING_MIN}, {OVERALL_RATING_MAX}]"
            )
        if errors:
            raise JudgmentValidationError(errors)
        return JudgmentSet(
            story_id=task.story_id,
            annotator_id=task.annotator_id,
            segment_scores=segment_scores,
            transition_scores=transition_scores,
            overall_rating=rating,
            method_name=task.method_name,
        )

    def submit_judgment(self, task_id: str, raw: dict) -> tuple[JudgmentSet, bool]:
        """Validate, append to the log, and complete the task.

        Returns (judgment, resubmission). Raises UnknownIdError,
        TaskNotClaimedError, or JudgmentValidationError.
        """
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise UnknownIdError(task_id)
            if task.status is TaskStatus.PENDING:
                raise TaskNotClaimedError(task_id)
            judgment = self._validate_judgment(task, raw)
            resubmission = task.status is TaskStatus.COMPLETE
            self._sequence += 1
            record = {"seq": self._sequence, "task_id": task_id, "resubmission": resubmission}
            record.update(judgment_record(judgment))
            record["method_name"] = judgment.method_name
            self._log_handle.write(dumps_record(record) + "\n")
            self._log_handle.flush()
            self.latest[task_id] = judgment
            task.status = TaskStatus.COMPLETE
            return judgment, resubmission

    def export_judgments(
        self,
        annotator: Optional[str] = None,
        story: Optional[str] = None,
        method: Optional[str] = None,
    ) -> list[dict]:
        """Latest judgment per task, filtered, in task-id order."""
        with self._lock:
            records = []
            for task_id in sorted(self.latest):
                judgment = self.latest[task_id]
                if annotator is not None and judgment.annotator_id != annotator:
                    continue
                if story is not None and judgment.story_id != story:
                    continue
                if method is not None and judgment.method_name != method:
                    continue
                records.append(judgment_record(judgment))
            return records

    def progress(self) -> dict:
        with self._lock:
            counts = {status.value: 0 for status in TaskStatus}
            per_annotator: dict[str, dict[str, int]] = {
                a: {status.value: 0 for status in TaskStatus} for a in self.annotators
            }
            for task in self.tasks.values():
                counts[task.status.value] += 1
                per_annotator[task.annotator_id][task.status.value] += 1
            return {
                "total": len(self.tasks),
                **counts,
                "annotators": {a: per_annotator[a] for a in sorted(per_annotator)},
            }

    def close(self) -> None:
        self._log_handle.close()


def create_app(store: AnnotationStore, media_dir: Optional[Path] = None):
    """FastAPI application exposing the annotation endpoints."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, PlainTextResponse

    app = FastAPI(title="storyweave annotation service")

    @app.get("/annotators/{annotator_id}/next-task")
    def next_task(annotator_id: str):
        try:
            task = store.next_task(annotator_id)
        except UnknownIdError:
            return JSONResponse({"error": f"unknown annotator {annotator_id!r}"}, status_code=404)
        return {"task": task.as_dict() if task else None}

    @app.get("/tasks/{task_id}/story")
    def story(task_id: str):
        try:
            payload = store.story_payload(task_id)
        except UnknownIdError as exc:
            return JSONResponse({"error": f"not found: {exc.args[0]}"}, status_code=404)
        return payload.as_dict()

    @app.post("/tasks/{task_id}/judgment")
    async def submit(task_id: str, request: Request):
        try:
            raw = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"errors": {"body": "invalid JSON"}}, status_code=400)
        if not isinstance(raw, dict):
            return JSONResponse({"errors": {"body": "expected a JSON object"}}, status_code=400)
        try:
            judgment, resubmission = store.submit_judgment(task_id, raw)
        except UnknownIdError:
            return JSONResponse({"error": f"unknown task {task_id!r}"}, status_code=404)
        except TaskNotClaimedError:
            return JSONResponse(
                {"error": f"task {task_id!r} has not been claimed"}, status_code=409
            )
        except JudgmentValidationError as exc:
            return JSONResponse({"errors": exc.field_errors}, status_code=400)
        return {"status": "accepted", "task_id": task_id, "resubmission": resubmission}

    @app.get("/export")
    def export(annotator: Optional[str] = None, story: Optional[str] = None,
               method: Optional[str] = None):
        records = store.export_judgments(annotator=annotator, story=story, method=method)
        body = "".join(dumps_record(r) + "\n" for r in records)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    @app.get("/progress")
    def progress():
        return store.progress()

    if media_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/media", StaticFiles(directory=media_dir), name="media")

    return app


def serve(store_dir: Path, media_dir: Optional[Path], port: int) -> None:
    """Run the annotation service with uvicorn (blocking)."""
    import uvicorn

    store = AnnotationStore(store_dir)
    app = create_app(store, media_dir=media_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
