// Shape gate for judgment submissions: every payload the UI sends goes
// through validateJudgmentPayload first, so the service can never reject
// a submission for shape reasons.

import type { JudgmentPayload, StoryPayload } from "./types.js";

export interface ShapeError {
  field: string;
  reason: string;
}

const RATING_VALUES = new Set([0, 1, 2]);

function isIntArray(value: unknown): value is number[] {
  return Array.isArray(value) && value.every((v) => Number.isInteger(v));
}

export function validateJudgmentPayload(
  payload: JudgmentPayload,
  expectedSegments: number,
): ShapeError[] {
  const errors: ShapeError[] = [];
  if (typeof payload.story_id !== "string" || payload.story_id.length === 0) {
    errors.push({ field: "story_id", reason: "must be a non-empty string" });
  }
  if (typeof payload.annotator_id !== "string" || payload.annotator_id.length === 0) {
    errors.push({ field: "annotator_id", reason: "must be a non-empty string" });
  }
  if (!isIntArray(payload.segment_scores)) {
    errors.push({ field: "segment_scores", reason: "must be an array of integers" });
  } else {
    if (payload.segment_scores.length !== expectedSegments) {
      errors.push({
        field: "segment_scores",
        reason: `expected length ${expectedSegments}, got ${payload.segment_scores.length}`,
      });
    }
    if (!payload.segment_scores.every((v) => RATING_VALUES.has(v))) {
      errors.push({ field: "segment_scores", reason: "values must be 0, 1, or 2" });
    }
  }
  if (!isIntArray(payload.transition_scores)) {
    errors.push({ field: "transition_scores", reason: "must be an array of integers" });
  } else {
    if (payload.transition_scores.length !== expectedSegments - 1) {
      errors.push({
        field: "transition_scores",
        reason: `expected length ${expectedSegments - 1}, got ${payload.transition_scores.length}`,
      });
    }
    if (!payload.transition_scores.every((v) => RATING_VALUES.has(v))) {
      errors.push({ field: "transition_scores", reason: "values must be 0, 1, or 2" });
    }
  }
  if (
    !Number.isInteger(payload.overall_rating) ||
    payload.overall_rating < 1 ||
    payload.overall_rating > 5
  ) {
    errors.push({ field: "overall_rating", reason: "must be an integer in [1, 5]" });
  }
  return errors;
}

export function validateStoryPayload(payload: unknown): payload is StoryPayload {
  if (typeof payload !== "object" || payload === null) return false;
  const p = payload as Record<string, unknown>;
  if (typeof p.story_id !== "string" || typeof p.title !== "string") return false;
  if (typeof p.method_name !== "string") return false;
  if (!Array.isArray(p.segments) || p.segments.length === 0) return false;
  return p.segments.every((s) => {
    if (typeof s !== "object" || s === null) return false;
    const seg = s as Record<string, unknown>;
    return (
      typeof seg.segment_id === "string" &&
      typeof seg.description === "string" &&
      (seg.media_id === null || typeof seg.media_id === "string") &&
      (seg.media_uri === null || typeof seg.media_uri === "string")
    );
  });
}
