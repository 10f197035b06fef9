import { describe, expect, it } from "vitest";

import { validateJudgmentPayload, validateStoryPayload } from "../src/schema.js";
import { AnnotationSession } from "../src/session.js";
import { fixturePayload, fixtureTask } from "./fixtures.js";

// Mirror of the service-side validation rules: a payload passing this
// check is never rejected by the service for shape reasons.
function serviceWouldAccept(payload: unknown, expectedSegments: number): boolean {
  if (typeof payload !== "object" || payload === null) return false;
  const p = payload as Record<string, unknown>;
  const inRange = (v: unknown) => Number.isInteger(v) && [0, 1, 2].includes(v as number);
  if (!Array.isArray(p.segment_scores) || p.segment_scores.length !== expectedSegments) {
    return false;
  }
  if (!p.segment_scores.every(inRange)) return false;
  if (
    !Array.isArray(p.transition_scores) ||
    p.transition_scores.length !== expectedSegments - 1
  ) {
    return false;
  }
  if (!p.transition_scores.every(inRange)) return false;
  const rating = p.overall_rating;
  if (!Number.isInteger(rating) || (rating as number) < 1 || (rating as number) > 5) {
    return false;
  }
  return typeof p.story_id === "string" && typeof p.annotator_id === "string";
}

describe("judgment payload shape contract", () => {
  it("complete sessions always build service-acceptable payloads", () => {
    for (const n of [3, 4]) {
      for (const segmentValue of [0, 1, 2] as const) {
        for (const transitionValue of [0, 1, 2] as const) {
          for (const overall of [1, 3, 5] as const) {
            const session = new AnnotationSession(
              { ...fixtureTask() },
              fixturePayload(n),
            );
            for (let i = 0; i < n; i++) session.setSegmentRating(i, segmentValue);
            for (let i = 0; i < n - 1; i++) session.setTransitionRating(i, transitionValue);
            session.setOverallRating(overall);
            const judgment = session.buildJudgment();
            expect(validateJudgmentPayload(judgment, n)).toEqual([]);
            expect(serviceWouldAccept(judgment, n)).toBe(true);
          }
        }
      }
    }
  });

  it("flags wrong lengths", () => {
    const errors = validateJudgmentPayload(
      {
        story_id: "s",
        annotator_id: "a",
        segment_scores: [1, 1],
        transition_scores: [1, 1, 1],
        overall_rating: 3,
      },
      3,
    );
    const fields = errors.map((e) => e.field);
    expect(fields).toContain("segment_scores");
    expect(fields).toContain("transition_scores");
  });

  it("flags out-of-range values", () => {
    const errors = validateJudgmentPayload(
      {
        story_id: "s",
        annotator_id: "a",
        segment_scores: [5, 1, 1],
        transition_scores: [1, 1],
        overall_rating: 9,
      },
      3,
    );
    const fields = errors.map((e) => e.field);
    expect(fields).toContain("segment_scores");
    expect(fields).toContain("overall_rating");
  });
});

describe("story payload validation", () => {
  it("accepts the fixture payload", () => {
    expect(validateStoryPayload(fixturePayload())).toBe(true);
  });

  it("accepts null media entries", () => {
    const payload = fixturePayload();
    payload.segments[0]!.media_id = null;
    payload.segments[0]!.media_uri = null;
    expect(validateStoryPayload(payload)).toBe(true);
  });

  it("rejects missing segments", () => {
    expect(validateStoryPayload({ story_id: "s", title: "t", method_name: "m", segments: [] }))
      .toBe(false);
  });
});
