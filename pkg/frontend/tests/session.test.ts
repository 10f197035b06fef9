import { describe, expect, it } from "vitest";

import { AnnotationSession } from "../src/session.js";
import { fixturePayload, fixtureTask } from "./fixtures.js";

function freshSession(segments = 3) {
  return new AnnotationSession(fixtureTask(), fixturePayload(segments));
}

describe("AnnotationSession completeness", () => {
  it("starts incomplete", () => {
    const session = freshSession();
    expect(session.isComplete()).toBe(false);
    expect(() => session.buildJudgment()).toThrow(/incomplete/);
  });

  it("stays incomplete until every rating is set", () => {
    const session = freshSession(3);
    session.setSegmentRating(0, 2);
    session.setSegmentRating(1, 1);
    session.setSegmentRating(2, 0);
    expect(session.isComplete()).toBe(false);
    session.setTransitionRating(0, 2);
    expect(session.isComplete()).toBe(false);
    session.setTransitionRating(1, 1);
    expect(session.isComplete()).toBe(false);
    session.setOverallRating(4);
    expect(session.isComplete()).toBe(true);
  });

  it("missing a single segment rating blocks submission", () => {
    const session = freshSession(4);
    for (let i = 0; i < 4; i++) {
      if (i !== 2) session.setSegmentRating(i, 1);
    }
    for (let i = 0; i < 3; i++) session.setTransitionRating(i, 1);
    session.setOverallRating(3);
    expect(session.isComplete()).toBe(false);
    session.setSegmentRating(2, 0);
    expect(session.isComplete()).toBe(true);
  });

  it("allows revising ratings before submit", () => {
    const session = freshSession();
    session.setSegmentRating(0, 0);
    session.setSegmentRating(0, 2);
    expect(session.segmentRatings[0]).toBe(2);
  });

  it("builds the exact judgment wire format", () => {
    const session = freshSession(3);
    [2, 0, 1].forEach((v, i) => session.setSegmentRating(i, v as 0 | 1 | 2));
    [1, 2].forEach((v, i) => session.setTransitionRating(i, v as 0 | 1 | 2));
    session.setOverallRating(3);
    expect(session.buildJudgment()).toEqual({
      story_id: "story001",
      annotator_id: "a1",
      segment_scores: [2, 0, 1],
      transition_scores: [1, 2],
      overall_rating: 3,
    });
  });

  it("rejects out-of-range indexes", () => {
    const session = freshSession();
    expect(() => session.setSegmentRating(3, 1)).toThrow(RangeError);
    expect(() => session.setTransitionRating(2, 1)).toThrow(RangeError);
  });

  it("rejects mismatched task and payload", () => {
    const task = { ...fixtureTask(), story_id: "other" };
    expect(() => new AnnotationSession(task, fixturePayload())).toThrow(/does not match/);
  });
});
