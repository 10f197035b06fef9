// Per-task rating state. Ratings can be revised freely (back navigation)
// until the judgment is submitted; submission is only possible once every
// segment, every transition, and the overall rating are set.

import { validateJudgmentPayload } from "./schema.js";
import type {
  AnnotationTask,
  JudgmentPayload,
  OverallRating,
  SegmentRating,
  StoryPayload,
} from "./types.js";

export type SubmissionStatus = "editing" | "submitting" | "submitted" | "failed";

export class AnnotationSession {
  readonly task: AnnotationTask;
  readonly payload: StoryPayload;
  segmentRatings: (SegmentRating | null)[];
  transitionRatings: (SegmentRating | null)[];
  overallRating: OverallRating | null = null;
  status: SubmissionStatus = "editing";

  constructor(task: AnnotationTask, payload: StoryPayload) {
    if (task.story_id !== payload.story_id) {
      throw new Error(`task story ${task.story_id} does not match payload ${payload.story_id}`);
    }
    this.task = task;
    this.payload = payload;
    this.segmentRatings = payload.segments.map(() => null);
    this.transitionRatings = payload.segments.slice(1).map(() => null);
  }

  get segmentCount(): number {
    return this.payload.segments.length;
  }

  setSegmentRating(index: number, value: SegmentRating): void {
    if (index < 0 || index >= this.segmentRatings.length) {
      throw new RangeError(`segment index ${index} out of range`);
    }
    this.segmentRatings[index] = value;
  }

  setTransitionRating(index: number, value: SegmentRating): void {
    if (index < 0 || index >= this.transitionRatings.length) {
      throw new RangeError(`transition index ${index} out of range`);
    }
    this.transitionRatings[index] = value;
  }

  setOverallRating(value: OverallRating): void {
    this.overallRating = value;
  }

  isComplete(): boolean {
    return (
      this.segmentRatings.every((v) => v !== null) &&
      this.transitionRatings.every((v) => v !== null) &&
      this.overallRating !== null
    );
  }

  buildJudgment(): JudgmentPayload {
    if (!this.isComplete()) {
      throw new Error("judgment is incomplete; submit must stay disabled");
    }
    const payload: JudgmentPayload = {
      story_id: this.task.story_id,
      annotator_id: this.task.annotator_id,
      segment_scores: this.segmentRatings.map((v) => v as number),
      transition_scores: this.transitionRatings.map((v) => v as number),
      overall_rating: this.overallRating as number,
    };
    const errors = validateJudgmentPayload(payload, this.segmentCount);
    if (errors.length > 0) {
      throw new Error(`internal shape violation: ${errors.map((e) => e.field).join(", ")}`);
    }
    return payload;
  }
}
