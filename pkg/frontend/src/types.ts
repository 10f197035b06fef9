// Wire formats of the annotation service, mirrored field for field.

export type TaskStatus = "pending" | "in_progress" | "complete";

export interface AnnotationTask {
  task_id: string;
  story_id: string;
  method_name: string;
  annotator_id: string;
  status: TaskStatus;
}

export interface PayloadSegment {
  segment_id: string;
  description: string;
  media_id: string | null;
  media_uri: string | null;
}

export interface StoryPayload {
  story_id: string;
  method_name: string;
  title: string;
  segments: PayloadSegment[];
}

export interface JudgmentPayload {
  story_id: string;
  annotator_id: string;
  segment_scores: number[];
  transition_scores: number[];
  overall_rating: number;
}

export type SegmentRating = 0 | 1 | 2;
export type OverallRating = 1 | 2 | 3 | 4 | 5;

export const SEGMENT_RATING_LABELS: ReadonlyMap<SegmentRating, string> = new Map([
  [0, "not relevant to the story segment"],
  [1, "relevant to the story segment"],
  [2, "highly relevant to the story segment"],
]);

export const TRANSITION_RATING_LABELS: ReadonlyMap<SegmentRating, string> = new Map([
  [0, "no relation between the segment illustrations"],
  [1, "a relation between the two segment illustrations"],
  [2, "appealing semantic and visual coherence between the two segment illustrations"],
]);

export const OVERALL_RATING_VALUES: readonly OverallRating[] = [1, 2, 3, 4, 5];
