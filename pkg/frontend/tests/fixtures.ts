import type { AnnotationTask, StoryPayload } from "../src/types.js";

export function fixturePayload(segments = 3): StoryPayload {
  return {
    story_id: "story001",
    method_name: "bm25",
    title: "Opening day at the festival",
    segments: Array.from({ length: segments }, (_, i) => ({
      segment_id: `story001-s${i + 1}`,
      description: `What happened during part ${i + 1}`,
      media_id: `m${i + 1}`,
      media_uri: `media/m${i + 1}.png`,
    })),
  };
}

export function fixtureTask(): AnnotationTask {
  return {
    task_id: "task-00001",
    story_id: "story001",
    method_name: "bm25",
    annotator_id: "a1",
    status: "in_progress",
  };
}
