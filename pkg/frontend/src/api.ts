// Thin client over the annotation service HTTP API.

import type { AnnotationTask, JudgmentPayload, StoryPayload } from "./types.js";

export type SubmitResult =
  | { kind: "accepted"; resubmission: boolean }
  | { kind: "validation"; errors: Record<string, string> }
  | { kind: "conflict" }
  | { kind: "not_found" }
  | { kind: "network"; message: string };

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: typeof fetch;

  constructor(baseUrl: string, fetchImpl: typeof fetch = fetch) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  async nextTask(annotatorId: string): Promise<AnnotationTask | null> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/annotators/${encodeURIComponent(annotatorId)}/next-task`,
    );
    if (response.status === 404) {
      throw new Error(`unknown annotator: ${annotatorId}`);
    }
    if (!response.ok) {
      throw new Error(`next-task failed with status ${response.status}`);
    }
    const body = (await response.json()) as { task: AnnotationTask | null };
    return body.task;
  }

  async storyPayload(taskId: string): Promise<StoryPayload> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/tasks/${encodeURIComponent(taskId)}/story`,
    );
    if (!response.ok) {
      throw new Error(`story payload failed with status ${response.status}`);
    }
    return (await response.json()) as StoryPayload;
  }

  async submitJudgment(taskId: string, judgment: JudgmentPayload): Promise<SubmitResult> {
    let response: Response;
    try {
      response = await this.fetchImpl(
        `${this.baseUrl}/tasks/${encodeURIComponent(taskId)}/judgment`,
        {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify(judgment),
        },
      );
    } catch (error) {
      return { kind: "network", message: String(error) };
    }
    if (response.status === 400) {
      const body = (await response.json()) as { errors: Record<string, string> };
      return { kind: "validation", errors: body.errors };
    }
    if (response.status === 404) return { kind: "not_found" };
    if (response.status === 409) return { kind: "conflict" };
    if (!response.ok) {
      return { kind: "network", message: `unexpected status ${response.status}` };
    }
    const body = (await response.json()) as { resubmission: boolean };
    return { kind: "accepted", resubmission: body.resubmission };
  }

  async exportJudgments(filter: { annotator?: string; story?: string; method?: string } = {}):
    Promise<string> {
    const params = new URLSearchParams();
    if (filter.annotator) params.set("annotator", filter.annotator);
    if (filter.story) params.set("story", filter.story);
    if (filter.method) params.set("method", filter.method);
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    const response = await this.fetchImpl(`${this.baseUrl}/export${suffix}`);
    if (!response.ok) {
      throw new Error(`export failed with status ${response.status}`);
    }
    return await response.text();
  }

  async progress(): Promise<Record<string, unknown>> {
    const response = await this.fetchImpl(`${this.baseUrl}/progress`);
    if (!response.ok) {
      throw new Error(`progress failed with status ${response.status}`);
    }
    return (await response.json()) as Record<string, unknown>;
  }
}
