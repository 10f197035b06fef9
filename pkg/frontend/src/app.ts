// Bootstrap: claim the next task for an annotator, render it, and submit.
// Network failures keep the session state and offer a retry; a 409 means
// the claim was lost, so the task is re-claimed and the judgment resent.

import { ApiClient } from "./api.js";
import { renderStory } from "./render.js";
import { AnnotationSession } from "./session.js";
import { validateStoryPayload } from "./schema.js";
import type { JudgmentPayload } from "./types.js";

export async function runAnnotator(
  root: HTMLElement,
  client: ApiClient,
  annotatorId: string,
): Promise<void> {
  const doc = root.ownerDocument;
  const status = doc.createElement("p");
  status.className = "status";
  const stage = doc.createElement("div");
  root.replaceChildren(status, stage);

  const loadNext = async (): Promise<void> => {
    status.textContent = "Loading next task...";
    const task = await client.nextTask(annotatorId);
    if (task === null) {
      status.textContent = "All tasks complete. Thank you!";
      stage.replaceChildren();
      return;
    }
    const payload = await client.storyPayload(task.task_id);
    if (!validateStoryPayload(payload)) {
      throw new Error(`malformed story payload for task ${task.task_id}`);
    }
    const session = new AnnotationSession(task, payload);
    status.textContent = `Task ${task.task_id}: ${payload.title} (${task.method_name})`;

    const submit = async (judgment: JudgmentPayload): Promise<void> => {
      session.status = "submitting";
      const result = await client.submitJudgment(task.task_id, judgment);
      if (result.kind === "accepted") {
        session.status = "submitted";
        await loadNext();
        return;
      }
      session.status = "failed";
      if (result.kind === "validation") {
        handle.showFieldErrors(result.errors);
        return;
      }
      if (result.kind === "conflict") {
        // claim lost (e.g. service restart): re-claim, then resend as-is
        status.textContent = "Task claim expired; re-claiming...";
        await client.nextTask(annotatorId);
        const retry = await client.submitJudgment(task.task_id, judgment);
        if (retry.kind === "accepted") {
          session.status = "submitted";
          await loadNext();
        } else {
          handle.showFieldErrors({ submit: `resubmission failed (${retry.kind})` });
        }
        return;
      }
      // network failure: state is intact, offer a retry
      const retryButton = doc.createElement("button");
      retryButton.textContent = "Retry submission";
      retryButton.dataset.action = "retry";
      retryButton.addEventListener("click", () => {
        retryButton.remove();
        void submit(judgment);
      });
      stage.appendChild(retryButton);
      handle.showFieldErrors({ submit: "network failure, judgment kept locally" });
    };

    const handle = renderStory(stage, session, (judgment) => void submit(judgment));
  };

  await loadNext();
}

export function bootstrapFromDom(doc: Document): void {
  const root = doc.getElementById("app");
  const input = doc.getElementById("annotator-id") as HTMLInputElement | null;
  const start = doc.getElementById("start") as HTMLButtonElement | null;
  if (!root || !input || !start) {
    return;
  }
  start.addEventListener("click", () => {
    const client = new ApiClient(doc.defaultView?.location.origin ?? "");
    void runAnnotator(root, client, input.value.trim());
  });
}
