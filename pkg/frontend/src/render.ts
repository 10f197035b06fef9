// Sequential story rendering: title, then segment and transition views in
// strict story order, one visible at a time with free back-navigation.
// The submit control stays disabled until the session is complete.

import type { AnnotationSession } from "./session.js";
import type { JudgmentPayload, SegmentRating, StoryPayload } from "./types.js";
import {
  OVERALL_RATING_VALUES,
  SEGMENT_RATING_LABELS,
  TRANSITION_RATING_LABELS,
} from "./types.js";

export interface ViewRef {
  kind: "segment" | "transition";
  index: number;
}

/** S1, T1, S2, T2, ..., SN: a 3-segment story yields 5 views. */
export function viewSequence(payload: StoryPayload): ViewRef[] {
  const views: ViewRef[] = [];
  payload.segments.forEach((_, index) => {
    if (index > 0) {
      views.push({ kind: "transition", index: index - 1 });
    }
    views.push({ kind: "segment", index });
  });
  return views;
}

export interface RenderHandle {
  showView(position: number): void;
  currentView(): number;
  viewCount(): number;
  submitButton: HTMLButtonElement;
  refreshSubmitState(): void;
  showFieldErrors(errors: Record<string, string>): void;
}

function mediaElement(doc: Document, uri: string | null): HTMLElement {
  if (uri === null) {
    const placeholder = doc.createElement("div");
    placeholder.className = "media-placeholder";
    placeholder.textContent = "media unavailable";
    return placeholder;
  }
  const wrapper = doc.createElement("div");
  wrapper.className = "media";
  const image = doc.createElement("img");
  image.src = uri;
  image.alt = "segment illustration";
  image.addEventListener("error", () => {
    const placeholder = doc.createElement("div");
    placeholder.className = "media-placeholder";
    placeholder.textContent = "media unavailable";
    wrapper.replaceChildren(placeholder);
  });
  wrapper.appendChild(image);
  return wrapper;
}

function ratingGroup(
  doc: Document,
  name: string,
  labels: ReadonlyMap<SegmentRating, string>,
  onSelect: (value: SegmentRating) => void,
): HTMLElement {
  const group = doc.createElement("fieldset");
  group.className = "rating-group";
  group.dataset.rating = name;
  for (const [value, text] of labels) {
    const label = doc.createElement("label");
    const input = doc.createElement("input");
    input.type = "radio";
    input.name = name;
    input.value = String(value);
    input.addEventListener("change", () => onSelect(value));
    label.appendChild(input);
    label.appendChild(doc.createTextNode(` ${value}: ${text}`));
    group.appendChild(label);
  }
  return group;
}

export function renderStory(
  container: HTMLElement,
  session: AnnotationSession,
  onSubmit: (judgment: JudgmentPayload) => void,
): RenderHandle {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const title = doc.createElement("h1");
  title.textContent = session.payload.title;
  container.appendChild(title);

  const views = viewSequence(session.payload);
  const sections: HTMLElement[] = [];

  const refreshSubmitState = () => {
    submit.disabled = !session.isComplete();
  };

  for (const view of views) {
    const section = doc.createElement("section");
    section.dataset.view = `${view.kind}-${view.index + 1}`;
    if (view.kind === "segment") {
      const segment = session.payload.segments[view.index]!;
      const heading = doc.createElement("h2");
      heading.textContent = `Segment ${view.index + 1} of ${session.segmentCount}`;
      section.appendChild(heading);
      section.appendChild(mediaElement(doc, segment.media_uri));
      const description = doc.createElement("p");
      description.className = "description";
      description.textContent = segment.description;
      section.appendChild(description);
      const prompt = doc.createElement("p");
      prompt.textContent = "How well does this illustration match the segment?";
      section.appendChild(prompt);
      section.appendChild(
        ratingGroup(doc, `segment-${view.index}`, SEGMENT_RATING_LABELS, (value) => {
          session.setSegmentRating(view.index, value);
          refreshSubmitState();
        }),
      );
    } else {
      const heading = doc.createElement("h2");
      heading.textContent = `Transition ${view.index + 1}`;
      section.appendChild(heading);
      const prompt = doc.createElement("p");
      prompt.textContent =
        "How coherent is the transition from the previous illustration to the next one?";
      section.appendChild(prompt);
      section.appendChild(
        ratingGroup(doc, `transition-${view.index}`, TRANSITION_RATING_LABELS, (value) => {
          session.setTransitionRating(view.index, value);
          refreshSubmitState();
        }),
      );
    }
    sections.push(section);
    container.appendChild(section);
  }

  // trailing overall panel, shown after the last segment view
  const overall = doc.createElement("section");
  overall.dataset.panel = "overall";
  const overallHeading = doc.createElement("h2");
  overallHeading.textContent = "Overall story quality";
  overall.appendChild(overallHeading);
  const overallGroup = doc.createElement("fieldset");
  overallGroup.className = "rating-group";
  overallGroup.dataset.rating = "overall";
  for (const value of OVERALL_RATING_VALUES) {
    const label = doc.createElement("label");
    const input = doc.createElement("input");
    input.type = "radio";
    input.name = "overall";
    input.value = String(value);
    input.addEventListener("change", () => {
      session.setOverallRating(value);
      refreshSubmitState();
    });
    label.appendChild(input);
    label.appendChild(doc.createTextNode(` ${value}`));
    overallGroup.appendChild(label);
  }
  overall.appendChild(overallGroup);
  sections.push(overall);
  container.appendChild(overall);

  const nav = doc.createElement("div");
  nav.className = "navigation";
  const back = doc.createElement("button");
  back.textContent = "Back";
  back.dataset.action = "back";
  const next = doc.createElement("button");
  next.textContent = "Next";
  next.dataset.action = "next";
  const submit = doc.createElement("button");
  submit.textContent = "Submit judgment";
  submit.dataset.action = "submit";
  submit.disabled = true;
  nav.append(back, next, submit);
  container.appendChild(nav);

  const errorArea = doc.createElement("div");
  errorArea.className = "field-errors";
  container.appendChild(errorArea);

  let position = 0;
  const showView = (target: number) => {
    position = Math.max(0, Math.min(sections.length - 1, target));
    sections.forEach((section, index) => {
      section.hidden = index !== position;
    });
    back.disabled = position === 0;
    next.disabled = position === sections.length - 1;
  };
  back.addEventListener("click", () => showView(position - 1));
  next.addEventListener("click", () => showView(position + 1));
  submit.addEventListener("click", () => {
    if (!session.isComplete()) {
      return;
    }
    onSubmit(session.buildJudgment());
  });

  const showFieldErrors = (errors: Record<string, string>) => {
    errorArea.replaceChildren();
    for (const [field, reason] of Object.entries(errors)) {
      const item = doc.createElement("p");
      item.className = "field-error";
      item.dataset.field = field;
      item.textContent = `${field}: ${reason}`;
      errorArea.appendChild(item);
    }
  };

  showView(0);
  return {
    showView,
    currentView: () => position,
    viewCount: () => sections.length,
    submitButton: submit,
    refreshSubmitState,
    showFieldErrors,
  };
}
