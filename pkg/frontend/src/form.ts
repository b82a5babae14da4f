/**
 * Questionnaire form: rendering, client-side completeness gate, submission.
 *
 * The gate only checks completeness and basic typing so the submit button
 * stays disabled until every required question has an answer; the server
 * remains the validation authority and its violations are attached to the
 * offending questions verbatim. Answers always survive a failed attempt.
 */

import { ApiClient, ApiError, Question, Questionnaire, Violation } from "./api.js";

export type SubmissionPhase = "editing" | "submitting" | "confirmed" | "closed";

export interface FormState {
  definition: Questionnaire;
  answers: Map<string, unknown>;
  messages: Map<string, string>;
  globalMessage: string | null;
  phase: SubmissionPhase;
}

export function initFormState(definition: Questionnaire): FormState {
  return {
    definition,
    answers: new Map(),
    messages: new Map(),
    globalMessage: null,
    phase: "editing",
  };
}

function answerValid(question: Question, value: unknown): boolean {
  switch (question.kind) {
    case "likert5":
      return typeof value === "number" && Number.isInteger(value) && value >= 1 && value <= 5;
    case "choice":
      return (
        typeof value === "number" &&
        Number.isInteger(value) &&
        value >= 0 &&
        value < (question.options?.length ?? 0)
      );
    case "numeric":
      return typeof value === "number" && Number.isFinite(value);
    case "free_text":
      return typeof value === "string" && value.trim().length > 0;
  }
}

/** True when every required question has a usable answer. */
export function isComplete(definition: Questionnaire, answers: Map<string, unknown>): boolean {
  for (const question of definition.questions) {
    const value = answers.get(question.id);
    if (value === undefined || value === null || value === "") {
      if (question.required) return false;
      continue;
    }
    if (!answerValid(question, value)) return false;
  }
  return true;
}

/** Answer map for submission; unanswered optional questions are omitted. */
export function collectAnswers(state: FormState): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const question of state.definition.questions) {
    const value = state.answers.get(question.id);
    if (value === undefined || value === null || value === "") continue;
    out[question.id] = value;
  }
  return out;
}

function controlFor(question: Question, state: FormState, onChange: () => void): HTMLElement {
  const doc = document;
  if (question.kind === "likert5") {
    const row = doc.createElement("div");
    row.className = "likert-row";
    for (let v = 1; v <= 5; v += 1) {
      const label = doc.createElement("label");
      const radio = doc.createElement("input");
      radio.type = "radio";
      radio.name = question.id;
      radio.value = String(v);
      radio.addEventListener("change", () => {
        state.answers.set(question.id, v);
        onChange();
      });
      label.appendChild(radio);
      label.appendChild(doc.createTextNode(String(v)));
      row.appendChild(label);
    }
    return row;
  }
  if (question.kind === "choice") {
    const select = doc.createElement("select");
    (question.options ?? []).forEach((option, index) => {
      const entry = doc.createElement("option");
      entry.value = String(index);
      entry.textContent = option;
      select.appendChild(entry);
    });
    select.addEventListener("change", () => {
      state.answers.set(question.id, select.selectedIndex);
      onChange();
    });
    return select;
  }
  if (question.kind === "numeric") {
    const input = doc.createElement("input");
    input.type = "number";
    input.step = "any";
    input.addEventListener("input", () => {
      const value = input.value.trim();
      if (value === "") {
        state.answers.delete(question.id);
      } else {
        state.answers.set(question.id, Number(value));
      }
      onChange();
    });
    return input;
  }
  const area = doc.createElement("textarea");
  area.rows = 3;
  area.addEventListener("input", () => {
    if (area.value.trim() === "") {
      state.answers.delete(question.id);
    } else {
      state.answers.set(question.id, area.value);
    }
    onChange();
  });
  return area;
}

/**
 * Render the form into a container: one kind-appropriate control per
 * question, a submit button gated on completeness, per-question message
 * slots for server violations.
 */
export function renderQuestionnaire(
  container: HTMLElement,
  state: FormState,
  onSubmit: () => void,
): void {
  container.innerHTML = "";
  const heading = document.createElement("h1");
  heading.textContent = state.definition.title;
  container.appendChild(heading);

  const form = document.createElement("form");
  form.className = "survey-form";
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Submit answers";
  submit.disabled = !isComplete(state.definition, state.answers);

  const refreshGate = () => {
    submit.disabled = !isComplete(state.definition, state.answers);
  };

  for (const question of state.definition.questions) {
    const field = document.createElement("div");
    field.className = "question";
    field.dataset.question = question.id;

    const prompt = document.createElement("p");
    prompt.className = "prompt";
    prompt.textContent = question.required ? question.prompt : `${question.prompt} (optional)`;
    field.appendChild(prompt);
    field.appendChild(controlFor(question, state, refreshGate));

    const message = document.createElement("p");
    message.className = "violation";
    message.hidden = true;
    field.appendChild(message);
    form.appendChild(field);
  }

  form.appendChild(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    onSubmit();
  });
  container.appendChild(form);
  // browsers preselect the first <option>; clear it after attachment so an
  // untouched choice question counts as unanswered
  for (const select of Array.from(form.querySelectorAll("select"))) {
    select.selectedIndex = -1;
  }
  applyMessages(container, state);
}

/** Attach server violations (or clear them) without rebuilding controls. */
export function applyMessages(container: HTMLElement, state: FormState): void {
  for (const field of Array.from(container.querySelectorAll<HTMLElement>(".question"))) {
    const slot = field.querySelector<HTMLElement>(".violation");
    if (!slot) continue;
    const text = state.messages.get(field.dataset.question ?? "");
    if (text) {
      slot.textContent = text;
      slot.hidden = false;
    } else {
      slot.textContent = "";
      slot.hidden = true;
    }
  }
}

export function renderConfirmation(container: HTMLElement, state: FormState): void {
  container.innerHTML = "";
  const panel = document.createElement("div");
  panel.className = state.phase === "closed" ? "closed-panel" : "confirmation-panel";
  const text = document.createElement("p");
  text.textContent =
    state.phase === "closed"
      ? "A response was already submitted with this access code."
      : "Thank you. Your responses were stored successfully.";
  panel.appendChild(text);
  container.appendChild(panel);
}

/**
 * Drive one submission attempt. 201 confirms; 400 attaches violations to
 * their questions; 409 is terminal; network failures keep the answers and
 * offer a retry (state stays "editing").
 */
export async function submitAnswers(
  api: ApiClient,
  state: FormState,
  session: string,
  container: HTMLElement,
): Promise<void> {
  if (state.phase !== "editing") return;
  state.phase = "submitting";
  state.messages.clear();
  state.globalMessage = null;
  try {
    await api.submitResponse(state.definition.id, session, collectAnswers(state));
    state.phase = "confirmed";
    renderConfirmation(container, state);
  } catch (err) {
    if (err instanceof ApiError && err.status === 400) {
      state.phase = "editing";
      for (const violation of err.violations as Violation[]) {
        state.messages.set(violation.question_id, violation.message);
      }
      state.globalMessage = "Please review the highlighted questions.";
      applyMessages(container, state);
    } else if (err instanceof ApiError && err.status === 409) {
      state.phase = "closed";
      renderConfirmation(container, state);
    } else {
      state.phase = "editing";
      state.globalMessage = "Could not reach the server; your answers are kept. Try again.";
      applyMessages(container, state);
    }
  }
}
