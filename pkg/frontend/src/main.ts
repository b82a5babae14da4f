/**
 * Entry point: access-code gate, then either the questionnaire form
 * (single-use respondent credential) or the live dashboard (viewer).
 */

import { ApiClient, ApiError } from "./api.js";
import { initFormState, renderQuestionnaire, submitAnswers } from "./form.js";
import { initDashboardState, startPolling } from "./dashboard.js";

const api = new ApiClient("");

function gateView(container: HTMLElement): void {
  container.innerHTML = "";
  const panel = document.createElement("div");
  panel.className = "gate";
  const heading = document.createElement("h1");
  heading.textContent = "statboard";
  const hint = document.createElement("p");
  hint.textContent = "Enter the access code you received.";
  const form = document.createElement("form");
  const input = document.createElement("input");
  input.type = "password";
  input.autocomplete = "off";
  input.placeholder = "access code";
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Enter";
  const error = document.createElement("p");
  error.className = "gate-error";
  error.hidden = true;

  form.append(input, button);
  panel.append(heading, hint, form, error);
  container.appendChild(panel);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    error.hidden = true;
    try {
      const auth = await api.auth(input.value.trim());
      if (auth.single_use) {
        await respondentView(container, auth.questionnaire_id, auth.session);
      } else {
        dashboardView(container, auth.questionnaire_id, auth.session);
      }
    } catch (err) {
      error.hidden = false;
      error.textContent =
        err instanceof ApiError && err.status === 401
          ? "That code is unknown or was already used."
          : "Could not reach the server; try again.";
    }
  });
}

async function respondentView(
  container: HTMLElement,
  questionnaireId: string,
  session: string,
): Promise<void> {
  let definition;
  try {
    definition = await api.getQuestionnaire(questionnaireId, session);
  } catch {
    container.innerHTML = "";
    const retry = document.createElement("button");
    retry.textContent = "Loading failed; retry";
    retry.addEventListener("click", () => void respondentView(container, questionnaireId, session));
    container.appendChild(retry);
    return;
  }
  const state = initFormState(definition);
  renderQuestionnaire(container, state, () => {
    void submitAnswers(api, state, session, container);
  });
}

function dashboardView(container: HTMLElement, questionnaireId: string, session: string): void {
  const state = initDashboardState(3000);
  startPolling(api, questionnaireId, session, state, container);
}

const root = document.getElementById("app");
if (root) {
  gateView(root);
}
