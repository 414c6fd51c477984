/** Single-page wiring: login -> instructions -> search -> survey.
 *
 * The lambda slider (step 0.05) re-issues the current query unchanged with
 * the new blend weight; the result-count slider (10-100) re-requests
 * without touching lambda. Which widgets render is decided solely by what
 * the server response contains.
 */

import {
  ApiError,
  createSession,
  fetchScale,
  postClick,
  search,
  submitSurvey,
} from "./api.js";
import { TelemetryQueue } from "./telemetry.js";
import {
  renderInstructions,
  renderLogin,
  renderResults,
  renderSurvey,
} from "./view.js";

export interface AppState {
  token: string | null;
  query: string;
  lambda: number;
  lambdaTouched: boolean;
  maxResults: number;
  hasSearched: boolean;
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function createApp(root: HTMLElement): {
  state: AppState;
  telemetry: TelemetryQueue;
} {
  const state: AppState = {
    token: null,
    query: "",
    lambda: 0.5,
    lambdaTouched: false,
    maxResults: 10,
    hasSearched: false,
  };

  root.innerHTML = `
    <header><h1>Search study</h1></header>
    <main>
      <section id="login-panel"></section>
      <section id="task-panel" hidden>
        <form id="search-form">
          <input id="query-input" name="query" placeholder="Search" />
          <button type="submit">Search</button>
        </form>
        <div class="controls">
          <label>Balance
            <input id="lambda-slider" type="range"
                   min="0" max="1" step="0.05" value="0.5" />
          </label>
          <label>Results shown
            <input id="count-slider" type="range"
                   min="10" max="100" step="1" value="10" />
          </label>
        </div>
        <section id="content"></section>
      </section>
      <section id="survey-panel" hidden></section>
    </main>
  `;

  const loginPanel = root.querySelector<HTMLElement>("#login-panel")!;
  const taskPanel = root.querySelector<HTMLElement>("#task-panel")!;
  const surveyPanel = root.querySelector<HTMLElement>("#survey-panel")!;
  const content = root.querySelector<HTMLElement>("#content")!;
  const searchForm = root.querySelector<HTMLFormElement>("#search-form")!;
  const queryInput = root.querySelector<HTMLInputElement>("#query-input")!;
  const lambdaSlider = root.querySelector<HTMLInputElement>("#lambda-slider")!;
  const countSlider = root.querySelector<HTMLInputElement>("#count-slider")!;

  const telemetry = new TelemetryQueue((event) => {
    if (state.token === null) {
      return Promise.resolve({ ok: false });
    }
    return postClick(state.token, event.query, event.rank);
  });

  const showLogin = (message = "") =>
    renderLogin(
      loginPanel,
      {
        onLogin: async (participantId, password) => {
          try {
            const session = await createSession(participantId, password);
            state.token = session.token;
            loginPanel.hidden = true;
            taskPanel.hidden = false;
            renderInstructions(content);
          } catch (error) {
            const detail =
              error instanceof ApiError ? error.message : "login failed";
            showLogin(detail);
          }
        },
      },
      message,
    );

  const onSessionExpired = () => {
    state.token = null;
    taskPanel.hidden = true;
    surveyPanel.hidden = true;
    loginPanel.hidden = false;
    showLogin("Session expired; please sign in again.");
  };

  const handleResultClick = (rank: number, url: string) => {
    window.open(url, "_blank", "noopener");
    void telemetry.report({ query: state.query, rank });
  };

  const doSearch = async () => {
    if (state.token === null || !state.query.trim()) {
      return;
    }
    void telemetry.flush();
    try {
      const response = await search(state.token, state.query, {
        maxResults: state.maxResults,
        ...(state.lambdaTouched ? { lambda: state.lambda } : {}),
      });
      state.hasSearched = true;
      renderResults(content, response, handleResultClick);
    } catch (error) {
      if (error instanceof ApiError && error.status === 401) {
        onSessionExpired();
        return;
      }
      const note = document.createElement("p");
      note.className = "search-error";
      note.textContent =
        error instanceof ApiError ? error.message : "search failed";
      content.textContent = "";
      content.appendChild(note);
    }
  };

  searchForm.addEventListener("submit", (event) => {
    event.preventDefault();
    state.query = queryInput.value;
    void doSearch();
  });

  lambdaSlider.addEventListener("change", () => {
    state.lambda = clamp(Number(lambdaSlider.value), 0, 1);
    state.lambdaTouched = true;
    if (state.hasSearched) {
      void doSearch();
    }
  });

  countSlider.addEventListener("change", () => {
    state.maxResults = clamp(
      Math.round(Number(countSlider.value)),
      10,
      100,
    );
    if (state.hasSearched) {
      void doSearch();
    }
  });

  (root as HTMLElement & { startSurvey?: (name: string) => Promise<void> })
    .startSurvey = async (name: string) => {
    const scale = await fetchScale(name);
    taskPanel.hidden = true;
    surveyPanel.hidden = false;
    renderSurvey(surveyPanel, scale, {
      onSubmit: async (answers) => {
        if (state.token === null) {
          return;
        }
        try {
          await submitSurvey(state.token, name, answers);
          surveyPanel.textContent = "Thank you; your answers were recorded.";
        } catch (error) {
          if (error instanceof ApiError && error.status === 401) {
            onSessionExpired();
          }
        }
      },
    });
  };

  showLogin();
  return { state, telemetry };
}
