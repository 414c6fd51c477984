/** DOM rendering. Score badges and the curve chart are created only when
 * the server payload actually carries the corresponding fields, so a
 * client-side flag can never reveal numbers the server withheld.
 */

import type { ScaleDefinition, SearchResponse } from "./api.js";

export const CHART = { width: 320, height: 200, margin: 20 };

/** Map server curve points ([fraction 0..1, value 0..100]) to SVG pixels. */
export function toChartCoords(
  points: [number, number][],
  width = CHART.width,
  height = CHART.height,
  margin = CHART.margin,
): [number, number][] {
  const innerW = width - 2 * margin;
  const innerH = height - 2 * margin;
  return points.map(([fraction, value]) => [
    margin + fraction * innerW,
    height - margin - (value / 100) * innerH,
  ]);
}

export function renderCurve(
  container: HTMLElement,
  points: [number, number][],
): void {
  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("class", "curve-chart");
  svg.setAttribute("viewBox", `0 0 ${CHART.width} ${CHART.height}`);
  const polyline = document.createElementNS(ns, "polyline");
  polyline.setAttribute("fill", "none");
  polyline.setAttribute("stroke", "currentColor");
  polyline.setAttribute(
    "points",
    toChartCoords(points)
      .map(([x, y]) => `${x},${y}`)
      .join(" "),
  );
  svg.appendChild(polyline);
  container.appendChild(svg);
}

export function renderResults(
  container: HTMLElement,
  response: SearchResponse,
  onResultClick: (rank: number, url: string) => void,
): void {
  container.textContent = "";

  if (response.cumulative_completeness !== undefined) {
    const cumulative = document.createElement("div");
    cumulative.className = "score-badge cumulative-badge";
    cumulative.textContent =
      `You have seen ${response.cumulative_completeness} of 100 ` +
      "of the information available for this query";
    container.appendChild(cumulative);
  }

  if (response.curve !== undefined) {
    const chartBox = document.createElement("div");
    chartBox.className = "curve-box";
    renderCurve(chartBox, response.curve);
    container.appendChild(chartBox);
  }

  const list = document.createElement("ol");
  list.className = "results";
  for (const result of response.results) {
    const item = document.createElement("li");
    item.className = "result";

    const link = document.createElement("a");
    link.href = result.url;
    link.textContent = result.title;
    link.dataset.rank = String(result.rank);
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onResultClick(result.rank, result.url);
    });
    item.appendChild(link);

    const snippet = document.createElement("p");
    snippet.className = "snippet";
    snippet.textContent = result.snippet;
    item.appendChild(snippet);

    if (result.completeness !== undefined) {
      const badge = document.createElement("span");
      badge.className = "score-badge result-badge";
      badge.textContent = String(result.completeness);
      item.appendChild(badge);
    }
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderInstructions(container: HTMLElement): void {
  container.textContent = "";
  const panel = document.createElement("div");
  panel.className = "instructions";
  const heading = document.createElement("h2");
  heading.textContent = "Instructions";
  const text = document.createElement("p");
  text.textContent =
    "Search each assigned topic, read the results that interest you, and " +
    "use the sliders to adjust how results are balanced and how many are " +
    "shown (up to 100). Click any result to open it in a new tab.";
  panel.appendChild(heading);
  panel.appendChild(text);
  container.appendChild(panel);
}

export interface SurveyCallbacks {
  onSubmit: (answers: number[]) => void;
}

export function renderSurvey(
  container: HTMLElement,
  scale: ScaleDefinition,
  callbacks: SurveyCallbacks,
): void {
  container.textContent = "";
  const form = document.createElement("form");
  form.className = "survey";
  const hint = document.createElement("p");
  hint.className = "survey-hint";

  scale.items.forEach((text, index) => {
    const fieldset = document.createElement("fieldset");
    fieldset.className = "survey-item";
    fieldset.dataset.item = String(index);
    const legend = document.createElement("legend");
    legend.textContent = `${index + 1}. ${text}`;
    fieldset.appendChild(legend);
    for (const value of scale.presented_values) {
      const label = document.createElement("label");
      const input = document.createElement("input");
      input.type = "radio";
      input.name = `item-${index}`;
      input.value = String(value);
      label.appendChild(input);
      label.appendChild(document.createTextNode(String(value)));
      fieldset.appendChild(label);
    }
    form.appendChild(fieldset);
  });

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Submit";
  submit.disabled = true;
  form.appendChild(submit);
  form.appendChild(hint);

  const collect = (): (number | null)[] =>
    scale.items.map((_, index) => {
      const checked = form.querySelector<HTMLInputElement>(
        `input[name="item-${index}"]:checked`,
      );
      return checked ? Number(checked.value) : null;
    });

  const refresh = () => {
    const answers = collect();
    const missing = answers.findIndex((a) => a === null);
    submit.disabled = missing !== -1;
    hint.textContent =
      missing === -1 ? "" : `Please answer item ${missing + 1}`;
  };

  form.addEventListener("change", refresh);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const answers = collect();
    if (answers.every((a) => a !== null)) {
      callbacks.onSubmit(answers as number[]);
    }
  });
  refresh();
  container.appendChild(form);
}

export interface LoginCallbacks {
  onLogin: (participantId: string, password: string) => void;
}

export function renderLogin(
  container: HTMLElement,
  callbacks: LoginCallbacks,
  errorMessage = "",
): void {
  container.textContent = "";
  const form = document.createElement("form");
  form.className = "login";
  const id = document.createElement("input");
  id.name = "participant_id";
  id.placeholder = "Participant ID";
  const password = document.createElement("input");
  password.name = "password";
  password.type = "password";
  password.placeholder = "Password";
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Sign in";
  form.appendChild(id);
  form.appendChild(password);
  form.appendChild(submit);
  if (errorMessage) {
    const error = document.createElement("p");
    error.className = "login-error";
    error.textContent = errorMessage;
    form.appendChild(error);
  }
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    callbacks.onLogin(id.value, password.value);
  });
  container.appendChild(form);
}
