import { describe, expect, it, vi } from "vitest";
import { renderSurvey } from "../src/view";
import type { ScaleDefinition } from "../src/api";

const SCALE: ScaleDefinition = {
  name: "aot17",
  items: Array.from({ length: 17 }, (_, i) => `Statement ${i + 1}`),
  presented_values: [-3, -2, -1, 1, 2, 3],
};

function answerItem(form: HTMLElement, index: number, value: number) {
  const input = form.querySelector<HTMLInputElement>(
    `input[name="item-${index}"][value="${value}"]`,
  )!;
  input.checked = true;
  input.dispatchEvent(new Event("change", { bubbles: true }));
}

describe("survey flow", () => {
  it("presents six selectable values per item with no zero", () => {
    const container = document.createElement("div");
    renderSurvey(container, SCALE, { onSubmit: () => undefined });
    const items = container.querySelectorAll(".survey-item");
    expect(items).toHaveLength(17);
    for (const item of items) {
      const values = [...item.querySelectorAll("input")].map((i) =>
        Number(i.value),
      );
      expect(values).toEqual([-3, -2, -1, 1, 2, 3]);
    }
  });

  it("keeps submit disabled and points at the first missing item", () => {
    const container = document.createElement("div");
    renderSurvey(container, SCALE, { onSubmit: () => undefined });
    const submit = container.querySelector<HTMLButtonElement>(
      'button[type="submit"]',
    )!;
    expect(submit.disabled).toBe(true);

    for (let i = 0; i < 17; i += 1) {
      if (i !== 4) {
        answerItem(container, i, 2);
      }
    }
    expect(submit.disabled).toBe(true);
    expect(container.querySelector(".survey-hint")!.textContent).toBe(
      "Please answer item 5",
    );
  });

  it("submits all seventeen answers once every item is answered", () => {
    const container = document.createElement("div");
    const onSubmit = vi.fn();
    renderSurvey(container, SCALE, { onSubmit });
    for (let i = 0; i < 17; i += 1) {
      answerItem(container, i, i % 2 === 0 ? 3 : -1);
    }
    const submit = container.querySelector<HTMLButtonElement>(
      'button[type="submit"]',
    )!;
    expect(submit.disabled).toBe(false);
    container
      .querySelector("form")!
      .dispatchEvent(new Event("submit", { cancelable: true }));
    expect(onSubmit).toHaveBeenCalledTimes(1);
    const answers = onSubmit.mock.calls[0][0] as number[];
    expect(answers).toHaveLength(17);
    expect(answers.every((a) => [-3, -2, -1, 1, 2, 3].includes(a))).toBe(true);
  });
});
