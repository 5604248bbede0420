import { Dashboard } from "./app.js";
import { httpJson } from "./http.js";
import { realTimers } from "./timers.js";
import type { DashboardConfig } from "./types.js";

/**
 * Browser bootstrap: renders into `root`, delegates form events, and ties
 * heartbeats to the page's visibility. Everything under this shim is
 * plain data-in/data-out and tested headless.
 */
export function mountDashboard(
  root: HTMLElement,
  config: DashboardConfig,
  baseUrl = "",
): Dashboard {
  const dash = new Dashboard(config, httpJson(baseUrl), realTimers, Date.now, (html) => {
    // Keep half-typed operator inputs across the periodic re-render.
    const dateEl = root.querySelector<HTMLInputElement>('input[name="incentive-date"]');
    const amountEl = root.querySelector<HTMLSelectElement>('select[name="incentive-amount"]');
    const keepDate = dateEl?.value ?? "";
    const keepAmount = amountEl?.value ?? "";
    root.innerHTML = html;
    const dateEl2 = root.querySelector<HTMLInputElement>('input[name="incentive-date"]');
    const amountEl2 = root.querySelector<HTMLSelectElement>('select[name="incentive-amount"]');
    if (dateEl2 && keepDate !== "") dateEl2.value = keepDate;
    if (amountEl2 && keepAmount !== "") amountEl2.value = keepAmount;
  });

  root.addEventListener("change", (ev) => {
    const target = ev.target as HTMLInputElement | null;
    if (target?.name === "comfort") void dash.submitComfort(Number(target.value));
  });
  root.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement | null;
    if (target instanceof HTMLButtonElement && target.name === "post-incentive") {
      const dateEl = root.querySelector<HTMLInputElement>('input[name="incentive-date"]');
      const amountEl = root.querySelector<HTMLSelectElement>('select[name="incentive-amount"]');
      if (dateEl && amountEl) void dash.postIncentive(dateEl.value, Number(amountEl.value));
    } else if (target?.dataset["widget"] === "winner-banner") {
      void dash.acknowledgeWinner();
    }
  });
  document.addEventListener("visibilitychange", () =>
    dash.setVisible(document.visibilityState === "visible"),
  );

  dash.start(document.visibilityState === "visible");
  return dash;
}
