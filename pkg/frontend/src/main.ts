/** Browser shell: wires gestures to the service and re-renders from its
 * authoritative responses. At most one mutation is in flight; the view is
 * always rebuilt from the last server payloads, never patched locally. */

import { ApiError, SessionApi } from "./api.js";
import { demoCity } from "./demo.js";
import { historyLine, toViewState, type ViewState } from "./model.js";
import {
  renderDeltaPanel,
  renderOutcomes,
  renderRecommendationLabel,
  renderSvg,
} from "./render.js";
import type {
  ChangePayload,
  CityDoc,
  RecommendationResponse,
  SessionState,
  WhatIfReport,
} from "./types.js";
import { describeChange, sameChange } from "./types.js";

declare global {
  interface Window {
    DAYTRIP_API?: string;
  }
}

const API_BASE =
  typeof window !== "undefined" && window.DAYTRIP_API
    ? window.DAYTRIP_API
    : "http://127.0.0.1:8000";

class App {
  private api = new SessionApi(API_BASE);
  private city!: CityDoc;
  private state!: SessionState;
  private recommendation: RecommendationResponse | null = null;
  private preview: WhatIfReport | null = null;
  private history: string[] = [];
  private busy = false;

  async start(): Promise<void> {
    try {
      this.city = await fetch("./city.json").then((r) => (r.ok ? r.json() : demoCity()));
    } catch {
      this.city = demoCity();
    }
    this.state = await this.api.createSession(this.city);
    await this.refreshRecommendation();
    this.render();
  }

  private async refreshRecommendation(): Promise<void> {
    try {
      this.recommendation = await this.api.recommendation();
    } catch {
      this.recommendation = null;
    }
  }

  private async applyChange(change: ChangePayload): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const served = this.recommendation?.recommendation;
      this.state = await this.api.choose(change);
      const recommended = served !== undefined && sameChange(served, change);
      this.history.unshift(historyLine(this.state.iteration, change, recommended));
      this.preview = null;
      await this.refreshRecommendation();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.toast("that change is not legal right now");
        this.state = await this.api.state();
      } else {
        this.toast(`request failed: ${error}`);
      }
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private async hoverPreview(change: ChangePayload | null): Promise<void> {
    if (change === null) {
      if (this.preview !== null) {
        this.preview = null;
        this.render();
      }
      return;
    }
    try {
      this.preview = await this.api.whatif(describeChange(change));
      this.render();
    } catch {
      this.preview = null; // silent dismissal; retried on next hover
    }
  }

  private toast(message: string): void {
    const el = document.getElementById("toast");
    if (!el) return;
    el.textContent = message;
    el.classList.add("visible");
    setTimeout(() => el.classList.remove("visible"), 2500);
  }

  private view(): ViewState {
    return toViewState(this.city, this.state, this.recommendation, { preview: this.preview });
  }

  private render(): void {
    let view: ViewState;
    try {
      view = this.view();
    } catch (error) {
      const banner = document.getElementById("error-banner");
      if (banner) {
        banner.textContent = String(error);
        banner.classList.add("visible");
      }
      return; // no partial render on malformed payloads
    }
    document.getElementById("error-banner")?.classList.remove("visible");

    const map = document.getElementById("map");
    if (map) {
      map.innerHTML = renderSvg(view, this.city);
      for (const g of Array.from(map.querySelectorAll("g.poi"))) {
        const id = Number(g.getAttribute("data-poi"));
        const marker = view.markers.find((m) => m.id === id);
        if (!marker?.tapChange) continue;
        const change = marker.tapChange;
        g.addEventListener("click", () => void this.applyChange(change));
        g.addEventListener("mouseenter", () => void this.hoverPreview(change));
        g.addEventListener("mouseleave", () => void this.hoverPreview(null));
      }
    }

    const outcomes = document.getElementById("outcomes");
    if (outcomes) outcomes.innerHTML = renderOutcomes(view.outcomes);

    const panel = document.getElementById("whatif-panel");
    if (panel) {
      if (view.preview) {
        panel.innerHTML = renderDeltaPanel("what if?", view.preview.deltas, view.preview.utilityDelta);
      } else if (view.recommendation) {
        panel.innerHTML = renderDeltaPanel(
          renderRecommendationLabel(view),
          view.recommendation.whatif.outcome_deltas,
          view.recommendation.whatif.posterior_mean_utility_delta,
        );
      } else {
        panel.innerHTML = "<h3>no recommendation</h3>";
      }
    }

    const accept = document.getElementById("accept") as HTMLButtonElement | null;
    if (accept) {
      const rec = view.recommendation;
      accept.disabled = !rec || this.busy;
      accept.onclick = rec ? () => void this.applyChange(rec.change) : null;
    }

    const history = document.getElementById("history");
    if (history) {
      history.innerHTML = this.history.map((line) => `<li>${line}</li>`).join("");
    }

    const status = document.getElementById("status");
    if (status) {
      status.textContent =
        `iteration ${view.iteration} | posterior entropy ${view.posteriorEntropy.toFixed(2)}`;
    }
  }
}

if (typeof document !== "undefined" && document.getElementById("map")) {
  void new App().start();
}
