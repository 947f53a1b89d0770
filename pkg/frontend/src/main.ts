/** Browser wiring: connect form, live stream, gauges, alerts, controls. */

import { SupervisorClient } from "./api.js";
import { AlertFeed } from "./alerts.js";
import { gaugesFrom } from "./gauges.js";
import {
  renderAlert,
  renderChainStatus,
  renderControls,
  renderGauge,
  renderHeader,
  renderRefusal,
  renderStaleBanner,
} from "./render.js";
import type { TelemetrySnapshot } from "./types.js";

interface Elements {
  form: HTMLFormElement;
  url: HTMLInputElement;
  token: HTMLInputElement;
  header: HTMLElement;
  gauges: HTMLElement;
  alerts: HTMLElement;
  controls: HTMLElement;
  chain: HTMLElement;
  banner: HTMLElement;
}

function grab(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

function collectElements(): Elements {
  return {
    form: grab("connect-form") as HTMLFormElement,
    url: grab("server-url") as HTMLInputElement,
    token: grab("server-token") as HTMLInputElement,
    header: grab("header"),
    gauges: grab("gauges"),
    alerts: grab("alerts"),
    controls: grab("controls"),
    chain: grab("chain"),
    banner: grab("banner"),
  };
}

class Dashboard {
  private client: SupervisorClient | null = null;
  private readonly feed = new AlertFeed();
  private last: TelemetrySnapshot | null = null;
  private abort: AbortController | null = null;
  private commandInFlight = false;

  constructor(private readonly el: Elements) {
    el.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.connect(el.url.value, el.token.value);
    });
    el.controls.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const command = target.dataset["command"];
      if (command !== undefined) {
        void this.send(command);
      }
    });
    el.alerts.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const key = target.dataset["dismiss"];
      if (key !== undefined) {
        this.feed.dismiss(key);
        this.paintAlerts();
      }
    });
  }

  private async connect(url: string, token: string): Promise<void> {
    this.abort?.abort();
    this.abort = new AbortController();
    this.client = new SupervisorClient(url, token);
    this.el.banner.innerHTML = "";
    try {
      for await (const snapshot of this.client.telemetry(undefined, this.abort.signal)) {
        this.last = snapshot;
        this.feed.ingest(snapshot.recent_flags);
        this.paint(snapshot);
      }
      // the server closed the stream: run finished or was killed
      if (this.last !== null) {
        this.paint(this.last);
      }
    } catch (error) {
      if (this.last !== null) {
        this.el.banner.innerHTML = renderStaleBanner(this.last.tick);
      } else {
        this.el.banner.innerHTML = renderRefusal(String(error));
      }
    }
    void this.refreshChain();
  }

  private async send(command: string): Promise<void> {
    if (this.client === null || this.commandInFlight) {
      return;
    }
    this.commandInFlight = true;
    try {
      const result =
        command === "pause"
          ? await this.client.pause()
          : command === "resume"
            ? await this.client.resume()
            : command === "kill"
              ? await this.client.kill()
              : null;
      if (result !== null && !result.body.ok && result.body.reason !== undefined) {
        this.el.banner.innerHTML = renderRefusal(result.body.reason);
      }
    } finally {
      this.commandInFlight = false;
    }
    void this.refreshChain();
  }

  private async refreshChain(): Promise<void> {
    if (this.client === null) {
      return;
    }
    try {
      const verdict = await this.client.verify();
      this.el.chain.innerHTML = renderChainStatus(verdict.ok, verdict.first_bad_seq);
    } catch {
      // leave the previous verdict in place; the stale banner covers outages
    }
  }

  private paint(snapshot: TelemetrySnapshot): void {
    this.el.header.innerHTML = renderHeader(snapshot);
    this.el.gauges.innerHTML = gaugesFrom(snapshot).map(renderGauge).join("");
    this.el.controls.innerHTML = renderControls(snapshot.state);
    this.paintAlerts();
  }

  private paintAlerts(): void {
    this.el.alerts.innerHTML = this.feed.active().map(renderAlert).join("");
  }
}

new Dashboard(collectElements());
