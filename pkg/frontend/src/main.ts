/** Browser bootstrap: the query form feeds the console controller. */
import { ApiClient } from "./api.js";
import { InvestigatorConsole } from "./console.js";
import { FilterConfigDoc } from "./types.js";

function field(id: string): HTMLInputElement {
  return document.getElementById(id) as HTMLInputElement;
}

function currentConfig(): FilterConfigDoc | undefined {
  const rate = field("cfg-rate-threshold").value.trim();
  const rssi = field("cfg-rssi-threshold").value.trim();
  const slots = field("cfg-slots").value.trim();
  if (!rate && !rssi && !slots) return undefined;  // server defaults
  return {
    slot_len: 30.0,
    slots_per_side: slots ? Number(slots) : 30,
    rssi_threshold: rssi ? Number(rssi) : -75.0,
    rate_threshold: rate ? Number(rate) : null,
    sides: "both",
  };
}

function init(): void {
  const root = document.getElementById("console-root") as HTMLElement;
  let ui: InvestigatorConsole | null = null;

  (document.getElementById("query-form") as HTMLFormElement).addEventListener(
    "submit", (ev) => {
      ev.preventDefault();
      const api = new ApiClient(field("base-url").value || "http://127.0.0.1:8750");
      ui = new InvestigatorConsole(api);
      ui.mount(root);
      void (async () => {
        const logId = field("log-id").value;
        await ui!.open(logId);
        // approximate time (scenario seconds) centers the queried window
        const approx = field("approx-time").value.trim();
        const span = Number(field("time-span").value || "1200");
        const from = approx ? Number(approx) - span / 2 : undefined;
        const to = approx ? Number(approx) + span / 2 : undefined;
        const wanted = field("ap-filter").value.trim();
        for (const ap of ui!.timelines.keys()) {
          if (!wanted || wanted === ap) {
            await ui!.loadSightings(ap, from, to);
          }
        }
      })();
    });

  (document.getElementById("apply-config") as HTMLButtonElement).addEventListener(
    "click", () => {
      ui?.setConfig(currentConfig());
    });
}

document.addEventListener("DOMContentLoaded", init);
