/** Candidate-table rendering. Rows appear exactly as served: the service
 * already ranks by rate sum, and the console does no filtering math of its
 * own -- every number displayed comes out of a service response. */
import { ResultTableDoc } from "./types.js";

function cell(doc: Document, tag: "td" | "th", text: string): HTMLElement {
  const el = doc.createElement(tag);
  el.textContent = text;
  return el;
}

export function renderResultTable(table: ResultTableDoc, doc: Document): HTMLElement {
  const wrap = doc.createElement("div");
  wrap.className = "result";

  if (table.rows.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty-result";
    empty.textContent =
      "No candidates cleared the thresholds at every target AP. " +
      "Lower the rate or RSSI threshold, or re-check the marked intervals, then run again.";
    wrap.appendChild(empty);
  } else {
    const el = doc.createElement("table");
    el.className = "result-table";
    const thead = doc.createElement("thead");
    const headRow = doc.createElement("tr");
    headRow.appendChild(cell(doc, "th", "mac"));
    for (const ap of table.target_aps) {
      headRow.appendChild(cell(doc, "th", `rate@${ap}`));
    }
    headRow.appendChild(cell(doc, "th", "sum"));
    thead.appendChild(headRow);
    el.appendChild(thead);

    const tbody = doc.createElement("tbody");
    for (const row of table.rows) {
      const tr = doc.createElement("tr");
      tr.appendChild(cell(doc, "td", row.mac));
      for (const ap of table.target_aps) {
        tr.appendChild(cell(doc, "td", row.rates[ap].toFixed(4)));
      }
      tr.appendChild(cell(doc, "td", row.sum.toFixed(4)));
      tbody.appendChild(tr);
    }
    el.appendChild(tbody);
    wrap.appendChild(el);
  }

  if (table.truncated_aps.length > 0) {
    const note = doc.createElement("p");
    note.className = "truncation-note";
    note.textContent =
      `Note: the log did not span the full slot window at: ${table.truncated_aps.join(", ")}. ` +
      "Absence beyond the log counts toward the rates.";
    wrap.appendChild(note);
  }
  return wrap;
}

/** Rendered cell texts, header first; handy for tests and copy/paste. */
export function tableCellTexts(root: HTMLElement): string[][] {
  const rows: string[][] = [];
  for (const tr of Array.from(root.querySelectorAll("tr"))) {
    rows.push(Array.from(tr.querySelectorAll("th, td")).map(
      (c) => c.textContent ?? ""));
  }
  return rows;
}
